//! `orbitlab`: contraction checks, Picard traces, ratio profiles,
//! reproduction scenarios and separation search from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use orbitlab_core::check::{check_condition, sample_pairs, tightest_constant, PairSample};
use orbitlab_core::config::{parse_condition, parse_map, parse_measure, parse_point, parse_space, Defaults};
use orbitlab_core::metric::{MetricSpace, Point};
use orbitlab_core::pa::pa_ratio_profile;
use orbitlab_core::picard::{check_summability_bound, find_fixed_points, run_picard, DEFAULT_MAX_ITER};
use orbitlab_core::report::{write_profile_csv, Report, ReportVerdict, WitnessRecord};
use orbitlab_core::repro::{builtin_targets, comparison_table, run_all, ReproOptions, Scenario};
use orbitlab_core::search::{search_separation, SeparationQuery};
use orbitlab_core::{Family, SelfMap};

#[derive(Parser, Debug)]
#[command(name = "orbitlab", version, about = "Contraction conditions on metric spaces, checked on samples")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for sampling and search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write CSV output here (profiles, tables).
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Convergence tolerance for Picard iteration and fixed-point scans.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Orbit horizon H for path-averaged checks.
    #[arg(long, global = true, default_value_t = 16)]
    horizon: usize,
    /// Grid resolution for interval spaces.
    #[arg(long, global = true, default_value_t = 1001)]
    grid: usize,
    /// Truncation M of the harmonic space.
    #[arg(long, global = true, default_value_t = 10_000)]
    truncation: u64,
}

impl Global {
    fn defaults(&self) -> Defaults {
        Defaults {
            grid: self.grid,
            truncation: self.truncation,
            horizon: self.horizon,
        }
    }
}

#[derive(Args, Debug)]
struct Target {
    /// Space descriptor, e.g. `discrete:3`, `interval:0,1`, `harmonic`, `finite:m.csv`.
    #[arg(long)]
    space: String,
    /// Map descriptor, e.g. `table:1,2,2`, `square-half`, `successor`.
    #[arg(long)]
    map: String,
    /// Explicit pair `X,Y`; repeatable. Defaults to the space's standard sample.
    #[arg(long = "pair", value_name = "X,Y")]
    pairs: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a parametrized condition on a pair sample.
    Check {
        #[command(flatten)]
        target: Target,
        /// e.g. `banach:0.9`, `f:log,tau=0.1`, `pa:alpha=0.5,n=2`.
        #[arg(long)]
        condition: String,
    },
    /// Estimate the tightest constant of a family on a pair sample.
    Tightest {
        #[command(flatten)]
        target: Target,
        /// e.g. `banach`, `f:log`, `pa:n=5`.
        #[arg(long)]
        measure: String,
    },
    /// Run Picard iteration and optionally the summability bound.
    Picard {
        #[arg(long)]
        space: String,
        #[arg(long)]
        map: String,
        #[arg(long)]
        x0: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Check the summability bound at this alpha (needs --n-min).
        #[arg(long, requires = "n_min")]
        alpha: Option<f64>,
        #[arg(long, requires = "alpha")]
        n_min: Option<usize>,
    },
    /// Path-averaged ratio profile of one pair.
    Profile {
        #[arg(long)]
        space: String,
        #[arg(long)]
        map: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Reproduce a named scenario, or `all`.
    Repro {
        /// example-discrete, square-half, successor-harmonic or all.
        scenario: String,
    },
    /// Search random finite spaces for class-separation witnesses.
    Search {
        /// Families that must hold, comma-separated.
        #[arg(long, value_delimiter = ',')]
        hold: Vec<String>,
        /// Families that must fail, comma-separated.
        #[arg(long, value_delimiter = ',')]
        fail: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        min_points: usize,
        #[arg(long, default_value_t = 3)]
        max_points: usize,
        /// Largest N tried for the path-averaged constant.
        #[arg(long, default_value_t = 4)]
        max_n: usize,
    },
    /// Empirical comparison table over the built-in scenarios.
    Table {
        /// Trials per separation query behind the implication rows.
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
}

fn parse_pairs(raw: &[String], space: &MetricSpace, seed: u64) -> anyhow::Result<PairSample> {
    if raw.is_empty() {
        return Ok(sample_pairs(space, seed));
    }
    let pairs = raw
        .iter()
        .map(|p| {
            let (x, y) = p.split_once(',').with_context(|| format!("pair `{p}` is not X,Y"))?;
            Ok((parse_point(x, space)?, parse_point(y, space)?))
        })
        .collect::<anyhow::Result<Vec<(Point, Point)>>>()?;
    Ok(PairSample::new(pairs, "explicit pairs"))
}

fn load(global: &Global, space: &str, map: &str) -> anyhow::Result<(MetricSpace, SelfMap)> {
    let space = parse_space(space, &global.defaults())?;
    let map = parse_map(map, &space)?;
    Ok((space, map))
}

fn write_out(path: &Path, content: &str) -> anyhow::Result<()> {
    if path == Path::new("-") {
        println!("{content}");
        Ok(())
    } else {
        fs::write(path, content).with_context(|| format!("writing {}", path.display()))
    }
}

fn emit_json(global: &Global, value: &impl serde::Serialize) -> anyhow::Result<()> {
    if let Some(path) = &global.json {
        write_out(path, &serde_json::to_string_pretty(value)?)?;
    }
    Ok(())
}

fn print_witness(label: &str, w: &Option<WitnessRecord>) {
    if let Some(w) = w {
        let n = w.n.map(|n| format!(", n = {n}")).unwrap_or_default();
        println!("{label}: ({}, {}){n}, lhs = {}, rhs = {}", w.pair.0, w.pair.1, w.lhs, w.rhs);
    }
}

fn run(cli: Cli) -> anyhow::Result<ReportVerdict> {
    let g = &cli.global;
    match &cli.command {
        Command::Check { target, condition } => {
            let (space, map) = load(g, &target.space, &target.map)?;
            let spec = parse_condition(condition, &g.defaults())?;
            let pairs = parse_pairs(&target.pairs, &space, g.seed)?;
            let rep = check_condition(&spec, &space, &map, &pairs)?;
            let report = Report::from_check("check", &space, &map, &rep);
            println!(
                "{}: {} ({} pairs, {} instances)",
                spec.family(),
                serde_json::to_value(rep.verdict)?.as_str().unwrap_or_default(),
                rep.pairs_checked,
                rep.instances_checked
            );
            print_witness("witness", &report.witness);
            report.notes.iter().for_each(|n| println!("note: {n}"));
            emit_json(g, &report)?;
            Ok(report.verdict)
        }
        Command::Tightest { target, measure } => {
            let (space, map) = load(g, &target.space, &target.map)?;
            let measure = parse_measure(measure, &g.defaults())?;
            let pairs = parse_pairs(&target.pairs, &space, g.seed)?;
            let t = tightest_constant(&measure, &space, &map, &pairs)?;
            let mut report = Report::new("tightest").with_target(&space, &map);
            report.spec = Some(serde_json::to_value(measure)?);
            report.witness = Some(WitnessRecord::from(&t.witness));
            report.notes = t.notes.clone();
            report.data = Some(json!({
                "estimate": t.estimate,
                "bound": measure.family().bound(),
                "defined_instances": t.defined_count,
                "degenerate_instances": t.degenerate_count,
                "sample": pairs.descriptor,
            }));
            println!("{} tightest constant: {} (bound {})", measure.family(), t.estimate, measure.family().bound());
            print_witness("attained at", &report.witness);
            emit_json(g, &report)?;
            Ok(ReportVerdict::Pass)
        }
        Command::Picard {
            space,
            map,
            x0,
            max_iter,
            alpha,
            n_min,
        } => {
            let (space, map) = load(g, space, map)?;
            let x0 = parse_point(x0, &space)?;
            let trace = run_picard(&space, &map, &x0, g.tol, *max_iter)?;
            let mut report = Report::new("picard").with_target(&space, &map);
            let bound = match (alpha, n_min) {
                (Some(a), Some(n)) => Some(check_summability_bound(&trace, *a, *n)?),
                _ => None,
            };
            let limit = trace.limit_candidate.map(|p| p.to_string()).unwrap_or_else(|| "none".into());
            println!(
                "status: {:?}, steps: {}, limit: {limit}, residual: {}, total: {}",
                trace.status,
                trace.steps.len(),
                trace.residual.map(|r| r.to_string()).unwrap_or_else(|| "none".into()),
                trace.total()
            );
            let converged = trace.status == orbitlab_core::PicardStatus::Converged;
            let mut pass = converged;
            if let Some(b) = &bound {
                println!("summability bound (alpha = {}, N = {}): C = {}, passed = {}", b.alpha, b.n_min, b.c, b.passed);
                pass &= b.passed;
            }
            let fixed = find_fixed_points(&space, &map, space.enumerable_len(), g.tol)?;
            report.data = Some(json!({ "trace": trace, "bound": bound, "fixed_points": fixed }));
            report.notes = orbitlab_core::check::flag_notes(trace.flags);
            report.verdict = if pass { ReportVerdict::Pass } else { ReportVerdict::Fail };
            emit_json(g, &report)?;
            Ok(report.verdict)
        }
        Command::Profile { space, map, x, y } => {
            let (space, map) = load(g, space, map)?;
            let (x, y) = (parse_point(x, &space)?, parse_point(y, &space)?);
            let rows = pa_ratio_profile(&space, &map, &x, &y, g.horizon)?;
            let mut buf = Vec::new();
            write_profile_csv(&rows, &mut buf)?;
            let csv = String::from_utf8(buf)?;
            match &g.csv {
                Some(p) => write_out(p, csv.trim_end())?,
                None => print!("{csv}"),
            }
            let mut report = Report::new("profile").with_target(&space, &map);
            report.data = Some(json!({ "x": x, "y": y, "rows": rows }));
            emit_json(g, &report)?;
            Ok(ReportVerdict::Pass)
        }
        Command::Repro { scenario } => {
            let opts = ReproOptions {
                grid: g.grid,
                horizon: g.horizon,
                seed: g.seed,
                ..ReproOptions::default()
            };
            let reports = if scenario == "all" {
                run_all(&opts)?
            } else {
                vec![Scenario::parse(scenario)?.run(&opts)?]
            };
            for r in &reports {
                let failed: Vec<&str> = r
                    .measurements
                    .iter()
                    .filter(|m| !m.pass && !m.discrepancy)
                    .map(|m| m.name.as_str())
                    .collect();
                let name = r.scenario.as_deref().unwrap_or("?");
                println!(
                    "{name}: {} ({} measurements{})",
                    if r.all_pass() { "pass" } else { "fail" },
                    r.measurements.len(),
                    if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join(", ")) }
                );
                for n in &r.notes {
                    println!("  note: {n}");
                }
            }
            if scenario == "all" {
                emit_json(g, &reports)?;
            } else {
                emit_json(g, &reports[0])?;
            }
            Ok(if reports.iter().all(Report::all_pass) {
                ReportVerdict::Pass
            } else {
                ReportVerdict::Fail
            })
        }
        Command::Search {
            hold,
            fail,
            trials,
            min_points,
            max_points,
            max_n,
        } => {
            let hold = hold.iter().map(|s| Family::parse(s)).collect::<Result<Vec<_>, _>>()?;
            let fail = fail.iter().map(|s| Family::parse(s)).collect::<Result<Vec<_>, _>>()?;
            if hold.is_empty() && fail.is_empty() {
                bail!("search needs at least one --hold or --fail family");
            }
            let q = SeparationQuery::new(hold, fail, *trials, g.seed)?
                .with_point_counts(*min_points..=*max_points)?
                .with_n_range(1..=*max_n)?;
            let out = search_separation(&q)?;
            println!("{}", out.summary);
            if let Some(w) = out.witnesses.first() {
                println!("first witness: trial {}, {} points, table {:?}", w.trial, w.table.len(), w.table);
            }
            let mut report = Report::new("search");
            report.notes.push(out.summary.clone());
            report.data = Some(serde_json::to_value(&out)?);
            emit_json(g, &report)?;
            Ok(ReportVerdict::Pass)
        }
        Command::Table { trials } => {
            let opts = ReproOptions {
                grid: g.grid,
                horizon: g.horizon,
                seed: g.seed,
                search_trials: *trials,
            };
            let table = comparison_table(&builtin_targets(&opts)?, &opts)?;
            print!("{}", table.to_markdown());
            if let Some(p) = &g.csv {
                write_out(p, table.to_csv().trim_end())?;
            }
            let mut report = Report::new("table");
            report.data = Some(serde_json::to_value(&table)?);
            emit_json(g, &report)?;
            Ok(ReportVerdict::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(v) => ExitCode::from(v.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
