//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach stdout; exits non-zero on any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orbitlab_core::check::{check_condition, sample_pairs, tightest_constant, Measure, PairSample, Verdict};
use orbitlab_core::conditions::{evaluate_condition, ConditionSpec, FFunction};
use orbitlab_core::metric::{enumerate_points, MetricSpace, Point};
use orbitlab_core::pa::PaSums;
use orbitlab_core::picard::{check_summability_bound, find_fixed_points, run_picard, PicardStatus};
use orbitlab_core::report::Report;
use orbitlab_core::repro::{run_all, ReproOptions, Scenario};
use orbitlab_core::search::sample_banach_cases;
use orbitlab_core::SelfMap;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn real(p: &Point) -> f64 {
    match p {
        Point::Real(x) => *x,
        _ => f64::NAN,
    }
}

fn nat(p: &Point) -> u64 {
    match p {
        Point::Nat(n) => *n,
        _ => 0,
    }
}

fn measurement<'a>(r: &'a Report, name: &str) -> Result<&'a orbitlab_core::Measurement, String> {
    r.measurements
        .iter()
        .find(|m| m.name == name)
        .ok_or_else(|| format!("measurement {name} missing"))
}

/// Best of `runs` timings after one warm-up call.
fn timed<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut out = f();
    let mut best = Duration::MAX;
    for _ in 0..runs {
        let t = Instant::now();
        out = f();
        best = best.min(t.elapsed());
    }
    (out, best)
}

fn c1_discrete_tables() -> Outcome {
    let opts = ReproOptions::default();
    let (r, dt) = timed(5, || Scenario::ExampleDiscrete.run(&opts));
    let r = r.map_err(|e| e.to_string())?;
    for (name, want) in [
        ("pair_0_1_lhs_n2", 1.0),
        ("pair_0_1_rhs_n2", 1.0),
        ("pair_0_2_lhs_n2", 1.0),
        ("pair_0_2_rhs_n2", 1.0),
        ("pair_1_2_lhs_n2", 0.0),
        ("pair_1_2_rhs_n2", 0.5),
        ("banach_tightest", 1.0),
    ] {
        let m = measurement(&r, name)?;
        ensure!(m.value.as_f64() == Some(want), "{name} = {} != {want}", m.value);
    }
    ensure!(measurement(&r, "pa_alpha_0.5_n2_holds")?.pass, "PA (0.5, 2, 16) not HoldsOnSample");
    ensure!(r.all_pass(), "scenario has failing measurements");
    ensure!(dt < Duration::from_millis(1), "runtime {dt:?} >= 1 ms");
    Ok(format!("exact tables, PA holds, Banach 1.0, {dt:?}"))
}

fn c2_kannan_refutation() -> Outcome {
    let space = MetricSpace::unit_interval();
    let spec = ConditionSpec::kannan(0.49).map_err(|e| e.to_string())?;
    let (e, dt) = timed(20, || {
        evaluate_condition(&spec, &space, &SelfMap::SquareHalf, &Point::Real(1.0), &Point::Real(0.0))
    });
    let e = e.map_err(|e| e.to_string())?;
    ensure!(e.lhs == 0.5, "lhs = {}", e.lhs);
    ensure!(e.kernel == Some(0.5), "kernel = {:?}", e.kernel);
    let k = e.implied_constant().unwrap_or(f64::NAN);
    ensure!((k - 1.0).abs() <= 1e-15, "implied k = {k}");
    ensure!(dt < Duration::from_millis(1), "runtime {dt:?} >= 1 ms");
    Ok(format!("lhs 0.5, kernel 0.5, implied k {k}, {dt:?}"))
}

fn c3_harmonic_closed_forms() -> Outcome {
    let start = Instant::now();
    let space = MetricSpace::harmonic(25_000).map_err(|e| e.to_string())?;
    let map = SelfMap::successor(25_000);
    let (mut worst_a, mut worst_a1) = (0.0f64, 0.0f64);
    let mut first_above = None;
    let mut tail_min = f64::INFINITY;
    for n in 1..=10_000u64 {
        let h = n as usize;
        let s = PaSums::compute(&space, &map, &Point::Nat(n), &Point::Nat(n + 1), h).map_err(|e| e.to_string())?;
        let nf = n as f64;
        let (a, a1) = (s.sums[h] / nf, s.shifted[h] / nf);
        let (wa, wa1) = (1.0 / (2.0 * nf * nf), 1.0 / ((nf + 1.0) * (2.0 * nf + 1.0)));
        worst_a = worst_a.max((a - wa).abs() / wa);
        worst_a1 = worst_a1.max((a1 - wa1).abs() / wa1);
        let ratio = a1 / a;
        if ratio > 0.9 && first_above.is_none() {
            first_above = Some(n);
        }
        if n >= 150 {
            tail_min = tail_min.min(ratio);
        }
    }
    let dt = start.elapsed();
    ensure!(worst_a <= 1e-12, "S[n]/n relative error {worst_a:e}");
    ensure!(worst_a1 <= 1e-12, "S1[n]/n relative error {worst_a1:e}");
    ensure!(tail_min >= 0.99, "ratio {tail_min} < 0.99 for some n >= 150");
    ensure!(first_above == Some(14), "first n with ratio > 0.9 is {first_above:?}");
    ensure!(dt < Duration::from_secs(5), "runtime {dt:?} >= 5 s");
    Ok(format!("max rel err {:.1e}/{:.1e}, first n 14, tail min {tail_min:.6}, {dt:?}", worst_a, worst_a1))
}

fn c4_pa_refutation_successor() -> Outcome {
    let space = MetricSpace::harmonic(10_000).map_err(|e| e.to_string())?;
    let map = SelfMap::successor(10_000);
    let pairs = PairSample::successive_naturals(1, 500);
    let mut found = Vec::new();
    for alpha in [0.5, 0.9, 0.99] {
        let spec = ConditionSpec::pa(alpha, 2, 500).map_err(|e| e.to_string())?;
        let rep = check_condition(&spec, &space, &map, &pairs).map_err(|e| e.to_string())?;
        ensure!(rep.verdict == Verdict::Violated, "alpha {alpha}: {:?}", rep.verdict);
        let w = rep.witness.ok_or("no witness")?;
        let (n0, h) = (nat(&w.pair.0) as f64, w.n.ok_or("witness without n")? as f64);
        let closed = n0 * (n0 + h) / ((n0 + 1.0) * (n0 + h + 1.0));
        let got = w.lhs / (w.rhs / alpha);
        ensure!((got - closed).abs() <= 1e-12 * closed, "alpha {alpha}: ratio {got} vs {closed}");
        found.push(format!("({}, h={})", n0, h));
    }
    Ok(format!("witnesses {}", found.join(" ")))
}

fn c5_picard() -> Outcome {
    let unit = MetricSpace::unit_interval();
    let t = run_picard(&unit, &SelfMap::SquareHalf, &Point::Real(1.0), 1e-12, 1_000_000).map_err(|e| e.to_string())?;
    ensure!(t.status == PicardStatus::Converged, "status {:?}", t.status);
    let limit = real(&t.limit_candidate.ok_or("no limit")?);
    ensure!(limit.abs() <= 1e-12, "limit {limit}");
    let residual = t.residual.ok_or("no residual")?;
    ensure!(residual <= 1e-12, "residual {residual}");
    for n in 0..=6usize {
        let want = 1.0 - 1.0 / 2f64.powi((1i32 << n) - 1);
        ensure!((t.partial_sums[n] - want).abs() <= 1e-12, "S_{n} = {} vs {want}", t.partial_sums[n]);
    }
    ensure!((t.total() - 1.0).abs() <= 1e-9, "total {}", t.total());

    let discrete = MetricSpace::discrete(3).map_err(|e| e.to_string())?;
    let map = SelfMap::table(vec![1, 2, 2]).map_err(|e| e.to_string())?;
    let d = run_picard(&discrete, &map, &Point::Index(0), 1e-12, 1_000_000).map_err(|e| e.to_string())?;
    ensure!(d.limit_candidate == Some(Point::Index(2)), "discrete limit {:?}", d.limit_candidate);
    ensure!(d.steps.len() == 3, "discrete steps {}", d.steps.len());
    ensure!(d.total() == 2.0, "discrete total {}", d.total());
    Ok(format!("square-half total {:.15}, {} steps; discrete limit 2 in 3 steps", t.total(), t.steps.len()))
}

fn c6_summability() -> Outcome {
    let discrete = MetricSpace::discrete(3).map_err(|e| e.to_string())?;
    let map = SelfMap::table(vec![1, 2, 2]).map_err(|e| e.to_string())?;
    let d = run_picard(&discrete, &map, &Point::Index(0), 1e-12, 1_000_000).map_err(|e| e.to_string())?;
    let b = check_summability_bound(&d, 0.5, 2).map_err(|e| e.to_string())?;
    ensure!(b.passed, "discrete bound failed");
    ensure!(b.c == 2.0, "discrete C = {}", b.c);
    ensure!(b.rows.iter().all(|r| r.s_n <= 2.0), "discrete S_n above 2");
    ensure!(b.rows.last().map(|r| r.s_n) == Some(2.0), "discrete S at the limit is not 2");

    let t = run_picard(&MetricSpace::unit_interval(), &SelfMap::SquareHalf, &Point::Real(1.0), 1e-12, 1_000_000)
        .map_err(|e| e.to_string())?;
    let b = check_summability_bound(&t, 0.7, 5).map_err(|e| e.to_string())?;
    ensure!(b.passed, "square-half bound failed");
    ensure!((b.c - 5.0 / 3.0).abs() <= 1e-12, "square-half C = {}", b.c);
    ensure!((t.total() - 1.0).abs() <= 1e-9, "square-half S = {}", t.total());
    Ok(format!("C = 2 and C = {:.12}", b.c))
}

fn c7_c8_banach_cases() -> (Outcome, Outcome) {
    let start = Instant::now();
    let cases = match sample_banach_cases(200, 12, 0.95, 2024, 1_000_000) {
        Ok(c) => c,
        Err(e) => return (Err(e.to_string()), Err("no cases".into())),
    };
    let mut holds = 0;
    let mut failures = Vec::new();
    for c in &cases {
        let pairs = sample_pairs(&c.space, 0);
        let ok = ConditionSpec::pa(c.k_hat, 1, 20)
            .and_then(|spec| check_condition(&spec, &c.space, &c.map, &pairs))
            .map(|r| r.verdict == Verdict::HoldsOnSample);
        match ok {
            Ok(true) => holds += 1,
            Ok(false) => failures.push(c.trial),
            Err(e) => failures.push({
                eprintln!("trial {}: {e}", c.trial);
                c.trial
            }),
        }
    }
    let dt = start.elapsed();
    let c7 = (|| {
        ensure!(cases.len() == 200, "only {} cases found", cases.len());
        ensure!(holds == 200, "PA held in {holds}/200 cases; failing trials {failures:?}");
        ensure!(dt < Duration::from_secs(10), "runtime {dt:?} >= 10 s");
        Ok(format!("200/200, {dt:?}"))
    })();

    let c8 = (|| {
        ensure!(cases.len() == 200, "only {} cases found", cases.len());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for c in &cases {
            let fixed = find_fixed_points(&c.space, &c.map, usize::MAX, 1e-12).map_err(|e| e.to_string())?;
            ensure!(fixed.len() == 1, "trial {}: {} fixed points", c.trial, fixed.len());
            let n = c.space.enumerable_len();
            for _ in 0..3 {
                let x0 = Point::Index(rng.gen_range(0..n));
                let t = run_picard(&c.space, &c.map, &x0, 1e-12, 10_000).map_err(|e| e.to_string())?;
                ensure!(
                    t.limit_candidate == Some(fixed[0]),
                    "trial {}: Picard from {x0} reached {:?}, fixed point {}",
                    c.trial,
                    t.limit_candidate,
                    fixed[0]
                );
            }
        }
        Ok("unique fixed point equals 3 Picard limits in every case".to_string())
    })();
    (c7, c8)
}

fn c9_f_refutation() -> Outcome {
    let space = MetricSpace::unit_interval();
    let map = SelfMap::SquareHalf;
    let pairs = sample_pairs(&space, 0);
    let window_points: Vec<Point> = enumerate_points(&space, space.enumerable_len())
        .into_iter()
        .filter(|p| real(p) >= 0.99 - 1e-12)
        .collect();
    let window = PairSample::all_pairs_of(&window_points, "window");
    let near_one = |w: &orbitlab_core::Witness| real(&w.pair.0).min(real(&w.pair.1)) >= 1.0 - 1e-2 - 1e-12;
    for tau in [0.1, 0.01, 0.001] {
        let spec = ConditionSpec::f_contraction(FFunction::Log, tau).map_err(|e| e.to_string())?;
        let full = check_condition(&spec, &space, &map, &pairs).map_err(|e| e.to_string())?;
        ensure!(full.verdict == Verdict::Violated, "tau {tau}: full grid holds");
        let worst = full.worst.as_ref().ok_or("no worst witness")?;
        ensure!(near_one(worst), "tau {tau}: worst witness {:?}", worst.pair);
        let win = check_condition(&spec, &space, &map, &window).map_err(|e| e.to_string())?;
        ensure!(win.verdict == Verdict::Violated, "tau {tau}: window holds");
        let w = win.witness.as_ref().ok_or("no window witness")?;
        ensure!(near_one(w), "tau {tau}: window witness {:?}", w.pair);
    }
    let sup = tightest_constant(&Measure::FContraction { f: FFunction::Log }, &space, &map, &window)
        .map_err(|e| e.to_string())?
        .estimate;
    let bound = (2.0f64 / 1.98).ln() + 1e-9;
    ensure!(sup <= bound, "admissible tau {sup} > {bound}");
    Ok(format!("violated for all tau, window tau sup {sup:.9}"))
}

fn c10_discrepancies() -> Outcome {
    let opts = ReproOptions::default();
    let sq = Scenario::SquareHalf.run(&opts).map_err(|e| e.to_string())?;
    let alpha = measurement(&sq, "pa_alpha_n5")?.value.as_f64().ok_or("alpha not numeric")?;
    ensure!(alpha > 0.55 && alpha < 0.75 && alpha < 1.0, "alpha(N=5) = {alpha}");
    let claim = measurement(&sq, "pa_alpha_n5_vs_claimed_0.4")?;
    ensure!(claim.discrepancy, "0.4 comparison is not marked as a discrepancy");
    ensure!(sq.notes.iter().any(|n| n.contains("0.4")), "no note comparing with 0.4");
    ensure!(sq.all_pass(), "square-half scenario failed");

    let sh = Scenario::SuccessorHarmonic.run(&opts).map_err(|e| e.to_string())?;
    let chat = measurement(&sh, "chatterjea_sup_n_le_1000")?.value.as_f64().ok_or("sup not numeric")?;
    ensure!(chat > 0.499 && chat < 0.5, "chatterjea sup {chat}");
    ensure!(measurement(&sh, "chatterjea_boundary")?.value.as_bool() == Some(true), "no boundary flag");
    ensure!(sh.all_pass(), "successor-harmonic scenario failed");
    Ok(format!("alpha(N=5) = {alpha:.6}, chatterjea sup {chat:.10} (boundary)"))
}

fn c11_determinism() -> Outcome {
    let opts = ReproOptions::default();
    let render = || -> Result<String, String> {
        let reports = run_all(&opts).map_err(|e| e.to_string())?;
        Ok(reports.iter().map(Report::to_json).collect::<Vec<_>>().join("\n"))
    };
    let (a, b) = (render()?, render()?);
    ensure!(a == b, "two runs differ");
    Ok(format!("{} bytes identical", a.len()))
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 discrete example tables", c1_discrete_tables()),
        ("2 kannan refutation", c2_kannan_refutation()),
        ("3 harmonic closed forms", c3_harmonic_closed_forms()),
        ("4 PA refutation for successor", c4_pa_refutation_successor()),
        ("5 picard convergence", c5_picard()),
        ("6 summability bound", c6_summability()),
    ];
    let (c7, c8) = c7_c8_banach_cases();
    results.push(("7 banach implies PA", c7));
    results.push(("8 uniqueness", c8));
    results.push(("9 F-contraction refutation", c9_f_refutation()));
    results.push(("10 discrepancy diagnostics", c10_discrepancies()));
    results.push(("11 determinism", c11_determinism()));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({why})");
            }
        }
    }
    println!("acceptance: {}/{} passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
