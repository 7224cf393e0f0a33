use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::{classify_refined, harmonic_pairs, membership_of, Membership, ReproOptions, HARMONIC_REPRO_TRUNCATION};
use crate::check::{sample_pairs, PairSample};
use crate::conditions::{FFunction, Family};
use crate::error::{Error, Result};
use crate::maps::SelfMap;
use crate::metric::{IntervalSpace, MetricSpace};
use crate::report::Descriptor;
use crate::search::{search_separation, Classification, SeparationQuery};

/// A (space, map) scenario with the samples its verdicts are measured on.
#[derive(Clone, Debug)]
pub struct Target {
    pub name: String,
    pub space: MetricSpace,
    pub map: SelfMap,
    pub fine: PairSample,
    /// Coarser sample used to detect constants converging to a bound.
    pub coarse: Option<PairSample>,
    pub n_range: RangeInclusive<usize>,
    pub horizon: usize,
}

/// The three built-in scenarios.
pub fn builtin_targets(opts: &ReproOptions) -> Result<Vec<Target>> {
    opts.validate()?;
    let discrete = MetricSpace::discrete(3)?;
    let unit = MetricSpace::interval(0.0, 1.0, opts.grid)?;
    let unit_coarse = MetricSpace::RealInterval(IntervalSpace::new(0.0, 1.0, opts.grid.div_ceil(2))?);
    let harmonic = MetricSpace::harmonic(HARMONIC_REPRO_TRUNCATION)?;
    Ok(vec![
        Target {
            name: "example-discrete".into(),
            fine: sample_pairs(&discrete, opts.seed),
            space: discrete,
            map: SelfMap::table(vec![1, 2, 2])?,
            coarse: None,
            n_range: 1..=4,
            horizon: opts.horizon,
        },
        Target {
            name: "square-half".into(),
            fine: sample_pairs(&unit, opts.seed),
            coarse: Some(sample_pairs(&unit_coarse, opts.seed)),
            space: unit,
            map: SelfMap::SquareHalf,
            n_range: 1..=5,
            horizon: opts.horizon,
        },
        Target {
            name: "successor-harmonic".into(),
            fine: harmonic_pairs(&harmonic, 1000),
            coarse: Some(harmonic_pairs(&harmonic, 500)),
            space: harmonic,
            map: SelfMap::successor(HARMONIC_REPRO_TRUNCATION),
            n_range: 1..=5,
            horizon: opts.horizon,
        },
    ])
}

/// Parameters needed to re-derive a column with the checker directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetInfo {
    pub name: String,
    pub space: Descriptor,
    pub map: Descriptor,
    pub sample: String,
    pub coarse_sample: Option<String>,
    pub n_range: (usize, usize),
    pub horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub membership: Membership,
    pub estimate: Option<f64>,
    pub coarse_estimate: Option<f64>,
    pub n_min: Option<usize>,
    pub f: Option<FFunction>,
}

impl Cell {
    fn render(&self) -> String {
        let mut s = format!("{} ({}", self.membership.label(), fmt_estimate(self.estimate));
        if let Some(n) = self.n_min {
            let _ = write!(s, ", N={n}");
        }
        if let Some(f) = self.f {
            let _ = write!(s, ", F={}", f.name());
        }
        s.push(')');
        s
    }
}

fn fmt_estimate(e: Option<f64>) -> String {
    match e {
        None => "vacuous".into(),
        Some(v) if v.is_infinite() => "inf".into(),
        Some(v) => format!("{v:.6}"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub family: Family,
    pub cells: Vec<Cell>,
}

/// A qualitative row with one entry per family, in [`Family::ALL`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyRow {
    pub property: String,
    pub values: Vec<String>,
    /// `static` rows are annotations; `measured` rows combine search and
    /// target evidence with the reported entry.
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub targets: Vec<TargetInfo>,
    pub rows: Vec<FamilyRow>,
    pub properties: Vec<PropertyRow>,
    pub search_trials: usize,
    pub search_seed: u64,
}

const STATIC_ROWS: [(&str, [&str; 6]); 5] = [
    ("pointwise inequality", ["yes", "yes", "yes", "yes", "yes", "no (averaged)"]),
    ("requires continuity", ["no", "no", "no", "no", "no", "yes (for fixed point)"]),
    ("generalizes banach", ["no", "yes", "yes", "yes", "yes", "yes"]),
    ("summable d(T^n x, T^(n+1) x)", ["yes", "yes", "yes", "yes", "sometimes", "yes"]),
    ("based on orbits/averages", ["no", "no", "no", "no", "no", "yes"]),
];

/// Reported entries of the implication rows for the five non-PA families.
const REPORTED_IMPLIES_PA: [&str; 5] = ["yes", "no", "no", "no", "open"];
const REPORTED_PA_IMPLIES: [&str; 5] = ["no", "no", "open", "open", "no"];

fn reported(entry: &str) -> String {
    if entry == "open" {
        "open (reported)".into()
    } else {
        format!("reported {entry}")
    }
}

const SEARCH_POINTS: RangeInclusive<usize> = 2..=6;

/// Builds the membership table over `targets` and the property rows.
pub fn comparison_table(targets: &[Target], opts: &ReproOptions) -> Result<ComparisonTable> {
    if targets.is_empty() {
        return Err(Error::InvalidParameter("comparison table needs at least one target".into()));
    }
    let mut classes: Vec<(Classification, Option<Classification>)> = Vec::with_capacity(targets.len());
    for t in targets {
        classes.push(classify_refined(
            &t.space,
            &t.map,
            &t.fine,
            t.coarse.as_ref(),
            t.n_range.clone(),
            t.horizon,
        )?);
    }
    let label = |ti: usize, family: Family| membership_of(family, &classes[ti].0, classes[ti].1.as_ref());

    let rows = Family::ALL
        .iter()
        .map(|&family| FamilyRow {
            family,
            cells: classes
                .iter()
                .enumerate()
                .map(|(ti, (fine, coarse))| {
                    let v = fine.get(family);
                    Cell {
                        membership: label(ti, family),
                        estimate: v.estimate,
                        coarse_estimate: coarse.as_ref().and_then(|c| c.get(family).estimate),
                        n_min: v.n_min,
                        f: v.f,
                    }
                })
                .collect(),
        })
        .collect();

    let mut properties: Vec<PropertyRow> = STATIC_ROWS
        .iter()
        .map(|(p, v)| PropertyRow {
            property: p.to_string(),
            values: v.iter().map(|s| s.to_string()).collect(),
            provenance: "static".into(),
        })
        .collect();

    let evidence = |hold: Family, fail: Family| -> Result<String> {
        if let Some(ti) = (0..targets.len())
            .find(|&ti| label(ti, hold) == Membership::Member && label(ti, fail) == Membership::NonMember)
        {
            return Ok(format!("no ({})", targets[ti].name));
        }
        let q = SeparationQuery::new(vec![hold], vec![fail], opts.search_trials, opts.seed)?
            .with_point_counts(SEARCH_POINTS)?;
        let out = search_separation(&q)?;
        Ok(match out.witnesses.first() {
            Some(w) => format!("no (search trial {})", w.trial),
            None => format!("no counterexample in {} trials", opts.search_trials),
        })
    };
    let others = &Family::ALL[..5];
    let mut implies = Vec::with_capacity(6);
    let mut implied = Vec::with_capacity(6);
    for (i, &f) in others.iter().enumerate() {
        implies.push(format!("{}; {}", evidence(f, Family::Pa)?, reported(REPORTED_IMPLIES_PA[i])));
        implied.push(format!("{}; {}", evidence(Family::Pa, f)?, reported(REPORTED_PA_IMPLIES[i])));
    }
    implies.push("-".into());
    implied.push("-".into());
    properties.push(PropertyRow {
        property: "implies pa".into(),
        values: implies,
        provenance: "measured".into(),
    });
    properties.push(PropertyRow {
        property: "pa implies".into(),
        values: implied,
        provenance: "measured".into(),
    });

    Ok(ComparisonTable {
        targets: targets
            .iter()
            .map(|t| TargetInfo {
                name: t.name.clone(),
                space: Descriptor::space(&t.space),
                map: Descriptor::map(&t.map),
                sample: t.fine.descriptor.clone(),
                coarse_sample: t.coarse.as_ref().map(|c| c.descriptor.clone()),
                n_range: (*t.n_range.start(), *t.n_range.end()),
                horizon: t.horizon,
            })
            .collect(),
        rows,
        properties,
        search_trials: opts.search_trials,
        search_seed: opts.seed,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ComparisonTable {
    pub fn cell(&self, family: Family, target: &str) -> Option<&Cell> {
        let ti = self.targets.iter().position(|t| t.name == target)?;
        self.rows.iter().find(|r| r.family == family).map(|r| &r.cells[ti])
    }

    /// One row per family; per target a membership and an estimate column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family");
        for t in &self.targets {
            let _ = write!(out, ",{0}_membership,{0}_estimate", t.name);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(row.family.name());
            for c in &row.cells {
                let est = c.estimate.map(|v| v.to_string()).unwrap_or_default();
                let _ = write!(out, ",{},{}", c.membership.label(), est);
            }
            out.push('\n');
        }
        out
    }

    pub fn properties_csv(&self) -> String {
        let mut out = String::from("property");
        for f in Family::ALL {
            let _ = write!(out, ",{}", f.name());
        }
        out.push_str(",provenance\n");
        for p in &self.properties {
            out.push_str(&csv_field(&p.property));
            for v in &p.values {
                let _ = write!(out, ",{}", csv_field(v));
            }
            let _ = writeln!(out, ",{}", p.provenance);
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| family |");
        for t in &self.targets {
            let _ = write!(out, " {} |", t.name);
        }
        out.push_str("\n| --- |");
        out.push_str(&" --- |".repeat(self.targets.len()));
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "| {} |", row.family.name());
            for c in &row.cells {
                let _ = write!(out, " {} |", c.render());
            }
            out.push('\n');
        }
        out.push_str("\n| property |");
        for f in Family::ALL {
            let _ = write!(out, " {} |", f.name());
        }
        out.push_str(" provenance |\n| --- |");
        out.push_str(&" --- |".repeat(Family::ALL.len() + 1));
        out.push('\n');
        for p in &self.properties {
            let _ = write!(out, "| {} |", p.property);
            for v in &p.values {
                let _ = write!(out, " {v} |");
            }
            let _ = writeln!(out, " {} |", p.provenance);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::{tightest_constant, Measure};

    fn discrete_only() -> (Vec<Target>, ReproOptions) {
        let opts = ReproOptions {
            search_trials: 200,
            ..ReproOptions::default()
        };
        let t = builtin_targets(&opts).unwrap().into_iter().take(1).collect();
        (t, opts)
    }

    #[test]
    fn discrete_column() {
        let (targets, opts) = discrete_only();
        let table = comparison_table(&targets, &opts).unwrap();
        let b = table.cell(Family::Banach, "example-discrete").unwrap();
        assert_eq!(b.membership, Membership::NonMember);
        assert_eq!(b.estimate, Some(1.0));
        let pa = table.cell(Family::Pa, "example-discrete").unwrap();
        assert_eq!(pa.membership, Membership::Member);
        assert_eq!((pa.estimate, pa.n_min), (Some(0.5), Some(2)));
        // Re-derivable with the checker directly.
        let t = &targets[0];
        let direct = tightest_constant(&Measure::Pa { n_min: 2, horizon: t.horizon }, &t.space, &t.map, &t.fine).unwrap();
        assert_eq!(Some(direct.estimate), pa.estimate);

        let md = table.to_markdown();
        assert!(md.contains("| banach | non-member (1.000000) |"), "{md}");
        assert!(md.contains("| pa | member (0.500000, N=2) |"), "{md}");
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("family,example-discrete_membership,example-discrete_estimate\n"));
        assert_eq!(table.properties.len(), 7);
        assert_eq!(table.properties_csv().lines().count(), 8);
    }

    #[test]
    fn implication_rows_carry_reported_entries() {
        let (targets, opts) = discrete_only();
        let table = comparison_table(&targets, &opts).unwrap();
        let implied = table.properties.iter().find(|p| p.property == "pa implies").unwrap();
        assert_eq!(implied.values[0], "no (example-discrete); reported no");
        assert!(implied.values[2].ends_with("open (reported)"));
        let implies = table.properties.iter().find(|p| p.property == "implies pa").unwrap();
        assert_eq!(implies.values[0], "no counterexample in 200 trials; reported yes");
    }

    #[test]
    fn empty_targets_rejected() {
        assert!(comparison_table(&[], &ReproOptions::default()).is_err());
    }
}
