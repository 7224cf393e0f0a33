//! Sample-based condition checks and tightest-constant estimation.
//!
//! Pairs are always processed in sample order and results are combined
//! sequentially, so witnesses are the lexicographically smallest
//! `(pair index, n)` regardless of how the per-pair work is scheduled.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{evaluate_distances, ratio, ConditionSpec, FFunction, Family, PairDistances};
use crate::error::{Error, Result};
use crate::maps::{IterFlags, SelfMap};
use crate::metric::{enumerate_points, IntervalSpace, MetricSpace, Point};
use crate::pa::PaSums;
use crate::tol;

/// Interval grids up to this size contribute every pair.
pub const FULL_GRID_PAIR_LIMIT: usize = 200;
/// Random pairs drawn from larger grids (adjacent pairs are added on top).
pub const RANDOM_GRID_PAIRS: usize = 200_000;
/// Harmonic samples use every pair among `1..=min(M, this)` and `∞`.
pub const HARMONIC_PAIR_BOUND: u64 = 1000;

pub type Pair = (Point, Point);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub pairs: Vec<Pair>,
    pub descriptor: String,
}

impl PairSample {
    pub fn new(pairs: Vec<Pair>, descriptor: impl Into<String>) -> Self {
        Self {
            pairs,
            descriptor: descriptor.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `{(n, n+1) : lo ≤ n ≤ hi}` in the harmonic space.
    pub fn successive_naturals(lo: u64, hi: u64) -> Self {
        Self::new(
            (lo..=hi).map(|n| (Point::Nat(n), Point::Nat(n + 1))).collect(),
            format!("successive naturals (n, n+1), {lo} <= n <= {hi}"),
        )
    }

    /// Every unordered pair of distinct points from `points`, in order.
    pub fn all_pairs_of(points: &[Point], descriptor: impl Into<String>) -> Self {
        let mut pairs = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
        for (i, x) in points.iter().enumerate() {
            for y in &points[i + 1..] {
                pairs.push((*x, *y));
            }
        }
        Self::new(pairs, descriptor)
    }
}

/// The default pair sample for a space: all pairs of a finite space; all
/// grid pairs of a small interval grid, or a seeded random subset plus every
/// adjacent pair of a large one; all pairs among `1..=min(M, 1000)` and `∞`
/// for the harmonic space.
pub fn sample_pairs(space: &MetricSpace, seed: u64) -> PairSample {
    match space {
        MetricSpace::FiniteExplicit(s) => {
            PairSample::all_pairs_of(&enumerate_points(space, s.size()), "all unordered pairs")
        }
        MetricSpace::RealInterval(s) => interval_pairs(s, seed),
        MetricSpace::HarmonicNat(s) => {
            let bound = s.truncation().min(HARMONIC_PAIR_BOUND);
            let points = enumerate_points(space, bound as usize + 1);
            PairSample::all_pairs_of(&points, format!("all pairs among 1..={bound} and inf"))
        }
    }
}

fn interval_pairs(s: &IntervalSpace, seed: u64) -> PairSample {
    let r = s.resolution();
    let total = r * (r - 1) / 2;
    let mut idx: Vec<(usize, usize)> = if r <= FULL_GRID_PAIR_LIMIT || total <= RANDOM_GRID_PAIRS {
        (0..r).flat_map(|i| ((i + 1)..r).map(move |j| (i, j))).collect()
    } else {
        // Row offsets of the strictly upper triangle, for unranking.
        let offsets: Vec<usize> = (0..r).scan(0usize, |acc, i| {
            let start = *acc;
            *acc += r - 1 - i;
            Some(start)
        }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<(usize, usize)> = index::sample(&mut rng, total, RANDOM_GRID_PAIRS)
            .into_iter()
            .map(|rank| {
                let i = offsets.partition_point(|&o| o <= rank) - 1;
                (i, i + 1 + (rank - offsets[i]))
            })
            .collect();
        picked.extend((0..r - 1).map(|i| (i, i + 1)));
        picked.sort_unstable();
        picked.dedup();
        picked
    };
    idx.sort_unstable();
    let descriptor = if idx.len() == total {
        format!("all pairs of the {r}-point grid on [{}, {}]", s.lower(), s.upper())
    } else {
        format!(
            "{} random pairs (seed {seed}) plus all adjacent pairs of the {r}-point grid on [{}, {}]",
            RANDOM_GRID_PAIRS,
            s.lower(),
            s.upper()
        )
    };
    PairSample::new(
        idx.into_iter()
            .map(|(i, j)| (Point::Real(s.grid_point(i)), Point::Real(s.grid_point(j))))
            .collect(),
        descriptor,
    )
}

/// A violating (or extremal) instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub pair: Pair,
    pub pair_index: usize,
    /// Horizon index for the path-averaged condition.
    pub n: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnSample,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub spec: ConditionSpec,
    pub verdict: Verdict,
    /// Lexicographically smallest violation.
    pub witness: Option<Witness>,
    /// Violation with the largest `lhs - rhs`.
    pub worst: Option<Witness>,
    pub pairs_checked: usize,
    pub instances_checked: usize,
    /// Instances that hold vacuously: `0 ≤ α·0` for PA, `d(Tx,Ty) = 0` for F.
    pub degenerate_instances: usize,
    pub sample: String,
    pub notes: Vec<String>,
}

struct PairOutcome {
    first: Option<Witness>,
    worst: Option<Witness>,
    instances: usize,
    degenerate: usize,
    flags: IterFlags,
}

fn margin(w: &Witness) -> f64 {
    w.lhs - w.rhs
}

/// Checks `spec` on every pair of the sample. Pointwise families evaluate
/// each pair once; the path-averaged family tests `S1[n] ≤ α S[n]` for every
/// `n ∈ [N, H]`.
pub fn check_condition(
    spec: &ConditionSpec,
    space: &MetricSpace,
    map: &SelfMap,
    pairs: &PairSample,
) -> Result<CheckReport> {
    spec.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    let outcomes: Vec<PairOutcome> = pairs
        .pairs
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| check_pair(spec, space, map, i, x, y))
        .collect::<Result<_>>()?;

    let mut witness = None;
    let mut worst: Option<Witness> = None;
    let (mut instances, mut degenerate) = (0, 0);
    let mut flags = IterFlags::default();
    for o in outcomes {
        instances += o.instances;
        degenerate += o.degenerate;
        flags |= o.flags;
        if witness.is_none() {
            witness = o.first;
        }
        if let Some(w) = o.worst {
            if worst.as_ref().is_none_or(|b| margin(&w) > margin(b)) {
                worst = Some(w);
            }
        }
    }
    let verdict = if witness.is_some() {
        Verdict::Violated
    } else {
        Verdict::HoldsOnSample
    };
    Ok(CheckReport {
        spec: *spec,
        verdict,
        witness,
        worst,
        pairs_checked: pairs.len(),
        instances_checked: instances,
        degenerate_instances: degenerate,
        sample: pairs.descriptor.clone(),
        notes: flag_notes(flags),
    })
}

pub fn flag_notes(flags: IterFlags) -> Vec<String> {
    let mut notes = Vec::new();
    if flags.underflow {
        notes.push("iterates below the smallest normal double were flushed to 0".to_string());
    }
    if flags.saturated {
        notes.push("successor iterates saturated at the truncation bound".to_string());
    }
    notes
}

fn check_pair(
    spec: &ConditionSpec,
    space: &MetricSpace,
    map: &SelfMap,
    index: usize,
    x: &Point,
    y: &Point,
) -> Result<PairOutcome> {
    let mut out = PairOutcome {
        first: None,
        worst: None,
        instances: 0,
        degenerate: 0,
        flags: IterFlags::default(),
    };
    match *spec {
        ConditionSpec::Pa {
            alpha,
            n_min,
            horizon,
        } => {
            let sums = PaSums::compute(space, map, x, y, horizon)?;
            out.flags = sums.flags;
            for n in n_min..=horizon {
                out.instances += 1;
                let (lhs, rhs) = (sums.shifted[n], alpha * sums.sums[n]);
                if sums.sums[n] == 0.0 {
                    out.degenerate += 1;
                }
                if tol::gt(lhs, rhs) {
                    let w = Witness {
                        pair: (*x, *y),
                        pair_index: index,
                        n: Some(n),
                        lhs,
                        rhs,
                    };
                    if out.worst.as_ref().is_none_or(|b| margin(&w) > margin(b)) {
                        out.worst = Some(w.clone());
                    }
                    out.first.get_or_insert(w);
                }
            }
        }
        _ => {
            let pd = PairDistances::compute(space, map, x, y)?;
            let e = evaluate_distances(spec, &pd)?;
            out.instances = 1;
            if !e.applicable {
                out.degenerate = 1;
            }
            if !e.holds() {
                let w = Witness {
                    pair: (*x, *y),
                    pair_index: index,
                    n: None,
                    lhs: e.lhs,
                    rhs: e.rhs,
                };
                out.worst = Some(w.clone());
                out.first = Some(w);
            }
        }
    }
    Ok(out)
}

/// What [`tightest_constant`] measures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Measure {
    Banach,
    Kannan,
    Chatterjea,
    Ciric,
    /// Largest admissible `τ`: the infimum of `F(d(x,y)) - F(d(Tx,Ty))`.
    FContraction { f: FFunction },
    /// Least admissible `α`: the supremum of `ρ[n]` over `n ∈ [N, H]`.
    Pa { n_min: usize, horizon: usize },
}

impl Measure {
    pub fn family(&self) -> Family {
        match self {
            Measure::Banach => Family::Banach,
            Measure::Kannan => Family::Kannan,
            Measure::Chatterjea => Family::Chatterjea,
            Measure::Ciric => Family::Ciric,
            Measure::FContraction { .. } => Family::FContraction,
            Measure::Pa { .. } => Family::Pa,
        }
    }

    /// The measure for a pointwise family; F uses `ln`.
    pub fn pointwise(family: Family) -> Option<Self> {
        match family {
            Family::Banach => Some(Measure::Banach),
            Family::Kannan => Some(Measure::Kannan),
            Family::Chatterjea => Some(Measure::Chatterjea),
            Family::Ciric => Some(Measure::Ciric),
            Family::FContraction => Some(Measure::FContraction { f: FFunction::Log }),
            Family::Pa => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tightest {
    pub measure: Measure,
    /// Supremum of the ratio (infimum of the `τ` slack for F) over the sample.
    /// `+∞` when some instance has a positive left side over a zero kernel.
    pub estimate: f64,
    /// Instance attaining the estimate; `lhs`/`rhs` hold the numerator and
    /// denominator of the ratio (for F: `F(d(x,y))` and `F(d(Tx,Ty))`).
    pub witness: Witness,
    pub defined_count: usize,
    pub degenerate_count: usize,
    pub notes: Vec<String>,
}

/// One instance's contribution: value, numerator, denominator, n.
type Candidate = (f64, f64, f64, Option<usize>);

/// Estimates the tightest admissible constant over the sample. Instances
/// with `0/0` are skipped and counted; ties go to the smallest
/// `(pair index, n)`.
pub fn tightest_constant(
    measure: &Measure,
    space: &MetricSpace,
    map: &SelfMap,
    pairs: &PairSample,
) -> Result<Tightest> {
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Measure::Pa { n_min, horizon } = *measure {
        if n_min == 0 || horizon < n_min {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= N <= H, got N = {n_min}, H = {horizon}"
            )));
        }
    }
    let minimize = matches!(measure, Measure::FContraction { .. });
    let per_pair: Vec<(Option<Candidate>, usize, usize, IterFlags)> = pairs
        .pairs
        .par_iter()
        .map(|(x, y)| tightest_pair(measure, space, map, x, y))
        .collect::<Result<_>>()?;

    let mut best: Option<(usize, Candidate)> = None;
    let (mut defined, mut degenerate) = (0, 0);
    let mut flags = IterFlags::default();
    for (i, (cand, def, deg, f)) in per_pair.into_iter().enumerate() {
        defined += def;
        degenerate += deg;
        flags |= f;
        if let Some(c) = cand {
            let better = match &best {
                None => true,
                Some((_, b)) if minimize => c.0 < b.0,
                Some((_, b)) => c.0 > b.0,
            };
            if better {
                best = Some((i, c));
            }
        }
    }
    let (i, (estimate, num, den, n)) = best.ok_or(Error::AllDegenerate)?;
    Ok(Tightest {
        measure: *measure,
        estimate,
        witness: Witness {
            pair: pairs.pairs[i],
            pair_index: i,
            n,
            lhs: num,
            rhs: den,
        },
        defined_count: defined,
        degenerate_count: degenerate,
        notes: flag_notes(flags),
    })
}

fn tightest_pair(
    measure: &Measure,
    space: &MetricSpace,
    map: &SelfMap,
    x: &Point,
    y: &Point,
) -> Result<(Option<Candidate>, usize, usize, IterFlags)> {
    match *measure {
        Measure::Pa { n_min, horizon } => {
            let sums = PaSums::compute(space, map, x, y, horizon)?;
            let (mut best, mut def, mut deg): (Option<Candidate>, usize, usize) = (None, 0, 0);
            for n in n_min..=horizon {
                match ratio(sums.shifted[n], sums.sums[n]) {
                    Some(r) => {
                        def += 1;
                        if best.is_none_or(|b| r > b.0) {
                            best = Some((r, sums.shifted[n], sums.sums[n], Some(n)));
                        }
                    }
                    None => deg += 1,
                }
            }
            Ok((best, def, deg, sums.flags))
        }
        Measure::FContraction { f } => {
            let pd = PairDistances::compute(space, map, x, y)?;
            if pd.d_tx_ty > 0.0 {
                let (a, b) = (f.eval(pd.d_x_y), f.eval(pd.d_tx_ty));
                Ok((Some((a - b, a, b, None)), 1, 0, IterFlags::default()))
            } else {
                Ok((None, 0, 1, IterFlags::default()))
            }
        }
        _ => {
            let pd = PairDistances::compute(space, map, x, y)?;
            let kernel = pd.kernel(measure.family()).expect("pointwise family");
            match ratio(pd.d_tx_ty, kernel) {
                Some(r) => Ok((Some((r, pd.d_tx_ty, kernel, None)), 1, 0, IterFlags::default())),
                None => Ok((None, 0, 1, IterFlags::default())),
            }
        }
    }
}

/// `(N, least α with its witness)`; `None` when every instance was `0/0`.
pub type AlphaByN = (usize, Option<(f64, Witness)>);
/// Per-pair `(max ratio over m ≥ n, argmax m)` indexed by `n`.
type SuffixMax = Vec<Option<(f64, usize)>>;

/// Least admissible `α` for each `N` in `n_range`, from one pass of orbit
/// sums per pair. Entry `N` is `None` when every instance was `0/0`.
pub fn pa_alpha_by_n_min(
    space: &MetricSpace,
    map: &SelfMap,
    pairs: &PairSample,
    n_range: std::ops::RangeInclusive<usize>,
    horizon: usize,
) -> Result<Vec<AlphaByN>> {
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if lo == 0 || hi < lo || horizon < hi {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= N_min <= N_max <= H, got {lo}..={hi}, H = {horizon}"
        )));
    }
    // suffix[n] = (best ratio over m >= n, argmax m) per pair.
    let per_pair: Vec<(PaSums, SuffixMax)> = pairs
        .pairs
        .par_iter()
        .map(|(x, y)| {
            let sums = PaSums::compute(space, map, x, y, horizon)?;
            let mut suffix: SuffixMax = vec![None; horizon + 2];
            for n in (1..=horizon).rev() {
                let here = sums.ratio(n).map(|r| (r, n));
                suffix[n] = match (here, suffix[n + 1]) {
                    (Some(h), Some(s)) => Some(if h.0 >= s.0 { h } else { s }),
                    (h, s) => h.or(s),
                };
            }
            Ok((sums, suffix))
        })
        .collect::<Result<_>>()?;

    Ok((lo..=hi)
        .map(|n_min| {
            let mut best: Option<(f64, Witness)> = None;
            for (i, (sums, suffix)) in per_pair.iter().enumerate() {
                if let Some((r, n)) = suffix[n_min] {
                    if best.as_ref().is_none_or(|(b, _)| r > *b) {
                        best = Some((
                            r,
                            Witness {
                                pair: pairs.pairs[i],
                                pair_index: i,
                                n: Some(n),
                                lhs: sums.shifted[n],
                                rhs: sums.sums[n],
                            },
                        ));
                    }
                }
            }
            (n_min, best)
        })
        .collect())
}
