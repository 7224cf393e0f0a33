//! Named reproduction scenarios for the three worked examples and the
//! empirical comparison table.

mod scenarios;
mod table;

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

pub use scenarios::{repro_example_discrete, repro_square_half, repro_successor_harmonic};
pub use table::{builtin_targets, comparison_table, Cell, ComparisonTable, PropertyRow, Target, TargetInfo};

use crate::check::PairSample;
use crate::error::{Error, Result};
use crate::maps::SelfMap;
use crate::metric::{enumerate_points, MetricSpace, DEFAULT_GRID_RESOLUTION};
use crate::report::Report;
use crate::search::{classify_on_sample, Classification, FamilyVerdict};
use crate::conditions::Family;

/// Truncation of the harmonic space used by the successor scenario; large
/// enough for every orbit of `(n, n+1)` with `n ≤ 10⁴` and horizon `n`.
pub const HARMONIC_REPRO_TRUNCATION: u64 = 25_000;
/// Largest `n` in the successor closed-form sweep.
pub const HARMONIC_SWEEP: u64 = 10_000;
/// Refinement rule for boundary labels: the gap to the bound must shrink to
/// at most this fraction when the sample is refined.
pub const REFINEMENT_GAP_RATIO: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReproOptions {
    pub grid: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Trials per separation query in the comparison table.
    pub search_trials: usize,
}

impl Default for ReproOptions {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID_RESOLUTION,
            horizon: 16,
            seed: 0,
            search_trials: 2000,
        }
    }
}

impl ReproOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 3 {
            return Err(Error::InvalidParameter(format!("grid resolution {} is below 3", self.grid)));
        }
        if self.horizon < 5 {
            return Err(Error::InvalidParameter(format!("horizon {} is below 5", self.horizon)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ExampleDiscrete,
    SquareHalf,
    SuccessorHarmonic,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::ExampleDiscrete, Scenario::SquareHalf, Scenario::SuccessorHarmonic];

    pub fn id(self) -> &'static str {
        match self {
            Scenario::ExampleDiscrete => "example-discrete",
            Scenario::SquareHalf => "square-half",
            Scenario::SuccessorHarmonic => "successor-harmonic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::parse("scenario", s, "expected example-discrete, square-half or successor-harmonic"))
    }

    pub fn run(self, opts: &ReproOptions) -> Result<Report> {
        opts.validate()?;
        match self {
            Scenario::ExampleDiscrete => repro_example_discrete(opts),
            Scenario::SquareHalf => repro_square_half(opts),
            Scenario::SuccessorHarmonic => repro_successor_harmonic(opts),
        }
    }
}

/// Runs every scenario in a fixed order.
pub fn run_all(opts: &ReproOptions) -> Result<Vec<Report>> {
    Scenario::ALL.iter().map(|s| s.run(opts)).collect()
}

/// Verdict label for the comparison table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Member,
    NonMember,
    /// Measured constant at the bound, or converging to it as the sample is
    /// refined; strict membership cannot be asserted.
    Boundary,
}

impl Membership {
    pub fn label(self) -> &'static str {
        match self {
            Membership::Member => "member",
            Membership::NonMember => "non-member",
            Membership::Boundary => "boundary",
        }
    }
}

/// True when refining the sample moved the estimate toward `bound` and
/// shrank the gap to at most [`REFINEMENT_GAP_RATIO`] of the coarse gap.
pub fn approaches_bound(bound: f64, coarse: f64, fine: f64) -> bool {
    let (gc, gf) = ((bound - coarse).abs(), (bound - fine).abs());
    gf < gc && gf <= REFINEMENT_GAP_RATIO * gc
}

/// Combines the fine-sample verdict with the coarse one. A constant at or
/// beyond the bound is attained, so the label is non-member; members within
/// the boundary band, or whose constant converges to the bound under
/// refinement, become boundary.
pub fn membership(fine: &FamilyVerdict, coarse: Option<&FamilyVerdict>) -> Membership {
    if !fine.member {
        return Membership::NonMember;
    }
    if fine.boundary {
        return Membership::Boundary;
    }
    match (fine.estimate, coarse.and_then(|c| c.estimate)) {
        (Some(f), Some(c)) if approaches_bound(fine.family.bound(), c, f) => Membership::Boundary,
        _ => Membership::Member,
    }
}

/// Classification on a fine sample and optionally a coarse one.
pub(crate) fn classify_refined(
    space: &MetricSpace,
    map: &SelfMap,
    fine: &PairSample,
    coarse: Option<&PairSample>,
    n_range: RangeInclusive<usize>,
    horizon: usize,
) -> Result<(Classification, Option<Classification>)> {
    let f = classify_on_sample(space, map, fine, n_range.clone(), horizon)?;
    let c = coarse
        .map(|c| classify_on_sample(space, map, c, n_range, horizon))
        .transpose()?;
    Ok((f, c))
}

pub(crate) fn membership_of(family: Family, fine: &Classification, coarse: Option<&Classification>) -> Membership {
    membership(fine.get(family), coarse.map(|c| c.get(family)))
}

/// All pairs among `1..=bound` and `∞`.
pub(crate) fn harmonic_pairs(space: &MetricSpace, bound: u64) -> PairSample {
    let points = enumerate_points(space, bound as usize + 1);
    PairSample::all_pairs_of(&points, format!("all pairs among 1..={bound} and inf"))
}
