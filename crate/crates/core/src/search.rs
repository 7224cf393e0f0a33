//! Random finite metric spaces and self-maps, empirical classification
//! against all six families, and search for class-separation witnesses.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::{pa_alpha_by_n_min, sample_pairs, tightest_constant, Measure, PairSample, Witness};
use crate::conditions::{FFunction, Family};
use crate::error::{Error, Result};
use crate::maps::SelfMap;
use crate::metric::MetricSpace;
use crate::tol::EPS;

pub const MIN_RANDOM_POINTS: usize = 2;
pub const MAX_RANDOM_POINTS: usize = 64;
/// Extra orbit length beyond the point count used for path-averaged
/// classification on finite spaces.
pub const FINITE_HORIZON_SLACK: usize = 8;
/// Constants within this distance of a family's bound are flagged.
pub const BOUNDARY_BAND: f64 = 10.0 * EPS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomMethod {
    /// Points uniform in the unit square, Euclidean distance.
    EuclideanEmbed,
    /// Symmetric matrix of uniform `(0, 1]` entries, repaired into a metric
    /// by shortest-path closure.
    RepairedMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpaceSpec {
    pub point_count: usize,
    pub method: RandomMethod,
    pub seed: u64,
}

impl RandomSpaceSpec {
    pub fn new(point_count: usize, method: RandomMethod, seed: u64) -> Result<Self> {
        if !(MIN_RANDOM_POINTS..=MAX_RANDOM_POINTS).contains(&point_count) {
            return Err(Error::InvalidParameter(format!(
                "point count {point_count} outside [{MIN_RANDOM_POINTS}, {MAX_RANDOM_POINTS}]"
            )));
        }
        Ok(Self {
            point_count,
            method,
            seed,
        })
    }
}

/// Floyd–Warshall closure: replaces every entry by the shortest-path
/// distance, which enforces the triangle inequality.
#[allow(clippy::needless_range_loop)]
pub fn shortest_path_closure(rows: &mut [Vec<f64>]) {
    let n = rows.len();
    for k in 0..n {
        for i in 0..n {
            let dik = rows[i][k];
            for j in 0..n {
                let via = dik + rows[k][j];
                if via < rows[i][j] {
                    rows[i][j] = via;
                }
            }
        }
    }
}

#[allow(clippy::needless_range_loop)]
pub fn random_finite_metric(spec: &RandomSpaceSpec) -> Result<MetricSpace> {
    let n = spec.point_count;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = vec![vec![0.0; n]; n];
    match spec.method {
        RandomMethod::EuclideanEmbed => {
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                    rows[i][j] = d;
                    rows[j][i] = d;
                }
            }
        }
        RandomMethod::RepairedMatrix => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = 1.0 - rng.gen::<f64>();
                    rows[i][j] = d;
                    rows[j][i] = d;
                }
            }
        }
    }
    // Also absorbs rounding in the Euclidean case.
    shortest_path_closure(&mut rows);
    for i in 0..n {
        for j in (i + 1)..n {
            rows[j][i] = rows[i][j];
        }
    }
    MetricSpace::finite(rows)
}

/// Uniformly random table map on `point_count` points.
pub fn random_self_map(point_count: usize, seed: u64) -> Result<SelfMap> {
    if point_count == 0 {
        return Err(Error::InvalidParameter("point count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SelfMap::table((0..point_count).map(|_| rng.gen_range(0..point_count)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub family: Family,
    /// Tightest constant (`τ` for F, `α` for PA); `None` when every instance
    /// was vacuous.
    pub estimate: Option<f64>,
    pub member: bool,
    pub boundary: bool,
    /// `N` attaining the least `α` (PA only).
    pub n_min: Option<usize>,
    /// `F` attaining the largest `τ` (F only).
    pub f: Option<FFunction>,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdicts: Vec<FamilyVerdict>,
}

impl Classification {
    pub fn get(&self, family: Family) -> &FamilyVerdict {
        self.verdicts
            .iter()
            .find(|v| v.family == family)
            .expect("every family is classified")
    }

    pub fn is_member(&self, family: Family) -> bool {
        self.get(family).member
    }
}

fn verdict_from(family: Family, estimate: Option<f64>) -> (bool, bool) {
    let bound = family.bound();
    match estimate {
        None => (true, false),
        Some(e) if family == Family::FContraction => (e > bound + EPS, (e - bound).abs() <= BOUNDARY_BAND),
        Some(e) => (e < bound - EPS, (e - bound).abs() <= BOUNDARY_BAND),
    }
}

/// Classifies a map on a finite space using every pair, with PA horizon
/// `horizon` and the least `α` over `N ∈ n_range`.
pub fn classify(
    space: &MetricSpace,
    map: &SelfMap,
    n_range: RangeInclusive<usize>,
    horizon: usize,
) -> Result<Classification> {
    if !space.is_finite() {
        return Err(Error::InvalidSpace("classify expects a finite space".into()));
    }
    classify_on_sample(space, map, &sample_pairs(space, 0), n_range, horizon)
}

/// Per-family tightest constants and membership on an explicit sample.
/// F-contraction membership takes the best of the built-in `F`s.
pub fn classify_on_sample(
    space: &MetricSpace,
    map: &SelfMap,
    pairs: &PairSample,
    n_range: RangeInclusive<usize>,
    horizon: usize,
) -> Result<Classification> {
    let mut verdicts = Vec::with_capacity(6);
    for family in [Family::Banach, Family::Kannan, Family::Chatterjea, Family::Ciric] {
        let measure = Measure::pointwise(family).expect("pointwise");
        let (estimate, witness) = match tightest_constant(&measure, space, map, pairs) {
            Ok(t) => (Some(t.estimate), Some(t.witness)),
            Err(Error::AllDegenerate) => (None, None),
            Err(e) => return Err(e),
        };
        let (member, boundary) = verdict_from(family, estimate);
        verdicts.push(FamilyVerdict {
            family,
            estimate,
            member,
            boundary,
            n_min: None,
            f: None,
            witness,
        });
    }

    let mut best_f: Option<(f64, FFunction, Witness)> = None;
    let mut vacuous = false;
    for f in FFunction::ALL {
        match tightest_constant(&Measure::FContraction { f }, space, map, pairs) {
            Ok(t) => {
                if best_f.as_ref().is_none_or(|(b, _, _)| t.estimate > *b) {
                    best_f = Some((t.estimate, f, t.witness));
                }
            }
            Err(Error::AllDegenerate) => vacuous = true,
            Err(e) => return Err(e),
        }
    }
    let (estimate, f, witness) = match (best_f, vacuous) {
        (_, true) => (None, None, None),
        (Some((e, f, w)), false) => (Some(e), Some(f), Some(w)),
        (None, false) => unreachable!("a built-in F either measured or was vacuous"),
    };
    let (member, boundary) = verdict_from(Family::FContraction, estimate);
    verdicts.push(FamilyVerdict {
        family: Family::FContraction,
        estimate,
        member,
        boundary,
        n_min: None,
        f,
        witness,
    });

    let by_n = pa_alpha_by_n_min(space, map, pairs, n_range, horizon)?;
    let mut least: Option<(usize, f64, Witness)> = None;
    let mut vacuous_n = None;
    for (n, best) in by_n {
        match best {
            Some((a, w)) => {
                if least.as_ref().is_none_or(|(_, b, _)| a < *b) {
                    least = Some((n, a, w));
                }
            }
            None => {
                vacuous_n.get_or_insert(n);
            }
        }
    }
    let (n_min, estimate, witness) = match (vacuous_n, least) {
        (Some(n), _) => (Some(n), None, None),
        (None, Some((n, a, w))) => (Some(n), Some(a), Some(w)),
        (None, None) => (None, None, None),
    };
    let (member, boundary) = verdict_from(Family::Pa, estimate);
    verdicts.push(FamilyVerdict {
        family: Family::Pa,
        estimate,
        member,
        boundary,
        n_min,
        f: None,
        witness,
    });
    Ok(Classification { verdicts })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationQuery {
    must_hold: Vec<Family>,
    must_fail: Vec<Family>,
    pub trials: usize,
    pub seed: u64,
    pub point_counts: RangeInclusive<usize>,
    /// `None` alternates between the two generators.
    pub method: Option<RandomMethod>,
    pub n_range: RangeInclusive<usize>,
    /// PA horizon; `None` uses `point_count + 8`.
    pub horizon: Option<usize>,
}

impl SeparationQuery {
    pub fn new(must_hold: Vec<Family>, must_fail: Vec<Family>, trials: usize, seed: u64) -> Result<Self> {
        if let Some(f) = must_hold.iter().find(|f| must_fail.contains(f)) {
            return Err(Error::OverlappingQuery(f.to_string()));
        }
        Ok(Self {
            must_hold,
            must_fail,
            trials,
            seed,
            point_counts: 3..=3,
            method: None,
            n_range: 1..=4,
            horizon: None,
        })
    }

    pub fn with_point_counts(mut self, counts: RangeInclusive<usize>) -> Result<Self> {
        if *counts.start() < MIN_RANDOM_POINTS || *counts.end() > MAX_RANDOM_POINTS || counts.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "point counts {counts:?} outside [{MIN_RANDOM_POINTS}, {MAX_RANDOM_POINTS}]"
            )));
        }
        self.point_counts = counts;
        Ok(self)
    }

    pub fn with_n_range(mut self, n_range: RangeInclusive<usize>) -> Result<Self> {
        if *n_range.start() == 0 || n_range.is_empty() {
            return Err(Error::InvalidParameter(format!("invalid N range {n_range:?}")));
        }
        self.n_range = n_range;
        Ok(self)
    }

    pub fn must_hold(&self) -> &[Family] {
        &self.must_hold
    }

    pub fn must_fail(&self) -> &[Family] {
        &self.must_fail
    }

    pub fn matches(&self, c: &Classification) -> bool {
        self.must_hold.iter().all(|&f| c.is_member(f)) && self.must_fail.iter().all(|&f| !c.is_member(f))
    }

    fn horizon_for(&self, point_count: usize) -> usize {
        self.horizon
            .unwrap_or(point_count + FINITE_HORIZON_SLACK)
            .max(*self.n_range.end())
    }
}

/// A generated (space, map) instance matching a query. Carries the full
/// matrix and table so it can be rebuilt and re-verified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub trial: usize,
    pub space_spec: RandomSpaceSpec,
    pub map_seed: u64,
    pub matrix: Vec<Vec<f64>>,
    pub table: Vec<usize>,
    pub horizon: usize,
    pub classification: Classification,
}

impl SeparationWitness {
    pub fn rebuild(&self) -> Result<(MetricSpace, SelfMap)> {
        Ok((MetricSpace::finite(self.matrix.clone())?, SelfMap::table(self.table.clone())?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub query: SeparationQuery,
    pub trials_run: usize,
    pub witnesses: Vec<SeparationWitness>,
    pub summary: String,
}

/// Draws the space and map of trial `trial`, deterministically.
pub fn trial_instance(
    seed: u64,
    trial: usize,
    point_counts: &RangeInclusive<usize>,
    method: Option<RandomMethod>,
) -> Result<(RandomSpaceSpec, u64, MetricSpace, SelfMap)> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    master.set_stream(trial as u64);
    let n = master.gen_range(point_counts.clone());
    let method = method.unwrap_or(if master.gen_bool(0.5) {
        RandomMethod::EuclideanEmbed
    } else {
        RandomMethod::RepairedMatrix
    });
    let spec = RandomSpaceSpec::new(n, method, master.gen())?;
    let map_seed = master.gen();
    let space = random_finite_metric(&spec)?;
    let map = random_self_map(n, map_seed)?;
    Ok((spec, map_seed, space, map))
}

/// Runs `query.trials` seeded generations and keeps every instance whose
/// classification matches. An empty result only means no witness was found
/// in the trials run.
pub fn search_separation(query: &SeparationQuery) -> Result<SearchOutcome> {
    let witnesses: Vec<SeparationWitness> = (0..query.trials)
        .into_par_iter()
        .map(|trial| {
            let (spec, map_seed, space, map) =
                trial_instance(query.seed, trial, &query.point_counts, query.method)?;
            let horizon = query.horizon_for(spec.point_count);
            let c = classify(&space, &map, query.n_range.clone(), horizon)?;
            if !query.matches(&c) {
                return Ok(None);
            }
            let (MetricSpace::FiniteExplicit(fs), SelfMap::FiniteTable(table)) = (&space, &map) else {
                unreachable!("random instances are finite");
            };
            Ok(Some(SeparationWitness {
                trial,
                space_spec: spec,
                map_seed,
                matrix: fs.rows(),
                table: table.clone(),
                horizon,
                classification: c,
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let summary = if witnesses.is_empty() {
        format!("no witness found in {} trials", query.trials)
    } else {
        format!("{} witnesses in {} trials", witnesses.len(), query.trials)
    };
    Ok(SearchOutcome {
        query: query.clone(),
        trials_run: query.trials,
        witnesses,
        summary,
    })
}

/// A random finite instance whose measured Banach constant is below a cap.
#[derive(Clone, Debug)]
pub struct BanachCase {
    pub trial: usize,
    pub space: MetricSpace,
    pub map: SelfMap,
    pub k_hat: f64,
}

/// Generates instances with up to `max_points` points and keeps those with
/// Banach constant `0 < k̂ < k_cap` until `count` are found or `max_trials`
/// ran. Constant maps (`k̂ = 0`) are skipped since `α = 0` is not an
/// admissible path-averaged constant.
pub fn sample_banach_cases(
    count: usize,
    max_points: usize,
    k_cap: f64,
    seed: u64,
    max_trials: usize,
) -> Result<Vec<BanachCase>> {
    let counts = MIN_RANDOM_POINTS..=max_points;
    let mut out = Vec::with_capacity(count);
    let mut trial = 0;
    while out.len() < count && trial < max_trials {
        let (_, _, space, map) = trial_instance(seed, trial, &counts, None)?;
        let pairs = sample_pairs(&space, 0);
        let k_hat = tightest_constant(&Measure::Banach, &space, &map, &pairs)?.estimate;
        if k_hat > 0.0 && k_hat < k_cap {
            out.push(BanachCase {
                trial,
                space,
                map,
                k_hat,
            });
        }
        trial += 1;
    }
    Ok(out)
}
