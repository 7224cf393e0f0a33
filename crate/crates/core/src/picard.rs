//! Picard iteration with the bookkeeping of the fixed-point argument:
//! step lengths `a_k = d(x_k, x_{k+1})`, partial sums `S_n = Σ_{k<n} a_k`,
//! and the summability bound `S_n ≤ C`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{IterFlags, SelfMap};
use crate::metric::{enumerate_points, MetricSpace, Point};
use crate::tol;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Consecutive steps of length at most `tol` needed to declare convergence.
pub const CONVERGENCE_RUN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardStatus {
    Converged,
    MaxIterReached,
    Cycled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardTrace {
    pub x0: Point,
    /// `x_0, x_1, ..`; one longer than `steps`.
    pub iterates: Vec<Point>,
    /// `a_k = d(x_k, x_{k+1})`.
    pub steps: Vec<f64>,
    /// `S_0 = 0, S_1, ..`; one longer than `steps`.
    pub partial_sums: Vec<f64>,
    pub status: PicardStatus,
    pub limit_candidate: Option<Point>,
    /// `d(x*, Tx*)` for the limit candidate.
    pub residual: Option<f64>,
    pub flags: IterFlags,
}

impl PicardTrace {
    pub fn total(&self) -> f64 {
        *self.partial_sums.last().unwrap()
    }
}

/// Iterates `x_{k+1} = T x_k` from `x0`.
///
/// Stops as `Converged` when a step has length exactly zero (an exact fixed
/// point) or after [`CONVERGENCE_RUN`] consecutive steps no longer than
/// `tol` with a residual no larger than `tol`; as `Cycled` when an iterate
/// on a finite space repeats a point visited earlier; otherwise as
/// `MaxIterReached`.
pub fn run_picard(
    space: &MetricSpace,
    map: &SelfMap,
    x0: &Point,
    tol: f64,
    max_iter: usize,
) -> Result<PicardTrace> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be positive".into()));
    }
    space.check(x0)?;
    let mut visited = match space {
        MetricSpace::FiniteExplicit(s) => Some(vec![false; s.size()]),
        _ => None,
    };
    let mark = |visited: &mut Option<Vec<bool>>, p: &Point| -> bool {
        match (visited.as_mut(), p) {
            (Some(v), Point::Index(i)) => std::mem::replace(&mut v[*i], true),
            _ => false,
        }
    };
    mark(&mut visited, x0);

    let mut iterates = vec![*x0];
    let mut steps = Vec::new();
    let mut partial_sums = vec![0.0];
    let mut flags = IterFlags::default();
    let mut run = 0usize;
    let mut status = PicardStatus::MaxIterReached;
    let mut limit = None;
    let mut residual = None;

    let mut x = *x0;
    while steps.len() < max_iter {
        let (next, f) = map.step(&x)?;
        space.check(&next)?;
        flags |= f;
        let a = space.distance_unchecked(&x, &next);
        steps.push(a);
        partial_sums.push(partial_sums.last().unwrap() + a);
        iterates.push(next);

        if a == 0.0 {
            status = PicardStatus::Converged;
            limit = Some(next);
            residual = Some(0.0);
            break;
        }
        if mark(&mut visited, &next) {
            status = PicardStatus::Cycled;
            break;
        }
        run = if a <= tol { run + 1 } else { 0 };
        if run >= CONVERGENCE_RUN {
            let r = space.distance_unchecked(&next, &map.apply(&next)?);
            if r <= tol {
                status = PicardStatus::Converged;
                limit = Some(next);
                residual = Some(r);
                break;
            }
        }
        x = next;
    }

    Ok(PicardTrace {
        x0: *x0,
        iterates,
        steps,
        partial_sums,
        status,
        limit_candidate: limit,
        residual,
        flags,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub s_n: f64,
    /// `a_n`, when the trace determines it.
    pub a_n: Option<f64>,
    /// `(1-α) S_n ≤ a_0 - a_n`, checked where `a_n` is known.
    pub decrease_holds: Option<bool>,
    /// `S_n ≤ C`.
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha: f64,
    pub n_min: usize,
    pub a0: f64,
    /// `C = max{S_1, .., S_{N-1}, a_0/(1-α)}`.
    pub c: f64,
    pub rows: Vec<BoundRow>,
    pub passed: bool,
}

/// Evaluates the summability bounds on a trace for every recorded `n ≥ N`.
///
/// A pass is what the path-averaged condition at `(α, N)` on the pair
/// `(x_0, Tx_0)` forces; a failure shows the condition cannot hold there.
/// Neither outcome is a membership verdict by itself.
pub fn check_summability_bound(trace: &PicardTrace, alpha: f64, n_min: usize) -> Result<BoundReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if n_min == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let len = trace.steps.len();
    if len < n_min {
        return Err(Error::InsufficientTrace {
            needed: n_min,
            got: len,
        });
    }
    let a0 = trace.steps[0];
    let c = trace.partial_sums[1..n_min]
        .iter()
        .copied()
        .fold(a0 / (1.0 - alpha), f64::max);

    let rows: Vec<BoundRow> = (n_min..=len)
        .map(|n| {
            let s_n = trace.partial_sums[n];
            let a_n = if n < len { Some(trace.steps[n]) } else { trace.residual };
            BoundRow {
                n,
                s_n,
                a_n,
                decrease_holds: a_n.map(|a| tol::le((1.0 - alpha) * s_n, a0 - a)),
                bounded: tol::le(s_n, c),
            }
        })
        .collect();
    let passed = rows
        .iter()
        .all(|r| r.bounded && r.decrease_holds.unwrap_or(true));
    Ok(BoundReport {
        alpha,
        n_min,
        a0,
        c,
        rows,
        passed,
    })
}

/// Points among the first `limit` enumerated with `d(x, Tx) ≤ tol`, in
/// enumeration order. Points whose image saturated at a truncation bound are
/// skipped, since their computed image is not the true one.
pub fn find_fixed_points(space: &MetricSpace, map: &SelfMap, limit: usize, tol: f64) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for p in enumerate_points(space, limit) {
        let (image, flags) = map.step(&p)?;
        if flags.saturated {
            continue;
        }
        space.check(&image)?;
        if space.distance_unchecked(&p, &image) <= tol {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (MetricSpace, SelfMap) {
        (MetricSpace::discrete(3).unwrap(), SelfMap::table(vec![1, 2, 2]).unwrap())
    }

    #[test]
    fn discrete_example_trace() {
        let (space, map) = example();
        let t = run_picard(&space, &map, &Point::Index(0), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(t.iterates, [0, 1, 2, 2].map(Point::Index).to_vec());
        assert_eq!(t.steps, vec![1.0, 1.0, 0.0]);
        assert_eq!(t.status, PicardStatus::Converged);
        assert_eq!(t.limit_candidate, Some(Point::Index(2)));
        assert_eq!(t.total(), 2.0);
    }

    #[test]
    fn square_half_trace() {
        let t = run_picard(&MetricSpace::unit_interval(), &SelfMap::SquareHalf, &Point::Real(1.0), 1e-12, 1000).unwrap();
        assert_eq!(
            t.iterates[..4],
            [1.0, 0.5, 0.125, 0.0078125].map(Point::Real)
        );
        assert_eq!(t.status, PicardStatus::Converged);
        assert!(t.residual.unwrap() <= 1e-12);
        let Some(Point::Real(l)) = t.limit_candidate else { panic!() };
        assert!(l.abs() <= 1e-12);
        for n in 0..=6usize {
            let expected = 1.0 - 1.0 / 2f64.powi((1 << n) - 1);
            assert!((t.partial_sums[n] - expected).abs() <= 1e-12);
        }
        assert!((t.total() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn fixed_start_converges_immediately() {
        let (space, map) = example();
        let t = run_picard(&space, &map, &Point::Index(2), DEFAULT_TOL, 10).unwrap();
        assert_eq!(t.status, PicardStatus::Converged);
        assert_eq!(t.residual, Some(0.0));
        assert_eq!(t.total(), 0.0);
        assert_eq!(t.steps, vec![0.0]);
    }

    #[test]
    fn cycle_detected() {
        let space = MetricSpace::discrete(3).unwrap();
        let map = SelfMap::table(vec![1, 0, 2]).unwrap();
        let t = run_picard(&space, &map, &Point::Index(0), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(t.status, PicardStatus::Cycled);
        assert_eq!(t.steps.len(), 2);
        assert!(t.limit_candidate.is_none());
    }

    #[test]
    fn max_iter_on_successor() {
        let space = MetricSpace::harmonic(100).unwrap();
        let t = run_picard(&space, &SelfMap::successor(100), &Point::Nat(1), 1e-12, 20).unwrap();
        assert_eq!(t.status, PicardStatus::MaxIterReached);
        assert_eq!(t.steps.len(), 20);
    }

    #[test]
    fn partial_sum_increments() {
        let t = run_picard(&MetricSpace::unit_interval(), &SelfMap::SquareHalf, &Point::Real(0.9), 1e-12, 100).unwrap();
        for n in 1..t.partial_sums.len() {
            assert!(tol::le((t.partial_sums[n] - t.partial_sums[n - 1] - t.steps[n - 1]).abs(), 0.0));
        }
    }

    #[test]
    fn bound_on_discrete_example() {
        let (space, map) = example();
        let t = run_picard(&space, &map, &Point::Index(0), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let b = check_summability_bound(&t, 0.5, 2).unwrap();
        assert_eq!(b.a0, 1.0);
        assert_eq!(b.c, 2.0);
        assert!(b.passed);
        assert!(b.rows.iter().any(|r| r.s_n == 2.0));
    }

    #[test]
    fn bound_on_square_half() {
        let t = run_picard(&MetricSpace::unit_interval(), &SelfMap::SquareHalf, &Point::Real(1.0), 1e-12, 1000).unwrap();
        let b = check_summability_bound(&t, 0.7, 5).unwrap();
        assert_eq!(b.a0, 0.5);
        assert!((b.c - 5.0 / 3.0).abs() < 1e-15);
        assert!(b.passed);
    }

    #[test]
    fn bound_needs_enough_sums() {
        let (space, map) = example();
        let t = run_picard(&space, &map, &Point::Index(2), DEFAULT_TOL, 10).unwrap();
        assert!(matches!(
            check_summability_bound(&t, 0.5, 2),
            Err(Error::InsufficientTrace { needed: 2, got: 1 })
        ));
        let b = check_summability_bound(&t, 0.5, 1).unwrap();
        assert!(b.passed && b.rows.iter().all(|r| r.s_n == 0.0));
    }

    #[test]
    fn bound_fails_for_expanding_orbit() {
        // Steps grow: a = [1, 1, 1, ..] on a 2-cycle never satisfies (1-α) S_n ≤ a_0 - a_n.
        let space = MetricSpace::discrete(2).unwrap();
        let map = SelfMap::table(vec![1, 0]).unwrap();
        let t = run_picard(&space, &map, &Point::Index(0), DEFAULT_TOL, 10).unwrap();
        let b = check_summability_bound(&t, 0.5, 1).unwrap();
        assert!(!b.passed);
    }

    #[test]
    fn fixed_points() {
        let (space, map) = example();
        assert_eq!(find_fixed_points(&space, &map, 10, 1e-12).unwrap(), vec![Point::Index(2)]);
        let h = MetricSpace::harmonic(10_000).unwrap();
        assert_eq!(
            find_fixed_points(&h, &SelfMap::successor(10_000), usize::MAX, 1e-12).unwrap(),
            vec![Point::Infinity]
        );
        assert_eq!(find_fixed_points(&space, &SelfMap::identity(3), 10, 1e-12).unwrap().len(), 3);
    }
}
