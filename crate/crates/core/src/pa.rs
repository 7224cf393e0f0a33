//! Orbit sums behind the path-averaged condition.
//!
//! For a pair `(x, y)` with orbit distances `D[k] = d(Tᵏx, Tᵏy)`:
//!
//! * `S[n]  = Σ_{k<n} D[k]`
//! * `S1[n] = Σ_{k<n} D[k+1]`
//! * `ρ[n]  = S1[n] / S[n]`
//!
//! The averaged form divides both sums by `n`, which cancels in `ρ`. The
//! condition holds at `(α, N)` for this pair iff `S1[n] ≤ α S[n]` for every
//! `n ≥ N`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::maps::{orbit_pair_distances, IterFlags, OrbitPairTable, SelfMap};
use crate::metric::{MetricSpace, Point};
use crate::tol::CompensatedSum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaSums {
    pub x: Point,
    pub y: Point,
    /// `sums[n] = S[n]` for `n = 0..=H`; `sums[0] = 0`.
    pub sums: Vec<f64>,
    /// `shifted[n] = S1[n]` for `n = 0..=H`; `shifted[0] = 0`.
    pub shifted: Vec<f64>,
    pub flags: IterFlags,
}

impl PaSums {
    pub fn from_table(table: &OrbitPairTable) -> Self {
        let h = table.horizon;
        let d = &table.distances;
        let mut sums = Vec::with_capacity(h + 1);
        let mut shifted = Vec::with_capacity(h + 1);
        let (mut s, mut s1) = (CompensatedSum::new(), CompensatedSum::new());
        sums.push(0.0);
        shifted.push(0.0);
        for n in 1..=h {
            s.add(d[n - 1]);
            s1.add(d[n]);
            sums.push(s.value());
            shifted.push(s1.value());
        }
        Self {
            x: table.x,
            y: table.y,
            sums,
            shifted,
            flags: table.flags,
        }
    }

    pub fn compute(space: &MetricSpace, map: &SelfMap, x: &Point, y: &Point, horizon: usize) -> Result<Self> {
        orbit_pair_distances(space, map, x, y, horizon).map(|t| Self::from_table(&t))
    }

    pub fn horizon(&self) -> usize {
        self.sums.len() - 1
    }

    /// `ρ[n]`, undefined where `S[n] = 0`.
    pub fn ratio(&self, n: usize) -> Option<f64> {
        let s = self.sums[n];
        (s > 0.0).then(|| self.shifted[n] / s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: usize,
    pub s: f64,
    pub s1: f64,
    pub rho: Option<f64>,
}

/// `(n, S[n], S1[n], ρ[n])` for `n = 1..=horizon`.
pub fn pa_ratio_profile(
    space: &MetricSpace,
    map: &SelfMap,
    x: &Point,
    y: &Point,
    horizon: usize,
) -> Result<Vec<ProfileRow>> {
    let sums = PaSums::compute(space, map, x, y, horizon)?;
    Ok(profile_rows(&sums))
}

pub fn profile_rows(sums: &PaSums) -> Vec<ProfileRow> {
    (1..=sums.horizon())
        .map(|n| ProfileRow {
            n,
            s: sums.sums[n],
            s1: sums.shifted[n],
            rho: sums.ratio(n),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use proptest::prelude::*;

    #[test]
    fn successor_profile_at_ten() {
        let space = MetricSpace::harmonic(1000).unwrap();
        let rows = pa_ratio_profile(&space, &SelfMap::successor(1000), &Point::Nat(10), &Point::Nat(11), 10).unwrap();
        let rho = rows[9].rho.unwrap();
        assert_eq!(rows[9].n, 10);
        assert!((rho - 200.0 / 231.0).abs() < 1e-12, "{rho}");
    }

    #[test]
    fn square_half_profile_near_one() {
        // Brute-force orbit sums, stepping x ↦ x²/2 by hand.
        let (mut a, mut b) = (1.0f64, 0.999f64);
        let mut d = Vec::new();
        for _ in 0..=5 {
            d.push((a - b).abs());
            a = a * a / 2.0;
            b = b * b / 2.0;
        }
        let brute = d[1..=5].iter().sum::<f64>() / d[0..5].iter().sum::<f64>();
        // Limit x, y → 1: D[k] ∝ c_k = 2ᵏ / 2^(2ᵏ - 1).
        let c: Vec<f64> = (0..=5).map(|k| 2f64.powi(k) / 2f64.powi((1 << k) - 1)).collect();
        let limit = c[1..=5].iter().sum::<f64>() / c[0..5].iter().sum::<f64>();

        let rows = pa_ratio_profile(&MetricSpace::unit_interval(), &SelfMap::SquareHalf, &Point::Real(1.0), &Point::Real(0.999), 8).unwrap();
        let rho = rows[4].rho.unwrap();
        assert!((rho - brute).abs() < 1e-12);
        assert!((rho - limit).abs() < 5e-3);
        assert!((rho - 0.6096063174963159).abs() < 1e-12);
    }

    #[test]
    fn diagonal_pair_has_no_ratio() {
        let rows = pa_ratio_profile(&MetricSpace::unit_interval(), &SelfMap::SquareHalf, &Point::Real(0.3), &Point::Real(0.3), 6).unwrap();
        assert!(rows.iter().all(|r| r.rho.is_none() && r.s == 0.0));
    }

    fn arb_table() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
        (2usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec(prop::collection::vec(0.1f64..1.0, n), n),
                prop::collection::vec(0..n, n),
            )
        })
    }

    proptest! {
        #[test]
        fn shift_identity_and_monotone((raw, table) in arb_table(), x in 0usize..8, y in 0usize..8, h in 1usize..30) {
            let n = table.len();
            let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| {
                if i == j { 0.0 } else { raw[i.min(j)][i.max(j)] + 1.0 }
            }).collect()).collect();
            let space = MetricSpace::finite(rows).unwrap();
            let map = SelfMap::table(table).unwrap();
            let (x, y) = (Point::Index(x % n), Point::Index(y % n));
            let table = orbit_pair_distances(&space, &map, &x, &y, h).unwrap();
            let sums = PaSums::from_table(&table);
            for m in 1..h {
                prop_assert!(tol::le((sums.shifted[m] - (sums.sums[m + 1] - table.distances[0])).abs(), 0.0));
            }
            for m in 1..=h {
                prop_assert!(tol::le(sums.sums[m - 1], sums.sums[m]));
                if let Some(r) = sums.ratio(m) { prop_assert!(r >= 0.0); }
            }
        }
    }
}
