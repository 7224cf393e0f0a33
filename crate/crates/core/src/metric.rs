//! Points, the three built-in metric spaces, and metric-axiom verification.

use std::fmt;
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::tol;

pub const DEFAULT_GRID_RESOLUTION: usize = 1001;
pub const DEFAULT_TRUNCATION: u64 = 10_000;

/// Spaces with at most this many points are verified exhaustively.
pub const EXHAUSTIVE_AXIOM_LIMIT: usize = 64;

/// An element of one of the built-in spaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    /// Index into a finite point set.
    Index(usize),
    /// Real number in an interval.
    Real(f64),
    /// Positive integer of the harmonic space.
    Nat(u64),
    /// The point at infinity of the harmonic space.
    Infinity,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "{i}"),
            Point::Real(x) => write!(f, "{x}"),
            Point::Nat(n) => write!(f, "{n}"),
            Point::Infinity => f.write_str("inf"),
        }
    }
}

/// Explicit distance matrix on `{0, .., n-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    size: usize,
    /// Row-major `size * size`.
    distances: Vec<f64>,
}

impl FiniteSpace {
    /// Builds a space from a square matrix. Entries must be finite and
    /// nonnegative; `d(i,j)` and `d(j,i)` may differ by at most the comparison
    /// tolerance and are then made bit-identical using the upper triangle.
    ///
    /// The triangle inequality is not enforced here; use
    /// [`verify_metric_axioms`] to check it.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidSpace("distance matrix is empty".into()));
        }
        let mut distances = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidSpace(format!(
                    "row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "entry ({i},{j}) = {v} is not a finite nonnegative real"
                    )));
                }
            }
            distances.extend_from_slice(row);
        }
        for i in 0..size {
            for j in (i + 1)..size {
                let (a, b) = (distances[i * size + j], distances[j * size + i]);
                if !tol::le(a, b) || !tol::le(b, a) {
                    return Err(Error::InvalidSpace(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                distances[j * size + i] = a;
            }
        }
        Ok(Self { size, distances })
    }

    /// The discrete metric on `size` points.
    pub fn discrete(size: usize) -> Result<Self> {
        let rows = (0..size)
            .map(|i| (0..size).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::from_rows(rows)
    }

    /// Reads a header-free, row-major CSV matrix.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|cell| {
                    cell.parse::<f64>()
                        .map_err(|e| Error::parse("distance", cell, e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.distances.chunks(self.size).map(<[f64]>::to_vec).collect()
    }
}

/// Closed interval `[lower, upper]` with exact distance `|x - y|` and a
/// uniform grid of `resolution` points used for enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpace {
    lower: f64,
    upper: f64,
    resolution: usize,
}

impl IntervalSpace {
    pub fn new(lower: f64, upper: f64, resolution: usize) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || lower > upper {
            return Err(Error::InvalidSpace(format!(
                "interval bounds [{lower}, {upper}] are not a finite closed interval"
            )));
        }
        if resolution == 0 {
            return Err(Error::InvalidSpace("grid resolution must be positive".into()));
        }
        Ok(Self {
            lower,
            upper,
            resolution,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// The `i`-th grid point; the last one is exactly `upper`.
    pub fn grid_point(&self, i: usize) -> f64 {
        if self.resolution == 1 || i == 0 {
            return self.lower;
        }
        if i + 1 >= self.resolution {
            return self.upper;
        }
        let t = i as f64 / (self.resolution - 1) as f64;
        self.lower + (self.upper - self.lower) * t
    }
}

/// `{1, .., truncation} ∪ {∞}` with `d(m, n) = |1/m - 1/n|` and `1/∞ = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpace {
    truncation: u64,
}

impl HarmonicSpace {
    pub fn new(truncation: u64) -> Result<Self> {
        // m * n must stay exactly representable in an f64 mantissa.
        if truncation == 0 || truncation > (1 << 26) {
            return Err(Error::InvalidSpace(format!(
                "harmonic truncation must lie in [1, 2^26], got {truncation}"
            )));
        }
        Ok(Self { truncation })
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpace {
    FiniteExplicit(FiniteSpace),
    RealInterval(IntervalSpace),
    HarmonicNat(HarmonicSpace),
}

impl MetricSpace {
    pub fn discrete(size: usize) -> Result<Self> {
        FiniteSpace::discrete(size).map(MetricSpace::FiniteExplicit)
    }

    pub fn finite(rows: Vec<Vec<f64>>) -> Result<Self> {
        FiniteSpace::from_rows(rows).map(MetricSpace::FiniteExplicit)
    }

    pub fn interval(lower: f64, upper: f64, resolution: usize) -> Result<Self> {
        IntervalSpace::new(lower, upper, resolution).map(MetricSpace::RealInterval)
    }

    /// `[0, 1]` on the default grid.
    pub fn unit_interval() -> Self {
        MetricSpace::RealInterval(IntervalSpace {
            lower: 0.0,
            upper: 1.0,
            resolution: DEFAULT_GRID_RESOLUTION,
        })
    }

    pub fn harmonic(truncation: u64) -> Result<Self> {
        HarmonicSpace::new(truncation).map(MetricSpace::HarmonicNat)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricSpace::FiniteExplicit(_) => "finite_explicit",
            MetricSpace::RealInterval(_) => "real_interval",
            MetricSpace::HarmonicNat(_) => "harmonic_nat",
        }
    }

    /// Parameters for reports. Finite spaces include the full matrix.
    pub fn params(&self) -> serde_json::Value {
        match self {
            MetricSpace::FiniteExplicit(s) => json!({ "point_count": s.size, "matrix": s.rows() }),
            MetricSpace::RealInterval(s) => {
                json!({ "lower": s.lower, "upper": s.upper, "resolution": s.resolution })
            }
            MetricSpace::HarmonicNat(s) => json!({ "truncation": s.truncation }),
        }
    }

    /// Number of points [`enumerate_points`] produces without a limit.
    pub fn enumerable_len(&self) -> usize {
        match self {
            MetricSpace::FiniteExplicit(s) => s.size,
            MetricSpace::RealInterval(s) => s.resolution,
            MetricSpace::HarmonicNat(s) => s.truncation as usize + 1,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, MetricSpace::FiniteExplicit(_))
    }

    /// Checks that `p` is a point of this space.
    pub fn check(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (MetricSpace::FiniteExplicit(s), Point::Index(i)) => {
                if *i < s.size {
                    Ok(())
                } else {
                    Err(Error::OutOfRange {
                        point: p.to_string(),
                        bounds: format!("index < {}", s.size),
                    })
                }
            }
            (MetricSpace::RealInterval(s), Point::Real(x)) => {
                if *x >= s.lower && *x <= s.upper {
                    Ok(())
                } else {
                    Err(Error::OutOfRange {
                        point: p.to_string(),
                        bounds: format!("[{}, {}]", s.lower, s.upper),
                    })
                }
            }
            (MetricSpace::HarmonicNat(s), Point::Nat(n)) => {
                if *n >= 1 && *n <= s.truncation {
                    Ok(())
                } else {
                    Err(Error::OutOfRange {
                        point: p.to_string(),
                        bounds: format!("1..={} or inf", s.truncation),
                    })
                }
            }
            (MetricSpace::HarmonicNat(_), Point::Infinity) => Ok(()),
            _ => Err(Error::DomainMismatch {
                point: format!("{p:?}"),
                space: self.kind_name(),
            }),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.check(p).is_ok()
    }

    /// The metric. Exact `0`/`1` on the discrete space; harmonic distances
    /// are evaluated as `|m - n| / (m n)`, a single rounding.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// [`distance`](Self::distance) for points already known to be in the
    /// space.
    pub(crate) fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (MetricSpace::FiniteExplicit(s), Point::Index(i), Point::Index(j)) => s.get(*i, *j),
            (MetricSpace::RealInterval(_), Point::Real(a), Point::Real(b)) => (a - b).abs(),
            (MetricSpace::HarmonicNat(_), Point::Nat(m), Point::Nat(n)) => {
                if m == n {
                    0.0
                } else {
                    m.abs_diff(*n) as f64 / (*m as f64 * *n as f64)
                }
            }
            (MetricSpace::HarmonicNat(_), Point::Nat(n), Point::Infinity)
            | (MetricSpace::HarmonicNat(_), Point::Infinity, Point::Nat(n)) => 1.0 / *n as f64,
            (MetricSpace::HarmonicNat(_), Point::Infinity, Point::Infinity) => 0.0,
            _ => unreachable!("points were checked against the space"),
        }
    }
}

/// Lists points in enumeration order: all points of a finite space
/// (`limit` is ignored), the first `limit` grid points of an interval, or
/// `1..=min(M, limit - 1)` followed by `∞` for the harmonic space.
pub fn enumerate_points(space: &MetricSpace, limit: usize) -> Vec<Point> {
    let limit = limit.max(1);
    match space {
        MetricSpace::FiniteExplicit(s) => (0..s.size).map(Point::Index).collect(),
        MetricSpace::RealInterval(s) => (0..s.resolution.min(limit))
            .map(|i| Point::Real(s.grid_point(i)))
            .collect(),
        MetricSpace::HarmonicNat(s) => {
            let top = s.truncation.min(limit as u64 - 1);
            (1..=top)
                .map(Point::Nat)
                .chain(std::iter::once(Point::Infinity))
                .collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Nonnegativity,
    ZeroSelfDistance,
    Identity,
    Symmetry,
    TriangleInequality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    /// The offending pair or triple `(x, y[, z])`.
    pub points: Vec<Point>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub passed: bool,
    pub exhaustive: bool,
    pub triples_checked: usize,
    pub violation: Option<AxiomViolation>,
}

/// Checks nonnegativity, `d(x,x) = 0`, identity of indiscernibles, bit-exact
/// symmetry and the triangle inequality (up to [`tol::EPS`]).
///
/// Spaces with at most [`EXHAUSTIVE_AXIOM_LIMIT`] points are checked on
/// every ordered triple; otherwise `triple_sample_size` random triples are
/// drawn deterministically from `seed`.
pub fn verify_metric_axioms(space: &MetricSpace, triple_sample_size: usize, seed: u64) -> AxiomReport {
    let exhaustive = space.enumerable_len() <= EXHAUSTIVE_AXIOM_LIMIT;
    let mut checked = 0usize;
    let violation = if exhaustive {
        let points = enumerate_points(space, EXHAUSTIVE_AXIOM_LIMIT + 1);
        let mut found = None;
        'outer: for x in &points {
            for y in &points {
                for z in &points {
                    checked += 1;
                    if let Some(v) = check_triple(space, x, y, z) {
                        found = Some(v);
                        break 'outer;
                    }
                }
            }
        }
        found
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut found = None;
        for _ in 0..triple_sample_size {
            let x = random_point(space, &mut rng);
            let y = random_point(space, &mut rng);
            let z = random_point(space, &mut rng);
            checked += 1;
            if let Some(v) = check_triple(space, &x, &y, &z) {
                found = Some(v);
                break;
            }
        }
        found
    };
    AxiomReport {
        passed: violation.is_none(),
        exhaustive,
        triples_checked: checked,
        violation,
    }
}

fn check_triple(space: &MetricSpace, x: &Point, y: &Point, z: &Point) -> Option<AxiomViolation> {
    let d = |a: &Point, b: &Point| space.distance_unchecked(a, b);
    let dxx = d(x, x);
    if dxx != 0.0 {
        return Some(AxiomViolation {
            axiom: Axiom::ZeroSelfDistance,
            points: vec![*x],
            detail: format!("d(x,x) = {dxx}"),
        });
    }
    let dxy = d(x, y);
    if dxy < 0.0 {
        return Some(AxiomViolation {
            axiom: Axiom::Nonnegativity,
            points: vec![*x, *y],
            detail: format!("d(x,y) = {dxy}"),
        });
    }
    let dyx = d(y, x);
    if dxy.to_bits() != dyx.to_bits() {
        return Some(AxiomViolation {
            axiom: Axiom::Symmetry,
            points: vec![*x, *y],
            detail: format!("d(x,y) = {dxy}, d(y,x) = {dyx}"),
        });
    }
    if (dxy == 0.0) != (x == y) {
        return Some(AxiomViolation {
            axiom: Axiom::Identity,
            points: vec![*x, *y],
            detail: format!("d(x,y) = {dxy}"),
        });
    }
    let (dxz, dyz) = (d(x, z), d(y, z));
    if !tol::le(dxz, dxy + dyz) {
        return Some(AxiomViolation {
            axiom: Axiom::TriangleInequality,
            points: vec![*x, *y, *z],
            detail: format!("d(x,z) = {dxz} > d(x,y) + d(y,z) = {}", dxy + dyz),
        });
    }
    None
}

fn random_point(space: &MetricSpace, rng: &mut ChaCha8Rng) -> Point {
    match space {
        MetricSpace::FiniteExplicit(s) => Point::Index(rng.gen_range(0..s.size)),
        MetricSpace::RealInterval(s) => {
            if rng.gen_bool(0.5) {
                Point::Real(s.grid_point(rng.gen_range(0..s.resolution)))
            } else {
                let x = s.lower + (s.upper - s.lower) * rng.gen::<f64>();
                Point::Real(x.clamp(s.lower, s.upper))
            }
        }
        MetricSpace::HarmonicNat(s) => {
            if rng.gen_ratio(1, 16) {
                Point::Infinity
            } else {
                Point::Nat(rng.gen_range(1..=s.truncation))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_distances() {
        let s = MetricSpace::discrete(3).unwrap();
        assert_eq!(s.distance(&Point::Index(0), &Point::Index(1)).unwrap(), 1.0);
        assert_eq!(s.distance(&Point::Index(2), &Point::Index(2)).unwrap(), 0.0);
    }

    #[test]
    fn harmonic_distances() {
        let s = MetricSpace::harmonic(100).unwrap();
        assert_eq!(s.distance(&Point::Nat(4), &Point::Infinity).unwrap(), 0.25);
        assert_eq!(s.distance(&Point::Nat(2), &Point::Nat(3)).unwrap(), 1.0 / 6.0);
        assert_eq!(s.distance(&Point::Infinity, &Point::Infinity).unwrap(), 0.0);
    }

    #[test]
    fn interval_distance_is_exact_off_grid() {
        let s = MetricSpace::unit_interval();
        assert_eq!(s.distance(&Point::Real(0.3), &Point::Real(0.1)).unwrap(), 0.3 - 0.1);
    }

    #[test]
    fn domain_errors() {
        let s = MetricSpace::discrete(3).unwrap();
        assert!(matches!(
            s.distance(&Point::Real(0.0), &Point::Index(0)),
            Err(Error::DomainMismatch { .. })
        ));
        assert!(matches!(
            s.distance(&Point::Index(3), &Point::Index(0)),
            Err(Error::OutOfRange { .. })
        ));
        let h = MetricSpace::harmonic(10).unwrap();
        assert!(matches!(h.check(&Point::Nat(0)), Err(Error::OutOfRange { .. })));
        assert!(matches!(h.check(&Point::Nat(11)), Err(Error::OutOfRange { .. })));
        let i = MetricSpace::unit_interval();
        assert!(matches!(i.check(&Point::Real(1.5)), Err(Error::OutOfRange { .. })));
        assert!(matches!(i.check(&Point::Infinity), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn enumeration() {
        let d = MetricSpace::discrete(3).unwrap();
        assert_eq!(
            enumerate_points(&d, 10),
            vec![Point::Index(0), Point::Index(1), Point::Index(2)]
        );
        let i = MetricSpace::interval(0.0, 1.0, 5).unwrap();
        assert_eq!(
            enumerate_points(&i, 5),
            [0.0, 0.25, 0.5, 0.75, 1.0].map(Point::Real).to_vec()
        );
        let h = MetricSpace::harmonic(3).unwrap();
        assert_eq!(
            enumerate_points(&h, 10),
            vec![Point::Nat(1), Point::Nat(2), Point::Nat(3), Point::Infinity]
        );
        let h = MetricSpace::harmonic(100).unwrap();
        assert_eq!(enumerate_points(&h, 3), vec![Point::Nat(1), Point::Nat(2), Point::Infinity]);
    }

    #[test]
    fn default_grid_ends_exactly() {
        let s = MetricSpace::unit_interval();
        let pts = enumerate_points(&s, usize::MAX);
        assert_eq!(pts.len(), 1001);
        assert_eq!(pts[1000], Point::Real(1.0));
        assert_eq!(pts[999], Point::Real(0.999));
    }

    #[test]
    fn axioms_hold_for_builtins() {
        assert!(verify_metric_axioms(&MetricSpace::discrete(3).unwrap(), 0, 1).passed);
        let r = verify_metric_axioms(&MetricSpace::unit_interval(), 10_000, 7);
        assert!(r.passed && !r.exhaustive && r.triples_checked == 10_000);
        let r = verify_metric_axioms(&MetricSpace::harmonic(DEFAULT_TRUNCATION).unwrap(), 10_000, 7);
        assert!(r.passed);
    }

    #[test]
    fn broken_triangle_reported() {
        let s = MetricSpace::finite(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ])
        .unwrap();
        let r = verify_metric_axioms(&s, 0, 0);
        assert!(!r.passed);
        let v = r.violation.unwrap();
        assert_eq!(v.axiom, Axiom::TriangleInequality);
        assert_eq!(v.points, vec![Point::Index(0), Point::Index(1), Point::Index(2)]);
    }

    #[test]
    fn zero_off_diagonal_breaks_identity() {
        let s = MetricSpace::finite(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let v = verify_metric_axioms(&s, 0, 0).violation.unwrap();
        assert_eq!(v.axiom, Axiom::Identity);
    }

    #[test]
    fn csv_loading() {
        let s = FiniteSpace::from_csv_reader("0,1,2\n1,0,1\n2,1,0\n".as_bytes()).unwrap();
        assert_eq!(s.size(), 3);
        assert_eq!(s.get(0, 2), 2.0);
        let near = FiniteSpace::from_csv_reader("0,1\n1.0000000000001,0\n".as_bytes()).unwrap();
        assert_eq!(near.get(0, 1).to_bits(), near.get(1, 0).to_bits());
        assert!(FiniteSpace::from_csv_reader("0,1\n1.5,0\n".as_bytes()).is_err());
        assert!(FiniteSpace::from_csv_reader("0,1\n1,0,3\n".as_bytes()).is_err());
        assert!(FiniteSpace::from_csv_reader("0,x\nx,0\n".as_bytes()).is_err());
        assert!(FiniteSpace::from_csv_reader("0,-1\n-1,0\n".as_bytes()).is_err());
    }
}
