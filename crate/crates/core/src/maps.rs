//! Self-maps, their iterates, and orbit-pair distance tables.

use std::fmt;
use std::io::Read;
use std::ops::BitOrAssign;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::metric::{enumerate_points, MetricSpace, Point};

/// Largest `k` for which the closed form `2 (x/2)^(2^k)` is evaluated with
/// an `i32` exponent.
const CLOSED_FORM_MAX_K: usize = 30;

/// Side effects of evaluating an iterate that reports should mention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterFlags {
    /// A positive value fell below the smallest normal double and was
    /// flushed to zero.
    pub underflow: bool,
    /// The successor map hit the truncation bound and stayed there.
    pub saturated: bool,
}

impl BitOrAssign for IterFlags {
    fn bitor_assign(&mut self, rhs: Self) {
        self.underflow |= rhs.underflow;
        self.saturated |= rhs.saturated;
    }
}

/// Host-supplied point function.
#[derive(Clone)]
pub struct CustomMap {
    name: String,
    f: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
}

impl CustomMap {
    pub fn new(name: impl Into<String>, f: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMap").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Custom maps compare equal only when they share the same closure.
impl PartialEq for CustomMap {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && Arc::ptr_eq(&self.f, &other.f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SelfMap {
    /// `i ↦ table[i]` on a finite space.
    FiniteTable(Vec<usize>),
    /// `x ↦ x²/2` on `[0, 1]`.
    SquareHalf,
    /// `n ↦ n + 1`, `∞ ↦ ∞`, saturating at `truncation`.
    Successor { truncation: u64 },
    Custom(CustomMap),
}

impl SelfMap {
    pub fn table(table: Vec<usize>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidMap("map table is empty".into()));
        }
        if let Some((i, &t)) = table.iter().enumerate().find(|(_, &t)| t >= n) {
            return Err(Error::InvalidMap(format!(
                "table entry {i} -> {t} is not an index below {n}"
            )));
        }
        Ok(SelfMap::FiniteTable(table))
    }

    pub fn successor(truncation: u64) -> Self {
        SelfMap::Successor { truncation }
    }

    pub fn identity(point_count: usize) -> Self {
        SelfMap::FiniteTable((0..point_count).collect())
    }

    pub fn constant(point_count: usize, value: usize) -> Result<Self> {
        Self::table(vec![value; point_count])
    }

    /// Reads a single-column CSV; row `i` holds the image of point `i`.
    pub fn table_from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut table = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != 1 {
                return Err(Error::InvalidMap(format!(
                    "map CSV row {} has {} columns, expected 1",
                    table.len(),
                    record.len()
                )));
            }
            let cell = &record[0];
            table.push(
                cell.parse::<usize>()
                    .map_err(|e| Error::parse("map image index", cell, e.to_string()))?,
            );
        }
        Self::table(table)
    }

    pub fn table_from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::table_from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn has_closed_iterate(&self) -> bool {
        matches!(self, SelfMap::SquareHalf | SelfMap::Successor { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SelfMap::FiniteTable(_) => "finite_table",
            SelfMap::SquareHalf => "square_half",
            SelfMap::Successor { .. } => "successor",
            SelfMap::Custom(_) => "custom",
        }
    }

    pub fn params(&self) -> serde_json::Value {
        match self {
            SelfMap::FiniteTable(t) => json!({ "table": t }),
            SelfMap::SquareHalf => json!({}),
            SelfMap::Successor { truncation } => json!({ "truncation": truncation }),
            SelfMap::Custom(c) => json!({ "name": c.name }),
        }
    }

    /// `Tx`.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.step(x).map(|(p, _)| p)
    }

    pub(crate) fn step(&self, x: &Point) -> Result<(Point, IterFlags)> {
        let mut flags = IterFlags::default();
        let image = match (self, x) {
            (SelfMap::FiniteTable(t), Point::Index(i)) => match t.get(*i) {
                Some(&j) => Point::Index(j),
                None => {
                    return Err(Error::OutOfRange {
                        point: x.to_string(),
                        bounds: format!("index < {}", t.len()),
                    })
                }
            },
            (SelfMap::SquareHalf, Point::Real(v)) => {
                check_unit(x, *v)?;
                let (y, under) = flush(*v, v * v / 2.0);
                flags.underflow = under;
                Point::Real(y)
            }
            (SelfMap::Successor { truncation }, Point::Nat(n)) => {
                check_nat(x, *n, *truncation)?;
                if *n == *truncation {
                    flags.saturated = true;
                    Point::Nat(*n)
                } else {
                    Point::Nat(n + 1)
                }
            }
            (SelfMap::Successor { .. }, Point::Infinity) => Point::Infinity,
            (SelfMap::Custom(c), _) => (c.f)(x),
            _ => {
                return Err(Error::DomainMismatch {
                    point: format!("{x:?}"),
                    space: self.kind_name(),
                })
            }
        };
        Ok((image, flags))
    }

    /// `Tᵏx`. The square-half map uses `Tᵏx = x^(2^k) / 2^(2^k - 1)`; the
    /// successor map jumps straight to `min(n + k, truncation)`.
    pub fn iterate(&self, x: &Point, k: usize) -> Result<Point> {
        self.iterate_flagged(x, k).map(|(p, _)| p)
    }

    pub(crate) fn iterate_flagged(&self, x: &Point, k: usize) -> Result<(Point, IterFlags)> {
        let mut flags = IterFlags::default();
        match (self, x) {
            (SelfMap::SquareHalf, Point::Real(v)) => {
                check_unit(x, *v)?;
                if k == 0 {
                    return Ok((*x, flags));
                }
                let kc = k.min(CLOSED_FORM_MAX_K);
                let (mut y, under) = flush(*v, 2.0 * (v / 2.0).powi(1i32 << kc));
                flags.underflow = under;
                for _ in kc..k {
                    if y == 0.0 {
                        break;
                    }
                    let (next, under) = flush(y, y * y / 2.0);
                    flags.underflow |= under;
                    y = next;
                }
                Ok((Point::Real(y), flags))
            }
            (SelfMap::Successor { truncation }, Point::Nat(n)) => {
                check_nat(x, *n, *truncation)?;
                let target = n.saturating_add(k as u64);
                if target > *truncation {
                    flags.saturated = true;
                    Ok((Point::Nat(*truncation), flags))
                } else {
                    Ok((Point::Nat(target), flags))
                }
            }
            _ => {
                let mut p = *x;
                // validates x even when k == 0
                if k == 0 {
                    self.step(x)?;
                }
                for _ in 0..k {
                    let (next, f) = self.step(&p)?;
                    flags |= f;
                    p = next;
                }
                Ok((p, flags))
            }
        }
    }

    /// Checks that every enumerated point of `space` (up to `limit`) is
    /// mapped back into `space`.
    pub fn validate_on(&self, space: &MetricSpace, limit: usize) -> Result<()> {
        if let (SelfMap::FiniteTable(t), MetricSpace::FiniteExplicit(s)) = (self, space) {
            if t.len() != s.size() {
                return Err(Error::InvalidMap(format!(
                    "table has {} entries but the space has {} points",
                    t.len(),
                    s.size()
                )));
            }
        }
        for p in enumerate_points(space, limit) {
            let image = self.apply(&p)?;
            space.check(&image).map_err(|e| {
                Error::InvalidMap(format!("image of {p} leaves the space: {e}"))
            })?;
        }
        Ok(())
    }
}

fn check_unit(x: &Point, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            point: x.to_string(),
            bounds: "[0, 1]".into(),
        })
    }
}

fn check_nat(x: &Point, n: u64, truncation: u64) -> Result<()> {
    if n >= 1 && n <= truncation {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            point: x.to_string(),
            bounds: format!("1..={truncation} or inf"),
        })
    }
}

/// Flushes `v` to zero when it is below the smallest normal double although
/// it was computed from a positive `source`.
fn flush(source: f64, v: f64) -> (f64, bool) {
    if source > 0.0 && v < f64::MIN_POSITIVE {
        (0.0, true)
    } else {
        (v, false)
    }
}

/// `D[k] = d(Tᵏx, Tᵏy)` for `k = 0..=horizon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitPairTable {
    pub x: Point,
    pub y: Point,
    pub horizon: usize,
    pub distances: Vec<f64>,
    pub flags: IterFlags,
}

impl OrbitPairTable {
    pub fn get(&self, k: usize) -> f64 {
        self.distances[k]
    }
}

/// Builds the orbit-pair table. Maps with a closed-form iterate evaluate
/// every `Tᵏ` directly; the others are stepped.
pub fn orbit_pair_distances(
    space: &MetricSpace,
    map: &SelfMap,
    x: &Point,
    y: &Point,
    horizon: usize,
) -> Result<OrbitPairTable> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("orbit horizon must be at least 1".into()));
    }
    space.check(x)?;
    space.check(y)?;
    let mut flags = IterFlags::default();
    let mut distances = Vec::with_capacity(horizon + 1);
    if map.has_closed_iterate() {
        for k in 0..=horizon {
            let (tx, fx) = map.iterate_flagged(x, k)?;
            let (ty, fy) = map.iterate_flagged(y, k)?;
            flags |= fx;
            flags |= fy;
            distances.push(space.distance(&tx, &ty)?);
        }
    } else {
        let (mut tx, mut ty) = (*x, *y);
        distances.push(space.distance_unchecked(&tx, &ty));
        for _ in 0..horizon {
            let (nx, fx) = map.step(&tx)?;
            let (ny, fy) = map.step(&ty)?;
            flags |= fx;
            flags |= fy;
            tx = nx;
            ty = ny;
            distances.push(space.distance(&tx, &ty)?);
        }
    }
    Ok(OrbitPairTable {
        x: *x,
        y: *y,
        horizon,
        distances,
        flags,
    })
}
