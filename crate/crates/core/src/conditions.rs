//! The six contraction families, their parameters, and pointwise evaluation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::SelfMap;
use crate::metric::{MetricSpace, Point};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Banach,
    Kannan,
    Chatterjea,
    Ciric,
    FContraction,
    Pa,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Banach,
        Family::Kannan,
        Family::Chatterjea,
        Family::Ciric,
        Family::FContraction,
        Family::Pa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Banach => "banach",
            Family::Kannan => "kannan",
            Family::Chatterjea => "chatterjea",
            Family::Ciric => "ciric",
            Family::FContraction => "f_contraction",
            Family::Pa => "pa",
        }
    }

    /// Upper end of the admissible constant range (`k < bound`). For
    /// F-contractions the measured quantity is `τ` and membership needs
    /// `τ > bound`.
    pub fn bound(self) -> f64 {
        match self {
            Family::Banach | Family::Ciric | Family::Pa => 1.0,
            Family::Kannan | Family::Chatterjea => 0.5,
            Family::FContraction => 0.0,
        }
    }

    pub fn is_pointwise(self) -> bool {
        self != Family::Pa
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "banach" => Ok(Family::Banach),
            "kannan" => Ok(Family::Kannan),
            "chatterjea" => Ok(Family::Chatterjea),
            "ciric" => Ok(Family::Ciric),
            "f" | "f_contraction" | "fcontraction" => Ok(Family::FContraction),
            "pa" => Ok(Family::Pa),
            _ => Err(Error::parse("condition family", s, "unknown family")),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Built-in choices of `F` for F-contractions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FFunction {
    /// `F(t) = ln t`
    Log,
    /// `F(t) = ln t + t`
    LogPlusIdentity,
    /// `F(t) = -1/√t`
    NegInvSqrt,
}

impl FFunction {
    pub const ALL: [FFunction; 3] = [FFunction::Log, FFunction::LogPlusIdentity, FFunction::NegInvSqrt];

    pub fn eval(self, t: f64) -> f64 {
        match self {
            FFunction::Log => t.ln(),
            FFunction::LogPlusIdentity => t.ln() + t,
            FFunction::NegInvSqrt => -1.0 / t.sqrt(),
        }
    }

    /// An exponent `k ∈ (0,1)` with `tᵏ F(t) → 0` as `t → 0⁺`.
    /// `-1/√t` needs `k > 1/2`.
    pub fn power_limit_exponent(self) -> f64 {
        match self {
            FFunction::Log | FFunction::LogPlusIdentity => 0.5,
            FFunction::NegInvSqrt => 0.75,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FFunction::Log => "log",
            FFunction::LogPlusIdentity => "log_plus_t",
            FFunction::NegInvSqrt => "neg_inv_sqrt",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "log" | "ln" => Ok(FFunction::Log),
            "log_plus_t" | "logplus" | "ln_plus_t" => Ok(FFunction::LogPlusIdentity),
            "neg_inv_sqrt" | "inv_sqrt" => Ok(FFunction::NegInvSqrt),
            _ => Err(Error::parse("F function", s, "expected log, log_plus_t or neg_inv_sqrt")),
        }
    }

    /// Numerical spot check of the three admissibility conditions: strict
    /// increase on a log-spaced sample, `F(t) → -∞` along `t = 10⁻¹..10⁻¹⁵`,
    /// and `tᵏ F(t) → 0` along the same sequence.
    pub fn spot_check(self) -> FAdmissibility {
        let increasing = (-15..=3)
            .flat_map(|e| (0..4).map(move |q| 10f64.powf(e as f64 + q as f64 / 4.0)))
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| self.eval(w[0]) < self.eval(w[1]));
        let ts: Vec<f64> = (1..=15).map(|e| 10f64.powi(-e)).collect();
        let values: Vec<f64> = ts.iter().map(|&t| self.eval(t)).collect();
        let diverges = values.windows(2).all(|w| w[1] < w[0]) && *values.last().unwrap() < -30.0;
        let k = self.power_limit_exponent();
        let scaled: Vec<f64> = ts.iter().map(|&t| (t.powf(k) * self.eval(t)).abs()).collect();
        let power_limit = scaled.windows(2).all(|w| w[1] < w[0]) && *scaled.last().unwrap() < 1e-3;
        FAdmissibility {
            increasing,
            diverges_at_zero: diverges,
            power_limit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FAdmissibility {
    pub increasing: bool,
    pub diverges_at_zero: bool,
    pub power_limit: bool,
}

impl FAdmissibility {
    pub fn all(&self) -> bool {
        self.increasing && self.diverges_at_zero && self.power_limit
    }
}

/// A parametrized contraction condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ConditionSpec {
    Banach { k: f64 },
    Kannan { k: f64 },
    Chatterjea { k: f64 },
    Ciric { k: f64 },
    FContraction { f: FFunction, tau: f64 },
    Pa { alpha: f64, n_min: usize, horizon: usize },
}

impl ConditionSpec {
    pub fn banach(k: f64) -> Result<Self> {
        Self::Banach { k }.validated()
    }

    pub fn kannan(k: f64) -> Result<Self> {
        Self::Kannan { k }.validated()
    }

    pub fn chatterjea(k: f64) -> Result<Self> {
        Self::Chatterjea { k }.validated()
    }

    pub fn ciric(k: f64) -> Result<Self> {
        Self::Ciric { k }.validated()
    }

    pub fn f_contraction(f: FFunction, tau: f64) -> Result<Self> {
        Self::FContraction { f, tau }.validated()
    }

    pub fn pa(alpha: f64, n_min: usize, horizon: usize) -> Result<Self> {
        Self::Pa {
            alpha,
            n_min,
            horizon,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Parameter ranges are strict: `k ∈ (0,1)` for Banach and Ćirić,
    /// `k ∈ (0, 1/2)` for Kannan and Chatterjea, `τ > 0`, `α ∈ (0,1)`,
    /// `N ≥ 1` and `H ≥ N`.
    pub fn validate(&self) -> Result<()> {
        let open = |name: &str, v: f64, hi: f64| {
            if v > 0.0 && v < hi {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} = {v} must lie in (0, {hi})"
                )))
            }
        };
        match *self {
            Self::Banach { k } | Self::Ciric { k } => open("k", k, 1.0),
            Self::Kannan { k } | Self::Chatterjea { k } => open("k", k, 0.5),
            Self::FContraction { tau, .. } => open("tau", tau, f64::INFINITY),
            Self::Pa {
                alpha,
                n_min,
                horizon,
            } => {
                open("alpha", alpha, 1.0)?;
                if n_min == 0 {
                    return Err(Error::InvalidParameter("N must be at least 1".into()));
                }
                if horizon < n_min {
                    return Err(Error::InvalidParameter(format!(
                        "horizon {horizon} must be at least N = {n_min}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Banach { .. } => Family::Banach,
            Self::Kannan { .. } => Family::Kannan,
            Self::Chatterjea { .. } => Family::Chatterjea,
            Self::Ciric { .. } => Family::Ciric,
            Self::FContraction { .. } => Family::FContraction,
            Self::Pa { .. } => Family::Pa,
        }
    }
}

/// The six distances every pointwise condition is built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistances {
    pub d_x_y: f64,
    pub d_tx_ty: f64,
    pub d_x_tx: f64,
    pub d_y_ty: f64,
    pub d_x_ty: f64,
    pub d_y_tx: f64,
}

impl PairDistances {
    pub fn compute(space: &MetricSpace, map: &SelfMap, x: &Point, y: &Point) -> Result<Self> {
        space.check(x)?;
        space.check(y)?;
        let tx = map.apply(x)?;
        let ty = map.apply(y)?;
        space.check(&tx)?;
        space.check(&ty)?;
        let d = |a: &Point, b: &Point| space.distance_unchecked(a, b);
        Ok(Self {
            d_x_y: d(x, y),
            d_tx_ty: d(&tx, &ty),
            d_x_tx: d(x, &tx),
            d_y_ty: d(y, &ty),
            d_x_ty: d(x, &ty),
            d_y_tx: d(y, &tx),
        })
    }

    /// The quantity multiplied by `k` on the right-hand side. `None` for
    /// the F and PA families.
    pub fn kernel(&self, family: Family) -> Option<f64> {
        match family {
            Family::Banach => Some(self.d_x_y),
            Family::Kannan => Some(self.d_x_tx + self.d_y_ty),
            Family::Chatterjea => Some(self.d_x_ty + self.d_y_tx),
            Family::Ciric => Some(
                self.d_x_y
                    .max(self.d_x_tx)
                    .max(self.d_y_ty)
                    .max((self.d_x_ty + self.d_y_tx) / 2.0),
            ),
            Family::FContraction | Family::Pa => None,
        }
    }
}

/// Both sides of a pointwise inequality at one pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub lhs: f64,
    pub rhs: f64,
    pub kernel: Option<f64>,
    /// False for F-contractions when `d(Tx,Ty) = 0`; the instance is then
    /// vacuously satisfied.
    pub applicable: bool,
}

impl Evaluation {
    pub fn holds(&self) -> bool {
        !self.applicable || tol::le(self.lhs, self.rhs)
    }

    /// `lhs / kernel`, the least `k` this instance admits.
    pub fn implied_constant(&self) -> Option<f64> {
        self.kernel.and_then(|k| ratio(self.lhs, k))
    }
}

/// `lhs / kernel` with `0/0` undefined and `x/0 = ∞` for `x > 0`.
pub(crate) fn ratio(lhs: f64, kernel: f64) -> Option<f64> {
    if kernel > 0.0 {
        Some(lhs / kernel)
    } else if lhs > 0.0 {
        Some(f64::INFINITY)
    } else {
        None
    }
}

pub fn evaluate_distances(spec: &ConditionSpec, pd: &PairDistances) -> Result<Evaluation> {
    let family = spec.family();
    match *spec {
        ConditionSpec::Banach { k }
        | ConditionSpec::Kannan { k }
        | ConditionSpec::Chatterjea { k }
        | ConditionSpec::Ciric { k } => {
            let kernel = pd.kernel(family).expect("pointwise family");
            Ok(Evaluation {
                lhs: pd.d_tx_ty,
                rhs: k * kernel,
                kernel: Some(kernel),
                applicable: true,
            })
        }
        ConditionSpec::FContraction { f, tau } => Ok(Evaluation {
            lhs: tau + f.eval(pd.d_tx_ty),
            rhs: f.eval(pd.d_x_y),
            kernel: None,
            applicable: pd.d_tx_ty > 0.0,
        }),
        ConditionSpec::Pa { .. } => Err(Error::WrongFamily("pa")),
    }
}

/// Evaluates a pointwise condition at `(x, y)`.
pub fn evaluate_condition(
    spec: &ConditionSpec,
    space: &MetricSpace,
    map: &SelfMap,
    x: &Point,
    y: &Point,
) -> Result<Evaluation> {
    if spec.family() == Family::Pa {
        return Err(Error::WrongFamily("pa"));
    }
    spec.validate()?;
    let pd = PairDistances::compute(space, map, x, y)?;
    evaluate_distances(spec, &pd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_ranges_are_strict() {
        assert!(ConditionSpec::kannan(0.5).is_err());
        assert!(ConditionSpec::kannan(0.4999).is_ok());
        assert!(ConditionSpec::banach(1.0).is_err());
        assert!(ConditionSpec::banach(0.0).is_err());
        assert!(ConditionSpec::f_contraction(FFunction::Log, 0.0).is_err());
        assert!(ConditionSpec::pa(0.5, 2, 1).is_err());
        assert!(ConditionSpec::pa(0.5, 0, 4).is_err());
        assert!(ConditionSpec::pa(1.0, 2, 4).is_err());
        assert!(ConditionSpec::pa(0.5, 2, 2).is_ok());
    }

    #[test]
    fn kannan_at_one_zero() {
        let space = MetricSpace::unit_interval();
        let spec = ConditionSpec::kannan(0.4).unwrap();
        let e = evaluate_condition(&spec, &space, &SelfMap::SquareHalf, &Point::Real(1.0), &Point::Real(0.0)).unwrap();
        assert_eq!(e.lhs, 0.5);
        assert_eq!(e.kernel, Some(0.5));
        assert!((e.rhs - 0.2).abs() < 1e-15);
        assert!(!e.holds());
        assert_eq!(e.implied_constant(), Some(1.0));
    }

    #[test]
    fn banach_on_diagonal() {
        let space = MetricSpace::discrete(3).unwrap();
        let map = SelfMap::table(vec![1, 2, 2]).unwrap();
        let e = evaluate_condition(&ConditionSpec::banach(0.3).unwrap(), &space, &map, &Point::Index(1), &Point::Index(1)).unwrap();
        assert_eq!((e.lhs, e.rhs), (0.0, 0.0));
        assert!(e.holds());
    }

    #[test]
    fn chatterjea_successor_four_three() {
        let space = MetricSpace::harmonic(100).unwrap();
        let map = SelfMap::successor(100);
        let e = evaluate_condition(&ConditionSpec::chatterjea(0.45).unwrap(), &space, &map, &Point::Nat(4), &Point::Nat(3)).unwrap();
        assert!((e.lhs - 0.05).abs() < 1e-15);
        assert!((e.kernel.unwrap() - 2.0 / 15.0).abs() < 1e-15);
        assert!((e.rhs - 0.06).abs() < 1e-15);
        assert!(e.holds());
    }

    #[test]
    fn log_f_near_one_one() {
        let space = MetricSpace::unit_interval();
        let spec = ConditionSpec::f_contraction(FFunction::Log, 0.05).unwrap();
        let (x, y) = (1.0, 0.99);
        let e = evaluate_condition(&spec, &space, &SelfMap::SquareHalf, &Point::Real(x), &Point::Real(y)).unwrap();
        assert!(e.applicable);
        let dtxty = (x * x - y * y) / 2.0;
        assert!((e.lhs - (0.05 + dtxty.ln())).abs() < 1e-12);
        assert!((e.rhs - (x - y).ln()).abs() < 1e-12);
        // τ must not exceed ln(2/(x+y)) ≈ 0.005
        assert!(!e.holds());
        let slack = e.rhs - (e.lhs - 0.05);
        assert!((slack - (2.0 / (x + y)).ln()).abs() < 1e-9);
    }

    #[test]
    fn f_not_applicable_when_images_coincide() {
        let space = MetricSpace::discrete(3).unwrap();
        let map = SelfMap::constant(3, 0).unwrap();
        let spec = ConditionSpec::f_contraction(FFunction::Log, 10.0).unwrap();
        let e = evaluate_condition(&spec, &space, &map, &Point::Index(1), &Point::Index(2)).unwrap();
        assert!(!e.applicable && e.holds());
    }

    #[test]
    fn pa_is_not_pointwise() {
        let space = MetricSpace::discrete(3).unwrap();
        let map = SelfMap::identity(3);
        let spec = ConditionSpec::pa(0.5, 2, 4).unwrap();
        assert!(matches!(
            evaluate_condition(&spec, &space, &map, &Point::Index(0), &Point::Index(1)),
            Err(Error::WrongFamily(_))
        ));
    }

    #[test]
    fn ciric_kernel_is_max_of_four() {
        let pd = PairDistances {
            d_x_y: 1.0,
            d_tx_ty: 0.5,
            d_x_tx: 2.0,
            d_y_ty: 0.1,
            d_x_ty: 3.0,
            d_y_tx: 2.0,
        };
        assert_eq!(pd.kernel(Family::Ciric), Some(2.5));
    }

    #[test]
    fn builtin_f_functions_are_admissible() {
        for f in FFunction::ALL {
            let a = f.spot_check();
            assert!(a.all(), "{f:?}: {a:?}");
        }
    }

    #[test]
    fn neg_inv_sqrt_fails_power_limit_at_one_half() {
        // t^(1/2) · (-1/√t) = -1 for every t
        let t: f64 = 1e-12;
        assert!((t.powf(0.5) * FFunction::NegInvSqrt.eval(t) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_kernel_ratios() {
        assert_eq!(ratio(0.0, 0.0), None);
        assert_eq!(ratio(1.0, 0.0), Some(f64::INFINITY));
        assert_eq!(ratio(1.0, 4.0), Some(0.25));
    }
}
