//! Text descriptors for spaces, maps, points and conditions.
//!
//! ```text
//! space      discrete:N | finite:PATH | interval[:LO,HI] | unit | harmonic[:M]
//! map        table:I,J,.. | table-csv:PATH | square-half | successor | identity | constant:I
//! point      inf | INDEX | REAL | NATURAL         (interpreted by the space)
//! condition  banach:K | kannan:K | chatterjea:K | ciric:K
//!            f:FN,tau=T | pa:alpha=A,n=N[,h=H]     (keys may also be positional)
//! measure    banach | kannan | chatterjea | ciric | f[:FN] | pa[:n=N[,h=H]]
//! ```

use std::str::FromStr;

use crate::check::Measure;
use crate::conditions::{ConditionSpec, FFunction, Family};
use crate::error::{Error, Result};
use crate::maps::SelfMap;
use crate::metric::{MetricSpace, Point};

/// Defaults filled in for parameters a descriptor leaves out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Defaults {
    pub grid: usize,
    pub truncation: u64,
    pub horizon: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            grid: crate::metric::DEFAULT_GRID_RESOLUTION,
            truncation: crate::metric::DEFAULT_TRUNCATION,
            horizon: 16,
        }
    }
}

fn split_head(s: &str) -> (String, Option<&str>) {
    match s.split_once(':') {
        Some((h, rest)) => (h.trim().to_ascii_lowercase(), Some(rest.trim())),
        None => (s.trim().to_ascii_lowercase(), None),
    }
}

fn num<T: FromStr>(what: &'static str, input: &str) -> Result<T> {
    input
        .trim()
        .parse()
        .map_err(|_| Error::parse(what, input, "not a valid number"))
}

/// Splits `a=1,2,b=3` into keyed and positional arguments.
struct Args<'a> {
    keyed: Vec<(String, &'a str)>,
    positional: Vec<&'a str>,
}

impl<'a> Args<'a> {
    fn parse(rest: Option<&'a str>) -> Self {
        let mut keyed = Vec::new();
        let mut positional = Vec::new();
        for item in rest.into_iter().flat_map(|r| r.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                Some((k, v)) => keyed.push((k.trim().to_ascii_lowercase(), v.trim())),
                None => positional.push(item),
            }
        }
        Self { keyed, positional }
    }

    fn take(&mut self, keys: &[&str]) -> Option<&'a str> {
        if let Some(i) = self.keyed.iter().position(|(k, _)| keys.contains(&k.as_str())) {
            return Some(self.keyed.remove(i).1);
        }
        (!self.positional.is_empty()).then(|| self.positional.remove(0))
    }

    fn finish(self, input: &str) -> Result<()> {
        if let Some((k, _)) = self.keyed.first() {
            return Err(Error::parse("descriptor", input, format!("unknown key `{k}`")));
        }
        if let Some(p) = self.positional.first() {
            return Err(Error::parse("descriptor", input, format!("unexpected argument `{p}`")));
        }
        Ok(())
    }
}

pub fn parse_space(input: &str, defaults: &Defaults) -> Result<MetricSpace> {
    let (head, rest) = split_head(input);
    match head.as_str() {
        "discrete" => {
            let n = rest.ok_or_else(|| Error::parse("space", input, "expected discrete:N"))?;
            MetricSpace::discrete(num("point count", n)?)
        }
        "finite" | "csv" => {
            let path = rest.ok_or_else(|| Error::parse("space", input, "expected finite:PATH"))?;
            Ok(MetricSpace::FiniteExplicit(crate::metric::FiniteSpace::from_csv_path(path)?))
        }
        "interval" | "unit" => {
            let (lo, hi) = match rest {
                None => (0.0, 1.0),
                Some(r) => {
                    let (lo, hi) = r
                        .split_once(',')
                        .ok_or_else(|| Error::parse("space", input, "expected interval:LO,HI"))?;
                    (num("interval bound", lo)?, num("interval bound", hi)?)
                }
            };
            MetricSpace::interval(lo, hi, defaults.grid)
        }
        "harmonic" => {
            let m = match rest {
                Some(r) => num("truncation", r)?,
                None => defaults.truncation,
            };
            MetricSpace::harmonic(m)
        }
        _ => Err(Error::parse("space", input, "unknown space kind")),
    }
}

pub fn parse_map(input: &str, space: &MetricSpace) -> Result<SelfMap> {
    let (head, rest) = split_head(input);
    let need_finite = |what: &str| match space {
        MetricSpace::FiniteExplicit(s) => Ok(s.size()),
        _ => Err(Error::InvalidMap(format!("{what} needs a finite space"))),
    };
    let map = match head.as_str() {
        "table" => {
            let r = rest.ok_or_else(|| Error::parse("map", input, "expected table:I,J,.."))?;
            SelfMap::table(r.split(',').map(|v| num("table entry", v)).collect::<Result<_>>()?)?
        }
        "table-csv" | "table_csv" => {
            let path = rest.ok_or_else(|| Error::parse("map", input, "expected table-csv:PATH"))?;
            SelfMap::table_from_csv_path(path)?
        }
        "square-half" | "square_half" | "squarehalf" => SelfMap::SquareHalf,
        "successor" => match space {
            MetricSpace::HarmonicNat(h) => SelfMap::successor(h.truncation()),
            _ => return Err(Error::InvalidMap("successor needs the harmonic space".into())),
        },
        "identity" => SelfMap::identity(need_finite("identity")?),
        "constant" => {
            let v = rest.ok_or_else(|| Error::parse("map", input, "expected constant:I"))?;
            SelfMap::constant(need_finite("constant")?, num("constant value", v)?)?
        }
        _ => return Err(Error::parse("map", input, "unknown map kind")),
    };
    map.validate_on(space, crate::metric::EXHAUSTIVE_AXIOM_LIMIT)?;
    Ok(map)
}

pub fn parse_point(input: &str, space: &MetricSpace) -> Result<Point> {
    let t = input.trim();
    let p = if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
        Point::Infinity
    } else {
        match space {
            MetricSpace::FiniteExplicit(_) => Point::Index(num("point index", t)?),
            MetricSpace::RealInterval(_) => Point::Real(num("real point", t)?),
            MetricSpace::HarmonicNat(_) => Point::Nat(num("natural point", t)?),
        }
    };
    space.check(&p)?;
    Ok(p)
}

pub fn parse_condition(input: &str, defaults: &Defaults) -> Result<ConditionSpec> {
    let (head, rest) = split_head(input);
    let family = Family::parse(&head)?;
    let mut args = Args::parse(rest);
    let missing = |key: &str| Error::parse("condition", input, format!("missing `{key}`"));
    let spec = match family {
        Family::Banach | Family::Kannan | Family::Chatterjea | Family::Ciric => {
            let k = num("k", args.take(&["k"]).ok_or_else(|| missing("k"))?)?;
            match family {
                Family::Banach => ConditionSpec::banach(k),
                Family::Kannan => ConditionSpec::kannan(k),
                Family::Chatterjea => ConditionSpec::chatterjea(k),
                _ => ConditionSpec::ciric(k),
            }
        }
        Family::FContraction => {
            let f = FFunction::parse(args.take(&["f", "fn"]).unwrap_or("log"))?;
            let tau = num("tau", args.take(&["tau", "t"]).ok_or_else(|| missing("tau"))?)?;
            ConditionSpec::f_contraction(f, tau)
        }
        Family::Pa => {
            let alpha = num("alpha", args.take(&["alpha", "a"]).ok_or_else(|| missing("alpha"))?)?;
            let n = num("N", args.take(&["n", "n_min"]).ok_or_else(|| missing("n"))?)?;
            let h = match args.take(&["h", "horizon"]) {
                Some(h) => num("horizon", h)?,
                None => defaults.horizon,
            };
            ConditionSpec::pa(alpha, n, h)
        }
    }?;
    args.finish(input)?;
    Ok(spec)
}

pub fn parse_measure(input: &str, defaults: &Defaults) -> Result<Measure> {
    let (head, rest) = split_head(input);
    let family = Family::parse(&head)?;
    let mut args = Args::parse(rest);
    let m = match family {
        Family::FContraction => Measure::FContraction {
            f: FFunction::parse(args.take(&["f", "fn"]).unwrap_or("log"))?,
        },
        Family::Pa => {
            let n_min = match args.take(&["n", "n_min"]) {
                Some(n) => num("N", n)?,
                None => 1,
            };
            let horizon = match args.take(&["h", "horizon"]) {
                Some(h) => num("horizon", h)?,
                None => defaults.horizon,
            };
            if n_min == 0 || horizon < n_min {
                return Err(Error::InvalidParameter(format!("need 1 <= N <= H, got N = {n_min}, H = {horizon}")));
            }
            Measure::Pa { n_min, horizon }
        }
        f => Measure::pointwise(f).expect("pointwise family"),
    };
    args.finish(input)?;
    Ok(m)
}
