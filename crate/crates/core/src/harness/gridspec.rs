use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::util::{lin_space, log_space};
use crate::{Error, Result};

/// Largest number of points a grid spec may request.
pub const MAX_POINTS: usize = 100_000;

/// Sample grid written as `lin:a:b:n`, `log:a:b:n` or an explicit list `a,b,c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GridSpec {
    Lin { a: f64, b: f64, n: usize },
    Log { a: f64, b: f64, n: usize },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Lin { a, b, n } => lin_space(*a, *b, *n),
            GridSpec::Log { a, b, n } => log_space(*a, *b, *n),
            GridSpec::List(v) => v.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GridSpec::Lin { n, .. } | GridSpec::Log { n, .. } => *n,
            GridSpec::List(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values strictly increase.
    pub fn is_increasing(&self) -> bool {
        self.values().windows(2).all(|w| w[0] < w[1])
    }
}

fn bad(spec: &str, reason: impl Into<String>) -> Error {
    Error::InvalidGridSpec { spec: spec.to_string(), reason: reason.into() }
}

fn number(spec: &str, s: &str) -> Result<f64> {
    let x: f64 = s.trim().parse().map_err(|_| bad(spec, format!("not a number: {s:?}")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(spec, format!("not finite: {s:?}")))
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let s = spec.trim();
        if s.is_empty() {
            return Err(bad(spec, "empty"));
        }
        let head = s.split(':').next().unwrap_or("").to_ascii_lowercase();
        if head == "lin" || head == "log" {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 4 {
                return Err(bad(spec, "expected kind:a:b:n"));
            }
            let (a, b) = (number(spec, parts[1])?, number(spec, parts[2])?);
            let n: usize = parts[3].trim().parse().map_err(|_| bad(spec, "point count must be a positive integer"))?;
            if n == 0 || n > MAX_POINTS {
                return Err(bad(spec, format!("point count must be in 1..={MAX_POINTS}")));
            }
            return if head == "lin" {
                Ok(GridSpec::Lin { a, b, n })
            } else if a > 0.0 && b > 0.0 {
                Ok(GridSpec::Log { a, b, n })
            } else {
                Err(bad(spec, "log grid needs positive end points"))
            };
        }
        let vals = s.split(',').map(|x| number(spec, x)).collect::<Result<Vec<f64>>>()?;
        if vals.len() > MAX_POINTS {
            return Err(bad(spec, "too many points"));
        }
        Ok(GridSpec::List(vals))
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Lin { a, b, n } => write!(f, "lin:{a:?}:{b:?}:{n}"),
            GridSpec::Log { a, b, n } => write!(f, "log:{a:?}:{b:?}:{n}"),
            GridSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl TryFrom<String> for GridSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> String {
        g.to_string()
    }
}
