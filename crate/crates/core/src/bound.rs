use serde::{Deserialize, Serialize};

/// Comparison recorded by a [`BoundCheck`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs <= rhs·(1 + tol) + abs_slack`
    Le,
    /// `lhs >= rhs·(1 − tol) − abs_slack`
    Ge,
    /// `|lhs − rhs| <= tol·|rhs| + abs_slack`
    Approx,
}

/// JSON writes non-finite floats as `null`; read them back as NaN.
pub(crate) fn float_or_null<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Both sides of an inequality with the tolerance used to decide it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    #[serde(deserialize_with = "float_or_null")]
    pub lhs: f64,
    #[serde(deserialize_with = "float_or_null")]
    pub rhs: f64,
    pub relation: Relation,
    /// Relative tolerance.
    pub tolerance: f64,
    /// Absolute slack added on top of the relative tolerance.
    #[serde(default)]
    pub abs_slack: f64,
    pub satisfied: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, relation: Relation, tolerance: f64) -> Self {
        Self::with_slack(name, lhs, rhs, relation, tolerance, 0.0)
    }

    pub fn with_slack(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        relation: Relation,
        tolerance: f64,
        abs_slack: f64,
    ) -> Self {
        let satisfied = match relation {
            Relation::Le => lhs <= rhs + tolerance * rhs.abs() + abs_slack,
            Relation::Ge => lhs >= rhs - tolerance * rhs.abs() - abs_slack,
            Relation::Approx => (lhs - rhs).abs() <= tolerance * rhs.abs() + abs_slack,
        };
        BoundCheck { name: name.into(), lhs, rhs, relation, tolerance, abs_slack, satisfied }
    }

    /// Ratio `rhs/lhs`, infinite when `lhs` vanishes.
    pub fn margin(&self) -> f64 {
        if self.lhs == 0.0 {
            f64::INFINITY
        } else {
            self.rhs / self.lhs
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(BoundCheck::new("a", 1.04, 1.0, Relation::Le, 0.05).satisfied);
        assert!(!BoundCheck::new("a", 1.06, 1.0, Relation::Le, 0.05).satisfied);
        assert!(BoundCheck::new("b", 0.96, 1.0, Relation::Ge, 0.05).satisfied);
        assert!(BoundCheck::with_slack("c", 2.0, 2.0 - 0.04, Relation::Le, 0.0, 0.05).satisfied);
        assert!(!BoundCheck::new("d", 1.2, 1.0, Relation::Approx, 0.1).satisfied);
        assert!(BoundCheck::new("d", -0.0, 0.0, Relation::Approx, 0.1).satisfied);
    }
}
