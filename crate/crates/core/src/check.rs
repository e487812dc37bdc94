//! A measured probability compared against a bound.

use serde::Serialize;

use crate::probability::ProbabilityRecord;
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtLeast,
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub value: ProbabilityRecord,
    pub relation: Relation,
    pub bound: f64,
    #[serde(
        skip_serializing_if = "Option::is_none",
        serialize_with = "serialize_opt"
    )]
    pub exact_bound: Option<Rational>,
    /// Exact comparison when both sides are exact; otherwise the sampled value
    /// may sit anywhere inside its half width.
    pub holds: bool,
    /// False when the bound is vacuous at these parameters.
    pub meaningful: bool,
}

fn serialize_opt<S: serde::Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(r) => rational::serialize(r, s),
        None => s.serialize_none(),
    }
}

impl BoundCheck {
    pub fn new(
        value: ProbabilityRecord,
        relation: Relation,
        bound: f64,
        exact_bound: Option<Rational>,
    ) -> Self {
        let holds = match (value.exact(), &exact_bound) {
            (Some(v), Some(b)) => match relation {
                Relation::AtLeast => v >= b,
                Relation::AtMost => v <= b,
            },
            _ => match relation {
                Relation::AtLeast => value.value() + value.half_width() >= bound,
                Relation::AtMost => value.value() - value.half_width() <= bound,
            },
        };
        let meaningful = match relation {
            Relation::AtLeast => bound > 0.0,
            Relation::AtMost => bound < 1.0,
        };
        Self {
            value,
            relation,
            bound,
            exact_bound,
            holds,
            meaningful,
        }
    }

    pub fn exact(value: Rational, relation: Relation, bound: Rational) -> Self {
        let shadow = rational::to_f64(&bound);
        Self::new(
            ProbabilityRecord::Exact(crate::probability::ExactProbability::new(value)),
            relation,
            shadow,
            Some(bound),
        )
    }
}
