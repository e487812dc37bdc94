//! p-biased coverage probabilities `Pr[∃F ∈ 𝓕 : F ⊆ W ∪ Y]`, computed exactly by
//! enumeration or inclusion–exclusion, or estimated with seeded sampling.

mod exact;
mod monte_carlo;
mod robust;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::mask::SubsetMask;
use crate::rational::{self, Rational};

pub use exact::DEFAULT_WORK_CAP;
pub use monte_carlo::{
    estimate_event, sample_p_subset, stream_rng, wilson_half_width, McConfig, PBiasedParams,
    StreamRng,
};
pub use robust::{exceeds, is_robust_sunflower, Engine, RobustnessCertificate};

/// An exact probability with a floating-point shadow.
#[derive(Clone, PartialEq)]
pub struct ExactProbability {
    pub value: Rational,
    pub shadow: f64,
}

impl ExactProbability {
    pub fn new(value: Rational) -> Self {
        let shadow = rational::to_f64(&value);
        Self { value, shadow }
    }
}

impl fmt::Debug for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (≈{})", self.value, self.shadow)
    }
}

impl Serialize for ExactProbability {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("ExactProbability", 2)?;
        s.serialize_field("value", &self.shadow)?;
        s.serialize_field("exact", &self.value.to_string())?;
        s.end()
    }
}

/// A Monte-Carlo estimate with a Wilson-interval half width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
    pub confidence: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Either kind of probability, as carried by certificates and ledgers.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "engine", rename_all = "snake_case")]
pub enum ProbabilityRecord {
    Exact(ExactProbability),
    MonteCarlo(Estimate),
}

impl ProbabilityRecord {
    pub fn value(&self) -> f64 {
        match self {
            ProbabilityRecord::Exact(p) => p.shadow,
            ProbabilityRecord::MonteCarlo(e) => e.value,
        }
    }

    pub fn half_width(&self) -> f64 {
        match self {
            ProbabilityRecord::Exact(_) => 0.0,
            ProbabilityRecord::MonteCarlo(e) => e.half_width,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            ProbabilityRecord::Exact(p) => Some(&p.value),
            ProbabilityRecord::MonteCarlo(_) => None,
        }
    }
}

/// A coverage event over a product space where every element is independently
/// present with probability `bias`, except the elements of an optional second
/// class which use their own bias.
#[derive(Clone, Debug)]
pub struct CoverageQuery {
    members: Vec<SubsetMask>,
    given: SubsetMask,
    bias: Rational,
    alt: Option<(SubsetMask, Rational)>,
}

impl CoverageQuery {
    pub fn new(members: Vec<SubsetMask>, given: SubsetMask, bias: Rational) -> Result<Self> {
        check_bias(&bias)?;
        Ok(Self {
            members,
            given,
            bias,
            alt: None,
        })
    }

    pub fn for_family(family: &SetFamily, given: &SubsetMask, bias: Rational) -> Result<Self> {
        Self::new(family.members().to_vec(), given.clone(), bias)
    }

    /// Gives the elements of `class` the bias `bias` instead of the default.
    pub fn with_class_bias(mut self, class: SubsetMask, bias: Rational) -> Result<Self> {
        check_bias(&bias)?;
        self.alt = Some((class, bias));
        Ok(self)
    }

    /// `∪ (F \ Y)`: the only elements whose state matters.
    pub fn free_elements(&self) -> SubsetMask {
        self.members.iter().fold(SubsetMask::empty(), |acc, m| {
            acc.union(&m.difference(&self.given))
        })
    }

    /// True when some member already lies inside the given set.
    fn certain(&self) -> bool {
        self.members.iter().any(|m| m.is_subset(&self.given))
    }

    /// Exact value by enumerating every restriction of `W` to the free elements.
    pub fn exact(&self, cap: usize) -> Result<ExactProbability> {
        exact::enumerate(self, cap)
    }

    /// Exact value by inclusion–exclusion over the (minimized) members.
    pub fn inclusion_exclusion(&self) -> Result<ExactProbability> {
        exact::inclusion_exclusion(self)
    }

    pub fn monte_carlo(&self, config: &McConfig) -> Result<Estimate> {
        monte_carlo::estimate(self, config)
    }
}

fn check_bias(bias: &Rational) -> Result<()> {
    if rational::in_unit_interval(bias) {
        Ok(())
    } else {
        Err(Error::invalid(format!("bias {bias} outside [0, 1]")))
    }
}

/// Exact `Pr_{W ⊆_p [n]}[∃F ∈ family : F ⊆ W ∪ Y]` under the default work cap.
pub fn coverage_exact(
    family: &SetFamily,
    y: &SubsetMask,
    p: &Rational,
) -> Result<ExactProbability> {
    coverage_exact_capped(family, y, p, DEFAULT_WORK_CAP)
}

pub fn coverage_exact_capped(
    family: &SetFamily,
    y: &SubsetMask,
    p: &Rational,
    cap: usize,
) -> Result<ExactProbability> {
    CoverageQuery::for_family(family, y, p.clone())?.exact(cap)
}

/// Sampled estimate of the coverage probability with a Wilson half width.
pub fn coverage_mc(
    family: &SetFamily,
    y: &SubsetMask,
    p: f64,
    samples: u64,
    confidence: f64,
    seed: u64,
) -> Result<Estimate> {
    let bias =
        rational::from_f64(p).ok_or_else(|| Error::invalid(format!("bias {p} is not finite")))?;
    CoverageQuery::for_family(family, y, bias)?.monte_carlo(&McConfig {
        samples,
        confidence,
        seed,
    })
}
