use num_traits::One;
use serde::Serialize;

use super::{CoverageQuery, McConfig, ProbabilityRecord, DEFAULT_WORK_CAP};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::mask::SubsetMask;
use crate::rational::{self, Rational};

/// How coverage probabilities are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Engine {
    Exact {
        cap: usize,
    },
    MonteCarlo(McConfig),
    /// Exact when the free part fits under `cap`, sampling otherwise.
    Auto {
        cap: usize,
        fallback: McConfig,
    },
}

impl Engine {
    pub fn exact() -> Self {
        Engine::Exact {
            cap: DEFAULT_WORK_CAP,
        }
    }

    pub fn auto(fallback: McConfig) -> Self {
        Engine::Auto {
            cap: DEFAULT_WORK_CAP,
            fallback,
        }
    }

    /// Evaluates a coverage query with this engine.
    pub fn evaluate(&self, query: &CoverageQuery) -> Result<ProbabilityRecord> {
        match self {
            Engine::Exact { cap } => Ok(ProbabilityRecord::Exact(query.exact(*cap)?)),
            Engine::MonteCarlo(config) => {
                Ok(ProbabilityRecord::MonteCarlo(query.monte_carlo(config)?))
            }
            Engine::Auto { cap, fallback } => match query.exact(*cap) {
                Ok(p) => Ok(ProbabilityRecord::Exact(p)),
                Err(Error::ExactIntractable { .. }) => {
                    Ok(ProbabilityRecord::MonteCarlo(query.monte_carlo(fallback)?))
                }
                Err(e) => Err(e),
            },
        }
    }
}

/// Decides `record > 1 - eps`. Exact values compare as rationals; sampled
/// values within one half width of the threshold give `None`.
pub fn exceeds(record: &ProbabilityRecord, eps: &Rational) -> Option<bool> {
    let threshold = Rational::one() - eps;
    match record {
        ProbabilityRecord::Exact(p) => Some(p.value > threshold),
        ProbabilityRecord::MonteCarlo(est) => {
            let t = rational::to_f64(&threshold);
            ((est.value - t).abs() > est.half_width).then_some(est.value > t)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessCertificate {
    pub robust: bool,
    pub kernel: SubsetMask,
    pub probability: ProbabilityRecord,
    /// `1 - eps` as a float.
    pub threshold: f64,
    /// Signed distance of the probability above the threshold.
    pub margin: f64,
}

/// Whether `family` is a `(p, eps)`-robust sunflower: the coverage probability
/// with `Y = core(family)` strictly exceeds `1 - eps`.
pub fn is_robust_sunflower(
    family: &SetFamily,
    p: &Rational,
    eps: &Rational,
    engine: &Engine,
) -> Result<RobustnessCertificate> {
    let kernel = family.core()?;
    let query = CoverageQuery::for_family(family, &kernel, p.clone())?;
    let probability = engine.evaluate(&query)?;
    let threshold = rational::to_f64(&(Rational::one() - eps));
    let robust = exceeds(&probability, eps).ok_or(Error::Indeterminate {
        value: probability.value(),
        half_width: probability.half_width(),
        threshold,
    })?;
    let margin = probability.value() - threshold;
    Ok(RobustnessCertificate {
        robust,
        kernel,
        probability,
        threshold,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_sets(n, sets).unwrap()
    }

    #[test]
    fn singletons_are_robust() {
        let f = fam(5, &[&[1], &[2], &[3], &[4], &[5]]);
        let cert = is_robust_sunflower(&f, &ratio(1, 2), &ratio(1, 10), &Engine::exact()).unwrap();
        assert!(cert.robust);
        assert_eq!(cert.probability.exact(), Some(&ratio(31, 32)));
        assert!(cert.kernel.is_empty());
    }

    #[test]
    fn single_set_is_robust() {
        let f = fam(2, &[&[1, 2]]);
        let cert = is_robust_sunflower(&f, &ratio(1, 2), &ratio(1, 10), &Engine::exact()).unwrap();
        assert!(cert.robust);
        assert_eq!(cert.probability.exact(), Some(&ratio(1, 1)));
    }

    #[test]
    fn sparse_pairs_are_not_robust() {
        let f = fam(4, &[&[1, 2], &[3, 4]]);
        let cert = is_robust_sunflower(&f, &ratio(1, 10), &ratio(1, 2), &Engine::exact()).unwrap();
        assert!(!cert.robust);
        assert_eq!(cert.probability.exact(), Some(&ratio(199, 10_000)));
    }

    #[test]
    fn threshold_is_strict() {
        // Coverage is exactly 3/4 = 1 - eps.
        let f = fam(2, &[&[1], &[2]]);
        let at = is_robust_sunflower(&f, &ratio(1, 2), &ratio(1, 4), &Engine::exact()).unwrap();
        assert!(!at.robust);
        assert_eq!(at.margin, 0.0);
    }

    #[test]
    fn empty_family_is_rejected() {
        let f = SetFamily::empty(3).unwrap();
        assert_eq!(
            is_robust_sunflower(&f, &ratio(1, 2), &ratio(1, 2), &Engine::exact()),
            Err(Error::EmptyFamily)
        );
    }

    #[test]
    fn sampling_reports_indeterminate_near_threshold() {
        let f = fam(2, &[&[1], &[2]]);
        let engine = Engine::MonteCarlo(McConfig::new(10_000, 0.99, 5));
        match is_robust_sunflower(&f, &ratio(1, 2), &ratio(1, 4), &engine) {
            Err(Error::Indeterminate { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let clear = is_robust_sunflower(&f, &ratio(1, 2), &ratio(1, 2), &engine).unwrap();
        assert!(clear.robust);
    }

    #[test]
    fn auto_falls_back_to_sampling() {
        let f = SetFamily::new(40, (1..=40).map(SubsetMask::singleton)).unwrap();
        let engine = Engine::Auto {
            cap: 10,
            fallback: McConfig::new(2000, 0.99, 1),
        };
        let cert = is_robust_sunflower(&f, &ratio(1, 2), &ratio(1, 10), &engine).unwrap();
        assert!(matches!(cert.probability, ProbabilityRecord::MonteCarlo(_)));
        assert!(cert.robust);
    }
}
