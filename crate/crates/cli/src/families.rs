//! Set-family commands: sunflower extraction, coverage, spread experiment.

use num_traits::One;
use rand::seq::index;
use rand::Rng;
use serde_json::json;
use sunflower_core::probability::{
    CoverageQuery, Engine, McConfig, ProbabilityRecord, DEFAULT_WORK_CAP,
};
use sunflower_core::rational::{self, Rational};
use sunflower_core::sunflower::{
    erdos_rado_threshold, extract_robust_sunflower, find_sunflower, ThresholdParams,
};
use sunflower_core::{Error, SetFamily, SubsetMask};

use crate::config::{ConfigError, EngineChoice, ExperimentConfig};
use crate::report::{CheckRow, Report};
use crate::{details, instance_rng, read_input, RunError};

fn load_family(path: &str) -> Result<SetFamily, RunError> {
    Ok(SetFamily::parse(&read_input(path)?)?)
}

/// `members` sets of random size in `1..=max_size`; duplicates collapse.
fn random_family<R: Rng + ?Sized>(
    n: usize,
    members: usize,
    max_size: usize,
    rng: &mut R,
) -> Result<SetFamily, RunError> {
    if max_size == 0 || max_size > n {
        return Err(ConfigError::BadValue {
            key: "max_size".into(),
            value: max_size.to_string(),
            reason: format!("must lie in 1..={n}"),
        }
        .into());
    }
    let sets: Vec<SubsetMask> = (0..members)
        .map(|_| {
            let size = rng.random_range(1..=max_size);
            SubsetMask::from_elements(index::sample(rng, n, size).into_iter().map(|i| i + 1))
        })
        .collect();
    Ok(SetFamily::new(n, sets)?)
}

fn parse_elements(key: &str, text: &str) -> Result<SubsetMask, ConfigError> {
    let mut mask = SubsetMask::empty();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let e: usize =
            tok.parse()
                .ok()
                .filter(|&e| e > 0)
                .ok_or_else(|| ConfigError::BadValue {
                    key: key.into(),
                    value: text.into(),
                    reason: "expected comma-separated elements 1, 2, ...".into(),
                })?;
        mask.insert(e);
    }
    Ok(mask)
}

/// Errors that describe the instance rather than a broken run.
fn instance_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::BaseCaseFailed { .. }
            | Error::ExactIntractable { .. }
            | Error::Indeterminate { .. }
            | Error::NeitherCaseApplies { .. }
            | Error::ThresholdNotMet { .. }
    )
}

pub(crate) fn sunflower_extract(
    cfg: &ExperimentConfig,
    report: &mut Report,
) -> Result<(), RunError> {
    let r = cfg.usize("r")?;
    let (family, l) = match cfg.optional("family") {
        Some(path) => {
            let f = load_family(path)?;
            let l = f.uniformity();
            (f, l)
        }
        None => {
            let (n, l) = (cfg.usize("n")?, cfg.usize("l")?);
            let members = match cfg.usize("members")? {
                0 => erdos_rado_threshold(l, r as u64)? as usize + 1,
                m => m,
            };
            let mut rng = instance_rng(cfg, 0);
            (SetFamily::random_uniform(n, l, members, &mut rng)?, Some(l))
        }
    };
    let p = cfg.probability("p")?;
    let eps = cfg.probability("eps")?;
    let params = ThresholdParams::new(cfg.f64("b")?)?;
    let engine = cfg.engine();

    let threshold = match l {
        Some(l) if l > 0 => Some(erdos_rado_threshold(l, r as u64)?),
        _ => None,
    };
    let found = find_sunflower(&family, r);
    let petals = found.as_ref().map_or(0, |s| s.petals.len());
    let above = threshold.is_some_and(|t| family.len() as u64 > t);
    report.push(if above {
        CheckRow::asserted(
            "sunflower.erdos_rado_petals",
            petals as f64,
            Some(r as f64),
            petals >= r,
        )
    } else {
        CheckRow::report("sunflower.erdos_rado_petals", petals as f64, Some(r as f64))
    });
    if let Ok(s) = &found {
        report.push(CheckRow::plumbing(
            "sunflower.petals_in_family",
            s.petals.iter().all(|m| family.contains(m)),
        ));
    }
    if let Err(e) = &found {
        if !matches!(e, Error::ThresholdNotMet { .. }) {
            return Err(e.clone().into());
        }
    }

    let threshold_value = rational::to_f64(&(Rational::one() - &eps));
    let robust = match extract_robust_sunflower(&family, &p, &eps, &params, &engine) {
        Ok(result) => {
            report.push(
                CheckRow::report("robust.coverage", 0.0, Some(threshold_value))
                    .with_record(&result.probability),
            );
            report.push(CheckRow::plumbing(
                "robust.subfamily_in_family",
                result.subfamily.iter().all(|m| family.contains(m)),
            ));
            if result.verified {
                // Recheck the flagged output with exact enumeration.
                let query =
                    CoverageQuery::for_family(&result.subfamily, &result.kernel, p.clone())?;
                match query.exact(DEFAULT_WORK_CAP) {
                    Ok(exact) => {
                        let record = ProbabilityRecord::Exact(exact);
                        let holds = record.exact().is_some_and(|v| *v > Rational::one() - &eps);
                        report.push(
                            CheckRow::asserted(
                                "robust.verified_is_sound",
                                0.0,
                                Some(threshold_value),
                                holds,
                            )
                            .with_record(&record),
                        );
                    }
                    Err(Error::ExactIntractable { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            details(&result)
        }
        Err(e) if instance_failure(&e) => {
            report.push(CheckRow::report("robust.extraction", 0.0, None));
            json!({ "error": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    report.details = json!({
        "family": family,
        "erdos_rado_threshold": threshold,
        "sunflower": found.ok(),
        "robust": robust,
    });
    Ok(())
}

pub(crate) fn coverage(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), RunError> {
    let family = match cfg.optional("family") {
        Some(path) => load_family(path)?,
        None => {
            let mut rng = instance_rng(cfg, 0);
            random_family(
                cfg.usize("n")?,
                cfg.usize("members")?,
                cfg.usize("max_size")?,
                &mut rng,
            )?
        }
    };
    let core = match cfg.optional("core") {
        Some(text) => parse_elements("core", text)?,
        None => SubsetMask::empty(),
    };
    let p = cfg.rational("p")?;
    let query = CoverageQuery::for_family(&family, &core, p)?;

    let enumerated = match query.exact(DEFAULT_WORK_CAP) {
        Ok(v) => Some(v),
        Err(Error::ExactIntractable { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let expanded = match query.inclusion_exclusion() {
        Ok(v) => Some(v),
        Err(Error::TooLarge { .. }) | Err(Error::ExactIntractable { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(v) = &enumerated {
        report.push(
            CheckRow::report("coverage.enumeration", 0.0, None)
                .with_record(&ProbabilityRecord::Exact(v.clone())),
        );
    }
    if let Some(v) = &expanded {
        report.push(
            CheckRow::report("coverage.inclusion_exclusion", 0.0, None)
                .with_record(&ProbabilityRecord::Exact(v.clone())),
        );
    }
    if let (Some(a), Some(b)) = (&enumerated, &expanded) {
        report.push(CheckRow::asserted(
            "coverage.exact_routes_agree",
            (a.shadow - b.shadow).abs(),
            Some(0.0),
            a.value == b.value,
        ));
    }
    let exact = enumerated.as_ref().or(expanded.as_ref());
    let mut sampled = None;
    if cfg.engine == EngineChoice::Mc {
        let est = query.monte_carlo(&cfg.mc_config())?;
        let record = ProbabilityRecord::MonteCarlo(est.clone());
        let row = match exact {
            Some(x) => {
                let deviation = (est.value - x.shadow).abs();
                CheckRow::asserted(
                    "coverage.monte_carlo_within_3hw",
                    0.0,
                    Some(x.shadow),
                    deviation <= 3.0 * est.half_width,
                )
            }
            None => CheckRow::report("coverage.monte_carlo_within_3hw", 0.0, None),
        };
        report.push(row.with_record(&record));
        sampled = Some(est);
    }
    report.details = json!({
        "family": family,
        "core": core,
        "free_elements": query.free_elements().len(),
        "enumeration": enumerated.map(|v| v.value.to_string()),
        "inclusion_exclusion": expanded.map(|v| v.value.to_string()),
        "monte_carlo": sampled,
    });
    Ok(())
}

pub(crate) fn spread_experiment(
    cfg: &ExperimentConfig,
    report: &mut Report,
) -> Result<(), RunError> {
    let (n, l, members) = (cfg.usize("n")?, cfg.usize("l")?, cfg.usize("members")?);
    let p = cfg.rational("p")?;
    let trials = cfg.u64("trials")?;
    let engine = cfg.engine();
    let mut rows = Vec::new();
    for trial in 0..trials {
        let mut rng = instance_rng(cfg, trial);
        let family = SetFamily::random_uniform(n, l, members, &mut rng)?;
        let spread = family.spread_parameter()?;
        let query = CoverageQuery::for_family(&family, &SubsetMask::empty(), p.clone())?;
        let record = match &engine {
            Engine::MonteCarlo(mc) => {
                ProbabilityRecord::MonteCarlo(query.monte_carlo(&McConfig {
                    seed: mc.seed.wrapping_add(trial),
                    ..*mc
                })?)
            }
            other => other.evaluate(&query)?,
        };
        report.push(
            CheckRow::report(format!("spread.trial_{trial}.coverage"), 0.0, None)
                .with_record(&record),
        );
        rows.push(json!({ "trial": trial, "spread": spread, "coverage": record.value() }));
    }
    // Coverage averaged over the more spread and the less spread half.
    let mut ranked: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            (
                r["spread"].as_f64().unwrap_or(0.0),
                r["coverage"].as_f64().unwrap_or(0.0),
            )
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = ranked.len() / 2;
    let mean = |xs: &[(f64, f64)]| xs.iter().map(|x| x.1).sum::<f64>() / xs.len().max(1) as f64;
    report.push(CheckRow::report(
        "spread.mean_coverage_less_spread",
        mean(&ranked[..half]),
        None,
    ));
    report.push(CheckRow::report(
        "spread.mean_coverage_more_spread",
        mean(&ranked[half..]),
        None,
    ));
    report.details = json!({ "trials": rows });
    Ok(())
}
