//! Clique commands: desk-scale clique checks, clique-sunflower extraction
//! and Janson certificates.

use num_traits::One;
use serde_json::json;
use sunflower_core::clique::{
    clique_parameters, clique_spread_check, clique_sunflower_threshold, find_clique_sunflower,
    janson_certificate, kclique_probability, pq_coverage_query, s_poly, s_poly_bound,
    verify_no_kclique_bound,
};
use sunflower_core::probability::{
    Engine, Estimate, ExactProbability, McConfig, ProbabilityRecord,
};
use sunflower_core::rational::{self, Rational};
use sunflower_core::{Error, SetFamily, SubsetMask};

use crate::config::{ConfigError, EngineChoice, ExperimentConfig};
use crate::report::{CheckRow, Report};
use crate::{details, instance_rng, read_input, RunError};

/// Relative slack allowed when comparing the `s_ℓ` recurrence with its closed bound.
const S_BOUND_TOLERANCE: f64 = 1e-9;

pub(crate) fn clique_verify(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), RunError> {
    let (n, k) = (cfg.usize("n")?, cfg.usize("k")?);
    let p = cfg.probability("p")?;
    let bound = cfg.rational("bound")?;
    let bound_f = rational::to_f64(&bound);

    let record = match cfg.engine {
        EngineChoice::Mc => {
            let est = verify_no_kclique_bound(n, k, rational::to_f64(&p), &cfg.mc_config())?;
            ProbabilityRecord::MonteCarlo(est)
        }
        EngineChoice::Exact => match kclique_probability(n, k, &p, &Engine::exact()) {
            Ok(r) => r,
            Err(
                Error::ExactIntractable { .. }
                | Error::EnumerationTooLarge { .. }
                | Error::TooLarge { .. },
            ) => {
                return Err(ConfigError::BadValue {
                    key: "engine".into(),
                    value: "exact".into(),
                    reason: format!(
                        "exact k-clique probability is intractable at n = {n}; use engine = mc"
                    ),
                }
                .into())
            }
            Err(e) => return Err(e.into()),
        },
    };
    let holds = match record.exact() {
        Some(v) => *v <= bound,
        None => record.value() <= bound_f + 3.0 * record.half_width(),
    };
    report.push(
        CheckRow::asserted("clique.kclique_probability", 0.0, Some(bound_f), holds)
            .with_record(&record),
    );

    let mut spread = Vec::new();
    for l in 0..=k.min(n) {
        let a = SubsetMask::from_elements(1..=l);
        let check = clique_spread_check(n, k, &a)?;
        report.push(CheckRow::from_bound(
            format!("clique.spread_size_{l}"),
            &check,
        ));
        spread.push(details(&check));
    }

    let ts = cfg.f64_list("t")?;
    let max_l = cfg.usize("max_l")?;
    let mut worst: f64 = 0.0;
    for &t in &ts {
        for l in 1..=max_l {
            let ratio = s_poly(l, t)? / s_poly_bound(l, t);
            worst = worst.max(ratio);
        }
    }
    report.push(CheckRow::asserted(
        "clique.s_sequence_bound",
        worst,
        Some(1.0),
        worst <= 1.0 + S_BOUND_TOLERANCE,
    ));

    let asymptotic = clique_parameters(n, cfg.f64("delta")?)?;
    let threshold = clique_sunflower_threshold(k, asymptotic.p, asymptotic.eps);
    report.details = json!({
        "kclique": details(&record),
        "spread": spread,
        "s_bound_ratio": worst,
        "asymptotic_parameters": asymptotic,
        "clique_sunflower_threshold": threshold,
    });
    Ok(())
}

fn load_or_draw(cfg: &ExperimentConfig, index: u64) -> Result<SetFamily, RunError> {
    match cfg.optional("family") {
        Some(path) => Ok(SetFamily::parse(&read_input(path)?)?),
        None => {
            let mut rng = instance_rng(cfg, index);
            Ok(SetFamily::random_uniform(
                cfg.usize("n")?,
                cfg.usize("l")?,
                cfg.usize("members")?,
                &mut rng,
            )?)
        }
    }
}

pub(crate) fn clique_extract(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), RunError> {
    let s = load_or_draw(cfg, 0)?;
    let p = cfg.probability("p")?;
    let q = cfg.rational("q")?;
    let eps = cfg.probability("eps")?;
    let engine = cfg.engine();
    let threshold = rational::to_f64(&(Rational::one() - &eps));

    let outcome = match find_clique_sunflower(&s, &p, &q, &eps, Some(&engine)) {
        Ok(result) => {
            report.push(CheckRow::plumbing(
                "clique_sunflower.subfamily_in_family",
                result.subfamily.iter().all(|a| s.contains(a)),
            ));
            report.push(CheckRow::plumbing(
                "clique_sunflower.core_is_intersection",
                result.subfamily.core()? == result.core_set,
            ));
            match (&result.probability, result.decided) {
                (Some(record), true) => report.push(
                    CheckRow::asserted(
                        "clique_sunflower.coverage",
                        0.0,
                        Some(threshold),
                        result.verified,
                    )
                    .with_record(record),
                ),
                (Some(record), false) => report.push(
                    CheckRow::report("clique_sunflower.coverage", 0.0, Some(threshold))
                        .with_record(record),
                ),
                (None, _) => report.push(CheckRow::report(
                    "clique_sunflower.coverage",
                    0.0,
                    Some(threshold),
                )),
            }
            details(&result)
        }
        Err(
            e @ (Error::BaseCaseFailed { .. }
            | Error::NeitherCaseApplies { .. }
            | Error::ExactIntractable { .. }),
        ) => {
            report.push(CheckRow::report("clique_sunflower.extraction", 0.0, None));
            json!({ "error": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    report.details = json!({ "family": s, "result": outcome });
    Ok(())
}

pub(crate) fn janson(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), RunError> {
    let p = cfg.probability("p")?;
    let q = cfg.rational("q")?;
    if q <= Rational::from_integer(0.into()) || q > Rational::one() {
        return Err(ConfigError::BadValue {
            key: "q".into(),
            value: q.to_string(),
            reason: "must lie in (0, 1]".into(),
        }
        .into());
    }
    let trials = cfg.u64("trials")?;
    let (pf, qf) = (rational::to_f64(&p), rational::to_f64(&q));
    let mut rows = Vec::new();
    for trial in 0..trials {
        let s = load_or_draw(cfg, trial)?;
        let certificate = janson_certificate(&s, pf, qf)?;
        let query = pq_coverage_query(&s, &SubsetMask::empty(), &p, &q)?;
        let engine = match cfg.engine() {
            Engine::MonteCarlo(mc) => Engine::MonteCarlo(McConfig {
                seed: mc.seed.wrapping_add(trial),
                ..mc
            }),
            other => other,
        };
        let miss = match engine.evaluate(&query)? {
            ProbabilityRecord::Exact(e) => {
                ProbabilityRecord::Exact(ExactProbability::new(Rational::one() - e.value))
            }
            ProbabilityRecord::MonteCarlo(e) => ProbabilityRecord::MonteCarlo(Estimate {
                value: 1.0 - e.value,
                ..e
            }),
        };
        // The certificate is computed in floating point; allow rounding slack.
        let slack = 1e-12 * certificate.bound.max(1.0);
        let holds = miss.value() - miss.half_width() <= certificate.bound + slack;
        report.push(
            CheckRow::asserted(
                format!("janson.trial_{trial}.miss"),
                0.0,
                Some(certificate.bound),
                holds,
            )
            .with_record(&miss),
        );
        rows.push(json!({ "trial": trial, "family": s, "certificate": certificate, "miss": details(&miss) }));
    }
    report.details = json!({ "trials": rows });
    Ok(())
}
