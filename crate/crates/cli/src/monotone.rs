//! Monotone-function commands: closure demonstration and Harnik–Raz checks.

use num_traits::One;
use rand::seq::index;
use rand::Rng;
use serde_json::json;
use sunflower_core::harnik_raz::{
    build_hr_family, cwise_probability, verify_lemma_negative, verify_lemma_positive,
    verify_spread, HRParams,
};
use sunflower_core::monotone::{
    approximate_circuit, closed_minterm_bound_check, closure_error_bound_check, closure_with_order,
    is_closed, small_sets, ClosureParams, MonotoneCircuit, MonotoneFunction, ScanOrder,
    TestDistribution,
};
use sunflower_core::probability::{ExactProbability, ProbabilityRecord, DEFAULT_WORK_CAP};
use sunflower_core::rational::{self, Rational};
use sunflower_core::{SetFamily, SubsetMask};

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{CheckRow, Report};
use crate::{details, instance_rng, read_input, RunError};

/// Largest `Σ (#constraint tuples)·(#polynomials)` the independence scan will do.
const CWISE_WORK_CAP: u128 = 1 << 30;

fn random_function<R: Rng + ?Sized>(
    n: usize,
    members: usize,
    max_size: usize,
    rng: &mut R,
) -> Result<MonotoneFunction, RunError> {
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
    Ok(MonotoneFunction::from_sets(n, sets)?)
}

pub(crate) fn closure_demo(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), RunError> {
    let f = match cfg.optional("function") {
        Some(path) => MonotoneFunction::from_family(&SetFamily::parse(&read_input(path)?)?),
        None => {
            let mut rng = instance_rng(cfg, 0);
            random_function(
                cfg.usize("n")?,
                cfg.usize("members")?,
                cfg.usize("max_size")?,
                &mut rng,
            )?
        }
    };
    let params = ClosureParams::new(
        cfg.probability("eps")?,
        cfg.usize("c")?,
        cfg.probability("noise")?,
    )?;
    let engine = cfg.engine();

    let run = closure_with_order(&f, &params, &engine, ScanOrder::Canonical)?;
    let reversed = closure_with_order(&f, &params, &engine, ScanOrder::Reversed)?;
    let closed = &run.function;
    let again = closure_with_order(closed, &params, &engine, ScanOrder::Canonical)?;
    let check = is_closed(closed, &params, &engine)?;

    report.push(CheckRow::asserted(
        "closure.contains_input",
        1.0,
        Some(1.0),
        f.le(closed),
    ));
    report.push(CheckRow::asserted(
        "closure.is_closed",
        1.0,
        Some(1.0),
        check.closed,
    ));
    report.push(CheckRow::asserted(
        "closure.idempotent",
        again.added.len() as f64,
        Some(0.0),
        again.function == *closed,
    ));
    report.push(CheckRow::asserted(
        "closure.order_invariant",
        1.0,
        Some(1.0),
        reversed.function == *closed,
    ));
    let bound = closure_error_bound_check(&f, &params, DEFAULT_WORK_CAP)?;
    report.push(
        CheckRow::asserted(
            "closure.false_positive_bound",
            0.0,
            Some(rational::to_f64(&bound.rhs)),
            bound.holds,
        )
        .with_record(&ProbabilityRecord::Exact(ExactProbability::new(
            bound.lhs.clone(),
        ))),
    );
    let b = cfg.f64("b")?;
    let counts = closed_minterm_bound_check(closed, params.c, b);
    for c in &counts {
        report.push(CheckRow::report(
            format!("closure.minterms_size_{}", c.l),
            c.count as f64,
            Some(c.bound),
        ));
    }

    let mut ledger = None;
    if let Some(path) = cfg.optional("circuit") {
        let circuit = MonotoneCircuit::parse(&read_input(path)?)?;
        if circuit.n() != f.n() {
            return Err(ConfigError::BadValue {
                key: "circuit".into(),
                value: path.into(),
                reason: format!("circuit has {} inputs but n = {}", circuit.n(), f.n()),
            }
            .into());
        }
        let dist = TestDistribution::PBiased(params.noise_p.clone());
        let (approx, errors) = approximate_circuit(&circuit, &params, &engine, &dist, &dist)?;
        report.push(CheckRow::asserted(
            "circuit.output_error_within_union_bound",
            errors.output_positive_error.value() + errors.output_negative_error.value(),
            Some(errors.positive_total + errors.negative_total),
            errors.within_union_bound,
        ));
        ledger = Some(json!({ "approximator": approx.minterms(), "errors": errors }));
    }

    report.details = json!({
        "function": f.minterms(),
        "closure": closed.minterms(),
        "added": run.added,
        "false_positive": details(&bound),
        "minterm_counts": counts,
        "circuit": ledger,
    });
    Ok(())
}

/// Every way to pin `ℓ ≤ c` distinct evaluation points to field values.
fn constraint_tuples(params: &HRParams) -> Vec<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    let c = params.c as usize;
    for size in 1..=c.min(params.k as usize) {
        for points in index_subsets(params.k, size) {
            let mut values = vec![0u64; size];
            loop {
                out.push(points.iter().copied().zip(values.iter().copied()).collect());
                // Odometer over F_n^size.
                let mut i = 0;
                while i < size {
                    values[i] += 1;
                    if values[i] < params.n {
                        break;
                    }
                    values[i] = 0;
                    i += 1;
                }
                if i == size {
                    break;
                }
            }
        }
    }
    out
}

/// All `size`-subsets of `1..=k` in lexicographic order.
fn index_subsets(k: u64, size: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current: Vec<u64> = (1..=size as u64).collect();
    if size as u64 > k {
        return out;
    }
    loop {
        out.push(current.clone());
        let mut i = size;
        while i > 0 && current[i - 1] == k - (size - i) as u64 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        current[i - 1] += 1;
        for j in i..size {
            current[j] = current[j - 1] + 1;
        }
    }
}

pub(crate) fn hr_verify(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), RunError> {
    let n = cfg.u64("n")?;
    let c = cfg.u64("c")?;
    let c = u32::try_from(c).map_err(|_| ConfigError::BadValue {
        key: "c".into(),
        value: c.to_string(),
        reason: "too large".into(),
    })?;
    let params = HRParams::new(n, c, cfg.u64("k")?)?;
    let hr = build_hr_family(&params)?;
    let engine = cfg.engine();

    let positive = verify_lemma_positive(&hr, &engine)?;
    report.push(CheckRow::from_bound("hr.positive_acceptance", &positive));
    let negative = verify_lemma_negative(&hr, &engine)?;
    report.push(CheckRow::from_bound("hr.negative_rejection", &negative));

    let tuples = constraint_tuples(&params);
    let work = tuples.len() as u128 * params.polynomial_count().unwrap_or(u64::MAX) as u128;
    if work > CWISE_WORK_CAP {
        return Err(ConfigError::BadValue {
            key: "n".into(),
            value: n.to_string(),
            reason: format!(
                "the independence scan needs {work} polynomial evaluations; lower n, c or k"
            ),
        }
        .into());
    }
    let mut matching = 0usize;
    let mut first_mismatch = None;
    for t in &tuples {
        let value = cwise_probability(&params, t)?;
        let expected = rational::pow(&Rational::new(1.into(), params.n.into()), t.len());
        if value == expected {
            matching += 1;
        } else if first_mismatch.is_none() {
            first_mismatch = Some(json!({ "constraints": t, "value": value.to_string() }));
        }
    }
    report.push(CheckRow::asserted(
        "hr.cwise_independence",
        matching as f64,
        Some(tuples.len() as f64),
        matching == tuples.len(),
    ));

    let mut spread = Vec::new();
    for size in 1..=params.c as usize {
        let mut worst: Option<sunflower_core::check::BoundCheck> = None;
        let mut all_hold = true;
        for a in small_sets(params.n as usize, size)?
            .into_iter()
            .filter(|a| a.len() == size)
        {
            let check = verify_spread(&hr, &a, &engine)?;
            all_hold &= check.holds;
            if worst
                .as_ref()
                .is_none_or(|w| check.value.value() > w.value.value())
            {
                worst = Some(check);
            }
        }
        if let Some(w) = worst {
            let row = CheckRow::from_bound(format!("hr.spread_size_{size}"), &w);
            let row = if all_hold {
                row
            } else {
                CheckRow {
                    status: crate::Status::Fail,
                    ..row
                }
            };
            spread.push(
                json!({ "size": size, "max_probability": w.value.value(), "bound": w.bound }),
            );
            report.push(row);
        }
    }

    let minimized = hr.family.len();
    report.push(CheckRow::report(
        "hr.qualifying_polynomials",
        hr.qualifying_polynomials as f64,
        None,
    ));
    report.push(CheckRow::report(
        "hr.distinct_sets",
        hr.distinct_sets as f64,
        None,
    ));
    report.details = json!({
        "params": params,
        "polynomials": params.polynomial_count(),
        "qualifying_polynomials": hr.qualifying_polynomials,
        "distinct_sets": hr.distinct_sets,
        "minimized_sets": minimized,
        "positive": details(&positive),
        "negative": details(&negative),
        "cwise_tuples": tuples.len(),
        "cwise_first_mismatch": first_mismatch,
        "spread": spread,
        "positive_bound_exact": (Rational::one() - Rational::new((params.k - 1).into(), params.n.into())).to_string(),
    });
    Ok(())
}
