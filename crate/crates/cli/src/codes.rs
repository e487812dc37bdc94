//! The code-polynomial command: build `P_C`, decompose it, audit candidates.

use serde_json::json;
use sunflower_core::codes::{
    build_polynomial, canonical_decomposition, max_pairwise_agreement, reed_solomon_code,
    single_monomial_audit, size_lower_bound_report, verify_decomposition, Code,
};

use crate::config::ExperimentConfig;
use crate::report::{CheckRow, Report};
use crate::{read_input, RunError};

pub(crate) fn code_poly(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), RunError> {
    let q = cfg.usize("q")?;
    let (code, dim) = match cfg.optional("code") {
        Some(path) => (Code::from_csv(q, &read_input(path)?)?, None),
        None => {
            let dim = cfg.usize("dim")?;
            (reed_solomon_code(q, cfg.usize("n")?, dim)?, Some(dim))
        }
    };
    let n = code.n();
    let p = build_polynomial(&code);
    report.push(CheckRow::asserted(
        "code.monomial_count",
        p.len() as f64,
        Some(code.len() as f64),
        p.len() == code.len(),
    ));

    let agreement = if code.len() >= 2 {
        Some(max_pairwise_agreement(&code)?)
    } else {
        None
    };
    if let Some(a) = agreement {
        // Two monomials share exactly the variables where their codewords agree.
        match dim {
            Some(dim) => report.push(CheckRow::asserted(
                "code.support_overlap",
                a as f64,
                Some(dim.saturating_sub(1) as f64),
                a < dim,
            )),
            None => report.push(CheckRow::report(
                "code.support_overlap",
                a as f64,
                Some((n / 3) as f64 - 1.0),
            )),
        }
    }

    let decomposition = canonical_decomposition(&p)?;
    let check = verify_decomposition(&decomposition, &p, n)?;
    report.push(CheckRow::asserted(
        "code.canonical_decomposition_valid",
        decomposition.len() as f64,
        Some(code.len() as f64),
        check.valid,
    ));
    let size = size_lower_bound_report(&code, &decomposition)?;
    report.push(CheckRow::asserted(
        "code.summands_at_least_code_size",
        size.summands as f64,
        Some(size.code_size as f64),
        size.pass,
    ));
    let bound = agreement.unwrap_or(0);
    let canonical_audit = single_monomial_audit(&decomposition, bound);
    report.push(CheckRow::plumbing(
        "code.canonical_single_monomial",
        canonical_audit.single_monomial,
    ));

    // Candidates with one fewer summand, built by merging two g factors.
    let merges = cfg.usize("merges")?.min(decomposition.len() / 2);
    let mut candidates = Vec::new();
    let mut min_overlap = usize::MAX;
    let mut all_fail = true;
    for i in 0..merges {
        let candidate = decomposition.merge_g(2 * i, 2 * i + 1)?;
        let audit = single_monomial_audit(&candidate, bound);
        match &audit.counterexample {
            Some(cx) if !audit.single_monomial && cx.exceeds_bound => {
                min_overlap = min_overlap.min(cx.overlap);
            }
            _ => all_fail = false,
        }
        candidates.push(json!({
            "merged": [2 * i, 2 * i + 1],
            "summands": candidate.len(),
            "audit": audit,
        }));
    }
    if merges > 0 {
        report.push(CheckRow::asserted(
            "code.merged_candidates_fail_audit",
            if min_overlap == usize::MAX {
                0.0
            } else {
                min_overlap as f64
            },
            Some((bound + 1) as f64),
            all_fail,
        ));
    }

    report.details = json!({
        "q": q,
        "n": n,
        "dim": dim,
        "code_size": code.len(),
        "monomials": p.len(),
        "max_agreement": agreement,
        "decomposition_summands": decomposition.len(),
        "check": {
            "valid": check.valid,
            "violation": check.violation,
        },
        "size": size,
        "candidates": candidates,
    });
    Ok(())
}
