//! Monotone Boolean functions as minterm antichains, the closure operator,
//! trimming, and gate-by-gate circuit approximation.

mod circuit;
mod closure;
mod function;

pub use circuit::{
    approximate_circuit, ErrorLedger, Gate, GateError, GateKind, MonotoneCircuit, TestDistribution,
};
pub use closure::{
    acceptance_under_noise, approx_and, approx_or, closed_minterm_bound_check, closure,
    closure_error_bound_check, closure_with_order, is_closed, small_sets, ClosureBound,
    ClosureCheck, ClosureParams, ClosureRun, MintermCount, ScanOrder, SCAN_CAP,
};
pub use function::{enumerate_monotone, MonotoneFunction, MINTERM_CAP};
