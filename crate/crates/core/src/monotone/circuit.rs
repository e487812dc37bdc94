use std::fmt::Write as _;

use num_traits::Zero;
use serde::Serialize;

use super::{approx_and, approx_or, ClosureParams, MonotoneFunction};
use crate::error::{Error, Result};
use crate::family::{content_lines, parse_header, MAX_UNIVERSE};
use crate::mask::SubsetMask;
use crate::probability::{
    estimate_event, CoverageQuery, Engine, ExactProbability, McConfig, ProbabilityRecord,
};
use crate::rational::{self, Rational};

/// Largest circuit accepted by the parser.
pub const MAX_GATES: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    Input(usize),
    Or(usize, usize),
    And(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Or,
    And,
}

/// A monotone `{∨, ∧}` circuit; gates only reference earlier gates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonotoneCircuit {
    n: usize,
    gates: Vec<Gate>,
    output: usize,
}

impl MonotoneCircuit {
    pub fn new(n: usize, gates: Vec<Gate>, output: usize) -> Result<Self> {
        if n == 0 || n > MAX_UNIVERSE {
            return Err(Error::invalid(format!(
                "circuit universe {n} outside 1..={MAX_UNIVERSE}"
            )));
        }
        if gates.len() > MAX_GATES {
            return Err(Error::TooLarge {
                what: "circuit".into(),
                size: gates.len(),
                cap: MAX_GATES,
            });
        }
        for (id, gate) in gates.iter().enumerate() {
            match *gate {
                Gate::Input(i) if i == 0 || i > n => {
                    return Err(Error::invalid(format!(
                        "gate {id}: input {i} outside [1, {n}]"
                    )))
                }
                Gate::Or(a, b) | Gate::And(a, b) if a >= id || b >= id => {
                    return Err(Error::invalid(format!("gate {id} references a later gate")))
                }
                _ => {}
            }
        }
        if output >= gates.len() {
            return Err(Error::invalid(format!(
                "output gate {output} does not exist"
            )));
        }
        Ok(Self { n, gates, output })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> usize {
        self.output
    }

    /// Number of `∨`/`∧` gates.
    pub fn size(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| !matches!(g, Gate::Input(_)))
            .count()
    }

    /// Value of every gate on `x`.
    pub fn eval_all(&self, x: &SubsetMask) -> Vec<bool> {
        let mut values: Vec<bool> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let v = match *gate {
                Gate::Input(i) => x.contains(i),
                Gate::Or(a, b) => values[a] || values[b],
                Gate::And(a, b) => values[a] && values[b],
            };
            values.push(v);
        }
        values
    }

    pub fn eval(&self, x: &SubsetMask) -> bool {
        self.eval_all(x)[self.output]
    }

    /// The exact function computed at every gate.
    pub fn gate_functions(&self) -> Result<Vec<MonotoneFunction>> {
        let mut out: Vec<MonotoneFunction> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let f = match *gate {
                Gate::Input(i) => MonotoneFunction::indicator(self.n, SubsetMask::singleton(i))?,
                Gate::Or(a, b) => out[a].or(&out[b])?,
                Gate::And(a, b) => out[a].and(&out[b])?,
            };
            out.push(f);
        }
        Ok(out)
    }

    pub fn function(&self) -> Result<MonotoneFunction> {
        Ok(self.gate_functions()?.swap_remove(self.output))
    }

    /// Line format: optional `n=<int>`, then `INPUT i`, `OR a b`, `AND a b`
    /// (gate ids count gate lines from 0) and one `OUTPUT g`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared_n = None;
        let mut gates = Vec::new();
        let mut output = None;
        for (line_no, line) in content_lines(text) {
            if line.starts_with("n=") {
                if declared_n.is_some() || !gates.is_empty() {
                    return Err(Error::parse(line_no, "header must come first"));
                }
                declared_n = Some(parse_header(line_no, line)?);
                continue;
            }
            let mut tokens = line.split_whitespace();
            let op = tokens.next().unwrap_or_default();
            let args: Vec<usize> = tokens
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::parse(line_no, format!("bad integer `{t}`")))
                })
                .collect::<Result<_>>()?;
            let id = gates.len();
            let gate = match (op.to_ascii_uppercase().as_str(), args.as_slice()) {
                ("INPUT", &[i]) => {
                    if i == 0 || i > MAX_UNIVERSE {
                        return Err(Error::parse(
                            line_no,
                            format!("input {i} outside [1, {MAX_UNIVERSE}]"),
                        ));
                    }
                    Gate::Input(i)
                }
                ("OR", &[a, b]) | ("AND", &[a, b]) => {
                    if a >= id || b >= id {
                        return Err(Error::parse(
                            line_no,
                            format!("gate {id} references a gate not yet defined"),
                        ));
                    }
                    if op.eq_ignore_ascii_case("OR") {
                        Gate::Or(a, b)
                    } else {
                        Gate::And(a, b)
                    }
                }
                ("OUTPUT", &[g]) => {
                    if output.replace(g).is_some() {
                        return Err(Error::parse(line_no, "more than one OUTPUT"));
                    }
                    continue;
                }
                _ => return Err(Error::parse(line_no, format!("cannot read `{line}`"))),
            };
            if gates.len() == MAX_GATES {
                return Err(Error::parse(line_no, "too many gates"));
            }
            gates.push(gate);
        }
        let output = output.ok_or_else(|| Error::parse(0, "missing OUTPUT"))?;
        let max_input = gates
            .iter()
            .filter_map(|g| {
                if let Gate::Input(i) = g {
                    Some(*i)
                } else {
                    None
                }
            })
            .max();
        let n = declared_n
            .or(max_input)
            .ok_or_else(|| Error::parse(0, "circuit has no inputs"))?;
        Self::new(n, gates, output).map_err(|e| Error::parse(0, e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for gate in &self.gates {
            match gate {
                Gate::Input(i) => writeln!(out, "INPUT {i}"),
                Gate::Or(a, b) => writeln!(out, "OR {a} {b}"),
                Gate::And(a, b) => writeln!(out, "AND {a} {b}"),
            }
            .unwrap();
        }
        writeln!(out, "OUTPUT {}", self.output).unwrap();
        out
    }
}

/// A distribution on `{0,1}^n` against which approximation errors are measured.
#[derive(Clone, Debug, PartialEq)]
pub enum TestDistribution {
    /// Every coordinate independently 1 with probability `p`.
    PBiased(Rational),
    /// Finitely many points with exact weights summing to 1.
    Weighted(Vec<(SubsetMask, Rational)>),
}

impl TestDistribution {
    /// `Pr[g(D) = 1 ∧ h(D) = 0]`.
    pub fn disagreement(
        &self,
        g: &MonotoneFunction,
        h: &MonotoneFunction,
        engine: &Engine,
        stream: u64,
    ) -> Result<ProbabilityRecord> {
        match self {
            TestDistribution::Weighted(points) => {
                let value = points
                    .iter()
                    .filter(|(x, _)| g.eval(x) && !h.eval(x))
                    .fold(Rational::zero(), |acc, (_, w)| acc + w);
                Ok(ProbabilityRecord::Exact(ExactProbability::new(value)))
            }
            TestDistribution::PBiased(p) => {
                let exact = |cap: usize| -> Result<ProbabilityRecord> {
                    let accept = |f: &MonotoneFunction| -> Result<Rational> {
                        Ok(CoverageQuery::for_family(
                            f.minterms(),
                            &SubsetMask::empty(),
                            p.clone(),
                        )?
                        .exact(cap)?
                        .value)
                    };
                    let value = accept(&g.or(h)?)? - accept(h)?;
                    Ok(ProbabilityRecord::Exact(ExactProbability::new(value)))
                };
                let sampled = |config: &McConfig| -> Result<ProbabilityRecord> {
                    // Each ledger entry gets its own seed so entries are not correlated.
                    let config = McConfig {
                        seed: config.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15),
                        ..*config
                    };
                    let est = estimate_event(g.n(), rational::to_f64(p), &config, |x| {
                        g.eval(x) && !h.eval(x)
                    })?;
                    Ok(ProbabilityRecord::MonteCarlo(est))
                };
                match engine {
                    Engine::Exact { cap } => exact(*cap),
                    Engine::MonteCarlo(config) => sampled(config),
                    Engine::Auto { cap, fallback } => match exact(*cap) {
                        Err(Error::ExactIntractable { .. }) => sampled(fallback),
                        other => other,
                    },
                }
            }
        }
    }
}

/// Errors introduced at one `∨`/`∧` gate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateError {
    pub gate: usize,
    pub kind: GateKind,
    /// `Pr[(f∘g)(Y) = 1 ∧ (f ⊔/⊓ g)(Y) = 0]` for the child approximators `f, g`.
    pub positive_error: ProbabilityRecord,
    /// `Pr[(f∘g)(N) = 0 ∧ (f ⊔/⊓ g)(N) = 1]`.
    pub negative_error: ProbabilityRecord,
    /// The same events measured against the exact gate function.
    pub positive_drift: ProbabilityRecord,
    pub negative_drift: ProbabilityRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorLedger {
    pub gates: Vec<GateError>,
    /// Sums of the per-gate errors: the union bounds.
    pub positive_total: f64,
    pub negative_total: f64,
    /// `Pr[C(Y) = 1 ∧ C^A(Y) = 0]` and `Pr[C(N) = 0 ∧ C^A(N) = 1]`.
    pub output_positive_error: ProbabilityRecord,
    pub output_negative_error: ProbabilityRecord,
    /// Whether each output error is at most its union bound (exactly, when
    /// every term is exact; otherwise within the summed half widths).
    pub within_union_bound: bool,
}

fn sum(records: impl Iterator<Item = ProbabilityRecord>) -> (f64, f64, Option<Rational>) {
    let mut value = 0.0;
    let mut slack = 0.0;
    let mut exact = Some(Rational::zero());
    for r in records {
        value += r.value();
        slack += r.half_width();
        exact = match (exact, r.exact()) {
            (Some(acc), Some(x)) => Some(acc + x),
            _ => None,
        };
    }
    (value, slack, exact)
}

fn at_most(record: &ProbabilityRecord, total: &(f64, f64, Option<Rational>)) -> bool {
    match (record.exact(), &total.2) {
        (Some(x), Some(t)) => x <= t,
        _ => record.value() - record.half_width() <= total.0 + total.1 + 1e-12,
    }
}

/// Replaces every gate by its approximating operation, starting from `⌈{i}⌉`
/// at the inputs, and records the error each replacement introduces under the
/// positive and negative test distributions.
pub fn approximate_circuit(
    circuit: &MonotoneCircuit,
    params: &ClosureParams,
    engine: &Engine,
    positive: &TestDistribution,
    negative: &TestDistribution,
) -> Result<(MonotoneFunction, ErrorLedger)> {
    let exact = circuit.gate_functions()?;
    let mut approx: Vec<MonotoneFunction> = Vec::with_capacity(circuit.gates.len());
    let mut entries = Vec::new();
    for (id, gate) in circuit.gates.iter().enumerate() {
        let (kind, plain, replaced) = match *gate {
            Gate::Input(_) => {
                approx.push(exact[id].clone());
                continue;
            }
            Gate::Or(a, b) => (
                GateKind::Or,
                approx[a].or(&approx[b])?,
                approx_or(&approx[a], &approx[b], params, engine)?,
            ),
            Gate::And(a, b) => (
                GateKind::And,
                approx[a].and(&approx[b])?,
                approx_and(&approx[a], &approx[b], params, engine)?,
            ),
        };
        let stream = 4 * id as u64;
        entries.push(GateError {
            gate: id,
            kind,
            positive_error: positive.disagreement(&plain, &replaced, engine, stream)?,
            negative_error: negative.disagreement(&replaced, &plain, engine, stream + 1)?,
            positive_drift: positive.disagreement(&exact[id], &replaced, engine, stream + 2)?,
            negative_drift: negative.disagreement(&replaced, &exact[id], engine, stream + 3)?,
        });
        approx.push(replaced);
    }
    let out = circuit.output;
    let final_stream = 4 * circuit.gates.len() as u64;
    let output_positive_error =
        positive.disagreement(&exact[out], &approx[out], engine, final_stream)?;
    let output_negative_error =
        negative.disagreement(&approx[out], &exact[out], engine, final_stream + 1)?;
    let pos = sum(entries.iter().map(|e| e.positive_error.clone()));
    let neg = sum(entries.iter().map(|e| e.negative_error.clone()));
    let within_union_bound =
        at_most(&output_positive_error, &pos) && at_most(&output_negative_error, &neg);
    let ledger = ErrorLedger {
        gates: entries,
        positive_total: pos.0,
        negative_total: neg.0,
        output_positive_error,
        output_negative_error,
        within_union_bound,
    };
    Ok((approx.swap_remove(out), ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn set(e: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(e.iter().copied())
    }

    fn uniform() -> TestDistribution {
        TestDistribution::PBiased(ratio(1, 2))
    }

    #[test]
    fn evaluation_examples() {
        let single = MonotoneCircuit::new(3, vec![Gate::Input(2)], 0).unwrap();
        assert!(single.eval(&set(&[2])));
        assert!(!single.eval(&set(&[1, 3])));

        let or = MonotoneCircuit::parse("INPUT 1\nINPUT 2\nOR 0 1\nOUTPUT 2\n").unwrap();
        assert!(or.eval(&set(&[2])));
        assert!(!or.eval(&set(&[])));
        assert_eq!(or.size(), 1);

        let text = "n=3\nINPUT 1\nINPUT 2\nINPUT 3\nOR 0 1\nAND 3 2\nOUTPUT 4\n";
        let c = MonotoneCircuit::parse(text).unwrap();
        assert!(c.eval(&set(&[1, 3])));
        assert!(!c.eval(&set(&[1, 2])));
        assert_eq!(c.to_text(), text);
        assert_eq!(
            c.function().unwrap(),
            MonotoneFunction::from_sets(3, [set(&[1, 3]), set(&[2, 3])]).unwrap()
        );
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "INPUT 1\n",
            "INPUT 0\nOUTPUT 0\n",
            "INPUT 1\nOR 0 1\nOUTPUT 1\n",
            "INPUT 1\nOUTPUT 0\nOUTPUT 0\n",
            "INPUT 1\nXOR 0 0\nOUTPUT 0\n",
            "INPUT 1\nOUTPUT 3\n",
            "n=2\nINPUT 3\nOUTPUT 0\n",
            "INPUT 1\nn=3\nOUTPUT 0\n",
            "INPUT x\nOUTPUT 0\n",
        ] {
            assert!(MonotoneCircuit::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn single_input_has_no_error() {
        let c = MonotoneCircuit::new(4, vec![Gate::Input(3)], 0).unwrap();
        let params = ClosureParams::harnik_raz(4, 2).unwrap();
        let (f, ledger) =
            approximate_circuit(&c, &params, &Engine::exact(), &uniform(), &uniform()).unwrap();
        assert_eq!(f, MonotoneFunction::indicator(4, set(&[3])).unwrap());
        assert!(ledger.gates.is_empty());
        assert_eq!(ledger.output_positive_error.value(), 0.0);
        assert!(ledger.within_union_bound);
    }

    #[test]
    fn or_of_inputs_is_exact() {
        let c = MonotoneCircuit::parse("n=6\nINPUT 1\nINPUT 2\nOR 0 1\nOUTPUT 2\n").unwrap();
        let params = ClosureParams::harnik_raz(6, 4).unwrap();
        let (f, ledger) =
            approximate_circuit(&c, &params, &Engine::exact(), &uniform(), &uniform()).unwrap();
        assert_eq!(f, c.function().unwrap());
        assert_eq!(ledger.positive_total, 0.0);
        assert_eq!(ledger.negative_total, 0.0);
    }

    #[test]
    fn trimming_error_is_the_lost_minterm() {
        // (x1 ∧ x2) ∧ x3 with c = 2: the 3-set minterm is trimmed away (width 1).
        let c =
            MonotoneCircuit::parse("n=8\nINPUT 1\nINPUT 2\nINPUT 3\nAND 0 1\nAND 3 2\nOUTPUT 4\n")
                .unwrap();
        let params = ClosureParams::harnik_raz(8, 2).unwrap();
        let (f, ledger) =
            approximate_circuit(&c, &params, &Engine::exact(), &uniform(), &uniform()).unwrap();
        assert!(f.is_zero());
        // The first AND already loses {1,2}; the second sees zero inputs.
        assert_eq!(ledger.gates[0].positive_error.exact(), Some(&ratio(1, 4)));
        assert_eq!(ledger.gates[1].positive_error.exact(), Some(&ratio(0, 1)));
        assert_eq!(ledger.output_positive_error.exact(), Some(&ratio(1, 8)));
        assert!(ledger.within_union_bound);
    }

    #[test]
    fn weighted_distribution_is_exact() {
        let d =
            TestDistribution::Weighted(vec![(set(&[1]), ratio(1, 3)), (set(&[1, 2]), ratio(2, 3))]);
        let g = MonotoneFunction::indicator(2, set(&[1])).unwrap();
        let h = MonotoneFunction::indicator(2, set(&[2])).unwrap();
        assert_eq!(
            d.disagreement(&g, &h, &Engine::exact(), 0).unwrap().exact(),
            Some(&ratio(1, 3))
        );
    }

    #[test]
    fn sampled_disagreement_tracks_exact() {
        let g = MonotoneFunction::from_sets(6, [set(&[1, 2]), set(&[3])]).unwrap();
        let h = MonotoneFunction::indicator(6, set(&[3])).unwrap();
        let d = TestDistribution::PBiased(ratio(1, 2));
        let exact = d.disagreement(&g, &h, &Engine::exact(), 0).unwrap();
        assert_eq!(exact.exact(), Some(&ratio(1, 8)));
        let mc = d
            .disagreement(
                &g,
                &h,
                &Engine::MonteCarlo(McConfig::new(50_000, 0.99, 3)),
                0,
            )
            .unwrap();
        assert!((mc.value() - 0.125).abs() <= 3.0 * mc.half_width());
    }

    fn arb_circuit() -> impl Strategy<Value = MonotoneCircuit> {
        let n = 6;
        prop::collection::vec(
            (
                0u8..3,
                any::<prop::sample::Index>(),
                any::<prop::sample::Index>(),
            ),
            1..8,
        )
        .prop_map(move |ops| {
            let mut gates: Vec<Gate> = (1..=3).map(Gate::Input).collect();
            for (op, a, b) in ops {
                let len = gates.len();
                gates.push(match op {
                    0 => Gate::Input(a.index(n) + 1),
                    1 => Gate::Or(a.index(len), b.index(len)),
                    _ => Gate::And(a.index(len), b.index(len)),
                });
            }
            let out = gates.len() - 1;
            MonotoneCircuit::new(n, gates, out).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eval_matches_gate_functions(c in arb_circuit(), x in 0u64..64) {
            let x = SubsetMask::from_bits(x);
            let fs = c.gate_functions().unwrap();
            let vals = c.eval_all(&x);
            for (f, v) in fs.iter().zip(vals) {
                prop_assert_eq!(f.eval(&x), v);
            }
        }

        #[test]
        fn text_round_trip(c in arb_circuit()) {
            prop_assert_eq!(MonotoneCircuit::parse(&c.to_text()).unwrap(), c);
        }

        #[test]
        fn ledger_respects_union_bound(c in arb_circuit(), cc in 1usize..5) {
            let params = ClosureParams::new(ratio(1, 20), cc, ratio(1, 2)).unwrap();
            let (_, ledger) = approximate_circuit(&c, &params, &Engine::exact(), &uniform(), &uniform()).unwrap();
            prop_assert!(ledger.within_union_bound);
        }
    }
}
