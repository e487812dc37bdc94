use num_traits::Zero;
use serde::Serialize;

use super::poly::{var_index, Polynomial};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Default cap on the monomials any single gate may expand to.
pub const EXPANSION_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ArithGate {
    Var { i: usize, j: usize },
    Const(#[serde(serialize_with = "crate::rational::serialize")] Rational),
    Add(usize, usize),
    Mul(usize, usize),
}

/// An arithmetic circuit over the variables `x_{i,j}`, gates in topological order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArithCircuit {
    q: usize,
    n: usize,
    gates: Vec<ArithGate>,
    output: usize,
}

impl ArithCircuit {
    /// Checks variable ranges and that every gate reads only earlier gates.
    pub fn new(q: usize, n: usize, gates: Vec<ArithGate>, output: usize) -> Result<Self> {
        for (g, gate) in gates.iter().enumerate() {
            match *gate {
                ArithGate::Var { i, j } => {
                    var_index(q, n, i, j)?;
                }
                ArithGate::Const(_) => {}
                ArithGate::Add(a, b) | ArithGate::Mul(a, b) => {
                    if a >= g || b >= g {
                        return Err(Error::invalid(format!(
                            "gate {g} reads a gate that is not earlier"
                        )));
                    }
                }
            }
        }
        if output >= gates.len() {
            return Err(Error::invalid(format!(
                "output gate {output} does not exist"
            )));
        }
        Ok(Self {
            q,
            n,
            gates,
            output,
        })
    }

    pub fn gates(&self) -> &[ArithGate] {
        &self.gates
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Gate-by-gate evaluation at `x_{i,j} = assignment(i, j)`.
    pub fn eval_exact(&self, assignment: impl Fn(usize, usize) -> Rational) -> Rational {
        let mut values: Vec<Rational> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let v = match gate {
                ArithGate::Var { i, j } => assignment(*i, *j),
                ArithGate::Const(c) => c.clone(),
                ArithGate::Add(a, b) => &values[*a] + &values[*b],
                ArithGate::Mul(a, b) => &values[*a] * &values[*b],
            };
            values.push(v);
        }
        values.swap_remove(self.output)
    }
}

/// Shape of the polynomial computed at one gate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GateShape {
    pub gate: usize,
    pub monomials: usize,
    pub degree: Option<usize>,
    pub homogeneous: bool,
    pub multilinear: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expansion {
    pub polynomial: Polynomial,
    pub gates: Vec<GateShape>,
}

impl Expansion {
    /// Gates whose polynomial is not homogeneous or not multilinear.
    pub fn violations(&self) -> impl Iterator<Item = &GateShape> {
        self.gates
            .iter()
            .filter(|g| !g.homogeneous || !g.multilinear)
    }
}

/// Expands every gate bottom-up into its polynomial, recording each gate's shape.
pub fn circuit_to_monomials(circuit: &ArithCircuit, cap: usize) -> Result<Expansion> {
    let (q, n) = (circuit.q, circuit.n);
    let mut polys: Vec<Polynomial> = Vec::with_capacity(circuit.gates.len());
    let mut shapes = Vec::with_capacity(circuit.gates.len());
    for (g, gate) in circuit.gates.iter().enumerate() {
        let p = match gate {
            ArithGate::Var { i, j } => Polynomial::variable(q, n, *i, *j)?,
            ArithGate::Const(c) => {
                if *c <= Rational::zero() {
                    return Err(Error::NegativeConstant { gate: g });
                }
                Polynomial::constant(q, n, c.clone())
            }
            ArithGate::Add(a, b) => polys[*a].add(&polys[*b]),
            ArithGate::Mul(a, b) => polys[*a]
                .mul(&polys[*b], cap)
                .map_err(|_| Error::MonomialBlowup { gate: g, cap })?,
        };
        if p.len() > cap {
            return Err(Error::MonomialBlowup { gate: g, cap });
        }
        shapes.push(GateShape {
            gate: g,
            monomials: p.len(),
            degree: p.homogeneous_degree(),
            homogeneous: p.is_homogeneous(),
            multilinear: p.is_multilinear(),
        });
        polys.push(p);
    }
    Ok(Expansion {
        polynomial: polys.swap_remove(circuit.output),
        gates: shapes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_polynomial, reed_solomon_code};
    use crate::probability::stream_rng;
    use crate::rational::ratio;
    use rand::Rng;

    fn var(i: usize, j: usize) -> ArithGate {
        ArithGate::Var { i, j }
    }

    fn random_assignment(seed: u64) -> impl Fn(usize, usize) -> Rational {
        let mut rng = stream_rng(seed, 0);
        let table: Vec<Rational> = (0..64)
            .map(|_| ratio(rng.random_range(1..20), rng.random_range(1..7)))
            .collect();
        move |i, j| table[(i * 7 + j) % 64].clone()
    }

    #[test]
    fn single_gates() {
        let c = ArithCircuit::new(2, 2, vec![var(1, 1)], 0).unwrap();
        assert_eq!(circuit_to_monomials(&c, 10).unwrap().polynomial.len(), 1);
        let c =
            ArithCircuit::new(2, 2, vec![var(1, 1), var(2, 2), ArithGate::Mul(0, 1)], 2).unwrap();
        let e = circuit_to_monomials(&c, 10).unwrap();
        assert_eq!(e.polynomial.homogeneous_degree(), Some(2));
        assert!(e.violations().next().is_none());
    }

    #[test]
    fn expansion_matches_evaluation() {
        let gates = vec![
            var(1, 1),
            var(2, 1),
            var(1, 2),
            ArithGate::Const(ratio(3, 2)),
            ArithGate::Add(0, 1),
            ArithGate::Mul(4, 2),
            ArithGate::Mul(5, 3),
            ArithGate::Add(6, 5),
            ArithGate::Mul(7, 7),
        ];
        let c = ArithCircuit::new(2, 2, gates, 8).unwrap();
        let e = circuit_to_monomials(&c, 100).unwrap();
        for seed in 0..5 {
            let a = random_assignment(seed);
            assert_eq!(e.polynomial.eval_exact(&a), c.eval_exact(&a));
        }
        // The final square repeats variables.
        assert!(e.violations().any(|g| g.gate == 8 && !g.multilinear));
    }

    #[test]
    fn sum_of_products_computes_code_polynomial() {
        let code = reed_solomon_code(3, 3, 1).unwrap();
        let mut gates = Vec::new();
        let mut terms = Vec::new();
        for w in code.codewords() {
            let mut acc = None;
            for (j, &s) in w.iter().enumerate() {
                gates.push(var(s as usize + 1, j + 1));
                let g = gates.len() - 1;
                acc = Some(match acc {
                    None => g,
                    Some(a) => {
                        gates.push(ArithGate::Mul(a, g));
                        gates.len() - 1
                    }
                });
            }
            terms.push(acc.unwrap());
        }
        let mut out = terms[0];
        for &t in &terms[1..] {
            gates.push(ArithGate::Add(out, t));
            out = gates.len() - 1;
        }
        let c = ArithCircuit::new(3, 3, gates, out).unwrap();
        let e = circuit_to_monomials(&c, 100).unwrap();
        assert_eq!(e.polynomial, build_polynomial(&code));
        assert!(e.gates.iter().all(|g| g.multilinear));
    }

    #[test]
    fn rejects_bad_circuits() {
        assert!(ArithCircuit::new(2, 2, vec![ArithGate::Add(0, 0)], 0).is_err());
        assert!(ArithCircuit::new(2, 2, vec![var(3, 1)], 0).is_err());
        assert!(ArithCircuit::new(2, 2, vec![var(1, 1)], 1).is_err());
        let neg = ArithCircuit::new(2, 2, vec![ArithGate::Const(ratio(-1, 2))], 0).unwrap();
        assert_eq!(
            circuit_to_monomials(&neg, 10),
            Err(Error::NegativeConstant { gate: 0 })
        );
        let mut gates = vec![var(1, 1), var(2, 1), ArithGate::Add(0, 1)];
        for k in 0..6 {
            gates.push(ArithGate::Mul(2 + k, 2 + k));
        }
        let blow = ArithCircuit::new(2, 1, gates, 8).unwrap();
        assert!(matches!(
            circuit_to_monomials(&blow, 8),
            Err(Error::MonomialBlowup { .. })
        ));
    }
}
