//! Meaning of circuits: pointwise evaluation, expansion to polynomials, and
//! the shadow substitution into two-variable high-powered circuits.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::circuit::{Circuit, GateId, GateKind, Quantifier, QuantifiedCircuit, Universe};
use crate::error::{Error, Result};
use crate::poly::{rational_pow, Monomial, Polynomial, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpansionGuards {
    pub max_terms: usize,
    /// Bound on the sum of absolute exponents of any term.
    pub max_total_degree: i64,
    pub max_prefix_length: usize,
}

impl Default for ExpansionGuards {
    fn default() -> Self {
        ExpansionGuards { max_terms: 200_000, max_total_degree: 64, max_prefix_length: 24 }
    }
}

impl ExpansionGuards {
    pub fn validated(self) -> Result<Self> {
        if self.max_terms == 0 || self.max_total_degree <= 0 || self.max_prefix_length == 0 {
            return Err(Error::PreconditionViolation("expansion guards must be positive".into()));
        }
        Ok(self)
    }

    fn check(&self, p: &Polynomial) -> Result<()> {
        if p.len() > self.max_terms {
            return Err(Error::overflow(format!("{} terms exceed the limit of {}", p.len(), self.max_terms)));
        }
        let d = p.max_abs_degree();
        if d > self.max_total_degree {
            return Err(Error::overflow(format!("degree {d} exceeds the limit of {}", self.max_total_degree)));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Evaluation

type Bits = Vec<(Var, bool)>;

struct Evaluator<'a> {
    c: &'a Circuit,
    assignment: &'a BTreeMap<Var, BigRational>,
    free: Vec<BTreeSet<Var>>,
    memo: HashMap<(usize, Bits), BigRational>,
}

impl Evaluator<'_> {
    /// Value of gate `id` with the bound variables in `bits` overriding the assignment.
    fn eval(&mut self, id: GateId, bits: &Bits) -> Result<BigRational> {
        // only the bits this gate can see belong in the memo key
        let bits: Bits = bits.iter().filter(|(v, _)| self.free[id.0].contains(v) || !self.c.universe().is_aux(v)).cloned().collect();
        let bits = &bits;
        let key = (id.0, bits.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let lookup = |v: &Var| -> Result<BigRational> {
            if let Some((_, b)) = bits.iter().find(|(w, _)| w == v) {
                return Ok(if *b { BigRational::one() } else { BigRational::zero() });
            }
            self.assignment.get(v).cloned().ok_or_else(|| Error::MissingAssignment(v.to_string()))
        };
        let value = match self.c.gate(id) {
            GateKind::Const(c) => c.clone(),
            GateKind::Var(v) => lookup(v)?,
            GateKind::Laurent { coeff, monomial } => {
                let mut t = coeff.clone();
                for (v, e) in monomial.iter() {
                    let x = lookup(v)?;
                    if e < 0 && x.is_zero() {
                        return Err(Error::DivisionByZero(format!("`{v}` = 0 under a negative exponent")));
                    }
                    t *= rational_pow(&x, e);
                }
                t
            }
            GateKind::Add(a, b) => self.eval(*a, bits)? + self.eval(*b, bits)?,
            GateKind::Mul(a, b) => {
                let l = self.eval(*a, bits)?;
                if l.is_zero() {
                    l
                } else {
                    l * self.eval(*b, bits)?
                }
            }
            GateKind::Project { var, bit, child } => self.eval(*child, &with_bit(bits, var, *bit))?,
            GateKind::Sum { var, child } => {
                self.eval(*child, &with_bit(bits, var, false))? + self.eval(*child, &with_bit(bits, var, true))?
            }
            GateKind::Prod { var, child } => {
                self.eval(*child, &with_bit(bits, var, false))? * self.eval(*child, &with_bit(bits, var, true))?
            }
        };
        self.memo.insert(key, value.clone());
        Ok(value)
    }
}

fn with_bit(bits: &Bits, var: &Var, bit: bool) -> Bits {
    let mut out: Bits = bits.iter().filter(|(v, _)| v != var).cloned().collect();
    out.push((var.clone(), bit));
    out.sort();
    out
}

/// Exact value of every output at a rational point. Variables bound by
/// Project/Sum/Prod gates need not be assigned.
pub fn evaluate(c: &Circuit, assignment: &BTreeMap<Var, BigRational>) -> Result<Vec<BigRational>> {
    let mut ev = Evaluator { c, assignment, free: c.free_aux(), memo: HashMap::new() };
    c.outputs().iter().map(|&o| ev.eval(o, &Vec::new())).collect()
}

// ---------------------------------------------------------------------------
// Expansion

/// Expands every gate reachable from the outputs, bottom-up.
fn expand_gates(c: &Circuit, guards: &ExpansionGuards) -> Result<Vec<Option<Polynomial>>> {
    let live = c.reachable();
    let mut polys: Vec<Option<Polynomial>> = vec![None; c.size()];
    for (i, g) in c.gates().iter().enumerate() {
        if !live[i] {
            continue;
        }
        let get = |id: &GateId| polys[id.0].as_ref().expect("children precede parents");
        let p = (|| -> Result<Polynomial> {
            let p = match g {
                GateKind::Const(v) => Polynomial::constant(v.clone()),
                GateKind::Var(v) => Polynomial::var(v.clone()),
                GateKind::Laurent { coeff, monomial } => Polynomial::term(coeff.clone(), monomial.clone()),
                GateKind::Add(a, b) => get(a).add(get(b)),
                GateKind::Mul(a, b) => get(a).mul_guarded(get(b), guards.max_terms)?,
                GateKind::Project { var, bit, child } => get(child).substitute_bits([(var, *bit)])?,
                GateKind::Sum { var, child } => {
                    let p = get(child);
                    p.substitute_bits([(var, false)])?.add(&p.substitute_bits([(var, true)])?)
                }
                GateKind::Prod { var, child } => {
                    let p = get(child);
                    p.substitute_bits([(var, false)])?
                        .mul_guarded(&p.substitute_bits([(var, true)])?, guards.max_terms)?
                }
            };
            guards.check(&p)?;
            Ok(p)
        })()
        .map_err(|e| e.at_gate(GateId(i)))?;
        polys[i] = Some(p);
    }
    Ok(polys)
}

/// One polynomial per output.
pub fn expand(c: &Circuit, guards: &ExpansionGuards) -> Result<Vec<Polynomial>> {
    let polys = expand_gates(c, guards)?;
    Ok(c.outputs().iter().map(|o| polys[o.0].clone().expect("output is reachable")).collect())
}

/// Expansion of the first output.
pub fn expand_single(c: &Circuit, guards: &ExpansionGuards) -> Result<Polynomial> {
    let polys = expand_gates(c, guards)?;
    Ok(polys[c.output().0].clone().expect("output is reachable"))
}

/// Applies `Q z` to an expanded polynomial.
pub fn apply_quantifier(p: &Polynomial, q: Quantifier, z: &Var, guards: &ExpansionGuards) -> Result<Polynomial> {
    let p0 = p.substitute_bits([(z, false)])?;
    let p1 = p.substitute_bits([(z, true)])?;
    let out = match q {
        Quantifier::Sum => p0.add(&p1),
        Quantifier::Prod => p0.mul_guarded(&p1, guards.max_terms)?,
    };
    guards.check(&out)?;
    Ok(out)
}

/// Expands the inner circuit and applies the prefix innermost-first.
pub fn expand_quantified(qc: &QuantifiedCircuit, guards: &ExpansionGuards) -> Result<Polynomial> {
    if qc.prefix().len() > guards.max_prefix_length {
        return Err(Error::overflow(format!(
            "prefix length {} exceeds the limit of {}",
            qc.prefix().len(),
            guards.max_prefix_length
        )));
    }
    let mut p = expand_single(qc.inner(), guards)?;
    for (q, z) in qc.prefix().iter().rev() {
        p = apply_quantifier(&p, *q, z, guards)?;
    }
    Ok(p)
}

/// Exponent vectors of the support projected onto `true_vars`, duplicates merged.
pub fn y_support(p: &Polynomial, true_vars: &[Var]) -> BTreeSet<Vec<i64>> {
    p.terms().map(|(m, _)| m.exponents_in(true_vars)).collect()
}

// ---------------------------------------------------------------------------
// Shadows

/// Names for the two plane variables that do not clash with `u`.
pub fn fresh_plane_vars(u: &Universe) -> (Var, Var) {
    let mut suffix = String::new();
    loop {
        let w1 = Var::from(format!("w1{suffix}"));
        let w2 = Var::from(format!("w2{suffix}"));
        if !u.contains(&w1) && !u.contains(&w2) {
            return (w1, w2);
        }
        suffix.push('\'');
    }
}

/// The monomial `w1^{M[0,i]} w2^{M[1,i]}` for column `i`.
fn column_monomial(m: &[Vec<i64>], i: usize, w: &(Var, Var)) -> Monomial {
    Monomial::from_pairs([(w.0.clone(), m[0][i]), (w.1.clone(), m[1][i])])
}

fn check_matrix(m: &[Vec<i64>], n: usize) -> Result<()> {
    if m.len() != 2 || m.iter().any(|row| row.len() != n) {
        let shape: Vec<usize> = m.iter().map(Vec::len).collect();
        return Err(Error::ShapeError(format!("expected a 2x{n} matrix, got rows of lengths {shape:?}")));
    }
    Ok(())
}

/// Rewrites every true-variable leaf `x_i` as the Laurent leaf
/// `w1^{M[0,i]} w2^{M[1,i]}`. Gate structure and size are unchanged.
pub fn shadow_substitute(c: &Circuit, m: &[Vec<i64>]) -> Result<Circuit> {
    let tv = c.universe().true_vars();
    check_matrix(m, tv.len())?;
    let w = fresh_plane_vars(c.universe());
    let index: HashMap<&Var, usize> = tv.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let map_monomial = |mono: &Monomial| -> Monomial {
        let mut out = Monomial::one();
        for (v, e) in mono.iter() {
            out = match index.get(v) {
                Some(&i) => out.mul(&column_monomial(m, i, &w).pow(e)),
                None => out.mul(&Monomial::from_pairs([(v.clone(), e)])),
            };
        }
        out
    };
    let gates = c
        .gates()
        .iter()
        .map(|g| match g {
            GateKind::Var(v) if index.contains_key(v) => {
                GateKind::Laurent { coeff: BigRational::one(), monomial: map_monomial(&Monomial::var(v.clone())) }
            }
            GateKind::Laurent { coeff, monomial } => {
                GateKind::Laurent { coeff: coeff.clone(), monomial: map_monomial(monomial) }
            }
            other => other.clone(),
        })
        .collect();
    let universe = Universe::new(vec![w.0, w.1], c.universe().aux_vars().to_vec());
    Ok(Circuit::from_parts(universe, gates, c.outputs().to_vec(), c.is_monotone(), true))
}

/// Applies `x_i ↦ w1^{M[0,i]} w2^{M[1,i]}` to a polynomial over `true_vars`,
/// aggregating coefficients of colliding images.
pub fn shadow_polynomial(p: &Polynomial, true_vars: &[Var], m: &[Vec<i64>]) -> Result<Polynomial> {
    check_matrix(m, true_vars.len())?;
    let w = (Var::new("w1"), Var::new("w2"));
    let out = p
        .map_monomials(|mono| {
            let e = mono.exponents_in(true_vars);
            let a: i64 = e.iter().zip(&m[0]).map(|(x, y)| x * y).sum();
            let b: i64 = e.iter().zip(&m[1]).map(|(x, y)| x * y).sum();
            Monomial::from_pairs([(w.0.clone(), a), (w.1.clone(), b)])
        })
        .into_laurent();
    if p.is_monotone() && !out.is_monotone() {
        return Err(Error::InvariantBreach("cancellation in a monotone shadow".into()));
    }
    Ok(out)
}
