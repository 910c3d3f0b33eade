//! Monotone succinct algebraic branching programs: a circuit `B(u, v, x)`
//! labels the edge `a → b` between vertices of `{0,1}^r`, and the program
//! sums the labels of all `s → t` paths with between 1 and `ℓ` edges.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::circuit::{validate_circuit, Circuit, CircuitBuilder, GateId, GateKind, OutputScope, Universe};
use crate::error::{Error, Result};
use crate::poly::{Degree, Polynomial, Var, VarSet};
use crate::semantics::{expand_single, ExpansionGuards};
use crate::transforms::{bit_vectors, ExpSum};

/// Largest vertex-encoding width accepted.
pub const MAX_ABP_WIDTH: usize = 10;

pub fn u_var(i: usize) -> Var {
    Var::from(format!("u{i}"))
}

pub fn v_var(i: usize) -> Var {
    Var::from(format!("v{i}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccinctAbp {
    pub b: Circuit,
    pub r: usize,
    pub s: Vec<bool>,
    pub t: Vec<bool>,
    pub ell: usize,
}

fn parse_bits(s: &str, field: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse(format!("`{field}` must be a bit string, got {s:?}"))),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl SuccinctAbp {
    pub fn new(b: Circuit, r: usize, s: Vec<bool>, t: Vec<bool>, ell: usize) -> Result<Self> {
        let abp = SuccinctAbp { b, r, s, t, ell };
        abp.check()?;
        Ok(abp)
    }

    fn check(&self) -> Result<()> {
        if self.r == 0 || self.r > MAX_ABP_WIDTH {
            return Err(Error::PreconditionViolation(format!(
                "vertex width r = {} must be between 1 and {MAX_ABP_WIDTH}",
                self.r
            )));
        }
        if self.s.len() != self.r || self.t.len() != self.r {
            return Err(Error::ShapeError(format!("s and t must have {} bits", self.r)));
        }
        if self.ell == 0 {
            return Err(Error::PreconditionViolation("length bound must be at least 1".into()));
        }
        if !self.b.is_monotone() {
            return Err(Error::PreconditionViolation("the encoding circuit must be monotone".into()));
        }
        if self.b.outputs().len() != 1 {
            return Err(Error::PreconditionViolation("the encoding circuit must have one output".into()));
        }
        validate_circuit(&self.b, OutputScope::Closed).into_result()?;
        let u = self.b.universe();
        for i in 1..=self.r {
            for w in [u_var(i), v_var(i)] {
                if !u.is_true(&w) {
                    return Err(Error::PreconditionViolation(format!("encoding circuit lacks true variable `{w}`")));
                }
            }
        }
        Ok(())
    }

    fn endpoint_vars(&self) -> VarSet {
        (1..=self.r).flat_map(|i| [u_var(i), v_var(i)]).collect()
    }

    /// The x-variables: true variables of `B` other than `u_i, v_i`.
    pub fn x_vars(&self) -> Vec<Var> {
        let ends = self.endpoint_vars();
        self.b.universe().true_vars().iter().filter(|v| !ends.contains(*v)).cloned().collect()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Parse(format!("missing field `{k}`")));
        let r = field("r")?.as_u64().ok_or_else(|| Error::Parse("`r` must be a non-negative integer".into()))? as usize;
        let ell =
            field("ell")?.as_u64().ok_or_else(|| Error::Parse("`ell` must be a non-negative integer".into()))? as usize;
        let s_bits = parse_bits(field("s")?.as_str().ok_or_else(|| Error::Parse("`s` must be a string".into()))?, "s")?;
        let t_bits = parse_bits(field("t")?.as_str().ok_or_else(|| Error::Parse("`t` must be a string".into()))?, "t")?;
        let b = match crate::circuit::CircuitFile::from_value(field("B")?.clone())? {
            crate::circuit::CircuitFile::Plain(c) => c,
            crate::circuit::CircuitFile::Quantified(_) => {
                return Err(Error::Parse("`B` must not carry a quantifier prefix".into()))
            }
        };
        SuccinctAbp::new(b, r, s_bits, t_bits, ell)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "r": self.r,
            "s": bits_to_string(&self.s),
            "t": bits_to_string(&self.t),
            "ell": self.ell,
            "B": self.b.to_json_value(),
        }))
        .expect("abp serializes")
    }
}

/// Edge labels `B(a, b, x)` as polynomials in x, computed lazily from one expansion of `B`.
struct Labels<'a> {
    abp: &'a SuccinctAbp,
    full: Polynomial,
    cache: HashMap<(Vec<bool>, Vec<bool>), Polynomial>,
}

impl<'a> Labels<'a> {
    fn new(abp: &'a SuccinctAbp, guards: &ExpansionGuards) -> Result<Self> {
        Ok(Labels { abp, full: expand_single(&abp.b, guards)?, cache: HashMap::new() })
    }

    fn get(&mut self, a: &[bool], b: &[bool]) -> Result<&Polynomial> {
        let key = (a.to_vec(), b.to_vec());
        if !self.cache.contains_key(&key) {
            let us: Vec<Var> = (1..=self.abp.r).map(u_var).collect();
            let vs: Vec<Var> = (1..=self.abp.r).map(v_var).collect();
            let bits = us.iter().zip(a.iter().copied()).chain(vs.iter().zip(b.iter().copied()));
            let p = self.full.substitute_bits(bits)?;
            self.cache.insert(key.clone(), p);
        }
        Ok(&self.cache[&key])
    }
}

fn check_width(abp: &SuccinctAbp, guards: &ExpansionGuards) -> Result<()> {
    let work = (1u128 << (2 * abp.r)) * abp.ell as u128;
    if work > guards.max_terms as u128 * 16 {
        return Err(Error::overflow(format!("4^{} edges over {} layers exceed the limit", abp.r, abp.ell)));
    }
    Ok(())
}

/// Sum of labels over all `s → t` paths with `1..=ℓ` edges, by dynamic
/// programming over (vertex, exact length).
pub fn abp_expand(abp: &SuccinctAbp, guards: &ExpansionGuards) -> Result<Polynomial> {
    check_width(abp, guards)?;
    let mut labels = Labels::new(abp, guards)?;
    let vertices: Vec<Vec<bool>> = bit_vectors(abp.r).collect();
    let t_index = vertices.iter().position(|v| *v == abp.t).expect("t is a vertex");
    let mut layer: Vec<Polynomial> =
        vertices.iter().map(|v| labels.get(&abp.s, v).cloned()).collect::<Result<_>>()?;
    let mut total = layer[t_index].clone();
    for _ in 2..=abp.ell {
        let mut next = vec![Polynomial::zero(); vertices.len()];
        for (i, from) in vertices.iter().enumerate() {
            if layer[i].is_zero() {
                continue;
            }
            for (j, to) in vertices.iter().enumerate() {
                let l = labels.get(from, to)?;
                if l.is_zero() {
                    continue;
                }
                next[j] = next[j].add(&layer[i].mul_guarded(l, guards.max_terms)?);
            }
        }
        for p in &next {
            if p.len() > guards.max_terms {
                return Err(Error::overflow(format!("path sum exceeds {} terms", guards.max_terms)));
            }
        }
        layer = next;
        total = total.add(&layer[t_index]);
    }
    Ok(total)
}

/// `2^{-e}` as an exact rational.
fn inv_pow2(e: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << e)
}

pub fn slot_var(k: usize, i: usize) -> Var {
    Var::from(format!("a{k}_{i}"))
}

/// Builds the exponential sum over `D·r` bits, `D = max(d+1, ℓ-1)`, whose body is
///
/// `2^{-rD} B(s,t) + Σ_{j=1}^{min(ℓ-1, D)} 2^{-r(D-j)} B(s,a_1) Π_{k<j} B(a_k,a_{k+1}) B(a_j,t)`.
///
/// Each band `j` only reads the first `j` slots, so its weight cancels the
/// `2^{r(D-j)}` assignments of the unused slots.
pub fn abp_to_expsum(abp: &SuccinctAbp, d: Option<i64>, guards: &ExpansionGuards) -> Result<ExpSum> {
    if !abp.b.is_plain() {
        return Err(Error::PreconditionViolation("the encoding circuit must not contain projection gates".into()));
    }
    let d = match d {
        Some(d) => d,
        None => abp_expand(abp, guards)?.degree(&abp.x_vars().into_iter().collect()).finite().unwrap_or(0),
    };
    if d < 0 {
        return Err(Error::PreconditionViolation("degree bound must be non-negative".into()));
    }
    let slots = (d as usize + 1).max(abp.ell.saturating_sub(1));
    let r = abp.r;
    if slots * r > 64 || (slots * abp.b.size()) > guards.max_terms {
        return Err(Error::overflow(format!("{slots} slots of width {r} exceed the limit")));
    }
    let x_vars = abp.x_vars();
    let summed: Vec<Var> = (1..=slots).flat_map(|k| (1..=r).map(move |i| slot_var(k, i))).collect();
    let universe = Universe::new(x_vars, summed.clone());
    let mut b = CircuitBuilder::new(universe);

    enum End<'a> {
        Fixed(&'a [bool]),
        Slot(usize),
    }
    let copy = |b: &mut CircuitBuilder, from: End, to: End| -> GateId {
        let mut sub: HashMap<Var, GateId> = HashMap::new();
        for (side, end) in [(0, from), (1, to)] {
            for i in 1..=r {
                let name = if side == 0 { u_var(i) } else { v_var(i) };
                let g = match end {
                    End::Fixed(bits) => b.constant_int(i64::from(bits[i - 1])),
                    End::Slot(k) => b.var(slot_var(k, i)),
                };
                sub.insert(name, g);
            }
        }
        let map = b.import(&abp.b, |_, g| match g {
            GateKind::Var(v) => sub.get(v).copied(),
            _ => None,
        });
        map[abp.b.output().0]
    };

    let direct = copy(&mut b, End::Fixed(&abp.s), End::Fixed(&abp.t));
    let w = b.constant(inv_pow2(r * slots));
    let mut bands = vec![b.mul(w, direct)];
    let bands_used = (abp.ell - 1).min(slots);
    if bands_used >= 1 {
        let mut prefix = copy(&mut b, End::Fixed(&abp.s), End::Slot(1));
        for j in 1..=bands_used {
            let close = copy(&mut b, End::Slot(j), End::Fixed(&abp.t));
            let path = b.mul(prefix, close);
            let term = if j == slots {
                path
            } else {
                let w = b.constant(inv_pow2(r * (slots - j)));
                b.mul(w, path)
            };
            bands.push(term);
            if j < bands_used {
                let step = copy(&mut b, End::Slot(j), End::Slot(j + 1));
                prefix = b.mul(prefix, step);
            }
        }
    }
    let out = b.add_all(&bands);
    Ok(ExpSum { summed_vars: summed, body: b.finish(vec![out]).pruned() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LengthBoundStatus {
    /// `ℓ = 1`.
    Vacuous,
    Ok,
    /// A factor of the chain `B(s,1̄)·B(1̄,1̄)^{ℓ-2}·B(1̄,t)` is zero, or `B(1̄,1̄)` has no x-dependence.
    HypothesisNotMet,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthBoundReport {
    pub ell: usize,
    /// `None` when `f = 0`.
    pub degree: Option<i64>,
    /// Degree of `B(s,1̄)·B(1̄,1̄)^{ℓ-2}·B(1̄,t)`, when non-zero.
    pub chain_degree: Option<i64>,
    pub status: LengthBoundStatus,
}

/// Checks `ℓ ≤ deg(f) + 2` for `ℓ > 1`, together with the degree chain
/// `deg(f) ≥ deg(B(s,1̄)·B(1̄,1̄)^{ℓ-2}·B(1̄,t)) ≥ ℓ - 2` it rests on.
pub fn abp_length_bound_check(abp: &SuccinctAbp, guards: &ExpansionGuards) -> Result<LengthBoundReport> {
    let f = abp_expand(abp, guards)?;
    let xs: VarSet = abp.x_vars().into_iter().collect();
    let degree = f.degree(&xs).finite();
    if abp.ell == 1 {
        return Ok(LengthBoundReport { ell: 1, degree, chain_degree: None, status: LengthBoundStatus::Vacuous });
    }
    let mut labels = Labels::new(abp, guards)?;
    let ones = vec![true; abp.r];
    let deg = |p: &Polynomial| p.degree(&xs);
    let first = deg(labels.get(&abp.s, &ones)?);
    let middle = deg(labels.get(&ones, &ones)?);
    let last = deg(labels.get(&ones, &abp.t)?);
    let chain = match (first, middle, last) {
        (Degree::Finite(a), Degree::Finite(m), Degree::Finite(c)) => Some(a + (abp.ell as i64 - 2) * m + c),
        _ => None,
    };
    let hypotheses = chain.is_some() && matches!(middle, Degree::Finite(m) if m >= 1);
    let ell = abp.ell as i64;
    let status = if !hypotheses {
        LengthBoundStatus::HypothesisNotMet
    } else {
        let c = chain.unwrap();
        let d = degree.unwrap_or(i64::MIN);
        if d >= c && c >= ell - 2 && ell <= d + 2 {
            LengthBoundStatus::Ok
        } else {
            LengthBoundStatus::Violation
        }
    };
    Ok(LengthBoundReport { ell: abp.ell, degree, chain_degree: chain, status })
}

/// Pairs `(a, b)` where some monomial of `B(a,b,x)` is missing from `B(1̄,1̄,x)`.
pub fn edge_support_violations(abp: &SuccinctAbp, guards: &ExpansionGuards) -> Result<Vec<(Vec<bool>, Vec<bool>)>> {
    check_width(abp, guards)?;
    let mut labels = Labels::new(abp, guards)?;
    let ones = vec![true; abp.r];
    let top = labels.get(&ones, &ones)?.support();
    let mut bad = Vec::new();
    for a in bit_vectors(abp.r) {
        for b in bit_vectors(abp.r) {
            if !labels.get(&a, &b)?.support().is_subset(&top) {
                bad.push((a.clone(), b));
            }
        }
    }
    Ok(bad)
}

/// `(v·C, 0, 1, 1)`: a one-bit program whose single edge `0 → 1` carries `C`.
pub fn embed_mvp_circuit(c: &Circuit) -> Result<SuccinctAbp> {
    if !c.is_plain() || !c.is_monotone() || c.outputs().len() != 1 {
        return Err(Error::PreconditionViolation(
            "embedding needs a plain monotone circuit with one output".into(),
        ));
    }
    let mut tv = vec![u_var(1), v_var(1)];
    for v in c.universe().true_vars() {
        if *v == u_var(1) || *v == v_var(1) {
            return Err(Error::PreconditionViolation(format!("variable `{v}` is reserved for vertex bits")));
        }
        tv.push(v.clone());
    }
    let mut b = CircuitBuilder::new(Universe::new(tv, c.universe().aux_vars().to_vec()))
        .high_powered(c.is_high_powered());
    let map = b.import(c, |_, _| None);
    let v = b.var(v_var(1));
    let out = b.mul(v, map[c.output().0]);
    SuccinctAbp::new(b.finish(vec![out]), 1, vec![false], vec![true], 1)
}

/// A chain program of width `r` with every edge labelled by `label` (a plain circuit in x).
pub fn uniform_abp(x_names: &[&str], r: usize, ell: usize, s: Vec<bool>, t: Vec<bool>, label: impl FnOnce(&mut CircuitBuilder) -> GateId) -> Result<SuccinctAbp> {
    let mut tv: Vec<Var> = (1..=r).map(u_var).chain((1..=r).map(v_var)).collect();
    tv.extend(x_names.iter().map(|n| Var::new(n)));
    let mut b = CircuitBuilder::new(Universe::new(tv, vec![]));
    let out = label(&mut b);
    SuccinctAbp::new(b.finish(vec![out]), r, s, t, ell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{permanent_oracle, rat};
    use crate::transforms::build_perm_projection_circuit;

    fn g() -> ExpansionGuards {
        ExpansionGuards::default()
    }

    fn x() -> Polynomial {
        Polynomial::var("x")
    }

    #[test]
    fn constant_x_label_length_two() {
        let abp = uniform_abp(&["x"], 1, 2, vec![false], vec![true], |b| b.var("x")).unwrap();
        let want = x().add(&x().mul(&x()).unwrap().scale(&rat(2)));
        assert_eq!(abp_expand(&abp, &g()).unwrap(), want);
        let es = abp_to_expsum(&abp, None, &g()).unwrap();
        es.validate().unwrap();
        assert_eq!(es.enumerate(&g()).unwrap(), want);
        assert_eq!(es.expand(&g()).unwrap(), want);
    }

    #[test]
    fn length_one_is_the_direct_edge() {
        // B = x·u1 + v1 : B(0,1) = 1
        let abp = uniform_abp(&["x"], 1, 1, vec![false], vec![true], |b| {
            let x = b.var("x");
            let u = b.var("u1");
            let v = b.var("v1");
            let m = b.mul(x, u);
            b.add(m, v)
        })
        .unwrap();
        assert_eq!(abp_expand(&abp, &g()).unwrap(), Polynomial::one());
        let es = abp_to_expsum(&abp, Some(3), &g()).unwrap();
        assert_eq!(es.enumerate(&g()).unwrap(), Polynomial::one());
    }

    #[test]
    fn length_three_matches_brute_force() {
        // B = x·u1 + v1 + 1
        let abp = uniform_abp(&["x"], 1, 3, vec![false], vec![false], |b| {
            let x = b.var("x");
            let u = b.var("u1");
            let v = b.var("v1");
            let one = b.constant_int(1);
            let m = b.mul(x, u);
            let s = b.add(m, v);
            b.add(s, one)
        })
        .unwrap();
        let f = abp_expand(&abp, &g()).unwrap();
        // paths from 0 back to 0 with 1..3 edges, by enumeration
        let lab = |a: bool, b: bool| {
            let mut p = Polynomial::constant(rat(1 + i64::from(b)));
            if a {
                p = p.add(&x());
            }
            p
        };
        let mut want = Polynomial::zero();
        for len in 1..=3usize {
            for mids in 0..(1u32 << (len - 1)) {
                let mut seq = vec![false];
                seq.extend((0..len - 1).map(|i| mids >> i & 1 == 1));
                seq.push(false);
                let mut p = Polynomial::one();
                for w in seq.windows(2) {
                    p = p.mul(&lab(w[0], w[1])).unwrap();
                }
                want = want.add(&p);
            }
        }
        assert_eq!(f, want);
        let es = abp_to_expsum(&abp, None, &g()).unwrap();
        assert_eq!(es.enumerate(&g()).unwrap(), f);
    }

    #[test]
    fn band_weights_sum_to_one() {
        let (r, slots) = (2usize, 3usize);
        for j in 1..=slots {
            let total = inv_pow2(r * (slots - j)) * BigRational::from_integer(BigInt::one() << (r * (slots - j)));
            assert!(total.is_one());
        }
    }

    #[test]
    fn embedding_examples() {
        let u = Universe::from_names(["x1", "x2"], []);
        let mut b = CircuitBuilder::new(u.clone());
        let a = b.var("x1");
        let c = b.var("x2");
        let s = b.add(a, c);
        let abp = embed_mvp_circuit(&b.finish(vec![s])).unwrap();
        assert_eq!(abp_expand(&abp, &g()).unwrap(), Polynomial::var("x1").add(&Polynomial::var("x2")));

        let mut b = CircuitBuilder::new(u);
        let z = b.constant_int(0);
        let abp = embed_mvp_circuit(&b.finish(vec![z])).unwrap();
        assert!(abp_expand(&abp, &g()).unwrap().is_zero());

        let perm = crate::transforms::lower_to_projections(&build_perm_projection_circuit(2).unwrap());
        assert!(embed_mvp_circuit(&perm).is_err());
    }

    #[test]
    fn embedding_of_plain_permanent() {
        // x11 x22 + x12 x21 as a plain circuit
        let u = Universe::from_names(["x1_1", "x1_2", "x2_1", "x2_2"], []);
        let mut b = CircuitBuilder::new(u);
        let v: Vec<GateId> = ["x1_1", "x1_2", "x2_1", "x2_2"].iter().map(|n| b.var(*n)).collect();
        let p = b.mul(v[0], v[3]);
        let q = b.mul(v[1], v[2]);
        let s = b.add(p, q);
        let abp = embed_mvp_circuit(&b.finish(vec![s])).unwrap();
        assert_eq!(abp_expand(&abp, &g()).unwrap(), permanent_oracle(2).unwrap());
    }

    #[test]
    fn length_bound_examples() {
        let abp = uniform_abp(&["x"], 1, 2, vec![false], vec![true], |b| b.var("x")).unwrap();
        let rep = abp_length_bound_check(&abp, &g()).unwrap();
        assert_eq!(rep.status, LengthBoundStatus::Ok);
        assert_eq!(rep.degree, Some(2));

        let abp = uniform_abp(&["x"], 1, 1, vec![false], vec![true], |b| b.var("x")).unwrap();
        assert_eq!(abp_length_bound_check(&abp, &g()).unwrap().status, LengthBoundStatus::Vacuous);

        // every label is zero
        let abp = uniform_abp(&["x"], 1, 3, vec![false], vec![false], |b| {
            let x = b.var("x");
            let zero = b.constant_int(0);
            b.mul(x, zero)
        })
        .unwrap();
        assert_eq!(abp_length_bound_check(&abp, &g()).unwrap().status, LengthBoundStatus::HypothesisNotMet);

        // constant labels: the bound itself fails, which the hypothesis check catches
        let abp = uniform_abp(&["x"], 1, 5, vec![false], vec![true], |b| b.constant_int(1)).unwrap();
        let rep = abp_length_bound_check(&abp, &g()).unwrap();
        assert_eq!(rep.degree, Some(0));
        assert_eq!(rep.status, LengthBoundStatus::HypothesisNotMet);
        let es = abp_to_expsum(&abp, None, &g()).unwrap();
        assert_eq!(es.enumerate(&g()).unwrap(), abp_expand(&abp, &g()).unwrap());
    }

    #[test]
    fn json_roundtrip() {
        let abp = uniform_abp(&["x"], 2, 3, vec![false, false], vec![true, true], |b| {
            let x = b.var("x");
            let u = b.var("u2");
            b.add(x, u)
        })
        .unwrap();
        let back = SuccinctAbp::from_json(&abp.to_json()).unwrap();
        assert_eq!(back, abp);
        assert!(SuccinctAbp::from_json(r#"{"r":1,"s":"2","t":"1","ell":1,"B":{}}"#).is_err());
    }

    #[test]
    fn support_law_on_monotone_encoding() {
        let abp = uniform_abp(&["x", "y"], 2, 2, vec![false, false], vec![true, true], |b| {
            let x = b.var("x");
            let u = b.var("u1");
            let v = b.var("v2");
            let y = b.var("y");
            let a = b.mul(x, u);
            let c = b.mul(v, y);
            b.add(a, c)
        })
        .unwrap();
        assert!(edge_support_violations(&abp, &g()).unwrap().is_empty());
    }
}
