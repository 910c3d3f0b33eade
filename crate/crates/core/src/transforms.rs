//! Circuit-to-circuit constructions: lowering summation/production gates to
//! projections, homogeneous-component extraction, exponential sums for
//! quantified circuits, the permanent via projections, and support checks.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::circuit::{
    validate_circuit, validate_quantified, Circuit, CircuitBuilder, GateId, GateKind, OutputScope, QuantifiedCircuit,
    Quantifier, Universe,
};
use crate::error::{Error, Result};
use crate::poly::{format_rational, perm_var, Degree, Monomial, Polynomial, Var, VarSet, PERMANENT_ORACLE_CAP};
use crate::semantics::{apply_quantifier, expand_quantified, expand_single, y_support, ExpansionGuards};

/// Largest number of prefix copies (`2^{M_k}`) the exponential-sum builders will make.
pub const MAX_PREFIX_COPIES_LOG2: usize = 16;

/// Size constant for [`extract_hom_circuit`]: output size ≤ `HOM_SIZE_CONSTANT · max(k,1)² · s`.
pub const HOM_SIZE_CONSTANT: usize = 6;

/// Size constant for [`homogeneous_quantified_to_expsum`]: size ≤ `EXPSUM_SIZE_CONSTANT · s · d`.
pub const EXPSUM_SIZE_CONSTANT: usize = 3;

/// Cap on `|S|` for [`is_product_decomposable`].
pub const DECOMPOSABLE_CAP: usize = 12;

// ---------------------------------------------------------------------------
// Lowering

/// Replaces `Σ_z g` by `proj_{z→0} g + proj_{z→1} g` and `Π_z g` by the product.
pub fn lower_to_projections(c: &Circuit) -> Circuit {
    if !c.has_gate(|g| matches!(g, GateKind::Sum { .. } | GateKind::Prod { .. })) {
        return c.clone();
    }
    let mut b = CircuitBuilder::new(c.universe().clone())
        .monotone(c.is_monotone())
        .high_powered(c.is_high_powered());
    let mut map: Vec<GateId> = Vec::with_capacity(c.size());
    for g in c.gates() {
        let m = |id: &GateId| map[id.0];
        let id = match g {
            GateKind::Sum { var, child } | GateKind::Prod { var, child } => {
                let p0 = b.project(var.clone(), false, m(child));
                let p1 = b.project(var.clone(), true, m(child));
                if matches!(g, GateKind::Sum { .. }) {
                    b.add(p0, p1)
                } else {
                    b.mul(p0, p1)
                }
            }
            GateKind::Add(l, r) => b.add(m(l), m(r)),
            GateKind::Mul(l, r) => b.mul(m(l), m(r)),
            GateKind::Project { var, bit, child } => b.project(var.clone(), *bit, m(child)),
            leaf => b.push(leaf.clone()),
        };
        map.push(id);
    }
    let outputs = c.outputs().iter().map(|o| map[o.0]).collect();
    b.finish(outputs)
}

// ---------------------------------------------------------------------------
// Homogeneous components

/// A circuit computing the degree-`k` homogeneous component (in the true
/// variables) of the first output, built with `k+1` copies per gate.
pub fn extract_hom_circuit(c: &Circuit, k: usize, guards: &ExpansionGuards) -> Result<Circuit> {
    if c.has_gate(|g| matches!(g, GateKind::Sum { .. } | GateKind::Prod { .. })) {
        return Err(Error::PreconditionViolation(
            "summation/production gates present; lower them to projections first".into(),
        ));
    }
    if !c.is_monotone() {
        return Err(Error::PreconditionViolation("homogeneous extraction needs a monotone circuit".into()));
    }
    if k as i64 > guards.max_total_degree {
        return Err(Error::overflow(format!("k = {k} exceeds the degree limit {}", guards.max_total_degree)));
    }
    let src = c.with_outputs(vec![c.output()]).pruned();
    let true_vars = src.universe().true_set();
    let mut b = CircuitBuilder::new(src.universe().clone()).monotone(true).high_powered(src.is_high_powered());
    let zero = b.constant_int(0);
    let mut copies: Vec<Vec<GateId>> = Vec::with_capacity(src.size());
    for g in src.gates() {
        let row: Vec<GateId> = match g {
            GateKind::Const(_) | GateKind::Var(_) | GateKind::Laurent { .. } => {
                let deg = match g {
                    GateKind::Const(_) => 0,
                    GateKind::Var(v) => i64::from(true_vars.contains(v)),
                    GateKind::Laurent { monomial, .. } => monomial.degree_in(&true_vars),
                    _ => unreachable!(),
                };
                let leaf = b.push(g.clone());
                (0..=k).map(|i| if i as i64 == deg { leaf } else { zero }).collect()
            }
            GateKind::Add(l, r) => (0..=k).map(|i| b.add(copies[l.0][i], copies[r.0][i])).collect(),
            GateKind::Project { var, bit, child } => {
                (0..=k).map(|i| b.project(var.clone(), *bit, copies[child.0][i])).collect()
            }
            GateKind::Mul(l, r) => (0..=k)
                .map(|i| {
                    let terms: Vec<GateId> =
                        (0..=i).map(|j| b.mul(copies[l.0][j], copies[r.0][i - j])).collect();
                    terms[1..].iter().fold(terms[0], |acc, &t| b.add(acc, t))
                })
                .collect(),
            GateKind::Sum { .. } | GateKind::Prod { .. } => unreachable!(),
        };
        copies.push(row);
    }
    let out = copies[src.output().0][k];
    Ok(b.finish(vec![out]).pruned())
}

// ---------------------------------------------------------------------------
// Exponential sums

/// `Σ_{a ∈ {0,1}^{summed_vars}} body(x, a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpSum {
    pub summed_vars: Vec<Var>,
    pub body: Circuit,
}

impl ExpSum {
    /// `|summed_vars| + size(body)`.
    pub fn size(&self) -> usize {
        self.summed_vars.len() + self.body.size()
    }

    pub fn validate(&self) -> Result<()> {
        validate_circuit(&self.body, OutputScope::Open).into_result()?;
        if !self.body.is_plain() {
            return Err(Error::InvalidCircuit("exponential-sum body has quantifier or projection gates".into()));
        }
        let summed: HashSet<&Var> = self.summed_vars.iter().collect();
        if let Some(v) = self.body.universe().aux_vars().iter().find(|v| !summed.contains(v)) {
            return Err(Error::InvalidCircuit(format!("aux variable `{v}` of the body is not summed")));
        }
        Ok(())
    }

    /// Applies the summations one variable at a time to the expanded body.
    pub fn expand(&self, guards: &ExpansionGuards) -> Result<Polynomial> {
        let mut p = expand_single(&self.body, guards)?;
        for y in self.summed_vars.iter().rev() {
            p = apply_quantifier(&p, Quantifier::Sum, y, guards)?;
        }
        Ok(p)
    }

    /// Sums the expanded body over every boolean assignment explicitly.
    pub fn enumerate(&self, guards: &ExpansionGuards) -> Result<Polynomial> {
        let n = self.summed_vars.len();
        if n > 24 {
            return Err(Error::SearchTooLarge { size: 1u128 << n, cap: 1 << 24 });
        }
        let body = expand_single(&self.body, guards)?;
        let index: HashMap<&Var, usize> = self.summed_vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        // Each term survives exactly on the assignments setting all of its summed variables to 1.
        let mut pieces: Vec<(u32, Monomial, BigRational)> = Vec::new();
        for (m, c) in body.terms() {
            let mut mask = 0u32;
            let mut rest = Vec::new();
            for (v, e) in m.iter() {
                match index.get(v) {
                    Some(&i) if e > 0 => mask |= 1 << i,
                    Some(_) => {
                        return Err(Error::PreconditionViolation(format!(
                            "summed variable `{v}` has a negative exponent"
                        )))
                    }
                    None => rest.push((v.clone(), e)),
                }
            }
            pieces.push((mask, Monomial::from_pairs(rest), c.clone()));
        }
        let mut acc: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for a in 0u32..(1u32 << n) {
            for (mask, m, c) in &pieces {
                if mask & !a == 0 {
                    *acc.entry(m.clone()).or_insert_with(BigRational::zero) += c;
                }
            }
        }
        Ok(Polynomial::from_terms(acc, body.is_laurent()))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "summed_vars": self.summed_vars.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "body": self.body.to_json_value(),
        })
    }
}

/// A quantifier prefix in the alternating form `Σ y_1 Π z_1 Σ y_2 … Π z_k Σ y_{k+1}`
/// (Σ-blocks may be empty; Π-blocks are maximal runs and non-empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixBlocks {
    pub ys: Vec<Vec<Var>>,
    pub zs: Vec<Vec<Var>>,
}

impl PrefixBlocks {
    pub fn new(prefix: &[(Quantifier, Var)]) -> Self {
        let mut ys = vec![Vec::new()];
        let mut zs: Vec<Vec<Var>> = Vec::new();
        let mut last = Quantifier::Sum;
        for (q, v) in prefix {
            match q {
                Quantifier::Sum => {
                    if last == Quantifier::Prod {
                        ys.push(Vec::new());
                    }
                    ys.last_mut().unwrap().push(v.clone());
                }
                Quantifier::Prod => {
                    if last == Quantifier::Sum {
                        zs.push(Vec::new());
                    }
                    zs.last_mut().unwrap().push(v.clone());
                }
            }
            last = *q;
        }
        if last == Quantifier::Prod {
            ys.push(Vec::new());
        }
        PrefixBlocks { ys, zs }
    }

    /// `M_i = |z_1| + … + |z_i|`, with `M_0 = 0`.
    pub fn cumulative(&self) -> Vec<usize> {
        let mut m = vec![0];
        for z in &self.zs {
            m.push(m.last().unwrap() + z.len());
        }
        m
    }

    pub fn total_z(&self) -> usize {
        *self.cumulative().last().unwrap()
    }

    pub fn z_vars(&self) -> Vec<Var> {
        self.zs.iter().flatten().cloned().collect()
    }

    pub fn sum_var_count(&self) -> usize {
        self.ys.iter().map(Vec::len).sum()
    }

    /// Predicted number of summed variables after copying: `Σ_i 2^{M_i} |y_{i+1}|`.
    pub fn copied_var_count(&self) -> u128 {
        self.cumulative().iter().zip(&self.ys).map(|(&m, y)| (1u128 << m) * y.len() as u128).sum()
    }

    /// Copy of `y` (from block `i`) indexed by a bit prefix; block 0 keeps its name.
    pub fn copy_name(y: &Var, prefix: &[bool]) -> Var {
        if prefix.is_empty() {
            y.clone()
        } else {
            let bits: String = prefix.iter().map(|&b| if b { '1' } else { '0' }).collect();
            Var::from(format!("{y}#{bits}"))
        }
    }

    /// For a full fixing `a` of the z-variables, the renaming of each y-variable.
    pub fn renaming(&self, a: &[bool]) -> HashMap<Var, Var> {
        let cum = self.cumulative();
        let mut map = HashMap::new();
        for (i, block) in self.ys.iter().enumerate() {
            for y in block {
                map.insert(y.clone(), Self::copy_name(y, &a[..cum[i]]));
            }
        }
        map
    }

    /// Every copied y-variable, block by block, prefixes in lexicographic order.
    pub fn all_copies(&self) -> Vec<Var> {
        let cum = self.cumulative();
        let mut out = Vec::new();
        for (i, block) in self.ys.iter().enumerate() {
            for p in bit_vectors(cum[i]) {
                for y in block {
                    out.push(Self::copy_name(y, &p));
                }
            }
        }
        out
    }
}

/// All vectors in `{0,1}^n`, lexicographic with the first bit most significant.
pub fn bit_vectors(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..(1u64 << n)).map(move |v| (0..n).map(|i| (v >> (n - 1 - i)) & 1 == 1).collect())
}

fn check_copies(blocks: &PrefixBlocks, inner: &Circuit, guards: &ExpansionGuards) -> Result<()> {
    let mk = blocks.total_z();
    if mk > MAX_PREFIX_COPIES_LOG2 || (inner.size() as u128) << mk > guards.max_terms as u128 {
        return Err(Error::overflow(format!(
            "2^{mk} copies of a circuit of size {} exceed the limit",
            inner.size()
        )));
    }
    Ok(())
}

/// Imports one copy of `inner` with y-variables renamed and z-variables fixed to bits.
fn instantiate(
    b: &mut CircuitBuilder,
    inner: &Circuit,
    rename: &HashMap<Var, Var>,
    bits: &HashMap<Var, bool>,
) -> GateId {
    let map = b.import(inner, |b, g| match g {
        GateKind::Var(v) => {
            if let Some(&bit) = bits.get(v) {
                Some(b.constant_int(i64::from(bit)))
            } else {
                rename.get(v).map(|w| b.var(w.clone()))
            }
        }
        GateKind::Laurent { coeff, monomial } => {
            let mut pairs = Vec::new();
            for (v, e) in monomial.iter() {
                match bits.get(v) {
                    Some(false) => return Some(b.constant_int(0)),
                    Some(true) => {}
                    None => pairs.push((rename.get(v).cloned().unwrap_or_else(|| v.clone()), e)),
                }
            }
            Some(b.laurent(coeff.clone(), Monomial::from_pairs(pairs)))
        }
        _ => None,
    });
    map[inner.output().0]
}

fn product_of_copies(qc: &QuantifiedCircuit, blocks: &PrefixBlocks, fixings: &[Vec<bool>], aux: Vec<Var>) -> Circuit {
    let inner = qc.inner();
    let universe = Universe::new(inner.universe().true_vars().to_vec(), aux);
    let mut b = CircuitBuilder::new(universe).monotone(inner.is_monotone()).high_powered(inner.is_high_powered());
    let zv = blocks.z_vars();
    let mut outs = Vec::with_capacity(fixings.len());
    for a in fixings {
        let bits: HashMap<Var, bool> = zv.iter().cloned().zip(a.iter().copied()).collect();
        outs.push(instantiate(&mut b, inner, &blocks.renaming(a), &bits));
    }
    let out = b.mul_all(&outs);
    b.finish(vec![out])
}

fn require_valid_monotone(qc: &QuantifiedCircuit) -> Result<()> {
    validate_quantified(qc).into_result()?;
    if !qc.inner().is_monotone() {
        return Err(Error::PreconditionViolation("the inner circuit must be monotone".into()));
    }
    Ok(())
}

/// `Σ_Y Π_{a ∈ {0,1}^{M_k}} g(x, y_1, y_{2,a[:M_1]}, …, y_{k+1,a[:M_k]}, z = a)`.
pub fn trivial_expsum(qc: &QuantifiedCircuit, guards: &ExpansionGuards) -> Result<ExpSum> {
    validate_quantified(qc).into_result()?;
    let blocks = PrefixBlocks::new(qc.prefix());
    check_copies(&blocks, qc.inner(), guards)?;
    let all = blocks.all_copies();
    let fixings: Vec<Vec<bool>> = bit_vectors(blocks.total_z()).collect();
    let body = product_of_copies(qc, &blocks, &fixings, all.clone());
    Ok(ExpSum { summed_vars: all, body })
}

/// Facts established while converting a homogeneous quantified circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomogeneousExpSumReport {
    pub degree: i64,
    pub productions: usize,
    pub inner_x_degree: i64,
    pub quantified_size: usize,
    pub expsum_size: usize,
}

/// Exponential sum for a quantified monotone circuit computing a homogeneous
/// polynomial of degree `d ≥ 1`: one inner copy per fixing of the `k ≤ log₂ d`
/// production variables, with prefix-indexed copies of the summed variables.
pub fn homogeneous_quantified_to_expsum(
    qc: &QuantifiedCircuit,
    guards: &ExpansionGuards,
) -> Result<(ExpSum, HomogeneousExpSumReport)> {
    require_valid_monotone(qc)?;
    let true_vars = qc.inner().universe().true_set();
    let f = expand_quantified(qc, guards)?;
    if !f.is_homogeneous(&true_vars) {
        return Err(Error::PreconditionViolation("the computed polynomial is not homogeneous".into()));
    }
    let d = match f.degree(&true_vars) {
        Degree::Finite(d) if d >= 1 => d,
        other => {
            return Err(Error::PreconditionViolation(format!(
                "the computed polynomial has degree {other}; need degree at least 1"
            )))
        }
    };
    let k = qc.count_productions();
    if k >= 63 || (1i64 << k) > d {
        return Err(Error::InvariantBreach(format!("{k} production gates but degree only {d}")));
    }
    let g = expand_single(qc.inner(), guards)?;
    let gx = g.degree(&true_vars).finite().unwrap_or(0);
    if (1i64 << k) * gx != d {
        return Err(Error::InvariantBreach(format!("degree {d} is not 2^{k} times the inner x-degree {gx}")));
    }
    let es = trivial_expsum(qc, guards)?;
    let report = HomogeneousExpSumReport {
        degree: d,
        productions: k,
        inner_x_degree: gx,
        quantified_size: qc.size(),
        expsum_size: es.size(),
    };
    Ok((es, report))
}

/// `f(x) = Σ_b A(b) · h(x, Y₁ = b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedExpSum {
    pub y1: Vec<Var>,
    pub h: Circuit,
    /// Indexed by the assignment to `y1` read as a binary number, first variable most significant.
    pub a_table: Vec<BigRational>,
    /// The z-fixings whose inner copy depends on x.
    pub active: Vec<Vec<bool>>,
    pub degree: Degree,
    pub sum_vars: usize,
}

impl PrunedExpSum {
    /// `Σ_b A_table[b] · expand(h)(x, Y₁ = b)`.
    pub fn reconstruct(&self, guards: &ExpansionGuards) -> Result<Polynomial> {
        let h = expand_single(&self.h, guards)?;
        let mut acc = Polynomial::zero();
        for (idx, bits) in bit_vectors(self.y1.len()).enumerate() {
            let w = &self.a_table[idx];
            if w.is_zero() {
                continue;
            }
            let hb = h.substitute_bits(self.y1.iter().zip(bits))?;
            acc = acc.add(&hb.scale(w));
        }
        Ok(acc)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let table: serde_json::Map<String, serde_json::Value> = bit_vectors(self.y1.len())
            .zip(&self.a_table)
            .map(|(bits, v)| {
                let key: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                (key, serde_json::Value::String(format_rational(v)))
            })
            .collect();
        serde_json::json!({
            "Y1": self.y1.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "h": self.h.to_json_value(),
            "A_table": table,
            "active_fixings": self.active.iter()
                .map(|a| a.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
                .collect::<Vec<_>>(),
        })
    }
}

/// Largest `|Y₁|` for which the A table is materialized.
pub const MAX_Y1: usize = 20;

/// Keeps only the inner copies whose x-degree can be positive and folds the
/// rest into an explicit table `A` over the surviving summed variables.
pub fn pruned_expsum(qc: &QuantifiedCircuit, guards: &ExpansionGuards) -> Result<PrunedExpSum> {
    require_valid_monotone(qc)?;
    let inner = qc.inner();
    let blocks = PrefixBlocks::new(qc.prefix());
    check_copies(&blocks, inner, guards)?;
    let true_vars = inner.universe().true_set();
    let f = expand_quantified(qc, guards)?;
    let g = expand_single(inner, guards)?;
    let zv = blocks.z_vars();
    let ys: Vec<Var> = blocks.ys.iter().flatten().cloned().collect();

    let mut active = Vec::new();
    for a in bit_vectors(blocks.total_z()) {
        let fixed = g.substitute_bits(zv.iter().zip(a.iter().copied()).chain(ys.iter().map(|y| (y, true))))?;
        if matches!(fixed.degree(&true_vars), Degree::Finite(e) if e > 0) {
            active.push(a);
        }
    }
    let degree = f.degree(&true_vars);
    if let Degree::Finite(d) = degree {
        if active.len() as i64 > d {
            return Err(Error::InvariantBreach(format!(
                "{} z-fixings depend on x but the degree is {d}",
                active.len()
            )));
        }
    }

    let mut y1_set = BTreeSet::new();
    for a in &active {
        y1_set.extend(blocks.renaming(a).into_values());
    }
    let y1: Vec<Var> = blocks.all_copies().into_iter().filter(|v| y1_set.contains(v)).collect();
    if y1.len() > MAX_Y1 {
        return Err(Error::SearchTooLarge { size: 1u128 << y1.len(), cap: 1u128 << MAX_Y1 });
    }
    let h = product_of_copies(qc, &blocks, &active, y1.clone());

    let g0 = g.substitute_bits(std::iter::empty())?;
    let zero_x: Vec<(Var, BigRational)> = true_vars.iter().map(|v| (v.clone(), BigRational::zero())).collect();
    let mut g0 = g0;
    for (v, c) in &zero_x {
        g0 = g0.substitute_scalar(v, c)?;
    }
    let ctx = TableCtx { blocks: &blocks, cum: blocks.cumulative(), active: active.iter().collect(), g0: &g0, zv: &zv };
    let a_table = bit_vectors(y1.len())
        .map(|b| {
            let mut env: HashMap<Var, bool> = y1.iter().cloned().zip(b).collect();
            ctx.node(0, &mut Vec::new(), &mut env)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PrunedExpSum { y1, h, a_table, active, degree, sum_vars: blocks.sum_var_count() })
}

struct TableCtx<'a> {
    blocks: &'a PrefixBlocks,
    cum: Vec<usize>,
    active: HashSet<&'a Vec<bool>>,
    /// The inner polynomial at x = 0.
    g0: &'a Polynomial,
    zv: &'a [Var],
}

impl TableCtx<'_> {
    /// Contribution of the subtree below bit prefix `p` at level `i`, summing
    /// y-copies not already fixed in `env` and taking products over z-bits.
    fn node(&self, i: usize, p: &mut Vec<bool>, env: &mut HashMap<Var, bool>) -> Result<BigRational> {
        let block: Vec<Var> = self.blocks.ys[i].iter().map(|y| PrefixBlocks::copy_name(y, p)).collect();
        let free: Vec<Var> = block.iter().filter(|v| !env.contains_key(*v)).cloned().collect();
        let mut total = BigRational::zero();
        for choice in bit_vectors(free.len()) {
            for (v, &b) in free.iter().zip(&choice) {
                env.insert(v.clone(), b);
            }
            total += self.children(i, p, env)?;
        }
        for v in &free {
            env.remove(v);
        }
        Ok(total)
    }

    fn children(&self, i: usize, p: &mut Vec<bool>, env: &mut HashMap<Var, bool>) -> Result<BigRational> {
        if i == self.blocks.zs.len() {
            if self.active.contains(p) {
                return Ok(BigRational::one());
            }
            let rename = self.blocks.renaming(p);
            let mut bits: Vec<(&Var, bool)> = self.zv.iter().zip(p.iter().copied()).collect();
            for (y, copy) in &rename {
                bits.push((y, env[copy]));
            }
            let v = self.g0.substitute_bits(bits)?;
            return v.as_constant().ok_or_else(|| {
                Error::InvariantBreach("inner polynomial at x = 0 is not constant after fixing aux".into())
            });
        }
        let width = self.cum[i + 1] - self.cum[i];
        let mut prod = BigRational::one();
        for ext in bit_vectors(width) {
            let len = p.len();
            p.extend(ext);
            let v = self.node(i + 1, p, env);
            p.truncate(len);
            prod *= v?;
            if prod.is_zero() {
                break;
            }
        }
        Ok(prod)
    }
}

// ---------------------------------------------------------------------------
// Permanent

pub fn perm_aux_var(i: usize, j: usize) -> Var {
    Var::from(format!("y{i}_{j}"))
}

/// The permanent via projections, with every stage `P_0, …, P_n` as an output.
pub fn build_perm_projection_stages(n: usize) -> Result<Circuit> {
    if n == 0 || n > PERMANENT_ORACLE_CAP {
        return Err(Error::OracleTooLarge { n, cap: PERMANENT_ORACLE_CAP });
    }
    let mut tv = Vec::new();
    let mut av = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            tv.push(perm_var(i, j));
            av.push(perm_aux_var(i, j));
        }
    }
    let mut b = CircuitBuilder::new(Universe::new(tv, av));
    // P_0 = Π_i Σ_j y_ij x_ij
    let rows: Vec<GateId> = (1..=n)
        .map(|i| {
            let terms: Vec<GateId> = (1..=n)
                .map(|j| {
                    let y = b.var(perm_aux_var(i, j));
                    let x = b.var(perm_var(i, j));
                    b.mul(y, x)
                })
                .collect();
            b.add_all(&terms)
        })
        .collect();
    let mut stages = vec![b.mul_all(&rows)];
    // P_j = Σ_i proj_{y_1j → e_i(1)} ⋯ proj_{y_nj → e_i(n)} P_{j-1}
    for j in 1..=n {
        let prev = *stages.last().unwrap();
        let branches: Vec<GateId> = (1..=n)
            .map(|i| (1..=n).rev().fold(prev, |g, r| b.project(perm_aux_var(r, j), r == i, g)))
            .collect();
        stages.push(b.add_all(&branches));
    }
    Ok(b.finish(stages))
}

/// The permanent of an `n x n` variable matrix by a monotone circuit with projections.
pub fn build_perm_projection_circuit(n: usize) -> Result<Circuit> {
    let c = build_perm_projection_stages(n)?;
    let out = *c.outputs().last().unwrap();
    Ok(c.with_outputs(vec![out]))
}

// ---------------------------------------------------------------------------
// Supports

pub type ExponentSet = BTreeSet<Vec<i64>>;

fn add_vec(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_vec(a: &[i64], b: &[i64]) -> Option<Vec<i64>> {
    let d: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    d.iter().all(|&x| x >= 0).then_some(d)
}

/// Whether `S = A + B` for exponent sets `A, B ⊆ ℕⁿ`, neither equal to `{0}`.
pub fn is_product_decomposable(s: &ExponentSet) -> Result<bool> {
    Ok(product_decomposition(s)?.is_some())
}

/// A witness `(A, B)` for [`is_product_decomposable`].
pub fn product_decomposition(s: &ExponentSet) -> Result<Option<(ExponentSet, ExponentSet)>> {
    if s.len() > DECOMPOSABLE_CAP {
        return Err(Error::SearchTooLarge { size: s.len() as u128, cap: DECOMPOSABLE_CAP as u128 });
    }
    let Some(smin) = s.iter().next() else { return Ok(None) };
    if smin.iter().any(|&e| e < 0) || s.iter().any(|v| v.len() != smin.len()) {
        return Err(Error::PreconditionViolation("exponent vectors must be non-negative and of equal length".into()));
    }
    let dim = smin.len();
    let origin = vec![0i64; dim];
    let is_trivial = |x: &ExponentSet| x.len() == 1 && x.contains(&origin);
    // The lexicographic minimum of S splits as a* + b* with a*, b* the minima of A and B.
    let box_size: u128 = smin.iter().map(|&e| e as u128 + 1).product();
    if box_size > 1 << 20 {
        return Err(Error::SearchTooLarge { size: box_size, cap: 1 << 20 });
    }
    let mut bstar = origin.clone();
    loop {
        let astar = sub_vec(smin, &bstar).expect("b* stays below the minimum");
        let cands: Vec<Vec<i64>> = s.iter().filter_map(|x| sub_vec(x, &astar)).filter(|d| *d != bstar).collect();
        for mask in 0u32..(1u32 << cands.len()) {
            let mut bset: ExponentSet = BTreeSet::from([bstar.clone()]);
            bset.extend((0..cands.len()).filter(|i| mask >> i & 1 == 1).map(|i| cands[i].clone()));
            if is_trivial(&bset) {
                continue;
            }
            // Largest A with A + B ⊆ S.
            let aset: ExponentSet = s
                .iter()
                .filter_map(|x| sub_vec(x, &bstar))
                .filter(|a| bset.iter().all(|b| s.contains(&add_vec(a, b))))
                .collect();
            if aset.is_empty() || is_trivial(&aset) {
                continue;
            }
            let sum: ExponentSet = aset.iter().flat_map(|a| bset.iter().map(move |b| add_vec(a, b))).collect();
            if &sum == s {
                return Ok(Some((aset, bset)));
            }
        }
        // next b* in the box [0, smin]
        let mut i = 0;
        loop {
            if i == dim {
                return Ok(None);
            }
            if bstar[i] < smin[i] {
                bstar[i] += 1;
                break;
            }
            bstar[i] = 0;
            i += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportReport {
    pub f_support: Vec<Vec<i64>>,
    pub g_at_one_support: Vec<Vec<i64>>,
    pub supports_equal: bool,
    pub f_is_zero: bool,
    /// `None` when the support is too large to search.
    pub f_support_decomposable: Option<bool>,
    /// False only when the support is not decomposable yet the supports differ.
    pub consistent: bool,
}

/// Compares `supp(f)` with `supp(g(x, 1̄))` for `f` the quantified polynomial
/// and `g` its inner circuit.
pub fn support_preservation_check(qc: &QuantifiedCircuit, guards: &ExpansionGuards) -> Result<SupportReport> {
    require_valid_monotone(qc)?;
    let tv = qc.inner().universe().true_vars().to_vec();
    let f = expand_quantified(qc, guards)?;
    let g = expand_single(qc.inner(), guards)?;
    let aux: VarSet = qc.inner().universe().aux_set();
    let g1 = g.substitute_bits(aux.iter().map(|v| (v, true)))?;
    let fs = y_support(&f, &tv);
    let gs = y_support(&g1, &tv);
    let equal = fs == gs;
    let decomposable = match is_product_decomposable(&fs) {
        Ok(b) => Some(b),
        Err(Error::SearchTooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(SupportReport {
        f_is_zero: f.is_zero(),
        consistent: equal || f.is_zero() || decomposable != Some(false),
        f_support: fs.into_iter().collect(),
        g_at_one_support: gs.into_iter().collect(),
        supports_equal: equal,
        f_support_decomposable: decomposable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{validate, AnyCircuit};
    use crate::poly::{permanent_oracle, rat, var_set};
    use crate::semantics::expand;

    fn g() -> ExpansionGuards {
        ExpansionGuards::default()
    }

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn set(vs: &[&[i64]]) -> ExponentSet {
        vs.iter().map(|x| x.to_vec()).collect()
    }

    #[test]
    fn lowering_examples() {
        let u = Universe::from_names(["x"], ["z"]);
        let mut b = CircuitBuilder::new(u.clone());
        let x = b.var("x");
        let z = b.var("z");
        let a = b.add(x, z);
        let s = b.sum("z", a);
        let p = b.prod("z", a);
        let c = b.finish(vec![s, p]);
        let l = lower_to_projections(&c);
        assert!(!l.has_gate(|g| matches!(g, GateKind::Sum { .. } | GateKind::Prod { .. })));
        assert_eq!(l.size(), c.size() + 4);
        assert_eq!(expand(&l, &g()).unwrap(), expand(&c, &g()).unwrap());
        assert!(matches!(l.gate(l.outputs()[0]), GateKind::Add(..)));
        assert!(matches!(l.gate(l.outputs()[1]), GateKind::Mul(..)));

        let mut b = CircuitBuilder::new(u);
        let x = b.var("x");
        let c = b.finish(vec![x]);
        assert_eq!(lower_to_projections(&c), c);
    }

    #[test]
    fn hom_examples() {
        // x + xy + 1
        let u = Universe::from_names(["x", "y"], []);
        let mut b = CircuitBuilder::new(u);
        let x = b.var("x");
        let y = b.var("y");
        let one = b.constant_int(1);
        let xy = b.mul(x, y);
        let s = b.add(x, xy);
        let o = b.add(s, one);
        let c = b.finish(vec![o]);
        let tv = var_set(["x", "y"]);
        let f = expand_single(&c, &g()).unwrap();
        for k in 0..=3 {
            let h = extract_hom_circuit(&c, k, &g()).unwrap();
            assert!(validate(AnyCircuit::Plain(&h)).is_valid());
            assert_eq!(expand_single(&h, &g()).unwrap(), f.hom_component(k as i64, &tv), "k = {k}");
        }
        let h2 = expand_single(&extract_hom_circuit(&c, 2, &g()).unwrap(), &g()).unwrap();
        assert_eq!(h2, Polynomial::var("x").mul(&Polynomial::var("y")).unwrap());
        let h0 = expand_single(&extract_hom_circuit(&c, 0, &g()).unwrap(), &g()).unwrap();
        assert_eq!(h0, Polynomial::one());

        let perm = build_perm_projection_circuit(2).unwrap();
        let hp = extract_hom_circuit(&perm, 2, &g()).unwrap();
        assert_eq!(expand_single(&hp, &g()).unwrap(), permanent_oracle(2).unwrap());

        let mut b = CircuitBuilder::new(Universe::from_names(["x"], ["z"]));
        let x = b.var("x");
        let s = b.sum("z", x);
        assert!(matches!(
            extract_hom_circuit(&b.finish(vec![s]), 1, &g()),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn perm_examples() {
        for n in 1..=4 {
            let c = build_perm_projection_circuit(n).unwrap();
            assert!(validate(AnyCircuit::Plain(&c)).is_valid(), "n = {n}");
            assert_eq!(expand_single(&c, &g()).unwrap(), permanent_oracle(n).unwrap(), "n = {n}");
        }
        let p1 = expand_single(&build_perm_projection_circuit(1).unwrap(), &g()).unwrap();
        assert_eq!(p1, Polynomial::var(perm_var(1, 1)));
        assert_eq!(expand_single(&build_perm_projection_circuit(3).unwrap(), &g()).unwrap().len(), 6);
        assert!(matches!(build_perm_projection_circuit(7), Err(Error::OracleTooLarge { n: 7, cap: 6 })));
        for n in 2..=6 {
            let s = build_perm_projection_circuit(n).unwrap().size();
            assert!(s <= 40 * n * n * n, "n = {n}: size {s}");
        }
    }

    #[test]
    fn perm_stage_supports() {
        let n = 3;
        let c = build_perm_projection_stages(n).unwrap();
        let polys = expand(&c, &g()).unwrap();
        let xs: Vec<Var> = (1..=n).flat_map(|i| (1..=n).map(move |j| perm_var(i, j))).collect();
        for (j, p) in polys.iter().enumerate() {
            for e in y_support(p, &xs) {
                // exactly one variable per row; at most one per column among the first j
                for row in 0..n {
                    assert_eq!(e[row * n..(row + 1) * n].iter().sum::<i64>(), 1);
                }
                for col in 0..j {
                    assert!((0..n).map(|r| e[r * n + col]).sum::<i64>() <= 1);
                }
            }
        }
    }

    fn quantified(prefix: &[(Quantifier, &str)], build: impl FnOnce(&mut CircuitBuilder) -> GateId) -> QuantifiedCircuit {
        let aux: Vec<&str> = prefix.iter().map(|(_, n)| *n).collect();
        let mut b = CircuitBuilder::new(Universe::from_names(["x", "x1", "x2"], aux));
        let o = build(&mut b);
        QuantifiedCircuit::new(prefix.iter().map(|(q, n)| (*q, v(n))).collect(), b.finish(vec![o]))
    }

    #[test]
    fn trivial_expsum_toy_prefix_has_eleven_vars() {
        use Quantifier::*;
        let prefix = [(Sum, "y1"), (Prod, "z1"), (Sum, "y2"), (Prod, "z2"), (Prod, "z3"), (Sum, "y3")];
        let qc = quantified(&prefix, |b| {
            let mut acc = b.var("x");
            for (_, n) in prefix {
                let t = b.var(n);
                let one = b.constant_int(1);
                let t = b.add(t, one);
                acc = b.mul(acc, t);
            }
            acc
        });
        let blocks = PrefixBlocks::new(qc.prefix());
        assert_eq!(blocks.cumulative(), vec![0, 1, 3]);
        assert_eq!(blocks.copied_var_count(), 11);
        let es = trivial_expsum(&qc, &g()).unwrap();
        assert_eq!(es.summed_vars.len(), 11);
        es.validate().unwrap();
        let mut small = g();
        small.max_total_degree = 200;
        assert_eq!(es.expand(&small).unwrap(), expand_quantified(&qc, &small).unwrap());
    }

    #[test]
    fn trivial_expsum_all_sum_keeps_inner() {
        use Quantifier::*;
        let qc = quantified(&[(Sum, "y1"), (Sum, "y2")], |b| {
            let y = b.var("y1");
            let x = b.var("x1");
            let a = b.mul(y, x);
            let y2 = b.var("y2");
            let x2 = b.var("x2");
            let c = b.mul(y2, x2);
            b.add(a, c)
        });
        let es = trivial_expsum(&qc, &g()).unwrap();
        assert_eq!(es.summed_vars, vec![v("y1"), v("y2")]);
        assert_eq!(es.body.size(), qc.inner().size());
        assert_eq!(es.expand(&g()).unwrap(), expand_quantified(&qc, &g()).unwrap());
        assert_eq!(es.enumerate(&g()).unwrap(), expand_quantified(&qc, &g()).unwrap());
    }

    #[test]
    fn product_of_exp_sums() {
        use Quantifier::*;
        // Π_z Σ_y (y x1 + z x2 + 1)
        let qc = quantified(&[(Prod, "z"), (Sum, "y")], |b| {
            let y = b.var("y");
            let x1 = b.var("x1");
            let z = b.var("z");
            let x2 = b.var("x2");
            let a = b.mul(y, x1);
            let c = b.mul(z, x2);
            let s = b.add(a, c);
            let one = b.constant_int(1);
            b.add(s, one)
        });
        let es = trivial_expsum(&qc, &g()).unwrap();
        assert_eq!(es.summed_vars, vec![v("y#0"), v("y#1")]);
        let want = expand_quantified(&qc, &g()).unwrap();
        assert_eq!(es.expand(&g()).unwrap(), want);
        assert_eq!(es.enumerate(&g()).unwrap(), want);
    }

    #[test]
    fn homogeneous_examples() {
        use Quantifier::*;
        let qc = quantified(&[(Sum, "y")], |b| {
            let y = b.var("y");
            let x1 = b.var("x1");
            let x2 = b.var("x2");
            let m = b.mul(y, x1);
            b.mul(m, x2)
        });
        let (es, rep) = homogeneous_quantified_to_expsum(&qc, &g()).unwrap();
        assert_eq!(es.summed_vars, vec![v("y")]);
        assert_eq!(rep.productions, 0);
        assert_eq!(es.expand(&g()).unwrap(), Polynomial::var("x1").mul(&Polynomial::var("x2")).unwrap());

        let qc = quantified(&[(Prod, "z"), (Sum, "y")], |b| {
            let y = b.var("y");
            let x = b.var("x");
            b.mul(y, x)
        });
        let (es, rep) = homogeneous_quantified_to_expsum(&qc, &g()).unwrap();
        assert_eq!(es.summed_vars.len(), 2);
        assert_eq!((rep.degree, rep.productions, rep.inner_x_degree), (2, 1, 1));
        let want = expand_quantified(&qc, &g()).unwrap();
        assert_eq!(want, Polynomial::var("x").mul(&Polynomial::var("x")).unwrap());
        assert_eq!(es.expand(&g()).unwrap(), want);
        assert!(es.size() <= EXPSUM_SIZE_CONSTANT * qc.size() * 2);

        let qc = quantified(&[(Sum, "y")], |b| {
            let y = b.var("y");
            let x = b.var("x");
            b.add(y, x)
        });
        assert!(matches!(homogeneous_quantified_to_expsum(&qc, &g()), Err(Error::PreconditionViolation(_))));
    }

    #[test]
    fn pruned_examples() {
        use Quantifier::*;
        // Π_z1 Π_z2 Σ_y (x·z1·z2·y + y + 1): only z = 11 depends on x.
        let qc = quantified(&[(Prod, "z1"), (Prod, "z2"), (Sum, "y")], |b| {
            let x = b.var("x");
            let z1 = b.var("z1");
            let z2 = b.var("z2");
            let y = b.var("y");
            let m = b.mul(x, z1);
            let m = b.mul(m, z2);
            let m = b.mul(m, y);
            let s = b.add(m, y);
            let one = b.constant_int(1);
            b.add(s, one)
        });
        let pe = pruned_expsum(&qc, &g()).unwrap();
        assert_eq!(pe.active, vec![vec![true, true]]);
        assert_eq!(pe.y1, vec![v("y#11")]);
        let f = expand_quantified(&qc, &g()).unwrap();
        assert_eq!(pe.reconstruct(&g()).unwrap(), f);
        // the three x-free copies each sum to 1 + 2 = 3
        assert_eq!(pe.a_table, vec![rat(27), rat(27)]);

        // z-independent inner: A is a pure scalar factor
        let qc = quantified(&[(Sum, "y"), (Prod, "z")], |b| {
            let two = b.constant_int(2);
            let y = b.var("y");
            b.add(two, y)
        });
        let pe = pruned_expsum(&qc, &g()).unwrap();
        assert!(pe.y1.is_empty());
        assert_eq!(pe.a_table, vec![rat(13)]);
        assert_eq!(pe.reconstruct(&g()).unwrap(), expand_quantified(&qc, &g()).unwrap());
    }

    #[test]
    fn decomposable_examples() {
        assert!(!is_product_decomposable(&set(&[&[1, 0], &[0, 1]])).unwrap());
        let (a, b) = product_decomposition(&set(&[&[1, 1], &[1, 2], &[2, 1], &[2, 2]])).unwrap().unwrap();
        assert_eq!(a.len() * b.len(), 4);
        assert!(!is_product_decomposable(&set(&[&[0, 0]])).unwrap());
        assert!(is_product_decomposable(&set(&[&[2, 0]])).unwrap());
        assert!(!is_product_decomposable(&set(&[&[1, 0]])).unwrap());
        assert!(is_product_decomposable(&set(&[&[1, 1], &[0, 2]])).unwrap());
        let big: ExponentSet = (0..13).map(|i| vec![i]).collect();
        assert!(matches!(is_product_decomposable(&big), Err(Error::SearchTooLarge { .. })));
    }

    #[test]
    fn support_check_examples() {
        use Quantifier::*;
        let qc = quantified(&[(Sum, "y")], |b| {
            let y = b.var("y");
            let x = b.var("x1");
            let m = b.mul(y, x);
            let x2 = b.var("x2");
            b.add(m, x2)
        });
        let r = support_preservation_check(&qc, &g()).unwrap();
        assert!(r.supports_equal && r.consistent);

        // Π_z (z x1 + x2) = x2 (x1 + x2)
        let qc = quantified(&[(Prod, "z")], |b| {
            let z = b.var("z");
            let x = b.var("x1");
            let m = b.mul(z, x);
            let x2 = b.var("x2");
            b.add(m, x2)
        });
        let r = support_preservation_check(&qc, &g()).unwrap();
        assert!(!r.supports_equal);
        assert_eq!(r.f_support_decomposable, Some(true));
        assert!(r.consistent);

        let qc = quantified(&[(Prod, "z")], |b| {
            let z = b.var("z");
            let x = b.var("x1");
            let x2 = b.var("x2");
            let m = b.mul(z, x);
            b.mul(m, x2)
        });
        let r = support_preservation_check(&qc, &g()).unwrap();
        assert!(r.f_is_zero && r.consistent);
    }
}
