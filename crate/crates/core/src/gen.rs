//! Seeded random instances for property checks and the acceptance suite.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abp::{u_var, v_var, SuccinctAbp};
use crate::circuit::{Circuit, CircuitBuilder, GateId, QuantifiedCircuit, Quantifier, Universe};
use crate::geometry::PointSet;
use crate::poly::Var;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn x_vars(n: usize) -> Vec<Var> {
    (1..=n).map(|i| Var::from(format!("x{i}"))).collect()
}

pub fn z_vars(n: usize) -> Vec<Var> {
    (1..=n).map(|i| Var::from(format!("z{i}"))).collect()
}

#[derive(Clone)]
struct Node {
    id: GateId,
    deg: i64,
    free: BTreeSet<Var>,
}

/// Shape of a random monotone DAG.
#[derive(Debug, Clone)]
pub struct DagParams {
    pub gates: usize,
    /// Upper bound on the total degree of any gate.
    pub max_degree: i64,
    /// Whether projection gates on auxiliary variables may appear.
    pub projections: bool,
}

fn leaf(b: &mut CircuitBuilder, rng: &mut Rng64, vars: &[Var]) -> Node {
    if vars.is_empty() || rng.random_bool(0.2) {
        let c = rng.random_range(0..=2);
        return Node { id: b.constant_int(c), deg: 0, free: BTreeSet::new() };
    }
    let v = vars.choose(rng).unwrap().clone();
    let free = if b.universe().is_aux(&v) { BTreeSet::from([v.clone()]) } else { BTreeSet::new() };
    Node { id: b.var(v), deg: 1, free }
}

fn pick<'a>(rng: &mut Rng64, nodes: &'a [Node]) -> &'a Node {
    if rng.random_bool(0.5) {
        &nodes[nodes.len() - 1 - rng.random_range(0..nodes.len().min(3))]
    } else {
        nodes.choose(rng).unwrap()
    }
}

fn random_dag(b: &mut CircuitBuilder, rng: &mut Rng64, vars: &[Var], p: &DagParams) -> Node {
    let mut nodes: Vec<Node> = (0..2).map(|_| leaf(b, rng, vars)).collect();
    for _ in 0..p.gates {
        let roll = rng.random_range(0..100);
        let node = if roll < 15 {
            leaf(b, rng, vars)
        } else if roll < 50 {
            let (l, r) = (pick(rng, &nodes).clone(), pick(rng, &nodes).clone());
            Node { id: b.add(l.id, r.id), deg: l.deg.max(r.deg), free: &l.free | &r.free }
        } else if roll < 85 {
            let (l, r) = (pick(rng, &nodes).clone(), pick(rng, &nodes).clone());
            if l.deg + r.deg > p.max_degree {
                Node { id: b.add(l.id, r.id), deg: l.deg.max(r.deg), free: &l.free | &r.free }
            } else {
                Node { id: b.mul(l.id, r.id), deg: l.deg + r.deg, free: &l.free | &r.free }
            }
        } else {
            let c = pick(rng, &nodes).clone();
            match c.free.iter().next().cloned().filter(|_| p.projections) {
                Some(z) => {
                    let mut free = c.free.clone();
                    free.remove(&z);
                    Node { id: b.project(z, rng.random_bool(0.5), c.id), deg: c.deg, free }
                }
                None => leaf(b, rng, vars),
            }
        };
        nodes.push(node);
    }
    // join the last few gates so the output depends on most of the DAG
    let tail: Vec<Node> = nodes.iter().rev().take(3).cloned().collect();
    let mut out = tail[0].clone();
    for n in &tail[1..] {
        out = Node { id: b.add(out.id, n.id), deg: out.deg.max(n.deg), free: &out.free | &n.free };
    }
    out
}

/// A monotone circuit with projection gates over `x1..x{n_true}` and
/// `z1..z{n_aux}`, closed by projecting every auxiliary variable left free.
/// The result is pruned to the gates reachable from its output.
pub fn random_projection_circuit(rng: &mut Rng64, n_true: usize, n_aux: usize, p: &DagParams) -> Circuit {
    let (xs, zs) = (x_vars(n_true), z_vars(n_aux));
    let mut b = CircuitBuilder::new(Universe::new(xs.clone(), zs.clone()));
    let vars: Vec<Var> = xs.into_iter().chain(zs).collect();
    let out = random_dag(&mut b, rng, &vars, p);
    let mut id = out.id;
    for z in out.free {
        id = b.project(z, rng.random_bool(0.5), id);
    }
    b.finish(vec![id]).pruned()
}

#[derive(Debug, Clone)]
pub struct QuantifiedParams {
    pub n_true: usize,
    pub prefix_len: usize,
    pub max_productions: usize,
    pub inner: DagParams,
}

fn random_prefix(rng: &mut Rng64, zs: &[Var], max_productions: usize) -> Vec<(Quantifier, Var)> {
    let mut order = zs.to_vec();
    order.shuffle(rng);
    let mut prods = 0;
    order
        .into_iter()
        .map(|z| {
            let q = if prods < max_productions && rng.random_bool(0.4) {
                prods += 1;
                Quantifier::Prod
            } else {
                Quantifier::Sum
            };
            (q, z)
        })
        .collect()
}

/// A quantifier prefix over all auxiliary variables applied to a plain monotone circuit.
pub fn random_quantified(rng: &mut Rng64, p: &QuantifiedParams) -> QuantifiedCircuit {
    let (xs, zs) = (x_vars(p.n_true), z_vars(p.prefix_len));
    let mut b = CircuitBuilder::new(Universe::new(xs.clone(), zs.clone()));
    let vars: Vec<Var> = xs.into_iter().chain(zs.iter().cloned()).collect();
    let inner = DagParams { projections: false, ..p.inner.clone() };
    let out = random_dag(&mut b, rng, &vars, &inner);
    let inner = b.finish(vec![out.id]).pruned();
    QuantifiedCircuit::new(random_prefix(rng, &zs, p.max_productions), inner)
}

/// A quantified circuit whose inner polynomial is a product of `degree`
/// linear forms in x, each with a pure x term and some auxiliary-weighted
/// terms. Every fixing of the auxiliary variables leaves it non-zero and
/// homogeneous, so the quantified polynomial is homogeneous too.
pub fn random_homogeneous_quantified(
    rng: &mut Rng64,
    n_true: usize,
    prefix_len: usize,
    max_productions: usize,
    degree: usize,
) -> QuantifiedCircuit {
    let (xs, zs) = (x_vars(n_true), z_vars(prefix_len));
    let mut b = CircuitBuilder::new(Universe::new(xs.clone(), zs.clone()));
    let mut factors = Vec::with_capacity(degree);
    for _ in 0..degree.max(1) {
        let x0 = b.var(xs.choose(rng).unwrap().clone());
        let mut terms = vec![x0];
        for _ in 0..rng.random_range(0..=2) {
            let x = b.var(xs.choose(rng).unwrap().clone());
            let mut t = x;
            if !zs.is_empty() {
                for _ in 0..rng.random_range(1..=2) {
                    let z = b.var(zs.choose(rng).unwrap().clone());
                    t = b.mul(t, z);
                }
            }
            if rng.random_bool(0.3) {
                let c = b.constant_int(2);
                t = b.mul(c, t);
            }
            terms.push(t);
        }
        factors.push(b.add_all(&terms));
    }
    let out = b.mul_all(&factors);
    let inner = b.finish(vec![out]);
    QuantifiedCircuit::new(random_prefix(rng, &zs, max_productions), inner)
}

/// A monotone encoding `B(u, v, x)` given as a sum of a few terms, each a
/// positive constant times some vertex bits and at most one x variable.
pub fn random_abp(rng: &mut Rng64, r: usize, ell: usize, n_x: usize) -> SuccinctAbp {
    let xs = x_vars(n_x);
    let bits: Vec<Var> = (1..=r).map(u_var).chain((1..=r).map(v_var)).collect();
    let tv: Vec<Var> = bits.iter().cloned().chain(xs.iter().cloned()).collect();
    let mut b = CircuitBuilder::new(Universe::new(tv, vec![]));
    let mut terms = Vec::new();
    for _ in 0..rng.random_range(1..=4) {
        let mut factors = vec![b.constant_int(rng.random_range(1..=2))];
        for v in &bits {
            if rng.random_bool(0.25) {
                factors.push(b.var(v.clone()));
            }
        }
        if rng.random_bool(0.7) {
            factors.push(b.var(xs.choose(rng).unwrap().clone()));
        }
        terms.push(b.mul_all(&factors));
    }
    let out = b.add_all(&terms);
    let s: Vec<bool> = (0..r).map(|_| rng.random_bool(0.5)).collect();
    let t: Vec<bool> = (0..r).map(|_| rng.random_bool(0.5)).collect();
    SuccinctAbp::new(b.finish(vec![out]), r, s, t, ell).expect("generated program is well formed")
}

/// Up to `max_points` distinct points with coordinates in `[-coord, coord]`.
pub fn random_point_set(rng: &mut Rng64, dim: usize, max_points: usize, coord: i64) -> PointSet {
    let n = rng.random_range(1..=max_points.max(1));
    PointSet::new(dim, (0..n).map(|_| (0..dim).map(|_| rng.random_range(-coord..=coord)).collect()))
        .expect("dimension is uniform")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{validate, validate_quantified, AnyCircuit, OutputScope};

    #[test]
    fn generated_instances_validate() {
        let mut r = rng(1);
        let dag = DagParams { gates: 12, max_degree: 4, projections: true };
        for _ in 0..50 {
            let c = random_projection_circuit(&mut r, 3, 2, &dag);
            validate(AnyCircuit::Plain(&c)).into_result().unwrap();
            assert!(crate::circuit::validate_circuit(&c, OutputScope::Closed).is_valid());
            let qc = random_quantified(
                &mut r,
                &QuantifiedParams { n_true: 2, prefix_len: 4, max_productions: 2, inner: dag.clone() },
            );
            validate_quantified(&qc).into_result().unwrap();
            let h = random_homogeneous_quantified(&mut r, 2, 3, 2, 2);
            validate_quantified(&h).into_result().unwrap();
            random_abp(&mut r, 2, 3, 2);
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let dag = DagParams { gates: 10, max_degree: 4, projections: true };
        let a = random_projection_circuit(&mut rng(9), 2, 2, &dag);
        let b = random_projection_circuit(&mut rng(9), 2, 2, &dag);
        assert_eq!(a.to_json(), b.to_json());
    }
}
