use std::collections::{BTreeMap, BTreeSet};

use monocircuit::abp::{abp_expand, edge_support_violations};
use monocircuit::circuit::{validate, AnyCircuit, CircuitFile};
use monocircuit::gen::{self, DagParams, QuantifiedParams};
use monocircuit::geometry::{
    convex_dependency, convexly_independent, hull_vertices_2d, shadow_vertex_count_points, support_points,
    PointSet, ShadowMatrix,
};
use monocircuit::oracle;
use monocircuit::poly::{rat, Degree};
use monocircuit::semantics::{evaluate, expand_quantified, expand_single, shadow_substitute, y_support};
use monocircuit::transforms::{
    extract_hom_circuit, lower_to_projections, pruned_expsum, trivial_expsum, PrefixBlocks,
    EXPSUM_SIZE_CONSTANT,
};
use monocircuit::{ExpansionGuards, Polynomial, Var};
use proptest::prelude::*;
use rand::Rng;

fn g() -> ExpansionGuards {
    ExpansionGuards::default()
}

fn dag(gates: usize) -> DagParams {
    DagParams { gates, max_degree: 4, projections: true }
}

fn quantified(seed: u64, prefix: usize, prods: usize) -> monocircuit::QuantifiedCircuit {
    let mut r = gen::rng(seed);
    let p = QuantifiedParams {
        n_true: 2,
        prefix_len: prefix,
        max_productions: prods,
        inner: DagParams { gates: 7, max_degree: 3, projections: false },
    };
    gen::random_quantified(&mut r, &p)
}

fn small_poly(seed: u64) -> Polynomial {
    let mut r = gen::rng(seed);
    let c = gen::random_projection_circuit(&mut r, 2, 1, &dag(6));
    expand_single(&c, &g()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (p, q, s) = (small_poly(a), small_poly(b), small_poly(c));
        prop_assert_eq!(p.add(&q), q.add(&p));
        prop_assert_eq!(p.mul(&q).unwrap(), q.mul(&p).unwrap());
        prop_assert_eq!(p.mul(&q.add(&s)).unwrap(), p.mul(&q).unwrap().add(&p.mul(&s).unwrap()));
        prop_assert!(p.add(&p.neg()).is_zero());
    }

    #[test]
    fn homogeneous_components_sum_to_the_polynomial(seed in any::<u64>()) {
        let p = small_poly(seed);
        let vars = p.vars();
        let top = match p.degree(&vars) { Degree::Finite(d) => d, _ => 0 };
        let total = (0..=top).fold(Polynomial::zero(), |acc, k| acc.add(&p.hom_component(k, &vars)));
        prop_assert_eq!(total, p);
    }

    #[test]
    fn evaluation_agrees_with_expansion(seed in any::<u64>(), x1 in -3i64..=3, x2 in -3i64..=3) {
        let mut r = gen::rng(seed);
        let c = gen::random_projection_circuit(&mut r, 2, 2, &dag(12));
        let at: BTreeMap<Var, _> = [(Var::new("x1"), rat(x1)), (Var::new("x2"), rat(x2))].into_iter().collect();
        let p = expand_single(&c, &g()).unwrap();
        prop_assert_eq!(evaluate(&c, &at).unwrap()[0].clone(), p.evaluate(&at).unwrap());
    }

    #[test]
    fn circuit_json_round_trips(seed in any::<u64>()) {
        let mut r = gen::rng(seed);
        let c = gen::random_projection_circuit(&mut r, 3, 2, &dag(12));
        let again = match CircuitFile::from_json(&c.to_json()).unwrap() {
            CircuitFile::Plain(c) => c,
            CircuitFile::Quantified(_) => panic!("prefix appeared"),
        };
        prop_assert_eq!(again.to_json(), c.to_json());
        let q = quantified(seed, 3, 1);
        prop_assert_eq!(monocircuit::QuantifiedCircuit::from_json(&q.to_json()).unwrap(), q);
        let p = expand_single(&c, &g()).unwrap();
        prop_assert_eq!(Polynomial::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn generated_circuits_are_valid_and_monotone(seed in any::<u64>()) {
        let mut r = gen::rng(seed);
        let c = gen::random_projection_circuit(&mut r, 3, 2, &dag(12));
        prop_assert!(validate(AnyCircuit::Plain(&c)).is_valid());
        prop_assert!(expand_single(&c, &g()).unwrap().is_monotone());
    }

    #[test]
    fn lowering_preserves_expansion(seed in any::<u64>()) {
        let q = quantified(seed, 3, 2);
        // fold the prefix into gates, then lower them
        let mut b = monocircuit::CircuitBuilder::new(q.inner().universe().clone());
        let map = b.import(q.inner(), |_, _| None);
        let mut out = map[q.inner().output().0];
        for (quant, z) in q.prefix().iter().rev() {
            out = match quant {
                monocircuit::Quantifier::Sum => b.sum(z.clone(), out),
                monocircuit::Quantifier::Prod => b.prod(z.clone(), out),
            };
        }
        let c = b.finish(vec![out]);
        let lowered = lower_to_projections(&c);
        prop_assert_eq!(expand_single(&lowered, &g()).unwrap(), expand_quantified(&q, &g()).unwrap());
        prop_assert!(lowered.size() <= c.size() + 2 * q.prefix().len());
    }

    #[test]
    fn hom_extraction_matches_components(seed in any::<u64>(), k in 0usize..5) {
        let mut r = gen::rng(seed);
        let c = gen::random_projection_circuit(&mut r, 2, 2, &dag(10));
        let p = expand_single(&c, &g()).unwrap();
        let tv = c.universe().true_set();
        let h = extract_hom_circuit(&c, k, &g()).unwrap();
        prop_assert_eq!(expand_single(&h, &g()).unwrap(), p.hom_component(k as i64, &tv));
    }

    #[test]
    fn trivial_expsum_preserves_expansion(seed in any::<u64>(), len in 1usize..=4) {
        let q = quantified(seed, len, 2);
        let es = trivial_expsum(&q, &g()).unwrap();
        es.validate().unwrap();
        let quants: Vec<_> = q.prefix().iter().map(|(q, _)| *q).collect();
        prop_assert_eq!(es.summed_vars.len() as u128, oracle::prefix_copy_count(&quants));
        let f = expand_quantified(&q, &g()).unwrap();
        prop_assert_eq!(es.expand(&g()).unwrap(), f.clone());
        prop_assert_eq!(es.enumerate(&g()).unwrap(), f);
        prop_assert!(es.size() <= EXPSUM_SIZE_CONSTANT * (q.size() << q.count_productions()));
    }

    #[test]
    fn pruned_expsum_reconstructs(seed in any::<u64>(), len in 1usize..=6) {
        let q = quantified(seed, len, 3);
        let pe = match pruned_expsum(&q, &g()) {
            Ok(pe) => pe,
            Err(e) if e.is_overflow() => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let f = expand_quantified(&q, &g()).unwrap();
        prop_assert_eq!(pe.reconstruct(&g()).unwrap(), f.clone());
        prop_assert!(pe.a_table.iter().all(|a| *a >= rat(0)));
        if !f.is_zero() {
            let h = expand_single(&pe.h, &g()).unwrap();
            let h1 = h.substitute_bits(pe.y1.iter().map(|v| (v, true))).unwrap();
            prop_assert_eq!(f.support(), h1.support());
        }
    }

    #[test]
    fn all_ones_detects_x_dependence(seed in any::<u64>(), len in 1usize..=5) {
        let q = quantified(seed, len, 2);
        let blocks = PrefixBlocks::new(q.prefix());
        let zv = blocks.z_vars();
        let ys: Vec<Var> = blocks.ys.iter().flatten().cloned().collect();
        let tv = q.inner().universe().true_set();
        let g = expand_single(q.inner(), &g()).unwrap();
        let depends = |a: &[bool], b: &[bool]| {
            let fixed = g.substitute_bits(zv.iter().zip(a.iter().copied()).chain(ys.iter().zip(b.iter().copied()))).unwrap();
            matches!(fixed.degree(&tv), Degree::Finite(e) if e > 0)
        };
        for a in 0..1u32 << zv.len() {
            let a: Vec<bool> = (0..zv.len()).map(|i| a >> i & 1 == 1).collect();
            let some_b = (0..1u32 << ys.len())
                .any(|b| depends(&a, &(0..ys.len()).map(|i| b >> i & 1 == 1).collect::<Vec<_>>()));
            prop_assert_eq!(some_b, depends(&a, &vec![true; ys.len()]));
        }
    }

    #[test]
    fn abp_outputs_are_monotone_and_edges_obey_the_support_law(seed in any::<u64>(), r in 1usize..=3, ell in 1usize..=4) {
        let mut rng = gen::rng(seed);
        let abp = gen::random_abp(&mut rng, r, ell, 2);
        prop_assert!(abp_expand(&abp, &g()).unwrap().is_monotone());
        prop_assert!(edge_support_violations(&abp, &g()).unwrap().is_empty());
    }

    #[test]
    fn hull_agrees_with_lp(seed in any::<u64>()) {
        let mut r = gen::rng(seed);
        let pts = gen::random_point_set(&mut r, 2, 30, 8);
        let hull: BTreeSet<_> = hull_vertices_2d(&pts).unwrap().into_iter().collect();
        prop_assert_eq!(&hull, &oracle::hull_vertices_by_lp(&pts));
        prop_assert_eq!(convexly_independent(&pts).unwrap(), oracle::convexly_independent_2d(&pts));
    }

    #[test]
    fn hull_order_is_counterclockwise(seed in any::<u64>()) {
        let mut r = gen::rng(seed);
        let pts = gen::random_point_set(&mut r, 2, 20, 6);
        let h = hull_vertices_2d(&pts).unwrap();
        if h.len() >= 3 {
            prop_assert_eq!(&h[0], pts.points().iter().min().unwrap());
            for i in 0..h.len() {
                let (a, b, c) = (&h[i], &h[(i + 1) % h.len()], &h[(i + 2) % h.len()]);
                let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                prop_assert!(cross > 0);
            }
        }
    }

    #[test]
    fn linear_images_keep_dependencies(seed in any::<u64>()) {
        let mut r = gen::rng(seed);
        let pts = gen::random_point_set(&mut r, 3, 8, 3);
        let m = ShadowMatrix::new((0..2).map(|_| (0..3).map(|_| r.random_range(-2..=2)).collect()).collect()).unwrap();
        let count = shadow_vertex_count_points(&pts, &m).unwrap();
        prop_assert!(count <= pts.len());
        if convex_dependency(&pts).unwrap().is_some() {
            prop_assert!(count < pts.len());
        }
    }

    #[test]
    fn scaling_keeps_vertex_counts(seed in any::<u64>(), c in 1i64..=4) {
        let mut r = gen::rng(seed);
        let pts = gen::random_point_set(&mut r, 3, 10, 4);
        let rows: Vec<Vec<i64>> = (0..2).map(|_| (0..3).map(|_| r.random_range(-3..=3)).collect()).collect();
        let scaled: Vec<Vec<i64>> = rows.iter().map(|row| row.iter().map(|e| e * c).collect()).collect();
        let (m, cm) = (ShadowMatrix::new(rows).unwrap(), ShadowMatrix::new(scaled).unwrap());
        prop_assert_eq!(shadow_vertex_count_points(&pts, &m).unwrap(), shadow_vertex_count_points(&pts, &cm).unwrap());
    }

    #[test]
    fn witnessed_supports_are_independent(seed in any::<u64>()) {
        let mut r = gen::rng(seed);
        let pts = gen::random_point_set(&mut r, 3, 6, 2);
        let m = ShadowMatrix::new((0..2).map(|_| (0..3).map(|_| r.random_range(-2..=2)).collect()).collect()).unwrap();
        if shadow_vertex_count_points(&pts, &m).unwrap() == pts.len() {
            prop_assert!(convexly_independent(&pts).unwrap());
        }
    }

    #[test]
    fn shadow_substitution_matches_projected_support(seed in any::<u64>()) {
        let mut r = gen::rng(seed);
        let c = gen::random_projection_circuit(&mut r, 3, 1, &dag(10));
        let m: Vec<Vec<i64>> = (0..2).map(|_| (0..3).map(|_| r.random_range(-2..=2)).collect()).collect();
        let f = expand_single(&c, &g()).unwrap();
        let s = shadow_substitute(&c, &m).unwrap();
        let sf = expand_single(&s, &g()).unwrap();
        let plane = s.universe().true_vars().to_vec();
        let image = ShadowMatrix::new(m).unwrap().image(&support_points(&f, c.universe().true_vars())).unwrap();
        let direct: BTreeSet<_> = hull_vertices_2d(&image).unwrap().into_iter().collect();
        let via_circuit = PointSet::new(2, y_support(&sf, &plane)).unwrap();
        let via: BTreeSet<_> = hull_vertices_2d(&via_circuit).unwrap().into_iter().collect();
        // monotone: no cancellation, so the vertex sets coincide
        prop_assert_eq!(via, direct);
    }
}
