//! Slow reference implementations used to cross-check the fast paths.

use std::collections::BTreeSet;

use crate::circuit::Quantifier;
use crate::geometry::{hull_membership, Point, PointSet};

/// Hull vertices as the points not in the convex hull of the others, by exact LP per point.
pub fn hull_vertices_by_lp(pts: &PointSet) -> BTreeSet<Point> {
    let all = pts.points();
    all.iter()
        .enumerate()
        .filter(|(i, q)| {
            let others: Vec<&Point> = all.iter().enumerate().filter(|(j, _)| j != i).map(|(_, p)| p).collect();
            hull_membership(q, &others).is_none()
        })
        .map(|(_, q)| q.clone())
        .collect()
}

fn orient(a: &[i64], b: &[i64], c: &[i64]) -> i128 {
    (b[0] as i128 - a[0] as i128) * (c[1] as i128 - a[1] as i128)
        - (b[1] as i128 - a[1] as i128) * (c[0] as i128 - a[0] as i128)
}

fn on_segment(p: &[i64], a: &[i64], b: &[i64]) -> bool {
    orient(a, b, p) == 0 && p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn in_triangle(p: &[i64], a: &[i64], b: &[i64], c: &[i64]) -> bool {
    let (d1, d2, d3) = (orient(a, b, p), orient(b, c, p), orient(c, a, p));
    let neg = d1 < 0 || d2 < 0 || d3 < 0;
    let pos = d1 > 0 || d2 > 0 || d3 > 0;
    !(neg && pos)
}

/// Planar convex independence by Carathéodory: a point is dependent iff it
/// lies on a segment or in a triangle spanned by other points.
pub fn convexly_independent_2d(pts: &PointSet) -> bool {
    let p = pts.points();
    let n = p.len();
    for i in 0..n {
        let others: Vec<&Point> = (0..n).filter(|&j| j != i).map(|j| &p[j]).collect();
        for a in 0..others.len() {
            for b in a + 1..others.len() {
                if on_segment(&p[i], others[a], others[b]) {
                    return false;
                }
                for c in b + 1..others.len() {
                    if in_triangle(&p[i], others[a], others[b], others[c]) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Number of summed variables after copying each Σ-variable once per
/// assignment of the Π-variables before it.
pub fn prefix_copy_count(prefix: &[Quantifier]) -> u128 {
    let mut prods = 0u32;
    let mut total = 0u128;
    for q in prefix {
        match q {
            Quantifier::Prod => prods += 1,
            Quantifier::Sum => total += 1u128 << prods,
        }
    }
    total
}

/// Permanent by Ryser's formula, evaluated at an integer matrix.
pub fn ryser_permanent(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    let mut total = 0i128;
    for mask in 1u32..(1u32 << n) {
        let mut prod = 1i128;
        for row in m {
            let s: i128 = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| row[j] as i128).sum();
            prod *= s;
        }
        let sign = if (n as u32 - mask.count_ones()).is_multiple_of(2) { 1 } else { -1 };
        total += sign * prod;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::convexly_independent;

    #[test]
    fn caratheodory_agrees_on_examples() {
        let dep = PointSet::from_pairs(&[(2, 0), (1, 1), (0, 2)]);
        assert!(!convexly_independent_2d(&dep));
        let sq = PointSet::from_pairs(&[(0, 0), (2, 0), (0, 2), (2, 2)]);
        assert!(convexly_independent_2d(&sq));
        assert!(convexly_independent(&sq).unwrap());
        let inner = PointSet::from_pairs(&[(0, 0), (4, 0), (0, 4), (1, 1)]);
        assert!(!convexly_independent_2d(&inner));
        assert_eq!(hull_vertices_by_lp(&inner).len(), 3);
    }

    #[test]
    fn copy_count_toy_prefix() {
        use Quantifier::{Prod as P, Sum as S};
        assert_eq!(prefix_copy_count(&[S, P, S, P, P, S]), 11);
        assert_eq!(prefix_copy_count(&[S, S, S]), 3);
    }

    #[test]
    fn ryser_small() {
        assert_eq!(ryser_permanent(&[vec![1, 2], vec![3, 4]]), 10);
        assert_eq!(ryser_permanent(&[vec![1; 3], vec![1; 3], vec![1; 3]]), 6);
    }
}
