//! Newton polytopes and their planar shadows: exact 2D hulls, convex
//! independence by exact LP, vertex counts under integral 2×n maps, and the
//! transparency search.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{format_rational, rat, Polynomial, Var};

pub type Point = Vec<i64>;

/// Distinct integer points of a common dimension, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PointSet {
    dim: usize,
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(dim: usize, points: impl IntoIterator<Item = Point>) -> Result<Self> {
        let set: BTreeSet<Point> = points.into_iter().collect();
        if let Some(p) = set.iter().find(|p| p.len() != dim) {
            return Err(Error::ShapeError(format!("point {p:?} does not have dimension {dim}")));
        }
        Ok(PointSet { dim, points: set.into_iter().collect() })
    }

    pub fn from_pairs(pts: &[(i64, i64)]) -> Self {
        PointSet::new(2, pts.iter().map(|&(a, b)| vec![a, b])).expect("pairs are 2D")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Exponent vectors of `p` over `vars`.
pub fn support_points(p: &Polynomial, vars: &[Var]) -> PointSet {
    PointSet { dim: vars.len(), points: p.terms().map(|(m, _)| m.exponents_in(vars)).collect::<BTreeSet<_>>().into_iter().collect() }
}

// ---------------------------------------------------------------------------
// Exact LP

pub mod lp {
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};

    /// A non-negative solution of `A x = b`, or `None` when infeasible.
    /// Phase-I simplex over exact rationals with Bland's pivoting rule.
    pub fn feasible_point(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
        let m = a.len();
        let k = if m == 0 { 0 } else { a[0].len() };
        let width = k + m + 1;
        // rows: [A | I | b] with b >= 0
        let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m + 1);
        for i in 0..m {
            let flip = b[i].is_negative();
            let mut row = Vec::with_capacity(width);
            row.extend(a[i].iter().take(k).map(|x| if flip { -x.clone() } else { x.clone() }));
            for l in 0..m {
                row.push(if l == i { BigRational::from_integer(1.into()) } else { BigRational::zero() });
            }
            row.push(if flip { -b[i].clone() } else { b[i].clone() });
            t.push(row);
        }
        // objective: minimise the sum of artificials, expressed in the non-basic columns
        let mut obj = vec![BigRational::zero(); width];
        for row in &t {
            for j in 0..k {
                obj[j] -= &row[j];
            }
            obj[width - 1] -= &row[width - 1];
        }
        let mut basis: Vec<usize> = (k..k + m).collect();
        while let Some(enter) = (0..k + m).find(|&j| obj[j].is_negative()) {
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..m {
                if t[i][enter].is_positive() {
                    let ratio = &t[i][width - 1] / &t[i][enter];
                    let better = match &leave {
                        None => true,
                        Some((l, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { break };
            let piv = t[r][enter].clone();
            for x in t[r].iter_mut() {
                *x /= &piv;
            }
            let prow = t[r].clone();
            for (i, row) in t.iter_mut().enumerate() {
                if i != r && !row[enter].is_zero() {
                    let f = row[enter].clone();
                    for (x, p) in row.iter_mut().zip(&prow) {
                        *x -= &f * p;
                    }
                }
            }
            if !obj[enter].is_zero() {
                let f = obj[enter].clone();
                for (x, p) in obj.iter_mut().zip(&prow) {
                    *x -= &f * p;
                }
            }
            basis[r] = enter;
        }
        if !obj[width - 1].is_zero() {
            return None;
        }
        let mut x = vec![BigRational::zero(); k];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < k {
                x[bv] = t[i][width - 1].clone();
            }
        }
        Some(x)
    }
}

/// Convex weights expressing `q` through `pts`, if `q ∈ conv(pts)`.
pub fn hull_membership(q: &[i64], pts: &[&Point]) -> Option<Vec<BigRational>> {
    if pts.is_empty() {
        return None;
    }
    let dim = q.len();
    let mut a: Vec<Vec<BigRational>> = (0..dim).map(|d| pts.iter().map(|p| rat(p[d])).collect()).collect();
    a.push(vec![rat(1); pts.len()]);
    let mut b: Vec<BigRational> = q.iter().map(|&v| rat(v)).collect();
    b.push(rat(1));
    lp::feasible_point(&a, &b)
}

// ---------------------------------------------------------------------------
// Planar hulls

fn cross(o: &[i64], a: &[i64], b: &[i64]) -> i128 {
    let (ox, oy) = (o[0] as i128, o[1] as i128);
    (a[0] as i128 - ox) * (b[1] as i128 - oy) - (a[1] as i128 - oy) * (b[0] as i128 - ox)
}

/// Hull vertices in counterclockwise order starting from the lexicographically
/// smallest point. Points in the interior of hull edges are not vertices.
pub fn hull_vertices_2d(pts: &PointSet) -> Result<Vec<Point>> {
    if pts.dim != 2 {
        return Err(Error::ShapeError(format!("expected planar points, got dimension {}", pts.dim)));
    }
    Ok(monotone_chain(&pts.points))
}

fn monotone_chain(sorted: &[Point]) -> Vec<Point> {
    if sorted.len() <= 2 {
        return sorted.to_vec();
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in sorted {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in sorted.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

// ---------------------------------------------------------------------------
// Convex independence

pub const CONVEX_INDEPENDENCE_CAP: usize = 64;

/// `point = Σ weight_i · others_i` with non-negative weights summing to 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvexDependency {
    pub point: Point,
    pub combination: Vec<WeightedPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightedPoint {
    #[serde(serialize_with = "ser_rational")]
    pub weight: BigRational,
    pub point: Point,
}

fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// The first point (in sorted order) lying in the hull of the others, with its weights.
pub fn convex_dependency(pts: &PointSet) -> Result<Option<ConvexDependency>> {
    if pts.len() > CONVEX_INDEPENDENCE_CAP {
        return Err(Error::SearchTooLarge { size: pts.len() as u128, cap: CONVEX_INDEPENDENCE_CAP as u128 });
    }
    for (i, q) in pts.points.iter().enumerate() {
        let others: Vec<&Point> = pts.points.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p).collect();
        if let Some(w) = hull_membership(q, &others) {
            let combination = w
                .into_iter()
                .zip(others)
                .filter(|(w, _)| *w != rat(0))
                .map(|(weight, p)| WeightedPoint { weight, point: p.clone() })
                .collect();
            return Ok(Some(ConvexDependency { point: q.clone(), combination }));
        }
    }
    Ok(None)
}

/// No point lies in the convex hull of the others.
pub fn convexly_independent(pts: &PointSet) -> Result<bool> {
    Ok(convex_dependency(pts)?.is_none())
}

// ---------------------------------------------------------------------------
// Shadows

/// A 2×n integer matrix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ShadowMatrix(pub [Vec<i64>; 2]);

impl ShadowMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        match <[Vec<i64>; 2]>::try_from(rows) {
            Ok(r) if r[0].len() == r[1].len() => Ok(ShadowMatrix(r)),
            _ => Err(Error::ShapeError("a shadow matrix has two rows of equal length".into())),
        }
    }

    /// `[[1,0,0,…],[0,1,0,…]]`.
    pub fn coordinate(n: usize) -> Self {
        let row = |k: usize| (0..n).map(|i| i64::from(i == k)).collect();
        ShadowMatrix([row(0), row(1)])
    }

    pub fn cols(&self) -> usize {
        self.0[0].len()
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.0.to_vec()
    }

    pub fn apply(&self, p: &[i64]) -> Point {
        self.0.iter().map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum()).collect()
    }

    /// Image of a point set, collisions merged.
    pub fn image(&self, pts: &PointSet) -> Result<PointSet> {
        if pts.dim != self.cols() {
            return Err(Error::ShapeError(format!(
                "matrix has {} columns but points have dimension {}",
                self.cols(),
                pts.dim
            )));
        }
        PointSet::new(2, pts.points.iter().map(|p| self.apply(p)))
    }
}

pub fn shadow_vertex_count_points(pts: &PointSet, m: &ShadowMatrix) -> Result<usize> {
    Ok(monotone_chain(&m.image(pts)?.points).len())
}

/// Number of hull vertices of the image of `supp(p)` (over `vars`) under `m`.
pub fn shadow_vertex_count(p: &Polynomial, vars: &[Var], m: &ShadowMatrix) -> Result<usize> {
    shadow_vertex_count_points(&support_points(p, vars), m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    TransparentWitnessed,
    /// Certified by a convex dependency among the support points.
    NotTransparentExhaustive,
    InconclusiveBoundedSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SearchMode {
    /// Every matrix with entries in `[-K, K]`, if there are at most `budget` of them.
    Exhaustive { budget: u64 },
    Sampled { trials: u64, seed: u64 },
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

impl Default for SearchMode {
    fn default() -> Self {
        SearchMode::Exhaustive { budget: DEFAULT_SEARCH_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShadowReport {
    pub witness: ShadowMatrix,
    pub projected: Vec<Point>,
    pub hull: Vec<Point>,
    pub vertex_count: usize,
    pub support_size: usize,
    pub verdict: Verdict,
    pub certificate: Option<ConvexDependency>,
    pub matrices_examined: u64,
}

fn report_for(pts: &PointSet, m: ShadowMatrix, examined: u64, certificate: Option<ConvexDependency>) -> Result<ShadowReport> {
    let image = m.image(pts)?;
    let hull = monotone_chain(&image.points);
    let verdict = if hull.len() == pts.len() {
        Verdict::TransparentWitnessed
    } else if certificate.is_some() {
        Verdict::NotTransparentExhaustive
    } else {
        Verdict::InconclusiveBoundedSearch
    };
    Ok(ShadowReport {
        witness: m,
        vertex_count: hull.len(),
        projected: image.points,
        hull,
        support_size: pts.len(),
        verdict,
        certificate,
        matrices_examined: examined,
    })
}

/// Matrix number `idx` in lexicographic order over entries `[-K, K]`, row-major.
fn matrix_at(mut idx: u64, n: usize, k: i64) -> ShadowMatrix {
    let base = (2 * k + 1) as u64;
    let mut entries = vec![0i64; 2 * n];
    for e in entries.iter_mut().rev() {
        *e = (idx % base) as i64 - k;
        idx /= base;
    }
    ShadowMatrix([entries[..n].to_vec(), entries[n..].to_vec()])
}

/// Best vertex count over integral 2×n maps with entries in `[-k, k]`: a
/// lower bound on the shadow complexity. Ties keep the lexicographically
/// smallest matrix.
pub fn shadow_complexity_search_points(pts: &PointSet, k: i64, mode: SearchMode) -> Result<ShadowReport> {
    if k < 0 {
        return Err(Error::PreconditionViolation("entry bound K must be non-negative".into()));
    }
    let n = pts.dim;
    let certificate = if pts.len() <= CONVEX_INDEPENDENCE_CAP { convex_dependency(pts)? } else { None };
    let target = pts.len();
    let mut best: Option<(usize, ShadowMatrix)> = None;
    let consider = |m: ShadowMatrix, best: &mut Option<(usize, ShadowMatrix)>| -> Result<bool> {
        let c = shadow_vertex_count_points(pts, &m)?;
        let better = match best {
            None => true,
            Some((bc, bm)) => c > *bc || (c == *bc && m < *bm),
        };
        if better {
            *best = Some((c, m));
        }
        Ok(c == target)
    };
    let mut examined = 0u64;
    match mode {
        SearchMode::Exhaustive { budget } => {
            let space = ((2 * k + 1) as u128).checked_pow(2 * n as u32).unwrap_or(u128::MAX);
            if space > budget as u128 {
                if certificate.is_some() {
                    let m = ShadowMatrix::coordinate(n);
                    return report_for(pts, m, 0, certificate);
                }
                return Err(Error::SearchTooLarge { size: space, cap: budget as u128 });
            }
            for idx in 0..space as u64 {
                examined += 1;
                if consider(matrix_at(idx, n, k), &mut best)? {
                    break;
                }
            }
        }
        SearchMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials.max(1) {
                let mut row = || (0..n).map(|_| rng.random_range(-k..=k)).collect::<Vec<_>>();
                let m = ShadowMatrix([row(), row()]);
                examined += 1;
                if consider(m, &mut best)? {
                    break;
                }
            }
        }
    }
    let (_, m) = best.expect("at least one matrix examined");
    report_for(pts, m, examined, certificate)
}

pub fn shadow_complexity_search(p: &Polynomial, vars: &[Var], k: i64, mode: SearchMode) -> Result<ShadowReport> {
    shadow_complexity_search_points(&support_points(p, vars), k, mode)
}

/// Transparency verdict: a supplied witness is checked directly; otherwise
/// the bounded search decides, with a convex dependency as a refutation.
pub fn is_transparent(
    p: &Polynomial,
    vars: &[Var],
    witness: Option<&ShadowMatrix>,
    k: i64,
    mode: SearchMode,
) -> Result<ShadowReport> {
    let pts = support_points(p, vars);
    match witness {
        Some(m) => {
            let certificate = if pts.len() <= CONVEX_INDEPENDENCE_CAP { convex_dependency(&pts)? } else { None };
            report_for(&pts, m.clone(), 1, certificate)
        }
        None => shadow_complexity_search_points(&pts, k, mode),
    }
}

// ---------------------------------------------------------------------------
// Minkowski sums

pub const MINKOWSKI_CAP: usize = 10_000;

pub fn minkowski_sum(a: &PointSet, b: &PointSet) -> Result<PointSet> {
    if a.dim != b.dim {
        return Err(Error::ShapeError("Minkowski summands differ in dimension".into()));
    }
    if a.len() * b.len() > MINKOWSKI_CAP {
        return Err(Error::SearchTooLarge { size: (a.len() * b.len()) as u128, cap: MINKOWSKI_CAP as u128 });
    }
    PointSet::new(a.dim, a.points.iter().flat_map(|p| b.points.iter().map(move |q| p.iter().zip(q).map(|(x, y)| x + y).collect())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinkowskiReport {
    pub sum_size: usize,
    pub sum_convexly_independent: bool,
    /// False only for a counterexample: an independent sum with `|A| ≥ |B|`,
    /// `|B| ≥ 2` and `|A| ≥ 3`.
    pub lemma_holds: bool,
}

/// For planar `A, B` with `A + B` convexly independent and `|A| ≥ |B|`:
/// either both have at most two points or `|B| = 1`.
pub fn check_minkowski_lemma(a: &PointSet, b: &PointSet) -> Result<MinkowskiReport> {
    if a.dim != 2 || b.dim != 2 {
        return Err(Error::ShapeError("Minkowski sum checks need planar sets".into()));
    }
    let sum = minkowski_sum(a, b)?;
    let indep = convexly_independent(&sum)?;
    let (big, small) = if a.len() >= b.len() { (a.len(), b.len()) } else { (b.len(), a.len()) };
    let lemma_holds = !indep || (big <= 2 && small <= 2) || small == 1;
    Ok(MinkowskiReport { sum_size: sum.len(), sum_convexly_independent: indep, lemma_holds })
}

// ---------------------------------------------------------------------------
// Plot

/// An SVG of the projected points with the hull drawn and its vertices marked.
pub fn shadow_svg(report: &ShadowReport) -> String {
    let pts = &report.projected;
    let (mut x0, mut x1, mut y0, mut y1) = (0i64, 1i64, 0i64, 1i64);
    if let Some(p) = pts.first() {
        (x0, x1, y0, y1) = (p[0], p[0], p[1], p[1]);
    }
    for p in pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1) as f64;
    let size = 400.0;
    let pad = 30.0;
    let scale = (size - 2.0 * pad) / span;
    let tx = |x: i64| pad + (x - x0) as f64 * scale;
    let ty = |y: i64| size - pad - (y - y0) as f64 * scale;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if report.hull.len() >= 2 {
        let poly: Vec<String> = report.hull.iter().map(|p| format!("{:.2},{:.2}", tx(p[0]), ty(p[1]))).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="#dbe8f6" stroke="#1f4e79" stroke-width="2"/>"##, poly.join(" "));
    }
    let hull: BTreeSet<&Point> = report.hull.iter().collect();
    for p in pts {
        let (fill, r) = if hull.contains(p) { ("#c0392b", 6) } else { ("#555555", 4) };
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}"><title>({}, {})</title></circle>"#, tx(p[0]), ty(p[1]), p[0], p[1]);
    }
    let _ = writeln!(
        s,
        r#"<text x="10" y="20" font-family="monospace" font-size="13">{} of {} points are vertices</text>"#,
        report.vertex_count, report.support_size
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{var_set, Monomial};

    fn ps(pts: &[(i64, i64)]) -> PointSet {
        PointSet::from_pairs(pts)
    }

    fn poly(terms: &[&[(&str, i64)]]) -> Polynomial {
        Polynomial::from_terms(
            terms.iter().map(|t| (Monomial::from_pairs(t.iter().map(|(v, e)| (Var::new(v), *e))), rat(1))),
            false,
        )
    }

    fn xy() -> Vec<Var> {
        var_set(["x", "y"]).into_iter().collect()
    }

    #[test]
    fn hull_examples() {
        assert_eq!(hull_vertices_2d(&ps(&[(0, 0), (2, 0), (1, 0)])).unwrap(), vec![vec![0, 0], vec![2, 0]]);
        assert_eq!(hull_vertices_2d(&ps(&[(0, 0), (1, 0), (0, 1)])).unwrap().len(), 3);
        assert_eq!(
            hull_vertices_2d(&ps(&[(0, 0), (1, 1), (2, 2), (0, 2)])).unwrap(),
            vec![vec![0, 0], vec![2, 2], vec![0, 2]]
        );
        assert_eq!(hull_vertices_2d(&ps(&[(3, 3)])).unwrap(), vec![vec![3, 3]]);
        assert!(hull_vertices_2d(&PointSet::new(3, [vec![0, 0, 0]]).unwrap()).is_err());
    }

    #[test]
    fn independence_examples() {
        let dep = convex_dependency(&ps(&[(2, 0), (1, 1), (0, 2)])).unwrap().unwrap();
        assert_eq!(dep.point, vec![1, 1]);
        let half = BigRational::new(1.into(), 2.into());
        assert!(dep.combination.iter().all(|w| w.weight == half));
        let e3 = PointSet::new(3, [vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert!(convexly_independent(&e3).unwrap());
        assert!(convexly_independent(&ps(&[(5, 5)])).unwrap());
        let big = PointSet::new(1, (0..65).map(|i| vec![i])).unwrap();
        assert!(matches!(convexly_independent(&big), Err(Error::SearchTooLarge { .. })));
    }

    #[test]
    fn lp_handles_negative_rhs_and_degeneracy() {
        let a = vec![vec![rat(1), rat(-1)], vec![rat(1), rat(1)]];
        let x = lp::feasible_point(&a, &[rat(-1), rat(3)]).unwrap();
        assert_eq!(x, vec![rat(1), rat(2)]);
        assert!(lp::feasible_point(&[vec![rat(1), rat(1)]], &[rat(-1)]).is_none());
        // degenerate square: centre of a square via four corners
        let corners = [vec![0, 0], vec![2, 0], vec![0, 2], vec![2, 2]];
        let refs: Vec<&Point> = corners.iter().collect();
        assert!(hull_membership(&[1, 1], &refs).is_some());
        assert!(hull_membership(&[3, 1], &refs).is_none());
    }

    #[test]
    fn vertex_count_examples() {
        let id = ShadowMatrix::coordinate(2);
        let p = poly(&[&[("x", 1), ("y", 1)], &[("x", 1)], &[("y", 1)]]);
        assert_eq!(shadow_vertex_count(&p, &xy(), &id).unwrap(), 3);
        let q = poly(&[&[], &[("x", 1), ("y", 1)], &[("x", 2), ("y", 2)]]);
        assert_eq!(shadow_vertex_count(&q, &xy(), &id).unwrap(), 2);
        assert_eq!(shadow_vertex_count(&Polynomial::one(), &xy(), &id).unwrap(), 1);
    }

    #[test]
    fn search_examples() {
        let p = poly(&[&[("x", 1), ("y", 1)], &[("x", 1)], &[("y", 1)]]);
        let r = shadow_complexity_search(&p, &xy(), 1, SearchMode::default()).unwrap();
        assert_eq!((r.vertex_count, r.verdict), (3, Verdict::TransparentWitnessed));
        let q = poly(&[&[], &[("x", 1), ("y", 1)], &[("x", 2), ("y", 2)]]);
        let r = shadow_complexity_search(&q, &xy(), 2, SearchMode::default()).unwrap();
        assert_eq!((r.vertex_count, r.verdict), (2, Verdict::NotTransparentExhaustive));
        assert!(r.certificate.is_some());
        let one = poly(&[&[("x", 3)]]);
        let r = shadow_complexity_search(&one, &xy(), 1, SearchMode::default()).unwrap();
        assert_eq!((r.vertex_count, r.verdict), (1, Verdict::TransparentWitnessed));
    }

    #[test]
    fn sampled_search_is_reproducible() {
        let p = poly(&[&[("x", 1), ("y", 1)], &[("x", 1)], &[("y", 1)], &[]]);
        let mode = SearchMode::Sampled { trials: 50, seed: 7 };
        let a = shadow_complexity_search(&p, &xy(), 3, mode).unwrap();
        let b = shadow_complexity_search(&p, &xy(), 3, mode).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transparency_examples() {
        let p = poly(&[&[("x", 1)], &[("y", 1)]]);
        let r = is_transparent(&p, &xy(), Some(&ShadowMatrix::coordinate(2)), 1, SearchMode::default()).unwrap();
        assert_eq!(r.verdict, Verdict::TransparentWitnessed);
        let q = poly(&[&[("x", 2)], &[("x", 1), ("y", 1)], &[("y", 2)]]);
        let r = is_transparent(&q, &xy(), None, 2, SearchMode::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotTransparentExhaustive);
        let perm = crate::poly::permanent_oracle(2).unwrap();
        let vars: Vec<Var> = perm.vars().into_iter().collect();
        let r = is_transparent(&perm, &vars, None, 2, SearchMode::default()).unwrap();
        assert_eq!(r.verdict, Verdict::TransparentWitnessed);
    }

    #[test]
    fn minkowski_examples() {
        let a = ps(&[(0, 0), (1, 0)]);
        let b = ps(&[(0, 0)]);
        assert_eq!(minkowski_sum(&a, &b).unwrap(), a);
        assert!(check_minkowski_lemma(&a, &b).unwrap().lemma_holds);
        let a = ps(&[(0, 0), (1, 0), (0, 1)]);
        let b = ps(&[(0, 0), (2, 2)]);
        let r = check_minkowski_lemma(&a, &b).unwrap();
        assert_eq!(r.sum_size, 6);
        assert!(!r.sum_convexly_independent);
        assert!(r.lemma_holds);
    }

    #[test]
    fn matrix_enumeration_order() {
        assert_eq!(matrix_at(0, 1, 1), ShadowMatrix([vec![-1], vec![-1]]));
        assert_eq!(matrix_at(8, 1, 1), ShadowMatrix([vec![1], vec![1]]));
        assert_eq!(matrix_at(1, 1, 1), ShadowMatrix([vec![-1], vec![0]]));
    }

    #[test]
    fn svg_mentions_counts() {
        let p = poly(&[&[("x", 1), ("y", 1)], &[("x", 1)], &[("y", 1)]]);
        let r = shadow_complexity_search(&p, &xy(), 1, SearchMode::default()).unwrap();
        let svg = shadow_svg(&r);
        assert!(svg.starts_with("<svg") && svg.contains("3 of 3"));
    }
}
