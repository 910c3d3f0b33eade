//! Exact sparse multivariate (Laurent) polynomials over the rationals.
//!
//! Every circuit transformation in this crate is checked against full
//! expansion into [`Polynomial`], so this module is deliberately simple:
//! a `BTreeMap` from [`Monomial`] to a reduced [`BigRational`].

use std::collections::{btree_map, BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of terms any single product may produce.
pub const DEFAULT_MAX_TERMS: usize = 200_000;

/// Largest `n` accepted by [`permanent_oracle`].
pub const PERMANENT_ORACLE_CAP: usize = 6;

/// A variable name. Cheap to clone; ordered by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

impl From<String> for Var {
    fn from(s: String) -> Self {
        Var(Arc::from(s))
    }
}

pub type VarSet = BTreeSet<Var>;

pub fn var_set<'a>(names: impl IntoIterator<Item = &'a str>) -> VarSet {
    names.into_iter().map(Var::new).collect()
}

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| Error::Parse(format!("bad numerator in `{s}`: {e}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| Error::Parse(format!("bad denominator in `{s}`: {e}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n = BigInt::from_str(t).map_err(|e| Error::Parse(format!("bad rational `{s}`: {e}")))?;
        Ok(BigRational::from_integer(n))
    }
}

/// Always renders as `p/q` with a positive denominator.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// An exponent vector: sorted `(variable, exponent)` pairs, zero entries omitted.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Var, i64)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds a monomial from arbitrary pairs, merging repeats and dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, i64)>) -> Self {
        let mut acc: BTreeMap<Var, i64> = BTreeMap::new();
        for (v, e) in pairs {
            *acc.entry(v).or_insert(0) += e;
        }
        Monomial(acc.into_iter().filter(|(_, e)| *e != 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, i64)> {
        self.0.iter().map(|(v, e)| (v, *e))
    }

    pub fn exponent(&self, v: &Var) -> i64 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|(_, e)| *e > 0)
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, vars: &VarSet) -> i64 {
        self.0.iter().filter(|(v, _)| vars.contains(v)).map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn inverse(&self) -> Monomial {
        Monomial(self.0.iter().map(|(v, e)| (v.clone(), -e)).collect())
    }

    pub fn pow(&self, k: i64) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(v, e)| (v.clone(), e * k)).collect())
    }

    /// Splits off `v`, returning its exponent and the remaining monomial.
    pub fn split(&self, v: &Var) -> (i64, Monomial) {
        match self.0.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(i) => {
                let mut rest = self.0.clone();
                let (_, e) = rest.remove(i);
                (e, Monomial(rest))
            }
            Err(_) => (0, self.clone()),
        }
    }

    /// Keeps only the variables in `vars`.
    pub fn restrict(&self, vars: &VarSet) -> Monomial {
        Monomial(self.0.iter().filter(|(v, _)| vars.contains(v)).cloned().collect())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.iter().map(|(v, _)| v)
    }

    /// Exponents listed in the order of `order`; variables outside `order` are ignored.
    pub fn exponents_in(&self, order: &[Var]) -> Vec<i64> {
        order.iter().map(|v| self.exponent(v)).collect()
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Degree of a polynomial; the zero polynomial has degree `NegInfinity`,
/// which orders below every finite degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(i64),
}

impl Degree {
    pub fn finite(self) -> Option<i64> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// The value plugged in by [`Polynomial::substitute`].
#[derive(Debug, Clone)]
pub enum Substitution {
    Scalar(BigRational),
    Poly(Polynomial),
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigRational>,
    laurent: bool,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Polynomial::term(c, Monomial::one())
    }

    pub fn var(v: impl Into<Var>) -> Self {
        Polynomial::term(BigRational::one(), Monomial::var(v.into()))
    }

    /// A single term; the Laurent flag is set iff the monomial has a negative exponent.
    pub fn term(c: BigRational, m: Monomial) -> Self {
        let laurent = m.iter().any(|(_, e)| e < 0);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms, laurent }
    }

    /// Builds from raw terms, aggregating duplicates and dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>, laurent: bool) -> Self {
        let mut p = Polynomial { terms: BTreeMap::new(), laurent };
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p.laurent |= p.terms.keys().any(|m| m.iter().any(|(_, e)| e < 0));
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_laurent(&self) -> bool {
        self.laurent
    }

    /// Marks the polynomial as living in the Laurent ring.
    pub fn into_laurent(mut self) -> Self {
        self.laurent = true;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// The support: the set of monomials with nonzero coefficient.
    pub fn support(&self) -> BTreeSet<Monomial> {
        self.terms.keys().cloned().collect()
    }

    pub fn vars(&self) -> VarSet {
        self.terms.keys().flat_map(|m| m.vars().cloned()).collect()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) != 0)
    }

    /// The constant coefficient if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let (big, small) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut out = big.clone();
        out.laurent |= small.laurent;
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
            laurent: self.laurent,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial { terms: BTreeMap::new(), laurent: self.laurent };
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
            laurent: self.laurent,
        }
    }

    /// Product with the default term guard.
    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.mul_guarded(other, DEFAULT_MAX_TERMS)
    }

    /// Convolution over exponent vectors; fails with `ExpansionOverflow`
    /// as soon as the partial result exceeds `max_terms`.
    pub fn mul_guarded(&self, other: &Polynomial, max_terms: usize) -> Result<Polynomial> {
        let mut out = Polynomial { terms: BTreeMap::new(), laurent: self.laurent || other.laurent };
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
            if out.terms.len() > max_terms {
                return Err(Error::overflow(format!(
                    "product exceeds {max_terms} terms"
                )));
            }
        }
        Ok(out)
    }

    pub fn pow_guarded(&self, k: u32, max_terms: usize) -> Result<Polynomial> {
        let mut acc = Polynomial::one();
        acc.laurent = self.laurent;
        for _ in 0..k {
            acc = acc.mul_guarded(self, max_terms)?;
        }
        Ok(acc)
    }

    /// Replaces every occurrence of `var` by `value`.
    pub fn substitute(&self, var: &Var, value: &Substitution) -> Result<Polynomial> {
        match value {
            Substitution::Scalar(c) => self.substitute_scalar(var, c),
            Substitution::Poly(q) => self.substitute_poly(var, q),
        }
    }

    pub fn substitute_scalar(&self, var: &Var, value: &BigRational) -> Result<Polynomial> {
        let mut out = Polynomial { terms: BTreeMap::new(), laurent: self.laurent };
        let mut powers: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(var);
            if e == 0 {
                out.add_term(rest, c.clone());
                continue;
            }
            if e < 0 && value.is_zero() {
                return Err(Error::DivisionByZero(format!(
                    "substituting 0 for `{var}` in a term with exponent {e}"
                )));
            }
            let p = powers.entry(e).or_insert_with(|| rational_pow(value, e)).clone();
            out.add_term(rest, c * p);
        }
        Ok(out)
    }

    fn substitute_poly(&self, var: &Var, value: &Polynomial) -> Result<Polynomial> {
        let mut out = Polynomial { terms: BTreeMap::new(), laurent: self.laurent || value.laurent };
        let mut powers: BTreeMap<i64, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(var);
            if e == 0 {
                out.add_term(rest, c.clone());
                continue;
            }
            if let btree_map::Entry::Vacant(slot) = powers.entry(e) {
                slot.insert(if e > 0 {
                    value.pow_guarded(e as u32, DEFAULT_MAX_TERMS)?
                } else {
                    value.monomial_inverse()?.pow_guarded((-e) as u32, DEFAULT_MAX_TERMS)?
                });
            }
            let piece = powers[&e].mul(&Polynomial::term(c.clone(), rest))?;
            out = out.add(&piece);
        }
        Ok(out)
    }

    fn monomial_inverse(&self) -> Result<Polynomial> {
        match self.terms.iter().next() {
            Some((m, c)) if self.terms.len() == 1 => {
                Ok(Polynomial::term(c.recip(), m.inverse()).into_laurent())
            }
            None => Err(Error::DivisionByZero("negative power of the zero polynomial".into())),
            _ => Err(Error::PreconditionViolation(
                "negative power of a polynomial with more than one term".into(),
            )),
        }
    }

    /// Fast path for substituting bits: `1` drops the variable, `0` drops
    /// every term containing it with positive exponent.
    pub fn substitute_bits<'a>(&self, bits: impl IntoIterator<Item = (&'a Var, bool)>) -> Result<Polynomial> {
        let bits: BTreeMap<&Var, bool> = bits.into_iter().collect();
        let mut out = Polynomial { terms: BTreeMap::new(), laurent: self.laurent };
        'terms: for (m, c) in &self.terms {
            let mut rest = Vec::with_capacity(m.0.len());
            for (v, e) in &m.0 {
                match bits.get(v) {
                    None => rest.push((v.clone(), *e)),
                    Some(true) => {}
                    Some(false) if *e > 0 => continue 'terms,
                    Some(false) => {
                        return Err(Error::DivisionByZero(format!(
                            "substituting 0 for `{v}` in a term with exponent {e}"
                        )))
                    }
                }
            }
            out.add_term(Monomial(rest), c.clone());
        }
        Ok(out)
    }

    /// Sum of the terms whose total degree in `vars` is exactly `k`.
    pub fn hom_component(&self, k: i64, vars: &VarSet) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree_in(vars) == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
            laurent: self.laurent,
        }
    }

    pub fn degree(&self, vars: &VarSet) -> Degree {
        self.terms
            .keys()
            .map(|m| Degree::Finite(m.degree_in(vars)))
            .max()
            .unwrap_or(Degree::NegInfinity)
    }

    pub fn total_degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|m| Degree::Finite(m.total_degree()))
            .max()
            .unwrap_or(Degree::NegInfinity)
    }

    /// Largest sum of absolute exponents over the support; used by size guards.
    pub fn max_abs_degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|(_, e)| e.abs()).sum::<i64>())
            .max()
            .unwrap_or(0)
    }

    /// True iff every term has the same degree in `vars`. The zero polynomial
    /// counts as homogeneous.
    pub fn is_homogeneous(&self, vars: &VarSet) -> bool {
        let mut degs = self.terms.keys().map(|m| m.degree_in(vars));
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Every stored coefficient is positive.
    pub fn is_monotone(&self) -> bool {
        self.terms.values().all(|c| c.is_positive())
    }

    /// Applies a monomial map term by term, aggregating coefficients of colliding images.
    pub fn map_monomials(&self, mut f: impl FnMut(&Monomial) -> Monomial) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (f(m), c.clone())), self.laurent)
    }

    /// Evaluates at a full rational assignment.
    pub fn evaluate(&self, assignment: &BTreeMap<Var, BigRational>) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.iter() {
                let x = assignment
                    .get(v)
                    .ok_or_else(|| Error::MissingAssignment(v.to_string()))?;
                if e < 0 && x.is_zero() {
                    return Err(Error::DivisionByZero(format!("`{v}` = 0 under a negative exponent")));
                }
                t *= rational_pow(x, e);
            }
            acc += t;
        }
        Ok(acc)
    }
}

pub(crate) fn rational_pow(x: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Name of the permanent variable in row `i`, column `j` (1-based).
pub fn perm_var(i: usize, j: usize) -> Var {
    Var::from(format!("x{i}_{j}"))
}

/// The permanent of an `n x n` matrix of distinct variables, expanded by
/// enumerating every permutation.
pub fn permanent_oracle(n: usize) -> Result<Polynomial> {
    if n == 0 || n > PERMANENT_ORACLE_CAP {
        return Err(Error::OracleTooLarge { n, cap: PERMANENT_ORACLE_CAP });
    }
    let mut perm: Vec<usize> = (1..=n).collect();
    let mut terms = Vec::new();
    loop {
        let m = Monomial::from_pairs(perm.iter().enumerate().map(|(i, &j)| (perm_var(i + 1, j), 1)));
        terms.push((m, BigRational::one()));
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(Polynomial::from_terms(terms, false))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
struct TermRecord {
    coeff: String,
    exps: BTreeMap<String, i64>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct PolynomialRecord {
    laurent: bool,
    terms: Vec<TermRecord>,
}

impl From<&Polynomial> for PolynomialRecord {
    fn from(p: &Polynomial) -> Self {
        PolynomialRecord {
            laurent: p.laurent,
            terms: p
                .terms
                .iter()
                .map(|(m, c)| TermRecord {
                    coeff: format_rational(c),
                    exps: m.iter().map(|(v, e)| (v.to_string(), e)).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialRecord> for Polynomial {
    type Error = Error;

    fn try_from(r: PolynomialRecord) -> Result<Self> {
        let mut terms = Vec::with_capacity(r.terms.len());
        for t in r.terms {
            let c = parse_rational(&t.coeff)?;
            let m = Monomial::from_pairs(t.exps.into_iter().map(|(v, e)| (Var::from(v), e)));
            if !r.laurent && m.iter().any(|(_, e)| e < 0) {
                return Err(Error::Parse(format!(
                    "negative exponent in `{m}` but `laurent` is false"
                )));
            }
            terms.push((m, c));
        }
        Ok(Polynomial::from_terms(terms, r.laurent))
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PolynomialRecord::deserialize(d)?;
        Polynomial::try_from(r).map_err(serde::de::Error::custom)
    }
}

impl Polynomial {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polynomial serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
