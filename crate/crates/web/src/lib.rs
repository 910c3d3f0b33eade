//! Browser bindings: planar shadows of a polynomial's support and
//! statistics of the permanent construction. Every export returns JSON.

use serde_json::json;
use wasm_bindgen::prelude::*;

use monocircuit::geometry::{
    is_transparent, shadow_complexity_search, shadow_svg, SearchMode, ShadowMatrix, ShadowReport,
};
use monocircuit::poly::{permanent_oracle, rat};
use monocircuit::semantics::expand_single;
use monocircuit::transforms::build_perm_projection_circuit;
use monocircuit::{ExpansionGuards, Monomial, Polynomial, Var};

/// Largest n for which the permanent construction is expanded in the page.
pub const PERM_EXPAND_MAX: usize = 4;
/// Largest entry bound offered by the search.
pub const SEARCH_K_MAX: i64 = 3;

/// Parses sums of monomials such as `3 x^2 y + x*y^-1 + 1`. Coefficients
/// are positive integers; negative exponents make the result Laurent.
pub fn parse_polynomial(text: &str) -> Result<Polynomial, String> {
    let mut terms = Vec::new();
    let mut laurent = false;
    for raw in text.split('+') {
        let term = raw.trim();
        if term.is_empty() {
            return Err(format!("empty term in {text:?}"));
        }
        let mut coeff: i64 = 1;
        let mut pairs = Vec::new();
        for factor in term.split(|c: char| c == '*' || c.is_whitespace()).filter(|f| !f.is_empty()) {
            if factor.chars().all(|c| c.is_ascii_digit()) {
                let c: i64 = factor.parse().map_err(|_| format!("coefficient {factor:?} is too large"))?;
                coeff = coeff.checked_mul(c).ok_or("coefficient overflow")?;
                continue;
            }
            let (name, exp) = match factor.split_once('^') {
                Some((n, e)) => (n, e.parse::<i64>().map_err(|_| format!("bad exponent in {factor:?}"))?),
                None => (factor, 1),
            };
            let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(format!("bad variable name {name:?}"));
            }
            laurent |= exp < 0;
            pairs.push((Var::new(name), exp));
        }
        if coeff == 0 {
            return Err(format!("zero coefficient in {term:?}"));
        }
        terms.push((Monomial::from_pairs(pairs), rat(coeff)));
    }
    let p = Polynomial::from_terms(terms, laurent);
    if p.is_zero() {
        return Err("the polynomial is zero".into());
    }
    Ok(p)
}

/// Rows separated by `;`, entries by `,` or whitespace.
pub fn parse_matrix(text: &str) -> Result<ShadowMatrix, String> {
    let rows = text
        .split(';')
        .map(|r| {
            r.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|e| !e.is_empty())
                .map(|e| e.parse::<i64>().map_err(|_| format!("bad matrix entry {e:?}")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    ShadowMatrix::new(rows).map_err(|e| e.to_string())
}

fn view(report: &ShadowReport, vars: &[Var]) -> String {
    json!({
        "svg": shadow_svg(report),
        "vars": vars.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "report": report,
    })
    .to_string()
}

fn poly_and_vars(text: &str) -> Result<(Polynomial, Vec<Var>), String> {
    let p = parse_polynomial(text)?;
    let vars: Vec<Var> = p.vars().into_iter().collect();
    Ok((p, vars))
}

/// The shadow of the support under one matrix, with columns in sorted variable order.
pub fn shadow_under(text: &str, matrix: &str) -> Result<String, String> {
    let (p, vars) = poly_and_vars(text)?;
    let m = parse_matrix(matrix)?;
    if m.cols() != vars.len() {
        return Err(format!("the matrix needs {} columns, one per variable {:?}", vars.len(), names(&vars)));
    }
    let report = is_transparent(&p, &vars, Some(&m), 0, SearchMode::default()).map_err(|e| e.to_string())?;
    Ok(view(&report, &vars))
}

/// Best shadow over matrices with entries in `[-k, k]`.
pub fn best_shadow(text: &str, k: i64) -> Result<String, String> {
    if !(0..=SEARCH_K_MAX).contains(&k) {
        return Err(format!("K must be between 0 and {SEARCH_K_MAX}"));
    }
    let (p, vars) = poly_and_vars(text)?;
    let report = shadow_complexity_search(&p, &vars, k, SearchMode::Exhaustive { budget: 2_000_000 })
        .map_err(|e| e.to_string())?;
    Ok(view(&report, &vars))
}

/// Size of the projection-gate permanent circuit, expanded and compared for small n.
pub fn perm_stats(n: usize) -> Result<String, String> {
    let c = build_perm_projection_circuit(n).map_err(|e| e.to_string())?;
    let size = c.size();
    let mut out = json!({
        "n": n,
        "size": size,
        "size_over_n_cubed": size as f64 / (n * n * n) as f64,
    });
    if n <= PERM_EXPAND_MAX {
        let p = expand_single(&c, &ExpansionGuards::default()).map_err(|e| e.to_string())?;
        let want = permanent_oracle(n).map_err(|e| e.to_string())?;
        out["terms"] = json!(p.len());
        out["matches_permanent"] = json!(p == want);
        out["polynomial"] = json!(p.to_string());
    }
    Ok(out.to_string())
}

fn names(vars: &[Var]) -> Vec<String> {
    vars.iter().map(|v| v.to_string()).collect()
}

#[wasm_bindgen(js_name = shadowUnder)]
pub fn shadow_under_js(poly: &str, matrix: &str) -> Result<String, JsValue> {
    shadow_under(poly, matrix).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = bestShadow)]
pub fn best_shadow_js(poly: &str, k: i32) -> Result<String, JsValue> {
    best_shadow(poly, k as i64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = permStats)]
pub fn perm_stats_js(n: u32) -> Result<String, JsValue> {
    perm_stats(n as usize).map_err(|e| JsValue::from_str(&e))
}
