//! Inverse deformed Polya distribution: the number of black draws before
//! the n-th white draw.  Support runs over `y = 0, 1, 2, ...` and is
//! truncated by a geometric tail bound; for integer `u` the factor `[u]_y`
//! vanishes beyond `y = u` and the support closes on its own.

use crate::combinatorics::{classical_factorial, conversion_weight, stirling_table, StirlingKind};
use crate::deformation::DeformationSpec;
use crate::distributions::{Family, FamilyParams, InversePolyaParams, Method, PmfTable};
use crate::error::{Error, Result};

const MAX_SUPPORT: usize = 100_000;

/// Constant prefactor `e1^(n(u - x))` in the original structure constant.
fn leading_weight(d: &DeformationSpec, params: &InversePolyaParams) -> f64 {
    d.epsilon1().powf(params.n as f64 * (params.u - params.x_step as f64))
}

/// Probability of `y` at the closed form, in base-changed brackets.
fn direct_probability(
    d: &DeformationSpec,
    dp: &DeformationSpec,
    params: &InversePolyaParams,
    y: u32,
) -> Result<f64> {
    let n = params.n;
    let (m, u) = (params.m, params.u);
    let denom = dp.fall(m + u, n + y);
    if denom == 0.0 {
        return Err(Error::Singular(format!("[m+u]_(n+y) vanished at y={y}")));
    }
    Ok(leading_weight(d, params)
        * dp.epsilon2().powf(y as f64 * (m - n as f64 + 1.0))
        * dp.binomial_coefficient((n + y) as f64 - 1.0, y)
        * dp.fall(m, n)
        * dp.fall(u, y)
        / denom)
}

/// One-step ratio `P_(y+1)/P_y` in base-changed quantities; zero numerators
/// short-circuit so that structurally impossible values propagate as exact
/// zeros.
pub fn inverse_polya_recursion_ratio(
    d: &DeformationSpec,
    params: &InversePolyaParams,
    y: u32,
) -> Result<f64> {
    let dp = d.base_change(params.x_step);
    let yf = y as f64;
    let nf = params.n as f64;
    let (m, u) = (params.m, params.u);
    let numerator = dp.number(nf + yf) * dp.number(u - yf);
    if numerator == 0.0 {
        return Ok(0.0);
    }
    let denominator = dp.number(yf + 1.0) * dp.number(m + u - nf - yf);
    if denominator == 0.0 {
        return Err(Error::Singular(format!(
            "inverse Polya recursion denominator vanished at y={y}"
        )));
    }
    Ok(dp.epsilon2().powf(m - nf + 1.0) * numerator / denominator)
}

/// Build the truncated table from `P_0 = e1^(n(u-x)) [m]_n / [m+u]_n`.
pub fn inverse_polya_pmf(
    d: &DeformationSpec,
    params: &InversePolyaParams,
    method: Method,
) -> Result<PmfTable> {
    let dp = d.base_change(params.x_step);
    let denom = dp.fall(params.m + params.u, params.n);
    if denom == 0.0 {
        return Err(Error::Singular("[m+u]_n vanished".into()));
    }
    let mut probs = Vec::new();
    let mut p = leading_weight(d, params) * dp.fall(params.m, params.n) / denom;
    probs.push(p);
    let mut shrinking = 0u32;
    for y in 0..MAX_SUPPORT as u32 {
        let ratio = inverse_polya_recursion_ratio(d, params, y)?;
        if ratio.abs() < 1.0 {
            shrinking += 1;
            let tail = p.abs() * ratio.abs() / (1.0 - ratio.abs());
            if (shrinking >= 3 || ratio == 0.0) && tail < params.tail_tol {
                break;
            }
        } else {
            shrinking = 0;
        }
        p = match method {
            Method::Direct => direct_probability(d, &dp, params, y + 1)?,
            Method::Recursive => p * ratio,
        };
        probs.push(p);
        if !p.is_finite() {
            return Err(Error::NonFinite("inverse Polya probabilities"));
        }
    }
    if probs.len() >= MAX_SUPPORT {
        return Err(Error::NonConvergence {
            max_terms: MAX_SUPPORT,
            last_term: *probs.last().unwrap(),
            partial_sum: probs.iter().sum(),
        });
    }
    Ok(PmfTable::from_probs(
        Family::InversePolya,
        d,
        FamilyParams::InversePolya(*params),
        probs,
        true,
        method,
    ))
}

/// Closed-form deformed factorial moment
/// `E[[Y]_j] = [n+j-1]_j [u]_j e2'^(j(m-n+1)) / [m+j]_j`
/// in base-changed brackets.
pub fn inverse_polya_factorial_moment(
    d: &DeformationSpec,
    params: &InversePolyaParams,
    j: u32,
) -> Result<f64> {
    let dp = d.base_change(params.x_step);
    let nf = params.n as f64;
    let denom = dp.fall(params.m + j as f64, j);
    if denom == 0.0 {
        return Err(Error::Singular(format!("[m+j]_j vanished for j={j}")));
    }
    Ok(dp.fall(nf + j as f64 - 1.0, j)
        * dp.fall(params.u, j)
        * dp.epsilon2().powf(j as f64 * (params.m - nf + 1.0))
        / denom)
}

/// Classical factorial moment `E[(Y)_i]` via the Stirling conversion over
/// `j = i..=n`, all quantities base-changed.
pub fn inverse_polya_classical_factorial_moment(
    d: &DeformationSpec,
    params: &InversePolyaParams,
    i: u32,
    tau: i64,
) -> Result<f64> {
    let n = params.n;
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!(
            "moment order must satisfy 1 <= i <= n, got i={i}, n={n}"
        )));
    }
    let dp = d.base_change(params.x_step);
    let table = stirling_table(&dp, StirlingKind::First, 0, n as usize)
        .map_err(|e| Error::Dependency(format!("Stirling table of order {n}: {e}")))?;
    let nf = n as f64;
    let mut sum = 0.0;
    for j in i..=n {
        let denom = dp.fall(params.m + j as f64, j);
        if denom == 0.0 {
            return Err(Error::Singular(format!("[m+j]_j vanished for j={j}")));
        }
        sum += conversion_weight(&dp, j as usize, i as usize, tau)
            * dp.binomial_coefficient(nf + j as f64 - 1.0, j)
            * table.entry(j as usize, i as usize)
            * dp.fall(params.u, j)
            * dp.epsilon2().powf(j as f64 * (params.m - nf + 1.0))
            / denom;
    }
    Ok(classical_factorial(i as usize) * sum)
}
