//! Deformed Euler distribution on `{0, 1, 2, ...}`:
//!
//! ```text
//! P_x = E(-theta) e1^C(x,2) theta^x / [x]!
//! ```
//!
//! The infinite support is truncated once a geometric bound on the
//! remaining tail drops below `tail_tol`.

use crate::combinatorics::{classical_factorial, conversion_weight, stirling_table, StirlingKind};
use crate::deformation::{choose2, DeformationKind, DeformationSpec};
use crate::distributions::{EulerParams, Family, FamilyParams, Method, PmfTable};
use crate::error::{Error, Result};
use crate::special_functions::{exp_big_e, exp_small_e};

const SERIES_TOL: f64 = 1e-14;
const SERIES_TERMS: usize = 100_000;
const MAX_SUPPORT: usize = 100_000;
/// Tail target of the classical-moment conversion series, relative to
/// `max(1, |sum|)`.  The Stirling-table order is capped at 20, which bounds
/// the reachable tail; 3e-8 is attainable across the audit grid and sits
/// below the audit tolerances.
const CONVERSION_TOL: f64 = 3e-8;

fn check_theta_domain(d: &DeformationSpec, theta: f64) -> Result<()> {
    if let DeformationKind::ArikCoon { q } = d.kind() {
        let limit = 1.0 / (1.0 - q);
        if !(theta < limit) {
            return Err(Error::Domain {
                kind: "arik-coon",
                reason: format!("Euler rate must satisfy theta < 1/(1-q) = {limit}, got {theta}"),
            });
        }
    }
    Ok(())
}

/// Build the truncated table.  Both methods share the stopping rule; they
/// differ in how each probability is produced (closed form per point vs.
/// ratio recursion from `P_0 = E(-theta)`).
pub fn euler_pmf(d: &DeformationSpec, params: &EulerParams, method: Method) -> Result<PmfTable> {
    check_theta_domain(d, params.theta)?;
    let theta = params.theta;
    let p0 = exp_big_e(d, -theta, SERIES_TOL, SERIES_TERMS)?;
    let mut probs = Vec::new();
    let mut p = p0;
    probs.push(p);
    let mut shrinking = 0u32;
    for x in 0..MAX_SUPPORT as u32 {
        let ratio = euler_recursion_ratio(d, params, x);
        // Geometric tail bound once the ratio stays below 1.
        if ratio.abs() < 1.0 {
            shrinking += 1;
            let tail = p.abs() * ratio.abs() / (1.0 - ratio.abs());
            if shrinking >= 3 && tail < params.tail_tol {
                break;
            }
        } else {
            shrinking = 0;
        }
        p = match method {
            Method::Direct => {
                p0 * d.eps1_powi(choose2(x as i64 + 1))
                    * theta.powi(x as i32 + 1)
                    / d.factorial(x + 1)
            }
            Method::Recursive => p * ratio,
        };
        probs.push(p);
        if !p.is_finite() {
            return Err(Error::NonFinite("Euler probabilities"));
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
        Family::Euler,
        d,
        FamilyParams::Euler(*params),
        probs,
        true,
        method,
    ))
}

/// Ratio `P_(x+1)/P_x = theta e1^x / [x+1]`.
pub fn euler_recursion_ratio(d: &DeformationSpec, params: &EulerParams, x: u32) -> f64 {
    params.theta * d.eps1_powi(x as i64) / d.number(x as f64 + 1.0)
}

/// Closed-form deformed factorial moment
/// `E[[X]_j] = theta^j e1^C(j,2) E(-theta) e(e1^j theta)`.
pub fn euler_factorial_moment(d: &DeformationSpec, params: &EulerParams, j: u32) -> Result<f64> {
    check_theta_domain(d, params.theta)?;
    let theta = params.theta;
    let big = exp_big_e(d, -theta, SERIES_TOL, SERIES_TERMS)?;
    let small = exp_small_e(d, d.eps1_powi(j as i64) * theta, SERIES_TOL, SERIES_TERMS)?;
    Ok(theta.powi(j as i32) * d.eps1_powi(choose2(j as i64)) * big * small)
}

/// Classical factorial moment `E[(X)_i]` as a truncated conversion series
/// over the deformed factorial moments.
pub fn euler_classical_factorial_moment(
    d: &DeformationSpec,
    params: &EulerParams,
    i: u32,
    tau: i64,
    max_terms: usize,
) -> Result<f64> {
    if i == 0 {
        return Err(Error::InvalidArgument("moment order must be at least 1".into()));
    }
    // The conversion weights need first-kind Stirling numbers up to the
    // truncation order, and the table order is capped at 20 by the
    // conditioning guard.
    let top = (i as usize + max_terms).min(20);
    let table = stirling_table(d, StirlingKind::First, 0, top)
        .map_err(|e| Error::Dependency(format!("Stirling table of order {top}: {e}")))?;
    let mut sum = 0.0;
    let mut previous = f64::NAN;
    let mut bounded = 0u32;
    let mut converged = false;
    for j in i as usize..=top {
        let moment = euler_factorial_moment(d, params, j as u32)?;
        let term = conversion_weight(d, j, i as usize, tau) * table.entry(j, i as usize) * moment
            / d.factorial(j as u32);
        sum += term;
        // Geometric tail bound from the observed term ratio.
        let ratio = (term / previous).abs();
        previous = term;
        if ratio < 1.0 {
            bounded += 1;
            let tail = term.abs() * ratio / (1.0 - ratio);
            if bounded >= 2 && tail < CONVERSION_TOL * sum.abs().max(1.0) {
                converged = true;
                break;
            }
        } else {
            bounded = 0;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            max_terms: top,
            last_term: previous,
            partial_sum: sum,
        });
    }
    Ok(classical_factorial(i as usize) * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{classical_falling_moment_of_pmf, deformed_falling_moment};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn recursion_ratio_is_exact() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = EulerParams::new(0.5, 1e-10).unwrap();
        let pmf = euler_pmf(&d, &params, Method::Direct).unwrap();
        for x in 0..pmf.len() - 1 {
            let expect = euler_recursion_ratio(&d, &params, x as u32);
            let got = pmf.probs[x + 1] / pmf.probs[x];
            assert!(rel(got, expect) < 1e-12);
        }
    }

    #[test]
    fn truncated_sum_is_one() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = EulerParams::new(0.5, 1e-9).unwrap();
        let pmf = euler_pmf(&d, &params, Method::Direct).unwrap();
        assert!(pmf.normalization_residual < 1e-8);
        assert!(pmf.truncated);
    }

    #[test]
    fn direct_equals_recursive() {
        for d in [
            DeformationSpec::arik_coon(0.5).unwrap(),
            DeformationSpec::quesne(0.8).unwrap(),
            DeformationSpec::generalized_quesne(1.2, 0.7).unwrap(),
        ] {
            let params = EulerParams::new(0.5, 1e-10).unwrap();
            let a = euler_pmf(&d, &params, Method::Direct).unwrap();
            let b = euler_pmf(&d, &params, Method::Recursive).unwrap();
            assert_eq!(a.len(), b.len(), "{}", d.kind());
            for (x, y) in a.probs.iter().zip(&b.probs) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn factorial_moment_reduces_to_theta_power_for_arik_coon() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = EulerParams::new(0.5, 1e-10).unwrap();
        for j in 1..=3u32 {
            let got = euler_factorial_moment(&d, &params, j).unwrap();
            assert!(rel(got, 0.5f64.powi(j as i32)) < 1e-10, "j={j}");
        }
    }

    #[test]
    fn factorial_moment_matches_brute_force() {
        for d in [
            DeformationSpec::arik_coon(0.5).unwrap(),
            DeformationSpec::quesne(0.8).unwrap(),
            DeformationSpec::generalized_quesne(1.2, 0.7).unwrap(),
        ] {
            let params = EulerParams::new(0.5, 1e-12).unwrap();
            let pmf = euler_pmf(&d, &params, Method::Direct).unwrap();
            for j in 1..=2u32 {
                let closed = euler_factorial_moment(&d, &params, j).unwrap();
                let brute = deformed_falling_moment(&pmf, &d, j);
                assert!(rel(closed, brute) < 1e-7, "{} j={j}", d.kind());
            }
        }
    }

    #[test]
    fn factorial_moment_vanishes_with_theta() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let tiny = EulerParams::new(1e-12, 1e-10).unwrap();
        let got = euler_factorial_moment(&d, &tiny, 1).unwrap();
        assert!(got.abs() < 1e-10);
    }

    #[test]
    fn classical_moment_matches_brute_force() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = EulerParams::new(0.5, 1e-12).unwrap();
        let pmf = euler_pmf(&d, &params, Method::Direct).unwrap();
        for i in 1..=2u32 {
            let got = euler_classical_factorial_moment(&d, &params, i, 0, 18).unwrap();
            let brute = classical_falling_moment_of_pmf(&pmf, i);
            assert!(rel(got, brute) < 1e-7, "i={i}: {got} vs {brute}");
        }
        // tau-independence for a first-structure-constant-one kind.
        let a = euler_classical_factorial_moment(&d, &params, 2, 0, 18).unwrap();
        let b = euler_classical_factorial_moment(&d, &params, 2, 9, 18).unwrap();
        assert!(rel(a, b) < 1e-12);
    }

    #[test]
    fn theta_domain_guard_for_arik_coon() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        // Limit is 1/(1-q) = 2.
        assert!(matches!(
            euler_pmf(&d, &EulerParams::new(2.5, 1e-9).unwrap(), Method::Direct),
            Err(Error::Domain { .. })
        ));
    }
}
