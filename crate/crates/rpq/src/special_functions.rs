//! The two deformed exponential series.
//!
//! `E(z)` weights `z^n/[n]!` by `e2^C(n,2)` and `e(z)` by `e1^C(n,2)`;
//! they are reciprocal to each other in the sense `E(-z) e(z) = 1` wherever
//! both series converge.

use crate::deformation::DeformationSpec;
use crate::error::{Error, Result};

/// Capital deformed exponential `E(z) = sum_n e2^C(n,2) z^n / [n]!`,
/// truncated once three consecutive terms drop below `tol` relative to the
/// partial sum.
pub fn exp_big_e(d: &DeformationSpec, z: f64, tol: f64, max_terms: usize) -> Result<f64> {
    exp_series(d, z, d.epsilon2(), tol, max_terms)
}

/// Small deformed exponential `e(z) = sum_n e1^C(n,2) z^n / [n]!`.
pub fn exp_small_e(d: &DeformationSpec, z: f64, tol: f64, max_terms: usize) -> Result<f64> {
    exp_series(d, z, d.epsilon1(), tol, max_terms)
}

/// Terms are updated by the ratio `z * eps^n / [n+1]` so no factorial is
/// ever formed explicitly.
fn exp_series(d: &DeformationSpec, z: f64, eps: f64, tol: f64, max_terms: usize) -> Result<f64> {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut eps_pow = 1.0;
    let mut below = 0u32;
    for n in 0..max_terms {
        term *= z * eps_pow / d.number(n as f64 + 1.0);
        eps_pow *= eps;
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NonFinite("deformed exponential series"));
        }
        if term.abs() < tol * sum.abs().max(f64::MIN_POSITIVE) {
            below += 1;
            if below >= 3 {
                return Ok(sum);
            }
        } else {
            below = 0;
        }
    }
    Err(Error::NonConvergence { max_terms, last_term: term, partial_sum: sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::DeformationSpec;

    const TOL: f64 = 1e-14;
    const TERMS: usize = 20_000;

    fn grid() -> Vec<DeformationSpec> {
        vec![
            DeformationSpec::arik_coon(0.3).unwrap(),
            DeformationSpec::arik_coon(0.5).unwrap(),
            DeformationSpec::arik_coon(0.9).unwrap(),
            DeformationSpec::quesne(0.5).unwrap(),
            DeformationSpec::quesne(0.8).unwrap(),
            DeformationSpec::jagannathan_srinivasa(0.9, 0.5).unwrap(),
            DeformationSpec::jagannathan_srinivasa(1.0, 0.7).unwrap(),
            DeformationSpec::chakrabarty_jagannathan(0.9, 0.5).unwrap(),
            DeformationSpec::generalized_quesne(1.2, 0.7).unwrap(),
            DeformationSpec::generalized_quesne(1.1, 0.8).unwrap(),
            DeformationSpec::multi_parameter(1.1, 0.8, 1.0, 3.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn value_at_zero_is_one() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        assert_eq!(exp_big_e(&d, 0.0, TOL, TERMS).unwrap(), 1.0);
        assert_eq!(exp_small_e(&d, 0.0, TOL, TERMS).unwrap(), 1.0);
    }

    #[test]
    fn big_e_matches_brute_force_partial_sum() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let mut expect = 0.0;
        for n in 0..200u32 {
            expect += d.eps2_powi(crate::deformation::choose2(n as i64)) / d.factorial(n);
        }
        let got = exp_big_e(&d, 1.0, TOL, TERMS).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn small_e_has_plain_terms_for_arik_coon() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let mut expect = 0.0;
        for n in 0..200u32 {
            expect += 0.9f64.powi(n as i32) / d.factorial(n);
        }
        let got = exp_small_e(&d, 0.9, TOL, TERMS).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn reciprocity() {
        for d in grid() {
            for &z in &[0.1, 0.3, 0.7] {
                let big = exp_big_e(&d, -z, TOL, TERMS).unwrap();
                let small = exp_small_e(&d, z, TOL, TERMS).unwrap();
                assert!(
                    (big * small - 1.0).abs() < 1e-8,
                    "{} z={z}: {}",
                    d.kind(),
                    big * small - 1.0
                );
            }
        }
    }

    #[test]
    fn classical_limit_is_exp() {
        let d = DeformationSpec::arik_coon(1.0 - 1e-6).unwrap();
        for &z in &[-1.0, -0.5, 0.25, 1.0] {
            assert!((exp_big_e(&d, z, TOL, TERMS).unwrap() - z.exp()).abs() < 1e-4);
            assert!((exp_small_e(&d, z, TOL, TERMS).unwrap() - z.exp()).abs() < 1e-4);
        }
    }

    #[test]
    fn divergent_argument_errors() {
        // Small-e for this kind converges only for |z| < 1/(1-q) = 2.
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        assert!(matches!(
            exp_small_e(&d, 2.5, 1e-12, 2_000),
            Err(Error::NonConvergence { .. })
        ));
    }
}
