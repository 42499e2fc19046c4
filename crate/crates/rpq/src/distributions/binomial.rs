//! Deformed binomial distribution on `{0, .., n}`:
//!
//! ```text
//! P_k = [n; k] p0^k (1 (-) p0)^(n-k)
//! ```
//!
//! The table sums to 1 exactly when the first structure constant is 1
//! (e.g. the Arik-Coon and Quesne kinds); elsewhere the residual is
//! recorded on the table and surfaced by the audit.

use crate::combinatorics::{classical_factorial, conversion_weight, stirling_table, StirlingKind};
use crate::deformation::DeformationSpec;
use crate::distributions::{BinomialParams, Family, FamilyParams, Method, PmfTable};
use crate::error::{Error, Result};

/// Evaluate the table either pointwise from the closed form or by the
/// one-step recursion from `P_0 = (1 (-) p0)^n`.
pub fn binomial_pmf(d: &DeformationSpec, params: &BinomialParams, method: Method) -> Result<PmfTable> {
    let n = params.n;
    let p0 = params.p0;
    let probs = match method {
        Method::Direct => (0..=n)
            .map(|k| {
                d.binomial_coefficient(n as f64, k)
                    * p0.powi(k as i32)
                    * d.shifted_factorial_minus(1.0, p0, n - k)
            })
            .collect::<Vec<_>>(),
        Method::Recursive => {
            let mut probs = Vec::with_capacity(n as usize + 1);
            let mut p = d.shifted_factorial_minus(1.0, p0, n);
            probs.push(p);
            for k in 0..n {
                p *= binomial_recursion_ratio(d, params, k)?;
                probs.push(p);
            }
            probs
        }
    };
    if probs.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("binomial probabilities"));
    }
    Ok(PmfTable::from_probs(
        Family::Binomial,
        d,
        FamilyParams::Binomial(*params),
        probs,
        false,
        method,
    ))
}

/// One-step ratio `P_(k+1)/P_k`.  The denominator is the trailing factor of
/// `(1 (-) p0)^(n-k)`, i.e. `e1^(n-k-1) - e2^(n-k-1) p0`.
pub fn binomial_recursion_ratio(
    d: &DeformationSpec,
    params: &BinomialParams,
    k: u32,
) -> Result<f64> {
    let n = params.n;
    debug_assert!(k < n);
    let e = (n - k - 1) as i64;
    let denom = d.eps1_powi(e) - d.eps2_powi(e) * params.p0;
    if denom == 0.0 {
        return Err(Error::Singular(format!(
            "binomial recursion denominator vanished at k={k}"
        )));
    }
    Ok(d.number((n - k) as f64) / d.number((k + 1) as f64) * params.p0 / denom)
}

/// Closed-form deformed factorial moment `E[[S]_j] = [n]_j p0^j`; zero for
/// `j > n` since the support product is empty.
pub fn binomial_factorial_moment(d: &DeformationSpec, params: &BinomialParams, j: u32) -> f64 {
    if j > params.n {
        return 0.0;
    }
    d.fall(params.n as f64, j) * params.p0.powi(j as i32)
}

/// Classical factorial moment `E[(S)_i]` via the first-kind Stirling
/// conversion of the deformed binomial moments; a finite sum over
/// `j = i..=n`.
pub fn binomial_classical_factorial_moment(
    d: &DeformationSpec,
    params: &BinomialParams,
    i: u32,
    tau: i64,
) -> Result<f64> {
    let n = params.n;
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!(
            "moment order must satisfy 1 <= i <= n, got i={i}, n={n}"
        )));
    }
    let table = stirling_table(d, StirlingKind::First, 0, n as usize)
        .map_err(|e| Error::Dependency(format!("Stirling table of order {n}: {e}")))?;
    let mut sum = 0.0;
    for j in i..=n {
        sum += conversion_weight(d, j as usize, i as usize, tau)
            * d.binomial_coefficient(n as f64, j)
            * params.p0.powi(j as i32)
            * table.entry(j as usize, i as usize);
    }
    Ok(classical_factorial(i as usize) * sum)
}

/// Mean `E[[S]] = p0 [n]`.
pub fn binomial_mean(d: &DeformationSpec, params: &BinomialParams) -> f64 {
    params.p0 * d.number(params.n as f64)
}

/// Variance `Var[[S]] = p0 [n] ([1] + X p0 [n-1] - p0 [n])` with
/// `X = ([2] - [1])/[1]`.
pub fn binomial_variance(d: &DeformationSpec, params: &BinomialParams) -> f64 {
    let n = params.n as f64;
    let p0 = params.p0;
    let one = d.number(1.0);
    let x = (d.number(2.0) - one) / one;
    p0 * d.number(n) * (one + x * p0 * d.number(n - 1.0) - p0 * d.number(n))
}

/// Margin of the side condition `X p0 [n-1] > p0 [n] - [1]` attached to the
/// variance formula; negative margins are reported by the audit, never
/// rejected.
pub fn variance_condition_margin(d: &DeformationSpec, params: &BinomialParams) -> f64 {
    let n = params.n as f64;
    let p0 = params.p0;
    let one = d.number(1.0);
    let x = (d.number(2.0) - one) / one;
    x * p0 * d.number(n - 1.0) - (p0 * d.number(n) - one)
}

/// Closed form `p0^r [n]_r` of the product moment of order `r`; the
/// matching oracle is
/// [`crate::distributions::product_moment_bracket`].
pub fn binomial_product_moment(d: &DeformationSpec, params: &BinomialParams, r: u32) -> f64 {
    params.p0.powi(r as i32) * d.fall(params.n as f64, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::DeformationSpec;
    use crate::distributions::{
        classical_falling_moment_of_pmf, deformed_falling_moment, deformed_power_moment,
        product_moment_bracket,
    };

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn single_trial_is_bernoulli_for_every_kind() {
        for d in [
            DeformationSpec::arik_coon(0.5).unwrap(),
            DeformationSpec::quesne(0.8).unwrap(),
            DeformationSpec::jagannathan_srinivasa(0.9, 0.5).unwrap(),
            DeformationSpec::generalized_quesne(1.2, 0.7).unwrap(),
        ] {
            let params = BinomialParams::new(1, 0.4).unwrap();
            let pmf = binomial_pmf(&d, &params, Method::Direct).unwrap();
            assert!(rel(pmf.probs[0], 0.6) < 1e-12, "{}", d.kind());
            assert!(rel(pmf.probs[1], 0.4) < 1e-12);
        }
    }

    #[test]
    fn frozen_two_trial_table() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = BinomialParams::new(2, 0.5).unwrap();
        let pmf = binomial_pmf(&d, &params, Method::Direct).unwrap();
        assert!(rel(pmf.probs[0], 0.375) < 1e-12);
        assert!(rel(pmf.probs[1], 0.375) < 1e-12);
        assert!(rel(pmf.probs[2], 0.25) < 1e-12);
        assert!(pmf.normalization_residual < 1e-12);
        assert!(pmf.out_of_range.is_empty());
    }

    #[test]
    fn direct_equals_recursive() {
        let d = DeformationSpec::generalized_quesne(1.2, 0.7).unwrap();
        let params = BinomialParams::new(5, 0.3).unwrap();
        let a = binomial_pmf(&d, &params, Method::Direct).unwrap();
        let b = binomial_pmf(&d, &params, Method::Recursive).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn factorial_moment_examples() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = BinomialParams::new(2, 0.5).unwrap();
        assert!(rel(
            binomial_factorial_moment(&d, &params, 1),
            binomial_mean(&d, &params)
        ) < 1e-12);
        assert!(rel(binomial_factorial_moment(&d, &params, 2), 0.375) < 1e-12);
        let pmf = binomial_pmf(&d, &params, Method::Direct).unwrap();
        assert!(rel(deformed_falling_moment(&pmf, &d, 2), 0.375) < 1e-12);

        // All mass at k = n when p0 = 1.
        let degenerate = BinomialParams::new(3, 1.0).unwrap();
        assert!(rel(binomial_factorial_moment(&d, &degenerate, 3), d.fall(3.0, 3)) < 1e-12);
        let pmf = binomial_pmf(&d, &degenerate, Method::Direct).unwrap();
        assert!(rel(pmf.probs[3], 1.0) < 1e-12);
    }

    #[test]
    fn frozen_mean_and_variance() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = BinomialParams::new(2, 0.5).unwrap();
        assert!(rel(binomial_mean(&d, &params), 0.75) < 1e-12);
        // Variance agrees with the single-parameter form [n] p0 (1 - p0).
        assert!(rel(binomial_variance(&d, &params), 0.375) < 1e-12);
        let pmf = binomial_pmf(&d, &params, Method::Direct).unwrap();
        let mean = deformed_falling_moment(&pmf, &d, 1);
        let second = deformed_power_moment(&pmf, &d, 2);
        assert!(rel(binomial_mean(&d, &params), mean) < 1e-12);
        assert!(rel(binomial_variance(&d, &params), second - mean * mean) < 1e-12);
    }

    #[test]
    fn product_moment_matches_bracket_expectation() {
        // n = 2 keeps the closed form exact for every kind; larger n needs
        // the first structure constant to be 1.
        for d in [
            DeformationSpec::arik_coon(0.5).unwrap(),
            DeformationSpec::quesne(0.8).unwrap(),
            DeformationSpec::jagannathan_srinivasa(0.9, 0.5).unwrap(),
            DeformationSpec::generalized_quesne(1.2, 0.7).unwrap(),
        ] {
            let params = BinomialParams::new(2, 0.4).unwrap();
            let pmf = binomial_pmf(&d, &params, Method::Direct).unwrap();
            for r in 1..=2u32 {
                let closed = binomial_product_moment(&d, &params, r);
                let brute = product_moment_bracket(&pmf, &d, r);
                assert!(rel(closed, brute) < 1e-10, "{} r={r}", d.kind());
            }
        }
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = BinomialParams::new(6, 0.4).unwrap();
        let pmf = binomial_pmf(&d, &params, Method::Direct).unwrap();
        assert!(rel(binomial_product_moment(&d, &params, 1), binomial_mean(&d, &params)) < 1e-12);
        for r in 1..=3u32 {
            let closed = binomial_product_moment(&d, &params, r);
            let brute = product_moment_bracket(&pmf, &d, r);
            assert!(rel(closed, brute) < 1e-10, "r={r}");
        }
    }

    #[test]
    fn classical_factorial_moment_matches_brute_force() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = BinomialParams::new(3, 0.5).unwrap();
        let pmf = binomial_pmf(&d, &params, Method::Direct).unwrap();
        let got = binomial_classical_factorial_moment(&d, &params, 2, 0).unwrap();
        let brute = classical_falling_moment_of_pmf(&pmf, 2);
        assert!(rel(got, brute) < 1e-10, "{got} vs {brute}");
        // tau does not matter for a kind with first structure constant 1.
        let other_tau = binomial_classical_factorial_moment(&d, &params, 2, 7).unwrap();
        assert!(rel(got, other_tau) < 1e-12);
        // Single surviving term at i = n.
        let at_top = binomial_classical_factorial_moment(&d, &params, 3, 0).unwrap();
        assert!(rel(at_top, classical_falling_moment_of_pmf(&pmf, 3)) < 1e-10);
    }

    #[test]
    fn recursion_singularity_is_reported() {
        // e1^e - e2^e p0 = 0 at k = n-1 (e = 0) when p0 = 1.
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = BinomialParams::new(2, 1.0).unwrap();
        assert!(matches!(
            binomial_pmf(&d, &params, Method::Recursive),
            Err(Error::Singular(_))
        ));
        // The direct method is unaffected.
        assert!(binomial_pmf(&d, &params, Method::Direct).is_ok());
    }
}
