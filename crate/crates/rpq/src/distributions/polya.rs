//! Deformed Polya urn distribution on `{0, .., n}` and its unit-step
//! special case, the deformed hypergeometric distribution.
//!
//! All brackets are taken in the base-changed deformation with parameters
//! raised to the power `-x`, where `x` is the per-draw reinforcement; the
//! `x = -1` case leaves the deformation untouched.

use crate::combinatorics::{classical_factorial, conversion_weight, stirling_table, StirlingKind};
use crate::deformation::DeformationSpec;
use crate::distributions::{Family, FamilyParams, Method, PmfTable, PolyaParams};
use crate::error::{Error, Result};

/// Probability table of the number of white draws in `n` draws.
///
/// Direct evaluation of the closed form per support point, or the one-step
/// recursion from `P_0 = e2'^(m n) [u]_n / [m+u]_n` (primed quantities in
/// the base-changed deformation).
pub fn polya_pmf(d: &DeformationSpec, params: &PolyaParams, method: Method) -> Result<PmfTable> {
    let dp = d.base_change(params.x_step);
    let n = params.n;
    let (m, u) = (params.m, params.u);
    let denom = dp.fall(m + u, n);
    if denom == 0.0 {
        return Err(Error::Singular(format!("[m+u]_n vanished for m={m}, u={u}, n={n}")));
    }
    let probs = match method {
        Method::Direct => (0..=n)
            .map(|k| {
                let kf = k as f64;
                let nf = n as f64;
                dp.epsilon1().powf(kf * (u - nf + kf))
                    * dp.epsilon2().powf((nf - kf) * (m - kf))
                    * dp.binomial_coefficient(nf, k)
                    * dp.fall(m, k)
                    * dp.fall(u, n - k)
                    / denom
            })
            .collect::<Vec<_>>(),
        Method::Recursive => {
            let mut probs = Vec::with_capacity(n as usize + 1);
            let mut p = dp.epsilon2().powf(m * n as f64) * dp.fall(u, n) / denom;
            probs.push(p);
            for k in 0..n {
                p *= polya_recursion_ratio(d, params, k)?;
                probs.push(p);
            }
            probs
        }
    };
    if probs.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("Polya probabilities"));
    }
    Ok(PmfTable::from_probs(
        Family::Polya,
        d,
        FamilyParams::Polya(*params),
        probs,
        false,
        method,
    ))
}

/// One-step ratio `P_(k+1)/P_k` in base-changed quantities.
pub fn polya_recursion_ratio(d: &DeformationSpec, params: &PolyaParams, k: u32) -> Result<f64> {
    let dp = d.base_change(params.x_step);
    let kf = k as f64;
    let nf = params.n as f64;
    let (m, u) = (params.m, params.u);
    let numerator = dp.number(nf - kf) * dp.number(m - kf);
    let denominator = dp.number(u - nf + kf + 1.0) * dp.number(kf + 1.0);
    if numerator == 0.0 {
        return Ok(0.0);
    }
    if denominator == 0.0 {
        return Err(Error::Singular(format!(
            "Polya recursion denominator vanished at k={k} (m={m}, u={u})"
        )));
    }
    Ok(dp.epsilon1().powf(u - nf + 2.0 * kf + 1.0)
        * dp.epsilon2().powf(-(nf + m - 2.0 * kf - 1.0))
        * numerator
        / denominator)
}

/// Closed-form deformed factorial moment
/// `E[[T]_j] = [n]_j [m]_j / [m+u]_j` in base-changed brackets.
pub fn polya_factorial_moment(d: &DeformationSpec, params: &PolyaParams, j: u32) -> Result<f64> {
    let dp = d.base_change(params.x_step);
    let denom = dp.fall(params.m + params.u, j);
    if denom == 0.0 {
        return Err(Error::Singular(format!("[m+u]_j vanished for j={j}")));
    }
    Ok(dp.fall(params.n as f64, j) * dp.fall(params.m, j) / denom)
}

/// Classical factorial moment `E[(T)_i]` via the Stirling conversion, a
/// finite sum over `j = i..=n` in base-changed quantities.
pub fn polya_classical_factorial_moment(
    d: &DeformationSpec,
    params: &PolyaParams,
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
    let mut sum = 0.0;
    for j in i..=n {
        let denom = dp.fall(params.m + params.u, j);
        if denom == 0.0 {
            return Err(Error::Singular(format!("[m+u]_j vanished for j={j}")));
        }
        sum += conversion_weight(&dp, j as usize, i as usize, tau)
            * dp.binomial_coefficient(n as f64, j)
            * table.entry(j as usize, i as usize)
            * dp.fall(params.m, j)
            / denom;
    }
    Ok(classical_factorial(i as usize) * sum)
}

/// The unit-step case `x = -1` of [`polya_pmf`], relabeled as its own
/// family.
pub fn hypergeometric_pmf(d: &DeformationSpec, n: u32, m: f64, u: f64) -> Result<PmfTable> {
    let params = PolyaParams::new(n, m, u, -1)?;
    let mut table = polya_pmf(d, &params, Method::Direct)?;
    table.family = Family::Hypergeometric;
    table.params = FamilyParams::Hypergeometric { n, m, u };
    Ok(table)
}

/// Probability of drawing white at draw `i` given `j - 1` white draws so
/// far: `[m-j+1] / [m+u-i+1]` in base-changed brackets, equal to the plain
/// urn form `[r+x(j-1)] / [r+s+x(i-1)]` under `m = -r/x`, `u = -s/x`.
pub fn urn_draw_probability(
    d: &DeformationSpec,
    i: u32,
    j: u32,
    m: f64,
    u: f64,
    x: i32,
) -> Result<f64> {
    if j == 0 || j > i || i == 0 {
        return Err(Error::InvalidArgument(format!(
            "draw indices must satisfy 1 <= j <= i, got i={i}, j={j}"
        )));
    }
    if x == 0 {
        return Err(Error::InvalidArgument("x must be nonzero".into()));
    }
    let dp = d.base_change(x);
    let denom = dp.number(m + u - i as f64 + 1.0);
    if denom == 0.0 {
        return Err(Error::Singular("[m+u-i+1] vanished".into()));
    }
    Ok(dp.number(m - j as f64 + 1.0) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::DeformationSpec;
    use crate::distributions::deformed_falling_moment;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn unit_step_two_point_table() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let pmf = hypergeometric_pmf(&d, 1, 1.0, 1.0).unwrap();
        // (q/(1+q), 1/(1+q)) at q = 1/2.
        assert!(rel(pmf.probs[0], 1.0 / 3.0) < 1e-12);
        assert!(rel(pmf.probs[1], 2.0 / 3.0) < 1e-12);
        assert!(pmf.normalization_residual < 1e-12);
    }

    #[test]
    fn polya_with_unit_step_equals_hypergeometric() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = PolyaParams::new(2, 2.0, 3.0, -1).unwrap();
        let p = polya_pmf(&d, &params, Method::Direct).unwrap();
        let h = hypergeometric_pmf(&d, 2, 2.0, 3.0).unwrap();
        assert_eq!(p.probs, h.probs);
    }

    #[test]
    fn normalization_is_exact_for_every_kind() {
        // The total mass identity is the Vandermonde sum, which holds for
        // the whole family of kinds.
        for d in [
            DeformationSpec::arik_coon(0.5).unwrap(),
            DeformationSpec::quesne(0.8).unwrap(),
            DeformationSpec::jagannathan_srinivasa(0.9, 0.5).unwrap(),
            DeformationSpec::generalized_quesne(1.2, 0.7).unwrap(),
            DeformationSpec::multi_parameter(1.1, 0.8, 1.0, 3.0, 1.0).unwrap(),
        ] {
            for x in [-1i32, 1, 2] {
                let params = PolyaParams::new(3, 2.5, 3.5, x).unwrap();
                let pmf = polya_pmf(&d, &params, Method::Direct).unwrap();
                assert!(
                    pmf.normalization_residual < 1e-9,
                    "{} x={x}: {:e}",
                    d.kind(),
                    pmf.normalization_residual
                );
            }
        }
    }

    #[test]
    fn direct_equals_recursive() {
        for d in [
            DeformationSpec::arik_coon(0.5).unwrap(),
            DeformationSpec::generalized_quesne(1.2, 0.7).unwrap(),
        ] {
            let params = PolyaParams::new(3, 2.5, 3.5, 1).unwrap();
            let a = polya_pmf(&d, &params, Method::Direct).unwrap();
            let b = polya_pmf(&d, &params, Method::Recursive).unwrap();
            for (x, y) in a.probs.iter().zip(&b.probs) {
                assert!((x - y).abs() < 1e-10, "{}", d.kind());
            }
        }
    }

    #[test]
    fn factorial_moment_matches_brute_force_for_unit_structure_constant() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let dp = d.base_change(-1);
        let params = PolyaParams::new(2, 2.0, 2.0, -1).unwrap();
        let pmf = polya_pmf(&d, &params, Method::Direct).unwrap();
        for j in 1..=2u32 {
            let closed = polya_factorial_moment(&d, &params, j).unwrap();
            let brute = deformed_falling_moment(&pmf, &dp, j);
            assert!(rel(closed, brute) < 1e-10, "j={j}");
        }
    }

    #[test]
    fn classical_moment_matches_brute_force() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let params = PolyaParams::new(3, 3.0, 4.0, -1).unwrap();
        let pmf = polya_pmf(&d, &params, Method::Direct).unwrap();
        for i in 1..=2u32 {
            let got = polya_classical_factorial_moment(&d, &params, i, 0).unwrap();
            let brute = crate::distributions::classical_falling_moment_of_pmf(&pmf, i);
            assert!(rel(got, brute) < 1e-9, "i={i}");
        }
    }

    #[test]
    fn classical_limit_matches_hypergeometric_counts() {
        let d = DeformationSpec::arik_coon(1.0 - 1e-6).unwrap();
        let (n, m, u) = (3u32, 5.0, 4.0);
        let pmf = hypergeometric_pmf(&d, n, m, u).unwrap();
        let choose = |a: f64, b: u32| -> f64 {
            let mut acc = 1.0;
            for v in 0..b as i64 {
                acc *= (a - v as f64) / (v as f64 + 1.0);
            }
            acc
        };
        for k in 0..=n {
            let classical = choose(m, k) * choose(u, n - k) / choose(m + u, n);
            assert!(
                (pmf.probs[k as usize] - classical).abs() < 1e-3,
                "k={k}: {} vs {classical}",
                pmf.probs[k as usize]
            );
        }
    }

    #[test]
    fn empty_draw_count_is_a_point_mass() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let pmf = hypergeometric_pmf(&d, 0, 2.0, 3.0).unwrap();
        assert_eq!(pmf.probs, vec![1.0]);
    }

    #[test]
    fn urn_counts_constructor_matches_rescaled_parameters() {
        let params = PolyaParams::from_urn(3, 2, 3, 1).unwrap();
        assert_eq!((params.m, params.u), (-2.0, -3.0));
        let removal = PolyaParams::from_urn(3, 2, 3, -1).unwrap();
        assert_eq!((removal.m, removal.u), (2.0, 3.0));
        assert!(PolyaParams::from_urn(3, 2, 3, 0).is_err());
    }

    #[test]
    fn urn_probability_two_printed_forms_agree() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let (r, s, x) = (2.0f64, 3.0f64, 1i32);
        let (m, u) = (-r / x as f64, -s / x as f64);
        for i in 1..=3u32 {
            for j in 1..=i {
                let via_base_change = urn_draw_probability(&d, i, j, m, u, x).unwrap();
                let plain =
                    d.number(r + x as f64 * (j as f64 - 1.0)) / d.number(r + s + x as f64 * (i as f64 - 1.0));
                assert!(rel(via_base_change, plain) < 1e-12, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn urn_probability_classical_limit_and_degenerate_case() {
        let d = DeformationSpec::arik_coon(1.0 - 1e-6).unwrap();
        let (r, s, x) = (2.0f64, 3.0f64, 1i32);
        let (m, u) = (-r / x as f64, -s / x as f64);
        for i in 1..=3u32 {
            for j in 1..=i {
                let got = urn_draw_probability(&d, i, j, m, u, x).unwrap();
                let classical =
                    (r + x as f64 * (j as f64 - 1.0)) / (r + s + x as f64 * (i as f64 - 1.0));
                assert!((got - classical).abs() < 1e-3);
            }
        }
        // No black boxes: the first draw is white with certainty.
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let got = urn_draw_probability(&d, 1, 1, -2.0, 0.0, 1).unwrap();
        assert!(rel(got, 1.0) < 1e-12);
    }

    #[test]
    fn singular_parameters_are_rejected() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        // m + u = 0 makes [m+u]_n vanish.
        let params = PolyaParams::new(2, 1.0, -1.0, -1).unwrap();
        assert!(matches!(
            polya_pmf(&d, &params, Method::Direct),
            Err(Error::Singular(_))
        ));
    }
}
