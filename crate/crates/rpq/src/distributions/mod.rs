//! Deformed discrete distributions.
//!
//! Four families are implemented: binomial, Euler, Polya and inverse Polya
//! (with the hypergeometric as the unit-step Polya case).  Each family
//! offers a direct per-point evaluation of its probability formula and an
//! equivalent recursion-generated evaluation, closed-form deformed
//! factorial moments, conversions to classical moments, and inverse-CDF
//! sampling with a seeded deterministic generator.

mod binomial;
mod euler;
mod inverse_polya;
mod polya;

pub use binomial::{
    binomial_classical_factorial_moment, binomial_factorial_moment, binomial_mean, binomial_pmf,
    binomial_product_moment, binomial_recursion_ratio, binomial_variance, variance_condition_margin,
};
pub use euler::{
    euler_classical_factorial_moment, euler_factorial_moment, euler_pmf, euler_recursion_ratio,
};
pub use inverse_polya::{
    inverse_polya_classical_factorial_moment, inverse_polya_factorial_moment, inverse_polya_pmf,
    inverse_polya_recursion_ratio,
};
pub use polya::{
    hypergeometric_pmf, polya_classical_factorial_moment, polya_factorial_moment, polya_pmf,
    polya_recursion_ratio, urn_draw_probability,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::deformation::{DeformationDescriptor, DeformationSpec};
use crate::error::{Error, Result};

/// Probabilities outside `[-RANGE_SLACK, 1 + RANGE_SLACK]` are recorded in
/// [`PmfTable::out_of_range`]; exotic parameter points are reported rather
/// than rejected.
const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Binomial,
    Euler,
    Polya,
    InversePolya,
    Hypergeometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    Recursive,
}

/// Number of trials `n` and success weight `p0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialParams {
    pub n: u32,
    pub p0: f64,
}

impl BinomialParams {
    /// `p0` must lie in `(0, 1]`; the upper endpoint is the degenerate
    /// all-successes distribution.
    pub fn new(n: u32, p0: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0 <= 1.0) || !p0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "binomial weight p0 must be in (0, 1], got {p0}"
            )));
        }
        Ok(BinomialParams { n, p0 })
    }
}

/// Rate `theta` and the cumulative tail tolerance used to truncate the
/// infinite support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerParams {
    pub theta: f64,
    pub tail_tol: f64,
}

impl EulerParams {
    pub fn new(theta: f64, tail_tol: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "rate theta must be positive, got {theta}"
            )));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tail tolerance must be in (0, 1), got {tail_tol}"
            )));
        }
        Ok(EulerParams { theta, tail_tol })
    }
}

/// Urn parameters in the rescaled form `m = -r/x`, `u = -s/x` for an urn
/// with `r` white boxes, `s` black boxes, and `x` same-color additions per
/// draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyaParams {
    pub n: u32,
    pub m: f64,
    pub u: f64,
    pub x_step: i32,
}

impl PolyaParams {
    pub fn new(n: u32, m: f64, u: f64, x_step: i32) -> Result<Self> {
        if x_step == 0 {
            return Err(Error::InvalidArgument("x_step must be nonzero".into()));
        }
        if !m.is_finite() || !u.is_finite() {
            return Err(Error::InvalidArgument("m and u must be finite".into()));
        }
        Ok(PolyaParams { n, m, u, x_step })
    }

    /// Convenience constructor from integer urn counts.
    pub fn from_urn(n: u32, white: u32, black: u32, x_step: i32) -> Result<Self> {
        if x_step == 0 {
            return Err(Error::InvalidArgument("x_step must be nonzero".into()));
        }
        let x = x_step as f64;
        Self::new(n, -(white as f64) / x, -(black as f64) / x, x_step)
    }
}

/// Parameters of the inverse Polya waiting-time distribution: `n` target
/// white draws, rescaled urn weights `m`, `u`, and the truncation tolerance
/// for the infinite support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversePolyaParams {
    pub n: u32,
    pub m: f64,
    pub u: f64,
    pub x_step: i32,
    pub tail_tol: f64,
}

impl InversePolyaParams {
    pub fn new(n: u32, m: f64, u: f64, x_step: i32, tail_tol: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if x_step == 0 {
            return Err(Error::InvalidArgument("x_step must be nonzero".into()));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tail tolerance must be in (0, 1), got {tail_tol}"
            )));
        }
        Ok(InversePolyaParams { n, m, u, x_step, tail_tol })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family-params")]
pub enum FamilyParams {
    Binomial(BinomialParams),
    Euler(EulerParams),
    Polya(PolyaParams),
    InversePolya(InversePolyaParams),
    Hypergeometric { n: u32, m: f64, u: f64 },
}

/// A finite (possibly truncated) probability table over `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfTable {
    pub family: Family,
    pub deformation: DeformationDescriptor,
    pub params: FamilyParams,
    pub support: Vec<u64>,
    pub probs: Vec<f64>,
    /// `|sum(probs) - 1|`.
    pub normalization_residual: f64,
    pub truncated: bool,
    pub method: Method,
    /// Indices whose value falls outside `[0, 1]` beyond slack; recorded,
    /// not rejected.
    pub out_of_range: Vec<usize>,
}

impl PmfTable {
    pub(crate) fn from_probs(
        family: Family,
        d: &DeformationSpec,
        params: FamilyParams,
        probs: Vec<f64>,
        truncated: bool,
        method: Method,
    ) -> PmfTable {
        let sum: f64 = probs.iter().sum();
        let out_of_range = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&p))
            .map(|(i, _)| i)
            .collect();
        PmfTable {
            family,
            deformation: d.descriptor(),
            params,
            support: (0..probs.len() as u64).collect(),
            probs,
            normalization_residual: (sum - 1.0).abs(),
            truncated,
            method,
            out_of_range,
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Closed-form vs. oracle value of one moment order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub order: u32,
    pub closed_form: f64,
    pub brute_force: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

impl MomentReport {
    pub fn new(order: u32, closed_form: f64, brute_force: f64) -> MomentReport {
        let abs_err = (closed_form - brute_force).abs();
        MomentReport {
            order,
            closed_form,
            brute_force,
            abs_err,
            rel_err: abs_err / brute_force.abs().max(1.0),
        }
    }
}

/// Brute-force deformed falling-factorial moment `sum_k [k]_j p_k`, with the
/// brackets taken in `brackets` (the base-changed deformation for the urn
/// families).
pub fn deformed_falling_moment(pmf: &PmfTable, brackets: &DeformationSpec, j: u32) -> f64 {
    pmf.support
        .iter()
        .zip(&pmf.probs)
        .map(|(&k, &p)| brackets.fall(k as f64, j) * p)
        .sum()
}

/// Brute-force deformed power moment `sum_k [k]^r p_k`.
pub fn deformed_power_moment(pmf: &PmfTable, brackets: &DeformationSpec, r: i32) -> f64 {
    pmf.support
        .iter()
        .zip(&pmf.probs)
        .map(|(&k, &p)| brackets.number(k as f64).powi(r) * p)
        .sum()
}

/// Brute-force classical binomial moment `sum_k C(k, j) p_k`.
pub fn classical_binomial_moment_of_pmf(pmf: &PmfTable, j: u32) -> f64 {
    pmf.support
        .iter()
        .zip(&pmf.probs)
        .map(|(&k, &p)| classical_choose(k, j) * p)
        .sum()
}

/// Brute-force classical falling-factorial moment
/// `sum_k k(k-1)...(k-j+1) p_k`.
pub fn classical_falling_moment_of_pmf(pmf: &PmfTable, j: u32) -> f64 {
    pmf.support
        .iter()
        .zip(&pmf.probs)
        .map(|(&k, &p)| {
            let mut acc = 1.0;
            for v in 0..j as i64 {
                acc *= k as f64 - v as f64;
            }
            acc * p
        })
        .sum()
}

fn classical_choose(n: u64, k: u32) -> f64 {
    if (k as u64) > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for v in 0..k as u64 {
        acc *= (n - v) as f64 / (v + 1) as f64;
    }
    acc
}

/// Expectation of the product `prod_{i<r} e2^-i ([k] - e1^(k-i) [i])`,
/// which expands the deformed falling factorial `[k]_r` of the support
/// variable; the independent oracle for the product-moment closed form.
pub fn product_moment_bracket(pmf: &PmfTable, brackets: &DeformationSpec, r: u32) -> f64 {
    pmf.support
        .iter()
        .zip(&pmf.probs)
        .map(|(&k, &p)| {
            let kf = k as f64;
            let mut acc = 1.0;
            for i in 0..r as i64 {
                acc *= brackets.eps2_powi(-i)
                    * (brackets.number(kf)
                        - brackets.epsilon1().powf(kf - i as f64) * brackets.number(i as f64));
            }
            acc * p
        })
        .sum()
}

/// Draw `count` inverse-CDF samples from `pmf` with a seeded deterministic
/// generator.  Requires the table to be normalized to within `1e-6`.
pub fn sample(pmf: &PmfTable, seed: u64, count: usize) -> Result<Vec<u64>> {
    const SAMPLE_RESIDUAL_LIMIT: f64 = 1e-6;
    if pmf.normalization_residual >= SAMPLE_RESIDUAL_LIMIT {
        return Err(Error::Unnormalized {
            residual: pmf.normalization_residual,
            limit: SAMPLE_RESIDUAL_LIMIT,
        });
    }
    if pmf.is_empty() {
        return Err(Error::InvalidArgument("cannot sample from an empty table".into()));
    }
    let mut cdf = Vec::with_capacity(pmf.probs.len());
    let mut acc = 0.0;
    for &p in &pmf.probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c < u).min(pmf.support.len() - 1);
        out.push(pmf.support[idx]);
    }
    Ok(out)
}
