//! Deformed combinatorial identities: the Euler expansion of shifted
//! factorials, both Vandermonde summation formulas and their negative-order
//! series versions, reciprocal-factorial series, noncentral Stirling numbers
//! of both kinds, and conversions from deformed to classical moments.

use serde::{Deserialize, Serialize};

use crate::deformation::{choose2, DeformationDescriptor, DeformationSpec};
use crate::error::{Error, Result};

/// Which of the two equivalent summation formulas to evaluate; they differ
/// by swapping the roles of the structure constants in the weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VandermondeVariant {
    A,
    B,
}

/// Expansion of the shifted factorial `(x (+) y)^n` as a weighted binomial
/// sum.  Agrees with [`DeformationSpec::shifted_factorial_plus`].
pub fn euler_expansion(d: &DeformationSpec, x: f64, y: f64, n: u32) -> f64 {
    let n = n as i64;
    let mut sum = 0.0;
    for k in 0..=n {
        sum += d.binomial_coefficient(n as f64, k as u32)
            * d.eps1_powi(choose2(n - k))
            * d.eps2_powi(choose2(k))
            * x.powi((n - k) as i32)
            * y.powi(k as i32);
    }
    sum
}

/// Finite Vandermonde sum; equals the falling factorial `[u+v]_n`.
pub fn vandermonde(d: &DeformationSpec, u: f64, v: f64, n: u32, variant: VandermondeVariant) -> f64 {
    vandermonde_with_scale(d, u, v, n, variant).0
}

/// [`vandermonde`] together with the summand scale `sum_k |term_k|`.  The
/// identity telescopes through terms that can dwarf the result, so residual
/// checks should be taken relative to this scale.
pub fn vandermonde_with_scale(
    d: &DeformationSpec,
    u: f64,
    v: f64,
    n: u32,
    variant: VandermondeVariant,
) -> (f64, f64) {
    let n = n as i64;
    let mut sum = 0.0;
    let mut scale = 0.0;
    for k in 0..=n {
        let kf = k as f64;
        let nf = n as f64;
        let (e1, e2) = match variant {
            VandermondeVariant::A => (kf * (v - nf + kf), (nf - kf) * (u - kf)),
            VandermondeVariant::B => ((nf - kf) * (u - kf), kf * (v - nf + kf)),
        };
        let term = d.binomial_coefficient(nf, k as u32)
            * d.epsilon1().powf(e1)
            * d.epsilon2().powf(e2)
            * d.fall(u, k as u32)
            * d.fall(v, (n - k) as u32);
        sum += term;
        scale += term.abs();
    }
    (sum, scale)
}

/// Relative-tolerance stopping rule: a series is declared converged once
/// three consecutive terms fall below `tol` times the running sum.
struct StoppingRule {
    tol: f64,
    below: u32,
}

impl StoppingRule {
    fn new(tol: f64) -> Self {
        StoppingRule { tol, below: 0 }
    }

    fn converged(&mut self, term: f64, sum: f64) -> bool {
        if term.abs() < self.tol * sum.abs().max(f64::MIN_POSITIVE) {
            self.below += 1;
        } else {
            self.below = 0;
        }
        self.below >= 3
    }
}

/// Infinite-series analog of [`vandermonde`] for negative order; the value
/// approximates `[u+v]_(-n) = 1/[u+v+n]_n`.
///
/// The series only converges on part of the parameter space; outside it the
/// stopping rule never fires and [`Error::NonConvergence`] is returned.
pub fn negative_vandermonde(
    d: &DeformationSpec,
    u: f64,
    v: f64,
    n: u32,
    max_terms: usize,
    tol: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("order n must be at least 1".into()));
    }
    let nf = n as f64;
    let mut sum = 0.0;
    let mut last = f64::NAN;
    let mut rule = StoppingRule::new(tol);
    for k in 0..max_terms {
        let kf = k as f64;
        // Zero numerators terminate the series (integer u); short-circuit
        // them before the reciprocal factor can turn singular.
        let rising = d.fall(u, k as u32);
        let term = if rising == 0.0 {
            0.0
        } else {
            d.binomial_coefficient(-nf, k as u32)
                * d.epsilon1().powf(kf * (v + nf + kf))
                * d.epsilon2().powf((-nf - kf) * (u - kf))
                * rising
                * d.falling_factorial(v, -((n + k as u32) as i32))?
        };
        sum += term;
        last = term;
        if !sum.is_finite() {
            return Err(Error::NonFinite("negative Vandermonde series"));
        }
        if rule.converged(term, sum) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { max_terms, last_term: last, partial_sum: sum })
}

/// Series expansion of the reciprocal falling factorial `1/[v]_n` in terms
/// of an auxiliary real parameter `u`.  Stopping behaves as in
/// [`negative_vandermonde`].
pub fn reciprocal_factorial_series(
    d: &DeformationSpec,
    u: f64,
    v: f64,
    n: u32,
    max_terms: usize,
    tol: f64,
    variant: VandermondeVariant,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("order n must be at least 1".into()));
    }
    let nf = n as f64;
    let mut sum = 0.0;
    let mut last = f64::NAN;
    let mut rule = StoppingRule::new(tol);
    for k in 0..max_terms {
        let kf = k as f64;
        let (e1, e2) = match variant {
            VandermondeVariant::A => (nf * (u - kf), kf * (v - nf + 1.0)),
            VandermondeVariant::B => (kf * (v - nf + 1.0), nf * (u - kf)),
        };
        let rising = d.fall(u, k as u32);
        let term = if rising == 0.0 {
            0.0
        } else {
            let denom = d.fall(u + v, n + k as u32);
            if denom == 0.0 {
                return Err(Error::Singular(format!(
                    "[u+v]_(n+k) vanished at k={k} in reciprocal factorial series"
                )));
            }
            d.binomial_coefficient(nf + kf - 1.0, k as u32)
                * d.epsilon1().powf(e1)
                * d.epsilon2().powf(e2)
                * rising
                / denom
        };
        sum += term;
        last = term;
        if !sum.is_finite() {
            return Err(Error::NonFinite("reciprocal factorial series"));
        }
        if rule.converged(term, sum) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { max_terms, last_term: last, partial_sum: sum })
}

/// First or second kind of noncentral Stirling numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StirlingKind {
    First,
    Second,
}

/// Triangular array of noncentral deformed Stirling numbers with offset `j`.
///
/// Row `n` holds the `n + 1` coefficients linking `[x - j]_n` to the powers
/// `[x]^k` (first kind) or `[x]^n` to the shifted falling factorials
/// `[x - j]_k` (second kind).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StirlingTable {
    pub kind: StirlingKind,
    #[serde(rename = "j")]
    pub j_offset: i64,
    pub n_max: usize,
    pub deformation: DeformationDescriptor,
    pub entries: Vec<Vec<f64>>,
}

impl StirlingTable {
    /// Entry `(n, k)`; zero above the diagonal.
    pub fn entry(&self, n: usize, k: usize) -> f64 {
        if k > n {
            0.0
        } else {
            self.entries[n][k]
        }
    }
}

const CONDITION_LIMIT: f64 = 1e12;
const MAX_TABLE_ORDER: usize = 20;

/// Build a table of noncentral Stirling numbers for `d` by solving, for each
/// row `n`, the linear system obtained by evaluating the defining identity
/// at `n + 1` integer sample points.
///
/// First kind: when the first effective base is 1 the identity factors as
/// `[x-j]_n = e2^(-jn-C(n,2)) prod_v ([x] - [v])`, so the row is the exact
/// coefficient expansion of that product (the sampled system has the same
/// unique solution but loses digits when the nodes cluster).  For the
/// remaining kinds the row is the Vandermonde interpolant through the sample
/// values, solved via divided differences; the window is placed on the side
/// of `j` where the deformed values spread out.  Second kind: the sample
/// points `x = j..j+n` make the system triangular and it is solved by
/// forward substitution.
///
/// Errors: [`Error::DegenerateBasis`] when two sample values coincide,
/// [`Error::IllConditioned`] when the cancellation-ratio condition estimate
/// exceeds `1e12`.
pub fn stirling_table(
    d: &DeformationSpec,
    kind: StirlingKind,
    j: i64,
    n_max: usize,
) -> Result<StirlingTable> {
    if n_max > MAX_TABLE_ORDER {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} exceeds the conditioning guard ({MAX_TABLE_ORDER})"
        )));
    }
    let exact_product = d.geometric_base1() == Some(1.0);
    let mut entries: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    entries.push(vec![1.0]);
    for n in 1..=n_max {
        let row = match kind {
            StirlingKind::First if exact_product => expand_first_kind_row(d, j, n),
            StirlingKind::First => solve_first_kind_row(d, j, n)?,
            StirlingKind::Second if exact_product => expand_second_kind_row(d, j, n),
            StirlingKind::Second => solve_second_kind_row(d, j, n)?,
        };
        entries.push(row);
    }
    Ok(StirlingTable {
        kind,
        j_offset: j,
        n_max,
        deformation: d.descriptor(),
        entries,
    })
}

/// Second-kind row when the first effective base is 1: the shifted falling
/// factorials are then the Newton basis over the nodes `[j], [j+1], ...`,
/// so the coefficients of `t^n` are the complete homogeneous symmetric
/// polynomials `h_(n-k)([j], .., [j+k])`, built by their standard
/// recurrence with no cancellation.
fn expand_second_kind_row(d: &DeformationSpec, j: i64, n: usize) -> Vec<f64> {
    let nodes: Vec<f64> = (0..=n).map(|k| d.number((j + k as i64) as f64)).collect();
    // h[m][k] = h_m(nodes[0..=k])
    let mut h = vec![vec![0.0; n + 1]; n + 1];
    h[0] = vec![1.0; n + 1];
    for m in 1..=n {
        h[m][0] = nodes[0].powi(m as i32);
        for k in 1..=n {
            h[m][k] = h[m][k - 1] + nodes[k] * h[m - 1][k];
        }
    }
    (0..=n).map(|k| h[n - k][k]).collect()
}

/// Coefficients of `prod_{v=j}^{j+n-1} (t - [v])`.
fn expand_first_kind_row(d: &DeformationSpec, j: i64, n: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = 1.0;
    for (step, v) in (j..j + n as i64).enumerate() {
        let root = d.number(v as f64);
        for i in (1..=step + 1).rev() {
            coeffs[i] = coeffs[i - 1] - root * coeffs[i];
        }
        coeffs[0] *= -root;
    }
    coeffs
}

/// Integer sample points for a first-kind row: prefer the upward window
/// `j..j+n` when the deformed values spread there, otherwise center the
/// window on `j` so that the spreading side is included.
fn sample_points(d: &DeformationSpec, j: i64, n: usize) -> Vec<i64> {
    let n = n as i64;
    let jf = j as f64;
    let up = (d.number(jf + n as f64) - d.number(jf)).abs();
    let down = (d.number(jf - n as f64) - d.number(jf)).abs();
    let lo = if up >= 10.0 * down { j } else { j - (n + 1) / 2 };
    (lo..=lo + n).collect()
}

fn solve_first_kind_row(d: &DeformationSpec, j: i64, n: usize) -> Result<Vec<f64>> {
    let xs = sample_points(d, j, n);
    let nodes: Vec<f64> = xs.iter().map(|&x| d.number(x as f64)).collect();
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let scale = nodes[a].abs().max(nodes[b].abs()).max(1.0);
            if (nodes[a] - nodes[b]).abs() <= 1e-12 * scale {
                return Err(Error::DegenerateBasis { x0: xs[a] as f64, x1: xs[b] as f64 });
            }
        }
    }
    let weight = d.eps2_powi(j * n as i64 + choose2(n as i64));
    let data: Vec<f64> = xs
        .iter()
        .map(|&x| weight * d.fall((x - j) as f64, n as u32))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Stirling sample data"));
    }

    // Divided differences, then Newton-to-monomial conversion.  The peak
    // intermediate magnitude relative to the result measures how much
    // cancellation the solve went through.
    let mut coeffs = data;
    let mut peak = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for k in 1..=n {
        for i in (k..=n).rev() {
            coeffs[i] = (coeffs[i] - coeffs[i - 1]) / (nodes[i] - nodes[i - k]);
        }
        peak = coeffs.iter().fold(peak, |m, c| m.max(c.abs()));
    }
    for k in (0..n).rev() {
        for i in k..n {
            coeffs[i] -= nodes[k] * coeffs[i + 1];
        }
        peak = coeffs.iter().fold(peak, |m, c| m.max(c.abs()));
    }
    let final_max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let estimate = peak / final_max.max(f64::MIN_POSITIVE);
    if estimate > CONDITION_LIMIT {
        return Err(Error::IllConditioned { estimate, limit: CONDITION_LIMIT });
    }
    if coeffs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Stirling coefficients"));
    }
    Ok(coeffs)
}

fn solve_second_kind_row(d: &DeformationSpec, j: i64, n: usize) -> Result<Vec<f64>> {
    // At x = j + i the basis value [x - j]_k = [i]_k vanishes for k > i, so
    // the system is lower triangular with diagonal e2^(C(i,2)+j*i) [i]!.
    let mut row = vec![0.0; n + 1];
    let mut peak = 0.0f64;
    for i in 0..=n {
        let x = (j + i as i64) as f64;
        let target = d.number(x).powi(n as i32);
        let mut acc = target;
        for (k, coeff) in row.iter().enumerate().take(i) {
            let basis = d.eps2_powi(choose2(k as i64) + j * k as i64) * d.fall(i as f64, k as u32);
            acc -= basis * coeff;
            peak = peak.max(acc.abs());
        }
        let diag = d.eps2_powi(choose2(i as i64) + j * i as i64) * d.fall(i as f64, i as u32);
        if diag == 0.0 || !diag.is_finite() {
            return Err(Error::DegenerateBasis { x0: x, x1: x });
        }
        row[i] = acc / diag;
        peak = peak.max(row[i].abs()).max(target.abs());
    }
    let final_max = row.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let estimate = peak / final_max.max(f64::MIN_POSITIVE);
    if estimate > CONDITION_LIMIT {
        return Err(Error::IllConditioned { estimate, limit: CONDITION_LIMIT });
    }
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Stirling coefficients"));
    }
    Ok(row)
}

/// Residual of row `n` of a first-kind table at evaluation point `x`,
/// relative to `max(1, |[x-j]_n|, sum_k |term_k|)`: the expansion cancels
/// through terms that can dwarf the value, so the comparison scale is the
/// summand scale.
pub fn stirling_first_residual(d: &DeformationSpec, table: &StirlingTable, n: usize, x: f64) -> f64 {
    let j = table.j_offset;
    let t = d.number(x);
    let weight = d.eps2_powi(-choose2(n as i64) - j * n as i64);
    let mut sum = 0.0;
    let mut scale = 0.0;
    let mut power = 1.0;
    for k in 0..=n {
        let term = weight * table.entry(n, k) * power;
        sum += term;
        scale += term.abs();
        power *= t;
    }
    let rhs = d.fall(x - j as f64, n as u32);
    (sum - rhs).abs() / rhs.abs().max(scale).max(1.0)
}

/// Residual of row `n` of a second-kind table at evaluation point `x`,
/// relative to `max(1, |[x]^n|, sum_k |term_k|)` (see
/// [`stirling_first_residual`] for the scale).
pub fn stirling_second_residual(
    d: &DeformationSpec,
    table: &StirlingTable,
    n: usize,
    x: f64,
) -> f64 {
    let j = table.j_offset;
    let mut sum = 0.0;
    let mut scale = 0.0;
    for k in 0..=n {
        let term = d.eps2_powi(choose2(k as i64) + j * k as i64)
            * table.entry(n, k)
            * d.fall(x - j as f64, k as u32);
        sum += term;
        scale += term.abs();
    }
    let rhs = d.number(x).powi(n as i32);
    (sum - rhs).abs() / rhs.abs().max(scale).max(1.0)
}

/// Convert deformed binomial moments `E[[X; m]]` (index = order `m`) into
/// the classical binomial moment `E[C(X, j)]`.
///
/// `tau` is the free integer exponent of the conversion weight; the value
/// is independent of it exactly when the first structure constant is 1.
pub fn classical_binomial_moment(
    d: &DeformationSpec,
    deformed_binomial_moments: &[f64],
    j: usize,
    tau: i64,
) -> Result<f64> {
    if deformed_binomial_moments.is_empty() || j >= deformed_binomial_moments.len() {
        return Err(Error::InvalidArgument(format!(
            "need deformed moments up to order >= j = {j}"
        )));
    }
    let top = deformed_binomial_moments.len() - 1;
    let table = stirling_table(d, StirlingKind::First, 0, top)
        .map_err(|e| Error::Dependency(format!("Stirling table of order {top}: {e}")))?;
    let mut sum = 0.0;
    for (m, moment) in deformed_binomial_moments.iter().enumerate().skip(j) {
        sum += conversion_weight(d, m, j, tau) * table.entry(m, j) * moment;
    }
    Ok(sum)
}

/// Convert deformed factorial moments `E[[X]_m]` (index = order `m`) into
/// the classical factorial moment `E[(X)_j] = E[X(X-1)...(X-j+1)]`.
pub fn classical_factorial_moment(
    d: &DeformationSpec,
    deformed_factorial_moments: &[f64],
    j: usize,
    tau: i64,
) -> Result<f64> {
    if deformed_factorial_moments.is_empty() || j >= deformed_factorial_moments.len() {
        return Err(Error::InvalidArgument(format!(
            "need deformed moments up to order >= j = {j}"
        )));
    }
    let top = deformed_factorial_moments.len() - 1;
    let table = stirling_table(d, StirlingKind::First, 0, top)
        .map_err(|e| Error::Dependency(format!("Stirling table of order {top}: {e}")))?;
    let mut sum = 0.0;
    for (m, moment) in deformed_factorial_moments.iter().enumerate().skip(j) {
        sum += conversion_weight(d, m, j, tau) * table.entry(m, j) * moment / d.factorial(m as u32);
    }
    Ok(classical_factorial(j) * sum)
}

/// Weight `(-1)^(m-j) (e1-e2)^(m-j) e1^(C(m,2) - tau (m-j))` shared by the
/// moment conversions.
pub(crate) fn conversion_weight(d: &DeformationSpec, m: usize, j: usize, tau: i64) -> f64 {
    debug_assert!(m >= j);
    let diff = (m - j) as i32;
    let sign = if diff % 2 == 0 { 1.0 } else { -1.0 };
    sign * (d.epsilon1() - d.epsilon2()).powi(diff)
        * d.eps1_powi(choose2(m as i64) - tau * diff as i64)
}

pub(crate) fn classical_factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
