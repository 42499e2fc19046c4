//! Deformed number systems.
//!
//! A deformation assigns to every real `x` a number `[x]` together with a
//! pair of positive structure constants `(e1, e2)` that drive the shifted
//! factorials, the Pascal-type recursion of the deformed binomial
//! coefficients, and the two deformed exponential series.  Every predefined
//! kind evaluates as
//!
//! ```text
//! [x] = scale * (e1^x - e2^x)
//! ```
//!
//! for kind-specific bases and scale, e.g. `(1 - q^x)/(1 - q)` for the
//! Arik-Coon kind or `(p^x - q^-x)/(q - p^-1)` for the generalized Quesne
//! kind.  A `Custom` kind accepts a caller-supplied evaluator `R(u, v)` and
//! returns `R(p^x, q^x)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binomial coefficient `C(n, 2)` for possibly negative `n`.
pub(crate) fn choose2(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// The deformation kind together with its parameters.
///
/// This is the plain-data descriptor used for serialization and for CLI
/// round-trips; the evaluator of a `Custom` kind is not representable here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DeformationKind {
    ArikCoon { q: f64 },
    Quesne { q: f64 },
    JagannathanSrinivasa { p: f64, q: f64 },
    ChakrabartyJagannathan { p: f64, q: f64 },
    GeneralizedQuesne { p: f64, q: f64 },
    MultiParameter { p: f64, q: f64, mu: f64, nu: f64, g: f64 },
    Custom,
}

impl DeformationKind {
    pub fn name(&self) -> &'static str {
        match self {
            DeformationKind::ArikCoon { .. } => "arik-coon",
            DeformationKind::Quesne { .. } => "quesne",
            DeformationKind::JagannathanSrinivasa { .. } => "jagannathan-srinivasa",
            DeformationKind::ChakrabartyJagannathan { .. } => "chakrabarty-jagannathan",
            DeformationKind::GeneralizedQuesne { .. } => "generalized-quesne",
            DeformationKind::MultiParameter { .. } => "multi-parameter",
            DeformationKind::Custom => "custom",
        }
    }
}

impl fmt::Display for DeformationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DeformationKind::ArikCoon { q } => write!(f, "arik-coon(q={q})"),
            DeformationKind::Quesne { q } => write!(f, "quesne(q={q})"),
            DeformationKind::JagannathanSrinivasa { p, q } => {
                write!(f, "jagannathan-srinivasa(p={p}, q={q})")
            }
            DeformationKind::ChakrabartyJagannathan { p, q } => {
                write!(f, "chakrabarty-jagannathan(p={p}, q={q})")
            }
            DeformationKind::GeneralizedQuesne { p, q } => {
                write!(f, "generalized-quesne(p={p}, q={q})")
            }
            DeformationKind::MultiParameter { p, q, mu, nu, g } => {
                write!(f, "multi-parameter(p={p}, q={q}, mu={mu}, nu={nu}, g={g})")
            }
            DeformationKind::Custom => write!(f, "custom"),
        }
    }
}

/// Serializable identity of a deformation: the kind plus the base-change
/// exponent applied to it (0 means none).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationDescriptor {
    #[serde(flatten)]
    pub kind: DeformationKind,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub base_exponent: i32,
}

fn is_zero(v: &i32) -> bool {
    *v == 0
}

type CustomEvaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Backend {
    /// `[x] = scale * (base1^x - base2^x)`.
    Geometric { base1: f64, base2: f64, scale: f64 },
    /// `[x] = eval(p^x, q^x)`.
    Custom { eval: CustomEvaluator, p: f64, q: f64 },
}

/// An immutable deformation: kind, parameters, structure constants and the
/// number evaluator.  All operations are pure; values are plain `f64`s.
#[derive(Clone)]
pub struct DeformationSpec {
    kind: DeformationKind,
    base_exponent: i32,
    epsilon1: f64,
    epsilon2: f64,
    backend: Backend,
}

impl fmt::Debug for DeformationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeformationSpec")
            .field("kind", &self.kind)
            .field("base_exponent", &self.base_exponent)
            .field("epsilon1", &self.epsilon1)
            .field("epsilon2", &self.epsilon2)
            .finish()
    }
}

fn require_finite(kind: &'static str, values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(Error::Domain {
                kind,
                reason: format!("{name} must be finite, got {v}"),
            });
        }
    }
    Ok(())
}

impl DeformationSpec {
    /// Basic single-parameter deformation `[x] = (1 - q^x)/(1 - q)`,
    /// requiring `0 < q < 1`.
    pub fn arik_coon(q: f64) -> Result<Self> {
        require_finite("arik-coon", &[("q", q)])?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain {
                kind: "arik-coon",
                reason: format!("need 0 < q < 1, got q={q}"),
            });
        }
        Ok(Self::from_kind_unchecked(DeformationKind::ArikCoon { q }, 0))
    }

    /// Quesne deformation `[x] = (1 - q^-x)/(q - 1)`, requiring `0 < q < 1`.
    pub fn quesne(q: f64) -> Result<Self> {
        require_finite("quesne", &[("q", q)])?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain {
                kind: "quesne",
                reason: format!("need 0 < q < 1, got q={q}"),
            });
        }
        Ok(Self::from_kind_unchecked(DeformationKind::Quesne { q }, 0))
    }

    /// Two-parameter deformation `[x] = (p^x - q^x)/(p - q)`,
    /// requiring `0 < q < p <= 1`.
    pub fn jagannathan_srinivasa(p: f64, q: f64) -> Result<Self> {
        require_finite("jagannathan-srinivasa", &[("p", p), ("q", q)])?;
        if !(q > 0.0 && q < p && p <= 1.0) {
            return Err(Error::Domain {
                kind: "jagannathan-srinivasa",
                reason: format!("need 0 < q < p <= 1, got p={p}, q={q}"),
            });
        }
        Ok(Self::from_kind_unchecked(
            DeformationKind::JagannathanSrinivasa { p, q },
            0,
        ))
    }

    /// Deformation `[x] = (p^-x - q^x)/(p^-1 - q)`, requiring `0 < q < p <= 1`.
    pub fn chakrabarty_jagannathan(p: f64, q: f64) -> Result<Self> {
        require_finite("chakrabarty-jagannathan", &[("p", p), ("q", q)])?;
        if !(q > 0.0 && q < p && p <= 1.0) {
            return Err(Error::Domain {
                kind: "chakrabarty-jagannathan",
                reason: format!("need 0 < q < p <= 1, got p={p}, q={q}"),
            });
        }
        Ok(Self::from_kind_unchecked(
            DeformationKind::ChakrabartyJagannathan { p, q },
            0,
        ))
    }

    /// Generalized Quesne deformation `[x] = (p^x - q^-x)/(q - p^-1)`,
    /// requiring `p > 1` and `0 < pq < 1`.
    pub fn generalized_quesne(p: f64, q: f64) -> Result<Self> {
        require_finite("generalized-quesne", &[("p", p), ("q", q)])?;
        if !(p > 1.0 && q > 0.0 && p * q > 0.0 && p * q < 1.0) {
            return Err(Error::Domain {
                kind: "generalized-quesne",
                reason: format!("need p > 1 and 0 < pq < 1, got p={p}, q={q}"),
            });
        }
        Ok(Self::from_kind_unchecked(
            DeformationKind::GeneralizedQuesne { p, q },
            0,
        ))
    }

    /// Five-parameter deformation
    /// `[x] = g * (q^nu / p^mu)^x * (p^x - q^-x)/(q - p^-1)`,
    /// requiring `p > 1`, `0 < pq < 1` and `g > 0`.  The factor `g` is a
    /// fixed positive number evaluated at the chosen `(p, q)`.
    pub fn multi_parameter(p: f64, q: f64, mu: f64, nu: f64, g: f64) -> Result<Self> {
        require_finite(
            "multi-parameter",
            &[("p", p), ("q", q), ("mu", mu), ("nu", nu), ("g", g)],
        )?;
        if !(p > 1.0 && q > 0.0 && p * q > 0.0 && p * q < 1.0) {
            return Err(Error::Domain {
                kind: "multi-parameter",
                reason: format!("need p > 1 and 0 < pq < 1, got p={p}, q={q}"),
            });
        }
        if !(g > 0.0) {
            return Err(Error::Domain {
                kind: "multi-parameter",
                reason: format!("need g > 0, got g={g}"),
            });
        }
        Ok(Self::from_kind_unchecked(
            DeformationKind::MultiParameter { p, q, mu, nu, g },
            0,
        ))
    }

    /// Caller-supplied deformation `[x] = eval(p^x, q^x)` with explicit
    /// structure constants.  The evaluator must vanish at `(1, 1)` and be
    /// positive on `(p^n, q^n)` for `n = 1..=64`.
    pub fn custom(
        p: f64,
        q: f64,
        epsilon1: f64,
        epsilon2: f64,
        eval: CustomEvaluator,
    ) -> Result<Self> {
        require_finite(
            "custom",
            &[("p", p), ("q", q), ("epsilon1", epsilon1), ("epsilon2", epsilon2)],
        )?;
        if !(p > 0.0 && q > 0.0) {
            return Err(Error::Domain {
                kind: "custom",
                reason: format!("need p > 0 and q > 0, got p={p}, q={q}"),
            });
        }
        if !(epsilon1 > 0.0 && epsilon2 > 0.0) {
            return Err(Error::Domain {
                kind: "custom",
                reason: format!("structure constants must be positive, got ({epsilon1}, {epsilon2})"),
            });
        }
        let at_origin = eval(1.0, 1.0);
        if !(at_origin.abs() < 1e-12) {
            return Err(Error::Domain {
                kind: "custom",
                reason: format!("evaluator must vanish at (1, 1), got {at_origin}"),
            });
        }
        for n in 1..=64 {
            let v = eval(p.powi(n), q.powi(n));
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain {
                    kind: "custom",
                    reason: format!("evaluator must be positive at (p^{n}, q^{n}), got {v}"),
                });
            }
        }
        Ok(DeformationSpec {
            kind: DeformationKind::Custom,
            base_exponent: 0,
            epsilon1,
            epsilon2,
            backend: Backend::Custom { eval, p, q },
        })
    }

    /// Rebuild a spec from a serialized descriptor.  `Custom` kinds carry a
    /// closure and cannot be reconstructed.
    pub fn from_descriptor(d: &DeformationDescriptor) -> Result<Self> {
        if d.kind == DeformationKind::Custom {
            return Err(Error::InvalidArgument(
                "custom deformations cannot be reconstructed from a descriptor".into(),
            ));
        }
        if d.base_exponent == 0 {
            match d.kind {
                DeformationKind::ArikCoon { q } => Self::arik_coon(q),
                DeformationKind::Quesne { q } => Self::quesne(q),
                DeformationKind::JagannathanSrinivasa { p, q } => {
                    Self::jagannathan_srinivasa(p, q)
                }
                DeformationKind::ChakrabartyJagannathan { p, q } => {
                    Self::chakrabarty_jagannathan(p, q)
                }
                DeformationKind::GeneralizedQuesne { p, q } => Self::generalized_quesne(p, q),
                DeformationKind::MultiParameter { p, q, mu, nu, g } => {
                    Self::multi_parameter(p, q, mu, nu, g)
                }
                DeformationKind::Custom => unreachable!(),
            }
        } else {
            // Base-changed parameters intentionally escape the constructor
            // guards, exactly as `base_change` produced them.
            Ok(Self::from_kind_unchecked(d.kind, d.base_exponent))
        }
    }

    fn from_kind_unchecked(kind: DeformationKind, base_exponent: i32) -> Self {
        let (epsilon1, epsilon2, backend) = match kind {
            DeformationKind::ArikCoon { q } => {
                (1.0, q, Backend::Geometric { base1: 1.0, base2: q, scale: 1.0 / (1.0 - q) })
            }
            DeformationKind::Quesne { q } => {
                let b = 1.0 / q;
                (1.0, b, Backend::Geometric { base1: 1.0, base2: b, scale: 1.0 / (q - 1.0) })
            }
            DeformationKind::JagannathanSrinivasa { p, q } => {
                (p, q, Backend::Geometric { base1: p, base2: q, scale: 1.0 / (p - q) })
            }
            DeformationKind::ChakrabartyJagannathan { p, q } => {
                let a = 1.0 / p;
                (a, q, Backend::Geometric { base1: a, base2: q, scale: 1.0 / (a - q) })
            }
            DeformationKind::GeneralizedQuesne { p, q } => {
                let b = 1.0 / q;
                (p, b, Backend::Geometric { base1: p, base2: b, scale: 1.0 / (q - 1.0 / p) })
            }
            DeformationKind::MultiParameter { p, q, mu, nu, g } => {
                // g (q^nu/p^mu)^x (p^x - q^-x) = g ((p q^nu/p^mu)^x - (q^(nu-1)/p^mu)^x),
                // so the effective bases absorb the (q^nu/p^mu)^x factor.
                let c = q.powf(nu) / p.powf(mu);
                let a = p * c;
                let b = c / q;
                (a, b, Backend::Geometric { base1: a, base2: b, scale: g / (q - 1.0 / p) })
            }
            DeformationKind::Custom => unreachable!("custom kinds are built via `custom`"),
        };
        DeformationSpec { kind, base_exponent, epsilon1, epsilon2, backend }
    }

    /// Derived deformation with `(p, q)` replaced by `(p^-x, q^-x)`; the
    /// structure constants transform as `e -> e^-x`.  `x = -1` is the
    /// identity map.  Used by the urn-model distributions.
    pub fn base_change(&self, x: i32) -> Self {
        if x == -1 {
            let mut out = self.clone();
            out.base_exponent = self.base_exponent;
            return out;
        }
        let e = -x;
        let kind = match self.kind {
            DeformationKind::ArikCoon { q } => DeformationKind::ArikCoon { q: q.powi(e) },
            DeformationKind::Quesne { q } => DeformationKind::Quesne { q: q.powi(e) },
            DeformationKind::JagannathanSrinivasa { p, q } => {
                DeformationKind::JagannathanSrinivasa { p: p.powi(e), q: q.powi(e) }
            }
            DeformationKind::ChakrabartyJagannathan { p, q } => {
                DeformationKind::ChakrabartyJagannathan { p: p.powi(e), q: q.powi(e) }
            }
            DeformationKind::GeneralizedQuesne { p, q } => {
                DeformationKind::GeneralizedQuesne { p: p.powi(e), q: q.powi(e) }
            }
            DeformationKind::MultiParameter { p, q, mu, nu, g } => {
                DeformationKind::MultiParameter { p: p.powi(e), q: q.powi(e), mu, nu, g }
            }
            DeformationKind::Custom => {
                let (eval, p, q) = match &self.backend {
                    Backend::Custom { eval, p, q } => (Arc::clone(eval), *p, *q),
                    Backend::Geometric { .. } => unreachable!(),
                };
                return DeformationSpec {
                    kind: DeformationKind::Custom,
                    base_exponent: x,
                    epsilon1: self.epsilon1.powi(e),
                    epsilon2: self.epsilon2.powi(e),
                    backend: Backend::Custom { eval, p: p.powi(e), q: q.powi(e) },
                };
            }
        };
        let mut out = Self::from_kind_unchecked(kind, x);
        out.base_exponent = x;
        out
    }

    pub fn kind(&self) -> DeformationKind {
        self.kind
    }

    pub fn descriptor(&self) -> DeformationDescriptor {
        DeformationDescriptor { kind: self.kind, base_exponent: self.base_exponent }
    }

    pub fn base_exponent(&self) -> i32 {
        self.base_exponent
    }

    /// First structure constant.  For the multi-parameter kind this is the
    /// effective base `p^(1-mu) q^nu` that the shifted-factorial and
    /// exponential identities actually require.
    pub fn epsilon1(&self) -> f64 {
        self.epsilon1
    }

    /// Second structure constant (see [`Self::epsilon1`]).
    pub fn epsilon2(&self) -> f64 {
        self.epsilon2
    }

    /// First effective base of the closed form, when there is one.  `Some(1.0)`
    /// identifies the kinds for which `[x - v] = e2^-v ([x] - [v])` holds
    /// identically.
    pub(crate) fn geometric_base1(&self) -> Option<f64> {
        match &self.backend {
            Backend::Geometric { base1, .. } => Some(*base1),
            Backend::Custom { .. } => None,
        }
    }

    pub(crate) fn eps1_powi(&self, e: i64) -> f64 {
        powi64(self.epsilon1, e)
    }

    pub(crate) fn eps2_powi(&self, e: i64) -> f64 {
        powi64(self.epsilon2, e)
    }

    /// The deformed number `[x]`.
    pub fn number(&self, x: f64) -> f64 {
        match &self.backend {
            Backend::Geometric { base1, base2, scale } => {
                scale * (powr(*base1, x) - powr(*base2, x))
            }
            Backend::Custom { eval, p, q } => eval(powr(*p, x), powr(*q, x)),
        }
    }

    /// `[n]! = [1][2]...[n]`, with `[0]! = 1`.
    pub fn factorial(&self, n: u32) -> f64 {
        let mut acc = 1.0;
        for k in 1..=n as i64 {
            acc *= self.number(k as f64);
        }
        acc
    }

    /// Falling factorial of order `j` (any sign):
    /// `[x]_j = [x][x-1]...[x-j+1]` for `j >= 1`, `[x]_0 = 1`, and
    /// `[x]_(-m) = 1/[x+m]_m`.
    ///
    /// Errors with [`Error::Singular`] when a negative-order denominator
    /// factor vanishes.
    pub fn falling_factorial(&self, x: f64, j: i32) -> Result<f64> {
        if j >= 0 {
            return Ok(self.fall(x, j as u32));
        }
        let m = (-j) as u32;
        let denom = self.fall(x + m as f64, m);
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular(format!(
                "reciprocal falling factorial [{x}]_({j}) has vanishing denominator"
            )));
        }
        Ok(1.0 / denom)
    }

    /// Nonnegative-order falling factorial; total product of `j` numbers.
    pub(crate) fn fall(&self, x: f64, j: u32) -> f64 {
        let mut acc = 1.0;
        for v in 0..j as i64 {
            acc *= self.number(x - v as f64);
        }
        acc
    }

    /// Deformed binomial coefficient with real upper argument:
    /// `[x; k] = [x]_k / [k]!`.
    pub fn binomial_coefficient(&self, x: f64, k: u32) -> f64 {
        let mut acc = 1.0;
        for v in 0..k as i64 {
            acc *= self.number(x - v as f64) / self.number((v + 1) as f64);
        }
        acc
    }

    /// `(x (+) y)^n = prod_{i=1..n} (x e1^(i-1) + y e2^(i-1))`.
    pub fn shifted_factorial_plus(&self, x: f64, y: f64, n: u32) -> f64 {
        let mut acc = 1.0;
        for i in 0..n as i64 {
            acc *= x * self.eps1_powi(i) + y * self.eps2_powi(i);
        }
        acc
    }

    /// `(x (-) y)^n = prod_{i=1..n} (x e1^(i-1) - y e2^(i-1))`, the
    /// minus-sign analog of [`Self::shifted_factorial_plus`].
    pub fn shifted_factorial_minus(&self, x: f64, y: f64, n: u32) -> f64 {
        let mut acc = 1.0;
        for i in 0..n as i64 {
            acc *= x * self.eps1_powi(i) - y * self.eps2_powi(i);
        }
        acc
    }

    /// Action of the deformed derivative on a polynomial: the monomial
    /// `z^n` maps to `[n] z^(n-1)`.
    pub fn polynomial_derivative(&self, f: &Polynomial) -> Polynomial {
        let coeffs = f.coefficients();
        if coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let out: Vec<f64> = (1..coeffs.len())
            .map(|n| self.number(n as f64) * coeffs[n])
            .collect();
        Polynomial::new(out)
    }
}

/// `base^x` for positive base and real exponent; integer exponents take the
/// exact `powi` path.
fn powr(base: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if base == 1.0 {
        return 1.0;
    }
    if x.fract() == 0.0 && x.abs() <= i32::MAX as f64 {
        base.powi(x as i32)
    } else {
        base.powf(x)
    }
}

fn powi64(base: f64, e: i64) -> f64 {
    if e.abs() <= i32::MAX as i64 {
        base.powi(e as i32)
    } else {
        base.powf(e as f64)
    }
}

/// Dense real polynomial in the basis `1, z, z^2, ...`.  Trailing zero
/// coefficients are permitted; an empty coefficient list is the zero
/// polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    /// Monomial `c * z^n`.
    pub fn monomial(c: f64, n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = c;
        Polynomial { coeffs }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `z^k` (0 beyond the stored length).
    pub fn coefficient(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Highest index with a nonzero coefficient, or `None` for the zero
    /// polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// Multiply by `z` (degree shift); used to realize the raising operator.
    pub fn shift_up(&self) -> Polynomial {
        if self.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend_from_slice(&self.coeffs);
        Polynomial::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    fn predefined_grid() -> Vec<DeformationSpec> {
        vec![
            DeformationSpec::arik_coon(0.5).unwrap(),
            DeformationSpec::arik_coon(0.3).unwrap(),
            DeformationSpec::quesne(0.5).unwrap(),
            DeformationSpec::quesne(0.8).unwrap(),
            DeformationSpec::jagannathan_srinivasa(0.9, 0.5).unwrap(),
            DeformationSpec::chakrabarty_jagannathan(0.9, 0.5).unwrap(),
            DeformationSpec::generalized_quesne(1.2, 0.7).unwrap(),
            DeformationSpec::multi_parameter(1.1, 0.8, 1.0, 3.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn arik_coon_number_values() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        assert!((d.number(3.0) - 1.75).abs() < 1e-12);
        assert_eq!(d.number(0.0), 0.0);
    }

    #[test]
    fn number_vanishes_at_zero_for_all_kinds() {
        for d in predefined_grid() {
            assert_eq!(d.number(0.0), 0.0, "{}", d.kind());
        }
    }

    #[test]
    fn jagannathan_srinivasa_number_is_power_sum() {
        let d = DeformationSpec::jagannathan_srinivasa(0.9, 0.5).unwrap();
        // p^2 + p q + q^2
        assert!((d.number(3.0) - 1.51).abs() < 1e-12);
    }

    #[test]
    fn factorial_values() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        assert_eq!(d.factorial(0), 1.0);
        assert!((d.factorial(3) - 2.625).abs() < 1e-12);

        let close = DeformationSpec::jagannathan_srinivasa(1.0, 0.999999).unwrap();
        assert!((close.factorial(4) - 24.0).abs() < 1e-4);
    }

    #[test]
    fn falling_factorial_values() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        assert!((d.falling_factorial(3.0, 3).unwrap() - 2.625).abs() < 1e-12);
        assert_eq!(d.falling_factorial(5.0, 0).unwrap(), 1.0);
        let r = d.falling_factorial(2.0, -1).unwrap();
        assert!((r - 1.0 / 1.75).abs() < 1e-14);
    }

    #[test]
    fn falling_factorial_composition_law() {
        // [x]_(j1+j2) = [x]_j1 [x-j1]_j2 across sign combinations.
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let x = 2.7;
        for (j1, j2) in [(2, 3), (3, -2), (-2, 4), (-1, -2)] {
            let lhs = d.falling_factorial(x, j1 + j2).unwrap();
            let rhs = d.falling_factorial(x, j1).unwrap()
                * d.falling_factorial(x - j1 as f64, j2).unwrap();
            assert!(rel(lhs, rhs) < 1e-12, "j1={j1} j2={j2}");
        }
    }

    #[test]
    fn falling_factorial_negative_order_singularity() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        // [(-1)]_(-1) = 1/[0]_1 = 1/0.
        assert!(matches!(
            d.falling_factorial(-1.0, -1),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn binomial_coefficient_values() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        assert!((d.binomial_coefficient(4.0, 2) - 2.1875).abs() < 1e-12);
        assert_eq!(d.binomial_coefficient(7.0, 0), 1.0);
        // Negative upper argument, checked against the reflection rule
        // [-n; k] = (-1)^k (e1 e2)^(-nk - C(k,2)) [n+k-1; k].
        let direct = d.binomial_coefficient(-1.0, 1);
        assert!((direct + 2.0).abs() < 1e-12);
        let reflected = -(d.epsilon1() * d.epsilon2()).powi(-1) * d.binomial_coefficient(1.0, 1);
        assert!(rel(direct, reflected) < 1e-12);
    }

    #[test]
    fn binomial_reflection_rule_holds_broadly() {
        for d in predefined_grid() {
            for n in 1..=4i64 {
                for k in 0..=5u32 {
                    let direct = d.binomial_coefficient(-(n as f64), k);
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let e = -(n * k as i64) - choose2(k as i64);
                    let reflected = sign
                        * powi64(d.epsilon1() * d.epsilon2(), e)
                        * d.binomial_coefficient((n + k as i64 - 1) as f64, k);
                    assert!(
                        rel(direct, reflected) < 1e-10,
                        "{} n={n} k={k}: {direct} vs {reflected}",
                        d.kind()
                    );
                }
            }
        }
    }

    #[test]
    fn shifted_factorials() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        assert_eq!(d.shifted_factorial_plus(2.0, 3.0, 0), 1.0);
        assert!((d.shifted_factorial_plus(1.0, 1.0, 2) - 3.0).abs() < 1e-12);
        let js = DeformationSpec::jagannathan_srinivasa(0.9, 0.5).unwrap();
        assert_eq!(js.shifted_factorial_plus(2.0, 3.0, 1), 5.0);

        assert!((d.shifted_factorial_minus(1.0, 0.5, 2) - 0.375).abs() < 1e-12);
        assert_eq!(d.shifted_factorial_minus(2.0, 2.0, 1), 0.0);
        assert_eq!(d.shifted_factorial_minus(1.0, 7.0, 0), 1.0);
    }

    #[test]
    fn polynomial_derivative_examples() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let df = d.polynomial_derivative(&Polynomial::monomial(1.0, 2));
        assert_eq!(df.degree(), Some(1));
        assert!((df.coefficient(1) - 1.5).abs() < 1e-12);

        let constant = Polynomial::new(vec![7.0]);
        assert!(d.polynomial_derivative(&constant).is_zero());

        for d in predefined_grid() {
            let dz = d.polynomial_derivative(&Polynomial::monomial(1.0, 1));
            assert!(rel(dz.coefficient(0), d.number(1.0)) < 1e-14);
        }
    }

    #[test]
    fn ladder_action_on_monomials() {
        // Raising then deriving acts as [n+1]; deriving then raising as [n].
        for d in predefined_grid() {
            for n in 0..=10usize {
                let zn = Polynomial::monomial(1.0, n);
                let up_then_derive = d.polynomial_derivative(&zn.shift_up());
                assert!(
                    rel(up_then_derive.coefficient(n), d.number(n as f64 + 1.0)) < 1e-12,
                    "{} n={n}",
                    d.kind()
                );
                let derived = d.polynomial_derivative(&zn);
                let derive_then_up = derived.shift_up();
                assert!(rel(derive_then_up.coefficient(n), if n == 0 { 0.0 } else { d.number(n as f64) }) < 1e-12);
            }
        }
    }

    #[test]
    fn addition_law_on_grid() {
        // [x-y] = e1^-y [x] - e1^-y e2^(x-y) [y] on a half-step grid.
        for d in predefined_grid() {
            let mut worst = 0.0f64;
            for ix in 0..=12 {
                for iy in 0..=12 {
                    let x = -2.0 + 0.5 * ix as f64;
                    let y = -2.0 + 0.5 * iy as f64;
                    let lhs = d.number(x - y);
                    let rhs = d.epsilon1().powf(-y) * d.number(x)
                        - d.epsilon1().powf(-y) * d.epsilon2().powf(x - y) * d.number(y);
                    worst = worst.max(rel(lhs, rhs));
                }
            }
            assert!(worst < 1e-9, "{}: worst residual {worst:e}", d.kind());
        }
    }

    #[test]
    fn pascal_recursion() {
        for d in predefined_grid() {
            for x in 1..=12i64 {
                for k in 0..=x {
                    let lhs = d.binomial_coefficient(x as f64, k as u32);
                    let mut rhs = d.eps1_powi(k) * d.binomial_coefficient((x - 1) as f64, k as u32);
                    if k >= 1 {
                        rhs += d.eps2_powi(x - k)
                            * d.binomial_coefficient((x - 1) as f64, (k - 1) as u32);
                    }
                    assert!(rel(lhs, rhs) < 1e-9, "{} x={x} k={k}", d.kind());
                }
            }
        }
    }

    #[test]
    fn binomial_symmetry() {
        for d in predefined_grid() {
            for m in 0..=12u32 {
                for n in 0..=m {
                    let a = d.binomial_coefficient(m as f64, n);
                    let b = d.binomial_coefficient(m as f64, m - n);
                    assert!(rel(a, b) < 1e-12, "{} m={m} n={n}", d.kind());
                }
            }
        }
    }

    #[test]
    fn generalized_quesne_bridge_identities() {
        for (p, q) in [(1.2, 0.7), (1.1, 0.8)] {
            let gq = DeformationSpec::generalized_quesne(p, q).unwrap();
            for n in 1..=10 {
                let x = n as f64;
                let bridged = (p.powf(x) - q.powf(-x)) / (p - 1.0 / q);
                assert!(rel(bridged, q / p * gq.number(x)) < 1e-10);
            }
            let mp = DeformationSpec::multi_parameter(p, q, 1.0, 3.0, 1.0).unwrap();
            for n in 1..=10 {
                let x = n as f64;
                let rescaled = (q.powf(3.0 * x) / p.powf(x)) * gq.number(x);
                assert!(rel(mp.number(x), rescaled) < 1e-10);
            }
        }
    }

    #[test]
    fn quesne_commutation_relations() {
        for (p, q) in [(1.2, 0.7), (1.1, 0.8)] {
            let gq = DeformationSpec::generalized_quesne(p, q).unwrap();
            for n in 0..=10 {
                let x = n as f64;
                let lhs1 = gq.number(x + 1.0) / p - gq.number(x);
                assert!(rel(lhs1, q.powf(-x - 1.0)) < 1e-10);
                let lhs2 = q * gq.number(x + 1.0) - gq.number(x);
                assert!(rel(lhs2, p.powf(x + 1.0)) < 1e-10);
            }
        }
    }

    #[test]
    fn classical_limits() {
        let ac = DeformationSpec::arik_coon(1.0 - 1e-6).unwrap();
        let js = DeformationSpec::jagannathan_srinivasa(1.0 - 1e-7, 1.0 - 1e-6).unwrap();
        for n in 1..=10 {
            let x = n as f64;
            assert!((ac.number(x) - x).abs() < 1e-4);
            assert!((js.number(x) - x).abs() < 1e-4);
        }
    }

    #[test]
    fn structure_constants_match_kind_table() {
        let ac = DeformationSpec::arik_coon(0.5).unwrap();
        assert_eq!((ac.epsilon1(), ac.epsilon2()), (1.0, 0.5));
        let qn = DeformationSpec::quesne(0.5).unwrap();
        assert_eq!((qn.epsilon1(), qn.epsilon2()), (1.0, 2.0));
        let js = DeformationSpec::jagannathan_srinivasa(0.9, 0.5).unwrap();
        assert_eq!((js.epsilon1(), js.epsilon2()), (0.9, 0.5));
        let cj = DeformationSpec::chakrabarty_jagannathan(0.9, 0.5).unwrap();
        assert!((cj.epsilon1() - 1.0 / 0.9).abs() < 1e-15);
        assert_eq!(cj.epsilon2(), 0.5);
        let gq = DeformationSpec::generalized_quesne(1.2, 0.7).unwrap();
        assert_eq!(gq.epsilon1(), 1.2);
        assert!((gq.epsilon2() - 1.0 / 0.7).abs() < 1e-15);
    }

    #[test]
    fn domain_guards() {
        assert!(DeformationSpec::arik_coon(1.0).is_err());
        assert!(DeformationSpec::arik_coon(-0.1).is_err());
        assert!(DeformationSpec::quesne(1.2).is_err());
        assert!(DeformationSpec::jagannathan_srinivasa(0.5, 0.9).is_err());
        assert!(DeformationSpec::jagannathan_srinivasa(1.1, 0.5).is_err());
        assert!(DeformationSpec::chakrabarty_jagannathan(0.5, 0.5).is_err());
        assert!(DeformationSpec::generalized_quesne(0.9, 0.5).is_err());
        assert!(DeformationSpec::generalized_quesne(1.2, 0.9).is_err());
        assert!(DeformationSpec::multi_parameter(1.1, 0.8, 1.0, 3.0, -1.0).is_err());
        assert!(DeformationSpec::arik_coon(f64::NAN).is_err());
    }

    #[test]
    fn custom_kind_guards_and_evaluation() {
        // Same closed form as the Arik-Coon kind, supplied as a raw evaluator.
        let q = 0.5;
        let d = DeformationSpec::custom(
            1.0,
            q,
            1.0,
            q,
            Arc::new(move |_u, v| (1.0 - v) / (1.0 - q)),
        )
        .unwrap();
        let reference = DeformationSpec::arik_coon(q).unwrap();
        for x in [-2.0, -0.5, 0.0, 1.0, 3.25] {
            assert!(rel(d.number(x), reference.number(x)) < 1e-14);
        }

        // Violating R(1,1) = 0 is rejected.
        assert!(DeformationSpec::custom(1.0, 0.5, 1.0, 0.5, Arc::new(|_, _| 1.0)).is_err());
        // Violating positivity on (p^n, q^n) is rejected.
        assert!(
            DeformationSpec::custom(1.0, 0.5, 1.0, 0.5, Arc::new(|_u, v| v - 1.0)).is_err()
        );
    }

    #[test]
    fn base_change_transforms_parameters_and_epsilons() {
        let d = DeformationSpec::arik_coon(0.5).unwrap();
        let minus_one = d.base_change(-1);
        for x in [0.5, 1.0, 2.0, 3.7] {
            assert_eq!(d.number(x), minus_one.number(x));
        }
        let plus_one = d.base_change(1);
        // q -> q^-1 = 2: [2] = (1 - 4)/(1 - 2) = 3.
        assert!(rel(plus_one.number(2.0), 3.0) < 1e-14);
        assert!(rel(plus_one.epsilon2(), 2.0) < 1e-14);
        assert_eq!(plus_one.base_exponent(), 1);
    }

    #[test]
    fn spec_is_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<DeformationSpec>();

        let d = std::sync::Arc::new(DeformationSpec::arik_coon(0.5).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|i| {
                let d = std::sync::Arc::clone(&d);
                std::thread::spawn(move || d.number(i as f64))
            })
            .collect();
        for (i, h) in handles.into_iter().enumerate() {
            assert_eq!(h.join().unwrap(), d.number(i as f64));
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let d = DeformationSpec::generalized_quesne(1.2, 0.7).unwrap();
        let json = serde_json::to_string(&d.descriptor()).unwrap();
        let back: DeformationDescriptor = serde_json::from_str(&json).unwrap();
        let rebuilt = DeformationSpec::from_descriptor(&back).unwrap();
        assert_eq!(rebuilt.kind(), d.kind());
        assert_eq!(rebuilt.number(2.5), d.number(2.5));

        let based = d.base_change(2);
        let json = serde_json::to_string(&based.descriptor()).unwrap();
        let back: DeformationDescriptor = serde_json::from_str(&json).unwrap();
        let rebuilt = DeformationSpec::from_descriptor(&back).unwrap();
        assert_eq!(rebuilt.number(2.0), based.number(2.0));
    }
}
