//! Young-function calculus.
//!
//! A Young function density g: [0,∞) → [0,∞) is increasing with g(0) = 0 and
//! satisfies the ellipticity (Lieberman) condition
//!
//!   1 < λ ≤ t g'(t) / g(t) ≤ Λ        for all t > 0,
//!
//! and is extended to all of ℝ in an odd fashion. Its primitive
//! G(t) = ∫₀^t g then obeys p⁻ ≤ t g(t)/G(t) ≤ p⁺ with p∓ = λ,Λ + 1, which
//! places G between power functions of degree p⁻ and p⁺ and gives the Δ₂
//! (doubling) property g(2t) ≤ 2^Λ g(t), G(2t) ≤ 2^{p⁺} G(t).
//!
//! Two concrete families are provided: the power density g(t) = t^{p−1}
//! (λ = Λ = p−1) and the two-term sum g(t) = a·t^{p−1} + b·t^{q−1}
//! (λ = p−1 < Λ = q−1 when p < q), the representative with genuinely
//! different upper and lower growth. A closure-backed density is available
//! as an extension point and as a negative-control hook for the structural
//! checker in [`crate::inequalities`].

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::quad;

/// Errors from Young-function construction and scalar calculus.
#[derive(Debug, Error)]
pub enum YoungError {
    /// A constructor argument violates the family's admissibility range.
    #[error("invalid Young-function parameter: {0}")]
    InvalidParameter(String),
    /// An operation defined on [0, ∞) received a negative argument.
    #[error("{op} requires a nonnegative argument, got {value}")]
    NegativeArgument { op: &'static str, value: f64 },
    /// A sampling grid request was empty or inverted.
    #[error("sampling grid needs 0 < t_min < t_max and n >= 2")]
    InvalidSamplingGrid,
}

type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// t^e for t ≥ 0, routed through `powi` for small integer exponents.
/// Both family evaluations sit in the innermost loop of every pair sum, and
/// the common exponents (p = 3, 4) are integers.
#[inline]
fn pow_nonneg(t: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 32.0 {
        t.powi(e as i32)
    } else {
        t.powf(e)
    }
}

#[derive(Clone)]
enum Family {
    Power {
        p: f64,
    },
    PowerSum {
        p: f64,
        q: f64,
        a: f64,
        b: f64,
    },
    /// Closure-backed density with declared (not verified) ellipticity
    /// bounds. Construction checks only parameter sanity; behavioral
    /// soundness is the structural checker's job, which is what makes this
    /// variant usable as a deliberate negative control.
    Custom {
        label: String,
        g: DensityFn,
        g_prime: DensityFn,
        lambda: f64,
        big_lambda: f64,
    },
}

/// An elliptic Young-function density g with its primitive G, growth
/// exponents, inverse, and convex conjugate.
///
/// Values are immutable after construction; every method is pure, so a
/// `YoungFunction` may be shared freely across threads.
#[derive(Clone)]
pub struct YoungFunction {
    family: Family,
    /// Argument prescaling c: this instance evaluates t ↦ g_base(c·t).
    /// Used by the scale-covariance machinery, where the rescaled problem
    /// uses g_R(t) = g(R^{−s} t).
    arg_scale: f64,
}

impl fmt::Debug for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "YoungFunction({})", self.label())
    }
}

impl YoungFunction {
    /// Power density g(t) = t^{p−1}, the fractional p-Laplacian case.
    /// Requires p > 2 so that λ = p − 1 > 1 (the degenerate regime).
    pub fn power(p: f64) -> Result<Self, YoungError> {
        if !(p.is_finite() && p > 2.0) {
            return Err(YoungError::InvalidParameter(format!(
                "power family needs p > 2, got p = {p}"
            )));
        }
        Ok(Self { family: Family::Power { p }, arg_scale: 1.0 })
    }

    /// Two-term density g(t) = a·t^{p−1} + b·t^{q−1} with 2 < p ≤ q and
    /// positive weights; has λ = p − 1, Λ = q − 1.
    pub fn power_sum(p: f64, q: f64, a: f64, b: f64) -> Result<Self, YoungError> {
        if !(p.is_finite() && q.is_finite() && p > 2.0 && q >= p) {
            return Err(YoungError::InvalidParameter(format!(
                "power-sum family needs 2 < p <= q, got p = {p}, q = {q}"
            )));
        }
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(YoungError::InvalidParameter(format!(
                "power-sum family needs positive weights, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { family: Family::PowerSum { p, q, a, b }, arg_scale: 1.0 })
    }

    /// Closure-backed density with declared ellipticity bounds.
    ///
    /// Only the parameters are validated here (λ > 1, Λ ≥ λ); whether the
    /// closures actually satisfy the declared bounds is checked by
    /// [`crate::inequalities::check_inequality_suite`]'s structural pass.
    pub fn from_density(
        label: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lambda: f64,
        big_lambda: f64,
    ) -> Result<Self, YoungError> {
        if !(lambda.is_finite() && big_lambda.is_finite() && lambda > 1.0 && big_lambda >= lambda) {
            return Err(YoungError::InvalidParameter(format!(
                "custom family needs 1 < lambda <= Lambda, got ({lambda}, {big_lambda})"
            )));
        }
        Ok(Self {
            family: Family::Custom {
                label: label.into(),
                g: Arc::new(g),
                g_prime: Arc::new(g_prime),
                lambda,
                big_lambda,
            },
            arg_scale: 1.0,
        })
    }

    /// Human-readable family label for reports.
    pub fn label(&self) -> String {
        let base = match &self.family {
            Family::Power { p } => format!("power(p={p})"),
            Family::PowerSum { p, q, a, b } => format!("power_sum(p={p},q={q},a={a},b={b})"),
            Family::Custom { label, .. } => format!("custom({label})"),
        };
        if self.arg_scale == 1.0 {
            base
        } else {
            format!("{base}@arg_scale={}", self.arg_scale)
        }
    }

    fn base_g(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.family {
            Family::Power { p } => pow_nonneg(t, p - 1.0),
            Family::PowerSum { p, q, a, b } => {
                a * pow_nonneg(t, p - 1.0) + b * pow_nonneg(t, q - 1.0)
            }
            Family::Custom { g, .. } => g(t),
        }
    }

    fn base_g_prime(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.family {
            Family::Power { p } => (p - 1.0) * pow_nonneg(t, p - 2.0),
            Family::PowerSum { p, q, a, b } => {
                a * (p - 1.0) * pow_nonneg(t, p - 2.0) + b * (q - 1.0) * pow_nonneg(t, q - 2.0)
            }
            Family::Custom { g_prime, .. } => g_prime(t),
        }
    }

    fn base_big_g(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.family {
            Family::Power { p } => pow_nonneg(t, *p) / p,
            Family::PowerSum { p, q, a, b } => {
                a * pow_nonneg(t, *p) / p + b * pow_nonneg(t, *q) / q
            }
            // No closed form: integrate the density adaptively. The
            // tolerance follows the integral's own scale (G(t) ≤ t·g(t)),
            // staying far below every solver tolerance in the crate without
            // demanding sub-rounding accuracy at large arguments.
            Family::Custom { g, .. } => {
                if t == 0.0 {
                    0.0
                } else {
                    let scale = (t * g(t)).abs();
                    quad::integrate_adaptive(&|x| g(x), 0.0, t, 1e-13 * (1.0 + scale))
                }
            }
        }
    }

    /// The density, extended to ℝ as an odd function: g(−t) = −g(t).
    pub fn g(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else if t > 0.0 {
            self.base_g(self.arg_scale * t)
        } else {
            -self.base_g(self.arg_scale * (-t))
        }
    }

    /// Derivative of the density; even by the odd extension.
    pub fn g_prime(&self, t: f64) -> f64 {
        self.arg_scale * self.base_g_prime(self.arg_scale * t.abs())
    }

    /// The primitive G(t) = ∫₀^{|t|} g, even by the odd extension of g.
    pub fn big_g(&self, t: f64) -> f64 {
        let c = self.arg_scale;
        self.base_big_g(c * t.abs()) / c
    }

    /// Declared lower ellipticity exponent λ = inf t g'/g.
    pub fn lambda(&self) -> f64 {
        match &self.family {
            Family::Power { p } => p - 1.0,
            Family::PowerSum { p, .. } => p - 1.0,
            Family::Custom { lambda, .. } => *lambda,
        }
    }

    /// Declared upper ellipticity exponent Λ = sup t g'/g.
    pub fn big_lambda(&self) -> f64 {
        match &self.family {
            Family::Power { p } => p - 1.0,
            Family::PowerSum { q, .. } => q - 1.0,
            Family::Custom { big_lambda, .. } => *big_lambda,
        }
    }

    /// Lower growth exponent of G: p⁻ = λ + 1.
    pub fn p_minus(&self) -> f64 {
        self.lambda() + 1.0
    }

    /// Upper growth exponent of G: p⁺ = Λ + 1.
    pub fn p_plus(&self) -> f64 {
        self.big_lambda() + 1.0
    }

    /// Doubling constant for the density: g(2t) ≤ 2^Λ g(t).
    pub fn doubling_g(&self) -> f64 {
        (2f64).powf(self.big_lambda())
    }

    /// Doubling constant for the primitive: G(2t) ≤ 2^{p⁺} G(t).
    pub fn doubling_big_g(&self) -> f64 {
        (2f64).powf(self.p_plus())
    }

    /// Inverse of the density on [0, ∞).
    ///
    /// Bracketing solver by design: start from [0, max(1, v)], double the
    /// upper end until g exceeds v, then take 80 bisection steps.
    /// Unconditional robustness is preferred over speed for a scalar root,
    /// so the closed power-family inverse is deliberately not special-cased
    /// (the unit tests compare against it instead).
    pub fn g_inverse(&self, v: f64) -> Result<f64, YoungError> {
        if !(v >= 0.0) {
            return Err(YoungError::NegativeArgument { op: "g_inverse", value: v });
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        let mut hi = v.max(1.0);
        let mut guard = 0;
        while self.g(hi) < v {
            hi *= 2.0;
            guard += 1;
            assert!(guard < 4000, "g_inverse bracket failed to capture v = {v}");
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.g(mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Convex conjugate G̃(w) = sup_{t ≥ 0} (t·w − G(t)) for w ≥ 0.
    ///
    /// The supremum is attained where g(t) = w, so G̃(w) = w·g⁻¹(w) −
    /// G(g⁻¹(w)).
    pub fn conjugate(&self, w: f64) -> Result<f64, YoungError> {
        if !(w >= 0.0) {
            return Err(YoungError::NegativeArgument { op: "conjugate", value: w });
        }
        let t = self.g_inverse(w)?;
        Ok(w * t - self.big_g(t))
    }

    /// Sampled ellipticity estimate: (min, max) of t g'(t)/g(t) over a
    /// logarithmic grid of `n` points in [t_min, t_max].
    ///
    /// A verification tool only; constructors declare the exact exponents,
    /// and this never overrides them.
    pub fn ellipticity_estimate(
        &self,
        t_min: f64,
        t_max: f64,
        n: usize,
    ) -> Result<(f64, f64), YoungError> {
        if !(t_min > 0.0 && t_max > t_min && t_min.is_finite() && t_max.is_finite()) || n < 2 {
            return Err(YoungError::InvalidSamplingGrid);
        }
        let ratio = (t_max / t_min).ln();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let t = t_min * (ratio * i as f64 / (n - 1) as f64).exp();
            let gt = self.g(t);
            if gt <= 0.0 || !gt.is_finite() {
                continue;
            }
            let r = t * self.g_prime(t) / gt;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        Ok((lo, hi))
    }

    /// The far-field primitive Φ(v) = ∫₀^{|v|} G(τ)/τ dτ.
    ///
    /// This is the closed form behind every exterior tail in the crate:
    /// substituting τ = t·r^{−s} gives ∫_{r₀}^∞ G(t/r^s) dr/r = Φ(t·r₀^{−s})/s
    /// for the energy of a constant seen across an exterior ray, and its
    /// t-derivative ∫_{r₀}^∞ g(t/r^s) dr/r^{1+s} = G(t·r₀^{−s})/(s·t) is the
    /// matching first-variation tail.
    pub fn phi(&self, v: f64) -> f64 {
        let c = self.arg_scale;
        let x = c * v.abs();
        let base = match &self.family {
            Family::Power { p } => x.powf(*p) / (p * p),
            Family::PowerSum { p, q, a, b } => {
                a * x.powf(*p) / (p * p) + b * x.powf(*q) / (q * q)
            }
            Family::Custom { .. } => {
                if x == 0.0 {
                    0.0
                } else {
                    let integrand = |t: f64| if t == 0.0 { 0.0 } else { self.base_big_g(t) / t };
                    let scale = self.base_big_g(x).abs();
                    quad::integrate_adaptive(&integrand, 0.0, x, 1e-13 * (1.0 + scale))
                }
            }
        };
        base / c
    }

    /// Exterior-ray tail of the density: ∫_{r₀}^∞ g(t/r^s) dr/r^{1+s}
    /// = G(t·r₀^{−s})/(s·t), odd in t and zero at t = 0.
    pub fn ray_tail_g(&self, t: f64, r0: f64, s: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        // r0 = 0 makes the tail genuinely divergent; the IEEE quotient
        // (G(inf)/t = inf) is the honest answer.
        self.big_g(t * r0.powf(-s)).copysign(t) / (s * t.abs())
    }

    /// Exterior-ray tail of the primitive: ∫_{r₀}^∞ G(t/r^s) dr/r
    /// = Φ(t·r₀^{−s})/s, even in t.
    pub fn ray_tail_big_g(&self, t: f64, r0: f64, s: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        self.phi(t.abs() * r0.powf(-s)) / s
    }

    /// The rescaled density g_R(t) = g(R^{−s} t) used when a problem on a
    /// ball of radius R is pulled back to the unit ball.
    pub fn scaled(&self, radius: f64, s: f64) -> Self {
        let mut out = self.clone();
        out.arg_scale *= radius.powf(-s);
        out
    }

    /// Structural soundness check on a deterministic probe grid: odd
    /// extension exactness, g(0) = 0, positivity and strict monotonicity on
    /// t > 0, and the declared ellipticity window for t g'/g. Returns a
    /// list of human-readable violations (empty when sound).
    pub fn validate_structure(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.g(0.0) != 0.0 {
            problems.push(format!("g(0) = {} instead of 0", self.g(0.0)));
        }
        let n = 129;
        let (t_min, t_max) = (1e-3f64, 1e3f64);
        let ratio = (t_max / t_min).ln();
        let mut prev = 0.0;
        for i in 0..n {
            let t = t_min * (ratio * i as f64 / (n - 1) as f64).exp();
            let gt = self.g(t);
            if !(gt.is_finite() && gt > 0.0) {
                problems.push(format!("g({t}) = {gt} is not finite positive"));
                break;
            }
            if self.g(-t) != -gt {
                problems.push(format!("odd extension violated at t = {t}"));
                break;
            }
            if gt <= prev {
                problems.push(format!("g not strictly increasing near t = {t}"));
                break;
            }
            let r = t * self.g_prime(t) / gt;
            if r < self.lambda() - 1e-8 || r > self.big_lambda() + 1e-8 {
                problems.push(format!(
                    "t g'/g = {r} at t = {t} outside declared [{}, {}]",
                    self.lambda(),
                    self.big_lambda()
                ));
                break;
            }
            prev = gt;
        }
        problems
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constructors_reject_out_of_range_parameters() {
        assert!(YoungFunction::power(2.0).is_err());
        assert!(YoungFunction::power(f64::NAN).is_err());
        assert!(YoungFunction::power_sum(3.0, 2.5, 1.0, 1.0).is_err());
        assert!(YoungFunction::power_sum(3.0, 4.0, 0.0, 1.0).is_err());
        assert!(YoungFunction::power(2.5).is_ok());
        assert!(YoungFunction::power_sum(3.0, 4.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn odd_extension_is_exact() {
        let yf = YoungFunction::power_sum(3.0, 4.0, 2.0, 0.5).unwrap();
        for &t in &[1e-3, 0.37, 1.0, 12.5, 903.0] {
            assert_eq!(yf.g(-t), -yf.g(t));
            assert_eq!(yf.big_g(-t), yf.big_g(t));
            assert_eq!(yf.g_prime(-t), yf.g_prime(t));
        }
        assert_eq!(yf.g(0.0), 0.0);
    }

    #[test]
    fn primitive_matches_quadrature_of_density() {
        // Closed-form G cross-checked against direct integration of g, for
        // both families, at the tolerance used for closure-backed densities.
        for yf in [
            YoungFunction::power(3.0).unwrap(),
            YoungFunction::power_sum(3.0, 4.0, 1.0, 1.0).unwrap(),
            YoungFunction::power(2.5).unwrap(),
        ] {
            for &t in &[0.1, 1.0, 2.7, 10.0] {
                let byquad = crate::quad::integrate_adaptive(&|x| yf.g(x), 0.0, t, 1e-12);
                assert_relative_eq!(yf.big_g(t), byquad, max_relative = 1e-11, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn custom_density_primitive_uses_quadrature() {
        // Same function two ways: power p = 3 as a closure vs closed form.
        let closure = YoungFunction::from_density("square", |t| t * t, |t| 2.0 * t, 2.0, 2.0)
            .unwrap();
        let closed = YoungFunction::power(3.0).unwrap();
        for &t in &[0.3, 1.0, 4.2] {
            assert_relative_eq!(closure.big_g(t), closed.big_g(t), max_relative = 1e-11);
        }
    }

    #[test]
    fn power_family_ratios_are_exact() {
        let yf = YoungFunction::power(3.0).unwrap();
        for &t in &[1e-3, 0.2, 1.0, 55.0, 1e3] {
            assert_relative_eq!(t * yf.g_prime(t) / yf.g(t), 2.0, max_relative = 1e-13);
            assert_relative_eq!(t * yf.g(t) / yf.big_g(t), 3.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn ellipticity_estimate_brackets_declared_exponents() {
        // Exact for the power family.
        let yf = YoungFunction::power(3.5).unwrap();
        let (lo, hi) = yf.ellipticity_estimate(1e-6, 1e6, 481).unwrap();
        assert_relative_eq!(lo, 2.5, max_relative = 1e-12);
        assert_relative_eq!(hi, 2.5, max_relative = 1e-12);

        // Independent dense-sampling oracle for the two-term family: the
        // ratio is a weighted mean of p-1 and q-1, approaching the ends as
        // t -> 0 and t -> infinity.
        let yf = YoungFunction::power_sum(3.0, 4.0, 1.0, 1.0).unwrap();
        let (lo, hi) = yf.ellipticity_estimate(1e-8, 1e8, 2001).unwrap();
        assert!(lo >= 2.0 && lo < 2.0 + 1e-6, "lo = {lo}");
        assert!(hi <= 3.0 && hi > 3.0 - 1e-6, "hi = {hi}");
        assert_eq!((yf.lambda(), yf.big_lambda()), (2.0, 3.0));
    }

    #[test]
    fn inverse_round_trips_and_matches_newton_oracle() {
        let yf = YoungFunction::power_sum(3.0, 4.0, 1.0, 1.0).unwrap();
        // g(t) = t^2 + t^3, so g(1) = 2 exactly.
        assert_relative_eq!(yf.g_inverse(2.0).unwrap(), 1.0, max_relative = 1e-13);
        // Independent Newton oracle for a non-trivial value.
        let v = 5.0;
        let mut t = 1.5;
        for _ in 0..60 {
            t -= (t * t + t * t * t - v) / (2.0 * t + 3.0 * t * t);
        }
        assert_relative_eq!(yf.g_inverse(v).unwrap(), t, max_relative = 1e-12);
        // Round trip on a sampled range.
        for &x in &[1e-3, 0.07, 1.0, 31.0, 990.0] {
            assert_relative_eq!(yf.g_inverse(yf.g(x)).unwrap(), x, max_relative = 1e-10);
        }
        assert!(yf.g_inverse(-1.0).is_err());
    }

    #[test]
    fn conjugate_matches_power_closed_form() {
        // G(t) = t^3/3 has conjugate (2/3) w^{3/2}.
        let yf = YoungFunction::power(3.0).unwrap();
        for &w in &[0.1, 1.0, 7.0, 144.0] {
            assert_relative_eq!(
                yf.conjugate(w).unwrap(),
                2.0 / 3.0 * w.powf(1.5),
                max_relative = 1e-10
            );
        }
        assert!(yf.conjugate(-0.5).is_err());
    }

    #[test]
    fn scaling_rescales_the_argument() {
        let yf = YoungFunction::power_sum(3.0, 4.0, 1.0, 1.0).unwrap();
        let (radius, s): (f64, f64) = (2.0, 0.6);
        let c = radius.powf(-s);
        let ys = yf.scaled(radius, s);
        for &t in &[0.3, 1.0, 9.0] {
            assert_relative_eq!(ys.g(t), yf.g(c * t), max_relative = 1e-14);
            assert_relative_eq!(ys.big_g(t), yf.big_g(c * t) / c, max_relative = 1e-13);
            assert_relative_eq!(ys.g_prime(t), c * yf.g_prime(c * t), max_relative = 1e-13);
            assert_relative_eq!(
                ys.g_inverse(ys.g(t)).unwrap(),
                t,
                max_relative = 1e-10
            );
        }
        // Ellipticity is invariant under argument scaling.
        let (lo, hi) = ys.ellipticity_estimate(1e-6, 1e6, 481).unwrap();
        assert!((lo - 2.0).abs() < 1e-4 && (hi - 3.0).abs() < 1e-4);
    }

    #[test]
    fn ray_tails_match_direct_quadrature() {
        let yf = YoungFunction::power_sum(3.0, 4.0, 1.0, 1.0).unwrap();
        let s = 0.6;
        for &(t, r0) in &[(0.8, 1.5), (2.0, 0.7), (-1.3, 2.0)] {
            // Truncate the infinite tail far enough out that the remainder
            // sits below the comparison tolerance.
            let top = 1e8;
            let num_g = crate::quad::integrate_adaptive(
                &|r: f64| yf.g(t / r.powf(s)) / r.powf(1.0 + s),
                r0,
                top,
                1e-13,
            );
            assert_relative_eq!(yf.ray_tail_g(t, r0, s), num_g, max_relative = 1e-8);
            let num_big = crate::quad::integrate_adaptive(
                &|r: f64| yf.big_g(t / r.powf(s)) / r,
                r0,
                top,
                1e-13,
            );
            assert_relative_eq!(yf.ray_tail_big_g(t, r0, s), num_big, max_relative = 1e-7);
        }
        // Φ closed form for the power family: Φ(v) = v^p / p².
        let yp = YoungFunction::power(3.0).unwrap();
        assert_relative_eq!(yp.phi(2.0), 8.0 / 9.0, max_relative = 1e-13);
        // Consistency of Φ under argument scaling.
        let ys = yp.scaled(2.0, 0.5);
        let c: f64 = (2.0f64).powf(-0.5);
        assert_relative_eq!(ys.phi(1.7), yp.phi(c * 1.7) / c, max_relative = 1e-12);
    }

    #[test]
    fn structural_validation_flags_a_corrupt_density() {
        let good = YoungFunction::power(3.0).unwrap();
        assert!(good.validate_structure().is_empty());
        // Concave density with inflated declared exponents: the probe grid
        // must catch the ellipticity mismatch.
        let bad = YoungFunction::from_density(
            "sqrt",
            |t| t.sqrt(),
            |t| 0.5 / t.sqrt(),
            2.0,
            3.0,
        )
        .unwrap();
        assert!(!bad.validate_structure().is_empty());
    }
}
