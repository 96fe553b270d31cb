//! Randomized checker for the structural inequality toolbox of an elliptic
//! Young function.
//!
//! Every inequality below is a consequence of the ellipticity window
//! λ ≤ t g'/g ≤ Λ alone, so a sound `YoungFunction` must pass all of them
//! on arbitrarily many samples. Violations are reported as signed relative
//! slack, so a report is reproducible evidence rather than a yes/no bit.
//!
//! Sampling domains follow the checker contract: a, b, t, α log-uniform in
//! (10⁻³, 10³), θ uniform in (0, 1), M log-uniform in (10⁻², 10²). The
//! windowed difference bound (check v) draws a log-uniform in (10⁻³, M]:
//! its two-branch constant C_M controls the difference g(a) − g(a−b) only
//! when the base point a lies inside the window [0, M] (counterexamples
//! exist for a < 0 and for a > M, where g' may exceed g'(M)).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::young::YoungFunction;

/// Relative tolerance for declaring a sampled inequality violated.
pub const SUITE_RTOL: f64 = 1e-10;

/// Outcome of one inequality over the full sample set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityRecord {
    /// Stable identifier of the inequality.
    pub name: String,
    /// Number of random samples drawn.
    pub samples: u64,
    /// Worst signed relative excess lhs − rhs over the samples; negative
    /// values mean the inequality held with slack.
    pub max_violation: f64,
    /// True iff `max_violation` ≤ the suite tolerance.
    pub pass: bool,
    /// Optional human-readable context (structural failures).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

/// Full suite outcome for one Young function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub family: String,
    pub seed: u64,
    pub rtol: f64,
    pub records: Vec<InequalityRecord>,
}

impl SuiteReport {
    /// True iff every record passed.
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    /// Names of the failing records.
    pub fn failures(&self) -> Vec<&str> {
        self.records.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect()
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.gen_range(0.0..1.0);
    lo * (hi / lo).powf(u)
}

/// Signed relative excess of lhs over rhs.
fn rel_excess(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs()).max(1e-300);
    (lhs - rhs) / scale
}

fn run_check(
    name: &str,
    n_samples: u64,
    rng: &mut ChaCha8Rng,
    mut worst_of_sample: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> InequalityRecord {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        worst = worst.max(worst_of_sample(rng));
    }
    InequalityRecord {
        name: name.to_string(),
        samples: n_samples,
        max_violation: worst,
        pass: worst <= SUITE_RTOL,
        detail: None,
    }
}

/// Runs the eight-part structural inequality suite with deterministic
/// seeded sampling. Structural unsoundness of `yf` (odd extension broken,
/// non-monotone density, ellipticity window violated on the probe grid)
/// produces a failing `structure` record rather than an error; the numeric
/// checks still run so the report names the broken inequalities.
pub fn check_inequality_suite(yf: &YoungFunction, n_samples: u64, seed: u64) -> SuiteReport {
    let lam = yf.lambda();
    let big = yf.big_lambda();
    let (pm, pp) = (yf.p_minus(), yf.p_plus());
    let mut records = Vec::new();

    let structure = yf.validate_structure();
    if !structure.is_empty() {
        records.push(InequalityRecord {
            name: "structure".into(),
            samples: 0,
            max_violation: f64::INFINITY,
            pass: false,
            detail: Some(structure.join("; ")),
        });
    }

    // Independent deterministic stream per check, so adding or reordering
    // checks never perturbs the others' samples.
    let stream = |k: u64| ChaCha8Rng::seed_from_u64(seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15)));

    // (i) min/max sandwich for the density:
    //     min(α^λ, α^Λ) g(t) ≤ g(αt) ≤ max(α^λ, α^Λ) g(t).
    let mut rng = stream(1);
    records.push(run_check("minmax_g", n_samples, &mut rng, |rng| {
        let alpha = log_uniform(rng, 1e-3, 1e3);
        let t = log_uniform(rng, 1e-3, 1e3);
        let mid = yf.g(alpha * t);
        let lo = alpha.powf(lam).min(alpha.powf(big)) * yf.g(t);
        let hi = alpha.powf(lam).max(alpha.powf(big)) * yf.g(t);
        rel_excess(lo, mid).max(rel_excess(mid, hi))
    }));

    // (ii) the same sandwich for the primitive with exponents p∓.
    let mut rng = stream(2);
    records.push(run_check("minmax_G", n_samples, &mut rng, |rng| {
        let alpha = log_uniform(rng, 1e-3, 1e3);
        let t = log_uniform(rng, 1e-3, 1e3);
        let mid = yf.big_g(alpha * t);
        let lo = alpha.powf(pm).min(alpha.powf(pp)) * yf.big_g(t);
        let hi = alpha.powf(pm).max(alpha.powf(pp)) * yf.big_g(t);
        rel_excess(lo, mid).max(rel_excess(mid, hi))
    }));

    // (iii) growth sandwiches with constants calibrated at t = 1 (the
    // min/max sandwiches specialized to base point 1), for g and G.
    let g1 = yf.g(1.0);
    let big_g1 = yf.big_g(1.0);
    let mut rng = stream(3);
    records.push(run_check("growth_calibrated", n_samples, &mut rng, |rng| {
        let t = log_uniform(rng, 1e-3, 1e3);
        let env_g = t.powf(lam).min(t.powf(big));
        let cap_g = t.powf(lam).max(t.powf(big));
        let env_big = t.powf(pm).min(t.powf(pp));
        let cap_big = t.powf(pm).max(t.powf(pp));
        rel_excess(g1 * env_g, yf.g(t))
            .max(rel_excess(yf.g(t), g1 * cap_g))
            .max(rel_excess(big_g1 * env_big, yf.big_g(t)))
            .max(rel_excess(yf.big_g(t), big_g1 * cap_big))
    }));

    // (iv) lower difference bound: g(a−b) − g(a) ≤ −2^{1−Λ} g(b) for
    // a, b > 0 (for the pure power family, equality at a = b/2).
    let shift_c = (2f64).powf(1.0 - big);
    let mut rng = stream(4);
    records.push(run_check("shift_lower", n_samples, &mut rng, |rng| {
        let a = log_uniform(rng, 1e-3, 1e3);
        let b = log_uniform(rng, 1e-3, 1e3);
        rel_excess(yf.g(a - b) - yf.g(a), -shift_c * yf.g(b))
    }));

    // (v) windowed upper difference bound: for 0 < a ≤ M and b > 0,
    //     g(a) − g(a−b) ≤ C_M · max(b, g(b)),
    // C_M = max(g'(M), (g(M) + g(2M))/g(M)) from the two proof branches
    // (mean value inside the window for b ≤ M; crude splitting for b > M).
    let mut rng = stream(5);
    records.push(run_check("shift_upper", n_samples, &mut rng, |rng| {
        let m = log_uniform(rng, 1e-2, 1e2);
        let a = log_uniform(rng, 1e-3, m);
        let b = log_uniform(rng, 1e-3, 1e3);
        let c_m = yf.g_prime(m).max((yf.g(m) + yf.g(2.0 * m)) / yf.g(m));
        rel_excess(yf.g(a) - yf.g(a - b), c_m * b.max(yf.g(b)))
    }));

    // (vi) split of a sum: g(a+b) ≤ (1+θ)^Λ g(a) + C_θ g(b) with
    // C_θ = 2^{j_θ Λ}, j_θ = ⌈log₂(1/θ + 1)⌉ (from the dichotomy
    // b ≤ θa / b > θa in the proof).
    let mut rng = stream(6);
    records.push(run_check("sum_split", n_samples, &mut rng, |rng| {
        let a = log_uniform(rng, 1e-3, 1e3);
        let b = log_uniform(rng, 1e-3, 1e3);
        let theta: f64 = rng.gen_range(f64::EPSILON..1.0);
        let j = (1.0 / theta + 1.0).log2().ceil();
        let c_theta = (2f64).powf(j * big);
        rel_excess(yf.g(a + b), (1.0 + theta).powf(big) * yf.g(a) + c_theta * yf.g(b))
    }));

    // (vii) subadditivity of the inverse up to 2^{1/λ}:
    //     g⁻¹(a+b) ≤ 2^{1/λ} (g⁻¹(a) + g⁻¹(b)).
    let inv_c = (2f64).powf(1.0 / lam);
    let mut rng = stream(7);
    records.push(run_check("inverse_subadditive", n_samples, &mut rng, |rng| {
        let a = log_uniform(rng, 1e-3, 1e3);
        let b = log_uniform(rng, 1e-3, 1e3);
        let lhs = yf.g_inverse(a + b).unwrap_or(f64::INFINITY);
        let rhs = inv_c
            * (yf.g_inverse(a).unwrap_or(f64::INFINITY) + yf.g_inverse(b).unwrap_or(f64::INFINITY));
        rel_excess(lhs, rhs)
    }));

    // (viii) doubling for both the density and the primitive:
    // g(2t) ≤ 2^Λ g(t), G(2t) ≤ 2^{p⁺} G(t).
    let (dg, dbig) = (yf.doubling_g(), yf.doubling_big_g());
    let mut rng = stream(8);
    records.push(run_check("doubling", n_samples, &mut rng, |rng| {
        let t = log_uniform(rng, 1e-3, 1e3);
        rel_excess(yf.g(2.0 * t), dg * yf.g(t))
            .max(rel_excess(yf.big_g(2.0 * t), dbig * yf.big_g(t)))
    }));

    SuiteReport { family: yf.label(), seed, rtol: SUITE_RTOL, records }
}

/// Outcome of the deterministic Young-inequality sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YoungSweepReport {
    pub family: String,
    pub n_t: usize,
    pub n_w: usize,
    /// Worst relative excess of t·w over G(t) + G̃(w) on the grid.
    pub max_inequality_violation: f64,
    /// Worst relative gap |G(t) + G̃(w) − t·w| along the equality line
    /// w = g(t).
    pub max_equality_gap: f64,
    pub pass: bool,
}

/// Checks t·w ≤ G(t) + G̃(w) on an `n_t` × `n_w` logarithmic grid over
/// (10⁻³, 10³)², and the equality case w = g(t) along the t-grid.
///
/// Gaps are measured relative to t·w: the duality identity
/// G(t) + G̃(g(t)) = t·g(t) cancels quantities of size t·w, so an absolute
/// gap target would be unattainable in floating point at large t.
pub fn young_inequality_sweep(yf: &YoungFunction, n_t: usize, n_w: usize) -> YoungSweepReport {
    let (lo, hi) = (1e-3f64, 1e3f64);
    let grid = |n: usize, i: usize| lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
    let mut max_viol = f64::NEG_INFINITY;
    let mut max_gap = 0.0f64;
    for i in 0..n_t {
        let t = grid(n_t, i);
        let big_g_t = yf.big_g(t);
        for j in 0..n_w {
            let w = grid(n_w, j);
            let rhs = big_g_t + yf.conjugate(w).expect("nonnegative grid");
            max_viol = max_viol.max((t * w - rhs) / (t * w).max(1e-300));
        }
        let w_eq = yf.g(t);
        let gap = (big_g_t + yf.conjugate(w_eq).expect("nonnegative density") - t * w_eq).abs();
        max_gap = max_gap.max(gap / (t * w_eq).max(1e-300));
    }
    YoungSweepReport {
        family: yf.label(),
        n_t,
        n_w,
        max_inequality_violation: max_viol,
        max_equality_gap: max_gap,
        pass: max_viol <= 1e-10 && max_gap < 1e-8,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_for_sound_families_small_sample() {
        for yf in [
            YoungFunction::power(3.0).unwrap(),
            YoungFunction::power_sum(3.0, 4.0, 1.0, 1.0).unwrap(),
        ] {
            let report = check_inequality_suite(&yf, 2000, 42);
            assert!(report.pass(), "failures: {:?}", report.failures());
            assert_eq!(report.records.len(), 8);
        }
    }

    #[test]
    fn suite_is_deterministic_for_fixed_seed() {
        let yf = YoungFunction::power_sum(3.0, 4.0, 2.0, 0.5).unwrap();
        let a = check_inequality_suite(&yf, 500, 7);
        let b = check_inequality_suite(&yf, 500, 7);
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.max_violation.to_bits(), rb.max_violation.to_bits());
        }
        let c = check_inequality_suite(&yf, 500, 8);
        assert!(
            a.records.iter().zip(&c.records).any(|(ra, rc)| ra.max_violation != rc.max_violation),
            "different seeds should explore different samples"
        );
    }

    #[test]
    fn corrupt_density_gets_structure_record_and_named_failures() {
        // Concave density masquerading as elliptic: multiple checks must
        // fail, and a structural record must lead the report.
        let bad = YoungFunction::from_density("sqrt", |t| t.sqrt(), |t| 0.5 / t.sqrt(), 2.0, 3.0)
            .unwrap();
        let report = check_inequality_suite(&bad, 500, 1);
        assert!(!report.pass());
        assert!(report.records.iter().any(|r| r.name == "structure" && !r.pass));
        assert!(report.failures().len() > 1, "numeric checks should also name failures");
    }

    #[test]
    fn sweep_confirms_duality_for_power_family() {
        let yf = YoungFunction::power(3.0).unwrap();
        let report = young_inequality_sweep(&yf, 50, 50);
        assert!(report.pass, "{report:?}");
        assert!(report.max_equality_gap < 1e-10);
    }

    #[test]
    fn shift_lower_power_example_has_expected_slack() {
        // p = 3 (g(t) = t²), a = 2, b = 1: g(a−b) − g(a) = 1 − 4 = −3,
        // bound −2^{1−Λ} g(b) = −0.5, so the inequality holds with slack 2.5.
        let yf = YoungFunction::power(3.0).unwrap();
        let lhs = yf.g(2.0 - 1.0) - yf.g(2.0);
        let rhs = -0.5 * yf.g(1.0);
        assert!(lhs <= rhs);
        assert!((lhs - (1.0 - 4.0)).abs() < 1e-15 && (rhs + 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_subadditivity_square_example() {
        // p = 3: g(t) = t², g⁻¹(8) = 2√2 ≤ 2^{1/2} (g⁻¹(4) + g⁻¹(4)) = 4√2.
        let yf = YoungFunction::power(3.0).unwrap();
        let lhs = yf.g_inverse(8.0).unwrap();
        let rhs = (2f64).sqrt() * (yf.g_inverse(4.0).unwrap() + yf.g_inverse(4.0).unwrap());
        assert!((lhs - 8f64.sqrt()).abs() < 1e-10);
        assert!((rhs - 32f64.sqrt()).abs() < 1e-10);
        assert!(lhs <= rhs);
    }
}
