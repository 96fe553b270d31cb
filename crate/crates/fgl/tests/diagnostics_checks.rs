//! Integration checks of the measurement layer: oscillation profiles and
//! Hölder fits on synthetic data with known exponents, boundary-ratio and
//! barrier-residual bands, the weak Harnack certificate, and the radial
//! summaries, including their refusal paths.

use fgl::diagnostics::{
    boundary_ratio_profile, discrete_modulus, distance_profile_residual, fit_holder_exponent,
    global_holder_quotient, oscillation_profile, radial_asymmetry, radial_profile,
    weak_harnack_check, DiagnosticsError,
};
use fgl::operator::QuadratureSpec;
use fgl::{BoxRegion, ExteriorRule, LatticeFunction, YoungFunction};

fn p3() -> YoungFunction {
    YoungFunction::power(3.0).unwrap()
}

fn square_grid(nx: usize, f: impl Fn([f64; 2]) -> f64) -> LatticeFunction {
    let region = BoxRegion::rectangle([-1.0, -1.0], [1.0, 1.0]).unwrap();
    LatticeFunction::sample(region, nx, ExteriorRule::Zero, f).unwrap()
}

#[test]
fn holder_fit_recovers_a_synthetic_exponent_exactly() {
    let alpha = 0.55;
    let c = 1.3;
    let profile: Vec<(f64, f64)> =
        [0.4, 0.28, 0.2, 0.14, 0.1].iter().map(|&r| (r, c * f64::powf(r, alpha))).collect();
    let fit = fit_holder_exponent(&profile).unwrap();
    assert!((fit.alpha - alpha).abs() <= 1e-12, "alpha {}", fit.alpha);
    assert!((fit.constant - c).abs() <= 1e-12 * c, "constant {}", fit.constant);
    assert!(fit.residual <= 1e-13, "residual {}", fit.residual);
}

#[test]
fn holder_fit_refuses_underdetermined_profiles() {
    assert!(matches!(
        fit_holder_exponent(&[(0.4, 0.2), (0.2, 0.1)]),
        Err(DiagnosticsError::InsufficientData(_))
    ));
    // Zero oscillations do not count as usable rungs.
    let degenerate = [(0.4, 0.0), (0.2, 0.0), (0.1, 0.3), (0.05, 0.2)];
    assert!(matches!(
        fit_holder_exponent(&degenerate),
        Err(DiagnosticsError::InsufficientData(_))
    ));
}

#[test]
fn oscillation_profile_matches_direct_enumeration() {
    // u = x on a 1D grid: osc over B_r(0) is 2 * (largest node radius <= r).
    let nx = 41;
    let h = 2.0 / 40.0;
    let u = LatticeFunction::sample(
        BoxRegion::interval(-1.0, 1.0).unwrap(),
        nx,
        ExteriorRule::Zero,
        |p| p[0],
    )
    .unwrap();
    let radii = [0.52, 0.33, 0.21, 0.13];
    let prof = oscillation_profile(&u, [0.0, 0.0], &radii);
    assert!(prof.dropped.is_empty());
    assert_eq!(prof.entries.len(), radii.len());
    for (&r, &(rr, osc)) in radii.iter().zip(&prof.entries) {
        assert_eq!(r, rr);
        let expect = 2.0 * h * (r / h).floor();
        assert!((osc - expect).abs() <= 1e-12, "osc {osc} vs {expect} at r={r}");
    }

    // A ball that misses every node is reported, not fabricated.
    let prof = oscillation_profile(&u, [0.5 * h, 0.0], &[0.4 * h]);
    assert!(prof.entries.is_empty());
    assert_eq!(prof.dropped, vec![0.4 * h]);
}

#[test]
fn global_holder_quotient_has_the_linear_closed_form() {
    // For u = c*x on [-1, 1], |du| / d^a = c * d^(1-a) and the farthest
    // pair has d = 2: the quotient is c * 2^(1-a) exactly.
    let c = 0.7;
    let u = LatticeFunction::sample(
        BoxRegion::interval(-1.0, 1.0).unwrap(),
        33,
        ExteriorRule::Zero,
        |p| c * p[0],
    )
    .unwrap();
    for alpha in [0.3, 0.5, 0.9, 1.0] {
        let q = global_holder_quotient(&u, alpha);
        let expect = c * (2f64).powf(1.0 - alpha);
        assert!((q - expect).abs() <= 1e-12 * expect, "alpha {alpha}: {q} vs {expect}");
    }
}

#[test]
fn discrete_modulus_is_the_adjacent_oscillation_at_scale_h() {
    // u = x^2 on h = 0.1: within one spacing only neighbors pair up, and
    // the largest neighbor gap is |0.9^2 - 1.0^2| = 0.19.
    let u = LatticeFunction::sample(
        BoxRegion::interval(-1.0, 1.0).unwrap(),
        21,
        ExteriorRule::Zero,
        |p| p[0] * p[0],
    )
    .unwrap();
    let m = discrete_modulus(&u, 0.1);
    assert!((m - 0.19).abs() <= 1e-12, "modulus {m}");
    // Doubling the scale admits next-nearest pairs: |0.8^2 - 1.0^2| = 0.36.
    let m2 = discrete_modulus(&u, 0.2);
    assert!((m2 - 0.36).abs() <= 1e-12, "modulus {m2}");
}

#[test]
fn boundary_ratio_is_flat_for_the_exact_power_profile() {
    let s = 0.5;
    let dist = |p: [f64; 2]| (1.0 - p[0]).min(1.0 + p[0]);
    let u = LatticeFunction::sample(
        BoxRegion::interval(-1.0, 1.0).unwrap(),
        81,
        ExteriorRule::Zero,
        |p| dist(p).max(0.0).powf(s),
    )
    .unwrap();
    let prof = boundary_ratio_profile(&u, dist, s, (0.1, 0.5)).unwrap();
    assert!(!prof.samples.is_empty());
    assert!((prof.sup_ratio - 1.0).abs() <= 1e-12);
    assert!((prof.inf_ratio - 1.0).abs() <= 1e-12);

    // Degenerate and empty bands are refused.
    assert!(matches!(
        boundary_ratio_profile(&u, dist, s, (0.3, 0.1)),
        Err(DiagnosticsError::EmptyBand(_))
    ));
    assert!(matches!(
        boundary_ratio_profile(&u, dist, s, (5.0, 6.0)),
        Err(DiagnosticsError::EmptyBand(_))
    ));
}

#[test]
fn distance_residual_is_finite_and_settles_across_cutoffs() {
    let q = QuadratureSpec {
        eps: (2f64).powi(-6),
        eps_schedule: (3..=6).map(|k| (2f64).powi(-k)).collect(),
        ..QuadratureSpec::default()
    };
    let res = distance_profile_residual(&p3(), 1.0, 0.5, (0.1, 0.2), 4, &q).unwrap();
    assert_eq!(res.per_cutoff_sup.len(), 4);
    assert!(res.sup.is_finite() && res.sup > 0.0);
    assert!(res.last_two_rel_change <= 0.25, "still moving: {}", res.last_two_rel_change);
    // Cutoffs are recorded largest first, matching the refinement order.
    assert!(res.per_cutoff_sup.windows(2).all(|w| w[0].0 > w[1].0));
}

#[test]
fn distance_residual_rejects_misconfigured_bands() {
    let q = QuadratureSpec::default();
    // Band outside the ball.
    assert!(distance_profile_residual(&p3(), 1.0, 0.5, (0.5, 1.5), 4, &q).is_err());
    // Band reaching under the smallest principal-value cutoff.
    let eps_min = *q.cutoffs().last().unwrap();
    assert!(distance_profile_residual(&p3(), 1.0, 0.5, (0.5 * eps_min, 0.2), 4, &q).is_err());
    // A sup needs at least two points.
    assert!(matches!(
        distance_profile_residual(&p3(), 1.0, 0.5, (0.1, 0.2), 1, &q),
        Err(DiagnosticsError::InsufficientData(_))
    ));
}

#[test]
fn weak_harnack_certifies_a_positive_profile() {
    let u = square_grid(33, |p| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        (1.0 - r2).max(0.0).sqrt() + 0.05
    });
    let rep = weak_harnack_check(&p3(), &u, 1.0, 0.8, 0.5, [0.0, 0.0]).unwrap();
    assert!(rep.pass);
    assert!(rep.sigma_hat > 0.0 && rep.sigma_hat <= 1.0);
    assert!(rep.inf_quarter > 0.0);
    assert!(rep.averaged_term.is_finite() && rep.tail_term.is_finite());
}

#[test]
fn weak_harnack_refuses_signed_or_unresolved_data() {
    let signed = square_grid(17, |p| p[0]);
    assert!(matches!(
        weak_harnack_check(&p3(), &signed, 1.0, 0.8, 0.5, [0.0, 0.0]),
        Err(DiagnosticsError::HypothesisViolation(_))
    ));

    // A quarter-ball smaller than the spacing holds no node when the
    // center sits between lattice points.
    let tiny = square_grid(17, |_| 1.0);
    assert!(matches!(
        weak_harnack_check(&p3(), &tiny, 1.0, 0.01, 0.5, [0.031, 0.017]),
        Err(DiagnosticsError::InsufficientData(_))
    ));
}

#[test]
fn radial_summaries_respect_exact_radial_symmetry() {
    let radial = square_grid(33, |p| 1.0 - (p[0] * p[0] + p[1] * p[1]));
    // At zero radius slack only equal-radius pairs compare, so an exactly
    // radial function has no measured asymmetry.
    assert_eq!(radial_asymmetry(&radial, [0.0, 0.0], 1.0, 1e-9), 0.0);

    // An angular perturbation registers.
    let skewed = square_grid(33, |p| 1.0 - (p[0] * p[0] + p[1] * p[1]) + 0.05 * p[0]);
    assert!(radial_asymmetry(&skewed, [0.0, 0.0], 1.0, 1e-9) > 0.01);

    let prof = radial_profile(&radial, [0.0, 0.0], 0.1);
    assert!(prof.windows(2).all(|w| w[0].0 < w[1].0), "bins out of order");
    for &(r_mid, mean) in &prof {
        // Bin means track 1 - r^2 to within the bin width effects.
        assert!((mean - (1.0 - r_mid * r_mid)).abs() <= 0.15, "bin at {r_mid}: {mean}");
    }
}
