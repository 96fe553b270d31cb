//! One-dimensional quadrature building blocks.
//!
//! Everything downstream (Young-function integrals, singular-integral
//! annuli, far-field tails) reduces to finite-interval integrals of smooth
//! integrands after explicit substitutions, so the only machinery needed is
//! Gauss-Legendre panels plus an adaptive bisection driver.

use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Nodes are the roots of the Legendre polynomial P_n, found by Newton
/// iteration from the Chebyshev-angle initial guess; weights are
/// 2 / ((1 - x^2) P_n'(x)^2). Accurate to machine precision for the orders
/// used here (n ≤ 64).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = (n as f64) * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Fixed-order Gauss-Legendre integral of `f` over [a, b].
pub fn integrate_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

fn panel16<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl16();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

fn panel8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl8();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

fn adaptive_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let coarse = panel8(f, a, b);
    let mid = 0.5 * (a + b);
    let fine = panel16(f, a, mid) + panel16(f, mid, b);
    // The effective tolerance never drops below the rounding plateau of the
    // panel values themselves; the negated comparison also stops the
    // recursion on NaN instead of bisecting it forever.
    let tol_eff = tol.max(1e-14 * fine.abs());
    if !((fine - coarse).abs() > tol_eff) || depth >= 48 || (b - a) < 1e-300 {
        fine
    } else {
        adaptive_rec(f, a, mid, 0.5 * tol, depth + 1) + adaptive_rec(f, mid, b, 0.5 * tol, depth + 1)
    }
}

/// Adaptive Gauss-Legendre integral of `f` over [a, b] to absolute
/// tolerance `abs_tol`, by panel bisection with an 8-vs-16 point error
/// estimate. Returns the fine estimate if the recursion depth cap is hit.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate_adaptive(f, b, a, abs_tol);
    }
    adaptive_rec(f, a, b, abs_tol.max(1e-300), 0)
}

/// Panel edges `a · 2^k` covering [a, b]: a geometric ladder suited to
/// integrands with a power-law scale at the left endpoint. The final edge is
/// clamped to `b`. Requires 0 < a < b.
pub fn geometric_edges(a: f64, b: f64) -> Vec<f64> {
    assert!(a > 0.0 && b > a, "geometric_edges needs 0 < a < b");
    let mut edges = vec![a];
    let mut e = a;
    while e * 2.0 < b {
        e *= 2.0;
        edges.push(e);
    }
    edges.push(b);
    edges
}

/// Integral of `f` over [a, b] using fixed-order panels on a geometric
/// ladder from the left endpoint; for integrands smooth on (a, b] with a
/// scale set by distance to a singularity at or below `a`.
pub fn integrate_geometric<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, order: usize) -> f64 {
    let edges = geometric_edges(a, b);
    edges
        .windows(2)
        .map(|e| integrate_fixed(f, e[0], e[1], order))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_low_orders_match_known_nodes() {
        let (n2, w2) = gauss_legendre(2);
        let r = 1.0 / 3f64.sqrt();
        assert!((n2[0] + r).abs() < 1e-14 && (n2[1] - r).abs() < 1e-14);
        assert!((w2[0] - 1.0).abs() < 1e-14 && (w2[1] - 1.0).abs() < 1e-14);

        let (n3, w3) = gauss_legendre(3);
        assert!((n3[1]).abs() < 1e-14);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-14);
        assert!((n3[2] - (0.6f64).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn fixed_rule_is_exact_on_polynomials() {
        // GL16 integrates degree-31 polynomials exactly.
        let f = |x: f64| x.powi(17) + 3.0 * x.powi(4) - x;
        let exact = 2.0 * 3.0 / 5.0; // odd terms vanish on [-1, 1]
        assert!((integrate_fixed(&f, -1.0, 1.0, 16) - exact).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_endpoint_power_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2, integrable singularity at 0.
        let v = integrate_adaptive(&|x: f64| x.powf(-0.5), 1e-300, 1.0, 1e-10);
        assert!((v - 2.0).abs() < 1e-7, "got {v}");
        // Smooth case to tight tolerance: ∫_0^π sin = 2.
        let v = integrate_adaptive(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn geometric_ladder_resolves_left_endpoint_scale() {
        // ∫_eps^1 x^{-0.7} dx with eps = 2^-20.
        let eps = (2f64).powi(-20);
        let exact = (1.0 - eps.powf(0.3)) / 0.3;
        let v = integrate_geometric(&|x: f64| x.powf(-0.7), eps, 1.0, 16);
        assert!((v - exact).abs() < 1e-10 * exact.abs(), "got {v} want {exact}");
    }
}
