//! Shared helpers for the integration tests.
//!
//! The centerpiece is an independent discrete fractional p-Laplacian
//! (p = 3) on 1D interval lattices, written directly from the documented
//! atom scheme: cell-midpoint pair terms, once-split diagonal cells with
//! linearly interpolated subcell values, and closed-form exterior ray
//! tails. It shares no code with the library assembly, so agreement
//! certifies the discretization rather than the implementation.

/// Independent 1D discrete energy for g(t) = t|t|, zero exterior.
pub struct PLaplacian1D {
    pub a: f64,
    pub b: f64,
    pub nx: usize,
    pub h: f64,
    pub s: f64,
}

fn big_g3(t: f64) -> f64 {
    t.abs().powi(3) / 3.0
}

fn g3(t: f64) -> f64 {
    t * t.abs()
}

impl PLaplacian1D {
    pub fn new(a: f64, b: f64, nx: usize, s: f64) -> Self {
        let h = (b - a) / (nx - 1) as f64;
        Self { a, b, nx, h, s }
    }

    fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }

    /// Trapezoid cell length of node i.
    fn cell(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx - 1 {
            0.5 * self.h
        } else {
            self.h
        }
    }

    /// Base index and fraction of the linear interpolation stencil at x.
    fn interp(&self, x: f64) -> (usize, f64) {
        let t = (x - self.a) / self.h;
        let k = (t.floor() as usize).min(self.nx - 2);
        (k, t - k as f64)
    }

    fn interp_value(&self, u: &[f64], x: f64) -> f64 {
        let (k, f) = self.interp(x);
        (1.0 - f) * u[k] + f * u[k + 1]
    }

    /// The two subcells (centroid, length) of node i's once-split cell.
    fn subcells(&self, i: usize) -> [(f64, f64); 2] {
        let c = self.node(i);
        let lo = if i == 0 { c } else { c - 0.5 * self.h };
        let hi = if i == self.nx - 1 { c } else { c + 0.5 * self.h };
        let mid = 0.5 * (lo + hi);
        [(0.5 * (lo + mid), mid - lo), (0.5 * (mid + hi), hi - mid)]
    }

    /// Closed-form exterior ray tail of the primitive: for G(t) = |t|³/3,
    /// ∫_{r0}^∞ G(t/r^s) dr/r = |t|³ r0^{−3s} / (9s).
    fn tail_big_g(&self, t: f64, r0: f64) -> f64 {
        t.abs().powi(3) * r0.powf(-3.0 * self.s) / (9.0 * self.s)
    }

    /// Closed-form exterior ray tail of the density: for g(t) = t|t|,
    /// ∫_{r0}^∞ g(t/r^s) dr/r^{1+s} = t|t| r0^{−3s} / (3s).
    fn tail_g(&self, t: f64, r0: f64) -> f64 {
        t * t.abs() * r0.powf(-3.0 * self.s) / (3.0 * self.s)
    }

    /// Discrete Gagliardo modular of the zero-extended nodal vector:
    /// 2·(pair + diagonal + exterior) atom sums.
    pub fn modular(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.nx);
        let s = self.s;
        let mut pair = 0.0;
        for i in 0..self.nx {
            for j in (i + 1)..self.nx {
                let d = (j - i) as f64 * self.h;
                pair += self.cell(i) * self.cell(j) * big_g3((u[i] - u[j]) * d.powf(-s)) / d;
            }
        }
        let mut diag = 0.0;
        for i in 0..self.nx {
            let [(ca, la), (cb, lb)] = self.subcells(i);
            let d = (cb - ca).abs();
            let du = self.interp_value(u, ca) - self.interp_value(u, cb);
            diag += la * lb / d * big_g3(du * d.powf(-s));
        }
        let mut ext = 0.0;
        for i in 0..self.nx {
            if u[i] != 0.0 {
                let x = self.node(i);
                ext += self.cell(i) * (self.tail_big_g(u[i], x - self.a) + self.tail_big_g(u[i], self.b - x));
            }
        }
        2.0 * (pair + diag + ext)
    }

    /// Exact gradient of [`Self::modular`].
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.nx);
        let s = self.s;
        let mut out = vec![0.0; self.nx];
        for i in 0..self.nx {
            for j in (i + 1)..self.nx {
                let d = (j - i) as f64 * self.h;
                let ids = d.powf(-s);
                let t = 2.0 * self.cell(i) * self.cell(j) / d * g3((u[i] - u[j]) * ids) * ids;
                out[i] += t;
                out[j] -= t;
            }
        }
        for i in 0..self.nx {
            let [(ca, la), (cb, lb)] = self.subcells(i);
            let d = (cb - ca).abs();
            let ids = d.powf(-s);
            let (ka, fa) = self.interp(ca);
            let (kb, fb) = self.interp(cb);
            let ua = (1.0 - fa) * u[ka] + fa * u[ka + 1];
            let ub = (1.0 - fb) * u[kb] + fb * u[kb + 1];
            let t = 2.0 * la * lb / d * g3((ua - ub) * ids) * ids;
            out[ka] += t * (1.0 - fa);
            out[ka + 1] += t * fa;
            out[kb] -= t * (1.0 - fb);
            out[kb + 1] -= t * fb;
        }
        for i in 0..self.nx {
            if u[i] != 0.0 {
                let x = self.node(i);
                out[i] += 2.0 * self.cell(i) * (self.tail_g(u[i], x - self.a) + self.tail_g(u[i], self.b - x));
            }
        }
        out
    }
}

/// Deterministic rim-zero test state on nx nodes: a smooth profile with a
/// seeded perturbation, zero at both ends.
pub fn rim_zero_state(nx: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..nx)
        .map(|i| {
            if i == 0 || i == nx - 1 {
                0.0
            } else {
                let t = i as f64 / (nx - 1) as f64;
                (std::f64::consts::PI * t).sin() * (0.5 + rng.gen_range(-0.3..0.3))
            }
        })
        .collect()
}
