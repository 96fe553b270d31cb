//! Shared quadrature atoms for the discrete Gagliardo modular, its first
//! variation, and the weak pairing.
//!
//! The discretization of ∬ G((u(x)−u(y))/|x−y|^s) dx dy/|x−y|^n on a
//! lattice uses three groups of atoms:
//!
//! 1. node-pair terms: cell-midpoint products
//!    2·w_i·w_j·G((u_i−u_j)/d_ij^s)/d_ij^n over unordered node pairs;
//! 2. diagonal refinement: each node's own cell is split once per axis and
//!    the subcell-pair products are added with piecewise-linear interpolated
//!    values, capturing the i = j cell the midpoint rule cannot see;
//! 3. exterior rays: for zero-exterior functions, the box-complement part
//!    2·w_i·∫_{box^c} G(u_i/|x_i−y|^s) dy/|x_i−y|^n evaluated per node by
//!    exact radial closed forms (Φ) along exit rays — exact in 1D, an
//!    angular trapezoid rule in 2D.
//!
//! The weak pairing and the gradient are assembled from the *same* atoms,
//! so the identity grad_i J(u) = pairing(u, hat_i) − load_i holds to
//! rounding, not merely to discretization order. All parallel reductions
//! collect per-row partial sums and add them in index order, making results
//! independent of the thread count.

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{LatticeFunction, Stencil4};
use crate::young::YoungFunction;

/// Number of angular rays used for 2D exterior closed forms.
pub const DEFAULT_ANGLES: usize = 64;

/// Errors from assembly construction.
#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("fractional order s must lie in (0,1), got {0}")]
    BadOrder(f64),
    #[error("assembly supports dim 1 and 2, got {0}")]
    BadDim(usize),
}

/// One subcell pair of a node's refined diagonal cell.
#[derive(Debug, Clone)]
struct DiagPair {
    /// v_a · v_b / d^n.
    coef: f64,
    /// d^{−s} for the subcell-centroid distance.
    inv_ds: f64,
    sa: Stencil4,
    sb: Stencil4,
}

/// Geometry-dependent quadrature atoms for one lattice; values and Young
/// function are supplied per call, so one assembly serves a whole solve.
pub struct PairAssembly {
    dim: usize,
    shape: [usize; 2],
    s: f64,
    nodes: Vec<[f64; 2]>,
    weights: Vec<f64>,
    /// d^{−n} per integer node offset; index (Δiy+ny−1)·(2nx−1)+(Δix+nx−1).
    inv_dn: Vec<f64>,
    /// d^{−s} per integer node offset.
    inv_ds: Vec<f64>,
    diag: Vec<Vec<DiagPair>>,
    /// Per node: (angular weight, exit radius to the box boundary).
    rays: Vec<Vec<(f64, f64)>>,
}

impl PairAssembly {
    /// Builds the atoms for a lattice geometry. `angles` is the number of
    /// exterior rays in 2D (ignored in 1D, where the two rays are exact).
    pub fn new(lat: &LatticeFunction, s: f64, angles: usize) -> Result<Self, AssemblyError> {
        if !(s > 0.0 && s < 1.0) {
            return Err(AssemblyError::BadOrder(s));
        }
        if lat.dim != 1 && lat.dim != 2 {
            return Err(AssemblyError::BadDim(lat.dim));
        }
        let n = lat.len();
        let [nx, ny] = lat.shape;
        let h = lat.h;
        let dim = lat.dim;

        let nodes: Vec<[f64; 2]> = (0..n).map(|i| lat.node(i)).collect();
        let weights: Vec<f64> = (0..n).map(|i| lat.node_weight(i)).collect();

        let wx = 2 * nx - 1;
        let wy = 2 * ny - 1;
        let mut inv_dn = vec![0.0; wx * wy];
        let mut inv_ds = vec![0.0; wx * wy];
        for dy in 0..wy {
            for dx in 0..wx {
                let ox = dx as isize - (nx as isize - 1);
                let oy = dy as isize - (ny as isize - 1);
                if ox == 0 && oy == 0 {
                    continue;
                }
                let d = h * ((ox * ox + oy * oy) as f64).sqrt();
                inv_dn[dy * wx + dx] = d.powi(-(dim as i32));
                inv_ds[dy * wx + dx] = d.powf(-s);
            }
        }

        let diag = (0..n).map(|i| diag_pairs(lat, &nodes[i], i, s)).collect();

        let rays = (0..n)
            .map(|i| exit_rays(lat, nodes[i], angles.max(4)))
            .collect();

        Ok(Self { dim, shape: lat.shape, s, nodes, weights, inv_dn, inv_ds, diag, rays })
    }

    #[inline]
    fn offset_index(&self, i: usize, j: usize) -> usize {
        let nx = self.shape[0];
        let (ix, iy) = (i % nx, i / nx);
        let (jx, jy) = (j % nx, j / nx);
        let dx = jx + nx - 1 - ix;
        let dy = jy + self.shape[1] - 1 - iy;
        dy * (2 * nx - 1) + dx
    }

    /// Node count.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Spatial dimension of the underlying lattice.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node cell volumes (trapezoid weights).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node coordinates.
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Exterior rays (angle weight, exit radius) of node `i`.
    pub fn rays(&self, i: usize) -> &[(f64, f64)] {
        &self.rays[i]
    }

    /// Discrete modular Σ G((u(x)−u(y))/(scale·|x−y|^s)) dμ over the full
    /// plane for a zero-exterior value vector: pair + diagonal + exterior
    /// atoms. Returns +∞ when a boundary-rim node carries a nonzero value
    /// (such data has infinite zero-extension energy).
    pub fn modular(&self, yf: &YoungFunction, vals: &[f64], scale: f64) -> f64 {
        assert_eq!(vals.len(), self.len(), "value vector does not match assembly");
        let inv_scale = 1.0 / scale;
        let n = self.len();

        let pair_rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (wi, ui) = (self.weights[i], vals[i]);
                let mut acc = 0.0;
                for j in (i + 1)..n {
                    let k = self.offset_index(i, j);
                    let t = (ui - vals[j]) * self.inv_ds[k] * inv_scale;
                    acc += wi * self.weights[j] * self.inv_dn[k] * yf.big_g(t);
                }
                acc
            })
            .collect();
        let pair: f64 = pair_rows.iter().sum();

        let diag: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                self.diag[i]
                    .iter()
                    .map(|p| {
                        let du = p.sa.apply(vals) - p.sb.apply(vals);
                        p.coef * yf.big_g(du * p.inv_ds * inv_scale)
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();

        let ext: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                let t = vals[i] * inv_scale;
                if t == 0.0 {
                    return 0.0;
                }
                self.weights[i]
                    * self.rays[i]
                        .iter()
                        .map(|&(wa, rho)| wa * yf.ray_tail_big_g(t, rho, self.s))
                        .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();

        2.0 * (pair + diag + ext)
    }

    /// Weak pairing ∬ g(D_s u) D_s φ dμ from the same atoms as
    /// [`Self::modular`]; equals d/dτ modular(u + τφ)|_{τ=0} for scale 1.
    pub fn pairing(&self, yf: &YoungFunction, u: &[f64], phi: &[f64]) -> f64 {
        self.pairing_interior(yf, u, phi) + self.pairing_zero_exterior(yf, u, phi)
    }

    /// Box-box part of the pairing (pair + diagonal atoms only), for
    /// callers that substitute their own exterior contribution.
    pub fn pairing_interior(&self, yf: &YoungFunction, u: &[f64], phi: &[f64]) -> f64 {
        assert_eq!(u.len(), self.len());
        assert_eq!(phi.len(), self.len());
        let n = self.len();

        let pair_rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (wi, ui, pi) = (self.weights[i], u[i], phi[i]);
                let mut acc = 0.0;
                for j in (i + 1)..n {
                    let k = self.offset_index(i, j);
                    let ids = self.inv_ds[k];
                    acc += wi
                        * self.weights[j]
                        * self.inv_dn[k]
                        * yf.g((ui - u[j]) * ids)
                        * (pi - phi[j])
                        * ids;
                }
                acc
            })
            .collect();
        let pair: f64 = pair_rows.iter().sum();

        let diag: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                self.diag[i]
                    .iter()
                    .map(|p| {
                        let du = p.sa.apply(u) - p.sb.apply(u);
                        let dphi = p.sa.apply(phi) - p.sb.apply(phi);
                        p.coef * yf.g(du * p.inv_ds) * dphi * p.inv_ds
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();

        2.0 * (pair + diag)
    }

    /// Exterior part of the pairing under the zero-extension rule.
    pub fn pairing_zero_exterior(&self, yf: &YoungFunction, u: &[f64], phi: &[f64]) -> f64 {
        let n = self.len();
        let ext: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                if phi[i] == 0.0 || u[i] == 0.0 {
                    return 0.0;
                }
                self.weights[i]
                    * phi[i]
                    * self.rays[i]
                        .iter()
                        .map(|&(wa, rho)| wa * yf.ray_tail_g(u[i], rho, self.s))
                        .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        2.0 * ext
    }

    /// Exact gradient of [`Self::modular`] at scale 1, written into `out`.
    pub fn gradient(&self, yf: &YoungFunction, vals: &[f64], out: &mut [f64]) {
        assert_eq!(vals.len(), self.len());
        assert_eq!(out.len(), self.len());
        let n = self.len();

        // Pair part: each row is an independent full sum over j ≠ i.
        out.par_iter_mut().enumerate().for_each(|(i, oi)| {
            let (wi, ui) = (self.weights[i], vals[i]);
            let mut acc = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let k = self.offset_index(i, j);
                let ids = self.inv_ds[k];
                acc += 2.0 * wi * self.weights[j] * self.inv_dn[k] * yf.g((ui - vals[j]) * ids) * ids;
            }
            *oi = acc;
        });

        // Diagonal refinement: cheap serial scatter through the stencils.
        for i in 0..n {
            for p in &self.diag[i] {
                let du = p.sa.apply(vals) - p.sb.apply(vals);
                let t = 2.0 * p.coef * yf.g(du * p.inv_ds) * p.inv_ds;
                for k in 0..4 {
                    out[p.sa.idx[k]] += t * p.sa.w[k];
                    out[p.sb.idx[k]] -= t * p.sb.w[k];
                }
            }
        }

        // Exterior part: diagonal in i.
        for i in 0..n {
            if vals[i] != 0.0 {
                let tail: f64 = self.rays[i]
                    .iter()
                    .map(|&(wa, rho)| wa * yf.ray_tail_g(vals[i], rho, self.s))
                    .sum();
                out[i] += 2.0 * self.weights[i] * tail;
            }
        }
    }

    /// Row sums Σ_{j≠i} 2·w_i·w_j·d^{−n−2s}: the diagonal of the pair-term
    /// Hessian up to the g′ factor, used to build solver metrics.
    pub fn pair_curvature_rows(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let wi = self.weights[i];
                let mut acc = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let k = self.offset_index(i, j);
                    let ids = self.inv_ds[k];
                    acc += 2.0 * wi * self.weights[j] * self.inv_dn[k] * ids * ids;
                }
                acc
            })
            .collect()
    }

    /// Σ w_i a_i b_i: the trapezoid inner product on the lattice.
    pub fn weighted_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.weights)
            .map(|((x, y), w)| w * x * y)
            .sum()
    }
}

/// Subcell pairs for the diagonal cell of node `i`: the node's (possibly
/// boundary-clipped) cell is split at its midpoint per axis and all subcell
/// pairs are taken with interpolated values at the subcell centroids.
fn diag_pairs(lat: &LatticeFunction, node: &[f64; 2], i: usize, s: f64) -> Vec<DiagPair> {
    let nx = lat.shape[0];
    let (ix, iy) = (i % nx, i / nx);
    let h = lat.h;
    let seg = |k: usize, n: usize, c: f64| {
        let lo = if k == 0 { c } else { c - 0.5 * h };
        let hi = if k == n - 1 { c } else { c + 0.5 * h };
        let mid = 0.5 * (lo + hi);
        [(0.5 * (lo + mid), mid - lo), (0.5 * (mid + hi), hi - mid)]
    };
    let xs = seg(ix, nx, node[0]);
    let mut cells: Vec<([f64; 2], f64)> = Vec::with_capacity(4);
    if lat.dim == 1 {
        for &(cx, lx) in &xs {
            cells.push(([cx, 0.0], lx));
        }
    } else {
        let ys = seg(iy, lat.shape[1], node[1]);
        for &(cy, ly) in &ys {
            for &(cx, lx) in &xs {
                cells.push(([cx, cy], lx * ly));
            }
        }
    }
    let n_exp = lat.dim as i32;
    let mut pairs = Vec::new();
    for a in 0..cells.len() {
        for b in (a + 1)..cells.len() {
            let (ca, va) = cells[a];
            let (cb, vb) = cells[b];
            if va == 0.0 || vb == 0.0 {
                continue;
            }
            let d = ((ca[0] - cb[0]).powi(2) + (ca[1] - cb[1]).powi(2)).sqrt();
            pairs.push(DiagPair {
                coef: va * vb * d.powi(-n_exp),
                inv_ds: d.powf(-s),
                sa: lat.interp_stencil(ca),
                sb: lat.interp_stencil(cb),
            });
        }
    }
    pairs
}

/// Exit rays from a node: directions with angular weights and the distance
/// to the box boundary along each. 1D: the two axis rays, exact. 2D:
/// uniform angles with trapezoid weights 2π/M, offset by half a step so no
/// ray is exactly axis-parallel.
fn exit_rays(lat: &LatticeFunction, p: [f64; 2], angles: usize) -> Vec<(f64, f64)> {
    let b = &lat.box_region;
    if lat.dim == 1 {
        return vec![(1.0, p[0] - b.lo[0]), (1.0, b.hi[0] - p[0])];
    }
    let m = angles;
    let w = 2.0 * std::f64::consts::PI / m as f64;
    (0..m)
        .map(|k| {
            let phi = w * (k as f64 + 0.5);
            let (dx, dy) = (phi.cos(), phi.sin());
            let ex = if dx > 0.0 {
                (b.hi[0] - p[0]) / dx
            } else if dx < 0.0 {
                (b.lo[0] - p[0]) / dx
            } else {
                f64::INFINITY
            };
            let ey = if dy > 0.0 {
                (b.hi[1] - p[1]) / dy
            } else if dy < 0.0 {
                (b.lo[1] - p[1]) / dy
            } else {
                f64::INFINITY
            };
            (w, ex.min(ey).max(0.0))
        })
        .collect()
}
