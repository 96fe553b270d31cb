//! Numerical toolkit for the fractional g-Laplacian
//!
//! (-Δ_g)^s u(x) = 2 ∫ g((u(x) - u(y)) / |x - y|^s) dy / |x - y|^{n+s},
//!
//! where g is an odd, increasing Young-function density with ellipticity
//! bounds 1 < λ ≤ t g'(t)/g(t) ≤ Λ. The crate provides:
//!
//! - Young-function calculus: model families, growth/ellipticity estimation,
//!   inverses, conjugates, and a randomized checker for the structural
//!   inequality toolbox ([`young`], [`inequalities`]).
//! - Singular-integral evaluation of the operator on lattice and analytic
//!   data, with cutoff schedules, far-field closed forms, nonlocal tails, and
//!   an exactly computable half-line profile ([`operator`], [`profile`]).
//! - The Orlicz-Dirichlet energy on boxes: Gagliardo modular, Luxemburg
//!   seminorm, and the exact gradient of the discretized functional
//!   ([`energy`]).
//! - A monotone-descent Dirichlet solver on intervals, balls, and rectangles,
//!   with comparison, boundedness, and scale-covariance checks ([`solver`]).
//! - Regularity diagnostics: oscillation profiles, Hölder-exponent fits,
//!   boundary-growth ratios, and a weak Harnack verifier ([`diagnostics`]).
//!
//! The `fgl` binary drives the same operations from JSON experiment configs
//! with deterministic, seedable output ([`cli`]).

pub mod assembly;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod energy;
pub mod inequalities;
pub mod lattice;
pub mod operator;
pub mod profile;
pub mod quad;
pub mod report;
pub mod solver;
pub mod young;

pub use lattice::{BoxRegion, ExteriorRule, LatticeFunction};
pub use young::{YoungError, YoungFunction};
