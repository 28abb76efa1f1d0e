//! Genie-MAC receivers: feasibility conditions, MAC sum capacity, and the
//! reparameterizations that pin one of the three parameters to the identity.
//!
//! A candidate receiver is a triple `(G, Sigma, T)`: it observes
//! `G X_S + Z` with noise covariance `Sigma`, and is a valid outer bound
//! for the ordered user subset `S` whenever
//!
//! * the upper-triangular part of `T^T G` matches that of `H_S`,
//! * `t_i^T Sigma t_i <= N` for every column `t_i` of `T`, and
//! * `Sigma` is positive-definite.
//!
//! Under these conditions the MAC receiver can sequentially reconstruct a
//! signal at least as good as each receiver in `S` sees, so its sum
//! capacity `1/2 log2 |I + P Sigma^-1 G G^T|` upper-bounds `sum_{i in S} R_i`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest tolerated deviation of `Sigma` from the identity for the
/// operations that require whitened input.
const WHITENED_TOL: f64 = 1e-9;

/// A candidate genie-MAC receiver `(G, Sigma, T)` with `G, T` of shape
/// `m x k` and `Sigma` symmetric positive-definite of shape `m x m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenieMacInstance {
    g: DMatrix<f64>,
    sigma: DMatrix<f64>,
    t: DMatrix<f64>,
}

impl GenieMacInstance {
    /// Validates shapes, symmetry, and positive-definiteness of `sigma`.
    pub fn new(g: DMatrix<f64>, sigma: DMatrix<f64>, t: DMatrix<f64>) -> Result<Self> {
        if t.nrows() != g.nrows() || t.ncols() != g.ncols() {
            return Err(Error::DimensionMismatch {
                context: "T shape vs G",
                expected: g.nrows() * g.ncols(),
                got: t.nrows() * t.ncols(),
            });
        }
        if sigma.nrows() != sigma.ncols() || sigma.nrows() != g.nrows() {
            return Err(Error::DimensionMismatch {
                context: "Sigma rows vs G rows",
                expected: g.nrows(),
                got: sigma.nrows(),
            });
        }
        for m in [&g, &sigma, &t] {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if !m[(i, j)].is_finite() {
                        return Err(Error::NonFinite {
                            row: i,
                            col: j,
                            value: m[(i, j)],
                        });
                    }
                }
            }
        }
        let scale = sigma.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        let asym = linalg::asymmetry(&sigma);
        if asym > 1e-9 * (1.0 + scale) {
            return Err(Error::SigmaNotSymmetric { residual: asym });
        }
        // Positive-definiteness gate; the factorization itself is redone on use.
        linalg::cholesky(&sigma)?;
        Ok(Self { g, sigma, t })
    }

    /// Receiver gains (m x k).
    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Noise covariance (m x m).
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Combining matrix whose columns reconstruct the per-user signals.
    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    /// Number of receive dimensions m.
    pub fn m(&self) -> usize {
        self.g.nrows()
    }

    /// Number of users k = |S|.
    pub fn k(&self) -> usize {
        self.g.ncols()
    }

    /// MAC sum capacity `1/2 log2 |I + P Sigma^-1 G G^T|` in bits per
    /// channel use.
    ///
    /// Evaluated in the symmetric form `1/2 log2 |I + P M M^T|` with
    /// `M = L^-1 G`, `Sigma = L L^T`, which keeps the determinant argument
    /// positive-definite.
    pub fn mac_sum_capacity(&self, p: f64) -> Result<f64> {
        let chol = linalg::cholesky(&self.sigma)?;
        let mut m = self.g.clone();
        chol.l_dirty().solve_lower_triangular_mut(&mut m);
        let f = DMatrix::identity(self.m(), self.m()) + (&m * m.transpose()) * p;
        linalg::half_log2_det_pd(&f)
    }

    /// True when `Sigma` is within [`WHITENED_TOL`] of the identity.
    pub fn is_whitened(&self) -> bool {
        linalg::identity_residual(&self.sigma) <= WHITENED_TOL
    }
}

/// Residuals of the three feasibility conditions for an instance checked
/// against `H_S` and noise variance `n`.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    /// `max_{i<=j} |(T^T G)_{i,j} - (H_S)_{i,j}|`.
    pub match_residual: f64,
    /// `max_i (t_i^T Sigma t_i - N)`; negative values mean slack.
    pub noise_excess: f64,
    /// Smallest eigenvalue of `Sigma`.
    pub sigma_min_eigenvalue: f64,
    /// Tolerance the verdict was computed at.
    pub tol: f64,
    /// Combined verdict.
    pub feasible: bool,
}

/// Checks the outer-bound feasibility conditions of an instance against the
/// ordered-subset gain matrix `h_s` and per-receiver noise variance `n`.
///
/// Violations are reported, not raised; only shape mismatches error.
pub fn check_feasible(
    gm: &GenieMacInstance,
    h_s: &DMatrix<f64>,
    n: f64,
    tol: f64,
) -> Result<FeasibilityReport> {
    let k = gm.k();
    if h_s.nrows() != k || h_s.ncols() != k {
        return Err(Error::DimensionMismatch {
            context: "H_S order vs instance",
            expected: k,
            got: h_s.nrows(),
        });
    }
    let tg = gm.t.transpose() * &gm.g;
    let match_residual = linalg::max_upper_diff(&tg, h_s);
    let mut noise_excess = f64::NEG_INFINITY;
    for i in 0..k {
        let ti = gm.t.column(i);
        let quad = (&gm.sigma * ti).dot(&ti);
        noise_excess = noise_excess.max(quad - n);
    }
    let sigma_min_eigenvalue = gm
        .sigma
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, &x| m.min(x));
    let feasible = match_residual <= tol && noise_excess <= tol && sigma_min_eigenvalue > 0.0;
    Ok(FeasibilityReport {
        match_residual,
        noise_excess,
        sigma_min_eigenvalue,
        tol,
        feasible,
    })
}

/// Whitens the noise: with `Sigma = A A^T` (Cholesky), returns
/// `(A^-1 G, I, A^T T)`.
///
/// The transform preserves `T^T G`, the quadratic forms `t_i^T Sigma t_i`,
/// and the MAC sum capacity.
pub fn whiten(gm: &GenieMacInstance) -> Result<GenieMacInstance> {
    let chol = linalg::cholesky(&gm.sigma)?;
    let a = chol.l();
    let mut g_hat = gm.g.clone();
    a.solve_lower_triangular_mut(&mut g_hat);
    let t_hat = a.transpose() * &gm.t;
    GenieMacInstance::new(g_hat, DMatrix::identity(gm.m(), gm.m()), t_hat)
}

/// Pins `T = I`: maps a whitened instance to
/// `(T^T G, eps * n * I + (1 - eps) * T^T T, I)`.
///
/// Feasibility is preserved for any `eps` in (0, 1); the objective
/// approaches the input objective as `eps -> 0`.
pub fn to_t_identity(gm: &GenieMacInstance, eps: f64, n: f64) -> Result<GenieMacInstance> {
    require_whitened(gm)?;
    require_unit_interval(eps)?;
    let k = gm.k();
    let g_new = gm.t.transpose() * &gm.g;
    let tt = gm.t.transpose() * &gm.t;
    let sigma_new = DMatrix::identity(k, k) * (eps * n) + tt * (1.0 - eps);
    GenieMacInstance::new(g_new, sigma_new, DMatrix::identity(k, k))
}

/// Pins `G = I`: maps a whitened instance to
/// `(I, (eps * I + G^T G)^-1, G^T T)`.
///
/// The `eps * I` term keeps the covariance invertible even for singular
/// `G^T G`; the objective approaches the input objective as `eps -> 0`.
pub fn to_g_identity(gm: &GenieMacInstance, eps: f64) -> Result<GenieMacInstance> {
    require_whitened(gm)?;
    require_unit_interval(eps)?;
    let k = gm.k();
    let gg = DMatrix::identity(k, k) * eps + gm.g.transpose() * &gm.g;
    let inv = linalg::cholesky(&gg)?.inverse();
    // Symmetrize to scrub factorization roundoff.
    let sigma_new = (&inv + inv.transpose()) * 0.5;
    let t_new = gm.g.transpose() * &gm.t;
    GenieMacInstance::new(DMatrix::identity(k, k), sigma_new, t_new)
}

fn require_whitened(gm: &GenieMacInstance) -> Result<()> {
    let residual = linalg::identity_residual(&gm.sigma);
    if residual > WHITENED_TOL {
        return Err(Error::NotWhitened { residual });
    }
    Ok(())
}

fn require_unit_interval(eps: f64) -> Result<()> {
    if eps.is_nan() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::EpsOutOfRange(eps));
    }
    Ok(())
}

/// Quadratic forms `t_i^T Sigma t_i` for every column of `T`.
pub fn noise_quadratic_forms(gm: &GenieMacInstance) -> DVector<f64> {
    DVector::from_fn(gm.k(), |i, _| {
        let ti = gm.t.column(i);
        (&gm.sigma * ti).dot(&ti)
    })
}
