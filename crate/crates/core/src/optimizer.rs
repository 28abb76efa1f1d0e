//! Numerical minimization of the genie-MAC sum-capacity bound f*(H_S) and
//! region-bound assembly over ordered subsets.
//!
//! With the noise covariance pinned to the identity, the problem is
//!
//! ```text
//! minimize    1/2 log2 |I + P G G^T|
//! subject to  upper(T^T G) = upper(H_S),   ||t_i||^2 <= N.
//! ```
//!
//! The equality constraint is eliminated rather than penalized: for any
//! invertible `T` and any strictly-lower-triangular slack `L`, the gains
//! `G = T^-T (upper(H_S) + L)` satisfy it identically, so every iterate is
//! feasible. The solver runs multi-start projected gradient descent in
//! `(T, L)` with central finite-difference gradients, projecting columns of
//! `T` onto the `||t_i|| = sqrt(N)` sphere; since any feasible point is a
//! valid outer bound, the best value found is reported even when the run is
//! not flagged converged (values are certified-valid, possibly non-minimal).

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::{ChannelInstance, OrderedSubset};
use crate::error::{Error, Result};
use crate::genie::{check_feasible, FeasibilityReport, GenieMacInstance};
use crate::linalg;

/// Knobs for [`optimize_fstar`].
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Independent descent starts (the first two are deterministic).
    pub starts: usize,
    /// Seed for the randomized starts.
    pub seed: u64,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Relative objective-change threshold; 25 consecutive iterations below
    /// it count as convergence. Also the feasibility tolerance of the
    /// reported point.
    pub tol: f64,
    /// Steps that push cond(T) beyond this are rejected.
    pub cond_limit: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            max_iters: 2000,
            tol: 1e-9,
            cond_limit: 1e8,
        }
    }
}

/// Consecutive below-tolerance iterations required to declare convergence.
const STALL_ITERS: usize = 25;

/// Relative step for central finite differences.
const FD_STEP: f64 = 1e-6;

/// A certified outer-bound value for one ordered subset.
#[derive(Debug, Clone)]
pub struct BoundResult {
    /// Bound on `sum_{i in S} R_i`, bits per channel use.
    pub value_bits: f64,
    /// The decoding order the bound was computed for.
    pub subset: OrderedSubset,
    /// The minimizing receiver found (`Sigma = I`).
    pub instance: GenieMacInstance,
    /// Whether the winning start met the stall criterion before the
    /// iteration cap.
    pub converged: bool,
    /// Feasibility residuals of the reported point.
    pub residuals: FeasibilityReport,
}

/// Outer bounds for an index set: the minimum over decoding orders plus the
/// per-ordering values.
#[derive(Debug, Clone)]
pub struct SubsetBound {
    /// The unordered user indices (ascending, zero-based).
    pub indices: Vec<usize>,
    /// The tightest bound over all orderings of `indices`.
    pub best: BoundResult,
    /// Every ordering tried and its bound value.
    pub per_ordering: Vec<(OrderedSubset, f64)>,
}

/// Receiver-cooperation value `1/2 log2 |I + (P/N) H_S H_S^T|`, the bound at
/// the start point `G = H_S`, `T = I`.
pub fn receiver_cooperation_bound(h_s: &DMatrix<f64>, p: f64, n: f64) -> Result<f64> {
    let k = h_s.nrows();
    let f = DMatrix::identity(k, k) + h_s * h_s.transpose() * (p / n);
    linalg::half_log2_det_pd(&f)
}

/// Locally minimizes the genie-MAC sum-capacity bound for `h_s` and returns
/// the best feasible point found, labeled with the identity order of the
/// rows of `h_s`.
pub fn optimize_fstar(
    h_s: &DMatrix<f64>,
    p: f64,
    n: f64,
    cfg: &OptimizerConfig,
) -> Result<BoundResult> {
    optimize_subset(h_s, p, n, cfg, OrderedSubset::full(h_s.nrows()))
}

/// As [`optimize_fstar`], labeling the result with a caller-supplied subset.
pub fn optimize_subset(
    h_s: &DMatrix<f64>,
    p: f64,
    n: f64,
    cfg: &OptimizerConfig,
    subset: OrderedSubset,
) -> Result<BoundResult> {
    if h_s.nrows() != h_s.ncols() {
        return Err(Error::NonSquare {
            rows: h_s.nrows(),
            cols: h_s.ncols(),
        });
    }
    if h_s.nrows() == 0 {
        return Err(Error::EmptyChannel);
    }
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::NonPositivePower(p));
    }
    if !n.is_finite() || n <= 0.0 {
        return Err(Error::NonPositiveNoise(n));
    }
    let problem = Problem {
        h_upper: linalg::upper_triangular_part(h_s),
        h_lower: linalg::strict_lower_part(h_s),
        k: h_s.nrows(),
        p,
        n,
        cond_limit: cfg.cond_limit,
    };
    let starts = cfg.starts.max(1);
    // Starts are independent; the ordered min-reduction below keeps the
    // outcome independent of scheduling.
    let outcomes: Vec<StartOutcome> = (0..starts)
        .into_par_iter()
        .map(|s| run_start(&problem, cfg, s))
        .collect();
    let best = outcomes
        .into_iter()
        .min_by(|a, b| a.value.partial_cmp(&b.value).expect("finite objectives"))
        .expect("at least one start");

    // Re-solve for G at the winner with one refinement pass, then package
    // the point with its feasibility residuals.
    let g = problem.gains_refined(&best.t, &best.l).expect("winner solvable");
    let instance = GenieMacInstance::new(g, DMatrix::identity(problem.k, problem.k), best.t)?;
    let residuals = check_feasible(&instance, h_s, n, cfg.tol)?;
    let value_bits = instance.mac_sum_capacity(p)?;
    Ok(BoundResult {
        value_bits,
        subset,
        instance,
        converged: best.converged,
        residuals,
    })
}

/// Evaluates outer bounds for every subset of size at most `max_k`,
/// minimizing over all decoding orders of each subset.
///
/// The enumeration is refused for `K > 8` unless `force` is set.
pub fn region_outer_bound(
    ch: &ChannelInstance,
    max_k: usize,
    cfg: &OptimizerConfig,
    force: bool,
) -> Result<Vec<SubsetBound>> {
    let k = ch.k();
    if max_k == 0 || max_k > k {
        return Err(Error::SubsetSizeTooLarge { max_k, k });
    }
    let mut bounds = Vec::new();
    for size in 1..=max_k {
        bounds.extend(bounds_for_size(ch, size, cfg, force)?);
    }
    Ok(bounds)
}

/// Outer bounds for every subset of exactly `size` users.
pub fn bounds_for_size(
    ch: &ChannelInstance,
    size: usize,
    cfg: &OptimizerConfig,
    force: bool,
) -> Result<Vec<SubsetBound>> {
    let k = ch.k();
    if size == 0 || size > k {
        return Err(Error::SubsetSizeTooLarge { max_k: size, k });
    }
    if k > 8 && !force {
        return Err(Error::TooManyUsers { k });
    }
    let mut bounds = Vec::new();
    for combo in (0..k).combinations(size) {
        let mut best: Option<BoundResult> = None;
        let mut per_ordering = Vec::new();
        for order in combo.iter().copied().permutations(size) {
            let subset = OrderedSubset::new(order)?;
            let h_s = ch.submatrix(&subset)?;
            let result = optimize_subset(&h_s, ch.p(), ch.n(), cfg, subset.clone())?;
            per_ordering.push((subset, result.value_bits));
            let better = best
                .as_ref()
                .map(|b| result.value_bits < b.value_bits)
                .unwrap_or(true);
            if better {
                best = Some(result);
            }
        }
        bounds.push(SubsetBound {
            indices: combo,
            best: best.expect("at least one ordering"),
            per_ordering,
        });
    }
    Ok(bounds)
}

// ---------------------------------------------------------------------------
// Descent internals
// ---------------------------------------------------------------------------

struct Problem {
    h_upper: DMatrix<f64>,
    h_lower: DMatrix<f64>,
    k: usize,
    p: f64,
    n: f64,
    cond_limit: f64,
}

struct StartOutcome {
    value: f64,
    t: DMatrix<f64>,
    l: DMatrix<f64>,
    converged: bool,
}

/// Point in the elimination parameterization.
#[derive(Clone)]
struct Point {
    t: DMatrix<f64>,
    l: DMatrix<f64>,
}

impl Problem {
    fn dim(&self) -> usize {
        self.k * self.k + self.k * (self.k - 1) / 2
    }

    /// `G = T^-T (upper(H_S) + L)`; `None` when `T` is numerically singular.
    fn gains(&self, t: &DMatrix<f64>, l: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        let rhs = &self.h_upper + l;
        t.transpose().lu().solve(&rhs)
    }

    /// Gains with one iterative-refinement pass on `T^T G = upper(H_S) + L`.
    fn gains_refined(&self, t: &DMatrix<f64>, l: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        let rhs = &self.h_upper + l;
        let lu = t.transpose().lu();
        let mut g = lu.solve(&rhs)?;
        let residual = t.transpose() * &g - &rhs;
        if let Some(correction) = lu.solve(&residual) {
            g -= correction;
        }
        Some(g)
    }

    /// `1/2 log2 |I + P G G^T|` at the point, `None` when `T` is singular.
    fn objective(&self, point: &Point) -> Option<f64> {
        let g = self.gains(&point.t, &point.l)?;
        let f = DMatrix::identity(self.k, self.k) + (&g * g.transpose()) * self.p;
        linalg::half_log2_det_pd(&f).ok()
    }

    /// Scales every column of `T` to norm sqrt(N).
    fn project(&self, t: &mut DMatrix<f64>) {
        let radius = self.n.sqrt();
        for j in 0..self.k {
            let norm = t.column(j).norm();
            if norm > 0.0 {
                let col = t.column(j) * (radius / norm);
                t.set_column(j, &col);
            }
        }
    }

    fn pack(&self, point: &Point) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        let mut idx = 0;
        for j in 0..self.k {
            for i in 0..self.k {
                x[idx] = point.t[(i, j)];
                idx += 1;
            }
        }
        for j in 0..self.k {
            for i in (j + 1)..self.k {
                x[idx] = point.l[(i, j)];
                idx += 1;
            }
        }
        x
    }

    fn unpack(&self, x: &DVector<f64>) -> Point {
        let mut t = DMatrix::zeros(self.k, self.k);
        let mut l = DMatrix::zeros(self.k, self.k);
        let mut idx = 0;
        for j in 0..self.k {
            for i in 0..self.k {
                t[(i, j)] = x[idx];
                idx += 1;
            }
        }
        for j in 0..self.k {
            for i in (j + 1)..self.k {
                l[(i, j)] = x[idx];
                idx += 1;
            }
        }
        Point { t, l }
    }

    /// Projected candidate from raw parameters; rejects ill-conditioned `T`.
    fn candidate(&self, x: &DVector<f64>) -> Option<(Point, f64)> {
        let mut point = self.unpack(x);
        self.project(&mut point.t);
        if linalg::condition_number(&point.t) > self.cond_limit {
            return None;
        }
        let value = self.objective(&point)?;
        Some((point, value))
    }
}

/// Deterministic and randomized start points.
fn start_point(problem: &Problem, start: usize, seed: u64) -> Point {
    let k = problem.k;
    let radius = problem.n.sqrt();
    match start {
        // Receiver cooperation: G = H_S / sqrt(N).
        0 => Point {
            t: DMatrix::identity(k, k) * radius,
            l: problem.h_lower.clone(),
        },
        // Upper-triangular gains only.
        1 => Point {
            t: DMatrix::identity(k, k) * radius,
            l: DMatrix::zeros(k, k),
        },
        _ => {
            let stream = seed
                .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(start as u64));
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let scale = problem
                .h_upper
                .iter()
                .chain(problem.h_lower.iter())
                .fold(0.0_f64, |m, &x| m.max(x.abs()))
                .max(1e-3);
            let normal = StandardNormal;
            let mut t = DMatrix::identity(k, k);
            for j in 0..k {
                for i in 0..k {
                    let z: f64 = normal.sample(&mut rng);
                    t[(i, j)] += 0.5 * z;
                }
            }
            let mut l = problem.h_lower.clone();
            for j in 0..k {
                for i in (j + 1)..k {
                    let z: f64 = normal.sample(&mut rng);
                    l[(i, j)] += 0.5 * scale * z;
                }
            }
            Point { t, l }
        }
    }
}

/// Projected gradient descent with backtracking from one start point.
fn run_start(problem: &Problem, cfg: &OptimizerConfig, start: usize) -> StartOutcome {
    let mut point = start_point(problem, start, cfg.seed);
    problem.project(&mut point.t);
    // Randomized starts can in principle land on a singular T; nudge back
    // to the always-valid deterministic start.
    let mut value = match problem.objective(&point) {
        Some(v) if linalg::condition_number(&point.t) <= problem.cond_limit => v,
        _ => {
            point = start_point(problem, 0, cfg.seed);
            problem.project(&mut point.t);
            problem.objective(&point).expect("cooperation start is valid")
        }
    };

    let mut x = problem.pack(&point);
    let mut step = 0.25;
    let mut stall = 0;
    let mut converged = false;
    // Previous iterate and gradient for the Barzilai-Borwein step length.
    let mut last: Option<(DVector<f64>, DVector<f64>)> = None;

    for _ in 0..cfg.max_iters {
        let grad = fd_gradient(problem, &x, value);
        let grad_norm = grad.norm();
        if grad_norm == 0.0 {
            converged = true;
            break;
        }

        // Spectral (BB1) initial step where the curvature estimate is
        // positive; otherwise reuse the adaptive step. Backtracking below
        // keeps the iteration monotone either way.
        let mut trial_step = match &last {
            Some((px, pg)) => {
                let s = &x - px;
                let y = &grad - pg;
                let sy = s.dot(&y);
                if sy > 0.0 {
                    (s.norm_squared() / sy).clamp(1e-12, 1e4)
                } else {
                    step
                }
            }
            None => step,
        };
        last = Some((x.clone(), grad.clone()));

        // Backtracking line search along -grad, projecting each trial.
        let mut improved = false;
        for _ in 0..50 {
            let x_new = &x - &grad * trial_step;
            if let Some((p_new, v_new)) = problem.candidate(&x_new) {
                if v_new < value {
                    let delta = value - v_new;
                    x = problem.pack(&p_new);
                    point = p_new;
                    value = v_new;
                    step = (trial_step * 1.5).min(1e3);
                    improved = true;
                    if delta <= cfg.tol * value.abs().max(1.0) {
                        stall += 1;
                    } else {
                        stall = 0;
                    }
                    break;
                }
            }
            trial_step *= 0.5;
            if trial_step < 1e-14 {
                break;
            }
        }
        if !improved {
            step = (step * 0.5).max(1e-12);
            stall += 1;
        }
        if stall >= STALL_ITERS {
            converged = true;
            break;
        }
    }

    StartOutcome {
        value,
        t: point.t,
        l: point.l,
        converged,
    }
}

/// Central finite-difference gradient with relative step [`FD_STEP`].
fn fd_gradient(problem: &Problem, x: &DVector<f64>, fallback: f64) -> DVector<f64> {
    let dim = x.len();
    let mut grad = DVector::zeros(dim);
    let mut probe = x.clone();
    for i in 0..dim {
        let h = FD_STEP * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let up = problem
            .objective(&problem.unpack(&probe))
            .unwrap_or(fallback);
        probe[i] = x[i] - h;
        let down = problem
            .objective(&problem.unpack(&probe))
            .unwrap_or(fallback);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn quick_cfg() -> OptimizerConfig {
        OptimizerConfig {
            starts: 4,
            max_iters: 600,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn scalar_bound_is_exact() {
        for &(h, p, n) in &[(1.0, 1.0, 1.0), (2.5, 0.7, 1.3), (0.2, 4.0, 0.5)] {
            let res = optimize_fstar(&dmatrix![h], p, n, &quick_cfg()).unwrap();
            let expected = 0.5 * (1.0 + h * h * p / n).log2();
            assert!(
                (res.value_bits - expected).abs() < 1e-9,
                "h={h}: got {} want {expected}",
                res.value_bits
            );
            assert!(res.residuals.feasible);
        }
    }

    #[test]
    fn elimination_points_are_feasible() {
        // Any (T, L) with unit-ish columns gives a feasible G by construction.
        let h_s = dmatrix![1.0, 0.4; -0.3, 0.8];
        let problem = Problem {
            h_upper: linalg::upper_triangular_part(&h_s),
            h_lower: linalg::strict_lower_part(&h_s),
            k: 2,
            p: 1.0,
            n: 1.0,
            cond_limit: 1e8,
        };
        let mut t = dmatrix![0.9, 0.3; -0.1, 0.8];
        problem.project(&mut t);
        let l = dmatrix![0.0, 0.0; 0.7, 0.0];
        let g = problem.gains_refined(&t, &l).unwrap();
        let inst = GenieMacInstance::new(g, DMatrix::identity(2, 2), t).unwrap();
        let report = check_feasible(&inst, &h_s, 1.0, 1e-10).unwrap();
        assert!(report.feasible, "{report:?}");
    }

    #[test]
    fn cooperation_start_matches_closed_form() {
        let h_s = dmatrix![1.0, 0.4; -0.3, 0.8];
        let problem = Problem {
            h_upper: linalg::upper_triangular_part(&h_s),
            h_lower: linalg::strict_lower_part(&h_s),
            k: 2,
            p: 1.0,
            n: 1.0,
            cond_limit: 1e8,
        };
        let point = start_point(&problem, 0, 0);
        let at_start = problem.objective(&point).unwrap();
        let closed = receiver_cooperation_bound(&h_s, 1.0, 1.0).unwrap();
        assert_eq!(at_start, closed);
    }

    #[test]
    fn optimizer_never_exceeds_cooperation_start() {
        let h_s = dmatrix![1.0, 0.2, 0.0; 0.5, 0.9, 0.1; 0.3, 0.0, 1.4];
        let res = optimize_fstar(&h_s, 1.0, 1.0, &quick_cfg()).unwrap();
        let coop = receiver_cooperation_bound(&h_s, 1.0, 1.0).unwrap();
        assert!(res.value_bits <= coop + 1e-12);
        assert!(res.residuals.feasible);
    }

    #[test]
    fn identity_channel_regression() {
        // Two interference-free links: sum rate 1.0 is achievable, and the
        // cooperation bound already evaluates to 1.0, so f* = 1.0.
        let res = optimize_fstar(&DMatrix::identity(2, 2), 1.0, 1.0, &quick_cfg()).unwrap();
        assert!(res.value_bits >= 1.0 - 1e-9);
        assert!(res.value_bits <= 1.0 + 1e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let rect = DMatrix::<f64>::zeros(1, 2);
        assert!(optimize_fstar(&rect, 1.0, 1.0, &quick_cfg()).is_err());
        let h = dmatrix![1.0];
        assert!(optimize_fstar(&h, -1.0, 1.0, &quick_cfg()).is_err());
    }

    #[test]
    fn region_bound_counts_subsets() {
        let ch = ChannelInstance::new(DMatrix::identity(3, 3), 1.0, 1.0).unwrap();
        let cfg = OptimizerConfig {
            starts: 1,
            max_iters: 40,
            ..OptimizerConfig::default()
        };
        let bounds = region_outer_bound(&ch, 2, &cfg, false).unwrap();
        // 3 singletons + 3 pairs.
        assert_eq!(bounds.len(), 6);
        let pair_orderings: usize = bounds
            .iter()
            .filter(|b| b.indices.len() == 2)
            .map(|b| b.per_ordering.len())
            .sum();
        assert_eq!(pair_orderings, 6);
        // Singleton bound on a clean link is 1/2 log2(2).
        let single = &bounds[0];
        assert!((single.best.value_bits - 0.5).abs() < 1e-9);
    }

    #[test]
    fn region_full_set_matches_degraded_capacity() {
        use crate::channel::DegradedChannel;
        use crate::certificate::degraded_sum_capacity;
        let dc = DegradedChannel::new(
            nalgebra::dvector![0.8, 1.7],
            nalgebra::dvector![1.1, -0.4],
            1.0,
            1.0,
        )
        .unwrap();
        let ch = dc.to_channel();
        let bounds = region_outer_bound(&ch, 2, &OptimizerConfig::default(), false).unwrap();
        let full = bounds
            .iter()
            .find(|b| b.indices.len() == 2)
            .expect("full set present");
        let target = degraded_sum_capacity(&dc);
        assert!(
            (full.best.value_bits - target).abs() < 1e-6,
            "full-set bound {} vs sum capacity {target}",
            full.best.value_bits
        );
        assert_eq!(full.per_ordering.len(), 2);
    }

    #[test]
    fn region_bound_guards_size() {
        let ch = ChannelInstance::new(DMatrix::identity(2, 2), 1.0, 1.0).unwrap();
        assert!(matches!(
            region_outer_bound(&ch, 3, &OptimizerConfig::default(), false),
            Err(Error::SubsetSizeTooLarge { .. })
        ));
        let big = ChannelInstance::new(DMatrix::identity(9, 9), 1.0, 1.0).unwrap();
        assert!(matches!(
            region_outer_bound(&big, 1, &OptimizerConfig::default(), false),
            Err(Error::TooManyUsers { k: 9 })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let h_s = dmatrix![1.0, 0.3; 0.6, 1.1];
        let cfg = OptimizerConfig {
            starts: 5,
            max_iters: 200,
            seed: 7,
            ..OptimizerConfig::default()
        };
        let r1 = optimize_fstar(&h_s, 1.0, 1.0, &cfg).unwrap();
        let r2 = optimize_fstar(&h_s, 1.0, 1.0, &cfg).unwrap();
        assert_eq!(r1.value_bits, r2.value_bits);
        assert_eq!(r1.instance.g(), r2.instance.g());
    }
}
