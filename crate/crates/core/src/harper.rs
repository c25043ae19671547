//! The Harper operator `H = (P + P^dagger + Q + Q^dagger) / 4`, its
//! theta-weighted variant, and its top eigenpair `(h, Gamma)`.
//!
//! Two solvers are provided. [`ground_pair_dense`] diagonalizes with cyclic
//! Jacobi rotations and then polishes the top eigenvector with a few
//! power steps on the non-negative matrix `H + kappa`; products and sums of
//! non-negative numbers carry componentwise relative accuracy, which keeps
//! the far tails of `Gamma` (below `1e-16` at d = 64) strictly positive.
//! [`ground_pair_power`] is plain shifted power iteration from the all-ones
//! vector and serves as an independent cross-check.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, CMatrix, RMatrix, C64};
use crate::qudit::{Basis, QuditContext, StateVector};

pub const DEFAULT_THETA: f64 = FRAC_PI_4;
pub const DEFAULT_KAPPA: f64 = 1.0;
/// Gaps at or below this are treated as degenerate.
pub const GAP_THRESHOLD: f64 = 1e-12;
/// Raw Jacobi components more negative than this indicate a numerics bug.
pub const PERRON_FLOOR: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_POWER_ITERATIONS: usize = 1_000_000;

const REFINE_REL_CHANGE: f64 = 1e-14;
const REFINE_MAX_ITERATIONS: usize = 200_000;

/// Greatest eigenvalue and positive eigenvector of a Harper-type operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundPair {
    h: f64,
    gamma: Vec<f64>,
    gap: f64,
    theta: f64,
}

impl GroundPair {
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Position-basis components of `|Gamma>`, all strictly positive.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `h` minus the second-largest eigenvalue; infinite when d = 1.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn gamma_complex(&self) -> Vec<C64> {
        self.gamma.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    pub fn state(&self) -> StateVector {
        StateVector::new(self.gamma_complex(), Basis::Position)
            .expect("gamma is normalized by construction")
    }

    /// `|Gamma><Gamma|`.
    pub fn projector(&self) -> CMatrix {
        let g = self.gamma_complex();
        CMatrix::outer(&g, &g)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 && theta < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::ThetaOutOfRange(theta))
    }
}

/// `(P + P^dagger + Q + Q^dagger) / 4` as a real symmetric matrix.
pub fn harper_matrix(ctx: &QuditContext) -> RMatrix {
    let p = ctx.shift();
    let q = ctx.clock();
    let sum = &(p + &p.adjoint()) + &(q + &q.adjoint());
    sum.real_part().scale(0.25)
}

/// `cos(theta) (P + P^dagger) / 2 + sin(theta) (Q + Q^dagger) / 2`.
pub fn harper_theta_matrix(ctx: &QuditContext, theta: f64) -> Result<RMatrix> {
    check_theta(theta)?;
    let p = ctx.shift();
    let q = ctx.clock();
    let hop = (p + &p.adjoint()).real_part().scale(0.5 * theta.cos());
    let pot = (q + &q.adjoint()).real_part().scale(0.5 * theta.sin());
    Ok(&hop + &pot)
}

/// The Harper operator for `theta`: at `theta = pi/4` the normalization of
/// [`harper_matrix`], otherwise that of [`harper_theta_matrix`] (the two
/// differ by a factor `sqrt(2)` at `pi/4`).
pub fn build_harper(ctx: &QuditContext, theta: f64) -> Result<RMatrix> {
    check_theta(theta)?;
    if (theta - DEFAULT_THETA).abs() <= 1e-15 {
        Ok(harper_matrix(ctx))
    } else {
        harper_theta_matrix(ctx, theta)
    }
}

/// Dense solve of [`build_harper`] for `theta`, tagged with `theta`.
pub fn harper_ground_pair(ctx: &QuditContext, theta: f64) -> Result<GroundPair> {
    let h = build_harper(ctx, theta)?;
    Ok(ground_pair_dense(&h)?.with_theta(theta))
}

fn shift_for_nonnegativity(h: &RMatrix) -> Result<f64> {
    let n = h.dim();
    let mut kappa = DEFAULT_KAPPA;
    for i in 0..n {
        for j in 0..n {
            let x = h[(i, j)];
            if i != j && x < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "off-diagonal entry ({i}, {j}) = {x:e} is negative"
                )));
            }
        }
        kappa = kappa.max(-h[(i, i)] + DEFAULT_KAPPA);
    }
    Ok(kappa)
}

fn max_norm_residual(h: &RMatrix, lambda: f64, v: &[f64]) -> f64 {
    h.matvec(v)
        .iter()
        .zip(v)
        .map(|(hv, x)| (hv - lambda * x).abs())
        .fold(0.0, f64::max)
}

fn normalize(v: &mut [f64]) {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
}

/// Power steps on `h + kappa` until the componentwise relative change
/// stalls. The input must already be close to the Perron vector.
fn perron_refine(h: &RMatrix, kappa: f64, start: &[f64]) -> Result<Vec<f64>> {
    let n = h.dim();
    let mut x: Vec<f64> = start.iter().map(|v| v.abs().max(f64::MIN_POSITIVE)).collect();
    normalize(&mut x);
    for _ in 0..REFINE_MAX_ITERATIONS {
        let mut y = h.matvec(&x);
        for i in 0..n {
            y[i] += kappa * x[i];
        }
        normalize(&mut y);
        let change = y
            .iter()
            .zip(&x)
            .map(|(a, b)| ((a - b) / a).abs())
            .fold(0.0, f64::max);
        x = y;
        if change <= REFINE_REL_CHANGE {
            return Ok(x);
        }
    }
    Err(Error::PowerNoConvergence(REFINE_MAX_ITERATIONS))
}

fn check_positive(v: &[f64]) -> Result<()> {
    for (index, &value) in v.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::PerronViolation { index, value });
        }
    }
    Ok(())
}

/// Top eigenpair of a real symmetric matrix with non-negative off-diagonal
/// entries via cyclic Jacobi, followed by Perron polishing of the vector.
pub fn ground_pair_dense(h: &RMatrix) -> Result<GroundPair> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if !h.is_symmetric(1e-12) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let kappa = shift_for_nonnegativity(h)?;
    let eig = symmetric_eigen(h)?;
    let top = eig.values[0];
    let gap = if n > 1 { top - eig.values[1] } else { f64::INFINITY };
    if gap <= GAP_THRESHOLD {
        return Err(Error::DegenerateTop(gap));
    }

    let mut v = eig.vector(0);
    let peak = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if v[peak] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, &x)| x < -PERRON_FLOOR) {
        return Err(Error::PerronViolation { index, value });
    }

    let gamma = perron_refine(h, kappa, &v)?;
    check_positive(&gamma)?;
    let residual = max_norm_residual(h, top, &gamma);
    if residual > RESIDUAL_TOL {
        return Err(Error::ResidualTooLarge(residual));
    }
    Ok(GroundPair {
        h: top,
        gamma,
        gap,
        theta: DEFAULT_THETA,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerSolution {
    pub pair: GroundPair,
    pub iterations: usize,
    pub residual: f64,
}

/// Shifted power iteration on `h + kappa` from the all-ones vector until
/// `||H x - h x||_inf < tol`. The gap comes from a deflated second run.
pub fn ground_pair_power(h: &RMatrix, kappa: f64, tol: f64) -> Result<PowerSolution> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(kappa >= 1.0) {
        return Err(Error::InvalidArgument(format!("kappa = {kappa} must be >= 1")));
    }
    if let Some(i) = (0..n).find(|&i| !(h[(i, i)] + kappa > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "diagonal entry {i} of H + kappa is not positive"
        )));
    }

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut solved = None;
    for it in 1..=MAX_POWER_ITERATIONS {
        let mut y = h.matvec(&x);
        y.iter_mut().zip(&x).for_each(|(yi, xi)| *yi += kappa * xi);
        let rayleigh: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        let residual = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| (yi - rayleigh * xi).abs())
            .fold(0.0, f64::max);
        if residual < tol {
            solved = Some((rayleigh - kappa, it, residual));
            break;
        }
        normalize(&mut y);
        x = y;
    }
    let (top, iterations, residual) =
        solved.ok_or(Error::PowerNoConvergence(MAX_POWER_ITERATIONS))?;
    check_positive(&x)?;

    let gap = if n > 1 {
        top - deflated_second_eigenvalue(h, kappa, &x, tol)
    } else {
        f64::INFINITY
    };
    Ok(PowerSolution {
        pair: GroundPair {
            h: top,
            gamma: x,
            gap,
            theta: DEFAULT_THETA,
        },
        iterations,
        residual,
    })
}

fn deflated_second_eigenvalue(h: &RMatrix, kappa: f64, top: &[f64], tol: f64) -> f64 {
    let n = h.dim();
    let project = |v: &mut Vec<f64>| {
        let c: f64 = v.iter().zip(top).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(top).for_each(|(a, b)| *a -= c * b);
    };
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618_033_988_75).fract()).collect();
    project(&mut x);
    normalize(&mut x);
    let mut previous = f64::NAN;
    let mut rayleigh = 0.0;
    for _ in 0..MAX_POWER_ITERATIONS {
        let mut y = h.matvec(&x);
        y.iter_mut().zip(&x).for_each(|(yi, xi)| *yi += kappa * xi);
        project(&mut y);
        rayleigh = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        let residual = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| (yi - rayleigh * xi).abs())
            .fold(0.0, f64::max);
        if residual < tol || (rayleigh - previous).abs() < 1e-15 {
            break;
        }
        previous = rayleigh;
        normalize(&mut y);
        x = y;
    }
    rayleigh - kappa
}

/// Residuals of the Fourier/reflection invariance of `Gamma` and of the
/// four expectation values `<Q>, <Q^dagger>, <P>, <P^dagger>` against `h`.
/// Only meaningful for the `theta = pi/4` operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaSymmetryReport {
    pub fourier: f64,
    pub reflection: f64,
    pub expectation: f64,
}

impl GammaSymmetryReport {
    pub fn max(&self) -> f64 {
        self.fourier.max(self.reflection).max(self.expectation)
    }
}

pub fn verify_gamma_symmetries(pair: &GroundPair, ctx: &QuditContext) -> Result<GammaSymmetryReport> {
    if pair.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.dim(),
            actual: pair.dim(),
        });
    }
    let g = pair.gamma_complex();
    let dist = |v: Vec<C64>| -> f64 {
        v.iter()
            .zip(&g)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let fourier = dist(ctx.fourier().matvec(&g));
    let reflection = dist(ctx.reflection().matvec(&g));
    let q = ctx.clock();
    let p = ctx.shift();
    let expectation = [q.clone(), q.adjoint(), p.clone(), p.adjoint()]
        .iter()
        .map(|op| {
            let e: C64 = g.iter().zip(op.matvec(&g)).map(|(a, b)| a.conj() * b).sum();
            (e - C64::new(pair.h, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    Ok(GammaSymmetryReport {
        fourier,
        reflection,
        expectation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{build_context, centered_index};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    /// Plain power iteration on H + I, written independently of the
    /// library solvers.
    fn oracle_power(h: &RMatrix, tol: f64) -> f64 {
        let n = h.dim();
        let mut x = vec![1.0; n];
        loop {
            let nrm = x.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nrm);
            let mut y = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    y[i] += h[(i, j)] * x[j];
                }
                y[i] += x[i];
            }
            let lam: f64 = (0..n).map(|i| x[i] * y[i]).sum();
            let res = (0..n).map(|i| (y[i] - lam * x[i]).abs()).fold(0.0, f64::max);
            if res < tol {
                return lam - 1.0;
            }
            x = y;
        }
    }

    fn dense(d: usize) -> GroundPair {
        let ctx = build_context(d).unwrap();
        ground_pair_dense(&harper_matrix(&ctx)).unwrap()
    }

    #[test]
    fn qubit_harper_matrix() {
        let ctx = build_context(2).unwrap();
        let h = build_harper(&ctx, DEFAULT_THETA).unwrap();
        let want = RMatrix::from_row_major(vec![0.5, 0.5, 0.5, -0.5]).unwrap();
        assert!(h.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn d3_diagonal() {
        let ctx = build_context(3).unwrap();
        let h = build_harper(&ctx, DEFAULT_THETA).unwrap();
        for (i, want) in [0.5, -0.25, -0.25].into_iter().enumerate() {
            assert!((h[(i, i)] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn harper_is_traceless() {
        for d in 1..20 {
            let ctx = build_context(d).unwrap();
            if d > 1 {
                assert!(harper_matrix(&ctx).trace().abs() < 1e-12);
            }
            assert!(harper_theta_matrix(&ctx, 0.3).unwrap().trace().abs() < 1e-12 || d == 1);
        }
    }

    #[test]
    fn theta_endpoints_rejected() {
        let ctx = build_context(4).unwrap();
        for t in [0.0, FRAC_PI_2, -0.1, f64::NAN] {
            assert!(matches!(build_harper(&ctx, t), Err(Error::ThetaOutOfRange(_))));
        }
    }

    #[test]
    fn theta_normalization_at_pi_over_4() {
        let ctx = build_context(6).unwrap();
        let h = harper_matrix(&ctx);
        let ht = harper_theta_matrix(&ctx, FRAC_PI_4).unwrap();
        assert!(ht.max_abs_diff(&h.scale(2f64.sqrt())) < 1e-14);
    }

    #[test]
    fn qubit_ground_pair() {
        let pair = dense(2);
        assert!((pair.h() - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((pair.gamma()[0] - (PI / 8.0).cos()).abs() < 1e-14);
        assert!((pair.gamma()[1] - (PI / 8.0).sin()).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_ground_pair() {
        let pair = dense(1);
        assert_eq!(pair.h(), 1.0);
        assert_eq!(pair.gamma(), &[1.0]);
        assert!(pair.gap().is_infinite());
    }

    #[test]
    fn d5_matches_oracle() {
        let ctx = build_context(5).unwrap();
        let h = harper_matrix(&ctx);
        let want = oracle_power(&h, 1e-13);
        assert!((dense(5).h() - want).abs() < 1e-10);
    }

    #[test]
    fn power_matches_dense() {
        let ctx = build_context(2).unwrap();
        let sol = ground_pair_power(&harper_matrix(&ctx), 1.0, 1e-13).unwrap();
        assert!((sol.pair.h() - FRAC_1_SQRT_2).abs() < 1e-10);

        let ctx = build_context(7).unwrap();
        let h = harper_matrix(&ctx);
        let sol = ground_pair_power(&h, DEFAULT_KAPPA, 1e-13).unwrap();
        let d = ground_pair_dense(&h).unwrap();
        assert!((sol.pair.h() - d.h()).abs() < 1e-9);
        assert!(sol.iterations > 0);
        assert!((sol.pair.gap() - d.gap()).abs() < 1e-6);
        for (a, b) in sol.pair.gamma().iter().zip(d.gamma()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn power_rejects_small_kappa() {
        let ctx = build_context(3).unwrap();
        assert!(ground_pair_power(&harper_matrix(&ctx), 0.5, 1e-12).is_err());
    }

    #[test]
    fn symmetries_small_d() {
        let ctx = build_context(2).unwrap();
        let r = verify_gamma_symmetries(&dense(2), &ctx).unwrap();
        assert!(r.max() < 1e-12);
        for d in [6, 9] {
            let ctx = build_context(d).unwrap();
            let r = verify_gamma_symmetries(&dense(d), &ctx).unwrap();
            assert!(r.max() < 1e-10, "d={d}: {r:?}");
        }
    }

    #[test]
    fn far_tails_stay_positive() {
        let pair = dense(64);
        let min = pair.gamma().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0 && min < 1e-15);
        // the tail ratio obeys the recurrence to high relative accuracy
        let ctx = build_context(64).unwrap();
        let h = harper_matrix(&ctx);
        let hv = h.matvec(pair.gamma());
        for a in 0..64 {
            let rel = (hv[a] - pair.h() * pair.gamma()[a]).abs() / pair.gamma()[a];
            assert!(rel < 1e-8, "a={a} rel={rel:e}");
        }
    }

    #[test]
    fn gamma_peaks_at_origin() {
        for d in [3, 8, 17, 40] {
            let pair = dense(d);
            let (arg, _) = pair
                .gamma()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap();
            assert_eq!(centered_index(arg as i64, d), 0);
        }
    }

    #[test]
    fn dense_rejects_negative_hopping() {
        let h = RMatrix::from_row_major(vec![0.0, -1.0, -1.0, 0.0]).unwrap();
        assert!(ground_pair_dense(&h).is_err());
    }

    #[test]
    fn dense_rejects_degenerate_top() {
        let h = RMatrix::from_row_major(vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(ground_pair_dense(&h), Err(Error::DegenerateTop(_))));
    }

    mod props {
        use super::super::*;
        use crate::linalg::symmetric_eigenvalues;
        use crate::qudit::{build_context, centered_index};
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn perron_pair_properties(d in 1usize..=64) {
                let ctx = build_context(d).unwrap();
                let pair = harper_ground_pair(&ctx, DEFAULT_THETA).unwrap();
                prop_assert!(pair.gap() > GAP_THRESHOLD);
                prop_assert!(pair.gamma().iter().all(|&g| g > 0.0));
                let (arg, _) = pair
                    .gamma()
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap();
                prop_assert_eq!(centered_index(arg as i64, d), 0);
            }

            #[test]
            fn spectrum_in_unit_interval(d in 1usize..=64) {
                let ctx = build_context(d).unwrap();
                let ev = symmetric_eigenvalues(&harper_matrix(&ctx)).unwrap();
                prop_assert!(ev.iter().all(|&x| (-1.0 - 1e-12..=1.0 + 1e-12).contains(&x)));
            }

            #[test]
            fn theta_sweep_is_lipschitz(d in 2usize..=24, theta in 0.05f64..1.5, delta in -0.02f64..0.02) {
                let ctx = build_context(d).unwrap();
                let top = |t: f64| symmetric_eigenvalues(&harper_theta_matrix(&ctx, t).unwrap()).unwrap()[0];
                // the derivative of H_theta has norm at most sqrt(2)
                prop_assert!((top(theta + delta) - top(theta)).abs() <= 2f64.sqrt() * delta.abs() + 1e-12);
            }
        }
    }
}
