//! The certainty `C = |<Q><P>|`, minimum-uncertainty states
//! `|alpha, beta> = P^alpha Q^beta |Gamma>`, the modulus lift, and a
//! multi-start maximizer of `C` over pure states.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harper::{ground_pair_dense, harper_theta_matrix, GroundPair};
use crate::linalg::{inner, C64};
use crate::qudit::{periodic_index, Basis, DensityMatrix, QuditContext, StateVector};
use crate::sampling::{haar_state, seeded_rng};

fn check_dim(ctx: &QuditContext, actual: usize) -> Result<()> {
    if actual != ctx.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.dim(),
            actual,
        });
    }
    Ok(())
}

/// `(<Q>, <P>)` from position amplitudes `c`.
fn expectations_of(c: &[C64], ctx: &QuditContext) -> (C64, C64) {
    let d = c.len();
    let q = c
        .iter()
        .enumerate()
        .map(|(a, x)| ctx.omega(a as i64) * x.norm_sqr())
        .sum();
    let p = (0..d).map(|a| c[a] * c[(a + 1) % d].conj()).sum();
    (q, p)
}

/// `(<phi|Q|phi>, <phi|P|phi>)`.
pub fn expectations(state: &StateVector, ctx: &QuditContext) -> Result<(C64, C64)> {
    check_dim(ctx, state.dim())?;
    Ok(expectations_of(&state.position_coefficients(ctx), ctx))
}

/// `(tr rho Q, tr rho P)`.
pub fn expectations_mixed(rho: &DensityMatrix, ctx: &QuditContext) -> Result<(C64, C64)> {
    check_dim(ctx, rho.dim())?;
    let d = rho.dim();
    let m = rho.entries();
    let q = (0..d).map(|a| m[(a, a)] * ctx.omega(a as i64)).sum();
    let p = (0..d).map(|a| m[(a, (a + 1) % d)]).sum();
    Ok((q, p))
}

/// `|<Q><P>|` for a pure state.
pub fn certainty(state: &StateVector, ctx: &QuditContext) -> Result<f64> {
    let (q, p) = expectations(state, ctx)?;
    Ok(q.norm() * p.norm())
}

/// `|tr(rho Q) tr(rho P)|`.
pub fn certainty_mixed(rho: &DensityMatrix, ctx: &QuditContext) -> Result<f64> {
    let (q, p) = expectations_mixed(rho, ctx)?;
    Ok(q.norm() * p.norm())
}

/// `P^alpha Q^beta |Gamma>` together with its labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinUncertaintyState {
    pub alpha: usize,
    pub beta: usize,
    pub amplitudes: Vec<C64>,
}

impl MinUncertaintyState {
    pub fn state(&self) -> StateVector {
        StateVector::normalized(self.amplitudes.clone(), Basis::Position)
            .expect("Weyl translates of a unit vector are unit vectors")
    }
}

pub fn min_uncertainty_state(
    alpha: usize,
    beta: usize,
    pair: &GroundPair,
    ctx: &QuditContext,
) -> Result<MinUncertaintyState> {
    let d = ctx.dim();
    check_dim(ctx, pair.dim())?;
    if alpha >= d || beta >= d {
        return Err(Error::IndexOutOfRange { alpha, beta, d });
    }
    let amplitudes = ctx.apply_weyl(alpha as i64, beta as i64, &pair.gamma_complex());
    Ok(MinUncertaintyState {
        alpha,
        beta,
        amplitudes,
    })
}

/// All `d^2` states, row-major in `(alpha, beta)`.
pub fn all_min_uncertainty_states(pair: &GroundPair, ctx: &QuditContext) -> Result<Vec<MinUncertaintyState>> {
    let d = ctx.dim();
    (0..d * d)
        .map(|k| min_uncertainty_state(k / d, k % d, pair, ctx))
        .collect()
}

/// Max-abs entry of `(1/d) sum |alpha,beta><alpha,beta| - 1`.
pub fn resolution_of_identity_residual(pair: &GroundPair, ctx: &QuditContext) -> Result<f64> {
    let d = ctx.dim();
    let states = all_min_uncertainty_states(pair, ctx)?;
    let mut sum = vec![C64::new(0.0, 0.0); d * d];
    for s in &states {
        let v = &s.amplitudes;
        for i in 0..d {
            for j in 0..d {
                sum[i * d + j] += v[i] * v[j].conj();
            }
        }
    }
    let scale = 1.0 / d as f64;
    Ok((0..d * d)
        .map(|k| {
            let id = if k / d == k % d { 1.0 } else { 0.0 };
            (sum[k] * scale - id).norm()
        })
        .fold(0.0, f64::max))
}

/// Replaces every coefficient in `basis` by its modulus.
pub fn modulus_lift(state: &StateVector, basis: Basis, ctx: &QuditContext) -> Result<StateVector> {
    check_dim(ctx, state.dim())?;
    let coeffs = match basis {
        Basis::Position => state.position_coefficients(ctx),
        Basis::Momentum => state.momentum_coefficients(ctx),
    };
    let lifted = coeffs.iter().map(|c| C64::new(c.norm(), 0.0)).collect();
    StateVector::normalized(lifted, basis)
}

/// Label and fidelity of the minimum-uncertainty state closest to `state`.
/// Ties resolve to the lexicographically smallest `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosestMatch {
    pub alpha: usize,
    pub beta: usize,
    pub fidelity: f64,
}

pub fn closest_min_uncertainty_state(
    state: &StateVector,
    pair: &GroundPair,
    ctx: &QuditContext,
) -> Result<ClosestMatch> {
    check_dim(ctx, state.dim())?;
    let c = state.position_coefficients(ctx);
    let mut best = ClosestMatch {
        alpha: 0,
        beta: 0,
        fidelity: f64::NEG_INFINITY,
    };
    for s in all_min_uncertainty_states(pair, ctx)? {
        let fidelity = inner(&s.amplitudes, &c).norm_sqr();
        if fidelity > best.fidelity {
            best = ClosestMatch {
                alpha: s.alpha,
                beta: s.beta,
                fidelity,
            };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub seeds: usize,
    pub iterations: usize,
    pub seed: u64,
    pub step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            seeds: 32,
            iterations: 500,
            seed: 42,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerResult {
    pub value: f64,
    pub state: StateVector,
    /// Index of the start that produced the best value.
    pub start: usize,
    pub seed: u64,
}

fn log_certainty(c: &[C64], ctx: &QuditContext) -> f64 {
    let (q, p) = expectations_of(c, ctx);
    q.norm().ln() + p.norm().ln()
}

fn normalized(mut v: Vec<C64>) -> Vec<C64> {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Gradient of `log |<Q>| + log |<P>|` with respect to the amplitudes,
/// projected onto the tangent space of the sphere.
fn log_certainty_gradient(c: &[C64], ctx: &QuditContext) -> Vec<C64> {
    let d = c.len();
    let (q, p) = expectations_of(c, ctx);
    let cq = q.conj() / q.norm_sqr();
    let cp = p.conj() / p.norm_sqr();
    let mut g: Vec<C64> = (0..d)
        .map(|a| {
            let w = ctx.omega(a as i64);
            // Q psi and Q^dagger psi
            let gq = cq * w * c[a] + cq.conj() * w.conj() * c[a];
            // P psi has component c[a-1]; P^dagger psi has c[a+1]
            let prev = c[(a + d - 1) % d];
            let next = c[(a + 1) % d];
            let gp = cp * prev + cp.conj() * next;
            gq + gp
        })
        .collect();
    let radial: f64 = inner(c, &g).re;
    g.iter_mut().zip(c).for_each(|(gi, ci)| *gi -= ci * radial);
    g
}

fn project_tangent(c: &[C64], v: &mut [C64]) {
    let radial = inner(c, v).re;
    v.iter_mut().zip(c).for_each(|(x, ci)| *x -= ci * radial);
}

fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).re
}

/// Ascent along Polak-Ribiere conjugate directions built from the
/// projected gradient, with a backtracking step that doubles after every
/// accepted move.
fn ascend(start: Vec<C64>, cfg: &OptimizerConfig, ctx: &QuditContext) -> (f64, Vec<C64>) {
    let mut c = start;
    let mut f = log_certainty(&c, ctx);
    let mut step = cfg.step;
    let mut g = log_certainty_gradient(&c, ctx);
    let mut dir = g.clone();
    for _ in 0..cfg.iterations {
        if real_dot(&dir, &g) <= 0.0 {
            dir = g.clone();
        }
        let mut moved = false;
        while step > 1e-12 {
            let trial = normalized(c.iter().zip(&dir).map(|(x, s)| x + s * step).collect());
            let ft = log_certainty(&trial, ctx);
            if ft.is_finite() && ft >= f {
                c = trial;
                f = ft;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
        step *= 2.0;
        let g_new = log_certainty_gradient(&c, ctx);
        let gg = real_dot(&g, &g);
        let diff: Vec<C64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let beta = if gg > 0.0 { (real_dot(&g_new, &diff) / gg).max(0.0) } else { 0.0 };
        project_tangent(&c, &mut dir);
        dir = g_new.iter().zip(&dir).map(|(gn, s)| gn + s * beta).collect();
        g = g_new;
    }
    (f.exp(), c)
}

/// Projected gradient ascent of `log C` from `cfg.seeds` Haar-random
/// starts; start `k` draws from stream `k` of `cfg.seed`. The result does
/// not depend on how starts are scheduled across threads.
pub fn maximize_certainty(ctx: &QuditContext, cfg: &OptimizerConfig) -> Result<OptimizerResult> {
    if cfg.seeds == 0 {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    if !(cfg.step > 0.0) {
        return Err(Error::InvalidArgument(format!("step {} must be positive", cfg.step)));
    }
    let d = ctx.dim();
    let runs: Vec<(f64, Vec<C64>)> = (0..cfg.seeds)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeded_rng(cfg.seed, k as u64);
            let start = haar_state(d, &mut rng).amplitudes().to_vec();
            ascend(start, cfg, ctx)
        })
        .collect();
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.0 > runs[best].0 || runs[best].0.is_nan() {
            best = k;
        }
    }
    let (value, amps) = runs.into_iter().nth(best).expect("non-empty");
    Ok(OptimizerResult {
        value,
        state: StateVector::normalized(amps, Basis::Position)?,
        start: best,
        seed: cfg.seed,
    })
}

/// Left side `cos(theta) |<Q>| + sin(theta) |<P>|` of the theta inequality.
pub fn ms_lhs(state: &StateVector, theta: f64, ctx: &QuditContext) -> Result<f64> {
    let (q, p) = expectations(state, ctx)?;
    Ok(theta.cos() * q.norm() + theta.sin() * p.norm())
}

/// Generator of the states saturating the theta inequality: the Perron
/// pair of `cos(theta) (Q + Q^dagger)/2 + sin(theta) (P + P^dagger)/2`,
/// which is `H` evaluated at `pi/2 - theta`. Its eigenvalue is `h_theta`.
pub fn theta_generator(ctx: &QuditContext, theta: f64) -> Result<GroundPair> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    let h = harper_theta_matrix(ctx, FRAC_PI_2 - theta)?;
    Ok(ground_pair_dense(&h)?.with_theta(theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MsCheck {
    pub lhs: f64,
    pub h_theta: f64,
}

impl MsCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.h_theta + tol
    }
}

pub fn ms_inequality_check(state: &StateVector, theta: f64, ctx: &QuditContext) -> Result<MsCheck> {
    let generator = theta_generator(ctx, theta)?;
    Ok(MsCheck {
        lhs: ms_lhs(state, theta, ctx)?,
        h_theta: generator.h(),
    })
}

/// `P^alpha Q^beta` applied to `theta_generator(ctx, theta)`.
pub fn theta_min_uncertainty_state(
    alpha: i64,
    beta: i64,
    generator: &GroundPair,
    ctx: &QuditContext,
) -> Result<StateVector> {
    check_dim(ctx, generator.dim())?;
    let d = ctx.dim();
    let v = ctx.apply_weyl(
        periodic_index(alpha, d) as i64,
        periodic_index(beta, d) as i64,
        &generator.gamma_complex(),
    );
    StateVector::normalized(v, Basis::Position)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harper::{harper_ground_pair, DEFAULT_THETA};
    use crate::qudit::build_context;
    use crate::sampling::ginibre_density;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn setup(d: usize) -> (QuditContext, GroundPair) {
        let ctx = build_context(d).unwrap();
        let pair = harper_ground_pair(&ctx, DEFAULT_THETA).unwrap();
        (ctx, pair)
    }

    /// Bloch vector of a qubit state via the Pauli matrices directly.
    fn bloch(c: &[C64]) -> [f64; 3] {
        let x = 2.0 * (c[0].conj() * c[1]).re;
        let y = 2.0 * (c[0].conj() * c[1]).im;
        let z = c[0].norm_sqr() - c[1].norm_sqr();
        [x, y, z]
    }

    #[test]
    fn sharp_position_has_zero_certainty() {
        let (ctx, _) = setup(2);
        let s = StateVector::basis_state(2, 0).unwrap();
        assert!(certainty(&s, &ctx).unwrap().abs() < 1e-15);
    }

    #[test]
    fn qubit_bloch_state_has_half() {
        let (ctx, _) = setup(2);
        // n = (1, 0, 1)/sqrt 2: polar angle pi/4, azimuth 0
        let s = StateVector::from_real(&[(PI / 8.0).cos(), (PI / 8.0).sin()], Basis::Position).unwrap();
        assert!((certainty(&s, &ctx).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_has_zero_certainty() {
        for d in 1..8 {
            let ctx = build_context(d).unwrap();
            let rho = DensityMatrix::maximally_mixed(d).unwrap();
            let c = certainty_mixed(&rho, &ctx).unwrap();
            if d > 1 {
                assert!(c < 1e-15);
            }
        }
    }

    #[test]
    fn mixed_matches_pure() {
        let (ctx, _) = setup(6);
        let mut rng = seeded_rng(3, 0);
        let s = haar_state(6, &mut rng);
        let rho = DensityMatrix::from_pure(&s, &ctx);
        let a = certainty(&s, &ctx).unwrap();
        let b = certainty_mixed(&rho, &ctx).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn origin_state_is_gamma() {
        let (ctx, pair) = setup(5);
        let s = min_uncertainty_state(0, 0, &pair, &ctx).unwrap();
        for (a, g) in s.amplitudes.iter().zip(pair.gamma()) {
            assert!((a - C64::new(*g, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn qubit_min_states_bloch_vectors() {
        let (ctx, pair) = setup(2);
        for alpha in 0..2 {
            for beta in 0..2 {
                let s = min_uncertainty_state(alpha, beta, &pair, &ctx).unwrap();
                let n = bloch(&s.amplitudes);
                let sa = if alpha == 0 { 1.0 } else { -1.0 };
                let sb = if beta == 0 { 1.0 } else { -1.0 };
                // P = sigma_x flips n_z and Q = sigma_z flips n_x, so the
                // label alpha sets the sign of n_z and beta that of n_x
                let want = [sb * FRAC_1_SQRT_2, 0.0, sa * FRAC_1_SQRT_2];
                for k in 0..3 {
                    assert!((n[k] - want[k]).abs() < 1e-14, "{alpha}{beta}: {n:?}");
                }
            }
        }
    }

    #[test]
    fn min_state_saturates() {
        let (ctx, pair) = setup(5);
        let s = min_uncertainty_state(2, 3, &pair, &ctx).unwrap();
        let c = certainty(&s.state(), &ctx).unwrap();
        assert!((c - pair.h() * pair.h()).abs() < 1e-10);
    }

    #[test]
    fn min_state_distributions_are_shifts() {
        let (ctx, pair) = setup(7);
        let g = pair.gamma();
        for (alpha, beta) in [(0, 0), (3, 5), (6, 1)] {
            let s = min_uncertainty_state(alpha, beta, &pair, &ctx).unwrap().state();
            let pos = s.position_coefficients(&ctx);
            let mom = s.momentum_coefficients(&ctx);
            for a in 0..7 {
                let want = g[(a + 7 - alpha) % 7].powi(2);
                assert!((pos[a].norm_sqr() - want).abs() < 1e-10);
                let want = g[(a + 7 - beta) % 7].powi(2);
                assert!((mom[a].norm_sqr() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn out_of_range_labels() {
        let (ctx, pair) = setup(3);
        assert!(matches!(
            min_uncertainty_state(3, 0, &pair, &ctx),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn resolution_of_identity() {
        let (ctx, pair) = setup(2);
        assert!(resolution_of_identity_residual(&pair, &ctx).unwrap() < 1e-12);
        for d in [7, 16] {
            let (ctx, pair) = setup(d);
            assert!(resolution_of_identity_residual(&pair, &ctx).unwrap() < 1e-10);
        }
    }

    #[test]
    fn lift_fixes_nonnegative_input() {
        let (ctx, _) = setup(4);
        let s = StateVector::from_real(&[0.1, 0.5, 0.3, 0.2], Basis::Position).unwrap();
        let l = modulus_lift(&s, Basis::Position, &ctx).unwrap();
        for (a, b) in l.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn lift_relations() {
        let (ctx, _) = setup(6);
        let mut rng = seeded_rng(11, 0);
        for _ in 0..1000 {
            let s = haar_state(6, &mut rng);
            let (q, p) = expectations(&s, &ctx).unwrap();
            let l = modulus_lift(&s, Basis::Position, &ctx).unwrap();
            let (ql, pl) = expectations(&l, &ctx).unwrap();
            assert!((ql - q).norm() < 1e-14);
            assert!(pl.im.abs() < 1e-14);
            assert!(pl.re >= p.norm() - 1e-14);
            let m = modulus_lift(&s, Basis::Momentum, &ctx).unwrap();
            let (qm, pm) = expectations(&m, &ctx).unwrap();
            assert!((pm - p).norm() < 1e-12);
            assert!(qm.norm() >= q.norm() - 1e-12);
        }
    }

    #[test]
    fn optimizer_qubit() {
        let (ctx, _) = setup(2);
        let cfg = OptimizerConfig {
            seeds: 32,
            ..Default::default()
        };
        let r = maximize_certainty(&ctx, &cfg).unwrap();
        assert!((r.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn optimizer_d3_reaches_bound() {
        let (ctx, pair) = setup(3);
        let cfg = OptimizerConfig {
            seeds: 64,
            ..Default::default()
        };
        let r = maximize_certainty(&ctx, &cfg).unwrap();
        let h2 = pair.h() * pair.h();
        assert!(r.value <= h2 + 1e-9);
        assert!((r.value - h2).abs() < 1e-6, "{} vs {h2}", r.value);
    }

    #[test]
    fn optimizer_d4_lands_on_min_state() {
        let (ctx, pair) = setup(4);
        let cfg = OptimizerConfig {
            seeds: 64,
            ..Default::default()
        };
        let r = maximize_certainty(&ctx, &cfg).unwrap();
        let m = closest_min_uncertainty_state(&r.state, &pair, &ctx).unwrap();
        assert!(m.fidelity > 1.0 - 1e-6, "{m:?}");
    }

    #[test]
    fn optimizer_is_schedule_independent() {
        let (ctx, _) = setup(4);
        let cfg = OptimizerConfig {
            seeds: 8,
            iterations: 50,
            ..Default::default()
        };
        let a = maximize_certainty(&ctx, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| maximize_certainty(&ctx, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let (ctx, _) = setup(5);
        let mut rng = seeded_rng(5, 0);
        let c = haar_state(5, &mut rng).amplitudes().to_vec();
        let g = log_certainty_gradient(&c, &ctx);
        let mut dir: Vec<C64> = haar_state(5, &mut rng).amplitudes().to_vec();
        let radial = inner(&c, &dir).re;
        dir.iter_mut().zip(&c).for_each(|(x, ci)| *x -= ci * radial);
        let eps = 1e-6;
        let f = |t: f64| {
            let v: Vec<C64> = c.iter().zip(&dir).map(|(x, y)| x + y * t).collect();
            log_certainty(&normalized(v), &ctx)
        };
        let fd = (f(eps) - f(-eps)) / (2.0 * eps);
        let an = inner(&g, &dir).re;
        assert!((fd - an).abs() < 1e-6, "{fd} vs {an}");
    }

    #[test]
    fn ms_at_pi_over_4() {
        let (ctx, pair) = setup(6);
        let gen = theta_generator(&ctx, DEFAULT_THETA).unwrap();
        let check = ms_inequality_check(&pair.state(), DEFAULT_THETA, &ctx).unwrap();
        assert!((check.lhs - 2f64.sqrt() * pair.h()).abs() < 1e-12);
        assert!((check.h_theta - gen.h()).abs() < 1e-15);
        assert!((check.lhs - check.h_theta).abs() < 1e-12);
    }

    #[test]
    fn ms_strict_for_random_states() {
        let ctx = build_context(5).unwrap();
        let theta = PI / 3.0;
        let h_theta = theta_generator(&ctx, theta).unwrap().h();
        let mut rng = seeded_rng(1, 0);
        for _ in 0..1000 {
            let s = haar_state(5, &mut rng);
            assert!(ms_lhs(&s, theta, &ctx).unwrap() < h_theta);
        }
    }

    #[test]
    fn ms_equality_at_pi_over_6() {
        let ctx = build_context(5).unwrap();
        let theta = PI / 6.0;
        let gen = theta_generator(&ctx, theta).unwrap();
        let s = theta_min_uncertainty_state(2, 0, &gen, &ctx).unwrap();
        let check = ms_inequality_check(&s, theta, &ctx).unwrap();
        assert!((check.lhs - check.h_theta).abs() < 1e-8);
    }

    #[test]
    fn theta_spectra_agree_under_swap() {
        // H_theta and H_{pi/2 - theta} are Fourier conjugate
        let ctx = build_context(7).unwrap();
        for theta in [0.2, 0.7, 1.3] {
            let a = ground_pair_dense(&harper_theta_matrix(&ctx, theta).unwrap()).unwrap();
            let b = theta_generator(&ctx, theta).unwrap();
            assert!((a.h() - b.h()).abs() < 1e-12);
        }
    }

    #[test]
    fn h_theta_continuous_in_theta() {
        let ctx = build_context(6).unwrap();
        let grid: Vec<f64> = (1..100).map(|k| k as f64 * FRAC_PI_2 / 100.0).collect();
        let hs: Vec<f64> = grid.iter().map(|&t| theta_generator(&ctx, t).unwrap().h()).collect();
        for w in hs.windows(2) {
            assert!((w[0] - w[1]).abs() < 0.05);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let ctx = build_context(3).unwrap();
        let s = StateVector::basis_state(4, 0).unwrap();
        assert!(certainty(&s, &ctx).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bound_and_am_gm_chain(d in 2usize..10, seed in any::<u64>()) {
            let (ctx, pair) = setup(d);
            let mut rng = seeded_rng(seed, 0);
            let s = haar_state(d, &mut rng);
            let (q, p) = expectations(&s, &ctx).unwrap();
            let c = q.norm() * p.norm();
            prop_assert!(c <= pair.h() * pair.h() + 1e-10);
            prop_assert!(c.sqrt() <= (q.norm() + p.norm()) / 2.0 + 1e-15);
            prop_assert!((q.norm() + p.norm()) / 2.0 <= pair.h() + 1e-10);
        }

        #[test]
        fn mixed_bound(d in 2usize..10, seed in any::<u64>()) {
            let (ctx, pair) = setup(d);
            let rho = ginibre_density(d, &mut seeded_rng(seed, 1));
            prop_assert!(certainty_mixed(&rho, &ctx).unwrap() <= pair.h() * pair.h() + 1e-10);
        }

        #[test]
        fn certainty_is_weyl_invariant(d in 2usize..10, seed in any::<u64>(), a in 0i64..20, b in 0i64..20) {
            let ctx = build_context(d).unwrap();
            let s = haar_state(d, &mut seeded_rng(seed, 2));
            let t = StateVector::normalized(ctx.apply_weyl(a, b, s.amplitudes()), Basis::Position).unwrap();
            let diff = certainty(&s, &ctx).unwrap() - certainty(&t, &ctx).unwrap();
            prop_assert!(diff.abs() < 1e-12);
        }

        #[test]
        fn expectation_in_momentum_basis(d in 2usize..10, seed in any::<u64>()) {
            let ctx = build_context(d).unwrap();
            let s = haar_state(d, &mut seeded_rng(seed, 3));
            let (q, _) = expectations(&s, &ctx).unwrap();
            let m = s.momentum_coefficients(&ctx);
            let alt: C64 = (0..d).map(|b| m[(b + 1) % d].conj() * m[b]).sum();
            prop_assert!((q - alt).norm() < 1e-10);
        }

        #[test]
        fn mixed_expectations_match_trace(d in 1usize..8, seed in any::<u64>()) {
            let ctx = build_context(d).unwrap();
            let rho = ginibre_density(d, &mut seeded_rng(seed, 4));
            let (q, p) = expectations_mixed(&rho, &ctx).unwrap();
            let tq = rho.entries().trace_product(ctx.clock());
            let tp = rho.entries().trace_product(ctx.shift());
            prop_assert!((q - tq).norm() < 1e-12 && (p - tp).norm() < 1e-12);
        }
    }
}
