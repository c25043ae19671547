//! Large-d behaviour of the Harper ground state: `h ~ 1 - pi/(2d)`,
//! `Gamma_a ~ N exp(-pi a^2/d)`, the discrete Mathieu recurrence, and the
//! reduction of the certainty bound to `Delta x Delta p >= 1/2` on a lattice
//! of spacing `epsilon = sigma sqrt(2 pi / d)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harper::{harper_ground_pair, GroundPair, DEFAULT_THETA};
use crate::linalg::C64;
use crate::qudit::{build_context, centered_start, periodic_index, Basis, QuditContext, StateVector};
use crate::uncertainty::expectations;

/// Tail mass outside `|a| <= d/4` above which the variance formulas are
/// not trusted.
pub const BOUNDARY_TAIL_TOL: f64 = 1e-6;
pub const EXPANSION_ENVELOPE: f64 = 5.0;
pub const SUM_RULE_ENVELOPE: f64 = 10.0;

/// `1 - pi/(2d)`.
pub fn asymptotic_h(d: usize) -> f64 {
    1.0 - PI / (2.0 * d as f64)
}

/// `1 - (n + 1/2) pi / d`, the harmonic-oscillator estimate of the
/// `n`-th largest eigenvalue of H.
pub fn asymptotic_level(d: usize, n: usize) -> f64 {
    1.0 - (n as f64 + 0.5) * PI / d as f64
}

/// Values on the centered range `start..start + d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenteredProfile {
    pub start: i64,
    pub values: Vec<f64>,
}

impl CenteredProfile {
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.values.len()).map(move |i| self.start + i as i64)
    }

    pub fn at(&self, a: i64) -> Option<f64> {
        let i = a - self.start;
        (i >= 0).then(|| self.values.get(i as usize).copied()).flatten()
    }

    /// Periodic view on `[0, d)`.
    pub fn to_periodic(&self) -> Vec<f64> {
        let d = self.values.len();
        let mut out = vec![0.0; d];
        for (a, v) in self.indices().zip(&self.values) {
            out[periodic_index(a, d)] = *v;
        }
        out
    }
}

/// Periodic vector viewed on the centered range.
pub fn centered_view(v: &[f64]) -> CenteredProfile {
    let d = v.len();
    let start = centered_start(d);
    CenteredProfile {
        start,
        values: (0..d).map(|i| v[periodic_index(start + i as i64, d)]).collect(),
    }
}

/// `N exp(-pi a^2/d)` on the centered range, unit 2-norm.
pub fn asymptotic_gamma(d: usize) -> Result<CenteredProfile> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let start = centered_start(d);
    let mut values: Vec<f64> = (0..d)
        .map(|i| {
            let a = (start + i as i64) as f64;
            (-PI * a * a / d as f64).exp()
        })
        .collect();
    let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
    values.iter_mut().for_each(|x| *x /= norm);
    Ok(CenteredProfile { start, values })
}

/// Max-abs difference between the exact `Gamma` and the Gaussian.
pub fn gamma_deviation(pair: &GroundPair) -> Result<f64> {
    let exact = centered_view(pair.gamma());
    let asym = asymptotic_gamma(pair.dim())?;
    Ok(exact
        .values
        .iter()
        .zip(&asym.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Max-abs residual of
/// `(c_{a+1} + c_{a-1} + 2 cos(2 pi a/d) c_a)/4 = lambda c_a`.
pub fn mathieu_residual_of(c: &[f64], lambda: f64) -> f64 {
    let d = c.len();
    (0..d)
        .map(|a| {
            let lhs = 0.25
                * (c[(a + 1) % d] + c[(a + d - 1) % d] + 2.0 * (2.0 * PI * a as f64 / d as f64).cos() * c[a]);
            (lhs - lambda * c[a]).abs()
        })
        .fold(0.0, f64::max)
}

pub fn mathieu_residual(pair: &GroundPair, ctx: &QuditContext) -> Result<f64> {
    if pair.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.dim(),
            actual: pair.dim(),
        });
    }
    Ok(mathieu_residual_of(pair.gamma(), pair.h()))
}

/// Lattice `x = a epsilon`, `p = 2 pi b / (d epsilon)` with
/// `epsilon = sigma sqrt(2 pi / d)` and period `L = epsilon d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuumScheme {
    pub d: usize,
    pub sigma: f64,
    pub epsilon: f64,
    pub length: f64,
}

impl ContinuumScheme {
    pub fn new(d: usize, sigma: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor {sigma} must be positive")));
        }
        let epsilon = sigma * (2.0 * PI / d as f64).sqrt();
        Ok(Self {
            d,
            sigma,
            epsilon,
            length: epsilon * d as f64,
        })
    }

    pub fn x(&self, a: i64) -> f64 {
        a as f64 * self.epsilon
    }

    pub fn p(&self, b: i64) -> f64 {
        2.0 * PI * b as f64 / self.length
    }
}

/// `exp(-(x - x0)^2 / (2 w^2))` on the lattice, normalized.
pub fn gaussian_state(scheme: &ContinuumScheme, center: f64, width: f64) -> Result<StateVector> {
    if !(width > 0.0) {
        return Err(Error::InvalidArgument(format!("width {width} must be positive")));
    }
    let d = scheme.d;
    let start = centered_start(d);
    let mut amps = vec![C64::new(0.0, 0.0); d];
    for i in 0..d {
        let a = start + i as i64;
        let x = scheme.x(a) - center;
        amps[periodic_index(a, d)] = C64::new((-x * x / (2.0 * width * width)).exp(), 0.0);
    }
    StateVector::normalized(amps, Basis::Position)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuumReport {
    pub d: usize,
    pub sigma: f64,
    pub tail_position: f64,
    pub tail_momentum: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    /// `1 - |<Q>|` against `pi (Delta x)^2 / (sigma^2 d)`.
    pub q_defect: f64,
    pub q_prediction: f64,
    /// `1 - |<P>|` against `pi sigma^2 (Delta p)^2 / d`.
    pub p_defect: f64,
    pub p_prediction: f64,
    /// `5 d^{-3/2}`.
    pub expansion_envelope: f64,
    /// `(Delta x)^2 / sigma^2 + sigma^2 (Delta p)^2`.
    pub sum_rule: f64,
    /// `Delta x Delta p`.
    pub product: f64,
    /// `10 d^{-1/2}`.
    pub sum_rule_envelope: f64,
}

impl ContinuumReport {
    pub fn q_residual(&self) -> f64 {
        (self.q_defect - self.q_prediction).abs()
    }

    pub fn p_residual(&self) -> f64 {
        (self.p_defect - self.p_prediction).abs()
    }

    pub fn expansions_hold(&self) -> bool {
        self.q_residual() <= self.expansion_envelope && self.p_residual() <= self.expansion_envelope
    }

    pub fn sum_rule_holds(&self) -> bool {
        self.sum_rule >= 1.0 - self.sum_rule_envelope
    }

    pub fn uncertainty_holds(&self) -> bool {
        self.product >= 0.5 - self.sum_rule_envelope
    }

    pub fn all_hold(&self) -> bool {
        self.expansions_hold() && self.sum_rule_holds() && self.uncertainty_holds()
    }
}

struct Moments {
    tail: f64,
    std: f64,
}

/// Tail mass outside `|a| <= d/4` and the standard deviation of
/// `scale * a` for a distribution on `[0, d)` read on the centered range.
fn moments(prob: &[f64], scale: f64) -> Moments {
    let d = prob.len();
    let start = centered_start(d);
    let quarter = d as f64 / 4.0;
    let mut tail = 0.0;
    let mut mean = 0.0;
    for i in 0..d {
        let a = start + i as i64;
        let w = prob[periodic_index(a, d)];
        if (a as f64).abs() > quarter {
            tail += w;
        }
        mean += w * a as f64 * scale;
    }
    let var: f64 = (0..d)
        .map(|i| {
            let a = start + i as i64;
            let dx = a as f64 * scale - mean;
            prob[periodic_index(a, d)] * dx * dx
        })
        .sum();
    Moments { tail, std: var.sqrt() }
}

pub fn continuum_expansion_check(
    state: &StateVector,
    scheme: &ContinuumScheme,
    ctx: &QuditContext,
) -> Result<ContinuumReport> {
    let d = ctx.dim();
    if state.dim() != d || scheme.d != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: state.dim(),
        });
    }
    let pos: Vec<f64> = state.position_coefficients(ctx).iter().map(|c| c.norm_sqr()).collect();
    let mom: Vec<f64> = state.momentum_coefficients(ctx).iter().map(|c| c.norm_sqr()).collect();
    let mx = moments(&pos, scheme.epsilon);
    let mp = moments(&mom, 2.0 * PI / scheme.length);
    let tail = mx.tail.max(mp.tail);
    if tail > BOUNDARY_TAIL_TOL {
        return Err(Error::BoundaryTail(tail));
    }
    let (q, p) = expectations(state, ctx)?;
    let s2 = scheme.sigma * scheme.sigma;
    let df = d as f64;
    Ok(ContinuumReport {
        d,
        sigma: scheme.sigma,
        tail_position: mx.tail,
        tail_momentum: mp.tail,
        delta_x: mx.std,
        delta_p: mp.std,
        q_defect: 1.0 - q.norm(),
        q_prediction: PI * mx.std * mx.std / (s2 * df),
        p_defect: 1.0 - p.norm(),
        p_prediction: PI * s2 * mp.std * mp.std / df,
        expansion_envelope: EXPANSION_ENVELOPE * df.powf(-1.5),
        sum_rule: mx.std * mx.std / s2 + s2 * mp.std * mp.std,
        product: mx.std * mp.std,
        sum_rule_envelope: SUM_RULE_ENVELOPE / df.sqrt(),
    })
}

/// The scale `sqrt(Delta x / Delta p)` that balances the two terms of the
/// sum rule for `state`.
pub fn balanced_sigma(state: &StateVector, ctx: &QuditContext) -> Result<f64> {
    let unit = ContinuumScheme::new(ctx.dim(), 1.0)?;
    let r = continuum_expansion_check(state, &unit, ctx)?;
    // Delta x scales like sigma and Delta p like 1/sigma
    Ok((r.delta_x / r.delta_p).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HRow {
    pub d: usize,
    pub h_exact: f64,
    pub h_asym: f64,
}

pub fn h_table(dims: &[usize]) -> Result<Vec<HRow>> {
    dims.iter()
        .map(|&d| {
            let ctx = build_context(d)?;
            let pair = harper_ground_pair(&ctx, DEFAULT_THETA)?;
            Ok(HRow {
                d,
                h_exact: pair.h(),
                h_asym: asymptotic_h(d),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaRow {
    pub a: i64,
    pub gamma_exact: f64,
    pub gamma_asym: f64,
}

pub fn gamma_table(pair: &GroundPair) -> Result<Vec<GammaRow>> {
    let exact = centered_view(pair.gamma());
    let asym = asymptotic_gamma(pair.dim())?;
    Ok(exact
        .indices()
        .zip(exact.values.iter().zip(&asym.values))
        .map(|(a, (e, s))| GammaRow {
            a,
            gamma_exact: *e,
            gamma_asym: *s,
        })
        .collect())
}
