//! Phase point operators and quasi probability distributions on the
//! `d x d` discrete phase space.
//!
//! The Husimi-like family is `Delta(alpha, beta) = |alpha,beta><alpha,beta| / d`
//! and the Wigner family (odd d) is
//! `Delta_W(alpha, beta) = P^alpha Q^beta T Q^-beta P^-alpha / d`.
//! Dense operator grids are available for small d; the distribution
//! functions below work directly from `rho` and scale to large d.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::completeness::coeff_table;
use crate::error::{Error, Result};
use crate::harper::GroundPair;
use crate::linalg::{CMatrix, RMatrix, C64};
use crate::qudit::{periodic_index, DensityMatrix, QuditContext};

pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Largest d for which a dense `d^2` grid of `d x d` operators is built.
pub const PHASE_POINT_DIM_CAP: usize = 32;
/// Row/column spread of the sharpness beyond which a family is rejected.
pub const COVARIANCE_TOL: f64 = 1e-8;
/// Coefficients `|f_mn|` below this make the inversion singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhasePointKind {
    Husimi,
    Wigner,
}

impl std::str::FromStr for PhasePointKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "husimi" => Ok(Self::Husimi),
            "wigner" => Ok(Self::Wigner),
            other => Err(Error::InvalidArgument(format!("unknown kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for PhasePointKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Husimi => "husimi",
            Self::Wigner => "wigner",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Sum over `beta`, indexed by `alpha`.
    Position,
    /// Sum over `alpha`, indexed by `beta`.
    Momentum,
}

fn check_dim(ctx: &QuditContext, actual: usize) -> Result<()> {
    if actual != ctx.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.dim(),
            actual,
        });
    }
    Ok(())
}

fn require_odd(d: usize) -> Result<()> {
    if d % 2 == 0 {
        Err(Error::EvenDimension(d))
    } else {
        Ok(())
    }
}

/// Dense grid of phase point operators, row-major in `(alpha, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePointSet {
    kind: PhasePointKind,
    d: usize,
    operators: Vec<CMatrix>,
}

impl PhasePointSet {
    /// Wraps a user-supplied grid of `d^2` operators of size `d`.
    pub fn from_operators(kind: PhasePointKind, operators: Vec<CMatrix>) -> Result<Self> {
        let n = operators.len();
        let d = (n as f64).sqrt().round() as usize;
        if d == 0 || d * d != n {
            return Err(Error::InvalidArgument(format!("{n} operators do not form a square grid")));
        }
        if let Some(op) = operators.iter().find(|op| op.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: op.dim(),
            });
        }
        Ok(Self { kind, d, operators })
    }

    pub fn kind(&self) -> PhasePointKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, alpha: i64, beta: i64) -> &CMatrix {
        let d = self.d;
        &self.operators[periodic_index(alpha, d) * d + periodic_index(beta, d)]
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// Sum over the full grid.
    pub fn total(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.d);
        for op in &self.operators {
            acc = &acc + op;
        }
        acc
    }

    /// `sum_beta Delta(alpha, beta)` or `sum_alpha Delta(alpha, beta)`.
    pub fn marginal_operator(&self, axis: Axis, index: i64) -> CMatrix {
        let d = self.d as i64;
        let mut acc = CMatrix::zeros(self.d);
        for k in 0..d {
            let op = match axis {
                Axis::Position => self.get(index, k),
                Axis::Momentum => self.get(k, index),
            };
            acc = &acc + op;
        }
        acc
    }
}

fn wigner_operator(alpha: i64, beta: i64, ctx: &QuditContext) -> CMatrix {
    let d = ctx.dim();
    let inv_d = 1.0 / d as f64;
    // P^a Q^b T Q^-b P^-a |y> = omega^{2b(a - y)} |2a - y>
    CMatrix::from_fn(d, |x, y| {
        if periodic_index(2 * alpha - y as i64, d) == x {
            ctx.omega(2 * beta * (alpha - y as i64)) * inv_d
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn phase_points(kind: PhasePointKind, pair: &GroundPair, ctx: &QuditContext) -> Result<PhasePointSet> {
    let d = ctx.dim();
    check_dim(ctx, pair.dim())?;
    if d > PHASE_POINT_DIM_CAP {
        return Err(Error::DimensionCap {
            d,
            cap: PHASE_POINT_DIM_CAP,
        });
    }
    let inv_d = C64::new(1.0 / d as f64, 0.0);
    let gamma = pair.gamma_complex();
    let operators = match kind {
        PhasePointKind::Husimi => (0..d * d)
            .map(|k| {
                let v = ctx.apply_weyl((k / d) as i64, (k % d) as i64, &gamma);
                CMatrix::outer(&v, &v).scale(inv_d)
            })
            .collect(),
        PhasePointKind::Wigner => {
            require_odd(d)?;
            (0..d * d)
                .map(|k| wigner_operator((k / d) as i64, (k % d) as i64, ctx))
                .collect()
        }
    };
    Ok(PhasePointSet { kind, d, operators })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceReport {
    /// Max over the grid of `||W Delta(a,b) W^dagger - Delta(a+m, b+n)||`
    /// for the generators `(m, n) = (1, 0), (0, 1)`.
    pub translation: f64,
    /// Max over the grid of `||F Delta(a,b) F^dagger - Delta(-b, a)||`.
    pub fourier: f64,
}

pub fn covariance_residuals(pps: &PhasePointSet, ctx: &QuditContext) -> Result<CovarianceReport> {
    check_dim(ctx, pps.dim())?;
    let d = pps.dim() as i64;
    let f = ctx.fourier();
    let fd = f.adjoint();
    let mut translation: f64 = 0.0;
    let mut fourier: f64 = 0.0;
    for alpha in 0..d {
        for beta in 0..d {
            let op = pps.get(alpha, beta);
            for (m, n) in [(1, 0), (0, 1)] {
                let moved = ctx.conjugate_weyl(m, n, op);
                translation = translation.max(moved.max_abs_diff(pps.get(alpha + m, beta + n)));
            }
            let rotated = f.matmul(op).matmul(&fd);
            fourier = fourier.max(rotated.max_abs_diff(pps.get(-beta, alpha)));
        }
    }
    Ok(CovarianceReport {
        translation,
        fourier,
    })
}

/// Max deviation of `tr[Delta_W(a,b) Delta_W(a',b')]` from
/// `delta_aa' delta_bb' / d`.
pub fn wigner_orthogonality_residual(pps: &PhasePointSet) -> f64 {
    let n = pps.operators().len();
    let inv_d = 1.0 / pps.dim() as f64;
    (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let t = pps.operators()[i].trace_product(&pps.operators()[j]);
                    let want = if i == j { inv_d } else { 0.0 };
                    (t - want).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// A real distribution on the phase-space grid, row-major in `(alpha, beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution {
    pub d: usize,
    pub kind: PhasePointKind,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub generator_version: String,
}

impl QuasiDistribution {
    pub fn new(d: usize, kind: PhasePointKind, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if values.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("distribution contains non-finite values".into()));
        }
        Ok(Self {
            d,
            kind,
            values,
            seed: None,
            generator_version: GENERATOR_VERSION.to_string(),
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn get(&self, alpha: i64, beta: i64) -> f64 {
        self.values[periodic_index(alpha, self.d) * self.d + periodic_index(beta, self.d)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Grid with `D'(alpha, beta) = D(alpha - a, beta - b)`.
    pub fn shifted(&self, a: i64, b: i64) -> Self {
        let d = self.d;
        let values = (0..d * d)
            .map(|k| self.get((k / d) as i64 - a, (k % d) as i64 - b))
            .collect();
        Self {
            values,
            ..self.clone()
        }
    }

    pub fn marginal(&self, axis: Axis) -> Vec<f64> {
        let d = self.d;
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|k| match axis {
                        Axis::Position => self.values[i * d + k],
                        Axis::Momentum => self.values[k * d + i],
                    })
                    .sum()
            })
            .collect()
    }

    /// Checks the length, normalization (1e-10) and, for the Husimi kind,
    /// non-negativity (-1e-12) of values read from outside.
    pub fn validate(&self) -> Result<()> {
        let again = Self::new(self.d, self.kind, self.values.clone())?;
        let total = again.total();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("distribution sums to {total}")));
        }
        if self.kind == PhasePointKind::Husimi && again.min() < -1e-12 {
            return Err(Error::InvalidArgument(format!(
                "husimi distribution has negative value {:e}",
                again.min()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let dist: Self = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        dist.validate()?;
        Ok(dist)
    }
}

/// `tr[rho Delta(alpha, beta)]` for every operator of a dense grid.
pub fn quasi_distribution(rho: &DensityMatrix, pps: &PhasePointSet) -> Result<QuasiDistribution> {
    if rho.dim() != pps.dim() {
        return Err(Error::DimensionMismatch {
            expected: pps.dim(),
            actual: rho.dim(),
        });
    }
    let values = pps
        .operators()
        .par_iter()
        .map(|op| rho.entries().trace_product(op).re)
        .collect();
    QuasiDistribution::new(pps.dim(), pps.kind(), values)
}

/// `D(alpha, beta) = <alpha,beta|rho|alpha,beta> / d` in O(d^3) without
/// building the operator grid.
pub fn husimi_distribution(rho: &DensityMatrix, pair: &GroundPair, ctx: &QuditContext) -> Result<QuasiDistribution> {
    let d = ctx.dim();
    check_dim(ctx, rho.dim())?;
    check_dim(ctx, pair.dim())?;
    let g = pair.gamma();
    let r = rho.entries();
    let inv_d = 1.0 / d as f64;
    // with v = P^a Q^b Gamma: D = (1/d) sum_k omega^{bk} M_a(k),
    // M_a(k) = sum_x Gamma_{x-a} Gamma_{x+k-a} rho_{x, x+k}
    let rows: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|alpha| {
            let m: Vec<C64> = (0..d)
                .map(|k| {
                    (0..d)
                        .map(|x| {
                            let y = (x + k) % d;
                            let w = g[(x + d - alpha) % d] * g[(y + d - alpha) % d];
                            r[(x, y)] * w
                        })
                        .sum()
                })
                .collect();
            (0..d)
                .map(|beta| {
                    let s: C64 = m
                        .iter()
                        .enumerate()
                        .map(|(k, mk)| ctx.omega((beta * k) as i64) * mk)
                        .sum();
                    s.re * inv_d
                })
                .collect()
        })
        .collect();
    QuasiDistribution::new(d, PhasePointKind::Husimi, rows.into_iter().flatten().collect())
}

/// `D_W(alpha, beta) = (1/d) sum_y omega^{2 beta (alpha - y)} rho_{y, 2 alpha - y}`.
pub fn wigner_distribution(rho: &DensityMatrix, ctx: &QuditContext) -> Result<QuasiDistribution> {
    let d = ctx.dim();
    check_dim(ctx, rho.dim())?;
    require_odd(d)?;
    let r = rho.entries();
    let inv_d = 1.0 / d as f64;
    let values = (0..d * d)
        .into_par_iter()
        .map(|k| {
            let (alpha, beta) = ((k / d) as i64, (k % d) as i64);
            let s: C64 = (0..d as i64)
                .map(|y| ctx.omega(2 * beta * (alpha - y)) * r[(y as usize, periodic_index(2 * alpha - y, d))])
                .sum();
            s.re * inv_d
        })
        .collect();
    QuasiDistribution::new(d, PhasePointKind::Wigner, values)
}

/// Marginal predicted from `rho`: for the Husimi kind the circular
/// convolution of `Gamma^2` with the diagonal of `rho` in the chosen basis,
/// for the Wigner kind the diagonal itself.
pub fn expected_marginal(
    rho: &DensityMatrix,
    axis: Axis,
    kind: PhasePointKind,
    pair: &GroundPair,
    ctx: &QuditContext,
) -> Result<Vec<f64>> {
    let d = ctx.dim();
    check_dim(ctx, rho.dim())?;
    let diag = match axis {
        Axis::Position => rho.position_diagonal(),
        Axis::Momentum => rho.momentum_diagonal(ctx),
    };
    match kind {
        PhasePointKind::Wigner => Ok(diag),
        PhasePointKind::Husimi => {
            check_dim(ctx, pair.dim())?;
            let g = pair.gamma();
            Ok((0..d)
                .map(|i| (0..d).map(|a| g[(a + d - i) % d].powi(2) * diag[a]).sum())
                .collect())
        }
    }
}

/// `w(alpha, beta) = <Gamma|Delta_W(alpha, beta)|Gamma>` as a `d x d` grid,
/// together with the largest imaginary part discarded.
pub fn convolution_weights(pair: &GroundPair, ctx: &QuditContext) -> Result<(RMatrix, f64)> {
    let d = ctx.dim();
    require_odd(d)?;
    check_dim(ctx, pair.dim())?;
    let g = pair.gamma();
    let inv_d = 1.0 / d as f64;
    let mut max_imag: f64 = 0.0;
    let mut w = RMatrix::zeros(d);
    for alpha in 0..d as i64 {
        for beta in 0..d as i64 {
            let s: C64 = (0..d as i64)
                .map(|y| ctx.omega(2 * beta * (alpha - y)) * (g[y as usize] * g[periodic_index(2 * alpha - y, d)]))
                .sum();
            let s = s * inv_d;
            max_imag = max_imag.max(s.im.abs());
            w[(alpha as usize, beta as usize)] = s.re;
        }
    }
    Ok((w, max_imag))
}

/// Max over the grid of `||Delta(a,b) - sum w(a-a', b-b') Delta_W(a',b')||`.
pub fn convolution_residual(husimi: &PhasePointSet, wigner: &PhasePointSet, w: &RMatrix) -> Result<f64> {
    let d = husimi.dim();
    if wigner.dim() != d || w.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: wigner.dim(),
        });
    }
    Ok((0..d * d)
        .into_par_iter()
        .map(|k| {
            let (alpha, beta) = ((k / d) as i64, (k % d) as i64);
            let mut acc = CMatrix::zeros(d);
            for a2 in 0..d as i64 {
                for b2 in 0..d as i64 {
                    let c = w[(periodic_index(alpha - a2, d), periodic_index(beta - b2, d))];
                    acc = &acc + &wigner.get(a2, b2).scale(C64::new(c, 0.0));
                }
            }
            acc.max_abs_diff(husimi.get(alpha, beta))
        })
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sharpness {
    pub sigma: f64,
    pub tau: f64,
}

impl Sharpness {
    pub fn product(&self) -> f64 {
        self.sigma * self.tau
    }
}

/// `(|tr KQ|, |tr KP|)`.
pub fn sharpness_of_kernel(k: &DensityMatrix, ctx: &QuditContext) -> Result<Sharpness> {
    check_dim(ctx, k.dim())?;
    let m = k.entries();
    Ok(Sharpness {
        sigma: m.trace_product(ctx.clock()).norm(),
        tau: m.trace_product(ctx.shift()).norm(),
    })
}

/// `sigma = |tr[sum_beta Lambda(alpha, beta) Q]|` and
/// `tau = |tr[sum_alpha Lambda(alpha, beta) P]|`, which must not depend on
/// the row or column chosen.
pub fn sharpness_of_family(pps: &PhasePointSet, ctx: &QuditContext) -> Result<Sharpness> {
    check_dim(ctx, pps.dim())?;
    let d = pps.dim() as i64;
    let sigmas: Vec<f64> = (0..d)
        .map(|a| pps.marginal_operator(Axis::Position, a).trace_product(ctx.clock()).norm())
        .collect();
    let taus: Vec<f64> = (0..d)
        .map(|b| pps.marginal_operator(Axis::Momentum, b).trace_product(ctx.shift()).norm())
        .collect();
    let spread = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let s = spread(&sigmas).max(spread(&taus));
    if s > COVARIANCE_TOL {
        return Err(Error::NonCovariant(s));
    }
    Ok(Sharpness {
        sigma: sigmas[0],
        tau: taus[0],
    })
}

/// `h^2 - sigma tau` for the covariant family generated by `K`.
pub fn optimality_gap(k: &DensityMatrix, pair: &GroundPair, ctx: &QuditContext) -> Result<f64> {
    let s = sharpness_of_kernel(k, ctx)?;
    Ok(pair.h() * pair.h() - s.product())
}

/// Max-abs difference between
/// `sum omega^{alpha b - beta a} P^alpha Q^beta Omega Q^-beta P^-alpha`
/// and `d tr[Q^-b P^-a Omega] P^a Q^b`.
pub fn verify_weyl_identity(omega: &CMatrix, a: i64, b: i64, ctx: &QuditContext) -> Result<f64> {
    let d = ctx.dim();
    check_dim(ctx, omega.dim())?;
    let mut lhs = CMatrix::zeros(d);
    for alpha in 0..d as i64 {
        for beta in 0..d as i64 {
            let term = ctx.conjugate_weyl(alpha, beta, omega);
            lhs = &lhs + &term.scale(ctx.omega(alpha * b - beta * a));
        }
    }
    let w = ctx.weyl(a, b);
    let coeff = w.adjoint().trace_product(omega) * d as f64;
    Ok(lhs.max_abs_diff(&w.scale(coeff)))
}

/// Linear inversion of a Husimi distribution for odd d: the 2-D discrete
/// Fourier transform of `D` divided by `omega^{mn} f_mn` gives
/// `tr[rho P^m Q^n]`, which is resummed against the Weyl basis. The result
/// is Hermitized and trace-normalized.
pub fn reconstruct_state(dist: &QuasiDistribution, pair: &GroundPair, ctx: &QuditContext) -> Result<DensityMatrix> {
    let d = ctx.dim();
    check_dim(ctx, dist.d)?;
    require_odd(d)?;
    if dist.kind != PhasePointKind::Husimi {
        return Err(Error::InvalidArgument("reconstruction expects a husimi distribution".into()));
    }
    let table = coeff_table(pair, ctx)?;
    for m in 0..d {
        for n in 0..d {
            let modulus = table.f(m as i64, n as i64).norm();
            if modulus < SINGULAR_TOL {
                return Err(Error::SingularCoefficient { m, n, modulus });
            }
        }
    }
    let inv_d = 1.0 / d as f64;
    // D~(m, n) = (1/d) sum_{alpha,beta} omega^{alpha n - beta m} D(alpha, beta)
    // first over beta: E(alpha, m) = sum_beta omega^{-beta m} D(alpha, beta)
    let e: Vec<C64> = (0..d * d)
        .map(|k| {
            let (alpha, m) = (k / d, k % d);
            (0..d)
                .map(|beta| ctx.omega(-((beta * m) as i64)) * dist.values[alpha * d + beta])
                .sum()
        })
        .collect();
    // t(m, n) = tr[rho P^m Q^n] = d D~(m, n) / (omega^{mn} f_mn)
    let t: Vec<C64> = (0..d * d)
        .map(|k| {
            let (m, n) = (k / d, k % d);
            let dt: C64 = (0..d)
                .map(|alpha| ctx.omega((alpha * n) as i64) * e[alpha * d + m])
                .sum();
            let denom = ctx.omega((m * n) as i64) * table.f(m as i64, n as i64);
            dt / denom
        })
        .collect();
    // rho = (1/d) sum t_mn (P^m Q^n)^dagger, whose (x, x+m) entry is
    // (1/d) sum_n t_mn omega^{-nx}
    let mut rho = CMatrix::zeros(d);
    for m in 0..d {
        for x in 0..d {
            let s: C64 = (0..d)
                .map(|n| t[m * d + n] * ctx.omega(-((n * x) as i64)))
                .sum();
            rho[(x, (x + m) % d)] = s * inv_d;
        }
    }
    let herm = (&rho + &rho.adjoint()).scale(C64::new(0.5, 0.0));
    let tr = herm.trace().re;
    let normalized = herm.scale(C64::new(1.0 / tr, 0.0));
    DensityMatrix::new(normalized)
}
