//! Fourier coefficients `f_mn = <Gamma|P^m Q^n|Gamma>` of the Harper
//! ground state, the real table `g_mn = e^{i pi mn/d} f_mn`, the zero set
//! for even d, and the block operators whose Perron structure forces
//! `g_mn > 0` for odd d.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harper::{harper_matrix, GroundPair};
use crate::linalg::{symmetric_eigen, CMatrix, RMatrix, C64};
use crate::qudit::{centered_index, centered_start, periodic_index, QuditContext};

pub const ZERO_TOL: f64 = 1e-10;
/// Largest d for which the `d^2 x d^2` block operators are built.
pub const BLOCK_DIM_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierCoeffTable {
    d: usize,
    f: Vec<C64>,
    g: Vec<f64>,
    max_g_imag: f64,
}

impl FourierCoeffTable {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// `f_mn` for any integers, reduced mod d.
    pub fn f(&self, m: i64, n: i64) -> C64 {
        let d = self.d;
        self.f[periodic_index(m, d) * d + periodic_index(n, d)]
    }

    /// Row-major `f` on `[0, d)^2`.
    pub fn f_values(&self) -> &[C64] {
        &self.f
    }

    /// `e^{i pi mn/d} f_mn` for any integer representatives `(m, n)`.
    pub fn g_complex(&self, m: i64, n: i64) -> C64 {
        let phase = PI * (m * n) as f64 / self.d as f64;
        C64::from_polar(1.0, phase) * self.f(m, n)
    }

    /// Real part of [`g_complex`](Self::g_complex) at centered
    /// representatives of `(m, n)`.
    pub fn g(&self, m: i64, n: i64) -> f64 {
        let d = self.d;
        self.g[periodic_index(m, d) * d + periodic_index(n, d)]
    }

    /// Largest `|Im g|` seen while building the table.
    pub fn max_g_imag(&self) -> f64 {
        self.max_g_imag
    }

    pub fn min_abs_f(&self) -> f64 {
        self.f.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn min_g(&self) -> f64 {
        self.g.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Inclusive centered index range.
    pub fn centered_range(&self) -> std::ops::RangeInclusive<i64> {
        let s = centered_start(self.d);
        s..=s + self.d as i64 - 1
    }
}

/// Direct summation `f_mn = sum_a Gamma_{a+m} Gamma_a omega^{na}`.
pub fn coeff_table(pair: &GroundPair, ctx: &QuditContext) -> Result<FourierCoeffTable> {
    let d = ctx.dim();
    if pair.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: pair.dim(),
        });
    }
    let gamma = pair.gamma();
    let rows: Vec<Vec<C64>> = (0..d)
        .into_par_iter()
        .map(|m| {
            let prod: Vec<f64> = (0..d).map(|a| gamma[(a + m) % d] * gamma[a]).collect();
            (0..d)
                .map(|n| {
                    prod.iter()
                        .enumerate()
                        .map(|(a, &x)| ctx.omega((n * a) as i64) * x)
                        .sum()
                })
                .collect()
        })
        .collect();
    let f: Vec<C64> = rows.into_iter().flatten().collect();
    let mut g = vec![0.0; d * d];
    let mut max_g_imag: f64 = 0.0;
    for m in 0..d {
        let mc = centered_index(m as i64, d);
        for n in 0..d {
            let nc = centered_index(n as i64, d);
            let z = C64::from_polar(1.0, PI * (mc * nc) as f64 / d as f64) * f[m * d + n];
            max_g_imag = max_g_imag.max(z.im.abs());
            g[m * d + n] = z.re;
        }
    }
    Ok(FourierCoeffTable {
        d,
        f,
        g,
        max_g_imag,
    })
}

/// Largest violation among the table identities: `f_00 = 1`,
/// `f_mn = f_{-m,-n} = f_nm`, `f_mn = omega^{-mn} f_{m,-n}`,
/// `f_mn = omega^{-mn} conj(f_mn)`, reality and reflection symmetry of
/// `g`, and `g_{m+d,n} = (-1)^n g_mn`.
pub fn symmetry_residual(table: &FourierCoeffTable, ctx: &QuditContext) -> f64 {
    let d = table.dim() as i64;
    let mut worst = (table.f(0, 0) - C64::new(1.0, 0.0)).norm();
    let mut bump = |x: f64| worst = worst.max(x);
    for m in 0..d {
        for n in 0..d {
            let f = table.f(m, n);
            let w = ctx.omega(-m * n);
            bump((f - table.f(-m, -n)).norm());
            bump((f - table.f(n, m)).norm());
            bump((f - w * table.f(m, -n)).norm());
            bump((f - w * f.conj()).norm());
        }
    }
    for m in table.centered_range() {
        for n in table.centered_range() {
            let g = table.g_complex(m, n);
            bump(g.im.abs());
            bump((g - table.g_complex(n, m)).norm());
            bump((g - table.g_complex(-m, n)).norm());
            let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            bump((table.g_complex(m + d, n) - g * sign).norm());
            bump((table.g_complex(m - d, n) - g * sign).norm());
        }
    }
    worst
}

/// Indices `(m, n)` in `[0, d)^2` with `|f_mn| < tol`, row-major order.
pub fn zero_set(table: &FourierCoeffTable, tol: f64) -> Vec<(usize, usize)> {
    let d = table.dim();
    (0..d * d)
        .filter(|&k| table.f_values()[k].norm() < tol)
        .map(|k| (k / d, k % d))
        .collect()
}

/// `{(d/2, d/2)} + {(m, d/2): m odd} + {(d/2, n): n odd}` for even d,
/// empty for odd d; row-major order.
pub fn analytic_zero_pattern(d: usize) -> Vec<(usize, usize)> {
    if d % 2 == 1 {
        return Vec::new();
    }
    let half = d / 2;
    (0..d * d)
        .map(|k| (k / d, k % d))
        .filter(|&(m, n)| (m == half && n == half) || (n == half && m % 2 == 1) || (m == half && n % 2 == 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport {
    pub d: usize,
    pub parity: &'static str,
    pub zero_set: Vec<(usize, usize)>,
    pub analytic_zero_set: Vec<(usize, usize)>,
    pub min_abs_f: f64,
    pub min_g: f64,
    pub symmetry_residual: f64,
}

impl CompletenessReport {
    pub fn zero_set_matches(&self) -> bool {
        self.zero_set == self.analytic_zero_set
    }

    pub fn complete(&self) -> bool {
        self.zero_set.is_empty() && self.min_abs_f > 0.0
    }
}

pub fn completeness_report(pair: &GroundPair, ctx: &QuditContext) -> Result<CompletenessReport> {
    let table = coeff_table(pair, ctx)?;
    let d = ctx.dim();
    Ok(CompletenessReport {
        d,
        parity: if d % 2 == 0 { "even" } else { "odd" },
        zero_set: zero_set(&table, ZERO_TOL),
        analytic_zero_set: analytic_zero_pattern(d),
        min_abs_f: table.min_abs_f(),
        min_g: table.min_g(),
        symmetry_residual: symmetry_residual(&table, ctx),
    })
}

/// `(H_L, H_R)` on `C^d (x) C^d`, basis index `m d + n`.
pub fn block_operators(ctx: &QuditContext) -> Result<(CMatrix, CMatrix)> {
    let d = ctx.dim();
    if d > BLOCK_DIM_CAP {
        return Err(Error::DimensionCap { d, cap: BLOCK_DIM_CAP });
    }
    let p = ctx.shift();
    let pd = p.adjoint();
    let q = ctx.clock();
    let qd = q.adjoint();
    let one = CMatrix::identity(d);
    let quarter = C64::new(0.25, 0.0);
    let left = &(&pd.kron(&one) + &p.kron(&one)) + &(&q.kron(&pd) + &qd.kron(p));
    let right = &(&pd.kron(q) + &p.kron(&qd)) + &(&one.kron(&pd) + &one.kron(p));
    Ok((left.scale(quarter), right.scale(quarter)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSpectrumReport {
    pub d: usize,
    /// Max deviation of the sorted spectrum of H_L from that of H repeated d times.
    pub left_spectrum_residual: f64,
    /// Same comparison for H_R.
    pub right_spectrum_residual: f64,
    /// `||(H_L + H_R) f - 2h f||_inf`.
    pub eigen_residual: f64,
    /// Largest eigenvalue of `H_L + H_R` minus `2h`.
    pub top_eigenvalue_offset: f64,
}

fn replicated_spectrum_residual(op: &CMatrix, h_spectrum: &[f64], d: usize) -> Result<f64> {
    let mut got = op.hermitian_eigenvalues()?;
    got.sort_by(|a, b| b.total_cmp(a));
    let want: Vec<f64> = h_spectrum
        .iter()
        .flat_map(|&x| std::iter::repeat_n(x, d))
        .collect();
    Ok(got
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

pub fn block_spectrum_check(ctx: &QuditContext, pair: &GroundPair) -> Result<BlockSpectrumReport> {
    let d = ctx.dim();
    let (left, right) = block_operators(ctx)?;
    let table = coeff_table(pair, ctx)?;
    let h_spectrum = symmetric_eigen(&harper_matrix(ctx))?.values;

    let sum = &left + &right;
    let f = table.f_values();
    let sf = sum.matvec(f);
    let two_h = 2.0 * pair.h();
    let eigen_residual = sf
        .iter()
        .zip(f)
        .map(|(a, b)| (a - b * two_h).norm())
        .fold(0.0, f64::max);
    let top = sum
        .hermitian_eigenvalues()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(BlockSpectrumReport {
        d,
        left_spectrum_residual: replicated_spectrum_residual(&left, &h_spectrum, d)?,
        right_spectrum_residual: replicated_spectrum_residual(&right, &h_spectrum, d)?,
        eigen_residual,
        top_eigenvalue_offset: top - two_h,
    })
}

/// The `(M+1) x (M+1)` matrix `D^(S)(sigma)` with `M = (d-1)/2`.
pub fn reduced_hopping(d: usize, sigma: f64) -> Result<RMatrix> {
    if d % 2 == 0 {
        return Err(Error::EvenDimension(d));
    }
    let m = (d - 1) / 2;
    if m == 0 {
        return RMatrix::from_row_major(vec![2.0 * sigma]);
    }
    let mut out = RMatrix::zeros(m + 1);
    for a in 0..m {
        let w = if a == 0 { 2f64.sqrt() } else { 1.0 };
        out[(a, a + 1)] = w;
        out[(a + 1, a)] = w;
    }
    out[(m, m)] += sigma;
    Ok(out)
}

/// `K^(S)` on the reflection-symmetric basis `|e_ab>`, `a, b in [0, M]`,
/// flattened as `a (M+1) + b`.
pub fn reduced_operator(d: usize) -> Result<RMatrix> {
    let m = (d.checked_sub(1).ok_or(Error::ZeroDimension)?) / 2;
    let plus = reduced_hopping(d, 1.0)?;
    let minus = reduced_hopping(d, -1.0)?;
    let parity = |k: usize| if k % 2 == 0 { &plus } else { &minus };
    let c = |k: usize| (PI * k as f64 / d as f64).cos();
    let s = m + 1;
    Ok(RMatrix::from_fn(s * s, |r, col| {
        let (a, b) = (r / s, r % s);
        let (a2, b2) = (col / s, col % s);
        let mut x = 0.0;
        if b == b2 {
            x += 0.5 * parity(b)[(a, a2)] * c(b);
        }
        if a == a2 {
            x += 0.5 * c(a) * parity(a)[(b, b2)];
        }
        x
    }))
}

/// `g^(S)_ab = <e_ab|g>` for `a, b in [0, M]`.
pub fn reduced_g(table: &FourierCoeffTable) -> Vec<f64> {
    let s = (table.dim() - 1) / 2 + 1;
    let w = |k: usize| if k == 0 { 1.0 } else { 2f64.sqrt() };
    (0..s * s)
        .map(|k| {
            let (a, b) = (k / s, k % s);
            table.g(a as i64, b as i64) * w(a) * w(b)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub d: usize,
    /// `||K^(S) g^(S) - 2h g^(S)||_inf`.
    pub eigen_residual: f64,
    /// Smallest entry of `(K^(S) + 1)^(d-1)`.
    pub min_power_entry: f64,
    /// Smallest component of the normalized Perron vector of `K^(S) + 1`.
    pub min_perron_component: f64,
    pub min_g: f64,
    /// Smallest `cos(pi n/d)` over the centered range.
    pub min_cos: f64,
}

impl ReductionReport {
    pub fn positive(&self) -> bool {
        self.min_power_entry > 0.0 && self.min_perron_component > 0.0 && self.min_g > 0.0
    }
}

fn matrix_power(a: &RMatrix, mut e: usize) -> RMatrix {
    let mut result = RMatrix::identity(a.dim());
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = result.matmul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.matmul(&base);
        }
    }
    result
}

/// Perron vector of a non-negative matrix with positive diagonal by
/// power iteration, normalized to unit length.
fn perron_vector(a: &RMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..1_000_000 {
        let mut y = a.matvec(&x);
        let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= nrm);
        let change = y
            .iter()
            .zip(&x)
            .map(|(u, v)| ((u - v) / u).abs())
            .fold(0.0, f64::max);
        x = y;
        if change < 1e-14 {
            return Ok(x);
        }
    }
    Err(Error::PowerNoConvergence(1_000_000))
}

pub fn symmetric_reduction_check(pair: &GroundPair, ctx: &QuditContext) -> Result<ReductionReport> {
    let d = ctx.dim();
    if d % 2 == 0 {
        return Err(Error::EvenDimension(d));
    }
    let table = coeff_table(pair, ctx)?;
    let k = reduced_operator(d)?;
    let gs = reduced_g(&table);
    let kg = k.matvec(&gs);
    let two_h = 2.0 * pair.h();
    let eigen_residual = kg
        .iter()
        .zip(&gs)
        .map(|(a, b)| (a - two_h * b).abs())
        .fold(0.0, f64::max);

    let shifted = &k + &RMatrix::identity(k.dim());
    let power = matrix_power(&shifted, d - 1);
    let min_power_entry = power.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
    let perron = perron_vector(&shifted)?;
    let min_perron_component = perron.iter().copied().fold(f64::INFINITY, f64::min);
    let m = (d as i64 - 1) / 2;
    let min_cos = (-m..=m)
        .map(|n| (PI * n as f64 / d as f64).cos())
        .fold(f64::INFINITY, f64::min);

    Ok(ReductionReport {
        d,
        eigen_residual,
        min_power_entry,
        min_perron_component,
        min_g: table.min_g(),
        min_cos,
    })
}

/// `g_mn` on `[0, d)^2` (odd d) reconstructed from the Perron vector of
/// `K^(S) + 1`, scaled so `g_00 = 1`. Every entry is a product of
/// non-negative numbers, so each is accurate to a few ulps relative.
pub fn perron_g_table(d: usize) -> Result<Vec<f64>> {
    if d % 2 == 0 {
        return Err(Error::EvenDimension(d));
    }
    let k = reduced_operator(d)?;
    let shifted = &k + &RMatrix::identity(k.dim());
    let v = perron_vector(&shifted)?;
    let s = (d - 1) / 2 + 1;
    let w = |k: usize| if k == 0 { 1.0 } else { 2f64.sqrt() };
    let scale = v[0];
    Ok((0..d * d)
        .map(|idx| {
            let a = centered_index((idx / d) as i64, d).unsigned_abs() as usize;
            let b = centered_index((idx % d) as i64, d).unsigned_abs() as usize;
            v[a * s + b] / (w(a) * w(b) * scale)
        })
        .collect())
}

/// `(1/d) sum_{alpha,beta} omega^{alpha n - beta m} Delta(alpha, beta)`
/// evaluated directly, against `(1/d) omega^{mn} f_mn P^m Q^n`.
pub fn fourier_phase_point_residual(
    m: i64,
    n: i64,
    pair: &GroundPair,
    ctx: &QuditContext,
) -> Result<f64> {
    let d = ctx.dim();
    let table = coeff_table(pair, ctx)?;
    let gamma = pair.gamma_complex();
    let mut lhs = CMatrix::zeros(d);
    let inv_d = 1.0 / d as f64;
    for alpha in 0..d as i64 {
        for beta in 0..d as i64 {
            let v = ctx.apply_weyl(alpha, beta, &gamma);
            let w = ctx.omega(alpha * n - beta * m) * (inv_d * inv_d);
            for i in 0..d {
                for j in 0..d {
                    lhs[(i, j)] += w * v[i] * v[j].conj();
                }
            }
        }
    }
    let coeff = ctx.omega(m * n) * table.f(m, n) * inv_d;
    let rhs = ctx.weyl(m, n).scale(coeff);
    Ok(lhs.max_abs_diff(&rhs))
}
