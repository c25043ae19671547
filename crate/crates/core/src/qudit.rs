//! Clock and shift operators of a d-level system and the index conventions
//! shared by every other module.
//!
//! Position basis `|a>`, momentum basis `|b~> = d^{-1/2} sum_a w^{ba} |a>`
//! with `w = exp(2 pi i / d)`. `Q` is diagonal in position, `P` shifts
//! position by one, `F = sum_a |a~><a|` and `T|a> = |-a>`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, CMatrix, C64};

/// Tolerance on the squared norm of a state vector.
pub const NORM_TOL: f64 = 1e-12;

/// Reduces `i` into `[0, d)`.
pub fn periodic_index(i: i64, d: usize) -> usize {
    assert!(d > 0, "periodic_index with d = 0");
    i.rem_euclid(d as i64) as usize
}

/// Representative of `a` in the centered range
/// `floor(-(d-1)/2) ..= floor((d-1)/2)`.
pub fn centered_index(a: i64, d: usize) -> i64 {
    let a = periodic_index(a, d) as i64;
    let upper = (d as i64 - 1).div_euclid(2);
    if a <= upper {
        a
    } else {
        a - d as i64
    }
}

/// Lowest index of the centered range, `floor(-(d-1)/2)`.
pub fn centered_start(d: usize) -> i64 {
    (-(d as i64 - 1)).div_euclid(2)
}

#[derive(Debug, Clone)]
pub struct QuditContext {
    d: usize,
    omega_powers: Vec<C64>,
    q: CMatrix,
    p: CMatrix,
    f: CMatrix,
    t: CMatrix,
}

/// Builds the operator set for dimension `d`.
pub fn build_context(d: usize) -> Result<QuditContext> {
    QuditContext::new(d)
}

impl QuditContext {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        let omega_powers: Vec<C64> = (0..d)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / d as f64))
            .collect();
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let q = CMatrix::from_fn(d, |i, j| if i == j { omega_powers[i] } else { zero });
        let p = CMatrix::from_fn(d, |i, j| if i == (j + 1) % d { one } else { zero });
        let scale = 1.0 / (d as f64).sqrt();
        let f = CMatrix::from_fn(d, |i, j| omega_powers[(i * j) % d] * scale);
        let t = CMatrix::from_fn(d, |i, j| if i == (d - j) % d { one } else { zero });
        Ok(Self {
            d,
            omega_powers,
            q,
            p,
            f,
            t,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `w^k`, with `k` reduced mod d before any trigonometry.
    pub fn omega(&self, k: i64) -> C64 {
        self.omega_powers[periodic_index(k, self.d)]
    }

    pub fn omega_powers(&self) -> &[C64] {
        &self.omega_powers
    }

    pub fn clock(&self) -> &CMatrix {
        &self.q
    }

    pub fn shift(&self) -> &CMatrix {
        &self.p
    }

    pub fn fourier(&self) -> &CMatrix {
        &self.f
    }

    pub fn reflection(&self) -> &CMatrix {
        &self.t
    }

    /// Dense `P^m Q^n`.
    pub fn weyl(&self, m: i64, n: i64) -> CMatrix {
        let d = self.d;
        CMatrix::from_fn(d, |i, j| {
            if periodic_index(j as i64 + m, d) == i {
                self.omega(n * j as i64)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `P^m Q^n v` in O(d).
    pub fn apply_weyl(&self, m: i64, n: i64, v: &[C64]) -> Vec<C64> {
        let d = self.d;
        (0..d)
            .map(|y| {
                let src = periodic_index(y as i64 - m, d);
                self.omega(n * src as i64) * v[src]
            })
            .collect()
    }

    /// `W X W^dagger` with `W = P^m Q^n`, in O(d^2).
    pub fn conjugate_weyl(&self, m: i64, n: i64, x: &CMatrix) -> CMatrix {
        let d = self.d;
        CMatrix::from_fn(d, |i, j| {
            let si = periodic_index(i as i64 - m, d);
            let sj = periodic_index(j as i64 - m, d);
            self.omega(n * (si as i64 - sj as i64)) * x[(si, sj)]
        })
    }

    /// `F^dagger v`: position coefficients to momentum coefficients.
    pub fn to_momentum(&self, v: &[C64]) -> Vec<C64> {
        self.fourier_sum(v, -1)
    }

    /// `F v`: momentum coefficients to position coefficients.
    pub fn to_position(&self, v: &[C64]) -> Vec<C64> {
        self.fourier_sum(v, 1)
    }

    fn fourier_sum(&self, v: &[C64], sign: i64) -> Vec<C64> {
        let d = self.d;
        let scale = 1.0 / (d as f64).sqrt();
        (0..d)
            .map(|x| {
                let mut acc = C64::new(0.0, 0.0);
                for (a, &va) in v.iter().enumerate() {
                    let k = (x * a) % d;
                    let k = if sign > 0 { k } else { (d - k) % d };
                    acc += self.omega_powers[k] * va;
                }
                acc * scale
            })
            .collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: len,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Position,
    Momentum,
}

impl Basis {
    pub fn other(self) -> Self {
        match self {
            Basis::Position => Basis::Momentum,
            Basis::Momentum => Basis::Position,
        }
    }
}

/// Normalized pure state, stored as coefficients in `basis`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    basis: Basis,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>, basis: Basis) -> Result<Self> {
        let n2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if amplitudes.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amplitudes, basis })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<C64>, basis: Basis) -> Result<Self> {
        let nrm = norm(&amplitudes);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::NotNormalized(nrm * nrm));
        }
        let amplitudes = amplitudes.into_iter().map(|z| z / nrm).collect();
        Ok(Self { amplitudes, basis })
    }

    pub fn from_real(values: &[f64], basis: Basis) -> Result<Self> {
        Self::normalized(values.iter().map(|&x| C64::new(x, 0.0)).collect(), basis)
    }

    /// `|a>` in the position basis.
    pub fn basis_state(d: usize, a: usize) -> Result<Self> {
        if a >= d {
            return Err(Error::IndexOutOfRange { alpha: a, beta: 0, d });
        }
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[a] = C64::new(1.0, 0.0);
        Self::new(v, Basis::Position)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Coefficients `c_a = <a|phi>`.
    pub fn position_coefficients(&self, ctx: &QuditContext) -> Vec<C64> {
        match self.basis {
            Basis::Position => self.amplitudes.clone(),
            Basis::Momentum => ctx.to_position(&self.amplitudes),
        }
    }

    /// Coefficients `c~_b = <b~|phi>`.
    pub fn momentum_coefficients(&self, ctx: &QuditContext) -> Vec<C64> {
        match self.basis {
            Basis::Momentum => self.amplitudes.clone(),
            Basis::Position => ctx.to_momentum(&self.amplitudes),
        }
    }

    /// Same state expressed in the position basis.
    pub fn in_position(&self, ctx: &QuditContext) -> Self {
        Self {
            amplitudes: self.position_coefficients(ctx),
            basis: Basis::Position,
        }
    }

    /// `|<self|other>|^2`, basis-independent.
    pub fn fidelity(&self, other: &Self, ctx: &QuditContext) -> f64 {
        inner(
            &self.position_coefficients(ctx),
            &other.position_coefficients(ctx),
        )
        .norm_sqr()
    }
}

/// Discrete Fourier transform of the coefficient vector: the coefficients
/// are multiplied by `F^dagger`, which turns position coefficients into
/// momentum coefficients, and the basis tag is flipped. Two applications
/// give the reflection `T`, since `F^dagger^2 = T`.
pub fn dft(state: &StateVector, ctx: &QuditContext) -> Result<StateVector> {
    ctx.check_len(state.dim())?;
    Ok(StateVector {
        amplitudes: ctx.to_momentum(&state.amplitudes),
        basis: state.basis.other(),
    })
}

/// Hermitian, unit-trace, positive semidefinite `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

pub const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
pub const DENSITY_TRACE_TOL: f64 = 1e-12;
pub const DENSITY_EIGEN_FLOOR: f64 = 1e-10;

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.dim() == 0 {
            return Err(Error::ZeroDimension);
        }
        let herm = entries.hermiticity_defect();
        if herm > DENSITY_HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = entries.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        if !entries.is_positive_definite_shifted(DENSITY_EIGEN_FLOOR) {
            return Err(Error::InvalidDensity(format!(
                "an eigenvalue lies below -{DENSITY_EIGEN_FLOOR:e}"
            )));
        }
        Ok(Self { entries })
    }

    /// `(m + m^dagger) / 2`, rescaled to unit trace, then validated.
    pub fn hermitized(m: &CMatrix) -> Result<Self> {
        let h = (m + &m.adjoint()).scale(C64::new(0.5, 0.0));
        let tr = h.trace().re;
        if !(tr.abs() > 0.0) {
            return Err(Error::InvalidDensity("zero trace".into()));
        }
        Self::new(h.scale(C64::new(1.0 / tr, 0.0)))
    }

    pub fn from_pure(state: &StateVector, ctx: &QuditContext) -> Self {
        let c = state.position_coefficients(ctx);
        Self {
            entries: CMatrix::outer(&c, &c),
        }
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            entries: CMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `<a|rho|a>`.
    pub fn position_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.entries[(a, a)].re).collect()
    }

    /// `<b~|rho|b~>`.
    pub fn momentum_diagonal(&self, ctx: &QuditContext) -> Vec<f64> {
        let f = ctx.fourier();
        let rotated = f.adjoint().matmul(&self.entries).matmul(f);
        (0..self.dim()).map(|b| rotated[(b, b)].re).collect()
    }

    /// `P^a Q^b rho Q^-b P^-a`.
    pub fn translated(&self, a: i64, b: i64, ctx: &QuditContext) -> Self {
        Self {
            entries: ctx.conjugate_weyl(a, b, &self.entries),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn periodic_index_examples() {
        assert_eq!(periodic_index(-1, 5), 4);
        assert_eq!(periodic_index(7, 5), 2);
        assert_eq!(periodic_index(0, 1), 0);
    }

    #[test]
    fn centered_ranges() {
        assert_eq!(centered_start(5), -2);
        assert_eq!(centered_start(4), -2);
        let d4: Vec<i64> = (0..4).map(|a| centered_index(a, 4)).collect();
        assert_eq!(d4, vec![0, 1, -2, -1]);
        let d5: Vec<i64> = (0..5).map(|a| centered_index(a, 5)).collect();
        assert_eq!(d5, vec![0, 1, 2, -2, -1]);
    }

    #[test]
    fn rejects_zero_dimension() {
        assert!(matches!(build_context(0), Err(Error::ZeroDimension)));
    }

    #[test]
    fn qubit_operators_are_pauli() {
        let ctx = build_context(2).unwrap();
        let z = CMatrix::from_row_major(vec![c(1.0), c(0.0), c(0.0), c(-1.0)]).unwrap();
        let x = CMatrix::from_row_major(vec![c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap();
        assert!(ctx.clock().max_abs_diff(&z) < 1e-15);
        assert!(ctx.shift().max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn one_dimensional_context_is_trivial() {
        let ctx = build_context(1).unwrap();
        let one = CMatrix::identity(1);
        for m in [ctx.clock(), ctx.shift(), ctx.fourier(), ctx.reflection()] {
            assert!(m.max_abs_diff(&one) < 1e-15);
        }
    }

    #[test]
    fn commutation_relation_d4() {
        let ctx = build_context(4).unwrap();
        let qp = ctx.clock().matmul(ctx.shift());
        let pq = ctx.shift().matmul(ctx.clock()).scale(ctx.omega(1));
        assert!(qp.max_abs_diff(&pq) < 1e-12);
    }

    #[test]
    fn fourier_maps_clock_to_shift() {
        for d in [1, 2, 3, 6, 11] {
            let ctx = build_context(d).unwrap();
            let f = ctx.fourier();
            let fqf = f.matmul(ctx.clock()).matmul(&f.adjoint());
            let fpf = f.matmul(ctx.shift()).matmul(&f.adjoint());
            assert!(fqf.max_abs_diff(&ctx.shift().adjoint()) < 1e-12, "d={d}");
            assert!(fpf.max_abs_diff(ctx.clock()) < 1e-12, "d={d}");
        }
    }

    #[test]
    fn weyl_helpers_match_dense_products() {
        let ctx = build_context(5).unwrap();
        let dense = {
            let mut w = CMatrix::identity(5);
            for _ in 0..2 {
                w = w.matmul(ctx.shift());
            }
            for _ in 0..3 {
                w = w.matmul(ctx.clock());
            }
            w
        };
        assert!(ctx.weyl(2, 3).max_abs_diff(&dense) < 1e-12);
        let v: Vec<C64> = (0..5).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let fast = ctx.apply_weyl(2, 3, &v);
        let slow = dense.matvec(&v);
        assert!(crate::linalg::max_abs_diff_c(&fast, &slow) < 1e-12);
        let x = CMatrix::from_fn(5, |i, j| C64::new(i as f64, j as f64 * 0.5));
        let conj = dense.matmul(&x).matmul(&dense.adjoint());
        assert!(ctx.conjugate_weyl(2, 3, &x).max_abs_diff(&conj) < 1e-12);
    }

    #[test]
    fn dft_of_delta_is_uniform() {
        let ctx = build_context(4).unwrap();
        let s = dft(&StateVector::basis_state(4, 0).unwrap(), &ctx).unwrap();
        assert_eq!(s.basis(), Basis::Momentum);
        for z in s.amplitudes() {
            assert!((z - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn dft_twice_is_reflection() {
        let ctx = build_context(7).unwrap();
        let amps: Vec<C64> = (0..7).map(|k| C64::new(1.0 + k as f64, (k * k) as f64 * 0.1)).collect();
        let s = StateVector::normalized(amps, Basis::Position).unwrap();
        let twice = dft(&dft(&s, &ctx).unwrap(), &ctx).unwrap();
        let reflected = ctx.reflection().matvec(s.amplitudes());
        assert!(crate::linalg::max_abs_diff_c(twice.amplitudes(), &reflected) < 1e-12);
    }

    #[test]
    fn dft_rejects_wrong_dimension() {
        let ctx = build_context(3).unwrap();
        let s = StateVector::basis_state(4, 1).unwrap();
        assert!(matches!(dft(&s, &ctx), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bases_are_unbiased() {
        let ctx = build_context(6).unwrap();
        for z in ctx.fourier().as_slice() {
            assert!((z.norm() - 1.0 / 6f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn state_validation() {
        assert!(matches!(
            StateVector::new(vec![c(1.0), c(1.0)], Basis::Position),
            Err(Error::NotNormalized(_))
        ));
        let s = StateVector::new(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)], Basis::Position);
        assert!(s.is_ok());
        assert!(StateVector::normalized(vec![c(0.0); 3], Basis::Position).is_err());
    }

    #[test]
    fn density_validation() {
        let bad_trace = CMatrix::identity(2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let not_psd = CMatrix::from_row_major(vec![c(1.5), c(0.0), c(0.0), c(-0.5)]).unwrap();
        assert!(DensityMatrix::new(not_psd).is_err());
        let non_herm = CMatrix::from_row_major(vec![c(0.5), c(0.1), c(0.0), c(0.5)]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(DensityMatrix::maximally_mixed(3).is_ok());
    }

    mod props {
        use super::super::*;
        use crate::linalg::max_abs_diff_c;
        use crate::sampling::{haar_state, seeded_rng};
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn operators_are_unitary(d in 1usize..=64) {
                let ctx = build_context(d).unwrap();
                let id = CMatrix::identity(d);
                for u in [ctx.clock(), ctx.shift(), ctx.fourier()] {
                    prop_assert!((&u.adjoint() * u).max_abs_diff(&id) < 1e-12);
                }
            }

            #[test]
            fn reflection_and_fourier_orders(d in 1usize..=64) {
                let ctx = build_context(d).unwrap();
                let id = CMatrix::identity(d);
                let t = ctx.reflection();
                prop_assert!((t * t).max_abs_diff(&id) < 1e-12);
                let f2 = ctx.fourier() * ctx.fourier();
                prop_assert!((&f2 * &f2).max_abs_diff(&id) < 1e-12);
            }

            #[test]
            fn clock_expectation_in_both_bases(d in 1usize..=32, seed in any::<u64>()) {
                let ctx = build_context(d).unwrap();
                let s = haar_state(d, &mut seeded_rng(seed, 0));
                let c = s.position_coefficients(&ctx);
                let df = d as f64;
                let tilde: Vec<C64> = (0..d)
                    .map(|b| {
                        (0..d)
                            .map(|a| C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (a * b) as f64 / df) * c[a])
                            .sum::<C64>()
                            / df.sqrt()
                    })
                    .collect();
                prop_assert!(max_abs_diff_c(&tilde, &s.momentum_coefficients(&ctx)) < 1e-10);
                let direct: C64 = (0..d).map(|a| ctx.omega(a as i64) * c[a].norm_sqr()).sum();
                let via_momentum: C64 = (0..d).map(|b| tilde[(b + 1) % d].conj() * tilde[b]).sum();
                prop_assert!((direct - via_momentum).norm() < 1e-10);
                let shift: C64 = (0..d).map(|a| c[(a + 1) % d].conj() * c[a]).sum();
                let shift_momentum: C64 =
                    (0..d).map(|b| ctx.omega(-(b as i64)) * tilde[b].norm_sqr()).sum();
                prop_assert!((shift - shift_momentum).norm() < 1e-10);
            }
        }
    }
}
