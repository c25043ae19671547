//! Seeded random states: Haar-random pure states and Ginibre-induced
//! density matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{CMatrix, C64};
use crate::qudit::{Basis, DensityMatrix, StateVector};

/// Deterministic generator for `(seed, stream)`; independent streams let
/// parallel workers reproduce the same draws regardless of scheduling.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Normalized complex Gaussian vector, position basis.
pub fn haar_state<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
    loop {
        let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        if let Ok(s) = StateVector::normalized(v, Basis::Position) {
            return s;
        }
    }
}

/// `G G^dagger / tr(G G^dagger)` for a complex Ginibre matrix `G`.
pub fn ginibre_density<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    loop {
        let g = CMatrix::from_fn(d, |_, _| complex_gaussian(rng));
        let w = g.matmul(&g.adjoint());
        if let Ok(rho) = DensityMatrix::hermitized(&w) {
            return rho;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let a = haar_state(5, &mut seeded_rng(7, 3));
        let b = haar_state(5, &mut seeded_rng(7, 3));
        assert_eq!(a, b);
        let c = haar_state(5, &mut seeded_rng(7, 4));
        assert_ne!(a, c);
    }

    #[test]
    fn ginibre_is_valid_density() {
        let mut rng = seeded_rng(1, 0);
        for d in 1..6 {
            let rho = ginibre_density(d, &mut rng);
            assert_eq!(rho.dim(), d);
        }
    }
}
