#![allow(dead_code)]

use grothnorm::rng::{gaussian, normal, RngStream};
use grothnorm::{Field, RectMatrix, SymMatrix, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    RngStream::new(seed, 0).rng()
}

/// Symmetric (Hermitian) with standard Gaussian off-diagonal entries.
pub fn random_sym(n: usize, field: Field, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::from_fn(n, field, |i, j| if i == j { C64::new(normal(rng), 0.0) } else { gaussian(rng, field) })
}

pub fn random_zero_diag(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::real_from_fn(n, |i, j| if i == j { 0.0 } else { normal(rng) })
}

/// R Rᵀ (or R R*) with R of size n×k.
pub fn random_psd(n: usize, k: usize, field: Field, rng: &mut ChaCha8Rng) -> SymMatrix {
    let r: Vec<C64> = (0..n * k).map(|_| gaussian(rng, field)).collect();
    SymMatrix::from_fn(n, field, |i, j| (0..k).map(|l| r[i * k + l] * r[j * k + l].conj()).sum())
}

/// Nonnegative zero-diagonal weights on a random graph.
pub fn random_weights(n: usize, density: f64, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::real_from_fn(n, |i, j| if i != j && rng.random::<f64>() < density { rng.random::<f64>() * 3.0 } else { 0.0 })
}

pub fn random_rect(m: usize, n: usize, rng: &mut ChaCha8Rng) -> RectMatrix {
    RectMatrix::real_from_fn(m, n, |_, _| normal(rng))
}

pub fn unit_phases(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n).map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)).collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
