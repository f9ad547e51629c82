//! Reproducible random streams.
//!
//! Every consumer derives its generator from a master seed and a stream id.
//! ChaCha is counter based, so stream `k` yields the same sequence no matter
//! which thread draws it or in which order streams are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{Field, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream { master_seed, stream_id }
    }

    /// A sub-stream, for handing independent generators to parallel workers.
    pub fn child(&self, k: u64) -> Self {
        let mixed = self.stream_id.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ k.wrapping_add(1);
        RngStream { master_seed: self.master_seed, stream_id: mixed }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.master_seed);
        r.set_stream(self.stream_id);
        r
    }
}

pub fn normal(rng: &mut impl rand::Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// A standard Gaussian scalar: N(0,1) for real, E|z|² = 1 for complex.
pub fn gaussian(rng: &mut impl rand::Rng, field: Field) -> C64 {
    match field {
        Field::Real => C64::new(normal(rng), 0.0),
        Field::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            C64::new(s * normal(rng), s * normal(rng))
        }
    }
}

pub fn gaussian_vec(rng: &mut impl rand::Rng, dim: usize, field: Field) -> Vec<C64> {
    (0..dim).map(|_| gaussian(rng, field)).collect()
}
