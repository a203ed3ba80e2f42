//! Seeded random states. Parallel work derives one generator per task from
//! `(seed, task index)`, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::{StateVector, C64};

/// Generator for shard `index` of a computation seeded with `seed`.
pub fn shard_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-random unit vector in `C^dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(v) = StateVector::new(amps).and_then(|v| v.normalized()) {
            return v;
        }
    }
}

/// Independent Haar-random factors `(α, β)` of a product state `|α⟩ ⊗ |β⟩`.
pub fn random_product_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> (StateVector, StateVector) {
    (random_unit_vector(d, rng), random_unit_vector(d, rng))
}
