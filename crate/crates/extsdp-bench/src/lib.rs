//! Fixed inputs shared by the benchmarks.

use extsdp::quantum::choi_from_kraus;
use extsdp::resources::{amp_damp3, mixed_resource, random_density, tmsv_truncated};
use extsdp::{ChoiChannel, DensityState, LabeledOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// `mixed_resource(p, σ, σ')` on `local`-dimensional modes with seeds 0 and 1.
pub fn mixed(p: f64, local: usize) -> DensityState {
    mixed_resource(p, &random_density(local, 0).unwrap(), &random_density(local, 1).unwrap()).unwrap()
}

pub fn tmsv(lambda: f64) -> DensityState {
    tmsv_truncated(lambda, 2).unwrap()
}

pub fn amp_damp(g10: f64, g21: f64, g20: f64) -> ChoiChannel {
    choi_from_kraus(&amp_damp3(g10, g21, g20).unwrap(), &[3], &[3]).unwrap()
}

/// Random Hermitian operator on `dims`.
pub fn hermitian(dims: &[usize], seed: u64) -> LabeledOperator {
    let side = dims.iter().product();
    let g = extsdp::quantum::ginibre(side, side, &mut ChaCha20Rng::seed_from_u64(seed));
    let x = LabeledOperator::new(dims.to_vec(), g).unwrap();
    x.add(&x.adjoint()).unwrap().scale(0.5)
}
