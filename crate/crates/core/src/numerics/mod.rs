//! Seeded sampling, DFT submatrices, special functions and small complex
//! linear algebra.

mod dft;
pub mod dist;
pub mod linalg;
mod rng;
mod special;

pub use dft::DftSubmatrix;
pub use dist::{
    normalize_log_weights, sample_categorical, sample_complex_gaussian, sample_dirichlet, sample_gamma,
    sample_inverse_gamma, standard_complex_normal,
};
pub use linalg::CMatrix;
pub use rng::{derive_seed, splitmix64, RandomStream};
pub use special::{digamma, ln_gamma};

pub(crate) use special::digamma_unchecked;

/// Shannon entropy (nats) of a probability vector.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * libm::log(x)).sum::<f64>()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
