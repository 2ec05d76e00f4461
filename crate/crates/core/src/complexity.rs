//! Operation-count model for one Gibbs sweep.
//!
//! | block | cost |
//! |-------|------|
//! | p_A   | O(NK) |
//! | s     | O(Mt²·Mr·N·K·M_𝒜) |
//! | h     | O(Mt·Mr·[N·K·(N·L + L² + Mt·N) + L³]) |
//! | σ²    | O(Mt·Mr·N²·K) |
//!
//! The total over `N_it` iterations is
//! `O(N_it·Mt·Mr·[N·K·(N·L + L² + Mt·N + Mt·M_𝒜) + L³])`, where `M_𝒜` is
//! the number of points summed over all candidate constellations. Mean-field
//! sweeps have the same order.

use crate::sigmodel::FrameDims;

/// Per-block operation counts of one sweep (leading terms, unit constants).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepCost {
    pub mixture_weights: u64,
    pub symbols: u64,
    pub channels: u64,
    pub noise: u64,
}

impl SweepCost {
    pub fn total(&self) -> u64 {
        self.mixture_weights + self.symbols + self.channels + self.noise
    }
}

pub fn sweep_cost(dims: &FrameDims, total_points: usize) -> SweepCost {
    let (n, k, mt, mr, l) = (dims.n as u64, dims.k as u64, dims.mt as u64, dims.mr as u64, dims.l_hat as u64);
    let ma = total_points as u64;
    SweepCost {
        mixture_weights: n * k,
        symbols: mt * mt * mr * n * k * ma,
        channels: mt * mr * (n * k * (n * l + l * l + mt * n) + l * l * l),
        noise: mt * mr * n * n * k,
    }
}

/// Total count for `iterations` sweeps, in the closed form of the table above.
pub fn gibbs_cost(dims: &FrameDims, total_points: usize, iterations: u64) -> u64 {
    let (n, k, mt, mr, l) = (dims.n as u64, dims.k as u64, dims.mt as u64, dims.mr as u64, dims.l_hat as u64);
    let ma = total_points as u64;
    iterations * mt * mr * (n * k * (n * l + l * l + mt * n + mt * ma) + l * l * l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(n: usize, l: usize) -> FrameDims {
        FrameDims { n, k: 2, mt: 2, mr: 2, l_hat: l }
    }

    #[test]
    fn total_dominates_block_sum() {
        // The closed form drops the O(NK) and O(N²K) terms, which the
        // channel block already dominates.
        let d = dims(128, 5);
        let per_sweep = sweep_cost(&d, 28);
        let closed = gibbs_cost(&d, 28, 1);
        assert!(closed <= per_sweep.total());
        assert!(per_sweep.total() - closed <= per_sweep.mixture_weights + per_sweep.noise);
    }

    #[test]
    fn scales_quadratically_in_subcarriers() {
        let small = gibbs_cost(&dims(64, 3), 28, 100);
        let large = gibbs_cost(&dims(128, 3), 28, 100);
        let ratio = large as f64 / small as f64;
        assert!(ratio > 3.5 && ratio < 4.0, "{ratio}");
    }

    #[test]
    fn linear_in_iterations() {
        let d = dims(32, 2);
        assert_eq!(gibbs_cost(&d, 28, 10) * 5, gibbs_cost(&d, 28, 50));
    }
}
