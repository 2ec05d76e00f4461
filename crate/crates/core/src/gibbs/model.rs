
use num_complex::Complex64;
use crate::prelude::*;

use crate::error::{bail, Result};
use crate::numerics::DftSubmatrix;
use crate::sigmodel::{FrameDims, ModulationPool, ReceivedGrid};

/// One entry of the symbol candidate space: a constellation point together
/// with the constellation label it is drawn under.
///
/// Points shared by several constellations (e.g. QPSK ⊂ 8-PSK) appear once per
/// constellation, so per-constellation counts stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub label: usize,
    pub point: Complex64,
    /// `ln |a|` of the labelling constellation.
    pub ln_size: f64,
}

/// Everything about the inference problem that does not change during a run.
#[derive(Debug, Clone)]
pub struct Model {
    pool: ModulationPool,
    dims: FrameDims,
    dft: DftSubmatrix,
    candidates: Vec<Candidate>,
}

impl Model {
    pub fn new(pool: ModulationPool, dims: FrameDims) -> Result<Self> {
        dims.validate()?;
        let dft = DftSubmatrix::new(dims.n, dims.l_hat)?;
        let mut candidates = Vec::with_capacity(pool.total_points());
        for (label, c) in pool.iter().enumerate() {
            let ln_size = (c.len() as f64).ln();
            candidates.extend(c.points().iter().map(|&point| Candidate { label, point, ln_size }));
        }
        if candidates.len() > u16::MAX as usize {
            bail!(Config, "candidate space too large ({} points)", candidates.len());
        }
        Ok(Self {
            pool,
            dims,
            dft,
            candidates,
        })
    }

    pub fn pool(&self) -> &ModulationPool {
        &self.pool
    }

    pub fn dims(&self) -> &FrameDims {
        &self.dims
    }

    pub fn dft(&self) -> &DftSubmatrix {
        &self.dft
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn labels(&self) -> usize {
        self.pool.len()
    }

    /// Offset of symbol `(n, k, mt)` in `(k, n, mt)`-lexicographic order.
    #[inline]
    pub fn symbol_offset(&self, n: usize, k: usize, mt: usize) -> usize {
        (k * self.dims.n + n) * self.dims.mt + mt
    }

    /// Offset of antenna pair `(mt, mr)` in `(mr, mt)` order.
    #[inline]
    pub fn pair_offset(&self, mt: usize, mr: usize) -> usize {
        mr * self.dims.mt + mt
    }

    pub fn check_observation(&self, y: &ReceivedGrid) -> Result<()> {
        let want = (self.dims.n, self.dims.k, self.dims.mr);
        if y.shape() != want {
            bail!(Dimension, "observation has shape {:?}, model expects {:?}", y.shape(), want);
        }
        if !y.is_finite() {
            bail!(Numerical, "observation contains non-finite samples");
        }
        Ok(())
    }
}
