use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

/// Forward/inverse plan pair of one length. Both directions are
/// unnormalized, so `inverse(forward(x)) = n·x`.
#[derive(Clone)]
pub(crate) struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }

    pub fn inverse(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
    }
}
