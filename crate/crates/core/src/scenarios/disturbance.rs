//! Bounded additive disturbance `d = d_y + d_theta^T phi + d_phi^T G(theta)`.
//!
//! Every draw is addressed by a sample index, so the value at index `k`
//! does not depend on how many samples were requested before it. This keeps
//! CT runs (which sample at RK4 stage points) reproducible.

use nalgebra::DVector;
use rand::{RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::RegressionSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceComponent {
    /// Additive output noise `d_y`.
    Y,
    /// Parameter-like term `d_theta^T phi`.
    Theta,
    /// Regressor-like term `d_phi^T G(theta)`.
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RngKind {
    #[default]
    Chacha8,
    Chacha20,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub amplitude: f64,
    pub components: Vec<DisturbanceComponent>,
    pub seed: u64,
    pub rng: RngKind,
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        Self { amplitude: 0.0, components: vec![DisturbanceComponent::Y], seed: 0, rng: RngKind::Chacha8 }
    }
}

enum Stream {
    C8(ChaCha8Rng),
    C20(ChaCha20Rng),
}

impl Stream {
    fn seek(&mut self, word: u128) {
        match self {
            Stream::C8(r) => r.set_word_pos(word),
            Stream::C20(r) => r.set_word_pos(word),
        }
    }

    /// Uniform on `[-1, 1)` from the top 53 bits of one 64-bit word pair.
    fn next_symmetric(&mut self) -> f64 {
        let x = match self {
            Stream::C8(r) => r.next_u64(),
            Stream::C20(r) => r.next_u64(),
        };
        2.0 * ((x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)) - 1.0
    }
}

pub struct DisturbanceSource {
    spec: DisturbanceSpec,
    stream: Stream,
}

impl std::fmt::Debug for DisturbanceSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DisturbanceSource").field("spec", &self.spec).finish()
    }
}

impl DisturbanceSource {
    pub fn new(spec: &DisturbanceSpec) -> Result<Self> {
        if !(spec.amplitude >= 0.0) || !spec.amplitude.is_finite() {
            return Err(Error::InvalidGain {
                name: "disturbance.amplitude",
                bound: "amplitude >= 0",
                value: spec.amplitude,
            });
        }
        let stream = match spec.rng {
            RngKind::Chacha8 => Stream::C8(ChaCha8Rng::seed_from_u64(spec.seed)),
            RngKind::Chacha20 => Stream::C20(ChaCha20Rng::seed_from_u64(spec.seed)),
        };
        Ok(Self { spec: spec.clone(), stream })
    }

    pub fn is_zero(&self) -> bool {
        self.spec.amplitude == 0.0 || self.spec.components.is_empty()
    }

    /// The disturbance value at sample `index`.
    pub fn value(&mut self, index: u64, phi: &DVector<f64>, g_theta: &DVector<f64>) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let p = phi.len();
        // two 32-bit words per draw: one d_y, p for d_theta, p for d_phi
        let words = 2 * (1 + 2 * p) as u128;
        self.stream.seek(index as u128 * words);
        let amp = self.spec.amplitude;
        let d_y = amp * self.stream.next_symmetric();
        let d_theta: Vec<f64> = (0..p).map(|_| amp * self.stream.next_symmetric()).collect();
        let d_phi: Vec<f64> = (0..p).map(|_| amp * self.stream.next_symmetric()).collect();

        let mut d = 0.0;
        for c in &self.spec.components {
            d += match c {
                DisturbanceComponent::Y => d_y,
                DisturbanceComponent::Theta => d_theta.iter().zip(phi.iter()).map(|(a, b)| a * b).sum(),
                DisturbanceComponent::Phi => d_phi.iter().zip(g_theta.iter()).map(|(a, b)| a * b).sum(),
            };
        }
        d
    }

    pub fn inject(&mut self, sample: &RegressionSample, g_theta: &DVector<f64>, index: u64) -> RegressionSample {
        if self.is_zero() {
            return sample.clone();
        }
        let d = self.value(index, &sample.phi, g_theta);
        RegressionSample::new(sample.time, sample.phi.clone(), sample.y + d)
    }
}

/// One-shot form of [`DisturbanceSource::inject`].
pub fn inject_disturbance(
    sample: &RegressionSample,
    g_theta: &DVector<f64>,
    spec: &DisturbanceSpec,
    index: u64,
) -> Result<RegressionSample> {
    Ok(DisturbanceSource::new(spec)?.inject(sample, g_theta, index))
}
