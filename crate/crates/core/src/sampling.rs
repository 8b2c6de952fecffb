//! Seeded random phase points for bracket, rank and survey checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{PhasePoint, SystemKind};
use crate::model::SystemParams;

/// Uniform box sampler. Reduced positions stay away from the singular axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSampler {
    #[serde(default = "default_x_range")]
    pub x_range: (f64, f64),
    #[serde(default = "default_y_range")]
    pub y_range: (f64, f64),
    #[serde(default = "default_p_range")]
    pub p_range: (f64, f64),
}

fn default_x_range() -> (f64, f64) {
    (0.3, 2.0)
}

fn default_y_range() -> (f64, f64) {
    (-2.0, 2.0)
}

fn default_p_range() -> (f64, f64) {
    (-2.0, 2.0)
}

impl Default for StateSampler {
    fn default() -> Self {
        Self {
            x_range: default_x_range(),
            y_range: default_y_range(),
            p_range: default_p_range(),
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

impl StateSampler {
    pub fn sample<R: Rng>(&self, params: &SystemParams, kind: SystemKind, rng: &mut R) -> PhasePoint {
        let d = kind.config_dim(params);
        let (lo, hi) = match kind {
            SystemKind::Full => self.y_range,
            SystemKind::Reduced => self.x_range,
        };
        let q = (0..d).map(|_| rng.gen_range(lo..hi)).collect();
        let p = (0..d)
            .map(|_| rng.gen_range(self.p_range.0..self.p_range.1))
            .collect();
        PhasePoint { t: 0.0, q, p }
    }

    /// `count` states from a fresh generator seeded with `seed`.
    pub fn sample_many(
        &self,
        params: &SystemParams,
        kind: SystemKind,
        count: usize,
        seed: u64,
    ) -> Vec<PhasePoint> {
        let mut rng = rng_from_seed(seed);
        (0..count).map(|_| self.sample(params, kind, &mut rng)).collect()
    }
}
