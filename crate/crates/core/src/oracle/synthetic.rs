//! Deterministic oracles driven by a rate function over [`ConfigKey`].

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Assessment, Oracle, OracleError, RecognitionRecord, Stimulus};
use crate::config::ConfigKey;

type RateFn = dyn Fn(&ConfigKey) -> f64 + Send + Sync;

/// Oracle whose recognition rate is a pure function of the configuration.
///
/// Without a seed the rate is quantized to the nearest subject count. With a
/// seed each subject answers correctly with probability `rate`, drawn from a
/// generator keyed by `(seed, key)`, so results do not depend on query order.
pub struct SyntheticOracle {
    rate: Box<RateFn>,
    seed: Option<u64>,
}

impl SyntheticOracle {
    pub fn new(rate: impl Fn(&ConfigKey) -> f64 + Send + Sync + 'static) -> Self {
        SyntheticOracle {
            rate: Box::new(rate),
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn constant(rate: f64) -> Self {
        Self::new(move |_| rate)
    }

    /// Rate `hit` when the rendered side is at least `min_side` and at least
    /// `min_frames` frames are retained, `miss` otherwise.
    pub fn threshold(min_side: i64, min_frames: usize, hit: f64, miss: f64) -> Self {
        Self::new(move |key| {
            if key.rendered_side() >= min_side && key.frame_indices.len() >= min_frames {
                hit
            } else {
                miss
            }
        })
    }

    pub fn table(rates: HashMap<ConfigKey, f64>, default: f64) -> Self {
        Self::new(move |key| rates.get(key).copied().unwrap_or(default))
    }

    /// Uniform pseudo-random rate per key, fixed by `seed`.
    pub fn hashed(seed: u64) -> Self {
        Self::new(move |key| unit_hash(seed, key))
    }

    pub fn rate(&self, key: &ConfigKey) -> f64 {
        (self.rate)(key).clamp(0.0, 1.0)
    }

    pub fn record(&self, key: &ConfigKey, n_subjects: u32) -> RecognitionRecord {
        let rate = self.rate(key);
        let record = match self.seed {
            None => RecognitionRecord::from_score(key.clone(), rate, n_subjects),
            Some(seed) => {
                let mut rng = ChaCha8Rng::from_seed(key_seed(seed, key));
                let hits = (0..n_subjects).filter(|_| rng.random::<f64>() < rate).count() as u32;
                RecognitionRecord::new(key.clone(), n_subjects, hits)
            }
        };
        record.expect("n_subjects >= 1 and hits <= n_subjects")
    }
}

impl Oracle for SyntheticOracle {
    fn assess(&self, stimulus: &Stimulus, n_subjects: u32) -> Result<Assessment, OracleError> {
        if n_subjects == 0 {
            return Err(OracleError::Protocol("n_subjects must be at least 1".into()));
        }
        Ok(Assessment::Complete(self.record(&stimulus.key, n_subjects)))
    }
}

fn key_seed(seed: u64, key: &ConfigKey) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(key.to_string().as_bytes());
    hasher.finalize().into()
}

/// Deterministic value in `[0, 1)` derived from `(seed, key)`.
pub fn unit_hash(seed: u64, key: &ConfigKey) -> f64 {
    let digest = key_seed(seed, key);
    let bits = u64::from_le_bytes(digest[..8].try_into().unwrap());
    (bits >> 11) as f64 / (1u64 << 53) as f64
}
