//! Seed-reproducible Monte Carlo draws of PEA and UPEA outcomes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::phase::{circ_dist, outcome_kernel, BiasMaeEntry, PeaParams, Phase, ThetaMode};

/// Generator used for every trial.
pub type TrialRng = ChaCha8Rng;

/// Recorded in report metadata so runs can be reproduced.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng (rand_chacha 0.9), per-trial seeds SHA-256(base_seed | tag | indices)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> TrialRng {
        TrialRng::seed_from_u64(self.0)
    }

    /// An independent generator for the trial identified by `tag` and `indices`.
    ///
    /// Depends only on its arguments, so trials can run in any order or on any thread.
    pub fn stream(self, tag: &str, indices: &[u64]) -> TrialRng {
        TrialRng::from_seed(self.digest(tag, indices))
    }

    /// A derived seed, used where a whole sub-experiment needs its own base seed.
    pub fn child(self, tag: &str, indices: &[u64]) -> RngSeed {
        let d = self.digest(tag, indices);
        RngSeed(u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes")))
    }

    fn digest(self, tag: &str, indices: &[u64]) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"upea-seed-v1");
        h.update(self.0.to_le_bytes());
        h.update((tag.len() as u64).to_le_bytes());
        h.update(tag.as_bytes());
        for i in indices {
            h.update(i.to_le_bytes());
        }
        h.finalize().into()
    }
}

/// Inverse-CDF sampler over the exact outcome table for one phase.
#[derive(Debug, Clone)]
pub struct PeaSampler {
    cumulative: Vec<f64>,
}

impl PeaSampler {
    pub fn new(params: &PeaParams, phi: f64) -> Self {
        let size = params.size();
        let mut acc = 0.0;
        let cumulative = (0..size)
            .map(|s| {
                acc += outcome_kernel(size, s, phi);
                acc
            })
            .collect();
        PeaSampler { cumulative }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cumulative.last().expect("table has T >= 2 entries");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1) as u64
    }
}

/// Outcome `s` of one plain phase-estimation run at phase `phi`.
pub fn sample_pea<R: Rng + ?Sized>(params: &PeaParams, phi: f64, rng: &mut R) -> u64 {
    PeaSampler::new(params, phi).draw(rng)
}

/// One run with its classical shift and the corrected estimate `wrap(s/T − θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub s: u64,
    pub theta: f64,
    pub phi_tilde: Phase,
}

impl PhaseSample {
    fn new(size: u64, s: u64, theta: f64) -> Self {
        PhaseSample {
            s,
            theta,
            phi_tilde: Phase::wrapped(s as f64 / size as f64 - theta),
        }
    }
}

pub fn sample_theta<R: Rng + ?Sized>(mode: ThetaMode, size: u64, rng: &mut R) -> f64 {
    match mode {
        ThetaMode::FullUnit => rng.random::<f64>(),
        ThetaMode::OnePeriod => rng.random::<f64>() / size as f64,
        ThetaMode::Fixed(x) => x,
    }
}

pub fn sample_upea<R: Rng + ?Sized>(params: &PeaParams, phi: f64, rng: &mut R) -> PhaseSample {
    let size = params.size();
    let theta = sample_theta(params.theta_mode(), size, rng);
    let s = sample_pea(params, phi + theta, rng);
    PhaseSample::new(size, s, theta)
}

/// `R` independent runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub params: PeaParams,
    pub samples: Vec<PhaseSample>,
}

impl SampleBatch {
    pub fn estimates(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.phi_tilde.value()).collect()
    }
}

pub fn run_batch<R: Rng + ?Sized>(params: &PeaParams, phi: f64, rng: &mut R) -> SampleBatch {
    let size = params.size();
    let samples = match params.theta_mode() {
        // one table serves every run
        ThetaMode::Fixed(theta) => {
            let table = PeaSampler::new(params, phi + theta);
            (0..params.repetitions())
                .map(|_| PhaseSample::new(size, table.draw(rng), theta))
                .collect()
        }
        _ => (0..params.repetitions())
            .map(|_| sample_upea(params, phi, rng))
            .collect(),
    };
    SampleBatch {
        params: *params,
        samples,
    }
}

/// Bias and MAE of `estimates` against `ground_truth`, using the signed
/// circular distance when `circular` and the plain difference otherwise.
pub fn empirical_bias_mae(
    estimates: &[f64],
    ground_truth: f64,
    circular: bool,
) -> Result<BiasMaeEntry> {
    if estimates.is_empty() {
        return Err(Error::Empty("estimates"));
    }
    let errors: Vec<f64> = if circular {
        let truth = Phase::new(ground_truth)?;
        estimates
            .iter()
            .map(|&e| Phase::new(e).map(|p| circ_dist(p, truth)))
            .collect::<Result<_>>()?
    } else {
        estimates.iter().map(|e| e - ground_truth).collect()
    };
    BiasMaeEntry::from_errors(ground_truth, &errors)
}
