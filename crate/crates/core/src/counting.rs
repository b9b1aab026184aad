//! Quantum counting on top of UPEA.
//!
//! The Grover iterate has eigenphases `±φ` with `m = M/N = sin²(πφ)`, and the
//! uniform superposition splits evenly between the two eigenvectors. Each run
//! therefore estimates `+φ` or `−φ` with probability ½. Mapping an unbiased
//! phase estimate through `sin²` leaves a bias that is linear in `m`; the
//! corrections here remove it.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mle::mle_estimate_counting;
use crate::phase::{PeaParams, Phase};
use crate::sampler::{sample_upea, RngSeed, RNG_ALGORITHM};
use crate::stats::mean_stderr;

/// Largest supported domain exponent `n` (`N = 2^n`).
pub const MAX_DOMAIN_QUBITS: u32 = 62;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Marked {
    Set(BTreeSet<u64>),
    Count(u64),
}

/// A Boolean function on `{0, …, N−1}` given by its marked set or just its
/// number of marked items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingInstance {
    n: u32,
    marked: Marked,
}

impl CountingInstance {
    pub fn with_marked_set(n: u32, marked: impl IntoIterator<Item = u64>) -> Result<Self> {
        let size = domain_size(n)?;
        let set: BTreeSet<u64> = marked.into_iter().collect();
        if let Some(&x) = set.iter().find(|&&x| x >= size) {
            return Err(Error::out_of_range("marked item", x, format!("0..{size}")));
        }
        Ok(CountingInstance {
            n,
            marked: Marked::Set(set),
        })
    }

    pub fn with_count(n: u32, count: u64) -> Result<Self> {
        let size = domain_size(n)?;
        if count > size {
            return Err(Error::out_of_range("marked count M", count, format!("0..={size}")));
        }
        Ok(CountingInstance {
            n,
            marked: Marked::Count(count),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `N = 2^n`.
    pub fn size(&self) -> u64 {
        1u64 << self.n
    }

    pub fn marked(&self) -> &Marked {
        &self.marked
    }

    /// `M`.
    pub fn marked_count(&self) -> u64 {
        match &self.marked {
            Marked::Set(s) => s.len() as u64,
            Marked::Count(c) => *c,
        }
    }

    /// Membership predicate. A bare count marks the items `0..M`.
    pub fn is_marked(&self, x: u64) -> bool {
        match &self.marked {
            Marked::Set(s) => s.contains(&x),
            Marked::Count(c) => x < *c,
        }
    }

    /// `m = M/N`.
    pub fn fraction(&self) -> f64 {
        self.marked_count() as f64 / self.size() as f64
    }

    pub fn phase(&self) -> Phase {
        phi_from_m(self.fraction()).expect("M/N lies in [0, 1]")
    }
}

fn domain_size(n: u32) -> Result<u64> {
    if !(1..=MAX_DOMAIN_QUBITS).contains(&n) {
        return Err(Error::out_of_range(
            "domain qubits n",
            n,
            format!("1..={MAX_DOMAIN_QUBITS}"),
        ));
    }
    Ok(1u64 << n)
}

/// `arcsin(√m)/π ∈ [0, 1/2]`.
pub fn phi_from_m(m: f64) -> Result<Phase> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::out_of_range("fraction m", m, "[0, 1]"));
    }
    Phase::new(m.sqrt().asin() / std::f64::consts::PI)
}

/// `sin²(πφ)`.
pub fn m_from_phi(phi: f64) -> f64 {
    let s = (std::f64::consts::PI * phi).sin();
    s * s
}

/// An estimate of `m`; `m_corrected` is filled in by a correction step and
/// is not clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingEstimate {
    pub m_tilde: f64,
    pub m_corrected: Option<f64>,
    pub phi_hat: Phase,
    pub repetitions: usize,
}

/// `R` UPEA runs on the Grover iterate followed by the counting MLE.
pub fn sample_uqca<R: Rng + ?Sized>(
    params: &PeaParams,
    m: f64,
    rng: &mut R,
) -> Result<CountingEstimate> {
    let phi = phi_from_m(m)?.value();
    let estimates: Vec<f64> = (0..params.repetitions())
        .map(|_| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sample_upea(params, sign * phi, rng).phi_tilde.value()
        })
        .collect();
    let phi_hat = mle_estimate_counting(params, &estimates)?.phi_hat;
    Ok(CountingEstimate {
        m_tilde: m_from_phi(phi_hat.value()),
        m_corrected: None,
        phi_hat,
        repetitions: params.repetitions(),
    })
}

/// Bias of the single-run estimator: `(1 − 2m)/(2T)`.
pub fn exact_bias_uqca_single(m: f64, size: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::out_of_range("fraction m", m, "[0, 1]"));
    }
    Ok((1.0 - 2.0 * m) / (2.0 * size as f64))
}

/// Unbiased single-run estimate `(m̃ − 1/(2T)) / (1 − 1/T)`.
pub fn correct_single(m_tilde: f64, size: u64) -> f64 {
    let t = size as f64;
    (m_tilde - 0.5 / t) / (1.0 - 1.0 / t)
}

/// Unbiased MLE estimate `(m̃ − b)/(1 − 2b)` given the calibrated `b`.
pub fn correct_mle(m_tilde: f64, b: f64) -> Result<f64> {
    if b == 0.5 {
        return Err(Error::DegenerateCorrection);
    }
    Ok((m_tilde - b) / (1.0 - 2.0 * b))
}

/// Simulated bias at `m = 0` for one `(T, R)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    #[serde(rename = "T")]
    pub size: u64,
    #[serde(rename = "R")]
    pub repetitions: usize,
    pub b: f64,
    pub stderr_b: f64,
    pub n_samples: u64,
    pub seed: RngSeed,
    pub rng_algorithm: String,
}

impl CalibrationRecord {
    pub fn ensure_matches(&self, size: u64, repetitions: usize) -> Result<()> {
        if self.size != size || self.repetitions != repetitions {
            return Err(Error::CalibrationMismatch {
                record_t: self.size,
                record_r: self.repetitions,
                sweep_t: size,
                sweep_r: repetitions,
            });
        }
        Ok(())
    }

    pub fn correct(&self, m_tilde: f64) -> Result<f64> {
        correct_mle(m_tilde, self.b)
    }
}

/// Stream tag of calibration trials; evaluation sweeps never use it.
pub const CALIBRATION_TAG: &str = "calibrate";

/// Estimates `b = E[m̃ | m = 0]` from `n_samples` runs of [`sample_uqca`].
///
/// Trial `i` draws from `seed.stream("calibrate", [R, i])`, so the result does
/// not depend on how trials are scheduled across threads.
pub fn calibrate_b(params: &PeaParams, n_samples: u64, seed: RngSeed) -> Result<CalibrationRecord> {
    if n_samples < 2 {
        return Err(Error::out_of_range("calibration samples", n_samples, ">= 2"));
    }
    let r = params.repetitions() as u64;
    let values = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.stream(CALIBRATION_TAG, &[r, i]);
            sample_uqca(params, 0.0, &mut rng).map(|e| e.m_tilde)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (b, stderr) = mean_stderr(&values)?;
    let stderr_b = stderr.unwrap_or(0.0);
    if !(b.is_finite() && stderr_b > 0.0) {
        return Err(Error::InvalidParams(format!(
            "calibration is degenerate (b = {b}, stderr = {stderr_b}); use a random theta mode"
        )));
    }
    Ok(CalibrationRecord {
        size: params.size(),
        repetitions: params.repetitions(),
        b,
        stderr_b,
        n_samples,
        seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::ThetaMode;
    use approx::assert_abs_diff_eq;

    #[test]
    fn phase_count_mapping() {
        assert_eq!(phi_from_m(0.0).unwrap().value(), 0.0);
        assert_abs_diff_eq!(phi_from_m(1.0).unwrap().value(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(phi_from_m(0.5).unwrap().value(), 0.25, epsilon = 1e-15);
        assert!(phi_from_m(1.01).is_err());
        assert!(phi_from_m(-0.01).is_err());
        assert_abs_diff_eq!(m_from_phi(0.25), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m_from_phi(0.75), 0.5, epsilon = 1e-15);
        for k in 0..=64 {
            let m = k as f64 / 64.0;
            let back = m_from_phi(phi_from_m(m).unwrap().value());
            assert_abs_diff_eq!(back, m, epsilon = 1e-14);
        }
    }

    #[test]
    fn single_run_bias_law() {
        assert_eq!(exact_bias_uqca_single(0.5, 16).unwrap(), 0.0);
        assert_eq!(exact_bias_uqca_single(0.5, 1024).unwrap(), 0.0);
        assert_eq!(exact_bias_uqca_single(0.0, 16).unwrap(), 0.03125);
        assert_eq!(exact_bias_uqca_single(1.0, 16).unwrap(), -0.03125);
        assert!(exact_bias_uqca_single(2.0, 16).is_err());
    }

    #[test]
    fn corrections_are_unbiasing_affine_maps() {
        let size = 16;
        assert_abs_diff_eq!(correct_single(1.0 / 32.0, size), 0.0, epsilon = 1e-16);
        // affine maps commute with expectation: E[m̃] = m + (1 − 2m)/(2T) ⇒ E[m'] = m
        for k in 0..=16 {
            let m = k as f64 / 16.0;
            let mean = m + exact_bias_uqca_single(m, size).unwrap();
            assert_abs_diff_eq!(correct_single(mean, size), m, epsilon = 1e-15);
        }
        // raw output is not clamped
        assert!(correct_single(0.0, size) < 0.0);

        let b = 0.004775;
        assert_abs_diff_eq!(correct_mle(b, b).unwrap(), 0.0, epsilon = 1e-16);
        assert_eq!(correct_mle(0.3, 0.0).unwrap(), 0.3);
        for k in 0..=16 {
            let m = k as f64 / 16.0;
            let mean = m * (1.0 - 2.0 * b) + b;
            assert_abs_diff_eq!(correct_mle(mean, b).unwrap(), m, epsilon = 1e-15);
        }
        assert!(matches!(correct_mle(0.2, 0.5), Err(Error::DegenerateCorrection)));
    }

    #[test]
    fn instances() {
        let a = CountingInstance::with_marked_set(3, [1, 6]).unwrap();
        assert_eq!((a.size(), a.marked_count()), (8, 2));
        assert!(a.is_marked(6) && !a.is_marked(0));
        assert_abs_diff_eq!(a.fraction(), 0.25);
        let b = CountingInstance::with_count(3, 2).unwrap();
        assert_eq!(a.phase(), b.phase());
        assert!(CountingInstance::with_marked_set(3, [8]).is_err());
        assert!(CountingInstance::with_count(3, 9).is_err());
        assert!(CountingInstance::with_count(0, 0).is_err());
    }

    #[test]
    fn lattice_zero_is_exact_with_plain_theta() {
        let p = PeaParams::new(4, 1, ThetaMode::PLAIN).unwrap();
        let mut rng = RngSeed(1).rng();
        for _ in 0..200 {
            let e = sample_uqca(&p, 0.0, &mut rng).unwrap();
            assert_eq!(e.m_tilde, 0.0);
            assert!(e.m_corrected.is_none());
        }
    }

    #[test]
    fn estimates_stay_in_unit_interval() {
        let p = PeaParams::new(4, 3, ThetaMode::FullUnit).unwrap();
        let mut rng = RngSeed(2).rng();
        for k in 0..=8 {
            let m = k as f64 / 8.0;
            for _ in 0..50 {
                let e = sample_uqca(&p, m, &mut rng).unwrap();
                assert!((0.0..=1.0).contains(&e.m_tilde));
                assert!((0.0..=0.5).contains(&e.phi_hat.value()));
                assert_abs_diff_eq!(e.m_tilde, m_from_phi(e.phi_hat.value()), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn calibration_record_json_and_matching() {
        let p = PeaParams::new(4, 1, ThetaMode::FullUnit).unwrap();
        let rec = calibrate_b(&p, 256, RngSeed(9)).unwrap();
        assert!(rec.stderr_b > 0.0);
        let v: serde_json::Value = serde_json::to_value(&rec).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            ["R", "T", "b", "n_samples", "rng_algorithm", "seed", "stderr_b"]
        );
        let back: CalibrationRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, rec);
        assert!(rec.ensure_matches(16, 1).is_ok());
        assert!(matches!(
            rec.ensure_matches(16, 3),
            Err(Error::CalibrationMismatch { .. })
        ));
        assert!(calibrate_b(&p, 1, RngSeed(9)).is_err());
        let plain = PeaParams::new(4, 1, ThetaMode::PLAIN).unwrap();
        assert!(calibrate_b(&plain, 16, RngSeed(9)).is_err());
    }
}
