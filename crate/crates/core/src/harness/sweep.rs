use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Experiment, SweepConfig};
use crate::counting::{calibrate_b, correct_single, sample_uqca, CalibrationRecord, CountingEstimate};
use crate::error::{Error, Result};
use crate::mle::mle_estimate;
use crate::phase::{circ_dist, BiasMaeEntry, PeaParams, Phase, ThetaMode};
use crate::sampler::{run_batch, sample_upea, PeaSampler, TrialRng, RNG_ALGORITHM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub rng_algorithm: String,
    /// Seconds.
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub calibration: Vec<CalibrationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub entries: Vec<BiasMaeEntry>,
    pub metadata: ReportMetadata,
}

/// `φ_k = k / grid_points`, covering the unit circle once.
pub fn phi_grid_value(grid_points: usize, k: usize) -> f64 {
    k as f64 / grid_points as f64
}

/// `m_k = k / (grid_points − 1)`, covering `[0, 1]` with both endpoints.
pub fn m_grid_value(grid_points: usize, k: usize) -> f64 {
    if k + 1 == grid_points {
        1.0
    } else {
        k as f64 / (grid_points - 1) as f64
    }
}

/// Post-processing applied to counting estimates.
#[derive(Debug, Clone, PartialEq)]
pub enum Correction {
    None,
    /// Closed-form single-run correction for register size `T`.
    Single(u64),
    Calibrated(CalibrationRecord),
}

impl Correction {
    pub fn apply(&self, m_tilde: f64) -> Result<f64> {
        match self {
            Correction::None => Ok(m_tilde),
            Correction::Single(size) => Ok(correct_single(m_tilde, *size)),
            Correction::Calibrated(record) => record.correct(m_tilde),
        }
    }
}

/// Runs `n_samples` trials for one `(R, grid index)` cell, in trial order.
fn cell<T, F>(config: &SweepConfig, repetitions: usize, grid_index: usize, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut TrialRng) -> Result<T> + Sync,
{
    let tag = config.experiment.stream_tag();
    let idx = [repetitions as u64, grid_index as u64];
    (0..config.n_samples)
        .into_par_iter()
        .map(|i| trial(&mut config.base_seed.stream(tag, &[idx[0], idx[1], i])))
        .collect()
}

/// Signed circular errors of the phase estimator selected by the experiment.
pub fn phase_errors(config: &SweepConfig, repetitions: usize, grid_index: usize) -> Result<Vec<f64>> {
    let params = config.params(repetitions)?;
    let phi = phi_grid_value(config.grid_points, grid_index);
    let truth = Phase::new(phi)?;
    let size = params.size() as f64;
    match config.experiment {
        Experiment::PeaBiasMae => {
            let table = PeaSampler::new(&params, phi);
            cell(config, repetitions, grid_index, |rng| {
                Ok(circ_dist(Phase::wrapped(table.draw(rng) as f64 / size), truth))
            })
        }
        Experiment::UpeaBiasMae => match params.theta_mode() {
            ThetaMode::Fixed(theta) => {
                let table = PeaSampler::new(&params, phi + theta);
                cell(config, repetitions, grid_index, |rng| {
                    Ok(circ_dist(Phase::wrapped(table.draw(rng) as f64 / size - theta), truth))
                })
            }
            _ => cell(config, repetitions, grid_index, |rng| {
                Ok(circ_dist(sample_upea(&params, phi, rng).phi_tilde, truth))
            }),
        },
        Experiment::MleBiasMae | Experiment::MaeVsR => cell(config, repetitions, grid_index, |rng| {
            let batch = run_batch(&params, phi, rng);
            Ok(circ_dist(mle_estimate(&params, &batch.estimates())?.phi_hat, truth))
        }),
        other => Err(Error::InvalidParams(format!("{other} is not a phase sweep"))),
    }
}

/// Counting estimates for one `(R, m grid index)` cell, with `m_corrected`
/// filled in by `correction`.
///
/// Both counting experiments draw from this, so for one base seed the
/// corrected and uncorrected numbers are paired sample by sample.
pub fn counting_trials(
    config: &SweepConfig,
    repetitions: usize,
    grid_index: usize,
    correction: &Correction,
) -> Result<Vec<CountingEstimate>> {
    if !matches!(config.experiment, Experiment::QcaBiasMae | Experiment::UqcaCorrected) {
        return Err(Error::InvalidParams(format!("{} is not a counting sweep", config.experiment)));
    }
    let params = config.params(repetitions)?;
    let m = m_grid_value(config.grid_points, grid_index);
    cell(config, repetitions, grid_index, |rng| {
        let mut e = sample_uqca(&params, m, rng)?;
        e.m_corrected = match correction {
            Correction::None => None,
            c => Some(c.apply(e.m_tilde)?),
        };
        Ok(e)
    })
}

fn counting_errors(
    config: &SweepConfig,
    repetitions: usize,
    grid_index: usize,
    correction: &Correction,
) -> Result<Vec<f64>> {
    let m = m_grid_value(config.grid_points, grid_index);
    Ok(counting_trials(config, repetitions, grid_index, correction)?
        .into_iter()
        .map(|e| e.m_corrected.unwrap_or(e.m_tilde) - m)
        .collect())
}

/// Reads one record or an array of records.
pub fn load_calibrations(path: &Path) -> Result<Vec<CalibrationRecord>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(CalibrationRecord),
        Many(Vec<CalibrationRecord>),
    }
    let text = fs::read_to_string(path)?;
    Ok(match serde_json::from_str(&text)? {
        OneOrMany::One(r) => vec![r],
        OneOrMany::Many(v) => v,
    })
}

/// One calibration record per `R` in the config, from `base_seed` directly.
pub fn run_calibration(config: &SweepConfig) -> Result<Vec<CalibrationRecord>> {
    config.validate()?;
    config
        .repetitions
        .values()
        .map(|r| calibrate_b(&config.params(r)?, config.n_samples, config.base_seed))
        .collect()
}

/// Tag of the seed derived for calibrations made on the fly, so they never
/// share draws with the evaluation sweep.
pub const FRESH_CALIBRATION_TAG: &str = "calibration-seed";

/// Correction per `R`: closed form for one run; otherwise a matching record
/// from `calibration_path`, or a fresh calibration.
pub fn resolve_corrections(config: &SweepConfig) -> Result<Vec<Correction>> {
    let loaded = match &config.calibration_path {
        Some(p) => Some(load_calibrations(p)?),
        None => None,
    };
    let seed = config.base_seed.child(FRESH_CALIBRATION_TAG, &[]);
    config
        .repetitions
        .values()
        .map(|r| {
            if r == 1 {
                return Ok(Correction::Single(config.size));
            }
            let record = match &loaded {
                Some(records) => records
                    .iter()
                    .find(|c| c.size == config.size && c.repetitions == r)
                    .cloned()
                    .ok_or_else(|| match records.first() {
                        Some(c) => Error::CalibrationMismatch {
                            record_t: c.size,
                            record_r: c.repetitions,
                            sweep_t: config.size,
                            sweep_r: r,
                        },
                        None => Error::Empty("calibration file"),
                    })?,
                None => calibrate_b(&config.params(r)?, config.n_samples.max(2), seed)?,
            };
            record.ensure_matches(config.size, r)?;
            Ok(Correction::Calibrated(record))
        })
        .collect()
}

/// Runs a data sweep. Results depend only on the config, not on thread count.
///
/// With a single `R`, entries follow the grid (φ or m). With an `R` range
/// (`mae-vs-r`, counting sweeps), each entry pools the whole grid for one `R`
/// and its `ground_truth` column holds `R`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let started = Instant::now();
    let grid = config.grid_points;
    let exp = config.experiment;

    let mut calibration = Vec::new();
    let per_r: Vec<Correction> = match exp {
        Experiment::UqcaCorrected => {
            let c = resolve_corrections(config)?;
            calibration = c
                .iter()
                .filter_map(|c| match c {
                    Correction::Calibrated(r) => Some(r.clone()),
                    _ => None,
                })
                .collect();
            c
        }
        _ => config.repetitions.values().map(|_| Correction::None).collect(),
    };

    let errors = |r: usize, k: usize, correction: &Correction| -> Result<Vec<f64>> {
        match exp {
            Experiment::QcaBiasMae | Experiment::UqcaCorrected => counting_errors(config, r, k, correction),
            _ => phase_errors(config, r, k),
        }
    };
    let truth = |k: usize| match exp {
        Experiment::QcaBiasMae | Experiment::UqcaCorrected => m_grid_value(grid, k),
        _ => phi_grid_value(grid, k),
    };

    let entries = match exp {
        Experiment::Calibrate | Experiment::VerifyCircuit => {
            return Err(Error::InvalidParams(format!(
                "{exp} does not produce a bias/MAE series; use its own runner"
            )))
        }
        _ if config.repetitions.is_single() && exp != Experiment::MaeVsR => {
            let r = *config.repetitions.values().start();
            (0..grid)
                .map(|k| BiasMaeEntry::from_errors(truth(k), &errors(r, k, &per_r[0])?))
                .collect::<Result<Vec<_>>>()?
        }
        _ => config
            .repetitions
            .values()
            .zip(&per_r)
            .map(|(r, c)| {
                let mut pooled = Vec::with_capacity(grid * config.n_samples as usize);
                for k in 0..grid {
                    pooled.extend(errors(r, k, c)?);
                }
                BiasMaeEntry::from_errors(r as f64, &pooled)
            })
            .collect::<Result<Vec<_>>>()?,
    };

    Ok(SweepReport {
        config: config.clone(),
        entries,
        metadata: ReportMetadata {
            rng_algorithm: RNG_ALGORITHM.to_string(),
            wall_time: started.elapsed().as_secs_f64(),
            calibration,
        },
    })
}

/// Exact PEA bias and MAE on the same grid, for comparison with a sweep.
pub fn exact_pea_series(size: u64, grid_points: usize) -> Result<Vec<BiasMaeEntry>> {
    let params = PeaParams::with_size(size, 1, ThetaMode::PLAIN)?;
    Ok((0..grid_points)
        .map(|k| crate::phase::exact_bias_mae_pea(&params, phi_grid_value(grid_points, k)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::RSpec;

    fn small(exp: Experiment) -> SweepConfig {
        let mut c = SweepConfig::new(exp);
        c.grid_points = 8;
        c.n_samples = 200;
        c
    }

    #[test]
    fn entry_counts() {
        let r = run_sweep(&small(Experiment::UpeaBiasMae)).unwrap();
        assert_eq!(r.entries.len(), 8);
        assert_eq!(r.entries[3].ground_truth, 3.0 / 8.0);
        assert_eq!(r.entries[3].n_samples, Some(200));

        let mut c = small(Experiment::MaeVsR);
        c.repetitions = RSpec::range(1, 3).unwrap();
        c.n_samples = 10;
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.entries.len(), 3);
        assert_eq!(r.entries[2].ground_truth, 3.0);
        assert_eq!(r.entries[2].n_samples, Some(80));
    }

    #[test]
    fn plain_pea_is_exact_on_the_lattice() {
        let mut c = small(Experiment::PeaBiasMae);
        c.grid_points = 32;
        let r = run_sweep(&c).unwrap();
        // every second point is a lattice phase of T = 16
        for e in r.entries.iter().step_by(2) {
            assert_eq!((e.bias, e.mae), (0.0, 0.0));
        }
    }

    #[test]
    fn same_seed_same_report() {
        let c = small(Experiment::MleBiasMae);
        let a = run_sweep(&c).unwrap();
        let b = run_sweep(&c).unwrap();
        assert_eq!(a.entries, b.entries);
        let mut c2 = c.clone();
        c2.base_seed = crate::sampler::RngSeed(1);
        assert_ne!(run_sweep(&c2).unwrap().entries, a.entries);
    }

    #[test]
    fn counting_sweeps_are_paired() {
        let mut q = small(Experiment::QcaBiasMae);
        q.n_samples = 50;
        let mut u = q.clone();
        u.experiment = Experiment::UqcaCorrected;
        let tq = counting_trials(&q, 1, 2, &Correction::None).unwrap();
        let tu = counting_trials(&u, 1, 2, &Correction::Single(16)).unwrap();
        for (a, b) in tq.iter().zip(&tu) {
            assert_eq!(a.m_tilde, b.m_tilde);
            assert_eq!(b.m_corrected, Some(correct_single(a.m_tilde, 16)));
        }
        let r = run_sweep(&u).unwrap();
        assert!(r.metadata.calibration.is_empty());
        assert_eq!(r.entries.last().unwrap().ground_truth, 1.0);
    }

    #[test]
    fn fresh_calibration_is_recorded() {
        let mut c = small(Experiment::UqcaCorrected);
        c.repetitions = RSpec::single(2).unwrap();
        c.grid_points = 3;
        c.n_samples = 64;
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.metadata.calibration.len(), 1);
        let rec = &r.metadata.calibration[0];
        assert_eq!((rec.size, rec.repetitions), (16, 2));
        assert_eq!(rec.seed, c.base_seed.child(FRESH_CALIBRATION_TAG, &[]));
    }

    #[test]
    fn mismatched_calibration_is_refused() {
        let dir = std::env::temp_dir().join(format!("upea-cal-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cal.json");
        let mut cal = small(Experiment::Calibrate);
        cal.repetitions = RSpec::single(2).unwrap();
        cal.n_samples = 16;
        let records = run_calibration(&cal).unwrap();
        fs::write(&path, serde_json::to_string(&records[0]).unwrap()).unwrap();

        let mut c = small(Experiment::UqcaCorrected);
        c.calibration_path = Some(path.clone());
        c.repetitions = RSpec::single(3).unwrap();
        c.n_samples = 4;
        assert!(matches!(run_sweep(&c), Err(Error::CalibrationMismatch { .. })));
        c.repetitions = RSpec::single(2).unwrap();
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.metadata.calibration, records);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn non_series_experiments_are_rejected() {
        assert!(run_sweep(&small(Experiment::Calibrate)).is_err());
        assert!(run_sweep(&small(Experiment::VerifyCircuit)).is_err());
    }

    #[test]
    fn m_grid_has_exact_endpoints() {
        assert_eq!(m_grid_value(17, 0), 0.0);
        assert_eq!(m_grid_value(17, 16), 1.0);
        assert_eq!(m_grid_value(17, 4), 0.25);
    }
}
