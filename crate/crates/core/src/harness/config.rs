use std::fmt;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{PeaParams, ThetaMode};
use crate::sampler::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PeaBiasMae,
    UpeaBiasMae,
    MleBiasMae,
    MaeVsR,
    QcaBiasMae,
    UqcaCorrected,
    Calibrate,
    VerifyCircuit,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::PeaBiasMae,
        Experiment::UpeaBiasMae,
        Experiment::MleBiasMae,
        Experiment::MaeVsR,
        Experiment::QcaBiasMae,
        Experiment::UqcaCorrected,
        Experiment::Calibrate,
        Experiment::VerifyCircuit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PeaBiasMae => "pea-bias-mae",
            Experiment::UpeaBiasMae => "upea-bias-mae",
            Experiment::MleBiasMae => "mle-bias-mae",
            Experiment::MaeVsR => "mae-vs-r",
            Experiment::QcaBiasMae => "qca-bias-mae",
            Experiment::UqcaCorrected => "uqca-corrected",
            Experiment::Calibrate => "calibrate",
            Experiment::VerifyCircuit => "verify-circuit",
        }
    }

    /// Seed stream tag. The two counting sweeps share one so that, for a
    /// given base seed, corrected and uncorrected results come from the same draws.
    pub fn stream_tag(self) -> &'static str {
        match self {
            Experiment::QcaBiasMae | Experiment::UqcaCorrected => "uqca",
            other => other.name(),
        }
    }

    pub fn is_counting(self) -> bool {
        matches!(self, Experiment::QcaBiasMae | Experiment::UqcaCorrected | Experiment::Calibrate)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown experiment '{s}'")))
    }
}

/// One repetition count or an inclusive range, written `3` or `1..16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RSpecRepr", into = "RSpecRepr")]
pub struct RSpec {
    start: usize,
    end: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RSpecRepr {
    Single(usize),
    Text(String),
}

impl RSpec {
    pub fn single(r: usize) -> Result<Self> {
        RSpec::range(r, r)
    }

    pub fn range(start: usize, end: usize) -> Result<Self> {
        if start == 0 || end < start {
            return Err(Error::out_of_range("R", format!("{start}..{end}"), "1 <= start <= end"));
        }
        Ok(RSpec { start, end })
    }

    pub fn is_single(&self) -> bool {
        self.start == self.end
    }

    pub fn values(&self) -> RangeInclusive<usize> {
        self.start..=self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl FromStr for RSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParams(format!("bad R value '{s}': expected N or A..B")))
        };
        match s.split_once("..") {
            Some((a, b)) => RSpec::range(parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => RSpec::single(parse(s)?),
        }
    }
}

impl fmt::Display for RSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single() {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}..{}", self.start, self.end)
        }
    }
}

impl TryFrom<RSpecRepr> for RSpec {
    type Error = Error;

    fn try_from(r: RSpecRepr) -> Result<Self> {
        match r {
            RSpecRepr::Single(n) => RSpec::single(n),
            RSpecRepr::Text(s) => s.parse(),
        }
    }
}

impl From<RSpec> for RSpecRepr {
    fn from(r: RSpec) -> Self {
        if r.is_single() {
            RSpecRepr::Single(r.start)
        } else {
            RSpecRepr::Text(r.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub experiment: Experiment,
    #[serde(rename = "T")]
    pub size: u64,
    #[serde(rename = "R")]
    pub repetitions: RSpec,
    pub grid_points: usize,
    pub n_samples: u64,
    pub theta_mode: ThetaMode,
    pub base_seed: RngSeed,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_path: Option<PathBuf>,
}

pub const DEFAULT_SEED: RngSeed = RngSeed(20_180_611);

impl SweepConfig {
    /// Figure-scale defaults: `T = 16`, 64 grid points, `2^16` samples per point.
    pub fn new(experiment: Experiment) -> Self {
        SweepConfig {
            experiment,
            size: 16,
            repetitions: RSpec { start: 1, end: 1 },
            grid_points: 64,
            n_samples: 1 << 16,
            theta_mode: ThetaMode::FullUnit,
            base_seed: DEFAULT_SEED,
            output_path: None,
            calibration_path: None,
        }
    }

    /// Checks every field combination; the returned error text is meant for the user.
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::out_of_range("grid points", self.grid_points, ">= 2"));
        }
        if self.n_samples < 1 {
            return Err(Error::out_of_range("samples", self.n_samples, ">= 1"));
        }
        PeaParams::with_size(self.size, self.repetitions.start, self.theta_mode)?;
        match self.experiment {
            Experiment::PeaBiasMae | Experiment::UpeaBiasMae if !self.repetitions.is_single() || self.repetitions.start != 1 => {
                Err(Error::InvalidParams(format!(
                    "{} is a single-run experiment; R must be 1 (got {})",
                    self.experiment, self.repetitions
                )))
            }
            Experiment::MleBiasMae if !self.repetitions.is_single() => Err(Error::InvalidParams(
                "mle-bias-mae takes a single R; use mae-vs-r for a range".into(),
            )),
            Experiment::Calibrate if self.n_samples < 2 => {
                Err(Error::out_of_range("calibration samples", self.n_samples, ">= 2"))
            }
            _ => Ok(()),
        }
    }

    /// Phase-estimation parameters for one repetition count.
    pub fn params(&self, repetitions: usize) -> Result<PeaParams> {
        let mode = match self.experiment {
            Experiment::PeaBiasMae => ThetaMode::PLAIN,
            _ => self.theta_mode,
        };
        PeaParams::with_size(self.size, repetitions, mode)
    }
}

/// Named parameter sets reproducing the published figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Bias of PEA vs UPEA over the phase grid.
    Fig3,
    /// MAE over the phase grid.
    Fig4,
    /// MLE with `T = R = 16`.
    Fig5,
    /// MAE against `R ∈ 1..16`.
    Fig6,
    /// Counting with `R = 3`, corrected.
    Fig7,
    /// Counting correction cost over `R ∈ 1..4`.
    Fig8,
}

impl Preset {
    pub fn default_experiment(self) -> Experiment {
        match self {
            Preset::Fig3 | Preset::Fig4 => Experiment::UpeaBiasMae,
            Preset::Fig5 => Experiment::MleBiasMae,
            Preset::Fig6 => Experiment::MaeVsR,
            Preset::Fig7 | Preset::Fig8 => Experiment::UqcaCorrected,
        }
    }

    /// Preset parameters applied to `experiment`.
    pub fn config(self, experiment: Experiment) -> SweepConfig {
        let mut c = SweepConfig::new(experiment);
        c.repetitions = match self {
            Preset::Fig3 | Preset::Fig4 => RSpec { start: 1, end: 1 },
            Preset::Fig5 => RSpec { start: 16, end: 16 },
            Preset::Fig6 => RSpec { start: 1, end: 16 },
            Preset::Fig7 => RSpec { start: 3, end: 3 },
            Preset::Fig8 => RSpec { start: 1, end: 4 },
        };
        c
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig3" => Preset::Fig3,
            "fig4" => Preset::Fig4,
            "fig5" => Preset::Fig5,
            "fig6" => Preset::Fig6,
            "fig7" => Preset::Fig7,
            "fig8" => Preset::Fig8,
            _ => return Err(Error::InvalidParams(format!("unknown preset '{s}' (fig3..fig8)"))),
        })
    }
}
