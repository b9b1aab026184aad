//! Circular phase arithmetic and the exact outcome distributions of
//! QFT-based phase estimation, with and without a random classical shift.
//!
//! A phase is a fraction of a full turn. Every public function that takes a
//! phase-valued `f64` accepts any finite real and reduces it modulo one.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Largest supported register size. The sampler keeps a `2^t`-entry table per draw.
pub const MAX_REGISTER_QUBITS: u32 = 20;

/// A point on the unit circle, stored in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Phase(f64);

impl Phase {
    pub const ZERO: Phase = Phase(0.0);

    pub fn new(x: f64) -> Result<Self> {
        wrap_phase(x)
    }

    /// Wraps without the finiteness check. Non-finite input yields NaN.
    pub(crate) fn wrapped(x: f64) -> Self {
        let r = x - x.floor();
        // x - floor(x) rounds to 1.0 for tiny negative x.
        Phase(if r >= 1.0 { 0.0 } else { r })
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Phase {
    type Error = Error;
    fn try_from(x: f64) -> Result<Self> {
        wrap_phase(x)
    }
}

impl From<Phase> for f64 {
    fn from(p: Phase) -> f64 {
        p.0
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Reduces `x` modulo one into `[0, 1)`.
pub fn wrap_phase(x: f64) -> Result<Phase> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(Phase::wrapped(x))
}

/// Signed circular distance from `b` to the representative of `a` nearest to `b`.
///
/// The result lies in `(-1/2, 1/2]`; the antipodal tie resolves to `+1/2`.
pub fn circ_dist(a: Phase, b: Phase) -> f64 {
    signed_offset(a.0 - b.0)
}

/// `x` reduced to `(-1/2, 1/2]`.
pub(crate) fn signed_offset(x: f64) -> f64 {
    let r = Phase::wrapped(x).0;
    if r > 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// How the classical shift θ is chosen for each run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ThetaMode {
    /// θ ~ U[0, 1).
    FullUnit,
    /// θ ~ U[0, 1/T); the outcome distribution has period 1/T in the phase.
    OnePeriod,
    /// A fixed θ in `[0, 1)`. `Fixed(0.0)` is plain phase estimation.
    Fixed(f64),
}

impl ThetaMode {
    pub const PLAIN: ThetaMode = ThetaMode::Fixed(0.0);

    pub fn is_plain(self) -> bool {
        matches!(self, ThetaMode::Fixed(x) if x == 0.0)
    }

    fn validate(self) -> Result<Self> {
        match self {
            ThetaMode::Fixed(x) if !(0.0..1.0).contains(&x) => {
                Err(Error::out_of_range("fixed theta", x, "[0, 1)"))
            }
            m => Ok(m),
        }
    }
}

impl fmt::Display for ThetaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaMode::FullUnit => f.write_str("full"),
            ThetaMode::OnePeriod => f.write_str("period"),
            ThetaMode::Fixed(x) => write!(f, "fixed:{x}"),
        }
    }
}

impl FromStr for ThetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ThetaMode::FullUnit),
            "period" => Ok(ThetaMode::OnePeriod),
            _ => {
                let x = s
                    .strip_prefix("fixed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidParams(format!(
                            "theta mode `{s}` is not one of full, period, fixed:<x>"
                        ))
                    })?;
                ThetaMode::Fixed(x).validate()
            }
        }
    }
}

impl TryFrom<String> for ThetaMode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ThetaMode> for String {
    fn from(m: ThetaMode) -> String {
        m.to_string()
    }
}

/// Register size, repetition count and θ policy of a (U)PEA experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeaParams {
    t: u32,
    repetitions: usize,
    theta_mode: ThetaMode,
}

impl PeaParams {
    pub fn new(t: u32, repetitions: usize, theta_mode: ThetaMode) -> Result<Self> {
        if !(1..=MAX_REGISTER_QUBITS).contains(&t) {
            return Err(Error::out_of_range(
                "register qubits t",
                t,
                format!("1..={MAX_REGISTER_QUBITS}"),
            ));
        }
        if repetitions == 0 {
            return Err(Error::out_of_range("repetitions R", 0, ">= 1"));
        }
        Ok(PeaParams {
            t,
            repetitions,
            theta_mode: theta_mode.validate()?,
        })
    }

    /// Builds parameters from `T = 2^t` rather than `t`.
    pub fn with_size(size: u64, repetitions: usize, theta_mode: ThetaMode) -> Result<Self> {
        Self::new(register_qubits(size)?, repetitions, theta_mode)
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// `T = 2^t`.
    pub fn size(&self) -> u64 {
        1u64 << self.t
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
    }

    pub fn theta_mode(&self) -> ThetaMode {
        self.theta_mode
    }

    pub fn with_repetitions(self, repetitions: usize) -> Result<Self> {
        Self::new(self.t, repetitions, self.theta_mode)
    }

    pub fn with_theta_mode(self, theta_mode: ThetaMode) -> Result<Self> {
        Self::new(self.t, self.repetitions, theta_mode)
    }
}

/// `t` such that `size == 2^t`, for `size >= 2`.
pub fn register_qubits(size: u64) -> Result<u32> {
    if size < 2 || !size.is_power_of_two() {
        return Err(Error::out_of_range("register size T", size, "a power of two >= 2"));
    }
    Ok(size.trailing_zeros())
}

/// `(sin(Tπδ) / (T sin(πδ)))²`, continuous at integer `δ` where it equals 1.
///
/// Periodic in `δ` with period one; it is the probability of reading outcome
/// `s` when `δ = s/T − φ`.
pub fn pea_kernel(size: u64, delta: f64) -> f64 {
    let ratio = dirichlet_ratio(size as f64, delta);
    ratio * ratio
}

fn dirichlet_ratio(size: f64, delta: f64) -> f64 {
    let d = delta - delta.round();
    reduced_ratio(size, d, size * d)
}

/// `sin(πe) / (T sin(πd))` for `d ∈ [−1/2, 1/2]` and `e = T·d`.
fn reduced_ratio(size: f64, d: f64, e: f64) -> f64 {
    let x = PI * d;
    let sx = x.sin();
    if sx.abs() < 1e-8 {
        // sin(Tx)/(T sin x) = sinc(Tx) · x/sin(x);  x/sin(x) = 1 + x²/6 + O(x⁴).
        let y = PI * e;
        let sinc = if y.abs() < 1e-4 {
            1.0 - y * y / 6.0
        } else {
            sin_pi(e) / y
        };
        sinc * (1.0 + x * x / 6.0)
    } else {
        sin_pi(e) / (size * sx)
    }
}

/// `sin(πe)` with the argument reduced exactly first.
fn sin_pi(e: f64) -> f64 {
    let k = e.round();
    let v = (PI * (e - k)).sin();
    if k.rem_euclid(2.0) == 0.0 {
        v
    } else {
        -v
    }
}

/// Kernel at `δ = s/T − φ`, reduced on the `T`-scaled axis: `T·φ` is exact
/// for a power-of-two `T`, so no rounding of `δ` is amplified by `T`.
pub(crate) fn outcome_kernel(size: u64, s: u64, phi: f64) -> f64 {
    let t = size as f64;
    let u = s as f64 - (t * phi).rem_euclid(t);
    let e = u - t * (u / t).round();
    let ratio = reduced_ratio(t, e / t, e);
    ratio * ratio
}

/// Exact probability mass function over outcomes `s ∈ {0, …, T−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistTable {
    pub params: PeaParams,
    pub probs: Vec<f64>,
}

impl DistTable {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Probability of outcome `s` for true phase `phi`.
pub fn pea_pmf_at(params: &PeaParams, s: u64, phi: f64) -> Result<f64> {
    let size = params.size();
    if s >= size {
        return Err(Error::out_of_range("outcome s", s, format!("0..{size}")));
    }
    Ok(outcome_kernel(size, s, phi))
}

pub fn pea_pmf(params: &PeaParams, phi: f64) -> DistTable {
    let size = params.size();
    let probs = (0..size)
        .map(|s| outcome_kernel(size, s, phi))
        .collect();
    DistTable {
        params: *params,
        probs,
    }
}

/// Density of the shifted-and-corrected estimate `φ̃` given `φ`:
/// `sin²(Tπδ) / (T sin²(πδ))` with `δ = φ̃ − φ`, equal to `T` at `δ ∈ ℤ`.
pub fn upea_pdf(params: &PeaParams, phi_tilde: f64, phi: f64) -> f64 {
    upea_density(params.size(), phi_tilde - phi)
}

pub(crate) fn upea_density(size: u64, delta: f64) -> f64 {
    size as f64 * pea_kernel(size, delta)
}

/// Bias and mean absolute error of an estimator at one ground-truth value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasMaeEntry {
    pub ground_truth: f64,
    pub bias: f64,
    pub mae: f64,
    pub stderr_bias: Option<f64>,
    pub stderr_mae: Option<f64>,
    pub n_samples: Option<u64>,
}

impl BiasMaeEntry {
    pub(crate) fn exact(ground_truth: f64, bias: f64, mae: f64) -> Self {
        BiasMaeEntry {
            ground_truth,
            bias,
            mae,
            stderr_bias: None,
            stderr_mae: None,
            n_samples: None,
        }
    }
}

fn pea_bias_mae_for_size(size: u64, phi: f64) -> (f64, f64) {
    let truth = Phase::wrapped(phi);
    let mut bias = 0.0;
    let mut mae = 0.0;
    for s in 0..size {
        let est = s as f64 / size as f64;
        let p = outcome_kernel(size, s, phi);
        let d = circ_dist(Phase(est), truth);
        bias += d * p;
        mae += d.abs() * p;
    }
    (bias, mae)
}

/// Exact bias and MAE of single-shot plain phase estimation at `phi`.
pub fn exact_bias_mae_pea(params: &PeaParams, phi: f64) -> BiasMaeEntry {
    let (bias, mae) = pea_bias_mae_for_size(params.size(), phi);
    BiasMaeEntry::exact(Phase::wrapped(phi).0, bias, mae)
}

/// Relative tolerance of the bias/MAE period integrals.
pub const QUADRATURE_TOL: f64 = 1e-8;

/// MAE of single-shot UPEA: the average of the plain-PEA MAE over one period.
/// Independent of the true phase.
pub fn exact_mae_upea(params: &PeaParams) -> Result<f64> {
    upea_mae_for_size(params.size())
}

/// [`exact_mae_upea`] for an arbitrary power-of-two register size, including 1.
pub fn upea_mae_for_size(size: u64) -> Result<f64> {
    if size == 0 || !size.is_power_of_two() {
        return Err(Error::out_of_range("register size T", size, "a power of two"));
    }
    quadrature::periodic_simpson(
        |theta| pea_bias_mae_for_size(size, theta).1,
        -0.5,
        0.5,
        lattice_level(size),
        QUADRATURE_TOL,
    )
}

/// Integral of the plain-PEA bias over one period; zero when UPEA is unbiased.
pub fn upea_bias_integral(params: &PeaParams) -> Result<f64> {
    let size = params.size();
    quadrature::periodic_simpson(
        |theta| pea_bias_mae_for_size(size, theta).0,
        -0.5,
        0.5,
        lattice_level(size),
        QUADRATURE_TOL,
    )
}

// Start the grid at 4T panels so every kink at k/T is a node.
fn lattice_level(size: u64) -> u32 {
    size.trailing_zeros() + 2
}
