//! Statevector-vs-analytic equivalence checks.

use rand::Rng;
use serde::Serialize;

use crate::counting::{phi_from_m, CountingInstance};
use crate::error::{Error, Result};
use crate::phase::{pea_pmf, PeaParams, ThetaMode};
use crate::sampler::RngSeed;
use crate::statevector::{grover_pea_pmf, pea_circuit_pmf_with, ThetaLadder};

pub const VERIFY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    /// PEA checks run for `t = 1..=max_pea_t`.
    pub max_pea_t: u32,
    pub phis_per_t: usize,
    pub thetas_per_phi: usize,
    /// Grover checks run for every `t ≤ max_grover_t`, `n ≤ max_domain_n` and `M ∈ 0..=2^n`.
    pub max_grover_t: u32,
    pub max_domain_n: u32,
    pub seed: RngSeed,
    /// Swapped out only by negative-control tests.
    pub ladder: ThetaLadder,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_pea_t: 6,
            phis_per_t: 32,
            thetas_per_phi: 8,
            max_grover_t: 5,
            max_domain_n: 4,
            seed: RngSeed(0x5eed),
            ladder: ThetaLadder::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn analytic(t: u32, phi: f64) -> Result<Vec<f64>> {
    Ok(pea_pmf(&PeaParams::new(t, 1, ThetaMode::PLAIN)?, phi).probs)
}

fn check(name: String, deviations: Vec<f64>) -> CheckResult {
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    CheckResult {
        name,
        cases: deviations.len(),
        max_deviation,
        passed: max_deviation < VERIFY_TOLERANCE,
    }
}

pub fn run_verify_circuit(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.max_pea_t > 6 {
        return Err(Error::out_of_range("PEA check t", config.max_pea_t, "<= 6"));
    }
    if config.max_grover_t > 5 || config.max_domain_n > 4 {
        return Err(Error::out_of_range(
            "Grover check (t, n)",
            format!("({}, {})", config.max_grover_t, config.max_domain_n),
            "t <= 5, n <= 4",
        ));
    }
    let mut checks = Vec::new();

    for t in 1..=config.max_pea_t {
        let mut rng = config.seed.stream("verify-pea", &[u64::from(t)]);
        let mut dev = Vec::new();
        for _ in 0..config.phis_per_t {
            let phi: f64 = rng.random();
            for _ in 0..config.thetas_per_phi {
                let theta: f64 = rng.random();
                let pmf = pea_circuit_pmf_with(t, phi, theta, config.ladder)?;
                dev.push(pmf.max_deviation(&analytic(t, phi + theta)?));
            }
        }
        checks.push(check(format!("pea t={t}"), dev));
    }

    for t in 1..=config.max_grover_t {
        for n in 1..=config.max_domain_n {
            let mut rng = config.seed.stream("verify-grover", &[u64::from(t), u64::from(n)]);
            let mut dev = Vec::new();
            for count in 0..=1u64 << n {
                let instance = CountingInstance::with_count(n, count)?;
                let phi = phi_from_m(instance.fraction())?.value();
                for theta in [0.0, rng.random::<f64>()] {
                    let plus = analytic(t, phi + theta)?;
                    let minus = analytic(t, -phi + theta)?;
                    let mix: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| 0.5 * (a + b)).collect();
                    dev.push(grover_pea_pmf(t, &instance, theta)?.max_deviation(&mix));
                }
            }
            checks.push(check(format!("grover t={t} n={n}"), dev));
        }
    }

    Ok(VerifyReport {
        tolerance: VERIFY_TOLERANCE,
        checks,
    })
}
