//! Property checks shared by the proptest suite and the acceptance runner.
//! Each returns `Err(description)` on violation.

#![allow(dead_code)]

use upea_core::harness::{csv_string, run_sweep, Experiment, RSpec, SweepConfig};
use upea_core::mle::{log_likelihood, mle_estimate};
use upea_core::{
    circ_dist, exact_bias_mae_pea, pea_pmf, run_batch, PeaParams, Phase, RngSeed, ThetaMode,
};

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    circ_dist(Phase::new(a).unwrap(), Phase::new(b).unwrap()).abs()
}

pub const PMF_NORMALIZATION_TOL: f64 = 1e-12;
pub const BIAS_ODDNESS_TOL: f64 = 1e-12;
pub const SHIFT_EQUIVARIANCE_TOL: f64 = 1e-9;
pub const BRUTE_FORCE_TOL: f64 = 2e-6;
pub const BRUTE_FORCE_STEP: f64 = 1e-6;

pub fn pmf_normalization(t: u32, phi: f64) -> Check {
    let table = pea_pmf(&PeaParams::new(t, 1, ThetaMode::PLAIN).unwrap(), phi);
    let total = table.total();
    ensure((total - 1.0).abs() <= PMF_NORMALIZATION_TOL, || {
        format!("t={t} phi={phi}: total {total}")
    })?;
    ensure(table.probs.iter().all(|&p| p >= 0.0), || format!("t={t} phi={phi}: negative mass"))
}

pub fn bias_oddness(t: u32, phi: f64) -> Check {
    let p = PeaParams::new(t, 1, ThetaMode::PLAIN).unwrap();
    let a = exact_bias_mae_pea(&p, phi);
    let b = exact_bias_mae_pea(&p, -phi);
    ensure((a.bias + b.bias).abs() <= BIAS_ODDNESS_TOL, || {
        format!("t={t} phi={phi}: B(phi)={} B(-phi)={}", a.bias, b.bias)
    })?;
    ensure((a.mae - b.mae).abs() <= BIAS_ODDNESS_TOL, || {
        format!("t={t} phi={phi}: M(phi)={} M(-phi)={}", a.mae, b.mae)
    })
}

pub fn circ_dist_wraparound(a: f64, b: f64, k: i32) -> Check {
    let base = circ_dist(Phase::new(a).unwrap(), Phase::new(b).unwrap());
    let shifted = circ_dist(Phase::new(a + f64::from(k)).unwrap(), Phase::new(b).unwrap());
    ensure(base > -0.5 && base <= 0.5, || format!("circ_dist({a}, {b}) = {base} outside (-1/2, 1/2]"))?;
    ensure(circular_gap(base, shifted) <= 1e-12, || {
        format!("circ_dist({a}+{k}, {b}) = {shifted} vs {base}")
    })?;
    let direct = (a - b).rem_euclid(1.0);
    let shortest = direct.min(1.0 - direct);
    ensure((base.abs() - shortest).abs() <= 1e-12, || {
        format!("|circ_dist({a}, {b})| = {} but shortest arc is {shortest}", base.abs())
    })
}

fn batch(seed: u64, t: u32, r: usize, phi: f64) -> (PeaParams, Vec<f64>) {
    let p = PeaParams::new(t, r, ThetaMode::FullUnit).unwrap();
    let est = run_batch(&p, phi, &mut RngSeed(seed).rng()).estimates();
    (p, est)
}

/// `mle(x + c) = mle(x) + c`, except where the likelihood has two exactly
/// equal peaks (generic for `R = 2`: the product of two even kernels is
/// symmetric about the estimates' midpoint) and the smaller-phase tie rule
/// picks a different one after the shift.
pub fn mle_shift_equivariance(seed: u64, r: usize, phi: f64, shift: f64) -> Check {
    let (p, est) = batch(seed, 4, r, phi);
    let shifted: Vec<f64> = est.iter().map(|e| (e + shift).rem_euclid(1.0)).collect();
    let a = mle_estimate(&p, &est).unwrap().phi_hat.value();
    let b = mle_estimate(&p, &shifted).unwrap().phi_hat.value();
    let moved = (a + shift).rem_euclid(1.0);
    let gap = circular_gap(b, moved);
    if gap <= SHIFT_EQUIVARIANCE_TOL {
        return Ok(());
    }
    let ll_b = log_likelihood(&p, &shifted, b).unwrap();
    let ll_moved = log_likelihood(&p, &shifted, moved).unwrap();
    ensure((ll_b - ll_moved).abs() <= SHIFT_EQUIVARIANCE_TOL * ll_b.abs().max(1.0), || {
        format!(
            "R={r} phi={phi} shift={shift}: mle(x+c)={b}, mle(x)+c={moved} (gap {gap:e}), \
             log-likelihoods {ll_b} vs {ll_moved} are not a tie"
        )
    })
}

/// Argmax of the exact log-likelihood over a uniform grid of `BRUTE_FORCE_STEP`.
pub fn brute_force_argmax(p: &PeaParams, est: &[f64]) -> f64 {
    let n = (1.0 / BRUTE_FORCE_STEP).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..n {
        let x = i as f64 * BRUTE_FORCE_STEP;
        let ll = log_likelihood(p, est, x).unwrap();
        if ll > best.0 {
            best = (ll, x);
        }
    }
    best.1
}

pub fn mle_brute_force(seed: u64, r: usize, phi: f64) -> Check {
    let (p, est) = batch(seed, 4, r, phi);
    let got = mle_estimate(&p, &est).unwrap();
    let brute = brute_force_argmax(&p, &est);
    let gap = circular_gap(got.phi_hat.value(), brute);
    if gap <= BRUTE_FORCE_TOL {
        return Ok(());
    }
    // a distant argmax is only acceptable as an exact tie in likelihood
    let ll_brute = log_likelihood(&p, &est, brute).unwrap();
    ensure(got.log_likelihood >= ll_brute, || {
        format!(
            "R={r} phi={phi}: mle {} vs brute force {brute} (gap {gap:e}, ll {} < {ll_brute})",
            got.phi_hat.value(),
            got.log_likelihood
        )
    })
}

/// Small configs, one per data experiment, for the thread-count check.
pub fn determinism_configs() -> Vec<SweepConfig> {
    [
        (Experiment::PeaBiasMae, "1"),
        (Experiment::UpeaBiasMae, "1"),
        (Experiment::MleBiasMae, "4"),
        (Experiment::MaeVsR, "1..3"),
        (Experiment::QcaBiasMae, "1..2"),
        (Experiment::UqcaCorrected, "2"),
    ]
    .into_iter()
    .map(|(e, r)| {
        let mut c = SweepConfig::new(e);
        c.repetitions = r.parse::<RSpec>().unwrap();
        c.grid_points = 5;
        c.n_samples = 40;
        c.base_seed = RngSeed(77);
        c
    })
    .collect()
}

fn csv_with_threads(config: &SweepConfig, threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| csv_string(&run_sweep(config).unwrap().entries).unwrap())
}

pub fn parallel_determinism(config: &SweepConfig) -> Check {
    let one = csv_with_threads(config, 1);
    for threads in [2, 5] {
        let many = csv_with_threads(config, threads);
        ensure(one == many, || {
            format!("{}: CSV differs between 1 and {threads} threads", config.experiment)
        })?;
    }
    Ok(())
}
