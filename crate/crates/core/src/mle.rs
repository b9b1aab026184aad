//! Maximum-likelihood combination of repeated phase estimates.
//!
//! The likelihood of a candidate phase is the product of outcome kernels
//! `(sin(Tπδ)/(T sin(πδ)))²` over the offsets `δ_j = φ̃_j − φ'`. It is
//! maximized in two stages:
//!
//! 1. a uniform scan of `max(4·T·R, 1024)` candidates, which resolves the
//!    `O(T·R)` oscillations per period;
//! 2. golden-section search inside the brackets of the two best coarse local
//!    maxima, to a bracket width of `1e-12`.
//!
//! The counting variant models each estimate as coming from `+φ` or `−φ`
//! with equal probability and searches `φ' ∈ [0, 1/2]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{pea_kernel, PeaParams, Phase};

/// Log-likelihood contribution of a factor whose kernel is exactly zero.
pub const ZERO_LIKELIHOOD_LOG: f64 = -1e18;

/// Final golden-section bracket width.
pub const REFINE_WIDTH: f64 = 1e-12;

const MIN_GRID_POINTS: usize = 1024;
const REANCHOR_EVERY: usize = 64;
const RESCALE_BELOW: f64 = 1e-250;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub phi_hat: Phase,
    pub log_likelihood: f64,
    pub grid_points: usize,
    pub refine_iterations: u32,
}

fn log_factor(k: f64) -> f64 {
    if k == 0.0 {
        ZERO_LIKELIHOOD_LOG
    } else {
        k.ln()
    }
}

/// `Σ_j log kernel(φ̃_j − phi_cand)`.
pub fn log_likelihood(params: &PeaParams, estimates: &[f64], phi_cand: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Empty("estimates"));
    }
    Ok(phase_log_likelihood(params.size(), estimates, phi_cand))
}

/// `Σ_j log[½·kernel(φ̃_j − φ') + ½·kernel(φ̃_j + φ')]`.
pub fn counting_log_likelihood(params: &PeaParams, estimates: &[f64], phi_cand: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Empty("estimates"));
    }
    Ok(mixture_log_likelihood(params.size(), estimates, phi_cand))
}

fn phase_log_likelihood(size: u64, estimates: &[f64], x: f64) -> f64 {
    estimates
        .iter()
        .map(|e| log_factor(pea_kernel(size, e - x)))
        .sum()
}

fn mixture_log_likelihood(size: u64, estimates: &[f64], x: f64) -> f64 {
    estimates
        .iter()
        .map(|e| log_factor(0.5 * pea_kernel(size, e - x) + 0.5 * pea_kernel(size, e + x)))
        .sum()
}

/// Number of coarse candidates for `repetitions` estimates.
pub fn coarse_grid_points(size: u64, repetitions: usize) -> usize {
    (4 * size as usize * repetitions).max(MIN_GRID_POINTS)
}

/// Maximum-likelihood phase for estimates drawn around a single phase.
pub fn mle_estimate(params: &PeaParams, estimates: &[f64]) -> Result<MleResult> {
    if estimates.is_empty() {
        return Err(Error::Empty("estimates"));
    }
    let size = params.size();
    let points = coarse_grid_points(size, estimates.len());
    let step = 1.0 / points as f64;
    let scan = scan_grid(size, estimates, points, step, Mix::Single);
    let exact = |x: f64| phase_log_likelihood(size, estimates, x);
    let best = refine(&scan, step, Domain::Circle, exact);
    Ok(MleResult {
        phi_hat: Phase::wrapped(best.x),
        log_likelihood: best.value,
        grid_points: points,
        refine_iterations: best.iterations,
    })
}

/// Maximum-likelihood phase in `[0, 1/2]` under the equal `±φ` mixture.
///
/// A single estimate is folded to `min(x, 1 − x)`, the one-run counting
/// estimator; no search is performed in that case.
pub fn mle_estimate_counting(params: &PeaParams, estimates: &[f64]) -> Result<MleResult> {
    let size = params.size();
    match estimates {
        [] => Err(Error::Empty("estimates")),
        [single] => {
            let x = fold_half(*single);
            Ok(MleResult {
                phi_hat: Phase::wrapped(x),
                log_likelihood: mixture_log_likelihood(size, estimates, x),
                grid_points: 0,
                refine_iterations: 0,
            })
        }
        _ => {
            let intervals = coarse_grid_points(size, estimates.len());
            let step = 0.5 / intervals as f64;
            let scan = scan_grid(size, estimates, intervals + 1, step, Mix::PlusMinus);
            let exact = |x: f64| mixture_log_likelihood(size, estimates, x);
            let best = refine(&scan, step, Domain::HalfInterval, exact);
            Ok(MleResult {
                phi_hat: Phase::wrapped(best.x),
                log_likelihood: best.value,
                grid_points: intervals + 1,
                refine_iterations: best.iterations,
            })
        }
    }
}

/// `x` folded onto `[0, 1/2]` by `x ↦ −x`.
pub fn fold_half(x: f64) -> f64 {
    let w = Phase::wrapped(x).value();
    w.min(1.0 - w)
}

#[derive(Clone, Copy, PartialEq)]
enum Mix {
    Single,
    PlusMinus,
}

#[derive(Clone, Copy, PartialEq)]
enum Domain {
    Circle,
    HalfInterval,
}

/// Rotating `e^{iπδ}` and `e^{iTπδ}` along the grid, with `δ = e − k·step`.
struct KernelWalk {
    size: u64,
    origin: f64,
    step: f64,
    a: (f64, f64),
    b: (f64, f64),
    wa: (f64, f64),
    wb: (f64, f64),
}

fn cmul(p: (f64, f64), q: (f64, f64)) -> (f64, f64) {
    (p.0 * q.0 - p.1 * q.1, p.0 * q.1 + p.1 * q.0)
}

fn unit(angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (c, s)
}

impl KernelWalk {
    fn new(size: u64, origin: f64, step: f64, sign: f64) -> Self {
        let t = size as f64;
        let mut w = KernelWalk {
            size,
            origin,
            step: sign * step,
            a: (1.0, 0.0),
            b: (1.0, 0.0),
            wa: unit(-PI * sign * step),
            wb: unit(-PI * t * sign * step),
        };
        w.anchor(0);
        w
    }

    fn delta(&self, k: usize) -> f64 {
        let d = self.origin - k as f64 * self.step;
        d - d.round()
    }

    fn anchor(&mut self, k: usize) {
        let d = self.delta(k);
        self.a = unit(PI * d);
        self.b = unit(PI * self.size as f64 * d);
    }

    /// Kernel at grid index `k`, then advances to `k + 1`.
    fn next(&mut self, k: usize) -> f64 {
        if k.is_multiple_of(REANCHOR_EVERY) && k > 0 {
            self.anchor(k);
        }
        let den = self.a.1;
        let value = if den.abs() < 1e-6 {
            pea_kernel(self.size, self.delta(k))
        } else {
            let r = self.b.1 / (self.size as f64 * den);
            r * r
        };
        self.a = cmul(self.a, self.wa);
        self.b = cmul(self.b, self.wb);
        value
    }
}

/// Approximate log-likelihood at `x_k = k·step`, `k < points`.
fn scan_grid(size: u64, estimates: &[f64], points: usize, step: f64, mix: Mix) -> Vec<f64> {
    let mut logs = vec![0.0; points];
    let mut prods = vec![1.0; points];
    let mut fold = |k: usize, factor: f64| {
        let p = prods[k] * factor;
        if p < RESCALE_BELOW {
            logs[k] += log_factor(p);
            prods[k] = 1.0;
        } else {
            prods[k] = p;
        }
    };
    for &e in estimates {
        let mut minus = KernelWalk::new(size, e, step, 1.0);
        match mix {
            Mix::Single => {
                for k in 0..points {
                    fold(k, minus.next(k));
                }
            }
            Mix::PlusMinus => {
                let mut plus = KernelWalk::new(size, e, step, -1.0);
                for k in 0..points {
                    let m = 0.5 * minus.next(k) + 0.5 * plus.next(k);
                    fold(k, m);
                }
            }
        }
    }
    for (l, p) in logs.iter_mut().zip(prods) {
        *l += log_factor(p);
    }
    logs
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    x: f64,
    value: f64,
    iterations: u32,
}

impl Candidate {
    /// Larger value wins; exact ties go to the smaller phase.
    fn beats(&self, other: &Candidate, domain: Domain) -> bool {
        let key = |c: &Candidate| match domain {
            Domain::Circle => Phase::wrapped(c.x).value(),
            Domain::HalfInterval => c.x,
        };
        self.value > other.value || (self.value == other.value && key(self) < key(other))
    }
}

/// Indices of the two largest local maxima of the scan (best first).
fn top_local_maxima(scan: &[f64], domain: Domain) -> Vec<usize> {
    let n = scan.len();
    let neighbour = |k: usize, offset: isize| -> Option<f64> {
        let j = k as isize + offset;
        match domain {
            Domain::Circle => Some(scan[j.rem_euclid(n as isize) as usize]),
            Domain::HalfInterval => (0..n as isize).contains(&j).then(|| scan[j as usize]),
        }
    };
    let mut best: Option<usize> = None;
    let mut second: Option<usize> = None;
    for k in 0..n {
        let v = scan[k];
        let left_ok = neighbour(k, -1).is_none_or(|l| v >= l);
        let right_ok = neighbour(k, 1).is_none_or(|r| v >= r);
        if !(left_ok && right_ok) {
            continue;
        }
        match best {
            Some(b) if v <= scan[b] => {
                if second.is_none_or(|s| v > scan[s]) {
                    second = Some(k);
                }
            }
            _ => {
                second = best;
                best = Some(k);
            }
        }
    }
    let best = best.unwrap_or_else(|| {
        // flat scan: every point is a plateau
        (0..n).fold(0, |b, k| if scan[k] > scan[b] { k } else { b })
    });
    let mut out = vec![best];
    if let Some(s) = second {
        out.push(s);
    }
    out
}

fn refine<F: Fn(f64) -> f64>(scan: &[f64], step: f64, domain: Domain, f: F) -> Candidate {
    let (lo_bound, hi_bound) = match domain {
        Domain::Circle => (f64::NEG_INFINITY, f64::INFINITY),
        Domain::HalfInterval => (0.0, 0.5),
    };
    let mut winner: Option<Candidate> = None;
    let mut total_iterations = 0;
    for k in top_local_maxima(scan, domain) {
        let centre = k as f64 * step;
        let grid_point = Candidate {
            x: centre,
            value: f(centre),
            iterations: 0,
        };
        let lo = (centre - step).max(lo_bound);
        let hi = (centre + step).min(hi_bound);
        let refined = golden_section_max(&f, lo, hi);
        total_iterations += refined.iterations;
        for c in [grid_point, refined] {
            if winner.is_none_or(|w| c.beats(&w, domain)) {
                winner = Some(c);
            }
        }
    }
    let mut w = winner.expect("at least one candidate");
    w.iterations = total_iterations;
    w
}

fn golden_section_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> Candidate {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > REFINE_WIDTH {
        iterations += 1;
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        if iterations > 200 {
            break;
        }
    }
    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Candidate {
        x,
        value,
        iterations,
    }
}
