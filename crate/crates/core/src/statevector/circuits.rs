use std::f64::consts::TAU;

use super::{inverse_qft, MeasurementPmf, StateVector};
use crate::counting::CountingInstance;
use crate::error::{Error, Result};

pub const MAX_PEA_QUBITS: u32 = 12;
pub const MAX_GROVER_REGISTER: u32 = 8;
pub const MAX_GROVER_DOMAIN: u32 = 6;

/// Angles of the Rz shift ladder. Only `Standard` is a correct shift; the
/// other variant exists so verification can be shown to catch a wrong ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaLadder {
    /// `2π·2^k·θ` on register qubit `k`.
    #[default]
    Standard,
    /// `π·2^k·θ`: off by a factor of two.
    HalfAngle,
}

impl ThetaLadder {
    fn angle(self, k: u32, theta: f64) -> f64 {
        let a = TAU * (1u64 << k) as f64 * theta;
        match self {
            ThetaLadder::Standard => a,
            ThetaLadder::HalfAngle => a / 2.0,
        }
    }
}

fn check_t(t: u32, max: u32) -> Result<()> {
    if !(1..=max).contains(&t) {
        return Err(Error::out_of_range("register qubits t", t, format!("1..={max}")));
    }
    Ok(())
}

/// Hadamards and the θ ladder on register qubits `0..t`.
fn prepare_register(state: &mut StateVector, t: u32, theta: f64, ladder: ThetaLadder) -> Result<()> {
    for k in 0..t {
        state.apply_h(k as usize)?;
        state.apply_rz(k as usize, ladder.angle(k, theta))?;
    }
    Ok(())
}

fn read_register(mut state: StateVector, t: u32) -> Result<MeasurementPmf> {
    let register: Vec<usize> = (0..t as usize).collect();
    inverse_qft(&mut state, &register)?;
    state.marginal(&register)
}

/// Exact outcome distribution of the shifted phase-estimation circuit with
/// `U = diag(1, e^{2πiφ})` acting on its eigenstate `|1⟩`.
pub fn pea_circuit_pmf(t: u32, phi: f64, theta: f64) -> Result<MeasurementPmf> {
    pea_circuit_pmf_with(t, phi, theta, ThetaLadder::Standard)
}

pub fn pea_circuit_pmf_with(t: u32, phi: f64, theta: f64, ladder: ThetaLadder) -> Result<MeasurementPmf> {
    check_t(t, MAX_PEA_QUBITS)?;
    if !phi.is_finite() {
        return Err(Error::NonFinite(phi));
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite(theta));
    }
    let target = t as usize;
    let mut state = StateVector::new(target + 1)?;
    state.apply_x(target)?;
    prepare_register(&mut state, t, theta, ladder)?;
    for k in 0..t {
        // controlled-U^{2^k}
        state.apply_controlled_phase(k as usize, target, TAU * (1u64 << k) as f64 * phi)?;
    }
    read_register(state, t)
}

/// `G = D·O` on an `n`-qubit field starting at `offset`: `O` flips the sign of
/// marked items, `D = 2|u⟩⟨u| − I`.
pub struct GroverOperator<'a> {
    instance: &'a CountingInstance,
    offset: usize,
}

impl<'a> GroverOperator<'a> {
    pub fn new(instance: &'a CountingInstance, offset: usize) -> Self {
        GroverOperator { instance, offset }
    }

    fn width(&self) -> usize {
        self.instance.n() as usize
    }

    fn oracle(&self, state: &mut StateVector, control: Option<usize>) -> Result<()> {
        state.apply_conditional_sign(control, self.offset, self.width(), |x| self.instance.is_marked(x))
    }

    fn diffusion(&self, state: &mut StateVector, control: Option<usize>) -> Result<()> {
        let qubits = self.offset..self.offset + self.width();
        // uncontrolled H layers cancel wherever the reflection is not applied
        for q in qubits.clone() {
            state.apply_h(q)?;
        }
        state.apply_conditional_sign(control, self.offset, self.width(), |x| x != 0)?;
        for q in qubits {
            state.apply_h(q)?;
        }
        Ok(())
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.apply_controlled(state, None)
    }

    /// `Gᵀ = O·D`; `G` is real, so this is also its inverse.
    pub fn apply_transpose(&self, state: &mut StateVector) -> Result<()> {
        self.diffusion(state, None)?;
        self.oracle(state, None)
    }

    /// Applies `G` only on the branch where `control` (if any) is `|1⟩`.
    pub fn apply_controlled(&self, state: &mut StateVector, control: Option<usize>) -> Result<()> {
        self.oracle(state, control)?;
        self.diffusion(state, control)
    }
}

/// Exact register distribution of shifted phase estimation on the Grover
/// iterate, started from the uniform superposition of the domain.
pub fn grover_pea_pmf(t: u32, instance: &CountingInstance, theta: f64) -> Result<MeasurementPmf> {
    check_t(t, MAX_GROVER_REGISTER)?;
    if instance.n() > MAX_GROVER_DOMAIN {
        return Err(Error::out_of_range(
            "domain qubits n",
            instance.n(),
            format!("<= {MAX_GROVER_DOMAIN}"),
        ));
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite(theta));
    }
    let offset = t as usize;
    let mut state = StateVector::new(offset + instance.n() as usize)?;
    for q in offset..offset + instance.n() as usize {
        state.apply_h(q)?;
    }
    prepare_register(&mut state, t, theta, ThetaLadder::Standard)?;
    let g = GroverOperator::new(instance, offset);
    for k in 0..t {
        for _ in 0..1u64 << k {
            g.apply_controlled(&mut state, Some(k as usize))?;
        }
    }
    read_register(state, t)
}
