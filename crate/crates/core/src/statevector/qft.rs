use std::f64::consts::PI;

use super::StateVector;
use crate::error::{Error, Result};

fn check_register(state: &StateVector, qubits: &[usize]) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        state.check(q)?;
        if qubits[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// `|x⟩ ↦ T^{-1/2} Σ_y e^{2πixy/T} |y⟩` on `qubits` (`qubits[0]` least significant).
pub fn qft(state: &mut StateVector, qubits: &[usize]) -> Result<()> {
    check_register(state, qubits)?;
    let t = qubits.len();
    for i in (0..t).rev() {
        state.apply_h(qubits[i])?;
        for j in (0..i).rev() {
            state.apply_controlled_phase(qubits[j], qubits[i], PI / (1u64 << (i - j)) as f64)?;
        }
    }
    for i in 0..t / 2 {
        state.apply_swap(qubits[i], qubits[t - 1 - i])?;
    }
    Ok(())
}

/// Exact inverse of [`qft`]: the gate sequence reversed with conjugated phases.
pub fn inverse_qft(state: &mut StateVector, qubits: &[usize]) -> Result<()> {
    check_register(state, qubits)?;
    let t = qubits.len();
    for i in 0..t / 2 {
        state.apply_swap(qubits[i], qubits[t - 1 - i])?;
    }
    for i in 0..t {
        for j in 0..i {
            state.apply_controlled_phase(qubits[j], qubits[i], -PI / (1u64 << (i - j)) as f64)?;
        }
        state.apply_h(qubits[i])?;
    }
    Ok(())
}
