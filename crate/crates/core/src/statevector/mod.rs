//! Dense statevector simulation, used as an oracle for the analytic
//! distributions in [`crate::phase`].
//!
//! Wire convention: little-endian. Qubit `q` is bit `q` of the basis index, so
//! a register `[q0, q1, …]` reads out `s = Σ bit(q_i)·2^i`.

mod circuits;
mod qft;

pub use circuits::{grover_pea_pmf, pea_circuit_pmf, pea_circuit_pmf_with, GroverOperator, ThetaLadder};
pub use qft::{inverse_qft, qft};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest state the simulator will allocate.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::out_of_range(
                "qubit count",
                num_qubits,
                format!("1..={MAX_QUBITS}"),
            ));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::out_of_range(
                "amplitude count",
                len,
                "a power of two >= 2",
            ));
        }
        Ok(StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndex {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::DuplicateQubit(a));
        }
        Ok(())
    }

    /// Applies the 2×2 matrix `[[m00, m01], [m10, m11]]` to `qubit`.
    fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        self.check(qubit)?;
        let bit = 1usize << qubit;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_x(&mut self, qubit: usize) -> Result<()> {
        self.check(qubit)?;
        let bit = 1usize << qubit;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                self.amplitudes.swap(i, i | bit);
            }
        }
        Ok(())
    }

    pub fn apply_h(&mut self, qubit: usize) -> Result<()> {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(qubit, [[h, h], [h, -h]])
    }

    /// `Rz(angle) = diag(e^{−i·angle/2}, e^{i·angle/2})`: relative phase `e^{i·angle}` on `|1⟩`.
    pub fn apply_rz(&mut self, qubit: usize, angle: f64) -> Result<()> {
        let zero = Complex64::new(0.0, 0.0);
        self.apply_single(
            qubit,
            [
                [Complex64::from_polar(1.0, -angle / 2.0), zero],
                [zero, Complex64::from_polar(1.0, angle / 2.0)],
            ],
        )
    }

    /// `diag(1, e^{i·angle})`.
    pub fn apply_phase(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.check(qubit)?;
        let bit = 1usize << qubit;
        let w = Complex64::from_polar(1.0, angle);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= w;
            }
        }
        Ok(())
    }

    /// Multiplies `|11⟩` of (`control`, `target`) by `e^{i·angle}`.
    pub fn apply_controlled_phase(&mut self, control: usize, target: usize, angle: f64) -> Result<()> {
        self.check_pair(control, target)?;
        let mask = (1usize << control) | (1usize << target);
        let w = Complex64::from_polar(1.0, angle);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= w;
            }
        }
        Ok(())
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amplitudes.len() {
            if i & ba != 0 && i & bb == 0 {
                self.amplitudes.swap(i, (i & !ba) | bb);
            }
        }
        Ok(())
    }

    /// Negates every amplitude whose `width`-bit field starting at `offset`
    /// satisfies `predicate`, optionally only where `control` is set.
    pub fn apply_conditional_sign<P>(
        &mut self,
        control: Option<usize>,
        offset: usize,
        width: usize,
        predicate: P,
    ) -> Result<()>
    where
        P: Fn(u64) -> bool,
    {
        if width == 0 || offset + width > self.num_qubits {
            return Err(Error::out_of_range(
                "qubit field",
                format!("{offset}..{}", offset + width),
                format!("within 0..{}", self.num_qubits),
            ));
        }
        if let Some(c) = control {
            self.check(c)?;
            if (offset..offset + width).contains(&c) {
                return Err(Error::DuplicateQubit(c));
            }
        }
        let cmask = control.map_or(0, |c| 1usize << c);
        let field = (1usize << width) - 1;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & cmask == cmask && predicate(((i >> offset) & field) as u64) {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Born-rule distribution of the integer read from `register`
    /// (`register[0]` least significant).
    pub fn marginal(&self, register: &[usize]) -> Result<MeasurementPmf> {
        for (i, &q) in register.iter().enumerate() {
            self.check(q)?;
            if register[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        let mut probs = vec![0.0; 1 << register.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let s = register
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &q)| acc | (((i >> q) & 1) << k));
            probs[s] += a.norm_sqr();
        }
        Ok(MeasurementPmf {
            register_qubits: register.to_vec(),
            probs,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPmf {
    pub register_qubits: Vec<usize>,
    pub probs: Vec<f64>,
}

impl MeasurementPmf {
    /// Largest elementwise `|p_s − q_s|`.
    pub fn max_deviation(&self, other: &[f64]) -> f64 {
        assert_eq!(self.probs.len(), other.len(), "pmf lengths differ");
        self.probs
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
