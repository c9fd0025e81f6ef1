//! Dense statevector simulator.
//!
//! States are plain amplitude vectors of length `2^q`. Qubit 0 is the most
//! significant bit of the amplitude index, so the first factor of a tensor
//! product keeps the high-order positions.
//!
//! Every public operation takes its inputs by reference and returns a new
//! value; the `*_in_place` variants exist for hot loops that own their state.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

/// Default ceiling on the number of qubits a single state may hold.
pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Environment variable overriding [`DEFAULT_MAX_QUBITS`].
pub const MAX_QUBITS_ENV: &str = "DQGNN_MAX_QUBITS";

// 2^26 amplitudes is already 1 GiB.
const HARD_MAX_QUBITS: usize = 26;

const NORM_TOLERANCE: f64 = 1e-10;

static MAX_QUBITS: OnceLock<usize> = OnceLock::new();

/// The active qubit ceiling, read once from `DQGNN_MAX_QUBITS`.
pub fn max_qubits() -> usize {
    *MAX_QUBITS.get_or_init(|| {
        std::env::var(MAX_QUBITS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&q| q >= 1)
            .map(|q| q.min(HARD_MAX_QUBITS))
            .unwrap_or(DEFAULT_MAX_QUBITS)
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("a quantum state needs at least one qubit")]
    ZeroQubits,
    #[error("{requested} qubits exceeds the simulator ceiling of {limit} qubits")]
    Capacity { requested: usize, limit: usize },
    #[error("qubit index {index} is out of range for a {qubits}-qubit state")]
    QubitOutOfRange { index: usize, qubits: usize },
    #[error("CNOT control and target are both qubit {0}")]
    SameControlTarget(usize),
    #[error("qubit count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("amplitude vector of length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("amplitude vector has norm {0}, expected 1")]
    NotNormalized(f64),
}

pub type Result<T> = std::result::Result<T, QsimError>;

fn check_capacity(qubits: usize) -> Result<()> {
    let limit = max_qubits();
    if qubits > limit {
        return Err(QsimError::Capacity {
            requested: qubits,
            limit,
        });
    }
    Ok(())
}

/// A normalized pure state of `qubit_count` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
    qubits: usize,
}

impl QuantumState {
    /// `|0…0⟩` on `qubits` qubits.
    pub fn zero_state(qubits: usize) -> Result<Self> {
        if qubits == 0 {
            return Err(QsimError::ZeroQubits);
        }
        check_capacity(qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, qubits })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero_state(qubits)?;
        if index >= state.amplitudes.len() {
            return Err(QsimError::QubitOutOfRange {
                index,
                qubits,
            });
        }
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Wraps an amplitude vector that is already normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let qubits = Self::qubits_for_len(amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QsimError::NotNormalized(norm));
        }
        Ok(Self { amplitudes, qubits })
    }

    /// Rescales an arbitrary non-zero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let qubits = Self::qubits_for_len(amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QsimError::NotNormalized(norm));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { amplitudes, qubits })
    }

    fn qubits_for_len(len: usize) -> Result<usize> {
        if len < 2 || !len.is_power_of_two() {
            return Err(QsimError::NotPowerOfTwo(len));
        }
        let qubits = len.trailing_zeros() as usize;
        check_capacity(qubits)?;
        Ok(qubits)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// Measurement probabilities `|a_i|²` in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    #[inline]
    fn bit_of(&self, qubit: usize) -> usize {
        1 << (self.qubits - 1 - qubit)
    }

    pub fn apply_rotation(&self, gate: &RotationGate) -> Result<Self> {
        let mut out = self.clone();
        out.apply_rotation_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_rotation_in_place(&mut self, gate: &RotationGate) -> Result<()> {
        self.apply_single_qubit_in_place(&gate.matrix(), gate.target)
    }

    /// Applies an arbitrary 2×2 matrix (row-major) to one qubit.
    pub fn apply_single_qubit_in_place(
        &mut self,
        m: &[[Complex64; 2]; 2],
        target: usize,
    ) -> Result<()> {
        if target >= self.qubits {
            return Err(QsimError::QubitOutOfRange {
                index: target,
                qubits: self.qubits,
            });
        }
        let bit = self.bit_of(target);
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | bit];
            self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    pub fn apply_cnot(&self, gate: &CnotGate) -> Result<Self> {
        let mut out = self.clone();
        out.apply_cnot_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_cnot_in_place(&mut self, gate: &CnotGate) -> Result<()> {
        for index in [gate.control, gate.target] {
            if index >= self.qubits {
                return Err(QsimError::QubitOutOfRange {
                    index,
                    qubits: self.qubits,
                });
            }
        }
        if gate.control == gate.target {
            return Err(QsimError::SameControlTarget(gate.control));
        }
        let c = self.bit_of(gate.control);
        let t = self.bit_of(gate.target);
        for i in 0..self.amplitudes.len() {
            // visit each swapped pair once, from its target-bit-clear member
            if i & c != 0 && i & t == 0 {
                self.amplitudes.swap(i, i | t);
            }
        }
        Ok(())
    }

    /// Kronecker product `self ⊗ other`; `self` keeps the high-order bits.
    pub fn tensor_product(&self, other: &QuantumState) -> Result<Self> {
        let qubits = self.qubits + other.qubits;
        check_capacity(qubits)?;
        let mut amplitudes = Vec::with_capacity(1 << qubits);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(Self { amplitudes, qubits })
    }

    /// Hermitian inner product `⟨self|other⟩`.
    pub fn inner_product(&self, other: &QuantumState) -> Result<Complex64> {
        if self.qubits != other.qubits {
            return Err(QsimError::DimensionMismatch {
                left: self.qubits,
                right: other.qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Shannon entropy in bits of the computational-basis measurement
    /// distribution, i.e. the entropy of the diagonal of `|ψ⟩⟨ψ|`.
    pub fn measurement_entropy(&self) -> f64 {
        shannon_entropy_bits(self.amplitudes.iter().map(|a| a.norm_sqr()))
    }
}

impl fmt::Display for QuantumState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", a.re, a.im)?;
        }
        write!(f, "]")
    }
}

fn l2_norm(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `-Σ p log2 p` with `0 log 0 = 0`.
pub fn shannon_entropy_bits(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    h.max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// X, Y, Z, X, Y, … by position.
    pub fn cycle(i: usize) -> Axis {
        match i % 3 {
            0 => Axis::X,
            1 => Axis::Y,
            _ => Axis::Z,
        }
    }
}

/// Single-qubit rotation `R_axis(angle)` on `target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationGate {
    pub axis: Axis,
    pub angle: f64,
    pub target: usize,
}

impl RotationGate {
    pub fn new(axis: Axis, angle: f64, target: usize) -> Self {
        Self {
            axis,
            angle,
            target,
        }
    }

    pub fn rx(angle: f64, target: usize) -> Self {
        Self::new(Axis::X, angle, target)
    }

    pub fn ry(angle: f64, target: usize) -> Self {
        Self::new(Axis::Y, angle, target)
    }

    pub fn rz(angle: f64, target: usize) -> Self {
        Self::new(Axis::Z, angle, target)
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        rotation_matrix(self.axis, self.angle)
    }
}

/// Half-angle rotation matrices:
/// `RX = [[c, -is], [-is, c]]`, `RY = [[c, -s], [s, c]]`,
/// `RZ = [[e^{-iθ/2}, 0], [0, e^{iθ/2}]]`.
pub fn rotation_matrix(axis: Axis, angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    let zero = Complex64::new(0.0, 0.0);
    match axis {
        Axis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Axis::Z => [
            [Complex64::new(c, -s), zero],
            [zero, Complex64::new(c, s)],
        ],
    }
}

/// Controlled-NOT. Validated when applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CnotGate {
    pub control: usize,
    pub target: usize,
}

impl CnotGate {
    pub fn new(control: usize, target: usize) -> Self {
        Self { control, target }
    }
}
