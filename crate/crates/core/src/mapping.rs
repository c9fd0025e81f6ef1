//! Trainable feature encoder.
//!
//! A `d`-dimensional feature vector is mapped to one qubit by `d` rotations
//! applied to `|0⟩`, gate `i` turning about X, Y, Z (cycling with `i`) by
//! `thetas[i] * x[i]`. The angles are fitted so that pairwise distances
//! between encoded states track pairwise Euclidean distances of the raw
//! features, both normalized by their own maximum.

use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::optim::{self, ObjectiveSpec, OptResult, OptimError, Termination};
use crate::qsim::{Axis, QsimError, QuantumState, RotationGate};

/// Stream separating restart draws from the initial angle draw.
const RESTART_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Guard for normalizing an all-zero distance matrix.
pub const NORMALIZATION_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MappingError {
    #[error("feature vector has dimension {found}, encoder expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("distance loss needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("no feature vectors to train on")]
    Empty,
    #[error("mapping angle {index} is not finite")]
    NonFinite { index: usize },
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("encoder training stopped early ({reason})")]
    Training {
        best: MappingParams,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, MappingError>;

/// One angle per feature dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingParams {
    thetas: Vec<f64>,
}

impl MappingParams {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if let Some(index) = thetas.iter().position(|t| !t.is_finite()) {
            return Err(MappingError::NonFinite { index });
        }
        Ok(Self { thetas })
    }

    /// Uniform angles in `[0, π]`.
    pub fn random(dimension: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            thetas: (0..dimension)
                .map(|_| rng.random_range(0.0..=PI))
                .collect(),
        }
    }

    /// Angle 1 everywhere: features are used directly as rotation angles.
    pub fn identity(dimension: usize) -> Self {
        Self {
            thetas: vec![1.0; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
}

/// Encodes a feature vector as a single-qubit state.
pub fn encode_feature(x: &[f64], params: &MappingParams) -> Result<QuantumState> {
    if x.len() != params.dimension() {
        return Err(MappingError::DimensionMismatch {
            expected: params.dimension(),
            found: x.len(),
        });
    }
    let mut state = QuantumState::zero_state(1)?;
    for (i, (&xi, &theta)) in x.iter().zip(&params.thetas).enumerate() {
        state.apply_rotation_in_place(&RotationGate::new(Axis::cycle(i), theta * xi, 0))?;
    }
    Ok(state)
}

/// `arccos |⟨a|b⟩|`, in `[0, π/2]`.
///
/// Evaluated as `atan2(‖a ∧ b‖, |⟨a|b⟩|)`, which equals the arccos form for
/// normalized states but stays exact near coincident states where `arccos`
/// loses half the significant digits.
pub fn hilbert_distance(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    let overlap = a.inner_product(b)?.norm();
    let (pa, pb) = (a.amplitudes(), b.amplitudes());
    let mut wedge = 0.0;
    for i in 0..pa.len() {
        for j in i + 1..pa.len() {
            wedge += (pa[i] * pb[j] - pa[j] * pb[i]).norm_sqr();
        }
    }
    Ok(wedge.sqrt().atan2(overlap))
}

/// Pairwise Euclidean (`euclidean`) and encoded-state (`hilbert`) distances,
/// each divided by its own maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrices {
    pub euclidean: DMatrix<f64>,
    pub hilbert: DMatrix<f64>,
}

impl DistanceMatrices {
    pub fn compute(features: &[Vec<f64>], params: &MappingParams) -> Result<Self> {
        let states = features
            .iter()
            .map(|x| encode_feature(x, params))
            .collect::<Result<Vec<_>>>()?;
        let n = features.len();
        let mut euclidean = DMatrix::zeros(n, n);
        let mut hilbert = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let e = features[i]
                    .iter()
                    .zip(&features[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let h = hilbert_distance(&states[i], &states[j])?;
                euclidean[(i, j)] = e;
                euclidean[(j, i)] = e;
                hilbert[(i, j)] = h;
                hilbert[(j, i)] = h;
            }
        }
        normalize_by_max(&mut euclidean);
        normalize_by_max(&mut hilbert);
        Ok(Self { euclidean, hilbert })
    }

    /// `Σ_ij |D_ij − D'_ij|` over the full matrices.
    pub fn loss(&self) -> f64 {
        self.euclidean
            .iter()
            .zip(self.hilbert.iter())
            .map(|(d, h)| (d - h).abs())
            .sum()
    }

    /// Pairs of sample pairs ranked one way by Euclidean distance and the
    /// opposite way by encoded distance.
    pub fn rank_inversions(&self) -> usize {
        const TIE: f64 = 1e-9;
        let n = self.euclidean.nrows();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let mut count = 0;
        for (a, &p) in pairs.iter().enumerate() {
            for &q in &pairs[a + 1..] {
                let de = self.euclidean[p] - self.euclidean[q];
                let dh = self.hilbert[p] - self.hilbert[q];
                if (de > TIE && dh < -TIE) || (de < -TIE && dh > TIE) {
                    count += 1;
                }
            }
        }
        count
    }
}

fn normalize_by_max(m: &mut DMatrix<f64>) {
    let max = m.iter().copied().fold(0.0, f64::max).max(NORMALIZATION_EPSILON);
    *m /= max;
}

/// Distance-preservation loss of `params` on `features`.
pub fn mapping_loss(features: &[Vec<f64>], params: &MappingParams) -> Result<f64> {
    if features.len() < 2 {
        return Err(MappingError::TooFewSamples(features.len()));
    }
    Ok(DistanceMatrices::compute(features, params)?.loss())
}

/// Feature vectors with bitwise duplicates removed, first occurrence kept.
pub fn distinct_features<'a>(features: impl IntoIterator<Item = &'a [f64]>) -> Vec<Vec<f64>> {
    let mut seen = HashSet::new();
    features
        .into_iter()
        .filter(|x| seen.insert(x.iter().map(|v| v.to_bits()).collect::<Vec<_>>()))
        .map(<[f64]>::to_vec)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MappingTraining {
    pub params: MappingParams,
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Distinct samples the loss was computed over.
    pub samples: usize,
    /// One optimizer run per start point, in order.
    pub runs: Vec<OptResult>,
}

impl MappingTraining {
    /// All runs as a single evaluation trace.
    pub fn trace(&self) -> Option<OptResult> {
        let mut merged = self.runs.first()?.clone();
        for run in &self.runs[1..] {
            merged.values.extend_from_slice(&run.values);
            merged.evaluations_used += run.evaluations_used;
            if run.best_value < merged.best_value || merged.best_value.is_nan() {
                merged.best_value = run.best_value;
                merged.best_point.clone_from(&run.best_point);
            }
            merged.converged = run.converged;
            merged.termination = run.termination;
        }
        Some(merged)
    }
}

/// Fits encoder angles from uniform `[0, π]` starting values drawn with `seed`.
pub fn train_mapping(features: &[Vec<f64>], seed: u64, budget: usize) -> Result<MappingTraining> {
    let dimension = features.first().ok_or(MappingError::Empty)?.len();
    train_mapping_from(features, MappingParams::random(dimension, seed), seed, budget)
}

/// Fits encoder angles starting from `initial`. Whenever a run converges
/// with budget to spare, a new run starts from fresh uniform `[0, π]`
/// angles; the best angles over all runs are kept. Never returns angles
/// with a higher loss than `initial`.
pub fn train_mapping_from(
    features: &[Vec<f64>],
    initial: MappingParams,
    seed: u64,
    budget: usize,
) -> Result<MappingTraining> {
    if features.is_empty() {
        return Err(MappingError::Empty);
    }
    if let Some(bad) = features.iter().find(|x| x.len() != initial.dimension()) {
        return Err(MappingError::DimensionMismatch {
            expected: initial.dimension(),
            found: bad.len(),
        });
    }
    let samples = distinct_features(features.iter().map(Vec::as_slice));
    if samples.len() < 2 || initial.dimension() == 0 {
        return Ok(MappingTraining {
            params: initial,
            initial_loss: 0.0,
            final_loss: 0.0,
            samples: samples.len(),
            runs: Vec::new(),
        });
    }
    let initial_loss = mapping_loss(&samples, &initial)?;
    let objective = |thetas: &[f64]| {
        MappingParams::new(thetas.to_vec())
            .and_then(|p| mapping_loss(&samples, &p))
            .unwrap_or(f64::NAN)
    };
    let dimension = initial.dimension();
    let min_run = 2 * ObjectiveSpec::new(dimension, 0).interpolation_points();
    let mut restarts = ChaCha8Rng::seed_from_u64(seed ^ RESTART_STREAM);
    let mut start = initial.thetas().to_vec();
    let (mut params, mut final_loss) = (initial, initial_loss);
    let mut runs = Vec::new();
    let mut remaining = budget;
    loop {
        let spec = ObjectiveSpec::new(dimension, remaining).with_seed(seed.wrapping_add(runs.len() as u64));
        let result = optim::minimize(&spec, objective, &start).map_err(|e: OptimError| MappingError::Training {
            best: params.clone(),
            reason: e.to_string(),
        })?;
        remaining -= result.evaluations_used;
        if result.best_value < final_loss {
            params = MappingParams::new(result.best_point.clone())?;
            final_loss = result.best_value;
        }
        let termination = result.termination;
        runs.push(result);
        if termination == Termination::NonFinite {
            return Err(MappingError::Training {
                best: params,
                reason: "objective became non-finite".into(),
            });
        }
        // A converged run leaves budget over; spend it from a fresh start.
        if termination != Termination::Converged || remaining < min_run {
            break;
        }
        start = (0..dimension).map(|_| restarts.random_range(0.0..=PI)).collect();
    }
    Ok(MappingTraining {
        params,
        initial_loss,
        final_loss,
        samples: samples.len(),
        runs,
    })
}
