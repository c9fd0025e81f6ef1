//! Forward pass, entropy readout and nearest-centroid classifier.
//!
//! Each layer rotates every node's qubit (one angle triple for the center,
//! one shared by all neighbors), tensors a node with its neighbors, optionally
//! entangles with CNOTs, and reads out the Shannon entropy of the measurement
//! distribution. That entropy, divided by the qubit count, becomes the next
//! layer's input `RY(π·ĥ)|0⟩`. A graph's embedding is the sum of final-layer
//! node entropies, classified by the closer of two trainable centroids.
//!
//! Subgraphs wider than the per-device capacity are split: the center runs
//! alone and the neighbors run in consecutive chunks, each chunk entangled
//! only internally, and the pieces are joined by Kronecker products.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphdata::{partition_neighbors, Graph, GraphError, Subgraph};
use crate::mapping::{encode_feature, MappingError, MappingParams};
use crate::optim::{self, ObjectiveSpec, OptResult, Termination};
use crate::qsim::{max_qubits, CnotGate, QsimError, QuantumState, RotationGate};

/// Hinge margin of the training objective, in bits.
pub const HINGE_MARGIN: f64 = 0.1;
pub const DEFAULT_LAYERS: usize = 3;
pub const DEFAULT_CAPACITY: usize = 8;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("a model needs at least one layer")]
    NoLayers,
    #[error("model parameter {0} is not finite")]
    NonFinite(&'static str),
    #[error("device capacity {capacity} is outside 1..={limit}")]
    Capacity { capacity: usize, limit: usize },
    #[error("no input state for node {0}")]
    MissingState(usize),
    #[error("node state {0} is not a single qubit")]
    NotSingleQubit(usize),
    #[error("expected {expected} optimizer values, got {found}")]
    VectorLength { expected: usize, found: usize },
    #[error("no graphs to train on")]
    EmptyTrainingSet,
    #[error("checkpoint line {line}: {message}")]
    Checkpoint { line: usize, message: String },
    #[error("cannot access checkpoint {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Optim(#[from] optim::OptimError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Angle triples `(x, y, z)` for one layer.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct UlayerParams {
    pub center: [f64; 3],
    pub neighbor: [f64; 3],
}

impl UlayerParams {
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.center.iter().chain(&self.neighbor).copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub layers: Vec<UlayerParams>,
    pub centroids: [f64; 2],
    /// Feature encoder, trained separately and held fixed here.
    pub mapping: MappingParams,
}

impl ModelParams {
    pub fn new(layers: Vec<UlayerParams>, centroids: [f64; 2], mapping: MappingParams) -> Result<Self> {
        if layers.is_empty() {
            return Err(ModelError::NoLayers);
        }
        if layers.iter().flat_map(UlayerParams::values).any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("layer angle"));
        }
        if centroids.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::NonFinite("centroid"));
        }
        Ok(Self {
            layers,
            centroids,
            mapping,
        })
    }

    /// `layers` layers of angles uniform in `[0, π]`, centroids at zero.
    pub fn random(layers: usize, mapping: MappingParams, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || [(); 3].map(|_| rng.random_range(0.0..=PI));
        let layers = (0..layers)
            .map(|_| UlayerParams {
                center: draw(),
                neighbor: draw(),
            })
            .collect();
        Self::new(layers, [0.0; 2], mapping)
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Layer angles followed by both centroids: the values model training
    /// searches over.
    pub fn trainable_values(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(UlayerParams::values)
            .chain(self.centroids)
            .collect()
    }

    /// Copy with trainable values replaced; angles are wrapped into `[0, 2π)`.
    pub fn with_trainable_values(&self, values: &[f64]) -> Result<Self> {
        let expected = 6 * self.layers.len() + 2;
        if values.len() != expected {
            return Err(ModelError::VectorLength {
                expected,
                found: values.len(),
            });
        }
        let wrap = |v: f64| v.rem_euclid(2.0 * PI);
        let layers = values[..expected - 2]
            .chunks_exact(6)
            .map(|c| UlayerParams {
                center: [wrap(c[0]), wrap(c[1]), wrap(c[2])],
                neighbor: [wrap(c[3]), wrap(c[4]), wrap(c[5])],
            })
            .collect();
        Self::new(layers, [values[expected - 2], values[expected - 1]], self.mapping.clone())
    }
}

/// Layer angles, centroids and encoder angles.
pub fn count_parameters(params: &ModelParams) -> usize {
    6 * params.layers.len() + 2 + params.mapping.dimension()
}

/// CNOT layout applied inside each device-sized computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    /// `CNOT(i, j)` for every `i < j`, lexicographic.
    #[default]
    Full,
    /// `CNOT(i, i+1 mod q)`; for two qubits just `CNOT(0, 1)`.
    Ring,
    Off,
}

impl Entanglement {
    pub fn pairs(self, qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Off => Vec::new(),
            _ if qubits < 2 => Vec::new(),
            Entanglement::Full => (0..qubits)
                .flat_map(|i| (i + 1..qubits).map(move |j| (i, j)))
                .collect(),
            Entanglement::Ring if qubits == 2 => vec![(0, 1)],
            Entanglement::Ring => (0..qubits).map(|i| (i, (i + 1) % qubits)).collect(),
        }
    }
}

impl fmt::Display for Entanglement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entanglement::Full => "full",
            Entanglement::Ring => "ring",
            Entanglement::Off => "off",
        })
    }
}

impl FromStr for Entanglement {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Entanglement::Full),
            "ring" => Ok(Entanglement::Ring),
            "off" => Ok(Entanglement::Off),
            other => Err(format!("unknown entanglement mode {other:?} (expected full, ring or off)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForwardConfig {
    /// Qubits per device-sized computation.
    pub capacity: usize,
    pub entanglement: Entanglement,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            capacity: DEFAULT_CAPACITY,
            entanglement: Entanglement::Full,
        }
    }
}

impl ForwardConfig {
    pub fn new(capacity: usize, entanglement: Entanglement) -> Result<Self> {
        let limit = max_qubits();
        if capacity == 0 || capacity > limit {
            return Err(ModelError::Capacity { capacity, limit });
        }
        Ok(Self {
            capacity,
            entanglement,
        })
    }
}

/// `RX(x)·RY(y)·RZ(z)` on a single qubit: RZ acts first.
pub fn ucov(state: &QuantumState, angles: [f64; 3]) -> Result<QuantumState> {
    if state.qubit_count() != 1 {
        return Err(ModelError::NotSingleQubit(0));
    }
    let mut out = state.clone();
    out.apply_rotation_in_place(&RotationGate::rz(angles[2], 0))?;
    out.apply_rotation_in_place(&RotationGate::ry(angles[1], 0))?;
    out.apply_rotation_in_place(&RotationGate::rx(angles[0], 0))?;
    Ok(out)
}

/// Full pairwise CNOT entangler.
pub fn uent(state: &QuantumState) -> QuantumState {
    entangle(state.clone(), Entanglement::Full)
}

pub fn entangle(mut state: QuantumState, mode: Entanglement) -> QuantumState {
    for (control, target) in mode.pairs(state.qubit_count()) {
        state
            .apply_cnot_in_place(&CnotGate::new(control, target))
            .expect("pairs are in range and distinct");
    }
    state
}

/// Per-node single-qubit states after the center and neighbor rotations of
/// one layer. A node's neighbor-rotated state does not depend on which
/// center it is attached to, so both are computed once per layer.
struct RotatedStates {
    as_center: Vec<QuantumState>,
    as_neighbor: Vec<QuantumState>,
}

impl RotatedStates {
    fn new(node_states: &[QuantumState], layer: &UlayerParams) -> Result<Self> {
        let rotate = |angles| {
            node_states
                .iter()
                .enumerate()
                .map(|(v, s)| ucov(s, angles).map_err(|_| ModelError::NotSingleQubit(v)))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            as_center: rotate(layer.center)?,
            as_neighbor: rotate(layer.neighbor)?,
        })
    }

    /// The device-sized states whose Kronecker product is the subgraph
    /// output, each already entangled internally.
    fn devices(&self, sub: &Subgraph<'_>, config: &ForwardConfig) -> Result<Vec<QuantumState>> {
        let center = sub.center();
        let neighbor = |u: usize| self.as_neighbor.get(u).ok_or(ModelError::MissingState(u));
        let center_state = self.as_center.get(center).ok_or(ModelError::MissingState(center))?;
        let build = |first: Option<&QuantumState>, nodes: &[usize]| -> Result<QuantumState> {
            let mut iter = nodes.iter();
            let mut state = match first {
                Some(s) => s.clone(),
                None => neighbor(*iter.next().expect("chunks are non-empty"))?.clone(),
            };
            for &u in iter {
                state = state.tensor_product(neighbor(u)?)?;
            }
            Ok(entangle(state, config.entanglement))
        };

        if sub.qubit_count() <= config.capacity {
            return Ok(vec![build(Some(center_state), sub.neighbors())?]);
        }
        let chunks = partition_neighbors(sub, config.capacity)?;
        let mut devices = Vec::with_capacity(chunks.len() + 1);
        devices.push(entangle(center_state.clone(), config.entanglement));
        for chunk in chunks.chunks {
            devices.push(build(None, chunk)?);
        }
        Ok(devices)
    }
}

fn check_states(node_states: &[QuantumState], count: usize) -> Result<()> {
    if node_states.len() < count {
        return Err(ModelError::MissingState(node_states.len()));
    }
    if let Some(v) = node_states.iter().position(|s| s.qubit_count() != 1) {
        return Err(ModelError::NotSingleQubit(v));
    }
    Ok(())
}

fn kron_all(devices: Vec<QuantumState>) -> Result<QuantumState> {
    let mut iter = devices.into_iter();
    let mut out = iter.next().expect("at least the center device");
    for d in iter {
        out = out.tensor_product(&d)?;
    }
    Ok(out)
}

/// Output state of one layer on one subgraph: `1 + deg` qubits, center
/// first, neighbors in adjacency order. `node_states` is indexed by node.
pub fn subgraph_forward(
    sub: &Subgraph<'_>,
    node_states: &[QuantumState],
    layer: &UlayerParams,
    config: &ForwardConfig,
) -> Result<QuantumState> {
    let needed = std::iter::once(sub.center())
        .chain(sub.neighbors().iter().copied())
        .max()
        .unwrap_or(0);
    check_states(node_states, needed + 1)?;
    let rotated = RotatedStates::new(node_states, layer)?;
    kron_all(rotated.devices(sub, config)?)
}

/// Encoded layer-0 input of every node.
pub fn encode_nodes(g: &Graph, mapping: &MappingParams) -> Result<Vec<QuantumState>> {
    g.features()
        .iter()
        .map(|x| encode_feature(x, mapping).map_err(ModelError::from))
        .collect()
}

/// Final-layer measurement entropy of every node, in bits.
pub fn node_recursion(g: &Graph, params: &ModelParams, config: &ForwardConfig) -> Result<Vec<f64>> {
    let inputs = encode_nodes(g, &params.mapping)?;
    recursion_from_inputs(g, inputs, &params.layers, config)
}

fn recursion_from_inputs(
    g: &Graph,
    mut states: Vec<QuantumState>,
    layers: &[UlayerParams],
    config: &ForwardConfig,
) -> Result<Vec<f64>> {
    if layers.is_empty() {
        return Err(ModelError::NoLayers);
    }
    check_states(&states, g.node_count())?;
    let mut entropies = vec![0.0; g.node_count()];
    for (t, layer) in layers.iter().enumerate() {
        let rotated = RotatedStates::new(&states, layer)?;
        for v in 0..g.node_count() {
            let sub = Subgraph::new(g, v);
            // Devices are joined by Kronecker products, so the measurement
            // distribution factorizes and the entropies add.
            entropies[v] = rotated
                .devices(&sub, config)?
                .iter()
                .map(QuantumState::measurement_entropy)
                .sum();
        }
        if t + 1 < layers.len() {
            for v in 0..g.node_count() {
                let normalized = entropies[v] / (1 + g.degree(v)) as f64;
                states[v] = QuantumState::zero_state(1)?.apply_rotation(&RotationGate::ry(PI * normalized, 0))?;
            }
        }
    }
    Ok(entropies)
}

/// Sum of final-layer node entropies.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct GraphEmbedding(pub f64);

impl GraphEmbedding {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn graph_embedding(g: &Graph, params: &ModelParams, config: &ForwardConfig) -> Result<GraphEmbedding> {
    Ok(GraphEmbedding(node_recursion(g, params, config)?.iter().sum()))
}

/// Label 0 when `|c0 − h| ≥ |c1 − h|`, otherwise 1. Ties go to 0.
pub fn classify(h: GraphEmbedding, params: &ModelParams) -> u8 {
    let [c0, c1] = params.centroids;
    if (c0 - h.0).abs() >= (c1 - h.0).abs() {
        0
    } else {
        1
    }
}

/// Centroid that graphs of class `label` should sit closer to. The label
/// rule returns 0 when `h` is no closer to `c0` than to `c1`, so class 0 is
/// anchored at `c1` and class 1 at `c0`.
pub fn anchor_index(label: u8) -> usize {
    1 - label as usize
}

/// Per-graph hinge term `max(0, |h − a_y| − |h − a_other| + margin)` with
/// `a_y` the anchor of the graph's own class.
pub fn hinge(h: f64, label: u8, centroids: [f64; 2]) -> f64 {
    let own = centroids[anchor_index(label)];
    let other = centroids[1 - anchor_index(label)];
    ((h - own).abs() - (h - other).abs() + HINGE_MARGIN).max(0.0)
}

/// Graphs with their encoded inputs precomputed; the encoder is fixed while
/// the model trains, so these do not change between evaluations.
pub struct EncodedSet<'a> {
    graphs: Vec<(&'a Graph, Vec<QuantumState>)>,
}

impl<'a> EncodedSet<'a> {
    pub fn new(graphs: &[&'a Graph], mapping: &MappingParams) -> Result<Self> {
        let graphs = graphs
            .iter()
            .map(|&g| Ok((g, encode_nodes(g, mapping)?)))
            .collect::<Result<_>>()?;
        Ok(Self { graphs })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = u8> + '_ {
        self.graphs.iter().map(|(g, _)| g.label())
    }

    /// Embeddings in input order, computed in parallel.
    pub fn embeddings(&self, layers: &[UlayerParams], config: &ForwardConfig) -> Result<Vec<f64>> {
        self.graphs
            .par_iter()
            .map(|(g, inputs)| Ok(recursion_from_inputs(g, inputs.clone(), layers, config)?.iter().sum()))
            .collect()
    }

    pub fn loss(&self, params: &ModelParams, config: &ForwardConfig) -> Result<f64> {
        if self.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let h = self.embeddings(&params.layers, config)?;
        let total: f64 = h
            .iter()
            .zip(self.labels())
            .map(|(&h, y)| hinge(h, y, params.centroids))
            .sum();
        Ok(total / self.len() as f64)
    }
}

/// Mean hinge loss of the centroid rule over `graphs`.
pub fn training_loss(graphs: &[&Graph], params: &ModelParams, config: &ForwardConfig) -> Result<f64> {
    EncodedSet::new(graphs, &params.mapping)?.loss(params, config)
}

#[derive(Clone, Debug)]
pub struct ModelTraining {
    pub params: ModelParams,
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Set when the optimizer stopped on a non-finite loss; `params` is then
    /// the best finite point seen.
    pub warning: Option<String>,
    pub optimizer: Option<OptResult>,
}

/// Random layer angles from `seed`; each class anchor starts at that class's
/// mean embedding (overall mean for a class with no graphs).
pub fn initial_params(
    set: &EncodedSet<'_>,
    layers: usize,
    mapping: MappingParams,
    seed: u64,
    config: &ForwardConfig,
) -> Result<ModelParams> {
    let mut params = ModelParams::random(layers, mapping, seed)?;
    let h = set.embeddings(&params.layers, config)?;
    let overall = h.iter().sum::<f64>() / h.len().max(1) as f64;
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for (h, y) in h.iter().zip(set.labels()) {
        sums[y as usize] += h;
        counts[y as usize] += 1;
    }
    for c in 0..2 {
        params.centroids[anchor_index(c as u8)] = if counts[c] > 0 {
            sums[c] / counts[c] as f64
        } else {
            overall
        };
    }
    Ok(params)
}

/// Fits layer angles and centroids with the encoder held fixed.
pub fn train_model(
    graphs: &[&Graph],
    mapping: MappingParams,
    layers: usize,
    seed: u64,
    budget: usize,
    config: &ForwardConfig,
) -> Result<ModelTraining> {
    if graphs.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let set = EncodedSet::new(graphs, &mapping)?;
    let initial = initial_params(&set, layers, mapping, seed, config)?;
    let initial_loss = set.loss(&initial, config)?;
    let x0 = initial.trainable_values();
    let objective = |x: &[f64]| {
        initial
            .with_trainable_values(x)
            .and_then(|p| set.loss(&p, config))
            .unwrap_or(f64::NAN)
    };
    let spec = ObjectiveSpec::new(x0.len(), budget).with_seed(seed);
    let result = optim::minimize(&spec, objective, &x0)?;
    let warning = (result.termination == Termination::NonFinite)
        .then(|| "training loss became non-finite; returning the best finite point".to_string());
    let (params, final_loss) = if result.best_value < initial_loss {
        (initial.with_trainable_values(&result.best_point)?, result.best_value)
    } else {
        (initial, initial_loss)
    };
    Ok(ModelTraining {
        params,
        initial_loss,
        final_loss,
        warning,
        optimizer: Some(result),
    })
}

/// Everything needed to rebuild a trained classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub config: ForwardConfig,
    pub seed: u64,
}

const CHECKPOINT_HEADER: &str = "# dqgnn checkpoint v1: layers K; K x layer cx cy cz nx ny nz; centroids c0 c1; mapping d t1..td; capacity n; entanglement mode; seed s";

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let join = |vals: &mut dyn Iterator<Item = f64>| {
            vals.map(|v| format!(" {v:?}")).collect::<String>()
        };
        let mut out = String::new();
        out.push_str(CHECKPOINT_HEADER);
        out.push('\n');
        out.push_str(&format!("layers {}\n", self.params.layers.len()));
        for layer in &self.params.layers {
            out.push_str(&format!("layer{}\n", join(&mut layer.values())));
        }
        out.push_str(&format!("centroids{}\n", join(&mut self.params.centroids.into_iter())));
        out.push_str(&format!(
            "mapping {}{}\n",
            self.params.mapping.dimension(),
            join(&mut self.params.mapping.thetas().iter().copied())
        ));
        out.push_str(&format!("capacity {}\n", self.config.capacity));
        out.push_str(&format!("entanglement {}\n", self.config.entanglement));
        out.push_str(&format!("seed {}\n", self.seed));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut last_line = 0;
        let mut next = |key: &str| -> Result<(usize, Vec<String>)> {
            let (line, content) = lines.next().ok_or_else(|| ModelError::Checkpoint {
                line: last_line + 1,
                message: format!("missing `{key}` record"),
            })?;
            last_line = line;
            let mut fields = content.split_whitespace();
            if fields.next() != Some(key) {
                return Err(ModelError::Checkpoint {
                    line,
                    message: format!("expected `{key}` record"),
                });
            }
            Ok((line, fields.map(str::to_owned).collect()))
        };
        fn parse<T: FromStr>(line: usize, field: &str) -> Result<T> {
            field.parse().map_err(|_| ModelError::Checkpoint {
                line,
                message: format!("cannot parse {field:?}"),
            })
        }
        fn exact(line: usize, fields: &[String], n: usize) -> Result<()> {
            if fields.len() != n {
                return Err(ModelError::Checkpoint {
                    line,
                    message: format!("expected {n} values, found {}", fields.len()),
                });
            }
            Ok(())
        }
        fn floats(line: usize, fields: &[String]) -> Result<Vec<f64>> {
            fields.iter().map(|f| parse(line, f)).collect()
        }

        let (line, f) = next("layers")?;
        exact(line, &f, 1)?;
        let k: usize = parse(line, &f[0])?;
        let mut layers = Vec::with_capacity(k);
        for _ in 0..k {
            let (line, f) = next("layer")?;
            exact(line, &f, 6)?;
            let v = floats(line, &f)?;
            layers.push(UlayerParams {
                center: [v[0], v[1], v[2]],
                neighbor: [v[3], v[4], v[5]],
            });
        }
        let (line, f) = next("centroids")?;
        exact(line, &f, 2)?;
        let c = floats(line, &f)?;
        let (line, f) = next("mapping")?;
        let d: usize = parse(line, f.first().map(String::as_str).unwrap_or(""))?;
        exact(line, &f, d + 1)?;
        let mapping = MappingParams::new(floats(line, &f[1..])?)?;
        let (line, f) = next("capacity")?;
        exact(line, &f, 1)?;
        let capacity = parse(line, &f[0])?;
        let (line, f) = next("entanglement")?;
        exact(line, &f, 1)?;
        let entanglement = f[0].parse().map_err(|message| ModelError::Checkpoint { line, message })?;
        let (line, f) = next("seed")?;
        exact(line, &f, 1)?;
        let seed = parse(line, &f[0])?;
        Ok(Self {
            params: ModelParams::new(layers, [c[0], c[1]], mapping)?,
            config: ForwardConfig::new(capacity, entanglement)?,
            seed,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text)
    }
}
