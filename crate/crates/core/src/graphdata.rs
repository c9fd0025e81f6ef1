//! Graphs, TUDataset ingestion, per-node subgraph decomposition and
//! neighbor chunking.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("missing dataset file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("cannot read {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: expected an integer, found {token:?}", .path.display())]
    InvalidToken {
        path: PathBuf,
        line: usize,
        token: String,
    },
    #[error("{}:{line}: reference to {kind} {id}, but only {count} exist", .path.display())]
    DanglingReference {
        path: PathBuf,
        line: usize,
        kind: &'static str,
        id: i64,
        count: usize,
    },
    #[error("{}:{line}: edge joins nodes of different graphs", .path.display())]
    CrossGraphEdge { path: PathBuf, line: usize },
    #[error("{}:{line}: third distinct graph label {label}; only binary datasets are supported", .path.display())]
    TooManyClasses {
        path: PathBuf,
        line: usize,
        label: i64,
    },
    #[error("{}: file has {found} lines, expected {expected}", .path.display())]
    LineCount {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("chunk capacity must be at least 1")]
    ZeroCapacity,
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Undirected graph with per-node feature vectors and a binary label.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    features: Vec<Vec<f64>>,
    label: u8,
}

impl Graph {
    /// Builds a graph from undirected edges. Repeated pairs (in either
    /// direction) collapse to one edge; self-loops are rejected.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        features: Vec<Vec<f64>>,
        label: u8,
    ) -> Result<Self> {
        if features.len() != node_count {
            return Err(GraphError::InvalidGraph(format!(
                "{} feature vectors for {node_count} nodes",
                features.len()
            )));
        }
        if let Some(first) = features.first() {
            let d = first.len();
            if let Some(bad) = features.iter().position(|f| f.len() != d) {
                return Err(GraphError::InvalidGraph(format!(
                    "node {bad} has feature dimension {}, expected {d}",
                    features[bad].len()
                )));
            }
        }
        if label > 1 {
            return Err(GraphError::InvalidGraph(format!("label {label} is not 0 or 1")));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(GraphError::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            if a == b {
                return Err(GraphError::InvalidGraph(format!("self-loop on node {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            adjacency,
            edges: set.into_iter().collect(),
            features,
            label,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `v` in ascending index order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn feature(&self, v: usize) -> &[f64] {
        &self.features[v]
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    /// Feature dimension; 0 for an empty graph.
    pub fn feature_dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    /// Same structure and features with the neighbor lists of every node
    /// reordered by `order(v, neighbors)`. Used to probe order sensitivity.
    pub fn with_neighbor_order(&self, mut order: impl FnMut(usize, &mut Vec<usize>)) -> Self {
        let mut out = self.clone();
        for (v, list) in out.adjacency.iter_mut().enumerate() {
            order(v, list);
        }
        out
    }
}

/// A center node together with its neighborhood, borrowed from a graph.
#[derive(Clone, Copy, Debug)]
pub struct Subgraph<'g> {
    graph: &'g Graph,
    center: usize,
}

impl<'g> Subgraph<'g> {
    pub fn new(graph: &'g Graph, center: usize) -> Self {
        assert!(center < graph.node_count(), "center {center} out of range");
        Self { graph, center }
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn neighbors(&self) -> &'g [usize] {
        self.graph.neighbors(self.center)
    }

    pub fn center_feature(&self) -> &'g [f64] {
        self.graph.feature(self.center)
    }

    pub fn neighbor_features(&self) -> impl Iterator<Item = &'g [f64]> + '_ {
        self.neighbors().iter().map(|&u| self.graph.feature(u))
    }

    /// Number of qubits the whole subgraph occupies: center plus neighbors.
    pub fn qubit_count(&self) -> usize {
        1 + self.neighbors().len()
    }
}

/// One subgraph per node, in node order.
pub fn decompose_graph(g: &Graph) -> Vec<Subgraph<'_>> {
    (0..g.node_count()).map(|v| Subgraph::new(g, v)).collect()
}

/// Disjoint, order-preserving split of a neighbor list into chunks of at
/// most `capacity` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborChunks<'g> {
    pub chunks: Vec<&'g [usize]>,
    pub capacity: usize,
}

impl NeighborChunks<'_> {
    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }
}

/// Greedy consecutive fill of the ascending neighbor list.
pub fn partition_neighbors<'g>(s: &Subgraph<'g>, capacity: usize) -> Result<NeighborChunks<'g>> {
    if capacity == 0 {
        return Err(GraphError::ZeroCapacity);
    }
    Ok(NeighborChunks {
        chunks: s.neighbors().chunks(capacity).collect(),
        capacity,
    })
}

/// A parsed benchmark: graphs plus the label vocabularies used to build them.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    /// Distinct raw node labels, ascending; position = one-hot index.
    pub node_labels: Vec<i64>,
    /// Raw graph labels mapped to 0 and (if present) 1.
    pub class_labels: Vec<i64>,
}

impl Dataset {
    pub fn feature_dim(&self) -> usize {
        self.node_labels.len()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for g in &self.graphs {
            counts[g.label() as usize] += 1;
        }
        counts
    }
}

struct LineFile {
    path: PathBuf,
    lines: Vec<String>,
}

impl LineFile {
    fn read(dir: &Path, name: &str, suffix: &str) -> Result<Self> {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(GraphError::MissingFile(path))
            }
            Err(source) => return Err(GraphError::Io { path, source }),
        };
        let mut lines: Vec<String> = text.lines().map(|l| l.trim().to_owned()).collect();
        while lines.last().is_some_and(|l| l.is_empty()) {
            lines.pop();
        }
        Ok(Self { path, lines })
    }

    fn int(&self, line: usize, token: &str) -> Result<i64> {
        token.trim().parse().map_err(|_| GraphError::InvalidToken {
            path: self.path.clone(),
            line,
            token: token.trim().to_owned(),
        })
    }

    /// One integer per line; yields `(1-based line, value)`.
    fn ints(&self) -> Result<Vec<i64>> {
        self.lines
            .iter()
            .enumerate()
            .map(|(i, l)| self.int(i + 1, l))
            .collect()
    }
}

/// Reads `<name>_A.txt`, `<name>_graph_indicator.txt`,
/// `<name>_graph_labels.txt` and `<name>_node_labels.txt` from `dir`.
///
/// Node labels become one-hot vectors over the sorted set of distinct
/// labels. Graph labels are remapped so the smaller raw label is 0.
pub fn parse_tudataset(dir: impl AsRef<Path>, name: &str) -> Result<Dataset> {
    let dir = dir.as_ref();
    let adjacency = LineFile::read(dir, name, "A")?;
    let indicator = LineFile::read(dir, name, "graph_indicator")?;
    let graph_labels = LineFile::read(dir, name, "graph_labels")?;
    let node_labels = LineFile::read(dir, name, "node_labels")?;

    let raw_graph_labels = graph_labels.ints()?;
    let graph_count = raw_graph_labels.len();
    let mut classes = BTreeSet::new();
    for (i, &l) in raw_graph_labels.iter().enumerate() {
        classes.insert(l);
        if classes.len() > 2 {
            return Err(GraphError::TooManyClasses {
                path: graph_labels.path.clone(),
                line: i + 1,
                label: l,
            });
        }
    }
    let class_labels: Vec<i64> = classes.into_iter().collect();

    let graph_of_node = indicator.ints()?;
    let node_count = graph_of_node.len();
    let mut local_index = Vec::with_capacity(node_count);
    let mut sizes = vec![0usize; graph_count];
    for (i, &gid) in graph_of_node.iter().enumerate() {
        if gid < 1 || gid as usize > graph_count {
            return Err(GraphError::DanglingReference {
                path: indicator.path.clone(),
                line: i + 1,
                kind: "graph",
                id: gid,
                count: graph_count,
            });
        }
        let g = gid as usize - 1;
        local_index.push(sizes[g]);
        sizes[g] += 1;
    }

    let raw_node_labels = node_labels.ints()?;
    if raw_node_labels.len() != node_count {
        return Err(GraphError::LineCount {
            path: node_labels.path.clone(),
            expected: node_count,
            found: raw_node_labels.len(),
        });
    }
    let vocabulary: Vec<i64> = raw_node_labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let one_hot_index: HashMap<i64, usize> =
        vocabulary.iter().enumerate().map(|(i, &l)| (l, i)).collect();

    let mut features: Vec<Vec<Vec<f64>>> =
        sizes.iter().map(|&n| Vec::with_capacity(n)).collect();
    for (node, &raw) in raw_node_labels.iter().enumerate() {
        let mut x = vec![0.0; vocabulary.len()];
        x[one_hot_index[&raw]] = 1.0;
        features[graph_of_node[node] as usize - 1].push(x);
    }

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    for (i, line) in adjacency.lines.iter().enumerate() {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (adjacency.int(line_no, a)?, adjacency.int(line_no, b)?),
            _ => {
                return Err(GraphError::InvalidToken {
                    path: adjacency.path.clone(),
                    line: line_no,
                    token: line.clone(),
                })
            }
        };
        for id in [a, b] {
            if id < 1 || id as usize > node_count {
                return Err(GraphError::DanglingReference {
                    path: adjacency.path.clone(),
                    line: line_no,
                    kind: "node",
                    id,
                    count: node_count,
                });
            }
        }
        let (a, b) = (a as usize - 1, b as usize - 1);
        if graph_of_node[a] != graph_of_node[b] {
            return Err(GraphError::CrossGraphEdge {
                path: adjacency.path.clone(),
                line: line_no,
            });
        }
        if a == b {
            continue;
        }
        edges[graph_of_node[a] as usize - 1].push((local_index[a], local_index[b]));
    }

    let class_of: BTreeMap<i64, u8> = class_labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i as u8))
        .collect();
    let graphs = edges
        .into_iter()
        .zip(features)
        .zip(sizes)
        .zip(&raw_graph_labels)
        .map(|(((e, f), n), raw)| Graph::new(n, e, f, class_of[raw]))
        .collect::<Result<Vec<_>>>()?;

    Ok(Dataset {
        name: name.to_owned(),
        graphs,
        node_labels: vocabulary,
        class_labels,
    })
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    pub fn one_hot(d: usize, i: usize) -> Vec<f64> {
        let mut x = vec![0.0; d];
        x[i] = 1.0;
        x
    }

    pub fn path_graph(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i)), vec![vec![1.0]; n], 0).unwrap()
    }

    pub fn write_dataset(dir: &Path, name: &str, a: &str, ind: &str, gl: &str, nl: &str) {
        for (suffix, body) in [("A", a), ("graph_indicator", ind), ("graph_labels", gl), ("node_labels", nl)] {
            fs::write(dir.join(format!("{name}_{suffix}.txt")), body).unwrap();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn graph_dedups_and_sorts() {
        let g = Graph::new(3, [(2, 0), (0, 2), (1, 0)], vec![vec![0.0]; 3], 1).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.degree(1), 1);
    }

    #[test]
    fn graph_rejects_bad_input() {
        assert!(Graph::new(2, [(0, 0)], vec![vec![0.0]; 2], 0).is_err());
        assert!(Graph::new(2, [(0, 2)], vec![vec![0.0]; 2], 0).is_err());
        assert!(Graph::new(2, [], vec![vec![0.0], vec![0.0, 1.0]], 0).is_err());
        assert!(Graph::new(1, [], vec![vec![0.0]], 2).is_err());
    }

    #[test]
    fn decompose_triangle() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)], vec![vec![1.0]; 3], 0).unwrap();
        let subs = decompose_graph(&g);
        assert_eq!(subs.len(), 3);
        assert!(subs.iter().all(|s| s.neighbors().len() == 2));
    }

    #[test]
    fn decompose_path_and_isolated() {
        let g = path_graph(3);
        let degs: Vec<_> = decompose_graph(&g).iter().map(|s| s.neighbors().len()).collect();
        assert_eq!(degs, [1, 2, 1]);

        let single = Graph::new(1, [], vec![vec![0.5, 0.5]], 0).unwrap();
        let subs = decompose_graph(&single);
        assert_eq!(subs.len(), 1);
        assert!(subs[0].neighbors().is_empty());
        assert_eq!(subs[0].center_feature(), &[0.5, 0.5]);
    }

    #[test]
    fn subgraph_carries_neighbor_features() {
        let g = Graph::new(
            3,
            [(0, 1), (0, 2)],
            vec![one_hot(3, 0), one_hot(3, 1), one_hot(3, 2)],
            0,
        )
        .unwrap();
        let s = Subgraph::new(&g, 0);
        let feats: Vec<_> = s.neighbor_features().collect();
        assert_eq!(feats, vec![&one_hot(3, 1)[..], &one_hot(3, 2)[..]]);
    }

    fn star(n: usize) -> Graph {
        Graph::new(n + 1, (1..=n).map(|i| (0, i)), vec![vec![0.0]; n + 1], 0).unwrap()
    }

    #[test]
    fn partition_examples() {
        let g = star(5);
        let chunks = partition_neighbors(&Subgraph::new(&g, 0), 2).unwrap();
        assert_eq!(chunks.chunks.iter().map(|c| c.len()).collect::<Vec<_>>(), [2, 2, 1]);

        let g = star(3);
        let chunks = partition_neighbors(&Subgraph::new(&g, 0), 8).unwrap();
        assert_eq!(chunks.chunks, vec![&[1, 2, 3][..]]);

        let g = star(0);
        for cap in [1, 4] {
            assert!(partition_neighbors(&Subgraph::new(&g, 0), cap).unwrap().is_empty());
        }
        assert!(matches!(
            partition_neighbors(&Subgraph::new(&g, 0), 0),
            Err(GraphError::ZeroCapacity)
        ));
    }

    proptest! {
        #[test]
        fn chunks_reconstruct_neighbors(n in 0usize..30, cap in 1usize..10) {
            let g = star(n);
            let s = Subgraph::new(&g, 0);
            let chunks = partition_neighbors(&s, cap).unwrap();
            prop_assert!(chunks.chunks.iter().all(|c| !c.is_empty() && c.len() <= cap));
            let joined: Vec<usize> = chunks.chunks.concat();
            prop_assert_eq!(joined, s.neighbors().to_vec());
        }
    }

    #[test]
    fn parse_toy_dataset() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), "TOY", "1, 2\n2, 1\n", "1\n1\n", "-1\n", "3\n7\n");
        let ds = parse_tudataset(dir.path(), "TOY").unwrap();
        assert_eq!(ds.graphs.len(), 1);
        let g = &ds.graphs[0];
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(ds.node_labels, [3, 7]);
        assert_eq!(g.feature(0), &[1.0, 0.0]);
        assert_eq!(g.feature(1), &[0.0, 1.0]);
        assert_eq!(g.label(), 0);
    }

    #[test]
    fn parse_remaps_labels_and_splits_graphs() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(
            dir.path(),
            "T",
            "1, 2\n2, 1\n3, 4\n4, 3\n4, 5\n5, 4\n",
            "1\n1\n2\n2\n2\n",
            "2\n1\n",
            "0\n0\n1\n0\n1\n",
        );
        let ds = parse_tudataset(dir.path(), "T").unwrap();
        assert_eq!(ds.class_labels, [1, 2]);
        assert_eq!(ds.graphs[0].label(), 1);
        assert_eq!(ds.graphs[1].label(), 0);
        assert_eq!(ds.graphs[1].edges(), &[(0, 1), (1, 2)]);
        assert_eq!(ds.class_counts(), [1, 1]);
    }

    #[test]
    fn parse_errors_name_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), "D", "1, 5\n", "1\n1\n1\n1\n", "0\n", "0\n0\n0\n0\n");
        match parse_tudataset(dir.path(), "D") {
            Err(GraphError::DanglingReference { path, line: 1, id: 5, count: 4, .. }) => {
                assert!(path.ends_with("D_A.txt"))
            }
            other => panic!("unexpected {other:?}"),
        }

        write_dataset(dir.path(), "D", "1, x\n", "1\n1\n", "0\n", "0\n0\n");
        assert!(matches!(
            parse_tudataset(dir.path(), "D"),
            Err(GraphError::InvalidToken { line: 1, .. })
        ));

        write_dataset(dir.path(), "D", "", "1\n2\n3\n", "0\n1\n2\n", "0\n0\n0\n");
        let err = parse_tudataset(dir.path(), "D").unwrap_err();
        assert!(matches!(err, GraphError::TooManyClasses { line: 3, label: 2, .. }));
        assert!(err.to_string().contains("D_graph_labels.txt:3"));

        write_dataset(dir.path(), "D", "", "1\n3\n", "0\n", "0\n0\n");
        assert!(matches!(
            parse_tudataset(dir.path(), "D"),
            Err(GraphError::DanglingReference { kind: "graph", line: 2, .. })
        ));

        fs::remove_file(dir.path().join("D_node_labels.txt")).unwrap();
        let err = parse_tudataset(dir.path(), "D").unwrap_err();
        assert!(matches!(err, GraphError::MissingFile(_)));
        assert!(err.to_string().contains("D_node_labels.txt"));
    }

    #[test]
    fn parse_rejects_cross_graph_edges() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), "X", "1, 2\n", "1\n2\n", "0\n1\n", "0\n0\n");
        assert!(matches!(
            parse_tudataset(dir.path(), "X"),
            Err(GraphError::CrossGraphEdge { line: 1, .. })
        ));
    }
}
