use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, Result};

const MAX_PAIRING_ATTEMPTS: usize = 100_000;

/// An undirected weighted simple graph. Serialized as
/// `{"n": .., "edges": [[i, j], ..], "weights": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Graph> {
        let edges = f.edges.iter().map(|e| (e[0], e[1])).collect();
        match f.weights {
            Some(w) => Graph::weighted(f.n, edges, w),
            None => Graph::new(f.n, edges),
        }
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> GraphFile {
        GraphFile {
            n: g.n,
            edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(),
            weights: Some(g.weights),
        }
    }
}

impl Graph {
    /// Unit-weight graph.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let w = vec![1.0; edges.len()];
        Graph::weighted(n, edges, w)
    }

    /// Edges are stored with `i < j`, in the given order.
    pub fn weighted(n: usize, edges: Vec<(usize, usize)>, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Graph("graph needs at least one vertex".into()));
        }
        if weights.len() != edges.len() {
            return Err(Error::Graph(format!("{} edges but {} weights", edges.len(), weights.len())));
        }
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::Graph(format!("edge ({a}, {b}) references a vertex >= {n}")));
            }
            if a == b {
                return Err(Error::Graph(format!("self-loop at vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if norm.contains(&e) {
                return Err(Error::Graph(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            norm.push(e);
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::Graph(format!("non-finite weight {w}")));
        }
        Ok(Graph { n, edges: norm, weights })
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Graph("a cycle needs at least 3 vertices".into()));
        }
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::new(n, edges)
    }

    /// Random simple `degree`-regular graph from the pairing model,
    /// rejecting pairings with loops or repeated edges.
    pub fn regular(n: usize, degree: usize, seed: u64) -> Result<Self> {
        if degree >= n {
            return Err(Error::Graph(format!("degree {degree} must be below n = {n}")));
        }
        if (n * degree) % 2 == 1 {
            return Err(Error::Graph(format!("n * degree = {} is odd", n * degree)));
        }
        let mut rng = seed::rng(seed, 0);
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(degree)).collect();
        'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
            points.shuffle(&mut rng);
            let mut edges: Vec<(usize, usize)> = Vec::with_capacity(points.len() / 2);
            for pair in points.chunks(2) {
                let e = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if e.0 == e.1 || edges.contains(&e) {
                    continue 'attempt;
                }
                edges.push(e);
            }
            edges.sort_unstable();
            return Graph::new(n, edges);
        }
        Err(Error::Graph(format!(
            "no simple {degree}-regular pairing on {n} vertices after {MAX_PAIRING_ATTEMPTS} attempts"
        )))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Total weight of edges cut by the bit assignment `x`
    /// (bit `v` = side of vertex `v`).
    pub fn cut_value(&self, x: usize) -> f64 {
        self.edges
            .iter()
            .zip(&self.weights)
            .filter(|(&(a, b), _)| ((x >> a) ^ (x >> b)) & 1 == 1)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Graph(e.to_string()))
    }
}
