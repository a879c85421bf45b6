//! Finite weighted graphs with a positive vertex measure.
//!
//! Vertices are dense ids `0..n`. An undirected edge `{u, v}` carries one
//! weight used in both directions; a directed graph lists every orientation
//! explicitly and may have `w_uv != w_vu`. In both cases the neighbor
//! relation `y ~ x` is symmetric, so hop distance is a metric on each
//! component.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One edge record as it appears in a graph file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Serializable description of a graph, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphData {
    pub n: usize,
    #[serde(default)]
    pub directed: bool,
    pub measure: Vec<f64>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GraphData {
    /// Checks every structural invariant of a weighted graph.
    pub fn validate(&self) -> Result<()> {
        if self.measure.len() != self.n {
            return Err(Error::MeasureLength {
                expected: self.n,
                got: self.measure.len(),
            });
        }
        for (vertex, &value) in self.measure.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonpositiveMeasure { vertex, value });
            }
        }
        let mut seen = HashSet::with_capacity(self.edges.len());
        for e in &self.edges {
            if e.u >= self.n || e.v >= self.n {
                return Err(Error::DanglingEdge {
                    u: e.u,
                    v: e.v,
                    n: self.n,
                });
            }
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u));
            }
            if !(e.w > 0.0) || !e.w.is_finite() {
                return Err(Error::NonpositiveWeight {
                    u: e.u,
                    v: e.v,
                    w: e.w,
                });
            }
            let key = if self.directed {
                (e.u, e.v)
            } else {
                (e.u.min(e.v), e.u.max(e.v))
            };
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge { u: e.u, v: e.v });
            }
        }
        if self.directed {
            for e in &self.edges {
                if !seen.contains(&(e.v, e.u)) {
                    return Err(Error::MissingReverse { u: e.u, v: e.v });
                }
            }
        }
        Ok(())
    }
}

/// A validated finite weighted graph. Immutable once built.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    data: GraphData,
    /// `adj[x]` lists `(y, w_xy)` for every `y ~ x`, sorted by `y`.
    adj: Vec<Vec<(usize, f64)>>,
    symmetric: bool,
}

impl WeightedGraph {
    pub fn from_data(data: GraphData) -> Result<Self> {
        data.validate()?;
        let mut adj = vec![Vec::new(); data.n];
        for e in &data.edges {
            adj[e.u].push((e.v, e.w));
            if !data.directed {
                adj[e.v].push((e.u, e.w));
            }
        }
        for list in &mut adj {
            list.sort_by_key(|&(y, _)| y);
        }
        let symmetric = adj.iter().enumerate().all(|(x, list)| {
            list.iter().all(|&(y, w)| {
                adj[y]
                    .binary_search_by_key(&x, |&(z, _)| z)
                    .map(|i| adj[y][i].1 == w)
                    .unwrap_or(false)
            })
        });
        Ok(Self {
            data,
            adj,
            symmetric,
        })
    }

    /// Undirected graph from `(u, v, w)` triples.
    pub fn undirected(measure: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_data(GraphData {
            n: measure.len(),
            directed: false,
            measure,
            edges: edges
                .iter()
                .map(|&(u, v, w)| EdgeRecord { u, v, w })
                .collect(),
            labels: None,
        })
    }

    /// Directed graph; every arc `(u, v)` needs a matching `(v, u)`.
    pub fn directed(measure: Vec<f64>, arcs: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_data(GraphData {
            n: measure.len(),
            directed: true,
            measure,
            edges: arcs.iter().map(|&(u, v, w)| EdgeRecord { u, v, w }).collect(),
            labels: None,
        })
    }

    pub fn n(&self) -> usize {
        self.data.n
    }

    pub fn data(&self) -> &GraphData {
        &self.data
    }

    pub fn measure(&self) -> &[f64] {
        &self.data.measure
    }

    pub fn mu(&self, x: usize) -> f64 {
        self.data.measure[x]
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adj[x]
    }

    /// True iff `w_xy = w_yx` for every edge.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn require_symmetric(&self) -> Result<()> {
        if self.symmetric {
            Ok(())
        } else {
            Err(Error::AsymmetricWeights)
        }
    }

    /// `deg(x) = sum_{y ~ x} w_xy`.
    pub fn degree(&self, x: usize) -> f64 {
        self.adj[x].iter().map(|&(_, w)| w).sum()
    }

    pub fn total_measure(&self) -> f64 {
        self.data.measure.iter().sum()
    }

    pub fn edge_count(&self) -> usize {
        self.data.edges.len()
    }

    fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.n() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(x))
        }
    }

    /// Hop distances from `source`; `None` marks unreachable vertices.
    pub fn bfs(&self, source: usize) -> Result<Vec<Option<usize>>> {
        self.check_vertex(source)?;
        let mut dist = vec![None; self.n()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap();
            for &(y, _) in &self.adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        Ok(dist)
    }

    /// Hop distance, `None` when `x` and `y` lie in different components.
    pub fn dist(&self, x: usize, y: usize) -> Result<Option<usize>> {
        self.check_vertex(y)?;
        Ok(self.bfs(x)?[y])
    }

    /// Component label per vertex, labels numbered from 0 in vertex order.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n()];
        let mut next = 0;
        for s in 0..self.n() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in &self.adj[x] {
                    if label[y] == usize::MAX {
                        label[y] = next;
                        queue.push_back(y);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// Hop diameter, `None` if the graph is disconnected or empty.
    pub fn diameter(&self) -> Option<usize> {
        if self.n() == 0 {
            return None;
        }
        let mut best = 0;
        for x in 0..self.n() {
            for d in self.bfs(x).ok()? {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Total measure of the closed hop ball `{y : dist(x, y) <= r}`.
    pub fn ball_volume(&self, x: usize, r: f64) -> Result<f64> {
        Ok(self
            .ball(x, r)?
            .into_iter()
            .map(|y| self.data.measure[y])
            .sum())
    }

    /// Vertices of the closed hop ball around `x`, in increasing id order.
    pub fn ball(&self, x: usize, r: f64) -> Result<Vec<usize>> {
        let dist = self.bfs(x)?;
        Ok(dist
            .into_iter()
            .enumerate()
            .filter_map(|(y, d)| d.filter(|&d| d as f64 <= r).map(|_| y))
            .collect())
    }

    pub fn shortest_path_dag(&self, source: usize, target: usize) -> Result<ShortestPathDag> {
        ShortestPathDag::new(self, source, target)
    }
}

/// Structural constants of a weighted graph.
///
/// Suprema over an empty set are 0 and infima are `+inf`, which only
/// matters for edgeless graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConstants {
    /// `sup_x deg(x) / mu(x)`.
    #[serde(rename = "D_mu")]
    pub d_mu: f64,
    /// `sup_{x, y ~ x} mu(x) / w_xy`.
    pub d: f64,
    /// `sup_{x, y ~ x} deg(x) / w_xy`.
    #[serde(rename = "D_w")]
    pub d_w: f64,
    /// Maximum number of neighbors.
    #[serde(rename = "N")]
    pub max_neighbors: usize,
    /// `inf_{x, y ~ x} mu(x) / w_xy`.
    pub a: f64,
    /// `sup_{x, y ~ x} mu(x) / w_xy`; always equal to `d`.
    pub b: f64,
    pub mu_max: f64,
    pub w_min: f64,
    /// Hop diameter; absent for disconnected graphs.
    pub diameter: Option<usize>,
}

impl GraphConstants {
    pub fn of(g: &WeightedGraph) -> Self {
        let mut d_mu: f64 = 0.0;
        let mut d: f64 = 0.0;
        let mut d_w: f64 = 0.0;
        let mut a = f64::INFINITY;
        let mut w_min = f64::INFINITY;
        let mut max_neighbors = 0;
        for x in 0..g.n() {
            let mu = g.mu(x);
            let deg = g.degree(x);
            d_mu = d_mu.max(deg / mu);
            max_neighbors = max_neighbors.max(g.neighbors(x).len());
            for &(_, w) in g.neighbors(x) {
                d = d.max(mu / w);
                a = a.min(mu / w);
                d_w = d_w.max(deg / w);
                w_min = w_min.min(w);
            }
        }
        let mu_max = g.measure().iter().cloned().fold(0.0, f64::max);
        Self {
            d_mu,
            d,
            d_w,
            max_neighbors,
            a,
            b: d,
            mu_max,
            w_min,
            diameter: g.diameter(),
        }
    }

    /// `D_mu + sqrt(D_mu / d)`, the drift rate shared by the Harnack,
    /// Cheng and eigenvalue estimates. Zero on an edgeless graph.
    pub fn drift_rate(&self) -> f64 {
        if self.d_mu == 0.0 {
            return 0.0;
        }
        self.d_mu + (self.d_mu / self.d).sqrt()
    }

    /// `sqrt(d * mu_max / w_min)`, the coefficient of the distance term.
    pub fn distance_coefficient(&self) -> f64 {
        (self.d * self.mu_max / self.w_min).sqrt()
    }

    /// Constant term of the gradient estimate, `sqrt(d) D_mu + sqrt(D_mu)`.
    pub fn gradient_constant(&self) -> f64 {
        self.d.sqrt() * self.d_mu + self.d_mu.sqrt()
    }
}

/// Layered DAG whose source-to-target paths are exactly the shortest paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathDag {
    pub source: usize,
    pub target: usize,
    /// Hop distance from source to target.
    pub length: usize,
    /// `layers[k]` holds the vertices at distance `k` from the source that
    /// lie on some shortest path. `layers[0] = [source]`, `layers[length] = [target]`.
    pub layers: Vec<Vec<usize>>,
    /// `arcs[k]` holds the admissible hops `(u, v)` from layer `k` to layer `k + 1`.
    pub arcs: Vec<Vec<(usize, usize)>>,
}

impl ShortestPathDag {
    pub fn new(g: &WeightedGraph, source: usize, target: usize) -> Result<Self> {
        let from_source = g.bfs(source)?;
        let from_target = g.bfs(target)?;
        let length = from_source[target].ok_or(Error::Disconnected(source, target))?;
        let on_path = |v: usize| match (from_source[v], from_target[v]) {
            (Some(a), Some(b)) => a + b == length,
            _ => false,
        };
        let mut layers = vec![Vec::new(); length + 1];
        for v in 0..g.n() {
            if on_path(v) {
                layers[from_source[v].unwrap()].push(v);
            }
        }
        let mut arcs = vec![Vec::new(); length];
        for (k, layer) in layers.iter().enumerate().take(length) {
            for &u in layer {
                for &(v, _) in g.neighbors(u) {
                    if on_path(v) && from_source[v] == Some(k + 1) {
                        arcs[k].push((u, v));
                    }
                }
            }
        }
        Ok(Self {
            source,
            target,
            length,
            layers,
            arcs,
        })
    }

    /// Number of distinct shortest paths.
    pub fn path_count(&self) -> u128 {
        let mut count = std::collections::HashMap::from([(self.source, 1u128)]);
        for layer_arcs in &self.arcs {
            let mut next = std::collections::HashMap::new();
            for &(u, v) in layer_arcs {
                *next.entry(v).or_insert(0) += count.get(&u).copied().unwrap_or(0);
            }
            count = next;
        }
        count.get(&self.target).copied().unwrap_or(0)
    }

    /// Every shortest path as a vertex sequence. Exponential in general.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![self.source];
        self.extend(0, &mut stack, &mut out);
        out
    }

    fn extend(&self, k: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == self.length {
            out.push(stack.clone());
            return;
        }
        let u = *stack.last().unwrap();
        for &(a, b) in &self.arcs[k] {
            if a == u {
                stack.push(b);
                self.extend(k + 1, stack, out);
                stack.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> WeightedGraph {
        WeightedGraph::undirected(vec![1.0, 1.0], &[(0, 1, 1.0)]).unwrap()
    }

    fn cycle(n: usize) -> WeightedGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        WeightedGraph::undirected(vec![1.0; n], &edges).unwrap()
    }

    #[test]
    fn validation_errors() {
        assert!(p2().is_symmetric());
        assert!(matches!(
            WeightedGraph::undirected(vec![1.0, 1.0], &[(0, 1, 0.0)]),
            Err(Error::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::undirected(vec![1.0, 1.0], &[(0, 0, 1.0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            WeightedGraph::undirected(vec![1.0, 1.0], &[(0, 2, 1.0)]),
            Err(Error::DanglingEdge { .. })
        ));
        assert!(matches!(
            WeightedGraph::undirected(vec![1.0, -1.0], &[(0, 1, 1.0)]),
            Err(Error::NonpositiveMeasure { vertex: 1, .. })
        ));
        assert!(matches!(
            WeightedGraph::undirected(vec![1.0, 1.0], &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            WeightedGraph::directed(vec![1.0, 1.0], &[(0, 1, 1.0)]),
            Err(Error::MissingReverse { u: 0, v: 1 })
        ));
    }

    #[test]
    fn directed_symmetry_flag() {
        let sym = WeightedGraph::directed(vec![1.0, 1.0], &[(0, 1, 2.0), (1, 0, 2.0)]).unwrap();
        assert!(sym.is_symmetric());
        let asym = WeightedGraph::directed(vec![1.0, 1.0], &[(0, 1, 2.0), (1, 0, 3.0)]).unwrap();
        assert!(!asym.is_symmetric());
        assert_eq!(asym.degree(0), 2.0);
        assert_eq!(asym.degree(1), 3.0);
    }

    #[test]
    fn p2_constants() {
        let c = GraphConstants::of(&p2());
        assert_eq!(c.d_mu, 1.0);
        assert_eq!(c.d, 1.0);
        assert_eq!(c.max_neighbors, 1);
        assert_eq!(c.a, 1.0);
        assert_eq!(c.b, 1.0);
        assert_eq!(c.diameter, Some(1));
    }

    #[test]
    fn k3_degree_measure_constants() {
        let g = WeightedGraph::undirected(
            vec![2.0, 2.0, 2.0],
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
        )
        .unwrap();
        let c = GraphConstants::of(&g);
        assert_eq!(c.d_mu, 1.0);
        assert_eq!(c.d, 2.0);
        assert_eq!(c.max_neighbors, 2);
    }

    #[test]
    fn disconnected_has_no_diameter() {
        let g = WeightedGraph::undirected(vec![1.0; 4], &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(GraphConstants::of(&g).diameter, None);
        assert_eq!(g.dist(0, 3).unwrap(), None);
        assert_eq!(g.component_count(), 2);
        assert!(matches!(
            g.shortest_path_dag(0, 3),
            Err(Error::Disconnected(0, 3))
        ));
    }

    #[test]
    fn distances_and_balls() {
        let g = p2();
        assert_eq!(g.dist(0, 0).unwrap(), Some(0));
        assert_eq!(g.dist(0, 1).unwrap(), Some(1));
        assert!(matches!(g.dist(0, 5), Err(Error::UnknownVertex(5))));
        assert_eq!(g.ball_volume(0, 0.0).unwrap(), 1.0);
        assert_eq!(g.ball_volume(0, 1.0).unwrap(), 2.0);
        let c = cycle(6);
        assert_eq!(c.ball_volume(0, 0.5).unwrap(), 1.0);
        assert_eq!(c.ball_volume(0, 2.0f64.sqrt()).unwrap(), 3.0);
        assert_eq!(c.ball_volume(0, 3.0).unwrap(), 6.0);
        assert_eq!(c.ball_volume(0, 100.0).unwrap(), 6.0);
    }

    #[test]
    fn dag_fixtures() {
        let g = p2();
        let dag = g.shortest_path_dag(0, 0).unwrap();
        assert_eq!(dag.layers, vec![vec![0]]);
        assert!(dag.arcs.is_empty());
        assert_eq!(dag.paths(), vec![vec![0]]);

        let dag = g.shortest_path_dag(0, 1).unwrap();
        assert_eq!(dag.arcs, vec![vec![(0, 1)]]);

        let c4 = cycle(4);
        let dag = c4.shortest_path_dag(0, 2).unwrap();
        assert_eq!(dag.length, 2);
        assert_eq!(dag.path_count(), 2);
        let mut paths = dag.paths();
        paths.sort();
        assert_eq!(paths, vec![vec![0, 1, 2], vec![0, 3, 2]]);
    }
}
