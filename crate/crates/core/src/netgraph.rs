//! Communication graphs: proximity graphs induced by robot positions, the
//! deviation-cost complete graph over greedy endpoints, and spanning trees.

use crate::error::{CsmError, Result};
use crate::geometry::Point;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

/// Undirected graph with an edge between every pair of robots at most `r_c`
/// apart.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityGraph {
    pub positions: Vec<Point>,
    pub r_c: f64,
    /// Pairs `(i, j)` with `i < j`, in lexicographic order.
    pub edges: Vec<(usize, usize)>,
}

impl ProximityGraph {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        self.edges.binary_search(&key).is_ok()
    }
}

pub fn build_proximity_graph(positions: &[Point], r_c: f64) -> ProximityGraph {
    let n = positions.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if (positions[i] - positions[j]).norm() <= r_c {
                edges.push((i, j));
            }
        }
    }
    ProximityGraph {
        positions: positions.to_vec(),
        r_c,
        edges,
    }
}

/// True iff the graph has a single connected component. An empty graph
/// counts as connected.
pub fn is_connected(g: &ProximityGraph) -> bool {
    let n = g.len();
    if n <= 1 {
        return true;
    }
    let mut uf = UnionFind::new(n);
    for &(i, j) in &g.edges {
        uf.union(i, j);
    }
    uf.components() == 1
}

/// Least distance the farther-moving robot of a pair must travel to bring the
/// pair within `r_c`: `max(½(‖x_i − x_j‖ − r_c), 0)`.
pub fn edge_weight(x_i: &Point, x_j: &Point, r_c: f64) -> f64 {
    (0.5 * ((x_i - x_j).norm() - r_c)).max(0.0)
}

/// Complete graph `K_N` with a symmetric, non-negative weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCompleteGraph {
    n: usize,
    weights: Vec<f64>,
}

impl WeightedCompleteGraph {
    /// Deviation-cost graph over the greedy endpoints.
    pub fn from_endpoints(endpoints: &[Point], r_c: f64) -> Self {
        let n = endpoints.len();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = edge_weight(&endpoints[i], &endpoints[j], r_c);
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        WeightedCompleteGraph { n, weights }
    }

    /// Arbitrary weights, given row-major. Must be square, symmetric,
    /// non-negative with a zero diagonal.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut weights = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(CsmError::InvalidGraph(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            weights.extend_from_slice(row);
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(CsmError::InvalidGraph(format!("non-zero diagonal at {i}")));
            }
            for j in 0..n {
                let w = weights[i * n + j];
                if !(w >= 0.0) || w != weights[j * n + i] {
                    return Err(CsmError::InvalidGraph(format!(
                        "weight ({i},{j}) must be symmetric and non-negative"
                    )));
                }
            }
        }
        Ok(WeightedCompleteGraph { n, weights })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// All `(i, j)` with `i < j`, sorted by `(weight, i, j)`.
    fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .collect();
        edges.sort_by(|a, b| {
            self.weight(a.0, a.1)
                .total_cmp(&self.weight(b.0, b.1))
                .then(a.cmp(b))
        });
        edges
    }
}

/// `N − 1` edges spanning `N` vertices without cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    pub n: usize,
    /// Pairs `(i, j)` with `i < j`, in the order they were added.
    pub edges: Vec<(usize, usize)>,
}

impl SpanningTree {
    /// Validates that `edges` form a spanning tree over `n` vertices.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 || edges.len() != n - 1 {
            return Err(CsmError::InvalidGraph(format!(
                "a spanning tree over {n} vertices needs {} edges, got {}",
                n.saturating_sub(1),
                edges.len()
            )));
        }
        let mut uf = UnionFind::new(n);
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(CsmError::InvalidGraph(format!("bad edge ({a},{b})")));
            }
            if !uf.union(a, b) {
                return Err(CsmError::InvalidGraph(format!("edge ({a},{b}) closes a cycle")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        Ok(SpanningTree {
            n,
            edges: normalized,
        })
    }

    pub fn total_weight(&self, k: &WeightedCompleteGraph) -> f64 {
        self.edges.iter().map(|&(i, j)| k.weight(i, j)).sum()
    }
}

/// Kruskal's algorithm. Equal weights are broken by vertex indices, so the
/// result is deterministic.
pub fn mst(k: &WeightedCompleteGraph) -> Result<SpanningTree> {
    kruskal(k, |_, _| true)
}

/// Minimum spanning tree of `k` using only edges of `g`; `None` when `g` is
/// disconnected.
pub fn mst_within(k: &WeightedCompleteGraph, g: &ProximityGraph) -> Option<SpanningTree> {
    if k.len() != g.len() {
        return None;
    }
    kruskal(k, |i, j| g.has_edge(i, j)).ok()
}

fn kruskal<P: Fn(usize, usize) -> bool>(
    k: &WeightedCompleteGraph,
    allowed: P,
) -> Result<SpanningTree> {
    let n = k.len();
    if n == 0 {
        return Err(CsmError::InvalidGraph("empty graph".into()));
    }
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for (i, j) in k.sorted_edges() {
        if edges.len() == n - 1 {
            break;
        }
        if allowed(i, j) && uf.union(i, j) {
            edges.push((i, j));
        }
    }
    if edges.len() != n - 1 {
        return Err(CsmError::InvalidGraph("no spanning tree over allowed edges".into()));
    }
    Ok(SpanningTree { n, edges })
}

/// Heaviest edge of `t` (0 for a single vertex).
pub fn bottleneck(t: &SpanningTree, k: &WeightedCompleteGraph) -> f64 {
    t.edges
        .iter()
        .map(|&(i, j)| k.weight(i, j))
        .fold(0.0, f64::max)
}
