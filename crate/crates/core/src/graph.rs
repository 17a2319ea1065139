//! Communication topology, Laplacian algebra and the disagreement objective
//! `V(x) = ½ xᵀ L x`.
//!
//! Edges are kept as an explicit pair set plus per-agent adjacency lists, so
//! neighbor and degree queries stay local. The Laplacian is only materialized
//! for eigenvalue work and cross-checks.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// 1-based agent identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(usize);

impl AgentId {
    /// Wraps a 1-based id. Range checks happen against a [`Graph`].
    pub const fn new(id: usize) -> Self {
        AgentId(id)
    }

    /// Wraps a 0-based index.
    pub const fn from_index(index: usize) -> Self {
        AgentId(index + 1)
    }

    pub const fn get(self) -> usize {
        self.0
    }

    /// 0-based position in state vectors and per-agent tables.
    pub const fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Agent positions, one finite scalar per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(idx));
        }
        Ok(StateVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, id: AgentId) -> f64 {
        self.0[id.index()]
    }

    /// Largest pairwise disagreement `max |x_i - x_j|`.
    pub fn spread(&self) -> f64 {
        let lo = self.0.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if self.0.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = f64;

    fn index(&self, idx: usize) -> &f64 {
        &self.0[idx]
    }
}

/// Simple undirected graph on agents `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(AgentId, AgentId)>,
    adjacency: Vec<Vec<AgentId>>,
}

impl Graph {
    /// Builds a graph from 1-based pairs. Pairs are unordered; a repeated
    /// pair in either orientation is rejected, as are self-loops.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut edges = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in pairs {
            let key = insert_edge(n, &mut edges, a, b)?;
            adjacency[key.0.index()].push(key.1);
            adjacency[key.1.index()].push(key.0);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges,
            adjacency,
        })
    }

    /// Parses the plain-text graph format: first line `n`, then one `i j`
    /// pair per line. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(idx, raw)| (idx + 1, raw.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (line, header) = lines.next().ok_or(Error::GraphParse {
            line: 1,
            msg: "missing agent count".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::GraphParse {
            line,
            msg: format!("expected agent count, got {header:?}"),
        })?;

        let mut pairs = Vec::new();
        let mut seen = BTreeSet::new();
        for (line, l) in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            let parse = |s: &str| -> Result<usize> {
                s.parse().map_err(|_| Error::GraphParse {
                    line,
                    msg: format!("expected agent id, got {s:?}"),
                })
            };
            let (a, b) = match fields.as_slice() {
                [a, b] => (parse(a)?, parse(b)?),
                _ => {
                    return Err(Error::GraphParse {
                        line,
                        msg: format!("expected `i j`, got {l:?}"),
                    })
                }
            };
            insert_edge(n, &mut seen, a, b).map_err(|e| Error::GraphParse {
                line,
                msg: e.to_string(),
            })?;
            pairs.push((a, b));
        }
        Graph::new(n, pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Result<Self>> {
        Ok(Graph::parse(&std::fs::read_to_string(path)?))
    }

    /// Renders the graph in the file format accepted by [`Graph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (1..=self.n).map(AgentId)
    }

    /// Unordered edges as `(smaller, larger)` pairs, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, id: AgentId) -> bool {
        (1..=self.n).contains(&id.0)
    }

    /// Neighbors of `id`, in increasing id order.
    pub fn neighbors(&self, id: AgentId) -> Result<&[AgentId]> {
        self.check(id)?;
        Ok(&self.adjacency[id.index()])
    }

    pub fn degree(&self, id: AgentId) -> Result<usize> {
        self.neighbors(id).map(<[_]>::len)
    }

    pub(crate) fn check(&self, id: AgentId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::AgentOutOfRange {
                id: id.0,
                n: self.n,
            })
        }
    }

    /// `L = D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut lap = DMatrix::zeros(self.n, self.n);
        for &(a, b) in &self.edges {
            let (i, j) = (a.index(), b.index());
            lap[(i, i)] += 1.0;
            lap[(j, j)] += 1.0;
            lap[(i, j)] -= 1.0;
            lap[(j, i)] -= 1.0;
        }
        lap
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in &self.adjacency[v] {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    stack.push(w.index());
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `V(x) = ½ Σ_{(i,j) ∈ E} (x_i - x_j)²`.
    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(0.5
            * self
                .edges
                .iter()
                .map(|&(a, b)| {
                    let d = x[a.index()] - x[b.index()];
                    d * d
                })
                .sum::<f64>())
    }

    /// Period threshold `2 / λ_max(L)` below which synchronous periodic
    /// sampling of the consensus law converges.
    pub fn periodic_threshold(&self) -> f64 {
        let lmax = lambda_max(&self.laplacian()).expect("laplacian is symmetric");
        2.0 / lmax
    }
}

fn insert_edge(
    n: usize,
    edges: &mut BTreeSet<(AgentId, AgentId)>,
    a: usize,
    b: usize,
) -> Result<(AgentId, AgentId)> {
    for id in [a, b] {
        if id == 0 || id > n {
            return Err(Error::AgentOutOfRange { id, n });
        }
    }
    if a == b {
        return Err(Error::SelfLoop(AgentId(a)));
    }
    let key = (AgentId(a.min(b)), AgentId(a.max(b)));
    if !edges.insert(key) {
        return Err(Error::DuplicateEdge(key.0, key.1));
    }
    Ok(key)
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Graph::parse(s)
    }
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(m: &DMatrix<f64>) -> Result<f64> {
    lambda_max_pair(m).map(|(l, _)| l)
}

/// Largest eigenvalue together with a unit eigenvector.
pub fn lambda_max_pair(m: &DMatrix<f64>) -> Result<(f64, nalgebra::DVector<f64>)> {
    if !m.is_square() {
        return Err(Error::NotSymmetric);
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric);
    }
    if m.nrows() == 0 {
        return Err(Error::EmptyGraph);
    }
    let eig = SymmetricEigen::new(m.clone());
    let (idx, &lmax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    Ok((lmax, eig.eigenvectors.column(idx).into_owned()))
}

/// Largest graph size accepted by [`find_matching_edge_sets`].
pub const MAX_SEARCH_AGENTS: usize = 8;

/// Enumerates every connected simple graph on `n` agents whose objective at
/// `x0` is within `tol` of `target_v` and whose periodic threshold
/// `2/λ_max` is within `tol` of `target_period`.
///
/// Used to recover a topology that is only known through those two numbers.
pub fn find_matching_edge_sets(
    n: usize,
    x0: &[f64],
    target_v: f64,
    target_period: f64,
    tol: f64,
) -> Result<Vec<Graph>> {
    if n > MAX_SEARCH_AGENTS {
        return Err(Error::SearchTooLarge {
            n,
            max: MAX_SEARCH_AGENTS,
        });
    }
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
        .collect();
    let weights: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| 0.5 * (x0[a - 1] - x0[b - 1]).powi(2))
        .collect();

    let mut found = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let v: f64 = weights
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, w)| w)
            .sum();
        if (v - target_v).abs() > tol {
            continue;
        }
        let chosen = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &p)| p);
        let g = Graph::new(n, chosen)?;
        if !g.is_connected() {
            continue;
        }
        // A single agent has L = 0 and no finite threshold.
        let lmax = lambda_max(&g.laplacian())?;
        if lmax <= 0.0 {
            continue;
        }
        if (2.0 / lmax - target_period).abs() <= tol {
            found.push(g);
        }
    }
    Ok(found)
}
