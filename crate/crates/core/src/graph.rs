//! Bounded-degree graphs with optional spin pins, generators for the test
//! families, and the edge-list text format.
//!
//! Format (UTF-8, whitespace-delimited, `#` starts a comment):
//!
//! ```text
//! delta 3        # optional degree cap, defaults to the observed maximum
//! n 5            # optional vertex count, defaults to max id + 1
//! e 0 1
//! pin 1 +
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of pairing-model attempts before `random_regular` gives up.
pub const RANDOM_REGULAR_RETRIES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Spin::Plus => "+",
            Spin::Minus => "-",
        }
    }
}

/// A structural problem found by [`GraphParts::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    SelfLoop(usize),
    DuplicateEdge(usize, usize),
    VertexOutOfRange(usize),
    PinOutOfRange(usize),
    DegreeCapExceeded { vertex: usize, degree: usize, cap: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop(v) => write!(f, "self-loop at vertex {v}"),
            Violation::DuplicateEdge(u, v) => write!(f, "duplicate edge {u}-{v}"),
            Violation::VertexOutOfRange(v) => write!(f, "edge endpoint {v} out of range"),
            Violation::PinOutOfRange(v) => write!(f, "pinned vertex {v} out of range"),
            Violation::DegreeCapExceeded { vertex, degree, cap } => {
                write!(f, "degree cap exceeded: vertex {vertex} has degree {degree} > {cap}")
            }
        }
    }
}

impl Violation {
    fn into_error(self) -> Error {
        match self {
            Violation::SelfLoop(v) => Error::SelfLoop(v),
            Violation::DuplicateEdge(u, v) => Error::DuplicateEdge(u, v),
            Violation::VertexOutOfRange(v) | Violation::PinOutOfRange(v) => {
                Error::VertexOutOfRange { vertex: v, n: 0 }
            }
            Violation::DegreeCapExceeded { vertex, degree, cap } => {
                Error::DegreeCap { vertex, degree, cap }
            }
        }
    }
}

/// Unvalidated graph data. Turn it into a [`PinnedGraph`] with
/// [`GraphParts::build`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphParts {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub pins: BTreeMap<usize, Spin>,
    pub delta_cap: Option<usize>,
}

impl GraphParts {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut degree = vec![0usize; self.n_vertices];
        for &(u, v) in &self.edges {
            if u == v {
                out.push(Violation::SelfLoop(u));
                continue;
            }
            let mut in_range = true;
            for w in [u, v] {
                if w >= self.n_vertices {
                    out.push(Violation::VertexOutOfRange(w));
                    in_range = false;
                }
            }
            if !in_range {
                continue;
            }
            if !seen.insert((u.min(v), u.max(v))) {
                out.push(Violation::DuplicateEdge(u.min(v), u.max(v)));
                continue;
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        for &v in self.pins.keys() {
            if v >= self.n_vertices {
                out.push(Violation::PinOutOfRange(v));
            }
        }
        if let Some(cap) = self.delta_cap {
            for (vertex, &deg) in degree.iter().enumerate() {
                if deg > cap {
                    out.push(Violation::DegreeCapExceeded { vertex, degree: deg, cap });
                }
            }
        }
        out
    }

    pub fn build(self) -> Result<PinnedGraph> {
        if let Some(v) = self.validate().into_iter().next() {
            return Err(match v {
                Violation::VertexOutOfRange(w) | Violation::PinOutOfRange(w) => {
                    Error::VertexOutOfRange { vertex: w, n: self.n_vertices }
                }
                other => other.into_error(),
            });
        }
        let mut adj = vec![Vec::new(); self.n_vertices];
        let edges: Vec<(usize, usize)> =
            self.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let observed = adj.iter().map(Vec::len).max().unwrap_or(0);
        Ok(PinnedGraph {
            n_vertices: self.n_vertices,
            edges,
            adj,
            pins: self.pins,
            delta_cap: self.delta_cap.unwrap_or(observed),
        })
    }
}

/// A simple graph of bounded degree whose vertices may be pinned to a spin.
///
/// Vertices are `0..n_vertices`; the integer order is the global vertex order
/// used when ordering neighbours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PinnedGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    pins: BTreeMap<usize, Spin>,
    delta_cap: usize,
}

impl PinnedGraph {
    /// Unpinned graph with `delta_cap` set to the observed maximum degree.
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        GraphParts { n_vertices, edges: edges.to_vec(), ..Default::default() }.build()
    }

    pub fn parts(&self) -> GraphParts {
        GraphParts {
            n_vertices: self.n_vertices,
            edges: self.edges.clone(),
            pins: self.pins.clone(),
            delta_cap: Some(self.delta_cap),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(min, max)` pairs in insertion order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbours of `v` in increasing order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The declared maximum degree Δ.
    pub fn delta_cap(&self) -> usize {
        self.delta_cap
    }

    /// Branching bound d = Δ - 1 of the SAW tree below the root.
    pub fn branching(&self) -> usize {
        self.delta_cap.saturating_sub(1)
    }

    pub fn pin(&self, v: usize) -> Option<Spin> {
        self.pins.get(&v).copied()
    }

    pub fn pins(&self) -> &BTreeMap<usize, Spin> {
        &self.pins
    }

    pub fn free_vertices(&self) -> Vec<usize> {
        (0..self.n_vertices).filter(|v| !self.pins.contains_key(v)).collect()
    }

    pub fn n_free(&self) -> usize {
        self.n_vertices - self.pins.len()
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.adj[v].is_empty()
    }

    pub fn with_delta_cap(&self, cap: usize) -> Result<Self> {
        GraphParts { delta_cap: Some(cap), ..self.parts() }.build()
    }

    pub fn with_pin(&self, v: usize, spin: Spin) -> Result<Self> {
        let mut parts = self.parts();
        parts.pins.insert(v, spin);
        parts.build()
    }

    /// Always empty for a constructed graph; kept so callers can audit
    /// graphs that came from elsewhere through the same path.
    pub fn validate(&self) -> Vec<Violation> {
        self.parts().validate()
    }

    /// Vertices of `other` are shifted by `self.n_vertices()`.
    pub fn disjoint_union(&self, other: &PinnedGraph) -> Result<Self> {
        let shift = self.n_vertices;
        let mut parts = self.parts();
        parts.n_vertices += other.n_vertices;
        parts.edges.extend(other.edges.iter().map(|&(u, v)| (u + shift, v + shift)));
        parts.pins.extend(other.pins.iter().map(|(&v, &s)| (v + shift, s)));
        parts.delta_cap = Some(self.delta_cap.max(other.delta_cap));
        parts.build()
    }

    pub fn is_connected(&self) -> bool {
        if self.n_vertices == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_forest(&self) -> bool {
        // A graph is a forest iff |E| = |V| - #components.
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// Serializes to the edge-list format; `load_graph` inverts this.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("delta {}\nn {}\n", self.delta_cap, self.n_vertices);
        for &(u, v) in &self.edges {
            out.push_str(&format!("e {u} {v}\n"));
        }
        for (&v, &s) in &self.pins {
            out.push_str(&format!("pin {v} {}\n", s.token()));
        }
        out
    }
}

impl fmt::Display for PinnedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_edge_list())
    }
}

impl FromStr for PinnedGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        load_graph(s)
    }
}

pub fn load_graph(text: &str) -> Result<PinnedGraph> {
    let mut edges = Vec::new();
    let mut pins = BTreeMap::new();
    let mut delta_cap = None;
    let mut declared_n = None;
    let mut max_id: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        let int = |tok: &str| -> Result<usize> {
            tok.parse::<usize>()
                .map_err(|_| err(format!("expected a non-negative integer, got `{tok}`")))
        };
        match (tokens[0], tokens.len()) {
            ("e", 3) => {
                let (u, v) = (int(tokens[1])?, int(tokens[2])?);
                max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
                edges.push((u, v));
            }
            ("pin", 3) => {
                let v = int(tokens[1])?;
                let spin = match tokens[2] {
                    "+" => Spin::Plus,
                    "-" => Spin::Minus,
                    other => return Err(err(format!("bad pin token `{other}`"))),
                };
                if let Some(prev) = pins.insert(v, spin) {
                    if prev != spin {
                        return Err(err(format!("contradictory pins for vertex {v}")));
                    }
                }
                max_id = Some(max_id.map_or(v, |m| m.max(v)));
            }
            ("delta", 2) => delta_cap = Some(int(tokens[1])?),
            ("n", 2) => declared_n = Some(int(tokens[1])?),
            (kw, _) => return Err(err(format!("unrecognised line starting with `{kw}`"))),
        }
    }

    let inferred = max_id.map_or(0, |m| m + 1);
    let n_vertices = match declared_n {
        Some(n) if n < inferred => {
            return Err(Error::VertexOutOfRange { vertex: inferred - 1, n });
        }
        Some(n) => n,
        None => inferred,
    };
    GraphParts { n_vertices, edges, pins, delta_cap }.build()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Path,
    Cycle,
    Complete,
    Grid2d,
    RandomRegular,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Path => "path",
            Family::Cycle => "cycle",
            Family::Complete => "complete",
            Family::Grid2d => "grid2d",
            Family::RandomRegular => "random_regular",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(Family::Path),
            "cycle" => Ok(Family::Cycle),
            "complete" => Ok(Family::Complete),
            "grid2d" | "grid" => Ok(Family::Grid2d),
            "random_regular" | "random-regular" | "regular" => Ok(Family::RandomRegular),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

/// Builds a member of `family`.
///
/// `size` is the vertex count, except for `Grid2d` where it is the side
/// length of a `size x size` grid. `degree` and `seed` are only read by
/// `RandomRegular`.
pub fn generate_family(family: Family, size: usize, degree: usize, seed: u64) -> Result<PinnedGraph> {
    match family {
        Family::Path => {
            if size == 0 {
                return Err(Error::Infeasible("path needs at least one vertex".into()));
            }
            let edges: Vec<_> = (1..size).map(|i| (i - 1, i)).collect();
            PinnedGraph::new(size, &edges)
        }
        Family::Cycle => {
            if size < 3 {
                return Err(Error::Infeasible(format!("cycle needs at least 3 vertices, got {size}")));
            }
            let edges: Vec<_> = (0..size).map(|i| (i, (i + 1) % size)).collect();
            PinnedGraph::new(size, &edges)
        }
        Family::Complete => {
            if size == 0 {
                return Err(Error::Infeasible("complete graph needs at least one vertex".into()));
            }
            let mut edges = Vec::new();
            for u in 0..size {
                for v in u + 1..size {
                    edges.push((u, v));
                }
            }
            PinnedGraph::new(size, &edges)
        }
        Family::Grid2d => {
            if size == 0 {
                return Err(Error::Infeasible("grid side must be positive".into()));
            }
            let id = |r: usize, c: usize| r * size + c;
            let mut edges = Vec::new();
            for r in 0..size {
                for c in 0..size {
                    if c + 1 < size {
                        edges.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < size {
                        edges.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            PinnedGraph::new(size * size, &edges)
        }
        Family::RandomRegular => random_regular(size, degree, seed),
    }
}

/// Pairing model with rejection of loops and multi-edges.
pub fn random_regular(n: usize, degree: usize, seed: u64) -> Result<PinnedGraph> {
    if degree >= n || (n * degree) % 2 != 0 {
        return Err(Error::Infeasible(format!(
            "no simple {degree}-regular graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(degree)).collect();
    'attempt: for _ in 0..RANDOM_REGULAR_RETRIES {
        points.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(points.len() / 2);
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return PinnedGraph::new(n, &edges);
    }
    Err(Error::GenerationFailed(RANDOM_REGULAR_RETRIES))
}

/// Random connected graph with maximum degree at most `max_degree`: a random
/// recursive tree followed by `extra_edges` attempted chord insertions.
pub fn random_connected(n: usize, max_degree: usize, extra_edges: usize, seed: u64) -> Result<PinnedGraph> {
    if n == 0 || (n > 2 && max_degree < 2) || (n == 2 && max_degree < 1) {
        return Err(Error::Infeasible(format!(
            "no connected graph on {n} vertices with maximum degree {max_degree}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for v in 1..n {
        let open: Vec<usize> = (0..v).filter(|&u| degree[u] < max_degree).collect();
        let u = open[rng.gen_range(0..open.len())];
        degree[u] += 1;
        degree[v] += 1;
        seen.insert((u, v));
        edges.push((u, v));
    }
    for _ in 0..extra_edges {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let key = (u.min(v), u.max(v));
        if u == v || degree[u] >= max_degree || degree[v] >= max_degree || seen.contains(&key) {
            continue;
        }
        degree[u] += 1;
        degree[v] += 1;
        seen.insert(key);
        edges.push(key);
    }
    PinnedGraph::new(n, &edges)
}
