//! Weitz's self-avoiding-walk tree and its complex tree recurrence.
//!
//! Node `ω = (v, v₁, …, v_l)` gets one child per neighbour of `v_l`:
//!
//! * an unvisited free neighbour extends the walk;
//! * an unvisited pinned neighbour becomes a leaf carrying that pin;
//! * a neighbour `u` already on the walk (other than `v_{l−1}`) closes a
//!   cycle and becomes a pinned leaf: with `u'` the successor of `u` on the
//!   walk, the leaf is `+` when `v_l < u'` and `−` otherwise.
//!
//! Neighbour orders are the global integer vertex order.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExactEngine, Ratio};
use crate::graph::{PinnedGraph, Spin};

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Relative size of `βa + b` (child pair `(a, b)`) below which the step
/// counts as hitting the pole `βx + 1 = 0`.
const POLE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodePin {
    Free,
    Plus,
    Minus,
}

impl From<Spin> for NodePin {
    fn from(s: Spin) -> Self {
        match s {
            Spin::Plus => NodePin::Plus,
            Spin::Minus => NodePin::Minus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SawNode {
    /// Last vertex of the walk this node stands for.
    pub walk_end: usize,
    pub parent: Option<usize>,
    pub pin: NodePin,
    pub children: Vec<usize>,
}

/// One application of `F_{β,k,s}` during evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecurrenceStep {
    pub node: usize,
    pub k: usize,
    pub s: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SawTree {
    nodes: Vec<SawNode>,
    root: usize,
    delta_cap: usize,
}

impl SawTree {
    pub fn nodes(&self) -> &[SawNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn delta_cap(&self) -> usize {
        self.delta_cap
    }

    pub fn depth(&self, mut node: usize) -> usize {
        let mut depth = 0;
        while let Some(p) = self.nodes[node].parent {
            node = p;
            depth += 1;
        }
        depth
    }

    /// Vertices along the root-to-node walk.
    pub fn walk(&self, mut node: usize) -> Vec<usize> {
        let mut out = vec![self.nodes[node].walk_end];
        while let Some(p) = self.nodes[node].parent {
            node = p;
            out.push(self.nodes[node].walk_end);
        }
        out.reverse();
        out
    }

    /// `(k, s)` for every internal node: `k` free children, `s` = minus-pinned
    /// minus plus-pinned children. Free leaves are initial inputs and are
    /// not listed.
    pub fn recurrence_steps(&self) -> Vec<RecurrenceStep> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.pin == NodePin::Free && !n.children.is_empty())
            .map(|(id, n)| {
                let (k, s) = self.step_shape(n);
                RecurrenceStep { node: id, k, s }
            })
            .collect()
    }

    fn step_shape(&self, node: &SawNode) -> (usize, i32) {
        let mut k = 0;
        let mut s = 0i32;
        for &c in &node.children {
            match self.nodes[c].pin {
                NodePin::Free => k += 1,
                NodePin::Minus => s += 1,
                NodePin::Plus => s -= 1,
            }
        }
        (k, s)
    }

    /// Indented dump, one node per line: `<vertex> [pin]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            let node = &self.nodes[id];
            let pin = match node.pin {
                NodePin::Free => "",
                NodePin::Plus => " +",
                NodePin::Minus => " -",
            };
            let _ = writeln!(out, "{:indent$}{}{}", "", node.walk_end, pin, indent = 2 * depth);
            for &c in node.children.iter().rev() {
                stack.push((c, depth + 1));
            }
        }
        out
    }
}

pub fn build_saw_tree(g: &PinnedGraph, v: usize) -> Result<SawTree> {
    build_saw_tree_capped(g, v, DEFAULT_NODE_CAP)
}

pub fn build_saw_tree_capped(g: &PinnedGraph, v: usize, node_cap: usize) -> Result<SawTree> {
    if v >= g.n_vertices() {
        return Err(Error::VertexOutOfRange { vertex: v, n: g.n_vertices() });
    }
    if g.pin(v).is_some() {
        return Err(Error::PinnedVertex(v));
    }
    if g.is_isolated(v) {
        return Err(Error::IsolatedVertex(v));
    }
    let mut builder = Builder {
        g,
        nodes: vec![SawNode { walk_end: v, parent: None, pin: NodePin::Free, children: Vec::new() }],
        walk: vec![v],
        position: vec![None; g.n_vertices()],
        node_cap,
    };
    builder.position[v] = Some(0);
    builder.expand(0)?;
    Ok(SawTree { nodes: builder.nodes, root: 0, delta_cap: g.delta_cap() })
}

struct Builder<'a> {
    g: &'a PinnedGraph,
    nodes: Vec<SawNode>,
    walk: Vec<usize>,
    /// Index of each vertex on the current walk.
    position: Vec<Option<usize>>,
    node_cap: usize,
}

impl Builder<'_> {
    fn push(&mut self, parent: usize, walk_end: usize, pin: NodePin) -> Result<usize> {
        if self.nodes.len() >= self.node_cap {
            return Err(Error::NodeCap(self.node_cap));
        }
        let id = self.nodes.len();
        self.nodes.push(SawNode { walk_end, parent: Some(parent), pin, children: Vec::new() });
        self.nodes[parent].children.push(id);
        Ok(id)
    }

    fn expand(&mut self, node: usize) -> Result<()> {
        let l = self.walk.len() - 1;
        let last = self.walk[l];
        let pred = if l > 0 { Some(self.walk[l - 1]) } else { None };
        for &w in self.g.neighbors(last) {
            if Some(w) == pred {
                continue;
            }
            if let Some(j) = self.position[w] {
                let successor = self.walk[j + 1];
                let pin = if last < successor { NodePin::Plus } else { NodePin::Minus };
                self.push(node, w, pin)?;
            } else if let Some(spin) = self.g.pin(w) {
                self.push(node, w, spin.into())?;
            } else {
                let child = self.push(node, w, NodePin::Free)?;
                self.position[w] = Some(self.walk.len());
                self.walk.push(w);
                self.expand(child)?;
                self.walk.pop();
                self.position[w] = None;
            }
        }
        Ok(())
    }
}

/// Evaluates `R_{T,ρ}(β)` bottom-up.
///
/// Each node carries a projective pair `(Z⁺, Z⁻)` rescaled to unit max-norm.
/// Pinned children are folded into `β^s` so a node with `k` free, `s₁`
/// minus-pinned and `s₂` plus-pinned children applies `F_{β,k,s₁−s₂}`.
pub fn eval_saw_ratio(t: &SawTree, beta: Complex64) -> Result<Ratio> {
    let one = Complex64::new(1.0, 0.0);
    let mut pairs = vec![(one, one); t.nodes.len()];
    // Children always have larger ids than their parent.
    for id in (0..t.nodes.len()).rev() {
        let node = &t.nodes[id];
        if node.pin != NodePin::Free {
            continue;
        }
        let (mut num, mut den) = (one, one);
        let mut s = 0i32;
        for &c in &node.children {
            match t.nodes[c].pin {
                NodePin::Minus => s += 1,
                NodePin::Plus => s -= 1,
                NodePin::Free => {
                    let (a, b) = pairs[c];
                    let up = beta * a + b;
                    if up.norm() <= POLE_TOL * ((beta * a).norm() + b.norm()) {
                        return Err(Error::Pole { node: c });
                    }
                    num *= beta * b + a;
                    den *= up;
                }
            }
        }
        if s > 0 {
            num *= beta.powi(s);
        } else if s < 0 {
            den *= beta.powi(-s);
        }
        let scale = num.norm().max(den.norm());
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Pole { node: id });
        }
        pairs[id] = (num / scale, den / scale);
    }
    let (num, den) = pairs[t.root];
    Ratio::from_pair(num, den).ok_or(Error::Pole { node: t.root })
}

/// `|R_SAW − R_exact| / max(1, |R_exact|)`.
pub fn weitz_residual(g: &PinnedGraph, v: usize, beta: Complex64) -> Result<f64> {
    weitz_residual_with(&ExactEngine::default(), g, v, beta)
}

pub fn weitz_residual_with(engine: &ExactEngine, g: &PinnedGraph, v: usize, beta: Complex64) -> Result<f64> {
    let tree = build_saw_tree(g, v)?;
    let saw = eval_saw_ratio(&tree, beta)?;
    let exact = engine.pinned_ratio(g, v, beta)?.ratio;
    Ok(match (saw, exact) {
        (Ratio::Finite(a), Ratio::Finite(b)) => (a - b).norm() / b.norm().max(1.0),
        (Ratio::Infinite, Ratio::Infinite) => 0.0,
        // Compare reciprocals when only one side overflowed to infinity.
        (Ratio::Infinite, Ratio::Finite(b)) => (1.0 / b).norm(),
        (Ratio::Finite(a), Ratio::Infinite) => (1.0 / a).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_family, random_connected, Family};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn triangle() -> PinnedGraph {
        generate_family(Family::Cycle, 3, 0, 0).unwrap()
    }

    #[test]
    fn triangle_matches_figure() {
        // Vertices 1, 2, 3 of the figure are 0, 1, 2 here.
        let t = build_saw_tree(&triangle(), 0).unwrap();
        assert_eq!(t.len(), 7);
        assert_eq!(t.dump(), "0\n  1\n    2\n      0 -\n  2\n    1\n      0 +\n");
    }

    #[test]
    fn k2_and_path_trees() {
        let k2 = PinnedGraph::new(2, &[(0, 1)]).unwrap();
        let t = build_saw_tree(&k2, 0).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.nodes()[1].pin, NodePin::Free);
        assert_eq!(eval_saw_ratio(&t, c(0.4, 0.3)).unwrap(), Ratio::Finite(c(1.0, 0.0)));

        let p3 = generate_family(Family::Path, 3, 0, 0).unwrap();
        let t = build_saw_tree(&p3, 1).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.nodes()[0].children.len(), 2);
        assert!(t.nodes()[1..].iter().all(|n| n.pin == NodePin::Free && n.children.is_empty()));
    }

    #[test]
    fn pinned_child_folds_into_beta_power() {
        // Root with a single minus-pinned neighbour: F_{β,0,1} = β.
        let g = PinnedGraph::new(2, &[(0, 1)]).unwrap().with_pin(1, Spin::Minus).unwrap();
        let t = build_saw_tree(&g, 0).unwrap();
        assert_eq!(t.recurrence_steps(), vec![RecurrenceStep { node: 0, k: 0, s: 1 }]);
        assert_eq!(eval_saw_ratio(&t, c(2.0, 0.0)).unwrap(), Ratio::Finite(c(2.0, 0.0)));

        let g = PinnedGraph::new(2, &[(0, 1)]).unwrap().with_pin(1, Spin::Plus).unwrap();
        let t = build_saw_tree(&g, 0).unwrap();
        assert_eq!(eval_saw_ratio(&t, c(0.0, 0.0)).unwrap(), Ratio::Infinite);
    }

    #[test]
    fn triangle_ratio_is_one() {
        let t = build_saw_tree(&triangle(), 0).unwrap();
        let r = eval_saw_ratio(&t, c(2.0, 0.0)).unwrap().finite().unwrap();
        assert!((r - 1.0).norm() < 1e-12);
        let exact = ExactEngine::default().pinned_ratio(&triangle(), 0, c(2.0, 0.0)).unwrap();
        assert!((r - exact.ratio.finite().unwrap()).norm() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let k2 = PinnedGraph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(weitz_residual(&k2, 0, c(0.7, 0.1)).unwrap(), 0.0);
        assert!(weitz_residual(&triangle(), 1, c(1.3, 0.0)).unwrap() <= 1e-10);
        let g = generate_family(Family::RandomRegular, 8, 3, 7).unwrap();
        assert!(weitz_residual(&g, 0, c(0.9, 0.05)).unwrap() <= 1e-9);
    }

    #[test]
    fn pole_is_reported() {
        // K2 pinned - on vertex 1, then path 0-1-2: child ratio at vertex 1
        // is h(0)... easier: a free leaf has ratio 1, so β = -1 gives βx+1 = 0.
        let k2 = PinnedGraph::new(2, &[(0, 1)]).unwrap();
        let t = build_saw_tree(&k2, 0).unwrap();
        assert_eq!(eval_saw_ratio(&t, c(-1.0, 0.0)).unwrap_err(), Error::Pole { node: 1 });
    }

    #[test]
    fn node_cap_and_preconditions() {
        let k5 = generate_family(Family::Complete, 5, 0, 0).unwrap();
        assert_eq!(build_saw_tree_capped(&k5, 0, 10).unwrap_err(), Error::NodeCap(10));
        let g = PinnedGraph::new(3, &[(0, 1)]).unwrap();
        assert_eq!(build_saw_tree(&g, 2).unwrap_err(), Error::IsolatedVertex(2));
        let g = g.with_pin(0, Spin::Plus).unwrap();
        assert_eq!(build_saw_tree(&g, 0).unwrap_err(), Error::PinnedVertex(0));
    }

    #[test]
    fn structural_invariants_on_random_graphs() {
        for seed in 0..60 {
            let g = random_connected(2 + (seed as usize % 9), 4, 10, seed).unwrap();
            let mut parts = g.parts();
            if seed % 3 == 0 {
                parts.pins.insert(g.n_vertices() - 1, Spin::Minus);
            }
            let g = parts.build().unwrap();
            let delta = g.delta_cap();
            for v in g.free_vertices() {
                if g.is_isolated(v) {
                    continue;
                }
                let t = build_saw_tree(&g, v).unwrap();
                for (id, node) in t.nodes().iter().enumerate() {
                    let bound = if id == t.root() { delta } else { delta - 1 };
                    assert!(node.children.len() <= bound);
                    if node.pin != NodePin::Free {
                        assert!(node.children.is_empty());
                    }
                    // Self-avoiding except possibly the final vertex.
                    let walk = t.walk(id);
                    let mut prefix = walk[..walk.len() - 1].to_vec();
                    prefix.sort_unstable();
                    prefix.dedup();
                    assert_eq!(prefix.len(), walk.len() - 1);
                    if node.pin == NodePin::Free {
                        assert!(!walk[..walk.len() - 1].contains(walk.last().unwrap()));
                    }
                }
                for step in t.recurrence_steps() {
                    let arity = step.k + step.s.unsigned_abs() as usize;
                    let bound = if step.node == t.root() { delta } else { delta - 1 };
                    assert!(arity <= bound);
                }
            }
        }
    }

    #[test]
    fn tree_graph_maps_to_itself() {
        for seed in 0..30 {
            let g = random_connected(9, 3, 0, seed).unwrap();
            assert!(g.is_forest());
            for v in 0..g.n_vertices() {
                let t = build_saw_tree(&g, v).unwrap();
                assert_eq!(t.len(), g.n_vertices());
                assert!(t.nodes().iter().all(|n| n.pin == NodePin::Free));
                // Parent links mirror graph edges.
                for node in t.nodes() {
                    if let Some(p) = node.parent {
                        assert!(g.neighbors(node.walk_end).contains(&t.nodes()[p].walk_end));
                    }
                }
                let mut ends: Vec<_> = t.nodes().iter().map(|n| n.walk_end).collect();
                ends.sort_unstable();
                assert_eq!(ends, (0..g.n_vertices()).collect::<Vec<_>>());
            }
        }
    }
}
