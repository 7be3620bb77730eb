//! Brute-force reference values computed straight from the definitions,
//! sharing no code with the library's enumeration, tree or root finder.
#![allow(dead_code)]

use ising_fisher::{PinnedGraph, Spin};
use num_complex::Complex64;

/// Spin of every vertex under `mask` over the free vertices, or `None`
/// if the assignment leaves a pinned vertex alone.
fn spins(g: &PinnedGraph, mask: u64) -> Vec<bool> {
    let mut bit = 0;
    (0..g.n_vertices())
        .map(|v| match g.pin(v) {
            Some(Spin::Plus) => true,
            Some(Spin::Minus) => false,
            None => {
                let s = mask >> bit & 1 == 1;
                bit += 1;
                s
            }
        })
        .collect()
}

fn cut(g: &PinnedGraph, s: &[bool]) -> usize {
    g.edges().iter().filter(|&&(u, v)| s[u] != s[v]).count()
}

/// `γ_k` for `k = 0..=|E|` by visiting every configuration.
pub fn cut_counts(g: &PinnedGraph) -> Vec<u64> {
    let mut counts = vec![0u64; g.n_edges() + 1];
    for mask in 0..1u64 << g.n_free() {
        counts[cut(g, &spins(g, mask))] += 1;
    }
    counts
}

/// `Σ_σ β^{cut(σ)}` with each power taken separately.
pub fn partition(g: &PinnedGraph, beta: Complex64) -> Complex64 {
    (0..1u64 << g.n_free()).map(|mask| beta.powu(cut(g, &spins(g, mask)) as u32)).sum()
}

/// `Z⁺/Z⁻` at `v` by summing over configurations by the spin of `v`.
pub fn ratio(g: &PinnedGraph, v: usize, beta: Complex64) -> Complex64 {
    let mut plus = Complex64::new(0.0, 0.0);
    let mut minus = Complex64::new(0.0, 0.0);
    for mask in 0..1u64 << g.n_free() {
        let s = spins(g, mask);
        let w = beta.powu(cut(g, &s) as u32);
        if s[v] {
            plus += w;
        } else {
            minus += w;
        }
    }
    plus / minus
}

/// Roots of `a x² + b x + c`.
pub fn quadratic(a: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = Complex64::new(b * b - 4.0 * a * c, 0.0).sqrt();
    [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]
}
