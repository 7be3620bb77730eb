//! Fisher zeros and zero-free regions of the zero-field Ising partition function.
//!
//! * [`graph`]: bounded-degree graphs with spin pins, generators, edge-list I/O.
//! * [`exact`]: cut polynomial and pinned partition functions by enumeration.
//! * [`saw`]: Weitz's self-avoiding-walk tree and its recurrence.
//! * [`maps`]: the scalar maps of the tree recurrence and the region maps.
//! * [`regions`]: the regions `C₂` and `D` and sampled verification.
//! * [`zeros`]: Fisher zeros and zero-free margins.
//! * [`approx`]: truncated Taylor approximation of `Z` at complex `β`.

pub mod approx;
pub mod error;
pub mod exact;
pub mod graph;
pub mod maps;
pub mod regions;
pub mod saw;
pub mod zeros;

pub use approx::{barvinok_estimate, error_report, log_taylor_coeffs, BarvinokEstimate, ErrorReport, TaylorLogSeries};
pub use error::{Error, Result};
pub use exact::{cut_polynomial, pinned_ratio, CutPolynomial, ExactEngine, PinnedRatio, Ratio, SpinConfig};
pub use graph::{generate_family, load_graph, random_regular, Family, GraphParts, PinnedGraph, Spin, Violation};
pub use maps::MapParams;
pub use regions::{Rectangle, RegionC2, RegionD, VerificationReport, Witness};
pub use saw::{build_saw_tree, eval_saw_ratio, weitz_residual, NodePin, SawNode, SawTree};
pub use zeros::{fisher_zeros, scan_family, zero_free_margin, ScanReport, ScanSpec, ZeroSet};
