//! Executable lower-bound constructions.
//!
//! [`ptp`] samples popcount-thresholding instances, [`triangle`] exposes the
//! lazily evaluated graph `G_x` built from such an instance behind the four
//! local query kinds, [`reduction`] wires both into budgeted decision
//! procedures, and [`verify`] checks the graph construction against a naive
//! materialisation.

pub mod ptp;
pub mod reduction;
pub mod triangle;
pub mod verify;

pub use ptp::{popcount, sample_ptp, BitString, PtpInstance, PtpParams};
pub use reduction::{ptp_via_hindex, ptp_via_triangles, Answer, BudgetPolicy, PtpOutcome};
pub use triangle::{naive_triangle_count, red_edge_stats, RedEdgeStats, Side, TriangleOracle, Vertex};
