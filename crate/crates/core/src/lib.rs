//! Compile tensor networks into ordered sequences of local unitaries whose
//! product block-encodes the network contraction.
//!
//! The pipeline is:
//!
//! 1. describe an operator as a [`TensorNetwork`] (directly, or from an Ising
//!    Hamiltonian through [`qubo`]),
//! 2. sweep the graph with [`graph_sweep`], dilating every site into a
//!    `(V†, C, U)` triple via [`unitary_svd`],
//! 3. check the emitted sequence against the dense contraction with
//!    [`verify_block_encoding`].
//!
//! Everything is dense and meant for desk-scale networks; the dense limits
//! guard the exponential paths.

pub mod contract;
pub mod dilation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod network;
pub mod operator;
pub mod qubo;
pub mod report;
pub mod sim;
pub mod sweep;
pub mod verify;

pub use num_complex::Complex64 as C64;

pub use contract::contract_dense;
pub use dilation::{
    assemble_site_unitary, normalize_core, pad_and_form_core, unitary_svd, DilatedCore,
    NormalizedCore, PadPolicy, SiteFactors, SvdFactors,
};
pub use error::{Error, Result};
pub use network::{
    pad_bonds_to_power, unfold_site, validate_network, Boundary, Edge, Leg, LegKind, Side,
    SiteTensor, TensorNetwork, Unfolding, ValidationReport, Violation,
};
pub use operator::{DenseOperator, RegisterDesc, RegisterId};
pub use qubo::{Qubo, SlotPlan};
pub use report::ResourceReport;
pub use sweep::{
    compile, graph_sweep, layout_registers, next_vertex, CompilationResult, CompileOptions,
    FixedOrder, Greedy, OpRole, RegisterLayout, SweepOutcome, VertexOracle, WiredOp,
};
pub use verify::{
    compose_global, error_bound, project_encoded_block, success_probability,
    verify_block_encoding, verify_chaining, VerificationReport,
};

/// Largest per-side dimension the dense oracles accept unless told otherwise
/// (twelve qubits).
pub const DEFAULT_DENSE_LIMIT: usize = 1 << 12;
