//! Invariant Hermitian geometry on nilpotent and solvable Lie algebras.
//!
//! The crate works entirely at the Lie-algebra level: a geometry is a pair
//! `(LieAlgebra, ComplexStructure)` turned into a [`ComplexFrame`] carrying
//! the complexified brackets `μ^C_{AB}` over the index alphabet
//! `{1..n, 1̄..n̄}`. On top of that it provides
//!
//! * exterior calculus of invariant forms (`wedge`, `d`, `∂`, `∂̄`, `d^c`),
//! * Hermitian metrics and the special-metric predicates
//!   (SKT / pluriclosed, balanced, Kähler, static),
//! * the Gauduchon family of canonical connections, Bismut torsion and
//!   Ricci forms,
//! * numerical integration of the pluriclosed flow and of the equivalent
//!   bracket flow, with reconstruction through `GL(n, ℂ)` frame changes,
//! * feasibility searches over the positive cone (SKT, balanced, Kähler,
//!   symplectic taming, static) and algebra-level Bott–Chern dimensions,
//! * a catalog of the algebras and parametrized families the library is
//!   calibrated against.
//!
//! Conventions are fixed once and used everywhere; see [`conventions`].

pub mod algebra;
pub mod bracket;
pub mod catalog;
pub mod connections;
pub mod exterior;
pub mod flow;
pub mod frame;
pub mod linalg;
pub mod metrics;
pub mod ode;
pub mod search;

pub use algebra::{
    jacobi_residual, nijenhuis_tensor, parse_salamon, render_salamon, ComplexStructure, LieAlgebra,
};
pub use bracket::{BracketState, BracketTrajectory, FrameChange};
pub use catalog::{CatalogEntry, Tag};
pub use connections::{Connection, TorsionParts, TorsionTensor};
pub use exterior::InvariantForm;
pub use flow::{FlowOpts, FlowStatus, FlowTrajectory};
pub use frame::{parse_complex_equations, ComplexFrame, Idx};
pub use metrics::{FundamentalForm, HermitianMetric};
pub use search::{FeasibilityResult, Status};

use num_complex::Complex64;

/// Scalar used throughout.
pub type C64 = Complex64;

/// Tolerances pinned by the validation contract. Construction-time checks
/// use `CONSTRUCTION`; user-supplied structures are absorbed at `USER_INPUT`.
pub mod tol {
    /// Validation of objects the library builds itself (exact data).
    pub const CONSTRUCTION: f64 = 1e-12;
    /// Validation of user-supplied structures (absorbs input rounding).
    pub const USER_INPUT: f64 = 1e-10;
    /// `d∘d = 0` over a validated algebra.
    pub const D_SQUARED: f64 = 1e-11;
    /// `d^c` against `i(∂̄ − ∂)` on pure-bidegree forms.
    pub const DC_IDENTITY: f64 = 1e-10;
    /// Metric and complex compatibility of canonical connections.
    pub const CONNECTION: f64 = 1e-10;
    /// Closedness of Ricci forms and `dθ^t = ρ^t`.
    pub const RICCI_CLOSED: f64 = 1e-9;
    /// Agreement between independent Bismut-Ricci routes.
    pub const RICCI_CROSS: f64 = 1e-9;
    /// Residual below which a feasibility witness counts as exact.
    pub const WITNESS_RESIDUAL: f64 = 1e-8;
    /// Positivity margin for feasibility verdicts.
    pub const FEASIBLE_MARGIN: f64 = 1e-6;
    /// Rank decisions in kernel/Bott-Chern computations.
    pub const RANK: f64 = 1e-9;
}

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("Jacobi identity violated: residual {residual:.3e} at (i,j,l,k) = {triple:?}")]
    JacobiViolation {
        residual: f64,
        triple: (usize, usize, usize, usize),
    },
    #[error("J is not an almost complex structure: |J^2 + I| = {0:.3e}")]
    NotAlmostComplex(f64),
    #[error("complex structure is not integrable: Nijenhuis residual {0:.3e}")]
    NotIntegrable(f64),
    #[error("reality constraint violated: residual {0:.3e}")]
    Reality(f64),
    #[error("degenerate (1,0)-eigenspace basis: selected only {got} of {need} vectors")]
    DegenerateEigenbasis { got: usize, need: usize },
    #[error("matrix is singular or not positive definite: {0}")]
    SingularMetric(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("forms/metrics attached to different frames")]
    FrameMismatch,
    #[error("top-degree form is not real: relative imaginary part {0:.3e}")]
    NonRealVolume(f64),
    #[error("unknown catalog key `{0}`")]
    UnknownKey(String),
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),
    #[error("operation requires an SKT metric: skt residual {0:.3e}")]
    NotSkt(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// # Conventions
///
/// Fixed once, inherited by every module:
///
/// * **Structure constants.** `LieAlgebra` stores `c^k_{ij}` with
///   `[e_i, e_j] = Σ_k c^k_{ij} e_k`. Salamon tuples are read as that
///   table: `"(0,0,0,12)"` sets `c^4_{12} = 1`.
/// * **Exterior derivative.** On invariant 1-forms
///   `dα(X, Y) = −α([X, Y])`, extended as an antiderivation. Together
///   with the bracket-table reading this reproduces the complexified
///   brackets printed for the catalog geometries (e.g. the
///   Kodaira–Thurston `μ(Z_1, Z_1̄) = −(Z_2 − Z_2̄)/2`).
/// * **(1,0)-frames.** `Z_r = (e_{σ(r)} − i J e_{σ(r)})/2` with a greedy
///   deterministic pivot selection σ.
/// * **Fundamental form.** `ω = −i Σ g_{ij̄} α^i ∧ α^{j̄}`; positivity of a
///   real (1,1)-form means the Hermitian matrix `[i ω(Z_i, Z_j̄)]` is
///   positive definite. Calibrated so that the identity metric has
///   `ω = −i Σ α^k ∧ α^{k̄}`.
/// * **`d^c`.** `d^c = i(∂̄ − ∂)`, equivalently
///   `(d^c ω)(X, Y, Z) = −dω(JX, JY, JZ)` on 2-forms. The Bismut torsion
///   3-form is `c = d^c ω` and `dc = 2i ∂∂̄ω`.
/// * **Volume.** The reference top form is `ω_I^n / n!` for the identity
///   metric's fundamental form `ω_I`, so positive metrics pair positively.
pub mod conventions {}
