//! Construction and certification of local homotopies between nearby
//! commuting matrix tuples on the cube, disk, and torus varieties.
//!
//! The pipeline: jointly diagonalize two nearby commuting tuples, align
//! their joint spectra with a unitary intertwiner, quantize the spectrum
//! onto a uniform grid (a pseudospectral retractive approximant), correct
//! the intertwiner on the grid partition so it nearly commutes with the
//! approximant, and concatenate flat and curved path segments that stay
//! inside the variety. Every path ships with a certificate that is
//! re-verifiable by sampling.
//!
//! All numerics are deterministic for fixed inputs and seeds on a given
//! platform: eigensolvers use fixed Jacobi sweep orders and every random
//! choice threads an explicit seed.

pub mod correction;
pub mod homotopy;
pub mod jointspec;
pub mod matcore;
pub mod mm;
pub mod pseudospec;
pub mod psra;
pub mod sampling;
pub mod varieties;

mod kernels;

pub use correction::{commuting_unitary_correction, projector_transport, CorrectionResult};
pub use homotopy::{
    concat, cube_homotopy, disk_homotopy, eval_path, torus_homotopy, verify_path,
    HomotopyCertificate, HomotopyOptions, MatrixPath, PathSegment, TuplePath,
};
pub use jointspec::{
    intertwiner, joint_diagonalize, joint_spectrum, match_spectra, partition_mcintosh_pryde,
    recombine_partition, HermitianPartition, IntertwinerResult, JointSpectrum,
};
pub use matcore::{
    commutator, defects, expm_i_pi, herm_eig, logm_unitary, nearest_unitary, op_norm, CMatrix,
    DefectReport, HermEigDecomposition,
};
pub use pseudospec::{
    delta_dense_check, hausdorff, pseudospectrum_mask, spectrum, GridSpec, PseudospectrumMask,
};
pub use psra::{
    build_grids, projective_decomposition_1d, psra_1d, psra_md, ProjectiveDecomposition,
    PsraResult, SpectralGrids,
};
pub use sampling::{gen_member, gen_perturbation, haar_unitary, member_with_spectrum};
pub use varieties::{
    eth, nc_eval, smv_defect, variety_defect, MatrixTuple, NCPolynomialSystem, Neighborhood,
    VarietyKind,
};

use thiserror::Error;

/// Complex scalar used throughout.
pub type Complex64 = num_complex::Complex<f64>;

/// Errors reported by library operations.
///
/// Preconditions are checked at entry; violated postconditions (which
/// indicate a numerical breakdown, not caller error) are reported through
/// the same type so failures are explicit rather than silent.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("empty tuple: need at least one component")]
    EmptyTuple,
    #[error("not hermitian: defect {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("not unitary: defect {defect:.3e} exceeds {tol:.3e}")]
    NotUnitary { defect: f64, tol: f64 },
    #[error("not a projector: defect {defect:.3e} exceeds {tol:.3e}")]
    NotProjector { defect: f64, tol: f64 },
    #[error("not a contraction: norm exceeds 1 by {excess:.3e}")]
    NotContraction { excess: f64 },
    #[error("tuple is outside the {kind} variety: defect {defect:.3e} exceeds {tol:.3e}")]
    OutsideVariety {
        kind: varieties::VarietyKind,
        defect: f64,
        tol: f64,
    },
    #[error("rank deficient: smallest singular value {sigma_min:.3e} below {floor:.3e}")]
    RankDeficient { sigma_min: f64, floor: f64 },
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("polynomial references variable x{index} but only {vars} are bound")]
    UnboundSymbol { index: usize, vars: usize },
    #[error("{what} did not converge")]
    Convergence { what: &'static str },
    #[error("joint diagonalization residual {residual:.3e} exceeds {tol:.3e}")]
    DiagonalizationResidual { residual: f64, tol: f64 },
    #[error(
        "joint spectrum matching cost {cost:.3e} exceeds diagnostic threshold {threshold:.3e}"
    )]
    MatchingDiagnostic { cost: f64, threshold: f64 },
    #[error("projector transport undefined: projector gap {gap:.3e} is not below 1")]
    TransportUndefined { gap: f64 },
    #[error("unitary correction failed at block {block}: {reason}")]
    CorrectionFailed { block: usize, reason: String },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("matrix market: {0}")]
    MatrixMarket(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default membership/identity tolerance, scaled by dimension: `1e-10 * n`.
pub fn tol_identity(n: usize) -> f64 {
    1e-10 * n as f64
}

/// Default certificate tolerance, scaled by dimension: `1e-8 * n`.
pub fn tol_certificate(n: usize) -> f64 {
    1e-8 * n as f64
}
