use thiserror::Error;

/// Errors produced by grid, transform and dynamics operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid must have positive even point counts, got {n_q}x{n_p}")]
    BadGridShape { n_q: usize, n_p: usize },

    #[error("grid extent is empty or inverted: [{min}, {max})")]
    BadGridExtent { min: f64, max: f64 },

    #[error("field value at ({i_q}, {i_p}) is not finite: {value}")]
    NonFinite { i_q: usize, i_p: usize, value: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("value array has {got} entries, grid wants {want}")]
    BadLength { got: usize, want: usize },

    #[error(
        "scale {k} is not commensurate with the grid; nearest admissible value is {admissible}"
    )]
    Incommensurate { k: f64, admissible: f64 },

    #[error("operator matrices require a square grid, got {n_q}x{n_p}")]
    NonSquareGrid { n_q: usize, n_p: usize },

    #[error("kernel must have at least one component")]
    EmptyKernel,

    #[error("kernel component {index} is invalid: weight {weight}, scale {scale}")]
    BadKernelComponent { index: usize, weight: f64, scale: f64 },

    #[error("scale parameter must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error(
        "state tail mass {tail:.3e} outside the grid exceeds {limit:.1e}; increase the half-extent to at least {required_extent:.2}"
    )]
    TailMass { tail: f64, limit: f64, required_extent: f64 },

    #[error("product field would need {points} samples, over the cap of {cap}")]
    MemoryCap { points: usize, cap: usize },

    #[error("spectrum must contain at least one stationary state")]
    EmptySpectrum,

    #[error("dense jump kernels are limited to {max} points per axis, grid has {got}")]
    JumpKernelTooLarge { got: usize, max: usize },

    #[error("Hamiltonian spectrum reaches mode ({m}, {n}), outside the half band +-{half_band}")]
    Aliased { m: i64, n: i64, half_band: i64 },

    #[error("operator is not Hermitian within {tol:.1e} (residual {residual:.3e})")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("imaginary residue {residual:.3e} above tolerance {tol:.1e}")]
    ImaginaryResidue { residual: f64, tol: f64 },

    #[error("time step {dt} exceeds the stability guard {limit:.3e}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("state blew up at step {step}; last finite snapshot retained")]
    Blowup { step: usize },

    #[error("zero norm state has no volume")]
    ZeroNorm,

    #[error("entropy bound argument must be positive, got {0}")]
    NonPositiveLogArgument(f64),

    #[error("displacement {0} exceeds half the domain")]
    DisplacementTooLarge(f64),

    #[error("{0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
