use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("at least 3 points are needed for a slope fit, got {0}")]
    TooFewPoints(usize),
    #[error("point {index} = ({x}, {y}) is not strictly positive and finite")]
    NonPositive { index: usize, x: f64, y: f64 },
    #[error("all abscissae coincide")]
    DegenerateAbscissae,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid dimension must be 1, 2 or 3, got {0}")]
    Dimension(usize),
    #[error("axis {axis}: at least 8 points required, got {points}")]
    TooFewPoints { axis: usize, points: usize },
    #[error("axis {axis}: half-width must be positive and finite, got {half_width}")]
    HalfWidth { axis: usize, half_width: f64 },
    #[error("expected {expected} values for the grid, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("grids differ")]
    Mismatch,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LorentzError {
    #[error("Lorentz exponent p must be positive and finite, got {0}")]
    P(f64),
    #[error("Lorentz exponent s must be positive (or infinite), got {0}")]
    S(f64),
    #[error("{values} values but {weights} cell measures")]
    Length { values: usize, weights: usize },
    #[error("cell measure {0} is not positive and finite")]
    Weight(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("unsupported sphere dimension {0}; supported dimensions are 2 and 3")]
    SphereDimension(usize),
    #[error("sphere measures need at least 16 atoms, got {0}")]
    TooFewAtoms(usize),
    #[error("contraction ratio must lie in (0, 1/2], got {0}")]
    Ratio(f64),
    #[error("levels must be between 1 and 25, got {0}")]
    Levels(u32),
    #[error("{atoms} atoms but {weights} weights")]
    Length { atoms: usize, weights: usize },
    #[error("a measure needs at least one atom")]
    Empty,
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("weight {index} is negative or not finite: {value}")]
    Weight { index: usize, value: f64 },
    #[error("atom coordinate {0} is not finite")]
    Atom(usize),
    #[error("weights sum to {0}, expected 1 within 1e-12")]
    Mass(f64),
    #[error("point has dimension {got}, measure has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("at least 3 radii are needed, got {0}")]
    TooFewRadii(usize),
    #[error("radius {0} outside (0, 1]")]
    Radius(f64),
    #[error("radii must be strictly decreasing")]
    RadiiOrder,
    #[error("frequency radius {0} is below 1")]
    FrequencyBelowOne(f64),
    #[error("frequency radii must be strictly increasing")]
    FrequencyOrder,
    #[error("frequency radius {radius} exceeds the aliasing scale {limit} of this atomic approximation")]
    Aliasing { radius: f64, limit: f64 },
    #[error("sampled |mu^| vanished on the annulus of radius {0}; cannot fit a power law")]
    ZeroSup(f64),
    #[error("number of directions must be positive")]
    Directions,
    #[error("fit failed: {0}")]
    Fit(#[from] FitError),
    #[error("malformed atom data: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error("dimension d must be positive")]
    Dimension,
    #[error("violated 0 < a: a = {0}")]
    ANonPositive(String),
    #[error("violated a < d: a = {a}, d = {d}")]
    ANotBelowD { a: String, d: u32 },
    #[error("violated 0 < b: b = {0}")]
    BNonPositive(String),
    #[error("violated b <= a/2: a = {a}, b = {b}")]
    BAboveHalfA { a: String, b: String },
    #[error("violated 1 <= p <= p_circ: p = {p}, p_circ = {p_circ}")]
    POutOfRange { p: String, p_circ: String },
    #[error("q_circ = 2 + 4/kappa is undefined for kappa = 0")]
    KappaZero,
    #[error("violated 1 < p < 2d/(d-1): p = {p}, d = {d}")]
    HormanderRange { p: String, d: u32 },
    #[error("beta values must be positive")]
    Beta,
    #[error("endpoint constants must be positive and finite")]
    Constant,
    #[error("not a rational number: '{0}'")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("probe {index}: left kernel direction is ambiguous (two smallest singular values {s0:e} and {s1:e} agree within tolerance)")]
    AmbiguousKernel { index: usize, s0: f64, s1: f64 },
    #[error("probe {index}: expected x of length {dx} and y of length {dy}")]
    ProbeShape { index: usize, dx: usize, dy: usize },
    #[error("phase has y-dimension {got}, this check needs {expected}")]
    YDimension { expected: usize, got: usize },
    #[error("polynomial phase: {0}")]
    Polynomial(String),
    #[error("unknown catalog phase '{0}'; known: parabola, cone, fold-flat, fold-curved, zero")]
    UnknownCatalog(String),
    #[error("catalog phase '{name}' is not defined for d = {d}")]
    CatalogDimension { name: String, d: usize },
    #[error("quadrature spacing {spacing:e} is too coarse, at most {required:e} is needed")]
    Resolution { spacing: f64, required: f64 },
    #[error("lambda must be >= 1, got {0}")]
    Lambda(f64),
    #[error("amplitude radius must be positive and finite, got {0}")]
    Radius(f64),
    #[error("at least {min} quadrature points per axis are needed, got {got}")]
    Quadrature { min: usize, got: usize },
}
