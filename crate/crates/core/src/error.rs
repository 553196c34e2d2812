use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("divisor comes within {min_abs:e} of zero")]
    NearZeroDivisor { min_abs: f64 },
    #[error("no continuous logarithm: argument jumps near x = {x}")]
    BranchAmbiguity { x: f64 },
    #[error("requested order {requested} exceeds capacity {capacity}")]
    OrderOverflow { requested: usize, capacity: usize },
    #[error("parse error at line {line}, column {col}: {msg}")]
    ParseError { line: usize, col: usize, msg: String },
    #[error("coefficient a_{coeff} vanishes (|a| = {value:e}) near x = {x}")]
    NonsingularityViolation { coeff: usize, x: f64, value: f64 },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("leading coefficient vanishes at x = {x}")]
    LeadingCoefficientVanishes { x: f64 },
    #[error("root branches jump near x = {x}; refine the grid")]
    BranchJumpDetected { x: f64 },
    #[error("crossing is not generic: fitted exponent {exponent}")]
    NonGenericCrossing { exponent: f64 },
    #[error("transport denominator {value:e} too small near x = {x}")]
    DenominatorTooSmall { x: f64, value: f64 },
    #[error("epsilon list spans {decades} decades with {points} points; need more")]
    InsufficientDecades { decades: f64, points: usize },
    #[error("Airy scale is degenerate (numerator {num:e}, denominator {den:e})")]
    DegenerateTheta { num: f64, den: f64 },
    #[error("argument {0} outside the supported range")]
    OutOfRange(f64),
    #[error("matching window is empty: {0}")]
    WindowEmpty(String),
    #[error("least-squares fit is ill conditioned (cond = {cond:e})")]
    IllConditionedFit { cond: f64 },
    #[error("solving coefficient vanishes at k = {k}")]
    CoefficientVanishes { k: i64 },
    #[error("interpolation nodes coincide")]
    CoincidentNodes,
    #[error("roots do not cluster at 1: {0}")]
    DegeneracyMismatch(String),
    #[error("degenerate root branches are not separated: {0}")]
    SeparationFailure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
