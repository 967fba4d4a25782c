use alloc::string::String;

/// Errors raised by the constructions, validators and evaluators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty interval: lower endpoint {lo} is not below upper endpoint {hi}")]
    EmptyInterval { lo: String, hi: String },

    #[error("denominator bound must be at least 1")]
    ZeroDenominatorBound,

    #[error("denominator must be positive, got {0}")]
    NonPositiveDenominator(String),

    #[error("mediant needs f1 < f2, got {f1} and {f2}")]
    MediantOrder { f1: String, f2: String },

    #[error("no multiple of {den} lies in [{lo}, {hi}]")]
    ExpansionInfeasible { den: String, lo: f64, hi: f64 },

    #[error("sequence too short: need at least {needed} terms, got {got}")]
    SequenceTooShort { needed: usize, got: usize },

    #[error("parameter {name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("exact membership (tol = 0) needs exact values")]
    ExactValuesRequired,

    #[error("construction produced {got} fractions; need at least 2")]
    TooFewFractions { got: usize },

    #[error("construction infeasible: {0}")]
    ConstructionInfeasible(String),

    #[error("knots are not interpolable at pair {pair}: {reason}")]
    NotInterpolable { pair: usize, reason: String },

    #[error("need at least {needed} knots, got {got}")]
    TooFewKnots { needed: usize, got: usize },

    #[error("interpolant is already in C2 mode")]
    AlreadyC2,

    #[error("x = {x} lies outside the interpolation domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("sequence is not uniformly convex (tightest constant {tightest_c})")]
    NotUniformlyConvex { tightest_c: f64 },

    #[error("array lengths differ: {0}")]
    LengthMismatch(String),

    #[error("coefficients vanish: ‖b‖ must be positive")]
    ZeroCoefficients,

    #[error("grid is invalid: {0}")]
    InvalidGrid(String),

    #[error("regression needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("regression values must be positive, got {0}")]
    NonPositiveValue(f64),

    #[error("regression abscissae are all equal")]
    DegenerateAbscissae,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
