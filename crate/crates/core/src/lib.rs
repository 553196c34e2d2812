//! Discrete WKB analysis of linear recurrences `Σⱼ a_j(kε, ε) y_{k+j} = 0`
//! with slowly varying coefficients.
//!
//! * [`roots`]: characteristic roots, branch tracking, crossings.
//! * [`wkb`]: eikonal and transport terms of `y_k ≈ exp(ε⁻¹ Σ Φ_t(kε) εᵗ)`.
//! * [`exact`]: overflow-safe iteration, rescaled ratios, stability scans, validation.
//! * [`turning`]: Airy-type interior expansion at a double root and matching.
//! * [`schemes`]: ODE difference schemes whose roots cluster at 1.
//!
//! Everything is generic over [`Real`]; the aliases below fix `f64` (and
//! quad precision where rounding would otherwise hide the error orders).

pub mod airy;
pub mod error;
pub mod exact;
pub mod expr;
pub mod field;
pub mod fit;
pub mod jet;
pub mod linalg;
pub mod recurrence;
pub mod roots;
pub mod scalar;
pub mod schemes;
pub mod turning;
pub mod wkb;

pub use error::{Error, Result};
pub use exact::{Direction, LogScaledTrajectory, ValidationReport};
pub use field::ScalarField;
pub use fit::SlopeFit;
pub use jet::Jet;
pub use recurrence::{preset, RecurrenceSpec, PRESETS};
pub use scalar::Real;
pub use schemes::{Cauchy, SchemeSeries};
pub use turning::{ConnectSettings, TurningAnalysis, TurningPointExpansion};
pub use wkb::PhiExpansion;

/// Quad-precision scalar.
pub type Quad = f128::f128;

pub type Field = ScalarField<f64>;
pub type QuadField = ScalarField<Quad>;
pub type Spec = RecurrenceSpec<f64>;
pub type QuadSpec = RecurrenceSpec<Quad>;
pub type Expansion = PhiExpansion<f64>;
pub type QuadExpansion = PhiExpansion<Quad>;
pub type Trajectory = LogScaledTrajectory<f64>;
pub type Series = SchemeSeries<f64>;
pub type Complex64 = num_complex::Complex<f64>;
