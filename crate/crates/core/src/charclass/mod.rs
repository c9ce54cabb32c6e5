//! Characteristic-class side of the fixed-point formula: truncated series in
//! Chern roots, the `Â` genus, the odd Chern character, Pfaffians of series
//! matrices and the density of a fixed component.
//!
//! Conventions are fixed once: the tangent factor is `(u/2)/sin(u/2)` per
//! root, the normal factor is `[2 sin((θ + v)/2)]⁻¹` per normal plane, and the
//! remaining constants live in [`prefactor`]. The full circle reproduces the
//! numeric Toeplitz index with these choices.

mod fixed_point;
mod pfaffian;
mod series;

pub use fixed_point::{
    circle_calibration_data, lefschetz_contribution, lefschetz_sum, odd_chern_character, prefactor,
    sin_normal_factor, ComponentSpec, FixedPointData, FixedPointFile, IntegralSpec, Integrator, OddChernCharacter,
    OddForm, TraceDatum, GLOBAL_SIGN, NORMAL_PHASE,
};
pub use pfaffian::{block_antisymmetric, determinant, pfaffian, SeriesMatrix};
pub use series::{
    ahat_coefficients, ahat_factor, bernoulli_numbers, odd_chern_coefficient, rational_to_f64, FormSeries, Monomial,
};
