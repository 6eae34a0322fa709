//! Finitely supported probability measures with exact or binary64 weights.

pub mod families;
mod loglinear;
mod measure;
mod weight;

pub use families::MeasureFamily;
pub use loglinear::{coprime_base, ln_biguint, ratio_to_f64, LogLinear};
pub use measure::{product_measure, Atom, FiniteMeasure, DEFAULT_SUPPORT_CAP};
pub use weight::{parse_weight, Entropy, Rational, Weight, FLOAT_MASS_TOL};
