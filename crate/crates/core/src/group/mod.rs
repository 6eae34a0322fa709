//! Normal forms and exact arithmetic for the supported groups.
//!
//! Every function here is pure; elements are immutable values and are
//! shareable across threads.

pub mod element;
mod free;
mod key;
mod projection;
mod semigroup;
mod spec;
mod wreath;

pub use element::{identity, inverse, is_identity, mul_assign, multiply, power, product_of, validate, GroupElement};
pub use free::FreeWord;
pub use key::CanonicalKey;
pub use projection::{Projection, ProjectionKind};
pub use semigroup::{semigroup_symmetric_bounded, SymmetryReport};
pub use spec::GroupSpec;
pub use wreath::{act_on_lamps, LampMap, WreathElement};


/// `(x · f)(y) = f(x^-1 y)` for a wreath spec; checks that `spec` is a wreath.
pub fn act_on_lamps_in(spec: &GroupSpec, x: &GroupElement, f: &LampMap) -> crate::Result<LampMap> {
    match spec {
        GroupSpec::Wreath { base, .. } => act_on_lamps(base, x, f),
        _ => Err(crate::Error::SpecMismatch { spec: spec.to_string() }),
    }
}
