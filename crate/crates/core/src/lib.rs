//! Carnot-group geometry at infinity of the rank-one hyperbolic spaces over
//! R, C and H: the Koranyi-Cygan metric and its isometries, fat Sierpinski
//! carpets with positive Lebesgue measure, stretch homeomorphisms, disjoint
//! ball packings, and discrete groups `E * H` of lattice translations and
//! sphere inversions together with their generator-wise deformations.
//!
//! Every construction ships with a verification suite ([`verify`]) that
//! certifies the checkable claims numerically: isometry and involution
//! identities, exact and Monte Carlo measures, bit-exact cell translations,
//! Klein combination conditions, equivariance, and the translation-length
//! witness separating deformed groups.

pub mod algebra;
pub mod carnot;
pub mod carpet;
pub mod config;
mod error;
pub mod groups;
pub mod hyperbolic;
pub mod interval;
pub mod packing;
pub mod render;
pub mod stretch;
pub mod verify;

pub use error::{Error, Result};
