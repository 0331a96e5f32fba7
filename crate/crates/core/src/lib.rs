//! Horizontal geometry of surfaces of revolution in the Heisenberg group,
//! revolution rings and the modulus of their boundary-connecting horizontal
//! curve families.

pub mod curves;
pub mod dual;
pub mod error;
pub mod heis;
pub mod modulus;
pub mod ode;
pub mod quad;
pub mod profile;
pub mod revcoords;
pub mod rng;
pub mod surface;

pub use dual::Dual2;
pub use error::{Error, Result};
pub use heis::{HPoint, HorVector, Similarity, TangentVector};
pub use curves::{CurveFamily, FamilyKind, HorizontalCurve};
pub use modulus::{Density, RevolutionRing};
pub use profile::{catalog, CatalogName, ProfileCurve};
pub use revcoords::RevPoint;
pub use surface::SurfacePatch;
