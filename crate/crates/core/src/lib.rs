//! Exact-arithmetic kernel for radius-certified chain complexes over finite
//! metric control spaces: geometric modules, quadratic structures, boundary
//! and gluing constructions, projective class bookkeeping, and replayable
//! certificates for every size claim.

pub mod complex;
pub mod fixtures;
pub mod homotopy;
pub mod k0;
pub mod ltheory;
pub mod sections;
pub mod signature;
pub mod boundary;
pub mod campaigns;
pub mod ccx;
pub mod cli;
pub mod quad;
pub mod module;
pub mod rat;
pub mod ring;
pub mod solver;
pub mod union;
pub mod space;

pub use complex::{mapping_cone, ChainMap, ControlledComplex};
pub use module::{GeomModule, GeomMorphism, ProjectiveModule};
pub use rat::{parse_rat, rat, Rat};
pub use ring::{check_involution, Coeff, Involution, Ring, RingWithInvolution};
pub use space::{ControlSpace, Slack, Subset};
