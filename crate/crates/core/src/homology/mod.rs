//! Semilinear modules over the truncated ring, their Koszul complexes, and
//! cohomology over `Z/p^N`.

pub mod complex;
pub mod linalg;
pub mod module;

pub use complex::{build_cube, condition_c0_check, C0Report, ChainMap, Cube, Iota, KoszulComplex};
pub use linalg::{Kernel, ModMatrix};
pub use module::{ModuleSpec, SemilinearModule, ValidationReport};
