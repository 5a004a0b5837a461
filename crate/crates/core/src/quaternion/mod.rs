//! Definite quaternion algebras, Eichler orders, right-ideal classes, Brandt matrices and
//! Gross points.

pub mod algebra;
pub mod classset;
pub mod eigenform;
pub mod enumerate;
pub mod gross;
pub mod lattice;
pub mod order;

pub use algebra::{hilbert_symbol, Quat, QuaternionAlgebra};
pub use classset::{brandt_matrix, eichler_mass, ClassSet};
pub use eigenform::{eigenform_mod, integral_eigenvector, pairing, pairing_rational, QuaternionicEigenform};
pub use gross::{GrossPoint, GrossPointFamily};
pub use lattice::Lattice;
pub use order::EichlerOrder;
