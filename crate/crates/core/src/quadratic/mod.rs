//! Imaginary quadratic orders through binary quadratic forms.

pub mod class_group;
pub mod forms;
pub mod gamma;

pub use class_group::RingClassGroup;
pub use forms::{compose, reduced_forms, splitting_type, QuadForm, SplittingType};
pub use gamma::{check_exact_degree, ExactDegree, GammaQuotient};
