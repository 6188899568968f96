//! Symmetric tensor algebra in three dimensions.

pub mod mat3;
mod spectral;
mod sym2;
mod tensor4;
mod tensor6;

pub use mat3::Mat3;
pub use spectral::{spectral_decompose, Multiplicity, Spectral3, MULTIPLICITY_TOL};
pub use sym2::{slot, SymTensor2, PAIRS, WEIGHTS};
pub use tensor4::Tensor4;
pub use tensor6::Tensor6;
