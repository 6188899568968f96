//! Scale-function strain families and the tensors derived from them.

mod kit;
mod scale;
pub mod spectral_fn;

pub use kit::{check_unimodular, isochoric_kit, ElasticKit, StrainKit, UNIMODULAR_TOL};
pub use scale::{ScaleEval, ScaleFunction};
