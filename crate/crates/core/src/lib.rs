//! Finite-strain viscoelasticity built on generalized (Hill-class) strains.
//!
//! The crate provides symmetric tensor algebra, scale-function strain families
//! with their first and second derivatives, volumetric energies, equilibrium
//! energies, two viscous integrators (finite linear viscoelasticity and an
//! eight-chain micromechanical branch), homogeneous material-point drivers and
//! a Nelder–Mead calibration layer.

pub mod calibration;
pub mod driver;
pub mod error;
pub mod flv;
pub mod hyperelastic;
pub mod micro;
pub mod model;
pub mod strain;
pub mod tensor;
pub mod verify;
pub mod volumetric;

pub use error::{Error, Result};
