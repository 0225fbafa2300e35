//! Stratification of representation spaces of bound quiver algebras with
//! loops by the Jordan types of the loop actions.
//!
//! The engine works with exact rationals throughout. For a fixed Jordan
//! assignment the mixed relations become a linear system in the arrow
//! entries; its rank is the codimension of the fibre, and stratum dimensions
//! follow from orbit dimensions. A finite-field oracle recounts everything by
//! brute force at desk scale.

pub mod linalg;
pub mod quiver;
pub mod strata;
pub mod families;
pub mod ff_oracle;
pub mod formulas;
pub mod linsys;
pub mod partition;
