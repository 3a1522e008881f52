//! Exact polyhedral machinery for nef cones of fibered surfaces and their
//! fiber products: double description conversion, certified membership, nef
//! decompositions over the base, and Dirichlet fundamental domains for
//! automorphism actions. All arithmetic is exact rational.

pub mod cone;
pub mod error;
pub mod fibprod;
pub mod fundomain;
pub mod linalg;
pub mod lp;
pub mod quadform;
pub mod scenario;
pub mod surface;
