//! Exact solver for the anisotropic XY chain in uniform plus alternating
//! transverse fields: momentum-space statics and quench dynamics, two-site
//! correlation measures, factorization geometry, finite-size scaling and an
//! exact-diagonalization reference.

pub mod ed;
pub mod error;
pub mod factorization;
pub mod finite_chain;
pub mod fock;
pub mod linalg;
pub mod measures;
pub mod momentum;
pub mod observables;
pub mod params;
pub mod quadrature;
pub mod quench;
pub mod scaling;
pub mod sweep;
pub mod two_site;

pub use error::Error;
pub use params::{SystemParams, Temperature};
