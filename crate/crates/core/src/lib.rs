//! Exact thermodynamics of triangular-lattice Ising models with arbitrary-sign
//! couplings, through Kac-Ward determinants, and of the transverse-field
//! quantum Ising chain.

pub mod critical;
pub mod error;
pub mod kacward;
pub mod lattice;
pub mod linalg;
pub mod numerics;
pub mod oracle;
pub mod projection;
pub mod quadrature;
pub mod quantum;
pub mod thermodynamics;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{Couplings, Direction, DirectedEdge, Site, TorusSpec};
pub use quadrature::{Estimate, QuadratureSpec};
