//! Lattice computations for vortex flows and zero loci on 3-manifolds.

pub mod bundle;
pub mod cli;
pub mod flows;
pub mod homology;
pub mod optimize;
pub mod spinor;
pub mod zerolocus;
