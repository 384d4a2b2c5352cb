//! Weighted-Hermitian finite-difference operators on structured grids.

pub mod assemble;
pub mod em;
pub mod grid;
pub mod layer;
pub mod momentum;
pub mod mtx;
pub mod op;

pub use assemble::{laplace_beltrami, surface_hamiltonian};
pub use em::{em_surface_hamiltonian, VectorPotentialField};
pub use grid::{build_grid, Grid2, GridAxis};
pub use layer::{
    layer_blocks, layer_hamiltonian, transverse_ground_energy, transverse_level, LayerBlocks,
    LayerConfig,
};
pub use momentum::geometric_momentum;
pub use mtx::write_matrix_market;
pub use op::{hermiticity_residual, DiscreteOperator, OpMatrix};
