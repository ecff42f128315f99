pub mod cli;
pub mod curve;
pub mod dump;
mod fft;
pub mod heat;
pub mod landau;
pub mod lattice;
pub mod ns_solver;
pub mod pm_norms;
pub mod quadrature;
pub mod spectral;
