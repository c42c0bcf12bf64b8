//! Limiting spectral distribution of complex correlated Wishart matrices.

mod density;
mod inverse;
mod spectrum;
mod stieltjes;
mod support;

pub use density::{density, density_grid, DensityCurve};
pub use inverse::{g_eval, InverseMap, POLE_TOL};
pub use spectrum::{Atom, FiniteN, PopulationSpectrum};
pub use stieltjes::{companion_roots, solve_stieltjes, StieltjesSolver, StieltjesValue};
pub use support::{
    complement_witness, critical_points_with, support, support_with, CriticalKind,
    CriticalPoint, SupportDescription, DEFAULT_SCAN_POINTS,
};
