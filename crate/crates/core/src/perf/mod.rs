//! Performance functionals of single- and multifidelity importance sampling,
//! evaluated exactly on finite models and by plug-in on sample logs.

mod empirical;
mod finite;
mod functionals;

pub use empirical::{empirical_perf, EmpiricalPerf};
pub use finite::{cell_constants, Enumeration, FiniteHi, FiniteLo, FiniteModel, FiniteTheta};
pub use functionals::{
    existence_margin, j_d, j_d_star, j_hi, j_mf, j_mf_factors, mu_star, Atom, CellConstants, DiscreteMeasure,
    PerfConstants,
};
