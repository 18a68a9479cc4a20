//! Limit objects and simulation-versus-limit statistics.

mod degree;
mod giant;
mod kmax;
mod limits;
mod marks;

pub use degree::{degree_law_oracle, degree_law_oracle_scaled, tv_degree_test, DegreeCensus, DEFAULT_ORACLE_TOL};
pub use giant::{
    giant_fraction, giant_fraction_bipartite, giant_trajectory, proxy_disagreement, ComponentMap, GiantTrajectory,
    Incidence,
};
pub use kmax::{
    frechet_cdf, kmax_increments, kmax_ks, kmax_process, ks_integer, max_switch_on_size, FiniteKmaxLaw, KmaxKs,
    MaxGroupProcess, FINITE_KMAX_CAP,
};
pub use limits::{solve_giant, GiantSolution, LimitLaws};
pub use marks::{default_mark_grid, empirical_mark_cdf, mark_cdf_limit, mark_law_test, MIN_MARK_SAMPLE};
