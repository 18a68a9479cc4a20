//! Exact simulation and statistical validation of dynamic random
//! intersection graphs: communities switch ON and OFF as independent
//! two-state Markov chains, and individuals are linked while they share an
//! active community.
//!
//! Modules, bottom-up:
//! - [`params`]: weights, group-size laws, switching rates, run configuration.
//! - [`sampler`]: exact stationary sampler and a tiny-instance exhaustive law.
//! - [`dynamics`]: event-exact trajectories, time slices, union and rescaled graphs.
//! - [`projection`]: the one-node projection multigraph and degree processes.
//! - [`analysis`]: limit laws, degree oracle, giant component, edge marks, maximum group size.
//! - [`local`]: the two-type branching-process limit and rooted-ball censuses.
//! - [`bcm`]: the bipartite configuration model and exhaustive uniformity checks.

pub mod analysis;
pub mod bcm;
pub mod dynamics;
pub mod error;
pub mod local;
pub mod params;
pub mod projection;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod unionfind;

pub use error::{Error, Result};
pub use params::{GroupSizeLaw, Mode, Model, ModelConfig, WeightLaw, WeightModel};
pub use sampler::{BipartiteState, Group};
