//! Image measures of the constructions: noise sampling, Monte Carlo
//! estimation of cylinder events, a quadrature oracle, and KS validation.

pub mod event;
pub mod ks;
pub mod mc;
pub mod oracle;
pub mod sampling;

pub use event::{Constraint, CylinderEvent, Domain, EventFile, ResolvedEvent, SampledPath};
pub use ks::{ks_critical_1pct, ks_distance, marginal_ks_check, recovered_noise_ks, uniform_cdf};
pub use mc::{indicators, lebesgue_cylinder, mc_probability, Estimate};
pub use oracle::{oracle_probability, OracleResult};
pub use sampling::{draw_rng, sample_halfline_noise, sample_noise, sample_pinned_noise};
