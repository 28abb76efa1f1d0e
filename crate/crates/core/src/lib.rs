//! Achievable rates and genie-MAC outer bounds for K-user Gaussian
//! interference channels.
//!
//! The crate covers both sides of the sum-capacity question for the
//! degraded class and the general bounding machinery:
//!
//! * [`channel`] - channel validation, `sqrt(P/N) H` normalization, rank-1
//!   factorization `H = a b^T`, and ordered-subset submatrices.
//! * [`sic`] - successive-interference-cancellation rates and the
//!   telescoped sum-rate identity (achievability).
//! * [`certificate`] - the explicit `(c, T, D, G, V)` construction whose
//!   genie-MAC bound matches the SIC sum rate on degraded channels, plus
//!   the closed-form sum capacity and DoF.
//! * [`genie`] - feasibility conditions, MAC sum capacity, noise whitening,
//!   and the identity-pinning reparameterizations.
//! * [`optimizer`] - multi-start projected-gradient minimization of the
//!   bound f*(H_S) for general channels and region-bound assembly over
//!   ordered subsets.
//! * [`ensemble`] - seeded random generators for experiments.
//!
//! All rates are in bits per real channel use with base-2 logarithms.

pub mod channel;
pub mod certificate;
pub mod ensemble;
mod error;
pub mod genie;
mod linalg;
pub mod optimizer;
pub mod sic;

pub use channel::{ChannelInstance, DegradedChannel, OrderedSubset, DEFAULT_RANK1_TOL};
pub use certificate::{degraded_sum_capacity, dof, Certificate, CertificateReport};
pub use error::{Error, Result};
pub use genie::{check_feasible, to_g_identity, to_t_identity, whiten, FeasibilityReport, GenieMacInstance};
pub use optimizer::{
    bounds_for_size, optimize_fstar, optimize_subset, receiver_cooperation_bound,
    region_outer_bound, BoundResult, OptimizerConfig, SubsetBound,
};
pub use sic::{sic_rate, sic_sum_rate, telescoped_sum_rate, RateAllocation};
