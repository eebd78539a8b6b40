//! Capacity-energy functions for simultaneous information and energy
//! transmission over discrete memoryless and amplitude-constrained Gaussian
//! channels: point-to-point, multicast (compound) and receiver segmentation,
//! with brute-force oracles for checking the solvers.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod gaussian;
mod lp;
pub mod multicast;
pub mod oracle;
pub mod pp;
mod quadrature;
pub mod segmentation;
mod solver;

pub use channel::{
    make_bsc, make_z, mutual_information, output_distribution, received_energy, Dmc,
    EnergyFunctional, InputDistribution, MulticastProblem,
};
pub use error::{Error, Result};
pub use multicast::{
    b_max_multicast, domain_feasible, multicast_capacity, per_channel_curves,
    upper_bound_min_individual, DomainFeasibility, MulticastCurvePoint, MulticastSolution,
};
pub use pp::{b_max_single, capacity_curve, capacity_energy, CapacityCurve, CapacityPoint};
pub use segmentation::{
    enumerate_partitions, group_capacity, optimize_capacity, optimize_loss, segmentation_loss,
    Segmentation, SegmentationScore, Segmenter,
};
pub use solver::{FEASIBILITY_TOL, GAP_TOLERANCE};
