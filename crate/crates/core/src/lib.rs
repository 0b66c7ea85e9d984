//! Capacity and outage of terahertz links under micro-mobility.
//!
//! A narrow-beam link stays aligned until the user's small random motions
//! push it outside the beam, after which it must sweep both codebooks to
//! realign. [`fpt`] models the time to misalignment, [`schemes`] turns it into
//! outage and spectral efficiency for on-demand and periodic realignment,
//! [`sweep`] explores and optimizes the design space and [`sim`] is the Monte
//! Carlo reference.

pub mod error;
pub mod fpt;
pub mod linkbudget;
pub mod numerics;
pub mod schemes;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
pub use fpt::{
    aggregate_distribution, fpt_cdf_exact, fpt_moments, fpt_pdf_exact, lognormal_surrogate,
    mean_time, min_of_two, AggregateMode, AngularMuBoundary, Axis, DiffusionCoeffs,
    FptDistribution, FptKind, FptOptions, LognormalParams, MobilityParams, MuConvention,
};
pub use linkbudget::{
    alignment_duration, beamwidth, calibrate, misalignment_boundaries, se_capacity_max, snr,
    AlignedLimits, Boundaries, CalibrationPoint, NoiseModel, SystemConfig,
};
pub use numerics::{QuadratureSpec, SeriesSpec};
pub use schemes::{
    mean_time_scheme2, metrics_for, metrics_scheme1, metrics_scheme2, outage_scheme1,
    outage_scheme1_renewal, outage_scheme2, LinkMetrics, Scheme,
};
pub use sim::{
    chi_square_gof, ks_distance, simulate_fpt, simulate_scheme, CrossingDetection, FptSamples,
    GofResult, RealignmentMobility, SimSpec, SimulationTrace,
};
pub use sweep::{
    calibrate_mean_se, capacity_envelope, optimize_array_ap, optimize_array_ue,
    optimize_arrays_joint, optimize_update_period, sweep, ArrayOptimum, Calibration, JointGrid,
    JointOptimum, Metric, Model, RealignmentCost, SchemeChoice, SweepAxis, SweepResult,
    UpdatePeriodOptimum,
};
