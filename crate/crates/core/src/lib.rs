//! Numerical tools for homogeneous and inhomogeneous Diophantine
//! approximation: best approximations, empirical exponents, the diagonal-flow
//! reformulation, and finite checks of the measure-geometric certificates.

pub mod dynamics;
pub mod enumeration;
pub mod error;
pub mod exponents;
pub mod geometry;
pub mod residual;

pub use dynamics::{
    enumerate_t, flow_from_sl, flow_from_sl_primed, g_apply, g_norm, lambda_membership_scan,
    min_g_norm, step1_forward, step2_backward, Admissibility, FlowVector, MembershipWitness,
    ScalingFunction, Step1Outcome, Step2Outcome, Variant,
};
pub use enumeration::{
    best_approximation, best_multiplicative, best_over_grid, best_standard, scan_partition,
    BestApproximation, Mode, ScanRegion,
};
pub use error::{Error, Result};
pub use exponents::{
    default_grid, estimate_exponents, exponent_curve, exponent_of, transference_report, Check,
    CheckId, CurvePoint, ExponentEstimate, TransferenceReport, TransferenceTolerances,
};
pub use geometry::{
    neighborhood_contains, Ball, BallFamily, CurveModel, Interval, MeasureModel,
    NeighborhoodSpec, Plane, PolyCurve,
};
pub use residual::{
    dist_nearest_int, prod_plus, residual_quality, signed_frac, sup_norm, ApproxInstance,
    LatticePoint, Quality,
};
