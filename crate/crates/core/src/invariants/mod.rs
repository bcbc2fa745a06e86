//! Singular extremals of the rolling distribution and the invariants of
//! their Jacobi curves: the trace kernel, generalized Ricci curvature, the
//! fundamental form and the projective curvature `r̄`.

mod extremal;
mod jacobi;
mod kernel;
pub mod model;
mod quadric;

pub use extremal::{
    char_membership, cobasis, singular_extremal, CotangentState, Extremal, ExtremalSample, MEMBERSHIP_TOL,
};
pub use jacobi::{
    jacobi_curve, projector, trace_kernel, transversality_angle, LagrangianFrame, COND_LIMIT,
};
pub use kernel::{
    form_at, fundamental_form, g_function, invariant_report, projective_map, rbar_closed_form, rbar_from,
    rbar_numeric, ricci, schwarzian, stencil_reach, DiagonalEstimate, FormEstimate, InvariantReport,
    Parameterized, RbarEstimate, ALPHA, BETA, CHAIN_RULE_COEFF, DIM, POLE, RICCI_SCALE,
};
pub use quadric::{fit_conic, quadric_flatness_test, quadric_flatness_test_with, ConicFit, MIN_SAMPLES};
