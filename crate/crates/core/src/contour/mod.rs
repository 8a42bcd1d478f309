//! Trapezoid-rule evaluation of the contour-integral formulas.
//!
//! Every integral is an `N`-fold product of circles. Large circles are
//! centered at the origin and enclose every pole; small circles are nested
//! around 1, each containing `q` times the later ones and excluding 0. The
//! trapezoid rule on a circle converges geometrically for these analytic
//! integrands, and the even-node subgrid gives a free error estimate.

mod formulas;
mod identities;
mod kernel;
mod quad;
mod spec;

pub use formulas::{
    antisymmetry_check, cdf_contour, cdf_route, contour_i, contour_i_tilde, contour_j,
    qmoment_contour, qmoment_from_exponents, sorting_permutation, transition_prob_contour,
    transition_prob_labeled, CdfRoute, MAX_TRANSITION_PARTICLES,
};
pub use identities::{identity_suite, IdentityCheck, IdentityParams, IDENTITY_TOLERANCE};
pub use kernel::{a_sigma, b_factor, s_factor, symmetrized_a, POLE_TOLERANCE};
pub use quad::IntegralResult;
#[cfg(test)]
pub(crate) use kernel::b_raw;
pub(crate) use quad::{integrate_b, Grid};
pub use spec::{
    Circle, ContourSpec, AUTO_TOLERANCE, CONTOUR_MARGIN, DEFAULT_LARGE_RADIUS, DEFAULT_NODES,
};
