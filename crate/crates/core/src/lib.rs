//! Born-approximation scattering of a charged particle off a knotted magnetic
//! solenoid.
//!
//! The solenoid is modelled as a closed line of point magnetic dipoles tangent
//! to the knot. Its vector potential is expanded to octopole order, and the
//! first-order matrix element `V_ni` between plane waves is assembled from
//! three ingredients:
//!
//! * curve moments ([`multipole`]) integrated along the knot ([`curves`]),
//! * semi-infinite radial Bessel integrals ([`radial`]),
//! * angular brackets of direction-cosine monomials ([`angular`]).
//!
//! Each closed-form path has an independent brute-force counterpart
//! (Biot-Savart line integrals, sphere quadrature, volume quadrature) so that
//! every published identity can be checked numerically.

pub mod angular;
pub mod born;
pub mod cli;
pub mod curves;
pub mod error;
pub mod multipole;
pub mod potential;
pub mod quadrature;
pub mod radial;
pub mod specfun;
pub mod vec3;

pub use born::{BornAmplitude, ScatteringKinematics};
pub use curves::{CurvePoint, KnotSpec};
pub use error::{Error, Result};
pub use multipole::{MomentSet, OctopoleMoments, QuadrupoleMoments};

/// Default number of equally spaced curve samples for periodic quadrature.
pub const DEFAULT_CURVE_SAMPLES: usize = 1024;

/// Default radius of the excluded ball around the knot.
pub const DEFAULT_LAMBDA0: f64 = 3.5;
