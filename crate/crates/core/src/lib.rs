//! Rate analysis for a massive MIMO downlink that serves two terminal classes
//! at once: B-terminals, which the base station beamforms to using channel
//! estimates from uplink pilots, and O-terminals, which receive a broadcast
//! signal placed in the nullspace of the estimated B-terminal channel matrix
//! so that (up to estimation error) it does not disturb the beamformed links.
//!
//! The crate has three layers:
//!
//! * deterministic closed-form expressions for every achievable rate and
//!   interference variance ([`closedform`], [`estimation`], [`model`]),
//! * a Monte Carlo oracle that simulates fading, MMSE estimation, precoding
//!   and nullspace broadcasting, and measures the same quantities empirically
//!   ([`montecarlo`]),
//! * operating-point machinery that traces feasibility curves over the
//!   broadcast-to-beamforming power ratio, matches orthogonal access at equal
//!   energy, and locates curve intersections ([`solver`]).
//!
//! The closed forms and the simulation are kept strictly independent so that
//! either can falsify the other; the `verify` machinery in the CLI crate runs
//! both routes and compares.
//!
//! All powers are linear (unitless SNRs normalized to the noise floor).
//! Conversion helpers live in [`model`]. Rates are in bit/s/Hz; "net" rates
//! include the frame overhead prelog, "per-interval" rates do not.

pub mod closedform;
pub mod estimation;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod solver;

pub use model::{db_to_linear, linear_to_db};
