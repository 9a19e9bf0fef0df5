//! Exterior calculus and reduced geometric flows for the two-function family
//! of coclosed G2-structures on a 3-Sasakian 7-manifold.
//!
//! * [`exterior`]: exact coframe algebra, Hodge star, Laplacian, torsion.
//! * [`flows`]: Laplacian coflow, Laplacian flow and Ricci flow as explicit
//!   vector fields, full and scale-invariant.
//! * [`dynamics`]: integration, critical points, nullclines, separatrices and
//!   basin maps for the planar reductions.
//! * [`verify`]: the randomized identity suite tying the three together.

pub mod dynamics;
pub mod exterior;
pub mod flows;
pub mod par;
pub mod scalar;
pub mod sign;
pub mod verify;

pub use sign::Sign;
