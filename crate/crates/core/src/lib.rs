//! Verification laboratory for the maximal invariance group of free
//! nonrelativistic dynamics: the semi-direct product of SL(2,R) time maps
//! with the static (rotation/translation/boost) Galilei group.
//!
//! The crate implements the group as an executable algebra and provides the
//! numerical machinery used to certify its claims:
//!
//! * [`group`] — Moebius time maps, static Galilei elements, their
//!   semi-direct composition, actions on events and trajectories, the
//!   Schwarzian derivative, and action-cocycle checks.
//! * [`noether`] — conserved charges (H, D, A, P, K, J) on phase-space
//!   states, infinitesimal variations, adjoint and doublet transformation
//!   behavior.
//! * [`dynamics`] — RK4 integration of the free, Calogero–Moser, and anyon
//!   systems, equation-of-motion residuals, invariance checks, and
//!   Liouville transport.
//! * [`quantum`] — 1D Schrödinger evolution (Cayley form, spectral space),
//!   the wavefunction transformation law, the centrally extended operator
//!   algebra, and the Heisenberg–Weyl relation.
//! * [`fluid`] — 1D finite-volume polytropic Euler solver and the
//!   explosion–implosion duality induced by expansions.
//! * [`csvio`] — CSV dumps of trajectories, wave fields, and fluid states.

pub mod csvio;
pub mod dynamics;
pub mod fluid;
pub mod group;
pub mod noether;
pub mod numeric;
pub mod quantum;

/// Default guard on |gamma*t + delta| below which a Moebius map is treated
/// as singular at t.
pub const EPS_SING: f64 = 1e-8;
