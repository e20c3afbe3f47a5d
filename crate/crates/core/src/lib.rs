//! Optimal time schedules for linear-interpolation transport flows.
//!
//! Given spectral bounds of a transport map's Jacobian, the crate computes the
//! schedule minimizing the uniform Lipschitz constant of the scheduled velocity
//! field, its `L^{2p}` relaxations, and the 1D flows used to check the theory.

pub mod cli;
pub mod error;
pub mod flow;
pub mod interp;
pub mod io;
pub mod lipschitz;
pub mod mixture;
pub mod quadrature;
pub mod schedule;
pub mod spectral;
pub mod variational;

pub use error::{Error, Result};
pub use flow::{FlowMethod, FlowTrajectory, TransportMap1D};
pub use lipschitz::{LipschitzReport, Spectrum};
pub use mixture::{Component, GaussianMixture};
pub use schedule::{optimal_schedule, transition_time, trivial_schedule, Schedule, ScheduleKind};
pub use spectral::{SpectralBounds, SpectralField};
pub use variational::LpSolution;
