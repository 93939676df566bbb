//! Achievable-rate analysis and optimization of BD-RIS-assisted MIMO links
//! with LoS forward/backward channels.
//!
//! The library covers: channel synthesis (ULA steering, path loss,
//! Rayleigh/Ricean draws, rank-1 LoS RIS links), the rank-1 determinant
//! expansion behind the closed-form rate, optimal scattering matrices
//! (fully-connected, group-connected, diagonal, lossy rank-2), waterfilling
//! with an alternating phase/covariance loop, and a seeded Monte Carlo
//! sweep harness with CSV output.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub mod channel;
pub mod error;
pub mod linalg;
pub mod rate;
pub mod rng;
pub mod scatter;
pub mod sim;
pub mod txopt;

pub use channel::{ChannelSet, LosFactors, RisLinks, ScenarioConfig, SteeringVector};
pub use error::{Error, Result};
pub use rate::{GammaTriple, RateReport};
pub use scatter::{Architecture, CouplingResult, QrotMode, ScatteringMatrix};
pub use sim::{SchemeId, SweepResult, SweepSpec, SweepVar};
pub use txopt::{AlternatingTrace, TxCovariance};
