//! Power-grid optimization toolkit: AC/DC optimal power flow, DC parameter
//! tuning against AC apparent flows, and DC optimal transmission switching.
//!
//! The crate is organized around a three-phase workflow:
//!
//! 1. Solve AC-OPF on the full topology and extract per-branch apparent-flow
//!    targets ([`ac`]).
//! 2. Tune the DC power-flow parameters (b, psi) so the DC-OPF flows match
//!    those targets, differentiating through the DC-OPF KKT system
//!    ([`dcopf`], [`tuner`]).
//! 3. Solve the switching MILP with the tuned parameters and validate the
//!    chosen topology with a full AC-OPF ([`ots`], [`pipeline`]).

pub mod error;
pub mod network;
pub mod ac;
pub mod dcopf;
pub mod ots;
pub mod params;
pub mod pipeline;
pub mod qp;
pub mod tuner;

pub use error::{CaseError, SolveError};
pub use network::{parse_case, Branch, Bus, BusKind, Generator, Incidence, NetworkCase};
