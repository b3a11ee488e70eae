//! Executable convergence rates for stochastic processes, concrete seeded
//! stochastic iterations, and a Monte Carlo harness that checks the rates
//! against simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expr;
pub mod moduli;
pub mod montecarlo;
pub mod processes;
pub mod rates;
pub mod regularity;
pub mod schedule;

pub use error::{Error, Result};
pub use moduli::{
    DivergenceRate, Index, LiminfModulus, RateAsFn, RateFn, RegularityModulus, SiccFunction,
    TailRate, INDEX_MAX,
};
pub use montecarlo::{EstimateWithCI, McConfig, RowStatus, ValidationRow};
pub use processes::{Process, ProcessModel, RandomSource, Space, StatePoint};
pub use rates::RateBundle;
pub use schedule::Schedule;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
