//! Autonomous quantum clock engine: a qubit whose level splitting is driven
//! by a spin clock, thermalised by a bath and stabilised by projective
//! measurements that harvest work.
//!
//! The crate is organised bottom up:
//! [`spin_algebra`] builds the machine, [`engine`] steps the joint state,
//! [`accounting`] averages the energy flows over a cycle, and [`zeno`],
//! [`therm`] and [`mixed_fuel`] cover the limiting and extended regimes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accounting;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod mixed_fuel;
pub mod output;
pub mod sampling;
pub mod spin_algebra;
pub mod therm;
pub mod zeno;

pub use accounting::{
    cycle_average, selective_cycle_average, unselective_cycle_average, CycleGrid, CycleLedger, CycleParams,
    FlipConvention, Mode,
};
pub use engine::{BlockState, Thermalization, TransitionMatrix};
pub use error::{Error, Result};
pub use spin_algebra::{MachineSpec, Spin};
