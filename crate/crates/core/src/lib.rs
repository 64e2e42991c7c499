//! Agent-based macroeconomic simulator for decarbonisation scenarios.
//!
//! A synthetic population of households and firms trades through a
//! Leontief input-output economy with integer-cent, stock-flow consistent
//! books. Scenarios apply five policy levers against a no-action baseline;
//! technology costs follow experience curves and household durables spread
//! over a social network.

pub mod calibration;
pub mod config;
pub mod diffusion;
pub mod economy;
pub mod io_table;
pub mod metrics;
pub mod money;
pub mod population;
pub mod rng;
pub mod runner;
pub mod scenario;
pub mod techlearn;

pub use money::Cents;
