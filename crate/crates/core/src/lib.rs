//! Discrete-event simulator for fog-robotics request offloading.

pub mod calibrate;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod model;
pub mod report;
pub mod rng;
pub mod routing;
pub mod scenario;
pub mod stats;
pub mod topology;
pub mod workload;
