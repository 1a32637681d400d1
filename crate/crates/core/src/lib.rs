//! Uplink rate, spectrum efficiency and energy efficiency of decoupled and
//! coupled access in K-tier heterogeneous cellular networks.

pub mod analytic;
pub mod cli;
pub mod mc;
pub mod model;
pub mod special;
