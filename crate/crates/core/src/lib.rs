//! Sum-throughput optimization for full-duplex wireless-powered networks
//! assisted by an intelligent reflecting surface.

pub mod algorithms;
pub mod baselines;
pub mod convex_core;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod scenario;
pub mod schemes;
