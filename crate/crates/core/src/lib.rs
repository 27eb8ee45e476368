pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod ising;
pub mod lp;
pub mod multiplier;
pub mod penalty;
pub mod remedy;
pub mod sampler;
pub mod topology;
