pub mod cli;
pub mod error;
pub mod evolution;
pub mod monitor;
pub mod field;
pub mod inequalities;
pub mod kernels;
pub mod mellin;
pub mod ops;
pub mod plot;
pub mod quad;
pub mod special;
