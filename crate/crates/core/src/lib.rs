pub mod arith;
pub mod bounds;
pub mod error;
pub mod interval;
pub mod smooth;
pub mod transforms;
pub mod coefficients;
pub mod correlations;
pub mod orthogonality;
pub mod reef;
pub mod cli;
