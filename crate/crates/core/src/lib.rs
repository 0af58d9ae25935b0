pub mod analytic;
pub mod arith;
pub mod characters;
pub mod error;
pub mod examples;
pub mod fourier_engine;
pub mod gauss_sums;
pub mod parse;
pub mod quadrature;
pub mod report;
