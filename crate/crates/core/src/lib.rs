pub mod cone;
pub mod expr;
pub(crate) mod lp;
pub mod rational;
pub mod growth;
pub mod hyperfunction;
pub mod quadrature;
pub mod fourier;
pub mod localization;
pub mod loop_su2;
pub mod config;
pub mod cli;
