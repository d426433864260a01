//! Finite spaces of homogeneous type, variable-exponent Lebesgue norms and
//! the exact Hardy–Littlewood maximal operator, together with a numerical
//! construction of functions whose maximal-function norm ratio grows without
//! bound when the exponent touches 1.

pub mod cli;
pub mod counterexample;
pub mod maximal;
pub mod numeric;
pub mod space;
pub mod varlp;
