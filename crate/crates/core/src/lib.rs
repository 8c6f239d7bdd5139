// `!(x <= tol)` is used on purpose throughout: NaN must count as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod infisometry;
pub mod numeric;
pub mod operators;
pub mod polyfit;
pub mod report;
pub mod sequences;
