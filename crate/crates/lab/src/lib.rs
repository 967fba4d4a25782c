//! Grid evaluation, experiments, file formats and CLI plumbing on top of
//! `uniconvex`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod experiments;
pub mod grid;
pub mod io;
