//! Experiment driver: configuration, commands, tables and SVG output.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;
