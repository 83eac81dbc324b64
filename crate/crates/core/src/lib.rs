#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod behavior;
pub mod config;
pub mod emd;
pub mod error;
pub mod eval;
pub mod exec;
pub mod foe;
pub mod geom;
pub mod io;
pub mod pipeline;
pub mod risk;
pub mod synth;
pub mod vision;

pub use error::{Error, Result};
