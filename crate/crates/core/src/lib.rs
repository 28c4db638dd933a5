#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod assembly;
pub mod basis;
pub mod cases;
pub mod config;
pub mod enrichment;
pub mod error;
pub mod fracture;
pub mod material;
pub mod mesh;
pub mod meshgen;
pub mod norms;
pub mod onedim;
pub mod quadrature;
pub mod sparse;
pub mod vtk;

pub use error::{Error, Result};
