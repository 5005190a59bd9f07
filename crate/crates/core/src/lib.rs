//! Wilson's Haar system on finite dyadic grids of `[0,1)^n`, weighted
//! variants, paraproducts and related dyadic operators, and numerical
//! checks of weighted inequalities for them.
#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod dyadic;
pub mod error;
pub mod grid;
pub mod haar;
pub mod lab;
pub mod linalg;
pub mod operators;
pub mod report;
pub mod sample;
pub mod weights;

pub use dyadic::{DyadicCube, DyadicInterval, DyadicRectangle, HaarIndex, Layout, Node};
pub use error::{Error, Result};
pub use grid::GridFunction;
pub use haar::{CoefficientTree, TensorHaarIndex};
pub use linalg::{NormMethod, OperatorMatrix};
pub use operators::{LinearOperator, SignPattern};
pub use report::{CheckReport, RatioRow};
pub use weights::{Weight, WeightSpec};
