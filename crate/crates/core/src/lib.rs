//! Solution families, commuting flows and hodograph inversion for nonlinear
//! wave equations `f_vv = a²(u, v) f_uu` arising from 2×2 hydrodynamic-type
//! systems.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod catalog;
pub mod commute;
pub mod domain;
pub mod error;
pub mod evolve;
pub mod exprlang;
pub mod field;
pub mod hodograph;
pub mod jet;
pub mod solutions;
pub mod speedlaw;

pub use commute::FlowMatrix;
pub use domain::Rect;
pub use error::{Error, Result};
pub use evolve::Scheme;
pub use exprlang::FuncExpr;
pub use field::{CellFlag, StateField};
pub use hodograph::{HodographMap, PSystem};
pub use jet::{Jet2, Jet3};
pub use solutions::Density;
pub use speedlaw::{ConstraintData, ConstraintResiduals, SpeedLaw};
