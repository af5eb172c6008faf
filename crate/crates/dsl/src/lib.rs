//! The `.codp` diagram language.
//!
//! [`parse`] turns text into a canonical [`DiagramAst`], [`format`] prints it
//! back, and [`elaborate`] type-checks a diagram and turns it into a
//! [`CompositionExpr`] that [`Elaborated::build`] instantiates against a
//! [`Registry`] of named design problems.

pub mod ast;
pub mod elaborate;
pub mod error;
pub mod format;
pub mod parse;
pub mod registry;

pub use ast::DiagramAst;
pub use elaborate::{elaborate, CompositionExpr, Elaborated, Wiring};
pub use error::{DslError, Result};
pub use format::format;
pub use parse::parse;
pub use registry::{Entry, ParamValue, Registry};
