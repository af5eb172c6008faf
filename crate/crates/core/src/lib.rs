//! Monotone co-design problems over posets, their compositions, and
//! uncertainty over them.

pub mod antichain;
pub mod dp;
pub mod poset;
pub mod seed;
pub mod uncertainty;

pub use antichain::Antichain;
pub use dp::{BinaryOp, DesignProblem, DpError, QueryResult, TraceOptions, Witness};
pub use poset::{Element, Poset, PosetError};
