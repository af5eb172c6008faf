use crate::dp::{self, BinaryOp, DesignProblem, DpError, TraceOptions};
use crate::poset::Element;

use super::{Result, UncertaintyError};

/// A pessimistic/optimistic pair of design problems on shared posets.
///
/// The lower problem should be contained in the upper one: at every
/// functionality, each pessimistic minimal resource dominates some optimistic
/// minimal resource. This is checked on demand with
/// [`IntervalDP::containment_holds`] since it cannot be decided globally.
#[derive(Clone, Debug)]
pub struct IntervalDP {
    lower: DesignProblem,
    upper: DesignProblem,
}

impl IntervalDP {
    pub fn new(lower: DesignProblem, upper: DesignProblem) -> Result<Self> {
        if lower.fun_poset() != upper.fun_poset() || lower.res_poset() != upper.res_poset() {
            return Err(UncertaintyError::Dp(DpError::PosetMismatch {
                op: "interval",
                left: format!("{} -> {}", lower.fun_poset(), lower.res_poset()),
                right: format!("{} -> {}", upper.fun_poset(), upper.res_poset()),
            }));
        }
        Ok(IntervalDP { lower, upper })
    }

    pub fn lower(&self) -> &DesignProblem {
        &self.lower
    }

    pub fn upper(&self) -> &DesignProblem {
        &self.upper
    }

    /// Checks `↑lower.query(f) ⊆ ↑upper.query(f)` at every given `f`.
    pub fn containment_holds(&self, at: &[Element]) -> Result<bool> {
        for f in at {
            let lo = self.lower.query(f)?;
            let up = self.upper.query(f)?;
            if !lo.is_upper_subset_of(&up)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `dp ↦ [dp, dp]`.
pub fn embed_dp(dp: &DesignProblem) -> IntervalDP {
    IntervalDP { lower: dp.clone(), upper: dp.clone() }
}

/// Applies `op` endpoint-wise.
pub fn interval_lift(op: BinaryOp, a: &IntervalDP, b: &IntervalDP) -> Result<IntervalDP> {
    Ok(IntervalDP { lower: op.apply(&a.lower, &b.lower)?, upper: op.apply(&a.upper, &b.upper)? })
}

pub fn interval_trace(a: &IntervalDP) -> Result<IntervalDP> {
    interval_trace_with(a, TraceOptions::default())
}

pub fn interval_trace_with(a: &IntervalDP, opts: TraceOptions) -> Result<IntervalDP> {
    Ok(IntervalDP { lower: dp::trace_with(&a.lower, opts)?, upper: dp::trace_with(&a.upper, opts)? })
}
