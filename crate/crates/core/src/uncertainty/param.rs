use std::fmt;
use std::sync::Arc;

use crate::dp::{self, BinaryOp, DesignProblem, TraceOptions};
use crate::poset::Poset;

use super::kernel::{MarkovKernel, Space};
use super::{Result, UncertaintyError};

type BuildFn<A> = dyn Fn(&A) -> Result<DesignProblem> + Send + Sync;

/// A family of design problems indexed by a parameter in `domain`, all
/// sharing the same functionality and resource posets.
pub struct ParameterizedDP<A> {
    domain: Space,
    fun: Poset,
    res: Poset,
    build: Arc<BuildFn<A>>,
}

impl<A> Clone for ParameterizedDP<A> {
    fn clone(&self) -> Self {
        ParameterizedDP {
            domain: self.domain.clone(),
            fun: self.fun.clone(),
            res: self.res.clone(),
            build: self.build.clone(),
        }
    }
}

impl<A> fmt::Debug for ParameterizedDP<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParameterizedDP({} => {} -> {})", self.domain, self.fun, self.res)
    }
}

impl<A: 'static> ParameterizedDP<A> {
    pub fn new<B>(domain: Space, fun: Poset, res: Poset, build: B) -> Self
    where
        B: Fn(&A) -> Result<DesignProblem> + Send + Sync + 'static,
    {
        ParameterizedDP { domain, fun, res, build: Arc::new(build) }
    }

    /// The family that ignores its parameter.
    pub fn constant(domain: Space, dp: &DesignProblem) -> Self {
        let d = dp.clone();
        ParameterizedDP::new(domain, dp.fun_poset().clone(), dp.res_poset().clone(), move |_| Ok(d.clone()))
    }

    pub fn domain(&self) -> &Space {
        &self.domain
    }

    pub fn fun_poset(&self) -> &Poset {
        &self.fun
    }

    pub fn res_poset(&self) -> &Poset {
        &self.res
    }

    pub fn build(&self, a: &A) -> Result<DesignProblem> {
        let dp = (self.build)(a)?;
        if dp.fun_poset() != &self.fun || dp.res_poset() != &self.res {
            return Err(UncertaintyError::SpaceMismatch {
                expected: format!("{} -> {}", self.fun, self.res),
                found: format!("{} -> {}", dp.fun_poset(), dp.res_poset()),
            });
        }
        Ok(dp)
    }

    /// The delta kernel `a ↦ δ(build(a))`.
    pub fn as_kernel(&self) -> MarkovKernel<A, DesignProblem> {
        let p = self.clone();
        MarkovKernel::deterministic(self.domain.clone(), Space::dp(&self.fun, &self.res), move |a| p.build(a))
    }
}

/// `(a, b) ↦ op(a(a), b(b))` over the product of the parameter spaces.
pub fn param_lift<A: 'static, B: 'static>(
    op: BinaryOp,
    a: &ParameterizedDP<A>,
    b: &ParameterizedDP<B>,
) -> Result<ParameterizedDP<(A, B)>> {
    let (fun, res) = op.result_posets((&a.fun, &a.res), (&b.fun, &b.res))?;
    let (a, b) = (a.clone(), b.clone());
    let domain = Space::pair(a.domain.clone(), b.domain.clone());
    Ok(ParameterizedDP::new(domain, fun, res, move |(x, y): &(A, B)| {
        Ok(op.apply(&a.build(x)?, &b.build(y)?)?)
    }))
}

pub fn param_trace<A: 'static>(a: &ParameterizedDP<A>) -> Result<ParameterizedDP<A>> {
    param_trace_with(a, TraceOptions::default())
}

pub fn param_trace_with<A: 'static>(a: &ParameterizedDP<A>, opts: TraceOptions) -> Result<ParameterizedDP<A>> {
    let (fun, res) = dp::trace_posets(&a.fun, &a.res)?;
    let a2 = a.clone();
    Ok(ParameterizedDP::new(a.domain.clone(), fun, res, move |x| Ok(dp::trace_with(&a2.build(x)?, opts)?)))
}

/// Pulls a family back along a deterministic parameter map `r: B → A`.
pub fn reparam<A: 'static, B: 'static, R>(a: &ParameterizedDP<A>, domain: Space, r: R) -> ParameterizedDP<B>
where
    R: Fn(&B) -> Result<A> + Send + Sync + 'static,
{
    let a2 = a.clone();
    ParameterizedDP::new(domain, a.fun.clone(), a.res.clone(), move |y| a2.build(&r(y)?))
}
