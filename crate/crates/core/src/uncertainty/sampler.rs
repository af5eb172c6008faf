use std::sync::Arc;

use rand::Rng;

use crate::dp::{self, BinaryOp, DesignProblem, TraceOptions};
use crate::poset::Poset;
use crate::seed;

use super::{Result, UncertaintyError};

type DrawFn = dyn Fn(u64) -> Result<DesignProblem> + Send + Sync;

/// A distribution over design problems from `fun` to `res`, represented by a
/// deterministic seeded sampler.
#[derive(Clone)]
pub struct DPSampler {
    fun: Poset,
    res: Poset,
    draw: Arc<DrawFn>,
    support: Option<Arc<Vec<(f64, DesignProblem)>>>,
}

impl std::fmt::Debug for DPSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DPSampler")
            .field("fun", &self.fun)
            .field("res", &self.res)
            .field("finite_support", &self.support.as_ref().map(|s| s.len()))
            .finish()
    }
}

impl DPSampler {
    pub fn from_fn<D>(fun: Poset, res: Poset, draw: D) -> Self
    where
        D: Fn(u64) -> Result<DesignProblem> + Send + Sync + 'static,
    {
        DPSampler { fun, res, draw: Arc::new(draw), support: None }
    }

    /// A distribution with finitely many outcomes. Weights must be
    /// non-negative and sum to one (within 1e-9).
    pub fn finite(outcomes: Vec<(f64, DesignProblem)>) -> Result<Self> {
        let Some((_, first)) = outcomes.first() else {
            return Err(UncertaintyError::InvalidDistribution("no outcomes".into()));
        };
        let (fun, res) = (first.fun_poset().clone(), first.res_poset().clone());
        if outcomes.iter().any(|(w, d)| !(*w >= 0.0) || d.fun_poset() != &fun || d.res_poset() != &res) {
            return Err(UncertaintyError::InvalidDistribution(
                "negative weight or mixed posets among outcomes".into(),
            ));
        }
        let total: f64 = outcomes.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(UncertaintyError::InvalidDistribution(format!("weights sum to {total}")));
        }
        let support = Arc::new(outcomes);
        let table = support.clone();
        Ok(DPSampler {
            fun,
            res,
            draw: Arc::new(move |s| Ok(pick(&table, seed::rng(s).random::<f64>()).clone())),
            support: Some(support),
        })
    }

    pub fn fun_poset(&self) -> &Poset {
        &self.fun
    }

    pub fn res_poset(&self) -> &Poset {
        &self.res
    }

    /// The exact outcome table, for samplers built with [`DPSampler::finite`]
    /// or [`delta_sampler`].
    pub fn support(&self) -> Option<&[(f64, DesignProblem)]> {
        self.support.as_deref().map(Vec::as_slice)
    }

    pub fn draw(&self, seed: u64) -> Result<DesignProblem> {
        let dp = (self.draw)(seed)?;
        if dp.fun_poset() != &self.fun || dp.res_poset() != &self.res {
            return Err(UncertaintyError::SpaceMismatch {
                expected: format!("{} -> {}", self.fun, self.res),
                found: format!("{} -> {}", dp.fun_poset(), dp.res_poset()),
            });
        }
        Ok(dp)
    }
}

/// Inverse-CDF pick from a weighted table.
pub(crate) fn pick<T>(table: &[(f64, T)], u: f64) -> &T {
    let mut acc = 0.0;
    for (w, item) in table {
        acc += w;
        if u < acc {
            return item;
        }
    }
    &table.iter().rev().find(|(w, _)| *w > 0.0).unwrap_or(&table[table.len() - 1]).1
}

/// The point mass at `dp`.
pub fn delta_sampler(dp: &DesignProblem) -> DPSampler {
    let outcome = dp.clone();
    DPSampler {
        fun: dp.fun_poset().clone(),
        res: dp.res_poset().clone(),
        draw: Arc::new(move |_| Ok(outcome.clone())),
        support: Some(Arc::new(vec![(1.0, dp.clone())])),
    }
}

/// Image of `s` under `map`, whose results live in `fun -> res`.
pub fn pushforward<M>(s: &DPSampler, fun: Poset, res: Poset, map: M) -> DPSampler
where
    M: Fn(&DesignProblem) -> Result<DesignProblem> + Send + Sync + 'static,
{
    let inner = s.clone();
    DPSampler::from_fn(fun, res, move |seed| map(&inner.draw(seed)?))
}

/// `p ⋄ q` for independent `p` and `q`: the operands are drawn with
/// `split(seed, 0)` and `split(seed, 1)`.
pub fn dist_lift_binary(op: BinaryOp, p: &DPSampler, q: &DPSampler) -> Result<DPSampler> {
    let (fun, res) = op.result_posets((&p.fun, &p.res), (&q.fun, &q.res))?;
    let (p, q) = (p.clone(), q.clone());
    Ok(DPSampler::from_fn(fun, res, move |seed| {
        let a = p.draw(seed::split(seed, 0))?;
        let b = q.draw(seed::split(seed, 1))?;
        Ok(op.apply(&a, &b)?)
    }))
}

/// Trace applied draw by draw, on the same seed.
pub fn dist_lift_trace(p: &DPSampler) -> Result<DPSampler> {
    dist_lift_trace_with(p, TraceOptions::default())
}

pub fn dist_lift_trace_with(p: &DPSampler, opts: TraceOptions) -> Result<DPSampler> {
    let (fun, res) = dp::trace_posets(&p.fun, &p.res)?;
    Ok(pushforward(p, fun, res, move |d| Ok(dp::trace_with(d, opts)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::Element;

    fn reals() -> Poset {
        Poset::nonneg_real("")
    }

    fn constant(x: f64) -> DesignProblem {
        DesignProblem::from_monotone_map(reals(), reals(), move |_| Element::real(x))
    }

    #[test]
    fn delta_ignores_seed() {
        let s = delta_sampler(&constant(2.0));
        let f = Element::real(0.0);
        assert_eq!(s.draw(1).unwrap().query(&f).unwrap(), s.draw(99).unwrap().query(&f).unwrap());
    }

    #[test]
    fn finite_validates_weights() {
        assert!(DPSampler::finite(vec![(0.5, constant(1.0))]).is_err());
        assert!(DPSampler::finite(vec![]).is_err());
        assert!(DPSampler::finite(vec![(-0.5, constant(1.0)), (1.5, constant(2.0))]).is_err());
        let s = DPSampler::finite(vec![(0.5, constant(1.0)), (0.5, constant(2.0))]).unwrap();
        assert_eq!(s.support().unwrap().len(), 2);
    }

    #[test]
    fn finite_is_reproducible() {
        let s = DPSampler::finite(vec![(0.5, constant(1.0)), (0.5, constant(2.0))]).unwrap();
        let f = Element::real(0.0);
        for seed in 0..20 {
            assert_eq!(s.draw(seed).unwrap().query(&f).unwrap(), s.draw(seed).unwrap().query(&f).unwrap());
        }
    }

    #[test]
    fn pick_handles_rounding_at_the_end() {
        let t = [(0.5, 'a'), (0.5, 'b'), (0.0, 'c')];
        assert_eq!(*pick(&t, 0.25), 'a');
        assert_eq!(*pick(&t, 0.75), 'b');
        assert_eq!(*pick(&t, 1.0), 'b');
    }

    #[test]
    fn pushforward_identity_and_constant() {
        let s = DPSampler::finite(vec![(0.5, constant(1.0)), (0.5, constant(2.0))]).unwrap();
        let id = pushforward(&s, reals(), reals(), |d| Ok(d.clone()));
        let c = pushforward(&s, reals(), reals(), |_| Ok(constant(7.0)));
        let f = Element::real(0.0);
        for seed in 0..10 {
            assert_eq!(id.draw(seed).unwrap().query(&f).unwrap(), s.draw(seed).unwrap().query(&f).unwrap());
            assert_eq!(c.draw(seed).unwrap().query(&f).unwrap().elements(), &[Element::real(7.0)]);
        }
    }

    #[test]
    fn lift_checks_posets() {
        let g = delta_sampler(&DesignProblem::identity(Poset::nonneg_real("g")));
        let s = delta_sampler(&constant(1.0));
        assert!(dist_lift_binary(BinaryOp::Series, &s, &g).is_err());
        assert!(dist_lift_binary(BinaryOp::Parallel, &s, &g).is_ok());
        assert!(dist_lift_trace(&s).is_err());
    }
}
