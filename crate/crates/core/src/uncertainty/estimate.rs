use rayon::prelude::*;
use serde::Serialize;

use crate::dp::{DesignProblem, DpError};
use crate::poset::Element;
use crate::seed;

use super::kernel::MarkovKernel;
use super::sampler::DPSampler;
use super::{Result, UncertaintyError};

const Z95: f64 = 1.959963984540054;

/// A Monte Carlo success-probability estimate with its 95% Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: usize,
    pub successes: usize,
    pub root_seed: u64,
}

/// The 95% Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (successes as f64, n as f64);
    let p = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Whether `(f, r)` is feasible for `dp`. A diverging feedback loop counts
/// as infeasible.
pub fn feasible_or_diverged(dp: &DesignProblem, f: &Element, r: &Element) -> Result<bool> {
    match dp.feasible(f, r) {
        Ok(b) => Ok(b),
        Err(DpError::Divergence { .. }) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// Estimates `P[(f, r) feasible]` under `sampler` from `n` draws; draw `i`
/// uses `split(root_seed, i)`. Draws run in parallel and the result does not
/// depend on the thread count.
pub fn sampler_success_probability(
    sampler: &DPSampler,
    f: &Element,
    r: &Element,
    n: usize,
    root_seed: u64,
) -> Result<Estimate> {
    if n == 0 {
        return Err(UncertaintyError::NoSamples);
    }
    sampler.fun_poset().check(f)?;
    sampler.res_poset().check(r)?;
    let successes = (0..n)
        .into_par_iter()
        .map(|i| {
            let dp = sampler.draw(seed::split(root_seed, i as u64))?;
            feasible_or_diverged(&dp, f, r).map(usize::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let (ci_lo, ci_hi) = wilson_interval(successes, n);
    Ok(Estimate { p_hat: successes as f64 / n as f64, ci_lo, ci_hi, n, successes, root_seed })
}

/// [`sampler_success_probability`] for the kernel conditioned at `d`.
pub fn success_probability<A>(
    kernel: &MarkovKernel<A, DesignProblem>,
    d: A,
    f: &Element,
    r: &Element,
    n: usize,
    root_seed: u64,
) -> Result<Estimate>
where
    A: Send + Sync + 'static,
{
    sampler_success_probability(&kernel.condition(d)?, f, r, n, root_seed)
}
