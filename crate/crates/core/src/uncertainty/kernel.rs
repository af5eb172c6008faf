use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::dp::{BinaryOp, DesignProblem};
use crate::poset::Poset;
use crate::seed;

use super::sampler::{pick, DPSampler};
use super::{Result, UncertaintyError};

/// A finite probability table: outcomes with their probabilities. Outcomes
/// may repeat; see [`merge_pmf`].
pub type Pmf<B> = Vec<(B, f64)>;

/// Descriptor of a parameter or sample space, used to check that kernels
/// are wired to matching spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    Finite(Vec<String>),
    RealBox(Vec<(f64, f64)>),
    Product(Vec<Space>),
    Dp { fun: Poset, res: Poset },
    /// An opaque record space identified by name.
    Named(String),
}

impl Space {
    pub fn finite<I: IntoIterator<Item = S>, S: Into<String>>(labels: I) -> Self {
        Space::Finite(labels.into_iter().map(Into::into).collect())
    }

    pub fn dp(fun: &Poset, res: &Poset) -> Self {
        Space::Dp { fun: fun.clone(), res: res.clone() }
    }

    pub fn pair(a: Space, b: Space) -> Self {
        Space::Product(vec![a, b])
    }

    fn dp_posets(&self) -> Result<(&Poset, &Poset)> {
        match self {
            Space::Dp { fun, res } => Ok((fun, res)),
            other => Err(UncertaintyError::SpaceMismatch {
                expected: "a space of design problems".into(),
                found: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Finite(ls) => write!(f, "{{{}}}", ls.join(",")),
            Space::RealBox(b) => {
                let parts: Vec<String> = b.iter().map(|(lo, hi)| format!("[{lo},{hi}]")).collect();
                write!(f, "{}", parts.join("x"))
            }
            Space::Product(ss) => {
                let parts: Vec<String> = ss.iter().map(ToString::to_string).collect();
                write!(f, "({})", parts.join(" x "))
            }
            Space::Dp { fun, res } => write!(f, "dp({fun}, {res})"),
            Space::Named(n) => write!(f, "{n}"),
        }
    }
}

type DrawFn<A, B> = dyn Fn(&A, u64) -> Result<B> + Send + Sync;
type PmfFn<A, B> = dyn Fn(&A) -> Result<Pmf<B>> + Send + Sync;

/// A Markov kernel `A ⇀ B`: for each parameter a distribution on `B`,
/// represented by a deterministic sampler `(parameter, seed) ↦ sample`.
/// Kernels with finite support may also carry their exact probability table.
pub struct MarkovKernel<A, B> {
    domain: Space,
    codomain: Space,
    draw: Arc<DrawFn<A, B>>,
    pmf: Option<Arc<PmfFn<A, B>>>,
}

impl<A, B> Clone for MarkovKernel<A, B> {
    fn clone(&self) -> Self {
        MarkovKernel {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            draw: self.draw.clone(),
            pmf: self.pmf.clone(),
        }
    }
}

impl<A, B> fmt::Debug for MarkovKernel<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkovKernel")
            .field("domain", &self.domain)
            .field("codomain", &self.codomain)
            .field("pmf", &self.pmf.is_some())
            .finish()
    }
}

fn validate_pmf<B>(table: &Pmf<B>) -> Result<()> {
    if table.is_empty() || table.iter().any(|(_, w)| !(*w >= 0.0)) {
        return Err(UncertaintyError::InvalidDistribution("empty table or negative weight".into()));
    }
    let total: f64 = table.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(UncertaintyError::InvalidDistribution(format!("weights sum to {total}")));
    }
    Ok(())
}

impl<A, B> MarkovKernel<A, B>
where
    A: 'static,
    B: Clone + Send + Sync + 'static,
{
    /// A sampler-only kernel.
    pub fn from_sampler<D>(domain: Space, codomain: Space, draw: D) -> Self
    where
        D: Fn(&A, u64) -> Result<B> + Send + Sync + 'static,
    {
        MarkovKernel { domain, codomain, draw: Arc::new(draw), pmf: None }
    }

    /// The delta kernel of a deterministic map.
    pub fn deterministic<F>(domain: Space, codomain: Space, map: F) -> Self
    where
        F: Fn(&A) -> Result<B> + Send + Sync + 'static,
    {
        let map = Arc::new(map);
        let m2 = map.clone();
        MarkovKernel {
            domain,
            codomain,
            draw: Arc::new(move |a, _| map(a)),
            pmf: Some(Arc::new(move |a| Ok(vec![(m2(a)?, 1.0)]))),
        }
    }

    /// A kernel given by a finite probability table per parameter; draws
    /// pick from the table by inverse CDF.
    pub fn finite<T>(domain: Space, codomain: Space, table: T) -> Self
    where
        T: Fn(&A) -> Result<Pmf<B>> + Send + Sync + 'static,
    {
        let table = Arc::new(table);
        let t2 = table.clone();
        MarkovKernel {
            domain,
            codomain,
            draw: Arc::new(move |a, s| {
                let rows = t2(a)?;
                validate_pmf(&rows)?;
                let flipped: Vec<(f64, B)> = rows.into_iter().map(|(b, w)| (w, b)).collect();
                Ok(pick(&flipped, seed::rng(s).random::<f64>()).clone())
            }),
            pmf: Some(Arc::new(move |a| {
                let rows = table(a)?;
                validate_pmf(&rows)?;
                Ok(rows)
            })),
        }
    }

    pub fn domain(&self) -> &Space {
        &self.domain
    }

    pub fn codomain(&self) -> &Space {
        &self.codomain
    }

    pub fn draw(&self, a: &A, seed: u64) -> Result<B> {
        (self.draw)(a, seed)
    }

    pub fn has_pmf(&self) -> bool {
        self.pmf.is_some()
    }

    /// The exact table at `a`, when this kernel has finite support.
    pub fn pmf(&self, a: &A) -> Option<Result<Pmf<B>>> {
        self.pmf.as_ref().map(|p| p(a))
    }

    /// Post-composes a deterministic map on samples (and on the table).
    pub fn map<C, F>(&self, codomain: Space, f: F) -> MarkovKernel<A, C>
    where
        C: Clone + Send + Sync + 'static,
        F: Fn(&B) -> Result<C> + Send + Sync + 'static,
    {
        let f = Arc::new(f);
        let (draw, f2) = (self.draw.clone(), f.clone());
        let pmf = self.pmf.clone().map(|p| {
            let f = f.clone();
            Arc::new(move |a: &A| -> Result<Pmf<C>> {
                p(a)?.into_iter().map(|(b, w)| Ok((f(&b)?, w))).collect()
            }) as Arc<PmfFn<A, C>>
        });
        MarkovKernel {
            domain: self.domain.clone(),
            codomain,
            draw: Arc::new(move |a, s| f2(&draw(a, s)?)),
            pmf,
        }
    }
}

impl<A> MarkovKernel<A, A>
where
    A: Clone + Send + Sync + 'static,
{
    pub fn identity(space: Space) -> Self {
        MarkovKernel::deterministic(space.clone(), space, |a: &A| Ok(a.clone()))
    }
}

impl<A> MarkovKernel<A, DesignProblem>
where
    A: Send + Sync + 'static,
{
    /// The distribution of design problems at a fixed parameter.
    pub fn condition(&self, a: A) -> Result<DPSampler> {
        let (fun, res) = self.codomain.dp_posets()?;
        let k = self.clone();
        Ok(DPSampler::from_fn(fun.clone(), res.clone(), move |s| k.draw(&a, s)))
    }
}

/// Sums probabilities of equal outcomes, keeping first-seen order.
pub fn merge_pmf<B: PartialEq>(table: Pmf<B>) -> Pmf<B> {
    let mut out: Pmf<B> = Vec::new();
    for (b, w) in table {
        match out.iter_mut().find(|(c, _)| *c == b) {
            Some((_, acc)) => *acc += w,
            None => out.push((b, w)),
        }
    }
    out
}

/// `a × a'`: independent sampling, `a` on `split(seed, 0)` and `a'` on
/// `split(seed, 1)`. Tables multiply.
pub fn kernel_product<A, A2, B, B2>(
    a: &MarkovKernel<A, B>,
    a2: &MarkovKernel<A2, B2>,
) -> MarkovKernel<(A, A2), (B, B2)>
where
    A: 'static,
    A2: 'static,
    B: Clone + Send + Sync + 'static,
    B2: Clone + Send + Sync + 'static,
{
    let (d1, d2) = (a.draw.clone(), a2.draw.clone());
    let pmf = match (&a.pmf, &a2.pmf) {
        (Some(p1), Some(p2)) => {
            let (p1, p2) = (p1.clone(), p2.clone());
            Some(Arc::new(move |(x, y): &(A, A2)| -> Result<Pmf<(B, B2)>> {
                let (t1, t2) = (p1(x)?, p2(y)?);
                let mut out = Vec::with_capacity(t1.len() * t2.len());
                for (b, w) in &t1 {
                    for (b2, w2) in &t2 {
                        out.push(((b.clone(), b2.clone()), w * w2));
                    }
                }
                Ok(out)
            }) as Arc<PmfFn<(A, A2), (B, B2)>>)
        }
        _ => None,
    };
    MarkovKernel {
        domain: Space::pair(a.domain.clone(), a2.domain.clone()),
        codomain: Space::pair(a.codomain.clone(), a2.codomain.clone()),
        draw: Arc::new(move |(x, y), s| Ok((d1(x, seed::split(s, 0))?, d2(y, seed::split(s, 1))?))),
        pmf,
    }
}

/// `g ∘ f`: draw the middle value from `f` on `split(seed, 0)`, then from
/// `g` on `split(seed, 1)`. Tables compose by summing over the middle value.
pub fn kernel_compose<A, B, C>(g: &MarkovKernel<B, C>, f: &MarkovKernel<A, B>) -> Result<MarkovKernel<A, C>>
where
    A: 'static,
    B: Clone + Send + Sync + 'static,
    C: Clone + Send + Sync + 'static,
{
    if f.codomain != g.domain {
        return Err(UncertaintyError::SpaceMismatch {
            expected: g.domain.to_string(),
            found: f.codomain.to_string(),
        });
    }
    let (df, dg) = (f.draw.clone(), g.draw.clone());
    let pmf = match (&f.pmf, &g.pmf) {
        (Some(pf), Some(pg)) => {
            let (pf, pg) = (pf.clone(), pg.clone());
            Some(Arc::new(move |a: &A| -> Result<Pmf<C>> {
                let mut out = Vec::new();
                for (b, w) in pf(a)? {
                    for (c, v) in pg(&b)? {
                        out.push((c, w * v));
                    }
                }
                Ok(out)
            }) as Arc<PmfFn<A, C>>)
        }
        _ => None,
    };
    Ok(MarkovKernel {
        domain: f.domain.clone(),
        codomain: g.codomain.clone(),
        draw: Arc::new(move |a, s| {
            let b = df(a, seed::split(s, 0))?;
            dg(&b, seed::split(s, 1))
        }),
        pmf,
    })
}

/// `(a × b)` followed by the delta kernel of `op`.
pub fn kernel_lift<A, B>(
    op: BinaryOp,
    a: &MarkovKernel<A, DesignProblem>,
    b: &MarkovKernel<B, DesignProblem>,
) -> Result<MarkovKernel<(A, B), DesignProblem>>
where
    A: 'static,
    B: 'static,
{
    let (fun, res) = op.result_posets(a.codomain.dp_posets()?, b.codomain.dp_posets()?)?;
    Ok(kernel_product(a, b).map(Space::Dp { fun, res }, move |(x, y)| Ok(op.apply(x, y)?)))
}

/// Re-parameterizes `a` along the kernel `r`, i.e. `a ∘ r`.
pub fn reparam_kernel<A, B>(
    a: &MarkovKernel<A, DesignProblem>,
    r: &MarkovKernel<B, A>,
) -> Result<MarkovKernel<B, DesignProblem>>
where
    A: Clone + Send + Sync + 'static,
    B: 'static,
{
    kernel_compose(a, r)
}
