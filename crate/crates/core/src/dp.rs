//! Design problems and their compositions.
//!
//! A [`DesignProblem`] relates a functionality poset `F` to a resource poset
//! `R` through its query map: for each functionality it returns the antichain
//! of minimal resources that make the pair feasible. Composites (series,
//! parallel, trace, union, intersection) are evaluated lazily from their
//! operands' queries, and every node memoizes its answers per functionality.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::antichain::{minimize_with, Antichain};
use crate::poset::{Element, Poset, PosetError, PosetKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("{op}: poset mismatch between {left} and {right}")]
    PosetMismatch { op: &'static str, left: String, right: String },
    #[error("feedback loop did not converge after {iterations} iterations")]
    Divergence { iterations: usize, last: Antichain },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("design problem {dp} produced an invalid resource {detail}")]
    InvalidResource { dp: String, detail: String },
    #[error("grid of functionalities is empty")]
    EmptyGrid,
}

pub type Result<T, E = DpError> = std::result::Result<T, E>;

/// Implementation identifiers that realize one minimal resource, in the
/// order their design problems were composed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub choices: Arc<[String]>,
}

impl Witness {
    pub fn new(choices: impl IntoIterator<Item = String>) -> Self {
        Witness { choices: choices.into_iter().collect() }
    }

    fn concat(&self, other: &Witness) -> Witness {
        if self.choices.is_empty() {
            return other.clone();
        }
        if other.choices.is_empty() {
            return self.clone();
        }
        Witness::new(self.choices.iter().chain(other.choices.iter()).cloned())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub minimal_resources: Antichain,
    /// One witness per element of `minimal_resources`, same order.
    pub witnesses: Vec<Witness>,
    /// Union branches dropped because their feedback loop diverged.
    pub divergent_branches: usize,
}

impl QueryResult {
    pub fn is_feasible(&self) -> bool {
        !self.minimal_resources.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, &Witness)> {
        self.minimal_resources.iter().zip(&self.witnesses)
    }
}

#[derive(Clone, Debug)]
pub struct Implementation {
    pub id: String,
    pub prov: Element,
    pub reqs: Element,
}

/// A monotone design problem with implementations: a finite catalogue of
/// design choices, each providing `prov` for `reqs`.
#[derive(Clone, Debug)]
pub struct ImplementationSet {
    fun: Poset,
    res: Poset,
    impls: Vec<Implementation>,
}

impl ImplementationSet {
    pub fn new(fun: Poset, res: Poset, impls: Vec<Implementation>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for i in &impls {
            fun.check(&i.prov)?;
            res.check(&i.reqs)?;
            if !seen.insert(i.id.as_str()) {
                return Err(DpError::Unsupported(format!("duplicate implementation id {}", i.id)));
            }
        }
        Ok(ImplementationSet { fun, res, impls })
    }

    pub fn implementations(&self) -> &[Implementation] {
        &self.impls
    }
}

/// Kleene iteration settings for [`trace`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub tol_rel: f64,
    pub tol_abs: f64,
    pub max_iter: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { tol_rel: 1e-9, tol_abs: 1e-12, max_iter: 10_000 }
    }
}

type QueryFn = dyn Fn(&Element) -> Vec<Element> + Send + Sync;

#[derive(Clone)]
struct Front {
    items: Vec<(Element, Witness)>,
    diverged: usize,
}

#[derive(Clone)]
enum Node {
    Map(Arc<QueryFn>),
    Mdpi(ImplementationSet),
    Series(DesignProblem, DesignProblem),
    Parallel(Vec<DesignProblem>),
    Trace(DesignProblem, TraceOptions),
    Union(DesignProblem, DesignProblem),
    Intersection(DesignProblem, DesignProblem),
    Tagged(DesignProblem, String),
}

struct Inner {
    fun: Poset,
    res: Poset,
    name: Option<String>,
    node: Node,
    memo: Mutex<FxHashMap<Element, Result<Arc<Front>>>>,
}

/// A design problem from `fun_poset` to `res_poset`. Cheap to clone; clones
/// share the memo table.
#[derive(Clone)]
pub struct DesignProblem(Arc<Inner>);

impl fmt::Debug for DesignProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.0.node {
            Node::Map(_) => "map",
            Node::Mdpi(_) => "mdpi",
            Node::Series(..) => "series",
            Node::Parallel(_) => "parallel",
            Node::Trace(..) => "trace",
            Node::Union(..) => "union",
            Node::Intersection(..) => "intersection",
            Node::Tagged(..) => "tagged",
        };
        f.debug_struct("DesignProblem")
            .field("name", &self.0.name)
            .field("kind", &kind)
            .field("fun", &self.0.fun)
            .field("res", &self.0.res)
            .finish()
    }
}

impl DesignProblem {
    fn new(fun: Poset, res: Poset, node: Node) -> Self {
        DesignProblem(Arc::new(Inner { fun, res, name: None, node, memo: Mutex::new(FxHashMap::default()) }))
    }

    /// A leaf given by its query map. The map must be monotone: a larger
    /// functionality may only shrink the upper set of its answer. Returned
    /// elements need not be minimal; infinite reals saturate to top.
    pub fn from_fn<Q>(fun: Poset, res: Poset, query: Q) -> Self
    where
        Q: Fn(&Element) -> Vec<Element> + Send + Sync + 'static,
    {
        Self::new(fun, res, Node::Map(Arc::new(query)))
    }

    /// A leaf with a single minimal resource given by a monotone map.
    pub fn from_monotone_map<M>(fun: Poset, res: Poset, map: M) -> Self
    where
        M: Fn(&Element) -> Element + Send + Sync + 'static,
    {
        Self::from_fn(fun, res, move |f| vec![map(f)])
    }

    pub fn identity(p: Poset) -> Self {
        Self::from_fn(p.clone(), p, |f| vec![f.clone()])
    }

    /// The free choice among all implementations of `set`.
    pub fn from_mdpi(set: ImplementationSet) -> Self {
        Self::new(set.fun.clone(), set.res.clone(), Node::Mdpi(set))
    }

    pub fn named(self, name: impl Into<String>) -> Self {
        let mut dp = Self::new(self.0.fun.clone(), self.0.res.clone(), self.0.node.clone());
        Arc::get_mut(&mut dp.0).expect("fresh").name = Some(name.into());
        dp
    }

    /// Wraps `self` so every witness it reports starts with `tag`.
    pub fn tagged(self, tag: impl Into<String>) -> Self {
        let (fun, res) = (self.0.fun.clone(), self.0.res.clone());
        Self::new(fun, res, Node::Tagged(self, tag.into()))
    }

    pub fn name(&self) -> Option<&str> {
        self.0.name.as_deref()
    }

    pub fn fun_poset(&self) -> &Poset {
        &self.0.fun
    }

    pub fn res_poset(&self) -> &Poset {
        &self.0.res
    }

    fn label(&self) -> String {
        self.0.name.clone().unwrap_or_else(|| format!("{} -> {}", self.0.fun, self.0.res))
    }

    /// Minimal resources for `f`.
    pub fn query(&self, f: &Element) -> Result<Antichain> {
        Ok(self.query_fix_fun_min_res(f)?.minimal_resources)
    }

    /// Fix functionality, minimize resources; with witnesses.
    pub fn query_fix_fun_min_res(&self, f: &Element) -> Result<QueryResult> {
        self.0.fun.check(f)?;
        let front = self.eval(f)?;
        let (elements, witnesses): (Vec<_>, Vec<_>) = front.items.iter().cloned().unzip();
        Ok(QueryResult {
            minimal_resources: Antichain::from_sorted_minimal(self.0.res.clone(), elements),
            witnesses,
            divergent_branches: front.diverged,
        })
    }

    /// Whether `(f, r)` is feasible.
    pub fn feasible(&self, f: &Element, r: &Element) -> Result<bool> {
        self.0.res.check(r)?;
        Ok(self.query(f)?.upper_set_contains(r)?)
    }

    /// Fix resources, maximize functionality over a finite grid of
    /// candidates. Returns the maximal feasible grid points as an antichain
    /// of `F^op`. A diverging feedback loop counts as infeasible.
    pub fn query_fix_res_max_fun(&self, r: &Element, grid: &[Element]) -> Result<Antichain> {
        if grid.is_empty() {
            return Err(DpError::EmptyGrid);
        }
        self.0.res.check(r)?;
        let mut feasible = Vec::new();
        for g in grid {
            self.0.fun.check(g)?;
            match self.query(g) {
                Ok(ac) if ac.upper_set_contains(r)? => feasible.push(g.clone()),
                Ok(_) | Err(DpError::Divergence { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(Antichain::minimals(Poset::opposite(self.0.fun.clone()), feasible)?)
    }

    fn eval(&self, f: &Element) -> Result<Arc<Front>> {
        if let Some(hit) = self.0.memo.lock().expect("memo poisoned").get(f) {
            return hit.clone();
        }
        let out = self.eval_uncached(f).map(Arc::new);
        self.0.memo.lock().expect("memo poisoned").insert(f.clone(), out.clone());
        out
    }

    fn eval_uncached(&self, f: &Element) -> Result<Front> {
        let res = &self.0.res;
        match &self.0.node {
            Node::Map(q) => {
                let mut items = Vec::new();
                for r in q(f) {
                    let r = saturate(r);
                    if !res.contains(&r) {
                        return Err(DpError::InvalidResource { dp: self.label(), detail: r.to_string() });
                    }
                    items.push((r, Witness::default()));
                }
                Ok(Front { items: minimize_with(res, items), diverged: 0 })
            }
            Node::Mdpi(set) => {
                let items = set
                    .impls
                    .iter()
                    .filter(|i| set.fun.leq_unchecked(f, &i.prov))
                    .map(|i| (i.reqs.clone(), Witness::new([i.id.clone()])))
                    .collect();
                Ok(Front { items: minimize_with(res, items), diverged: 0 })
            }
            Node::Series(a, b) => {
                let first = a.eval(f)?;
                let mut diverged = first.diverged;
                let mut items = Vec::new();
                for (q, wq) in &first.items {
                    let second = b.eval(q)?;
                    diverged += second.diverged;
                    items.extend(second.items.iter().map(|(r, wr)| (r.clone(), wq.concat(wr))));
                }
                Ok(Front { items: minimize_with(res, items), diverged })
            }
            Node::Parallel(parts) => {
                let fs = f.components().unwrap_or(&[]);
                let mut acc: Vec<(Vec<Element>, Witness)> = vec![(Vec::new(), Witness::default())];
                let mut diverged = 0;
                for (dp, fi) in parts.iter().zip(fs) {
                    let front = dp.eval(fi)?;
                    diverged += front.diverged;
                    acc = acc
                        .into_iter()
                        .flat_map(|(prefix, w)| {
                            front.items.iter().map(move |(r, wr)| {
                                let mut t = prefix.clone();
                                t.push(r.clone());
                                (t, w.concat(wr))
                            })
                        })
                        .collect();
                }
                let items = acc.into_iter().map(|(t, w)| (Element::Tuple(t.into()), w)).collect();
                Ok(Front { items: minimize_with(res, items), diverged })
            }
            Node::Union(a, b) => match (a.eval(f), b.eval(f)) {
                (Ok(x), Ok(y)) => {
                    let diverged = x.diverged + y.diverged;
                    let items = x.items.iter().chain(&y.items).cloned().collect();
                    Ok(Front { items: minimize_with(res, items), diverged })
                }
                (Ok(x), Err(DpError::Divergence { .. })) | (Err(DpError::Divergence { .. }), Ok(x)) => {
                    Ok(Front { items: x.items.clone(), diverged: x.diverged + 1 })
                }
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
            Node::Intersection(a, b) => {
                let x = a.eval(f)?;
                let y = b.eval(f)?;
                let mut items = Vec::new();
                for (ra, wa) in &x.items {
                    for (rb, wb) in &y.items {
                        let w = wa.concat(wb);
                        items.extend(res.min_upper_bounds(ra, rb).into_iter().map(|j| (j, w.clone())));
                    }
                }
                Ok(Front { items: minimize_with(res, items), diverged: x.diverged + y.diverged })
            }
            Node::Tagged(dp, tag) => {
                let mut front = Front::clone(&*dp.eval(f)?);
                if !tag.is_empty() {
                    let t = Witness::new([tag.clone()]);
                    for (_, w) in &mut front.items {
                        *w = t.concat(w);
                    }
                }
                Ok(front)
            }
            Node::Trace(dp, opts) => self.eval_trace(dp, *opts, f),
        }
    }

    /// Kleene iteration on antichains of `Q × L`. Starting from the answer at
    /// the least loop value, each step re-queries `dp` at every candidate's
    /// loop component and keeps the minimal common upper bounds of candidate
    /// and answer, until the antichain stops moving (within tolerance on
    /// real coordinates, exactly elsewhere). Candidates whose loop value
    /// reaches top are dropped; losing all of them is a divergence.
    fn eval_trace(&self, dp: &DesignProblem, opts: TraceOptions, p: &Element) -> Result<Front> {
        let inner_res = dp.res_poset();
        let loop_poset = inner_res.component(1).expect("trace checked at construction");
        let bottom = loop_poset.bottom().expect("trace checked at construction");
        let first = dp.eval(&Element::pair(p.clone(), bottom))?;
        let mut diverged = first.diverged;
        let mut current = first.items.clone();
        for iteration in 1..=opts.max_iter {
            let before = current.len();
            let snapshot = current.clone();
            current.retain(|(x, _)| !x.component(1).is_some_and(contains_top));
            if current.len() < before {
                if current.is_empty() {
                    return Err(divergence(inner_res, iteration, snapshot));
                }
                diverged += 1;
            }
            let mut next = Vec::new();
            for (x, _) in &current {
                let l = x.component(1).expect("loop component").clone();
                let answer = dp.eval(&Element::pair(p.clone(), l))?;
                diverged += answer.diverged;
                for (y, wy) in &answer.items {
                    next.extend(inner_res.min_upper_bounds(x, y).into_iter().map(|j| (j, wy.clone())));
                }
            }
            let next = minimize_with(inner_res, next);
            let settled = antichains_close(&current, &next, &opts);
            current = next;
            if settled {
                let projected = current
                    .into_iter()
                    .map(|(x, w)| (x.component(0).expect("resource component").clone(), w))
                    .collect();
                let items = prune_within_tolerance(&self.0.res, minimize_with(&self.0.res, projected), &opts);
                return Ok(Front { items, diverged });
            }
        }
        Err(divergence(inner_res, opts.max_iter, current))
    }
}

fn divergence(poset: &Poset, iterations: usize, items: Vec<(Element, Witness)>) -> DpError {
    let elements = items.into_iter().map(|(x, _)| x).collect();
    DpError::Divergence { iterations, last: Antichain::from_sorted_minimal(poset.clone(), elements) }
}

fn saturate(e: Element) -> Element {
    match e {
        Element::Real(x) if x == f64::INFINITY => Element::Top,
        Element::Real(x) if x == 0.0 => Element::Real(0.0),
        Element::Tuple(v) => Element::Tuple(v.iter().cloned().map(saturate).collect()),
        other => other,
    }
}

fn contains_top(e: &Element) -> bool {
    match e {
        Element::Top => true,
        Element::Tuple(v) => v.iter().any(contains_top),
        _ => false,
    }
}

fn elements_close(a: &Element, b: &Element, opts: &TraceOptions) -> bool {
    match (a, b) {
        (Element::Real(x), Element::Real(y)) => {
            (x - y).abs() <= opts.tol_abs + opts.tol_rel * x.abs().max(y.abs())
        }
        (Element::Tuple(xs), Element::Tuple(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| elements_close(x, y, opts))
        }
        _ => a == b,
    }
}

/// `a ⪯ b` up to the trace tolerance on real coordinates.
fn leq_within(p: &Poset, a: &Element, b: &Element, opts: &TraceOptions) -> bool {
    match (p.kind(), a, b) {
        (PosetKind::NonNegReal { .. }, Element::Real(x), Element::Real(y)) => {
            x <= y || (x - y) <= opts.tol_abs + opts.tol_rel * x.abs().max(y.abs())
        }
        (PosetKind::Product(ps), Element::Tuple(xs), Element::Tuple(ys)) => {
            ps.iter().zip(xs.iter().zip(ys.iter())).all(|(p, (x, y))| leq_within(p, x, y, opts))
        }
        (PosetKind::Opposite(q), _, _) => leq_within(q, b, a, opts),
        _ => p.leq_unchecked(a, b),
    }
}

/// Drops points of a converged front that another point dominates up to
/// the tolerance. Iterates stopped at a tolerance can leave such points
/// behind; in the limit they are dominated. Exact on finite posets.
fn prune_within_tolerance(p: &Poset, items: Vec<(Element, Witness)>, opts: &TraceOptions) -> Vec<(Element, Witness)> {
    let mut kept: Vec<(Element, Witness)> = Vec::with_capacity(items.len());
    for (x, w) in items {
        if kept.iter().any(|(y, _)| leq_within(p, y, &x, opts)) {
            continue;
        }
        kept.retain(|(z, _)| !leq_within(p, &x, z, opts));
        kept.push((x, w));
    }
    kept.sort_by(|a, b| a.0.cmp(&b.0));
    kept
}

fn antichains_close(a: &[(Element, Witness)], b: &[(Element, Witness)], opts: &TraceOptions) -> bool {
    a.len() == b.len()
        && a.iter().all(|(x, _)| b.iter().any(|(y, _)| elements_close(x, y, opts)))
        && b.iter().all(|(y, _)| a.iter().any(|(x, _)| elements_close(x, y, opts)))
}

fn mismatch(op: &'static str, left: &Poset, right: &Poset) -> DpError {
    DpError::PosetMismatch { op, left: left.to_string(), right: right.to_string() }
}

/// `a ; b`: `a`'s resources are provided by `b`'s functionalities.
pub fn series(a: &DesignProblem, b: &DesignProblem) -> Result<DesignProblem> {
    if a.res_poset() != b.fun_poset() {
        return Err(mismatch("series", a.res_poset(), b.fun_poset()));
    }
    Ok(DesignProblem::new(
        a.fun_poset().clone(),
        b.res_poset().clone(),
        Node::Series(a.clone(), b.clone()),
    ))
}

/// `a ⊗ b` over `F_a × F_b` and `R_a × R_b`.
pub fn parallel(a: &DesignProblem, b: &DesignProblem) -> Result<DesignProblem> {
    parallel_all(&[a.clone(), b.clone()])
}

/// N-ary parallel composition over flat product posets.
pub fn parallel_all(parts: &[DesignProblem]) -> Result<DesignProblem> {
    let fun = Poset::product(parts.iter().map(|d| d.fun_poset().clone()));
    let res = Poset::product(parts.iter().map(|d| d.res_poset().clone()));
    Ok(DesignProblem::new(fun, res, Node::Parallel(parts.to_vec())))
}

/// Closes the loop of a problem over `P × L → Q × L` with default options.
pub fn trace(dp: &DesignProblem) -> Result<DesignProblem> {
    trace_with(dp, TraceOptions::default())
}

/// The outer posets `(P, Q)` of the trace of a `P x L -> Q x L` problem.
pub fn trace_posets(fun: &Poset, res: &Poset) -> Result<(Poset, Poset)> {
    let (Some([p, lf]), Some([q, lr])) = (
        fun.components().and_then(|c| <&[Poset; 2]>::try_from(c).ok()),
        res.components().and_then(|c| <&[Poset; 2]>::try_from(c).ok()),
    ) else {
        return Err(DpError::Unsupported(format!("trace needs P x L -> Q x L, got {fun} -> {res}")));
    };
    if lf != lr {
        return Err(mismatch("trace", lf, lr));
    }
    if lr.bottom().is_none() {
        return Err(DpError::Unsupported(format!("loop poset {lr} has no least element")));
    }
    Ok((p.clone(), q.clone()))
}

pub fn trace_with(dp: &DesignProblem, opts: TraceOptions) -> Result<DesignProblem> {
    let (p, q) = trace_posets(dp.fun_poset(), dp.res_poset())?;
    if !(opts.max_iter >= 1 && opts.tol_rel >= 0.0 && opts.tol_abs >= 0.0) {
        return Err(DpError::Unsupported("invalid trace options".into()));
    }
    Ok(DesignProblem::new(p, q, Node::Trace(dp.clone(), opts)))
}

fn same_posets(op: &'static str, a: &DesignProblem, b: &DesignProblem) -> Result<()> {
    if a.fun_poset() != b.fun_poset() {
        return Err(mismatch(op, a.fun_poset(), b.fun_poset()));
    }
    if a.res_poset() != b.res_poset() {
        return Err(mismatch(op, a.res_poset(), b.res_poset()));
    }
    Ok(())
}

/// Free choice between `a` and `b`. A branch whose feedback loop diverges is
/// dropped (and counted in [`QueryResult::divergent_branches`]) as long as the
/// other branch answers.
pub fn union(a: &DesignProblem, b: &DesignProblem) -> Result<DesignProblem> {
    same_posets("union", a, b)?;
    Ok(DesignProblem::new(a.fun_poset().clone(), a.res_poset().clone(), Node::Union(a.clone(), b.clone())))
}

/// Requires satisfying both `a` and `b`.
pub fn intersection(a: &DesignProblem, b: &DesignProblem) -> Result<DesignProblem> {
    same_posets("intersection", a, b)?;
    Ok(DesignProblem::new(
        a.fun_poset().clone(),
        a.res_poset().clone(),
        Node::Intersection(a.clone(), b.clone()),
    ))
}

/// Left fold of [`union`]; `None` for an empty list.
pub fn union_all(dps: &[DesignProblem]) -> Result<Option<DesignProblem>> {
    let mut it = dps.iter();
    let Some(first) = it.next() else { return Ok(None) };
    it.try_fold(first.clone(), |acc, d| union(&acc, d)).map(Some)
}

/// The binary compositions, for the uncertainty lifts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryOp {
    Series,
    Parallel,
    Union,
    Intersection,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 4] = [BinaryOp::Series, BinaryOp::Parallel, BinaryOp::Union, BinaryOp::Intersection];

    pub fn apply(self, a: &DesignProblem, b: &DesignProblem) -> Result<DesignProblem> {
        match self {
            BinaryOp::Series => series(a, b),
            BinaryOp::Parallel => parallel(a, b),
            BinaryOp::Union => union(a, b),
            BinaryOp::Intersection => intersection(a, b),
        }
    }

    /// The posets of `a op b` without building it.
    pub fn result_posets(self, a: (&Poset, &Poset), b: (&Poset, &Poset)) -> Result<(Poset, Poset)> {
        match self {
            BinaryOp::Series if a.1 == b.0 => Ok((a.0.clone(), b.1.clone())),
            BinaryOp::Series => Err(mismatch("series", a.1, b.0)),
            BinaryOp::Parallel => Ok((Poset::pair(a.0.clone(), b.0.clone()), Poset::pair(a.1.clone(), b.1.clone()))),
            BinaryOp::Union | BinaryOp::Intersection => {
                if a.0 != b.0 {
                    Err(mismatch(self.as_str(), a.0, b.0))
                } else if a.1 != b.1 {
                    Err(mismatch(self.as_str(), a.1, b.1))
                } else {
                    Ok((a.0.clone(), a.1.clone()))
                }
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BinaryOp::Series => "series",
            BinaryOp::Parallel => "parallel",
            BinaryOp::Union => "union",
            BinaryOp::Intersection => "intersection",
        }
    }
}

impl fmt::Display for BinaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BinaryOp {
    type Err = DpError;

    fn from_str(s: &str) -> Result<Self> {
        BinaryOp::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| DpError::Unsupported(format!("unknown operation {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reals() -> Poset {
        Poset::nonneg_real("")
    }

    fn r(x: f64) -> Element {
        Element::real(x)
    }

    fn affine(add: f64, mul: f64) -> DesignProblem {
        DesignProblem::from_monotone_map(reals(), reals(), move |f| r(f.as_real().unwrap() * mul + add))
    }

    fn single_impl() -> DesignProblem {
        let set = ImplementationSet::new(
            reals(),
            reals(),
            vec![Implementation { id: "i1".into(), prov: r(3.0), reqs: r(10.0) }],
        )
        .unwrap();
        DesignProblem::from_mdpi(set)
    }

    #[test]
    fn mdpi_queries() {
        let dp = single_impl();
        let q = dp.query_fix_fun_min_res(&r(2.0)).unwrap();
        assert_eq!(q.minimal_resources.elements(), &[r(10.0)]);
        assert_eq!(&*q.witnesses[0].choices, ["i1".to_string()]);
        assert!(dp.query(&r(4.0)).unwrap().is_empty());
        let empty = DesignProblem::from_mdpi(ImplementationSet::new(reals(), reals(), vec![]).unwrap());
        assert!(empty.query(&r(0.0)).unwrap().is_empty());
    }

    #[test]
    fn feasibility() {
        let dp = single_impl();
        assert!(dp.feasible(&r(2.0), &r(12.0)).unwrap());
        assert!(!dp.feasible(&r(2.0), &r(9.0)).unwrap());
        assert!(!dp.feasible(&r(4.0), &r(1e9)).unwrap());
        assert!(dp.feasible(&r(2.0), &r(-1.0)).is_err());
    }

    #[test]
    fn series_composes_functions() {
        let a = affine(1.0, 1.0);
        let b = affine(0.0, 2.0);
        let s = series(&a, &b).unwrap();
        assert_eq!(s.query(&r(3.0)).unwrap().elements(), &[r(8.0)]);
        let infeasible = DesignProblem::from_fn(reals(), reals(), |_| vec![]);
        let s = series(&infeasible, &b).unwrap();
        assert!(s.query(&r(3.0)).unwrap().is_empty());
        let g = DesignProblem::identity(Poset::nonneg_real("g"));
        assert!(matches!(series(&a, &g), Err(DpError::PosetMismatch { .. })));
    }

    #[test]
    fn parallel_pairs() {
        let a = affine(1.0, 1.0);
        let b = affine(1.0, 1.0);
        let p = parallel(&a, &b).unwrap();
        let q = p.query(&Element::pair(r(1.0), r(3.0))).unwrap();
        assert_eq!(q.elements(), &[Element::pair(r(2.0), r(4.0))]);
        let none = DesignProblem::from_fn(reals(), reals(), |_| vec![]);
        let p = parallel(&a, &none).unwrap();
        assert!(p.query(&Element::pair(r(1.0), r(3.0))).unwrap().is_empty());
    }

    #[test]
    fn union_and_intersection_on_chain() {
        let ten = DesignProblem::from_monotone_map(reals(), reals(), |_| r(10.0));
        let eight = DesignProblem::from_monotone_map(reals(), reals(), |_| r(8.0));
        assert_eq!(union(&ten, &eight).unwrap().query(&r(0.0)).unwrap().elements(), &[r(8.0)]);
        assert_eq!(intersection(&ten, &eight).unwrap().query(&r(0.0)).unwrap().elements(), &[r(10.0)]);
        let none = DesignProblem::from_fn(reals(), reals(), |_| vec![]);
        assert_eq!(union(&none, &eight).unwrap().query(&r(0.0)).unwrap().elements(), &[r(8.0)]);
    }

    #[test]
    fn intersection_on_pairs() {
        let p = Poset::pair(reals(), reals());
        let a = DesignProblem::from_monotone_map(reals(), p.clone(), |_| Element::pair(r(1.0), r(5.0)));
        let b = DesignProblem::from_monotone_map(reals(), p, |_| Element::pair(r(2.0), r(3.0)));
        let q = intersection(&a, &b).unwrap().query(&r(0.0)).unwrap();
        assert_eq!(q.elements(), &[Element::pair(r(2.0), r(5.0))]);
    }

    fn mass_loop(k: f64) -> DesignProblem {
        let pl = Poset::pair(reals(), reals());
        DesignProblem::from_monotone_map(pl.clone(), pl, move |x| {
            let m0 = x.component(0).unwrap().as_real().unwrap();
            let m = x.component(1).unwrap().as_real().unwrap();
            let next = m0 + k * m;
            Element::pair(r(next), r(next))
        })
    }

    #[test]
    fn trace_converges_to_closed_form() {
        let t = trace(&mass_loop(0.5)).unwrap();
        let m = t.query(&r(100.0)).unwrap().elements()[0].as_real().unwrap();
        assert!((m - 200.0).abs() <= 1e-6 * 200.0, "{m}");
    }

    #[test]
    fn trace_reports_divergence() {
        for k in [1.0, 2.0] {
            let t = trace(&mass_loop(k)).unwrap();
            assert!(matches!(t.query(&r(100.0)), Err(DpError::Divergence { .. })), "k={k}");
        }
    }

    #[test]
    fn trace_of_loop_free_problem_is_projection() {
        let pl = Poset::pair(reals(), reals());
        let dp = DesignProblem::from_monotone_map(pl.clone(), pl, |x| {
            let p = x.component(0).unwrap().as_real().unwrap();
            Element::pair(r(p + 1.0), r(0.0))
        });
        assert_eq!(trace(&dp).unwrap().query(&r(4.0)).unwrap().elements(), &[r(5.0)]);
    }

    #[test]
    fn trace_needs_bottom() {
        let flat = Poset::discrete(["a", "b"], Vec::<(&str, &str)>::new()).unwrap();
        let pl = Poset::pair(reals(), flat);
        let dp = DesignProblem::identity(pl);
        assert!(matches!(trace(&dp), Err(DpError::Unsupported(_))));
    }

    #[test]
    fn union_drops_divergent_branch() {
        let ok = trace(&mass_loop(0.5)).unwrap();
        let bad = trace(&mass_loop(2.0)).unwrap();
        let u = union(&bad, &ok).unwrap();
        let q = u.query_fix_fun_min_res(&r(100.0)).unwrap();
        assert_eq!(q.divergent_branches, 1);
        assert_eq!(q.minimal_resources.len(), 1);
        let both = union(&bad, &bad).unwrap();
        assert!(matches!(both.query(&r(1.0)), Err(DpError::Divergence { .. })));
    }

    #[test]
    fn dual_query_on_grid() {
        let id = DesignProblem::identity(reals());
        let grid: Vec<Element> = (1..=10).map(|i| r(i as f64)).collect();
        let ac = id.query_fix_res_max_fun(&r(5.0), &grid).unwrap();
        assert_eq!(ac.elements(), &[r(5.0)]);
        assert!(id.query_fix_res_max_fun(&r(0.5), &grid).unwrap().is_empty());
        assert!(matches!(id.query_fix_res_max_fun(&r(5.0), &[]), Err(DpError::EmptyGrid)));
    }

    #[test]
    fn witnesses_follow_choices() {
        let a = affine(0.0, 1.0).tagged("cheap");
        let b = affine(5.0, 1.0).tagged("dear");
        let u = union(&a, &b).unwrap();
        let q = u.query_fix_fun_min_res(&r(1.0)).unwrap();
        assert_eq!(q.witnesses, vec![Witness::new(["cheap".to_string()])]);
    }

    #[test]
    fn named_keeps_query() {
        let a = affine(1.0, 1.0);
        let shared = a.clone();
        let n = a.named("plus-one");
        assert_eq!(n.name(), Some("plus-one"));
        assert_eq!(n.query(&r(1.0)).unwrap(), shared.query(&r(1.0)).unwrap());
    }

    #[test]
    fn leaf_output_is_validated() {
        let bad = DesignProblem::from_fn(reals(), reals(), |_| vec![Element::Real(f64::NAN)]);
        assert!(matches!(bad.query(&r(0.0)), Err(DpError::InvalidResource { .. })));
        let inf = DesignProblem::from_fn(reals(), reals(), |_| vec![Element::Real(f64::INFINITY)]);
        assert_eq!(inf.query(&r(0.0)).unwrap().elements(), &[Element::Top]);
    }

    #[test]
    fn concurrent_queries_agree() {
        let t = trace(&mass_loop(0.5)).unwrap();
        let answers: Vec<_> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..4).map(|_| s.spawn(|| t.query(&r(100.0)).unwrap())).collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(answers.windows(2).all(|w| w[0] == w[1]));
    }
}
