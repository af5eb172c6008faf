//! Random finite posets and design problems, and a brute-force relational
//! model of every composition used as a test oracle.
//!
//! The oracle only touches `Poset::leq`, `Poset::enumerate` and
//! `DesignProblem::feasible`: a design problem is turned into the explicit
//! set of feasible `(f, r)` pairs and compositions are evaluated as set
//! comprehensions over those sets.

pub mod diagram;

use std::collections::BTreeSet;

use codp_core::dp::{DesignProblem, Implementation, ImplementationSet};
use codp_core::seed;
use codp_core::{Element, Poset};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    seed::rng(seed)
}

/// A random finite poset on `n` labels `{prefix}0..`, each pair `i < j`
/// ordered with probability `density`.
pub fn random_discrete(rng: &mut ChaCha8Rng, prefix: &str, n: usize, density: f64) -> Poset {
    let labels: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                pairs.push((labels[i].clone(), labels[j].clone()));
            }
        }
    }
    Poset::discrete(labels, pairs).expect("forward pairs are acyclic")
}

/// A random finite poset with at most `max` elements: either a discrete
/// poset or a product of two discrete ones.
pub fn random_poset(rng: &mut ChaCha8Rng, prefix: &str, max: usize) -> Poset {
    let density = rng.random_range(0.0..0.8);
    if max >= 4 && rng.random_bool(0.3) {
        let a = rng.random_range(2..=max / 2);
        let b = rng.random_range(1..=max / a);
        Poset::pair(
            random_discrete(rng, &format!("{prefix}a"), a, density),
            random_discrete(rng, &format!("{prefix}b"), b, density),
        )
    } else {
        let n = rng.random_range(1..=max);
        random_discrete(rng, prefix, n, density)
    }
}

/// A random finite poset with a least element.
pub fn random_bounded_poset(rng: &mut ChaCha8Rng, prefix: &str, max: usize) -> Poset {
    let n = rng.random_range(1..=max.max(1));
    let density = rng.random_range(0.0..0.8);
    let base = random_discrete(rng, prefix, n, density);
    let Some(_) = base.bottom() else {
        let mut labels = vec![format!("{prefix}_bot")];
        let mut pairs: Vec<(String, String)> = Vec::new();
        let codp_core::poset::PosetKind::Discrete(d) = base.kind() else { unreachable!() };
        for l in d.labels() {
            labels.push(l.clone());
            pairs.push((format!("{prefix}_bot"), l.clone()));
        }
        pairs.extend(d.order_pairs());
        return Poset::discrete(labels, pairs).expect("bottom keeps the order acyclic");
    };
    base
}

/// A random implementation set between finite posets.
pub fn random_mdpi(rng: &mut ChaCha8Rng, fun: &Poset, res: &Poset, max_impls: usize) -> DesignProblem {
    let fs = fun.enumerate().expect("finite");
    let rs = res.enumerate().expect("finite");
    let n = rng.random_range(0..=max_impls);
    let impls = (0..n)
        .map(|i| Implementation {
            id: format!("i{i}"),
            prov: fs[rng.random_range(0..fs.len())].clone(),
            reqs: rs[rng.random_range(0..rs.len())].clone(),
        })
        .collect();
    DesignProblem::from_mdpi(ImplementationSet::new(fun.clone(), res.clone(), impls).expect("valid"))
}

/// A finite design problem as an explicit feasibility relation.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub fun: Poset,
    pub res: Poset,
    pub pairs: BTreeSet<(Element, Element)>,
}

impl Relation {
    /// Every feasible pair of a design problem between finite posets.
    pub fn of(dp: &DesignProblem) -> Relation {
        let (fun, res) = (dp.fun_poset().clone(), dp.res_poset().clone());
        let mut pairs = BTreeSet::new();
        let rs = res.enumerate().expect("finite resources");
        for f in fun.enumerate().expect("finite functionalities") {
            for r in &rs {
                if dp.feasible(&f, r).expect("query") {
                    pairs.insert((f.clone(), r.clone()));
                }
            }
        }
        Relation { fun, res, pairs }
    }

    pub fn holds(&self, f: &Element, r: &Element) -> bool {
        self.pairs.contains(&(f.clone(), r.clone()))
    }

    fn build(fun: Poset, res: Poset, keep: impl Fn(&Element, &Element) -> bool) -> Relation {
        let mut pairs = BTreeSet::new();
        let rs = res.enumerate().expect("finite");
        for f in fun.enumerate().expect("finite") {
            for r in &rs {
                if keep(&f, r) {
                    pairs.insert((f.clone(), r.clone()));
                }
            }
        }
        Relation { fun, res, pairs }
    }

    /// `{(f, r) | ∃ q. a(f, q) ∧ b(q, r)}`.
    pub fn series(a: &Relation, b: &Relation) -> Relation {
        let qs = a.res.enumerate().expect("finite");
        Self::build(a.fun.clone(), b.res.clone(), |f, r| qs.iter().any(|q| a.holds(f, q) && b.holds(q, r)))
    }

    /// `{((f, f'), (r, r')) | a(f, r) ∧ b(f', r')}`.
    pub fn parallel(a: &Relation, b: &Relation) -> Relation {
        Self::build(Poset::pair(a.fun.clone(), b.fun.clone()), Poset::pair(a.res.clone(), b.res.clone()), |f, r| {
            a.holds(&f.components().unwrap()[0], &r.components().unwrap()[0])
                && b.holds(&f.components().unwrap()[1], &r.components().unwrap()[1])
        })
    }

    /// `{(p, q) | ∃ l. a((p, l), (q, l))}` for `a` over `P × L → Q × L`.
    pub fn trace(a: &Relation) -> Relation {
        let p = a.fun.component(0).expect("pair").clone();
        let q = a.res.component(0).expect("pair").clone();
        let ls = a.fun.component(1).expect("pair").enumerate().expect("finite");
        Self::build(p, q, |x, y| {
            ls.iter().any(|l| a.holds(&Element::pair(x.clone(), l.clone()), &Element::pair(y.clone(), l.clone())))
        })
    }

    pub fn union(a: &Relation, b: &Relation) -> Relation {
        Self::build(a.fun.clone(), a.res.clone(), |f, r| a.holds(f, r) || b.holds(f, r))
    }

    pub fn intersection(a: &Relation, b: &Relation) -> Relation {
        Self::build(a.fun.clone(), a.res.clone(), |f, r| a.holds(f, r) && b.holds(f, r))
    }

    /// Maximal functionalities feasible at `r`, among `grid`.
    pub fn max_fun(&self, r: &Element, grid: &[Element]) -> BTreeSet<Element> {
        let ok: Vec<&Element> = grid.iter().filter(|f| self.holds(f, r)).collect();
        ok.iter()
            .filter(|f| !ok.iter().any(|g| g != *f && self.fun.leq(f, g).unwrap()))
            .map(|f| (*f).clone())
            .collect()
    }

    /// Whether the relation is an upper set of `F^op × R`.
    pub fn is_upper_set(&self) -> bool {
        let fs = self.fun.enumerate().expect("finite");
        let rs = self.res.enumerate().expect("finite");
        self.pairs.iter().all(|(f, r)| {
            fs.iter().filter(|g| self.fun.leq(g, f).unwrap()).all(|g| {
                rs.iter().filter(|s| self.res.leq(r, s).unwrap()).all(|s| self.holds(g, s))
            })
        })
    }
}

/// `↑xs`, enumerated.
pub fn upper_closure(p: &Poset, xs: &[Element]) -> BTreeSet<Element> {
    p.enumerate()
        .expect("finite")
        .into_iter()
        .filter(|y| xs.iter().any(|x| p.leq(x, y).unwrap()))
        .collect()
}

/// The compositions exercised by the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Composition {
    Series,
    Parallel,
    Trace,
    Union,
    Intersection,
}

impl Composition {
    pub const ALL: [Composition; 5] = [
        Composition::Series,
        Composition::Parallel,
        Composition::Trace,
        Composition::Union,
        Composition::Intersection,
    ];
}

/// Random operands for `op`, with every poset of at most `max` elements.
pub struct Case {
    pub op: Composition,
    pub operands: Vec<DesignProblem>,
}

impl Case {
    pub fn random(op: Composition, seed: u64, max: usize) -> Case {
        let mut r = rng(seed);
        let r = &mut r;
        let operands = match op {
            Composition::Series => {
                let (f, q, s) = (random_poset(r, "f", max), random_poset(r, "q", max), random_poset(r, "r", max));
                vec![random_mdpi(r, &f, &q, 6), random_mdpi(r, &q, &s, 6)]
            }
            Composition::Parallel => {
                let (f, s) = (random_poset(r, "f", 3), random_poset(r, "r", 3));
                let (g, t) = (random_poset(r, "g", 3), random_poset(r, "s", 3));
                vec![random_mdpi(r, &f, &s, 4), random_mdpi(r, &g, &t, 4)]
            }
            Composition::Trace => {
                let p = random_poset(r, "p", 3);
                let q = random_poset(r, "q", 3);
                let l = random_bounded_poset(r, "l", max.min(4));
                vec![random_mdpi(r, &Poset::pair(p, l.clone()), &Poset::pair(q, l), 8)]
            }
            Composition::Union | Composition::Intersection => {
                let (f, s) = (random_poset(r, "f", max), random_poset(r, "r", max));
                vec![random_mdpi(r, &f, &s, 5), random_mdpi(r, &f, &s, 5)]
            }
        };
        Case { op, operands }
    }

    /// The composite built by the solver.
    pub fn composite(&self) -> DesignProblem {
        let o = &self.operands;
        match self.op {
            Composition::Series => codp_core::dp::series(&o[0], &o[1]),
            Composition::Parallel => codp_core::dp::parallel(&o[0], &o[1]),
            Composition::Trace => codp_core::dp::trace(&o[0]),
            Composition::Union => codp_core::dp::union(&o[0], &o[1]),
            Composition::Intersection => codp_core::dp::intersection(&o[0], &o[1]),
        }
        .expect("operands are compatible")
    }

    /// The brute-force relation of the composite.
    pub fn expected(&self) -> Relation {
        let rels: Vec<Relation> = self.operands.iter().map(Relation::of).collect();
        match self.op {
            Composition::Series => Relation::series(&rels[0], &rels[1]),
            Composition::Parallel => Relation::parallel(&rels[0], &rels[1]),
            Composition::Trace => Relation::trace(&rels[0]),
            Composition::Union => Relation::union(&rels[0], &rels[1]),
            Composition::Intersection => Relation::intersection(&rels[0], &rels[1]),
        }
    }
}

/// A random interval on finite posets: `upper` is `lower` united with extra
/// implementations, so containment holds by construction.
pub fn random_interval(rng: &mut ChaCha8Rng, fun: &Poset, res: &Poset) -> (DesignProblem, DesignProblem) {
    let lower = random_mdpi(rng, fun, res, 4);
    let extra = random_mdpi(rng, fun, res, 3);
    let upper = codp_core::dp::union(&lower, &extra).expect("same posets");
    (lower, upper)
}

/// Whether every category count lies within three standard deviations of
/// its multinomial expectation, and nothing outside the support occurred.
pub fn within_three_sigma<K: Ord>(
    counts: &std::collections::BTreeMap<K, usize>,
    probs: &std::collections::BTreeMap<K, f64>,
    n: usize,
) -> bool {
    max_z(counts, probs, n) <= 3.0
}

/// Largest `|count - n p| / sqrt(n p (1 - p))` over categories; infinite
/// when a count falls outside the support or a certain category is missed.
pub fn max_z<K: Ord>(
    counts: &std::collections::BTreeMap<K, usize>,
    probs: &std::collections::BTreeMap<K, f64>,
    n: usize,
) -> f64 {
    if counts.keys().any(|k| !probs.contains_key(k)) {
        return f64::INFINITY;
    }
    let n = n as f64;
    probs
        .iter()
        .map(|(k, &p)| {
            let c = counts.get(k).copied().unwrap_or(0) as f64;
            let dev = (c - n * p).abs();
            let sd = (n * p * (1.0 - p)).max(0.0).sqrt();
            if dev <= 1e-9 * n.max(1.0) {
                0.0
            } else if sd == 0.0 {
                f64::INFINITY
            } else {
                dev / sd
            }
        })
        .fold(0.0, f64::max)
}

/// One distributional-lift trial: two two-outcome samplers on random finite
/// posets, `n` composite draws under `root`, categorized by feasibility
/// relation and compared with the exact product-and-pushforward table.
pub fn distribution_trial(op: codp_core::BinaryOp, trial_seed: u64, n: usize, root: u64) -> bool {
    distribution_trial_z(op, trial_seed, n, root) <= 3.0
}

/// The [`max_z`] of one distributional-lift trial.
pub fn distribution_trial_z(op: codp_core::BinaryOp, trial_seed: u64, n: usize, root: u64) -> f64 {
    use codp_core::uncertainty::{dist_lift_binary, DPSampler};
    use std::collections::BTreeMap;

    let mut r = rng(trial_seed);
    let (f, s) = (random_poset(&mut r, "f", 3), random_poset(&mut r, "r", 3));
    let (g, t) = match op {
        codp_core::BinaryOp::Series => (s.clone(), random_poset(&mut r, "t", 3)),
        codp_core::BinaryOp::Parallel => (random_poset(&mut r, "g", 3), random_poset(&mut r, "t", 3)),
        _ => (f.clone(), s.clone()),
    };
    let pa: f64 = r.random_range(0.1..0.9);
    let pb: f64 = r.random_range(0.1..0.9);
    let a = [random_mdpi(&mut r, &f, &s, 4), random_mdpi(&mut r, &f, &s, 4)];
    let b = [random_mdpi(&mut r, &g, &t, 4), random_mdpi(&mut r, &g, &t, 4)];
    let p = DPSampler::finite(vec![(pa, a[0].clone()), (1.0 - pa, a[1].clone())]).expect("valid");
    let q = DPSampler::finite(vec![(pb, b[0].clone()), (1.0 - pb, b[1].clone())]).expect("valid");

    let mut exact: BTreeMap<BTreeSet<(Element, Element)>, f64> = BTreeMap::new();
    for (i, wa) in [pa, 1.0 - pa].into_iter().enumerate() {
        for (j, wb) in [pb, 1.0 - pb].into_iter().enumerate() {
            let d = op.apply(&a[i], &b[j]).expect("compatible");
            *exact.entry(Relation::of(&d).pairs).or_default() += wa * wb;
        }
    }
    let lifted = dist_lift_binary(op, &p, &q).expect("compatible");
    let mut counts: BTreeMap<BTreeSet<(Element, Element)>, usize> = BTreeMap::new();
    for i in 0..n {
        let d = lifted.draw(seed::split(root, i as u64)).expect("draw");
        *counts.entry(Relation::of(&d).pairs).or_default() += 1;
    }
    max_z(&counts, &exact, n)
}

/// The linear mass loop `m = m0 + k·m` over `(P × L) → (Q × L)`, with the
/// payload `m0` as outer functionality and the loop mass as outer resource.
pub fn mass_loop(k: f64) -> DesignProblem {
    let g = Poset::nonneg_real("g");
    DesignProblem::from_monotone_map(Poset::pair(g.clone(), g.clone()), Poset::pair(g.clone(), g), move |f| {
        let c = f.components().expect("pair");
        let m = c[0].as_real().expect("real") + k * c[1].as_real().expect("real");
        Element::pair(Element::real(m), Element::real(m))
    })
}

/// The workspace `fixtures/` directory.
pub fn fixture_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// `(name, text)` of every `*.codp` file directly in `dir`, sorted by name.
pub fn codp_files(dir: &std::path::Path) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(dir)
        .expect("fixture directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "codp"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).expect("fixture text"))
        })
        .collect();
    out.sort();
    out
}
