//! Type checking and elaboration of diagrams into composition expressions.
//!
//! Nodes are grouped into layers by longest path along non-loop edges. Each
//! layer runs in parallel, preceded by a routing problem that selects, copies
//! and reorders the values flowing between layers. Loop edges are cut: their
//! targets become extra outer functionalities, their sources extra outer
//! resources, and the whole expression is wrapped in a single trace.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use codp_core::dp::{self, DesignProblem, Implementation, ImplementationSet};
use codp_core::seed;
use codp_core::{Element, Poset};

use crate::ast::*;
use crate::error::{type_err, DslError, Result};
use crate::registry::{Entry, ParamValue, Registry};

/// Where the values of a routing problem's output come from: a path into
/// its input element, or a tuple of such wirings.
#[derive(Clone, Debug, PartialEq)]
pub enum Wiring {
    Slot(Vec<usize>),
    Tuple(Vec<Wiring>),
}

impl Wiring {
    pub fn apply(&self, x: &Element) -> Element {
        match self {
            Wiring::Slot(path) => x.at_path(path).expect("wiring checked against its poset").clone(),
            Wiring::Tuple(ws) => Element::tuple(ws.iter().map(|w| w.apply(x))),
        }
    }

    fn poset(&self, input: &Poset) -> Poset {
        match self {
            Wiring::Slot(path) => poset_at(input, path),
            Wiring::Tuple(ws) => Poset::product(ws.iter().map(|w| w.poset(input))),
        }
    }

    fn is_identity(&self, input: &Poset, prefix: &mut Vec<usize>) -> bool {
        match self {
            Wiring::Slot(path) => path == prefix,
            Wiring::Tuple(ws) => {
                let Some(cs) = poset_at(input, prefix).components().map(<[Poset]>::len) else {
                    return false;
                };
                cs == ws.len()
                    && ws.iter().enumerate().all(|(i, w)| {
                        prefix.push(i);
                        let ok = w.is_identity(input, prefix);
                        prefix.pop();
                        ok
                    })
            }
        }
    }
}

impl fmt::Display for Wiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Wiring::Slot(p) if p.is_empty() => write!(f, "_"),
            Wiring::Slot(p) => {
                let parts: Vec<String> = p.iter().map(ToString::to_string).collect();
                write!(f, "{}", parts.join("."))
            }
            Wiring::Tuple(ws) => {
                let parts: Vec<String> = ws.iter().map(ToString::to_string).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

fn poset_at(p: &Poset, path: &[usize]) -> Poset {
    path.iter().fold(p.clone(), |acc, &i| acc.component(i).expect("path within poset").clone())
}

#[derive(Clone, Debug, PartialEq)]
pub enum CompositionExpr {
    /// A fixed registry entry.
    Leaf(String),
    /// The implementation table of a node.
    Table(String),
    /// A family from parameter box `param`, instantiated at its value.
    Reparam { param: String, binding: String, slot: u64 },
    /// A diagram node and the expression that realizes it.
    Node { name: String, body: Box<CompositionExpr> },
    Identity(Poset),
    Route { fun: Poset, res: Poset, wiring: Wiring },
    Series(Box<CompositionExpr>, Box<CompositionExpr>),
    Parallel(Vec<CompositionExpr>),
    Trace(Box<CompositionExpr>),
    Union(Vec<CompositionExpr>),
    Intersection(Vec<CompositionExpr>),
}

impl fmt::Display for CompositionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, xs: &[CompositionExpr]| {
            let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
            write!(f, "{name}({})", parts.join(", "))
        };
        match self {
            CompositionExpr::Leaf(k) => write!(f, "{k}"),
            CompositionExpr::Table(n) => write!(f, "table({n})"),
            CompositionExpr::Reparam { param, binding, .. } => write!(f, "reparam({binding}, {param})"),
            CompositionExpr::Node { name, .. } => write!(f, "{name}"),
            CompositionExpr::Identity(_) => write!(f, "id"),
            CompositionExpr::Route { wiring, .. } => write!(f, "route{wiring}"),
            CompositionExpr::Series(a, b) => write!(f, "series({a}, {b})"),
            CompositionExpr::Parallel(xs) => list(f, "parallel", xs),
            CompositionExpr::Trace(a) => write!(f, "trace({a})"),
            CompositionExpr::Union(xs) => list(f, "union", xs),
            CompositionExpr::Intersection(xs) => list(f, "intersection", xs),
        }
    }
}

/// A checked diagram with its composition expression and outer ports.
#[derive(Clone, Debug)]
pub struct Elaborated {
    pub ast: DiagramAst,
    pub expr: CompositionExpr,
    /// Outer functionality ports, in the order of the outer poset.
    pub fun_ports: Vec<Endpoint>,
    pub res_ports: Vec<Endpoint>,
    pub fun_poset: Poset,
    pub res_poset: Poset,
    posets: BTreeMap<String, Poset>,
}

fn pack(posets: Vec<Poset>) -> Poset {
    if posets.len() == 1 {
        posets.into_iter().next().unwrap()
    } else {
        Poset::product(posets)
    }
}

fn sub(prefix: &[usize], n: usize, i: usize) -> Vec<usize> {
    let mut p = prefix.to_vec();
    if n != 1 {
        p.push(i);
    }
    p
}

fn value_element(poset: &Poset, v: &Value, what: &str) -> Result<Element> {
    let e = match v {
        Value::Real(x) => Element::real(*x),
        Value::Label(l) if l == Value::TOP && poset.unit().is_some() => Element::Top,
        Value::Label(l) => Element::label(l.clone()),
    };
    if !poset.contains(&e) || matches!(v, Value::Real(x) if !x.is_finite()) {
        return type_err(format!("{what}: value {v} is not in {poset}"));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Sig {
    /// A value provided to a functionality port from outside or by a loop.
    In(Endpoint),
    /// A node's resource value.
    Out(Endpoint),
}

struct Checked<'a> {
    ast: &'a DiagramAst,
    posets: BTreeMap<String, Poset>,
    fed: HashMap<Endpoint, Endpoint>,
    layer: BTreeMap<String, usize>,
}

impl Checked<'_> {
    fn port_poset(&self, ty: &PortType) -> Poset {
        match ty {
            PortType::Real { unit } => Poset::nonneg_real(unit.clone()),
            PortType::Named { name } => self.posets[name].clone(),
        }
    }

    fn node(&self, name: &str) -> &NodeDecl {
        self.ast.node(name).expect("checked")
    }

    fn res_poset(&self, n: &NodeDecl) -> Poset {
        pack(n.res.iter().map(|p| self.port_poset(&p.ty)).collect())
    }
}

fn check(ast: &DiagramAst) -> Result<Checked<'_>> {
    let mut posets = BTreeMap::new();
    for p in &ast.posets {
        let built = Poset::discrete(p.elements.clone(), p.order.clone())
            .map_err(|e| DslError::Type(format!("poset {}: {e}", p.name)))?;
        posets.insert(p.name.clone(), built);
    }
    if ast.nodes.is_empty() {
        return type_err("diagram has no nodes");
    }
    for n in &ast.nodes {
        for p in n.fun.iter().chain(&n.res) {
            if let PortType::Named { name } = &p.ty {
                if !posets.contains_key(name) {
                    return type_err(format!("node {}: port {} has unknown poset {name}", n.name, p.name));
                }
            }
        }
        match &n.binding {
            Binding::Union(rs) | Binding::Intersection(rs) if rs.is_empty() => {
                return type_err(format!("node {}: empty choice", n.name));
            }
            _ => {}
        }
    }
    let mut checked = Checked { ast, posets, fed: HashMap::new(), layer: BTreeMap::new() };

    for i in &ast.impls {
        let Some(n) = ast.node(&i.node) else {
            return type_err(format!("impl {}.{}: unknown node", i.node, i.id));
        };
        if n.binding != Binding::Table {
            return type_err(format!("impl {}.{}: node {} is not bound to a table", i.node, i.id, n.name));
        }
        for (ports, vals, side) in [(&n.fun, &i.prov, "functionality"), (&n.res, &i.reqs, "resource")] {
            let names: Vec<&str> = vals.iter().map(|(p, _)| p.as_str()).collect();
            let want: Vec<&str> = ports.iter().map(|p| p.name.as_str()).collect();
            if names != want {
                return type_err(format!(
                    "impl {}.{}: {side} values must name exactly ({})",
                    i.node,
                    i.id,
                    want.join(", ")
                ));
            }
            for ((_, v), p) in vals.iter().zip(ports.iter()) {
                value_element(&checked.port_poset(&p.ty), v, &format!("impl {}.{} port {}", i.node, i.id, p.name))?;
            }
        }
    }

    for (e, is_loop) in ast.edges.iter().map(|e| (e, false)).chain(ast.loops.iter().map(|e| (e, true))) {
        let stmt = if is_loop { "loop" } else { "edge" };
        let from = ast.node(&e.from.node).and_then(|n| n.res_port(&e.from.port));
        let to = ast.node(&e.to.node).and_then(|n| n.fun_port(&e.to.port));
        let (Some(from), Some(to)) = (from, to) else {
            return type_err(format!("{stmt} {e}: must connect an existing resource port to an existing functionality port"));
        };
        if from.ty != to.ty {
            return type_err(format!("{stmt} {e}: {} does not match {}", from.ty, to.ty));
        }
        if checked.fed.insert(e.to.clone(), e.from.clone()).is_some() {
            return type_err(format!("{stmt} {e}: functionality port {} already has an incoming edge", e.to));
        }
    }

    let mut boxed: BTreeMap<&str, &str> = BTreeMap::new();
    for p in &ast.params {
        if let Domain::Labels { labels } = &p.domain {
            if labels.is_empty() {
                return type_err(format!("param {}: empty domain", p.name));
            }
        }
        for t in &p.targets {
            match ast.node(t) {
                Some(n) if n.binding == Binding::Param => {}
                _ => return type_err(format!("param {}: target {t} is not a node bound to 'param'", p.name)),
            }
            if let Some(other) = boxed.insert(t, &p.name) {
                return type_err(format!("node {t} is driven by both {other} and {}", p.name));
            }
        }
    }
    for n in &ast.nodes {
        if n.binding == Binding::Param && !boxed.contains_key(n.name.as_str()) {
            return type_err(format!("node {} is bound to 'param' but no parameter box drives it", n.name));
        }
    }

    // Longest-path layering over non-loop edges.
    let mut preds: BTreeMap<&str, BTreeSet<&str>> = ast.nodes.iter().map(|n| (n.name.as_str(), BTreeSet::new())).collect();
    for e in &ast.edges {
        preds.get_mut(e.to.node.as_str()).unwrap().insert(e.from.node.as_str());
    }
    let mut remaining: Vec<&str> = preds.keys().copied().collect();
    while !remaining.is_empty() {
        let ready: Vec<&str> = remaining
            .iter()
            .copied()
            .filter(|n| preds[n].iter().all(|p| checked.layer.contains_key(*p)))
            .collect();
        if ready.is_empty() {
            return type_err(format!(
                "cycle without a loop annotation among nodes {}",
                remaining.join(", ")
            ));
        }
        for n in &ready {
            let l = preds[n].iter().map(|p| checked.layer[*p] + 1).max().unwrap_or(0);
            checked.layer.insert(n.to_string(), l);
        }
        remaining.retain(|n| !ready.contains(n));
    }
    Ok(checked)
}

/// Type-checks `ast` and elaborates it into a composition expression.
pub fn elaborate(ast: &DiagramAst) -> Result<Elaborated> {
    let c = check(ast)?;
    let loop_targets: BTreeSet<&Endpoint> = ast.loops.iter().map(|e| &e.to).collect();
    let edge_targets: BTreeSet<&Endpoint> = ast.edges.iter().map(|e| &e.to).collect();
    let ep = |n: &NodeDecl, p: &Port| Endpoint { node: n.name.clone(), port: p.name.clone() };

    let ext_in: Vec<Endpoint> = ast
        .nodes
        .iter()
        .flat_map(|n| n.fun.iter().map(move |p| ep(n, p)))
        .filter(|e| !edge_targets.contains(e) && !loop_targets.contains(e))
        .collect();
    let sources: BTreeSet<&Endpoint> = ast.edges.iter().chain(&ast.loops).map(|e| &e.from).collect();
    let ext_out: Vec<Endpoint> = ast
        .nodes
        .iter()
        .flat_map(|n| n.res.iter().map(move |p| ep(n, p)))
        .filter(|e| !sources.contains(e))
        .collect();

    let sig_poset = |s: &Sig| -> Poset {
        let (Sig::In(e) | Sig::Out(e)) = s;
        let n = c.node(&e.node);
        let p = match s {
            Sig::In(_) => n.fun_port(&e.port),
            Sig::Out(_) => n.res_port(&e.port),
        };
        c.port_poset(&p.expect("checked").ty)
    };
    // The last layer that still needs a signal; final outputs count as
    // one past the last layer.
    let last_layer = c.layer.values().copied().max().unwrap_or(0);
    let mut needed_until: HashMap<Sig, usize> = HashMap::new();
    for e in &ext_in {
        needed_until.insert(Sig::In(e.clone()), c.layer[&e.node]);
    }
    for e in &ast.loops {
        needed_until.insert(Sig::In(e.to.clone()), c.layer[&e.to.node]);
        needed_until.insert(Sig::Out(e.from.clone()), last_layer + 1);
    }
    for e in &ext_out {
        needed_until.insert(Sig::Out(e.clone()), last_layer + 1);
    }
    for e in &ast.edges {
        let l = c.layer[&e.to.node];
        let slot = needed_until.entry(Sig::Out(e.from.clone())).or_insert(l);
        *slot = (*slot).max(l);
    }

    // Initial bundle.
    let p_sigs: Vec<Sig> = ext_in.iter().cloned().map(Sig::In).collect();
    let l_sigs: Vec<Sig> = ast.loops.iter().map(|e| Sig::In(e.to.clone())).collect();
    let p_poset = pack(p_sigs.iter().map(sig_poset).collect());
    let mut bundle: Vec<(Sig, Vec<usize>)> = Vec::new();
    let mut cur = if ast.loops.is_empty() {
        for (i, s) in p_sigs.iter().enumerate() {
            bundle.push((s.clone(), sub(&[], p_sigs.len(), i)));
        }
        p_poset.clone()
    } else {
        for (i, s) in p_sigs.iter().enumerate() {
            bundle.push((s.clone(), sub(&[0], p_sigs.len(), i)));
        }
        for (i, s) in l_sigs.iter().enumerate() {
            bundle.push((s.clone(), sub(&[1], l_sigs.len(), i)));
        }
        Poset::pair(p_poset.clone(), pack(l_sigs.iter().map(sig_poset).collect()))
    };

    let mut stages: Vec<CompositionExpr> = Vec::new();
    let push_route = |stages: &mut Vec<CompositionExpr>, cur: &Poset, wiring: Wiring| -> Poset {
        let res = wiring.poset(cur);
        if !wiring.is_identity(cur, &mut Vec::new()) {
            stages.push(CompositionExpr::Route { fun: cur.clone(), res: res.clone(), wiring });
        }
        res
    };
    let slot_of = |bundle: &[(Sig, Vec<usize>)], s: &Sig| -> Wiring {
        Wiring::Slot(bundle.iter().find(|(x, _)| x == s).expect("signal routed").1.clone())
    };
    let mut param_slots: BTreeMap<String, (String, String, u64)> = BTreeMap::new();
    let mut next_slot = 0u64;
    for p in &ast.params {
        for t in &p.targets {
            param_slots.insert(t.clone(), (p.name.clone(), p.binding.clone(), next_slot));
            next_slot += 1;
        }
    }

    for k in 0..=last_layer {
        let nodes: Vec<&NodeDecl> = ast.nodes.iter().filter(|n| c.layer[&n.name] == k).collect();
        let pass: Vec<Sig> =
            bundle.iter().map(|(s, _)| s.clone()).filter(|s| needed_until.get(s).is_some_and(|&l| l > k)).collect();
        let mut wirings = Vec::new();
        let mut parts = Vec::new();
        for n in &nodes {
            let feeds: Vec<Wiring> = n
                .fun
                .iter()
                .map(|p| {
                    let e = ep(n, p);
                    let sig = match (loop_targets.contains(&e), c.fed.get(&e)) {
                        (false, Some(src)) => Sig::Out(src.clone()),
                        _ => Sig::In(e),
                    };
                    slot_of(&bundle, &sig)
                })
                .collect();
            wirings.push(if feeds.len() == 1 { feeds.into_iter().next().unwrap() } else { Wiring::Tuple(feeds) });
            parts.push(node_expr(n, &param_slots));
        }
        if !pass.is_empty() {
            let ws: Vec<Wiring> = pass.iter().map(|s| slot_of(&bundle, s)).collect();
            wirings.push(if ws.len() == 1 { ws.into_iter().next().unwrap() } else { Wiring::Tuple(ws) });
            parts.push(CompositionExpr::Identity(pack(pass.iter().map(sig_poset).collect())));
        }
        let wiring = if wirings.len() == 1 { wirings.pop().unwrap() } else { Wiring::Tuple(wirings) };
        push_route(&mut stages, &cur, wiring);

        let m = parts.len();
        let mut res_posets = Vec::new();
        let mut next = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            let prefix = sub(&[], m, i);
            for (j, p) in n.res.iter().enumerate() {
                next.push((Sig::Out(ep(n, p)), sub(&prefix, n.res.len(), j)));
            }
            res_posets.push(c.res_poset(n));
        }
        if !pass.is_empty() {
            let prefix = sub(&[], m, nodes.len());
            for (j, s) in pass.iter().enumerate() {
                next.push((s.clone(), sub(&prefix, pass.len(), j)));
            }
            res_posets.push(pack(pass.iter().map(sig_poset).collect()));
        }
        stages.push(if m == 1 { parts.pop().unwrap() } else { CompositionExpr::Parallel(parts) });
        cur = pack(res_posets);
        bundle = next;
    }

    let q_sigs: Vec<Sig> = ext_out.iter().cloned().map(Sig::Out).collect();
    let pack_wiring = |sigs: &[Sig]| -> Wiring {
        let ws: Vec<Wiring> = sigs.iter().map(|s| slot_of(&bundle, s)).collect();
        if ws.len() == 1 { ws.into_iter().next().unwrap() } else { Wiring::Tuple(ws) }
    };
    let out_wiring = if ast.loops.is_empty() {
        pack_wiring(&q_sigs)
    } else {
        let l_out: Vec<Sig> = ast.loops.iter().map(|e| Sig::Out(e.from.clone())).collect();
        Wiring::Tuple(vec![pack_wiring(&q_sigs), pack_wiring(&l_out)])
    };
    let inner_res = push_route(&mut stages, &cur, out_wiring);

    let mut it = stages.into_iter();
    let first = it.next().expect("at least one layer");
    let body = it.fold(first, |acc, s| CompositionExpr::Series(Box::new(acc), Box::new(s)));
    let (expr, res_poset) = if ast.loops.is_empty() {
        (body, inner_res)
    } else {
        (CompositionExpr::Trace(Box::new(body)), inner_res.component(0).expect("pair").clone())
    };
    Ok(Elaborated { ast: ast.clone(), expr, fun_ports: ext_in, res_ports: ext_out, fun_poset: p_poset, res_poset, posets: c.posets })
}

fn node_expr(n: &NodeDecl, param_slots: &BTreeMap<String, (String, String, u64)>) -> CompositionExpr {
    let body = match &n.binding {
        Binding::Ref(k) => CompositionExpr::Leaf(k.clone()),
        Binding::Table => CompositionExpr::Table(n.name.clone()),
        Binding::Union(ks) => CompositionExpr::Union(ks.iter().cloned().map(CompositionExpr::Leaf).collect()),
        Binding::Intersection(ks) => {
            CompositionExpr::Intersection(ks.iter().cloned().map(CompositionExpr::Leaf).collect())
        }
        Binding::Param => {
            let (param, binding, slot) = param_slots[&n.name].clone();
            CompositionExpr::Reparam { param, binding, slot }
        }
    };
    CompositionExpr::Node { name: n.name.clone(), body: Box::new(body) }
}

struct Ctx<'a> {
    el: &'a Elaborated,
    registry: &'a Registry,
    params: BTreeMap<String, ParamValue>,
    seed: Option<u64>,
}

impl Elaborated {
    fn port_poset(&self, ty: &PortType) -> Poset {
        match ty {
            PortType::Real { unit } => Poset::nonneg_real(unit.clone()),
            PortType::Named { name } => self.posets[name].clone(),
        }
    }

    /// Whether instantiating the diagram draws from a kernel.
    pub fn is_stochastic(&self) -> bool {
        self.ast.params.iter().any(|p| p.kind == ParamKind::Kernel)
    }

    /// Builds the design problem. Parameter boxes take their values from
    /// `params` (one-label domains default to that label); kernel boxes need
    /// a seed, and target `i` in canonical order draws with `split(seed, i)`.
    pub fn build(
        &self,
        registry: &Registry,
        params: &BTreeMap<String, ParamValue>,
        seed: Option<u64>,
    ) -> Result<DesignProblem> {
        let mut values = BTreeMap::new();
        for p in &self.ast.params {
            let v = match params.get(&p.name) {
                Some(v) if p.contains(v) => v.clone(),
                Some(v) => return Err(DslError::Usage(format!("parameter {}: {v} is outside its domain", p.name))),
                None => p
                    .default_value()
                    .ok_or_else(|| DslError::Usage(format!("missing value for parameter {}", p.name)))?,
            };
            values.insert(p.name.clone(), v);
        }
        if let Some(extra) = params.keys().find(|k| !values.contains_key(*k)) {
            return Err(DslError::Usage(format!("unknown parameter {extra}")));
        }
        if self.is_stochastic() && seed.is_none() {
            return Err(DslError::Usage("this diagram samples from a kernel; a seed is required".into()));
        }
        let ctx = Ctx { el: self, registry, params: values, seed };
        ctx.build(&self.expr)
    }

    /// The outer functionality element named by a query statement.
    pub fn query_element(&self, q: &Query) -> Result<Element> {
        let named: Vec<&Endpoint> = q.values.iter().map(|(e, _)| e).collect();
        if named != self.fun_ports.iter().collect::<Vec<_>>() {
            let want: Vec<String> = self.fun_ports.iter().map(ToString::to_string).collect();
            return type_err(format!("query must set exactly the outer functionalities ({})", want.join(", ")));
        }
        let mut es = Vec::new();
        for (e, v) in &q.values {
            let port = self.ast.node(&e.node).and_then(|n| n.fun_port(&e.port)).expect("outer port");
            es.push(value_element(&self.port_poset(&port.ty), v, &format!("query {e}"))?);
        }
        Ok(if es.len() == 1 { es.pop().unwrap() } else { Element::tuple(es) })
    }

    /// Parses `port=value` assignments for the outer functionalities.
    pub fn query_from_assignments(&self, assigns: &[(String, String)]) -> Result<Query> {
        let mut values = Vec::new();
        for (k, v) in assigns {
            let Some((node, port)) = k.split_once('.') else {
                return Err(DslError::Usage(format!("expected node.port=value, got {k}")));
            };
            let value = match v.parse::<f64>() {
                Ok(x) => Value::Real(x),
                Err(_) => Value::Label(v.clone()),
            };
            values.push((Endpoint { node: node.into(), port: port.into() }, value));
        }
        values.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Query { values })
    }
}

impl Ctx<'_> {
    fn node_posets(&self, name: &str) -> (Poset, Poset) {
        let n = self.el.ast.node(name).expect("checked");
        (
            pack(n.fun.iter().map(|p| self.el.port_poset(&p.ty)).collect()),
            pack(n.res.iter().map(|p| self.el.port_poset(&p.ty)).collect()),
        )
    }

    fn build(&self, e: &CompositionExpr) -> Result<DesignProblem> {
        let core = |r: codp_core::dp::Result<DesignProblem>| r.map_err(|e| DslError::Type(e.to_string()));
        match e {
            CompositionExpr::Leaf(k) => self.registry.fixed_dp(k),
            CompositionExpr::Table(name) => {
                let (fun, res) = self.node_posets(name);
                let n = self.el.ast.node(name).expect("checked");
                let mut impls = Vec::new();
                for i in self.el.ast.impls.iter().filter(|i| &i.node == name) {
                    let conv = |vals: &[(String, Value)], ports: &[Port]| -> Result<Element> {
                        let mut es = Vec::new();
                        for ((_, v), p) in vals.iter().zip(ports) {
                            es.push(value_element(&self.el.port_poset(&p.ty), v, &format!("impl {name}.{}", i.id))?);
                        }
                        Ok(if es.len() == 1 { es.pop().unwrap() } else { Element::tuple(es) })
                    };
                    impls.push(Implementation { id: i.id.clone(), prov: conv(&i.prov, &n.fun)?, reqs: conv(&i.reqs, &n.res)? });
                }
                let set = ImplementationSet::new(fun, res, impls).map_err(|e| DslError::Type(e.to_string()))?;
                Ok(DesignProblem::from_mdpi(set))
            }
            CompositionExpr::Reparam { param, binding, slot } => {
                let value = &self.params[param];
                let decl = self.el.ast.params.iter().find(|p| &p.name == param).expect("checked");
                match (decl.kind, self.registry.get(binding)) {
                    (ParamKind::Fn, Some(Entry::Function(f))) => {
                        f.build(value).map_err(|e| DslError::Type(format!("{binding}: {e}")))
                    }
                    (ParamKind::Kernel, Some(Entry::Kernel(k))) => {
                        let s = seed::split(self.seed.expect("checked in build"), *slot);
                        k.draw(value, s).map_err(|e| DslError::Type(format!("{binding}: {e}")))
                    }
                    (_, None) => type_err(format!("unknown registry entry '{binding}'")),
                    (kind, Some(other)) => type_err(format!(
                        "param {param} is declared '{kind}' but '{binding}' is a {} entry",
                        other.kind()
                    )),
                }
            }
            CompositionExpr::Node { name, body } => {
                let d = self.build(body)?;
                let (fun, res) = self.node_posets(name);
                if d.fun_poset() != &fun || d.res_poset() != &res {
                    return type_err(format!(
                        "node {name}: declared {fun} -> {res} but its binding is {} -> {}",
                        d.fun_poset(),
                        d.res_poset()
                    ));
                }
                Ok(d.named(name.clone()))
            }
            CompositionExpr::Identity(p) => Ok(DesignProblem::identity(p.clone())),
            CompositionExpr::Route { fun, res, wiring } => {
                let w = wiring.clone();
                Ok(DesignProblem::from_monotone_map(fun.clone(), res.clone(), move |x| w.apply(x)))
            }
            CompositionExpr::Series(a, b) => core(dp::series(&self.build(a)?, &self.build(b)?)),
            CompositionExpr::Parallel(xs) => {
                let parts = xs.iter().map(|x| self.build(x)).collect::<Result<Vec<_>>>()?;
                core(dp::parallel_all(&parts))
            }
            CompositionExpr::Trace(a) => core(dp::trace(&self.build(a)?)),
            CompositionExpr::Union(xs) | CompositionExpr::Intersection(xs) => {
                let parts = xs.iter().map(|x| self.build(x)).collect::<Result<Vec<_>>>()?;
                let union = matches!(e, CompositionExpr::Union(_));
                let mut it = parts.into_iter();
                let first = it.next().expect("checked non-empty");
                it.try_fold(first, |acc, d| core(if union { dp::union(&acc, &d) } else { dp::intersection(&acc, &d) }))
            }
        }
    }
}
