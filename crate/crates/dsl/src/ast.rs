//! Syntax tree of `.codp` diagrams.
//!
//! The tree is canonical: [`DiagramAst::canonicalize`] sorts every statement
//! list and every port list, so two texts that differ only in statement
//! order parse to equal trees.

use std::fmt;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramAst {
    pub posets: Vec<PosetDecl>,
    pub nodes: Vec<NodeDecl>,
    pub impls: Vec<ImplDecl>,
    pub edges: Vec<Edge>,
    pub loops: Vec<Edge>,
    pub params: Vec<ParamDecl>,
    pub queries: Vec<Query>,
}

/// A named finite poset: `poset P = {a, b, c} order a < b, b < c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PosetDecl {
    pub name: String,
    pub elements: Vec<String>,
    pub order: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PortType {
    /// `R[unit]`
    Real { unit: String },
    /// A declared finite poset.
    Named { name: String },
}

impl fmt::Display for PortType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortType::Real { unit } => write!(f, "R[{unit}]"),
            PortType::Named { name } => write!(f, "{name}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Port {
    pub name: String,
    pub ty: PortType,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "refs", rename_all = "snake_case")]
pub enum Binding {
    /// A fixed registry entry.
    Ref(String),
    /// The node's own `impl` table.
    Table,
    Union(Vec<String>),
    Intersection(Vec<String>),
    /// Supplied by a parameter box.
    Param,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeDecl {
    pub name: String,
    pub fun: Vec<Port>,
    pub res: Vec<Port>,
    pub binding: Binding,
}

impl NodeDecl {
    pub fn fun_port(&self, name: &str) -> Option<&Port> {
        self.fun.iter().find(|p| p.name == name)
    }

    pub fn res_port(&self, name: &str) -> Option<&Port> {
        self.res.iter().find(|p| p.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    /// `top`, or a label of a finite poset.
    Label(String),
}

impl Value {
    pub const TOP: &'static str = "top";
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x}"),
            Value::Label(l) => write!(f, "{l}"),
        }
    }
}

/// `impl node.id (port = v, ...) -> (port = v, ...)`
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImplDecl {
    pub node: String,
    pub id: String,
    pub prov: Vec<(String, Value)>,
    pub reqs: Vec<(String, Value)>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Endpoint {
    pub node: String,
    pub port: String,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.port)
    }
}

/// A resource port wired to a functionality port.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub from: Endpoint,
    pub to: Endpoint,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Labels { labels: Vec<String> },
    Interval { lo: f64, hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    /// A deterministic family.
    Fn,
    /// An uncertain family.
    Kernel,
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamKind::Fn => "fn",
            ParamKind::Kernel => "kernel",
        })
    }
}

/// `param name in {..} : kernel binding -> node, ...`
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamDecl {
    pub name: String,
    pub domain: Domain,
    pub kind: ParamKind,
    pub binding: String,
    pub targets: Vec<String>,
}

/// `query node.port = v, ...` over the external functionality ports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Query {
    pub values: Vec<(Endpoint, Value)>,
}

fn sort_dedup<T: Ord>(v: &mut Vec<T>) {
    v.sort();
    v.dedup();
}

impl DiagramAst {
    pub fn empty() -> Self {
        DiagramAst {
            posets: vec![],
            nodes: vec![],
            impls: vec![],
            edges: vec![],
            loops: vec![],
            params: vec![],
            queries: vec![],
        }
    }

    /// Sorts statements and ports into canonical order.
    pub fn canonicalize(&mut self) {
        for p in &mut self.posets {
            sort_dedup(&mut p.order);
        }
        self.posets.sort_by(|a, b| a.name.cmp(&b.name));
        for n in &mut self.nodes {
            n.fun.sort_by(|a, b| a.name.cmp(&b.name));
            n.res.sort_by(|a, b| a.name.cmp(&b.name));
        }
        self.nodes.sort_by(|a, b| a.name.cmp(&b.name));
        for i in &mut self.impls {
            i.prov.sort_by(|a, b| a.0.cmp(&b.0));
            i.reqs.sort_by(|a, b| a.0.cmp(&b.0));
        }
        self.impls.sort_by(|a, b| (&a.node, &a.id).cmp(&(&b.node, &b.id)));
        self.edges.sort();
        self.loops.sort();
        for p in &mut self.params {
            sort_dedup(&mut p.targets);
        }
        self.params.sort_by(|a, b| a.name.cmp(&b.name));
        for q in &mut self.queries {
            q.values.sort_by(|a, b| a.0.cmp(&b.0));
        }
        self.queries.sort_by(|a, b| a.values.partial_cmp(&b.values).unwrap_or(std::cmp::Ordering::Equal));
    }

    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn poset(&self, name: &str) -> Option<&PosetDecl> {
        self.posets.iter().find(|p| p.name == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("syntax trees serialize")
    }
}
