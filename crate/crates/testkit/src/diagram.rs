//! Relational reading of a finite-poset diagram, by enumeration.
//!
//! Outer `(f, r)` is feasible iff some assignment of every port satisfies
//! each node's `impl` table, every edge and loop `a.y -> b.x` has
//! `a.y <= b.x`, every outer functionality bounds its port from below and
//! every outer resource bounds its port from above.

use std::collections::{BTreeMap, BTreeSet};

use codp_core::{Element, Poset};
use codp_dsl::ast::{Binding, DiagramAst, Endpoint, PortType, Value};

struct PortSlot {
    end: Endpoint,
    fun: bool,
    poset: Poset,
}

/// Functionality ports without an incoming wire and resource ports without
/// an outgoing one, each sorted.
pub fn outer_ports(ast: &DiagramAst) -> (Vec<Endpoint>, Vec<Endpoint>) {
    let wires: Vec<_> = ast.edges.iter().chain(&ast.loops).collect();
    let mut fun = Vec::new();
    let mut res = Vec::new();
    for n in &ast.nodes {
        for p in &n.fun {
            let e = Endpoint { node: n.name.clone(), port: p.name.clone() };
            if !wires.iter().any(|w| w.to == e) {
                fun.push(e);
            }
        }
        for p in &n.res {
            let e = Endpoint { node: n.name.clone(), port: p.name.clone() };
            if !wires.iter().any(|w| w.from == e) {
                res.push(e);
            }
        }
    }
    fun.sort();
    res.sort();
    (fun, res)
}

fn posets(ast: &DiagramAst) -> BTreeMap<String, Poset> {
    ast.posets
        .iter()
        .map(|d| {
            let pairs = d.order.iter().map(|(a, b)| (a.clone(), b.clone()));
            (d.name.clone(), Poset::discrete(d.elements.clone(), pairs).expect("declared poset"))
        })
        .collect()
}

fn label(v: &Value) -> Element {
    match v {
        Value::Label(l) => Element::label(l.clone()),
        Value::Real(x) => panic!("real value {x} in a finite diagram"),
    }
}

/// Every feasible outer `(f, r)`, with `f` and `r` packed in the order of
/// `fun_ports` and `res_ports` (a single port is not wrapped in a tuple).
/// Only diagrams of `table` nodes over declared finite posets are supported.
pub fn diagram_relation(
    ast: &DiagramAst,
    fun_ports: &[Endpoint],
    res_ports: &[Endpoint],
) -> BTreeSet<(Element, Element)> {
    let ps = posets(ast);
    let poset_of = |ty: &PortType| match ty {
        PortType::Named { name } => ps[name].clone(),
        PortType::Real { unit } => panic!("real port R[{unit}] in a finite diagram"),
    };
    let mut slots = Vec::new();
    for n in &ast.nodes {
        assert_eq!(n.binding, Binding::Table, "node {} must be a table", n.name);
        for (fun, ports) in [(true, &n.fun), (false, &n.res)] {
            for p in ports {
                slots.push(PortSlot {
                    end: Endpoint { node: n.name.clone(), port: p.name.clone() },
                    fun,
                    poset: poset_of(&p.ty),
                });
            }
        }
    }
    let idx = |e: &Endpoint, fun: bool| slots.iter().position(|s| &s.end == e && s.fun == fun).expect("port");
    let domains: Vec<Vec<Element>> = slots.iter().map(|s| s.poset.enumerate().expect("finite")).collect();

    let mut valid: Vec<Vec<Element>> = Vec::new();
    let mut counter = vec![0usize; slots.len()];
    'assign: loop {
        let vals: Vec<Element> = counter.iter().zip(&domains).map(|(&i, d)| d[i].clone()).collect();
        let leq = |i: usize, a: &Element, b: &Element| slots[i].poset.leq(a, b).expect("same poset");
        let tables_ok = ast.nodes.iter().all(|n| {
            ast.impls.iter().filter(|i| i.node == n.name).any(|imp| {
                imp.prov.iter().all(|(port, v)| {
                    let k = idx(&Endpoint { node: n.name.clone(), port: port.clone() }, true);
                    leq(k, &vals[k], &label(v))
                }) && imp.reqs.iter().all(|(port, v)| {
                    let k = idx(&Endpoint { node: n.name.clone(), port: port.clone() }, false);
                    leq(k, &label(v), &vals[k])
                })
            })
        });
        let wires_ok = ast.edges.iter().chain(&ast.loops).all(|w| {
            let (a, b) = (idx(&w.from, false), idx(&w.to, true));
            leq(a, &vals[a], &vals[b])
        });
        if tables_ok && wires_ok {
            valid.push(vals);
        }
        for (c, d) in counter.iter_mut().zip(&domains) {
            *c += 1;
            if *c < d.len() {
                continue 'assign;
            }
            *c = 0;
        }
        break;
    }

    let outer = |ports: &[Endpoint], fun: bool| -> Vec<usize> { ports.iter().map(|e| idx(e, fun)).collect() };
    let (fin, rout) = (outer(fun_ports, true), outer(res_ports, false));
    let pack = |ks: &[usize]| -> Poset {
        if ks.len() == 1 {
            slots[ks[0]].poset.clone()
        } else {
            Poset::product(ks.iter().map(|&k| slots[k].poset.clone()))
        }
    };
    let unpack = |e: &Element, n: usize| -> Vec<Element> {
        if n == 1 {
            vec![e.clone()]
        } else {
            e.components().expect("tuple").to_vec()
        }
    };
    let mut out = BTreeSet::new();
    let rs = pack(&rout).enumerate().expect("finite");
    for f in pack(&fin).enumerate().expect("finite") {
        let fv = unpack(&f, fin.len());
        for r in &rs {
            let rv = unpack(r, rout.len());
            let ok = valid.iter().any(|vals| {
                fin.iter().zip(&fv).all(|(&k, b)| slots[k].poset.leq(b, &vals[k]).expect("same poset"))
                    && rout.iter().zip(&rv).all(|(&k, b)| slots[k].poset.leq(&vals[k], b).expect("same poset"))
            });
            if ok {
                out.insert((f.clone(), r.clone()));
            }
        }
    }
    out
}
