use std::fmt::Write;

use crate::ast::*;

fn ports(ps: &[Port]) -> String {
    ps.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect::<Vec<_>>().join(", ")
}

fn assigns(xs: &[(String, Value)]) -> String {
    xs.iter().map(|(p, v)| format!("{p} = {v}")).collect::<Vec<_>>().join(", ")
}

/// Canonical text of a syntax tree; sections are separated by blank lines.
pub fn format(ast: &DiagramAst) -> String {
    let mut a = ast.clone();
    a.canonicalize();
    let mut sections: Vec<Vec<String>> = Vec::new();

    sections.push(
        a.posets
            .iter()
            .map(|p| {
                let mut s = format!("poset {} = {{{}}}", p.name, p.elements.join(", "));
                if !p.order.is_empty() {
                    let pairs: Vec<String> = p.order.iter().map(|(x, y)| format!("{x} < {y}")).collect();
                    write!(s, " order {}", pairs.join(", ")).unwrap();
                }
                s
            })
            .collect(),
    );
    sections.push(
        a.nodes
            .iter()
            .map(|n| {
                let binding = match &n.binding {
                    Binding::Ref(r) => r.clone(),
                    Binding::Table => "table".into(),
                    Binding::Param => "param".into(),
                    Binding::Union(rs) => format!("union({})", rs.join(", ")),
                    Binding::Intersection(rs) => format!("intersection({})", rs.join(", ")),
                };
                format!("node {} ({}) -> ({}) = {}", n.name, ports(&n.fun), ports(&n.res), binding)
            })
            .collect(),
    );
    sections.push(
        a.impls
            .iter()
            .map(|i| format!("impl {}.{} ({}) -> ({})", i.node, i.id, assigns(&i.prov), assigns(&i.reqs)))
            .collect(),
    );
    sections.push(a.edges.iter().map(|e| format!("edge {e}")).collect());
    sections.push(a.loops.iter().map(|e| format!("loop {e}")).collect());
    sections.push(
        a.params
            .iter()
            .map(|p| {
                let domain = match &p.domain {
                    Domain::Labels { labels } => format!("{{{}}}", labels.join(", ")),
                    Domain::Interval { lo, hi } => format!("[{lo}, {hi}]"),
                };
                format!("param {} in {} : {} {} -> {}", p.name, domain, p.kind, p.binding, p.targets.join(", "))
            })
            .collect(),
    );
    sections.push(
        a.queries
            .iter()
            .map(|q| {
                let vs: Vec<String> = q.values.iter().map(|(e, v)| format!("{e} = {v}")).collect();
                format!("query {}", vs.join(", "))
            })
            .collect(),
    );

    let blocks: Vec<String> = sections.into_iter().filter(|s| !s.is_empty()).map(|s| s.join("\n")).collect();
    let mut out = blocks.join("\n\n");
    out.push('\n');
    out
}
