use std::collections::BTreeMap;
use std::path::Path;

use codp_core::dp::DpError;
use codp_core::Element;
use codp_dsl::ast::Query;
use codp_dsl::{elaborate, format, parse, Elaborated, ParamValue};
use codp_uav::{registry, UavModel};
use serde_json::{json, Value};

use crate::{read_input, to_json_bytes, write_output, CliError, Result, SolveArgs, TableFormat};

fn load(path: &Path) -> Result<Elaborated> {
    let text = read_input(path)?;
    let ast = parse(&text).map_err(|e| located(path, e))?;
    elaborate(&ast).map_err(|e| located(path, e))
}

fn located(path: &Path, source: codp_dsl::DslError) -> CliError {
    CliError::Diagram { path: path.display().to_string(), source }
}

pub(crate) fn check(path: &Path) -> Result<()> {
    let el = load(path)?;
    let names = |ps: &[codp_dsl::ast::Endpoint]| ps.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    println!(
        "ok: {} nodes, {} edges, {} loops, {} params; ({}) -> ({})",
        el.ast.nodes.len(),
        el.ast.edges.len(),
        el.ast.loops.len(),
        el.ast.params.len(),
        names(&el.fun_ports),
        names(&el.res_ports)
    );
    Ok(())
}

pub(crate) fn fmt(path: &Path) -> Result<()> {
    let text = read_input(path)?;
    let ast = parse(&text).map_err(|e| located(path, e))?;
    print!("{}", format(&ast));
    Ok(())
}

fn param_values(el: &Elaborated, assigns: &[String]) -> Result<BTreeMap<String, ParamValue>> {
    let mut out = BTreeMap::new();
    for a in assigns {
        let (k, v) = a.split_once('=').ok_or_else(|| CliError::Usage(format!("expected name=value, got '{a}'")))?;
        let decl = el
            .ast
            .params
            .iter()
            .find(|p| p.name == k)
            .ok_or_else(|| CliError::Usage(format!("unknown parameter {k}")))?;
        if out.insert(k.to_string(), decl.parse_value(v)?).is_some() {
            return Err(CliError::Usage(format!("parameter {k} given twice")));
        }
    }
    Ok(out)
}

fn queries(el: &Elaborated, assigns: &[String]) -> Result<Vec<Query>> {
    if assigns.is_empty() {
        if el.ast.queries.is_empty() {
            return Err(CliError::Usage("the diagram has no query; pass --query node.port=value".into()));
        }
        return Ok(el.ast.queries.clone());
    }
    let pairs = assigns
        .iter()
        .map(|a| {
            a.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Usage(format!("expected node.port=value, got '{a}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![el.query_from_assignments(&pairs)?])
}

/// One solved query: the minimal resources, their witnesses, and whether
/// the feedback loop diverged.
struct Solved {
    query: Query,
    resources: Vec<Element>,
    witnesses: Vec<Vec<String>>,
    diverged: bool,
    divergent_branches: usize,
}

fn cell(e: &Element) -> String {
    match e {
        Element::Real(x) => x.to_string(),
        Element::Top => "top".into(),
        Element::Label(l) => l.clone(),
        Element::Tuple(_) => e.to_json().to_string(),
    }
}

fn split_ports(e: &Element, n: usize) -> Vec<Element> {
    if n == 1 {
        vec![e.clone()]
    } else {
        e.components().expect("tuple of outer resources").to_vec()
    }
}

pub(crate) fn solve(args: &SolveArgs) -> Result<()> {
    let el = load(&args.path)?;
    let params = param_values(&el, &args.params)?;
    if args.seed.is_some() && !el.is_stochastic() {
        eprintln!("note: --seed ignored, the diagram draws from no kernel");
    }
    let model = UavModel::default();
    let reg = registry(&model)?;
    let dp = el.build(&reg, &params, args.seed)?;

    let mut solved = Vec::new();
    for q in queries(&el, &args.query)? {
        let f = el.query_element(&q)?;
        let s = match dp.query_fix_fun_min_res(&f) {
            Ok(r) => Solved {
                query: q,
                resources: r.minimal_resources.iter().cloned().collect(),
                witnesses: r.witnesses.iter().map(|w| w.choices.to_vec()).collect(),
                diverged: false,
                divergent_branches: r.divergent_branches,
            },
            Err(DpError::Divergence { .. }) => Solved {
                query: q,
                resources: vec![],
                witnesses: vec![],
                diverged: true,
                divergent_branches: 0,
            },
            Err(e) => return Err(CliError::Internal(e.to_string())),
        };
        solved.push(s);
    }

    let bytes = match args.format {
        TableFormat::Json => solve_json(&el, &params, args.seed, &solved)?,
        TableFormat::Csv => solve_csv(&el, &solved)?,
    };
    match &args.out {
        Some(p) => write_output(p, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|source| CliError::Output { path: "stdout".into(), source })
        }
    }
}

fn query_json(q: &Query) -> Value {
    let m: serde_json::Map<String, Value> = q
        .values
        .iter()
        .map(|(e, v)| {
            let v = match v {
                codp_dsl::ast::Value::Real(x) => json!(x),
                codp_dsl::ast::Value::Label(l) => json!(l),
            };
            (e.to_string(), v)
        })
        .collect();
    Value::Object(m)
}

fn solve_json(
    el: &Elaborated,
    params: &BTreeMap<String, ParamValue>,
    seed: Option<u64>,
    solved: &[Solved],
) -> Result<Vec<u8>> {
    let params: serde_json::Map<String, Value> = params
        .iter()
        .map(|(k, v)| {
            let v = match v {
                ParamValue::Label(l) => json!(l),
                ParamValue::Real(x) => json!(x),
            };
            (k.clone(), v)
        })
        .collect();
    let results: Vec<Value> = solved
        .iter()
        .map(|s| {
            json!({
                "query": query_json(&s.query),
                "feasible": !s.resources.is_empty(),
                "diverged": s.diverged,
                "divergent_branches": s.divergent_branches,
                "minimal_resources": s.resources.iter().map(Element::to_json).collect::<Vec<_>>(),
                "witnesses": s.witnesses,
            })
        })
        .collect();
    to_json_bytes(&json!({
        "fun_ports": el.fun_ports.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "res_ports": el.res_ports.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "fun_poset": el.fun_poset,
        "res_poset": el.res_poset,
        "params": params,
        "seed": seed,
        "results": results,
    }))
}

fn solve_csv(el: &Elaborated, solved: &[Solved]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["query".to_string(), "feasible".into()];
    header.extend(el.res_ports.iter().map(ToString::to_string));
    header.push("witness".into());
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for s in solved {
        let q: Vec<String> = s.query.values.iter().map(|(e, v)| format!("{e}={v}")).collect();
        let q = q.join(";");
        if s.resources.is_empty() {
            let mut row = vec![q.clone(), "false".into()];
            row.extend(el.res_ports.iter().map(|_| String::new()));
            row.push(String::new());
            w.write_record(&row).map_err(csv_err)?;
        }
        for (r, wit) in s.resources.iter().zip(&s.witnesses) {
            let mut row = vec![q.clone(), "true".into()];
            row.extend(split_ports(r, el.res_ports.len()).iter().map(cell));
            row.push(wit.join("+"));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}
