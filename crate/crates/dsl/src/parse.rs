use std::collections::HashSet;

use crate::ast::*;
use crate::error::{DslError, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    /// The bracketed unit of `R[...]`.
    Unit(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

const SYMBOLS: [&str; 12] = ["->", "(", ")", "{", "}", "[", "]", ",", ":", "=", ".", "<"];

fn lex(line: &str, lineno: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word == "R" && chars.get(i) == Some(&'[') {
                let close = chars[i..].iter().position(|&c| c == ']').ok_or(DslError::Syntax {
                    line: lineno,
                    col,
                    msg: "unterminated unit, expected ']'".into(),
                })?;
                let unit: String = chars[i + 1..i + close].iter().collect();
                if unit.chars().any(|c| c.is_whitespace() || c == '[' || c == '#') {
                    return Err(DslError::Syntax { line: lineno, col, msg: format!("invalid unit '{unit}'") });
                }
                out.push(Token { tok: Tok::Unit(unit), col });
                i += close + 1;
            } else {
                out.push(Token { tok: Tok::Ident(word), col });
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let x: f64 = text
                .parse()
                .map_err(|_| DslError::Syntax { line: lineno, col, msg: format!("invalid number '{text}'") })?;
            out.push(Token { tok: Tok::Num(x), col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push(Token { tok: Tok::Sym(s), col });
                i += s.len();
            }
            None => return Err(DslError::Syntax { line: lineno, col, msg: format!("unexpected character '{c}'") }),
        }
    }
    Ok(out)
}

struct Line<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    width: usize,
}

impl Line<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let col = self.toks.get(self.pos).map_or(self.width + 1, |t| t.col);
        Err(DslError::Syntax { line: self.line, col, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == w)
    }

    fn sym(&mut self, s: &str) -> Result<()> {
        if self.at_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{s}'"))
        }
    }

    fn word(&mut self, w: &str) -> Result<()> {
        if self.at_word(w) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{w}'"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(x)) => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.peek() {
            Some(Tok::Num(x)) => {
                let x = *x;
                self.pos += 1;
                Ok(x)
            }
            _ => self.err("expected a number"),
        }
    }

    /// `ident (. ident)*`
    fn qualified(&mut self) -> Result<String> {
        let mut name = self.ident("a name")?;
        while self.at_sym(".") {
            self.pos += 1;
            name.push('.');
            name.push_str(&self.ident("a name after '.'")?);
        }
        Ok(name)
    }

    fn endpoint(&mut self) -> Result<Endpoint> {
        let node = self.ident("a node name")?;
        self.sym(".")?;
        let port = self.ident("a port name")?;
        Ok(Endpoint { node, port })
    }

    fn value(&mut self) -> Result<Value> {
        match self.peek() {
            Some(Tok::Num(_)) => Ok(Value::Real(self.number()?)),
            Some(Tok::Ident(_)) => Ok(Value::Label(self.ident("a value")?)),
            _ => self.err("expected a value"),
        }
    }

    /// `item (, item)*`, possibly empty when `close` follows immediately.
    fn list<T>(&mut self, close: Option<&str>, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::new();
        if close.is_some_and(|c| self.at_sym(c)) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if !self.at_sym(",") {
                return Ok(out);
            }
            self.pos += 1;
        }
    }

    fn end(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            self.err("unexpected trailing input")
        } else {
            Ok(())
        }
    }

    fn ports(&mut self) -> Result<Vec<Port>> {
        self.sym("(")?;
        let ports = self.list(Some(")"), |l| {
            let name = l.ident("a port name")?;
            l.sym(":")?;
            let ty = match l.peek() {
                Some(Tok::Unit(u)) => {
                    let unit = u.clone();
                    l.pos += 1;
                    PortType::Real { unit }
                }
                Some(Tok::Ident(_)) => PortType::Named { name: l.ident("a poset")? },
                _ => return l.err("expected a port type, R[unit] or a poset name"),
            };
            Ok(Port { name, ty })
        })?;
        self.sym(")")?;
        Ok(ports)
    }

    fn assignments(&mut self) -> Result<Vec<(String, Value)>> {
        self.sym("(")?;
        let out = self.list(Some(")"), |l| {
            let port = l.ident("a port name")?;
            l.sym("=")?;
            Ok((port, l.value()?))
        })?;
        self.sym(")")?;
        Ok(out)
    }
}

const RESERVED: [&str; 6] = ["table", "param", "union", "intersection", "top", "order"];

/// Parses `.codp` text into a canonical syntax tree.
pub fn parse(text: &str) -> Result<DiagramAst> {
    let mut ast = DiagramAst::empty();
    let mut seen: HashSet<(&'static str, String)> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let toks = lex(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut l = Line { toks: &toks, pos: 0, line: lineno, width: raw.chars().count() };
        let kw = l.ident("a statement keyword")?;
        let mut unique = |kind: &'static str, name: String, l: &Line| -> Result<()> {
            if RESERVED.contains(&name.as_str()) {
                return l.err(format!("'{name}' is reserved"));
            }
            if !seen.insert((kind, name.clone())) {
                return Err(DslError::Syntax { line: lineno, col: toks[1].col, msg: format!("duplicate {kind} '{name}'") });
            }
            Ok(())
        };
        match kw.as_str() {
            "poset" => {
                let name = l.ident("a poset name")?;
                unique("poset", name.clone(), &l)?;
                l.sym("=")?;
                l.sym("{")?;
                let elements = l.list(Some("}"), |l| l.ident("an element label"))?;
                l.sym("}")?;
                let mut distinct = HashSet::new();
                if let Some(d) = elements.iter().find(|e| !distinct.insert(*e)) {
                    return l.err(format!("duplicate element '{d}'"));
                }
                let mut order = Vec::new();
                if l.at_word("order") {
                    l.pos += 1;
                    for chain in l.list(None, |l| {
                        let mut chain = vec![l.ident("an element label")?];
                        while l.at_sym("<") {
                            l.pos += 1;
                            chain.push(l.ident("an element label")?);
                        }
                        if chain.len() < 2 {
                            return l.err("expected '<'");
                        }
                        Ok(chain)
                    })? {
                        order.extend(chain.windows(2).map(|w| (w[0].clone(), w[1].clone())));
                    }
                }
                l.end()?;
                ast.posets.push(PosetDecl { name, elements, order });
            }
            "node" => {
                let name = l.ident("a node name")?;
                unique("node", name.clone(), &l)?;
                let fun = l.ports()?;
                l.sym("->")?;
                let res = l.ports()?;
                let mut names = HashSet::new();
                if let Some(p) = fun.iter().chain(&res).find(|p| !names.insert(p.name.clone())) {
                    return l.err(format!("duplicate port '{}' on node '{name}'", p.name));
                }
                l.sym("=")?;
                let binding = if l.at_word("table") {
                    l.pos += 1;
                    Binding::Table
                } else if l.at_word("param") {
                    l.pos += 1;
                    Binding::Param
                } else if l.at_word("union") || l.at_word("intersection") {
                    let union = l.at_word("union");
                    l.pos += 1;
                    l.sym("(")?;
                    let refs = l.list(None, |l| l.qualified())?;
                    l.sym(")")?;
                    if union {
                        Binding::Union(refs)
                    } else {
                        Binding::Intersection(refs)
                    }
                } else {
                    Binding::Ref(l.qualified()?)
                };
                l.end()?;
                ast.nodes.push(NodeDecl { name, fun, res, binding });
            }
            "impl" => {
                let node = l.ident("a node name")?;
                l.sym(".")?;
                let id = l.ident("an implementation id")?;
                unique("implementation", format!("{node}.{id}"), &l)?;
                let prov = l.assignments()?;
                l.sym("->")?;
                let reqs = l.assignments()?;
                l.end()?;
                ast.impls.push(ImplDecl { node, id, prov, reqs });
            }
            "edge" | "loop" => {
                let from = l.endpoint()?;
                l.sym("->")?;
                let to = l.endpoint()?;
                l.end()?;
                if kw == "edge" {
                    ast.edges.push(Edge { from, to });
                } else {
                    ast.loops.push(Edge { from, to });
                }
            }
            "param" => {
                let name = l.ident("a parameter name")?;
                unique("param", name.clone(), &l)?;
                l.word("in")?;
                let domain = if l.at_sym("{") {
                    l.pos += 1;
                    let labels = l.list(Some("}"), |l| l.ident("a label"))?;
                    l.sym("}")?;
                    Domain::Labels { labels }
                } else {
                    l.sym("[")?;
                    let lo = l.number()?;
                    l.sym(",")?;
                    let hi = l.number()?;
                    l.sym("]")?;
                    if lo > hi {
                        return l.err("empty interval");
                    }
                    Domain::Interval { lo, hi }
                };
                l.sym(":")?;
                let kind = match l.ident("'fn' or 'kernel'")?.as_str() {
                    "fn" => ParamKind::Fn,
                    "kernel" => ParamKind::Kernel,
                    _ => {
                        l.pos -= 1;
                        return l.err("expected 'fn' or 'kernel'");
                    }
                };
                let binding = l.qualified()?;
                l.sym("->")?;
                let targets = l.list(None, |l| l.ident("a node name"))?;
                l.end()?;
                ast.params.push(ParamDecl { name, domain, kind, binding, targets });
            }
            "query" => {
                let values = l.list(None, |l| {
                    let ep = l.endpoint()?;
                    l.sym("=")?;
                    Ok((ep, l.value()?))
                })?;
                l.end()?;
                ast.queries.push(Query { values });
            }
            other => {
                l.pos -= 1;
                return l.err(format!("unknown statement '{other}'"));
            }
        }
    }
    ast.canonicalize();
    Ok(ast)
}
