//! Ordered domains.
//!
//! A [`Poset`] is one of four kinds: the non-negative reals extended with a
//! top element, a finite poset given by labels and order pairs, a product of
//! posets ordered componentwise, or the opposite of another poset. Values are
//! [`Element`]s; an element is only meaningful relative to the poset it was
//! built for.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PosetError {
    #[error("element {element} does not belong to poset {poset}")]
    DomainMismatch { element: String, poset: String },
    #[error("carrier mismatch: {left} vs {right}")]
    CarrierMismatch { left: String, right: String },
    #[error("poset {0} is infinite and cannot be enumerated")]
    Infinite(String),
    #[error("invalid discrete poset: {0}")]
    InvalidDiscrete(String),
    #[error("unsupported operation on poset {poset}: {what}")]
    Unsupported { poset: String, what: String },
    #[error("malformed element encoding: {0}")]
    Decode(String),
}

pub type Result<T, E = PosetError> = std::result::Result<T, E>;

/// A value of some poset.
///
/// Reals are compared exactly on their stored bits; `-0.0` is normalized to
/// `0.0` by [`Element::real`] so that equality, hashing and order agree.
#[derive(Clone, Debug)]
pub enum Element {
    Real(f64),
    /// The distinguished top of the extended non-negative reals.
    Top,
    Label(String),
    Tuple(Arc<[Element]>),
}

impl Element {
    pub fn real(x: f64) -> Self {
        if x == f64::INFINITY {
            Element::Top
        } else if x == 0.0 {
            Element::Real(0.0)
        } else {
            Element::Real(x)
        }
    }

    pub fn label(s: impl Into<String>) -> Self {
        Element::Label(s.into())
    }

    pub fn tuple(items: impl IntoIterator<Item = Element>) -> Self {
        Element::Tuple(items.into_iter().collect())
    }

    pub fn pair(a: Element, b: Element) -> Self {
        Element::Tuple(Arc::new([a, b]))
    }

    /// Numeric view of a scalar: `Top` maps to `+inf`.
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Element::Real(x) => Some(*x),
            Element::Top => Some(f64::INFINITY),
            _ => None,
        }
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Element::Label(s) => Some(s),
            _ => None,
        }
    }

    pub fn components(&self) -> Option<&[Element]> {
        match self {
            Element::Tuple(v) => Some(v),
            _ => None,
        }
    }

    pub fn component(&self, i: usize) -> Option<&Element> {
        self.components().and_then(|c| c.get(i))
    }

    /// Follows a path of tuple indices.
    pub fn at_path(&self, path: &[usize]) -> Option<&Element> {
        path.iter().try_fold(self, |e, &i| e.component(i))
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Element::Top)
    }

    fn rank(&self) -> u8 {
        match self {
            Element::Real(_) => 0,
            Element::Top => 1,
            Element::Label(_) => 2,
            Element::Tuple(_) => 3,
        }
    }

    /// JSON encoding: reals as numbers, top as `"top"`, labels as strings,
    /// tuples as arrays. Decoding needs the poset, see
    /// [`Poset::element_from_json`].
    pub fn to_json(&self) -> Value {
        match self {
            Element::Real(x) => serde_json::json!(x),
            Element::Top => Value::String("top".into()),
            Element::Label(s) => Value::String(s.clone()),
            Element::Tuple(v) => Value::Array(v.iter().map(Element::to_json).collect()),
        }
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Element {}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical total order used for sorting and deduplication. This is not the
/// poset order.
impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Element::Real(a), Element::Real(b)) => a.total_cmp(b),
            (Element::Label(a), Element::Label(b)) => a.cmp(b),
            (Element::Tuple(a), Element::Tuple(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Element {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Element::Real(x) => x.to_bits().hash(state),
            Element::Top => {}
            Element::Label(s) => s.hash(state),
            Element::Tuple(v) => v.hash(state),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Real(x) => write!(f, "{x}"),
            Element::Top => write!(f, "top"),
            Element::Label(s) => write!(f, "{s}"),
            Element::Tuple(v) => {
                write!(f, "(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Finite poset stored as the reflexive-transitive closure of its order.
#[derive(Debug, Clone)]
pub struct DiscretePoset {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    leq: Vec<Vec<bool>>,
}

impl DiscretePoset {
    fn new(labels: Vec<String>, pairs: &[(String, String)]) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(PosetError::InvalidDiscrete(format!("duplicate label {l}")));
            }
        }
        let n = labels.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in pairs {
            let ia = *index
                .get(a)
                .ok_or_else(|| PosetError::InvalidDiscrete(format!("unknown label {a}")))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| PosetError::InvalidDiscrete(format!("unknown label {b}")))?;
            leq[ia][ib] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i][j] && leq[j][i] {
                    return Err(PosetError::InvalidDiscrete(format!(
                        "order is not antisymmetric: {} and {} are mutually below each other",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(DiscretePoset { labels, index, leq })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// `a ⪯ b` by label index.
    pub fn leq_index(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    /// Strict order pairs of the closure, in label order.
    pub fn order_pairs(&self) -> Vec<(String, String)> {
        let n = self.labels.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.leq[i][j] {
                    out.push((self.labels[i].clone(), self.labels[j].clone()));
                }
            }
        }
        out
    }
}

impl PartialEq for DiscretePoset {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.leq == other.leq
    }
}

#[derive(Debug, PartialEq)]
pub enum PosetKind {
    /// `ℝ≥0 ∪ {⊤}`, totally ordered. The unit is metadata only.
    NonNegReal { unit: String },
    Discrete(DiscretePoset),
    Product(Vec<Poset>),
    Opposite(Poset),
}

/// A poset. Cheap to clone and safe to share across threads.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "PosetRepr", into = "PosetRepr")]
pub struct Poset(Arc<PosetKind>);

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            PosetKind::NonNegReal { unit } => write!(f, "R[{unit}]"),
            PosetKind::Discrete(d) => write!(f, "{{{}}}", d.labels.join(",")),
            PosetKind::Product(ps) => {
                write!(f, "(")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, " x ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            PosetKind::Opposite(p) => write!(f, "op({p})"),
        }
    }
}

impl Poset {
    pub fn nonneg_real(unit: impl Into<String>) -> Self {
        Poset(Arc::new(PosetKind::NonNegReal { unit: unit.into() }))
    }

    /// Builds a finite poset from labels and `a ⪯ b` pairs; the pairs are
    /// closed reflexively and transitively and must be antisymmetric.
    pub fn discrete<L, P>(labels: L, pairs: P) -> Result<Self>
    where
        L: IntoIterator,
        L::Item: Into<String>,
        P: IntoIterator<Item = (L::Item, L::Item)>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let pairs: Vec<(String, String)> =
            pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        Ok(Poset(Arc::new(PosetKind::Discrete(DiscretePoset::new(labels, &pairs)?))))
    }

    pub fn product(components: impl IntoIterator<Item = Poset>) -> Self {
        Poset(Arc::new(PosetKind::Product(components.into_iter().collect())))
    }

    pub fn pair(a: Poset, b: Poset) -> Self {
        Poset::product([a, b])
    }

    pub fn opposite(inner: Poset) -> Self {
        Poset(Arc::new(PosetKind::Opposite(inner)))
    }

    pub fn kind(&self) -> &PosetKind {
        &self.0
    }

    pub fn components(&self) -> Option<&[Poset]> {
        match self.kind() {
            PosetKind::Product(ps) => Some(ps),
            _ => None,
        }
    }

    pub fn component(&self, i: usize) -> Option<&Poset> {
        self.components().and_then(|c| c.get(i))
    }

    pub fn unit(&self) -> Option<&str> {
        match self.kind() {
            PosetKind::NonNegReal { unit } => Some(unit),
            _ => None,
        }
    }

    pub fn contains(&self, e: &Element) -> bool {
        match (self.kind(), e) {
            (PosetKind::NonNegReal { .. }, Element::Real(x)) => x.is_finite() && *x >= 0.0,
            (PosetKind::NonNegReal { .. }, Element::Top) => true,
            (PosetKind::Discrete(d), Element::Label(l)) => d.index.contains_key(l),
            (PosetKind::Product(ps), Element::Tuple(es)) => {
                ps.len() == es.len() && ps.iter().zip(es.iter()).all(|(p, e)| p.contains(e))
            }
            (PosetKind::Opposite(p), e) => p.contains(e),
            _ => false,
        }
    }

    pub fn check(&self, e: &Element) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(PosetError::DomainMismatch { element: e.to_string(), poset: self.to_string() })
        }
    }

    /// Decides `a ⪯ b`.
    pub fn leq(&self, a: &Element, b: &Element) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.leq_unchecked(a, b))
    }

    /// Decides `a ⪯ b` assuming both elements belong to this poset. Elements
    /// of the wrong shape compare as `false`.
    pub fn leq_unchecked(&self, a: &Element, b: &Element) -> bool {
        match self.kind() {
            PosetKind::NonNegReal { .. } => match (a, b) {
                (_, Element::Top) => true,
                (Element::Top, _) => false,
                (Element::Real(x), Element::Real(y)) => x <= y,
                _ => false,
            },
            PosetKind::Discrete(d) => match (a, b) {
                (Element::Label(x), Element::Label(y)) => {
                    match (d.index.get(x), d.index.get(y)) {
                        (Some(&i), Some(&j)) => d.leq[i][j],
                        _ => false,
                    }
                }
                _ => false,
            },
            PosetKind::Product(ps) => match (a, b) {
                (Element::Tuple(xs), Element::Tuple(ys)) => {
                    xs.len() == ps.len()
                        && ys.len() == ps.len()
                        && ps.iter().zip(xs.iter().zip(ys.iter())).all(|(p, (x, y))| p.leq_unchecked(x, y))
                }
                _ => false,
            },
            PosetKind::Opposite(p) => p.leq_unchecked(b, a),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self.kind() {
            PosetKind::NonNegReal { .. } => false,
            PosetKind::Discrete(_) => true,
            PosetKind::Product(ps) => ps.iter().all(Poset::is_finite),
            PosetKind::Opposite(p) => p.is_finite(),
        }
    }

    /// All elements of a finite poset, each exactly once.
    pub fn enumerate(&self) -> Result<Vec<Element>> {
        match self.kind() {
            PosetKind::NonNegReal { .. } => Err(PosetError::Infinite(self.to_string())),
            PosetKind::Discrete(d) => Ok(d.labels.iter().cloned().map(Element::Label).collect()),
            PosetKind::Opposite(p) => p.enumerate(),
            PosetKind::Product(ps) => {
                let mut acc: Vec<Vec<Element>> = vec![Vec::new()];
                for p in ps {
                    let elems = p.enumerate()?;
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            elems.iter().map(move |e| {
                                let mut t = prefix.clone();
                                t.push(e.clone());
                                t
                            })
                        })
                        .collect();
                }
                Ok(acc.into_iter().map(|t| Element::Tuple(t.into())).collect())
            }
        }
    }

    /// The least element, if one exists.
    pub fn bottom(&self) -> Option<Element> {
        match self.kind() {
            PosetKind::NonNegReal { .. } => Some(Element::Real(0.0)),
            PosetKind::Discrete(d) => (0..d.labels.len())
                .find(|&i| (0..d.labels.len()).all(|j| d.leq[i][j]))
                .map(|i| Element::Label(d.labels[i].clone())),
            PosetKind::Product(ps) => ps.iter().map(Poset::bottom).collect::<Option<Arc<[_]>>>().map(Element::Tuple),
            PosetKind::Opposite(p) => p.top(),
        }
    }

    /// The greatest element, if one exists.
    pub fn top(&self) -> Option<Element> {
        match self.kind() {
            PosetKind::NonNegReal { .. } => Some(Element::Top),
            PosetKind::Discrete(d) => (0..d.labels.len())
                .find(|&i| (0..d.labels.len()).all(|j| d.leq[j][i]))
                .map(|i| Element::Label(d.labels[i].clone())),
            PosetKind::Product(ps) => ps.iter().map(Poset::top).collect::<Option<Arc<[_]>>>().map(Element::Tuple),
            PosetKind::Opposite(p) => p.bottom(),
        }
    }

    /// Minimal elements of `↑a ∩ ↑b`, i.e. the minimal common upper bounds.
    /// On chains and products of chains this is the join; on finite
    /// components it is found by enumeration.
    pub fn min_upper_bounds(&self, a: &Element, b: &Element) -> Vec<Element> {
        self.bounds(a, b, true)
    }

    /// Maximal elements of `↓a ∩ ↓b`.
    pub fn max_lower_bounds(&self, a: &Element, b: &Element) -> Vec<Element> {
        self.bounds(a, b, false)
    }

    fn bounds(&self, a: &Element, b: &Element, upper: bool) -> Vec<Element> {
        match self.kind() {
            PosetKind::NonNegReal { .. } => {
                let pick_b = if upper { self.leq_unchecked(a, b) } else { self.leq_unchecked(b, a) };
                vec![if pick_b { b.clone() } else { a.clone() }]
            }
            PosetKind::Discrete(d) => {
                let (Some(ia), Some(ib)) = (
                    a.as_label().and_then(|l| d.index_of(l)),
                    b.as_label().and_then(|l| d.index_of(l)),
                ) else {
                    return Vec::new();
                };
                let n = d.labels.len();
                let common: Vec<usize> = (0..n)
                    .filter(|&x| {
                        if upper {
                            d.leq[ia][x] && d.leq[ib][x]
                        } else {
                            d.leq[x][ia] && d.leq[x][ib]
                        }
                    })
                    .collect();
                common
                    .iter()
                    .filter(|&&x| {
                        !common.iter().any(|&y| y != x && if upper { d.leq[y][x] } else { d.leq[x][y] })
                    })
                    .map(|&x| Element::Label(d.labels[x].clone()))
                    .collect()
            }
            PosetKind::Product(ps) => {
                let (Some(xs), Some(ys)) = (a.components(), b.components()) else {
                    return Vec::new();
                };
                let mut acc: Vec<Vec<Element>> = vec![Vec::new()];
                for (p, (x, y)) in ps.iter().zip(xs.iter().zip(ys)) {
                    let opts = p.bounds(x, y, upper);
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            opts.iter().map(move |o| {
                                let mut t = prefix.clone();
                                t.push(o.clone());
                                t
                            })
                        })
                        .collect();
                }
                acc.into_iter().map(|t| Element::Tuple(t.into())).collect()
            }
            PosetKind::Opposite(p) => p.bounds(a, b, !upper),
        }
    }

    /// Decodes an element from its JSON encoding, using this poset to
    /// disambiguate strings (`"top"` on the reals, labels on finite posets).
    pub fn element_from_json(&self, v: &Value) -> Result<Element> {
        let e = match (self.kind(), v) {
            (PosetKind::Opposite(p), v) => return p.element_from_json(v),
            (PosetKind::NonNegReal { .. }, Value::Number(n)) => {
                Element::real(n.as_f64().ok_or_else(|| PosetError::Decode(n.to_string()))?)
            }
            (PosetKind::NonNegReal { .. }, Value::String(s)) if s == "top" => Element::Top,
            (PosetKind::Discrete(_), Value::String(s)) => Element::Label(s.clone()),
            (PosetKind::Product(ps), Value::Array(items)) if items.len() == ps.len() => Element::Tuple(
                ps.iter().zip(items).map(|(p, v)| p.element_from_json(v)).collect::<Result<_>>()?,
            ),
            _ => return Err(PosetError::Decode(format!("{v} is not an element of {self}"))),
        };
        self.check(&e)?;
        Ok(e)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PosetRepr {
    NonnegReal { unit: String },
    Discrete { elements: Vec<String>, order: Vec<(String, String)> },
    Product { components: Vec<Poset> },
    Opposite { inner: Poset },
}

impl TryFrom<PosetRepr> for Poset {
    type Error = PosetError;

    fn try_from(r: PosetRepr) -> Result<Self> {
        Ok(match r {
            PosetRepr::NonnegReal { unit } => Poset::nonneg_real(unit),
            PosetRepr::Discrete { elements, order } => Poset::discrete(elements, order)?,
            PosetRepr::Product { components } => Poset::product(components),
            PosetRepr::Opposite { inner } => Poset::opposite(inner),
        })
    }
}

impl From<Poset> for PosetRepr {
    fn from(p: Poset) -> Self {
        match p.kind() {
            PosetKind::NonNegReal { unit } => PosetRepr::NonnegReal { unit: unit.clone() },
            PosetKind::Discrete(d) => {
                PosetRepr::Discrete { elements: d.labels.clone(), order: d.order_pairs() }
            }
            PosetKind::Product(ps) => PosetRepr::Product { components: ps.clone() },
            PosetKind::Opposite(inner) => PosetRepr::Opposite { inner: inner.clone() },
        }
    }
}
