//! Upper sets represented by their minimal elements.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::poset::{Element, Poset, PosetError, Result};

/// A finite set of pairwise incomparable elements of `poset`, standing for
/// the upper set it generates. The empty antichain is the empty upper set.
///
/// Elements are kept sorted in the canonical [`Element`] order, so two
/// antichains describe the same upper set iff they are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct Antichain {
    poset: Poset,
    elements: Vec<Element>,
}

/// Keeps the minimal items of `items` under `poset`, carrying a payload along.
/// When several items share an element, the first one wins. The result is
/// sorted by element.
pub fn minimize_with<T>(poset: &Poset, mut items: Vec<(Element, T)>) -> Vec<(Element, T)> {
    items.sort_by(|a, b| a.0.cmp(&b.0));
    items.dedup_by(|later, earlier| later.0 == earlier.0);
    let keep: Vec<bool> = items
        .iter()
        .enumerate()
        .map(|(i, (x, _))| {
            !items.iter().enumerate().any(|(j, (y, _))| j != i && poset.leq_unchecked(y, x))
        })
        .collect();
    items.into_iter().zip(keep).filter_map(|(it, k)| k.then_some(it)).collect()
}

impl Antichain {
    pub fn empty(poset: Poset) -> Self {
        Antichain { poset, elements: Vec::new() }
    }

    pub fn singleton(poset: Poset, e: Element) -> Result<Self> {
        poset.check(&e)?;
        Ok(Antichain { poset, elements: vec![e] })
    }

    /// The minimal elements of `xs`; `↑minimals(xs) = ↑xs`.
    pub fn minimals(poset: Poset, xs: impl IntoIterator<Item = Element>) -> Result<Self> {
        let xs: Vec<Element> = xs.into_iter().collect();
        for x in &xs {
            poset.check(x)?;
        }
        Ok(Self::minimals_unchecked(poset, xs))
    }

    pub(crate) fn minimals_unchecked(poset: Poset, xs: Vec<Element>) -> Self {
        let elements = minimize_with(&poset, xs.into_iter().map(|x| (x, ())).collect())
            .into_iter()
            .map(|(x, _)| x)
            .collect();
        Antichain { poset, elements }
    }

    /// Wraps an already-minimal, sorted element list.
    pub(crate) fn from_sorted_minimal(poset: Poset, elements: Vec<Element>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Antichain { poset, elements }
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Element> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Element> {
        self.elements.iter()
    }

    /// Whether `x` lies in the upper set, i.e. some element is `⪯ x`.
    pub fn upper_set_contains(&self, x: &Element) -> Result<bool> {
        self.poset.check(x)?;
        Ok(self.elements.iter().any(|a| self.poset.leq_unchecked(a, x)))
    }

    fn same_carrier(&self, other: &Antichain) -> Result<()> {
        if self.poset == other.poset {
            Ok(())
        } else {
            Err(PosetError::CarrierMismatch {
                left: self.poset.to_string(),
                right: other.poset.to_string(),
            })
        }
    }

    /// `↑self ∪ ↑other`.
    pub fn upper_union(&self, other: &Antichain) -> Result<Self> {
        self.same_carrier(other)?;
        let all = self.elements.iter().chain(&other.elements).cloned().collect();
        Ok(Self::minimals_unchecked(self.poset.clone(), all))
    }

    /// `↑self ∩ ↑other`, generated by the minimal common upper bounds of
    /// every pair of generators.
    pub fn upper_intersection(&self, other: &Antichain) -> Result<Self> {
        self.same_carrier(other)?;
        let mut all = Vec::new();
        for a in &self.elements {
            for b in &other.elements {
                all.extend(self.poset.min_upper_bounds(a, b));
            }
        }
        Ok(Self::minimals_unchecked(self.poset.clone(), all))
    }

    /// `↑self ⊆ ↑other`: every element of `self` dominates one of `other`.
    pub fn is_upper_subset_of(&self, other: &Antichain) -> Result<bool> {
        self.same_carrier(other)?;
        Ok(self
            .elements
            .iter()
            .all(|a| other.elements.iter().any(|b| self.poset.leq_unchecked(b, a))))
    }

    /// `{"poset": ..., "elements": [...]}`.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "poset": self.poset,
            "elements": self.elements.iter().map(Element::to_json).collect::<Vec<_>>(),
        })
    }
}

impl Serialize for Antichain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Antichain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            poset: Poset,
            elements: Vec<Value>,
        }
        let raw = Raw::deserialize(d)?;
        let elems = raw
            .elements
            .iter()
            .map(|v| raw.poset.element_from_json(v))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let ac = Antichain::minimals(raw.poset, elems).map_err(serde::de::Error::custom)?;
        Ok(ac)
    }
}
