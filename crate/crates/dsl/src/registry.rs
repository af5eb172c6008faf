use std::collections::BTreeMap;
use std::fmt;

use codp_core::uncertainty::{MarkovKernel, ParameterizedDP};
use codp_core::DesignProblem;

use crate::ast::{Domain, ParamDecl};
use crate::error::{DslError, Result};

/// A parameter value handed to a parameter box.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Label(String),
    Real(f64),
}

impl ParamValue {
    pub fn as_label(&self) -> Option<&str> {
        match self {
            ParamValue::Label(l) => Some(l),
            ParamValue::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            ParamValue::Real(x) => Some(*x),
            ParamValue::Label(_) => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Label(l) => write!(f, "{l}"),
            ParamValue::Real(x) => write!(f, "{x}"),
        }
    }
}

impl ParamDecl {
    /// Reads a command-line value for this box, checking its domain.
    pub fn parse_value(&self, text: &str) -> Result<ParamValue> {
        match &self.domain {
            Domain::Labels { labels } => {
                if labels.iter().any(|l| l == text) {
                    Ok(ParamValue::Label(text.to_string()))
                } else {
                    Err(DslError::Usage(format!(
                        "parameter {} must be one of {{{}}}, got '{text}'",
                        self.name,
                        labels.join(", ")
                    )))
                }
            }
            Domain::Interval { lo, hi } => match text.parse::<f64>() {
                Ok(x) if x >= *lo && x <= *hi => Ok(ParamValue::Real(x)),
                _ => Err(DslError::Usage(format!("parameter {} must be a number in [{lo}, {hi}], got '{text}'", self.name))),
            },
        }
    }

    /// The value used when none is given: the only label of a one-label domain.
    pub fn default_value(&self) -> Option<ParamValue> {
        match &self.domain {
            Domain::Labels { labels } if labels.len() == 1 => Some(ParamValue::Label(labels[0].clone())),
            _ => None,
        }
    }

    pub fn contains(&self, v: &ParamValue) -> bool {
        match (&self.domain, v) {
            (Domain::Labels { labels }, ParamValue::Label(l)) => labels.contains(l),
            (Domain::Interval { lo, hi }, ParamValue::Real(x)) => x >= lo && x <= hi,
            _ => false,
        }
    }
}

#[derive(Clone)]
pub enum Entry {
    Fixed(DesignProblem),
    Function(ParameterizedDP<ParamValue>),
    Kernel(MarkovKernel<ParamValue, DesignProblem>),
}

impl Entry {
    pub fn kind(&self) -> &'static str {
        match self {
            Entry::Fixed(_) => "fixed",
            Entry::Function(_) => "fn",
            Entry::Kernel(_) => "kernel",
        }
    }
}

/// Named design problems and families that diagrams bind to.
#[derive(Clone, Default)]
pub struct Registry {
    entries: BTreeMap<String, Entry>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, entry: Entry) -> &mut Self {
        self.entries.insert(key.into(), entry);
        self
    }

    pub fn fixed(&mut self, key: impl Into<String>, dp: DesignProblem) -> &mut Self {
        self.insert(key, Entry::Fixed(dp))
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub(crate) fn fixed_dp(&self, key: &str) -> Result<DesignProblem> {
        match self.entries.get(key) {
            Some(Entry::Fixed(d)) => Ok(d.clone()),
            Some(other) => Err(DslError::Type(format!(
                "'{key}' is a {} family; bind it through a parameter box",
                other.kind()
            ))),
            None => Err(DslError::Type(format!("unknown registry entry '{key}'"))),
        }
    }
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter().map(|(k, v)| (k, v.kind()))).finish()
    }
}
