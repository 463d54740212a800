//! Model terms and model specifications.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// One regression term. Variable ids are column indices of the dataset.
///
/// The derived ordering (mains, then squares, then interactions, each by id)
/// is the canonical term order used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Main { var: usize },
    Square { var: usize },
    /// Linear-by-linear interaction, `a < b`.
    Interaction { a: usize, b: usize },
}

impl Term {
    pub fn main(var: usize) -> Self {
        Term::Main { var }
    }

    pub fn square(var: usize) -> Self {
        Term::Square { var }
    }

    /// Interaction of two distinct variables, stored with the smaller id first.
    pub fn interaction(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "an interaction needs two distinct variables");
        Term::Interaction { a: a.min(b), b: a.max(b) }
    }

    /// Variables the term is built from.
    pub fn vars(&self) -> Vec<usize> {
        match *self {
            Term::Main { var } | Term::Square { var } => vec![var],
            Term::Interaction { a, b } => vec![a, b],
        }
    }

    pub fn value(&self, x: &DMatrix<f64>, row: usize) -> f64 {
        match *self {
            Term::Main { var } => x[(row, var)],
            Term::Square { var } => x[(row, var)] * x[(row, var)],
            Term::Interaction { a, b } => x[(row, a)] * x[(row, b)],
        }
    }

    /// Human-readable label using column names: `x3`, `x3^2`, `x3:x7`.
    pub fn label(&self, names: &[String]) -> String {
        match *self {
            Term::Main { var } => names[var].clone(),
            Term::Square { var } => format!("{}^2", names[var]),
            Term::Interaction { a, b } => format!("{}:{}", names[a], names[b]),
        }
    }

    /// Inverse of [`Term::label`].
    pub fn parse_label(label: &str, names: &[String]) -> Option<Term> {
        let lookup = |s: &str| names.iter().position(|n| n == s);
        if let Some(base) = label.strip_suffix("^2") {
            return lookup(base).map(Term::square);
        }
        if let Some((a, b)) = label.split_once(':') {
            let (a, b) = (lookup(a)?, lookup(b)?);
            return (a != b).then(|| Term::interaction(a, b));
        }
        lookup(label).map(Term::main)
    }
}

impl fmt::Display for Term {
    /// Label with 1-based `x` names, independent of any dataset.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Term::Main { var } => write!(f, "x{}", var + 1),
            Term::Square { var } => write!(f, "x{}^2", var + 1),
            Term::Interaction { a, b } => write!(f, "x{}:x{}", a + 1, b + 1),
        }
    }
}

/// A model: sets of main effects, squared terms and interactions.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub mains: BTreeSet<usize>,
    pub squares: BTreeSet<usize>,
    pub interactions: BTreeSet<(usize, usize)>,
}

impl ModelSpec {
    pub fn from_mains(vars: impl IntoIterator<Item = usize>) -> Self {
        Self { mains: vars.into_iter().collect(), ..Self::default() }
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Self {
        let mut m = Self::default();
        for t in terms {
            m.insert(*t);
        }
        m
    }

    pub fn insert(&mut self, term: Term) -> bool {
        match term {
            Term::Main { var } => self.mains.insert(var),
            Term::Square { var } => self.squares.insert(var),
            Term::Interaction { a, b } => self.interactions.insert((a.min(b), a.max(b))),
        }
    }

    pub fn contains(&self, term: &Term) -> bool {
        match *term {
            Term::Main { var } => self.mains.contains(&var),
            Term::Square { var } => self.squares.contains(&var),
            Term::Interaction { a, b } => self.interactions.contains(&(a, b)),
        }
    }

    pub fn size(&self) -> usize {
        self.mains.len() + self.squares.len() + self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> Vec<Term> {
        self.mains
            .iter()
            .map(|&v| Term::main(v))
            .chain(self.squares.iter().map(|&v| Term::square(v)))
            .chain(self.interactions.iter().map(|&(a, b)| Term::Interaction { a, b }))
            .collect()
    }

    /// Whether every term of `self` is a term of `other`.
    pub fn is_subset(&self, other: &ModelSpec) -> bool {
        self.mains.is_subset(&other.mains)
            && self.squares.is_subset(&other.squares)
            && self.interactions.is_subset(&other.interactions)
    }

    /// Add the main effects of every interaction. Squared terms are left as
    /// they are.
    pub fn closed(&self) -> ModelSpec {
        let mut out = self.clone();
        for &(a, b) in &self.interactions {
            out.mains.insert(a);
            out.mains.insert(b);
        }
        out
    }

    /// Design matrix (no intercept) with one column per term, canonical order.
    pub fn design(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        terms_design(&self.terms(), x)
    }

    pub fn labels(&self, names: &[String]) -> Vec<String> {
        self.terms().iter().map(|t| t.label(names)).collect()
    }
}

/// Design matrix with one column per term, in the given order.
pub fn terms_design(terms: &[Term], x: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), terms.len(), |i, j| terms[j].value(x, i))
}
