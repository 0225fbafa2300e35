use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{Path, Quiver, QuiverError, VertexId};
use crate::linalg::Rat;

/// Finite linear combination of paths with exact rational coefficients.
/// Always normalized: no zero coefficients, each path at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Combination {
    terms: BTreeMap<Path, Rat>,
}

impl Combination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rat, Path)>) -> Self {
        let mut c = Self::new();
        for (k, p) in terms {
            c.add_term(k, p);
        }
        c
    }

    pub fn single(p: Path) -> Self {
        Self::from_terms([(Rat::one(), p)])
    }

    pub fn add_term(&mut self, k: Rat, p: Path) {
        if k.is_zero() {
            return;
        }
        match self.terms.entry(p) {
            Entry::Vacant(v) => {
                v.insert(k);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += k;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &Path)> {
        self.terms.iter().map(|(p, k)| (k, p))
    }

    pub fn coefficient(&self, p: &Path) -> Rat {
        self.terms.get(p).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Self::from_terms(self.terms().map(|(c, p)| (c * k, p.clone())))
    }

    pub fn add(&self, other: &Combination) -> Self {
        let mut out = self.clone();
        for (k, p) in other.terms() {
            out.add_term(k.clone(), p.clone());
        }
        out
    }

    /// `self * right`, dropping products of non-composable paths.
    pub fn compose(&self, right: &Combination) -> Self {
        let mut out = Self::new();
        for (a, p) in self.terms() {
            for (b, r) in right.terms() {
                if let Some(pr) = p.compose(r) {
                    out.add_term(a * b, pr);
                }
            }
        }
        out
    }

    pub fn retain(&mut self, keep: impl Fn(&Path) -> bool) {
        self.terms.retain(|p, _| keep(p));
    }

    pub fn display(&self, q: &Quiver) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (k, p)) in self.terms().enumerate() {
            let neg = k < &Rat::zero();
            let mag = if neg { -k.clone() } else { k.clone() };
            match (i, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            if !mag.is_one() {
                s.push_str(&mag.to_string());
                s.push('*');
            }
            s.push_str(&p.display(q));
        }
        s
    }
}

/// Nonzero linear combination of paths of length at least 2 sharing source
/// and target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    source: VertexId,
    target: VertexId,
    combo: Combination,
}

impl Relation {
    pub fn new(q: &Quiver, terms: Vec<(Rat, Path)>) -> Result<Self, QuiverError> {
        Self::from_combination(q, Combination::from_terms(terms))
    }

    pub fn from_combination(q: &Quiver, combo: Combination) -> Result<Self, QuiverError> {
        let mut ends = None;
        for (_, p) in combo.terms() {
            if p.len() < 2 {
                return Err(QuiverError::ShortPath(p.display(q)));
            }
            match ends {
                None => ends = Some((p.source(), p.target())),
                Some(e) if e != (p.source(), p.target()) => {
                    return Err(QuiverError::EndpointMismatch)
                }
                Some(_) => {}
            }
        }
        let (source, target) = ends.ok_or(QuiverError::EmptyPath)?;
        Ok(Relation {
            source,
            target,
            combo,
        })
    }

    /// The zero relation between two vertices.
    pub fn zero(source: VertexId, target: VertexId) -> Self {
        Relation {
            source,
            target,
            combo: Combination::new(),
        }
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn target(&self) -> VertexId {
        self.target
    }

    pub fn combination(&self) -> &Combination {
        &self.combo
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &Path)> {
        self.combo.terms()
    }

    pub fn is_zero(&self) -> bool {
        self.combo.is_zero()
    }

    /// Rescaled so that the first term (in canonical order) has coefficient 1.
    pub fn monic(&self) -> Relation {
        let lead = self.combo.terms().next().map(|(k, _)| k.clone());
        match lead {
            Some(k) => Relation {
                source: self.source,
                target: self.target,
                combo: self.combo.scale(&(Rat::one() / k)),
            },
            None => self.clone(),
        }
    }

    pub fn display(&self, q: &Quiver) -> String {
        self.combo.display(q)
    }
}
