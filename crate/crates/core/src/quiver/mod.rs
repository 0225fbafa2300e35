//! Quivers, paths, relations and bound quiver presentations.
//!
//! Paths are written left to right in composition order: `a*b` means "first
//! `b`, then `a`", so `s(a*b) = s(b)` and `t(a*b) = t(a)`.

mod analysis;
mod parse;
mod path;
mod presentation;
mod relation;
mod substitution;

pub use analysis::{
    check_cycle_conditions, detect_shortcuts, path_degree, relation_degree, CycleDiagnostic,
};
pub use parse::{parse_presentation, parse_relation_expr, ParseError};
pub use path::Path;
pub use presentation::BoundQuiverPresentation;
pub use relation::{Combination, Relation};
pub use substitution::Substitution;

use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrowId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: VertexId,
    pub target: VertexId,
}

impl Arrow {
    pub fn is_loop(&self) -> bool {
        self.source == self.target
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuiverError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate arrow `{0}`")]
    DuplicateArrow(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("arrows `{left}` and `{right}` do not compose")]
    NotComposable { left: String, right: String },
    #[error("empty path")]
    EmptyPath,
    #[error("relation terms must have length at least 2, got `{0}`")]
    ShortPath(String),
    #[error("relation terms have different endpoints")]
    EndpointMismatch,
    #[error("vertex `{0}` carries more than one loop")]
    TwoLoops(String),
    #[error("loop `{arrow}` needs nilpotency order at least 2, got {order}")]
    BadLoopOrder { arrow: String, order: u32 },
    #[error("path `{path}` contains the forbidden power {loop_name}^{order}")]
    ForbiddenSubword {
        path: String,
        loop_name: String,
        order: u32,
    },
    #[error("relation `{0}` has degree 0; loop relations are given by nilpotency orders")]
    LoopOnlyRelation(String),
    #[error("substitution for `{0}` is not invertible")]
    NonInvertibleSubstitution(String),
}

/// Finite quiver. Vertices and arrows are addressed by index; names are kept
/// for parsing and display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
}

impl Quiver {
    /// `arrows` are `(name, source, target)` triples naming declared vertices.
    pub fn new<S: AsRef<str>>(
        vertices: &[S],
        arrows: &[(S, S, S)],
    ) -> Result<Self, QuiverError> {
        let mut q = Quiver {
            vertices: Vec::new(),
            arrows: Vec::new(),
        };
        for v in vertices {
            q.add_vertex(v.as_ref())?;
        }
        for (name, s, t) in arrows {
            q.add_arrow(name.as_ref(), s.as_ref(), t.as_ref())?;
        }
        Ok(q)
    }

    pub(crate) fn empty() -> Self {
        Quiver {
            vertices: Vec::new(),
            arrows: Vec::new(),
        }
    }

    pub(crate) fn add_vertex(&mut self, name: &str) -> Result<VertexId, QuiverError> {
        if self.vertices.iter().any(|v| v == name) {
            return Err(QuiverError::DuplicateVertex(name.to_string()));
        }
        self.vertices.push(name.to_string());
        Ok(VertexId(self.vertices.len() - 1))
    }

    pub(crate) fn add_arrow(
        &mut self,
        name: &str,
        source: &str,
        target: &str,
    ) -> Result<ArrowId, QuiverError> {
        if self.arrows.iter().any(|a| a.name == name) {
            return Err(QuiverError::DuplicateArrow(name.to_string()));
        }
        let source = self.vertex_by_name(source)?;
        let target = self.vertex_by_name(target)?;
        self.arrows.push(Arrow {
            name: name.to_string(),
            source,
            target,
        });
        Ok(ArrowId(self.arrows.len() - 1))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn arrow_ids(&self) -> impl Iterator<Item = ArrowId> {
        (0..self.arrows.len()).map(ArrowId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn arrow(&self, a: ArrowId) -> &Arrow {
        &self.arrows[a.0]
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn vertex_by_name(&self, name: &str) -> Result<VertexId, QuiverError> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .map(VertexId)
            .ok_or_else(|| QuiverError::UnknownVertex(name.to_string()))
    }

    pub fn arrow_by_name(&self, name: &str) -> Result<ArrowId, QuiverError> {
        self.arrows
            .iter()
            .position(|a| a.name == name)
            .map(ArrowId)
            .ok_or_else(|| QuiverError::UnknownArrow(name.to_string()))
    }

    pub fn is_loop(&self, a: ArrowId) -> bool {
        self.arrows[a.0].is_loop()
    }

    pub fn loops_at(&self, v: VertexId) -> Vec<ArrowId> {
        self.arrow_ids()
            .filter(|&a| self.arrows[a.0].source == v && self.arrows[a.0].target == v)
            .collect()
    }

    pub fn loop_at(&self, v: VertexId) -> Option<ArrowId> {
        self.loops_at(v).into_iter().next()
    }

    /// Non-loop arrows in declaration order.
    pub fn proper_arrows(&self) -> Vec<ArrowId> {
        self.arrow_ids().filter(|&a| !self.is_loop(a)).collect()
    }

    pub(crate) fn check_unique_loops(&self) -> Result<(), QuiverError> {
        let mut seen = HashSet::new();
        for a in &self.arrows {
            if a.is_loop() && !seen.insert(a.source) {
                return Err(QuiverError::TwoLoops(self.vertices[a.source.0].clone()));
            }
        }
        Ok(())
    }
}
