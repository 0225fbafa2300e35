use std::fmt::Write as _;

use super::{ArrowId, Quiver, QuiverError, VertexId};

/// A path `a_1 * ... * a_l` (composition order, `a_l` applied first), or the
/// trivial path at a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    source: VertexId,
    target: VertexId,
    arrows: Vec<ArrowId>,
}

impl Path {
    pub fn trivial(v: VertexId) -> Self {
        Path {
            source: v,
            target: v,
            arrows: Vec::new(),
        }
    }

    pub fn new(q: &Quiver, arrows: Vec<ArrowId>) -> Result<Self, QuiverError> {
        let (first, last) = match (arrows.first(), arrows.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(QuiverError::EmptyPath),
        };
        for w in arrows.windows(2) {
            if q.arrow(w[0]).source != q.arrow(w[1]).target {
                return Err(QuiverError::NotComposable {
                    left: q.arrow(w[0]).name.clone(),
                    right: q.arrow(w[1]).name.clone(),
                });
            }
        }
        Ok(Path {
            source: q.arrow(last).source,
            target: q.arrow(first).target,
            arrows,
        })
    }

    /// Builds a path from `(arrow, power)` factors.
    pub fn from_factors(q: &Quiver, factors: &[(ArrowId, usize)]) -> Result<Self, QuiverError> {
        let arrows = factors
            .iter()
            .flat_map(|&(a, k)| std::iter::repeat_n(a, k))
            .collect();
        Path::new(q, arrows)
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn target(&self) -> VertexId {
        self.target
    }

    pub fn arrows(&self) -> &[ArrowId] {
        &self.arrows
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.arrows.is_empty()
    }

    /// `self * right`: first `right`, then `self`.
    pub fn compose(&self, right: &Path) -> Option<Path> {
        if self.source != right.target {
            return None;
        }
        let mut arrows = self.arrows.clone();
        arrows.extend_from_slice(&right.arrows);
        Some(Path {
            source: right.source,
            target: self.target,
            arrows,
        })
    }

    /// Runs of consecutive equal arrows as `(arrow, power)`.
    pub fn factors(&self) -> Vec<(ArrowId, usize)> {
        let mut out: Vec<(ArrowId, usize)> = Vec::new();
        for &a in &self.arrows {
            match out.last_mut() {
                Some((b, k)) if *b == a => *k += 1,
                _ => out.push((a, 1)),
            }
        }
        out
    }

    /// Longest run of `a` inside the path.
    pub fn max_run(&self, a: ArrowId) -> usize {
        self.factors()
            .into_iter()
            .filter(|&(b, _)| b == a)
            .map(|(_, k)| k)
            .max()
            .unwrap_or(0)
    }

    /// `e0^2*a1*e1` style rendering; trivial paths render as `e_<vertex>`.
    pub fn display(&self, q: &Quiver) -> String {
        if self.arrows.is_empty() {
            return format!("e_{}", q.vertex_name(self.source));
        }
        let mut s = String::new();
        for (i, (a, k)) in self.factors().into_iter().enumerate() {
            if i > 0 {
                s.push('*');
            }
            s.push_str(&q.arrow(a).name);
            if k > 1 {
                let _ = write!(s, "^{k}");
            }
        }
        s
    }
}
