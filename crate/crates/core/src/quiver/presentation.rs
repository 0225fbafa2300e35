use std::fmt::Write as _;

use super::{analysis, ArrowId, Combination, Path, Quiver, QuiverError, Relation, VertexId};

/// A quiver with one nilpotent loop (or none) per vertex and a list of mixed
/// relations in the monomial basis.
///
/// A vertex without a loop has order 1; its loop matrix is forced to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundQuiverPresentation {
    quiver: Quiver,
    orders: Vec<u32>,
    relations: Vec<Relation>,
    provenance: Vec<String>,
}

impl BoundQuiverPresentation {
    /// `orders[v]` is the nilpotency order of the loop at `v` (1 if none).
    pub fn new(
        quiver: Quiver,
        orders: Vec<u32>,
        relations: Vec<Relation>,
    ) -> Result<Self, QuiverError> {
        assert_eq!(orders.len(), quiver.vertex_count(), "one order per vertex");
        quiver.check_unique_loops()?;
        for v in quiver.vertices() {
            match quiver.loop_at(v) {
                Some(l) if orders[v.0] < 2 => {
                    return Err(QuiverError::BadLoopOrder {
                        arrow: quiver.arrow(l).name.clone(),
                        order: orders[v.0],
                    })
                }
                None if orders[v.0] != 1 => {
                    return Err(QuiverError::BadLoopOrder {
                        arrow: format!("<none at {}>", quiver.vertex_name(v)),
                        order: orders[v.0],
                    })
                }
                _ => {}
            }
        }
        let pres = BoundQuiverPresentation {
            quiver,
            orders,
            relations,
            provenance: Vec::new(),
        };
        for r in &pres.relations {
            pres.check_relation(r)?;
        }
        Ok(pres)
    }

    fn check_relation(&self, r: &Relation) -> Result<(), QuiverError> {
        if analysis::relation_degree(&self.quiver, r) == 0 && !r.is_zero() {
            return Err(QuiverError::LoopOnlyRelation(r.display(&self.quiver)));
        }
        for (_, p) in r.terms() {
            if let Some((l, m)) = self.forbidden_run(p) {
                return Err(QuiverError::ForbiddenSubword {
                    path: p.display(&self.quiver),
                    loop_name: self.quiver.arrow(l).name.clone(),
                    order: m,
                });
            }
        }
        Ok(())
    }

    /// The first loop whose power in `p` reaches its nilpotency order.
    pub fn forbidden_run(&self, p: &Path) -> Option<(ArrowId, u32)> {
        p.factors().into_iter().find_map(|(a, k)| {
            let arrow = self.quiver.arrow(a);
            let m = self.orders[arrow.source.0];
            (arrow.is_loop() && k as u32 >= m).then_some((a, m))
        })
    }

    /// Drops every path that vanishes in the monomial algebra.
    pub fn truncate(&self, c: &mut Combination) {
        c.retain(|p| self.forbidden_run(p).is_none());
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn order(&self, v: VertexId) -> u32 {
        self.orders[v.0]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub(crate) fn with_relations(&self, relations: Vec<Relation>, note: String) -> Self {
        let mut next = self.clone();
        next.relations = relations;
        next.provenance.push(note);
        next
    }

    /// Renders the presentation in the line-oriented file format.
    pub fn to_text(&self) -> String {
        let q = &self.quiver;
        let mut s = String::new();
        for v in q.vertices() {
            let _ = writeln!(s, "vertex {}", q.vertex_name(v));
        }
        for a in q.arrow_ids() {
            let arrow = q.arrow(a);
            if arrow.is_loop() {
                let _ = writeln!(
                    s,
                    "loop {} {} order {}",
                    arrow.name,
                    q.vertex_name(arrow.source),
                    self.orders[arrow.source.0]
                );
            }
        }
        for a in q.arrow_ids() {
            let arrow = q.arrow(a);
            if !arrow.is_loop() {
                let _ = writeln!(
                    s,
                    "arrow {} {} -> {}",
                    arrow.name,
                    q.vertex_name(arrow.source),
                    q.vertex_name(arrow.target)
                );
            }
        }
        for r in &self.relations {
            let _ = writeln!(s, "relation {}", r.display(q));
        }
        s
    }
}
