use std::collections::BTreeSet;

use super::{ArrowId, Path, Quiver, Relation, VertexId};

/// Number of non-loop arrows in `p`.
pub fn path_degree(q: &Quiver, p: &Path) -> usize {
    p.arrows().iter().filter(|&&a| !q.is_loop(a)).count()
}

/// Minimum term degree; 0 for the zero relation.
pub fn relation_degree(q: &Quiver, r: &Relation) -> usize {
    r.terms()
        .map(|(_, p)| path_degree(q, p))
        .min()
        .unwrap_or(0)
}

/// Vertices reachable from `v` by one or more non-loop arrows.
fn reach_strict(q: &Quiver, v: VertexId) -> BTreeSet<VertexId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for a in q.arrows() {
            if !a.is_loop() && a.source == u && seen.insert(a.target) {
                stack.push(a.target);
            }
        }
    }
    seen
}

/// Non-loop arrows paralleled by a loop-free path of length at least 2.
pub fn detect_shortcuts(q: &Quiver) -> Vec<ArrowId> {
    q.arrow_ids()
        .filter(|&a| {
            let arrow = q.arrow(a);
            if arrow.is_loop() {
                return false;
            }
            let mid = reach_strict(q, arrow.source);
            q.arrows()
                .iter()
                .any(|b| !b.is_loop() && b.target == arrow.target && mid.contains(&b.source))
        })
        .collect()
}

/// Outcome of the oriented-cycle and loop-count checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleDiagnostic {
    /// An oriented cycle containing a non-loop arrow, as a path.
    pub offending_cycle: Option<Vec<ArrowId>>,
    /// Vertices with two or more loops.
    pub multi_loop_vertices: Vec<VertexId>,
}

impl CycleDiagnostic {
    pub fn passed(&self) -> bool {
        self.offending_cycle.is_none() && self.multi_loop_vertices.is_empty()
    }

    /// Degree of the offending cycle, if any.
    pub fn cycle_degree(&self) -> Option<usize> {
        self.offending_cycle.as_ref().map(Vec::len)
    }
}

/// Checks that every oriented cycle is a power of a loop and that each vertex
/// carries at most one loop.
pub fn check_cycle_conditions(q: &Quiver) -> CycleDiagnostic {
    let mut multi = Vec::new();
    for v in q.vertices() {
        if q.loops_at(v).len() > 1 {
            multi.push(v);
        }
    }
    CycleDiagnostic {
        offending_cycle: find_proper_cycle(q),
        multi_loop_vertices: multi,
    }
}

/// Depth-first search for a cycle in the graph of non-loop arrows. The cycle
/// is returned in composition order.
fn find_proper_cycle(q: &Quiver) -> Option<Vec<ArrowId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = q.vertex_count();
    let mut mark = vec![Mark::New; n];
    // stack of arrows along the current DFS path, in traversal order
    let mut trail: Vec<ArrowId> = Vec::new();

    fn visit(
        q: &Quiver,
        u: VertexId,
        mark: &mut [Mark],
        trail: &mut Vec<ArrowId>,
    ) -> Option<Vec<ArrowId>> {
        mark[u.0] = Mark::Active;
        for a in q.arrow_ids() {
            let arrow = q.arrow(a);
            if arrow.is_loop() || arrow.source != u {
                continue;
            }
            let w = arrow.target;
            match mark[w.0] {
                Mark::Active => {
                    let start = trail
                        .iter()
                        .position(|&b| q.arrow(b).source == w)
                        .unwrap_or(trail.len());
                    let mut cycle: Vec<ArrowId> = trail[start..].to_vec();
                    cycle.push(a);
                    cycle.reverse();
                    return Some(cycle);
                }
                Mark::New => {
                    trail.push(a);
                    if let Some(c) = visit(q, w, mark, trail) {
                        return Some(c);
                    }
                    trail.pop();
                }
                Mark::Done => {}
            }
        }
        mark[u.0] = Mark::Done;
        None
    }

    for v in q.vertices() {
        if mark[v.0] == Mark::New {
            if let Some(c) = visit(q, v, &mut mark, &mut trail) {
                return Some(c);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_h(h: usize) -> Quiver {
        let mut arrows = vec![("e0", "0", "0"), ("e1", "1", "1")];
        let names: Vec<String> = (1..=h).map(|i| format!("a{i}")).collect();
        for n in &names {
            arrows.push((n.as_str(), "1", "0"));
        }
        Quiver::new(&["0", "1"], &arrows).unwrap()
    }

    #[test]
    fn degrees() {
        let q = q_h(1);
        let e0 = q.arrow_by_name("e0").unwrap();
        let e1 = q.arrow_by_name("e1").unwrap();
        let a1 = q.arrow_by_name("a1").unwrap();
        let p = Path::new(&q, vec![e0, e0, a1, e1]).unwrap();
        assert_eq!(path_degree(&q, &p), 1);
        let p = Path::new(&q, vec![e0, e0, e0]).unwrap();
        assert_eq!(path_degree(&q, &p), 0);

        let q3 = Quiver::new(
            &["0", "1", "2"],
            &[("a1", "1", "0"), ("e1", "1", "1"), ("a2", "2", "1")],
        )
        .unwrap();
        let ids: Vec<_> = ["a1", "e1", "a2"]
            .iter()
            .map(|n| q3.arrow_by_name(n).unwrap())
            .collect();
        assert_eq!(path_degree(&q3, &Path::new(&q3, ids).unwrap()), 2);
    }

    #[test]
    fn shortcuts() {
        assert!(detect_shortcuts(&q_h(3)).is_empty());
        let chord = Quiver::new(
            &["0", "1", "2"],
            &[("b", "2", "1"), ("a", "1", "0"), ("c", "2", "0")],
        )
        .unwrap();
        assert_eq!(detect_shortcuts(&chord), vec![chord.arrow_by_name("c").unwrap()]);
        let line = Quiver::new(&["0", "1", "2"], &[("b", "2", "1"), ("a", "1", "0")]).unwrap();
        assert!(detect_shortcuts(&line).is_empty());
    }

    #[test]
    fn cycles() {
        assert!(check_cycle_conditions(&q_h(2)).passed());
        let two_cycle = Quiver::new(&["0", "1"], &[("a", "0", "1"), ("b", "1", "0")]).unwrap();
        let d = check_cycle_conditions(&two_cycle);
        assert!(!d.passed());
        assert_eq!(d.cycle_degree(), Some(2));
        let cyc = d.offending_cycle.unwrap();
        assert!(Path::new(&two_cycle, cyc).is_ok());

        let two_loops = Quiver::new(&["0"], &[("e", "0", "0"), ("f", "0", "0")]).unwrap();
        let d = check_cycle_conditions(&two_loops);
        assert!(!d.passed());
        assert_eq!(d.multi_loop_vertices, vec![VertexId(0)]);
    }
}
