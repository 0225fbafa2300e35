use num_traits::{One, Zero};

use super::{
    parse_relation_expr, ArrowId, BoundQuiverPresentation, Combination, Path, QuiverError,
    Relation,
};
use crate::linalg::Rat;

const MAX_ITERATIONS: usize = 256;

/// A change of generators `x <- w`: the combination `w` (in the old
/// generators) becomes the new generator `x`; every other arrow is unchanged.
///
/// `w` must contain `x` itself with a nonzero coefficient and otherwise only
/// paths with the endpoints of `x`, so that the change is invertible in the
/// truncated algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    target: ArrowId,
    replacement: Combination,
}

impl Substitution {
    pub fn new(
        pres: &BoundQuiverPresentation,
        target: ArrowId,
        replacement: Combination,
    ) -> Result<Self, QuiverError> {
        let q = pres.quiver();
        let x = q.arrow(target);
        let name = || x.name.clone();
        for (_, p) in replacement.terms() {
            if p.source() != x.source || p.target() != x.target || p.is_trivial() {
                return Err(QuiverError::EndpointMismatch);
            }
        }
        let lead = replacement.coefficient(&Path::new(q, vec![target])?);
        if lead.is_zero() {
            return Err(QuiverError::NonInvertibleSubstitution(name()));
        }
        if x.is_loop()
            && replacement
                .terms()
                .any(|(_, p)| p.arrows().iter().any(|&a| a != target))
        {
            // a loop may only be reparameterized by its own powers
            return Err(QuiverError::NonInvertibleSubstitution(name()));
        }
        let mut replacement = replacement;
        pres.truncate(&mut replacement);
        Ok(Substitution {
            target,
            replacement,
        })
    }

    /// `Substitution::parse(&pres, "a1", "a1 + e0*a2")`.
    pub fn parse(
        pres: &BoundQuiverPresentation,
        target: &str,
        replacement: &str,
    ) -> Result<Self, QuiverError> {
        let q = pres.quiver();
        let t = q.arrow_by_name(target)?;
        let combo = parse_relation_expr(q, replacement)
            .map_err(|_| QuiverError::NonInvertibleSubstitution(target.to_string()))?;
        Self::new(pres, t, combo)
    }

    pub fn target(&self) -> ArrowId {
        self.target
    }

    pub fn replacement(&self) -> &Combination {
        &self.replacement
    }

    /// The old generator `x` written in the new generators.
    fn old_in_new(&self, pres: &BoundQuiverPresentation) -> Result<Combination, QuiverError> {
        let q = pres.quiver();
        let x_path = Path::new(q, vec![self.target])?;
        let lead = self.replacement.coefficient(&x_path);
        let inv = Rat::one() / lead.clone();
        let rest = self
            .replacement
            .add(&Combination::from_terms([(-lead, x_path.clone())]));
        let x = Combination::single(x_path);
        let mut current = x.scale(&inv);
        for _ in 0..MAX_ITERATIONS {
            let image = expand(pres, &rest, self.target, &current);
            let mut next = x.add(&image.scale(&-Rat::one())).scale(&inv);
            pres.truncate(&mut next);
            if next == current {
                return Ok(current);
            }
            current = next;
        }
        Err(QuiverError::NonInvertibleSubstitution(
            q.arrow(self.target).name.clone(),
        ))
    }

    /// The substitution undoing this one on the presentation it produces.
    pub fn inverse(&self, pres: &BoundQuiverPresentation) -> Result<Substitution, QuiverError> {
        Ok(Substitution {
            target: self.target,
            replacement: self.old_in_new(pres)?,
        })
    }

    /// Rewrites every relation of `pres` in the new generators.
    pub fn apply(
        &self,
        pres: &BoundQuiverPresentation,
    ) -> Result<BoundQuiverPresentation, QuiverError> {
        let q = pres.quiver();
        let old = self.old_in_new(pres)?;
        let mut relations = Vec::new();
        for r in pres.relations() {
            let rewritten = expand(pres, r.combination(), self.target, &old);
            if rewritten.is_zero() {
                continue;
            }
            relations.push(Relation::from_combination(q, rewritten)?);
        }
        let checked = BoundQuiverPresentation::new(q.clone(), pres.orders().to_vec(), relations)?;
        let note = format!(
            "{} <- {}",
            q.arrow(self.target).name,
            self.replacement.display(q)
        );
        Ok(pres.with_relations(checked.relations().to_vec(), note))
    }
}

/// Replaces each occurrence of `x` in `c` by `image` and truncates.
fn expand(
    pres: &BoundQuiverPresentation,
    c: &Combination,
    x: ArrowId,
    image: &Combination,
) -> Combination {
    let q = pres.quiver();
    let mut out = Combination::new();
    for (k, p) in c.terms() {
        let mut acc = Combination::single(Path::trivial(p.target()));
        for &a in p.arrows() {
            let factor = if a == x {
                image.clone()
            } else {
                Combination::single(Path::new(q, vec![a]).expect("single arrow"))
            };
            let mut next = acc.compose(&factor);
            pres.truncate(&mut next);
            acc = next;
            if acc.is_zero() {
                break;
            }
        }
        out = out.add(&acc.scale(k));
    }
    pres.truncate(&mut out);
    out
}
