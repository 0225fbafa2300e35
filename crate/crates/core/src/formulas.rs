//! Closed-form codimensions for single-block Jordan data and the sweep that
//! checks them against exact ranks.
//!
//! Every item is a relation template in one arrow combination `alpha` (and
//! possibly `beta`, `gamma`, ...) together with side conditions and a closed
//! form for `c` at Jordan types `(p)` and `(q)`. Items are looked up by number
//! in a [`FormulaRegistry`].

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{rat, ratio, PrimeFieldRank, Rat};
use crate::linsys::{codim_c_with, LinsysError};
use crate::linalg::BareissRank;
use crate::partition::{JordanAssignment, Partition};
use crate::quiver::{BoundQuiverPresentation, Path, Quiver, Relation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("unknown formula item {0}")]
    UnknownItem(usize),
    #[error("item {item}: side condition violated: {reason}")]
    SideCondition { item: usize, reason: String },
    #[error(transparent)]
    Engine(#[from] LinsysError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaParams {
    pub p: usize,
    pub q: usize,
    pub l: Option<usize>,
    pub lambda: Option<Rat>,
    /// Number of arrows available for `alpha`, `beta`, `gamma`.
    pub h: usize,
}

impl FormulaParams {
    pub fn new(p: usize, q: usize) -> Self {
        FormulaParams {
            p,
            q,
            l: None,
            lambda: None,
            h: 1,
        }
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = Some(l);
        self
    }

    pub fn with_lambda(mut self, lambda: Rat) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_h(mut self, h: usize) -> Self {
        self.h = h;
        self
    }

    pub fn describe(&self) -> String {
        let mut s = format!("p={} q={}", self.p, self.q);
        if let Some(l) = self.l {
            s.push_str(&format!(" l={l}"));
        }
        if let Some(k) = &self.lambda {
            s.push_str(&format!(" lambda={k}"));
        }
        s.push_str(&format!(" h={}", self.h));
        s
    }
}

/// Which arrow combination a template term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Alpha,
    Beta,
    Gamma,
    GammaPrime,
    GammaSecond,
}

impl Slot {
    /// 1-based arrow index for `h` arrows. `beta` must differ from `alpha`;
    /// the `gamma` slots may be any combination, so they fall back to
    /// existing arrows.
    fn arrow(self, h: usize) -> usize {
        match self {
            Slot::Alpha => 1,
            Slot::Beta => 2,
            Slot::Gamma | Slot::GammaSecond => h.min(3),
            Slot::GammaPrime => h.min(2),
        }
    }
}

/// `coefficient * e0^a * slot * e1^b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateTerm {
    pub coefficient: Rat,
    pub e0: usize,
    pub slot: Slot,
    pub e1: usize,
}

fn term(coefficient: Rat, e0: usize, slot: Slot, e1: usize) -> TemplateTerm {
    TemplateTerm {
        coefficient,
        e0,
        slot,
        e1,
    }
}

/// `sum_{i=q-l}^{q-1} e0^(p+q-l-i-1) alpha e1^i`.
fn staircase(p: usize, q: usize, l: usize) -> Vec<TemplateTerm> {
    (q - l..q)
        .map(|i| term(Rat::one(), p + q - l - i - 1, Slot::Alpha, i))
        .collect()
}

pub trait FormulaItem: Send + Sync {
    fn id(&self) -> usize;
    fn summary(&self) -> &'static str;
    fn uses_l(&self) -> bool {
        false
    }
    fn uses_lambda(&self) -> bool {
        false
    }
    /// Arrows needed for the independent combinations.
    fn min_arrows(&self) -> usize {
        1
    }
    /// Conditions on `lambda` alone.
    fn lambda_allowed(&self, _lambda: &Rat) -> Result<(), String> {
        Ok(())
    }
    /// Side conditions other than the arrow count.
    fn conditions(&self, x: &FormulaParams) -> Result<(), String>;
    fn closed_form(&self, x: &FormulaParams) -> usize;
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm>;
}

fn need(cond: bool, reason: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(reason.to_string())
    }
}

fn l_of(x: &FormulaParams) -> usize {
    x.l.expect("checked by registry")
}

fn lambda_of(x: &FormulaParams) -> Rat {
    x.lambda.clone().expect("checked by registry")
}

struct ShiftedArrow;
impl FormulaItem for ShiftedArrow {
    fn id(&self) -> usize {
        1
    }
    fn summary(&self) -> &'static str {
        "e0^l a at (p),(1) = p - l"
    }
    fn uses_l(&self) -> bool {
        true
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        need(x.q == 1, "q = 1")?;
        need((1..=x.p).contains(&l_of(x)), "1 <= l <= p")
    }
    fn closed_form(&self, x: &FormulaParams) -> usize {
        x.p - l_of(x)
    }
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm> {
        vec![term(Rat::one(), l_of(x), Slot::Alpha, 0)]
    }
}

struct TwoStep;
impl FormulaItem for TwoStep {
    fn id(&self) -> usize {
        2
    }
    fn summary(&self) -> &'static str {
        "e0^l a + e0^(l-1) a e1 at (p),(2) = 2(p - l)"
    }
    fn uses_l(&self) -> bool {
        true
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        need(x.q == 2, "q = 2")?;
        let l = l_of(x);
        need(l >= 1 && l < x.p, "1 <= l < p")
    }
    fn closed_form(&self, x: &FormulaParams) -> usize {
        2 * (x.p - l_of(x))
    }
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm> {
        let l = l_of(x);
        vec![
            term(Rat::one(), l, Slot::Alpha, 0),
            term(Rat::one(), l - 1, Slot::Alpha, 1),
        ]
    }
}

struct Commuting;
impl FormulaItem for Commuting {
    fn id(&self) -> usize {
        3
    }
    fn summary(&self) -> &'static str {
        "e0 a + a e1 = q(p - 1)"
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        need(x.q <= x.p, "q <= p")
    }
    fn closed_form(&self, x: &FormulaParams) -> usize {
        x.q * (x.p - 1)
    }
    fn template(&self, _: &FormulaParams) -> Vec<TemplateTerm> {
        vec![
            term(Rat::one(), 1, Slot::Alpha, 0),
            term(Rat::one(), 0, Slot::Alpha, 1),
        ]
    }
}

struct SplitCommuting;
impl FormulaItem for SplitCommuting {
    fn id(&self) -> usize {
        4
    }
    fn summary(&self) -> &'static str {
        "e0 a + b e1 = pq - 1"
    }
    fn min_arrows(&self) -> usize {
        2
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        need(x.q <= x.p, "q <= p")
    }
    fn closed_form(&self, x: &FormulaParams) -> usize {
        x.p * x.q - 1
    }
    fn template(&self, _: &FormulaParams) -> Vec<TemplateTerm> {
        vec![
            term(Rat::one(), 1, Slot::Alpha, 0),
            term(Rat::one(), 0, Slot::Beta, 1),
        ]
    }
}

struct CommutingTail;
impl FormulaItem for CommutingTail {
    fn id(&self) -> usize {
        5
    }
    fn summary(&self) -> &'static str {
        "e0 a + a e1 + b e1^(q-1) = q(p - 1) + 1"
    }
    fn min_arrows(&self) -> usize {
        2
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        need(2 <= x.q && x.q <= x.p, "2 <= q <= p")
    }
    fn closed_form(&self, x: &FormulaParams) -> usize {
        x.q * (x.p - 1) + 1
    }
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm> {
        vec![
            term(Rat::one(), 1, Slot::Alpha, 0),
            term(Rat::one(), 0, Slot::Alpha, 1),
            term(Rat::one(), 0, Slot::Beta, x.q - 1),
        ]
    }
}

struct Staircase;
impl FormulaItem for Staircase {
    fn id(&self) -> usize {
        6
    }
    fn summary(&self) -> &'static str {
        "staircase of length l = l"
    }
    fn uses_l(&self) -> bool {
        true
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        let l = l_of(x);
        need(l >= 1 && l <= x.p && l <= x.q, "1 <= l <= p, q")?;
        // every term has length p + q - l
        need(x.p + x.q - l >= 2, "terms must have length at least 2")
    }
    fn closed_form(&self, x: &FormulaParams) -> usize {
        l_of(x)
    }
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm> {
        staircase(x.p, x.q, l_of(x))
    }
}

struct CornerTwo;
impl FormulaItem for CornerTwo {
    fn id(&self) -> usize {
        7
    }
    fn summary(&self) -> &'static str {
        "corner with lambda and gamma = 2"
    }
    fn uses_lambda(&self) -> bool {
        true
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        need(x.p >= 2 && x.q >= 2, "p, q >= 2")
    }
    fn closed_form(&self, _: &FormulaParams) -> usize {
        2
    }
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm> {
        let (p, q) = (x.p, x.q);
        vec![
            term(Rat::one(), p - 1, Slot::Alpha, q - 2),
            term(lambda_of(x), p - 2, Slot::Alpha, q - 1),
            term(Rat::one(), p - 1, Slot::Gamma, q - 1),
        ]
    }
}

struct CornerThree;
impl FormulaItem for CornerThree {
    fn id(&self) -> usize {
        8
    }
    fn summary(&self) -> &'static str {
        "corner with beta and gamma = 3"
    }
    fn min_arrows(&self) -> usize {
        2
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        need(x.p >= 2 && x.q >= 2, "p, q >= 2")
    }
    fn closed_form(&self, _: &FormulaParams) -> usize {
        3
    }
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm> {
        let (p, q) = (x.p, x.q);
        vec![
            term(Rat::one(), p - 1, Slot::Alpha, q - 2),
            term(Rat::one(), p - 2, Slot::Beta, q - 1),
            term(Rat::one(), p - 1, Slot::Gamma, q - 1),
        ]
    }
}

struct CornerFour;
impl FormulaItem for CornerFour {
    fn id(&self) -> usize {
        9
    }
    fn summary(&self) -> &'static str {
        "three-step corner with lambda != 1 = 4"
    }
    fn uses_lambda(&self) -> bool {
        true
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        need(x.p >= 3 && x.q >= 3, "p, q >= 3")?;
        self.lambda_allowed(&lambda_of(x))
    }
    fn lambda_allowed(&self, lambda: &Rat) -> Result<(), String> {
        need(!lambda.is_one(), "lambda != 1")
    }
    fn closed_form(&self, _: &FormulaParams) -> usize {
        4
    }
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm> {
        let (p, q) = (x.p, x.q);
        vec![
            term(Rat::one(), p - 1, Slot::Alpha, q - 3),
            term(Rat::one(), p - 2, Slot::Alpha, q - 2),
            term(lambda_of(x), p - 3, Slot::Alpha, q - 1),
            term(Rat::one(), p - 2, Slot::GammaPrime, q - 1),
            term(Rat::one(), p - 1, Slot::GammaSecond, q - 1),
        ]
    }
}

struct StaircaseBeta;
impl FormulaItem for StaircaseBeta {
    fn id(&self) -> usize {
        10
    }
    fn summary(&self) -> &'static str {
        "staircase plus beta corner = l + 1"
    }
    fn uses_l(&self) -> bool {
        true
    }
    fn min_arrows(&self) -> usize {
        2
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        let l = l_of(x);
        need(3 <= l && l <= x.p && l <= x.q, "3 <= l <= p, q")
    }
    fn closed_form(&self, x: &FormulaParams) -> usize {
        l_of(x) + 1
    }
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm> {
        let (p, q) = (x.p, x.q);
        let mut t = staircase(p, q, l_of(x));
        t.push(term(Rat::one(), p - 2, Slot::Beta, q - 1));
        t.push(term(Rat::one(), p - 1, Slot::Gamma, q - 1));
        t
    }
}

struct StaircaseLambda;
impl FormulaItem for StaircaseLambda {
    fn id(&self) -> usize {
        11
    }
    fn summary(&self) -> &'static str {
        "staircase plus lambda corner, lambda != 0 = l + 1"
    }
    fn uses_l(&self) -> bool {
        true
    }
    fn uses_lambda(&self) -> bool {
        true
    }
    fn conditions(&self, x: &FormulaParams) -> Result<(), String> {
        let l = l_of(x);
        need(4 <= l && l <= x.p && l <= x.q, "4 <= l <= p, q")?;
        self.lambda_allowed(&lambda_of(x))
    }
    fn lambda_allowed(&self, lambda: &Rat) -> Result<(), String> {
        need(!lambda.is_zero(), "lambda != 0")
    }
    fn closed_form(&self, x: &FormulaParams) -> usize {
        l_of(x) + 1
    }
    fn template(&self, x: &FormulaParams) -> Vec<TemplateTerm> {
        let (p, q) = (x.p, x.q);
        let mut t = staircase(p, q, l_of(x));
        t.push(term(lambda_of(x), p - 3, Slot::Alpha, q - 1));
        t.push(term(Rat::one(), p - 2, Slot::GammaPrime, q - 1));
        t.push(term(Rat::one(), p - 1, Slot::GammaSecond, q - 1));
        t
    }
}

/// Numbered formula items.
pub struct FormulaRegistry {
    items: Vec<Box<dyn FormulaItem>>,
}

impl Default for FormulaRegistry {
    fn default() -> Self {
        FormulaRegistry {
            items: vec![
                Box::new(ShiftedArrow),
                Box::new(TwoStep),
                Box::new(Commuting),
                Box::new(SplitCommuting),
                Box::new(CommutingTail),
                Box::new(Staircase),
                Box::new(CornerTwo),
                Box::new(CornerThree),
                Box::new(CornerFour),
                Box::new(StaircaseBeta),
                Box::new(StaircaseLambda),
            ],
        }
    }
}

impl FormulaRegistry {
    pub fn get(&self, id: usize) -> Result<&dyn FormulaItem, FormulaError> {
        self.items
            .iter()
            .find(|i| i.id() == id)
            .map(|b| b.as_ref())
            .ok_or(FormulaError::UnknownItem(id))
    }

    pub fn ids(&self) -> Vec<usize> {
        self.items.iter().map(|i| i.id()).collect()
    }

    /// Checks every side condition of item `id` at `x`.
    pub fn check(&self, id: usize, x: &FormulaParams) -> Result<&dyn FormulaItem, FormulaError> {
        let item = self.get(id)?;
        let fail = |reason: String| FormulaError::SideCondition { item: id, reason };
        if x.p == 0 || x.q == 0 {
            return Err(fail("p, q >= 1".into()));
        }
        if item.uses_l() != x.l.is_some() {
            return Err(fail(if item.uses_l() { "l required" } else { "l not used" }.into()));
        }
        if item.uses_lambda() != x.lambda.is_some() {
            return Err(fail(
                if item.uses_lambda() { "lambda required" } else { "lambda not used" }.into(),
            ));
        }
        if x.h < item.min_arrows() {
            return Err(fail(format!("needs h >= {}", item.min_arrows())));
        }
        item.conditions(x).map_err(fail)?;
        Ok(item)
    }
}

/// Closed-form value of item `id`, after checking side conditions.
pub fn c_closed_form(id: usize, x: &FormulaParams) -> Result<usize, FormulaError> {
    let reg = FormulaRegistry::default();
    Ok(reg.check(id, x)?.closed_form(x))
}

/// Two-vertex quiver with `h` arrows `a1..ah` from 1 to 0, loops large
/// enough that neither `(p)` nor `(q)` nor any template term is truncated.
pub fn test_presentation(p: usize, q: usize, h: usize, terms: &[TemplateTerm]) -> BoundQuiverPresentation {
    let (m0, m1) = (p as u32 + 1, q as u32 + 1);
    let names: Vec<String> = (1..=h).map(|i| format!("a{i}")).collect();
    let mut arrows: Vec<(&str, &str, &str)> = vec![("e0", "0", "0"), ("e1", "1", "1")];
    for n in &names {
        arrows.push((n.as_str(), "1", "0"));
    }
    let quiver = Quiver::new(&["0", "1"], &arrows).expect("fixed shape");
    let relation = template_relation(&quiver, h, terms);
    BoundQuiverPresentation::new(quiver, vec![m0, m1], vec![relation]).expect("template avoids truncation")
}

fn template_relation(q: &Quiver, h: usize, terms: &[TemplateTerm]) -> Relation {
    let e0 = q.arrow_by_name("e0").unwrap();
    let e1 = q.arrow_by_name("e1").unwrap();
    let mut out = Vec::new();
    for t in terms {
        let a = q.arrow_by_name(&format!("a{}", t.slot.arrow(h))).unwrap();
        let mut factors = Vec::new();
        if t.e0 > 0 {
            factors.push((e0, t.e0));
        }
        factors.push((a, 1));
        if t.e1 > 0 {
            factors.push((e1, t.e1));
        }
        out.push((t.coefficient.clone(), Path::from_factors(q, &factors).unwrap()));
    }
    Relation::new(q, out).expect("template terms have length >= 2")
}

/// Outcome of one formula instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaCheck {
    pub item: usize,
    pub params: FormulaParams,
    pub closed_form: usize,
    pub rational_rank: usize,
    /// `(prime, rank)` for each prime field that was checked.
    pub field_ranks: Vec<(u64, usize)>,
}

impl FormulaCheck {
    pub fn matches(&self) -> bool {
        self.closed_form == self.rational_rank
    }

    pub fn fields_agree(&self) -> bool {
        self.field_ranks.iter().all(|&(_, r)| r == self.rational_rank)
    }
}

/// Primes used for the cross-field rank check.
pub const CHECK_PRIMES: [u64; 2] = [101, 997];

pub fn check_instance(id: usize, x: &FormulaParams, primes: &[u64]) -> Result<FormulaCheck, FormulaError> {
    let reg = FormulaRegistry::default();
    let item = reg.check(id, x)?;
    let terms = item.template(x);
    let pres = test_presentation(x.p, x.q, x.h, &terms);
    let ja = JordanAssignment(vec![Partition::single(x.p), Partition::single(x.q)]);
    let rational_rank = codim_c_with(&pres, pres.relations(), &ja, &BareissRank)?;
    let mut field_ranks = Vec::new();
    for &prime in primes {
        let engine = PrimeFieldRank::new(prime).map_err(LinsysError::from)?;
        field_ranks.push((prime, codim_c_with(&pres, pres.relations(), &ja, &engine)?));
    }
    Ok(FormulaCheck {
        item: id,
        params: x.clone(),
        closed_form: item.closed_form(x),
        rational_rank,
        field_ranks,
    })
}

/// Parameter ranges of a sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub max: usize,
    pub hs: Vec<usize>,
    pub lambdas: Vec<Rat>,
    /// Also allow q > p (the items without a `q <= p` condition).
    pub allow_q_above_p: bool,
    pub items: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max: 6,
            hs: vec![1, 2, 3],
            lambdas: default_lambdas(),
            allow_q_above_p: false,
            items: (1..=11).collect(),
        }
    }
}

pub fn default_lambdas() -> Vec<Rat> {
    vec![rat(2), rat(-1), ratio(1, 2)]
}

/// Every admissible parameter tuple of the sweep, in a fixed order.
pub fn sweep_instances(cfg: &SweepConfig) -> Vec<(usize, FormulaParams)> {
    let reg = FormulaRegistry::default();
    let mut out = Vec::new();
    for &id in &cfg.items {
        let Ok(item) = reg.get(id) else { continue };
        for p in 1..=cfg.max {
            for q in 1..=cfg.max {
                if q > p && !cfg.allow_q_above_p {
                    continue;
                }
                for &h in &cfg.hs {
                    let ls: Vec<Option<usize>> = if item.uses_l() {
                        (1..=p.max(q)).map(Some).collect()
                    } else {
                        vec![None]
                    };
                    let lams: Vec<Option<Rat>> = if item.uses_lambda() {
                        cfg.lambdas.iter().cloned().map(Some).collect()
                    } else {
                        vec![None]
                    };
                    for l in &ls {
                        for lam in &lams {
                            let x = FormulaParams {
                                p,
                                q,
                                l: *l,
                                lambda: lam.clone(),
                                h,
                            };
                            if reg.check(id, &x).is_ok() {
                                out.push((id, x));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Runs the sweep in parallel; results come back in sweep order.
pub fn run_sweep(cfg: &SweepConfig, primes: &[u64]) -> Result<Vec<FormulaCheck>, FormulaError> {
    sweep_instances(cfg)
        .par_iter()
        .map(|(id, x)| check_instance(*id, x, primes))
        .collect()
}

/// The unified form `sum_{i=0}^{min(l, q-1)} e0^(l-i) a e1^i` with predicted
/// value `q(p - l)` for `1 <= l < p`, `q <= p`. Returns `(predicted, rank)`.
pub fn unified_check(p: usize, q: usize, l: usize) -> Result<(usize, usize), FormulaError> {
    if !(l >= 1 && l < p && q >= 1 && q <= p) {
        return Err(FormulaError::SideCondition {
            item: 0,
            reason: "1 <= l < p, 1 <= q <= p".into(),
        });
    }
    let terms: Vec<TemplateTerm> = (0..=l.min(q - 1))
        .map(|i| term(Rat::one(), l - i, Slot::Alpha, i))
        .collect();
    let pres = test_presentation(p, q, 1, &terms);
    let ja = JordanAssignment(vec![Partition::single(p), Partition::single(q)]);
    let c = codim_c_with(&pres, pres.relations(), &ja, &BareissRank)?;
    Ok((q * (p - l), c))
}
