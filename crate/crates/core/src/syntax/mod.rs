//! Modal and justification formula languages, annotations, polarity and
//! realisation of annotated formulas.

mod parse;
mod print;

pub use parse::{parse_annotated, parse_jformula, parse_modal, parse_satisfier, parse_term, ParseError};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::rc::Rc;

use thiserror::Error;

/// Annotation carried by modalities and brackets: `()` for plain formulas,
/// `u32` for annotated ones.
pub trait Ann: Clone + Eq + Ord + Hash + Debug + 'static {
    /// Allocates an annotation of the given residue class (mod 4).
    fn fresh(fresh: &mut Fresh, class: u32) -> Self;
    fn index(&self) -> Option<u32>;
}

impl Ann for () {
    fn fresh(_: &mut Fresh, _: u32) -> Self {}
    fn index(&self) -> Option<u32> {
        None
    }
}

impl Ann for u32 {
    fn fresh(fresh: &mut Fresh, class: u32) -> Self {
        fresh.alloc(class)
    }
    fn index(&self) -> Option<u32> {
        Some(*self)
    }
}

/// Source of fresh annotation indices: the smallest unused index of the
/// requested residue class.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    used: HashSet<u32>,
    floor: [u32; 4],
}

impl Fresh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn avoiding<I: IntoIterator<Item = u32>>(indices: I) -> Self {
        let mut f = Self::default();
        for i in indices {
            f.reserve(i);
        }
        f
    }

    pub fn reserve(&mut self, i: u32) {
        self.used.insert(i);
    }

    pub fn alloc(&mut self, class: u32) -> u32 {
        let c = (class % 4) as usize;
        let mut k = self.floor[c];
        while self.used.contains(&(4 * k + c as u32)) {
            k += 1;
        }
        self.floor[c] = k + 1;
        let n = 4 * k + c as u32;
        self.used.insert(n);
        n
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula<A> {
    Bot,
    Atom(Rc<str>),
    And(Rc<Formula<A>>, Rc<Formula<A>>),
    Or(Rc<Formula<A>>, Rc<Formula<A>>),
    Imp(Rc<Formula<A>>, Rc<Formula<A>>),
    Box(A, Rc<Formula<A>>),
    Dia(A, Rc<Formula<A>>),
}

pub type ModalFormula = Formula<()>;
pub type AnnotatedFormula = Formula<u32>;

impl<A: Ann> Formula<A> {
    pub fn atom(name: &str) -> Self {
        Formula::Atom(name.into())
    }
    pub fn and(l: Self, r: Self) -> Self {
        Formula::And(Rc::new(l), Rc::new(r))
    }
    pub fn or(l: Self, r: Self) -> Self {
        Formula::Or(Rc::new(l), Rc::new(r))
    }
    pub fn imp(l: Self, r: Self) -> Self {
        Formula::Imp(Rc::new(l), Rc::new(r))
    }
    pub fn boxed(a: A, body: Self) -> Self {
        Formula::Box(a, Rc::new(body))
    }
    pub fn dia(a: A, body: Self) -> Self {
        Formula::Dia(a, Rc::new(body))
    }
    /// `⊥ → ⊥`, the encoding of the empty conjunction.
    pub fn top() -> Self {
        Formula::imp(Formula::Bot, Formula::Bot)
    }

    pub fn children(&self) -> Vec<&Formula<A>> {
        match self {
            Formula::Bot | Formula::Atom(_) => vec![],
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => vec![l, r],
            Formula::Box(_, b) | Formula::Dia(_, b) => vec![b],
        }
    }

    pub fn subformula(&self, path: &[usize]) -> Option<&Formula<A>> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    pub fn modal_count(&self) -> usize {
        match self {
            Formula::Bot | Formula::Atom(_) => 0,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => l.modal_count() + r.modal_count(),
            Formula::Box(_, b) | Formula::Dia(_, b) => 1 + b.modal_count(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn erase(&self) -> ModalFormula {
        match self {
            Formula::Bot => Formula::Bot,
            Formula::Atom(p) => Formula::Atom(p.clone()),
            Formula::And(l, r) => Formula::and(l.erase(), r.erase()),
            Formula::Or(l, r) => Formula::or(l.erase(), r.erase()),
            Formula::Imp(l, r) => Formula::imp(l.erase(), r.erase()),
            Formula::Box(_, b) => Formula::boxed((), b.erase()),
            Formula::Dia(_, b) => Formula::dia((), b.erase()),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Formula::Bot => 0,
            Formula::Atom(_) => 1,
            Formula::And(..) => 2,
            Formula::Or(..) => 3,
            Formula::Imp(..) => 4,
            Formula::Box(..) => 5,
            Formula::Dia(..) => 6,
        }
    }

    /// Structural comparison; with `with_ann == false` annotations are ignored.
    pub fn cmp_struct(&self, other: &Self, with_ann: bool) -> Ordering {
        use Formula::*;
        match (self, other) {
            (Atom(a), Atom(b)) => a.cmp(b),
            (And(a, b), And(c, d)) | (Or(a, b), Or(c, d)) | (Imp(a, b), Imp(c, d)) => {
                a.cmp_struct(c, with_ann).then_with(|| b.cmp_struct(d, with_ann))
            }
            (Box(i, a), Box(j, b)) | (Dia(i, a), Dia(j, b)) => {
                let o = a.cmp_struct(b, with_ann);
                if with_ann {
                    o.then_with(|| i.cmp(j))
                } else {
                    o
                }
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

/// Canonical order: erased structure first, annotations as tie-break. Plain
/// and annotated sequents therefore list members in the same order.
impl<A: Ann> Ord for Formula<A> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_struct(other, false).then_with(|| self.cmp_struct(other, true))
    }
}

impl<A: Ann> PartialOrd for Formula<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl AnnotatedFormula {
    /// Indices of all modalities, in left-to-right order.
    pub fn ann_list(&self, out: &mut Vec<u32>) {
        match self {
            Formula::Bot | Formula::Atom(_) => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                l.ann_list(out);
                r.ann_list(out);
            }
            Formula::Box(i, b) | Formula::Dia(i, b) => {
                out.push(*i);
                b.ann_list(out);
            }
        }
    }
}

/// Set of annotation indices occurring in `f`.
pub fn ann(f: &AnnotatedFormula) -> BTreeSet<u32> {
    let mut v = Vec::new();
    f.ann_list(&mut v);
    v.into_iter().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
    pub fn is_positive(self) -> bool {
        self == Polarity::Positive
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("path {0:?} does not address a subformula")]
    Invalid(Vec<usize>),
}

/// Polarity of the subformula at `path`: positive iff the path enters the
/// left child of an implication an even number of times.
pub fn polarity_at<A: Ann>(f: &Formula<A>, path: &[usize]) -> Result<Polarity, PathError> {
    let mut cur = f;
    let mut pol = Polarity::Positive;
    for &i in path {
        let next = *cur.children().get(i).ok_or_else(|| PathError::Invalid(path.to_vec()))?;
        if matches!(cur, Formula::Imp(..)) && i == 0 {
            pol = pol.flip();
        }
        cur = next;
    }
    Ok(pol)
}

/// Residue class required of a modality with the given kind and polarity.
pub fn residue(is_box: bool, pol: Polarity) -> u32 {
    match (is_box, pol) {
        (true, Polarity::Positive) => 0,
        (true, Polarity::Negative) => 1,
        (false, Polarity::Positive) => 2,
        (false, Polarity::Negative) => 3,
    }
}

/// Annotates every modality with a fresh index of the residue class fixed by
/// its kind and polarity, traversing left to right.
pub fn properly_annotate(f: &ModalFormula, fresh: &mut Fresh) -> AnnotatedFormula {
    annotate_at(f, Polarity::Positive, fresh)
}

pub fn annotate_at(f: &ModalFormula, pol: Polarity, fresh: &mut Fresh) -> AnnotatedFormula {
    match f {
        Formula::Bot => Formula::Bot,
        Formula::Atom(p) => Formula::Atom(p.clone()),
        Formula::And(l, r) => Formula::and(annotate_at(l, pol, fresh), annotate_at(r, pol, fresh)),
        Formula::Or(l, r) => Formula::or(annotate_at(l, pol, fresh), annotate_at(r, pol, fresh)),
        Formula::Imp(l, r) => {
            let l = annotate_at(l, pol.flip(), fresh);
            Formula::imp(l, annotate_at(r, pol, fresh))
        }
        Formula::Box(_, b) => {
            let i = fresh.alloc(residue(true, pol));
            Formula::boxed(i, annotate_at(b, pol, fresh))
        }
        Formula::Dia(_, b) => {
            let i = fresh.alloc(residue(false, pol));
            Formula::dia(i, annotate_at(b, pol, fresh))
        }
    }
}

pub fn erase(f: &AnnotatedFormula) -> ModalFormula {
    f.erase()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("index {0} occurs more than once")]
    Duplicate(u32),
    #[error("index {index} has the wrong residue for a {kind} in {polarity:?} position")]
    Residue { index: u32, kind: &'static str, polarity: Polarity },
}

/// Independent validator: residues match kind and polarity at every
/// position and all indices are pairwise distinct.
pub fn check_proper(f: &AnnotatedFormula, pol: Polarity, seen: &mut HashSet<u32>) -> Result<(), AnnotationError> {
    match f {
        Formula::Bot | Formula::Atom(_) => Ok(()),
        Formula::And(l, r) | Formula::Or(l, r) => {
            check_proper(l, pol, seen)?;
            check_proper(r, pol, seen)
        }
        Formula::Imp(l, r) => {
            check_proper(l, pol.flip(), seen)?;
            check_proper(r, pol, seen)
        }
        Formula::Box(i, b) | Formula::Dia(i, b) => {
            let is_box = matches!(f, Formula::Box(..));
            if *i % 4 != residue(is_box, pol) {
                return Err(AnnotationError::Residue {
                    index: *i,
                    kind: if is_box { "box" } else { "diamond" },
                    polarity: pol,
                });
            }
            if !seen.insert(*i) {
                return Err(AnnotationError::Duplicate(*i));
            }
            check_proper(b, pol, seen)
        }
    }
}

pub fn is_properly_annotated(f: &AnnotatedFormula) -> bool {
    check_proper(f, Polarity::Positive, &mut HashSet::new()).is_ok()
}

// ---------------------------------------------------------------------------
// Justification language

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    PVar(u32),
    ReservedPVar(u32),
    Const(u32),
    Sum(Rc<Term>, Rc<Term>),
    App(Rc<Term>, Rc<Term>),
    /// `μ ▷ t`
    Update(Rc<Satisfier>, Rc<Term>),
    Bang(Rc<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Satisfier {
    SVar(u32),
    ReservedSVar(u32),
    Union(Rc<Satisfier>, Rc<Satisfier>),
    /// `t @ μ`
    Prop(Rc<Term>, Rc<Satisfier>),
}

/// A proof or satisfier variable, reserved or not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    P(u32),
    ReservedP(u32),
    S(u32),
    ReservedS(u32),
}

impl Term {
    pub fn sum(a: Term, b: Term) -> Term {
        Term::Sum(Rc::new(a), Rc::new(b))
    }
    pub fn app(a: Term, b: Term) -> Term {
        Term::App(Rc::new(a), Rc::new(b))
    }
    pub fn update(m: Satisfier, t: Term) -> Term {
        Term::Update(Rc::new(m), Rc::new(t))
    }
    pub fn bang(t: Term) -> Term {
        Term::Bang(Rc::new(t))
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::PVar(n) => {
                out.insert(Var::P(*n));
            }
            Term::ReservedPVar(n) => {
                out.insert(Var::ReservedP(*n));
            }
            Term::Const(_) => {}
            Term::Sum(a, b) | Term::App(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Term::Update(m, t) => {
                m.vars_into(out);
                t.vars_into(out);
            }
            Term::Bang(t) => t.vars_into(out),
        }
    }

    pub fn is_ground(&self) -> bool {
        let mut v = BTreeSet::new();
        self.vars_into(&mut v);
        v.is_empty()
    }

    pub fn size(&self) -> usize {
        match self {
            Term::PVar(_) | Term::ReservedPVar(_) | Term::Const(_) => 1,
            Term::Sum(a, b) | Term::App(a, b) => 1 + a.size() + b.size(),
            Term::Update(m, t) => 1 + m.size() + t.size(),
            Term::Bang(t) => 1 + t.size(),
        }
    }
}

impl Satisfier {
    pub fn union(a: Satisfier, b: Satisfier) -> Satisfier {
        Satisfier::Union(Rc::new(a), Rc::new(b))
    }
    pub fn prop(t: Term, m: Satisfier) -> Satisfier {
        Satisfier::Prop(Rc::new(t), Rc::new(m))
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Satisfier::SVar(n) => {
                out.insert(Var::S(*n));
            }
            Satisfier::ReservedSVar(n) => {
                out.insert(Var::ReservedS(*n));
            }
            Satisfier::Union(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Satisfier::Prop(t, m) => {
                t.vars_into(out);
                m.vars_into(out);
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        let mut v = BTreeSet::new();
        self.vars_into(&mut v);
        v.is_empty()
    }

    pub fn size(&self) -> usize {
        match self {
            Satisfier::SVar(_) | Satisfier::ReservedSVar(_) => 1,
            Satisfier::Union(a, b) => 1 + a.size() + b.size(),
            Satisfier::Prop(t, m) => 1 + t.size() + m.size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JFormula {
    Bot,
    Atom(Rc<str>),
    And(Rc<JFormula>, Rc<JFormula>),
    Or(Rc<JFormula>, Rc<JFormula>),
    Imp(Rc<JFormula>, Rc<JFormula>),
    Just(Rc<Term>, Rc<JFormula>),
    Sat(Rc<Satisfier>, Rc<JFormula>),
}

impl JFormula {
    pub fn atom(name: &str) -> Self {
        JFormula::Atom(name.into())
    }
    pub fn and(l: Self, r: Self) -> Self {
        JFormula::And(Rc::new(l), Rc::new(r))
    }
    pub fn or(l: Self, r: Self) -> Self {
        JFormula::Or(Rc::new(l), Rc::new(r))
    }
    pub fn imp(l: Self, r: Self) -> Self {
        JFormula::Imp(Rc::new(l), Rc::new(r))
    }
    pub fn just(t: Term, b: Self) -> Self {
        JFormula::Just(Rc::new(t), Rc::new(b))
    }
    pub fn sat(m: Satisfier, b: Self) -> Self {
        JFormula::Sat(Rc::new(m), Rc::new(b))
    }
    pub fn top() -> Self {
        JFormula::imp(JFormula::Bot, JFormula::Bot)
    }

    /// Splits `A → B` into its two sides.
    pub fn as_imp(&self) -> Option<(&JFormula, &JFormula)> {
        match self {
            JFormula::Imp(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            JFormula::Bot | JFormula::Atom(_) => {}
            JFormula::And(l, r) | JFormula::Or(l, r) | JFormula::Imp(l, r) => {
                l.vars_into(out);
                r.vars_into(out);
            }
            JFormula::Just(t, b) => {
                t.vars_into(out);
                b.vars_into(out);
            }
            JFormula::Sat(m, b) => {
                m.vars_into(out);
                b.vars_into(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            JFormula::Bot | JFormula::Atom(_) => 1,
            JFormula::And(l, r) | JFormula::Or(l, r) | JFormula::Imp(l, r) => 1 + l.size() + r.size(),
            JFormula::Just(t, b) => t.size() + b.size(),
            JFormula::Sat(m, b) => m.size() + b.size(),
        }
    }
}

/// Variables occurring anywhere in a justification formula.
pub fn vars(f: &JFormula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    f.vars_into(&mut out);
    out
}

/// Forgetful projection: `t:A ↦ □A`, `μ:A ↦ ◇A`.
pub fn forget(f: &JFormula) -> ModalFormula {
    match f {
        JFormula::Bot => Formula::Bot,
        JFormula::Atom(p) => Formula::Atom(p.clone()),
        JFormula::And(l, r) => Formula::and(forget(l), forget(r)),
        JFormula::Or(l, r) => Formula::or(forget(l), forget(r)),
        JFormula::Imp(l, r) => Formula::imp(forget(l), forget(r)),
        JFormula::Just(_, b) => Formula::boxed((), forget(b)),
        JFormula::Sat(_, b) => Formula::dia((), forget(b)),
    }
}

// ---------------------------------------------------------------------------
// Realisation functions on annotations

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RTerm {
    Proof(Term),
    Sat(Satisfier),
}

impl RTerm {
    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            RTerm::Proof(t) => t.vars_into(out),
            RTerm::Sat(m) => m.vars_into(out),
        }
    }
}

/// Partial map from annotation indices to terms.
pub type RealisationFn = BTreeMap<u32, RTerm>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RealiseError {
    #[error("index {0} is not in the domain of the realisation")]
    MissingIndex(u32),
    #[error("index {0} is mapped to a term of the wrong kind or a non-canonical variable")]
    ResidueMismatch(u32),
    #[error("satisfier variable a{0} occurs in the body of its own diamond")]
    SelfReferentialSatisfier(u32),
}

/// Checks that `r(i)` is admissible for index `i`.
pub fn check_entry(i: u32, t: &RTerm) -> Result<(), RealiseError> {
    let ok = match (i % 4, t) {
        (0, RTerm::Proof(_)) => true,
        (1, RTerm::Proof(Term::PVar(n))) => *n == i / 4,
        (2, RTerm::Sat(_)) => true,
        (3, RTerm::Sat(Satisfier::SVar(n))) => *n == i / 4,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(RealiseError::ResidueMismatch(i))
    }
}

/// The variable forced at an odd index, if any.
pub fn forced_var(i: u32) -> Option<RTerm> {
    match i % 4 {
        1 => Some(RTerm::Proof(Term::PVar(i / 4))),
        3 => Some(RTerm::Sat(Satisfier::SVar(i / 4))),
        _ => None,
    }
}

pub fn apply_realisation(r: &RealisationFn, f: &AnnotatedFormula) -> Result<JFormula, RealiseError> {
    Ok(match f {
        Formula::Bot => JFormula::Bot,
        Formula::Atom(p) => JFormula::Atom(p.clone()),
        Formula::And(l, r2) => JFormula::and(apply_realisation(r, l)?, apply_realisation(r, r2)?),
        Formula::Or(l, r2) => JFormula::or(apply_realisation(r, l)?, apply_realisation(r, r2)?),
        Formula::Imp(l, r2) => JFormula::imp(apply_realisation(r, l)?, apply_realisation(r, r2)?),
        Formula::Box(i, b) => {
            let t = r.get(i).ok_or(RealiseError::MissingIndex(*i))?;
            check_entry(*i, t)?;
            let RTerm::Proof(t) = t else { return Err(RealiseError::ResidueMismatch(*i)) };
            JFormula::just(t.clone(), apply_realisation(r, b)?)
        }
        Formula::Dia(i, b) => {
            let t = r.get(i).ok_or(RealiseError::MissingIndex(*i))?;
            check_entry(*i, t)?;
            let RTerm::Sat(m) = t else { return Err(RealiseError::ResidueMismatch(*i)) };
            let body = apply_realisation(r, b)?;
            if i % 4 == 3 && vars(&body).contains(&Var::S(i / 4)) {
                return Err(RealiseError::SelfReferentialSatisfier(i / 4));
            }
            JFormula::sat(m.clone(), body)
        }
    })
}

/// Variables fixed by the odd annotations of `f`.
pub fn negvar(f: &AnnotatedFormula) -> BTreeSet<Var> {
    ann(f)
        .into_iter()
        .filter_map(|i| match i % 4 {
            1 => Some(Var::P(i / 4)),
            3 => Some(Var::S(i / 4)),
            _ => None,
        })
        .collect()
}

/// Every modality at an odd index is realised by its own variable, and those
/// variables label exactly one modality each.
pub fn is_normal(r: &RealisationFn, f: &AnnotatedFormula) -> bool {
    let mut seen = HashSet::new();
    let mut idx = Vec::new();
    f.ann_list(&mut idx);
    idx.into_iter().filter(|i| i % 2 == 1).all(|i| {
        r.get(&i) == forced_var(i).as_ref() && seen.insert(i)
    })
}

// ---------------------------------------------------------------------------
// Logics

/// The four modal logics and, by extension, their justification
/// counterparts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Logic {
    IK,
    IKt,
    IK4,
    IS4,
}

impl Logic {
    pub const ALL: [Logic; 4] = [Logic::IK, Logic::IKt, Logic::IK4, Logic::IS4];

    pub fn has_t(self) -> bool {
        matches!(self, Logic::IKt | Logic::IS4)
    }

    pub fn has_4(self) -> bool {
        matches!(self, Logic::IK4 | Logic::IS4)
    }

    pub fn name(self) -> &'static str {
        match self {
            Logic::IK => "ik",
            Logic::IKt => "ikt",
            Logic::IK4 => "ik4",
            Logic::IS4 => "is4",
        }
    }

    pub fn parse(s: &str) -> Option<Logic> {
        Logic::ALL.into_iter().find(|l| l.name().eq_ignore_ascii_case(s))
    }
}

impl std::fmt::Display for Logic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
