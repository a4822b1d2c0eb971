//! Nested sequents with a single output zone, positions and contexts,
//! formula interpretation and output pruning.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Display, Formatter};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::syntax::{self, Ann, AnnotatedFormula, Formula, Fresh, ModalFormula, ParseError};

/// Member of a left-hand side: an input formula `A•` or a bracket `⟨Λ⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LhsItem<A> {
    In(Formula<A>),
    Dia(A, Vec<LhsItem<A>>),
}

/// The output zone: `A◦` or a bracket `[Γ]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rhs<A> {
    Out(Formula<A>),
    Box(A, Box<Sequent<A>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequent<A> {
    pub lhs: Vec<LhsItem<A>>,
    pub rhs: Rhs<A>,
}

pub type LhsSeq<A> = Vec<LhsItem<A>>;
pub type Position = Vec<usize>;

impl<A: Ann> LhsItem<A> {
    pub fn cmp_struct(&self, other: &Self, with_ann: bool) -> Ordering {
        match (self, other) {
            (LhsItem::In(a), LhsItem::In(b)) => a.cmp_struct(b, with_ann),
            (LhsItem::In(_), LhsItem::Dia(..)) => Ordering::Less,
            (LhsItem::Dia(..), LhsItem::In(_)) => Ordering::Greater,
            (LhsItem::Dia(i, a), LhsItem::Dia(j, b)) => {
                let o = cmp_lhs(a, b, with_ann);
                if with_ann {
                    o.then_with(|| i.cmp(j))
                } else {
                    o
                }
            }
        }
    }

    pub fn erase(&self) -> LhsItem<()> {
        match self {
            LhsItem::In(f) => LhsItem::In(f.erase()),
            LhsItem::Dia(_, b) => LhsItem::Dia((), normalized_lhs(b.iter().map(|x| x.erase()).collect())),
        }
    }

    pub fn modal_count(&self) -> usize {
        match self {
            LhsItem::In(f) => f.modal_count(),
            LhsItem::Dia(_, b) => 1 + b.iter().map(|x| x.modal_count()).sum::<usize>(),
        }
    }
}

fn cmp_lhs<A: Ann>(a: &[LhsItem<A>], b: &[LhsItem<A>], with_ann: bool) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.cmp_struct(y, with_ann);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

impl<A: Ann> Ord for LhsItem<A> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_struct(other, false).then_with(|| self.cmp_struct(other, true))
    }
}

impl<A: Ann> PartialOrd for LhsItem<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sorts a left-hand side (recursively) into canonical order.
pub fn normalized_lhs<A: Ann>(mut v: LhsSeq<A>) -> LhsSeq<A> {
    for it in v.iter_mut() {
        if let LhsItem::Dia(_, b) = it {
            *b = normalized_lhs(std::mem::take(b));
        }
    }
    v.sort();
    v
}

impl<A: Ann> Sequent<A> {
    pub fn new(lhs: LhsSeq<A>, rhs: Rhs<A>) -> Self {
        Sequent { lhs: normalized_lhs(lhs), rhs }
    }

    /// The sequent `A◦`.
    pub fn goal(f: Formula<A>) -> Self {
        Sequent { lhs: vec![], rhs: Rhs::Out(f) }
    }

    /// Re-sorts every multiset into canonical order.
    pub fn normalize(&mut self) {
        self.lhs = normalized_lhs(std::mem::take(&mut self.lhs));
        if let Rhs::Box(_, s) = &mut self.rhs {
            s.normalize();
        }
    }

    pub fn erase(&self) -> Sequent<()> {
        let rhs = match &self.rhs {
            Rhs::Out(f) => Rhs::Out(f.erase()),
            Rhs::Box(_, s) => Rhs::Box((), Box::new(s.erase())),
        };
        Sequent::new(self.lhs.iter().map(|x| x.erase()).collect(), rhs)
    }

    pub fn modal_count(&self) -> usize {
        let r = match &self.rhs {
            Rhs::Out(f) => f.modal_count(),
            Rhs::Box(_, s) => 1 + s.modal_count(),
        };
        r + self.lhs.iter().map(|x| x.modal_count()).sum::<usize>()
    }

    /// Number of nodes in the sequent tree; used to bound search.
    pub fn size(&self) -> usize {
        fn lhs_size<A: Ann>(v: &[LhsItem<A>]) -> usize {
            v.iter()
                .map(|x| match x {
                    LhsItem::In(f) => f.depth(),
                    LhsItem::Dia(_, b) => 1 + lhs_size(b),
                })
                .sum()
        }
        lhs_size(&self.lhs)
            + match &self.rhs {
                Rhs::Out(f) => f.depth(),
                Rhs::Box(_, s) => 1 + s.size(),
            }
    }
}

// ---------------------------------------------------------------------------
// Formula interpretation

/// Right-nested conjunction of the members; `None` when empty.
pub fn conj<A: Ann>(items: &[Formula<A>]) -> Option<Formula<A>> {
    let (last, init) = items.split_last()?;
    Some(init.iter().rev().fold(last.clone(), |acc, f| Formula::and(f.clone(), acc)))
}

pub fn fm_item<A: Ann>(it: &LhsItem<A>) -> Formula<A> {
    match it {
        LhsItem::In(f) => f.clone(),
        LhsItem::Dia(i, b) => Formula::dia(i.clone(), fm_lhs_or_top(b)),
    }
}

pub fn fm_lhs<A: Ann>(l: &[LhsItem<A>]) -> Option<Formula<A>> {
    conj(&l.iter().map(fm_item).collect::<Vec<_>>())
}

/// `fm(∅) = ⊤`, encoded as `⊥ → ⊥`.
pub fn fm_lhs_or_top<A: Ann>(l: &[LhsItem<A>]) -> Formula<A> {
    fm_lhs(l).unwrap_or_else(Formula::top)
}

pub fn fm_rhs<A: Ann>(r: &Rhs<A>) -> Formula<A> {
    match r {
        Rhs::Out(f) => f.clone(),
        Rhs::Box(i, s) => Formula::boxed(i.clone(), fm(s)),
    }
}

/// Formula interpretation of a full sequent; an empty left-hand side is
/// dropped rather than rendered as `⊤ →`.
pub fn fm<A: Ann>(s: &Sequent<A>) -> Formula<A> {
    match fm_lhs(&s.lhs) {
        Some(l) => Formula::imp(l, fm_rhs(&s.rhs)),
        None => fm_rhs(&s.rhs),
    }
}

// ---------------------------------------------------------------------------
// Annotation bookkeeping

pub fn seq_indices(s: &Sequent<u32>, out: &mut Vec<u32>) {
    fm(s).ann_list(out);
}

/// A sequent is well annotated when its formula interpretation is properly
/// annotated: residues match polarity and all indices are distinct.
pub fn is_well_annotated(s: &Sequent<u32>) -> bool {
    syntax::is_properly_annotated(&fm(s))
}

/// Gives every modality and bracket of `s` a fresh index.
pub fn annotate_sequent(s: &Sequent<()>, fresh: &mut Fresh) -> Sequent<u32> {
    reannotate(s, fresh)
}

/// Copies a structure with fresh indices of the same residue classes.
pub trait Reannotate<A: Ann> {
    type Out;
    fn reannotate_with(&self, fresh: &mut Fresh, pol: syntax::Polarity) -> Self::Out;
}

fn class_of<A: Ann>(is_box: bool, pol: syntax::Polarity) -> u32 {
    syntax::residue(is_box, pol)
}

pub fn reannotate_formula<A: Ann, B: Ann>(f: &Formula<A>, fresh: &mut Fresh, pol: syntax::Polarity) -> Formula<B> {
    use syntax::Formula as F;
    match f {
        F::Bot => F::Bot,
        F::Atom(p) => F::Atom(p.clone()),
        F::And(l, r) => F::and(reannotate_formula(l, fresh, pol), reannotate_formula(r, fresh, pol)),
        F::Or(l, r) => F::or(reannotate_formula(l, fresh, pol), reannotate_formula(r, fresh, pol)),
        F::Imp(l, r) => {
            let l = reannotate_formula(l, fresh, pol.flip());
            F::imp(l, reannotate_formula(r, fresh, pol))
        }
        F::Box(_, b) => {
            let i = B::fresh(fresh, class_of::<A>(true, pol));
            F::boxed(i, reannotate_formula(b, fresh, pol))
        }
        F::Dia(_, b) => {
            let i = B::fresh(fresh, class_of::<A>(false, pol));
            F::dia(i, reannotate_formula(b, fresh, pol))
        }
    }
}

pub fn reannotate_lhs<A: Ann, B: Ann>(l: &[LhsItem<A>], fresh: &mut Fresh) -> LhsSeq<B> {
    let neg = syntax::Polarity::Negative;
    normalized_lhs(
        l.iter()
            .map(|it| match it {
                LhsItem::In(f) => LhsItem::In(reannotate_formula(f, fresh, neg)),
                LhsItem::Dia(_, b) => {
                    let i = B::fresh(fresh, 3);
                    LhsItem::Dia(i, reannotate_lhs(b, fresh))
                }
            })
            .collect(),
    )
}

pub fn reannotate<A: Ann, B: Ann>(s: &Sequent<A>, fresh: &mut Fresh) -> Sequent<B> {
    let lhs = reannotate_lhs(&s.lhs, fresh);
    let rhs = match &s.rhs {
        Rhs::Out(f) => Rhs::Out(reannotate_formula(f, fresh, syntax::Polarity::Positive)),
        Rhs::Box(_, t) => {
            let i = B::fresh(fresh, 0);
            Rhs::Box(i, Box::new(reannotate(t, fresh)))
        }
    };
    Sequent { lhs, rhs }
}

// ---------------------------------------------------------------------------
// Positions and contexts

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NestedError {
    #[error("position {0:?} does not resolve in the sequent")]
    BadPosition(Position),
    #[error("context kind does not accept this payload")]
    KindMismatch,
    #[error("malformed context: {0}")]
    Malformed(String),
}

/// What a position resolves to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item<A> {
    Lhs(LhsItem<A>),
    Rhs(Rhs<A>),
}

/// A position split into the output-spine descents (through `[·]` brackets)
/// and the trailing selection inside the left-hand side at that level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loc {
    /// Number of `[·]` descents before reaching the level of the hole.
    pub spine: usize,
    /// Indices into the level's left-hand side and successive `⟨·⟩` bodies;
    /// empty when the position selects the level's output zone.
    pub lhs_path: Vec<usize>,
}

/// Resolves a flat position into a [`Loc`].
pub fn locate<A: Ann>(s: &Sequent<A>, pos: &[usize]) -> Result<Loc, NestedError> {
    let bad = || NestedError::BadPosition(pos.to_vec());
    let mut cur = s;
    let mut spine = 0;
    let mut k = 0;
    while k < pos.len() {
        let i = pos[k];
        if i == cur.lhs.len() {
            if k + 1 == pos.len() {
                return Ok(Loc { spine, lhs_path: vec![] });
            }
            match &cur.rhs {
                Rhs::Box(_, inner) => {
                    cur = inner;
                    spine += 1;
                    k += 1;
                }
                Rhs::Out(_) => return Err(bad()),
            }
        } else if i < cur.lhs.len() {
            let mut list = &cur.lhs;
            let path = pos[k..].to_vec();
            for (j, &x) in path.iter().enumerate() {
                let it = list.get(x).ok_or_else(bad)?;
                if j + 1 < path.len() {
                    match it {
                        LhsItem::Dia(_, b) => list = b,
                        LhsItem::In(_) => return Err(bad()),
                    }
                }
            }
            return Ok(Loc { spine, lhs_path: path });
        } else {
            return Err(bad());
        }
    }
    Err(bad())
}

/// Builds a flat position from a [`Loc`].
pub fn position_of<A: Ann>(s: &Sequent<A>, loc: &Loc) -> Result<Position, NestedError> {
    let mut pos = Vec::new();
    let mut cur = s;
    for _ in 0..loc.spine {
        pos.push(cur.lhs.len());
        match &cur.rhs {
            Rhs::Box(_, inner) => cur = inner,
            Rhs::Out(_) => return Err(NestedError::Malformed("spine runs past the output formula".into())),
        }
    }
    if loc.lhs_path.is_empty() {
        pos.push(cur.lhs.len());
    } else {
        pos.extend(&loc.lhs_path);
    }
    Ok(pos)
}

pub fn level<A: Ann>(s: &Sequent<A>, spine: usize) -> Option<&Sequent<A>> {
    let mut cur = s;
    for _ in 0..spine {
        match &cur.rhs {
            Rhs::Box(_, inner) => cur = inner,
            Rhs::Out(_) => return None,
        }
    }
    Some(cur)
}

pub fn level_mut<A: Ann>(s: &mut Sequent<A>, spine: usize) -> Option<&mut Sequent<A>> {
    let mut cur = s;
    for _ in 0..spine {
        match &mut cur.rhs {
            Rhs::Box(_, inner) => cur = inner,
            Rhs::Out(_) => return None,
        }
    }
    Some(cur)
}

pub fn lhs_container_mut<'a, A: Ann>(lhs: &'a mut Vec<LhsItem<A>>, path: &[usize]) -> Option<&'a mut Vec<LhsItem<A>>> {
    let mut list = lhs;
    for &x in path {
        match list.get_mut(x)? {
            LhsItem::Dia(_, b) => list = b,
            LhsItem::In(_) => return None,
        }
    }
    Some(list)
}

pub fn lhs_container_ref<'a, A: Ann>(lhs: &'a Vec<LhsItem<A>>, path: &[usize]) -> Option<&'a Vec<LhsItem<A>>> {
    let mut list = lhs;
    for &x in path {
        match list.get(x)? {
            LhsItem::Dia(_, b) => list = b,
            LhsItem::In(_) => return None,
        }
    }
    Some(list)
}

/// Resolves a position to the item it selects.
pub fn extract<A: Ann>(s: &Sequent<A>, pos: &[usize]) -> Result<Item<A>, NestedError> {
    let loc = locate(s, pos)?;
    let lvl = level(s, loc.spine).ok_or_else(|| NestedError::BadPosition(pos.to_vec()))?;
    match loc.lhs_path.split_last() {
        None => Ok(Item::Rhs(lvl.rhs.clone())),
        Some((last, init)) => {
            let list = lhs_container_ref(&lvl.lhs, init).ok_or_else(|| NestedError::BadPosition(pos.to_vec()))?;
            Ok(Item::Lhs(list[*last].clone()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContextKind {
    /// Hole accepts a left-hand side anywhere an input formula may occur.
    Input,
    /// Hole accepts a full sequent at the end of a chain of `[·]` brackets.
    Output,
    /// Hole accepts a left-hand side inside a left-hand side.
    Lhs,
}

/// A sequent with a hole: the host with the hole's contents removed, the
/// descent to the hole and the kind of payload it accepts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context<A> {
    pub host: Sequent<A>,
    pub loc: Loc,
    pub kind: ContextKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload<A> {
    Lhs(LhsSeq<A>),
    Seq(Sequent<A>),
}

/// Number of bracket descents above the hole.
pub fn depth<A>(c: &Context<A>) -> usize {
    c.loc.spine + c.loc.lhs_path.len()
}

/// Inserts the payload at the hole.
pub fn fill<A: Ann>(c: &Context<A>, payload: Payload<A>) -> Result<Sequent<A>, NestedError> {
    let mut s = c.host.clone();
    let lvl = level_mut(&mut s, c.loc.spine).ok_or_else(|| NestedError::Malformed("spine".into()))?;
    match (c.kind, payload) {
        (ContextKind::Output, Payload::Seq(p)) => {
            if !c.loc.lhs_path.is_empty() {
                return Err(NestedError::Malformed("output hole inside a left-hand side".into()));
            }
            lvl.lhs.extend(p.lhs);
            lvl.rhs = p.rhs;
        }
        (ContextKind::Input | ContextKind::Lhs, Payload::Lhs(items)) => {
            let list = lhs_container_mut(&mut lvl.lhs, &c.loc.lhs_path).ok_or_else(|| NestedError::Malformed("lhs path".into()))?;
            list.extend(items);
        }
        _ => return Err(NestedError::KindMismatch),
    }
    s.normalize();
    Ok(s)
}

/// Removes the item at `pos` and returns the resulting context together
/// with a payload that fills it back to `s`.
pub fn split<A: Ann>(s: &Sequent<A>, pos: &[usize]) -> Result<(Context<A>, Payload<A>), NestedError> {
    let loc = locate(s, pos)?;
    let mut host = s.clone();
    let lvl = level_mut(&mut host, loc.spine).ok_or_else(|| NestedError::BadPosition(pos.to_vec()))?;
    match loc.lhs_path.split_last() {
        None => {
            let rhs = std::mem::replace(&mut lvl.rhs, Rhs::Out(Formula::Bot));
            let ctx = Context { host, loc: Loc { spine: loc.spine, lhs_path: vec![] }, kind: ContextKind::Output };
            Ok((ctx, Payload::Seq(Sequent { lhs: vec![], rhs })))
        }
        Some((last, init)) => {
            let list = lhs_container_mut(&mut lvl.lhs, init).ok_or_else(|| NestedError::BadPosition(pos.to_vec()))?;
            let it = list.remove(*last);
            let kind = if init.is_empty() { ContextKind::Input } else { ContextKind::Lhs };
            let ctx = Context { host, loc: Loc { spine: loc.spine, lhs_path: init.to_vec() }, kind };
            Ok((ctx, Payload::Lhs(vec![it])))
        }
    }
}

// ---------------------------------------------------------------------------
// Output pruning

/// `Π↓`: removes the output formula and turns the `[·]` chain into `⟨·⟩`.
fn prune_rhs<A: Ann>(r: &Rhs<A>, fresh: &mut Fresh, reindex: &mut BTreeMap<u32, u32>) -> LhsSeq<A> {
    match r {
        Rhs::Out(_) => vec![],
        Rhs::Box(i, s) => {
            let j = A::fresh(fresh, 3);
            record(i, &j, reindex);
            let mut body = s.lhs.clone();
            body.extend(prune_rhs(&s.rhs, fresh, reindex));
            vec![LhsItem::Dia(j, normalized_lhs(body))]
        }
    }
}

fn record<A: Ann>(old: &A, new: &A, reindex: &mut BTreeMap<u32, u32>) {
    if let (Some(o), Some(n)) = (old.index(), new.index()) {
        reindex.insert(o, n);
    }
}

/// `Ω↓{payload}` for an LHS selection: the `⟨·⟩` brackets along `path` become
/// `[·]` brackets and `payload` becomes the output at the innermost level.
fn prune_lhs_spine<A: Ann>(
    lhs: &[LhsItem<A>],
    path: &[usize],
    extra: LhsSeq<A>,
    payload: Formula<A>,
    fresh: &mut Fresh,
    reindex: &mut BTreeMap<u32, u32>,
) -> Result<Sequent<A>, NestedError> {
    let mut rest: LhsSeq<A> = lhs.to_vec();
    match path.split_first() {
        None => {
            rest.extend(extra);
            Ok(Sequent::new(rest, Rhs::Out(payload)))
        }
        Some((&k, tail)) => {
            if k >= rest.len() {
                return Err(NestedError::Malformed("lhs path".into()));
            }
            let it = rest.remove(k);
            let LhsItem::Dia(i, body) = it else {
                return Err(NestedError::Malformed("hole path crosses an input formula".into()));
            };
            let j = A::fresh(fresh, 0);
            record(&i, &j, reindex);
            let inner = prune_lhs_spine(&body, tail, vec![], payload, fresh, reindex)?;
            rest.extend(extra);
            Ok(Sequent::new(rest, Rhs::Box(j, Box::new(inner))))
        }
    }
}

/// Output pruning of an input context, filled with `payload◦` at the hole.
///
/// `container` is the [`Loc`] of the hole's multiset (its `lhs_path`
/// descends through `⟨·⟩` brackets only). Returns the pruned sequent and the
/// map from flipped bracket indices to their fresh replacements.
pub fn prune_fill<A: Ann>(
    s: &Sequent<A>,
    container: &Loc,
    payload: Formula<A>,
    fresh: &mut Fresh,
) -> Result<(Sequent<A>, BTreeMap<u32, u32>), NestedError> {
    prune_fill_with(s, container, payload, fresh, true)
}

/// Like [`prune_fill`], but the output zone at the hole's level is dropped
/// instead of pruned.
pub fn prune_fill_dropping_output<A: Ann>(
    s: &Sequent<A>,
    container: &Loc,
    payload: Formula<A>,
    fresh: &mut Fresh,
) -> Result<(Sequent<A>, BTreeMap<u32, u32>), NestedError> {
    prune_fill_with(s, container, payload, fresh, false)
}

fn prune_fill_with<A: Ann>(
    s: &Sequent<A>,
    container: &Loc,
    payload: Formula<A>,
    fresh: &mut Fresh,
    keep_output: bool,
) -> Result<(Sequent<A>, BTreeMap<u32, u32>), NestedError> {
    let mut reindex = BTreeMap::new();
    let mut out = s.clone();
    let lvl = level_mut(&mut out, container.spine).ok_or_else(|| NestedError::Malformed("spine".into()))?;
    let below = if keep_output { prune_rhs(&lvl.rhs, fresh, &mut reindex) } else { vec![] };
    let pruned = prune_lhs_spine(&lvl.lhs, &container.lhs_path, below, payload, fresh, &mut reindex)?;
    *lvl = pruned;
    out.normalize();
    Ok((out, reindex))
}

/// Output pruning of a context given as a host and a hole: the result is the
/// pruned host with the hole rendered as an output context at its new level.
pub fn prune<A: Ann>(c: &Context<A>, fresh: &mut Fresh) -> Result<(Context<A>, BTreeMap<u32, u32>), NestedError> {
    if c.kind == ContextKind::Output {
        return Err(NestedError::Malformed("pruning expects an input context".into()));
    }
    let marker = Formula::atom("hole_marker_");
    let (s, reindex) = prune_fill(&c.host, &c.loc, marker.clone(), fresh)?;
    // The marker sits at the innermost output; remove it to expose the hole.
    let spine = c.loc.spine + c.loc.lhs_path.len();
    let mut host = s;
    let lvl = level_mut(&mut host, spine).ok_or_else(|| NestedError::Malformed("spine".into()))?;
    if lvl.rhs != Rhs::Out(marker) {
        return Err(NestedError::Malformed("pruned hole not found".into()));
    }
    let ctx = Context { host, loc: Loc { spine, lhs_path: vec![] }, kind: ContextKind::Output };
    Ok((ctx, reindex))
}

// ---------------------------------------------------------------------------
// Text rendering

fn wrap<A: Ann>(f: &Formula<A>) -> String {
    match f {
        Formula::Bot | Formula::Atom(_) | Formula::Box(..) | Formula::Dia(..) => f.to_string(),
        _ => format!("({f})"),
    }
}

fn ix<A: Ann>(a: &A) -> String {
    a.index().map(|n| format!("_{n}")).unwrap_or_default()
}

fn render_lhs<A: Ann>(l: &[LhsItem<A>]) -> Vec<String> {
    l.iter()
        .map(|it| match it {
            LhsItem::In(f) => format!("{}*", wrap(f)),
            LhsItem::Dia(i, b) => format!("<{}>{}", render_lhs(b).join(", "), ix(i)),
        })
        .collect()
}

impl<A: Ann> Display for Sequent<A> {
    fn fmt(&self, out: &mut Formatter<'_>) -> fmt::Result {
        let mut parts = render_lhs(&self.lhs);
        parts.push(match &self.rhs {
            Rhs::Out(f) => format!("{} o", wrap(f)),
            Rhs::Box(i, s) => format!("[{s}]{}", ix(i)),
        });
        write!(out, "{}", parts.join(", "))
    }
}

// ---------------------------------------------------------------------------
// JSON encoding

/// Annotation kinds with a JSON and text codec.
pub trait Codec: Ann {
    fn parse_formula(s: &str) -> Result<Formula<Self>, ParseError>;
    fn from_json_ix(v: Option<&Value>) -> Result<Self, String>;
}

impl Codec for () {
    fn parse_formula(s: &str) -> Result<ModalFormula, ParseError> {
        syntax::parse_modal(s)
    }
    fn from_json_ix(v: Option<&Value>) -> Result<(), String> {
        match v {
            None => Ok(()),
            Some(_) => Err("unexpected bracket index in a plain sequent".into()),
        }
    }
}

impl Codec for u32 {
    fn parse_formula(s: &str) -> Result<AnnotatedFormula, ParseError> {
        syntax::parse_annotated(s)
    }
    fn from_json_ix(v: Option<&Value>) -> Result<u32, String> {
        v.and_then(|x| x.as_u64())
            .and_then(|x| u32::try_from(x).ok())
            .ok_or_else(|| "bracket index missing or invalid".to_string())
    }
}

fn ix_json<A: Ann>(m: &mut Map<String, Value>, a: &A) {
    if let Some(n) = a.index() {
        m.insert("ix".into(), json!(n));
    }
}

pub fn lhs_to_json<A: Ann>(l: &[LhsItem<A>]) -> Value {
    Value::Array(
        l.iter()
            .map(|it| match it {
                LhsItem::In(f) => json!({ "in": f.to_string() }),
                LhsItem::Dia(i, b) => {
                    let mut m = Map::new();
                    ix_json(&mut m, i);
                    m.insert("body".into(), lhs_to_json(b));
                    json!({ "dia": Value::Object(m) })
                }
            })
            .collect(),
    )
}

pub fn sequent_to_json<A: Ann>(s: &Sequent<A>) -> Value {
    let rhs = match &s.rhs {
        Rhs::Out(f) => json!({ "out": f.to_string() }),
        Rhs::Box(i, t) => {
            let mut m = Map::new();
            ix_json(&mut m, i);
            m.insert("seq".into(), sequent_to_json(t));
            json!({ "box": Value::Object(m) })
        }
    };
    json!({ "lhs": lhs_to_json(&s.lhs), "rhs": rhs })
}

fn obj<'a>(v: &'a Value, keys: &[&str], what: &str) -> Result<&'a Map<String, Value>, String> {
    let m = v.as_object().ok_or_else(|| format!("{what}: expected an object"))?;
    if let Some(k) = m.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(format!("{what}: unknown key `{k}`"));
    }
    Ok(m)
}

fn formula_field<A: Codec>(v: &Value) -> Result<Formula<A>, String> {
    let s = v.as_str().ok_or("formula must be a string")?;
    A::parse_formula(s).map_err(|e| e.to_string())
}

pub fn lhs_from_json<A: Codec>(v: &Value) -> Result<LhsSeq<A>, String> {
    let arr = v.as_array().ok_or("lhs: expected an array")?;
    let mut out = Vec::new();
    for it in arr {
        let m = obj(it, &["in", "dia"], "lhs item")?;
        if let Some(f) = m.get("in") {
            out.push(LhsItem::In(formula_field(f)?));
        } else if let Some(d) = m.get("dia") {
            let dm = obj(d, &["ix", "body"], "dia")?;
            let body = lhs_from_json(dm.get("body").ok_or("dia: missing body")?)?;
            out.push(LhsItem::Dia(A::from_json_ix(dm.get("ix"))?, body));
        } else {
            return Err("lhs item: expected `in` or `dia`".into());
        }
    }
    Ok(normalized_lhs(out))
}

pub fn sequent_from_json<A: Codec>(v: &Value) -> Result<Sequent<A>, String> {
    let m = obj(v, &["lhs", "rhs"], "sequent")?;
    let lhs = lhs_from_json(m.get("lhs").unwrap_or(&Value::Array(vec![])))?;
    let r = obj(m.get("rhs").ok_or("sequent: missing rhs")?, &["out", "box"], "rhs")?;
    let rhs = if let Some(f) = r.get("out") {
        Rhs::Out(formula_field(f)?)
    } else if let Some(b) = r.get("box") {
        let bm = obj(b, &["ix", "seq"], "box")?;
        Rhs::Box(A::from_json_ix(bm.get("ix"))?, Box::new(sequent_from_json(bm.get("seq").ok_or("box: missing seq")?)?))
    } else {
        return Err("rhs: expected `out` or `box`".into());
    };
    Ok(Sequent::new(lhs, rhs))
}
