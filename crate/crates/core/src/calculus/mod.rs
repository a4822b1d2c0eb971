//! Rules of the nested sequent systems, derivation trees, proof checking,
//! bounded proof search, the implication macro decomposition and
//! annotation of proofs.

mod json;
mod search;
mod transform;

pub use json::{proof_from_json, proof_to_json};
pub use search::{search, SearchOutcome};
pub use transform::{annotate_proof, decompose_impl, erase_proof, TransformError};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::nested::{
    fm, level, level_mut, lhs_container_mut, lhs_container_ref, locate, normalized_lhs, prune_fill,
    prune_fill_dropping_output, reannotate_lhs, LhsItem, Loc, NestedError, Position, Rhs, Sequent,
};
use crate::syntax::{residue, Ann, Formula, Fresh, Logic, Polarity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Bot,
    Id,
    Contr,
    AndL,
    AndR,
    OrL,
    OrR1,
    OrR2,
    ImpL,
    ImpLs,
    ImpR,
    BoxLbr,
    BoxLdia,
    BoxR,
    DiaL,
    DiaR,
    TL,
    TR,
    FourLbr,
    FourLdia,
    FourR,
    Upd,
}

impl RuleId {
    pub const ALL: [RuleId; 22] = [
        RuleId::Bot,
        RuleId::Id,
        RuleId::Contr,
        RuleId::AndL,
        RuleId::AndR,
        RuleId::OrL,
        RuleId::OrR1,
        RuleId::OrR2,
        RuleId::ImpL,
        RuleId::ImpLs,
        RuleId::ImpR,
        RuleId::BoxLbr,
        RuleId::BoxLdia,
        RuleId::BoxR,
        RuleId::DiaL,
        RuleId::DiaR,
        RuleId::TL,
        RuleId::TR,
        RuleId::FourLbr,
        RuleId::FourLdia,
        RuleId::FourR,
        RuleId::Upd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Bot => "bot",
            RuleId::Id => "id",
            RuleId::Contr => "contr",
            RuleId::AndL => "andL",
            RuleId::AndR => "andR",
            RuleId::OrL => "orL",
            RuleId::OrR1 => "orR1",
            RuleId::OrR2 => "orR2",
            RuleId::ImpL => "impL",
            RuleId::ImpLs => "impLs",
            RuleId::ImpR => "impR",
            RuleId::BoxLbr => "boxLbr",
            RuleId::BoxLdia => "boxLdia",
            RuleId::BoxR => "boxR",
            RuleId::DiaL => "diaL",
            RuleId::DiaR => "diaR",
            RuleId::TL => "tL",
            RuleId::TR => "tR",
            RuleId::FourLbr => "4Lbr",
            RuleId::FourLdia => "4Ldia",
            RuleId::FourR => "4R",
            RuleId::Upd => "upd",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleId> {
        RuleId::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn in_logic(self, l: Logic) -> bool {
        match self {
            RuleId::TL | RuleId::TR => l.has_t(),
            RuleId::FourLbr | RuleId::FourLdia | RuleId::FourR => l.has_4(),
            _ => true,
        }
    }

    pub fn is_axiom(self) -> bool {
        matches!(self, RuleId::Bot | RuleId::Id)
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationTree<A> {
    pub conclusion: Sequent<A>,
    pub rule: RuleId,
    pub principal: Position,
    pub aux: Vec<Position>,
    pub premises: Vec<DerivationTree<A>>,
}

impl<A: Ann> DerivationTree<A> {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(|p| p.height()).max().unwrap_or(0)
    }

    /// Rule names in pre-order.
    pub fn rules(&self) -> Vec<RuleId> {
        let mut out = vec![self.rule];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {0} does not apply: {1}")]
    NotApplicable(RuleId, String),
    #[error("rule {0} is not part of the chosen logic")]
    NotInLogic(RuleId),
    #[error(transparent)]
    Nested(#[from] NestedError),
}

fn na<T>(r: RuleId, msg: &str) -> Result<T, RuleError> {
    Err(RuleError::NotApplicable(r, msg.to_string()))
}

/// Where a rule's redex lives.
struct Redex<'a, A> {
    loc: Loc,
    item: Option<&'a LhsItem<A>>,
    rhs: &'a Rhs<A>,
}

fn redex<'a, A: Ann>(s: &'a Sequent<A>, pos: &[usize]) -> Result<Redex<'a, A>, RuleError> {
    let loc = locate(s, pos)?;
    let lvl = level(s, loc.spine).ok_or_else(|| NestedError::BadPosition(pos.to_vec()))?;
    let item = match loc.lhs_path.split_last() {
        None => None,
        Some((last, init)) => {
            let c = lhs_container_ref(&lvl.lhs, init).ok_or_else(|| NestedError::BadPosition(pos.to_vec()))?;
            Some(&c[*last])
        }
    };
    Ok(Redex { loc, item, rhs: &lvl.rhs })
}

fn container<'a, A: Ann>(s: &'a mut Sequent<A>, loc: &Loc) -> &'a mut Vec<LhsItem<A>> {
    let lvl = level_mut(s, loc.spine).expect("located level");
    let (_, init) = loc.lhs_path.split_last().expect("lhs selection");
    lhs_container_mut(&mut lvl.lhs, init).expect("located container")
}

/// Replaces the item at `loc` with `items`.
fn replace_item<A: Ann>(s: &Sequent<A>, loc: &Loc, items: Vec<LhsItem<A>>) -> Sequent<A> {
    let mut out = s.clone();
    let c = container(&mut out, loc);
    c.remove(*loc.lhs_path.last().expect("lhs selection"));
    c.extend(items);
    out.normalize();
    out
}

fn set_rhs<A: Ann>(s: &Sequent<A>, spine: usize, extra_lhs: Vec<LhsItem<A>>, rhs: Rhs<A>) -> Sequent<A> {
    let mut out = s.clone();
    let lvl = level_mut(&mut out, spine).expect("located level");
    lvl.lhs.extend(extra_lhs);
    lvl.rhs = rhs;
    out.normalize();
    out
}

fn container_loc(loc: &Loc) -> Loc {
    let mut c = loc.clone();
    c.lhs_path.pop();
    c
}

/// Resolves an auxiliary position that must sit in the same multiset as the
/// principal one; returns its index there.
fn sibling<A: Ann>(s: &Sequent<A>, main: &Loc, pos: &[usize], r: RuleId) -> Result<usize, RuleError> {
    let l = locate(s, pos)?;
    if l.spine != main.spine
        || l.lhs_path.len() != main.lhs_path.len()
        || l.lhs_path[..l.lhs_path.len() - 1] != main.lhs_path[..main.lhs_path.len() - 1]
        || l.lhs_path.last() == main.lhs_path.last()
    {
        return na(r, "auxiliary position is not a sibling of the principal one");
    }
    Ok(*l.lhs_path.last().unwrap())
}

fn output_level<A>(r: RuleId, loc: &Loc) -> Result<(), RuleError> {
    if loc.lhs_path.len() == 1 {
        Ok(())
    } else {
        na(r, "principal formula must sit at an output level")
    }
}

/// Premises of `rule` applied backwards to `s` at the given positions.
/// New annotations are drawn from `fresh`.
pub fn apply_rule_backward<A: Ann>(
    s: &Sequent<A>,
    rule: RuleId,
    principal: &[usize],
    aux: &[Position],
    fresh: &mut Fresh,
) -> Result<Vec<Sequent<A>>, RuleError> {
    let rx = redex(s, principal)?;
    let loc = rx.loc.clone();
    let want_aux = |n: usize| -> Result<(), RuleError> {
        if aux.len() == n {
            Ok(())
        } else {
            na(rule, &format!("expected {n} auxiliary positions, got {}", aux.len()))
        }
    };
    let in_formula = || match rx.item {
        Some(LhsItem::In(f)) => Some(f),
        _ => None,
    };
    let out_formula = || match (rx.item, rx.rhs) {
        (None, Rhs::Out(f)) => Some(f),
        _ => None,
    };
    use Formula as F;
    match rule {
        RuleId::Bot => {
            want_aux(0)?;
            match in_formula() {
                Some(F::Bot) => Ok(vec![]),
                _ => na(rule, "principal is not an input ⊥"),
            }
        }
        RuleId::Id => {
            want_aux(0)?;
            output_level::<A>(rule, &loc)?;
            match (in_formula(), rx.rhs) {
                (Some(F::Atom(p)), Rhs::Out(F::Atom(q))) if p == q => Ok(vec![]),
                _ => na(rule, "no matching atom in the output"),
            }
        }
        RuleId::Contr => {
            if rx.item.is_none() {
                return na(rule, "principal must be a left-hand member");
            }
            let mut idx = vec![*loc.lhs_path.last().unwrap()];
            for a in aux {
                let i = sibling(s, &loc, a, rule)?;
                if idx.contains(&i) {
                    return na(rule, "repeated auxiliary position");
                }
                idx.push(i);
            }
            idx.sort_unstable();
            let mut out = s.clone();
            let c = container(&mut out, &loc);
            let mut taken = Vec::new();
            for i in idx.iter().rev() {
                taken.push(c.remove(*i));
            }
            taken.reverse();
            let first: Vec<LhsItem<A>> = reannotate_lhs(&taken, fresh);
            let second: Vec<LhsItem<A>> = reannotate_lhs(&taken, fresh);
            c.extend(first);
            c.extend(second);
            out.normalize();
            Ok(vec![out])
        }
        RuleId::AndL => {
            want_aux(0)?;
            match in_formula() {
                Some(F::And(a, b)) => {
                    Ok(vec![replace_item(s, &loc, vec![LhsItem::In((**a).clone()), LhsItem::In((**b).clone())])])
                }
                _ => na(rule, "principal is not an input conjunction"),
            }
        }
        RuleId::OrL => {
            want_aux(0)?;
            match in_formula() {
                Some(F::Or(a, b)) => Ok(vec![
                    replace_item(s, &loc, vec![LhsItem::In((**a).clone())]),
                    replace_item(s, &loc, vec![LhsItem::In((**b).clone())]),
                ]),
                _ => na(rule, "principal is not an input disjunction"),
            }
        }
        RuleId::AndR | RuleId::OrR1 | RuleId::OrR2 | RuleId::ImpR | RuleId::BoxR | RuleId::TR => {
            want_aux(0)?;
            let Some(f) = out_formula() else { return na(rule, "principal is not the output formula") };
            let sp = loc.spine;
            let out = |x: &F<A>| Rhs::Out(x.clone());
            match (rule, f) {
                (RuleId::AndR, F::And(a, b)) => Ok(vec![set_rhs(s, sp, vec![], out(a)), set_rhs(s, sp, vec![], out(b))]),
                (RuleId::OrR1, F::Or(a, _)) => Ok(vec![set_rhs(s, sp, vec![], out(a))]),
                (RuleId::OrR2, F::Or(_, b)) => Ok(vec![set_rhs(s, sp, vec![], out(b))]),
                (RuleId::ImpR, F::Imp(a, b)) => Ok(vec![set_rhs(s, sp, vec![LhsItem::In((**a).clone())], out(b))]),
                (RuleId::BoxR, F::Box(i, a)) => {
                    Ok(vec![set_rhs(s, sp, vec![], Rhs::Box(i.clone(), Box::new(Sequent::goal((**a).clone()))))])
                }
                (RuleId::TR, F::Dia(_, a)) => Ok(vec![set_rhs(s, sp, vec![], out(a))]),
                _ => na(rule, "output formula has the wrong shape"),
            }
        }
        RuleId::ImpL | RuleId::ImpLs => {
            let Some(F::Imp(a, b)) = in_formula() else { return na(rule, "principal is not an input implication") };
            let mut aux_idx = Vec::new();
            if rule == RuleId::ImpL {
                want_aux(0)?;
            } else {
                for p in aux {
                    let l = locate(s, p)?;
                    if l.spine != loc.spine || l.lhs_path.len() != 1 || l.lhs_path[0] == loc.lhs_path[0] {
                        return na(rule, "auxiliary members must sit beside the context at the hole's level");
                    }
                    if aux_idx.contains(&l.lhs_path[0]) {
                        return na(rule, "repeated auxiliary position");
                    }
                    aux_idx.push(l.lhs_path[0]);
                }
            }
            let mut without = s.clone();
            container(&mut without, &loc).remove(*loc.lhs_path.last().unwrap());
            let hole = container_loc(&loc);
            let left = if rule == RuleId::ImpL {
                prune_fill(&without, &hole, (**a).clone(), fresh)?.0
            } else {
                prune_fill_dropping_output(&without, &hole, (**a).clone(), fresh)?.0
            };
            let mut right = s.clone();
            {
                let lvl = level_mut(&mut right, loc.spine).expect("located level");
                // Replace the principal first (indices are taken before any removal).
                let c = lhs_container_mut(&mut lvl.lhs, &loc.lhs_path[..loc.lhs_path.len() - 1]).expect("container");
                c[*loc.lhs_path.last().unwrap()] = LhsItem::In((**b).clone());
                let mut sorted = aux_idx.clone();
                sorted.sort_unstable();
                for i in sorted.iter().rev() {
                    lvl.lhs.remove(*i);
                }
            }
            right.normalize();
            Ok(vec![left, right])
        }
        RuleId::BoxLbr | RuleId::FourLbr => {
            want_aux(0)?;
            output_level::<A>(rule, &loc)?;
            let Some(F::Box(_, a)) = in_formula() else { return na(rule, "principal is not an input box") };
            let Rhs::Box(..) = rx.rhs else { return na(rule, "no bracket in the output zone") };
            let moved = if rule == RuleId::BoxLbr { LhsItem::In((**a).clone()) } else { rx.item.unwrap().clone() };
            let mut out = s.clone();
            let lvl = level_mut(&mut out, loc.spine).expect("level");
            lvl.lhs.remove(loc.lhs_path[0]);
            let Rhs::Box(_, inner) = &mut lvl.rhs else { unreachable!() };
            inner.lhs.push(moved);
            out.normalize();
            Ok(vec![out])
        }
        RuleId::BoxLdia | RuleId::FourLdia => {
            want_aux(1)?;
            let Some(F::Box(_, a)) = in_formula() else { return na(rule, "principal is not an input box") };
            let j = sibling(s, &loc, &aux[0], rule)?;
            let moved = if rule == RuleId::BoxLdia { LhsItem::In((**a).clone()) } else { rx.item.unwrap().clone() };
            let mut out = s.clone();
            let c = container(&mut out, &loc);
            let LhsItem::Dia(_, body) = &mut c[j] else { return na(rule, "auxiliary member is not a ⟨·⟩ bracket") };
            body.push(moved);
            c.remove(*loc.lhs_path.last().unwrap());
            out.normalize();
            Ok(vec![out])
        }
        RuleId::DiaL => {
            want_aux(0)?;
            let Some(F::Dia(i, a)) = in_formula() else { return na(rule, "principal is not an input diamond") };
            Ok(vec![replace_item(s, &loc, vec![LhsItem::Dia(i.clone(), vec![LhsItem::In((**a).clone())])])])
        }
        RuleId::TL => {
            want_aux(0)?;
            let Some(F::Box(_, a)) = in_formula() else { return na(rule, "principal is not an input box") };
            Ok(vec![replace_item(s, &loc, vec![LhsItem::In((**a).clone())])])
        }
        RuleId::DiaR | RuleId::FourR => {
            want_aux(1)?;
            let Some(f @ F::Dia(_, a)) = out_formula() else { return na(rule, "output formula is not a diamond") };
            let l = locate(s, &aux[0])?;
            if l.spine != loc.spine || l.lhs_path.len() != 1 {
                return na(rule, "auxiliary bracket must sit at the output level");
            }
            let mut out = s.clone();
            let lvl = level_mut(&mut out, loc.spine).expect("level");
            let LhsItem::Dia(_, body) = lvl.lhs.remove(l.lhs_path[0]) else {
                return na(rule, "auxiliary member is not a ⟨·⟩ bracket");
            };
            let target = if rule == RuleId::DiaR { (**a).clone() } else { f.clone() };
            let n = A::fresh(fresh, 0);
            lvl.rhs = Rhs::Box(n, Box::new(Sequent::new(body, Rhs::Out(target))));
            out.normalize();
            Ok(vec![out])
        }
        RuleId::Upd => {
            if rx.item.is_some() {
                return na(rule, "principal must be an output bracket");
            }
            let Rhs::Box(..) = rx.rhs else { return na(rule, "principal must be an output bracket") };
            let mut idx = Vec::new();
            for p in aux {
                let l = locate(s, p)?;
                if l.spine != loc.spine + 1 || l.lhs_path.len() != 1 || p[..p.len() - 1] != principal[..] {
                    return na(rule, "auxiliary members must sit at the top of the bracket");
                }
                if idx.contains(&l.lhs_path[0]) {
                    return na(rule, "repeated auxiliary position");
                }
                idx.push(l.lhs_path[0]);
            }
            idx.sort_unstable();
            let mut out = s.clone();
            let lvl = level_mut(&mut out, loc.spine).expect("level");
            let Rhs::Box(_, inner) = &mut lvl.rhs else { unreachable!() };
            let mut moved = Vec::new();
            for i in idx.iter().rev() {
                moved.push(inner.lhs.remove(*i));
            }
            let k = A::fresh(fresh, 3);
            lvl.lhs.push(LhsItem::Dia(k, normalized_lhs(moved)));
            out.normalize();
            Ok(vec![out])
        }
    }
}

// ---------------------------------------------------------------------------
// Annotation helpers

/// All annotation indices of a sequent, with repetitions.
pub fn indices<A: Ann>(s: &Sequent<A>) -> Vec<u32> {
    fn go<A: Ann>(f: &Formula<A>, out: &mut Vec<u32>) {
        match f {
            Formula::Bot | Formula::Atom(_) => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                go(a, out);
                go(b, out);
            }
            Formula::Box(i, a) | Formula::Dia(i, a) => {
                out.extend(i.index());
                go(a, out);
            }
        }
    }
    let mut out = Vec::new();
    go(&fm(s), &mut out);
    out
}

/// Residue and distinctness discipline of a sequent's annotations; trivially
/// satisfied by plain sequents.
pub fn check_annotations<A: Ann>(s: &Sequent<A>) -> Result<(), String> {
    fn go<A: Ann>(f: &Formula<A>, pol: Polarity, seen: &mut BTreeSet<u32>) -> Result<(), String> {
        match f {
            Formula::Bot | Formula::Atom(_) => Ok(()),
            Formula::And(a, b) | Formula::Or(a, b) => {
                go(a, pol, seen)?;
                go(b, pol, seen)
            }
            Formula::Imp(a, b) => {
                go(a, pol.flip(), seen)?;
                go(b, pol, seen)
            }
            Formula::Box(i, a) | Formula::Dia(i, a) => {
                if let Some(n) = i.index() {
                    let want = residue(matches!(f, Formula::Box(..)), pol);
                    if n % 4 != want {
                        return Err(format!("index {n} has the wrong residue for its position"));
                    }
                    if !seen.insert(n) {
                        return Err(format!("index {n} occurs twice"));
                    }
                }
                go(a, pol, seen)
            }
        }
    }
    go(&fm(s), Polarity::Positive, &mut BTreeSet::new())
}

// ---------------------------------------------------------------------------
// Matching premises up to renaming of new indices

struct Renaming<'a> {
    old: &'a BTreeSet<u32>,
    map: BTreeMap<u32, u32>,
    image: BTreeSet<u32>,
}

impl Renaming<'_> {
    fn ann<A: Ann>(&mut self, g: &A, a: &A) -> bool {
        match (g.index(), a.index()) {
            (None, None) => true,
            (Some(x), Some(y)) => {
                if self.old.contains(&x) {
                    return x == y;
                }
                match self.map.get(&x) {
                    Some(z) => *z == y,
                    None => {
                        if self.old.contains(&y) || self.image.contains(&y) || x % 4 != y % 4 {
                            return false;
                        }
                        self.map.insert(x, y);
                        self.image.insert(y);
                        true
                    }
                }
            }
            _ => false,
        }
    }

    fn formula<A: Ann>(&mut self, g: &Formula<A>, a: &Formula<A>) -> bool {
        use Formula as F;
        match (g, a) {
            (F::Bot, F::Bot) => true,
            (F::Atom(p), F::Atom(q)) => p == q,
            (F::And(a1, b1), F::And(a2, b2)) | (F::Or(a1, b1), F::Or(a2, b2)) | (F::Imp(a1, b1), F::Imp(a2, b2)) => {
                std::mem::discriminant(g) == std::mem::discriminant(a) && self.formula(a1, a2) && self.formula(b1, b2)
            }
            (F::Box(i, x), F::Box(j, y)) | (F::Dia(i, x), F::Dia(j, y)) => {
                std::mem::discriminant(g) == std::mem::discriminant(a) && self.ann(i, j) && self.formula(x, y)
            }
            _ => false,
        }
    }

    fn snapshot(&self) -> (BTreeMap<u32, u32>, BTreeSet<u32>) {
        (self.map.clone(), self.image.clone())
    }

    fn restore(&mut self, s: (BTreeMap<u32, u32>, BTreeSet<u32>)) {
        self.map = s.0;
        self.image = s.1;
    }

    fn item<A: Ann>(&mut self, g: &LhsItem<A>, a: &LhsItem<A>) -> bool {
        match (g, a) {
            (LhsItem::In(x), LhsItem::In(y)) => self.formula(x, y),
            (LhsItem::Dia(i, x), LhsItem::Dia(j, y)) => self.ann(i, j) && self.lhs(x, y),
            _ => false,
        }
    }

    fn lhs<A: Ann>(&mut self, g: &[LhsItem<A>], a: &[LhsItem<A>]) -> bool {
        if g.len() != a.len() {
            return false;
        }
        let mut used = vec![false; a.len()];
        self.lhs_from(g, a, &mut used)
    }

    fn lhs_from<A: Ann>(&mut self, g: &[LhsItem<A>], a: &[LhsItem<A>], used: &mut [bool]) -> bool {
        let Some((first, rest)) = g.split_first() else { return true };
        let ge = first.erase();
        for j in 0..a.len() {
            if used[j] || a[j].erase() != ge {
                continue;
            }
            let snap = self.snapshot();
            used[j] = true;
            if self.item(first, &a[j]) && self.lhs_from(rest, a, used) {
                return true;
            }
            used[j] = false;
            self.restore(snap);
        }
        false
    }

    fn seq<A: Ann>(&mut self, g: &Sequent<A>, a: &Sequent<A>) -> bool {
        let rhs_ok = match (&g.rhs, &a.rhs) {
            (Rhs::Out(x), Rhs::Out(y)) => self.formula(x, y),
            (Rhs::Box(i, x), Rhs::Box(j, y)) => self.ann(i, j) && self.seq(x, y),
            _ => false,
        };
        rhs_ok && self.lhs(&g.lhs, &a.lhs)
    }
}

/// Whether `actual` equals `generated` after a bijective renaming of the
/// indices that do not occur in `old`.
pub fn same_up_to_fresh<A: Ann>(generated: &[Sequent<A>], actual: &[Sequent<A>], old: &BTreeSet<u32>) -> bool {
    if generated.len() != actual.len() {
        return false;
    }
    let mut r = Renaming { old, map: BTreeMap::new(), image: BTreeSet::new() };
    generated.iter().zip(actual).all(|(g, a)| g.erase() == a.erase() && r.seq(g, a))
}

// ---------------------------------------------------------------------------
// Proof checking

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("at node {node:?} ({rule}): {msg}")]
pub struct CheckError {
    /// Premise indices from the root to the offending node.
    pub node: Vec<usize>,
    pub rule: RuleId,
    pub msg: String,
    pub kind: CheckErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckErrorKind {
    RuleNotInLogic,
    RuleNotApplicable,
    PremiseMismatch,
    Annotation,
}

/// Checks every node against its rule schema and that every rule belongs
/// to `logic`. Annotated proofs may pick any fresh indices, provided the
/// indices introduced across the whole tree are pairwise distinct.
pub fn check_proof<A: Ann>(d: &DerivationTree<A>, logic: Logic) -> Result<(), CheckError> {
    if let Err(msg) = check_annotations(&d.conclusion) {
        return Err(CheckError { node: vec![], rule: d.rule, msg, kind: CheckErrorKind::Annotation });
    }
    let mut introduced: BTreeSet<u32> = indices(&d.conclusion).into_iter().collect();
    let mut path = Vec::new();
    check_node(d, logic, &mut path, &mut introduced)
}

fn check_node<A: Ann>(
    d: &DerivationTree<A>,
    logic: Logic,
    path: &mut Vec<usize>,
    introduced: &mut BTreeSet<u32>,
) -> Result<(), CheckError> {
    let err = |kind, msg: String, path: &Vec<usize>| CheckError { node: path.clone(), rule: d.rule, msg, kind };
    if !d.rule.in_logic(logic) {
        return Err(err(CheckErrorKind::RuleNotInLogic, format!("not a rule of {logic}"), path));
    }
    let old: BTreeSet<u32> = indices(&d.conclusion).into_iter().collect();
    let mut fresh = Fresh::avoiding(old.iter().copied());
    let generated = apply_rule_backward(&d.conclusion, d.rule, &d.principal, &d.aux, &mut fresh)
        .map_err(|e| err(CheckErrorKind::RuleNotApplicable, e.to_string(), path))?;
    let actual: Vec<Sequent<A>> = d.premises.iter().map(|p| p.conclusion.clone()).collect();
    if !same_up_to_fresh(&generated, &actual, &old) {
        let want: Vec<String> = generated.iter().map(|g| g.to_string()).collect();
        let got: Vec<String> = actual.iter().map(|g| g.to_string()).collect();
        return Err(err(CheckErrorKind::PremiseMismatch, format!("expected premises [{}], found [{}]", want.join(" | "), got.join(" | ")), path));
    }
    for p in &d.premises {
        for i in indices(&p.conclusion) {
            if !old.contains(&i) && !introduced.insert(i) {
                return Err(err(CheckErrorKind::Annotation, format!("index {i} is introduced more than once"), path));
            }
        }
    }
    for (k, p) in d.premises.iter().enumerate() {
        path.push(k);
        check_node(p, logic, path, introduced)?;
        path.pop();
    }
    Ok(())
}
