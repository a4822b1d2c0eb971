//! Iterative-deepening backward proof search over plain sequents.

use std::collections::HashMap;

use super::{apply_rule_backward, DerivationTree, RuleId};
use crate::nested::{position_of, LhsItem, Loc, Position, Rhs, Sequent};
use crate::syntax::{Formula, Fresh, Logic};

/// Sequent expansions allowed per search before giving up.
pub const NODE_LIMIT: usize = 400_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Proved(DerivationTree<()>),
    Unknown,
}

struct Abort;

struct Search {
    logic: Logic,
    nodes: usize,
    limit: usize,
    failed: HashMap<Sequent<()>, usize>,
}

/// Searches for a proof of height at most `depth_budget`.
pub fn search(s: &Sequent<()>, logic: Logic, depth_budget: usize) -> SearchOutcome {
    search_with_limit(s, logic, depth_budget, NODE_LIMIT)
}

pub fn search_with_limit(s: &Sequent<()>, logic: Logic, depth_budget: usize, limit: usize) -> SearchOutcome {
    let mut st = Search { logic, nodes: 0, limit, failed: HashMap::new() };
    let mut s = s.clone();
    s.normalize();
    for h in 1..=depth_budget {
        match st.prove(&s, h) {
            Ok(Some(d)) => return SearchOutcome::Proved(d),
            Ok(None) => {}
            Err(Abort) => return SearchOutcome::Unknown,
        }
    }
    SearchOutcome::Unknown
}

/// Every left-hand multiset of `s`: its level, the descent into `⟨·⟩`
/// brackets, and the members.
fn containers(s: &Sequent<()>) -> Vec<(usize, Vec<usize>, &Vec<LhsItem<()>>)> {
    fn walk<'a>(spine: usize, path: Vec<usize>, l: &'a Vec<LhsItem<()>>, out: &mut Vec<(usize, Vec<usize>, &'a Vec<LhsItem<()>>)>) {
        out.push((spine, path.clone(), l));
        for (i, it) in l.iter().enumerate() {
            if let LhsItem::Dia(_, b) = it {
                let mut p = path.clone();
                p.push(i);
                walk(spine, p, b, out);
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = s;
    let mut spine = 0;
    loop {
        walk(spine, vec![], &cur.lhs, &mut out);
        match &cur.rhs {
            Rhs::Box(_, inner) => {
                cur = inner;
                spine += 1;
            }
            Rhs::Out(_) => break,
        }
    }
    out
}

fn pos(s: &Sequent<()>, spine: usize, path: &[usize], i: usize) -> Position {
    let mut p = path.to_vec();
    p.push(i);
    position_of(s, &Loc { spine, lhs_path: p }).expect("valid location")
}

fn rhs_pos(s: &Sequent<()>, spine: usize) -> Position {
    position_of(s, &Loc { spine, lhs_path: vec![] }).expect("valid level")
}

/// The innermost level and its output formula.
fn output(s: &Sequent<()>) -> (usize, &Sequent<()>, &Formula<()>) {
    let mut cur = s;
    let mut spine = 0;
    loop {
        match &cur.rhs {
            Rhs::Box(_, inner) => {
                cur = inner;
                spine += 1;
            }
            Rhs::Out(f) => return (spine, cur, f),
        }
    }
}

/// A step to try: the rule, its positions, and an optional sibling bracket
/// (given as a member) that must be found again after contraction.
#[derive(Clone)]
struct Choice {
    rule: RuleId,
    spine: usize,
    path: Vec<usize>,
    index: Option<usize>,
    sibling: Option<usize>,
    contract: bool,
}

impl Search {
    fn prove(&mut self, s: &Sequent<()>, h: usize) -> Result<Option<DerivationTree<()>>, Abort> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(Abort);
        }
        if let Some(d) = axiom(s) {
            return Ok(Some(d));
        }
        if h <= 1 {
            return Ok(None);
        }
        if self.failed.get(s).is_some_and(|&f| f >= h) {
            return Ok(None);
        }
        let r = self.expand(s, h)?;
        if r.is_none() {
            let e = self.failed.entry(s.clone()).or_insert(0);
            *e = (*e).max(h);
        }
        Ok(r)
    }

    fn expand(&mut self, s: &Sequent<()>, h: usize) -> Result<Option<DerivationTree<()>>, Abort> {
        let (ospine, olevel, of) = output(s);
        let conts = containers(s);

        // Invertible rules: commit to the first applicable one.
        let out_rule = match of {
            Formula::Imp(..) => Some(RuleId::ImpR),
            Formula::And(..) => Some(RuleId::AndR),
            Formula::Box(..) => Some(RuleId::BoxR),
            _ => None,
        };
        if let Some(rule) = out_rule.filter(|r| *r == RuleId::ImpR) {
            return self.apply(s, rule, rhs_pos(s, ospine), vec![], h);
        }
        for (spine, path, items) in &conts {
            for (i, it) in items.iter().enumerate() {
                let rule = match it {
                    LhsItem::In(Formula::And(..)) => RuleId::AndL,
                    LhsItem::In(Formula::Or(..)) => RuleId::OrL,
                    LhsItem::In(Formula::Dia(..)) => RuleId::DiaL,
                    _ => continue,
                };
                if rule == RuleId::OrL && out_rule.is_some() {
                    continue;
                }
                return self.apply(s, rule, pos(s, *spine, path, i), vec![], h);
            }
        }
        if let Some(rule) = out_rule {
            return self.apply(s, rule, rhs_pos(s, ospine), vec![], h);
        }
        for (spine, path, items) in &conts {
            for (i, it) in items.iter().enumerate() {
                if let LhsItem::In(Formula::Or(..)) = it {
                    return self.apply(s, RuleId::OrL, pos(s, *spine, path, i), vec![], h);
                }
            }
        }

        // Choice points.
        let mut choices = Vec::new();
        let base = |rule, spine, path: &Vec<usize>, index, sibling, contract| Choice {
            rule,
            spine,
            path: path.clone(),
            index,
            sibling,
            contract,
        };
        for contract in [false, true] {
            for (spine, path, items) in &conts {
                let at_box_level = path.is_empty() && *spine < ospine;
                for (i, it) in items.iter().enumerate() {
                    let LhsItem::In(f) = it else { continue };
                    match f {
                        Formula::Imp(..) => choices.push(base(RuleId::ImpL, *spine, path, Some(i), None, contract)),
                        Formula::Box(..) => {
                            if at_box_level {
                                choices.push(base(RuleId::BoxLbr, *spine, path, Some(i), None, contract));
                            }
                            for (j, sib) in items.iter().enumerate() {
                                if matches!(sib, LhsItem::Dia(..)) {
                                    choices.push(base(RuleId::BoxLdia, *spine, path, Some(i), Some(j), contract));
                                }
                            }
                            if self.logic.has_t() {
                                choices.push(base(RuleId::TL, *spine, path, Some(i), None, contract));
                            }
                            if self.logic.has_4() {
                                if at_box_level {
                                    choices.push(base(RuleId::FourLbr, *spine, path, Some(i), None, contract));
                                }
                                for (j, sib) in items.iter().enumerate() {
                                    if matches!(sib, LhsItem::Dia(..)) {
                                        choices.push(base(RuleId::FourLdia, *spine, path, Some(i), Some(j), contract));
                                    }
                                }
                            }
                        }
                        _ => {}
                    }
                }
            }
            if !contract {
                if let Formula::Or(..) = of {
                    choices.push(base(RuleId::OrR1, ospine, &vec![], None, None, false));
                    choices.push(base(RuleId::OrR2, ospine, &vec![], None, None, false));
                }
                if let Formula::Dia(..) = of {
                    for (j, sib) in olevel.lhs.iter().enumerate() {
                        if matches!(sib, LhsItem::Dia(..)) {
                            choices.push(base(RuleId::DiaR, ospine, &vec![], None, Some(j), false));
                            if self.logic.has_4() {
                                choices.push(base(RuleId::FourR, ospine, &vec![], None, Some(j), false));
                            }
                        }
                    }
                    if self.logic.has_t() {
                        choices.push(base(RuleId::TR, ospine, &vec![], None, None, false));
                    }
                }
            }
        }

        for c in choices {
            let cost = if c.contract { 2 } else { 1 };
            if h <= cost {
                continue;
            }
            if let Some(d) = self.try_choice(s, &c, h)? {
                return Ok(Some(d));
            }
        }
        Ok(None)
    }

    fn apply(
        &mut self,
        s: &Sequent<()>,
        rule: RuleId,
        principal: Position,
        aux: Vec<Position>,
        h: usize,
    ) -> Result<Option<DerivationTree<()>>, Abort> {
        let Ok(prem) = apply_rule_backward(s, rule, &principal, &aux, &mut Fresh::new()) else {
            return Ok(None);
        };
        let mut premises = Vec::with_capacity(prem.len());
        for p in &prem {
            match self.prove(p, h - 1)? {
                Some(d) => premises.push(d),
                None => return Ok(None),
            }
        }
        Ok(Some(DerivationTree { conclusion: s.clone(), rule, principal, aux, premises }))
    }

    fn try_choice(&mut self, s: &Sequent<()>, c: &Choice, h: usize) -> Result<Option<DerivationTree<()>>, Abort> {
        let positions = |s: &Sequent<()>, c: &Choice| -> (Position, Vec<Position>) {
            let p = match c.index {
                Some(i) => pos(s, c.spine, &c.path, i),
                None => rhs_pos(s, c.spine),
            };
            let aux = c.sibling.map(|j| vec![pos(s, c.spine, &c.path, j)]).unwrap_or_default();
            (p, aux)
        };
        if !c.contract {
            let (p, aux) = positions(s, c);
            return self.apply(s, c.rule, p, aux, h);
        }
        let i = c.index.expect("contraction needs a member");
        let (p, _) = positions(s, c);
        let Ok(mut prem) = apply_rule_backward(s, RuleId::Contr, &p, &[], &mut Fresh::new()) else {
            return Ok(None);
        };
        let s2 = prem.pop().expect("one premise");
        // Find the duplicated multiset again after re-sorting.
        let old = containers(s).into_iter().find(|(sp, pa, _)| *sp == c.spine && *pa == c.path).map(|x| x.2.clone());
        let Some(old) = old else { return Ok(None) };
        let item = &old[i];
        let mut want = old.clone();
        want.push(item.clone());
        want.sort();
        let found = containers(&s2).into_iter().find(|(sp, pa, l)| *sp == c.spine && pa.len() == c.path.len() && **l == want);
        let Some((sp, pa, l)) = found else { return Ok(None) };
        let Some(ni) = l.iter().position(|x| x == item) else { return Ok(None) };
        let sib = match c.sibling {
            Some(j) => match l.iter().position(|x| *x == old[j]) {
                Some(k) => Some(k),
                None => return Ok(None),
            },
            None => None,
        };
        let c2 = Choice { rule: c.rule, spine: sp, path: pa, index: Some(ni), sibling: sib, contract: false };
        let (p2, aux2) = positions(&s2, &c2);
        if let Some(inner) = self.apply(&s2, c2.rule, p2, aux2, h - 1)? {
            return Ok(Some(DerivationTree { conclusion: s.clone(), rule: RuleId::Contr, principal: p, aux: vec![], premises: vec![inner] }));
        }
        Ok(None)
    }
}

/// Closes `s` with an axiom if possible.
fn axiom(s: &Sequent<()>) -> Option<DerivationTree<()>> {
    for (spine, path, items) in containers(s) {
        if let Some(i) = items.iter().position(|x| *x == LhsItem::In(Formula::Bot)) {
            return Some(DerivationTree { conclusion: s.clone(), rule: RuleId::Bot, principal: pos(s, spine, &path, i), aux: vec![], premises: vec![] });
        }
    }
    let (spine, level, f) = output(s);
    if let Formula::Atom(_) = f {
        if let Some(i) = level.lhs.iter().position(|x| *x == LhsItem::In(f.clone())) {
            return Some(DerivationTree { conclusion: s.clone(), rule: RuleId::Id, principal: pos(s, spine, &[], i), aux: vec![], premises: vec![] });
        }
    }
    None
}
