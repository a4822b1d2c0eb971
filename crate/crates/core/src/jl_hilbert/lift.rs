//! Internalised necessitation and the two lifting constructions.

use std::collections::HashMap;

use super::nd::{Hyps, Nd};
use super::{ax, Hp, HpNode, HpRule, JlError};
use crate::syntax::{JFormula, Satisfier, Term};

/// Monotone source of fresh proof constants.
#[derive(Clone, Debug, Default)]
pub struct ConstGen {
    next: u32,
}

impl ConstGen {
    pub fn starting_at(next: u32) -> Self {
        ConstGen { next }
    }

    pub fn fresh(&mut self) -> u32 {
        let c = self.next;
        self.next += 1;
        c
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

/// A ground term `t` and a proof of `t:A` for the theorem `A` of `p`.
pub fn internalise(p: &Hp, gen: &mut ConstGen) -> Result<(Term, Hp), JlError> {
    let mut memo = HashMap::new();
    internalise_memo(p, gen, &mut memo)
}

fn internalise_memo(
    p: &Hp,
    gen: &mut ConstGen,
    memo: &mut HashMap<*const HpNode, (Term, Hp)>,
) -> Result<(Term, Hp), JlError> {
    let key = std::rc::Rc::as_ptr(&p.0);
    if let Some(r) = memo.get(&key) {
        return Ok(r.clone());
    }
    let out = match p.rule() {
        HpRule::Axiom(_) => {
            let c = gen.fresh();
            (Term::Const(c), Hp::can(vec![c], p.formula().clone()))
        }
        HpRule::Can { consts, inner } => {
            let c = gen.fresh();
            let mut cs = consts.clone();
            cs.push(c);
            (Term::Const(c), Hp::can(cs, inner.clone()))
        }
        HpRule::Mp(maj, min) => {
            let (t2, p2) = internalise_memo(maj, gen, memo)?;
            let (t1, p1) = internalise_memo(min, gen, memo)?;
            let (b, a) = maj.formula().as_imp().ok_or_else(|| JlError::Glue("malformed modus ponens".into()))?;
            let j = ax::jk1(&t2, &t1, b, a);
            let t = Term::app(t2, t1);
            (t, Hp::mp(&Hp::mp(&j, &p2)?, &p1)?)
        }
    };
    memo.insert(key, out.clone());
    Ok(out)
}

/// Splits `B1 → … → Bn → A` into its first `n` antecedents and the rest.
fn peel(f: &JFormula, n: usize) -> Result<(Vec<JFormula>, JFormula), JlError> {
    let mut bs = Vec::with_capacity(n);
    let mut cur = f.clone();
    for _ in 0..n {
        let (b, rest) = cur.as_imp().ok_or_else(|| JlError::Glue(format!("`{f}` has fewer than {n} premises")))?;
        bs.push(b.clone());
        cur = rest.clone();
    }
    Ok((bs, cur))
}

/// From a proof of `B1 → … → Bn → A` and terms `s1..sn`, a term `t` and
/// a proof of `s1:B1 → … → sn:Bn → t:A`.
pub fn lift(p: &Hp, ss: &[Term], gen: &mut ConstGen) -> Result<(Term, Hp), JlError> {
    let n = ss.len();
    let (bs, a) = peel(p.formula(), n)?;
    if n == 0 {
        return internalise(p, gen);
    }
    let mut hyps = Hyps::new();
    let hs: Vec<Nd> = bs.iter().zip(ss).map(|(b, s)| hyps.fresh(JFormula::just(s.clone(), b.clone()))).collect();
    let rest_from = |i: usize| bs[i..].iter().rev().fold(a.clone(), |acc, b| JFormula::imp(b.clone(), acc));

    if n == 1 && bs[0] == a {
        // Identity: s:A → s:A.
        let body = hs[0].clone();
        return Ok((ss[0].clone(), Nd::lam(&hs[0], &body)?.compile()?));
    }
    // When the first premise already is the remaining chain, apply it directly.
    let (mut term, mut cur, start) = if bs[0] == rest_from(1) {
        (ss[0].clone(), hs[0].clone(), 1)
    } else {
        let (u, pu) = internalise(p, gen)?;
        (u, Nd::konst(&pu), 0)
    };
    for i in start..n {
        let rest = rest_from(i + 1);
        let j = ax::jk1(&term, &ss[i], &bs[i], &rest);
        cur = Nd::konst(&j).apps(&[&cur, &hs[i]])?;
        term = Term::app(term, ss[i].clone());
    }
    let refs: Vec<&Nd> = hs.iter().collect();
    Ok((term, Nd::lams(&refs, &cur)?.compile()?))
}

/// From a proof of `B1 → … → Bn → C → A`, terms `s1..sn` and a satisfier
/// `ν`, a satisfier `μ` and a proof of `s1:B1 → … → sn:Bn → ν:C → μ:A`.
pub fn lift_sat(p: &Hp, ss: &[Term], nu: &Satisfier, gen: &mut ConstGen) -> Result<(Satisfier, Hp), JlError> {
    let n = ss.len();
    let (bs, ca) = peel(p.formula(), n)?;
    let (c, a) = ca.as_imp().ok_or_else(|| JlError::Glue(format!("`{ca}` is not an implication")))?;
    let mut hyps = Hyps::new();
    let hs: Vec<Nd> = bs.iter().zip(ss).map(|(b, s)| hyps.fresh(JFormula::just(s.clone(), b.clone()))).collect();
    let g = hyps.fresh(JFormula::sat(nu.clone(), c.clone()));
    if n == 0 && c == a {
        return Ok((nu.clone(), Nd::lam(&g, &g)?.compile()?));
    }
    let (t, q) = lift(p, ss, gen)?;
    let mut refs: Vec<&Nd> = hs.iter().collect();
    let tca = Nd::konst(&q).apps(&refs)?;
    let j = ax::jk2(&t, nu, c, a);
    let body = Nd::konst(&j).apps(&[&tca, &g])?;
    refs.push(&g);
    Ok((Satisfier::prop(t, nu.clone()), Nd::lams(&refs, &body)?.compile()?))
}
