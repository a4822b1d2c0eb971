//! Bounded intuitionistic propositional proof search (contraction-free
//! sequent calculus) with proof-term extraction. Justification and
//! satisfier formulas are opaque atoms here.

use super::nd::{abort, case, fst, inl, inr, pair, snd, Hyps, Nd};
use super::{Hp, JlError};
use crate::syntax::JFormula;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IplFail {
    #[error("not provable in intuitionistic propositional logic")]
    Unprovable,
    #[error("propositional search budget exhausted")]
    Exhausted,
    #[error(transparent)]
    Internal(#[from] JlError),
}

/// Proves `goal` from no assumptions, visiting at most `budget` sequents.
pub fn prove_ipl(goal: &JFormula, budget: usize) -> Result<Hp, IplFail> {
    let mut hyps = Hyps::new();
    let nd = prove_ipl_nd(&[], goal, budget, &mut hyps)?;
    Ok(nd.compile()?)
}

/// Proves `goal` from the given assumption terms; the result may mention
/// the assumptions' hypotheses.
pub fn prove_ipl_nd(ctx: &[Nd], goal: &JFormula, budget: usize, hyps: &mut Hyps) -> Result<Nd, IplFail> {
    let mut s = Search { budget, hyps };
    match s.prove(ctx.to_vec(), Vec::new(), goal)? {
        Some(n) => Ok(n),
        None => Err(IplFail::Unprovable),
    }
}

struct Search<'a> {
    budget: usize,
    hyps: &'a mut Hyps,
}

fn add(ctx: &mut Vec<Nd>, n: Nd) {
    if !ctx.iter().any(|c| c.ty() == n.ty()) {
        ctx.push(n);
    }
}

fn is_top(f: &JFormula) -> bool {
    matches!(f.as_imp(), Some((JFormula::Bot, _)))
}

impl Search<'_> {
    /// `ctx` holds assumptions still to be decomposed; `done` holds
    /// assumptions already decomposed, kept for exact matches.
    fn prove(&mut self, mut ctx: Vec<Nd>, mut done: Vec<Nd>, goal: &JFormula) -> Result<Option<Nd>, IplFail> {
        if self.budget == 0 {
            return Err(IplFail::Exhausted);
        }
        self.budget -= 1;

        // Invertible left rules, to saturation.
        let mut i = 0;
        while i < ctx.len() {
            let n = ctx[i].clone();
            match n.ty() {
                JFormula::Bot => return Ok(Some(abort(&n, goal)?)),
                JFormula::And(..) => {
                    done.push(ctx.remove(i));
                    add(&mut ctx, fst(&n)?);
                    add(&mut ctx, snd(&n)?);
                    i = 0;
                    continue;
                }
                JFormula::Imp(a, _) => {
                    if is_top(n.ty()) {
                        ctx.remove(i);
                        continue;
                    }
                    if let Some(m) = ctx.iter().chain(&done).find(|c| c.ty() == &**a).cloned() {
                        done.push(ctx.remove(i));
                        add(&mut ctx, n.app(&m)?);
                        i = 0;
                        continue;
                    }
                    match &**a {
                        JFormula::And(c, d) => {
                            // (C∧D)→B  ⇒  C→D→B
                            let hc = self.hyps.fresh((**c).clone());
                            let hd = self.hyps.fresh((**d).clone());
                            let body = n.app(&pair(&hc, &hd)?)?;
                            let cur = Nd::lams(&[&hc, &hd], &body)?;
                            done.push(ctx.remove(i));
                            add(&mut ctx, cur);
                            i = 0;
                            continue;
                        }
                        JFormula::Or(c, d) => {
                            // (C∨D)→B  ⇒  C→B, D→B
                            let hc = self.hyps.fresh((**c).clone());
                            let l = Nd::lam(&hc, &n.app(&inl(&hc, d)?)?)?;
                            let hd = self.hyps.fresh((**d).clone());
                            let r = Nd::lam(&hd, &n.app(&inr(c, &hd)?)?)?;
                            done.push(ctx.remove(i));
                            add(&mut ctx, l);
                            add(&mut ctx, r);
                            i = 0;
                            continue;
                        }
                        _ => {}
                    }
                }
                _ => {}
            }
            i += 1;
        }

        if let Some(n) = ctx.iter().chain(&done).find(|c| c.ty() == goal) {
            return Ok(Some(n.clone()));
        }

        // Invertible right rules.
        match goal {
            JFormula::And(a, b) => {
                let Some(l) = self.prove(ctx.clone(), done.clone(), a)? else { return Ok(None) };
                let Some(r) = self.prove(ctx, done, b)? else { return Ok(None) };
                return Ok(Some(pair(&l, &r)?));
            }
            JFormula::Imp(a, b) => {
                let h = self.hyps.fresh((**a).clone());
                let mut c2 = ctx;
                add(&mut c2, h.clone());
                let Some(body) = self.prove(c2, done, b)? else { return Ok(None) };
                return Ok(Some(Nd::lam(&h, &body)?));
            }
            _ => {}
        }

        // Disjunction on the left is invertible but branching.
        if let Some(i) = ctx.iter().position(|c| matches!(c.ty(), JFormula::Or(..))) {
            let d = ctx.remove(i);
            done.push(d.clone());
            let JFormula::Or(a, b) = d.ty() else { unreachable!() };
            let ha = self.hyps.fresh((**a).clone());
            let mut ca = ctx.clone();
            add(&mut ca, ha.clone());
            let Some(pa) = self.prove(ca, done.clone(), goal)? else { return Ok(None) };
            let hb = self.hyps.fresh((**b).clone());
            let mut cb = ctx;
            add(&mut cb, hb.clone());
            let Some(pb) = self.prove(cb, done, goal)? else { return Ok(None) };
            return Ok(Some(case(&d, &Nd::lam(&ha, &pa)?, &Nd::lam(&hb, &pb)?)?));
        }

        // Choice points.
        if let JFormula::Or(a, b) = goal {
            if let Some(l) = self.prove(ctx.clone(), done.clone(), a)? {
                return Ok(Some(inl(&l, b)?));
            }
            if let Some(r) = self.prove(ctx.clone(), done.clone(), b)? {
                return Ok(Some(inr(a, &r)?));
            }
        }
        for i in 0..ctx.len() {
            let f = ctx[i].clone();
            let Some((cd, _)) = f.ty().as_imp() else { continue };
            let Some((c, d)) = cd.as_imp() else { continue };
            // (C→D)→B:  from D→B prove C→D, then use B.
            let mut rest = ctx.clone();
            rest.remove(i);
            let hd = self.hyps.fresh(d.clone());
            let hc = self.hyps.fresh(c.clone());
            let d_to_b = Nd::lam(&hd, &f.app(&Nd::lam(&hc, &hd)?)?)?;
            let mut left = rest.clone();
            add(&mut left, d_to_b);
            let mut used = done.clone();
            used.push(f.clone());
            let Some(cd_proof) = self.prove(left, used.clone(), cd)? else { continue };
            let bn = f.app(&cd_proof)?;
            let mut right = rest;
            add(&mut right, bn);
            if let Some(p) = self.prove(right, used, goal)? {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }
}
