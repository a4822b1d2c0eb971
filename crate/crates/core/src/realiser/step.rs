//! Per-node working state: the substitution accumulated so far, the
//! conclusion's realisation, stored lemmas, propositional glue and merging.

use thiserror::Error;

use crate::jl_hilbert::{ax, case, fst, inl, inr, internalise, pair, snd, prove_ipl_nd, subst_hp, ConstGen, Hp, Hyps, IplFail, JlError, Nd, Subst};
use crate::syntax::{forced_var, Formula, JFormula, Polarity, RTerm, RealisationFn, Satisfier, Term, Var};
use crate::syntax::AnnotatedFormula;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealiserError {
    /// A propositional glue search ran out of budget.
    #[error("unknown: {0}")]
    Unknown(String),
    /// A construction produced something it should not have.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("input rejected: {0}")]
    Input(String),
}

/// `src → dst` for two formulas with the same main connective, from
/// lemmas relating the immediate subformulas (`None` where they coincide).
/// For an implication the left lemma runs from `dst`'s antecedent to
/// `src`'s.
fn congruence(src: &JFormula, dst: &JFormula, la: Option<&Hp>, lb: Option<&Hp>) -> Result<Hp, JlError> {
    let conv = |l: Option<&Hp>, x: &Nd| match l {
        Some(l) => Nd::konst(l).app(x),
        None => Ok(x.clone()),
    };
    let mut hyps = Hyps::new();
    let h = hyps.fresh(src.clone());
    let body = match dst {
        JFormula::And(..) => pair(&conv(la, &fst(&h)?)?, &conv(lb, &snd(&h)?)?)?,
        JFormula::Or(ta, tb) => {
            let JFormula::Or(sa, sb) = src else { return Err(JlError::Glue(format!("`{src}` is not a disjunction"))) };
            let (x, y) = (hyps.fresh((**sa).clone()), hyps.fresh((**sb).clone()));
            let left = Nd::lam(&x, &inl(&conv(la, &x)?, tb)?)?;
            let right = Nd::lam(&y, &inr(ta, &conv(lb, &y)?)?)?;
            case(&h, &left, &right)?
        }
        JFormula::Imp(ta, _) => {
            let x = hyps.fresh((**ta).clone());
            Nd::lam(&x, &conv(lb, &h.app(&conv(la, &x)?)?)?)?
        }
        _ => return Err(JlError::Glue(format!("`{dst}` has no binary connective"))),
    };
    Nd::lam(&h, &body)?.compile()
}

impl From<JlError> for RealiserError {
    fn from(e: JlError) -> Self {
        RealiserError::Invariant(e.to_string())
    }
}

pub(crate) fn inv<T>(msg: impl Into<String>) -> Result<T, RealiserError> {
    Err(RealiserError::Invariant(msg.into()))
}

/// The leaf recipe: reserved variables for positive indices, the forced
/// variables for negative ones.
pub fn leaf_term(i: u32) -> RTerm {
    match i % 4 {
        0 => RTerm::Proof(Term::ReservedPVar(i / 4)),
        2 => RTerm::Sat(Satisfier::ReservedSVar(i / 4)),
        _ => forced_var(i).expect("odd index"),
    }
}

/// Realises `f` without the self-reference check (intermediate
/// realisations are checked only at the end).
pub fn realise(r: &RealisationFn, f: &AnnotatedFormula) -> Result<JFormula, RealiserError> {
    Ok(match f {
        Formula::Bot => JFormula::Bot,
        Formula::Atom(p) => JFormula::Atom(p.clone()),
        Formula::And(a, b) => JFormula::and(realise(r, a)?, realise(r, b)?),
        Formula::Or(a, b) => JFormula::or(realise(r, a)?, realise(r, b)?),
        Formula::Imp(a, b) => JFormula::imp(realise(r, a)?, realise(r, b)?),
        Formula::Box(i, b) => JFormula::just(proof_term(r, *i)?, realise(r, b)?),
        Formula::Dia(i, b) => JFormula::sat(sat_term(r, *i)?, realise(r, b)?),
    })
}

pub(crate) fn proof_term(r: &RealisationFn, i: u32) -> Result<Term, RealiserError> {
    match r.get(&i) {
        Some(RTerm::Proof(t)) => Ok(t.clone()),
        Some(_) => inv(format!("index {i} is realised by a satisfier")),
        None => inv(format!("index {i} is not realised")),
    }
}

pub(crate) fn sat_term(r: &RealisationFn, i: u32) -> Result<Satisfier, RealiserError> {
    match r.get(&i) {
        Some(RTerm::Sat(m)) => Ok(m.clone()),
        Some(_) => inv(format!("index {i} is realised by a proof term")),
        None => inv(format!("index {i} is not realised")),
    }
}

pub(crate) fn imp(a: JFormula, b: JFormula) -> JFormula {
    JFormula::imp(a, b)
}

/// `F1 → … → Fk → G`.
pub(crate) fn chain(prems: Vec<JFormula>, goal: JFormula) -> JFormula {
    prems.into_iter().rev().fold(goal, |acc, p| imp(p, acc))
}

pub(crate) fn var_of(i: u32) -> Var {
    if i % 4 == 1 {
        Var::P(i / 4)
    } else {
        Var::S(i / 4)
    }
}

pub(crate) struct Step<'a> {
    pub gen: &'a mut ConstGen,
    pub budget: usize,
    pub sigma: Subst,
    pub r: RealisationFn,
    pub lemmas: Vec<Hp>,
    /// Lemmas offered to every glue search of this step.
    pub shared: Vec<usize>,
    /// When set, every merged subformula is recorded with its lemmas.
    pub log: Option<Vec<(AnnotatedFormula, Polarity, [Option<usize>; 2])>>,
}

impl<'a> Step<'a> {
    pub fn new(gen: &'a mut ConstGen, budget: usize) -> Self {
        Step { gen, budget, sigma: Subst::new(), r: RealisationFn::new(), lemmas: Vec::new(), shared: Vec::new(), log: None }
    }

    pub fn add(&mut self, p: Hp) -> usize {
        self.lemmas.push(p);
        self.lemmas.len() - 1
    }

    pub fn lemma(&self, id: usize) -> Hp {
        self.lemmas[id].clone()
    }

    /// Extends the step substitution by `v ↦ t`, updating every stored
    /// lemma and every term already chosen for a positive index.
    pub fn tau(&mut self, v: Var, t: RTerm) {
        let mut s = Subst::new();
        s.insert(v, t);
        if s.is_identity() {
            return;
        }
        self.sigma = self.sigma.then(&s);
        for l in self.lemmas.iter_mut() {
            *l = subst_hp(&s, l);
        }
        for (i, t) in self.r.iter_mut() {
            if i % 2 == 0 {
                *t = s.rterm(t);
            }
        }
    }

    /// The conclusion's realisation of `f`.
    pub fn cf(&self, f: &AnnotatedFormula) -> Result<JFormula, RealiserError> {
        realise(&self.r, f)
    }

    /// `σ(rᵢ(f))`.
    pub fn pf(&self, ri: &RealisationFn, f: &AnnotatedFormula) -> Result<JFormula, RealiserError> {
        Ok(self.sigma.formula(&realise(ri, f)?))
    }

    pub fn pterm(&self, ri: &RealisationFn, i: u32) -> Result<Term, RealiserError> {
        Ok(self.sigma.term(&proof_term(ri, i)?))
    }

    /// Proves `goal` propositionally from the given lemmas and the shared ones.
    pub fn glue(&mut self, extra: &[Hp], goal: &JFormula) -> Result<Hp, RealiserError> {
        let mut ctx: Vec<Nd> = extra.iter().map(Nd::konst).collect();
        ctx.extend(self.shared.iter().map(|&i| Nd::konst(&self.lemmas[i])));
        let mut hyps = Hyps::new();
        match prove_ipl_nd(&ctx, goal, self.budget, &mut hyps) {
            Ok(nd) => Ok(nd.compile()?),
            Err(IplFail::Exhausted) => Err(RealiserError::Unknown(format!("glue budget exhausted on `{goal}`"))),
            Err(IplFail::Unprovable) => inv(format!("glue goal is not derivable: `{goal}`")),
            Err(IplFail::Internal(e)) => Err(e.into()),
        }
    }

    /// Glue without the shared lemmas.
    pub fn glue_only(&mut self, extra: &[Hp], goal: &JFormula) -> Result<Hp, RealiserError> {
        let saved = std::mem::take(&mut self.shared);
        let out = self.glue(extra, goal);
        self.shared = saved;
        out
    }

    // -----------------------------------------------------------------------
    // Merging

    /// Merges two realisations of `f` (at polarity `pol`) into `self.r`.
    /// Returns, per side, a lemma proving `σ(rᵢ(f)) → r(f)` (positive) or
    /// `r(f) → σ(rᵢ(f))` (negative); `None` when both sides coincide.
    pub fn merge(
        &mut self,
        f: &AnnotatedFormula,
        pol: Polarity,
        rs: [&RealisationFn; 2],
    ) -> Result<[Option<usize>; 2], RealiserError> {
        let out = self.merge_at(f, pol, rs)?;
        if let Some(log) = self.log.as_mut() {
            log.push((f.clone(), pol, out));
        }
        Ok(out)
    }

    fn merge_at(
        &mut self,
        f: &AnnotatedFormula,
        pol: Polarity,
        rs: [&RealisationFn; 2],
    ) -> Result<[Option<usize>; 2], RealiserError> {
        match f {
            Formula::Bot | Formula::Atom(_) => Ok([None, None]),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                let pa_pol = if matches!(f, Formula::Imp(..)) { pol.flip() } else { pol };
                let pa = self.merge(a, pa_pol, rs)?;
                let pb = self.merge(b, pol, rs)?;
                let mut out = [None, None];
                for i in 0..2 {
                    let ids: Vec<usize> = [pa[i], pb[i]].into_iter().flatten().collect();
                    if ids.is_empty() {
                        continue;
                    }
                    let (c, p) = (self.cf(f)?, self.pf(rs[i], f)?);
                    let (src, dst) = if pol.is_positive() { (p, c) } else { (c, p) };
                    let (la, lb) = (pa[i].map(|k| self.lemma(k)), pb[i].map(|k| self.lemma(k)));
                    let h = congruence(&src, &dst, la.as_ref(), lb.as_ref())?;
                    if *h.formula() != imp(src, dst) {
                        return inv(format!("connective merge proves `{}`", h.formula()));
                    }
                    out[i] = Some(self.add(h));
                }
                Ok(out)
            }
            Formula::Box(n, b) | Formula::Dia(n, b) => {
                let is_box = matches!(f, Formula::Box(..));
                let pb = self.merge(b, pol, rs)?;
                if pol.is_positive() {
                    self.merge_pos(f, *n, is_box, b, pb, rs)
                } else {
                    self.merge_neg(f, *n, is_box, b, pb, rs)
                }
            }
        }
    }

    fn merge_pos(
        &mut self,
        f: &AnnotatedFormula,
        n: u32,
        is_box: bool,
        b: &AnnotatedFormula,
        pb: [Option<usize>; 2],
        rs: [&RealisationFn; 2],
    ) -> Result<[Option<usize>; 2], RealiserError> {
        if n % 2 != 0 {
            return inv(format!("positive modality with odd index {n}"));
        }
        let s: Vec<RTerm> = (0..2)
            .map(|i| rs[i].get(&n).map(|t| self.sigma.rterm(t)).ok_or(()))
            .collect::<Result<_, _>>()
            .or_else(|_| inv(format!("index {n} not realised on both sides")))?;
        let cb = self.cf(b)?;
        // New terms for each side and, when the body changed, a lemma
        // `sᵢ:σrᵢ(B) → vᵢ:r(B)`.
        let mut v = Vec::new();
        let mut core: Vec<Option<Hp>> = Vec::new();
        for i in 0..2 {
            match pb[i] {
                None => {
                    v.push(s[i].clone());
                    core.push(None);
                }
                Some(id) => {
                    let pbi = self.pf(rs[i], b)?;
                    let (u, uproof) = internalise(&self.lemma(id), self.gen)?;
                    let (vi, j) = match &s[i] {
                        RTerm::Proof(si) => (RTerm::Proof(Term::app(u.clone(), si.clone())), ax::jk1(&u, si, &pbi, &cb)),
                        RTerm::Sat(mi) => (RTerm::Sat(Satisfier::prop(u.clone(), mi.clone())), ax::jk2(&u, mi, &pbi, &cb)),
                    };
                    v.push(vi);
                    core.push(Some(Hp::mp(&j, &uproof)?));
                }
            }
        }
        if v[0] == v[1] {
            self.r.insert(n, v[0].clone());
            return Ok([core[0].take().map(|c| self.add(c)), core[1].take().map(|c| self.add(c))]);
        }
        let joined = match (&v[0], &v[1]) {
            (RTerm::Proof(a), RTerm::Proof(c)) => RTerm::Proof(Term::sum(a.clone(), c.clone())),
            (RTerm::Sat(a), RTerm::Sat(c)) => RTerm::Sat(Satisfier::union(a.clone(), c.clone())),
            _ => return inv("mixed term kinds"),
        };
        self.r.insert(n, joined);
        let mut out = [None, None];
        for i in 0..2 {
            let inj = match (&v[0], &v[1], is_box) {
                (RTerm::Proof(a), RTerm::Proof(c), true) => {
                    if i == 0 {
                        ax::jsum_l(a, c, &cb)
                    } else {
                        ax::jsum_r(a, c, &cb)
                    }
                }
                (RTerm::Sat(a), RTerm::Sat(c), false) => {
                    if i == 0 {
                        ax::junion_l(a, c, &cb)
                    } else {
                        ax::junion_r(a, c, &cb)
                    }
                }
                _ => return inv("term kind does not match the modality"),
            };
            let lemma = match core[i].take() {
                None => inj,
                Some(c) => {
                    let goal = imp(self.pf(rs[i], f)?, self.cf(f)?);
                    self.glue_only(&[c, inj], &goal)?
                }
            };
            out[i] = Some(self.add(lemma));
        }
        Ok(out)
    }

    fn merge_neg(
        &mut self,
        f: &AnnotatedFormula,
        n: u32,
        is_box: bool,
        b: &AnnotatedFormula,
        pb: [Option<usize>; 2],
        rs: [&RealisationFn; 2],
    ) -> Result<[Option<usize>; 2], RealiserError> {
        let Some(v) = forced_var(n) else { return inv(format!("negative modality with even index {n}")) };
        self.r.insert(n, v.clone());
        if pb == [None, None] {
            return Ok([None, None]);
        }
        let cb = self.cf(b)?;
        let mut us = Vec::new();
        let mut ups = Vec::new();
        for i in 0..2 {
            let q = match pb[i] {
                Some(id) => self.lemma(id),
                None => crate::jl_hilbert::identity(&cb)?,
            };
            let (u, up) = internalise(&q, self.gen)?;
            us.push(u);
            ups.push(up);
        }
        let u = Term::sum(us[0].clone(), us[1].clone());
        let mut ids = Vec::new();
        for i in 0..2 {
            let body = imp(cb.clone(), self.pf(rs[i], b)?);
            let inj = if i == 0 { ax::jsum_l(&us[0], &us[1], &body) } else { ax::jsum_r(&us[0], &us[1], &body) };
            let w = Hp::mp(&inj, &ups[i])?;
            ids.push(self.add(w));
        }
        let vv = var_of(n);
        let image = match &v {
            RTerm::Proof(x) => RTerm::Proof(Term::app(u.clone(), x.clone())),
            RTerm::Sat(a) => RTerm::Sat(Satisfier::prop(u.clone(), a.clone())),
        };
        self.tau(vv, image);
        let cb = self.cf(b)?;
        let mut out = [None, None];
        for i in 0..2 {
            let pbi = self.pf(rs[i], b)?;
            let j = match (&v, is_box) {
                (RTerm::Proof(x), true) => ax::jk1(&u, x, &cb, &pbi),
                (RTerm::Sat(a), false) => ax::jk2(&u, a, &cb, &pbi),
                _ => return inv("forced variable does not match the modality"),
            };
            let fin = Hp::mp(&j, &self.lemma(ids[i]))?;
            let want = imp(self.cf(f)?, self.pf(rs[i], f)?);
            if *fin.formula() != want {
                return inv(format!("merge of index {n} proves `{}` instead of `{want}`", fin.formula()));
            }
            out[i] = Some(self.add(fin));
        }
        Ok(out)
    }
}
