//! Realisation of a single rule application: given realisations of the
//! premises, build one of the conclusion together with a proof of
//! `σr₁(Γ₁) → … → σrₖ(Γₖ) → r(Γ)`.

use crate::calculus::{indices, RuleId};
use crate::jl_hilbert::{ax, lift, lift_sat, Hp};
use crate::nested::{fm, fm_item, fm_lhs_or_top, fm_rhs, level, locate, LhsItem, Loc, Position, Rhs, Sequent};
use crate::syntax::{forced_var, Formula, JFormula, Polarity, RTerm, RealisationFn, Satisfier, Term, Var};

use super::step::{chain, imp, inv, leaf_term, var_of, RealiserError, Step};

/// One node of an annotated derivation together with its premises'
/// realisations.
pub(crate) struct NodeView<'n> {
    pub concl: &'n Sequent<u32>,
    pub rule: RuleId,
    pub principal: &'n [usize],
    pub aux: &'n [Position],
    pub prems: Vec<&'n Sequent<u32>>,
    pub rs: Vec<RealisationFn>,
}

type R<T> = Result<T, RealiserError>;

fn lvl<'s>(s: &'s Sequent<u32>, j: usize) -> R<&'s Sequent<u32>> {
    match level(s, j) {
        Some(l) => Ok(l),
        None => inv(format!("sequent has no level {j}")),
    }
}

fn bracket_index(s: &Sequent<u32>) -> R<u32> {
    match &s.rhs {
        Rhs::Box(n, _) => Ok(*n),
        Rhs::Out(_) => inv("expected an output bracket"),
    }
}

fn px(i: u32) -> Term {
    Term::PVar(i / 4)
}

fn sx(i: u32) -> Satisfier {
    Satisfier::SVar(i / 4)
}

/// Containers along a path of `⟨·⟩` descents, starting with `lhs` itself,
/// and the indices of the brackets crossed.
fn containers<'s>(lhs: &'s Vec<LhsItem<u32>>, path: &[usize]) -> R<(Vec<&'s Vec<LhsItem<u32>>>, Vec<u32>)> {
    let mut cs = vec![lhs];
    let mut ks = Vec::new();
    for &x in path {
        match cs.last().unwrap().get(x) {
            Some(LhsItem::Dia(k, b)) => {
                ks.push(*k);
                cs.push(b);
            }
            _ => return inv("container path crosses a non-bracket"),
        }
    }
    Ok((cs, ks))
}

/// Containers of a premise following the same bracket indices.
fn containers_by_index<'s>(lhs: &'s Vec<LhsItem<u32>>, ks: &[u32]) -> R<Vec<&'s Vec<LhsItem<u32>>>> {
    let mut cs = vec![lhs];
    for k in ks {
        let found = cs.last().unwrap().iter().find_map(|it| match it {
            LhsItem::Dia(j, b) if j == k => Some(b),
            _ => None,
        });
        match found {
            Some(b) => cs.push(b),
            None => return inv(format!("premise lost bracket {k}")),
        }
    }
    Ok(cs)
}

fn find_dia(items: &[LhsItem<u32>], k: u32) -> R<&Vec<LhsItem<u32>>> {
    items
        .iter()
        .find_map(|it| match it {
            LhsItem::Dia(j, b) if *j == k => Some(b),
            _ => None,
        })
        .map_or_else(|| inv(format!("no bracket {k}")), Ok)
}

fn contains_item(s: &Sequent<u32>, it: &LhsItem<u32>) -> bool {
    fn in_list(l: &[LhsItem<u32>], it: &LhsItem<u32>) -> bool {
        l.iter().any(|x| x == it || matches!(x, LhsItem::Dia(_, b) if in_list(b, it)))
    }
    let mut cur = s;
    loop {
        if in_list(&cur.lhs, it) {
            return true;
        }
        match &cur.rhs {
            Rhs::Box(_, inner) => cur = inner,
            Rhs::Out(_) => return false,
        }
    }
}

/// Index pairs of two items with the same erased shape.
fn zip_indices(a: &LhsItem<u32>, b: &LhsItem<u32>, out: &mut Vec<(u32, u32)>) -> R<()> {
    fn zf(a: &Formula<u32>, b: &Formula<u32>, out: &mut Vec<(u32, u32)>) -> R<()> {
        let (mut xa, mut xb) = (Vec::new(), Vec::new());
        a.ann_list(&mut xa);
        b.ann_list(&mut xb);
        if a.erase() != b.erase() || xa.len() != xb.len() {
            return inv("contraction copy has a different shape");
        }
        out.extend(xa.into_iter().zip(xb));
        Ok(())
    }
    match (a, b) {
        (LhsItem::In(f), LhsItem::In(g)) => zf(f, g, out),
        (LhsItem::Dia(i, x), LhsItem::Dia(j, y)) if x.len() == y.len() => {
            out.push((*i, *j));
            for (p, q) in x.iter().zip(y) {
                zip_indices(p, q, out)?;
            }
            Ok(())
        }
        _ => inv("contraction copy has a different shape"),
    }
}

impl NodeView<'_> {
    fn k(&self) -> usize {
        self.prems.len()
    }

    /// Realised formula of premise `i` at spine level `j`.
    fn pl(&self, st: &Step, i: usize, j: usize) -> R<JFormula> {
        st.pf(&self.rs[i], &fm(lvl(self.prems[i], j)?))
    }

    fn cl(&self, st: &Step, j: usize) -> R<JFormula> {
        st.cf(&fm(lvl(self.concl, j)?))
    }

    pub(crate) fn goal_at(&self, st: &Step, j: usize) -> R<JFormula> {
        let ps = (0..self.k()).map(|i| self.pl(st, i, j)).collect::<R<Vec<_>>>()?;
        Ok(chain(ps, self.cl(st, j)?))
    }

    fn binary(&self) -> bool {
        matches!(self.rule, RuleId::AndR | RuleId::OrL | RuleId::ImpLs)
    }

    fn principal_item(&self, loc: &Loc) -> R<&LhsItem<u32>> {
        let l = lvl(self.concl, loc.spine)?;
        let (last, init) = match loc.lhs_path.split_last() {
            Some(x) => x,
            None => return inv("principal is not a left-hand member"),
        };
        let (cs, _) = containers(&l.lhs, init)?;
        Ok(&cs.last().unwrap()[*last])
    }

    fn principal_formula(&self, loc: &Loc) -> R<&Formula<u32>> {
        match self.principal_item(loc)? {
            LhsItem::In(f) => Ok(f),
            LhsItem::Dia(..) => inv("principal is a bracket"),
        }
    }

    fn output_formula(&self, d: usize) -> R<&Formula<u32>> {
        match &lvl(self.concl, d)?.rhs {
            Rhs::Out(f) => Ok(f),
            Rhs::Box(..) => inv("principal output is a bracket"),
        }
    }
}

/// Runs one rule step; returns the step lemma at the root level.
pub(crate) fn run(st: &mut Step, n: &NodeView) -> R<Hp> {
    let loc = locate(n.concl, n.principal).map_err(|e| RealiserError::Input(e.to_string()))?;
    let d = loc.spine;
    // Leaf recipe everywhere, then copy what the premises already fixed.
    for i in indices(n.concl) {
        st.r.insert(i, leaf_term(i));
    }
    for (p, r) in n.prems.iter().zip(&n.rs).rev() {
        for i in indices(p) {
            if i % 2 == 0 && st.r.contains_key(&i) {
                match r.get(&i) {
                    Some(t) => {
                        st.r.insert(i, t.clone());
                    }
                    None => return inv(format!("premise realisation misses index {i}")),
                }
            }
        }
    }
    if n.rule == RuleId::Contr {
        contraction(st, n, &loc)?;
    }
    if n.binary() {
        shared_merges(st, n, d)?;
    }
    let q = match n.rule {
        RuleId::Id
        | RuleId::ImpR
        | RuleId::AndR
        | RuleId::OrR1
        | RuleId::OrR2
        | RuleId::BoxR
        | RuleId::TR
        | RuleId::DiaR
        | RuleId::FourR
        | RuleId::BoxLbr
        | RuleId::FourLbr
        | RuleId::Upd => right_step(st, n, &loc)?,
        RuleId::ImpLs => impl_step(st, n, &loc)?,
        RuleId::ImpL => return Err(RealiserError::Input("the implication rule must be decomposed first".into())),
        _ => left_step(st, n, &loc)?,
    };
    spine(st, n, d, q)
}

/// Lifts a level-`d` lemma through the output brackets above it.
fn spine(st: &mut Step, n: &NodeView, d: usize, mut q: Hp) -> R<Hp> {
    for j in (0..d).rev() {
        let b = bracket_index(lvl(n.concl, j)?)?;
        let ss = n.rs.iter().map(|r| st.pterm(r, b)).collect::<R<Vec<_>>>()?;
        let (t, l) = lift(&q, &ss, st.gen)?;
        st.r.insert(b, RTerm::Proof(t));
        let goal = n.goal_at(st, j)?;
        q = if *l.formula() == goal { l } else { st.glue(&[l], &goal)? };
    }
    Ok(q)
}

fn shared_merges(st: &mut Step, n: &NodeView, d: usize) -> R<()> {
    fn walk(st: &mut Step, n: &NodeView, items: &[LhsItem<u32>]) -> R<()> {
        for it in items {
            if n.prems.iter().all(|p| contains_item(p, it)) {
                let ids = st.merge(&fm_item(it), Polarity::Negative, [&n.rs[0], &n.rs[1]])?;
                st.shared.extend(ids.into_iter().flatten());
            } else if let LhsItem::Dia(_, b) = it {
                walk(st, n, b)?;
            }
        }
        Ok(())
    }
    for j in 0..=d {
        walk(st, n, &lvl(n.concl, j)?.lhs)?;
    }
    if n.rule == RuleId::OrL {
        let rc = &lvl(n.concl, d)?.rhs;
        if n.prems.iter().all(|p| level(p, d).is_some_and(|l| &l.rhs == rc)) {
            let ids = st.merge(&fm_rhs(rc), Polarity::Positive, [&n.rs[0], &n.rs[1]])?;
            st.shared.extend(ids.into_iter().flatten());
        }
    }
    Ok(())
}

/// Identifies the two copies of every contracted member, renames their
/// forced variables to the conclusion's and merges the two realisations.
fn contraction(st: &mut Step, n: &NodeView, loc: &Loc) -> R<()> {
    let (last, init) = loc.lhs_path.split_last().expect("left-hand principal");
    let (cs, ks) = containers(&lvl(n.concl, loc.spine)?.lhs, init)?;
    let here = cs.last().unwrap();
    let pc = *containers_by_index(&lvl(n.prems[0], loc.spine)?.lhs, &ks)?.last().unwrap();
    let mut sel = vec![*last];
    for a in n.aux {
        match a.last() {
            Some(&i) if a.len() == n.principal.len() => sel.push(i),
            _ => return inv("contraction auxiliary position is not a sibling"),
        }
    }
    let mut pool: Vec<&LhsItem<u32>> = pc.iter().collect();
    for (i, it) in here.iter().enumerate() {
        if !sel.contains(&i) {
            match pool.iter().position(|x| *x == it) {
                Some(p) => {
                    pool.remove(p);
                }
                None => return inv("contraction premise lost a context member"),
            }
        }
    }
    let r0 = &n.rs[0];
    let mut jobs = Vec::new();
    for &i in &sel {
        let x = &here[i];
        let mut pick = || -> R<&LhsItem<u32>> {
            match pool.iter().position(|c| c.erase() == x.erase()) {
                Some(p) => Ok(pool.remove(p)),
                None => inv("missing contraction copy"),
            }
        };
        let (c1, c2) = (pick()?, pick()?);
        let mut ra = RealisationFn::new();
        let mut rb = RealisationFn::new();
        for (copy, map) in [(c1, &mut ra), (c2, &mut rb)] {
            let mut pairs = Vec::new();
            zip_indices(x, copy, &mut pairs)?;
            for (ix, ic) in pairs {
                let t = match r0.get(&ic) {
                    Some(t) => t.clone(),
                    None => return inv(format!("premise realisation misses index {ic}")),
                };
                map.insert(ix, t);
                if ic % 2 == 1 {
                    st.tau(var_of(ic), forced_var(ix).expect("odd"));
                }
            }
        }
        jobs.push((fm_item(x), ra, rb));
    }
    for (f, ra, rb) in jobs {
        let ids = st.merge(&f, Polarity::Negative, [&ra, &rb])?;
        st.shared.extend(ids.into_iter().flatten());
    }
    Ok(())
}

/// Rules acting on the output zone of level `d` (and the two leaves that
/// need no left-hand descent).
fn right_step(st: &mut Step, n: &NodeView, loc: &Loc) -> R<Hp> {
    let d = loc.spine;
    let lc = lvl(n.concl, d)?;
    match n.rule {
        RuleId::Id => {
            let g = n.cl(st, d)?;
            st.glue(&[], &g)
        }
        RuleId::ImpR | RuleId::AndR | RuleId::OrR1 | RuleId::OrR2 | RuleId::BoxR => {
            let g = n.goal_at(st, d)?;
            st.glue(&[], &g)
        }
        RuleId::TR => {
            let Formula::Dia(m, a) = n.output_formula(d)? else { return inv("tR on a non-diamond") };
            let mu = super::step::sat_term(&st.r, *m)?;
            let extra = ax::jt_dia(&mu, &st.cf(a)?);
            let g = n.goal_at(st, d)?;
            st.glue(&[extra], &g)
        }
        RuleId::DiaR | RuleId::FourR => {
            let f @ Formula::Dia(m, a) = n.output_formula(d)? else { return inv("diamond rule on a non-diamond") };
            let Some(ap) = n.aux.first() else { return inv("missing auxiliary bracket") };
            let al = locate(n.concl, ap).map_err(|e| RealiserError::Input(e.to_string()))?;
            let LhsItem::Dia(kk, body) = &lc.lhs[al.lhs_path[0]] else { return inv("auxiliary is not a bracket") };
            let lp = lvl(n.prems[0], d)?;
            let Rhs::Box(nb, inner) = &lp.rhs else { return inv("premise has no new bracket") };
            let s = st.pterm(&n.rs[0], *nb)?;
            let body_p = st.pf(&n.rs[0], &fm(inner))?;
            let body_c = st.cf(&fm_lhs_or_top(body))?;
            let a_k = sx(*kk);
            if n.rule == RuleId::DiaR {
                let target = st.cf(a)?;
                let p = st.glue_only(&[], &imp(body_p, imp(body_c, target)))?;
                let (mu, l) = lift_sat(&p, &[s], &a_k, st.gen)?;
                st.r.insert(*m, RTerm::Sat(mu));
                let g = n.goal_at(st, d)?;
                st.glue(&[l], &g)
            } else {
                let target = st.cf(f)?;
                let p = st.glue_only(&[], &imp(body_p, imp(body_c, target)))?;
                let (nu, l) = lift_sat(&p, &[s], &a_k, st.gen)?;
                let mu = super::step::sat_term(&st.r, *m)?;
                let j4 = ax::j4_dia(&nu, &mu, &st.cf(a)?);
                let g = n.goal_at(st, d)?;
                st.glue(&[l, j4], &g)
            }
        }
        RuleId::BoxLbr | RuleId::FourLbr => {
            let Formula::Box(bj, a) = n.principal_formula(loc)? else { return inv("box rule on a non-box") };
            let Rhs::Box(nb, inner_c) = &lc.rhs else { return inv("no output bracket") };
            let Rhs::Box(_, inner_p) = &lvl(n.prems[0], d)?.rhs else { return inv("no output bracket") };
            let s = st.pterm(&n.rs[0], *nb)?;
            let body_p = st.pf(&n.rs[0], &fm(inner_p))?;
            let body_c = st.cf(&fm(inner_c))?;
            let a1 = st.cf(a)?;
            let x = px(*bj);
            let (t, extra) = if n.rule == RuleId::BoxLbr {
                let p = st.glue_only(&[], &imp(body_p, imp(a1, body_c)))?;
                let (t, l) = lift(&p, &[s, x], st.gen)?;
                (t, vec![l])
            } else {
                let xa = JFormula::just(x.clone(), a1.clone());
                let p = st.glue_only(&[], &imp(body_p, imp(xa, body_c)))?;
                let (t, l) = lift(&p, &[s, Term::bang(x.clone())], st.gen)?;
                (t, vec![l, ax::j4_box(&x, &a1)])
            };
            st.r.insert(*nb, RTerm::Proof(t));
            let g = n.goal_at(st, d)?;
            st.glue(&extra, &g)
        }
        RuleId::Upd => {
            let Rhs::Box(nb, inner_c) = &lc.rhs else { return inv("upd without an output bracket") };
            let lp = lvl(n.prems[0], d)?;
            let Rhs::Box(_, inner_p) = &lp.rhs else { return inv("upd premise without an output bracket") };
            let known = indices(n.concl);
            let (kk, l1) = lp
                .lhs
                .iter()
                .find_map(|it| match it {
                    LhsItem::Dia(k, b) if !known.contains(k) => Some((*k, b)),
                    _ => None,
                })
                .map_or_else(|| inv("upd premise has no new bracket"), Ok)?;
            let s = st.pterm(&n.rs[0], *nb)?;
            let x = st.pf(&n.rs[0], &fm(inner_p))?;
            let l1f = st.pf(&n.rs[0], &fm_lhs_or_top(l1))?;
            let a_k = sx(kk);
            let j = ax::jk4(&a_k, &s, &l1f, &x);
            let y = st.cf(&fm(inner_c))?;
            let p = st.glue_only(&[], &imp(imp(l1f, x), y))?;
            let (t, l) = lift(&p, &[Term::update(a_k, s)], st.gen)?;
            st.r.insert(*nb, RTerm::Proof(t));
            let g = n.goal_at(st, d)?;
            st.glue(&[j, l], &g)
        }
        _ => inv(format!("{} is not an output rule", n.rule)),
    }
}

/// Rules acting inside a left-hand side, possibly under `⟨·⟩` brackets.
fn left_step(st: &mut Step, n: &NodeView, loc: &Loc) -> R<Hp> {
    let d = loc.spine;
    let k = n.k();
    let (_, init) = match loc.lhs_path.split_last() {
        Some(x) => x,
        None => return inv("left rule without a left-hand principal"),
    };
    let (cs, ks) = containers(&lvl(n.concl, d)?.lhs, init)?;
    let ps = n
        .prems
        .iter()
        .map(|p| containers_by_index(&lvl(p, d)?.lhs, &ks))
        .collect::<R<Vec<_>>>()?;
    let h = ks.len();
    let here = cs[h];
    let target = |st: &Step, m: usize| -> R<JFormula> {
        let ds = (0..k).map(|i| st.pf(&n.rs[i], &fm_lhs_or_top(ps[i][m]))).collect::<R<Vec<_>>>()?;
        Ok(match ds.len() {
            0 => JFormula::Bot,
            1 => ds[0].clone(),
            _ => JFormula::or(ds[0].clone(), ds[1].clone()),
        })
    };
    let mut extra = Vec::new();
    match n.rule {
        RuleId::TL => {
            let Formula::Box(bi, a) = n.principal_formula(loc)? else { return inv("tL on a non-box") };
            extra.push(ax::jt_box(&px(*bi), &st.cf(a)?));
        }
        RuleId::BoxLdia | RuleId::FourLdia => {
            let Formula::Box(bj, a) = n.principal_formula(loc)? else { return inv("box rule on a non-box") };
            let Some(ap) = n.aux.first() else { return inv("missing auxiliary bracket") };
            let Some(&ai) = ap.last() else { return inv("empty auxiliary position") };
            let LhsItem::Dia(ii, body) = &here[ai] else { return inv("auxiliary is not a bracket") };
            let pbody = find_dia(ps[0][h], *ii)?;
            let body_c = st.cf(&fm_lhs_or_top(body))?;
            let body_p = st.pf(&n.rs[0], &fm_lhs_or_top(pbody))?;
            let a1 = st.cf(a)?;
            let x = px(*bj);
            let (mu, l) = if n.rule == RuleId::BoxLdia {
                let p = st.glue_only(&[], &imp(a1, imp(body_c, body_p)))?;
                lift_sat(&p, &[x], &sx(*ii), st.gen)?
            } else {
                let xa = JFormula::just(x.clone(), a1.clone());
                let p = st.glue_only(&[], &imp(xa, imp(body_c, body_p)))?;
                extra.push(ax::j4_box(&x, &a1));
                lift_sat(&p, &[Term::bang(x)], &sx(*ii), st.gen)?
            };
            st.tau(Var::S(*ii / 4), RTerm::Sat(mu));
            extra.push(l);
        }
        RuleId::Bot | RuleId::AndL | RuleId::OrL | RuleId::DiaL | RuleId::Contr => {}
        _ => return inv(format!("{} is not a left rule", n.rule)),
    }
    let g = imp(st.cf(&fm_lhs_or_top(here))?, target(st, h)?);
    let mut l = st.glue(&extra, &g)?;
    for m in (1..=h).rev() {
        let a = sx(ks[m - 1]);
        let (mu, sl) = lift_sat(&l, &[], &a, st.gen)?;
        let mut extra = vec![sl];
        match k {
            0 => extra.push(ax::jk5(&mu)),
            1 => {}
            _ => {
                let JFormula::Or(d1, d2) = target(st, m)? else { return inv("binary target is not a disjunction") };
                extra.push(ax::jk3(&mu, &d1, &d2));
            }
        }
        if k > 0 {
            st.tau(Var::S(ks[m - 1] / 4), RTerm::Sat(mu));
        }
        let g = imp(st.cf(&fm_lhs_or_top(cs[m - 1]))?, target(st, m - 1)?);
        l = st.glue(&extra, &g)?;
    }
    let g = n.goal_at(st, d)?;
    st.glue(&[l], &g)
}

/// The split implication rule: the left premise proves the antecedent
/// under the flipped brackets, whose box terms feed the satisfiers of the
/// right premise.
fn impl_step(st: &mut Step, n: &NodeView, loc: &Loc) -> R<Hp> {
    let d = loc.spine;
    let (_, init) = match loc.lhs_path.split_last() {
        Some(x) => x,
        None => return inv("implication rule without a left-hand principal"),
    };
    let (cs, ks) = containers(&lvl(n.concl, d)?.lhs, init)?;
    let h = ks.len();
    if h == 0 {
        let g = n.goal_at(st, d)?;
        return st.glue(&[], &g);
    }
    let (left, right) = (n.prems[0], n.prems[1]);
    let rcs = containers_by_index(&lvl(right, d)?.lhs, &ks)?;
    let w = |st: &Step, m: usize| st.pf(&n.rs[0], &fm(lvl(left, d + m)?));
    let x = |st: &Step, m: usize| st.cf(&fm_lhs_or_top(cs[m]));
    let y = |st: &Step, m: usize| st.pf(&n.rs[1], &fm_lhs_or_top(rcs[m]));
    let g = imp(w(st, h)?, imp(x(st, h)?, y(st, h)?));
    let mut l = st.glue(&[], &g)?;
    for m in (1..=h).rev() {
        let lb = bracket_index(lvl(left, d + m - 1)?)?;
        let s = st.pterm(&n.rs[0], lb)?;
        let (mu, sl) = lift_sat(&l, &[s], &sx(ks[m - 1]), st.gen)?;
        st.tau(Var::S(ks[m - 1] / 4), RTerm::Sat(mu));
        let g = if m > 1 { imp(w(st, m - 1)?, imp(x(st, m - 1)?, y(st, m - 1)?)) } else { n.goal_at(st, d)? };
        l = st.glue(&[sl], &g)?;
    }
    Ok(l)
}
