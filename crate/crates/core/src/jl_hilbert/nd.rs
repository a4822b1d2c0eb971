//! Natural-deduction terms over Hilbert proofs, compiled back to Hilbert
//! proofs by bracket abstraction over the K and S schemas.

use std::collections::BTreeSet;
use std::rc::Rc;

use super::{ax, Hp, JlError};
use crate::syntax::JFormula;

#[derive(Debug)]
enum NdKind {
    Var(u32),
    Lam(u32, JFormula, Nd),
    App(Nd, Nd),
    Const(Hp),
}

#[derive(Debug)]
struct NdNode {
    ty: JFormula,
    fv: BTreeSet<u32>,
    kind: NdKind,
}

/// A typed lambda term whose constants are closed Hilbert proofs.
#[derive(Clone, Debug)]
pub struct Nd(Rc<NdNode>);

/// Allocator for hypothesis names.
#[derive(Debug, Default)]
pub struct Hyps {
    next: u32,
}

impl Hyps {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, ty: JFormula) -> Nd {
        let id = self.next;
        self.next += 1;
        Nd(Rc::new(NdNode { ty, fv: BTreeSet::from([id]), kind: NdKind::Var(id) }))
    }
}

impl Nd {
    pub fn ty(&self) -> &JFormula {
        &self.0.ty
    }

    pub fn konst(p: &Hp) -> Nd {
        Nd(Rc::new(NdNode { ty: p.formula().clone(), fv: BTreeSet::new(), kind: NdKind::Const(p.clone()) }))
    }

    pub fn app(&self, a: &Nd) -> Result<Nd, JlError> {
        match self.ty().as_imp() {
            Some((x, y)) if x == a.ty() => {
                let fv = self.0.fv.union(&a.0.fv).copied().collect();
                Ok(Nd(Rc::new(NdNode { ty: y.clone(), fv, kind: NdKind::App(self.clone(), a.clone()) })))
            }
            _ => Err(JlError::Glue(format!("cannot apply `{}` to `{}`", self.ty(), a.ty()))),
        }
    }

    /// Applies to several arguments in turn.
    pub fn apps(&self, args: &[&Nd]) -> Result<Nd, JlError> {
        args.iter().try_fold(self.clone(), |f, a| f.app(a))
    }

    /// Discharges the hypothesis `h` (which must come from [`Hyps::fresh`]).
    pub fn lam(h: &Nd, body: &Nd) -> Result<Nd, JlError> {
        let NdKind::Var(id) = h.0.kind else {
            return Err(JlError::Glue("lambda over a non-variable".into()));
        };
        let mut fv = body.0.fv.clone();
        fv.remove(&id);
        let ty = JFormula::imp(h.ty().clone(), body.ty().clone());
        Ok(Nd(Rc::new(NdNode { ty, fv, kind: NdKind::Lam(id, h.ty().clone(), body.clone()) })))
    }

    /// Discharges hypotheses right to left, so `lams([h1,h2], b)` has type
    /// `H1 → H2 → B`.
    pub fn lams(hs: &[&Nd], body: &Nd) -> Result<Nd, JlError> {
        hs.iter().rev().try_fold(body.clone(), |b, h| Nd::lam(h, &b))
    }

    pub fn is_closed(&self) -> bool {
        self.0.fv.is_empty()
    }

    /// Compiles a closed term into a Hilbert proof of its type.
    pub fn compile(&self) -> Result<Hp, JlError> {
        if !self.is_closed() {
            return Err(JlError::Glue(format!("open term of type `{}`", self.ty())));
        }
        match to_cl(self)?.0.as_ref() {
            ClKind::Closed(p) => Ok(p.clone()),
            _ => Err(JlError::Glue("abstraction left a free variable".into())),
        }
    }
}

// ---------------------------------------------------------------------------
// Combinatory terms with free hypotheses

#[derive(Debug)]
enum ClKind {
    Closed(Hp),
    Var(u32, JFormula),
    App(Cl, Cl, JFormula, BTreeSet<u32>),
}

#[derive(Clone, Debug)]
struct Cl(Rc<ClKind>);

impl Cl {
    fn ty(&self) -> &JFormula {
        match self.0.as_ref() {
            ClKind::Closed(p) => p.formula(),
            ClKind::Var(_, t) | ClKind::App(_, _, t, _) => t,
        }
    }

    fn has_free(&self, x: u32) -> bool {
        match self.0.as_ref() {
            ClKind::Closed(_) => false,
            ClKind::Var(y, _) => *y == x,
            ClKind::App(_, _, _, fv) => fv.contains(&x),
        }
    }

    fn fv(&self) -> BTreeSet<u32> {
        match self.0.as_ref() {
            ClKind::Closed(_) => BTreeSet::new(),
            ClKind::Var(y, _) => BTreeSet::from([*y]),
            ClKind::App(_, _, _, fv) => fv.clone(),
        }
    }

    fn closed(p: Hp) -> Cl {
        Cl(Rc::new(ClKind::Closed(p)))
    }

    fn app(f: &Cl, a: &Cl) -> Result<Cl, JlError> {
        if let (ClKind::Closed(p), ClKind::Closed(q)) = (f.0.as_ref(), a.0.as_ref()) {
            return Ok(Cl::closed(Hp::mp(p, q)?));
        }
        let Some((x, y)) = f.ty().as_imp() else {
            return Err(JlError::Glue(format!("`{}` is not an implication", f.ty())));
        };
        if x != a.ty() {
            return Err(JlError::Glue(format!("cannot apply `{}` to `{}`", f.ty(), a.ty())));
        }
        let fv = f.fv().union(&a.fv()).copied().collect();
        Ok(Cl(Rc::new(ClKind::App(f.clone(), a.clone(), y.clone(), fv))))
    }
}

fn to_cl(n: &Nd) -> Result<Cl, JlError> {
    if n.is_closed() {
        if let NdKind::Const(p) = &n.0.kind {
            return Ok(Cl::closed(p.clone()));
        }
    }
    match &n.0.kind {
        NdKind::Var(id) => Ok(Cl(Rc::new(ClKind::Var(*id, n.ty().clone())))),
        NdKind::Const(p) => Ok(Cl::closed(p.clone())),
        NdKind::App(f, a) => Cl::app(&to_cl(f)?, &to_cl(a)?),
        NdKind::Lam(id, ty, body) => abstract_var(*id, ty, &to_cl(body)?),
    }
}

/// Proof of `A → A`.
pub fn identity(a: &JFormula) -> Result<Hp, JlError> {
    let aa = JFormula::imp(a.clone(), a.clone());
    let s = ax::s(a, &aa, a);
    let k1 = ax::k(a, &aa);
    let k2 = ax::k(a, a);
    Hp::mp(&Hp::mp(&s, &k1)?, &k2)
}

/// `[x]m`, a term of type `X → ty(m)` without `x` free.
fn abstract_var(x: u32, xty: &JFormula, m: &Cl) -> Result<Cl, JlError> {
    if !m.has_free(x) {
        return Cl::app(&Cl::closed(ax::k(m.ty(), xty)), m);
    }
    match m.0.as_ref() {
        ClKind::Var(..) => Ok(Cl::closed(identity(xty)?)),
        ClKind::App(f, a, ty, _) => {
            if let ClKind::Var(y, _) = a.0.as_ref() {
                if *y == x && !f.has_free(x) {
                    return Ok(f.clone());
                }
            }
            let b = a.ty().clone();
            let s = ax::s(xty, &b, ty);
            let fx = abstract_var(x, xty, f)?;
            let ax_ = abstract_var(x, xty, a)?;
            Cl::app(&Cl::app(&Cl::closed(s), &fx)?, &ax_)
        }
        ClKind::Closed(_) => unreachable!("closed terms have no free variables"),
    }
}

// ---------------------------------------------------------------------------
// Connective helpers

pub fn pair(a: &Nd, b: &Nd) -> Result<Nd, JlError> {
    Nd::konst(&ax::and_i(a.ty(), b.ty())).apps(&[a, b])
}

pub fn fst(p: &Nd) -> Result<Nd, JlError> {
    match p.ty() {
        JFormula::And(a, b) => Nd::konst(&ax::and_e1(a, b)).app(p),
        t => Err(JlError::Glue(format!("fst of `{t}`"))),
    }
}

pub fn snd(p: &Nd) -> Result<Nd, JlError> {
    match p.ty() {
        JFormula::And(a, b) => Nd::konst(&ax::and_e2(a, b)).app(p),
        t => Err(JlError::Glue(format!("snd of `{t}`"))),
    }
}

pub fn inl(a: &Nd, right: &JFormula) -> Result<Nd, JlError> {
    Nd::konst(&ax::or_i1(a.ty(), right)).app(a)
}

pub fn inr(left: &JFormula, b: &Nd) -> Result<Nd, JlError> {
    Nd::konst(&ax::or_i2(left, b.ty())).app(b)
}

/// Case analysis: `d : A ∨ B`, and `l : A → C`, `r : B → C`.
pub fn case(d: &Nd, l: &Nd, r: &Nd) -> Result<Nd, JlError> {
    let JFormula::Or(a, b) = d.ty() else {
        return Err(JlError::Glue(format!("case on `{}`", d.ty())));
    };
    let Some((_, c)) = l.ty().as_imp() else {
        return Err(JlError::Glue(format!("case branch `{}`", l.ty())));
    };
    Nd::konst(&ax::or_e(a, b, c)).apps(&[l, r, d])
}

pub fn abort(bot: &Nd, goal: &JFormula) -> Result<Nd, JlError> {
    Nd::konst(&ax::bot_e(goal)).app(bot)
}
