//! Printers producing the same ASCII syntax the parser reads.

use std::fmt::{self, Display, Formatter};

use super::{Ann, Formula, JFormula, RTerm, Satisfier, Term};

const IMP: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const UNARY: u8 = 3;

fn prec<A>(f: &Formula<A>) -> u8 {
    match f {
        Formula::Imp(..) => IMP,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        _ => UNARY,
    }
}

fn jprec(f: &JFormula) -> u8 {
    match f {
        JFormula::Imp(..) => IMP,
        JFormula::Or(..) => OR,
        JFormula::And(..) => AND,
        _ => UNARY,
    }
}

fn paren(out: &mut Formatter<'_>, wrap: bool, body: impl FnOnce(&mut Formatter<'_>) -> fmt::Result) -> fmt::Result {
    if wrap {
        write!(out, "(")?;
    }
    body(out)?;
    if wrap {
        write!(out, ")")?;
    }
    Ok(())
}

fn write_formula<A: Ann>(f: &Formula<A>, out: &mut Formatter<'_>) -> fmt::Result {
    let child = |c: &Formula<A>, min: u8, out: &mut Formatter<'_>| paren(out, prec(c) < min, |o| write_formula(c, o));
    match f {
        Formula::Bot => write!(out, "#"),
        Formula::Atom(p) => write!(out, "{p}"),
        Formula::And(l, r) => {
            child(l, AND, out)?;
            write!(out, " & ")?;
            child(r, AND + 1, out)
        }
        Formula::Or(l, r) => {
            child(l, OR, out)?;
            write!(out, " | ")?;
            child(r, OR + 1, out)
        }
        Formula::Imp(l, r) => {
            child(l, IMP + 1, out)?;
            write!(out, " -> ")?;
            child(r, IMP, out)
        }
        Formula::Box(i, b) | Formula::Dia(i, b) => {
            let op = if matches!(f, Formula::Box(..)) { "[]" } else { "<>" };
            match i.index() {
                Some(n) => write!(out, "{op}_{n} ")?,
                None => write!(out, "{op}")?,
            }
            child(b, UNARY, out)
        }
    }
}

impl<A: Ann> Display for Formula<A> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_formula(self, f)
    }
}

fn term_atomic(t: &Term) -> bool {
    matches!(t, Term::PVar(_) | Term::ReservedPVar(_) | Term::Const(_))
}

fn sat_atomic(m: &Satisfier) -> bool {
    matches!(m, Satisfier::SVar(_) | Satisfier::ReservedSVar(_))
}

fn wrap_term(t: &Term, out: &mut Formatter<'_>) -> fmt::Result {
    paren(out, !term_atomic(t), |o| write!(o, "{t}"))
}

fn wrap_sat(m: &Satisfier, out: &mut Formatter<'_>) -> fmt::Result {
    paren(out, !sat_atomic(m), |o| write!(o, "{m}"))
}

impl Display for Term {
    fn fmt(&self, out: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::PVar(n) => write!(out, "x{n}"),
            Term::ReservedPVar(n) => write!(out, "y^{n}"),
            Term::Const(n) => write!(out, "c{n}"),
            Term::Sum(a, b) | Term::App(a, b) => {
                wrap_term(a, out)?;
                write!(out, "{}", if matches!(self, Term::Sum(..)) { "+" } else { "*" })?;
                wrap_term(b, out)
            }
            Term::Update(m, t) => {
                wrap_sat(m, out)?;
                write!(out, "|>")?;
                wrap_term(t, out)
            }
            Term::Bang(t) => {
                write!(out, "!")?;
                wrap_term(t, out)
            }
        }
    }
}

impl Display for Satisfier {
    fn fmt(&self, out: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Satisfier::SVar(n) => write!(out, "a{n}"),
            Satisfier::ReservedSVar(n) => write!(out, "a^{n}"),
            Satisfier::Union(a, b) => {
                wrap_sat(a, out)?;
                write!(out, " U ")?;
                wrap_sat(b, out)
            }
            Satisfier::Prop(t, m) => {
                wrap_term(t, out)?;
                write!(out, "@")?;
                wrap_sat(m, out)
            }
        }
    }
}

impl Display for RTerm {
    fn fmt(&self, out: &mut Formatter<'_>) -> fmt::Result {
        match self {
            RTerm::Proof(t) => write!(out, "{t}"),
            RTerm::Sat(m) => write!(out, "{m}"),
        }
    }
}

fn write_jformula(f: &JFormula, out: &mut Formatter<'_>) -> fmt::Result {
    let child = |c: &JFormula, min: u8, out: &mut Formatter<'_>| paren(out, jprec(c) < min, |o| write_jformula(c, o));
    match f {
        JFormula::Bot => write!(out, "#"),
        JFormula::Atom(p) => write!(out, "{p}"),
        JFormula::And(l, r) => {
            child(l, AND, out)?;
            write!(out, " & ")?;
            child(r, AND + 1, out)
        }
        JFormula::Or(l, r) => {
            child(l, OR, out)?;
            write!(out, " | ")?;
            child(r, OR + 1, out)
        }
        JFormula::Imp(l, r) => {
            child(l, IMP + 1, out)?;
            write!(out, " -> ")?;
            child(r, IMP, out)
        }
        JFormula::Just(t, b) => {
            wrap_term(t, out)?;
            write!(out, ":")?;
            child(b, UNARY, out)
        }
        JFormula::Sat(m, b) => {
            wrap_sat(m, out)?;
            write!(out, ":")?;
            child(b, UNARY, out)
        }
    }
}

impl Display for JFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_jformula(self, f)
    }
}
