//! Recursive-descent parser for the ASCII surface syntax.
//!
//! Formulas: `#`, atoms `[a-z][a-z0-9_]*`, `&`, `|`, `->` (right
//! associative), `box F` / `[]F`, `dia F` / `<>F`, optionally annotated as
//! `box_4 F` or `[]_4 F`. Terms: `x0`, `y^0`, `c0`, `a0`, `a^0`, `t+s`,
//! `t*s`, `t@m`, `m|>t`, `!t`, `m U n`. `TERM : F` binds like a prefix
//! operator, so tighter than every binary connective.

use std::rc::Rc;

use thiserror::Error;

use super::{Formula, JFormula, Satisfier, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    Hash,
    Amp,
    Bar,
    Arrow,
    LParen,
    RParen,
    BoxOp(Option<u32>),
    DiaOp(Option<u32>),
    Colon,
    Plus,
    Star,
    At,
    Tri,
    Bang,
    Union,
    Caret,
    Eof,
}

struct Lexed {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => Tok::Hash,
            '&' => Tok::Amp,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ':' => Tok::Colon,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '@' => Tok::At,
            '!' => Tok::Bang,
            '^' => Tok::Caret,
            'U' => Tok::Union,
            '|' if chars.get(i + 1) == Some(&'>') => {
                adv = 2;
                Tok::Tri
            }
            '|' => Tok::Bar,
            '-' if chars.get(i + 1) == Some(&'>') => {
                adv = 2;
                Tok::Arrow
            }
            '[' | '<' => {
                let close = if c == '[' { ']' } else { '>' };
                if chars.get(i + 1) != Some(&close) {
                    return Err(err(l0, c0, format!("expected `{c}{close}`")));
                }
                adv = 2;
                let mut idx = None;
                if chars.get(i + 2) == Some(&'_') {
                    let mut j = i + 3;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == i + 3 {
                        return Err(err(l0, c0 + 3, "expected annotation index".into()));
                    }
                    let s: String = chars[i + 3..j].iter().collect();
                    idx = Some(s.parse().map_err(|_| err(l0, c0 + 3, "index out of range".into()))?);
                    adv = j - i;
                }
                if c == '[' {
                    Tok::BoxOp(idx)
                } else {
                    Tok::DiaOp(idx)
                }
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                adv = j - i;
                let s: String = chars[i..j].iter().collect();
                Tok::Num(s.parse().map_err(|_| err(l0, c0, "number out of range".into()))?)
            }
            c if c.is_ascii_lowercase() => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_lowercase() || chars[j].is_ascii_digit() || chars[j] == '_') {
                    j += 1;
                }
                adv = j - i;
                let s: String = chars[i..j].iter().collect();
                keyword(&s).unwrap_or(Tok::Ident(s))
            }
            other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
        };
        toks.push((tok, l0, c0));
        i += adv;
        col += adv;
    }
    toks.push((Tok::Eof, line, col));
    Ok(Lexed { toks })
}

fn keyword(s: &str) -> Option<Tok> {
    let (head, idx) = match s.split_once('_') {
        Some((h, n)) if !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) => (h, Some(n.parse().ok()?)),
        _ => (s, None),
    };
    match head {
        "box" => Some(Tok::BoxOp(idx)),
        "dia" => Some(Tok::DiaOp(idx)),
        _ => None,
    }
}

/// Untyped term tree, typed after parsing.
#[derive(Clone, Debug)]
enum Raw {
    PVar(u32),
    RPVar(u32),
    Const(u32),
    SVar(u32),
    RSVar(u32),
    Bin(Tok, Box<Raw>, Box<Raw>),
    Bang(Box<Raw>),
}

#[derive(Clone, Debug)]
enum Typed {
    T(Term),
    S(Satisfier),
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?.toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (_, line, col) = self.toks[self.pos];
        Err(ParseError { line, col, msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error("unexpected trailing input")
        }
    }

    // ---- formulas, generic over what a modality or justification builds

    fn formula(&mut self, b: &dyn Builder) -> PResult<Node> {
        let l = self.disj(b)?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let r = self.formula(b)?;
            return Ok(Node::Imp(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn disj(&mut self, b: &dyn Builder) -> PResult<Node> {
        let mut l = self.conj(b)?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let r = self.conj(b)?;
            l = Node::Or(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn conj(&mut self, b: &dyn Builder) -> PResult<Node> {
        let mut l = self.unary(b)?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let r = self.unary(b)?;
            l = Node::And(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn unary(&mut self, b: &dyn Builder) -> PResult<Node> {
        if b.allows_terms() {
            let save = self.pos;
            if let Ok(t) = self.term() {
                if *self.peek() == Tok::Colon {
                    self.bump();
                    let body = self.unary(b)?;
                    return Ok(Node::Just(t, Box::new(body)));
                }
            }
            self.pos = save;
        }
        match self.peek().clone() {
            Tok::Hash => {
                self.bump();
                Ok(Node::Bot)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Node::Atom(s))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula(b)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::BoxOp(i) | Tok::DiaOp(i) => {
                let is_box = matches!(self.peek(), Tok::BoxOp(_));
                if !b.allows_modal() {
                    return self.error("modal operators are not allowed here; use `TERM : F`");
                }
                if b.needs_index() != i.is_some() {
                    return self.error(if b.needs_index() {
                        "annotated formula expected: every modality needs an index"
                    } else {
                        "unexpected annotation index"
                    });
                }
                self.bump();
                let body = self.unary(b)?;
                Ok(if is_box { Node::Box(i, Box::new(body)) } else { Node::Dia(i, Box::new(body)) })
            }
            _ => self.error("expected a formula"),
        }
    }

    // ---- terms

    fn term(&mut self) -> PResult<(Typed, usize, usize)> {
        let (_, line, col) = self.toks[self.pos];
        let raw = self.t_sum()?;
        let typed = type_raw(&raw).map_err(|msg| ParseError { line, col, msg })?;
        Ok((typed, line, col))
    }

    fn t_sum(&mut self) -> PResult<Raw> {
        let mut l = self.t_upd()?;
        while matches!(self.peek(), Tok::Plus | Tok::Union) {
            let op = self.bump();
            let r = self.t_upd()?;
            l = Raw::Bin(op, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn t_upd(&mut self) -> PResult<Raw> {
        let l = self.t_prop()?;
        if *self.peek() == Tok::Tri {
            self.bump();
            let r = self.t_upd()?;
            return Ok(Raw::Bin(Tok::Tri, Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn t_prop(&mut self) -> PResult<Raw> {
        let l = self.t_app()?;
        if *self.peek() == Tok::At {
            self.bump();
            let r = self.t_prop()?;
            return Ok(Raw::Bin(Tok::At, Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn t_app(&mut self) -> PResult<Raw> {
        let mut l = self.t_atom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let r = self.t_atom()?;
            l = Raw::Bin(Tok::Star, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn t_atom(&mut self) -> PResult<Raw> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Raw::Bang(Box::new(self.t_atom()?)))
            }
            Tok::LParen => {
                self.bump();
                let t = self.t_sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(s) => {
                let (head, digits) = s.split_at(1);
                if (s == "y" || s == "a") && self.toks.get(self.pos + 1).map(|t| &t.0) == Some(&Tok::Caret) {
                    self.bump();
                    self.bump();
                    let Tok::Num(n) = self.bump() else { return self.error("expected index after `^`") };
                    return Ok(if s == "y" { Raw::RPVar(n) } else { Raw::RSVar(n) });
                }
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return self.error("expected a term");
                }
                let n: u32 = digits.parse().map_err(|_| ParseError {
                    line: self.toks[self.pos].1,
                    col: self.toks[self.pos].2,
                    msg: "index out of range".into(),
                })?;
                let raw = match head {
                    "x" => Raw::PVar(n),
                    "c" => Raw::Const(n),
                    "a" => Raw::SVar(n),
                    _ => return self.error("expected a term"),
                };
                self.bump();
                Ok(raw)
            }
            _ => self.error("expected a term"),
        }
    }
}

fn type_raw(r: &Raw) -> Result<Typed, String> {
    Ok(match r {
        Raw::PVar(n) => Typed::T(Term::PVar(*n)),
        Raw::RPVar(n) => Typed::T(Term::ReservedPVar(*n)),
        Raw::Const(n) => Typed::T(Term::Const(*n)),
        Raw::SVar(n) => Typed::S(Satisfier::SVar(*n)),
        Raw::RSVar(n) => Typed::S(Satisfier::ReservedSVar(*n)),
        Raw::Bang(t) => match type_raw(t)? {
            Typed::T(t) => Typed::T(Term::bang(t)),
            Typed::S(_) => return Err("`!` expects a proof term".into()),
        },
        Raw::Bin(op, a, b) => match (op, type_raw(a)?, type_raw(b)?) {
            (Tok::Plus, Typed::T(a), Typed::T(b)) => Typed::T(Term::sum(a, b)),
            (Tok::Star, Typed::T(a), Typed::T(b)) => Typed::T(Term::app(a, b)),
            (Tok::Union, Typed::S(a), Typed::S(b)) => Typed::S(Satisfier::union(a, b)),
            (Tok::At, Typed::T(a), Typed::S(b)) => Typed::S(Satisfier::prop(a, b)),
            (Tok::Tri, Typed::S(a), Typed::T(b)) => Typed::T(Term::update(a, b)),
            (Tok::Plus, ..) => return Err("`+` expects proof terms on both sides".into()),
            (Tok::Star, ..) => return Err("`*` expects proof terms on both sides".into()),
            (Tok::Union, ..) => return Err("`U` expects satisfiers on both sides".into()),
            (Tok::At, ..) => return Err("`@` expects a proof term then a satisfier".into()),
            (Tok::Tri, ..) => return Err("`|>` expects a satisfier then a proof term".into()),
            _ => unreachable!("binary operator"),
        },
    })
}

/// Syntax tree shared by the three formula languages.
enum Node {
    Bot,
    Atom(String),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Imp(Box<Node>, Box<Node>),
    Box(Option<u32>, Box<Node>),
    Dia(Option<u32>, Box<Node>),
    Just((Typed, usize, usize), Box<Node>),
}

trait Builder {
    fn allows_terms(&self) -> bool;
    fn allows_modal(&self) -> bool;
    fn needs_index(&self) -> bool;
}

struct Modal(bool);
struct Justification;

impl Builder for Modal {
    fn allows_terms(&self) -> bool {
        false
    }
    fn allows_modal(&self) -> bool {
        true
    }
    fn needs_index(&self) -> bool {
        self.0
    }
}

impl Builder for Justification {
    fn allows_terms(&self) -> bool {
        true
    }
    fn allows_modal(&self) -> bool {
        false
    }
    fn needs_index(&self) -> bool {
        false
    }
}

fn to_formula<A: super::Ann>(n: Node, ann: &dyn Fn(Option<u32>) -> A) -> Formula<A> {
    match n {
        Node::Bot => Formula::Bot,
        Node::Atom(s) => Formula::Atom(s.as_str().into()),
        Node::And(l, r) => Formula::And(Rc::new(to_formula(*l, ann)), Rc::new(to_formula(*r, ann))),
        Node::Or(l, r) => Formula::Or(Rc::new(to_formula(*l, ann)), Rc::new(to_formula(*r, ann))),
        Node::Imp(l, r) => Formula::Imp(Rc::new(to_formula(*l, ann)), Rc::new(to_formula(*r, ann))),
        Node::Box(i, b) => Formula::Box(ann(i), Rc::new(to_formula(*b, ann))),
        Node::Dia(i, b) => Formula::Dia(ann(i), Rc::new(to_formula(*b, ann))),
        Node::Just(..) => unreachable!("modal parser never builds justifications"),
    }
}

fn to_jformula(n: Node) -> JFormula {
    match n {
        Node::Bot => JFormula::Bot,
        Node::Atom(s) => JFormula::atom(&s),
        Node::And(l, r) => JFormula::and(to_jformula(*l), to_jformula(*r)),
        Node::Or(l, r) => JFormula::or(to_jformula(*l), to_jformula(*r)),
        Node::Imp(l, r) => JFormula::imp(to_jformula(*l), to_jformula(*r)),
        Node::Just((Typed::T(t), ..), b) => JFormula::just(t, to_jformula(*b)),
        Node::Just((Typed::S(m), ..), b) => JFormula::sat(m, to_jformula(*b)),
        Node::Box(..) | Node::Dia(..) => unreachable!("justification parser never builds modalities"),
    }
}

pub fn parse_modal(src: &str) -> Result<super::ModalFormula, ParseError> {
    let mut p = Parser::new(src)?;
    let n = p.formula(&Modal(false))?;
    p.finish()?;
    Ok(to_formula(n, &|_| ()))
}

pub fn parse_annotated(src: &str) -> Result<super::AnnotatedFormula, ParseError> {
    let mut p = Parser::new(src)?;
    let n = p.formula(&Modal(true))?;
    p.finish()?;
    Ok(to_formula(n, &|i| i.expect("index checked by the parser")))
}

pub fn parse_jformula(src: &str) -> Result<JFormula, ParseError> {
    let mut p = Parser::new(src)?;
    let n = p.formula(&Justification)?;
    p.finish()?;
    Ok(to_jformula(n))
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let (t, line, col) = p.term()?;
    p.finish()?;
    match t {
        Typed::T(t) => Ok(t),
        Typed::S(_) => Err(ParseError { line, col, msg: "expected a proof term, found a satisfier".into() }),
    }
}

pub fn parse_satisfier(src: &str) -> Result<Satisfier, ParseError> {
    let mut p = Parser::new(src)?;
    let (t, line, col) = p.term()?;
    p.finish()?;
    match t {
        Typed::S(m) => Ok(m),
        Typed::T(_) => Err(ParseError { line, col, msg: "expected a satisfier, found a proof term".into() }),
    }
}
