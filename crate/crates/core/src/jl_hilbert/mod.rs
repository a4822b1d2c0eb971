//! Hilbert systems for the justification logics: axiom schemas, proofs as
//! shared DAGs and as flat step lists, checking, substitution, and the
//! internalisation and lifting constructions.

mod ipl;
mod lift;
mod nd;

pub use ipl::{prove_ipl, prove_ipl_nd, IplFail};
pub use lift::{internalise, lift, lift_sat, ConstGen};
pub use nd::{abort, case, fst, identity, inl, inr, pair, snd, Hyps, Nd};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse_jformula, JFormula, Logic, RTerm, Satisfier, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Schema {
    K,
    S,
    AndI,
    AndE1,
    AndE2,
    OrI1,
    OrI2,
    OrE,
    BotE,
    Jk1,
    Jk2,
    Jk3,
    Jk4,
    Jk5,
    JSumL,
    JSumR,
    JUnionL,
    JUnionR,
    JtBox,
    JtDia,
    J4Box,
    J4Dia,
}

impl Schema {
    pub const ALL: [Schema; 22] = [
        Schema::K,
        Schema::S,
        Schema::AndI,
        Schema::AndE1,
        Schema::AndE2,
        Schema::OrI1,
        Schema::OrI2,
        Schema::OrE,
        Schema::BotE,
        Schema::Jk1,
        Schema::Jk2,
        Schema::Jk3,
        Schema::Jk4,
        Schema::Jk5,
        Schema::JSumL,
        Schema::JSumR,
        Schema::JUnionL,
        Schema::JUnionR,
        Schema::JtBox,
        Schema::JtDia,
        Schema::J4Box,
        Schema::J4Dia,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schema::K => "k",
            Schema::S => "s",
            Schema::AndI => "and_i",
            Schema::AndE1 => "and_e1",
            Schema::AndE2 => "and_e2",
            Schema::OrI1 => "or_i1",
            Schema::OrI2 => "or_i2",
            Schema::OrE => "or_e",
            Schema::BotE => "bot_e",
            Schema::Jk1 => "jk1",
            Schema::Jk2 => "jk2",
            Schema::Jk3 => "jk3",
            Schema::Jk4 => "jk4",
            Schema::Jk5 => "jk5",
            Schema::JSumL => "jsum_l",
            Schema::JSumR => "jsum_r",
            Schema::JUnionL => "junion_l",
            Schema::JUnionR => "junion_r",
            Schema::JtBox => "jt_box",
            Schema::JtDia => "jt_dia",
            Schema::J4Box => "j4_box",
            Schema::J4Dia => "j4_dia",
        }
    }

    pub fn from_name(s: &str) -> Option<Schema> {
        Schema::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn in_logic(self, l: Logic) -> bool {
        match self {
            Schema::JtBox | Schema::JtDia => l.has_t(),
            Schema::J4Box | Schema::J4Dia => l.has_4(),
            _ => true,
        }
    }

    /// Whether `f` is an instance of this schema.
    pub fn matches(self, f: &JFormula) -> bool {
        use JFormula as J;
        let Some((a, b)) = f.as_imp() else { return false };
        match self {
            Schema::K => matches!(b.as_imp(), Some((_, a2)) if a2 == a),
            Schema::S => (|| {
                let (x, yz) = a.as_imp()?;
                let (y, z) = yz.as_imp()?;
                let (xy, xz) = b.as_imp()?;
                let (x2, y2) = xy.as_imp()?;
                let (x3, z2) = xz.as_imp()?;
                Some(x == x2 && x == x3 && y == y2 && z == z2)
            })()
            .unwrap_or(false),
            Schema::AndI => matches!(b.as_imp(), Some((b1, J::And(l, r))) if **l == *a && **r == *b1),
            Schema::AndE1 => matches!(a, J::And(l, _) if **l == *b),
            Schema::AndE2 => matches!(a, J::And(_, r) if **r == *b),
            Schema::OrI1 => matches!(b, J::Or(l, _) if **l == *a),
            Schema::OrI2 => matches!(b, J::Or(_, r) if **r == *a),
            Schema::OrE => (|| {
                let (x, c) = a.as_imp()?;
                let (yc, rest) = b.as_imp()?;
                let (y, c2) = yc.as_imp()?;
                let (d, c3) = rest.as_imp()?;
                Some(c == c2 && c == c3 && *d == J::or(x.clone(), y.clone()))
            })()
            .unwrap_or(false),
            Schema::BotE => *a == J::Bot,
            Schema::Jk1 => (|| {
                let J::Just(s, ab) = a else { return None };
                let (x, y) = ab.as_imp()?;
                let (ta, st_b) = b.as_imp()?;
                let J::Just(t, x2) = ta else { return None };
                let J::Just(st, y2) = st_b else { return None };
                Some(x == &**x2 && y == &**y2 && **st == Term::App(s.clone(), t.clone()))
            })()
            .unwrap_or(false),
            Schema::Jk2 => (|| {
                let J::Just(s, ab) = a else { return None };
                let (x, y) = ab.as_imp()?;
                let (ma, smb) = b.as_imp()?;
                let J::Sat(m, x2) = ma else { return None };
                let J::Sat(sm, y2) = smb else { return None };
                Some(x == &**x2 && y == &**y2 && **sm == Satisfier::Prop(s.clone(), m.clone()))
            })()
            .unwrap_or(false),
            Schema::Jk3 => (|| {
                let J::Sat(m, ab) = a else { return None };
                let J::Or(x, y) = &**ab else { return None };
                let J::Or(l, r) = b else { return None };
                Some(**l == J::Sat(m.clone(), x.clone()) && **r == J::Sat(m.clone(), y.clone()))
            })()
            .unwrap_or(false),
            Schema::Jk4 => (|| {
                let (ma, tb) = a.as_imp()?;
                let J::Sat(m, x) = ma else { return None };
                let J::Just(t, y) = tb else { return None };
                let J::Just(u, xy) = b else { return None };
                Some(**u == Term::Update(m.clone(), t.clone()) && **xy == J::Imp(x.clone(), y.clone()))
            })()
            .unwrap_or(false),
            Schema::Jk5 => matches!(a, J::Sat(_, x) if **x == J::Bot) && *b == J::Bot,
            Schema::JSumL | Schema::JSumR => (|| {
                let J::Just(s, x) = a else { return None };
                let J::Just(u, y) = b else { return None };
                let Term::Sum(l, r) = &**u else { return None };
                let side = if self == Schema::JSumL { l } else { r };
                Some(x == y && side == s)
            })()
            .unwrap_or(false),
            Schema::JUnionL | Schema::JUnionR => (|| {
                let J::Sat(m, x) = a else { return None };
                let J::Sat(u, y) = b else { return None };
                let Satisfier::Union(l, r) = &**u else { return None };
                let side = if self == Schema::JUnionL { l } else { r };
                Some(x == y && side == m)
            })()
            .unwrap_or(false),
            Schema::JtBox => matches!(a, J::Just(_, x) if **x == *b),
            Schema::JtDia => matches!(b, J::Sat(_, x) if **x == *a),
            Schema::J4Box => (|| {
                let J::Just(t, _) = a else { return None };
                let J::Just(bt, inner) = b else { return None };
                Some(**bt == Term::Bang(t.clone()) && **inner == *a)
            })()
            .unwrap_or(false),
            Schema::J4Dia => matches!(a, J::Sat(_, inner) if **inner == *b && matches!(b, J::Sat(..))),
        }
    }
}

// ---------------------------------------------------------------------------
// Axiom instance builders

fn imp(a: &JFormula, b: &JFormula) -> JFormula {
    JFormula::imp(a.clone(), b.clone())
}

pub mod ax {
    //! Instances of each schema, already wrapped as proof nodes.
    use super::{imp, Hp, Schema};
    use crate::syntax::{JFormula as J, Satisfier, Term};

    fn mk(s: Schema, f: J) -> Hp {
        Hp::axiom(s, f)
    }

    pub fn k(a: &J, b: &J) -> Hp {
        mk(Schema::K, imp(a, &imp(b, a)))
    }
    pub fn s(a: &J, b: &J, c: &J) -> Hp {
        mk(Schema::S, imp(&imp(a, &imp(b, c)), &imp(&imp(a, b), &imp(a, c))))
    }
    pub fn and_i(a: &J, b: &J) -> Hp {
        mk(Schema::AndI, imp(a, &imp(b, &J::and(a.clone(), b.clone()))))
    }
    pub fn and_e1(a: &J, b: &J) -> Hp {
        mk(Schema::AndE1, imp(&J::and(a.clone(), b.clone()), a))
    }
    pub fn and_e2(a: &J, b: &J) -> Hp {
        mk(Schema::AndE2, imp(&J::and(a.clone(), b.clone()), b))
    }
    pub fn or_i1(a: &J, b: &J) -> Hp {
        mk(Schema::OrI1, imp(a, &J::or(a.clone(), b.clone())))
    }
    pub fn or_i2(a: &J, b: &J) -> Hp {
        mk(Schema::OrI2, imp(b, &J::or(a.clone(), b.clone())))
    }
    pub fn or_e(a: &J, b: &J, c: &J) -> Hp {
        mk(Schema::OrE, imp(&imp(a, c), &imp(&imp(b, c), &imp(&J::or(a.clone(), b.clone()), c))))
    }
    pub fn bot_e(a: &J) -> Hp {
        mk(Schema::BotE, imp(&J::Bot, a))
    }
    /// `s:(A→B) → (t:A → (s·t):B)`
    pub fn jk1(s: &Term, t: &Term, a: &J, b: &J) -> Hp {
        let st = Term::app(s.clone(), t.clone());
        mk(
            Schema::Jk1,
            imp(&J::just(s.clone(), imp(a, b)), &imp(&J::just(t.clone(), a.clone()), &J::just(st, b.clone()))),
        )
    }
    /// `s:(A→B) → (μ:A → (s@μ):B)`
    pub fn jk2(s: &Term, m: &Satisfier, a: &J, b: &J) -> Hp {
        let sm = Satisfier::prop(s.clone(), m.clone());
        mk(
            Schema::Jk2,
            imp(&J::just(s.clone(), imp(a, b)), &imp(&J::sat(m.clone(), a.clone()), &J::sat(sm, b.clone()))),
        )
    }
    /// `μ:(A∨B) → (μ:A ∨ μ:B)`
    pub fn jk3(m: &Satisfier, a: &J, b: &J) -> Hp {
        mk(
            Schema::Jk3,
            imp(
                &J::sat(m.clone(), J::or(a.clone(), b.clone())),
                &J::or(J::sat(m.clone(), a.clone()), J::sat(m.clone(), b.clone())),
            ),
        )
    }
    /// `(μ:A → t:B) → (μ▷t):(A→B)`
    pub fn jk4(m: &Satisfier, t: &Term, a: &J, b: &J) -> Hp {
        let u = Term::update(m.clone(), t.clone());
        mk(
            Schema::Jk4,
            imp(&imp(&J::sat(m.clone(), a.clone()), &J::just(t.clone(), b.clone())), &J::just(u, imp(a, b))),
        )
    }
    /// `μ:⊥ → ⊥`
    pub fn jk5(m: &Satisfier) -> Hp {
        mk(Schema::Jk5, imp(&J::sat(m.clone(), J::Bot), &J::Bot))
    }
    /// `s:A → (s+t):A`
    pub fn jsum_l(s: &Term, t: &Term, a: &J) -> Hp {
        mk(Schema::JSumL, imp(&J::just(s.clone(), a.clone()), &J::just(Term::sum(s.clone(), t.clone()), a.clone())))
    }
    /// `t:A → (s+t):A`
    pub fn jsum_r(s: &Term, t: &Term, a: &J) -> Hp {
        mk(Schema::JSumR, imp(&J::just(t.clone(), a.clone()), &J::just(Term::sum(s.clone(), t.clone()), a.clone())))
    }
    pub fn junion_l(m: &Satisfier, n: &Satisfier, a: &J) -> Hp {
        let u = Satisfier::union(m.clone(), n.clone());
        mk(Schema::JUnionL, imp(&J::sat(m.clone(), a.clone()), &J::sat(u, a.clone())))
    }
    pub fn junion_r(m: &Satisfier, n: &Satisfier, a: &J) -> Hp {
        let u = Satisfier::union(m.clone(), n.clone());
        mk(Schema::JUnionR, imp(&J::sat(n.clone(), a.clone()), &J::sat(u, a.clone())))
    }
    pub fn jt_box(t: &Term, a: &J) -> Hp {
        mk(Schema::JtBox, imp(&J::just(t.clone(), a.clone()), a))
    }
    pub fn jt_dia(m: &Satisfier, a: &J) -> Hp {
        mk(Schema::JtDia, imp(a, &J::sat(m.clone(), a.clone())))
    }
    pub fn j4_box(t: &Term, a: &J) -> Hp {
        let ta = J::just(t.clone(), a.clone());
        mk(Schema::J4Box, imp(&ta, &J::just(Term::bang(t.clone()), ta.clone())))
    }
    pub fn j4_dia(m: &Satisfier, n: &Satisfier, a: &J) -> Hp {
        let na = J::sat(n.clone(), a.clone());
        mk(Schema::J4Dia, imp(&J::sat(m.clone(), na.clone()), &na))
    }
}

// ---------------------------------------------------------------------------
// Proof DAGs

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JlError {
    #[error("step {0}: not an instance of the named axiom schema")]
    BadAxiomInstance(usize),
    #[error("step {0}: modus ponens premises do not fit")]
    BadMp(usize),
    #[error("step {0}: schema not available in this logic")]
    SchemaNotInLogic(usize),
    #[error("empty proof")]
    Empty,
    #[error("ill-typed proof construction: {0}")]
    Glue(String),
}

#[derive(Debug)]
pub enum HpRule {
    Axiom(Schema),
    /// `c_n:…:c_1:A` for the axiom instance `A`; constants listed innermost first.
    Can { consts: Vec<u32>, inner: JFormula },
    Mp(Hp, Hp),
}

#[derive(Debug)]
pub struct HpNode {
    pub formula: JFormula,
    pub rule: HpRule,
}

/// A Hilbert proof as a shared DAG; every node caches its conclusion.
#[derive(Clone, Debug)]
pub struct Hp(Rc<HpNode>);

impl Hp {
    pub fn axiom(s: Schema, f: JFormula) -> Hp {
        debug_assert!(s.matches(&f), "{} does not match {f}", s.name());
        Hp(Rc::new(HpNode { formula: f, rule: HpRule::Axiom(s) }))
    }

    pub fn can(consts: Vec<u32>, inner: JFormula) -> Hp {
        let formula = consts.iter().fold(inner.clone(), |acc, c| JFormula::just(Term::Const(*c), acc));
        Hp(Rc::new(HpNode { formula, rule: HpRule::Can { consts, inner } }))
    }

    pub fn mp(maj: &Hp, min: &Hp) -> Result<Hp, JlError> {
        match maj.formula().as_imp() {
            Some((a, b)) if a == min.formula() => {
                Ok(Hp(Rc::new(HpNode { formula: b.clone(), rule: HpRule::Mp(maj.clone(), min.clone()) })))
            }
            _ => Err(JlError::Glue(format!("cannot apply `{}` to `{}`", maj.formula(), min.formula()))),
        }
    }

    pub fn formula(&self) -> &JFormula {
        &self.0.formula
    }

    pub fn rule(&self) -> &HpRule {
        &self.0.rule
    }

    fn key(&self) -> *const HpNode {
        Rc::as_ptr(&self.0)
    }

    /// Flattens the DAG into a step list, sharing equal conclusions.
    pub fn to_proof(&self, logic: Logic) -> JLProof {
        let mut steps = Vec::new();
        let mut by_formula: HashMap<JFormula, usize> = HashMap::new();
        let mut by_node: HashMap<*const HpNode, usize> = HashMap::new();
        let root = flatten(self, &mut steps, &mut by_formula, &mut by_node);
        // The theorem must be the last step.
        if root + 1 != steps.len() {
            let last = steps[root].clone();
            steps.push(last);
        }
        JLProof { logic, steps }
    }
}

fn flatten(
    p: &Hp,
    steps: &mut Vec<Step>,
    by_formula: &mut HashMap<JFormula, usize>,
    by_node: &mut HashMap<*const HpNode, usize>,
) -> usize {
    if let Some(&i) = by_node.get(&p.key()) {
        return i;
    }
    if let Some(&i) = by_formula.get(p.formula()) {
        by_node.insert(p.key(), i);
        return i;
    }
    // Iterative post-order to survive deep MP chains.
    let mut stack: Vec<(Hp, bool)> = vec![(p.clone(), false)];
    while let Some((n, expanded)) = stack.pop() {
        if by_node.contains_key(&n.key()) {
            continue;
        }
        if let Some(&i) = by_formula.get(n.formula()) {
            by_node.insert(n.key(), i);
            continue;
        }
        match n.rule() {
            HpRule::Axiom(s) => {
                push_step(&n, Step::Axiom { schema: *s, formula: n.formula().clone() }, steps, by_formula, by_node);
            }
            HpRule::Can { consts, inner } => {
                push_step(&n, Step::Can { consts: consts.clone(), formula: inner.clone() }, steps, by_formula, by_node);
            }
            HpRule::Mp(maj, min) => {
                if expanded {
                    let step = Step::Mp { maj: by_node[&maj.key()], min: by_node[&min.key()] };
                    push_step(&n, step, steps, by_formula, by_node);
                } else {
                    stack.push((n.clone(), true));
                    stack.push((min.clone(), false));
                    stack.push((maj.clone(), false));
                }
            }
        }
    }
    by_node[&p.key()]
}

fn push_step(
    n: &Hp,
    step: Step,
    steps: &mut Vec<Step>,
    by_formula: &mut HashMap<JFormula, usize>,
    by_node: &mut HashMap<*const HpNode, usize>,
) {
    let i = steps.len();
    steps.push(step);
    by_formula.insert(n.formula().clone(), i);
    by_node.insert(n.key(), i);
}

// ---------------------------------------------------------------------------
// Flat proofs

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Axiom { schema: Schema, formula: JFormula },
    /// Conclusion `c_n:…:c_1:formula`, constants listed innermost first.
    Can { consts: Vec<u32>, formula: JFormula },
    Mp { maj: usize, min: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JLProof {
    pub logic: Logic,
    pub steps: Vec<Step>,
}

impl JLProof {
    /// Conclusions of every step, validating as it goes.
    pub fn conclusions(&self) -> Result<Vec<JFormula>, JlError> {
        let mut out: Vec<JFormula> = Vec::with_capacity(self.steps.len());
        for (i, st) in self.steps.iter().enumerate() {
            let f = match st {
                Step::Axiom { schema, formula } => {
                    if !schema.in_logic(self.logic) {
                        return Err(JlError::SchemaNotInLogic(i));
                    }
                    if !schema.matches(formula) {
                        return Err(JlError::BadAxiomInstance(i));
                    }
                    formula.clone()
                }
                Step::Can { consts, formula } => {
                    if consts.is_empty() {
                        return Err(JlError::BadAxiomInstance(i));
                    }
                    let fits: Vec<Schema> = Schema::ALL.into_iter().filter(|s| s.matches(formula)).collect();
                    if fits.is_empty() {
                        return Err(JlError::BadAxiomInstance(i));
                    }
                    if !fits.iter().any(|s| s.in_logic(self.logic)) {
                        return Err(JlError::SchemaNotInLogic(i));
                    }
                    consts.iter().fold(formula.clone(), |acc, c| JFormula::just(Term::Const(*c), acc))
                }
                Step::Mp { maj, min } => {
                    if *maj >= i || *min >= i {
                        return Err(JlError::BadMp(i));
                    }
                    match out[*maj].as_imp() {
                        Some((a, b)) if *a == out[*min] => b.clone(),
                        _ => return Err(JlError::BadMp(i)),
                    }
                }
            };
            out.push(f);
        }
        Ok(out)
    }
}

/// Validates every step and returns the theorem.
pub fn check(p: &JLProof) -> Result<JFormula, JlError> {
    p.conclusions()?.pop().ok_or(JlError::Empty)
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum StepJson {
    Axiom { schema: String, formula: String },
    Can { consts: Vec<u32>, formula: String },
    Mp { maj: usize, min: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProofJson {
    logic: String,
    steps: Vec<StepJson>,
}

pub fn jlogic_name(l: Logic) -> String {
    format!("j{}", l.name())
}

fn parse_jlogic(s: &str) -> Option<Logic> {
    Logic::parse(s.strip_prefix('j').unwrap_or(s))
}

impl JLProof {
    pub fn to_json(&self) -> serde_json::Value {
        let steps = self
            .steps
            .iter()
            .map(|s| match s {
                Step::Axiom { schema, formula } => StepJson::Axiom { schema: schema.name().into(), formula: formula.to_string() },
                Step::Can { consts, formula } => StepJson::Can { consts: consts.clone(), formula: formula.to_string() },
                Step::Mp { maj, min } => StepJson::Mp { maj: *maj, min: *min },
            })
            .collect();
        serde_json::to_value(ProofJson { logic: jlogic_name(self.logic), steps }).expect("proof json")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<JLProof, String> {
        let p: ProofJson = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        let logic = parse_jlogic(&p.logic).ok_or_else(|| format!("unknown logic `{}`", p.logic))?;
        let mut steps = Vec::with_capacity(p.steps.len());
        for (i, s) in p.steps.into_iter().enumerate() {
            let parse = |f: &str| parse_jformula(f).map_err(|e| format!("step {i}: {e}"));
            steps.push(match s {
                StepJson::Axiom { schema, formula } => Step::Axiom {
                    schema: Schema::from_name(&schema).ok_or_else(|| format!("step {i}: unknown schema `{schema}`"))?,
                    formula: parse(&formula)?,
                },
                StepJson::Can { consts, formula } => Step::Can { consts, formula: parse(&formula)? },
                StepJson::Mp { maj, min } => Step::Mp { maj, min },
            });
        }
        Ok(JLProof { logic, steps })
    }
}

// ---------------------------------------------------------------------------
// Substitutions

/// Finite map from variables to terms of the matching kind; variables
/// outside the domain are left alone.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<Var, RTerm>,
}

fn var_term(v: Var) -> RTerm {
    match v {
        Var::P(n) => RTerm::Proof(Term::PVar(n)),
        Var::ReservedP(n) => RTerm::Proof(Term::ReservedPVar(n)),
        Var::S(n) => RTerm::Sat(Satisfier::SVar(n)),
        Var::ReservedS(n) => RTerm::Sat(Satisfier::ReservedSVar(n)),
    }
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `v`; panics if the term kind does not match the variable kind.
    pub fn insert(&mut self, v: Var, t: RTerm) {
        let ok = matches!((v, &t), (Var::P(_) | Var::ReservedP(_), RTerm::Proof(_)) | (Var::S(_) | Var::ReservedS(_), RTerm::Sat(_)));
        assert!(ok, "substitution binds {v:?} to a term of the wrong kind");
        if t == var_term(v) {
            self.map.remove(&v);
        } else {
            self.map.insert(v, t);
        }
    }

    pub fn get(&self, v: Var) -> Option<&RTerm> {
        self.map.get(&v)
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn domain(&self) -> BTreeSet<Var> {
        self.map.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &RTerm)> {
        self.map.iter()
    }

    pub fn term(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        let lookup = |v: Var| match self.map.get(&v) {
            Some(RTerm::Proof(s)) => Some(s.clone()),
            _ => None,
        };
        match t {
            Term::PVar(n) => lookup(Var::P(*n)).unwrap_or_else(|| t.clone()),
            Term::ReservedPVar(n) => lookup(Var::ReservedP(*n)).unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
            Term::Sum(a, b) => Term::sum(self.term(a), self.term(b)),
            Term::App(a, b) => Term::app(self.term(a), self.term(b)),
            Term::Update(m, s) => Term::update(self.sat(m), self.term(s)),
            Term::Bang(s) => Term::bang(self.term(s)),
        }
    }

    pub fn sat(&self, m: &Satisfier) -> Satisfier {
        if self.map.is_empty() {
            return m.clone();
        }
        let lookup = |v: Var| match self.map.get(&v) {
            Some(RTerm::Sat(s)) => Some(s.clone()),
            _ => None,
        };
        match m {
            Satisfier::SVar(n) => lookup(Var::S(*n)).unwrap_or_else(|| m.clone()),
            Satisfier::ReservedSVar(n) => lookup(Var::ReservedS(*n)).unwrap_or_else(|| m.clone()),
            Satisfier::Union(a, b) => Satisfier::union(self.sat(a), self.sat(b)),
            Satisfier::Prop(t, n) => Satisfier::prop(self.term(t), self.sat(n)),
        }
    }

    pub fn rterm(&self, t: &RTerm) -> RTerm {
        match t {
            RTerm::Proof(t) => RTerm::Proof(self.term(t)),
            RTerm::Sat(m) => RTerm::Sat(self.sat(m)),
        }
    }

    pub fn formula(&self, f: &JFormula) -> JFormula {
        if self.map.is_empty() {
            return f.clone();
        }
        match f {
            JFormula::Bot | JFormula::Atom(_) => f.clone(),
            JFormula::And(a, b) => JFormula::and(self.formula(a), self.formula(b)),
            JFormula::Or(a, b) => JFormula::or(self.formula(a), self.formula(b)),
            JFormula::Imp(a, b) => JFormula::imp(self.formula(a), self.formula(b)),
            JFormula::Just(t, b) => JFormula::just(self.term(t), self.formula(b)),
            JFormula::Sat(m, b) => JFormula::sat(self.sat(m), self.formula(b)),
        }
    }

    /// `other ∘ self`: first `self`, then `other`.
    pub fn then(&self, other: &Subst) -> Subst {
        let mut out = Subst::new();
        for (v, t) in &self.map {
            out.insert(*v, other.rterm(t));
        }
        for (v, t) in &other.map {
            if !self.map.contains_key(v) {
                out.insert(*v, t.clone());
            }
        }
        out
    }
}

/// Applies `σ` to every step; constants are untouched, so axiom and
/// necessitation steps stay valid.
pub fn subst_proof(s: &Subst, p: &JLProof) -> JLProof {
    if s.is_identity() {
        return p.clone();
    }
    let steps = p
        .steps
        .iter()
        .map(|st| match st {
            Step::Axiom { schema, formula } => Step::Axiom { schema: *schema, formula: s.formula(formula) },
            Step::Can { consts, formula } => Step::Can { consts: consts.clone(), formula: s.formula(formula) },
            Step::Mp { maj, min } => Step::Mp { maj: *maj, min: *min },
        })
        .collect();
    JLProof { logic: p.logic, steps }
}

/// [`subst_proof`] on a proof DAG, preserving sharing.
pub fn subst_hp(s: &Subst, p: &Hp) -> Hp {
    if s.is_identity() {
        return p.clone();
    }
    let mut memo: HashMap<*const HpNode, Hp> = HashMap::new();
    subst_hp_memo(s, p, &mut memo)
}

fn subst_hp_memo(s: &Subst, p: &Hp, memo: &mut HashMap<*const HpNode, Hp>) -> Hp {
    if let Some(q) = memo.get(&p.key()) {
        return q.clone();
    }
    let q = match p.rule() {
        HpRule::Axiom(sc) => Hp::axiom(*sc, s.formula(p.formula())),
        HpRule::Can { consts, inner } => Hp::can(consts.clone(), s.formula(inner)),
        HpRule::Mp(maj, min) => {
            let a = subst_hp_memo(s, maj, memo);
            let b = subst_hp_memo(s, min, memo);
            let f = s.formula(p.formula());
            Hp(Rc::new(HpNode { formula: f, rule: HpRule::Mp(a, b) }))
        }
    };
    memo.insert(p.key(), q.clone());
    q
}
