//! Realisation of annotated nested-sequent proofs: builds a normal
//! realisation of the endformula together with a checked Hilbert-style
//! certificate for its realised form.

mod rules;
mod step;

pub use step::{leaf_term, realise, RealiserError};

use std::collections::BTreeSet;

use crate::calculus::{DerivationTree, RuleId};
use crate::jl_hilbert::{check, subst_hp, ConstGen, Hp, JLProof, Subst};
use crate::nested::Rhs;
use crate::syntax::{
    ann, apply_realisation, erase, forget, is_normal, negvar, AnnotatedFormula, JFormula, Logic, Polarity,
    RealisationFn,
};

use rules::NodeView;
use step::Step;

/// Default node budget of each propositional glue search.
pub const DEFAULT_GLUE_BUDGET: usize = 2000;

// ---------------------------------------------------------------------------
// Realisation-function algebra

/// `r` restricted to the indices of `f`.
pub fn restrict(r: &RealisationFn, f: &AnnotatedFormula) -> RealisationFn {
    let keep = ann(f);
    r.iter().filter(|(i, _)| keep.contains(i)).map(|(i, t)| (*i, t.clone())).collect()
}

/// Union of two realisations that may overlap only on negative indices,
/// where both must agree on the forced variable.
pub fn union(a: &RealisationFn, b: &RealisationFn) -> Result<RealisationFn, RealiserError> {
    let mut out = a.clone();
    for (i, t) in b {
        if let Some(u) = a.get(i) {
            if i % 2 == 0 || u != t {
                return Err(RealiserError::Input(format!("illegal union: both realisations define index {i}")));
            }
        }
        out.insert(*i, t.clone());
    }
    Ok(out)
}

/// `σ ∘ r` on the positive indices of `f`; negative indices keep their
/// forced variables. Rejects substitutions touching a negative variable of `f`.
pub fn compose(sigma: &Subst, r: &RealisationFn, f: &AnnotatedFormula) -> Result<RealisationFn, RealiserError> {
    let bad: Vec<_> = negvar(f).intersection(&sigma.domain()).cloned().collect();
    if !bad.is_empty() {
        return Err(RealiserError::Input(format!("illegal composition: substitution touches {bad:?}")));
    }
    Ok(r.iter().map(|(i, t)| (*i, if i % 2 == 0 { sigma.rterm(t) } else { t.clone() })).collect())
}

// ---------------------------------------------------------------------------
// Merging

/// Certificate for one subformula produced by [`Realiser::merge`].
#[derive(Clone, Debug)]
pub struct MergeCert {
    pub subformula: AnnotatedFormula,
    pub polarity: Polarity,
    /// Which input realisation the statement relates to (0 or 1).
    pub side: usize,
    /// `σ(rᵢ(X)) → r(X)` for positive `X`, `r(X) → σ(rᵢ(X))` for negative.
    pub statement: JFormula,
    pub proof: Hp,
}

#[derive(Clone, Debug)]
pub struct MergeResult {
    pub realisation: RealisationFn,
    pub sigma: Subst,
    pub certs: Vec<MergeCert>,
}

// ---------------------------------------------------------------------------
// Steps

/// Result of realising one rule application.
#[derive(Clone, Debug)]
pub struct StepResult {
    /// Realisation of the conclusion.
    pub realisation: RealisationFn,
    /// Substitution applied to every premise realisation.
    pub sigma: Subst,
    /// Proof of `σr₁(Γ₁) → … → σrₖ(Γₖ) → r(Γ)`.
    pub cert: Hp,
}

impl StepResult {
    /// One substitution per premise (all equal).
    pub fn sigmas(&self, premises: usize) -> Vec<Subst> {
        vec![self.sigma.clone(); premises]
    }
}

/// Outcome of realising a whole proof.
#[derive(Clone, Debug)]
pub struct Realised {
    pub realisation: RealisationFn,
    pub formula: JFormula,
    pub certificate: JLProof,
}

pub struct Realiser {
    pub logic: Logic,
    pub glue_budget: usize,
    pub gen: ConstGen,
}

fn is_right_rule(r: RuleId) -> bool {
    matches!(
        r,
        RuleId::AndR
            | RuleId::OrR1
            | RuleId::OrR2
            | RuleId::ImpR
            | RuleId::BoxR
            | RuleId::DiaR
            | RuleId::TR
            | RuleId::FourR
            | RuleId::BoxLbr
            | RuleId::FourLbr
            | RuleId::Upd
    )
}

impl Realiser {
    pub fn new(logic: Logic, glue_budget: usize, first_const: u32) -> Self {
        Realiser { logic, glue_budget, gen: ConstGen::starting_at(first_const) }
    }

    /// Merges two realisations of `f` at the given polarity.
    pub fn merge(
        &mut self,
        f: &AnnotatedFormula,
        pol: Polarity,
        r1: &RealisationFn,
        r2: &RealisationFn,
    ) -> Result<MergeResult, RealiserError> {
        let mut st = Step::new(&mut self.gen, self.glue_budget);
        st.log = Some(Vec::new());
        st.merge(f, pol, [r1, r2])?;
        let log = st.log.take().unwrap_or_default();
        let mut certs = Vec::new();
        for (x, p, ids) in log {
            for (side, id) in ids.iter().enumerate() {
                let ri = if side == 0 { r1 } else { r2 };
                let (c, q) = (st.cf(&x)?, st.pf(ri, &x)?);
                let statement = if p.is_positive() { JFormula::imp(q, c) } else { JFormula::imp(c, q) };
                let proof = match id {
                    Some(i) => st.lemma(*i),
                    None => {
                        if st.cf(&x)? != st.pf(ri, &x)? {
                            return step::inv("merge reported an unchanged subformula that changed");
                        }
                        crate::jl_hilbert::identity(&st.cf(&x)?)?
                    }
                };
                if *proof.formula() != statement {
                    return step::inv(format!("merge certificate proves `{}`", proof.formula()));
                }
                certs.push(MergeCert { subformula: x.clone(), polarity: p, side, statement, proof });
            }
        }
        Ok(MergeResult { realisation: restrict(&st.r, f), sigma: st.sigma.clone(), certs })
    }

    /// Realises one rule application of an annotated derivation, given the
    /// realisations of its premises (in order).
    pub fn step(&mut self, node: &DerivationTree<u32>, premises: &[RealisationFn]) -> Result<StepResult, RealiserError> {
        if premises.len() != node.premises.len() {
            return Err(RealiserError::Input("one realisation per premise expected".into()));
        }
        if !node.rule.in_logic(self.logic) {
            return Err(RealiserError::Input(format!("rule {} is not available in {}", node.rule, self.logic)));
        }
        let view = NodeView {
            concl: &node.conclusion,
            rule: node.rule,
            principal: &node.principal,
            aux: &node.aux,
            prems: node.premises.iter().map(|p| &p.conclusion).collect(),
            rs: premises.to_vec(),
        };
        let mut st = Step::new(&mut self.gen, self.glue_budget);
        let cert = rules::run(&mut st, &view)?;
        let want = view.goal_at(&st, 0)?;
        if *cert.formula() != want {
            return step::inv(format!("{} step proves `{}` instead of `{want}`", node.rule, cert.formula()));
        }
        Ok(StepResult { realisation: st.r.clone(), sigma: st.sigma.clone(), cert })
    }

    /// Realises an axiom leaf.
    pub fn realise_leaf(&mut self, node: &DerivationTree<u32>) -> Result<StepResult, RealiserError> {
        if !node.rule.is_axiom() {
            return Err(RealiserError::Input(format!("{} is not an axiom", node.rule)));
        }
        self.step(node, &[])
    }

    /// Realises a rule acting on an output zone.
    pub fn realise_right_step(
        &mut self,
        node: &DerivationTree<u32>,
        premises: &[RealisationFn],
    ) -> Result<StepResult, RealiserError> {
        if !is_right_rule(node.rule) {
            return Err(RealiserError::Input(format!("{} does not act on an output zone", node.rule)));
        }
        self.step(node, premises)
    }

    /// Realises a rule acting inside a left-hand side.
    pub fn realise_left_step(
        &mut self,
        node: &DerivationTree<u32>,
        premises: &[RealisationFn],
    ) -> Result<StepResult, RealiserError> {
        if is_right_rule(node.rule) || node.rule.is_axiom() {
            return Err(RealiserError::Input(format!("{} does not act on a left-hand side", node.rule)));
        }
        self.step(node, premises)
    }

    /// Realises every node bottom-up; returns the root realisation and a
    /// proof of the realised root formula.
    fn realise_node(&mut self, d: &DerivationTree<u32>) -> Result<(RealisationFn, Hp), RealiserError> {
        let mut rs = Vec::new();
        let mut proofs = Vec::new();
        for p in &d.premises {
            let (r, h) = self.realise_node(p)?;
            rs.push(r);
            proofs.push(h);
        }
        let res = self.step(d, &rs)?;
        let mut proof = res.cert;
        for h in &proofs {
            proof = Hp::mp(&proof, &subst_hp(&res.sigma, h))?;
        }
        Ok((res.realisation, proof))
    }

    /// Realises an annotated proof of `A◦` in which the implication rule has
    /// been decomposed. The certificate is re-checked before returning.
    pub fn realise_proof(&mut self, d: &DerivationTree<u32>) -> Result<Realised, RealiserError> {
        let a = match (&d.conclusion.lhs[..], &d.conclusion.rhs) {
            ([], Rhs::Out(a)) => a.clone(),
            _ => return Err(RealiserError::Input("endsequent must be a single output formula".into())),
        };
        if d.rules().contains(&RuleId::ImpL) {
            return Err(RealiserError::Input("the implication rule must be decomposed first".into()));
        }
        let (r, proof) = self.realise_node(d)?;
        let r = restrict(&r, &a);
        let formula = apply_realisation(&r, &a).map_err(|e| RealiserError::Invariant(e.to_string()))?;
        if *proof.formula() != formula {
            return step::inv("root proof does not prove the realised formula");
        }
        if !is_normal(&r, &a) {
            return step::inv("realisation is not normal");
        }
        if forget(&formula) != erase(&a) {
            return step::inv("forgetful projection does not return the input formula");
        }
        let certificate = proof.to_proof(self.logic);
        let checked = check(&certificate).map_err(|e| RealiserError::Invariant(format!("certificate rejected: {e}")))?;
        if checked != formula {
            return step::inv("certificate proves a different formula");
        }
        let dom: BTreeSet<u32> = r.keys().copied().collect();
        if dom != ann(&a) {
            return step::inv("realisation domain differs from the annotations");
        }
        Ok(Realised { realisation: r, formula, certificate })
    }
}

/// Convenience: realise with default budget and constants from zero.
pub fn realise_proof(d: &DerivationTree<u32>, logic: Logic) -> Result<Realised, RealiserError> {
    Realiser::new(logic, DEFAULT_GLUE_BUDGET, 0).realise_proof(d)
}
