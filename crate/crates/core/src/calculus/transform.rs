//! Proof transformations: the implication macro decomposition, annotation
//! propagation and erasure.

use thiserror::Error;

use super::{apply_rule_backward, DerivationTree, RuleError, RuleId};
use crate::nested::{level, locate, normalized_lhs, position_of, reannotate, LhsItem, Loc, Position, Rhs, Sequent};
use crate::syntax::{Ann, Fresh};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("transformed proof diverges from the original: {0}")]
    Mismatch(String),
}

pub fn erase_proof<A: Ann>(d: &DerivationTree<A>) -> DerivationTree<()> {
    DerivationTree {
        conclusion: d.conclusion.erase(),
        rule: d.rule,
        principal: d.principal.clone(),
        aux: d.aux.clone(),
        premises: d.premises.iter().map(erase_proof).collect(),
    }
}

/// Annotates the endsequent properly and propagates annotations upwards,
/// drawing every new index from one tree-wide source.
pub fn annotate_proof(d: &DerivationTree<()>) -> Result<DerivationTree<u32>, TransformError> {
    let mut fresh = Fresh::new();
    let root: Sequent<u32> = reannotate(&d.conclusion, &mut fresh);
    annotate_node(d, root, &mut fresh)
}

fn annotate_node(d: &DerivationTree<()>, c: Sequent<u32>, fresh: &mut Fresh) -> Result<DerivationTree<u32>, TransformError> {
    if c.erase() != d.conclusion {
        return Err(TransformError::Mismatch(format!("annotated conclusion {c} does not erase to {}", d.conclusion)));
    }
    let prem = apply_rule_backward(&c, d.rule, &d.principal, &d.aux, fresh)?;
    if prem.len() != d.premises.len() {
        return Err(TransformError::Mismatch(format!("{} premise count", d.rule)));
    }
    let premises = prem
        .into_iter()
        .zip(&d.premises)
        .map(|(p, sub)| annotate_node(sub, p, fresh))
        .collect::<Result<_, _>>()?;
    Ok(DerivationTree { conclusion: c, rule: d.rule, principal: d.principal.clone(), aux: d.aux.clone(), premises })
}

/// Replaces every plain implication-left step by contraction and update
/// steps followed by the shallow implication-left rule.
pub fn decompose_impl(d: &DerivationTree<()>) -> Result<DerivationTree<()>, TransformError> {
    let premises: Vec<DerivationTree<()>> = d.premises.iter().map(decompose_impl).collect::<Result<_, _>>()?;
    if d.rule != RuleId::ImpL {
        return Ok(DerivationTree { premises, ..d.clone() });
    }
    let s = &d.conclusion;
    let loc = locate(s, &d.principal).map_err(RuleError::from)?;
    let l = loc.spine;
    let mut depth = l;
    while let Some(Rhs::Box(..)) = level(s, depth).map(|x| &x.rhs) {
        depth += 1;
    }

    // (rule, principal, aux) applied in order from the conclusion upwards.
    let mut steps: Vec<(RuleId, Position, Vec<Position>)> = Vec::new();
    let mut cur = s.clone();
    let mut hoisted: Option<LhsItem<()>> = None;
    let mut step = |cur: &mut Sequent<()>, rule, p: Position, aux: Vec<Position>| -> Result<(), TransformError> {
        let mut prem = apply_rule_backward(cur, rule, &p, &aux, &mut Fresh::new())?;
        steps.push((rule, p, aux));
        *cur = prem.pop().expect("single premise");
        Ok(())
    };
    for j in (l + 1..=depth).rev() {
        let lam = level(s, j).expect("level").lhs.clone();
        if !lam.is_empty() {
            let found = find_all(&cur, j, &lam)?;
            step(&mut cur, RuleId::Contr, found[0].clone(), found[1..].to_vec())?;
        }
        let mut moved = lam.clone();
        moved.extend(hoisted.clone());
        let aux = find_all(&cur, j, &moved)?;
        let p = position_of(&cur, &Loc { spine: j - 1, lhs_path: vec![] }).map_err(RuleError::from)?;
        step(&mut cur, RuleId::Upd, p, aux)?;
        hoisted = Some(LhsItem::Dia((), normalized_lhs(moved)));
    }

    // The shallow rule at the hole's level.
    let top = level(s, l).expect("level").lhs[loc.lhs_path[0]].clone();
    let lvl = level(&cur, l).expect("level");
    let ti = lvl.lhs.iter().position(|x| *x == top).ok_or_else(|| TransformError::Mismatch("lost the principal".into()))?;
    let mut path = loc.lhs_path.clone();
    path[0] = ti;
    let principal = position_of(&cur, &Loc { spine: l, lhs_path: path }).map_err(RuleError::from)?;
    let aux = match &hoisted {
        None => vec![],
        Some(h) => {
            let hi = lvl
                .lhs
                .iter()
                .enumerate()
                .position(|(i, x)| i != ti && x == h)
                .ok_or_else(|| TransformError::Mismatch("lost the hoisted bracket".into()))?;
            vec![position_of(&cur, &Loc { spine: l, lhs_path: vec![hi] }).map_err(RuleError::from)?]
        }
    };
    let prem = apply_rule_backward(&cur, RuleId::ImpLs, &principal, &aux, &mut Fresh::new())?;
    for (k, p) in prem.iter().enumerate() {
        if *p != d.premises[k].conclusion {
            return Err(TransformError::Mismatch(format!("premise {k}: {p} vs {}", d.premises[k].conclusion)));
        }
    }
    let mut node = DerivationTree { conclusion: cur.clone(), rule: RuleId::ImpLs, principal, aux, premises };
    // Rebuild the chain from the top down.
    let mut concl = vec![s.clone()];
    {
        let mut c = s.clone();
        for (rule, p, aux) in &steps {
            let mut prem = apply_rule_backward(&c, *rule, p, aux, &mut Fresh::new())?;
            c = prem.pop().expect("single premise");
            concl.push(c.clone());
        }
    }
    for (k, (rule, p, aux)) in steps.into_iter().enumerate().rev() {
        node = DerivationTree { conclusion: concl[k].clone(), rule, principal: p, aux, premises: vec![node] };
    }
    Ok(node)
}

/// Positions, at the top of level `spine`, of members equal to `want`
/// (respecting multiplicity).
fn find_all(s: &Sequent<()>, spine: usize, want: &[LhsItem<()>]) -> Result<Vec<Position>, TransformError> {
    let lvl = level(s, spine).ok_or_else(|| TransformError::Mismatch("missing level".into()))?;
    let mut used = vec![false; lvl.lhs.len()];
    let mut out = Vec::new();
    for w in want {
        let i = (0..lvl.lhs.len())
            .find(|&i| !used[i] && lvl.lhs[i] == *w)
            .ok_or_else(|| TransformError::Mismatch(format!("member {w:?} not found")))?;
        used[i] = true;
        out.push(position_of(s, &Loc { spine, lhs_path: vec![i] }).map_err(RuleError::from)?);
    }
    Ok(out)
}
