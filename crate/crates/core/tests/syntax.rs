use std::collections::BTreeMap;

use jreal_core::syntax::{
    annotate_at, apply_realisation, erase, forget, is_normal, is_properly_annotated, negvar, parse_annotated,
    parse_jformula, parse_modal, parse_satisfier, parse_term, properly_annotate, Formula, Fresh, JFormula,
    ModalFormula, Polarity, RTerm, RealisationFn, RealiseError, Satisfier, Term, Var,
};
use proptest::prelude::*;

#[test]
fn keyword_and_symbol_modalities_agree() {
    assert_eq!(parse_modal("box p -> dia q").unwrap(), parse_modal("[]p -> <>q").unwrap());
    assert_eq!(parse_modal("box (p -> q)").unwrap().to_string(), "[](p -> q)");
}

#[test]
fn implication_is_right_associative() {
    let f = parse_modal("p -> q -> r").unwrap();
    let want = Formula::imp(Formula::atom("p"), Formula::imp(Formula::atom("q"), Formula::atom("r")));
    assert_eq!(f, want);
    assert_eq!(parse_modal("(p -> q) -> r").unwrap().to_string(), "(p -> q) -> r");
}

#[test]
fn precedence_and_over_or_over_imp() {
    let f = parse_modal("p & q | r -> s").unwrap();
    let pq = Formula::and(Formula::atom("p"), Formula::atom("q"));
    let want = Formula::imp(Formula::or(pq, Formula::atom("r")), Formula::atom("s"));
    assert_eq!(f, want);
}

#[test]
fn atoms_follow_the_identifier_rule() {
    assert!(parse_modal("p_1 & q2").is_ok());
    assert!(parse_modal("P").is_err());
    assert!(parse_modal("1p").is_err());
}

#[test]
fn parse_errors_carry_line_and_column() {
    let e = parse_modal("p ->\n  (q").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(e.col >= 4, "{e}");
    let e = parse_modal("p & & q").unwrap_err();
    assert_eq!((e.line, e.col), (1, 5));
}

#[test]
fn justification_formula_binds_tighter_than_implication() {
    let f = parse_jformula("x0:p -> p").unwrap();
    let want = JFormula::imp(JFormula::just(Term::PVar(0), JFormula::atom("p")), JFormula::atom("p"));
    assert_eq!(f, want);
}

#[test]
fn term_syntax() {
    let t = parse_term("a0|>y^0").unwrap();
    assert_eq!(t, Term::update(Satisfier::SVar(0), Term::ReservedPVar(0)));
    let t = parse_term("(c1*x2)+!c3").unwrap();
    let want = Term::sum(Term::app(Term::Const(1), Term::PVar(2)), Term::bang(Term::Const(3)));
    assert_eq!(t, want);
    let m = parse_satisfier("(c0@a1) U a^2").unwrap();
    let want = Satisfier::union(Satisfier::prop(Term::Const(0), Satisfier::SVar(1)), Satisfier::ReservedSVar(2));
    assert_eq!(m, want);
    assert_eq!(parse_term(&t.to_string()).unwrap(), t);
}

#[test]
fn forget_of_reflexivity_axiom() {
    let f = parse_jformula("x0:p -> p").unwrap();
    assert_eq!(forget(&f).to_string(), "[]p -> p");
    let g = parse_jformula("a0:p -> (a0|>x1):(p -> q)").unwrap();
    assert_eq!(forget(&g).to_string(), "<>p -> [](p -> q)");
}

#[test]
fn proper_annotation_residues() {
    // A box to the left of an implication is negative.
    let a = properly_annotate(&parse_modal("[]p -> <>q").unwrap(), &mut Fresh::new());
    let mut idx = Vec::new();
    a.ann_list(&mut idx);
    assert_eq!(idx.iter().map(|i| i % 4).collect::<Vec<_>>(), vec![1, 2]);
    assert!(is_properly_annotated(&a));
    let bad = parse_annotated("[]_0 p -> p").unwrap();
    assert!(!is_properly_annotated(&bad));
    let dup = parse_annotated("[]_0 p & []_0 q").unwrap();
    assert!(!is_properly_annotated(&dup));
}

#[test]
fn negvar_collects_negative_indices() {
    let a = parse_annotated("[]_1 p -> <>_3 q -> []_0 <>_2 r").unwrap();
    let want: std::collections::BTreeSet<Var> = [Var::P(0), Var::S(0)].into_iter().collect();
    assert_eq!(negvar(&a), want);
}

#[test]
fn realisation_application_and_checks() {
    let a = parse_annotated("[]_1 p -> []_0 p").unwrap();
    let mut r: RealisationFn = BTreeMap::new();
    r.insert(1, RTerm::Proof(Term::PVar(0)));
    assert_eq!(apply_realisation(&r, &a), Err(RealiseError::MissingIndex(0)));
    r.insert(0, RTerm::Sat(Satisfier::SVar(0)));
    assert_eq!(apply_realisation(&r, &a), Err(RealiseError::ResidueMismatch(0)));
    r.insert(0, RTerm::Proof(Term::bang(Term::PVar(0))));
    let f = apply_realisation(&r, &a).unwrap();
    assert_eq!(f.to_string(), "x0:p -> (!x0):p");
    assert!(is_normal(&r, &a));
    r.insert(1, RTerm::Proof(Term::PVar(3)));
    assert_eq!(apply_realisation(&r, &a), Err(RealiseError::ResidueMismatch(1)));
}

#[test]
fn satisfier_may_not_occur_under_its_own_diamond() {
    let a = parse_annotated("<>_3 []_0 p -> q").unwrap();
    let mut r: RealisationFn = BTreeMap::new();
    r.insert(3, RTerm::Sat(Satisfier::SVar(0)));
    r.insert(0, RTerm::Proof(Term::update(Satisfier::SVar(0), Term::Const(0))));
    assert_eq!(apply_realisation(&r, &a), Err(RealiseError::SelfReferentialSatisfier(0)));
}

#[test]
fn normality_requires_distinct_forced_variables() {
    let a = parse_annotated("[]_1 p -> []_5 p -> p").unwrap();
    let mut r: RealisationFn = BTreeMap::new();
    r.insert(1, RTerm::Proof(Term::PVar(0)));
    r.insert(5, RTerm::Proof(Term::PVar(1)));
    assert!(is_normal(&r, &a));
    r.insert(5, RTerm::Proof(Term::PVar(0)));
    assert!(!is_normal(&r, &a));
}

// ---------------------------------------------------------------------------
// Properties

/// Atom names, minus the modality keywords and the names of term
/// variables and constants, which justification formulas read as terms.
fn atom() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,3}".prop_filter("reserved word", |s| {
        let head = s.split_once('_').map_or(s.as_str(), |(h, _)| h);
        let term_like = s.len() > 1 && "xcay".contains(&s[..1]) && s[1..].bytes().all(|b| b.is_ascii_digit());
        head != "box" && head != "dia" && !term_like
    })
}

fn modal() -> impl Strategy<Value = ModalFormula> {
    let leaf = prop_oneof![Just(Formula::Bot), atom().prop_map(|s| Formula::atom(&s))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            inner.clone().prop_map(|a| Formula::boxed((), a)),
            inner.prop_map(|a| Formula::dia((), a)),
        ]
    })
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0u32..4).prop_map(Term::PVar),
        (0u32..4).prop_map(Term::ReservedPVar),
        (0u32..4).prop_map(Term::Const),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sum(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app(a, b)),
            inner.clone().prop_map(Term::bang),
            ((0u32..3), inner).prop_map(|(n, t)| Term::update(Satisfier::SVar(n), t)),
        ]
    })
}

fn satisfier() -> impl Strategy<Value = Satisfier> {
    let leaf = prop_oneof![(0u32..4).prop_map(Satisfier::SVar), (0u32..4).prop_map(Satisfier::ReservedSVar)];
    (leaf, term(), any::<u8>()).prop_map(|(m, t, k)| match k % 3 {
        0 => m,
        1 => Satisfier::prop(t, m),
        _ => Satisfier::union(m.clone(), Satisfier::prop(t, m)),
    })
}

/// A realisation of `a` that is normal, with arbitrary positive terms.
fn realisation_for(a: &Formula<u32>, terms: &[Term], sats: &[Satisfier]) -> RealisationFn {
    let mut idx = Vec::new();
    a.ann_list(&mut idx);
    idx.iter()
        .enumerate()
        .map(|(k, &i)| {
            let t = match i % 4 {
                0 => RTerm::Proof(terms[k % terms.len()].clone()),
                1 => RTerm::Proof(Term::PVar(i / 4)),
                2 => RTerm::Sat(sats[k % sats.len()].clone()),
                _ => RTerm::Sat(Satisfier::SVar(i / 4)),
            };
            (i, t)
        })
        .collect()
}

proptest! {
    #[test]
    fn modal_print_parse_round_trip(f in modal()) {
        prop_assert_eq!(parse_modal(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn annotated_print_parse_round_trip(f in modal(), neg in any::<bool>()) {
        let pol = if neg { Polarity::Negative } else { Polarity::Positive };
        let a = annotate_at(&f, pol, &mut Fresh::new());
        prop_assert_eq!(parse_annotated(&a.to_string()).unwrap(), a.clone());
        prop_assert_eq!(erase(&a), f);
    }

    #[test]
    fn proper_annotation_is_proper(f in modal()) {
        prop_assert!(is_properly_annotated(&properly_annotate(&f, &mut Fresh::new())));
    }

    #[test]
    fn justification_print_parse_round_trip(f in modal(), ts in prop::collection::vec(term(), 1..4), ms in prop::collection::vec(satisfier(), 1..4)) {
        let a = properly_annotate(&f, &mut Fresh::new());
        let r = realisation_for(&a, &ts, &ms);
        if let Ok(j) = apply_realisation(&r, &a) {
            prop_assert_eq!(parse_jformula(&j.to_string()).unwrap(), j);
        }
    }

    #[test]
    fn forget_undoes_realisation(f in modal(), ts in prop::collection::vec(term(), 1..4), ms in prop::collection::vec(satisfier(), 1..4)) {
        let a = properly_annotate(&f, &mut Fresh::new());
        let r = realisation_for(&a, &ts, &ms);
        if let Ok(j) = apply_realisation(&r, &a) {
            prop_assert_eq!(forget(&j), f);
            prop_assert!(is_normal(&r, &a));
        }
    }
}
