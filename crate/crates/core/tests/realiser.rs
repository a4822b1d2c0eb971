use jreal_core::calculus::{annotate_proof, decompose_impl, search, DerivationTree, SearchOutcome};
use jreal_core::jl_hilbert::{check, Subst};
use jreal_core::nested::{Rhs, Sequent};
use jreal_core::realiser::{compose, realise_proof, union, MergeResult, Realised, Realiser, RealiserError};
use jreal_core::syntax::{
    erase, forget, is_normal, negvar, parse_annotated, parse_modal, parse_satisfier, parse_term, AnnotatedFormula, Logic,
    Polarity, RTerm, RealisationFn, Term, Var,
};

fn annotated(src: &str, logic: Logic) -> DerivationTree<u32> {
    let f = parse_modal(src).unwrap();
    let d = match search(&Sequent::goal(f), logic, 12) {
        SearchOutcome::Proved(d) => d,
        SearchOutcome::Unknown => panic!("no proof for {src}"),
    };
    annotate_proof(&decompose_impl(&d).unwrap()).unwrap()
}

fn realise_ok(src: &str, logic: Logic) -> Realised {
    let a = annotated(src, logic);
    let out = realise_proof(&a, logic).unwrap_or_else(|e| panic!("{src}: {e}"));
    let Rhs::Out(f) = &a.conclusion.rhs else { unreachable!() };
    assert_eq!(check(&out.certificate).unwrap(), out.formula, "{src}");
    assert_eq!(forget(&out.formula), erase(f), "{src}");
    assert!(is_normal(&out.realisation, f), "{src}");
    out
}

#[test]
fn worked_example_realises() {
    let out = realise_ok("((box # -> #) -> #) -> box #", Logic::IK);
    let s = out.formula.to_string();
    assert!(s.starts_with("((x0:# -> #) -> #) -> "), "{s}");
    assert!(s.contains("a0|>y^0"), "{s}");
}

#[test]
fn axioms_realise() {
    for (src, logic) in [
        ("box (p -> q) -> box p -> box q", Logic::IK),
        ("box (p -> q) -> dia p -> dia q", Logic::IK),
        ("dia (p | q) -> dia p | dia q", Logic::IK),
        ("(dia p -> box q) -> box (p -> q)", Logic::IK),
        ("dia # -> #", Logic::IK),
        ("box p -> p", Logic::IKt),
        ("p -> dia p", Logic::IKt),
        ("box p -> box box p", Logic::IK4),
        ("dia dia p -> dia p", Logic::IK4),
    ] {
        let out = realise_ok(src, logic);
        eprintln!("{src}  ~>  {}", out.formula);
    }
}

fn realisation(entries: &[(u32, &str)]) -> RealisationFn {
    entries
        .iter()
        .map(|(i, s)| {
            let t = if i % 4 < 2 { RTerm::Proof(parse_term(s).unwrap()) } else { RTerm::Sat(parse_satisfier(s).unwrap()) };
            (*i, t)
        })
        .collect()
}

#[test]
fn union_refuses_overlapping_positive_indices() {
    let a = realisation(&[(0, "c1"), (1, "x0")]);
    let b = realisation(&[(0, "c2")]);
    assert!(matches!(union(&a, &b), Err(RealiserError::Input(_))));
    let c = realisation(&[(1, "x0"), (4, "c3")]);
    let u = union(&a, &c).unwrap();
    assert_eq!(u.len(), 3);
    assert!(union(&a, &realisation(&[(1, "x5")])).is_err());
}

#[test]
fn compose_refuses_negative_variables() {
    let f = parse_annotated("[]_1 p -> []_0 p").unwrap();
    let r = realisation(&[(1, "x0"), (0, "!x0")]);
    let mut s = Subst::new();
    s.insert(Var::P(0), RTerm::Proof(parse_term("c4").unwrap()));
    assert!(matches!(compose(&s, &r, &f), Err(RealiserError::Input(_))));
    let mut s = Subst::new();
    s.insert(Var::P(7), RTerm::Proof(parse_term("c4").unwrap()));
    assert_eq!(compose(&s, &r, &f).unwrap(), r);
}

fn check_merge(f: &AnnotatedFormula, pol: Polarity, out: &MergeResult) {
    let neg = negvar(f);
    assert!(out.sigma.domain().is_subset(&neg), "{:?} not within {neg:?}", out.sigma.domain());
    for c in &out.certs {
        assert_eq!(c.proof.formula(), &c.statement);
        let p = c.proof.to_proof(Logic::IK);
        assert_eq!(check(&p).unwrap(), c.statement);
    }
    assert!(is_normal(&out.realisation, f), "{pol:?}");
}

#[test]
fn positive_box_merges_by_sum() {
    let f = parse_annotated("[]_0 p").unwrap();
    let mut rz = Realiser::new(Logic::IK, 2000, 10);
    let out = rz.merge(&f, Polarity::Positive, &realisation(&[(0, "c1")]), &realisation(&[(0, "c2")])).unwrap();
    assert_eq!(out.realisation, realisation(&[(0, "c1+c2")]));
    assert!(out.sigma.is_identity());
    let stmts: Vec<String> = out.certs.iter().map(|c| c.statement.to_string()).collect();
    assert!(stmts.contains(&"c1:p -> (c1+c2):p".to_string()), "{stmts:?}");
    assert!(stmts.contains(&"c2:p -> (c1+c2):p".to_string()), "{stmts:?}");
    check_merge(&f, Polarity::Positive, &out);
}

#[test]
fn positive_diamond_merges_by_union() {
    let f = parse_annotated("<>_2 p").unwrap();
    let mut rz = Realiser::new(Logic::IK, 2000, 10);
    let out = rz.merge(&f, Polarity::Positive, &realisation(&[(2, "a1")]), &realisation(&[(2, "a2")])).unwrap();
    assert_eq!(out.realisation, realisation(&[(2, "a1 U a2")]));
    check_merge(&f, Polarity::Positive, &out);
}

#[test]
fn negative_merge_substitutes_only_negative_variables() {
    let f = parse_annotated("[]_1 ([]_0 p -> q)").unwrap();
    let mut rz = Realiser::new(Logic::IK, 2000, 10);
    let r1 = realisation(&[(1, "x0"), (0, "c1")]);
    let r2 = realisation(&[(1, "x0"), (0, "c2")]);
    let out = rz.merge(&f, Polarity::Negative, &r1, &r2).unwrap();
    check_merge(&f, Polarity::Negative, &out);
    assert_eq!(out.realisation[&1], RTerm::Proof(Term::PVar(0)));
    // Both inputs must relate to the merged formula after substitution.
    assert!(out.certs.iter().any(|c| c.side == 0) && out.certs.iter().any(|c| c.side == 1));
}

#[test]
fn step_wrappers_check_the_rule_category() {
    let d = annotated("((box # -> #) -> #) -> box #", Logic::IK);
    let mut rz = Realiser::new(Logic::IK, 2000, 0);
    // The root is an implication-right step.
    assert!(matches!(rz.realise_left_step(&d, &[]), Err(RealiserError::Input(_))));
    assert!(matches!(rz.realise_leaf(&d), Err(RealiserError::Input(_))));
    assert!(matches!(rz.realise_right_step(&d, &[]), Err(RealiserError::Input(_))));
    let mut leaf = &d;
    while let Some(p) = leaf.premises.first() {
        leaf = p;
    }
    let res = rz.realise_leaf(leaf).unwrap();
    assert!(rz.realise_right_step(leaf, &[]).is_err());
    assert_eq!(&check(&res.cert.to_proof(Logic::IK)).unwrap(), res.cert.formula());
}

#[test]
fn rules_outside_the_logic_are_refused() {
    let d = annotated("box p -> p", Logic::IKt);
    let mut rz = Realiser::new(Logic::IK, 2000, 0);
    assert!(rz.realise_proof(&d).is_err());
}
