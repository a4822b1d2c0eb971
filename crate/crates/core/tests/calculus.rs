use jreal_core::calculus::{annotate_proof, check_proof, decompose_impl, erase_proof, search, RuleId, SearchOutcome};
use jreal_core::nested::{fm, Sequent};
use jreal_core::syntax::{parse_modal, Logic};

fn prove(src: &str, logic: Logic) -> jreal_core::calculus::DerivationTree<()> {
    let f = parse_modal(src).unwrap();
    match search(&Sequent::goal(f), logic, 12) {
        SearchOutcome::Proved(d) => d,
        SearchOutcome::Unknown => panic!("no proof for {src}"),
    }
}

#[test]
fn worked_example_has_expected_shape() {
    let d = prove("((box # -> #) -> #) -> box #", Logic::IK);
    use RuleId::*;
    assert_eq!(d.rules(), vec![ImpR, BoxR, ImpL, ImpR, BoxLdia, Bot, Bot]);
    check_proof(&d, Logic::IK).unwrap();
    let dd = decompose_impl(&d).unwrap();
    check_proof(&dd, Logic::IK).unwrap();
    assert_eq!(dd.rules(), vec![ImpR, BoxR, Upd, ImpLs, ImpR, BoxLdia, Bot, Bot]);
    let a = annotate_proof(&dd).unwrap();
    check_proof(&a, Logic::IK).unwrap();
    assert_eq!(erase_proof(&a), dd);
    assert_eq!(fm(&a.conclusion).to_string(), "(([]_1 # -> #) -> #) -> []_0 #");
}

const AXIOMS: [(&str, &str, Logic); 9] = [
    ("k1", "box (p -> q) -> box p -> box q", Logic::IK),
    ("k2", "box (p -> q) -> dia p -> dia q", Logic::IK),
    ("k3", "dia (p | q) -> dia p | dia q", Logic::IK),
    ("k4", "(dia p -> box q) -> box (p -> q)", Logic::IK),
    ("k5", "dia # -> #", Logic::IK),
    ("t_box", "box p -> p", Logic::IKt),
    ("t_dia", "p -> dia p", Logic::IKt),
    ("4_box", "box p -> box box p", Logic::IK4),
    ("4_dia", "dia dia p -> dia p", Logic::IK4),
];

#[test]
fn axioms_are_provable_and_annotate() {
    for (name, src, logic) in AXIOMS {
        let d = prove(src, logic);
        check_proof(&d, logic).unwrap_or_else(|e| panic!("{name}: {e}"));
        let dd = decompose_impl(&d).unwrap_or_else(|e| panic!("{name}: {e}"));
        check_proof(&dd, logic).unwrap_or_else(|e| panic!("{name}: {e}"));
        let a = annotate_proof(&dd).unwrap_or_else(|e| panic!("{name}: {e}"));
        check_proof(&a, logic).unwrap_or_else(|e| panic!("{name}: {e}"));
        eprintln!("{name}: {:?}", dd.rules());
    }
}

#[test]
fn non_theorem_is_unknown() {
    let f = parse_modal("p").unwrap();
    assert_eq!(search(&Sequent::goal(f), Logic::IS4, 12), SearchOutcome::Unknown);
}
