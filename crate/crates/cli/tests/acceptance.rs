//! Acceptance runner: one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails. The RNG seed can be overridden with `JREAL_SEED`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use jreal_cli::{annotate, prove, realise, root_formula, validate, CliError, Options, SEED_VAR};
use jreal_core::calculus::{proof_from_json, DerivationTree};
use jreal_core::jl_hilbert::{ax, check, internalise, lift, prove_ipl, subst_proof, ConstGen, Hp, HpRule, JLProof, Subst};
use jreal_core::realiser::Realiser;
use jreal_core::syntax::{
    erase, forget, annotate_at, negvar, vars, AnnotatedFormula, Formula, Fresh, JFormula, Logic, ModalFormula,
    Polarity, RTerm, RealisationFn, Satisfier, Term, Var,
};

const WORKED_EXAMPLE: &str = "((box # -> #) -> #) -> box #";
const WORKED_EXAMPLE_LIMIT: Duration = Duration::from_secs(5);
const AXIOM_CORPUS_LIMIT: Duration = Duration::from_secs(60);
const RANDOM_PROOFS: usize = 200;
const RANDOM_MAX_DEPTH: usize = 4;
const RANDOM_MAX_MODAL: usize = 3;
/// Candidate formulas tried before criterion 3 gives up collecting proofs.
const RANDOM_ATTEMPTS: usize = 40_000;
const MERGE_CASES: usize = 100;
const MERGE_MAX_MODAL: usize = 4;
const LIFT_CASES: usize = 50;
const LIFT_MAX_PREMISES: usize = 2;
const SUBST_CASES: usize = 100;
const IPL_BUDGET: usize = 20_000;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, n: usize, name: &str, res: Result<String, String>, took: Duration) {
        match res {
            Ok(msg) => println!("PASS {n} {name}: {msg} [{took:.2?}]"),
            Err(msg) => {
                self.failures += 1;
                println!("FAIL {n} {name}: {msg} [{took:.2?}]");
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["jreal"];
    argv.extend_from_slice(args);
    let code = jreal_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn scratch_dir() -> PathBuf {
    std::env::temp_dir().join(format!("jreal-acceptance-{}", std::process::id()))
}

fn scratch(name: &str) -> PathBuf {
    let dir = scratch_dir();
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir.join(name)
}

/// Realisations kept for the normality criterion, with their formulas.
type Emitted = Vec<(RealisationFn, AnnotatedFormula)>;

// ---------------------------------------------------------------------------
// Criterion 1

fn rule_shape<A>(d: &DerivationTree<A>) -> String {
    let kids: Vec<String> = d.premises.iter().map(rule_shape).collect();
    if kids.is_empty() {
        d.rule.to_string()
    } else {
        format!("{}({})", d.rule, kids.join(", "))
    }
}

fn term_leaves(t: &Term, out: &mut Vec<String>) {
    match t {
        Term::PVar(_) | Term::ReservedPVar(_) | Term::Const(_) => out.push(t.to_string()),
        Term::Sum(a, b) | Term::App(a, b) => {
            term_leaves(a, out);
            term_leaves(b, out);
        }
        Term::Bang(a) => term_leaves(a, out),
        Term::Update(m, a) => {
            out.push(format!("{m}|>"));
            term_leaves(a, out);
        }
    }
}

fn contains_update(t: &Term, m: &Satisfier, s: &Term) -> bool {
    match t {
        Term::Update(m2, s2) => (**m2 == *m && **s2 == *s) || contains_update(s2, m, s),
        Term::Sum(a, b) | Term::App(a, b) => contains_update(a, m, s) || contains_update(b, m, s),
        Term::Bang(a) => contains_update(a, m, s),
        _ => false,
    }
}

fn worked_example(emitted: &mut Emitted) -> Result<String, String> {
    // (a) proof search through the command line, shape of the reference tree.
    let (code, out, err) = cli(&["prove", "--logic", "ik", "--format", "json", WORKED_EXAMPLE]);
    ensure(code == 0, || format!("prove exited {code}: {err}"))?;
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let (d, _) = proof_from_json::<()>(&v)?;
    jreal_core::calculus::check_proof(&d, Logic::IK).map_err(|e| e.to_string())?;
    let shape = rule_shape(&d);
    let want = "impR(boxR(impL(impR(boxLdia(bot)), bot)))";
    ensure(shape == want, || format!("proof shape {shape}, expected {want}"))?;
    let mut concl = Vec::new();
    fn walk<A: jreal_core::syntax::Ann>(d: &DerivationTree<A>, out: &mut Vec<String>) {
        out.push(d.conclusion.to_string());
        d.premises.iter().for_each(|p| walk(p, out));
    }
    walk(&d, &mut concl);
    let want_concl = [
        "((([]# -> #) -> #) -> []#) o",
        "(([]# -> #) -> #)*, []# o",
        "(([]# -> #) -> #)*, [# o]",
        "<>, ([]# -> #) o",
        "[]#*, <>, # o",
        "<#*>, # o",
        "#*, [# o]",
    ];
    ensure(concl == want_concl, || format!("sequents {concl:?}"))?;

    // (b) realisation through the command line.
    let proof_file = scratch("worked.proof.json");
    let real_file = scratch("worked.real.json");
    std::fs::write(&proof_file, &out).map_err(|e| e.to_string())?;
    let (code, out, err) = cli(&[
        "realise",
        "--format",
        "json",
        "--emit",
        real_file.to_str().unwrap(),
        proof_file.to_str().unwrap(),
    ]);
    ensure(code == 0, || format!("realise exited {code}: {err}"))?;
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let f = jreal_core::syntax::parse_jformula(v["formula"].as_str().ok_or("no formula")?).map_err(|e| e.to_string())?;
    let x0 = Term::PVar(0);
    let premise = JFormula::imp(JFormula::imp(JFormula::just(x0, JFormula::Bot), JFormula::Bot), JFormula::Bot);
    let t = match &f {
        JFormula::Imp(l, r) if **l == premise => match &**r {
            JFormula::Just(t, b) if **b == JFormula::Bot => t.clone(),
            _ => return Err(format!("conclusion of `{f}` is not T:#")),
        },
        _ => return Err(format!("`{f}` is not ((x0:# -> #) -> #) -> T:#")),
    };
    let (a0, y0) = (Satisfier::SVar(0), Term::ReservedPVar(0));
    ensure(contains_update(&t, &a0, &y0), || format!("T = {t} has no a0|>y^0"))?;
    let mut leaves = Vec::new();
    term_leaves(&t, &mut leaves);
    let odd: Vec<&String> = leaves.iter().filter(|l| !l.starts_with('c') && *l != "a0|>" && *l != "y^0").collect();
    ensure(odd.is_empty(), || format!("T = {t} mentions {odd:?}"))?;

    // (c) certificate accepted by check-jl.
    let (code, thm, err) = cli(&["check-jl", real_file.to_str().unwrap()]);
    ensure(code == 0, || format!("check-jl exited {code}: {err}"))?;
    ensure(thm.trim() == f.to_string(), || format!("check-jl printed {thm}"))?;

    // (d) exact round trip.
    let input = jreal_core::syntax::parse_modal(WORKED_EXAMPLE).unwrap();
    ensure(forget(&f) == input, || format!("forget gives {}", forget(&f)))?;

    // Keep the realisation for the normality criterion.
    let opts = Options::default();
    let a = annotate(&d, Logic::IK).map_err(|e| e.to_string())?;
    let res = realise(&a, &opts).map_err(|e| e.to_string())?;
    emitted.push((res.realisation, root_formula(&a).map_err(|e| e.to_string())?));
    Ok(format!("T = {t}"))
}

// ---------------------------------------------------------------------------
// Criterion 2

const AXIOM_CORPUS: [(&str, &str); 9] = [
    ("ik", "[](p -> q) -> []p -> []q"),
    ("ik", "[](p -> q) -> <>p -> <>q"),
    ("ik", "<>(p | q) -> <>p | <>q"),
    ("ik", "(<>p -> []q) -> [](p -> q)"),
    ("ik", "<># -> #"),
    ("ikt", "[]p -> p"),
    ("ikt", "p -> <>p"),
    ("ik4", "[]p -> [][]p"),
    ("ik4", "<><>p -> <>p"),
];

fn axiom_corpus() -> Result<String, String> {
    let file = scratch("axioms.txt");
    let text: Vec<String> = AXIOM_CORPUS.iter().map(|(l, f)| format!("{l}: {f}")).collect();
    std::fs::write(&file, text.join("\n")).map_err(|e| e.to_string())?;
    let (code, out, err) = cli(&["corpus", "--depth", "12", "--format", "json", file.to_str().unwrap()]);
    ensure(code == 0, || format!("corpus exited {code}: {err}{out}"))?;
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let rows = v["rows"].as_array().ok_or("no rows")?;
    ensure(rows.len() == AXIOM_CORPUS.len(), || format!("{} rows", rows.len()))?;
    for r in rows {
        for key in ["proof_found", "realisation_ok", "cert_ok", "round_trip_ok"] {
            ensure(r[key] == Value::Bool(true), || format!("{}: {key} is false ({})", r["formula"], r["note"]))?;
        }
    }
    Ok(format!("{} instances", rows.len()))
}

// ---------------------------------------------------------------------------
// Random generators

fn gen_modal(rng: &mut ChaCha8Rng, depth: usize, modal: &mut usize, max_modal: usize) -> ModalFormula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..7) {
            0 => Formula::Bot,
            1 | 2 => Formula::atom("p"),
            3 | 4 => Formula::atom("q"),
            _ => Formula::atom("r"),
        };
    }
    let k = if *modal < max_modal { rng.gen_range(0..6) } else { rng.gen_range(0..4) };
    let mut sub = |rng: &mut ChaCha8Rng| gen_modal(rng, depth - 1, modal, max_modal);
    match k {
        0 => Formula::and(sub(rng), sub(rng)),
        1 => Formula::or(sub(rng), sub(rng)),
        2 | 3 => Formula::imp(sub(rng), sub(rng)),
        4 => {
            *modal += 1;
            let b = gen_modal(rng, depth - 1, modal, max_modal);
            Formula::boxed((), b)
        }
        _ => {
            *modal += 1;
            let b = gen_modal(rng, depth - 1, modal, max_modal);
            Formula::dia((), b)
        }
    }
}

/// Modal theorem schemas instantiated with small random formulas; random
/// formulas alone are rarely theorems with interesting modal structure.
fn gen_schema(rng: &mut ChaCha8Rng) -> (ModalFormula, Logic) {
    let mut m = 0;
    let mut g = |rng: &mut ChaCha8Rng| gen_modal(rng, 1, &mut m, 1);
    let (a, b, c) = (g(rng), g(rng), g(rng));
    let bx = |x: &ModalFormula| Formula::boxed((), x.clone());
    let dx = |x: &ModalFormula| Formula::dia((), x.clone());
    let im = |x: ModalFormula, y: ModalFormula| Formula::imp(x, y);
    let and = |x: ModalFormula, y: ModalFormula| Formula::and(x, y);
    let or = |x: ModalFormula, y: ModalFormula| Formula::or(x, y);
    let ab = im(a.clone(), b.clone());
    let list = vec![
        (im(bx(&ab), im(bx(&a), bx(&b))), Logic::IK),
        (im(bx(&ab), im(dx(&a), dx(&b))), Logic::IK),
        (im(dx(&or(a.clone(), b.clone())), or(dx(&a), dx(&b))), Logic::IK),
        (im(im(dx(&a), bx(&b)), bx(&ab)), Logic::IK),
        (im(dx(&Formula::Bot), c.clone()), Logic::IK),
        (im(bx(&a), a.clone()), Logic::IKt),
        (im(a.clone(), dx(&a)), Logic::IKt),
        (im(bx(&a), bx(&bx(&a))), Logic::IK4),
        (im(dx(&dx(&a)), dx(&a)), Logic::IK4),
        (im(and(bx(&a), dx(&b)), dx(&and(a.clone(), b.clone()))), Logic::IK),
        (im(bx(&and(a.clone(), b.clone())), bx(&a)), Logic::IK),
        (im(bx(&a), dx(&a)), Logic::IKt),
        (im(dx(&bx(&a)), dx(&a)), Logic::IKt),
        (im(and(dx(&a), bx(&im(a.clone(), c.clone()))), dx(&c)), Logic::IK),
        (im(dx(&and(a.clone(), b.clone())), dx(&a)), Logic::IK),
        (im(or(bx(&a), bx(&b)), bx(&or(a.clone(), b.clone()))), Logic::IK),
        (im(dx(&dx(&dx(&a))), dx(&a)), Logic::IS4),
        (im(bx(&a), bx(&dx(&a))), Logic::IS4),
        (im(and(bx(&a), dx(&b)), dx(&and(bx(&a), b.clone()))), Logic::IS4),
    ];
    list.choose(rng).expect("schemas").clone()
}

fn gen_term(rng: &mut ChaCha8Rng, depth: usize, pvars: &[u32], svars: &[u32]) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..4) {
            0 if !pvars.is_empty() => Term::PVar(*pvars.choose(rng).unwrap()),
            1 => Term::ReservedPVar(rng.gen_range(0..3)),
            _ => Term::Const(rng.gen_range(0..6)),
        };
    }
    match rng.gen_range(0..4) {
        0 => Term::sum(gen_term(rng, depth - 1, pvars, svars), gen_term(rng, depth - 1, pvars, svars)),
        1 => Term::app(gen_term(rng, depth - 1, pvars, svars), gen_term(rng, depth - 1, pvars, svars)),
        2 => Term::bang(gen_term(rng, depth - 1, pvars, svars)),
        _ => Term::update(gen_sat(rng, depth - 1, pvars, svars), gen_term(rng, depth - 1, pvars, svars)),
    }
}

fn gen_sat(rng: &mut ChaCha8Rng, depth: usize, pvars: &[u32], svars: &[u32]) -> Satisfier {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..2) {
            0 if !svars.is_empty() => Satisfier::SVar(*svars.choose(rng).unwrap()),
            _ => Satisfier::ReservedSVar(rng.gen_range(0..3)),
        };
    }
    match rng.gen_range(0..2) {
        0 => Satisfier::union(gen_sat(rng, depth - 1, pvars, svars), gen_sat(rng, depth - 1, pvars, svars)),
        _ => Satisfier::prop(gen_term(rng, depth - 1, pvars, svars), gen_sat(rng, depth - 1, pvars, svars)),
    }
}

fn gen_jformula(rng: &mut ChaCha8Rng, depth: usize) -> JFormula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..6) {
            0 => JFormula::Bot,
            1 | 2 => JFormula::atom(["p", "q"][rng.gen_range(0..2)]),
            3 => JFormula::just(gen_term(rng, 1, &[0, 1], &[0]), gen_jformula(rng, depth.saturating_sub(1))),
            4 => JFormula::sat(gen_sat(rng, 1, &[0, 1], &[0]), gen_jformula(rng, depth.saturating_sub(1))),
            _ => JFormula::atom("r"),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| gen_jformula(rng, depth - 1);
    match rng.gen_range(0..3) {
        0 => JFormula::and(sub(rng), sub(rng)),
        1 => JFormula::or(sub(rng), sub(rng)),
        _ => JFormula::imp(sub(rng), sub(rng)),
    }
}

// ---------------------------------------------------------------------------
// Criterion 3

fn random_proofs(
    rng: &mut ChaCha8Rng,
    emitted: &mut Emitted,
    certs: &mut Vec<JLProof>,
) -> Result<String, String> {
    let mut seen = HashSet::new();
    let (mut proved, mut ok, mut unknown, mut tried) = (0, 0, 0, 0);
    while proved < RANDOM_PROOFS && tried < RANDOM_ATTEMPTS {
        tried += 1;
        let (f, logic) = if rng.gen_bool(0.5) {
            gen_schema(rng)
        } else {
            let mut m = 0;
            (gen_modal(rng, RANDOM_MAX_DEPTH, &mut m, RANDOM_MAX_MODAL), Logic::ALL[rng.gen_range(0..4)])
        };
        if f.depth() > RANDOM_MAX_DEPTH || f.modal_count() > RANDOM_MAX_MODAL || !seen.insert((f.to_string(), logic)) {
            continue;
        }
        let opts = Options { logic, ..Options::default() };
        let Ok(d) = prove(&f, &opts) else { continue };
        proved += 1;
        let a = annotate(&d, logic).map_err(|e| format!("{logic} {f}: {e}"))?;
        let root = root_formula(&a).map_err(|e| e.to_string())?;
        match realise(&a, &opts) {
            Ok(res) => {
                validate(&res, &root).map_err(|e| format!("{logic} {f}: {e}"))?;
                ensure(forget(&res.formula) == f, || format!("{logic} {f}: round trip"))?;
                ok += 1;
                certs.push(res.certificate);
                emitted.push((res.realisation, root));
            }
            Err(CliError::Unknown(_)) => unknown += 1,
            Err(e) => return Err(format!("{logic} {f}: {e}")),
        }
    }
    ensure(proved == RANDOM_PROOFS, || format!("only {proved} proofs found in {tried} attempts"))?;
    Ok(format!("{proved} proofs, {ok} certified, {unknown} unknown, 0 unsound ({tried} candidates)"))
}

// ---------------------------------------------------------------------------
// Criterion 4

/// Every subformula occurrence with its polarity.
fn occurrences(f: &AnnotatedFormula, pol: Polarity, out: &mut Vec<(AnnotatedFormula, Polarity)>) {
    out.push((f.clone(), pol));
    match f {
        Formula::Imp(l, r) => {
            occurrences(l, pol.flip(), out);
            occurrences(r, pol, out);
        }
        Formula::And(l, r) | Formula::Or(l, r) => {
            occurrences(l, pol, out);
            occurrences(r, pol, out);
        }
        Formula::Box(_, b) | Formula::Dia(_, b) => occurrences(b, pol, out),
        _ => {}
    }
}

fn indices(f: &AnnotatedFormula, out: &mut Vec<u32>) {
    match f {
        Formula::Box(i, b) | Formula::Dia(i, b) => {
            out.push(*i);
            indices(b, out);
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
            indices(l, out);
            indices(r, out);
        }
        _ => {}
    }
}

fn random_realisation(rng: &mut ChaCha8Rng, f: &AnnotatedFormula) -> RealisationFn {
    let mut idx = Vec::new();
    indices(f, &mut idx);
    let pvars: Vec<u32> = idx.iter().filter(|i| *i % 4 == 1).map(|i| i / 4).collect();
    let svars: Vec<u32> = idx.iter().filter(|i| *i % 4 == 3).map(|i| i / 4).collect();
    idx.iter()
        .map(|&i| {
            let t = match i % 4 {
                0 => RTerm::Proof(gen_term(rng, 3, &pvars, &svars)),
                1 => RTerm::Proof(Term::PVar(i / 4)),
                2 => RTerm::Sat(gen_sat(rng, 3, &pvars, &svars)),
                _ => RTerm::Sat(Satisfier::SVar(i / 4)),
            };
            (i, t)
        })
        .collect()
}

fn merging(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut certs = 0;
    let mut cases = 0;
    let mut attempts = 0;
    while cases < MERGE_CASES {
        attempts += 1;
        let mut m = 0;
        let f = gen_modal(rng, 5, &mut m, MERGE_MAX_MODAL);
        if f.modal_count() == 0 && attempts % 4 != 0 {
            continue;
        }
        let pol = if rng.gen_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
        let a = annotate_at(&f, pol, &mut Fresh::new());
        let (r1, r2) = (random_realisation(rng, &a), random_realisation(rng, &a));
        // Satisfier variables must not occur under their own diamond.
        let (Ok(_), Ok(_)) = (
            jreal_core::syntax::apply_realisation(&r1, &a),
            jreal_core::syntax::apply_realisation(&r2, &a),
        ) else {
            continue;
        };
        cases += 1;
        let mut realiser = Realiser::new(Logic::IK, jreal_cli::DEFAULT_GLUE_BUDGET, 1000);
        let res = realiser.merge(&a, pol, &r1, &r2).map_err(|e| format!("{a}: {e}"))?;
        let dom = res.sigma.domain();
        let neg = negvar(&a);
        ensure(dom.is_subset(&neg), || format!("{a}: dom(sigma) = {dom:?} not within {neg:?}"))?;
        let merged = jreal_core::syntax::apply_realisation(&res.realisation, &a).map_err(|e| e.to_string())?;
        ensure(forget(&merged) == erase(&a), || format!("{a}: merged realisation projects wrongly"))?;

        let mut occ = Vec::new();
        occurrences(&a, pol, &mut occ);
        let mut covered = BTreeMap::new();
        for c in &res.certs {
            *covered.entry((c.subformula.to_string(), c.polarity == Polarity::Positive, c.side)).or_insert(0) += 1;
        }
        for (x, p) in &occ {
            for (side, ri) in [(0, &r1), (1, &r2)] {
                let key = (x.to_string(), *p == Polarity::Positive, side);
                ensure(covered.contains_key(&key), || format!("{a}: no certificate for {x} side {side}"))?;
                // Statement recomputed from the inputs.
                let old = res.sigma.formula(&jreal_core::syntax::apply_realisation(ri, x).map_err(|e| e.to_string())?);
                let new = jreal_core::syntax::apply_realisation(&res.realisation, x).map_err(|e| e.to_string())?;
                let want = if *p == Polarity::Positive { JFormula::imp(old, new) } else { JFormula::imp(new, old) };
                let found = res.certs.iter().any(|c| {
                    c.side == side && c.subformula == *x && c.polarity == *p && c.statement == want
                });
                ensure(found, || format!("{a}: certificate for {x} side {side} does not state {want}"))?;
            }
        }
        for c in &res.certs {
            let proof = c.proof.to_proof(Logic::IK);
            let thm = check(&proof).map_err(|e| format!("{a}: certificate rejected: {e}"))?;
            ensure(thm == c.statement, || format!("{a}: certificate proves {thm}"))?;
            certs += 1;
        }
    }
    Ok(format!("{cases} formulas, {certs} certificates"))
}

// ---------------------------------------------------------------------------
// Criterion 5

fn is_axiom_only(p: &Hp) -> bool {
    !matches!(p.rule(), HpRule::Mp(..))
}

fn ipl_template(rng: &mut ChaCha8Rng) -> JFormula {
    let (a, b, c) = (gen_jformula(rng, 2), gen_jformula(rng, 2), gen_jformula(rng, 2));
    let im = |x: &JFormula, y: &JFormula| JFormula::imp(x.clone(), y.clone());
    let and = |x: &JFormula, y: &JFormula| JFormula::and(x.clone(), y.clone());
    let or = |x: &JFormula, y: &JFormula| JFormula::or(x.clone(), y.clone());
    let list = [
        im(&a, &a),
        im(&a, &im(&b, &a)),
        im(&im(&a, &b), &im(&im(&b, &c), &im(&a, &c))),
        im(&and(&a, &b), &and(&b, &a)),
        im(&a, &or(&a, &b)),
        im(&im(&a, &c), &im(&im(&b, &c), &im(&or(&a, &b), &c))),
        im(&JFormula::Bot, &a),
        im(&a, &im(&im(&a, &b), &b)),
        im(&im(&a, &im(&b, &c)), &im(&im(&a, &b), &im(&a, &c))),
        im(&and(&a, &b), &im(&c, &and(&c, &a))),
    ];
    list.choose(rng).expect("templates").clone()
}

fn axiom_instance(rng: &mut ChaCha8Rng) -> Hp {
    let (a, b, c) = (gen_jformula(rng, 1), gen_jformula(rng, 1), gen_jformula(rng, 1));
    let (s, t) = (gen_term(rng, 2, &[0], &[0]), gen_term(rng, 2, &[0], &[0]));
    let (m, n) = (gen_sat(rng, 2, &[0], &[0]), gen_sat(rng, 2, &[0], &[0]));
    match rng.gen_range(0..12) {
        0 => ax::k(&a, &b),
        1 => ax::s(&a, &b, &c),
        2 => ax::or_e(&a, &b, &c),
        3 => ax::jk1(&s, &t, &a, &b),
        4 => ax::jk2(&s, &m, &a, &b),
        5 => ax::jk3(&m, &a, &b),
        6 => ax::jk4(&m, &t, &a, &b),
        7 => ax::jk5(&m),
        8 => ax::jsum_l(&s, &t, &a),
        9 => ax::junion_r(&m, &n, &a),
        10 => ax::jt_box(&t, &a),
        _ => ax::j4_dia(&m, &n, &a),
    }
}

/// Splits `B1 → … → Bn → A` into its first `n` antecedents and the rest.
fn peel(f: &JFormula, n: usize) -> Option<(Vec<JFormula>, JFormula)> {
    let mut bs = Vec::new();
    let mut cur = f.clone();
    for _ in 0..n {
        let (b, rest) = cur.as_imp()?;
        bs.push(b.clone());
        cur = rest.clone();
    }
    Some((bs, cur))
}

fn lifting(rng: &mut ChaCha8Rng, certs: &mut Vec<JLProof>) -> Result<String, String> {
    let (mut cases, mut axioms, mut lifted) = (0, 0, 0);
    let mut gen = ConstGen::starting_at(500);
    while cases < LIFT_CASES {
        let p = if cases % 3 == 0 {
            axiom_instance(rng)
        } else {
            match prove_ipl(&ipl_template(rng), IPL_BUDGET) {
                Ok(p) => p,
                Err(_) => continue,
            }
        };
        cases += 1;
        let thm = p.formula().clone();
        let base = check(&p.to_proof(Logic::IS4)).map_err(|e| format!("{thm}: engine proof rejected: {e}"))?;
        ensure(base == thm, || format!("{thm}: engine proof proves {base}"))?;
        certs.push(p.to_proof(Logic::IS4));

        let (t, pt) = internalise(&p, &mut gen).map_err(|e| format!("{thm}: {e}"))?;
        ensure(*pt.formula() == JFormula::just(t.clone(), thm.clone()), || format!("{thm}: internalise proves {}", pt.formula()))?;
        let got = check(&pt.to_proof(Logic::IS4)).map_err(|e| format!("{thm}: internalised proof rejected: {e}"))?;
        ensure(got == *pt.formula(), || format!("{thm}: internalised certificate mismatch"))?;
        if is_axiom_only(&p) {
            axioms += 1;
            ensure(matches!(t, Term::Const(_)), || format!("{thm}: axiom internalised to {t}"))?;
        }

        for n in 1..=LIFT_MAX_PREMISES {
            let Some((bs, a)) = peel(&thm, n) else { break };
            let ss: Vec<Term> = (0..n).map(|_| gen_term(rng, 2, &[0, 1], &[0])).collect();
            let (t, pl) = lift(&p, &ss, &mut gen).map_err(|e| format!("{thm}: lift {n}: {e}"))?;
            let want = bs.iter().zip(&ss).rev().fold(JFormula::just(t.clone(), a.clone()), |acc, (b, s)| {
                JFormula::imp(JFormula::just(s.clone(), b.clone()), acc)
            });
            ensure(*pl.formula() == want, || format!("{thm}: lift {n} proves {}", pl.formula()))?;
            let got = check(&pl.to_proof(Logic::IS4)).map_err(|e| format!("{thm}: lifted proof rejected: {e}"))?;
            ensure(got == want, || format!("{thm}: lifted certificate mismatch"))?;
            lifted += 1;
        }
    }
    Ok(format!("{cases} theorems ({axioms} axiom-only, all constants), {lifted} liftings"))
}

// ---------------------------------------------------------------------------
// Criterion 6

/// Negative modalities carry pairwise-distinct variables of the right kind.
fn normal(r: &RealisationFn, a: &AnnotatedFormula) -> Result<(), String> {
    let mut idx = Vec::new();
    indices(a, &mut idx);
    let mut seen = HashSet::new();
    for i in idx.into_iter().filter(|i| i % 2 == 1) {
        let v = match (i % 4, r.get(&i)) {
            (1, Some(RTerm::Proof(Term::PVar(n)))) => Var::P(*n),
            (3, Some(RTerm::Sat(Satisfier::SVar(n)))) => Var::S(*n),
            (_, t) => return Err(format!("{a}: index {i} realised by {t:?}")),
        };
        ensure(seen.insert(v), || format!("{a}: variable {v:?} realises two negative modalities"))?;
    }
    Ok(())
}

fn normality(emitted: &Emitted) -> Result<String, String> {
    for (r, a) in emitted {
        normal(r, a)?;
    }
    ensure(!emitted.is_empty(), || "nothing to check".into())?;
    Ok(format!("{} realisations", emitted.len()))
}

// ---------------------------------------------------------------------------
// Criterion 7

fn substitution(rng: &mut ChaCha8Rng, certs: &[JLProof]) -> Result<String, String> {
    ensure(!certs.is_empty(), || "no certificates collected".into())?;
    let mut nontrivial = 0;
    for case in 0..SUBST_CASES {
        let p = &certs[rng.gen_range(0..certs.len())];
        let thm = check(p).map_err(|e| format!("case {case}: source certificate rejected: {e}"))?;
        let mut pool: BTreeSet<Var> = vars(&thm);
        pool.extend([Var::P(rng.gen_range(0..4)), Var::S(rng.gen_range(0..4)), Var::ReservedP(0)]);
        let mut sigma = Subst::new();
        for v in pool {
            if !rng.gen_bool(0.6) {
                continue;
            }
            let t = match v {
                Var::P(_) | Var::ReservedP(_) => RTerm::Proof(gen_term(rng, 3, &[0, 1, 2], &[0, 1])),
                Var::S(_) | Var::ReservedS(_) => RTerm::Sat(gen_sat(rng, 3, &[0, 1, 2], &[0, 1])),
            };
            sigma.insert(v, t);
        }
        let q = subst_proof(&sigma, p);
        let got = check(&q).map_err(|e| format!("case {case}: substituted certificate rejected: {e}"))?;
        let want = sigma.formula(&thm);
        ensure(got == want, || format!("case {case}: proves {got}, expected {want}"))?;
        if got != thm {
            nontrivial += 1;
        }
    }
    Ok(format!("{SUBST_CASES} pairs, {nontrivial} changed the theorem"))
}

fn main() {
    let seed = std::env::var(SEED_VAR).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(20240611u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    println!("acceptance (seed {seed})");
    let mut report = Report { failures: 0 };
    let mut emitted = Emitted::new();
    let mut certs = Vec::new();

    let t = Instant::now();
    let res = worked_example(&mut emitted);
    let took = t.elapsed();
    let res = res.and_then(|m| {
        ensure(took < WORKED_EXAMPLE_LIMIT, || format!("took {took:.2?}, limit {WORKED_EXAMPLE_LIMIT:?}")).map(|_| m)
    });
    report.line(1, "worked example", res, took);

    let t = Instant::now();
    let res = axiom_corpus();
    let took = t.elapsed();
    let res = res.and_then(|m| {
        ensure(took < AXIOM_CORPUS_LIMIT, || format!("took {took:.2?}, limit {AXIOM_CORPUS_LIMIT:?}")).map(|_| m)
    });
    report.line(2, "axiom corpus", res, took);

    let t = Instant::now();
    let res = random_proofs(&mut rng, &mut emitted, &mut certs);
    report.line(3, "certificate soundness", res, t.elapsed());

    let t = Instant::now();
    let res = merging(&mut rng);
    report.line(4, "merging", res, t.elapsed());

    let t = Instant::now();
    let res = lifting(&mut rng, &mut certs);
    report.line(5, "lifting", res, t.elapsed());

    let t = Instant::now();
    let res = normality(&emitted);
    report.line(6, "normality", res, t.elapsed());

    let t = Instant::now();
    let res = substitution(&mut rng, &certs);
    report.line(7, "substitution lemma", res, t.elapsed());

    let _ = std::fs::remove_dir_all(scratch_dir());
    if report.failures > 0 {
        println!("{} criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
