use serde_json::{json, Map, Value};

use super::{DerivationTree, RuleId};
use crate::nested::{sequent_from_json, sequent_to_json, Codec};
use crate::syntax::{Ann, Logic};

fn node_to_json<A: Ann>(d: &DerivationTree<A>) -> Value {
    let mut m = Map::new();
    m.insert("conclusion".into(), sequent_to_json(&d.conclusion));
    m.insert("rule".into(), json!(d.rule.name()));
    m.insert("principal".into(), json!(d.principal));
    if !d.aux.is_empty() {
        m.insert("aux".into(), json!(d.aux));
    }
    m.insert("premises".into(), Value::Array(d.premises.iter().map(node_to_json).collect()));
    Value::Object(m)
}

pub fn proof_to_json<A: Ann>(d: &DerivationTree<A>, logic: Option<Logic>) -> Value {
    let mut v = node_to_json(d);
    if let (Some(l), Value::Object(m)) = (logic, &mut v) {
        m.insert("logic".into(), json!(l.name()));
    }
    v
}

fn positions(v: &Value, what: &str) -> Result<Vec<usize>, String> {
    serde_json::from_value(v.clone()).map_err(|e| format!("{what}: {e}"))
}

fn node_from_json<A: Codec>(v: &Value, root: bool) -> Result<(DerivationTree<A>, Option<Logic>), String> {
    let m = v.as_object().ok_or("proof node: expected an object")?;
    const KEYS: [&str; 6] = ["logic", "conclusion", "rule", "principal", "aux", "premises"];
    if let Some(k) = m.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(format!("proof node: unknown key `{k}`"));
    }
    let logic = match m.get("logic") {
        None => None,
        Some(_) if !root => return Err("proof node: `logic` is only allowed at the root".into()),
        Some(l) => {
            let s = l.as_str().ok_or("logic: expected a string")?;
            Some(Logic::parse(s).ok_or_else(|| format!("unknown logic `{s}`"))?)
        }
    };
    let conclusion = sequent_from_json(m.get("conclusion").ok_or("proof node: missing conclusion")?)?;
    let rname = m.get("rule").and_then(|r| r.as_str()).ok_or("proof node: missing rule")?;
    let rule = RuleId::from_name(rname).ok_or_else(|| format!("unknown rule `{rname}`"))?;
    let principal = positions(m.get("principal").ok_or("proof node: missing principal")?, "principal")?;
    let aux = match m.get("aux") {
        None => vec![],
        Some(a) => serde_json::from_value(a.clone()).map_err(|e| format!("aux: {e}"))?,
    };
    let ps = m.get("premises").and_then(|p| p.as_array()).ok_or("proof node: missing premises")?;
    let premises = ps.iter().map(|p| node_from_json(p, false).map(|x| x.0)).collect::<Result<_, _>>()?;
    Ok((DerivationTree { conclusion, rule, principal, aux, premises }, logic))
}

/// Reads a proof; the optional root `logic` key is returned alongside.
pub fn proof_from_json<A: Codec>(v: &Value) -> Result<(DerivationTree<A>, Option<Logic>), String> {
    node_from_json(v, true)
}
