//! JSON schemas for the file formats: group specs, subshifts,
//! configurations, patterns, cocycles, and periodic configurations.
//! Emission is deterministic (sorted keys, canonical element order) so
//! fixed seeds give byte-identical reports.

use crate::cocycle::{make_local_cocycle_full, CocycleCaps, CocycleError, GenRule, LocalCocycle};
use crate::coeff::{CoeffError, CoeffGroup, CoeffSpec};
use crate::group::{Elem, GroupContext, GroupError, GroupSpec};
use crate::shift::{
    Alphabet, Configuration, Pattern, PeriodicConfigZd, ShiftError, ShiftKind, Subshift,
};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed {context}: {message}")]
    Malformed { context: String, message: String },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("json: {0}")]
    Syntax(#[from] serde_json::Error),
}

fn malformed(context: &str, message: impl Into<String>) -> JsonError {
    JsonError::Malformed {
        context: context.into(),
        message: message.into(),
    }
}

pub fn parse_group(v: &Value) -> Result<Arc<GroupContext>, JsonError> {
    let spec: GroupSpec = serde_json::from_value(v.clone())?;
    Ok(GroupContext::new(spec)?)
}

pub fn group_to_json(group: &GroupContext) -> Value {
    serde_json::to_value(group.spec()).expect("group spec serializes")
}

pub fn parse_coeff(v: &Value) -> Result<Arc<CoeffGroup>, JsonError> {
    let spec: CoeffSpec = serde_json::from_value(v.clone())?;
    Ok(CoeffGroup::new(spec)?)
}

pub fn coeff_to_json(target: &CoeffGroup) -> Value {
    serde_json::to_value(target.spec()).expect("coeff spec serializes")
}

fn parse_elem_list(group: &GroupContext, v: &Value, context: &str) -> Result<Vec<Elem>, JsonError> {
    let arr = v
        .as_array()
        .ok_or_else(|| malformed(context, "expected an array of element strings"))?;
    arr.iter()
        .map(|e| {
            let s = e
                .as_str()
                .ok_or_else(|| malformed(context, "elements must be strings"))?;
            Ok(group.parse_elem(s)?)
        })
        .collect()
}

pub fn parse_alphabet(v: &Value) -> Result<Arc<Alphabet>, JsonError> {
    let alphabet: Alphabet = serde_json::from_value(v.clone())?;
    alphabet.validate()?;
    Ok(Arc::new(alphabet))
}

/// Subshift files: `{"kind": "full"|"sft"|"golden_mean", "alphabet": {...}, ...}`.
pub fn parse_subshift(group: Arc<GroupContext>, v: &Value) -> Result<Arc<Subshift>, JsonError> {
    let kind_str = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("subshift", "missing \"kind\""))?;
    let alphabet = parse_alphabet(
        v.get("alphabet")
            .ok_or_else(|| malformed("subshift", "missing \"alphabet\""))?,
    )?;
    let kind = match kind_str {
        "full" => ShiftKind::Full,
        "golden_mean" => {
            let windows_v = v
                .get("windows")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed("subshift", "golden_mean needs \"windows\""))?;
            let windows = windows_v
                .iter()
                .map(|w| parse_elem_list(&group, w, "golden_mean window"))
                .collect::<Result<Vec<_>, _>>()?;
            ShiftKind::GoldenMean { windows }
        }
        "sft" => {
            // rows are positional over the window as written in the file;
            // remap them onto the canonical sorted order
            let given = parse_elem_list(
                &group,
                v.get("window")
                    .ok_or_else(|| malformed("subshift", "sft needs \"window\""))?,
                "sft window",
            )?;
            let window: Vec<Elem> = {
                let set: BTreeSet<Elem> = given.iter().cloned().collect();
                set.into_iter().collect()
            };
            if window.len() != given.len() {
                return Err(malformed("subshift", "sft window has duplicate sites"));
            }
            let remap: Vec<usize> = window
                .iter()
                .map(|site| given.iter().position(|g| g == site).expect("same sites"))
                .collect();
            let allowed_v = v
                .get("allowed")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed("subshift", "sft needs \"allowed\""))?;
            let mut allowed = BTreeSet::new();
            for row in allowed_v {
                let s = row
                    .as_str()
                    .ok_or_else(|| malformed("subshift", "allowed rows must be strings"))?;
                let digits = parse_symbols(&alphabet, s, given.len())?;
                allowed.insert(remap.iter().map(|&i| digits[i]).collect::<Vec<u8>>());
            }
            ShiftKind::Sft { window, allowed }
        }
        other => return Err(malformed("subshift", format!("unknown kind {other:?}"))),
    };
    Ok(Subshift::new(group, alphabet, kind)?)
}

pub fn subshift_to_json(shift: &Subshift) -> Value {
    let group = &shift.group;
    match &shift.kind {
        ShiftKind::Full => json!({
            "kind": "full",
            "alphabet": shift.alphabet.as_ref(),
        }),
        ShiftKind::GoldenMean { windows } => json!({
            "kind": "golden_mean",
            "alphabet": shift.alphabet.as_ref(),
            "windows": windows
                .iter()
                .map(|w| w.iter().map(|e| group.format_elem(e)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
        ShiftKind::Sft { window, allowed } => json!({
            "kind": "sft",
            "alphabet": shift.alphabet.as_ref(),
            "window": window.iter().map(|e| group.format_elem(e)).collect::<Vec<_>>(),
            "allowed": allowed
                .iter()
                .map(|p| format_symbols(&shift.alphabet, p))
                .collect::<Vec<_>>(),
        }),
    }
}

fn parse_symbols(alphabet: &Alphabet, s: &str, expected: usize) -> Result<Vec<u8>, JsonError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != expected {
        return Err(malformed(
            "pattern",
            format!("expected {expected} symbols, got {}", parts.len()),
        ));
    }
    parts
        .iter()
        .map(|p| {
            alphabet
                .index_of(p)
                .ok_or_else(|| malformed("pattern", format!("unknown symbol {p:?}")))
        })
        .collect()
}

fn format_symbols(alphabet: &Alphabet, digits: &[u8]) -> String {
    digits
        .iter()
        .map(|&d| alphabet.symbols[d as usize].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Configurations: `{"background": "0", "overlay": [["(1,0)", "1"], ...]}`.
pub fn parse_configuration(
    group: Arc<GroupContext>,
    alphabet: Arc<Alphabet>,
    v: &Value,
) -> Result<Configuration, JsonError> {
    let bg_sym = v
        .get("background")
        .and_then(Value::as_str)
        .unwrap_or(&alphabet.background);
    let bg = alphabet
        .index_of(bg_sym)
        .ok_or_else(|| malformed("configuration", format!("unknown background {bg_sym:?}")))?;
    let mut x = Configuration::constant(group.clone(), alphabet.clone(), bg);
    if let Some(overlay) = v.get("overlay") {
        let arr = overlay
            .as_array()
            .ok_or_else(|| malformed("configuration", "overlay must be an array of pairs"))?;
        for pair in arr {
            let (site, sym) = parse_string_pair(pair, "configuration overlay")?;
            let g = group.parse_elem(&site)?;
            let s = alphabet
                .index_of(&sym)
                .ok_or_else(|| malformed("configuration", format!("unknown symbol {sym:?}")))?;
            x.set(g, s);
        }
    }
    Ok(x)
}

pub fn configuration_to_json(group: &GroupContext, x: &Configuration) -> Value {
    let overlay: Vec<Value> = x
        .overlay()
        .iter()
        .map(|(g, &s)| json!([group.format_elem(g), x.alphabet.symbols[s as usize]]))
        .collect();
    json!({
        "background": x.alphabet.symbols[x.background() as usize],
        "overlay": overlay,
    })
}

/// Patterns: `[["(0)", "1"], ["(1)", "0"], ...]` (a total assignment).
pub fn parse_pattern(
    group: &GroupContext,
    alphabet: &Alphabet,
    v: &Value,
) -> Result<Pattern, JsonError> {
    let arr = v
        .as_array()
        .ok_or_else(|| malformed("pattern", "expected an array of [site, symbol] pairs"))?;
    let mut values = BTreeMap::new();
    for pair in arr {
        let (site, sym) = parse_string_pair(pair, "pattern")?;
        let g = group.parse_elem(&site)?;
        let s = alphabet
            .index_of(&sym)
            .ok_or_else(|| malformed("pattern", format!("unknown symbol {sym:?}")))?;
        values.insert(g, s);
    }
    Ok(Pattern::new(values))
}

fn parse_string_pair(v: &Value, context: &str) -> Result<(String, String), JsonError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| malformed(context, "entries must be [string, string] pairs"))?;
    match (arr[0].as_str(), arr[1].as_str()) {
        (Some(a), Some(b)) => Ok((a.to_string(), b.to_string())),
        _ => Err(malformed(context, "entries must be [string, string] pairs")),
    }
}

/// Cocycle files carry their own target group and per-generator rules:
///
/// ```json
/// {
///   "schema_version": 1,
///   "target": {"kind": "cyclic", "n": 2},
///   "rules": {
///     "e1": {"window": ["(0)", "(1)"], "rows": [["0 0", "0"], ...]},
///     ...
///   }
/// }
/// ```
///
/// A shared top-level `"window"` with plain row arrays per generator is
/// accepted as a shorthand; rules may cover one generator per inverse pair.
pub fn parse_cocycle(
    shift: Arc<Subshift>,
    v: &Value,
    caps: CocycleCaps,
) -> Result<LocalCocycle, JsonError> {
    let group = shift.group.clone();
    let target = parse_coeff(
        v.get("target")
            .ok_or_else(|| malformed("cocycle", "missing \"target\""))?,
    )?;
    let rules_v = v
        .get("rules")
        .and_then(Value::as_object)
        .ok_or_else(|| malformed("cocycle", "missing \"rules\" object"))?;
    let shared_window: Option<Vec<Elem>> = match v.get("window") {
        Some(w) => Some(parse_elem_list(&group, w, "cocycle window")?),
        None => None,
    };

    let a = shift.alphabet.len();
    let mut parsed: BTreeMap<usize, GenRule> = BTreeMap::new();
    for (name, rule_v) in rules_v {
        let gi = group
            .generator_index(name)
            .ok_or_else(|| malformed("cocycle", format!("unknown generator {name:?}")))?;
        let (window, rows_v) = match rule_v {
            Value::Array(rows) => {
                let w = shared_window
                    .clone()
                    .ok_or_else(|| malformed("cocycle", "plain rows need a top-level window"))?;
                (w, rows.clone())
            }
            Value::Object(obj) => {
                let w = parse_elem_list(
                    &group,
                    obj.get("window")
                        .ok_or_else(|| malformed("cocycle", "rule needs a window"))?,
                    "rule window",
                )?;
                let rows = obj
                    .get("rows")
                    .and_then(Value::as_array)
                    .ok_or_else(|| malformed("cocycle", "rule needs rows"))?
                    .clone();
                (w, rows)
            }
            _ => return Err(malformed("cocycle", "rule must be rows or an object")),
        };
        let window: Vec<Elem> = {
            let set: BTreeSet<Elem> = window.into_iter().collect();
            set.into_iter().collect()
        };
        let size = a
            .checked_pow(window.len() as u32)
            .ok_or_else(|| malformed("cocycle", "window too large"))?;
        let mut table = vec![None; size];
        for row in &rows_v {
            let (pattern_s, h_s) = parse_string_pair(row, "cocycle rule row")?;
            let digits = parse_symbols(&shift.alphabet, &pattern_s, window.len())?;
            let idx = digits
                .iter()
                .rev()
                .fold(0usize, |acc, &d| acc * a + d as usize);
            table[idx] = Some(target.parse_elem(&h_s)?);
        }
        let table: Vec<_> = table
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                t.ok_or_else(|| {
                    malformed(
                        "cocycle",
                        format!("rule for {name} misses pattern index {i}"),
                    )
                })
            })
            .collect::<Result<_, _>>()?;
        parsed.insert(gi, GenRule { window, table });
    }

    Ok(make_local_cocycle_full(shift, target, parsed, caps)?)
}

pub fn cocycle_to_json(cocycle: &LocalCocycle) -> Value {
    let group = &cocycle.group;
    let rules: BTreeMap<String, Value> = group
        .generators()
        .iter()
        .enumerate()
        .map(|(gi, gen)| {
            let rule = cocycle.rule(gi);
            let a = cocycle.shift.alphabet.len();
            let rows: Vec<Value> = (0..rule.table.len())
                .map(|idx| {
                    let digits: Vec<u8> = {
                        let mut d = Vec::with_capacity(rule.window.len());
                        let mut i = idx;
                        for _ in 0..rule.window.len() {
                            d.push((i % a) as u8);
                            i /= a;
                        }
                        d
                    };
                    json!([
                        format_symbols(&cocycle.shift.alphabet, &digits),
                        cocycle.target.format_elem(&rule.table[idx]),
                    ])
                })
                .collect();
            (
                gen.name.clone(),
                json!({
                    "window": rule.window.iter().map(|e| group.format_elem(e)).collect::<Vec<_>>(),
                    "rows": rows,
                }),
            )
        })
        .collect();
    json!({
        "schema_version": 1,
        "target": coeff_to_json(&cocycle.target),
        "rules": rules,
    })
}

pub fn periodic_to_json(shift: &Subshift, y: &PeriodicConfigZd) -> Value {
    let group = &shift.group;
    let k = y.period as i64;
    let d = y.dim();
    let mut nonzero: Vec<Value> = Vec::new();
    let bg = shift.alphabet.background_index();
    let mut point = vec![0i64; d];
    loop {
        let g = Elem::Vector(point.clone());
        let v = y.value_at(&g);
        if v != bg {
            nonzero.push(json!([
                group.format_elem(&g),
                shift.alphabet.symbols[v as usize]
            ]));
        }
        let mut i = 0;
        loop {
            if i == d {
                return json!({
                    "schema_version": 1,
                    "period": y.period,
                    "dim": d,
                    "background": shift.alphabet.background,
                    "cell_nonbackground": nonzero,
                });
            }
            point[i] += 1;
            if point[i] < k {
                break;
            }
            point[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_specs_round_trip() {
        for text in [
            r#"{"family":"free_abelian","params":{"d":2}}"#,
            r#"{"family":"free","params":{"r":3}}"#,
            r#"{"family":"free_product_cyclic","params":{"orders":[2,3]}}"#,
            r#"{"family":"heisenberg"}"#,
        ] {
            let v: Value = serde_json::from_str(text).unwrap();
            let g = parse_group(&v).unwrap();
            assert_eq!(group_to_json(&g), v);
        }
    }

    #[test]
    fn subshift_round_trip() {
        let v: Value = serde_json::from_str(
            r#"{
                "kind": "golden_mean",
                "alphabet": {"symbols": ["0", "1"], "background": "0"},
                "windows": [["(0,0)", "(1,0)"]]
            }"#,
        )
        .unwrap();
        let group = parse_group(
            &serde_json::from_str(r#"{"family":"free_abelian","params":{"d":2}}"#).unwrap(),
        )
        .unwrap();
        let shift = parse_subshift(group, &v).unwrap();
        assert_eq!(subshift_to_json(&shift), v);
    }

    #[test]
    fn sft_rows_follow_the_written_window_order() {
        // the same shift written with a reversed window must parse to the
        // same membership predicate
        let group = parse_group(
            &serde_json::from_str(r#"{"family":"free_abelian","params":{"d":1}}"#).unwrap(),
        )
        .unwrap();
        let sorted: Value = serde_json::from_str(
            r#"{
                "kind": "sft",
                "alphabet": {"symbols": ["0", "1"], "background": "0"},
                "window": ["(0)", "(1)"],
                "allowed": ["0 0", "0 1", "1 0"]
            }"#,
        )
        .unwrap();
        let reversed: Value = serde_json::from_str(
            r#"{
                "kind": "sft",
                "alphabet": {"symbols": ["0", "1"], "background": "0"},
                "window": ["(1)", "(0)"],
                "allowed": ["0 0", "1 0", "0 1"]
            }"#,
        )
        .unwrap();
        let a = parse_subshift(group.clone(), &sorted).unwrap();
        let b = parse_subshift(group.clone(), &reversed).unwrap();
        // this no-adjacent-ones SFT is the golden mean shift in disguise
        let gm = Subshift::golden_mean(
            group.clone(),
            Alphabet::binary(),
            vec![vec![
                group.parse_elem("(0)").unwrap(),
                group.parse_elem("(1)").unwrap(),
            ]],
        )
        .unwrap();
        let sites: Vec<_> = group.ball(2).unwrap().elems().cloned().collect();
        for idx in 0..1usize << sites.len() {
            let mut x = a.background_configuration();
            for (i, s) in sites.iter().enumerate() {
                if idx >> i & 1 == 1 {
                    x.set(s.clone(), 1);
                }
            }
            assert_eq!(a.contains(&x), b.contains(&x));
            assert_eq!(a.contains(&x), gm.contains(&x));
        }
        assert_eq!(subshift_to_json(&a), subshift_to_json(&b));
    }

    #[test]
    fn configuration_round_trip() {
        let group = parse_group(
            &serde_json::from_str(r#"{"family":"free_abelian","params":{"d":1}}"#).unwrap(),
        )
        .unwrap();
        let alphabet = Alphabet::binary();
        let v: Value =
            serde_json::from_str(r#"{"background":"0","overlay":[["(0)","1"],["(3)","1"]]}"#)
                .unwrap();
        let x = parse_configuration(group.clone(), alphabet, &v).unwrap();
        assert_eq!(configuration_to_json(&group, &x), v);
    }

    #[test]
    fn cocycle_json_round_trips_through_validation() {
        let c = crate::cocycle::example_cocycle_z();
        let v = cocycle_to_json(&c);
        let c2 = parse_cocycle(c.shift.clone(), &v, CocycleCaps::default()).unwrap();
        let x = Configuration::with_overlay(
            c.group.clone(),
            c.shift.alphabet.clone(),
            [(c.group.parse_elem("(1)").unwrap(), 1)],
        );
        for g in ["(1)", "(-1)", "(3)", "(-2)"] {
            let g = c.group.parse_elem(g).unwrap();
            assert_eq!(c.evaluate(&g, &x), c2.evaluate(&g, &x));
        }
    }

    #[test]
    fn constant_cocycle_round_trips_with_empty_windows() {
        // minimized constant rules serialize as a single empty-pattern row
        let group = parse_group(
            &serde_json::from_str(r#"{"family":"free_abelian","params":{"d":1}}"#).unwrap(),
        )
        .unwrap();
        let shift = Subshift::full(group.clone(), Alphabet::binary()).unwrap();
        let target =
            crate::coeff::CoeffGroup::new(crate::coeff::CoeffSpec::Cyclic { n: 2 }).unwrap();
        let tables = std::collections::BTreeMap::from([(
            0usize,
            vec![crate::coeff::HElem::Mod(1), crate::coeff::HElem::Mod(1)],
        )]);
        let c = crate::cocycle::make_local_cocycle(
            shift.clone(),
            target,
            vec![group.identity()],
            tables,
            CocycleCaps::default(),
        )
        .unwrap();
        assert!(c.rule(0).window.is_empty());
        let v = cocycle_to_json(&c);
        let c2 = parse_cocycle(shift, &v, CocycleCaps::default()).unwrap();
        let x = c.shift.background_configuration();
        let g5 = group.parse_elem("(5)").unwrap();
        assert_eq!(c.evaluate(&g5, &x), c2.evaluate(&g5, &x));
    }

    #[test]
    fn shorthand_cocycle_with_shared_window_parses() {
        let group = parse_group(
            &serde_json::from_str(r#"{"family":"free_abelian","params":{"d":1}}"#).unwrap(),
        )
        .unwrap();
        let shift = Subshift::full(group, Alphabet::binary()).unwrap();
        let v: Value = serde_json::from_str(
            r#"{
                "schema_version": 1,
                "target": {"kind": "cyclic", "n": 2},
                "window": ["(0)", "(1)"],
                "rules": {
                    "e1": [["0 0","0"],["1 0","0"],["0 1","1"],["1 1","1"]]
                }
            }"#,
        )
        .unwrap();
        let c = parse_cocycle(shift, &v, CocycleCaps::default()).unwrap();
        let x = Configuration::with_overlay(
            c.group.clone(),
            c.shift.alphabet.clone(),
            [(c.group.parse_elem("(1)").unwrap(), 1)],
        );
        assert_eq!(
            c.evaluate(&c.group.parse_elem("(1)").unwrap(), &x),
            crate::coeff::HElem::Mod(1)
        );
    }
}
