//! Normal forms for group elements and the per-family arithmetic.

use super::{GroupError, GroupSpec};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A letter of a free-group word: generator index plus inversion flag.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Letter {
    pub gen: u8,
    pub inv: bool,
}

/// A syllable `s_f^e` of a free-product word, with `0 < e < n_f`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Syllable {
    pub factor: u8,
    pub exp: u32,
}

/// A group element in its unique family-specific normal form.
///
/// Equality of normal forms is equality of group elements; `Ord` is an
/// arbitrary but fixed total order used for deterministic containers.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Elem {
    /// Free abelian: integer coordinate vector.
    Vector(Vec<i64>),
    /// Free group: freely reduced word.
    Word(Vec<Letter>),
    /// Free product of cyclics: alternating syllables, exponents in `(0, n_f)`.
    Syllables(Vec<Syllable>),
    /// Heisenberg: `(a, b, c)` for `x^a y^b z^c` with `z = [x, y]` central.
    Triple([i64; 3]),
}

impl Elem {
    pub fn is_identity(&self) -> bool {
        match self {
            Elem::Vector(v) => v.iter().all(|&c| c == 0),
            Elem::Word(w) => w.is_empty(),
            Elem::Syllables(s) => s.is_empty(),
            Elem::Triple(t) => *t == [0, 0, 0],
        }
    }
}

pub(super) fn identity_for(spec: &GroupSpec) -> Elem {
    match spec {
        GroupSpec::FreeAbelian { d } => Elem::Vector(vec![0; *d as usize]),
        GroupSpec::Free { .. } => Elem::Word(Vec::new()),
        GroupSpec::FreeProductCyclic { .. } => Elem::Syllables(Vec::new()),
        GroupSpec::Heisenberg => Elem::Triple([0, 0, 0]),
    }
}

pub(super) fn multiply(spec: &GroupSpec, a: &Elem, b: &Elem) -> Elem {
    match (spec, a, b) {
        (GroupSpec::FreeAbelian { .. }, Elem::Vector(u), Elem::Vector(v)) => {
            Elem::Vector(u.iter().zip(v).map(|(x, y)| x + y).collect())
        }
        (GroupSpec::Free { .. }, Elem::Word(u), Elem::Word(v)) => {
            let mut out = u.clone();
            for &l in v {
                match out.last() {
                    Some(&t) if t.gen == l.gen && t.inv != l.inv => {
                        out.pop();
                    }
                    _ => out.push(l),
                }
            }
            Elem::Word(out)
        }
        (GroupSpec::FreeProductCyclic { orders }, Elem::Syllables(u), Elem::Syllables(v)) => {
            let mut out = u.clone();
            for &s in v {
                push_syllable(orders, &mut out, s);
            }
            Elem::Syllables(out)
        }
        (GroupSpec::Heisenberg, Elem::Triple([a1, b1, c1]), Elem::Triple([a2, b2, c2])) => {
            // x^a y^b z^c normal form with yx = xyz^{-1}.
            Elem::Triple([a1 + a2, b1 + b2, c1 + c2 - a2 * b1])
        }
        _ => panic!("element does not belong to this group family"),
    }
}

/// Appends one syllable, merging with the tail when the factors match.
/// Cascades so the result stays alternating with nonzero exponents.
fn push_syllable(orders: &[u32], out: &mut Vec<Syllable>, s: Syllable) {
    let mut pending = s;
    loop {
        match out.last() {
            Some(&t) if t.factor == pending.factor => {
                out.pop();
                let n = orders[pending.factor as usize];
                let e = (t.exp + pending.exp) % n;
                if e == 0 {
                    // merged syllable vanished; nothing cascades further
                    return;
                }
                pending = Syllable {
                    factor: pending.factor,
                    exp: e,
                };
            }
            _ => {
                out.push(pending);
                return;
            }
        }
    }
}

pub(super) fn inverse(spec: &GroupSpec, a: &Elem) -> Elem {
    match (spec, a) {
        (GroupSpec::FreeAbelian { .. }, Elem::Vector(v)) => {
            Elem::Vector(v.iter().map(|x| -x).collect())
        }
        (GroupSpec::Free { .. }, Elem::Word(w)) => Elem::Word(
            w.iter()
                .rev()
                .map(|l| Letter {
                    gen: l.gen,
                    inv: !l.inv,
                })
                .collect(),
        ),
        (GroupSpec::FreeProductCyclic { orders }, Elem::Syllables(s)) => Elem::Syllables(
            s.iter()
                .rev()
                .map(|t| Syllable {
                    factor: t.factor,
                    exp: orders[t.factor as usize] - t.exp,
                })
                .collect(),
        ),
        (GroupSpec::Heisenberg, Elem::Triple([a, b, c])) => Elem::Triple([-a, -b, -c - a * b]),
        _ => panic!("element does not belong to this group family"),
    }
}

/// Exact word length for the families with a closed form; Heisenberg is
/// handled by the BFS table in `ball.rs`.
pub(super) fn closed_form_length(spec: &GroupSpec, a: &Elem) -> Option<u64> {
    match (spec, a) {
        (GroupSpec::FreeAbelian { .. }, Elem::Vector(v)) => {
            Some(v.iter().map(|x| x.unsigned_abs()).sum())
        }
        (GroupSpec::Free { .. }, Elem::Word(w)) => Some(w.len() as u64),
        (GroupSpec::FreeProductCyclic { orders }, Elem::Syllables(s)) => Some(
            s.iter()
                .map(|t| syllable_cost(orders[t.factor as usize], t.exp))
                .sum(),
        ),
        (GroupSpec::Heisenberg, _) => None,
        _ => panic!("element does not belong to this group family"),
    }
}

pub(super) fn syllable_cost(order: u32, exp: u32) -> u64 {
    exp.min(order - exp) as u64
}

/// Cyclic reduction `a = u c u^{-1}` for word-like families.
/// Returns `(u, c)` with `c` cyclically reduced.
pub(super) fn cyclic_reduce(spec: &GroupSpec, a: &Elem) -> (Elem, Elem) {
    match (spec, a) {
        (GroupSpec::Free { .. }, Elem::Word(w)) => {
            let mut core = w.clone();
            let mut conj = Vec::new();
            while core.len() >= 2 {
                let first = core[0];
                let last = *core.last().unwrap();
                if first.gen == last.gen && first.inv != last.inv {
                    conj.push(first);
                    core.remove(0);
                    core.pop();
                } else {
                    break;
                }
            }
            (Elem::Word(conj), Elem::Word(core))
        }
        (GroupSpec::FreeProductCyclic { orders }, Elem::Syllables(s)) => {
            let mut core = s.clone();
            // accumulate the conjugator through multiplication so repeated
            // strips of the same factor stay in normal form
            let mut conj = Elem::Syllables(Vec::new());
            while core.len() >= 2 && core[0].factor == core.last().unwrap().factor {
                let first = core[0];
                let last = *core.last().unwrap();
                conj = multiply(spec, &conj, &Elem::Syllables(vec![first]));
                core.remove(0);
                core.pop();
                let n = orders[first.factor as usize];
                let e = (last.exp + first.exp) % n;
                if e != 0 {
                    // merged boundary syllable moves to the front of the core
                    core.insert(
                        0,
                        Syllable {
                            factor: first.factor,
                            exp: e,
                        },
                    );
                }
            }
            (conj, Elem::Syllables(core))
        }
        _ => panic!("cyclic reduction only applies to free and free-product families"),
    }
}

// ---------------------------------------------------------------------------
// Text form. Vectors and triples print as "(3,-2)"; words as "a b^-1";
// syllables as "s1 s2^2"; the identity prints as "e".
// ---------------------------------------------------------------------------

pub(super) fn format_elem(spec: &GroupSpec, a: &Elem) -> String {
    match (spec, a) {
        (GroupSpec::FreeAbelian { .. }, Elem::Vector(v)) => {
            let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("({})", inner.join(","))
        }
        (GroupSpec::Heisenberg, Elem::Triple(t)) => format!("({},{},{})", t[0], t[1], t[2]),
        (GroupSpec::Free { .. }, Elem::Word(w)) => {
            if w.is_empty() {
                return "e".to_string();
            }
            w.iter()
                .map(|l| {
                    let name = free_letter_name(l.gen);
                    if l.inv {
                        format!("{name}^-1")
                    } else {
                        name.to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        }
        (GroupSpec::FreeProductCyclic { .. }, Elem::Syllables(s)) => {
            if s.is_empty() {
                return "e".to_string();
            }
            s.iter()
                .map(|t| {
                    if t.exp == 1 {
                        format!("s{}", t.factor + 1)
                    } else {
                        format!("s{}^{}", t.factor + 1, t.exp)
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        }
        _ => panic!("element does not belong to this group family"),
    }
}

pub(super) fn free_letter_name(gen: u8) -> char {
    (b'a' + gen) as char
}

pub(super) fn parse_elem(spec: &GroupSpec, s: &str) -> Result<Elem, GroupError> {
    let s = s.trim();
    let bad = |msg: &str| GroupError::ElemParse {
        input: s.to_string(),
        reason: msg.to_string(),
    };
    match spec {
        GroupSpec::FreeAbelian { d } => {
            let v = parse_int_tuple(s).ok_or_else(|| bad("expected \"(n,...,n)\""))?;
            if v.len() != *d as usize {
                return Err(bad("wrong number of coordinates"));
            }
            Ok(Elem::Vector(v))
        }
        GroupSpec::Heisenberg => {
            let v = parse_int_tuple(s).ok_or_else(|| bad("expected \"(a,b,c)\""))?;
            if v.len() != 3 {
                return Err(bad("expected three coordinates"));
            }
            Ok(Elem::Triple([v[0], v[1], v[2]]))
        }
        GroupSpec::Free { r } => {
            if s == "e" || s.is_empty() {
                return Ok(Elem::Word(Vec::new()));
            }
            let mut acc = identity_for(spec);
            for tok in s.split_whitespace() {
                let (base, exp) = split_power(tok).ok_or_else(|| bad("bad token"))?;
                let mut chars = base.chars();
                let c = chars.next().ok_or_else(|| bad("empty token"))?;
                if chars.next().is_some() || !c.is_ascii_lowercase() {
                    return Err(bad("free-group letters are single characters a, b, ..."));
                }
                let gen = (c as u8) - b'a';
                if gen as u32 >= *r {
                    return Err(bad("letter outside the generating set"));
                }
                let letter = Elem::Word(vec![Letter { gen, inv: exp < 0 }]);
                for _ in 0..exp.unsigned_abs() {
                    acc = multiply(spec, &acc, &letter);
                }
            }
            Ok(acc)
        }
        GroupSpec::FreeProductCyclic { orders } => {
            if s == "e" || s.is_empty() {
                return Ok(Elem::Syllables(Vec::new()));
            }
            let mut acc = identity_for(spec);
            for tok in s.split_whitespace() {
                let (base, exp) = split_power(tok).ok_or_else(|| bad("bad token"))?;
                let idx: u32 = base
                    .strip_prefix('s')
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| bad("expected s1, s2, ... syllables"))?;
                if idx == 0 || idx as usize > orders.len() {
                    return Err(bad("factor index out of range"));
                }
                let factor = (idx - 1) as u8;
                let n = orders[factor as usize] as i64;
                let e = exp.rem_euclid(n) as u32;
                if e != 0 {
                    acc = multiply(
                        spec,
                        &acc,
                        &Elem::Syllables(vec![Syllable { factor, exp: e }]),
                    );
                }
            }
            Ok(acc)
        }
    }
}

fn split_power(tok: &str) -> Option<(&str, i64)> {
    match tok.split_once('^') {
        None => Some((tok, 1)),
        Some((base, e)) => Some((base, e.parse().ok()?)),
    }
}

fn parse_int_tuple(s: &str) -> Option<Vec<i64>> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    inner
        .split(',')
        .map(|t| t.trim().parse().ok())
        .collect::<Option<Vec<i64>>>()
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = free_letter_name(self.gen);
        if self.inv {
            write!(f, "{name}^-1")
        } else {
            write!(f, "{name}")
        }
    }
}
