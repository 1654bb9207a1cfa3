//! The discrete coefficient group `H` that cocycles take values in,
//! carrying the discrete bi-invariant metric `d(a,b) = [a ≠ b]`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub const MAX_TABLE_SIZE: usize = 256;
pub const MAX_TARGET_RANK: usize = 8;

/// How to build the target group.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoeffSpec {
    /// Z/nZ under addition; `n = 1` is the trivial group, `n = 2` is the
    /// two-element group used throughout the counterexamples.
    Cyclic { n: u32 },
    /// An explicit finite group: `table[i][j]` is the index of
    /// `elements[i] · elements[j]`.
    Table {
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
    },
    /// Z^k under addition.
    FreeAbelian { k: usize },
}

/// An element of the target group in canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum HElem {
    /// Residue in `[0, n)`.
    Mod(u32),
    /// Index into the multiplication table.
    Idx(usize),
    /// Integer vector.
    Vec(Vec<i64>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("not a group: {reason} (witness: {witness})")]
    NotAGroup { reason: String, witness: String },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("cannot parse target element {0:?}")]
    ElemParse(String),
}

/// A validated coefficient group. Immutable; share via `Arc`.
#[derive(Clone, Debug)]
pub struct CoeffGroup {
    spec: CoeffSpec,
    /// For `Table` only: inverse of each element.
    inverses: Vec<usize>,
    identity_idx: usize,
}

impl CoeffGroup {
    pub fn new(spec: CoeffSpec) -> Result<Arc<Self>, CoeffError> {
        match &spec {
            CoeffSpec::Cyclic { n } => {
                if *n == 0 || *n as usize > MAX_TABLE_SIZE {
                    return Err(CoeffError::ParameterOutOfRange(format!(
                        "cyclic order {n} outside 1..={MAX_TABLE_SIZE}"
                    )));
                }
                Ok(Arc::new(CoeffGroup {
                    spec,
                    inverses: Vec::new(),
                    identity_idx: 0,
                }))
            }
            CoeffSpec::FreeAbelian { k } => {
                if *k == 0 || *k > MAX_TARGET_RANK {
                    return Err(CoeffError::ParameterOutOfRange(format!(
                        "free abelian target rank {k} outside 1..={MAX_TARGET_RANK}"
                    )));
                }
                Ok(Arc::new(CoeffGroup {
                    spec,
                    inverses: Vec::new(),
                    identity_idx: 0,
                }))
            }
            CoeffSpec::Table { elements, table } => {
                let (identity_idx, inverses) = validate_table(elements, table)?;
                Ok(Arc::new(CoeffGroup {
                    spec,
                    inverses,
                    identity_idx,
                }))
            }
        }
    }

    pub fn spec(&self) -> &CoeffSpec {
        &self.spec
    }

    pub fn is_abelian(&self) -> bool {
        match &self.spec {
            CoeffSpec::Cyclic { .. } | CoeffSpec::FreeAbelian { .. } => true,
            CoeffSpec::Table { table, .. } => {
                let n = table.len();
                (0..n).all(|i| (0..n).all(|j| table[i][j] == table[j][i]))
            }
        }
    }

    pub fn identity(&self) -> HElem {
        match &self.spec {
            CoeffSpec::Cyclic { .. } => HElem::Mod(0),
            CoeffSpec::Table { .. } => HElem::Idx(self.identity_idx),
            CoeffSpec::FreeAbelian { k } => HElem::Vec(vec![0; *k]),
        }
    }

    pub fn multiply(&self, a: &HElem, b: &HElem) -> HElem {
        match (&self.spec, a, b) {
            (CoeffSpec::Cyclic { n }, HElem::Mod(x), HElem::Mod(y)) => HElem::Mod((x + y) % n),
            (CoeffSpec::Table { table, .. }, HElem::Idx(i), HElem::Idx(j)) => {
                HElem::Idx(table[*i][*j])
            }
            (CoeffSpec::FreeAbelian { .. }, HElem::Vec(u), HElem::Vec(v)) => {
                HElem::Vec(u.iter().zip(v).map(|(x, y)| x + y).collect())
            }
            _ => panic!("target element does not belong to this coefficient group"),
        }
    }

    pub fn inverse(&self, a: &HElem) -> HElem {
        match (&self.spec, a) {
            (CoeffSpec::Cyclic { n }, HElem::Mod(x)) => HElem::Mod((n - x) % n),
            (CoeffSpec::Table { .. }, HElem::Idx(i)) => HElem::Idx(self.inverses[*i]),
            (CoeffSpec::FreeAbelian { .. }, HElem::Vec(v)) => {
                HElem::Vec(v.iter().map(|x| -x).collect())
            }
            _ => panic!("target element does not belong to this coefficient group"),
        }
    }

    /// All elements, for the finite kinds. `None` for the free abelian target.
    pub fn elements(&self) -> Option<Vec<HElem>> {
        match &self.spec {
            CoeffSpec::Cyclic { n } => Some((0..*n).map(HElem::Mod).collect()),
            CoeffSpec::Table { elements, .. } => {
                Some((0..elements.len()).map(HElem::Idx).collect())
            }
            CoeffSpec::FreeAbelian { .. } => None,
        }
    }

    /// Whether `a` and `b` are conjugate in `H`. Equality for the abelian
    /// kinds; table groups search over all conjugators.
    pub fn conjugate(&self, a: &HElem, b: &HElem) -> bool {
        if a == b {
            return true;
        }
        match &self.spec {
            CoeffSpec::Table { table, .. } => (0..table.len()).any(|c| {
                let g = HElem::Idx(c);
                self.multiply(&self.multiply(&g, a), &self.inverse(&g)) == *b
            }),
            _ => false,
        }
    }

    pub fn format_elem(&self, a: &HElem) -> String {
        match (&self.spec, a) {
            (CoeffSpec::Cyclic { .. }, HElem::Mod(x)) => x.to_string(),
            (CoeffSpec::Table { elements, .. }, HElem::Idx(i)) => elements[*i].clone(),
            (CoeffSpec::FreeAbelian { .. }, HElem::Vec(v)) => {
                let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("({})", inner.join(","))
            }
            _ => panic!("target element does not belong to this coefficient group"),
        }
    }

    pub fn parse_elem(&self, s: &str) -> Result<HElem, CoeffError> {
        let s = s.trim();
        match &self.spec {
            CoeffSpec::Cyclic { n } => {
                let x: i64 = s.parse().map_err(|_| CoeffError::ElemParse(s.into()))?;
                Ok(HElem::Mod(x.rem_euclid(*n as i64) as u32))
            }
            CoeffSpec::Table { elements, .. } => elements
                .iter()
                .position(|e| e == s)
                .map(HElem::Idx)
                .ok_or_else(|| CoeffError::ElemParse(s.into())),
            CoeffSpec::FreeAbelian { k } => {
                let inner = s
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| CoeffError::ElemParse(s.into()))?;
                let v: Option<Vec<i64>> = inner.split(',').map(|t| t.trim().parse().ok()).collect();
                match v {
                    Some(v) if v.len() == *k => Ok(HElem::Vec(v)),
                    _ => Err(CoeffError::ElemParse(s.into())),
                }
            }
        }
    }
}

/// Full group-axiom check: Latin square rows/columns, a two-sided identity,
/// two-sided inverses, and associativity over all triples.
fn validate_table(
    elements: &[String],
    table: &[Vec<usize>],
) -> Result<(usize, Vec<usize>), CoeffError> {
    let n = elements.len();
    if n == 0 || n > MAX_TABLE_SIZE {
        return Err(CoeffError::ParameterOutOfRange(format!(
            "table size {n} outside 1..={MAX_TABLE_SIZE}"
        )));
    }
    if table.len() != n || table.iter().any(|row| row.len() != n) {
        return Err(CoeffError::NotAGroup {
            reason: format!("table is not {n}x{n}"),
            witness: String::new(),
        });
    }
    for row in table {
        for &v in row {
            if v >= n {
                return Err(CoeffError::NotAGroup {
                    reason: format!("table entry {v} out of range"),
                    witness: String::new(),
                });
            }
        }
    }
    let identity_idx = (0..n)
        .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
        .ok_or_else(|| CoeffError::NotAGroup {
            reason: "no two-sided identity".into(),
            witness: String::new(),
        })?;
    let mut inverses = vec![usize::MAX; n];
    for a in 0..n {
        let inv = (0..n)
            .find(|&b| table[a][b] == identity_idx && table[b][a] == identity_idx)
            .ok_or_else(|| CoeffError::NotAGroup {
                reason: format!("{} has no two-sided inverse", elements[a]),
                witness: elements[a].clone(),
            })?;
        inverses[a] = inv;
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return Err(CoeffError::NotAGroup {
                        reason: "associativity fails".into(),
                        witness: format!("({}, {}, {})", elements[a], elements[b], elements[c]),
                    });
                }
            }
        }
    }
    Ok((identity_idx, inverses))
}

impl fmt::Display for HElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HElem::Mod(x) => write!(f, "{x}"),
            HElem::Idx(i) => write!(f, "#{i}"),
            HElem::Vec(v) => {
                let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", inner.join(","))
            }
        }
    }
}

/// The S3 multiplication table used in tests, in cycle notation, with the
/// product `p·q` applying `q` first (function composition), so that
/// `(12)·(23) = (123)`.
pub fn s3_spec() -> CoeffSpec {
    // elements: e, (12), (13), (23), (123), (132)
    let elements: Vec<String> = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    // perms as images of 0,1,2
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [1, 0, 2],
        [2, 1, 0],
        [0, 2, 1],
        [1, 2, 0],
        [2, 0, 1],
    ];
    let compose = |p: &[usize; 3], q: &[usize; 3]| -> [usize; 3] { [p[q[0]], p[q[1]], p[q[2]]] };
    let mut table = vec![vec![0usize; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            let r = compose(&perms[i], &perms[j]);
            table[i][j] = perms.iter().position(|p| *p == r).unwrap();
        }
    }
    CoeffSpec::Table { elements, table }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_two_is_sign_flip() {
        let h = CoeffGroup::new(CoeffSpec::Cyclic { n: 2 }).unwrap();
        let one = HElem::Mod(1);
        assert_eq!(h.multiply(&one, &one), h.identity());
        assert_eq!(h.inverse(&one), one);
    }

    #[test]
    fn trivial_group() {
        let h = CoeffGroup::new(CoeffSpec::Cyclic { n: 1 }).unwrap();
        assert_eq!(h.multiply(&h.identity(), &h.identity()), h.identity());
        assert_eq!(h.elements().unwrap().len(), 1);
    }

    #[test]
    fn s3_is_a_nonabelian_group_of_order_6() {
        let h = CoeffGroup::new(s3_spec()).unwrap();
        assert_eq!(h.elements().unwrap().len(), 6);
        assert!(!h.is_abelian());
        // (12)·(23) = (123) under left-to-right composition
        let t12 = h.parse_elem("(12)").unwrap();
        let t23 = h.parse_elem("(23)").unwrap();
        assert_eq!(h.multiply(&t12, &t23), h.parse_elem("(123)").unwrap());
    }

    #[test]
    fn broken_table_is_rejected_with_witness() {
        // a "table" where 1·1 = 1 breaks the Latin square / inverse axioms
        let spec = CoeffSpec::Table {
            elements: vec!["e".into(), "a".into()],
            table: vec![vec![0, 1], vec![1, 1]],
        };
        let err = CoeffGroup::new(spec).unwrap_err();
        match err {
            CoeffError::NotAGroup { witness, .. } => assert_eq!(witness, "a"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn free_abelian_target_arithmetic() {
        let h = CoeffGroup::new(CoeffSpec::FreeAbelian { k: 2 }).unwrap();
        let a = h.parse_elem("(1,2)").unwrap();
        let b = h.parse_elem("(-1,-2)").unwrap();
        assert_eq!(h.multiply(&a, &b), h.identity());
    }

    #[test]
    fn discrete_metric_is_bi_invariant_on_s3() {
        let h = CoeffGroup::new(s3_spec()).unwrap();
        let elems = h.elements().unwrap();
        let d = |a: &HElem, b: &HElem| u8::from(a != b);
        for x in &elems {
            for y in &elems {
                for a in &elems {
                    assert_eq!(d(&h.multiply(x, a), &h.multiply(y, a)), d(x, y));
                    assert_eq!(d(&h.multiply(a, x), &h.multiply(a, y)), d(x, y));
                }
            }
        }
    }

    #[test]
    fn product_inequality_for_discrete_metric() {
        // d(x1···xn, y1···yn) ≤ Σ d(xi, yi) on random tuples
        use rand::{Rng, SeedableRng};
        let h = CoeffGroup::new(s3_spec()).unwrap();
        let elems = h.elements().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let d = |a: &HElem, b: &HElem| u32::from(a != b);
        for _ in 0..200 {
            let n = rng.random_range(1..6);
            let xs: Vec<HElem> = (0..n)
                .map(|_| elems[rng.random_range(0..elems.len())].clone())
                .collect();
            let ys: Vec<HElem> = (0..n)
                .map(|_| elems[rng.random_range(0..elems.len())].clone())
                .collect();
            let prod = |v: &[HElem]| v.iter().fold(h.identity(), |acc, x| h.multiply(&acc, x));
            let lhs = d(&prod(&xs), &prod(&ys));
            let rhs: u32 = xs.iter().zip(&ys).map(|(x, y)| d(x, y)).sum();
            assert!(lhs <= rhs);
        }
    }
}
