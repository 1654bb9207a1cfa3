//! Finitely generated groups with decidable word problem: normal forms,
//! arithmetic, word length, ball enumeration, and defining relators.
//!
//! Four families are supported, each with a canonical symmetric generating
//! set: free abelian groups, free groups, free products of finite cyclic
//! groups, and the discrete Heisenberg group. Everything downstream (cones,
//! cocycles, end estimation) reduces to exact arithmetic in these families.

mod ball;
mod elem;

pub use ball::Ball;
pub use elem::{Elem, Letter, Syllable};

use serde::{Deserialize, Serialize};
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Family bounds; parameters outside these are rejected at construction.
pub const MAX_RANK: u32 = 8;
pub const MAX_FACTORS: usize = 8;
pub const MAX_CYCLIC_ORDER: u32 = 64;

/// Which group to build. The generating set is determined by the family:
/// `±e_1..±e_d`, `a_i^{±1}`, `s_i^{±1}`, or `x^{±1}, y^{±1}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum GroupSpec {
    FreeAbelian { d: u32 },
    Free { r: u32 },
    FreeProductCyclic { orders: Vec<u32> },
    Heisenberg,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GroupCaps {
    /// Largest number of elements a ball enumeration may hold.
    pub ball_elems: usize,
}

impl Default for GroupCaps {
    fn default() -> Self {
        GroupCaps {
            ball_elems: 1_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("unsupported family parameter: {0}")]
    UnsupportedFamily(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("ball of radius {radius} exceeds the element cap {cap}")]
    BallTooLarge { radius: u32, cap: usize },
    #[error("BFS element budget {cap} exhausted before reaching the element")]
    RadiusBudgetExceeded { cap: usize },
    #[error("element is torsion (order {order}); a non-torsion direction is required")]
    TorsionElement { order: u64 },
    #[error("cannot parse element {input:?}: {reason}")]
    ElemParse { input: String, reason: String },
}

/// One entry of the symmetric generating list `S`.
#[derive(Clone, Debug)]
pub struct GenInfo {
    pub name: String,
    pub elem: Elem,
    /// Index of the inverse generator within `S`.
    pub inverse: usize,
}

/// An immutable group plus memoized BFS state. Cheap to share via `Arc`;
/// all operations are re-entrant and cache fills are idempotent.
pub struct GroupContext {
    spec: GroupSpec,
    gens: Vec<GenInfo>,
    /// Defining relators as generator-index words (product order, left to right).
    relators: Vec<Vec<usize>>,
    caps: GroupCaps,
    bfs: Mutex<ball::BfsCache>,
}

impl std::fmt::Debug for GroupContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupContext")
            .field("spec", &self.spec)
            .finish()
    }
}

impl GroupContext {
    pub fn new(spec: GroupSpec) -> Result<Arc<Self>, GroupError> {
        Self::with_caps(spec, GroupCaps::default())
    }

    pub fn with_caps(spec: GroupSpec, caps: GroupCaps) -> Result<Arc<Self>, GroupError> {
        validate_spec(&spec)?;
        let gens = make_generators(&spec);
        let relators = make_relators(&spec);
        Ok(Arc::new(GroupContext {
            spec,
            gens,
            relators,
            caps,
            bfs: Mutex::new(ball::BfsCache::new()),
        }))
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn caps(&self) -> GroupCaps {
        self.caps
    }

    /// The symmetric generating list `S` (an even-length list; for torsion
    /// generators such as an order-2 factor, `s` and `s^{-1}` coincide as
    /// group elements but keep separate slots).
    pub fn generators(&self) -> &[GenInfo] {
        &self.gens
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn identity(&self) -> Elem {
        elem::identity_for(&self.spec)
    }

    pub fn multiply(&self, a: &Elem, b: &Elem) -> Elem {
        elem::multiply(&self.spec, a, b)
    }

    pub fn inverse(&self, a: &Elem) -> Elem {
        elem::inverse(&self.spec, a)
    }

    pub fn power(&self, a: &Elem, k: i64) -> Elem {
        let base = if k < 0 { self.inverse(a) } else { a.clone() };
        let mut acc = self.identity();
        for _ in 0..k.unsigned_abs() {
            acc = self.multiply(&acc, &base);
        }
        acc
    }

    /// Exact word length `ℓ_S`. For Heisenberg this extends the memoized BFS
    /// table and fails with `RadiusBudgetExceeded` past the element cap.
    pub fn word_length(&self, a: &Elem) -> Result<u64, GroupError> {
        match elem::closed_form_length(&self.spec, a) {
            Some(n) => Ok(n),
            None => self.bfs_length(a),
        }
    }

    /// The defining relators as generator-index words; empty for free groups.
    pub fn relators(&self) -> &[Vec<usize>] {
        &self.relators
    }

    /// Evaluates a generator-index word to a group element (product order).
    pub fn eval_word(&self, word: &[usize]) -> Elem {
        let mut acc = self.identity();
        for &i in word {
            acc = self.multiply(&acc, &self.gens[i].elem);
        }
        acc
    }

    /// Exact torsion decision; `Some(order)` for torsion elements.
    pub fn torsion_order(&self, a: &Elem) -> Option<u64> {
        match (&self.spec, a) {
            (GroupSpec::FreeAbelian { .. }, _)
            | (GroupSpec::Free { .. }, _)
            | (GroupSpec::Heisenberg, _) => {
                if a.is_identity() {
                    Some(1)
                } else {
                    None
                }
            }
            (GroupSpec::FreeProductCyclic { orders }, _) => {
                let (_, core) = elem::cyclic_reduce(&self.spec, a);
                match &core {
                    Elem::Syllables(s) if s.is_empty() => Some(1),
                    Elem::Syllables(s) if s.len() == 1 => {
                        let n = orders[s[0].factor as usize] as u64;
                        Some(n / gcd(n, s[0].exp as u64))
                    }
                    _ => None,
                }
            }
        }
    }

    pub fn is_torsion(&self, a: &Elem) -> bool {
        self.torsion_order(a).is_some()
    }

    fn require_non_torsion(&self, a: &Elem) -> Result<(), GroupError> {
        match self.torsion_order(a) {
            Some(order) => Err(GroupError::TorsionElement { order }),
            None => Ok(()),
        }
    }

    /// Certified lower bound `L(k) ≤ ℓ_S(a^k)`, non-decreasing in `k` and
    /// unbounded. Free families use the cyclically reduced length (minimal in
    /// the conjugacy class), free abelian the ℓ1 norm, and Heisenberg either
    /// the abelianized ℓ1 norm or the square-root area bound on the center.
    pub fn power_length_lower_bound(&self, a: &Elem, k: u64) -> Result<u64, GroupError> {
        self.require_non_torsion(a)?;
        Ok(match (&self.spec, a) {
            (GroupSpec::FreeAbelian { .. }, Elem::Vector(v)) => {
                k * v.iter().map(|x| x.unsigned_abs()).sum::<u64>()
            }
            (GroupSpec::Free { .. }, _) | (GroupSpec::FreeProductCyclic { .. }, _) => {
                let (_, core) = elem::cyclic_reduce(&self.spec, a);
                k * elem::closed_form_length(&self.spec, &core).unwrap()
            }
            (GroupSpec::Heisenberg, Elem::Triple([x, y, z])) => {
                if *x != 0 || *y != 0 {
                    k * (x.unsigned_abs() + y.unsigned_abs())
                } else {
                    // a = z^c: any word reaching z^m has length ≥ 2√|m|
                    isqrt(k * z.unsigned_abs())
                }
            }
            _ => unreachable!("normal form checked by require_non_torsion"),
        })
    }

    /// Exact metric ball `B(r)` with deterministic (length, normal form)
    /// ordering. Memoized; errors out when the enumeration would exceed the
    /// configured element cap.
    pub fn ball(&self, radius: u32) -> Result<Arc<Ball>, GroupError> {
        self.ball_with_cap(radius, self.caps.ball_elems)
    }

    pub fn ball_with_cap(&self, radius: u32, cap: usize) -> Result<Arc<Ball>, GroupError> {
        let mut cache = self.bfs.lock().unwrap();
        cache.ball(self, radius, cap)
    }

    fn bfs_length(&self, a: &Elem) -> Result<u64, GroupError> {
        let mut cache = self.bfs.lock().unwrap();
        cache.distance(self, a, self.caps.ball_elems)
    }

    pub fn format_elem(&self, a: &Elem) -> String {
        elem::format_elem(&self.spec, a)
    }

    pub fn parse_elem(&self, s: &str) -> Result<Elem, GroupError> {
        elem::parse_elem(&self.spec, s)
    }
}

fn validate_spec(spec: &GroupSpec) -> Result<(), GroupError> {
    match spec {
        GroupSpec::FreeAbelian { d } => {
            if *d < 1 || *d > MAX_RANK {
                return Err(GroupError::ParameterOutOfRange(format!(
                    "free abelian rank d={d} outside 1..={MAX_RANK}"
                )));
            }
        }
        GroupSpec::Free { r } => {
            if *r < 1 || *r > MAX_RANK {
                return Err(GroupError::ParameterOutOfRange(format!(
                    "free rank r={r} outside 1..={MAX_RANK}"
                )));
            }
        }
        GroupSpec::FreeProductCyclic { orders } => {
            if orders.len() < 2 || orders.len() > MAX_FACTORS {
                return Err(GroupError::ParameterOutOfRange(format!(
                    "free product needs 2..={MAX_FACTORS} factors, got {}",
                    orders.len()
                )));
            }
            for &n in orders {
                if !(2..=MAX_CYCLIC_ORDER).contains(&n) {
                    return Err(GroupError::ParameterOutOfRange(format!(
                        "cyclic factor order {n} outside 2..={MAX_CYCLIC_ORDER}"
                    )));
                }
            }
        }
        GroupSpec::Heisenberg => {}
    }
    Ok(())
}

fn make_generators(spec: &GroupSpec) -> Vec<GenInfo> {
    let mut gens = Vec::new();
    let mut push_pair = |name: String, inv_name: String, elem: Elem, inv_elem: Elem| {
        let i = gens.len();
        gens.push(GenInfo {
            name,
            elem,
            inverse: i + 1,
        });
        gens.push(GenInfo {
            name: inv_name,
            elem: inv_elem,
            inverse: i,
        });
    };
    match spec {
        GroupSpec::FreeAbelian { d } => {
            for i in 0..*d as usize {
                let mut v = vec![0i64; *d as usize];
                v[i] = 1;
                let mut w = vec![0i64; *d as usize];
                w[i] = -1;
                push_pair(
                    format!("e{}", i + 1),
                    format!("e{}^-1", i + 1),
                    Elem::Vector(v),
                    Elem::Vector(w),
                );
            }
        }
        GroupSpec::Free { r } => {
            for i in 0..*r as u8 {
                let name = elem::free_letter_name(i).to_string();
                push_pair(
                    name.clone(),
                    format!("{name}^-1"),
                    Elem::Word(vec![Letter { gen: i, inv: false }]),
                    Elem::Word(vec![Letter { gen: i, inv: true }]),
                );
            }
        }
        GroupSpec::FreeProductCyclic { orders } => {
            for (i, &n) in orders.iter().enumerate() {
                push_pair(
                    format!("s{}", i + 1),
                    format!("s{}^-1", i + 1),
                    Elem::Syllables(vec![Syllable {
                        factor: i as u8,
                        exp: 1,
                    }]),
                    Elem::Syllables(vec![Syllable {
                        factor: i as u8,
                        exp: n - 1,
                    }]),
                );
            }
        }
        GroupSpec::Heisenberg => {
            push_pair(
                "x".into(),
                "x^-1".into(),
                Elem::Triple([1, 0, 0]),
                Elem::Triple([-1, 0, 0]),
            );
            push_pair(
                "y".into(),
                "y^-1".into(),
                Elem::Triple([0, 1, 0]),
                Elem::Triple([0, -1, 0]),
            );
        }
    }
    gens
}

/// Generator-index words for the defining relators. Indices refer to the
/// `generators()` list; each word multiplies out to the identity.
fn make_relators(spec: &GroupSpec) -> Vec<Vec<usize>> {
    match spec {
        GroupSpec::FreeAbelian { d } => {
            let d = *d as usize;
            let mut rels = Vec::new();
            for i in 0..d {
                for j in (i + 1)..d {
                    // [e_i, e_j]
                    rels.push(vec![2 * i, 2 * j, 2 * i + 1, 2 * j + 1]);
                }
            }
            rels
        }
        GroupSpec::Free { .. } => Vec::new(),
        GroupSpec::FreeProductCyclic { orders } => orders
            .iter()
            .enumerate()
            .map(|(i, &n)| vec![2 * i; n as usize])
            .collect(),
        GroupSpec::Heisenberg => {
            // x=0, x^-1=1, y=2, y^-1=3; commutator [x,y] = x y x^-1 y^-1
            let z = [0, 2, 1, 3];
            let z_inv = [2, 0, 3, 1];
            let mut r1 = vec![0]; // [x, z]
            r1.extend(z);
            r1.push(1);
            r1.extend(z_inv);
            let mut r2 = vec![2]; // [y, z]
            r2.extend(z);
            r2.push(3);
            r2.extend(z_inv);
            vec![r1, r2]
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Integer square root, rounded down.
fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    while x * x > n {
        x -= 1;
    }
    x
}
