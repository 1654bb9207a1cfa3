//! Locally constant cocycles, their limit cocycles along non-torsion
//! directions, obstruction certificates, and the untwisting pipeline.

mod build;
mod direction;
mod limits;
mod untwist;

pub use build::{
    coboundary_cocycle, complete_homomorphism, example_cocycle_free, example_cocycle_z,
    make_local_cocycle, make_local_cocycle_full,
};
pub use limits::{
    cross_direction_test, fixed_point_obstruction, limit_cocycle_minus, limit_cocycle_plus,
    path_transport, plus_minus_test, ObstructionCertificate, TestOutcome,
};
pub use untwist::{
    extract_homomorphism, non_torsion_directions, random_member, transfer_map, transfer_value,
    untwist, untwist_radius, verify_untwist, verify_untwist_table, ExtractOutcome, Homomorphism,
    ResidualFailure, ResidualReport, TransferReport, TransferTable, UntwistConfig, Verdict,
};

use crate::coeff::{CoeffError, CoeffGroup, HElem};
use crate::group::{Elem, GroupContext, GroupError};
use crate::shift::{Configuration, ShiftError, Subshift};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

/// Caps for the exhaustive parts of validation and table building.
#[derive(Clone, Copy, Debug)]
pub struct CocycleCaps {
    /// Largest `|A|^|window|` enumerated exhaustively.
    pub exhaustive_patterns: usize,
    /// Random samples used when a check falls back to sampling.
    pub sampled_patterns: usize,
    /// Sampling seed, recorded in certificates.
    pub seed: u64,
}

impl Default for CocycleCaps {
    fn default() -> Self {
        CocycleCaps {
            exhaustive_patterns: 1 << 20,
            sampled_patterns: 512,
            seed: 0,
        }
    }
}

/// How thoroughly construction-time validity was checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Exhaustive,
    /// Pattern space exceeded the cap; checked on a small exhaustive core
    /// plus seeded random samples.
    Sampled {
        samples: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug)]
pub struct ValidationCertificate {
    pub relator_mode: ValidationMode,
    pub inverse_mode: ValidationMode,
    pub relators_checked: usize,
}

/// The rule for one generator: a total function from patterns on its
/// window to the target group, stored densely in site-major mixed radix.
#[derive(Clone, Debug)]
pub struct GenRule {
    /// Sorted sites the rule reads.
    pub window: Vec<Elem>,
    /// `|A|^|window|` values.
    pub table: Vec<HElem>,
}

impl GenRule {
    pub fn value(&self, alphabet_size: usize, x: &Configuration) -> HElem {
        let mut idx = 0usize;
        for g in self.window.iter().rev() {
            idx = idx * alphabet_size + x.value_at(g) as usize;
        }
        self.table[idx].clone()
    }
}

/// A validated locally constant cocycle: one rule per generator, linked by
/// the inverse law and compatible with every defining relator (up to the
/// recorded validation mode).
#[derive(Clone, Debug)]
pub struct LocalCocycle {
    pub group: Arc<GroupContext>,
    pub shift: Arc<Subshift>,
    pub target: Arc<CoeffGroup>,
    /// Union of all rule windows; contains the identity.
    pub window: Vec<Elem>,
    rules: Vec<GenRule>,
    pub certificate: ValidationCertificate,
    pub caps: CocycleCaps,
}

#[derive(Debug, Error)]
pub enum CocycleError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("window must contain the identity")]
    WindowMissingIdentity,
    #[error("rules missing for generator {0} and its inverse")]
    RuleMissing(String),
    #[error("rule table for {gen} has {got} entries, expected {expected}")]
    RuleSize {
        gen: String,
        got: usize,
        expected: usize,
    },
    #[error("relator {relator} violated on a window pattern: evaluates to {value}")]
    RelatorViolation { relator: String, value: String },
    #[error("rules for {gen} and its inverse are not linked by the inverse law")]
    InverseInconsistency { gen: String },
    #[error("pattern space of size {size} exceeds the cap {cap} in strict mode")]
    CapExceeded { size: usize, cap: usize },
    #[error("homomorphism does not respect relator {0}")]
    HomomorphismInvalid(String),
    #[error("path enters the forbidden ball at step {step} ({point})")]
    SeparationViolated { step: usize, point: String },
    #[error("pattern enumeration of size {size} exceeds the cap {cap}")]
    PatternEnumerationTooLarge { size: usize, cap: usize },
    #[error("transfer table radius {radius} cannot evaluate overlay site {site}")]
    RadiusInsufficient { radius: u32, site: String },
    #[error("subshift kind has no witness constructor for the untwist radius")]
    NoWitnessConstructor,
}

impl LocalCocycle {
    pub fn rules(&self) -> &[GenRule] {
        &self.rules
    }

    pub fn rule(&self, gen_idx: usize) -> &GenRule {
        &self.rules[gen_idx]
    }

    /// `c(s, x)` for a single generator index.
    pub fn gen_value(&self, gen_idx: usize, x: &Configuration) -> HElem {
        self.rules[gen_idx].value(self.shift.alphabet.len(), x)
    }

    /// `c(g, x)` via the canonical normal-form spelling of `g`; independent
    /// of the spelling by relator validity.
    pub fn evaluate(&self, g: &Elem, x: &Configuration) -> HElem {
        let word = self.spelling(g);
        self.evaluate_word(&word, x)
    }

    /// Evaluates the cocycle along an explicit generator word (product
    /// order, leftmost letter outermost): `c(w_0, w_1⋯w_{n-1}·x) ⋯ c(w_{n-1}, x)`.
    /// Factor `i` reads `x` at the translated window `q_i^{-1}·W` directly,
    /// so no shifted configurations are materialized.
    pub fn evaluate_word(&self, word: &[usize], x: &Configuration) -> HElem {
        let a = self.shift.alphabet.len();
        let constant = x.overlay().is_empty();
        let bg = x.background() as usize;
        let mut acc = self.target.identity();
        let mut suffix = self.group.identity();
        for &gi in word.iter().rev() {
            let rule = &self.rules[gi];
            let idx = if constant {
                // every window site reads the background symbol
                (0..rule.window.len()).fold(0usize, |acc, _| acc * a + bg)
            } else {
                let suffix_inv = self.group.inverse(&suffix);
                rule.window.iter().rev().fold(0usize, |acc, w| {
                    let site = self.group.multiply(&suffix_inv, w);
                    acc * a + x.value_at(&site) as usize
                })
            };
            acc = self.target.multiply(&rule.table[idx], &acc);
            suffix = self
                .group
                .multiply(&self.group.generators()[gi].elem, &suffix);
        }
        acc
    }

    /// Canonical generator-index spelling of `g` derived from its normal
    /// form (product order, left to right).
    pub fn spelling(&self, g: &Elem) -> Vec<usize> {
        spelling_of(&self.group, g)
    }

    /// Sites the map `x ↦ c(g, x)` can read: the union of the translated
    /// rule windows along the spelling of `g`.
    pub fn dependence_window(&self, g: &Elem) -> Vec<Elem> {
        let word = self.spelling(g);
        self.word_dependence_window(&word)
    }

    pub fn word_dependence_window(&self, word: &[usize]) -> Vec<Elem> {
        let mut out = std::collections::BTreeSet::new();
        let mut suffix = self.group.identity();
        for &gi in word.iter().rev() {
            let suffix_inv = self.group.inverse(&suffix);
            for w in &self.rules[gi].window {
                out.insert(self.group.multiply(&suffix_inv, w));
            }
            suffix = self
                .group
                .multiply(&self.group.generators()[gi].elem, &suffix);
        }
        if word.is_empty() {
            out.insert(self.group.identity());
        }
        out.into_iter().collect()
    }
}

/// Normal-form spelling of `g` as generator indices in product order.
/// Geodesic for the abelian, free, and free-product families; Heisenberg
/// spells `x^a y^b [x,y]^c`, which is canonical but not geodesic.
pub fn spelling_of(group: &GroupContext, g: &Elem) -> Vec<usize> {
    use crate::group::GroupSpec;
    let mut word = Vec::new();
    match (group.spec(), g) {
        (GroupSpec::FreeAbelian { .. }, Elem::Vector(v)) => {
            for (i, &c) in v.iter().enumerate() {
                let gi = if c >= 0 { 2 * i } else { 2 * i + 1 };
                for _ in 0..c.unsigned_abs() {
                    word.push(gi);
                }
            }
        }
        (GroupSpec::Free { .. }, Elem::Word(w)) => {
            for l in w {
                word.push(2 * l.gen as usize + usize::from(l.inv));
            }
        }
        (GroupSpec::FreeProductCyclic { orders }, Elem::Syllables(s)) => {
            for t in s {
                let n = orders[t.factor as usize];
                let (gi, reps) = if t.exp <= n / 2 {
                    (2 * t.factor as usize, t.exp)
                } else {
                    (2 * t.factor as usize + 1, n - t.exp)
                };
                for _ in 0..reps {
                    word.push(gi);
                }
            }
        }
        (GroupSpec::Heisenberg, Elem::Triple([a, b, c])) => {
            let x_pos = 0;
            let x_neg = 1;
            let y_pos = 2;
            let y_neg = 3;
            for _ in 0..a.unsigned_abs() {
                word.push(if *a >= 0 { x_pos } else { x_neg });
            }
            for _ in 0..b.unsigned_abs() {
                word.push(if *b >= 0 { y_pos } else { y_neg });
            }
            for _ in 0..c.unsigned_abs() {
                if *c >= 0 {
                    word.extend([x_pos, y_pos, x_neg, y_neg]);
                } else {
                    word.extend([y_pos, x_pos, y_neg, x_neg]);
                }
            }
        }
        _ => panic!("element does not belong to this group family"),
    }
    word
}

/// Pattern index over `sites` (sorted) in site-major mixed radix, shared
/// by the dense rule tables and the transfer table.
pub fn config_pattern_index(alphabet_size: usize, sites: &[Elem], x: &Configuration) -> usize {
    let mut idx = 0usize;
    for g in sites.iter().rev() {
        idx = idx * alphabet_size + x.value_at(g) as usize;
    }
    idx
}

/// Digits of `idx` as a site-indexed value map over `sites`.
pub fn index_to_values(alphabet_size: usize, sites: &[Elem], mut idx: usize) -> BTreeMap<Elem, u8> {
    let mut out = BTreeMap::new();
    for g in sites {
        out.insert(g.clone(), (idx % alphabet_size) as u8);
        idx /= alphabet_size;
    }
    out
}
