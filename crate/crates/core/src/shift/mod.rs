//! Configurations over a group, subshift membership, homoclinic pairs,
//! cones, and the specification-witness constructions.

mod periodize;
mod witness;

pub use periodize::{periodize_zd, PeriodicConfigZd};
pub use witness::{glue_check, witness_full_shift, witness_golden_mean};

use crate::group::{Elem, GroupContext, GroupError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

pub const MAX_ALPHABET: usize = 64;

/// Finite symbol set with a designated background symbol. The background is
/// the constant value configurations take outside their finite overlay.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Alphabet {
    pub symbols: Vec<String>,
    pub background: String,
}

impl Alphabet {
    pub fn binary() -> Arc<Self> {
        Arc::new(Alphabet {
            symbols: vec!["0".into(), "1".into()],
            background: "0".into(),
        })
    }

    /// `{0, 1, ..., k}` with background `0`.
    pub fn golden(k: u8) -> Arc<Self> {
        Arc::new(Alphabet {
            symbols: (0..=k).map(|i| i.to_string()).collect(),
            background: "0".into(),
        })
    }

    pub fn validate(&self) -> Result<(), ShiftError> {
        if self.symbols.is_empty() || self.symbols.len() > MAX_ALPHABET {
            return Err(ShiftError::BadAlphabet(format!(
                "need 1..={MAX_ALPHABET} symbols, got {}",
                self.symbols.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for s in &self.symbols {
            if !seen.insert(s) {
                return Err(ShiftError::BadAlphabet(format!("duplicate symbol {s:?}")));
            }
        }
        self.index_of(&self.background).ok_or_else(|| {
            ShiftError::BadAlphabet(format!(
                "background {:?} not among the symbols",
                self.background
            ))
        })?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<u8> {
        self.symbols
            .iter()
            .position(|s| s == symbol)
            .map(|i| i as u8)
    }

    pub fn background_index(&self) -> u8 {
        self.index_of(&self.background).expect("validated alphabet")
    }
}

/// A point of `A^G` presented as a finite overlay over the constant
/// background: `x_g = overlay(g)` when present, else the background symbol.
/// Overlays never store the background value, so equality of configurations
/// is equality of the maps.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub group: Arc<GroupContext>,
    pub alphabet: Arc<Alphabet>,
    background: u8,
    overlay: BTreeMap<Elem, u8>,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.background == other.background && self.overlay == other.overlay
    }
}
impl Eq for Configuration {}

impl Configuration {
    pub fn constant(group: Arc<GroupContext>, alphabet: Arc<Alphabet>, symbol: u8) -> Self {
        Configuration {
            group,
            alphabet,
            background: symbol,
            overlay: BTreeMap::new(),
        }
    }

    pub fn background_constant(group: Arc<GroupContext>, alphabet: Arc<Alphabet>) -> Self {
        let bg = alphabet.background_index();
        Self::constant(group, alphabet, bg)
    }

    pub fn with_overlay(
        group: Arc<GroupContext>,
        alphabet: Arc<Alphabet>,
        entries: impl IntoIterator<Item = (Elem, u8)>,
    ) -> Self {
        let mut x = Self::background_constant(group, alphabet);
        for (g, v) in entries {
            x.set(g, v);
        }
        x
    }

    pub fn background(&self) -> u8 {
        self.background
    }

    pub fn value_at(&self, g: &Elem) -> u8 {
        *self.overlay.get(g).unwrap_or(&self.background)
    }

    /// Sets one site, keeping the overlay canonical (background entries are
    /// removed rather than stored).
    pub fn set(&mut self, g: Elem, v: u8) {
        if v == self.background {
            self.overlay.remove(&g);
        } else {
            self.overlay.insert(g, v);
        }
    }

    pub fn support(&self) -> impl Iterator<Item = &Elem> {
        self.overlay.keys()
    }

    pub fn overlay(&self) -> &BTreeMap<Elem, u8> {
        &self.overlay
    }

    pub fn support_radius(&self) -> Result<u64, GroupError> {
        let mut r = 0;
        for g in self.overlay.keys() {
            r = r.max(self.group.word_length(g)?);
        }
        Ok(r)
    }

    /// The left shift `(gx)_h = x_{g^{-1} h}`: overlay keys move `h ↦ g·h`.
    pub fn shifted(&self, g: &Elem) -> Configuration {
        let overlay = self
            .overlay
            .iter()
            .map(|(h, &v)| (self.group.multiply(g, h), v))
            .collect();
        Configuration {
            group: self.group.clone(),
            alphabet: self.alphabet.clone(),
            background: self.background,
            overlay,
        }
    }

    /// Exact restriction `x_F` as a total map on `F`.
    pub fn restrict(&self, sites: &[Elem]) -> Pattern {
        Pattern {
            values: sites
                .iter()
                .map(|g| (g.clone(), self.value_at(g)))
                .collect(),
        }
    }

    pub fn agrees_on(&self, other: &Configuration, sites: &[Elem]) -> bool {
        sites.iter().all(|g| self.value_at(g) == other.value_at(g))
    }
}

/// A finite pattern: a total symbol assignment on a finite site set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Pattern {
    values: BTreeMap<Elem, u8>,
}

impl Pattern {
    pub fn new(values: BTreeMap<Elem, u8>) -> Self {
        Pattern { values }
    }

    pub fn sites(&self) -> impl Iterator<Item = &Elem> {
        self.values.keys()
    }

    pub fn get(&self, g: &Elem) -> Option<u8> {
        self.values.get(g).copied()
    }

    pub fn values(&self) -> &BTreeMap<Elem, u8> {
        &self.values
    }

    /// Extends the pattern by the alphabet background into a configuration.
    pub fn extend_by_background(
        &self,
        group: Arc<GroupContext>,
        alphabet: Arc<Alphabet>,
    ) -> Configuration {
        Configuration::with_overlay(group, alphabet, self.values.clone())
    }
}

/// Two configurations differing at only finitely many sites.
#[derive(Clone, Debug)]
pub struct HomoclinicPair {
    pub x: Configuration,
    pub y: Configuration,
    /// Difference support `D = {g : x_g ≠ y_g}`.
    pub diff: Vec<Elem>,
}

impl HomoclinicPair {
    pub fn new(x: Configuration, y: Configuration) -> Result<Self, ShiftError> {
        if x.background != y.background {
            return Err(ShiftError::BackgroundMismatch);
        }
        let mut diff = BTreeSet::new();
        for g in x.overlay.keys().chain(y.overlay.keys()) {
            if x.value_at(g) != y.value_at(g) {
                diff.insert(g.clone());
            }
        }
        Ok(HomoclinicPair {
            x,
            y,
            diff: diff.into_iter().collect(),
        })
    }
}

/// Which subshift of `A^G` to work in.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ShiftKind {
    /// All of `A^G`.
    Full,
    /// Finite type: `x ∈ X` iff every translate pattern `(gx)_F` is allowed.
    Sft {
        window: Vec<Elem>,
        allowed: BTreeSet<Vec<u8>>,
    },
    /// Generalized golden mean: every translate of each window contains a 0.
    GoldenMean { windows: Vec<Vec<Elem>> },
}

#[derive(Clone, Debug)]
pub struct Subshift {
    pub group: Arc<GroupContext>,
    pub alphabet: Arc<Alphabet>,
    pub kind: ShiftKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShiftError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("bad alphabet: {0}")]
    BadAlphabet(String),
    #[error("bad subshift: {0}")]
    BadSubshift(String),
    #[error("the all-background configuration violates the subshift constraint")]
    BackgroundNotAdmissible,
    #[error("configurations have different backgrounds")]
    BackgroundMismatch,
    #[error("inputs must agree on B({0}) but differ at {1}")]
    AgreementBallViolated(u32, String),
    #[error("configuration is not in the subshift")]
    NotInSubshift,
    #[error("constructed witness fell outside the subshift at {0} (internal invariant)")]
    WitnessNotInSubshift(String),
    #[error("pattern does not extend to a member of the subshift")]
    PatternNotAdmissible,
    #[error("supports too close: need ℓ(g) > {min} but ℓ(g) = {got}")]
    TooClose { min: u64, got: u64 },
    #[error("period {period} too small: cosets of {a} and {b} collide")]
    PeriodTooSmall { period: u32, a: String, b: String },
    #[error("operation requires a free abelian group")]
    NotFreeAbelian,
    #[error("subshift kind has no witness constructor")]
    NoWitnessConstructor,
}

impl Subshift {
    pub fn full(
        group: Arc<GroupContext>,
        alphabet: Arc<Alphabet>,
    ) -> Result<Arc<Self>, ShiftError> {
        Self::new(group, alphabet, ShiftKind::Full)
    }

    pub fn golden_mean(
        group: Arc<GroupContext>,
        alphabet: Arc<Alphabet>,
        windows: Vec<Vec<Elem>>,
    ) -> Result<Arc<Self>, ShiftError> {
        Self::new(group, alphabet, ShiftKind::GoldenMean { windows })
    }

    pub fn new(
        group: Arc<GroupContext>,
        alphabet: Arc<Alphabet>,
        kind: ShiftKind,
    ) -> Result<Arc<Self>, ShiftError> {
        alphabet.validate()?;
        match &kind {
            ShiftKind::Full => {}
            ShiftKind::Sft { window, allowed } => {
                if window.is_empty() || !window.contains(&group.identity()) {
                    return Err(ShiftError::BadSubshift(
                        "SFT window must be finite and contain the identity".into(),
                    ));
                }
                if allowed.iter().any(|p| p.len() != window.len()) {
                    return Err(ShiftError::BadSubshift(
                        "allowed patterns must match the window size".into(),
                    ));
                }
            }
            ShiftKind::GoldenMean { windows } => {
                if windows.is_empty() || windows.iter().any(|w| w.is_empty()) {
                    return Err(ShiftError::BadSubshift(
                        "golden mean needs nonempty windows".into(),
                    ));
                }
                if alphabet.index_of("0").is_none() {
                    return Err(ShiftError::BadAlphabet(
                        "golden mean shifts require the symbol \"0\"".into(),
                    ));
                }
            }
        }
        let shift = Arc::new(Subshift {
            group,
            alphabet,
            kind,
        });
        shift.check_background_admissible()?;
        Ok(shift)
    }

    pub fn background_configuration(&self) -> Configuration {
        Configuration::background_constant(self.group.clone(), self.alphabet.clone())
    }

    /// Membership is decidable by inspecting finitely many translates only
    /// because the all-background point is itself required to satisfy the
    /// constraint; windows missing the overlay then pass automatically.
    fn check_background_admissible(&self) -> Result<(), ShiftError> {
        let bg = self.alphabet.background_index();
        match &self.kind {
            ShiftKind::Full => Ok(()),
            ShiftKind::Sft { window, allowed } => {
                let const_pat = vec![bg; window.len()];
                if allowed.contains(&const_pat) {
                    Ok(())
                } else {
                    Err(ShiftError::BackgroundNotAdmissible)
                }
            }
            ShiftKind::GoldenMean { .. } => {
                let zero = self.alphabet.index_of("0").expect("validated");
                if bg == zero {
                    Ok(())
                } else {
                    Err(ShiftError::BackgroundNotAdmissible)
                }
            }
        }
    }

    /// Exact membership for finite-overlay configurations. Translates whose
    /// window misses the overlay all see the constant background pattern, so
    /// that pattern is checked once and only overlay-meeting translates are
    /// enumerated.
    pub fn contains(&self, x: &Configuration) -> bool {
        match &self.kind {
            ShiftKind::Full => true,
            ShiftKind::Sft { window, allowed } => {
                let constant = vec![x.background(); window.len()];
                if !allowed.contains(&constant) {
                    return false;
                }
                self.check_positions(x, window).all(|g| {
                    let pat: Vec<u8> = window
                        .iter()
                        .map(|f| x.value_at(&self.group.multiply(&g, f)))
                        .collect();
                    allowed.contains(&pat)
                })
            }
            ShiftKind::GoldenMean { windows } => {
                let zero = self.alphabet.index_of("0").expect("validated");
                if x.background() != zero {
                    return false;
                }
                windows.iter().all(|w| {
                    self.check_positions(x, w).all(|g| {
                        w.iter()
                            .any(|f| x.value_at(&self.group.multiply(&g, f)) == zero)
                    })
                })
            }
        }
    }

    /// `{g : gF ∩ supp(x) ≠ ∅} = supp(x)·F^{-1}`, deduplicated.
    fn check_positions<'a>(
        &'a self,
        x: &'a Configuration,
        window: &'a [Elem],
    ) -> impl Iterator<Item = Elem> + 'a {
        let mut seen = BTreeSet::new();
        x.overlay
            .keys()
            .flat_map(move |d| {
                window
                    .iter()
                    .map(move |f| self.group.multiply(d, &self.group.inverse(f)))
            })
            .filter(move |g| seen.insert(g.clone()))
    }

    /// Smallest radius containing every constraint window; 0 for full shifts.
    pub fn window_radius(&self) -> Result<u32, ShiftError> {
        let mut r = 0u64;
        let sites: Vec<&Elem> = match &self.kind {
            ShiftKind::Full => Vec::new(),
            ShiftKind::Sft { window, .. } => window.iter().collect(),
            ShiftKind::GoldenMean { windows } => windows.iter().flatten().collect(),
        };
        for g in sites {
            r = r.max(self.group.word_length(g)?);
        }
        Ok(r as u32)
    }
}

/// Decides `g ∈ {a^k : k ≥ 0}·B(r)` (`sign = +`) or with `k ≤ 0`
/// (`sign = -`) exactly: test increasing powers until the certified length
/// bound rules out all further ones.
pub fn in_cone(
    group: &GroupContext,
    a: &Elem,
    r: u32,
    positive: bool,
    g: &Elem,
) -> Result<bool, ShiftError> {
    let dir = if positive {
        a.clone()
    } else {
        group.inverse(a)
    };
    // bound check also rejects torsion directions
    group.power_length_lower_bound(a, 1)?;
    // the per-step test `a^{-k}g ∈ B(r)` is set membership in the small
    // ball, not an exact length query of a possibly distant point
    let ball: BTreeSet<Elem> = group.ball(r)?.elems().cloned().collect();
    let threshold = group.word_length(g)? + r as u64;
    let mut point = g.clone();
    let dir_inv = group.inverse(&dir);
    let mut k = 0u64;
    loop {
        if ball.contains(&point) {
            return Ok(true);
        }
        k += 1;
        if group.power_length_lower_bound(a, k)? > threshold {
            return Ok(false);
        }
        // point = a^{-k} g (resp. a^{k} g)
        point = group.multiply(&dir_inv, &point);
    }
}

/// All cone members `a^k·B(r)` (k ≥ 0 for `+`) of word length at most
/// `max_len`, enumerated exhaustively with certified termination.
pub fn cone_elements(
    group: &GroupContext,
    a: &Elem,
    r: u32,
    positive: bool,
    max_len: u64,
) -> Result<BTreeSet<Elem>, ShiftError> {
    let dir = if positive {
        a.clone()
    } else {
        group.inverse(a)
    };
    group.power_length_lower_bound(a, 1)?;
    let ball = group.ball(r)?;
    let mut out = BTreeSet::new();
    let mut power = group.identity();
    let mut k = 0u64;
    loop {
        for b in ball.elems() {
            let e = group.multiply(&power, b);
            if group.word_length(&e)? <= max_len {
                out.insert(e);
            }
        }
        k += 1;
        if group.power_length_lower_bound(a, k)? > max_len + r as u64 {
            return Ok(out);
        }
        power = group.multiply(&power, &dir);
    }
}

/// The specification constant `N(a, r) = Σ_{i=0}^{M} ℓ_S(a^i) + r` with
/// `M = max{n ≥ 0 : a^n ∈ B(2r)}`, so that the forward and backward cones
/// of radius `r` intersect inside `B(N)`.
pub fn specification_n(group: &GroupContext, a: &Elem, r: u32) -> Result<u32, ShiftError> {
    group.power_length_lower_bound(a, 1)?;
    let two_r = 2 * r as u64;
    let mut m = 0u64;
    let mut n = 1u64;
    while group.power_length_lower_bound(a, n)? <= two_r {
        if group.word_length(&group.power(a, n as i64))? <= two_r {
            m = n;
        }
        n += 1;
    }
    let mut total = r as u64;
    for i in 0..=m {
        total += group.word_length(&group.power(a, i as i64))?;
    }
    Ok(total as u32)
}

/// Index of a pattern over `sites` (sorted order) in the mixed-radix
/// enumeration with `|A|` digits; inverse of `pattern_from_index`.
pub fn pattern_from_index(alphabet_size: usize, sites: &[Elem], mut idx: usize) -> Pattern {
    let mut values = BTreeMap::new();
    for g in sites {
        values.insert(g.clone(), (idx % alphabet_size) as u8);
        idx /= alphabet_size;
    }
    Pattern::new(values)
}

pub fn pattern_count(alphabet_size: usize, num_sites: usize) -> Option<usize> {
    alphabet_size.checked_pow(num_sites.try_into().ok()?)
}
