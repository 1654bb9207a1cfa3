//! The untwisting pipeline: decide whether a cocycle is cohomologous to a
//! homomorphism, and if so produce the transfer map and the homomorphism
//! with exact residuals.
//!
//! The transfer values are the forward limits `b(x) = c^{(g),+}(x, x̄)`
//! against the background basepoint. With this orientation the map
//! `x ↦ b(sx)^{-1} c(s, x) b(x)` is constant when the cocycle untwists, and
//! the verified equation is `c(g, x) = b(gx)·φ(g)·b(x)^{-1}`; the transfer
//! map in the `c = b(gx)^{-1}φ(g)b(x)` convention is the pointwise inverse
//! of the stored one (for Z/2 targets the two coincide).

use super::direction::DirectionEvaluator;
use super::limits::{
    fixed_point_obstruction, limit_cocycle_plus, ObstructionCertificate, TestOutcome,
};
use super::{index_to_values, spelling_of, CocycleError, LocalCocycle};
use crate::coeff::HElem;
use crate::group::Elem;
use crate::shift::{specification_n, Configuration, HomoclinicPair, ShiftKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct UntwistConfig {
    /// Radius of the pattern battery tested against the basepoint.
    pub battery_ball_radius: u32,
    /// The battery radius shrinks until the pattern count fits this cap.
    pub battery_pattern_cap: usize,
    /// Extra random homoclinic pairs in the battery.
    pub random_pairs: usize,
    /// Support radius for the random pairs.
    pub random_support_radius: u32,
    /// Cylinder radius of the reported transfer table; defaults to the
    /// cocycle window radius.
    pub table_radius: Option<u32>,
    /// Hard cap on the table enumeration.
    pub table_pattern_cap: usize,
    /// Number of (element, configuration) residual checks.
    pub verify_checks: usize,
    /// Elements for residual checks range over this ball.
    pub verify_element_radius: u32,
    /// Support radius of the residual-check configurations.
    pub verify_support_radius: u32,
    pub seed: u64,
}

impl Default for UntwistConfig {
    fn default() -> Self {
        UntwistConfig {
            battery_ball_radius: 2,
            battery_pattern_cap: 8192,
            random_pairs: 1000,
            random_support_radius: 5,
            table_radius: None,
            table_pattern_cap: 1 << 20,
            verify_checks: 500,
            verify_element_radius: 3,
            verify_support_radius: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Untwisted,
    ObstructionFound,
    Inconclusive,
}

/// The transfer map restricted to cylinder patterns on `B(radius)`:
/// for each admissible pattern `p`, the limit `c^{(g),+}(x_p, x̄)` of its
/// background extension.
#[derive(Clone, Debug)]
pub struct TransferTable {
    pub direction: Elem,
    pub radius: u32,
    /// Sorted sites of `B(radius)`.
    pub sites: Vec<Elem>,
    /// Admissible patterns (as digit vectors over `sites`) to values.
    pub entries: BTreeMap<Vec<u8>, HElem>,
}

impl TransferTable {
    /// Exact lookup for configurations supported inside the table ball.
    pub fn lookup(&self, cocycle: &LocalCocycle, x: &Configuration) -> Result<HElem, CocycleError> {
        for site in x.support() {
            if cocycle.group.word_length(site)? > self.radius as u64 {
                return Err(CocycleError::RadiusInsufficient {
                    radius: self.radius,
                    site: cocycle.group.format_elem(site),
                });
            }
        }
        let digits: Vec<u8> = self.sites.iter().map(|s| x.value_at(s)).collect();
        self.entries
            .get(&digits)
            .cloned()
            .ok_or(CocycleError::RadiusInsufficient {
                radius: self.radius,
                site: "pattern not admissible".into(),
            })
    }
}

/// A homomorphism `G → H` given on the generating list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    pub gen_values: Vec<HElem>,
}

impl Homomorphism {
    pub fn value(&self, cocycle: &LocalCocycle, g: &Elem) -> HElem {
        let word = spelling_of(&cocycle.group, g);
        word.iter().fold(cocycle.target.identity(), |acc, &gi| {
            cocycle.target.multiply(&acc, &self.gen_values[gi])
        })
    }
}

#[derive(Clone, Debug)]
pub enum ExtractOutcome {
    Constant(Homomorphism),
    /// Two samples with different `b(sx)^{-1} c(s,x) b(x)` values.
    NonConstant {
        gen: String,
        x1: Configuration,
        x2: Configuration,
        v1: HElem,
        v2: HElem,
    },
    /// Per-generator constants that fail a relator.
    InvalidHomomorphism(String),
}

#[derive(Clone, Debug)]
pub struct ResidualFailure {
    pub g: Elem,
    pub x: Configuration,
    pub lhs: HElem,
    pub rhs: HElem,
}

#[derive(Clone, Debug, Default)]
pub struct ResidualReport {
    pub total: usize,
    pub failures: Vec<ResidualFailure>,
}

#[derive(Debug)]
pub struct TransferReport {
    pub verdict: Verdict,
    pub direction: Option<Elem>,
    pub second_direction: Option<Elem>,
    pub certificates: Vec<ObstructionCertificate>,
    pub table: Option<TransferTable>,
    /// Disagreements between table lookups and exact on-demand limits over
    /// the residual-check configurations that fit inside the table ball;
    /// nonzero means the true transfer is not a cylinder function at the
    /// table radius, so the table is a truncation.
    pub table_coherence_failures: usize,
    pub homomorphism: Option<Homomorphism>,
    pub extract_failure: Option<String>,
    pub residuals: ResidualReport,
    /// Agreement radius from the specification constants: pairs agreeing on
    /// this ball have vanishing plus-limit once the tests pass. Absent for
    /// subshift kinds without a witness constructor.
    pub untwist_radius: Option<u32>,
    pub battery_size: usize,
    pub seed: u64,
    pub notes: Vec<String>,
}

/// On-demand transfer value `b(x) = c^{(g),+}(x, x̄)`, exact on the
/// homoclinic class of the basepoint.
pub fn transfer_value(
    cocycle: &LocalCocycle,
    direction: &Elem,
    x: &Configuration,
    basepoint: &Configuration,
) -> Result<HElem, CocycleError> {
    let pair = HomoclinicPair::new(x.clone(), basepoint.clone())?;
    limit_cocycle_plus(cocycle, direction, &pair)
}

/// The untwist radius `N(g, r0)`: pairs agreeing on `B(N)` admit a
/// specification witness at the cocycle's window radius, which is what
/// makes the plus-limit vanish near the diagonal once the plus/minus test
/// passes.
pub fn untwist_radius(cocycle: &LocalCocycle, g: &Elem) -> Result<u32, CocycleError> {
    let group = &cocycle.group;
    let mut w_rad = 0u64;
    for w in &cocycle.window {
        w_rad = w_rad.max(group.word_length(w)?);
    }
    match &cocycle.shift.kind {
        ShiftKind::Full => Ok(specification_n(group, g, w_rad as u32)?),
        ShiftKind::GoldenMean { .. } => {
            let r0f = cocycle.shift.window_radius()?;
            let r = (w_rad as u32).max(r0f);
            Ok(specification_n(group, g, r + r0f)? + r0f)
        }
        ShiftKind::Sft { .. } => Err(CocycleError::NoWitnessConstructor),
    }
}

/// Builds the cylinder transfer table at the given radius by evaluating the
/// limit on every admissible pattern; patterns enumerate in parallel and
/// merge in index order.
pub fn transfer_map(
    cocycle: &LocalCocycle,
    direction: &Elem,
    basepoint: &Configuration,
    radius: u32,
    cap: usize,
) -> Result<TransferTable, CocycleError> {
    let group = &cocycle.group;
    let a = cocycle.shift.alphabet.len();
    let sorted_sites: Vec<Elem> = {
        let mut s: Vec<Elem> = group.ball(radius)?.elems().cloned().collect();
        s.sort();
        s
    };
    let size = a
        .checked_pow(sorted_sites.len() as u32)
        .filter(|&s| s <= cap)
        .ok_or(CocycleError::PatternEnumerationTooLarge {
            size: usize::MAX,
            cap,
        })?;
    let eval = DirectionEvaluator::new(cocycle, direction, radius as u64)?;

    let rows = crate::par::map_indexed(size, |idx| {
        let values = index_to_values(a, &sorted_sites, idx);
        let x = Configuration::with_overlay(
            group.clone(),
            cocycle.shift.alphabet.clone(),
            values.clone(),
        );
        if !cocycle.shift.contains(&x) {
            return Ok(None);
        }
        let digits: Vec<u8> = sorted_sites
            .iter()
            .map(|s| *values.get(s).unwrap())
            .collect();
        let pair = HomoclinicPair::new(x, basepoint.clone())?;
        let v = eval.limit_plus(&pair)?;
        Ok::<_, CocycleError>(Some((digits, v)))
    });
    let mut entries = BTreeMap::new();
    for row in rows {
        if let Some((digits, v)) = row? {
            entries.insert(digits, v);
        }
    }
    Ok(TransferTable {
        direction: direction.clone(),
        radius,
        sites: sorted_sites,
        entries,
    })
}

/// For each generator, computes `b(sx)^{-1} c(s, x) b(x)` over the samples
/// through the table; constant values that respect the relators form the
/// homomorphism.
pub fn extract_homomorphism(
    cocycle: &LocalCocycle,
    table: &TransferTable,
    samples: &[Configuration],
) -> Result<ExtractOutcome, CocycleError> {
    let group = &cocycle.group;
    let target = &cocycle.target;
    let mut gen_values = Vec::with_capacity(group.generators().len());
    for (gi, gen) in group.generators().iter().enumerate() {
        let mut common: Option<(HElem, &Configuration)> = None;
        for x in samples {
            if !cocycle.shift.contains(x) {
                continue;
            }
            let shifted = x.shifted(&gen.elem);
            let b_x = table.lookup(cocycle, x)?;
            let b_sx = table.lookup(cocycle, &shifted)?;
            let l = target.multiply(
                &target.multiply(&target.inverse(&b_sx), &cocycle.gen_value(gi, x)),
                &b_x,
            );
            match &common {
                None => common = Some((l, x)),
                Some((first, witness)) if *first != l => {
                    return Ok(ExtractOutcome::NonConstant {
                        gen: gen.name.clone(),
                        x1: (*witness).clone(),
                        x2: x.clone(),
                        v1: first.clone(),
                        v2: l,
                    });
                }
                Some(_) => {}
            }
        }
        match common {
            Some((l, _)) => gen_values.push(l),
            None => return Ok(ExtractOutcome::InvalidHomomorphism("no samples".into())),
        }
    }
    // relator and inverse-pair consistency
    let phi_map: BTreeMap<usize, HElem> = gen_values.iter().cloned().enumerate().collect();
    match super::build::complete_homomorphism(group, target, &phi_map) {
        Ok(full) => Ok(ExtractOutcome::Constant(Homomorphism { gen_values: full })),
        Err(CocycleError::HomomorphismInvalid(msg)) => Ok(ExtractOutcome::InvalidHomomorphism(msg)),
        Err(other) => Err(other),
    }
}

/// Exact residual check of `c(g, x) = b(gx)·φ(g)·b(x)^{-1}` over the
/// battery, with `b` evaluated on demand (no radius truncation).
pub fn verify_untwist(
    cocycle: &LocalCocycle,
    direction: &Elem,
    basepoint: &Configuration,
    phi: &Homomorphism,
    battery: &[(Elem, Configuration)],
) -> Result<ResidualReport, CocycleError> {
    let target = &cocycle.target;
    let mut reach = 0u64;
    for (g, x) in battery {
        reach = reach.max(x.support_radius()? + cocycle.group.word_length(g)?);
    }
    let eval = DirectionEvaluator::new(cocycle, direction, reach)?;
    let rows = crate::par::map_slice(battery, |(g, x)| {
        let lhs = cocycle.evaluate(g, x);
        let b_x = eval.limit_plus(&HomoclinicPair::new(x.clone(), basepoint.clone())?)?;
        let b_gx = eval.limit_plus(&HomoclinicPair::new(x.shifted(g), basepoint.clone())?)?;
        let rhs = target.multiply(
            &target.multiply(&b_gx, &phi.value(cocycle, g)),
            &target.inverse(&b_x),
        );
        Ok::<_, CocycleError>((lhs, rhs))
    });
    let mut report = ResidualReport {
        total: battery.len(),
        failures: Vec::new(),
    };
    for ((g, x), row) in battery.iter().zip(rows) {
        let (lhs, rhs) = row?;
        if lhs != rhs {
            report.failures.push(ResidualFailure {
                g: g.clone(),
                x: x.clone(),
                lhs,
                rhs,
            });
        }
    }
    Ok(report)
}

/// Residual check with `b` read strictly from the cylinder table; errors
/// with `RadiusInsufficient` when a battery configuration (or its shift)
/// escapes the table ball. Exact when the true transfer is a cylinder
/// function of the table's radius; `verify_untwist` is the on-demand
/// variant with no radius limit.
pub fn verify_untwist_table(
    cocycle: &LocalCocycle,
    table: &TransferTable,
    phi: &Homomorphism,
    battery: &[(Elem, Configuration)],
) -> Result<ResidualReport, CocycleError> {
    let target = &cocycle.target;
    let mut report = ResidualReport {
        total: battery.len(),
        failures: Vec::new(),
    };
    for (g, x) in battery {
        let lhs = cocycle.evaluate(g, x);
        let b_x = table.lookup(cocycle, x)?;
        let b_gx = table.lookup(cocycle, &x.shifted(g))?;
        let rhs = target.multiply(
            &target.multiply(&b_gx, &phi.value(cocycle, g)),
            &target.inverse(&b_x),
        );
        if lhs != rhs {
            report.failures.push(ResidualFailure {
                g: g.clone(),
                x: x.clone(),
                lhs,
                rhs,
            });
        }
    }
    Ok(report)
}

/// Admissible background-extended patterns on the largest ball whose
/// pattern count fits the cap.
fn pattern_battery(
    cocycle: &LocalCocycle,
    mut radius: u32,
    cap: usize,
) -> Result<Vec<Configuration>, CocycleError> {
    let group = &cocycle.group;
    let a = cocycle.shift.alphabet.len();
    let sites: Vec<Elem> = loop {
        let ball = group.ball(radius)?;
        match a.checked_pow(ball.len() as u32) {
            Some(size) if size <= cap => {
                let mut s: Vec<Elem> = ball.elems().cloned().collect();
                s.sort();
                break s;
            }
            _ if radius == 0 => break vec![group.identity()],
            _ => radius -= 1,
        }
    };
    let size = a.pow(sites.len() as u32);
    let mut out = Vec::new();
    for idx in 0..size {
        let x = Configuration::with_overlay(
            group.clone(),
            cocycle.shift.alphabet.clone(),
            index_to_values(a, &sites, idx),
        );
        if cocycle.shift.contains(&x) {
            out.push(x);
        }
    }
    Ok(out)
}

/// A random member of the subshift supported in `B(radius)`: sites are
/// visited in random order and flipped to a random non-background symbol
/// when membership survives.
pub fn random_member(
    cocycle: &LocalCocycle,
    rng: &mut ChaCha8Rng,
    radius: u32,
    density: f64,
) -> Result<Configuration, CocycleError> {
    let group = &cocycle.group;
    let alphabet = &cocycle.shift.alphabet;
    let a = alphabet.len();
    let bg = x_background(cocycle);
    let mut x = cocycle.shift.background_configuration();
    let ball = group.ball(radius)?;
    let mut sites: Vec<Elem> = ball.elems().cloned().collect();
    // deterministic shuffle from the seeded generator
    for i in (1..sites.len()).rev() {
        let j = rng.random_range(0..=i);
        sites.swap(i, j);
    }
    for site in sites {
        if rng.random_range(0.0..1.0) >= density {
            continue;
        }
        let sym = rng.random_range(0..a) as u8;
        if sym == bg {
            continue;
        }
        let mut candidate = x.clone();
        candidate.set(site, sym);
        if cocycle.shift.contains(&candidate) {
            x = candidate;
        }
    }
    Ok(x)
}

fn x_background(cocycle: &LocalCocycle) -> u8 {
    cocycle.shift.alphabet.background_index()
}

/// Non-torsion elements of `B(radius)` in deterministic order.
pub fn non_torsion_directions(
    cocycle: &LocalCocycle,
    radius: u32,
) -> Result<Vec<Elem>, CocycleError> {
    let group = &cocycle.group;
    let ball = group.ball(radius)?;
    Ok(ball
        .elems()
        .filter(|e| !group.is_torsion(e))
        .cloned()
        .collect())
}

/// The full pipeline: pick directions, run the obstruction tests on a pair
/// battery, build the transfer table, check it across directions, extract
/// the homomorphism, and verify the residuals.
pub fn untwist(
    cocycle: &LocalCocycle,
    config: &UntwistConfig,
) -> Result<TransferReport, CocycleError> {
    let group = &cocycle.group;
    let basepoint = cocycle.shift.background_configuration();
    let mut notes = vec![
        "topological mixing of the subshift is assumed, not verified; \
         glue checks provide finite evidence only"
            .to_string(),
    ];
    let mut report = TransferReport {
        verdict: Verdict::Inconclusive,
        direction: None,
        second_direction: None,
        certificates: Vec::new(),
        table: None,
        table_coherence_failures: 0,
        homomorphism: None,
        extract_failure: None,
        residuals: ResidualReport::default(),
        untwist_radius: None,
        battery_size: 0,
        seed: config.seed,
        notes: Vec::new(),
    };

    // (1) directions: shortest non-torsion elements, a second one when
    // independent of the first
    let directions = non_torsion_directions(cocycle, 2)?;
    let Some(g_dir) = directions.first().cloned() else {
        notes.push("no non-torsion direction in B(2)".into());
        report.notes = notes;
        return Ok(report);
    };
    let g_inv = group.inverse(&g_dir);
    let h_dir = directions
        .iter()
        .find(|e| **e != g_dir && **e != g_inv)
        .cloned();
    report.direction = Some(g_dir.clone());
    report.second_direction = h_dir.clone();
    report.untwist_radius = match untwist_radius(cocycle, &g_dir) {
        Ok(n) => Some(n),
        Err(CocycleError::NoWitnessConstructor) => None,
        Err(other) => return Err(other),
    };

    // (2) battery: admissible patterns against the basepoint plus random
    // homoclinic pairs
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pairs: Vec<HomoclinicPair> = Vec::new();
    for x in pattern_battery(
        cocycle,
        config.battery_ball_radius,
        config.battery_pattern_cap,
    )? {
        pairs.push(HomoclinicPair::new(x, basepoint.clone())?);
    }
    for _ in 0..config.random_pairs {
        let x = random_member(cocycle, &mut rng, config.random_support_radius, 0.35)?;
        let y = random_member(cocycle, &mut rng, config.random_support_radius, 0.35)?;
        pairs.push(HomoclinicPair::new(x, y)?);
    }
    report.battery_size = pairs.len();

    if let TestOutcome::Obstruction(cert) = fixed_point_obstruction(cocycle)? {
        report.certificates.push(*cert);
    }
    // one parallel pass computes all four limits per pair; the comparisons
    // are exactly plusMinusTest(g), plusMinusTest(h), crossDirectionTest(g,h)
    {
        let mut reach = 0u64;
        for p in &pairs {
            for d in &p.diff {
                reach = reach.max(group.word_length(d)?);
            }
        }
        let eval_g = DirectionEvaluator::new(cocycle, &g_dir, reach)?;
        let eval_g_inv = DirectionEvaluator::new(cocycle, &g_inv, reach)?;
        let eval_h = match &h_dir {
            Some(h) => Some((
                DirectionEvaluator::new(cocycle, h, reach)?,
                DirectionEvaluator::new(cocycle, &group.inverse(h), reach)?,
            )),
            None => None,
        };
        let rows = crate::par::map_slice(&pairs, |pair| {
            let plus_g = eval_g.limit_plus(pair)?;
            let minus_g = eval_g_inv.limit_plus(pair)?;
            let h_vals = match &eval_h {
                Some((eh, ehi)) => Some((eh.limit_plus(pair)?, ehi.limit_plus(pair)?)),
                None => None,
            };
            Ok::<_, CocycleError>((plus_g, minus_g, h_vals))
        });
        let mut plus_minus_g: Option<ObstructionCertificate> = None;
        let mut plus_minus_h: Option<ObstructionCertificate> = None;
        let mut cross: Option<ObstructionCertificate> = None;
        for (pair, row) in pairs.iter().zip(rows) {
            let (plus_g, minus_g, h_vals) = row?;
            if plus_minus_g.is_none() && plus_g != minus_g {
                plus_minus_g = Some(ObstructionCertificate::PlusMinusMismatch {
                    direction: g_dir.clone(),
                    x: pair.x.clone(),
                    y: pair.y.clone(),
                    plus: plus_g.clone(),
                    minus: minus_g,
                });
            }
            if let (Some(h), Some((plus_h, minus_h))) = (&h_dir, h_vals) {
                if plus_minus_h.is_none() && plus_h != minus_h {
                    plus_minus_h = Some(ObstructionCertificate::PlusMinusMismatch {
                        direction: h.clone(),
                        x: pair.x.clone(),
                        y: pair.y.clone(),
                        plus: plus_h.clone(),
                        minus: minus_h,
                    });
                }
                if cross.is_none() && plus_g != plus_h {
                    cross = Some(ObstructionCertificate::CrossDirectionMismatch {
                        g: g_dir.clone(),
                        h: h.clone(),
                        x: pair.x.clone(),
                        y: pair.y.clone(),
                        value_g: plus_g,
                        value_h: plus_h,
                    });
                }
            }
        }
        report.certificates.extend(plus_minus_g);
        report.certificates.extend(plus_minus_h);
        report.certificates.extend(cross);
    }
    if !report.certificates.is_empty() {
        report.verdict = Verdict::ObstructionFound;
        report.notes = notes;
        return Ok(report);
    }

    // (3) transfer table along the primary direction
    let mut w_rad = 0u32;
    for w in &cocycle.window {
        w_rad = w_rad.max(group.word_length(w)? as u32);
    }
    let radius = config.table_radius.unwrap_or_else(|| w_rad.max(1));
    let table = match transfer_map(
        cocycle,
        &g_dir,
        &basepoint,
        radius,
        config.table_pattern_cap,
    ) {
        Ok(t) => Some(t),
        Err(CocycleError::PatternEnumerationTooLarge { .. }) => {
            notes.push(format!(
                "transfer table at radius {radius} exceeds the pattern cap; \
                 residuals use on-demand evaluation only"
            ));
            None
        }
        Err(other) => return Err(other),
    };

    // (4) cross-direction agreement of the table values
    if let (Some(t), Some(h)) = (&table, &h_dir) {
        let eval_h = DirectionEvaluator::new(cocycle, h, t.radius as u64)?;
        let rows: Vec<(Vec<u8>, HElem)> = t
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let checked = crate::par::map_slice(&rows, |(digits, value)| {
            let values: BTreeMap<Elem, u8> = t
                .sites
                .iter()
                .cloned()
                .zip(digits.iter().copied())
                .collect();
            let x =
                Configuration::with_overlay(group.clone(), cocycle.shift.alphabet.clone(), values);
            let vh = eval_h.limit_plus(&HomoclinicPair::new(x.clone(), basepoint.clone())?)?;
            Ok::<_, CocycleError>((x, value.clone(), vh))
        });
        for row in checked {
            let (x, vg, vh) = row?;
            if vg != vh {
                report
                    .certificates
                    .push(ObstructionCertificate::CrossDirectionMismatch {
                        g: g_dir.clone(),
                        h: h.clone(),
                        x: x.clone(),
                        y: basepoint.clone(),
                        value_g: vg,
                        value_h: vh,
                    });
                report.verdict = Verdict::ObstructionFound;
                report.table = Some(t.clone());
                report.notes = notes;
                return Ok(report);
            }
        }
    }

    // (5) homomorphism from the table on samples one step inside its
    // radius, plus the admissible shift-fixed constants, which are the
    // configurations that expose fixed-point obstructions at this stage
    let extract = match &table {
        Some(t) => {
            let sample_radius = t.radius.saturating_sub(1);
            let mut samples = pattern_battery(cocycle, sample_radius, config.battery_pattern_cap)?;
            for sym in 0..cocycle.shift.alphabet.len() as u8 {
                let constant =
                    Configuration::constant(group.clone(), cocycle.shift.alphabet.clone(), sym);
                if cocycle.shift.contains(&constant) {
                    samples.push(constant);
                }
            }
            extract_homomorphism(cocycle, t, &samples)?
        }
        None => ExtractOutcome::InvalidHomomorphism(
            "no transfer table available at a feasible radius".into(),
        ),
    };
    report.table = table;
    let phi = match extract {
        ExtractOutcome::Constant(phi) => phi,
        ExtractOutcome::NonConstant {
            gen,
            x1,
            x2,
            v1,
            v2,
        } => {
            report.extract_failure = Some(format!(
                "b(sx)^-1 c(s,x) b(x) not constant for {gen}: {} vs {} on two samples \
                 (supports {:?} / {:?})",
                cocycle.target.format_elem(&v1),
                cocycle.target.format_elem(&v2),
                x1.support().count(),
                x2.support().count(),
            ));
            report.notes = notes;
            return Ok(report);
        }
        ExtractOutcome::InvalidHomomorphism(msg) => {
            report.extract_failure = Some(msg);
            report.notes = notes;
            return Ok(report);
        }
    };

    // (6) exact residuals over elements of B(3) and random members
    let mut battery: Vec<(Elem, Configuration)> = Vec::new();
    let elems: Vec<Elem> = group
        .ball(config.verify_element_radius)?
        .elems()
        .cloned()
        .collect();
    let mut configs = vec![basepoint.clone()];
    while configs.len() * elems.len() < config.verify_checks {
        configs.push(random_member(
            cocycle,
            &mut rng,
            config.verify_support_radius,
            0.35,
        )?);
    }
    'fill: for x in &configs {
        for g in &elems {
            if battery.len() >= config.verify_checks {
                break 'fill;
            }
            battery.push((g.clone(), x.clone()));
        }
    }
    let residuals = verify_untwist(cocycle, &g_dir, &basepoint, &phi, &battery)?;

    // table-vs-on-demand coherence on the residual configurations
    if let Some(t) = &report.table {
        for x in &configs {
            if x.support_radius()? <= t.radius as u64 {
                let direct = transfer_value(cocycle, &g_dir, x, &basepoint)?;
                if t.lookup(cocycle, x)? != direct {
                    report.table_coherence_failures += 1;
                }
            }
        }
    }

    report.verdict = if residuals.failures.is_empty() {
        Verdict::Untwisted
    } else {
        Verdict::Inconclusive
    };
    report.homomorphism = Some(phi);
    report.residuals = residuals;
    report.notes = notes;
    Ok(report)
}

impl TransferReport {
    /// Deterministic JSON rendering with a stable schema version.
    pub fn to_json(&self, cocycle: &LocalCocycle) -> serde_json::Value {
        let group = &cocycle.group;
        let target = &cocycle.target;
        let fmt_conf = |x: &Configuration| crate::jsonio::configuration_to_json(group, x);
        let certs: Vec<serde_json::Value> = self
            .certificates
            .iter()
            .map(|c| match c {
                ObstructionCertificate::PlusMinusMismatch {
                    direction,
                    x,
                    y,
                    plus,
                    minus,
                } => json!({
                    "kind": c.kind(),
                    "direction": group.format_elem(direction),
                    "x": fmt_conf(x),
                    "y": fmt_conf(y),
                    "plus": target.format_elem(plus),
                    "minus": target.format_elem(minus),
                }),
                ObstructionCertificate::CrossDirectionMismatch {
                    g,
                    h,
                    x,
                    y,
                    value_g,
                    value_h,
                } => json!({
                    "kind": c.kind(),
                    "g": group.format_elem(g),
                    "h": group.format_elem(h),
                    "x": fmt_conf(x),
                    "y": fmt_conf(y),
                    "value_g": target.format_elem(value_g),
                    "value_h": target.format_elem(value_h),
                }),
                ObstructionCertificate::FixedPointMismatch { x1, x2, g, v1, v2 } => json!({
                    "kind": c.kind(),
                    "g": group.format_elem(g),
                    "x1": fmt_conf(x1),
                    "x2": fmt_conf(x2),
                    "v1": target.format_elem(v1),
                    "v2": target.format_elem(v2),
                }),
                ObstructionCertificate::RelatorViolation { relator, detail } => json!({
                    "kind": c.kind(),
                    "relator": relator,
                    "detail": detail,
                }),
            })
            .collect();
        let table = self.table.as_ref().map(|t| {
            let rows: Vec<serde_json::Value> = t
                .entries
                .iter()
                .map(|(digits, v)| {
                    let pattern: Vec<String> = digits
                        .iter()
                        .map(|&d| cocycle.shift.alphabet.symbols[d as usize].clone())
                        .collect();
                    json!([pattern.join(" "), target.format_elem(v)])
                })
                .collect();
            json!({
                "direction": group.format_elem(&t.direction),
                "radius": t.radius,
                "sites": t.sites.iter().map(|s| group.format_elem(s)).collect::<Vec<_>>(),
                "rows": rows,
            })
        });
        let homomorphism = self.homomorphism.as_ref().map(|phi| {
            let map: BTreeMap<String, String> = cocycle
                .group
                .generators()
                .iter()
                .zip(&phi.gen_values)
                .map(|(gen, v)| (gen.name.clone(), target.format_elem(v)))
                .collect();
            serde_json::to_value(map).expect("string map")
        });
        let failures: Vec<serde_json::Value> = self
            .residuals
            .failures
            .iter()
            .map(|f| {
                json!({
                    "g": group.format_elem(&f.g),
                    "x": fmt_conf(&f.x),
                    "lhs": target.format_elem(&f.lhs),
                    "rhs": target.format_elem(&f.rhs),
                })
            })
            .collect();
        json!({
            "schema_version": 1,
            "verdict": match self.verdict {
                Verdict::Untwisted => "untwisted",
                Verdict::ObstructionFound => "obstruction_found",
                Verdict::Inconclusive => "inconclusive",
            },
            "direction": self.direction.as_ref().map(|d| group.format_elem(d)),
            "second_direction": self.second_direction.as_ref().map(|d| group.format_elem(d)),
            "certificates": certs,
            "transfer": table,
            "transfer_convention":
                "stored values are b(x) = c^{(g),+}(x, basepoint); the transfer map in the \
                 c(g,x) = b(gx)^{-1} φ(g) b(x) convention is their pointwise inverse",
            "table_coherence_failures": self.table_coherence_failures,
            "homomorphism": homomorphism,
            "extract_failure": self.extract_failure,
            "residuals": {
                "total": self.residuals.total,
                "failures": failures,
            },
            "untwist_radius": self.untwist_radius,
            "battery_size": self.battery_size,
            "seed": self.seed,
            "validation": {
                "relators_checked": cocycle.certificate.relators_checked,
                "relator_mode": mode_str(&cocycle.certificate.relator_mode),
                "inverse_mode": mode_str(&cocycle.certificate.inverse_mode),
            },
            "notes": self.notes,
        })
    }
}

fn mode_str(mode: &super::ValidationMode) -> String {
    match mode {
        super::ValidationMode::Exhaustive => "exhaustive".into(),
        super::ValidationMode::Sampled { samples, seed } => {
            format!("sampled({samples} samples, seed {seed})")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{coboundary_cocycle, example_cocycle_z, make_local_cocycle, CocycleCaps};
    use crate::coeff::{CoeffGroup, CoeffSpec};
    use crate::group::{GroupContext, GroupSpec};
    use crate::shift::{Alphabet, Subshift};
    use std::sync::Arc;

    fn mod2() -> Arc<CoeffGroup> {
        CoeffGroup::new(CoeffSpec::Cyclic { n: 2 }).unwrap()
    }

    /// A cocycle whose rules read only the identity site. Constant rules
    /// are supplied for both members of each inverse pair so nothing is
    /// synthesized onto a shifted window.
    fn point_window_cocycle(spec: GroupSpec) -> LocalCocycle {
        let group = GroupContext::new(spec).unwrap();
        let shift = Subshift::full(group.clone(), Alphabet::binary()).unwrap();
        let window = vec![group.identity()];
        let tables: BTreeMap<usize, Vec<HElem>> = (0..group.generators().len())
            .map(|gi| (gi, vec![HElem::Mod(1), HElem::Mod(1)]))
            .collect();
        make_local_cocycle(shift, mod2(), window, tables, CocycleCaps::default()).unwrap()
    }

    /// A coboundary over the B(1) window of b(x) = x_e.
    fn b1_coboundary(spec: GroupSpec) -> LocalCocycle {
        let group = GroupContext::new(spec).unwrap();
        let shift = Subshift::full(group.clone(), Alphabet::binary()).unwrap();
        let b_window = vec![group.identity()];
        let b_table = vec![HElem::Mod(0), HElem::Mod(1)];
        let phi: BTreeMap<usize, HElem> = (0..group.generators().len() / 2)
            .map(|i| (2 * i, HElem::Mod(0)))
            .collect();
        coboundary_cocycle(
            shift,
            mod2(),
            b_window,
            b_table,
            &phi,
            CocycleCaps::default(),
        )
        .unwrap()
    }

    #[test]
    fn untwist_radius_matches_the_specification_constants() {
        // rules reading only the identity have window radius 0
        let c0 = point_window_cocycle(GroupSpec::FreeAbelian { d: 1 });
        let one = c0.group.parse_elem("(1)").unwrap();
        assert_eq!(untwist_radius(&c0, &one).unwrap(), 0);

        // the b(x) = x_e coboundary reads B(1) on Z
        let c1 = b1_coboundary(GroupSpec::FreeAbelian { d: 1 });
        let one = c1.group.parse_elem("(1)").unwrap();
        assert_eq!(untwist_radius(&c1, &one).unwrap(), 4);

        // diagonal direction in Z^2 at window radius 1
        let c2 = b1_coboundary(GroupSpec::FreeAbelian { d: 2 });
        let diag = c2.group.parse_elem("(1,1)").unwrap();
        assert_eq!(untwist_radius(&c2, &diag).unwrap(), 3);
    }

    #[test]
    fn plus_limit_recovers_the_coboundary_difference() {
        // c = b-coboundary with b(x) = x_e, φ = 0: the forward limit against
        // the background is b(x̄) - b(x) = -x_e, which is x_e over Z/2
        let c = b1_coboundary(GroupSpec::FreeAbelian { d: 2 });
        let group = c.group.clone();
        let g = group.parse_elem("(1,0)").unwrap();
        let basepoint = c.shift.background_configuration();
        let x = Configuration::with_overlay(
            group.clone(),
            c.shift.alphabet.clone(),
            [(group.identity(), 1)],
        );
        assert_eq!(
            transfer_value(&c, &g, &x, &basepoint).unwrap(),
            HElem::Mod(1)
        );
        assert_eq!(
            transfer_value(&c, &g, &basepoint, &basepoint).unwrap(),
            HElem::Mod(0),
            "the basepoint row of the table is the identity"
        );
    }

    #[test]
    fn homomorphism_cocycles_have_identity_transfer() {
        let c = point_window_cocycle(GroupSpec::FreeAbelian { d: 2 });
        let g = c.group.parse_elem("(1,0)").unwrap();
        let basepoint = c.shift.background_configuration();
        let table = transfer_map(&c, &g, &basepoint, 1, 1 << 20).unwrap();
        assert!(table.entries.values().all(|v| *v == HElem::Mod(0)));
    }

    #[test]
    fn tampered_table_fails_verification() {
        let c = b1_coboundary(GroupSpec::FreeAbelian { d: 2 });
        let group = c.group.clone();
        let g = group.parse_elem("(1,0)").unwrap();
        let basepoint = c.shift.background_configuration();
        let mut table = transfer_map(&c, &g, &basepoint, 2, 1 << 20).unwrap();
        let phi = Homomorphism {
            gen_values: vec![HElem::Mod(0); 4],
        };
        // battery inside B(1) so every shift stays within the table ball
        let mut battery = Vec::new();
        for x in pattern_battery(&c, 1, 4096).unwrap() {
            for gen in group.generators() {
                battery.push((gen.elem.clone(), x.clone()));
            }
        }
        let clean = verify_untwist_table(&c, &table, &phi, &battery).unwrap();
        assert!(clean.failures.is_empty());

        // flip the entry for the pattern with a single 1 at the identity:
        // shifting moves the support, so only one side of the residual
        // reads the flipped value
        let key: Vec<u8> = table
            .sites
            .iter()
            .map(|s| u8::from(s.is_identity()))
            .collect();
        let old = table.entries.get(&key).cloned().unwrap();
        table
            .entries
            .insert(key, c.target.multiply(&old, &HElem::Mod(1)));
        let tampered = verify_untwist_table(&c, &table, &phi, &battery).unwrap();
        assert!(!tampered.failures.is_empty());
    }

    #[test]
    fn sign_cocycle_extraction_breaks_at_the_fixed_points() {
        // along one direction the sign cocycle untwists on the homoclinic
        // class (its limit transfer just cannot be continuous), so the
        // finite-overlay samples give a constant L; the shift-fixed constant
        // configurations expose the non-constancy
        let c = example_cocycle_z();
        let group = c.group.clone();
        let g = group.parse_elem("(1)").unwrap();
        let basepoint = c.shift.background_configuration();
        let table = transfer_map(&c, &g, &basepoint, 2, 1 << 20).unwrap();

        let overlay_samples = pattern_battery(&c, 1, 4096).unwrap();
        match extract_homomorphism(&c, &table, &overlay_samples).unwrap() {
            ExtractOutcome::Constant(_) => {}
            other => panic!("homoclinic samples alone stay constant: {other:?}"),
        }

        let mut samples = overlay_samples;
        samples.push(Configuration::constant(
            group.clone(),
            c.shift.alphabet.clone(),
            1,
        ));
        match extract_homomorphism(&c, &table, &samples).unwrap() {
            ExtractOutcome::NonConstant { v1, v2, .. } => {
                let mut vals = [v1, v2];
                vals.sort();
                assert_eq!(vals, [HElem::Mod(0), HElem::Mod(1)]);
            }
            other => panic!("the constant configuration must break constancy: {other:?}"),
        }
    }
}
