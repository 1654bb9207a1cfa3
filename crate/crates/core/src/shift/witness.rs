//! Specification witnesses: given two configurations agreeing on a large
//! ball, build a third matching one on the forward cone of a non-torsion
//! direction and the other on the backward cone.

use super::{in_cone, specification_n, Configuration, Pattern, ShiftError, ShiftKind, Subshift};
use crate::group::Elem;

/// Full-shift witness: `y = x` on `{a^k : k ≥ 0}B(r)`, `y = x'` on the
/// backward cone, background elsewhere. Well-defined because the cones
/// intersect inside `B(N(a, r))`, where the inputs agree.
pub fn witness_full_shift(
    shift: &Subshift,
    a: &Elem,
    r: u32,
    x: &Configuration,
    xp: &Configuration,
) -> Result<Configuration, ShiftError> {
    if !matches!(shift.kind, ShiftKind::Full) {
        return Err(ShiftError::NoWitnessConstructor);
    }
    let n = specification_n(&shift.group, a, r)?;
    build_cone_witness(shift, a, r, n, x, xp)
}

/// Golden-mean witness: same overlay construction, with the agreement ball
/// enlarged by the constraint radius so that any window meeting both cones
/// lies where the inputs agree; membership of the output is then verified.
pub fn witness_golden_mean(
    shift: &Subshift,
    a: &Elem,
    r: u32,
    x: &Configuration,
    xp: &Configuration,
) -> Result<Configuration, ShiftError> {
    if !matches!(shift.kind, ShiftKind::GoldenMean { .. }) {
        return Err(ShiftError::NoWitnessConstructor);
    }
    if !shift.contains(x) || !shift.contains(xp) {
        return Err(ShiftError::NotInSubshift);
    }
    let r0 = shift.window_radius()?;
    let m = specification_n(&shift.group, a, r + r0)?;
    let n = m + r0;
    let y = build_cone_witness(shift, a, r, n, x, xp)?;
    if !shift.contains(&y) {
        return Err(ShiftError::WitnessNotInSubshift(format!(
            "direction {}, r = {r}",
            shift.group.format_elem(a)
        )));
    }
    Ok(y)
}

fn build_cone_witness(
    shift: &Subshift,
    a: &Elem,
    r: u32,
    agreement_radius: u32,
    x: &Configuration,
    xp: &Configuration,
) -> Result<Configuration, ShiftError> {
    if x.background() != xp.background() {
        return Err(ShiftError::BackgroundMismatch);
    }
    let group = &shift.group;
    // agreement on B(N) reduces to the overlay sites inside it; everything
    // else is the shared background
    for s in x.support().chain(xp.support()) {
        if group.word_length(s)? <= agreement_radius as u64 && x.value_at(s) != xp.value_at(s) {
            return Err(ShiftError::AgreementBallViolated(
                agreement_radius,
                group.format_elem(s),
            ));
        }
    }

    let mut y = Configuration::constant(group.clone(), x.alphabet.clone(), x.background());
    for (g, &v) in x.overlay() {
        if in_cone(group, a, r, true, g)? {
            y.set(g.clone(), v);
        }
    }
    for (g, &v) in xp.overlay() {
        if in_cone(group, a, r, false, g)? {
            // overlaps sit in both cones, hence in B(N) where x = x'
            debug_assert_eq!(y.value_at(g), x.background());
            y.set(g.clone(), v);
        }
    }
    Ok(y)
}

/// Constructive mixing evidence: place `p2` at the identity and `p1` at `g`.
/// Succeeds whenever the supports are separated beyond twice the pattern
/// radius plus twice the constraint radius; then no constraint window can
/// straddle both patterns and membership follows from each side alone.
pub fn glue_check(
    shift: &Subshift,
    p1: &Pattern,
    p2: &Pattern,
    g: &Elem,
    r: u32,
) -> Result<Configuration, ShiftError> {
    if matches!(shift.kind, ShiftKind::Sft { .. }) {
        return Err(ShiftError::NoWitnessConstructor);
    }
    let group = &shift.group;
    for p in [p1, p2] {
        for s in p.sites() {
            if group.word_length(s)? > r as u64 {
                return Err(ShiftError::PatternNotAdmissible);
            }
        }
        let ext = p.extend_by_background(group.clone(), shift.alphabet.clone());
        if !shift.contains(&ext) {
            return Err(ShiftError::PatternNotAdmissible);
        }
    }
    let r0 = shift.window_radius()?;
    let min = 2 * r as u64 + 2 * r0 as u64;
    let got = group.word_length(g)?;
    if got <= min {
        return Err(ShiftError::TooClose { min, got });
    }

    let mut y = shift.background_configuration();
    for (h, &v) in p2.values() {
        y.set(h.clone(), v);
    }
    for (h, &v) in p1.values() {
        y.set(group.multiply(g, h), v);
    }
    if !shift.contains(&y) {
        return Err(ShiftError::WitnessNotInSubshift(group.format_elem(g)));
    }
    Ok(y)
}
