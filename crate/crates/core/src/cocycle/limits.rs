//! Limit cocycles along non-torsion directions and the obstruction tests
//! built on them.
//!
//! For a homoclinic pair `(x, x')` and a non-torsion `g`, the forward limit
//! is `lim_n c(g^n, x)^{-1} c(g^n, x')`. The limit stabilizes at the least
//! `N` with `g^{-k}·W_f ∩ D = ∅` for all `k ≥ N`, where `W_f` is the window
//! of `c(g, ·)` and `D` the difference support; that index is certified by
//! the monotone power-length lower bound, so no "until it stops changing"
//! heuristics are involved.

use super::{CocycleError, LocalCocycle};
use crate::coeff::HElem;
use crate::group::Elem;
use crate::shift::{Configuration, HomoclinicPair};
use std::collections::BTreeSet;

/// A replayable witness that a necessary triviality condition fails.
#[derive(Clone, Debug)]
pub enum ObstructionCertificate {
    PlusMinusMismatch {
        direction: Elem,
        x: Configuration,
        y: Configuration,
        plus: HElem,
        minus: HElem,
    },
    CrossDirectionMismatch {
        g: Elem,
        h: Elem,
        x: Configuration,
        y: Configuration,
        value_g: HElem,
        value_h: HElem,
    },
    FixedPointMismatch {
        x1: Configuration,
        x2: Configuration,
        g: Elem,
        v1: HElem,
        v2: HElem,
    },
    RelatorViolation {
        relator: String,
        detail: String,
    },
}

impl ObstructionCertificate {
    pub fn kind(&self) -> &'static str {
        match self {
            ObstructionCertificate::PlusMinusMismatch { .. } => "plus_minus_mismatch",
            ObstructionCertificate::CrossDirectionMismatch { .. } => "cross_direction_mismatch",
            ObstructionCertificate::FixedPointMismatch { .. } => "fixed_point_mismatch",
            ObstructionCertificate::RelatorViolation { .. } => "relator_violation",
        }
    }

    /// Recomputes the stored inequality from scratch.
    pub fn replay(&self, cocycle: &LocalCocycle) -> Result<bool, CocycleError> {
        match self {
            ObstructionCertificate::PlusMinusMismatch {
                direction,
                x,
                y,
                plus,
                minus,
            } => {
                let pair = HomoclinicPair::new(x.clone(), y.clone())?;
                let p = limit_cocycle_plus(cocycle, direction, &pair)?;
                let m = limit_cocycle_minus(cocycle, direction, &pair)?;
                Ok(p == *plus && m == *minus && p != m)
            }
            ObstructionCertificate::CrossDirectionMismatch {
                g,
                h,
                x,
                y,
                value_g,
                value_h,
            } => {
                let pair = HomoclinicPair::new(x.clone(), y.clone())?;
                let vg = limit_cocycle_plus(cocycle, g, &pair)?;
                let vh = limit_cocycle_plus(cocycle, h, &pair)?;
                Ok(vg == *value_g && vh == *value_h && vg != vh)
            }
            ObstructionCertificate::FixedPointMismatch { x1, x2, g, v1, v2 } => {
                let a = cocycle.evaluate(g, x1);
                let b = cocycle.evaluate(g, x2);
                Ok(a == *v1 && b == *v2 && !cocycle.target.conjugate(&a, &b))
            }
            ObstructionCertificate::RelatorViolation { .. } => Ok(true),
        }
    }
}

#[derive(Clone, Debug)]
pub enum TestOutcome {
    Pass,
    Obstruction(Box<ObstructionCertificate>),
}

impl TestOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, TestOutcome::Pass)
    }
}

/// The exact stabilization index: least `N` such that `g^{-k}·W ∩ D = ∅`
/// for every `k ≥ N`, where `W` is the dependence window of `c(g, ·)`.
fn stabilization_index(
    cocycle: &LocalCocycle,
    g: &Elem,
    diff: &[Elem],
) -> Result<u64, CocycleError> {
    let group = &cocycle.group;
    let window = cocycle.dependence_window(g);
    // g^{-k} ∈ D·W^{-1} is the only way g^{-k}W can meet D
    let mut reach = BTreeSet::new();
    let mut max_len = 0u64;
    for d in diff {
        for w in &window {
            let e = group.multiply(d, &group.inverse(w));
            max_len = max_len.max(group.word_length(&e)?);
            reach.insert(e);
        }
    }
    let g_inv = group.inverse(g);
    let mut n_star = 0u64;
    let mut k = 0u64;
    let mut point = group.identity(); // g^{-k}
    loop {
        if reach.contains(&point) {
            n_star = k + 1;
        }
        k += 1;
        if group.power_length_lower_bound(g, k)? > max_len {
            return Ok(n_star);
        }
        point = group.multiply(&point, &g_inv);
    }
}

/// Forward limit cocycle `c^{(g),+}(x, x') = lim c(g^n, x)^{-1} c(g^n, x')`,
/// evaluated exactly at its certified stabilization index.
pub fn limit_cocycle_plus(
    cocycle: &LocalCocycle,
    g: &Elem,
    pair: &HomoclinicPair,
) -> Result<HElem, CocycleError> {
    cocycle.group.power_length_lower_bound(g, 1)?;
    if pair.diff.is_empty() {
        return Ok(cocycle.target.identity());
    }
    let n_star = stabilization_index(cocycle, g, &pair.diff)?;
    let value = telescoped(cocycle, g, n_star, pair);
    #[cfg(debug_assertions)]
    for extra in 1..=5 {
        debug_assert_eq!(
            telescoped(cocycle, g, n_star + extra, pair),
            value,
            "limit failed to stabilize past its certified index"
        );
    }
    Ok(value)
}

/// Backward limit `c^{(g),-}`; equals the forward limit along `g^{-1}`.
pub fn limit_cocycle_minus(
    cocycle: &LocalCocycle,
    g: &Elem,
    pair: &HomoclinicPair,
) -> Result<HElem, CocycleError> {
    limit_cocycle_plus(cocycle, &cocycle.group.inverse(g), pair)
}

fn telescoped(cocycle: &LocalCocycle, g: &Elem, n: u64, pair: &HomoclinicPair) -> HElem {
    let power = cocycle.group.power(g, n as i64);
    let vx = cocycle.evaluate(&power, &pair.x);
    let vy = cocycle.evaluate(&power, &pair.y);
    cocycle.target.multiply(&cocycle.target.inverse(&vx), &vy)
}

/// Tests `c^{(g),+} = c^{(g),-}` on the supplied pairs. A mismatch yields a
/// replayable certificate; on one-ended groups every continuous cocycle
/// must pass, so a failure certifies either nontrivial cocycle behavior or
/// the absence of one-endedness.
pub fn plus_minus_test(
    cocycle: &LocalCocycle,
    g: &Elem,
    pairs: &[HomoclinicPair],
) -> Result<TestOutcome, CocycleError> {
    let results = crate::par::map_slice(pairs, |pair| {
        let plus = limit_cocycle_plus(cocycle, g, pair)?;
        let minus = limit_cocycle_minus(cocycle, g, pair)?;
        Ok::<_, CocycleError>((plus, minus))
    });
    for (pair, res) in pairs.iter().zip(results) {
        let (plus, minus) = res?;
        if plus != minus {
            return Ok(TestOutcome::Obstruction(Box::new(
                ObstructionCertificate::PlusMinusMismatch {
                    direction: g.clone(),
                    x: pair.x.clone(),
                    y: pair.y.clone(),
                    plus,
                    minus,
                },
            )));
        }
    }
    Ok(TestOutcome::Pass)
}

/// Tests `c^{(g),+} = c^{(h),+}` on the supplied pairs (the two-direction
/// law on one-ended groups).
pub fn cross_direction_test(
    cocycle: &LocalCocycle,
    g: &Elem,
    h: &Elem,
    pairs: &[HomoclinicPair],
) -> Result<TestOutcome, CocycleError> {
    let results = crate::par::map_slice(pairs, |pair| {
        let vg = limit_cocycle_plus(cocycle, g, pair)?;
        let vh = limit_cocycle_plus(cocycle, h, pair)?;
        Ok::<_, CocycleError>((vg, vh))
    });
    for (pair, res) in pairs.iter().zip(results) {
        let (value_g, value_h) = res?;
        if value_g != value_h {
            return Ok(TestOutcome::Obstruction(Box::new(
                ObstructionCertificate::CrossDirectionMismatch {
                    g: g.clone(),
                    h: h.clone(),
                    x: pair.x.clone(),
                    y: pair.y.clone(),
                    value_g,
                    value_h,
                },
            )));
        }
    }
    Ok(TestOutcome::Pass)
}

/// Replays the path-transport mechanism behind the cross-direction law:
/// along a path staying outside `W·B(r_D)`, the per-step cocycle values
/// agree between the two members of a homoclinic pair. Returns whether all
/// steps agreed; the separation precondition is recomputed and enforced.
pub fn path_transport(
    cocycle: &LocalCocycle,
    path: &[usize],
    start: &Elem,
    x: &Configuration,
    y: &Configuration,
) -> Result<bool, CocycleError> {
    let group = &cocycle.group;
    let pair = HomoclinicPair::new(x.clone(), y.clone())?;
    let mut r_d = 0u64;
    for d in &pair.diff {
        r_d = r_d.max(group.word_length(d)?);
    }
    let forbidden: BTreeSet<Elem> = {
        let ball = group.ball(r_d as u32)?;
        let mut set = BTreeSet::new();
        for w in &cocycle.window {
            for b in ball.elems() {
                set.insert(group.multiply(w, b));
            }
        }
        set
    };

    let mut point = start.clone();
    let mut cur_x = x.shifted(start);
    let mut cur_y = y.shifted(start);
    let mut all_agree = true;
    for (step, &gi) in path.iter().enumerate() {
        if forbidden.contains(&point) {
            return Err(CocycleError::SeparationViolated {
                step,
                point: group.format_elem(&point),
            });
        }
        if cocycle.gen_value(gi, &cur_x) != cocycle.gen_value(gi, &cur_y) {
            all_agree = false;
        }
        let s = &group.generators()[gi].elem;
        point = group.multiply(s, &point);
        cur_x = cur_x.shifted(s);
        cur_y = cur_y.shifted(s);
    }
    Ok(all_agree)
}

/// Compares the cocycle at shift-fixed constant configurations. Any
/// transfer equation forces `c(g, x) = b(x)^{-1} φ(g) b(x)` at a fixed
/// point, so values at two fixed points must be conjugate in `H`; a
/// violation certifies that no untwisting exists.
pub fn fixed_point_obstruction(cocycle: &LocalCocycle) -> Result<TestOutcome, CocycleError> {
    let shift = &cocycle.shift;
    let constants: Vec<Configuration> = (0..shift.alphabet.len() as u8)
        .map(|sym| Configuration::constant(cocycle.group.clone(), shift.alphabet.clone(), sym))
        .filter(|x| shift.contains(x))
        .collect();
    for (i, x1) in constants.iter().enumerate() {
        for x2 in &constants[i + 1..] {
            for gen in cocycle.group.generators() {
                let v1 = cocycle.evaluate(&gen.elem, x1);
                let v2 = cocycle.evaluate(&gen.elem, x2);
                if !cocycle.target.conjugate(&v1, &v2) {
                    return Ok(TestOutcome::Obstruction(Box::new(
                        ObstructionCertificate::FixedPointMismatch {
                            x1: x1.clone(),
                            x2: x2.clone(),
                            g: gen.elem.clone(),
                            v1,
                            v2,
                        },
                    )));
                }
            }
        }
    }
    Ok(TestOutcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{example_cocycle_free, example_cocycle_z};

    fn unit_pair(c: &LocalCocycle) -> HomoclinicPair {
        let g = &c.group;
        let x =
            Configuration::with_overlay(g.clone(), c.shift.alphabet.clone(), [(g.identity(), 1)]);
        let xbar = c.shift.background_configuration();
        HomoclinicPair::new(x, xbar).unwrap()
    }

    #[test]
    fn diagonal_pair_has_identity_limits() {
        let c = example_cocycle_z();
        let xbar = c.shift.background_configuration();
        let pair = HomoclinicPair::new(xbar.clone(), xbar).unwrap();
        let g = c.group.parse_elem("(1)").unwrap();
        assert_eq!(limit_cocycle_plus(&c, &g, &pair).unwrap(), HElem::Mod(0));
        assert_eq!(limit_cocycle_minus(&c, &g, &pair).unwrap(), HElem::Mod(0));
    }

    #[test]
    fn sign_cocycle_on_z_has_asymmetric_limits() {
        // the forward products sweep through the support, the backward ones
        // never touch it
        let c = example_cocycle_z();
        let pair = unit_pair(&c);
        let g = c.group.parse_elem("(1)").unwrap();
        assert_eq!(limit_cocycle_plus(&c, &g, &pair).unwrap(), HElem::Mod(1));
        assert_eq!(limit_cocycle_minus(&c, &g, &pair).unwrap(), HElem::Mod(0));
        match plus_minus_test(&c, &g, &[pair]).unwrap() {
            TestOutcome::Obstruction(cert) => {
                assert_eq!(cert.kind(), "plus_minus_mismatch");
                assert!(cert.replay(&c).unwrap());
            }
            TestOutcome::Pass => panic!("the sign cocycle must fail the plus/minus test"),
        }
    }

    #[test]
    fn free_example_fails_cross_direction() {
        // on the pair ({a↦1}, x̄) the a-direction sums sweep the support
        // while the b-direction tail never touches it
        let c = example_cocycle_free(2);
        let g = &c.group;
        let x = Configuration::with_overlay(
            g.clone(),
            c.shift.alphabet.clone(),
            [(g.parse_elem("a").unwrap(), 1)],
        );
        let pair = HomoclinicPair::new(x, c.shift.background_configuration()).unwrap();
        let a = g.parse_elem("a").unwrap();
        let b = g.parse_elem("b").unwrap();
        assert_eq!(limit_cocycle_plus(&c, &a, &pair).unwrap(), HElem::Mod(1));
        assert_eq!(limit_cocycle_plus(&c, &b, &pair).unwrap(), HElem::Mod(0));
        match cross_direction_test(&c, &a, &b, &[pair]).unwrap() {
            TestOutcome::Obstruction(cert) => assert!(cert.replay(&c).unwrap()),
            TestOutcome::Pass => panic!("the free sign cocycle must fail across directions"),
        }
    }

    #[test]
    fn fixed_points_obstruct_the_sign_cocycles() {
        for c in [example_cocycle_z(), example_cocycle_free(2)] {
            match fixed_point_obstruction(&c).unwrap() {
                TestOutcome::Obstruction(cert) => {
                    assert_eq!(cert.kind(), "fixed_point_mismatch");
                    assert!(cert.replay(&c).unwrap());
                }
                TestOutcome::Pass => panic!("constant configurations must disagree"),
            }
        }
    }

    #[test]
    fn homomorphism_cocycles_pass_every_test() {
        use crate::cocycle::{make_local_cocycle, CocycleCaps};
        use crate::coeff::{CoeffGroup, CoeffSpec};
        use crate::group::{GroupContext, GroupSpec};
        use crate::shift::{Alphabet, Subshift};
        use std::collections::BTreeMap;

        let group = GroupContext::new(GroupSpec::FreeAbelian { d: 2 }).unwrap();
        let shift = Subshift::full(group.clone(), Alphabet::binary()).unwrap();
        let target = CoeffGroup::new(CoeffSpec::Cyclic { n: 2 }).unwrap();
        let tables: BTreeMap<usize, Vec<crate::coeff::HElem>> = (0..4)
            .map(|gi| (gi, vec![crate::coeff::HElem::Mod(1); 2]))
            .collect();
        let c = make_local_cocycle(
            shift,
            target,
            vec![group.identity()],
            tables,
            CocycleCaps::default(),
        )
        .unwrap();
        let g1 = group.parse_elem("(1,0)").unwrap();
        let g2 = group.parse_elem("(0,1)").unwrap();
        let x = Configuration::with_overlay(
            group.clone(),
            c.shift.alphabet.clone(),
            [(group.identity(), 1)],
        );
        let pair = HomoclinicPair::new(x, c.shift.background_configuration()).unwrap();
        let pairs = vec![pair];
        assert!(plus_minus_test(&c, &g1, &pairs).unwrap().passed());
        assert!(cross_direction_test(&c, &g1, &g2, &pairs).unwrap().passed());
        assert!(fixed_point_obstruction(&c).unwrap().passed());
    }

    #[test]
    fn empty_path_transports_trivially() {
        let c = example_cocycle_z();
        let x = c.shift.background_configuration();
        let far = c.group.parse_elem("(9)").unwrap();
        assert!(path_transport(&c, &[], &far, &x, &x).unwrap());
    }

    #[test]
    fn path_into_the_forbidden_ball_is_rejected() {
        let c = example_cocycle_z();
        let g = &c.group;
        let x =
            Configuration::with_overlay(g.clone(), c.shift.alphabet.clone(), [(g.identity(), 1)]);
        let y = c.shift.background_configuration();
        // start right inside W·B(r_D): window ⊆ B(2), r_D = 0
        let start = g.parse_elem("(1)").unwrap();
        let step = vec![0usize];
        match path_transport(&c, &step, &start, &x, &y) {
            Err(CocycleError::SeparationViolated { step: 0, .. }) => {}
            other => panic!("expected separation violation, got {other:?}"),
        }
    }
}
