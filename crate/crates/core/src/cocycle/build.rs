//! Construction and validation of locally constant cocycles.
//!
//! Validation enumerates patterns on dependency windows as raw digit
//! vectors with per-step index extraction, so exhaustive checks stay within
//! integer arithmetic. The inverse law `c(s^{-1}, x) = c(s, s^{-1}x)^{-1}`
//! is checked as triviality of the word `s s^{-1}`, the same machinery as
//! the relators.

use super::{
    index_to_values, CocycleCaps, CocycleError, GenRule, LocalCocycle, ValidationCertificate,
    ValidationMode,
};
use crate::coeff::{CoeffGroup, CoeffSpec, HElem};
use crate::group::{Elem, GroupContext};
use crate::shift::{Alphabet, Subshift};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Builds and validates a cocycle from per-generator rule tables over a
/// common window. Rules may be given for one generator of each inverse
/// pair (the partner is synthesized through the inverse law) or for both
/// (then the law is checked). Every defining relator is checked against
/// window patterns, exhaustively when the pattern space fits under the cap
/// and on an exhaustive core plus seeded random samples otherwise.
pub fn make_local_cocycle(
    shift: Arc<Subshift>,
    target: Arc<CoeffGroup>,
    window: Vec<Elem>,
    tables: BTreeMap<usize, Vec<HElem>>,
    caps: CocycleCaps,
) -> Result<LocalCocycle, CocycleError> {
    let group = shift.group.clone();
    let window = normalize_window(&group, window)?;
    let a = shift.alphabet.len();
    let expected = a
        .checked_pow(window.len() as u32)
        .filter(|&s| s <= caps.exhaustive_patterns)
        .ok_or(CocycleError::CapExceeded {
            size: usize::MAX,
            cap: caps.exhaustive_patterns,
        })?;

    let n_gens = group.generators().len();
    let mut rules: Vec<Option<GenRule>> = vec![None; n_gens];
    for (gi, table) in tables {
        if table.len() != expected {
            return Err(CocycleError::RuleSize {
                gen: group.generators()[gi].name.clone(),
                got: table.len(),
                expected,
            });
        }
        for h in &table {
            validate_target_elem(&target, h)?;
        }
        rules[gi] = Some(GenRule {
            window: window.clone(),
            table,
        });
    }

    for gi in 0..n_gens {
        let inv = group.generators()[gi].inverse;
        if rules[gi].is_none() && rules[inv].is_none() {
            return Err(CocycleError::RuleMissing(
                group.generators()[gi].name.clone(),
            ));
        }
    }
    for gi in 0..n_gens {
        if rules[gi].is_some() {
            continue;
        }
        let inv = group.generators()[gi].inverse;
        let src = rules[inv].as_ref().expect("pair checked above");
        rules[gi] = Some(synthesize_inverse_rule(&group, a, &target, inv, src));
    }
    let rules: Vec<GenRule> = rules.into_iter().map(Option::unwrap).collect();
    assemble_and_validate(shift, target, rules, caps)
}

/// Variant of [`make_local_cocycle`] taking fully formed per-generator
/// rules (each with its own window); missing inverse partners are
/// synthesized, then the usual validation runs.
pub fn make_local_cocycle_full(
    shift: Arc<Subshift>,
    target: Arc<CoeffGroup>,
    given: BTreeMap<usize, GenRule>,
    caps: CocycleCaps,
) -> Result<LocalCocycle, CocycleError> {
    let group = shift.group.clone();
    let a = shift.alphabet.len();
    let n_gens = group.generators().len();
    let mut rules: Vec<Option<GenRule>> = vec![None; n_gens];
    for (gi, rule) in given {
        let expected = a
            .checked_pow(rule.window.len() as u32)
            .filter(|&s| s <= caps.exhaustive_patterns)
            .ok_or(CocycleError::CapExceeded {
                size: usize::MAX,
                cap: caps.exhaustive_patterns,
            })?;
        if rule.table.len() != expected {
            return Err(CocycleError::RuleSize {
                gen: group.generators()[gi].name.clone(),
                got: rule.table.len(),
                expected,
            });
        }
        if !rule.window.windows(2).all(|w| w[0] < w[1]) {
            return Err(CocycleError::WindowMissingIdentity);
        }
        for h in &rule.table {
            validate_target_elem(&target, h)?;
        }
        rules[gi] = Some(rule);
    }
    for gi in 0..n_gens {
        let inv = group.generators()[gi].inverse;
        if rules[gi].is_none() && rules[inv].is_none() {
            return Err(CocycleError::RuleMissing(
                group.generators()[gi].name.clone(),
            ));
        }
    }
    for gi in 0..n_gens {
        if rules[gi].is_some() {
            continue;
        }
        let inv = group.generators()[gi].inverse;
        let src = rules[inv].as_ref().expect("pair checked above");
        rules[gi] = Some(synthesize_inverse_rule(&group, a, &target, inv, src));
    }
    let rules: Vec<GenRule> = rules.into_iter().map(Option::unwrap).collect();
    assemble_and_validate(shift, target, rules, caps)
}

/// Shared tail of the constructors: assemble, then check inverse pairs and
/// relators.
fn assemble_and_validate(
    shift: Arc<Subshift>,
    target: Arc<CoeffGroup>,
    rules: Vec<GenRule>,
    caps: CocycleCaps,
) -> Result<LocalCocycle, CocycleError> {
    let group = shift.group.clone();
    let a = shift.alphabet.len();
    // drop window coordinates the tables do not read; synthesized and
    // coboundary rules often carry dead sites, and every radius downstream
    // (dependency windows, untwist constants) tightens with them gone
    let rules: Vec<GenRule> = rules.into_iter().map(|r| minimize_rule(a, r)).collect();
    let mut cocycle = LocalCocycle {
        group: group.clone(),
        shift,
        target,
        window: union_windows(&group, &rules),
        rules,
        certificate: ValidationCertificate {
            relator_mode: ValidationMode::Exhaustive,
            inverse_mode: ValidationMode::Exhaustive,
            relators_checked: 0,
        },
        caps,
    };

    let mut inverse_mode = ValidationMode::Exhaustive;
    for gi in 0..group.generators().len() {
        let inv = group.generators()[gi].inverse;
        if gi < inv {
            let gen_name = group.generators()[gi].name.clone();
            let mode = check_word_trivial(&cocycle, &[gi, inv], |_| {
                CocycleError::InverseInconsistency {
                    gen: gen_name.clone(),
                }
            })?;
            if let ValidationMode::Sampled { .. } = mode {
                inverse_mode = mode;
            }
        }
    }

    let mut relator_mode = ValidationMode::Exhaustive;
    let mut checked = 0usize;
    for rel in group.relators() {
        debug_assert!(group.eval_word(rel).is_identity());
        let rel_name = rel
            .iter()
            .map(|&gi| group.generators()[gi].name.clone())
            .collect::<Vec<_>>()
            .join(" ");
        let mode = check_word_trivial(&cocycle, rel, |value| CocycleError::RelatorViolation {
            relator: rel_name.clone(),
            value,
        })?;
        if let ValidationMode::Sampled { .. } = mode {
            relator_mode = mode;
        }
        checked += 1;
    }
    cocycle.certificate = ValidationCertificate {
        relator_mode,
        inverse_mode,
        relators_checked: checked,
    };
    Ok(cocycle)
}

fn normalize_window(group: &GroupContext, window: Vec<Elem>) -> Result<Vec<Elem>, CocycleError> {
    let set: BTreeSet<Elem> = window.into_iter().collect();
    if !set.contains(&group.identity()) {
        return Err(CocycleError::WindowMissingIdentity);
    }
    Ok(set.into_iter().collect())
}

fn union_windows(group: &GroupContext, rules: &[GenRule]) -> Vec<Elem> {
    let mut set: BTreeSet<Elem> = rules.iter().flat_map(|r| r.window.clone()).collect();
    set.insert(group.identity());
    set.into_iter().collect()
}

/// Projects a rule onto the window coordinates its table depends on.
fn minimize_rule(alphabet_size: usize, rule: GenRule) -> GenRule {
    let n = rule.window.len();
    let mut live = Vec::new();
    let mut stride = 1usize;
    for j in 0..n {
        let depends = (0..rule.table.len()).any(|idx| {
            let digit = idx / stride % alphabet_size;
            digit != 0 && rule.table[idx] != rule.table[idx - digit * stride]
        });
        if depends {
            live.push((j, stride));
        }
        stride *= alphabet_size;
    }
    if live.len() == n {
        return rule;
    }
    let window: Vec<Elem> = live.iter().map(|&(j, _)| rule.window[j].clone()).collect();
    let size = alphabet_size.pow(window.len() as u32);
    let table = (0..size)
        .map(|mut idx| {
            let mut src = 0usize;
            for &(_, stride) in &live {
                src += idx % alphabet_size * stride;
                idx /= alphabet_size;
            }
            rule.table[src].clone()
        })
        .collect();
    GenRule { window, table }
}

fn validate_target_elem(target: &CoeffGroup, h: &HElem) -> Result<(), CocycleError> {
    let ok = match (target.spec(), h) {
        (CoeffSpec::Cyclic { n }, HElem::Mod(x)) => x < n,
        (CoeffSpec::Table { elements, .. }, HElem::Idx(i)) => *i < elements.len(),
        (CoeffSpec::FreeAbelian { k }, HElem::Vec(v)) => v.len() == *k,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(CocycleError::Coeff(crate::coeff::CoeffError::ElemParse(
            format!("{h}"),
        )))
    }
}

/// Rule for `s^{-1}` from the rule for `s`: it reads the window `s·W` and
/// returns `c(s, s^{-1}x)^{-1}`, computed by pure index remapping.
fn synthesize_inverse_rule(
    group: &GroupContext,
    alphabet_size: usize,
    target: &CoeffGroup,
    src_idx: usize,
    src: &GenRule,
) -> GenRule {
    let s = &group.generators()[src_idx].elem;
    let window: Vec<Elem> = {
        let set: BTreeSet<Elem> = src.window.iter().map(|w| group.multiply(s, w)).collect();
        set.into_iter().collect()
    };
    // (s^{-1}x)_w = x_{s·w}: source digit j comes from position of s·w_j
    let positions: Vec<usize> = src
        .window
        .iter()
        .map(|w| {
            let site = group.multiply(s, w);
            window.binary_search(&site).expect("site is in s·W")
        })
        .collect();
    let size = alphabet_size.pow(window.len() as u32);
    let mut digits = vec![0u8; window.len()];
    let mut table = Vec::with_capacity(size);
    for _ in 0..size {
        let src_index = positions
            .iter()
            .rev()
            .fold(0usize, |acc, &p| acc * alphabet_size + digits[p] as usize);
        table.push(target.inverse(&src.table[src_index]));
        advance(&mut digits, alphabet_size);
    }
    GenRule { window, table }
}

fn advance(digits: &mut [u8], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if (*d as usize) < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Checks that the word (which must multiply out to the identity in the
/// group) evaluates to the identity of `H` on every pattern of its
/// dependency window, exhaustively or sampled per the caps.
fn check_word_trivial(
    cocycle: &LocalCocycle,
    word: &[usize],
    mk_err: impl Fn(String) -> CocycleError,
) -> Result<ValidationMode, CocycleError> {
    let a = cocycle.shift.alphabet.len();
    let target = &cocycle.target;
    let dep = cocycle.word_dependence_window(word);
    let steps = extraction_steps(cocycle, word, &dep);

    let eval = |digits: &[u8]| -> HElem {
        let mut acc = target.identity();
        for (gi, positions) in steps.iter().rev() {
            let idx = positions
                .iter()
                .rev()
                .fold(0usize, |acc, &p| acc * a + digits[p] as usize);
            acc = target.multiply(&cocycle.rules()[*gi].table[idx], &acc);
        }
        acc
    };
    let id = target.identity();
    let fail = |digits: &[u8], value: HElem| -> CocycleError {
        let values = digits
            .iter()
            .zip(&dep)
            .map(|(&d, g)| format!("{}={}", cocycle.group.format_elem(g), d))
            .collect::<Vec<_>>()
            .join(" ");
        mk_err(format!(
            "{} on pattern [{values}]",
            cocycle.target.format_elem(&value)
        ))
    };

    match a.checked_pow(dep.len() as u32) {
        Some(size) if size <= cocycle.caps.exhaustive_patterns => {
            let mut digits = vec![0u8; dep.len()];
            for _ in 0..size {
                let v = eval(&digits);
                if v != id {
                    return Err(fail(&digits, v));
                }
                advance(&mut digits, a);
            }
            Ok(ValidationMode::Exhaustive)
        }
        _ => {
            // exhaustive core over the sites nearest the identity
            let mut ordered: Vec<(u64, usize)> = dep
                .iter()
                .enumerate()
                .map(|(i, g)| (cocycle.group.word_length(g).unwrap_or(u64::MAX), i))
                .collect();
            ordered.sort();
            let mut core: Vec<usize> = Vec::new();
            while core.len() < ordered.len() && a.pow((core.len() + 1) as u32) <= 4096 {
                core.push(ordered[core.len()].1);
            }
            let mut digits = vec![0u8; dep.len()];
            let mut core_digits = vec![0u8; core.len()];
            loop {
                for (j, &i) in core.iter().enumerate() {
                    digits[i] = core_digits[j];
                }
                let v = eval(&digits);
                if v != id {
                    return Err(fail(&digits, v));
                }
                if !advance(&mut core_digits, a) {
                    break;
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cocycle.caps.seed);
            for _ in 0..cocycle.caps.sampled_patterns {
                for d in digits.iter_mut() {
                    *d = rng.random_range(0..a) as u8;
                }
                let v = eval(&digits);
                if v != id {
                    return Err(fail(&digits, v));
                }
            }
            Ok(ValidationMode::Sampled {
                samples: cocycle.caps.sampled_patterns,
                seed: cocycle.caps.seed,
            })
        }
    }
}

/// For each word position, the generator index and, for each site of its
/// rule window, the position inside `dep` holding the digit that factor
/// reads: factor `i` of `c(w, x)` reads `x` at `q_i^{-1}·W_{w_i}` where
/// `q_i` is the suffix product after position `i`.
fn extraction_steps(
    cocycle: &LocalCocycle,
    word: &[usize],
    dep: &[Elem],
) -> Vec<(usize, Vec<usize>)> {
    let group = &cocycle.group;
    let mut steps = vec![(0usize, Vec::new()); word.len()];
    let mut suffix = group.identity();
    for (i, &gi) in word.iter().enumerate().rev() {
        let suffix_inv = group.inverse(&suffix);
        let positions: Vec<usize> = cocycle.rules()[gi]
            .window
            .iter()
            .map(|w| {
                let site = group.multiply(&suffix_inv, w);
                dep.binary_search(&site)
                    .expect("site is in dep by construction")
            })
            .collect();
        steps[i] = (gi, positions);
        suffix = group.multiply(&group.generators()[gi].elem, &suffix);
    }
    steps
}

/// The coboundary of a window rule twisted by a homomorphism:
/// `c(s, x) = b(sx)^{-1} φ(s) b(x)` per generator, on the window
/// `W_b ∪ s^{-1}W_b`. Valid by construction; validation still runs to
/// produce an honest certificate.
pub fn coboundary_cocycle(
    shift: Arc<Subshift>,
    target: Arc<CoeffGroup>,
    b_window: Vec<Elem>,
    b_table: Vec<HElem>,
    phi: &BTreeMap<usize, HElem>,
    caps: CocycleCaps,
) -> Result<LocalCocycle, CocycleError> {
    let group = shift.group.clone();
    let b_window = normalize_window(&group, b_window)?;
    let a = shift.alphabet.len();
    let b_size = a
        .checked_pow(b_window.len() as u32)
        .filter(|&s| s <= caps.exhaustive_patterns)
        .ok_or(CocycleError::CapExceeded {
            size: usize::MAX,
            cap: caps.exhaustive_patterns,
        })?;
    if b_table.len() != b_size {
        return Err(CocycleError::RuleSize {
            gen: "transfer rule".into(),
            got: b_table.len(),
            expected: b_size,
        });
    }
    for h in &b_table {
        validate_target_elem(&target, h)?;
    }
    let phi = complete_homomorphism(&group, &target, phi)?;

    let mut rules = Vec::with_capacity(group.generators().len());
    for (gi, gen) in group.generators().iter().enumerate() {
        let s_inv = group.inverse(&gen.elem);
        let window: Vec<Elem> = {
            let mut set: BTreeSet<Elem> = b_window.iter().cloned().collect();
            for w in &b_window {
                set.insert(group.multiply(&s_inv, w));
            }
            set.into_iter().collect()
        };
        // b(x) reads W_b; b(sx) reads s^{-1}W_b
        let pos_b: Vec<usize> = b_window
            .iter()
            .map(|w| window.binary_search(w).expect("W_b ⊆ window"))
            .collect();
        let pos_shifted: Vec<usize> = b_window
            .iter()
            .map(|w| {
                let site = group.multiply(&s_inv, w);
                window.binary_search(&site).expect("s^{-1}W_b ⊆ window")
            })
            .collect();
        let size = a.pow(window.len() as u32);
        let mut digits = vec![0u8; window.len()];
        let mut table = Vec::with_capacity(size);
        let extract = |positions: &[usize], digits: &[u8]| -> usize {
            positions
                .iter()
                .rev()
                .fold(0usize, |acc, &p| acc * a + digits[p] as usize)
        };
        for _ in 0..size {
            let b_here = &b_table[extract(&pos_b, &digits)];
            let b_there = &b_table[extract(&pos_shifted, &digits)];
            table.push(
                target.multiply(&target.multiply(&target.inverse(b_there), &phi[gi]), b_here),
            );
            advance(&mut digits, a);
        }
        rules.push(GenRule { window, table });
    }
    assemble_and_validate(shift, target, rules, caps)
}

/// Extends `φ` from positive generators to the whole generating list and
/// checks it kills every relator.
pub fn complete_homomorphism(
    group: &GroupContext,
    target: &CoeffGroup,
    phi: &BTreeMap<usize, HElem>,
) -> Result<Vec<HElem>, CocycleError> {
    let n = group.generators().len();
    let mut full: Vec<Option<HElem>> = vec![None; n];
    for (&gi, h) in phi {
        full[gi] = Some(h.clone());
    }
    for gi in 0..n {
        if full[gi].is_none() {
            let inv = group.generators()[gi].inverse;
            match full[inv].clone() {
                Some(h) => full[gi] = Some(target.inverse(&h)),
                None => {
                    return Err(CocycleError::HomomorphismInvalid(format!(
                        "no value for generator {}",
                        group.generators()[gi].name
                    )))
                }
            }
        }
    }
    let full: Vec<HElem> = full.into_iter().map(Option::unwrap).collect();
    for (gi, gen) in group.generators().iter().enumerate() {
        if full[gen.inverse] != target.inverse(&full[gi]) {
            return Err(CocycleError::HomomorphismInvalid(format!(
                "φ({}) is not φ({})^-1",
                group.generators()[gen.inverse].name,
                gen.name
            )));
        }
    }
    for rel in group.relators() {
        let mut acc = target.identity();
        for &gi in rel {
            acc = target.multiply(&acc, &full[gi]);
        }
        if acc != target.identity() {
            let name = rel
                .iter()
                .map(|&gi| group.generators()[gi].name.clone())
                .collect::<Vec<_>>()
                .join(" ");
            return Err(CocycleError::HomomorphismInvalid(name));
        }
    }
    Ok(full)
}

/// The sign cocycle `c(g, x) = x_g` on the full binary shift over Z
/// (values in Z/2), the classical obstruction witness.
pub fn example_cocycle_z() -> LocalCocycle {
    use crate::group::GroupSpec;
    let group = GroupContext::new(GroupSpec::FreeAbelian { d: 1 }).unwrap();
    let shift = Subshift::full(group.clone(), Alphabet::binary()).unwrap();
    let target = CoeffGroup::new(CoeffSpec::Cyclic { n: 2 }).unwrap();
    let window = vec![group.identity(), group.parse_elem("(1)").unwrap()];
    let site = group.parse_elem("(1)").unwrap();
    let table = rule_reading_site(&shift, &window, &site);
    make_local_cocycle(
        shift,
        target,
        window,
        BTreeMap::from([(0usize, table)]),
        CocycleCaps::default(),
    )
    .expect("the free direction admits the sign rule")
}

/// The free-group analogue: `c(a_i, x) = x_{a_i}` on the full binary shift
/// over the free group of rank `r`; well-defined since there are no
/// relators.
pub fn example_cocycle_free(r: u32) -> LocalCocycle {
    use crate::group::GroupSpec;
    let group = GroupContext::new(GroupSpec::Free { r }).unwrap();
    let shift = Subshift::full(group.clone(), Alphabet::binary()).unwrap();
    let target = CoeffGroup::new(CoeffSpec::Cyclic { n: 2 }).unwrap();
    let mut window = vec![group.identity()];
    for i in 0..r as usize {
        window.push(group.generators()[2 * i].elem.clone());
    }
    let mut tables = BTreeMap::new();
    for i in 0..r as usize {
        let site = group.generators()[2 * i].elem.clone();
        tables.insert(2 * i, rule_reading_site(&shift, &window, &site));
    }
    make_local_cocycle(shift, target, window, tables, CocycleCaps::default())
        .expect("free groups have no relators to violate")
}

fn rule_reading_site(shift: &Subshift, window: &[Elem], site: &Elem) -> Vec<HElem> {
    let sorted: Vec<Elem> = {
        let set: BTreeSet<Elem> = window.iter().cloned().collect();
        set.into_iter().collect()
    };
    let a = shift.alphabet.len();
    (0..a.pow(sorted.len() as u32))
        .map(|idx| {
            let values = index_to_values(a, &sorted, idx);
            HElem::Mod(values[site] as u32)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::shift::Configuration;

    fn z2_shift() -> Arc<Subshift> {
        let g = GroupContext::new(GroupSpec::FreeAbelian { d: 2 }).unwrap();
        Subshift::full(g, Alphabet::binary()).unwrap()
    }

    fn mod2() -> Arc<CoeffGroup> {
        CoeffGroup::new(CoeffSpec::Cyclic { n: 2 }).unwrap()
    }

    #[test]
    fn constant_rules_make_a_homomorphism_cocycle() {
        let shift = z2_shift();
        let target = mod2();
        let g = shift.group.clone();
        let window = vec![g.identity()];
        let tables = BTreeMap::from([
            (0usize, vec![HElem::Mod(1); 2]),
            (2usize, vec![HElem::Mod(0); 2]),
        ]);
        let c = make_local_cocycle(shift, target, window, tables, CocycleCaps::default()).unwrap();
        assert_eq!(c.certificate.relator_mode, ValidationMode::Exhaustive);
        let x = c.shift.background_configuration();
        assert_eq!(
            c.evaluate(&g.parse_elem("(3,2)").unwrap(), &x),
            HElem::Mod(1)
        );
        assert_eq!(c.evaluate(&g.identity(), &x), HElem::Mod(0));
    }

    #[test]
    fn site_rule_on_z2_violates_the_commutator() {
        // c(e1, x) = x_e, c(e2, x) = 0 cannot satisfy the commutator relator
        let shift = z2_shift();
        let target = mod2();
        let g = shift.group.clone();
        let window = vec![g.identity()];
        let site = g.identity();
        let tables = BTreeMap::from([
            (0usize, rule_reading_site(&shift, &window, &site)),
            (2usize, vec![HElem::Mod(0); 2]),
        ]);
        match make_local_cocycle(shift, target, window, tables, CocycleCaps::default()) {
            Err(CocycleError::RelatorViolation { .. }) => {}
            other => panic!("expected a relator violation, got {other:?}"),
        }
    }

    #[test]
    fn example_z_evaluates_like_the_sum_of_sites() {
        let c = example_cocycle_z();
        let g = c.group.clone();
        let x = Configuration::with_overlay(
            g.clone(),
            c.shift.alphabet.clone(),
            [(g.parse_elem("(1)").unwrap(), 1)],
        );
        // evaluate(1, x) = x_{(1)}
        assert_eq!(c.evaluate(&g.parse_elem("(1)").unwrap(), &x), HElem::Mod(1));
        // evaluate(2, {1↦1}) = x_{(1)} + x_{(0)} = 1
        assert_eq!(c.evaluate(&g.parse_elem("(2)").unwrap(), &x), HElem::Mod(1));
        // evaluate(e, x) = identity
        assert_eq!(c.evaluate(&g.identity(), &x), HElem::Mod(0));
        // synthesized inverse: c(-1, x) = x_{(2)}
        let x2 = Configuration::with_overlay(
            g.clone(),
            c.shift.alphabet.clone(),
            [(g.parse_elem("(2)").unwrap(), 1)],
        );
        assert_eq!(
            c.evaluate(&g.parse_elem("(-1)").unwrap(), &x2),
            HElem::Mod(1)
        );
    }

    #[test]
    fn example_free_reads_generator_sites() {
        let c = example_cocycle_free(2);
        let g = c.group.clone();
        let x = Configuration::with_overlay(
            g.clone(),
            c.shift.alphabet.clone(),
            [(g.parse_elem("a").unwrap(), 1)],
        );
        assert_eq!(c.evaluate(&g.parse_elem("a").unwrap(), &x), HElem::Mod(1));
        assert_eq!(c.evaluate(&g.parse_elem("b").unwrap(), &x), HElem::Mod(0));
    }

    #[test]
    fn coboundary_satisfies_the_transfer_equation_pointwise() {
        let shift = z2_shift();
        let target = mod2();
        let g = shift.group.clone();
        let b_window: Vec<Elem> = g.ball(1).unwrap().elems().cloned().collect();
        let sorted: Vec<Elem> = {
            let s: BTreeSet<Elem> = b_window.iter().cloned().collect();
            s.into_iter().collect()
        };
        // b(x) = x_e
        let a = shift.alphabet.len();
        let b_table: Vec<HElem> = (0..a.pow(sorted.len() as u32))
            .map(|idx| {
                let v = index_to_values(a, &sorted, idx);
                HElem::Mod(v[&g.identity()] as u32)
            })
            .collect();
        let phi = BTreeMap::from([(0usize, HElem::Mod(1)), (2usize, HElem::Mod(0))]);
        let c = coboundary_cocycle(
            shift.clone(),
            target.clone(),
            b_window,
            b_table,
            &phi,
            CocycleCaps::default(),
        )
        .unwrap();

        // c(s, x) = b(sx)^{-1} φ(s) b(x) with b(x) = x_e, over Z/2
        let x = Configuration::with_overlay(g.clone(), shift.alphabet.clone(), [(g.identity(), 1)]);
        let e1 = g.parse_elem("(1,0)").unwrap();
        // b(x) = 1, b(e1·x) = x_{(-1,0)} = 0, φ(e1) = 1
        assert_eq!(c.evaluate(&e1, &x), HElem::Mod(0));
        let e2 = g.parse_elem("(0,1)").unwrap();
        // φ(e2) = 0 so c(e2, x) = x_e + x_{(0,-1)} = 1
        assert_eq!(c.evaluate(&e2, &x), HElem::Mod(1));
    }

    #[test]
    fn constant_transfer_conjugates_the_homomorphism() {
        use crate::coeff::s3_spec;
        let g = GroupContext::new(GroupSpec::FreeAbelian { d: 1 }).unwrap();
        let shift = Subshift::full(g.clone(), Alphabet::binary()).unwrap();
        let target = CoeffGroup::new(s3_spec()).unwrap();
        let h0 = target.parse_elem("(12)").unwrap();
        let rot = target.parse_elem("(123)").unwrap();
        let b_window = vec![g.identity()];
        let b_table = vec![h0.clone(), h0.clone()];
        let phi = BTreeMap::from([(0usize, rot.clone())]);
        let c = coboundary_cocycle(
            shift,
            target.clone(),
            b_window,
            b_table,
            &phi,
            CocycleCaps::default(),
        )
        .unwrap();
        // c(s, x) = h0^{-1} φ(s) h0 for every x
        let expected = target.multiply(&target.multiply(&target.inverse(&h0), &rot), &h0);
        let x = c.shift.background_configuration();
        assert_eq!(c.evaluate(&g.parse_elem("(1)").unwrap(), &x), expected);
    }

    #[test]
    fn trivial_target_collapses_everything() {
        let g = GroupContext::new(GroupSpec::FreeAbelian { d: 2 }).unwrap();
        let shift = Subshift::full(g.clone(), Alphabet::binary()).unwrap();
        let target = CoeffGroup::new(CoeffSpec::Cyclic { n: 1 }).unwrap();
        let b_window = vec![g.identity()];
        let b_table = vec![target.identity(), target.identity()];
        let phi = BTreeMap::from([(0usize, target.identity()), (2usize, target.identity())]);
        let c = coboundary_cocycle(
            shift,
            target.clone(),
            b_window,
            b_table,
            &phi,
            CocycleCaps::default(),
        )
        .unwrap();
        let x =
            Configuration::with_overlay(g.clone(), c.shift.alphabet.clone(), [(g.identity(), 1)]);
        assert_eq!(
            c.evaluate(&g.parse_elem("(3,-2)").unwrap(), &x),
            target.identity()
        );
    }

    #[test]
    fn invalid_homomorphism_is_rejected() {
        use crate::coeff::s3_spec;
        let g = GroupContext::new(GroupSpec::FreeAbelian { d: 2 }).unwrap();
        let shift = Subshift::full(g.clone(), Alphabet::binary()).unwrap();
        let target = CoeffGroup::new(s3_spec()).unwrap();
        // φ(e1) = (12), φ(e2) = (123) do not commute, so the commutator
        // relator is not killed
        let phi = BTreeMap::from([
            (0usize, target.parse_elem("(12)").unwrap()),
            (2usize, target.parse_elem("(123)").unwrap()),
        ]);
        let b_window = vec![g.identity()];
        let b_table = vec![target.identity(); 2];
        match coboundary_cocycle(
            shift,
            target,
            b_window,
            b_table,
            &phi,
            CocycleCaps::default(),
        ) {
            Err(CocycleError::HomomorphismInvalid(_)) => {}
            other => panic!("expected HomomorphismInvalid, got {other:?}"),
        }
    }

    #[test]
    fn dead_window_sites_are_projected_away() {
        // constant rules end with empty windows even when declared on B(1),
        // and the site-reading example keeps exactly the site it reads
        let shift = z2_shift();
        let g = shift.group.clone();
        let window: Vec<Elem> = g.ball(1).unwrap().elems().cloned().collect();
        let size = 2usize.pow(window.len() as u32);
        let tables = BTreeMap::from([
            (0usize, vec![HElem::Mod(1); size]),
            (2usize, vec![HElem::Mod(0); size]),
        ]);
        let c = make_local_cocycle(shift, mod2(), window, tables, CocycleCaps::default()).unwrap();
        for rule in c.rules() {
            assert!(rule.window.is_empty());
            assert_eq!(rule.table.len(), 1);
        }
        assert_eq!(c.window, vec![g.identity()]);

        let z = example_cocycle_z();
        let site = z.group.parse_elem("(1)").unwrap();
        assert_eq!(z.rule(0).window, vec![site]);
    }

    #[test]
    fn construction_error_paths() {
        let shift = z2_shift();
        let target = mod2();
        let g = shift.group.clone();

        // missing both rules of a pair
        let only_e1 = BTreeMap::from([(0usize, vec![HElem::Mod(0); 2])]);
        match make_local_cocycle(
            shift.clone(),
            target.clone(),
            vec![g.identity()],
            only_e1,
            CocycleCaps::default(),
        ) {
            Err(CocycleError::RuleMissing(name)) => assert_eq!(name, "e2"),
            other => panic!("expected RuleMissing, got {other:?}"),
        }

        // window must contain the identity
        let err = make_local_cocycle(
            shift.clone(),
            target.clone(),
            vec![g.parse_elem("(1,0)").unwrap()],
            BTreeMap::new(),
            CocycleCaps::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CocycleError::WindowMissingIdentity));

        // wrong table size
        let bad_size = BTreeMap::from([(0usize, vec![HElem::Mod(0); 3])]);
        let err = make_local_cocycle(
            shift.clone(),
            target.clone(),
            vec![g.identity()],
            bad_size,
            CocycleCaps::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            CocycleError::RuleSize {
                expected: 2,
                got: 3,
                ..
            }
        ));

        // declared inverse pair with inconsistent tables: a site-reading
        // rule for e1 cannot have a constant inverse on the same window
        let inconsistent = BTreeMap::from([
            (0usize, vec![HElem::Mod(0), HElem::Mod(1)]),
            (1usize, vec![HElem::Mod(0), HElem::Mod(0)]),
            (2usize, vec![HElem::Mod(0); 2]),
        ]);
        match make_local_cocycle(
            shift,
            target,
            vec![g.identity()],
            inconsistent,
            CocycleCaps::default(),
        ) {
            Err(CocycleError::InverseInconsistency { gen }) => assert_eq!(gen, "e1"),
            other => panic!("expected InverseInconsistency, got {other:?}"),
        }
    }

    #[test]
    fn nonabelian_coboundary_round_trips_pointwise() {
        // build an S3-valued coboundary on Z^2 and check the defining
        // equation directly on random configurations
        use crate::coeff::s3_spec;
        use rand::{Rng, SeedableRng};
        let g = GroupContext::new(GroupSpec::FreeAbelian { d: 2 }).unwrap();
        let shift = Subshift::full(g.clone(), Alphabet::binary()).unwrap();
        let target = CoeffGroup::new(s3_spec()).unwrap();
        let elems = target.elements().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let b_window: Vec<Elem> = g.ball(1).unwrap().elems().cloned().collect();
        let sorted: Vec<Elem> = {
            let s: BTreeSet<Elem> = b_window.iter().cloned().collect();
            s.into_iter().collect()
        };
        let a = shift.alphabet.len();
        let b_table: Vec<HElem> = (0..a.pow(sorted.len() as u32))
            .map(|_| elems[rng.random_range(0..elems.len())].clone())
            .collect();
        // φ must commute for Z^2: pick powers of one element
        let rot = target.parse_elem("(123)").unwrap();
        let phi = BTreeMap::from([(0usize, rot.clone()), (2usize, rot.clone())]);
        let c = coboundary_cocycle(
            shift.clone(),
            target.clone(),
            b_window,
            b_table.clone(),
            &phi,
            CocycleCaps::default(),
        )
        .unwrap();

        let b_of = |x: &Configuration| -> HElem {
            b_table[super::super::config_pattern_index(a, &sorted, x)].clone()
        };
        for _ in 0..100 {
            let mut x = shift.background_configuration();
            for site in g.ball(2).unwrap().elems() {
                if rng.random_range(0..2) == 1 {
                    x.set(site.clone(), 1);
                }
            }
            let gi = rng.random_range(0..4);
            let gen = &g.generators()[gi];
            let lhs = c.gen_value(gi, &x);
            let phi_full = complete_homomorphism(&g, &target, &phi).unwrap();
            let rhs = target.multiply(
                &target.multiply(&target.inverse(&b_of(&x.shifted(&gen.elem))), &phi_full[gi]),
                &b_of(&x),
            );
            assert_eq!(lhs, rhs);
        }
    }
}
