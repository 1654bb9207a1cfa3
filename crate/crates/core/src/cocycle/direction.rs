//! Precomputed evaluation plans for limits along a fixed direction.
//!
//! A battery run evaluates `c(g^n, x)` for thousands of configurations with
//! the same `g` and small `n`. Written along the repeated word `u^n`
//! (`u` a spelling of `g`), the factor at position `p` from the right reads
//! `x` at a translated window that depends only on `p`, so the whole site
//! geometry is computed once per direction and the per-pair work reduces to
//! table lookups. Results agree bit-for-bit with the reference path in
//! `limits.rs`; a test pins that equality.

use super::{CocycleError, LocalCocycle};
use crate::coeff::HElem;
use crate::group::Elem;
use crate::shift::{Configuration, HomoclinicPair};

pub(crate) struct DirectionEvaluator<'a> {
    cocycle: &'a LocalCocycle,
    direction: Elem,
    unit_len: usize,
    /// Per position from the right: generator index and its translated
    /// window sites.
    steps: Vec<(usize, Vec<Elem>)>,
    /// `g^{-k}·W_dep` for `k = 0..`, where `W_dep` is the window of `c(g,·)`.
    reach: Vec<Vec<Elem>>,
    /// Monotone certified lower bounds `L(k) ≤ ℓ(g^k)`.
    bounds: Vec<u64>,
    /// Max word length over `W_dep`.
    window_radius: u64,
    /// Largest difference-support radius the plan was sized for.
    max_support_len: u64,
}

impl<'a> DirectionEvaluator<'a> {
    /// Prepares a plan able to serve homoclinic pairs whose difference
    /// supports stay within `max_support_len`.
    pub(crate) fn new(
        cocycle: &'a LocalCocycle,
        direction: &Elem,
        max_support_len: u64,
    ) -> Result<Self, CocycleError> {
        let group = &cocycle.group;
        group.power_length_lower_bound(direction, 1)?;
        let unit_word = super::spelling_of(group, direction);
        let unit_len = unit_word.len().max(1);

        let dep = cocycle.dependence_window(direction);
        let mut window_radius = 0u64;
        for w in &dep {
            window_radius = window_radius.max(group.word_length(w)?);
        }

        // k ranges until the certified bound clears the support radius
        // plus the window radius; 5 extra powers cover the debug recheck.
        let threshold = max_support_len + window_radius;
        let mut bounds = vec![0u64];
        let mut k_cap = 1u64;
        loop {
            let b = group.power_length_lower_bound(direction, k_cap)?;
            bounds.push(b);
            if b > threshold {
                break;
            }
            k_cap += 1;
        }
        let n_max = (k_cap as usize) + 6;

        let mut steps = Vec::with_capacity(n_max * unit_len);
        let mut suffix = group.identity();
        for p in 0..n_max * unit_len {
            let gi = if unit_word.is_empty() {
                // torsion-free directions always spell at least one letter;
                // this branch is unreachable but keeps indexing total
                0
            } else {
                unit_word[unit_word.len() - 1 - (p % unit_word.len())]
            };
            let suffix_inv = group.inverse(&suffix);
            let sites: Vec<Elem> = cocycle.rules()[gi]
                .window
                .iter()
                .map(|w| group.multiply(&suffix_inv, w))
                .collect();
            steps.push((gi, sites));
            suffix = group.multiply(&group.generators()[gi].elem, &suffix);
        }

        let g_inv = group.inverse(direction);
        let mut reach = Vec::with_capacity(k_cap as usize + 1);
        reach.push(dep.clone());
        for k in 1..=k_cap as usize {
            let prev = &reach[k - 1];
            reach.push(prev.iter().map(|s| group.multiply(&g_inv, s)).collect());
        }

        Ok(DirectionEvaluator {
            cocycle,
            direction: direction.clone(),
            unit_len,
            steps,
            reach,
            bounds,
            window_radius,
            max_support_len,
        })
    }

    /// `c(g^n, x)` along the repeated spelling; equals `evaluate(g^n, x)`
    /// by relator validity.
    fn eval_power(&self, n: u64, x: &Configuration) -> HElem {
        let cocycle = self.cocycle;
        let a = cocycle.shift.alphabet.len();
        let constant = x.overlay().is_empty();
        let bg = x.background() as usize;
        let total = (n as usize) * self.unit_len;
        debug_assert!(total <= self.steps.len(), "plan too short for this power");
        let mut acc = cocycle.target.identity();
        for (gi, sites) in &self.steps[..total] {
            let rule = &cocycle.rules()[*gi];
            let idx = if constant {
                (0..sites.len()).fold(0usize, |acc, _| acc * a + bg)
            } else {
                sites
                    .iter()
                    .rev()
                    .fold(0usize, |acc, s| acc * a + x.value_at(s) as usize)
            };
            acc = cocycle.target.multiply(&rule.table[idx], &acc);
        }
        acc
    }

    /// Least `N` with `g^{-k}·W_dep ∩ D = ∅` for all `k ≥ N`, scanning the
    /// precomputed translates against the sorted difference support.
    fn stabilization_index(&self, diff: &[Elem], diff_radius: u64) -> u64 {
        let threshold = diff_radius + self.window_radius;
        let mut n_star = 0u64;
        for (k, sites) in self.reach.iter().enumerate() {
            if k > 0 && self.bounds[k] > threshold {
                break;
            }
            if sites.iter().any(|s| diff.binary_search(s).is_ok()) {
                n_star = (k as u64) + 1;
            }
        }
        n_star
    }

    /// Forward limit `c^{(g),+}(x, x')`, identical to
    /// `limits::limit_cocycle_plus` for this direction. Pairs whose
    /// difference support escapes the plan's sizing go through the
    /// reference path rather than an undersized scan.
    pub(crate) fn limit_plus(&self, pair: &HomoclinicPair) -> Result<HElem, CocycleError> {
        if pair.diff.is_empty() {
            return Ok(self.cocycle.target.identity());
        }
        let mut diff_radius = 0u64;
        for d in &pair.diff {
            diff_radius = diff_radius.max(self.cocycle.group.word_length(d)?);
        }
        if diff_radius > self.max_support_len {
            return super::limits::limit_cocycle_plus(self.cocycle, &self.direction, pair);
        }
        let n_star = self.stabilization_index(&pair.diff, diff_radius);
        let value = self.telescoped(n_star, pair);
        #[cfg(debug_assertions)]
        for extra in 1..=5 {
            debug_assert_eq!(self.telescoped(n_star + extra, pair), value);
        }
        Ok(value)
    }

    fn telescoped(&self, n: u64, pair: &HomoclinicPair) -> HElem {
        let target = &self.cocycle.target;
        let vx = self.eval_power(n, &pair.x);
        let vy = self.eval_power(n, &pair.y);
        target.multiply(&target.inverse(&vx), &vy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{example_cocycle_z, limit_cocycle_plus};
    use crate::shift::Configuration;
    use rand::{Rng, SeedableRng};

    #[test]
    fn oversized_pairs_fall_back_to_the_reference_path() {
        let c = example_cocycle_z();
        let g = c.group.clone();
        let dir = g.parse_elem("(1)").unwrap();
        // plan sized for supports in B(2); the pair reaches out to 9
        let eval = DirectionEvaluator::new(&c, &dir, 2).unwrap();
        let x = Configuration::with_overlay(
            g.clone(),
            c.shift.alphabet.clone(),
            [
                (g.parse_elem("(9)").unwrap(), 1),
                (g.parse_elem("(-7)").unwrap(), 1),
            ],
        );
        let pair = HomoclinicPair::new(x, c.shift.background_configuration()).unwrap();
        assert_eq!(
            eval.limit_plus(&pair).unwrap(),
            limit_cocycle_plus(&c, &dir, &pair).unwrap()
        );
    }

    #[test]
    fn fast_lane_matches_reference_limits() {
        let c = example_cocycle_z();
        let g = &c.group;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for dir_s in ["(1)", "(-1)", "(2)", "(-3)"] {
            let dir = g.parse_elem(dir_s).unwrap();
            let eval = DirectionEvaluator::new(&c, &dir, 6).unwrap();
            for _ in 0..50 {
                let mut x = c.shift.background_configuration();
                let mut y = c.shift.background_configuration();
                for site in g.ball(6).unwrap().elems() {
                    if rng.random_range(0..3) == 0 {
                        x.set(site.clone(), 1);
                    }
                    if rng.random_range(0..3) == 0 {
                        y.set(site.clone(), 1);
                    }
                }
                let pair = HomoclinicPair::new(x, y).unwrap();
                assert_eq!(
                    eval.limit_plus(&pair).unwrap(),
                    limit_cocycle_plus(&c, &dir, &pair).unwrap()
                );
            }
        }
    }
}
