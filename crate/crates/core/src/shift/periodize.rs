//! Periodization of homoclinic points in Z^d subshifts of finite type:
//! spread a finite pattern over the lattice `(KZ)^d` so the result is
//! periodic, stays in the subshift, and matches the input on a prescribed
//! finite set.

use super::{Configuration, ShiftError, ShiftKind, Subshift};
use crate::group::{Elem, GroupSpec};
use std::collections::BTreeSet;

const DOMAIN_CAP: usize = 1 << 20;

/// A `(KZ)^d`-periodic configuration, stored as one fundamental-domain cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicConfigZd {
    pub period: u32,
    dim: usize,
    /// Row-major over `[0, K)^d`.
    cell: Vec<u8>,
}

impl PeriodicConfigZd {
    pub fn value_at(&self, g: &Elem) -> u8 {
        let Elem::Vector(v) = g else {
            panic!("periodic configuration indexed by a non-vector element")
        };
        self.cell[self.cell_index(v)]
    }

    fn cell_index(&self, v: &[i64]) -> usize {
        let k = self.period as i64;
        let mut idx = 0usize;
        for &c in v {
            idx = idx * self.period as usize + c.rem_euclid(k) as usize;
        }
        idx
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell(&self) -> &[u8] {
        &self.cell
    }
}

/// Lemma-style periodization over `L = (KZ)^d`. The collision check on
/// `F_2 = (supp(z)·D^{-1} ∪ Ω)·D^{-1}·D` is exactly the condition that the
/// construction is well-defined; membership is then verified exhaustively
/// on one fundamental domain.
pub fn periodize_zd(
    shift: &Subshift,
    z: &Configuration,
    omega: &[Elem],
    k: u32,
) -> Result<PeriodicConfigZd, ShiftError> {
    let group = &shift.group;
    let GroupSpec::FreeAbelian { d } = group.spec() else {
        return Err(ShiftError::NotFreeAbelian);
    };
    let d = *d as usize;
    if k == 0 {
        return Err(ShiftError::PeriodTooSmall {
            period: 0,
            a: String::new(),
            b: String::new(),
        });
    }
    if !shift.contains(z) {
        return Err(ShiftError::NotInSubshift);
    }

    // constraint window D with the identity included
    let mut window: BTreeSet<Elem> = match &shift.kind {
        ShiftKind::Full => BTreeSet::new(),
        ShiftKind::Sft { window, .. } => window.iter().cloned().collect(),
        ShiftKind::GoldenMean { windows } => windows.iter().flatten().cloned().collect(),
    };
    window.insert(group.identity());
    let window: Vec<Elem> = window.into_iter().collect();

    let times = |a: &BTreeSet<Elem>, b: &[Elem]| -> BTreeSet<Elem> {
        let mut out = BTreeSet::new();
        for x in a {
            for y in b {
                out.insert(group.multiply(x, y));
            }
        }
        out
    };
    let window_inv: Vec<Elem> = window.iter().map(|e| group.inverse(e)).collect();

    let support: BTreeSet<Elem> = z.support().cloned().collect();
    let f1 = times(&support, &window_inv);
    let mut f1_omega = f1;
    f1_omega.extend(omega.iter().cloned());
    let f2: Vec<Elem> = times(&times(&f1_omega, &window_inv), &window)
        .into_iter()
        .collect();

    // coset separation: residues mod K must be distinct across F_2
    let residue = |e: &Elem| -> Vec<i64> {
        let Elem::Vector(v) = e else { unreachable!() };
        v.iter().map(|c| c.rem_euclid(k as i64)).collect()
    };
    for (i, a) in f2.iter().enumerate() {
        for b in &f2[i + 1..] {
            if residue(a) == residue(b) {
                return Err(ShiftError::PeriodTooSmall {
                    period: k,
                    a: group.format_elem(a),
                    b: group.format_elem(b),
                });
            }
        }
    }

    let cell_size = (k as usize)
        .checked_pow(d as u32)
        .filter(|&s| s <= DOMAIN_CAP)
        .ok_or_else(|| {
            ShiftError::BadSubshift(format!(
                "fundamental domain {k}^{d} exceeds the cap {DOMAIN_CAP}"
            ))
        })?;
    let mut periodic = PeriodicConfigZd {
        period: k,
        dim: d,
        cell: vec![z.background(); cell_size],
    };
    for g in &f2 {
        let Elem::Vector(v) = g else { unreachable!() };
        let idx = periodic.cell_index(v);
        periodic.cell[idx] = z.value_at(g);
    }

    verify_membership(shift, &periodic)?;
    for w in omega {
        debug_assert_eq!(periodic.value_at(w), z.value_at(w));
    }
    Ok(periodic)
}

/// Window check at every translate in one fundamental domain; periodicity
/// carries it to the whole group.
fn verify_membership(shift: &Subshift, y: &PeriodicConfigZd) -> Result<(), ShiftError> {
    let group = &shift.group;
    let k = y.period as i64;
    let d = y.dim;
    let mut point = vec![0i64; d];
    loop {
        let g = Elem::Vector(point.clone());
        let ok = match &shift.kind {
            ShiftKind::Full => true,
            ShiftKind::Sft { window, allowed } => {
                let pat: Vec<u8> = window
                    .iter()
                    .map(|f| y.value_at(&group.multiply(&g, f)))
                    .collect();
                allowed.contains(&pat)
            }
            ShiftKind::GoldenMean { windows } => {
                let zero = shift.alphabet.index_of("0").expect("validated");
                windows
                    .iter()
                    .all(|w| w.iter().any(|f| y.value_at(&group.multiply(&g, f)) == zero))
            }
        };
        if !ok {
            return Err(ShiftError::WitnessNotInSubshift(group.format_elem(&g)));
        }
        // advance odometer over [0, K)^d
        let mut i = 0;
        loop {
            if i == d {
                return Ok(());
            }
            point[i] += 1;
            if point[i] < k {
                break;
            }
            point[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupContext;
    use crate::shift::Alphabet;
    use std::sync::Arc;

    fn z2_golden() -> Arc<Subshift> {
        let g = GroupContext::new(GroupSpec::FreeAbelian { d: 2 }).unwrap();
        let w = vec![
            g.parse_elem("(0,0)").unwrap(),
            g.parse_elem("(1,0)").unwrap(),
        ];
        Subshift::golden_mean(g, Alphabet::binary(), vec![w]).unwrap()
    }

    #[test]
    fn background_periodizes_to_background() {
        let shift = z2_golden();
        let z = shift.background_configuration();
        let omega: Vec<Elem> = shift.group.ball(1).unwrap().elems().cloned().collect();
        let y = periodize_zd(&shift, &z, &omega, 8).unwrap();
        assert!(y.cell().iter().all(|&v| v == 0));
    }

    #[test]
    fn single_site_becomes_a_lattice() {
        let shift = z2_golden();
        let g = &shift.group;
        let z = Configuration::with_overlay(
            g.clone(),
            shift.alphabet.clone(),
            [(g.parse_elem("(0,0)").unwrap(), 1)],
        );
        let omega: Vec<Elem> = g.ball(1).unwrap().elems().cloned().collect();
        let y = periodize_zd(&shift, &z, &omega, 8).unwrap();
        assert_eq!(y.value_at(&g.parse_elem("(0,0)").unwrap()), 1);
        assert_eq!(y.value_at(&g.parse_elem("(8,0)").unwrap()), 1);
        assert_eq!(y.value_at(&g.parse_elem("(-8,8)").unwrap()), 1);
        assert_eq!(y.value_at(&g.parse_elem("(1,0)").unwrap()), 0);
        assert_eq!(y.cell().iter().filter(|&&v| v == 1).count(), 1);
    }

    #[test]
    fn small_period_reports_the_collision() {
        let shift = z2_golden();
        let g = &shift.group;
        let z = Configuration::with_overlay(
            g.clone(),
            shift.alphabet.clone(),
            [
                (g.parse_elem("(0,0)").unwrap(), 1),
                (g.parse_elem("(3,0)").unwrap(), 1),
            ],
        );
        let omega = vec![g.identity()];
        match periodize_zd(&shift, &z, &omega, 2) {
            Err(ShiftError::PeriodTooSmall { period: 2, .. }) => {}
            other => panic!("expected PeriodTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn explicit_sft_periodizes_like_its_golden_mean_form() {
        use crate::shift::ShiftKind;
        use std::collections::BTreeSet;
        let g = GroupContext::new(GroupSpec::FreeAbelian { d: 2 }).unwrap();
        let window = vec![
            g.parse_elem("(0,0)").unwrap(),
            g.parse_elem("(1,0)").unwrap(),
        ];
        let allowed: BTreeSet<Vec<u8>> = [vec![0, 0], vec![0, 1], vec![1, 0]].into_iter().collect();
        let sft = Subshift::new(
            g.clone(),
            crate::shift::Alphabet::binary(),
            ShiftKind::Sft {
                window: window.clone(),
                allowed,
            },
        )
        .unwrap();
        let gm = Subshift::golden_mean(g.clone(), crate::shift::Alphabet::binary(), vec![window])
            .unwrap();
        let z = Configuration::with_overlay(
            g.clone(),
            sft.alphabet.clone(),
            [(g.parse_elem("(0,1)").unwrap(), 1)],
        );
        let omega = vec![g.identity()];
        let y_sft = periodize_zd(&sft, &z, &omega, 8).unwrap();
        let y_gm = periodize_zd(&gm, &z, &omega, 8).unwrap();
        assert_eq!(y_sft, y_gm);
    }

    #[test]
    fn output_agrees_with_input_on_omega() {
        let shift = z2_golden();
        let g = &shift.group;
        let z = Configuration::with_overlay(
            g.clone(),
            shift.alphabet.clone(),
            [
                (g.parse_elem("(0,1)").unwrap(), 1),
                (g.parse_elem("(2,0)").unwrap(), 1),
            ],
        );
        assert!(shift.contains(&z));
        let omega: Vec<Elem> = g.ball(1).unwrap().elems().cloned().collect();
        let y = periodize_zd(&shift, &z, &omega, 8).unwrap();
        for w in &omega {
            assert_eq!(y.value_at(w), z.value_at(w));
        }
    }
}
