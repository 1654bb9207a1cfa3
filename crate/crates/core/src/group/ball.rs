//! Metric balls `B(r)` and the shared breadth-first distance table.

use super::{Elem, GroupContext, GroupError};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// The exact ball `B(r) = {g : ℓ_S(g) ≤ r}`, ordered by word length and
/// then by normal form. Closed under inverses; `B(r) ⊆ B(r')` for `r ≤ r'`.
#[derive(Clone, Debug)]
pub struct Ball {
    radius: u32,
    elems: Vec<(Elem, u32)>,
}

impl Ball {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Elements with their word lengths, in the deterministic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Elem, u32)> {
        self.elems.iter().map(|(e, l)| (e, *l))
    }

    pub fn elems(&self) -> impl Iterator<Item = &Elem> {
        self.elems.iter().map(|(e, _)| e)
    }

    /// Elements of exact length `r` (the sphere of radius `r`).
    pub fn sphere(&self, r: u32) -> impl Iterator<Item = &Elem> {
        self.elems
            .iter()
            .filter(move |(_, l)| *l == r)
            .map(|(e, _)| e)
    }
}

/// Incremental BFS from the identity, shared between ball enumeration and
/// Heisenberg word-length queries. Layers are committed whole so a cap
/// failure never leaves a half-explored radius behind.
pub(super) struct BfsCache {
    dist: HashMap<Elem, u32>,
    frontier: Vec<Elem>,
    radius_done: u32,
    balls: BTreeMap<u32, Arc<Ball>>,
}

impl BfsCache {
    pub(super) fn new() -> Self {
        BfsCache {
            dist: HashMap::new(),
            frontier: Vec::new(),
            radius_done: 0,
            balls: BTreeMap::new(),
        }
    }

    fn ensure_seeded(&mut self, ctx: &GroupContext) {
        if self.dist.is_empty() {
            let e = ctx.identity();
            self.dist.insert(e.clone(), 0);
            self.frontier.push(e);
        }
    }

    /// Extends the table through radius `r`, or errors leaving state intact.
    fn expand_to(&mut self, ctx: &GroupContext, r: u32, cap: usize) -> Result<(), GroupError> {
        self.ensure_seeded(ctx);
        while self.radius_done < r {
            if self.frontier.is_empty() {
                // the whole (finite) graph is explored; nothing past this
                self.radius_done = r;
                break;
            }
            let mut next = Vec::new();
            for g in &self.frontier {
                for gen in ctx.generators() {
                    let h = ctx.multiply(g, &gen.elem);
                    if !self.dist.contains_key(&h) {
                        self.dist.insert(h.clone(), self.radius_done + 1);
                        next.push(h);
                    }
                }
            }
            if self.dist.len() > cap {
                // roll back the uncommitted layer
                for h in &next {
                    self.dist.remove(h);
                }
                return Err(GroupError::BallTooLarge {
                    radius: self.radius_done + 1,
                    cap,
                });
            }
            self.frontier = next;
            self.radius_done += 1;
        }
        Ok(())
    }

    pub(super) fn ball(
        &mut self,
        ctx: &GroupContext,
        r: u32,
        cap: usize,
    ) -> Result<Arc<Ball>, GroupError> {
        if let Some(b) = self.balls.get(&r) {
            return Ok(b.clone());
        }
        self.expand_to(ctx, r, cap)?;
        let mut elems: Vec<(Elem, u32)> = self
            .dist
            .iter()
            .filter(|(_, &d)| d <= r)
            .map(|(e, &d)| (e.clone(), d))
            .collect();
        elems.sort_unstable_by(|(e1, l1), (e2, l2)| l1.cmp(l2).then_with(|| e1.cmp(e2)));
        let ball = Arc::new(Ball { radius: r, elems });
        self.balls.insert(r, ball.clone());
        Ok(ball)
    }

    pub(super) fn distance(
        &mut self,
        ctx: &GroupContext,
        a: &Elem,
        cap: usize,
    ) -> Result<u64, GroupError> {
        self.ensure_seeded(ctx);
        loop {
            if let Some(&d) = self.dist.get(a) {
                return Ok(d as u64);
            }
            if self.frontier.is_empty() {
                return Err(GroupError::RadiusBudgetExceeded { cap });
            }
            self.expand_to(ctx, self.radius_done + 1, cap)
                .map_err(|_| GroupError::RadiusBudgetExceeded { cap })?;
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::group::{GroupContext, GroupSpec};

    #[test]
    fn ball_sizes_match_counting() {
        let z = GroupContext::new(GroupSpec::FreeAbelian { d: 1 }).unwrap();
        assert_eq!(z.ball(2).unwrap().len(), 5);

        let z2 = GroupContext::new(GroupSpec::FreeAbelian { d: 2 }).unwrap();
        assert_eq!(z2.ball(1).unwrap().len(), 5);

        // 1 + 4 + 4·3 by sphere counting
        let f2 = GroupContext::new(GroupSpec::Free { r: 2 }).unwrap();
        assert_eq!(f2.ball(2).unwrap().len(), 17);
    }

    #[test]
    fn ball_is_inverse_closed_and_nested() {
        for spec in [
            GroupSpec::FreeAbelian { d: 2 },
            GroupSpec::Free { r: 2 },
            GroupSpec::FreeProductCyclic { orders: vec![2, 3] },
            GroupSpec::Heisenberg,
        ] {
            let g = GroupContext::new(spec).unwrap();
            let b3 = g.ball(3).unwrap();
            let b4 = g.ball(4).unwrap();
            for (e, l) in b3.iter() {
                let inv = g.inverse(e);
                assert_eq!(g.word_length(&inv).unwrap(), l as u64);
                assert!(b3.elems().any(|x| *x == inv));
                assert!(b4.elems().any(|x| x == e));
            }
            assert!(b3.len() <= b4.len());
        }
    }

    #[test]
    fn ball_cap_is_enforced() {
        let f2 = GroupContext::new(GroupSpec::Free { r: 2 }).unwrap();
        assert!(f2.ball_with_cap(6, 100).is_err());
        // a failed attempt must not poison later larger-cap calls
        assert_eq!(f2.ball_with_cap(2, 1000).unwrap().len(), 17);
    }

    #[test]
    fn heisenberg_distances_via_bfs() {
        let h = GroupContext::new(GroupSpec::Heisenberg).unwrap();
        let z = h.parse_elem("(0,0,1)").unwrap();
        assert_eq!(h.word_length(&z).unwrap(), 4);
        assert_eq!(h.word_length(&h.parse_elem("(1,1,0)").unwrap()).unwrap(), 2);
        assert_eq!(h.word_length(&h.identity()).unwrap(), 0);
    }
}
