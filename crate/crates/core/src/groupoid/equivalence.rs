//! Equivalence of finite discrete groupoids.
//!
//! Two finite discrete groupoids are equivalent exactly when there is a
//! bijection between their orbit sets matching orbits with isomorphic
//! isotropy groups.

use serde::Serialize;

use super::finite_group::{FiniteGroup, IsoMethod};
use super::FiniteGroupoid;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitSummary {
    pub representative: String,
    pub size: usize,
    pub isotropy: FiniteGroup,
}

/// Orbits with isotropy: all that the equivalence test looks at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidSummary {
    pub orbits: Vec<OrbitSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitMatch {
    pub left: String,
    pub right: String,
    pub left_size: usize,
    pub right_size: usize,
    pub isotropy_order: usize,
    pub method: IsoMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub left_orbits: usize,
    pub right_orbits: usize,
    pub matching: Vec<OrbitMatch>,
    /// Left orbit representatives with no partner.
    pub unmatched_left: Vec<String>,
    pub unmatched_right: Vec<String>,
}

pub fn equivalence_check(g: &FiniteGroupoid, h: &FiniteGroupoid) -> EquivalenceReport {
    equivalence_check_summaries(&g.summary(), &h.summary())
}

/// Isomorphism of isotropy groups is an equivalence relation, so a greedy
/// matching finds a perfect matching whenever one exists.
pub fn equivalence_check_summaries(a: &GroupoidSummary, b: &GroupoidSummary) -> EquivalenceReport {
    let mut taken = vec![false; b.orbits.len()];
    let mut matching = Vec::new();
    let mut unmatched_left = Vec::new();
    for o in &a.orbits {
        let hit = b.orbits.iter().enumerate().find_map(|(j, p)| {
            if taken[j] {
                return None;
            }
            let (iso, method) = o.isotropy.isomorphic(&p.isotropy);
            iso.then_some((j, method))
        });
        match hit {
            Some((j, method)) => {
                taken[j] = true;
                let p = &b.orbits[j];
                matching.push(OrbitMatch {
                    left: o.representative.clone(),
                    right: p.representative.clone(),
                    left_size: o.size,
                    right_size: p.size,
                    isotropy_order: o.isotropy.order(),
                    method,
                });
            }
            None => unmatched_left.push(o.representative.clone()),
        }
    }
    let unmatched_right: Vec<String> = b
        .orbits
        .iter()
        .zip(&taken)
        .filter(|(_, &t)| !t)
        .map(|(p, _)| p.representative.clone())
        .collect();
    EquivalenceReport {
        equivalent: unmatched_left.is_empty() && unmatched_right.is_empty(),
        left_orbits: a.orbits.len(),
        right_orbits: b.orbits.len(),
        matching,
        unmatched_left,
        unmatched_right,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{disjoint_union, pair_group_groupoid, pair_groupoid, random_groupoid};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn pair_groupoid_is_equivalent_to_a_point() {
        let r = equivalence_check(&pair_groupoid(&names(4)).unwrap(), &pair_groupoid(&names(1)).unwrap());
        assert!(r.equivalent);
        assert_eq!(r.matching.len(), 1);
    }

    #[test]
    fn isotropy_orders_distinguish() {
        let z2 = pair_group_groupoid(&names(1), &FiniteGroup::cyclic(2)).unwrap();
        let z3 = pair_group_groupoid(&names(1), &FiniteGroup::cyclic(3)).unwrap();
        let r = equivalence_check(&z2, &z3);
        assert!(!r.equivalent);
        assert_eq!(r.unmatched_left, ["p0"]);
    }

    #[test]
    fn orbit_counts_distinguish() {
        let one = pair_groupoid(&names(2)).unwrap();
        let two = disjoint_union(&[pair_groupoid(&names(1)).unwrap(), pair_groupoid(&names(1)).unwrap()]).unwrap();
        assert!(!equivalence_check(&one, &two).equivalent);
    }

    #[test]
    fn equivalence_relation_on_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let corpus: Vec<FiniteGroupoid> = (0..14).map(|_| random_groupoid(&mut rng, 5)).collect();
        let eq = |a: &FiniteGroupoid, b: &FiniteGroupoid| equivalence_check(a, b).equivalent;
        for a in &corpus {
            assert!(eq(a, a));
            for b in &corpus {
                assert_eq!(eq(a, b), eq(b, a));
                for c in &corpus {
                    if eq(a, b) && eq(b, c) {
                        assert!(eq(a, c));
                    }
                }
            }
        }
    }
}
