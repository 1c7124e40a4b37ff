//! Small finite groups given by Cayley tables, used for isotropy.

use std::collections::BTreeMap;

use serde::Serialize;

/// Groups up to this order are compared by an explicit isomorphism search.
pub const BRUTE_FORCE_ORDER: usize = 64;

/// A finite group on `0..n` with identity `0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupInvariants {
    pub order: usize,
    /// Element order → number of elements of that order.
    pub order_histogram: BTreeMap<usize, usize>,
    pub abelianization_order: usize,
    pub center_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoMethod {
    BruteForce,
    Invariants,
}

impl FiniteGroup {
    /// `table[a][b] = ab`. The caller guarantees the group axioms with `0` as
    /// identity; this is checked in debug builds.
    pub fn from_table(table: Vec<Vec<usize>>) -> FiniteGroup {
        let g = FiniteGroup { table };
        debug_assert!(g.check_axioms(), "not a group table");
        g
    }

    pub fn trivial() -> FiniteGroup {
        FiniteGroup { table: vec![vec![0]] }
    }

    pub fn cyclic(n: usize) -> FiniteGroup {
        FiniteGroup::from_table((0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect())
    }

    /// Closure of `elements` (which must contain the identity first) under
    /// `mul`; returns the table over the closed list.
    pub fn generated_by<T: Clone + Eq + std::hash::Hash>(
        elements: Vec<T>,
        mul: impl Fn(&T, &T) -> T,
    ) -> (FiniteGroup, Vec<T>) {
        let mut items = elements;
        let mut index: std::collections::HashMap<T, usize> =
            items.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        let mut i = 0;
        while i < items.len() {
            for j in 0..=i {
                for (a, b) in [(i, j), (j, i)] {
                    let p = mul(&items[a], &items[b]);
                    if !index.contains_key(&p) {
                        index.insert(p.clone(), items.len());
                        items.push(p);
                    }
                }
            }
            i += 1;
        }
        let table = (0..items.len())
            .map(|a| (0..items.len()).map(|b| index[&mul(&items[a], &items[b])]).collect())
            .collect();
        (FiniteGroup::from_table(table), items)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        (0..self.order()).find(|&b| self.table[a][b] == 0).expect("group table")
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    fn check_axioms(&self) -> bool {
        let n = self.order();
        n > 0
            && self.table.iter().all(|r| r.len() == n && r.iter().all(|&x| x < n))
            && (0..n).all(|a| self.table[0][a] == a && self.table[a][0] == a)
            && (0..n).all(|a| (0..n).any(|b| self.table[a][b] == 0))
            && (n > 16
                || (0..n).all(|a| {
                    (0..n).all(|b| (0..n).all(|c| self.table[self.table[a][b]][c] == self.table[a][self.table[b][c]]))
                }))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.table[x][a];
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Subgroup generated by `gens`, as a sorted element list.
    pub fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.order()];
        inside[0] = true;
        let mut list = vec![0];
        let mut i = 0;
        while i < list.len() {
            for &g in gens {
                let p = self.table[list[i]][g];
                if !inside[p] {
                    inside[p] = true;
                    list.push(p);
                }
            }
            i += 1;
        }
        list.sort_unstable();
        list
    }

    pub fn invariants(&self) -> GroupInvariants {
        let n = self.order();
        let mut order_histogram = BTreeMap::new();
        for a in 0..n {
            *order_histogram.entry(self.element_order(a)).or_insert(0) += 1;
        }
        let commutators: Vec<usize> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b)))
            .collect();
        let derived = self.subgroup(&commutators).len();
        let center_order = (0..n)
            .filter(|&a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
            .count();
        GroupInvariants {
            order: n,
            order_histogram,
            abelianization_order: n / derived,
            center_order,
        }
    }

    /// Greedy generating sequence: each new generator is the least element
    /// outside the subgroup generated so far.
    fn generating_sequence(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut sub = vec![0];
        while sub.len() < self.order() {
            let next = (0..self.order()).find(|x| sub.binary_search(x).is_err()).expect("proper subgroup");
            gens.push(next);
            sub = self.subgroup(&gens);
        }
        gens
    }

    /// Decide isomorphism. Orders up to [`BRUTE_FORCE_ORDER`] are settled by
    /// searching for an explicit isomorphism; larger groups are compared by
    /// invariants only.
    pub fn isomorphic(&self, other: &FiniteGroup) -> (bool, IsoMethod) {
        if self.order() != other.order() {
            return (false, IsoMethod::Invariants);
        }
        if self.invariants() != other.invariants() {
            let method = if self.order() <= BRUTE_FORCE_ORDER {
                IsoMethod::BruteForce
            } else {
                IsoMethod::Invariants
            };
            return (false, method);
        }
        if self.order() > BRUTE_FORCE_ORDER {
            return (true, IsoMethod::Invariants);
        }
        (self.find_isomorphism(other).is_some(), IsoMethod::BruteForce)
    }

    /// An isomorphism `self → other` as an image table, if one exists.
    pub fn find_isomorphism(&self, other: &FiniteGroup) -> Option<Vec<usize>> {
        if self.order() != other.order() {
            return None;
        }
        let gens = self.generating_sequence();
        let mut map = vec![usize::MAX; self.order()];
        map[0] = 0;
        if self.extend(other, &gens, 0, &mut map) {
            Some(map)
        } else {
            None
        }
    }

    fn extend(&self, other: &FiniteGroup, gens: &[usize], k: usize, map: &mut Vec<usize>) -> bool {
        if k == gens.len() {
            return true;
        }
        let g = gens[k];
        let want = self.element_order(g);
        for h in 0..other.order() {
            if other.element_order(h) != want {
                continue;
            }
            let saved = map.clone();
            if self.close_map(other, &gens[..=k], g, h, map) && self.extend(other, gens, k + 1, map) {
                return true;
            }
            *map = saved;
        }
        false
    }

    /// Assign `g ↦ h` and propagate over the subgroup generated by `gens`,
    /// failing on any inconsistency or loss of injectivity.
    fn close_map(&self, other: &FiniteGroup, gens: &[usize], g: usize, h: usize, map: &mut [usize]) -> bool {
        let mut used = vec![false; other.order()];
        for &v in map.iter() {
            if v != usize::MAX {
                used[v] = true;
            }
        }
        if map[g] != usize::MAX {
            return map[g] == h;
        }
        if used[h] {
            return false;
        }
        map[g] = h;
        used[h] = true;
        let mut frontier: Vec<usize> = (0..self.order()).filter(|&x| map[x] != usize::MAX).collect();
        while let Some(x) = frontier.pop() {
            for &s in gens {
                let xs = self.mul(x, s);
                let image = other.mul(map[x], map[s]);
                if map[xs] == usize::MAX {
                    if used[image] {
                        return false;
                    }
                    map[xs] = image;
                    used[image] = true;
                    frontier.push(xs);
                } else if map[xs] != image {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dihedral(n: usize) -> FiniteGroup {
        // elements r^i s^j encoded as i + n j
        let mul = |a: usize, b: usize| {
            let (i, j) = (a % n, a / n);
            let (k, l) = (b % n, b / n);
            let rot = if j == 0 { (i + k) % n } else { (i + n - k) % n };
            rot + n * ((j + l) % 2)
        };
        FiniteGroup::from_table((0..2 * n).map(|a| (0..2 * n).map(|b| mul(a, b)).collect()).collect())
    }

    fn product(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
        let m = b.order();
        let n = a.order() * m;
        FiniteGroup::from_table(
            (0..n)
                .map(|x| (0..n).map(|y| a.mul(x / m, y / m) * m + b.mul(x % m, y % m)).collect())
                .collect(),
        )
    }

    #[test]
    fn cyclic_versus_klein() {
        let z4 = FiniteGroup::cyclic(4);
        let v4 = product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
        assert_eq!(z4.isomorphic(&v4), (false, IsoMethod::BruteForce));
        assert!(z4.isomorphic(&FiniteGroup::cyclic(4)).0);
        assert!(!FiniteGroup::cyclic(2).isomorphic(&FiniteGroup::cyclic(3)).0);
    }

    #[test]
    fn z6_is_z2_times_z3() {
        let p = product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(3));
        let iso = FiniteGroup::cyclic(6).find_isomorphism(&p).expect("isomorphic");
        let z6 = FiniteGroup::cyclic(6);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(iso[z6.mul(a, b)], p.mul(iso[a], iso[b]));
            }
        }
    }

    #[test]
    fn dihedral_invariants() {
        let d3 = dihedral(3);
        let inv = d3.invariants();
        assert_eq!(inv.abelianization_order, 2);
        assert_eq!(inv.center_order, 1);
        assert!(!d3.is_abelian());
        assert!(!d3.isomorphic(&FiniteGroup::cyclic(6)).0);
        // D4 and Q8 share order and abelianization but differ in element orders
        let d4 = dihedral(4);
        assert_eq!(d4.invariants().order_histogram[&2], 5);
    }

    #[test]
    fn generated_by_closes() {
        let (g, items) = FiniteGroup::generated_by(vec![0u32, 2], |a, b| (a + b) % 6);
        assert_eq!(g.order(), 3);
        assert_eq!(items, vec![0, 2, 4]);
    }
}
