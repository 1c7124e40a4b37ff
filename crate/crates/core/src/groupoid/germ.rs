//! The groupoid of germs of an inverse monoid acting on its carrier.
//!
//! For a finite idempotent semilattice every character is principal, so the
//! spectrum is modeled by the blocks of points that no idempotent domain
//! separates. Germs `[s, B]` with `B ⊆ dom s` are identified when some
//! idempotent `e` with `B ⊆ dom e` has `s∘e = t∘e`.

use std::collections::HashMap;

use super::{Arrow, Cocycle, FiniteGroupoid, GroupoidError};
use crate::invmon::{InverseMonoid, MonoidError, PhiValue};
use crate::pbij::PartialBijection;
use crate::verdict::Verdict;

/// Partition of the carrier by membership in idempotent domains, blocks
/// ordered by least point.
pub fn spectrum_blocks(s: &InverseMonoid) -> Vec<Vec<usize>> {
    let n = s.carrier().len();
    let idem = s.idempotents();
    let mut signature: Vec<Vec<bool>> = vec![Vec::with_capacity(idem.len()); n];
    for &e in &idem {
        let el = s.element(e);
        for (x, sig) in signature.iter_mut().enumerate() {
            sig.push(el.in_domain(x));
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut by_sig: HashMap<&Vec<bool>, usize> = HashMap::new();
    for (x, sig) in signature.iter().enumerate() {
        match by_sig.get(sig) {
            Some(&b) => blocks[b].push(x),
            None => {
                by_sig.insert(sig, blocks.len());
                blocks.push(vec![x]);
            }
        }
    }
    blocks
}

#[derive(Debug, Clone)]
pub struct GermGroupoid {
    groupoid: FiniteGroupoid,
    blocks: Vec<Vec<usize>>,
    /// Maximal monoid element representing each arrow.
    representatives: Vec<usize>,
    /// Least idempotent whose domain contains each block.
    block_idempotents: Vec<usize>,
}

impl GermGroupoid {
    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn representative(&self, arrow: usize) -> usize {
        self.representatives[arrow]
    }

    pub fn block_idempotent(&self, block: usize) -> usize {
        self.block_idempotents[block]
    }
}

fn block_name(s: &InverseMonoid, block: &[usize]) -> String {
    let c = s.carrier();
    match block {
        [x] => c.name(*x).to_string(),
        _ => {
            let names: Vec<&str> = block.iter().map(|&x| c.name(x)).collect();
            format!("{{{}}}", names.join(", "))
        }
    }
}

fn require_f_inverse(s: &InverseMonoid) -> Result<(), GroupoidError> {
    match s.is_zero_f_inverse()? {
        Verdict::Pass => Ok(()),
        Verdict::Fail(w) => Err(MonoidError::NotZeroFInverse(w).into()),
        Verdict::Unknown(_) => Err(MonoidError::Truncated(match s.status() {
            crate::invmon::ClosureStatus::Truncated(r) => r,
            crate::invmon::ClosureStatus::Complete => unreachable!("unknown verdict on a complete closure"),
        })
        .into()),
    }
}

/// Germs of maximal elements over spectrum blocks. Requires `S` to be
/// 0-F-inverse so that each germ has a maximal representative.
pub fn germ_groupoid(s: &InverseMonoid) -> Result<GermGroupoid, GroupoidError> {
    require_f_inverse(s)?;
    let carrier = s.carrier();
    let blocks = spectrum_blocks(s);
    let mut block_of = vec![0usize; carrier.len()];
    for (b, pts) in blocks.iter().enumerate() {
        for &x in pts {
            block_of[x] = b;
        }
    }

    // the meet of all idempotents containing a block is the least witness
    // any germ identification at that block can use
    let idem = s.idempotents();
    let mut block_idempotents = Vec::with_capacity(blocks.len());
    for pts in &blocks {
        let mut dom = vec![true; carrier.len()];
        for &e in &idem {
            let el = s.element(e);
            if pts.iter().all(|&x| el.in_domain(x)) {
                for (x, d) in dom.iter_mut().enumerate() {
                    *d &= el.in_domain(x);
                }
            }
        }
        let support: Vec<usize> = (0..carrier.len()).filter(|&x| dom[x]).collect();
        let meet = PartialBijection::partial_identity(carrier, &support);
        block_idempotents.push(s.position(&meet).expect("idempotents are closed under meets"));
    }

    let maxima = s.maximal_elements();
    let mut arrows = Vec::new();
    let mut representatives = Vec::new();
    let mut germ_arrow: HashMap<(usize, usize), usize> = HashMap::new();
    for (b, pts) in blocks.iter().enumerate() {
        let e = s.element(block_idempotents[b]);
        let mut restricted: HashMap<PartialBijection, usize> = HashMap::new();
        for &u in &maxima {
            let el = s.element(u);
            if !el.in_domain(pts[0]) {
                continue;
            }
            if !pts.iter().all(|&x| el.in_domain(x)) {
                return Err(GroupoidError::Axiom("an idempotent domain splits a block".into()));
            }
            let key = el.compose(e).expect("same carrier");
            let arrow = *restricted.entry(key).or_insert_with(|| {
                let target = block_of[el.apply(pts[0]).expect("in domain")];
                arrows.push(Arrow {
                    source: b,
                    target,
                    name: format!("[{}, {}]", el, block_name(s, pts)),
                });
                representatives.push(u);
                arrows.len() - 1
            });
            germ_arrow.insert((u, b), arrow);
        }
    }
    for (a, arr) in arrows.iter().enumerate() {
        let el = s.element(representatives[a]);
        let mut image: Vec<usize> = blocks[arr.source].iter().map(|&x| el.apply(x).expect("in domain")).collect();
        image.sort_unstable();
        if image != blocks[arr.target] {
            return Err(GroupoidError::Axiom("a maximal element does not map blocks onto blocks".into()));
        }
    }

    let units = blocks.iter().map(|pts| block_name(s, pts)).collect();
    let groupoid = FiniteGroupoid::new(units, arrows.clone(), |a, b| {
        let prod = s.element(representatives[a]).compose(s.element(representatives[b])).ok()?;
        let cover = s.unique_cover(s.position(&prod)?)?;
        germ_arrow.get(&(cover, arrows[b].source)).copied()
    })?;
    Ok(GermGroupoid {
        groupoid,
        blocks,
        representatives,
        block_idempotents,
    })
}

/// Label each germ by `Φ` of its representative, after checking that germ
/// equality never identifies elements with different `Φ` values.
pub fn cocycle_from_labels(germs: &GermGroupoid, s: &InverseMonoid) -> Result<Cocycle, GroupoidError> {
    let phi = s.phi_map()?;
    for (b, pts) in germs.blocks.iter().enumerate() {
        let e = s.element(germs.block_idempotents[b]);
        let mut seen: HashMap<PartialBijection, usize> = HashMap::new();
        for (i, el) in s.elements().iter().enumerate() {
            if !el.in_domain(pts[0]) {
                continue;
            }
            let key = el.compose(e).expect("same carrier");
            match seen.get(&key) {
                Some(&j) if phi.value(j) != phi.value(i) => {
                    return Err(GroupoidError::IllDefinedLabel(format!(
                        "{} and {} have the same germ at {} but Φ values {} and {}",
                        s.element(j),
                        el,
                        block_name(s, pts),
                        phi.format_value(j),
                        phi.format_value(i)
                    )))
                }
                Some(_) => {}
                None => {
                    seen.insert(key, i);
                }
            }
        }
    }
    let labels = germs
        .representatives
        .iter()
        .map(|&u| match phi.value(u) {
            PhiValue::Group(g) => Ok(g.clone()),
            PhiValue::Zero => Err(GroupoidError::IllDefinedLabel("a germ representative has Φ = 0".into())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Cocycle::new(germs.groupoid.clone(), phi.target().clone(), labels)
}
