//! The prefix (Birget–Rhodes) expansion of a group.
//!
//! Elements are pairs `(X, g)` with `X` a finite subset containing `1` and
//! `g`. The product is `(X, g)(Y, h) = (X ∪ gY, gh)`, inversion is
//! `(g⁻¹X, g⁻¹)`, and `a ≤ b` holds when both have the same group component
//! and the subset of `a` contains the subset of `b`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::group::{GroupContext, GroupElement, GroupError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrefixError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("subset must contain the identity and the group component {0}")]
    MissingEndpoint(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BRElement {
    subset: BTreeSet<GroupElement>,
    element: GroupElement,
}

impl BRElement {
    pub fn new(
        ctx: &GroupContext,
        subset: impl IntoIterator<Item = GroupElement>,
        element: GroupElement,
    ) -> Result<BRElement, PrefixError> {
        ctx.validate(&element)?;
        let subset: BTreeSet<GroupElement> = subset.into_iter().collect();
        for x in &subset {
            ctx.validate(x)?;
        }
        if !subset.contains(&ctx.identity()) || !subset.contains(&element) {
            return Err(PrefixError::MissingEndpoint(ctx.format(&element)));
        }
        Ok(BRElement { subset, element })
    }

    pub fn identity(ctx: &GroupContext) -> BRElement {
        BRElement {
            subset: BTreeSet::from([ctx.identity()]),
            element: ctx.identity(),
        }
    }

    /// `({1, g}, g)`, the maximal element over `g`.
    pub fn maximal(ctx: &GroupContext, g: &GroupElement) -> BRElement {
        BRElement {
            subset: BTreeSet::from([ctx.identity(), g.clone()]),
            element: g.clone(),
        }
    }

    pub fn subset(&self) -> &BTreeSet<GroupElement> {
        &self.subset
    }

    pub fn element(&self) -> &GroupElement {
        &self.element
    }

    pub fn format(&self, ctx: &GroupContext) -> String {
        let items: Vec<String> = self.subset.iter().map(|x| ctx.format(x)).collect();
        format!("({{{}}}, {})", items.join(", "), ctx.format(&self.element))
    }
}

pub fn br_mul(ctx: &GroupContext, a: &BRElement, b: &BRElement) -> BRElement {
    let mut subset = a.subset.clone();
    subset.extend(b.subset.iter().map(|y| ctx.mul_unchecked(&a.element, y)));
    BRElement {
        subset,
        element: ctx.mul_unchecked(&a.element, &b.element),
    }
}

pub fn br_inv(ctx: &GroupContext, a: &BRElement) -> BRElement {
    let gi = ctx.inv_unchecked(&a.element);
    BRElement {
        subset: a.subset.iter().map(|x| ctx.mul_unchecked(&gi, x)).collect(),
        element: gi,
    }
}

pub fn br_sigma(a: &BRElement) -> GroupElement {
    a.element.clone()
}

pub fn br_leq(a: &BRElement, b: &BRElement) -> bool {
    a.element == b.element && b.subset.is_subset(&a.subset)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrefixReport {
    /// Generator words evaluated.
    pub words: usize,
    /// Bracketed triples compared.
    pub triples: usize,
    /// Distinct products plus the adjoined fiber maxima.
    pub sample_size: usize,
    pub fibers: usize,
    pub associative: bool,
    pub sigma_homomorphism: bool,
    pub below_maximal: bool,
    pub unique_maximal: bool,
    /// First violation found, formatted.
    pub witness: Option<String>,
}

impl PrefixReport {
    pub fn holds(&self) -> bool {
        self.associative && self.sigma_homomorphism && self.below_maximal && self.unique_maximal
    }
}

/// All distinct products of at most `bound` generators `({1, s}, s)`.
pub fn br_products(ctx: &GroupContext, bound: usize) -> Vec<BRElement> {
    let gens: Vec<BRElement> = ctx.generators().iter().map(|s| BRElement::maximal(ctx, s)).collect();
    let mut seen = BTreeSet::from([BRElement::identity(ctx)]);
    let mut out = vec![BRElement::identity(ctx)];
    let mut frontier = out.clone();
    for _ in 0..bound {
        let mut next = Vec::new();
        for a in &frontier {
            for s in &gens {
                let p = br_mul(ctx, a, s);
                if seen.insert(p.clone()) {
                    next.push(p.clone());
                    out.push(p);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Check the F-inverse structure on the products of at most `bound`
/// generators.
///
/// Every generator word of length at most `bound` is split into three
/// consecutive factors in all ways and both bracketings are compared with
/// the left-to-right product; σ is checked on every split into two. The
/// fiber checks use the distinct products, augmented with `({1, g}, g)` for
/// every group component that occurs, since for `|g| ≥ 2` that element is
/// not itself a product of generators.
pub fn br_check_f_inverse(ctx: &GroupContext, bound: usize) -> PrefixReport {
    let gens: Vec<BRElement> = ctx.generators().iter().map(|s| BRElement::maximal(ctx, s)).collect();
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut value: HashMap<Vec<usize>, BRElement> = HashMap::from([(Vec::new(), BRElement::identity(ctx))]);
    let mut start = 0;
    for _ in 0..bound {
        let end = words.len();
        for w in start..end {
            for (i, s) in gens.iter().enumerate() {
                let mut next = words[w].clone();
                next.push(i);
                let p = br_mul(ctx, &value[&words[w]], s);
                value.insert(next.clone(), p);
                words.push(next);
            }
        }
        start = end;
    }

    let mut sample: Vec<BRElement> = Vec::new();
    let mut present: BTreeSet<BRElement> = BTreeSet::new();
    for w in &words {
        if present.insert(value[w].clone()) {
            sample.push(value[w].clone());
        }
    }
    let groups: BTreeSet<GroupElement> = sample.iter().map(br_sigma).collect();
    for g in &groups {
        let m = BRElement::maximal(ctx, g);
        if present.insert(m.clone()) {
            sample.push(m);
        }
    }

    let mut report = PrefixReport {
        words: words.len(),
        triples: 0,
        sample_size: sample.len(),
        fibers: groups.len(),
        associative: true,
        sigma_homomorphism: true,
        below_maximal: true,
        unique_maximal: true,
        witness: None,
    };

    for w in &words {
        let whole = &value[w];
        for i in 0..=w.len() {
            let (a, b) = (&value[&w[..i]], &value[&w[i..]]);
            let ab = br_mul(ctx, a, b);
            if br_sigma(&ab) != ctx.mul_unchecked(&br_sigma(a), &br_sigma(b)) && report.sigma_homomorphism {
                report.sigma_homomorphism = false;
                report.witness.get_or_insert(format!("σ fails on {} · {}", a.format(ctx), b.format(ctx)));
            }
            for j in i..=w.len() {
                let (x, y, z) = (&value[&w[..i]], &value[&w[i..j]], &value[&w[j..]]);
                let left = br_mul(ctx, &br_mul(ctx, x, y), z);
                let right = br_mul(ctx, x, &br_mul(ctx, y, z));
                report.triples += 1;
                if (left != right || &left != whole) && report.associative {
                    report.associative = false;
                    report.witness.get_or_insert(format!(
                        "associativity fails on {}, {}, {}",
                        x.format(ctx),
                        y.format(ctx),
                        z.format(ctx)
                    ));
                }
            }
        }
    }

    let mut fibers: BTreeMap<&GroupElement, Vec<&BRElement>> = BTreeMap::new();
    for a in &sample {
        fibers.entry(&a.element).or_default().push(a);
    }
    for (g, members) in &fibers {
        let top = BRElement::maximal(ctx, g);
        for a in members {
            if !br_leq(a, &top) {
                report.below_maximal = false;
                report.witness.get_or_insert(format!("{} is not below {}", a.format(ctx), top.format(ctx)));
            }
        }
        let maxima: Vec<&&BRElement> = members
            .iter()
            .filter(|a| !members.iter().any(|b| b != *a && br_leq(a, b)))
            .collect();
        if maxima.len() != 1 || **maxima[0] != top {
            report.unique_maximal = false;
            report
                .witness
                .get_or_insert(format!("fiber over {} has {} maximal elements", ctx.format(g), maxima.len()));
        }
    }
    report
}
