//! The enveloping space of a group-valued cocycle, truncated to a ball.
//!
//! For a cocycle `ρ: G → Γ` the space `Ω` is the quotient of `G⁽⁰⁾ × Γ` by
//! `(x, g) ∼ (y, h)` whenever some arrow `γ: x → y` has `ρ(γ) = h⁻¹g`. At
//! radius `R` only points with `g ∈ ball(R)` are kept. Since `G` is a
//! groupoid the relation needs no chains: the class of `(x, g)` is exactly
//! `{(r(γ), g ρ(γ)⁻¹) : s(γ) = x}`, so the truncated classes are the true
//! classes intersected with the window.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::group::{Ball, GroupContext, GroupElement, GroupError};
use crate::groupoid::equivalence::{equivalence_check_summaries, EquivalenceReport, GroupoidSummary, OrbitSummary};
use crate::groupoid::{
    is_saturated, transformation_groupoid, Cocycle, FaithfulWitness, FiniteGroup, FiniteGroupoid, GroupoidError,
    PartialAction, TcfReport,
};
use crate::pbij::{Carrier, PartialBijection};
use crate::verdict::Verdict;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvelopeError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error("margin {margin} must be smaller than the radius {radius}")]
    MarginTooLarge { margin: u32, radius: u32 },
    #[error("cocycle is not faithful: {} and {} share label {}", .0.first, .0.second, .0.label)]
    NotFaithful(FaithfulWitness),
    #[error("support element {0} lies outside the window")]
    SupportOutsideWindow(String),
}

/// Union-find with path halving and union by index, so the root of every
/// set is its least member.
struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi as usize] = lo;
        }
    }
}

/// `Ω` at radius `R`. Points `(x, g)` are numbered `ball_index(g) · |units| +
/// x`; classes are numbered in order of their least point.
#[derive(Debug, Clone)]
pub struct EnvelopeSpace {
    cocycle: Cocycle,
    window: Ball,
    class_of_point: Vec<u32>,
    members: Vec<Vec<u32>>,
    carrier: Arc<Carrier>,
}

pub fn build_envelope(cocycle: &Cocycle, radius: u32) -> Result<EnvelopeSpace, EnvelopeError> {
    let ctx = cocycle.ctx();
    let g = cocycle.groupoid();
    let window = ctx.ball(&ctx.identity(), radius)?;
    let nu = g.unit_count();
    let npts = window.len() * nu;
    let mut uf = UnionFind::new(npts);
    for (a, arr) in g.arrows().iter().enumerate() {
        if g.is_identity(a) {
            continue;
        }
        let rho_inv = ctx.inv(cocycle.label(a))?;
        for (i, gi) in window.elements().iter().enumerate() {
            if let Some(j) = window.position(&ctx.mul(gi, &rho_inv)?) {
                uf.union((i * nu + arr.source) as u32, (j * nu + arr.target) as u32);
            }
        }
    }
    let mut class_of_root: HashMap<u32, u32> = HashMap::new();
    let mut class_of_point = Vec::with_capacity(npts);
    let mut members: Vec<Vec<u32>> = Vec::new();
    for p in 0..npts as u32 {
        let root = uf.find(p);
        let c = *class_of_root.entry(root).or_insert_with(|| {
            members.push(Vec::new());
            (members.len() - 1) as u32
        });
        members[c as usize].push(p);
        class_of_point.push(c);
    }
    let names = members.iter().map(|m| point_name(cocycle, &window, m[0] as usize));
    let carrier = Carrier::new(names).expect("class representatives are distinct points");
    Ok(EnvelopeSpace {
        cocycle: cocycle.clone(),
        window,
        class_of_point,
        members,
        carrier,
    })
}

fn point_name(cocycle: &Cocycle, window: &Ball, p: usize) -> String {
    let nu = cocycle.groupoid().unit_count();
    format!(
        "[{}, {}]",
        cocycle.groupoid().units()[p % nu],
        cocycle.ctx().format(window.get(p / nu))
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddingCollision {
    pub first: String,
    pub second: String,
    pub class: String,
}

impl EnvelopeSpace {
    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    pub fn ctx(&self) -> &GroupContext {
        self.cocycle.ctx()
    }

    pub fn radius(&self) -> u32 {
        self.window.radius()
    }

    pub fn window(&self) -> &Ball {
        &self.window
    }

    pub fn class_count(&self) -> usize {
        self.members.len()
    }

    /// Class carrier, each class named by its least point.
    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    fn units(&self) -> usize {
        self.cocycle.groupoid().unit_count()
    }

    /// Window members of a class as `(unit, element)` pairs, least first.
    pub fn members(&self, class: usize) -> Vec<(usize, GroupElement)> {
        let nu = self.units();
        self.members[class]
            .iter()
            .map(|&p| (p as usize % nu, self.window.get(p as usize / nu).clone()))
            .collect()
    }

    pub fn representative(&self, class: usize) -> (usize, GroupElement) {
        let p = self.members[class][0] as usize;
        (p % self.units(), self.window.get(p / self.units()).clone())
    }

    /// Class of a window point.
    pub fn class_at(&self, unit: usize, g: &GroupElement) -> Option<usize> {
        let i = self.window.position(g)?;
        Some(self.class_of_point[i * self.units() + unit] as usize)
    }

    /// The full class of `(x, g)` in `Ω`, inside or outside the window.
    pub fn exact_class(&self, unit: usize, g: &GroupElement) -> Vec<(usize, GroupElement)> {
        let ctx = self.ctx();
        let gr = self.cocycle.groupoid();
        gr.arrows_from(unit)
            .iter()
            .map(|&a| (gr.target(a), ctx.mul_unchecked(g, &ctx.inv_unchecked(self.cocycle.label(a)))))
            .collect()
    }

    /// The window class meeting the class of `(x, g)`, if any.
    pub fn class_of(&self, unit: usize, g: &GroupElement) -> Option<usize> {
        self.exact_class(unit, g)
            .into_iter()
            .find_map(|(y, h)| self.class_at(y, &h))
    }

    /// Classes of `(x, e)` for each unit.
    pub fn embedded_copy(&self) -> Vec<usize> {
        let e = self.ctx().identity();
        (0..self.units()).map(|u| self.class_at(u, &e).expect("identity is in the window")).collect()
    }

    /// Whether `x ↦ [x, e]` is injective. For a faithful cocycle this holds
    /// exactly when no arrow between distinct units is labeled `e`.
    pub fn embedded_copy_injective(&self) -> Verdict<EmbeddingCollision> {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let units = self.cocycle.groupoid().units();
        for (u, c) in self.embedded_copy().into_iter().enumerate() {
            if let Some(&v) = seen.get(&c) {
                return Verdict::Fail(EmbeddingCollision {
                    first: units[v].clone(),
                    second: units[u].clone(),
                    class: self.carrier.name(c).to_string(),
                });
            }
            seen.insert(c, u);
        }
        Verdict::Pass
    }

    /// The action `[x, g] ↦ [x, g′g]` on window classes, defined where the
    /// image class meets the window.
    pub fn gamma_action(&self, gp: &GroupElement) -> Result<PartialBijection, EnvelopeError> {
        let ctx = self.ctx();
        ctx.validate(gp)?;
        let mut pairs = Vec::new();
        for c in 0..self.class_count() {
            let (x, g) = self.representative(c);
            if let Some(d) = self.class_of(x, &ctx.mul_unchecked(gp, &g)) {
                pairs.push((c, d));
            }
        }
        Ok(PartialBijection::from_pairs(&self.carrier, &pairs).expect("the action is by bijections"))
    }

    /// Every window member of every class is sent to the same class by `g′`.
    pub fn action_well_defined(&self, gp: &GroupElement) -> bool {
        let ctx = self.ctx();
        (0..self.class_count()).all(|c| {
            let images: BTreeSet<Option<usize>> = self
                .members(c)
                .into_iter()
                .map(|(x, g)| self.class_of(x, &ctx.mul_unchecked(gp, &g)))
                .collect();
            images.len() == 1
        })
    }

    /// Elements of `ball(bound)` acting nontrivially.
    pub fn nonzero_support(&self, bound: u32) -> Result<Vec<GroupElement>, EnvelopeError> {
        let ctx = self.ctx();
        let ball = ctx.ball(&ctx.identity(), bound)?;
        let mut out = Vec::new();
        for g in ball.elements() {
            if !self.gamma_action(g)?.is_zero() {
                out.push(g.clone());
            }
        }
        Ok(out)
    }

    /// Largest word length among the labels.
    pub fn label_bound(&self) -> u32 {
        let ctx = self.ctx();
        self.cocycle
            .labels()
            .iter()
            .map(|g| ctx.word_length(g).expect("validated label"))
            .max()
            .unwrap_or(0)
    }

    /// Classes with a window member at distance at most `depth` from `e`.
    pub fn interior_classes(&self, depth: u32) -> Vec<usize> {
        let nu = self.units();
        let mut set = BTreeSet::new();
        for i in 0..self.window.len() {
            if self.window.depth(i) <= depth {
                for u in 0..nu {
                    set.insert(self.class_of_point[i * nu + u] as usize);
                }
            }
        }
        set.into_iter().collect()
    }

    /// Orbits and isotropy of the action restricted to classes at depth at
    /// most `depth`, computed without listing arrows.
    ///
    /// Two such classes share an orbit iff some `g′` carries one to the
    /// other; this happens iff their points lie over units in one orbit of
    /// the groupoid. The stabilizer of `[x, g]` consists of the `g′` with
    /// `[x, g′g] = [x, g]`, found among `g ρ(γ) g⁻¹` for loops `γ` at `x`
    /// and confirmed by applying the action.
    pub fn interior_summary(&self, depth: u32) -> GroupoidSummary {
        let ctx = self.ctx();
        let gr = self.cocycle.groupoid();
        let orbit_of_unit: Vec<usize> = {
            let mut v = vec![0; gr.unit_count()];
            for (k, o) in gr.orbits().iter().enumerate() {
                for &u in o {
                    v[u] = k;
                }
            }
            v
        };
        let mut by_orbit: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for c in self.interior_classes(depth) {
            let (x, _) = self.representative(c);
            by_orbit.entry(orbit_of_unit[x]).or_default().push(c);
        }
        let mut orbits: Vec<OrbitSummary> = by_orbit
            .into_values()
            .map(|classes| {
                let c = classes[0];
                let (x, g) = self.representative(c);
                let gi = ctx.inv_unchecked(&g);
                let mut stab = vec![ctx.identity()];
                for a in gr.isotropy_arrows(x) {
                    let gp = ctx.mul_unchecked(&ctx.mul_unchecked(&g, self.cocycle.label(a)), &gi);
                    if !stab.contains(&gp) && self.class_of(x, &ctx.mul_unchecked(&gp, &g)) == Some(c) {
                        stab.push(gp);
                    }
                }
                let (isotropy, _) = FiniteGroup::generated_by(stab, |a, b| ctx.mul_unchecked(a, b));
                OrbitSummary {
                    representative: self.carrier.name(c).to_string(),
                    size: classes.len(),
                    isotropy,
                }
            })
            .collect();
        orbits.sort_by(|a, b| self.carrier.position(&a.representative).cmp(&self.carrier.position(&b.representative)));
        GroupoidSummary { orbits }
    }

    /// Class-count summary and representatives.
    pub fn to_json(&self) -> Value {
        json!({
            "radius": self.radius(),
            "window_size": self.window.len(),
            "classes": self.class_count(),
            "representatives": (0..self.class_count()).map(|c| self.carrier.name(c)).collect::<Vec<_>>(),
            "embedded_copy": self.embedded_copy().into_iter().map(|c| self.carrier.name(c)).collect::<Vec<_>>(),
        })
    }
}

/// The transformation groupoid of the action restricted to `support`, over
/// all window classes.
pub fn envelope_groupoid(omega: &EnvelopeSpace, support: &[GroupElement]) -> Result<FiniteGroupoid, EnvelopeError> {
    for g in support {
        if !omega.window.contains(g) {
            return Err(EnvelopeError::SupportOutsideWindow(omega.ctx().format(g)));
        }
    }
    action_groupoid(omega, support, None)
}

/// The transformation groupoid on classes at depth at most `depth`, with
/// every group element that moves one such class to another.
pub fn interior_groupoid(omega: &EnvelopeSpace, depth: u32) -> Result<FiniteGroupoid, EnvelopeError> {
    let bound = 2 * depth + omega.label_bound();
    let interior = omega.interior_classes(depth);
    let keep: BTreeSet<usize> = interior.iter().copied().collect();
    let ball = omega.ctx().ball(&omega.ctx().identity(), bound)?;
    let mut support = Vec::new();
    for g in ball.elements() {
        let t = omega.gamma_action(g)?;
        if t.pairs().any(|(c, d)| keep.contains(&c) && keep.contains(&d)) {
            support.push(g.clone());
        }
    }
    action_groupoid(omega, &support, Some(&interior))
}

fn action_groupoid(
    omega: &EnvelopeSpace,
    support: &[GroupElement],
    restrict: Option<&[usize]>,
) -> Result<FiniteGroupoid, EnvelopeError> {
    let classes: Vec<usize> = match restrict {
        Some(r) => r.to_vec(),
        None => (0..omega.class_count()).collect(),
    };
    let local: HashMap<usize, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let points: Vec<String> = classes.iter().map(|&c| omega.carrier.name(c).to_string()).collect();
    let carrier = Carrier::new(points.clone()).expect("distinct class names");
    let mut maps = Vec::with_capacity(support.len());
    for g in support {
        let t = omega.gamma_action(g)?;
        let pairs: Vec<(usize, usize)> = t
            .pairs()
            .filter_map(|(c, d)| Some((*local.get(&c)?, *local.get(&d)?)))
            .collect();
        maps.push(PartialBijection::from_pairs(&carrier, &pairs).expect("restriction of a bijection"));
    }
    let action = PartialAction {
        ctx: omega.ctx().clone(),
        points,
        support: support.to_vec(),
        maps,
    };
    Ok(transformation_groupoid(&action)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusVerdict {
    pub radius: u32,
    pub window_size: usize,
    pub classes: usize,
    pub interior_classes: usize,
    pub equivalence: EquivalenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsReport {
    pub radius: u32,
    pub margin: u32,
    pub tcf: TcfReport,
    pub radii: Vec<RadiusVerdict>,
    pub equivalent: bool,
    /// The verdict is the same at every radius checked.
    pub stable: bool,
    pub topology: String,
}

/// Compare `G` with the action groupoid on classes at depth at most
/// `R − margin`, at radii `R, R+1, …, R+stability_steps`.
pub fn ks_verify(cocycle: &Cocycle, radius: u32, margin: u32, stability_steps: u32) -> Result<KsReport, EnvelopeError> {
    if margin >= radius {
        return Err(EnvelopeError::MarginTooLarge { margin, radius });
    }
    let tcf = cocycle.tcf_report();
    if let Verdict::Fail(w) = &tcf.faithful {
        return Err(EnvelopeError::NotFaithful(w.clone()));
    }
    let left = cocycle.groupoid().summary();
    let mut radii = Vec::new();
    for r in radius..=radius + stability_steps {
        let omega = build_envelope(cocycle, r)?;
        let depth = r - margin;
        let right = omega.interior_summary(depth);
        radii.push(RadiusVerdict {
            radius: r,
            window_size: omega.window.len(),
            classes: omega.class_count(),
            interior_classes: omega.interior_classes(depth).len(),
            equivalence: equivalence_check_summaries(&left, &right),
        });
    }
    let equivalent = radii[0].equivalence.equivalent;
    let stable = radii.iter().all(|v| v.equivalence.equivalent == equivalent);
    Ok(KsReport {
        radius,
        margin,
        tcf,
        radii,
        equivalent,
        stable,
        topology: "the quotient topology on a finite discrete window is discrete, so Hausdorffness is automatic"
            .to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitReport {
    pub classes: usize,
    pub classes_in_f: usize,
    pub classes_in_complement: usize,
    /// Classes meeting both `F` and its complement; empty for saturated `F`.
    pub mixed: Vec<String>,
    pub additive: bool,
}

impl SplitReport {
    pub fn holds(&self) -> bool {
        self.mixed.is_empty() && self.additive
    }
}

/// Split `Ω` into the classes over `F` and over its complement.
pub fn saturation_split(omega: &EnvelopeSpace, f: &BTreeSet<usize>) -> Result<SplitReport, EnvelopeError> {
    if let Verdict::Fail(w) = is_saturated(omega.cocycle.groupoid(), f) {
        return Err(GroupoidError::NotSaturated(w).into());
    }
    let nu = omega.units();
    let (mut in_f, mut in_c) = (0, 0);
    let mut mixed = Vec::new();
    for (c, pts) in omega.members.iter().enumerate() {
        let inside = pts.iter().filter(|&&p| f.contains(&(p as usize % nu))).count();
        if inside == pts.len() {
            in_f += 1;
        } else if inside == 0 {
            in_c += 1;
        } else {
            mixed.push(omega.carrier.name(c).to_string());
        }
    }
    Ok(SplitReport {
        classes: omega.class_count(),
        classes_in_f: in_f,
        classes_in_complement: in_c,
        additive: in_f + in_c == omega.class_count(),
        mixed,
    })
}
