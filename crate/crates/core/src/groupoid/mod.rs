//! Finite discrete groupoids, group-valued cocycles, saturated sets and an
//! equivalence test by orbits and isotropy.

pub mod equivalence;
pub mod finite_group;
pub mod germ;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{GroupContext, GroupElement, GroupError, GroupSpec};
use crate::pbij::PartialBijection;
use crate::verdict::{Outcome, Verdict};

pub use equivalence::{equivalence_check, EquivalenceReport, GroupoidSummary, OrbitSummary};
pub use finite_group::{FiniteGroup, IsoMethod};
pub use germ::{cocycle_from_labels, germ_groupoid, spectrum_blocks, GermGroupoid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupoidError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Monoid(#[from] crate::invmon::MonoidError),
    #[error("groupoid axiom violated: {0}")]
    Axiom(String),
    #[error("unit set must be nonempty")]
    NoUnits,
    #[error("set of units is not saturated: arrow {} leaves it", .0.arrow)]
    NotSaturated(SaturationWitness),
    #[error("unit index {0} out of range")]
    UnknownUnit(usize),
    #[error("partial action axiom violated: {0}")]
    ActionAxiom(String),
    #[error("composition of {g} and {h} leaves the support")]
    SupportLeak { g: String, h: String },
    #[error("cocycle is not a functor: {0}")]
    NotFunctor(String),
    #[error("germ labeling is ill-defined: {0}")]
    IllDefinedLabel(String),
    #[error("malformed groupoid document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
    pub name: String,
}

/// A finite groupoid with an explicit composition table.
///
/// `compose(a, b)` is `a ∘ b`, defined exactly when `source(a) =
/// target(b)`.
#[derive(Debug, Clone)]
pub struct FiniteGroupoid {
    units: Vec<String>,
    arrows: Vec<Arrow>,
    identities: Vec<usize>,
    inverses: Vec<usize>,
    table: HashMap<(u32, u32), u32>,
    by_source: Vec<Vec<usize>>,
    by_target: Vec<Vec<usize>>,
}

impl FiniteGroupoid {
    /// Build from arrows and a composition rule, validating every axiom
    /// exhaustively. `compose` is called on each composable pair only and
    /// must return the index of the composite.
    pub fn new(
        units: Vec<String>,
        arrows: Vec<Arrow>,
        compose: impl Fn(usize, usize) -> Option<usize>,
    ) -> Result<FiniteGroupoid, GroupoidError> {
        let nu = units.len();
        for a in &arrows {
            if a.source >= nu || a.target >= nu {
                return Err(GroupoidError::UnknownUnit(a.source.max(a.target)));
            }
        }
        let mut by_source = vec![Vec::new(); nu];
        let mut by_target = vec![Vec::new(); nu];
        for (i, a) in arrows.iter().enumerate() {
            by_source[a.source].push(i);
            by_target[a.target].push(i);
        }
        let mut table = HashMap::new();
        for b in 0..arrows.len() {
            for &a in &by_source[arrows[b].target] {
                let c = compose(a, b).ok_or_else(|| {
                    GroupoidError::Axiom(format!("{} ∘ {} undefined", arrows[a].name, arrows[b].name))
                })?;
                if c >= arrows.len() || arrows[c].source != arrows[b].source || arrows[c].target != arrows[a].target {
                    return Err(GroupoidError::Axiom(format!(
                        "{} ∘ {} has the wrong endpoints",
                        arrows[a].name, arrows[b].name
                    )));
                }
                table.insert((a as u32, b as u32), c as u32);
            }
        }
        Self::from_parts(units, arrows, table, by_source, by_target)
    }

    fn from_parts(
        units: Vec<String>,
        arrows: Vec<Arrow>,
        table: HashMap<(u32, u32), u32>,
        by_source: Vec<Vec<usize>>,
        by_target: Vec<Vec<usize>>,
    ) -> Result<FiniteGroupoid, GroupoidError> {
        let c = |a: usize, b: usize| table[&(a as u32, b as u32)] as usize;
        let mut identities = Vec::with_capacity(units.len());
        for u in 0..units.len() {
            let id = by_source[u].iter().copied().find(|&a| {
                arrows[a].target == u
                    && by_source[u].iter().all(|&b| c(b, a) == b)
                    && by_target[u].iter().all(|&b| c(a, b) == b)
            });
            identities.push(id.ok_or_else(|| GroupoidError::Axiom(format!("unit {} has no identity", units[u])))?);
        }
        let mut inverses = Vec::with_capacity(arrows.len());
        for (a, arr) in arrows.iter().enumerate() {
            let inv = by_source[arr.target]
                .iter()
                .copied()
                .find(|&b| arrows[b].target == arr.source && c(b, a) == identities[arr.source] && c(a, b) == identities[arr.target]);
            inverses.push(inv.ok_or_else(|| GroupoidError::Axiom(format!("arrow {} has no inverse", arr.name)))?);
        }
        for b in 0..arrows.len() {
            for &a in &by_source[arrows[b].target] {
                let ab = c(a, b);
                for &z in &by_target[arrows[b].source] {
                    if c(ab, z) != c(a, c(b, z)) {
                        return Err(GroupoidError::Axiom(format!(
                            "associativity fails on {}, {}, {}",
                            arrows[a].name, arrows[b].name, arrows[z].name
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroupoid {
            units,
            arrows,
            identities,
            inverses,
            table,
            by_source,
            by_target,
        })
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrow(&self, a: usize) -> &Arrow {
        &self.arrows[a]
    }

    pub fn source(&self, a: usize) -> usize {
        self.arrows[a].source
    }

    pub fn target(&self, a: usize) -> usize {
        self.arrows[a].target
    }

    pub fn identity(&self, u: usize) -> usize {
        self.identities[u]
    }

    pub fn is_identity(&self, a: usize) -> bool {
        self.identities[self.arrows[a].source] == a
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// `a ∘ b`, or `None` when `source(a) ≠ target(b)`.
    pub fn compose(&self, a: usize, b: usize) -> Option<usize> {
        self.table.get(&(a as u32, b as u32)).map(|&c| c as usize)
    }

    pub fn arrows_from(&self, u: usize) -> &[usize] {
        &self.by_source[u]
    }

    pub fn arrows_to(&self, u: usize) -> &[usize] {
        &self.by_target[u]
    }

    /// Composable pairs `(a, b)` with their composite, sorted.
    pub fn composition_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut t: Vec<_> = self
            .table
            .iter()
            .map(|(&(a, b), &c)| (a as usize, b as usize, c as usize))
            .collect();
        t.sort_unstable();
        t
    }

    /// Orbits as sorted unit lists, ordered by least unit.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.units.len()];
        let mut out = Vec::new();
        for u in 0..self.units.len() {
            if seen[u] {
                continue;
            }
            let mut orbit: Vec<usize> = self.by_source[u].iter().map(|&a| self.arrows[a].target).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &v in &orbit {
                seen[v] = true;
            }
            out.push(orbit);
        }
        out
    }

    /// Arrows from `u` to `u`.
    pub fn isotropy_arrows(&self, u: usize) -> Vec<usize> {
        self.by_source[u].iter().copied().filter(|&a| self.arrows[a].target == u).collect()
    }

    pub fn isotropy_group(&self, u: usize) -> FiniteGroup {
        let mut arrs = self.isotropy_arrows(u);
        let id = self.identities[u];
        arrs.retain(|&a| a != id);
        arrs.insert(0, id);
        let pos: HashMap<usize, usize> = arrs.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let table = arrs
            .iter()
            .map(|&a| arrs.iter().map(|&b| pos[&self.compose(a, b).expect("loops compose")]).collect())
            .collect();
        FiniteGroup::from_table(table)
    }

    pub fn summary(&self) -> GroupoidSummary {
        let orbits = self
            .orbits()
            .into_iter()
            .map(|o| OrbitSummary {
                representative: self.units[o[0]].clone(),
                size: o.len(),
                isotropy: self.isotropy_group(o[0]),
            })
            .collect();
        GroupoidSummary { orbits }
    }

    pub fn composition_hash(&self) -> String {
        let mut h = Sha256::new();
        for (a, b, c) in self.composition_triples() {
            h.update(format!("{a},{b},{c}\n").as_bytes());
        }
        hex_digest(h)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "units": self.units,
            "arrows": self.arrows.iter().enumerate().map(|(i, a)| json!({
                "id": i, "src": a.source, "tgt": a.target, "name": a.name,
            })).collect::<Vec<_>>(),
            "composition": self.composition_triples(),
            "composition_hash": self.composition_hash(),
        })
    }

    pub fn from_json(doc: &Value) -> Result<FiniteGroupoid, GroupoidError> {
        let bad = |m: &str| GroupoidError::Format(m.to_string());
        let units: Vec<String> = serde_json::from_value(doc.get("units").cloned().ok_or_else(|| bad("missing units"))?)
            .map_err(|e| bad(&e.to_string()))?;
        let raw = doc.get("arrows").and_then(Value::as_array).ok_or_else(|| bad("missing arrows"))?;
        let mut arrows = Vec::with_capacity(raw.len());
        for (i, a) in raw.iter().enumerate() {
            let field = |k: &str| a.get(k).and_then(Value::as_u64).map(|x| x as usize);
            if field("id") != Some(i) {
                return Err(bad("arrow ids must be 0, 1, 2, ... in order"));
            }
            arrows.push(Arrow {
                source: field("src").ok_or_else(|| bad("arrow without src"))?,
                target: field("tgt").ok_or_else(|| bad("arrow without tgt"))?,
                name: a.get("name").and_then(Value::as_str).unwrap_or_default().to_string(),
            });
        }
        let triples: Vec<(usize, usize, usize)> =
            serde_json::from_value(doc.get("composition").cloned().ok_or_else(|| bad("missing composition"))?)
                .map_err(|e| bad(&e.to_string()))?;
        let table: HashMap<(usize, usize), usize> = triples.into_iter().map(|(a, b, c)| ((a, b), c)).collect();
        let g = FiniteGroupoid::new(units, arrows, |a, b| table.get(&(a, b)).copied())?;
        if g.table.len() != table.len() {
            return Err(bad("composition lists non-composable pairs"));
        }
        if let Some(h) = doc.get("composition_hash").and_then(Value::as_str) {
            if h != g.composition_hash() {
                return Err(bad("composition hash mismatch"));
            }
        }
        Ok(g)
    }

    /// The groupoid with units `F` and the arrows starting in `F`.
    pub fn reduction(&self, f: &BTreeSet<usize>) -> Result<FiniteGroupoid, GroupoidError> {
        if let Verdict::Fail(w) = is_saturated(self, f) {
            return Err(GroupoidError::NotSaturated(w));
        }
        Ok(self.restrict(f).0)
    }

    /// Restriction to units `F`; returns the new groupoid and the old arrow
    /// index of each new arrow.
    fn restrict(&self, f: &BTreeSet<usize>) -> (FiniteGroupoid, Vec<usize>) {
        let unit_map: HashMap<usize, usize> = f.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let kept: Vec<usize> = (0..self.arrows.len())
            .filter(|&a| unit_map.contains_key(&self.arrows[a].source) && unit_map.contains_key(&self.arrows[a].target))
            .collect();
        let arrow_map: HashMap<usize, usize> = kept.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let arrows = kept
            .iter()
            .map(|&a| Arrow {
                source: unit_map[&self.arrows[a].source],
                target: unit_map[&self.arrows[a].target],
                name: self.arrows[a].name.clone(),
            })
            .collect();
        let units = f.iter().map(|&u| self.units[u].clone()).collect();
        let g = FiniteGroupoid::new(units, arrows, |a, b| {
            self.compose(kept[a], kept[b]).and_then(|c| arrow_map.get(&c).copied())
        })
        .expect("full subgroupoids of a groupoid are groupoids");
        (g, kept)
    }
}

pub(crate) fn hex_digest(h: Sha256) -> String {
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// The pair groupoid `X × X`: one arrow `(z, x): x → z` per ordered pair.
pub fn pair_groupoid(points: &[String]) -> Result<FiniteGroupoid, GroupoidError> {
    let trivial = FiniteGroup::trivial();
    pair_group_groupoid(points, &trivial)
}

/// `X × X × K` for a finite group `K`: arrows `(z, k, x): x → z` composing
/// as `(z, k, y)(y, l, x) = (z, kl, x)`.
pub fn pair_group_groupoid(points: &[String], k: &FiniteGroup) -> Result<FiniteGroupoid, GroupoidError> {
    if points.is_empty() {
        return Err(GroupoidError::NoUnits);
    }
    let n = points.len();
    let m = k.order();
    let id = |z: usize, g: usize, x: usize| (z * m + g) * n + x;
    let mut arrows = Vec::with_capacity(n * n * m);
    for z in 0..n {
        for g in 0..m {
            for x in 0..n {
                let name = if m == 1 {
                    format!("({}, {})", points[z], points[x])
                } else {
                    format!("({}, k{}, {})", points[z], g, points[x])
                };
                arrows.push(Arrow { source: x, target: z, name });
            }
        }
    }
    FiniteGroupoid::new(points.to_vec(), arrows, |a, b| {
        let (z, g) = (a / n / m, a / n % m);
        let (l, x) = (b / n % m, b % n);
        Some(id(z, k.mul(g, l), x))
    })
}

/// Disjoint union, units and arrows concatenated in order.
pub fn disjoint_union(parts: &[FiniteGroupoid]) -> Result<FiniteGroupoid, GroupoidError> {
    let mut units = Vec::new();
    let mut arrows = Vec::new();
    let mut offsets = Vec::new();
    for p in parts {
        offsets.push((units.len(), arrows.len()));
        let uo = units.len();
        units.extend(p.units.iter().cloned());
        arrows.extend(p.arrows.iter().map(|a| Arrow {
            source: a.source + uo,
            target: a.target + uo,
            name: a.name.clone(),
        }));
    }
    if units.is_empty() {
        return Err(GroupoidError::NoUnits);
    }
    let owner = |a: usize| offsets.iter().rposition(|&(_, ao)| ao <= a).expect("arrow in some part");
    FiniteGroupoid::new(units, arrows, |a, b| {
        let (pa, pb) = (owner(a), owner(b));
        if pa != pb {
            return None;
        }
        let ao = offsets[pa].1;
        parts[pa].compose(a - ao, b - ao).map(|c| c + ao)
    })
}

/// A partial action of a group on named points, given on a finite support.
#[derive(Debug, Clone)]
pub struct PartialAction {
    pub ctx: GroupContext,
    pub points: Vec<String>,
    pub support: Vec<GroupElement>,
    pub maps: Vec<PartialBijection>,
}

/// The transformation groupoid: arrows `(g, y): y → θ(g)y` for `g` in the
/// support and `y ∈ dom θ(g)`, composing as `(g, θ(h)y)(h, y) = (gh, y)`.
///
/// The support must contain the identity acting as the identity, be closed
/// under inverses with `θ(g⁻¹) = θ(g)⁻¹`, and satisfy `θ(g)θ(h) ≤ θ(gh)`; a
/// nonzero `θ(g)θ(h)` with `gh` outside the support is reported as a leak.
pub fn transformation_groupoid(action: &PartialAction) -> Result<FiniteGroupoid, GroupoidError> {
    let ctx = &action.ctx;
    if action.points.is_empty() {
        return Err(GroupoidError::NoUnits);
    }
    if action.support.len() != action.maps.len() {
        return Err(GroupoidError::ActionAxiom("one map per support element required".into()));
    }
    let pos: HashMap<&GroupElement, usize> = action.support.iter().enumerate().map(|(i, g)| (g, i)).collect();
    if pos.len() != action.support.len() {
        return Err(GroupoidError::ActionAxiom("support lists an element twice".into()));
    }
    for g in &action.support {
        ctx.validate(g)?;
    }
    let e = ctx.identity();
    match pos.get(&e) {
        Some(&i) if action.maps[i].size() == action.points.len() && action.maps[i].is_idempotent() => {}
        _ => return Err(GroupoidError::ActionAxiom("θ(e) must be the identity".into())),
    }
    for (i, g) in action.support.iter().enumerate() {
        let gi = ctx.inv_unchecked(g);
        match pos.get(&gi) {
            Some(&j) if action.maps[j] == action.maps[i].inverse() => {}
            _ => {
                return Err(GroupoidError::ActionAxiom(format!(
                    "θ({}) is not the inverse of θ({})",
                    ctx.format(&gi),
                    ctx.format(g)
                )))
            }
        }
    }
    for (i, g) in action.support.iter().enumerate() {
        for (j, h) in action.support.iter().enumerate() {
            let prod = action.maps[i].compose_unchecked(&action.maps[j]);
            if prod.is_zero() {
                continue;
            }
            let gh = ctx.mul_unchecked(g, h);
            let Some(&k) = pos.get(&gh) else {
                return Err(GroupoidError::SupportLeak {
                    g: ctx.format(g),
                    h: ctx.format(h),
                });
            };
            if !prod.leq_unchecked(&action.maps[k]) {
                return Err(GroupoidError::ActionAxiom(format!(
                    "θ({})θ({}) ≰ θ({})",
                    ctx.format(g),
                    ctx.format(h),
                    ctx.format(&gh)
                )));
            }
        }
    }

    let mut arrows = Vec::new();
    let mut key: Vec<(usize, usize)> = Vec::new();
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, g) in action.support.iter().enumerate() {
        for (y, z) in action.maps[i].pairs() {
            lookup.insert((i, y), arrows.len());
            key.push((i, y));
            arrows.push(Arrow {
                source: y,
                target: z,
                name: format!("({}, {})", ctx.format(g), action.points[y]),
            });
        }
    }
    FiniteGroupoid::new(action.points.clone(), arrows, |a, b| {
        let (ga, _) = key[a];
        let (gb, y) = key[b];
        let gh = ctx.mul_unchecked(&action.support[ga], &action.support[gb]);
        lookup.get(&(pos[&gh], y)).copied()
    })
}

/// A functor from a finite groupoid to a group.
#[derive(Debug, Clone)]
pub struct Cocycle {
    groupoid: FiniteGroupoid,
    ctx: GroupContext,
    labels: Vec<GroupElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaithfulWitness {
    pub first: String,
    pub second: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrivialCondition {
    pub holds: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TcfReport {
    pub transverse: TrivialCondition,
    pub closed: TrivialCondition,
    pub faithful: Verdict<FaithfulWitness>,
    pub outcome: Outcome,
}

impl Cocycle {
    /// Checks the functor law on every composable pair and that identities
    /// are labeled by the group identity.
    pub fn new(groupoid: FiniteGroupoid, ctx: GroupContext, labels: Vec<GroupElement>) -> Result<Cocycle, GroupoidError> {
        if labels.len() != groupoid.arrow_count() {
            return Err(GroupoidError::NotFunctor(format!(
                "{} labels for {} arrows",
                labels.len(),
                groupoid.arrow_count()
            )));
        }
        for g in &labels {
            ctx.validate(g)?;
        }
        for u in 0..groupoid.unit_count() {
            let id = groupoid.identity(u);
            if !ctx.is_identity(&labels[id]) {
                return Err(GroupoidError::NotFunctor(format!(
                    "identity arrow {} labeled {}",
                    groupoid.arrow(id).name,
                    ctx.format(&labels[id])
                )));
            }
        }
        for (a, b, c) in groupoid.composition_triples() {
            if labels[c] != ctx.mul_unchecked(&labels[a], &labels[b]) {
                return Err(GroupoidError::NotFunctor(format!(
                    "ρ({} ∘ {}) ≠ ρ({})ρ({})",
                    groupoid.arrow(a).name,
                    groupoid.arrow(b).name,
                    groupoid.arrow(a).name,
                    groupoid.arrow(b).name
                )));
            }
        }
        Ok(Cocycle { groupoid, ctx, labels })
    }

    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn ctx(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn labels(&self) -> &[GroupElement] {
        &self.labels
    }

    pub fn label(&self, a: usize) -> &GroupElement {
        &self.labels[a]
    }

    /// `γ ↦ (r(γ), ρ(γ), s(γ))` is injective.
    pub fn check_faithful(&self) -> Verdict<FaithfulWitness> {
        let mut seen: HashMap<(usize, &GroupElement, usize), usize> = HashMap::new();
        for (a, arr) in self.groupoid.arrows().iter().enumerate() {
            if let Some(&b) = seen.get(&(arr.target, &self.labels[a], arr.source)) {
                return Verdict::Fail(FaithfulWitness {
                    first: self.groupoid.arrow(b).name.clone(),
                    second: arr.name.clone(),
                    label: self.ctx.format(&self.labels[a]),
                });
            }
            seen.insert((arr.target, &self.labels[a], arr.source), a);
        }
        Verdict::Pass
    }

    /// Transverse and closed are automatic for finite discrete groupoids, so
    /// the overall verdict is the faithfulness verdict.
    pub fn tcf_report(&self) -> TcfReport {
        let note = "holds trivially: finite discrete topology; it suffices to check the map on arrows, \
                    and every map out of a finite discrete space is open and closed"
            .to_string();
        let faithful = self.check_faithful();
        TcfReport {
            transverse: TrivialCondition {
                holds: true,
                note: note.clone(),
            },
            closed: TrivialCondition { holds: true, note },
            outcome: faithful.outcome(),
            faithful,
        }
    }

    /// The cocycle restricted to a saturated set of units.
    pub fn reduce(&self, f: &BTreeSet<usize>) -> Result<Cocycle, GroupoidError> {
        if let Verdict::Fail(w) = is_saturated(&self.groupoid, f) {
            return Err(GroupoidError::NotSaturated(w));
        }
        let (g, kept) = self.groupoid.restrict(f);
        let labels = kept.iter().map(|&a| self.labels[a].clone()).collect();
        Cocycle::new(g, self.ctx.clone(), labels)
    }

    pub fn to_json(&self) -> Value {
        let mut doc = self.groupoid.to_json();
        let arrows = doc["arrows"].as_array_mut().expect("arrows array");
        for (i, a) in arrows.iter_mut().enumerate() {
            a["label"] = Value::String(self.ctx.format(&self.labels[i]));
        }
        doc["group"] = serde_json::to_value(self.ctx.spec()).expect("serializable spec");
        doc
    }

    pub fn from_json(doc: &Value) -> Result<Cocycle, GroupoidError> {
        let spec: GroupSpec = serde_json::from_value(
            doc.get("group")
                .cloned()
                .ok_or_else(|| GroupoidError::Format("missing group".into()))?,
        )
        .map_err(|e| GroupoidError::Format(e.to_string()))?;
        let ctx = GroupContext::new(spec)?;
        let g = FiniteGroupoid::from_json(doc)?;
        let raw = doc["arrows"].as_array().expect("validated by from_json");
        let labels = raw
            .iter()
            .map(|a| match a.get("label") {
                Some(v) => ctx.element_from_json(v).map_err(GroupoidError::from),
                None => Err(GroupoidError::Format("arrow without label".into())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Cocycle::new(g, ctx, labels)
    }
}

pub fn check_faithful(rho: &Cocycle) -> Verdict<FaithfulWitness> {
    rho.check_faithful()
}

pub fn tcf_report(rho: &Cocycle) -> TcfReport {
    rho.tcf_report()
}

pub fn reduce_cocycle(rho: &Cocycle, f: &BTreeSet<usize>) -> Result<Cocycle, GroupoidError> {
    rho.reduce(f)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SaturationWitness {
    pub arrow: String,
    pub arrow_index: usize,
    pub source: String,
    pub target: String,
}

/// Every arrow starting in `F` ends in `F`.
pub fn is_saturated(g: &FiniteGroupoid, f: &BTreeSet<usize>) -> Verdict<SaturationWitness> {
    for &u in f {
        if u >= g.unit_count() {
            continue;
        }
        for &a in g.arrows_from(u) {
            let t = g.target(a);
            if !f.contains(&t) {
                return Verdict::Fail(SaturationWitness {
                    arrow: g.arrow(a).name.clone(),
                    arrow_index: a,
                    source: g.units()[u].clone(),
                    target: g.units()[t].clone(),
                });
            }
        }
    }
    Verdict::Pass
}

/// A random groupoid with at most `max_units` units: a disjoint union of
/// connected pieces `O × O × ℤ/k` with orbit sizes up to 8 and `k ≤ 3`.
pub fn random_groupoid<R: Rng>(rng: &mut R, max_units: usize) -> FiniteGroupoid {
    let total = rng.gen_range(1..=max_units.max(1));
    let mut parts = Vec::new();
    let mut used = 0;
    while used < total {
        let size = rng.gen_range(1..=8usize.min(total - used));
        let k = FiniteGroup::cyclic(rng.gen_range(1..=3));
        let names: Vec<String> = (used..used + size).map(|i| format!("u{i}")).collect();
        parts.push(pair_group_groupoid(&names, &k).expect("nonempty"));
        used += size;
    }
    disjoint_union(&parts).expect("nonempty")
}

/// The coboundary cocycle `(z, ·, x) ↦ c(z) − c(x)` into `ℤ` for a potential
/// `c` on units.
pub fn coboundary_cocycle(g: &FiniteGroupoid, potential: &[i64]) -> Result<Cocycle, GroupoidError> {
    let ctx = GroupContext::free_abelian(1)?;
    let labels = g
        .arrows()
        .iter()
        .map(|a| GroupElement::Vector(vec![potential[a.target] - potential[a.source]]))
        .collect();
    Cocycle::new(g.clone(), ctx, labels)
}

/// Unit indices of each orbit, keyed by least unit.
pub fn orbit_map(g: &FiniteGroupoid) -> BTreeMap<usize, Vec<usize>> {
    g.orbits().into_iter().map(|o| (o[0], o)).collect()
}
