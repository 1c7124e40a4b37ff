//! Partial translations of a finite subset of a group.
//!
//! For `X ⊂ Γ` and `g ∈ Γ` the partial translation `t_g` sends `x ↦ x g⁻¹`
//! wherever both ends lie in `X`. The family of nonzero `t_g` is indexed by
//! the difference set `{y⁻¹x : x, y ∈ X}`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::Graph;
use crate::group::{GroupContext, GroupElement, GroupError};
use crate::invmon::{ClosureStatus, InverseMonoid, Limits, MonoidError};
use crate::pbij::{Carrier, PartialBijection};
use crate::verdict::{Outcome, Verdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranslationError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error("point {0} listed more than once")]
    DuplicatePoint(String),
    #[error("point set must be nonempty")]
    Empty,
    #[error("embedding has {found} images for a graph on {expected} vertices")]
    EmbeddingLength { expected: usize, found: usize },
}

/// A finite subset of a group in a fixed listing order.
#[derive(Debug, Clone)]
pub struct PointSet {
    ctx: GroupContext,
    points: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    carrier: Arc<Carrier>,
}

impl PointSet {
    pub fn new(ctx: &GroupContext, points: Vec<GroupElement>) -> Result<PointSet, TranslationError> {
        if points.is_empty() {
            return Err(TranslationError::Empty);
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            ctx.validate(p)?;
            if index.insert(p.clone(), i).is_some() {
                return Err(TranslationError::DuplicatePoint(ctx.format(p)));
            }
        }
        let carrier = Carrier::new(points.iter().map(|p| ctx.format(p))).expect("normal forms are distinct");
        Ok(PointSet {
            ctx: ctx.clone(),
            points,
            index,
            carrier,
        })
    }

    /// Points given in the group's text notation.
    pub fn parse(ctx: &GroupContext, items: &[&str]) -> Result<PointSet, TranslationError> {
        let points = items.iter().map(|s| ctx.parse_element(s)).collect::<Result<_, _>>()?;
        PointSet::new(ctx, points)
    }

    /// A JSON array of elements.
    pub fn from_json(ctx: &GroupContext, value: &Value) -> Result<PointSet, TranslationError> {
        let items = value.as_array().ok_or_else(|| {
            TranslationError::Group(GroupError::Parse("point set must be a JSON array".into()))
        })?;
        let points = items.iter().map(|v| ctx.element_from_json(v)).collect::<Result<_, _>>()?;
        PointSet::new(ctx, points)
    }

    pub fn ctx(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[GroupElement] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &GroupElement {
        &self.points[i]
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn format(&self) -> Vec<String> {
        self.points.iter().map(|p| self.ctx.format(p)).collect()
    }
}

/// `t_g` restricted to `X`; zero when no `x g⁻¹` lands in `X`.
pub fn partial_translation(x: &PointSet, g: &GroupElement) -> Result<PartialBijection, TranslationError> {
    let ctx = &x.ctx;
    ctx.validate(g)?;
    let gi = ctx.inv_unchecked(g);
    let pairs: Vec<(usize, usize)> = x
        .points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| x.position(&ctx.mul_unchecked(p, &gi)).map(|j| (i, j)))
        .collect();
    Ok(PartialBijection::from_pairs(&x.carrier, &pairs).expect("right translation is injective"))
}

#[derive(Debug, Clone)]
pub struct TranslationFamily {
    points: PointSet,
    members: Vec<(GroupElement, PartialBijection)>,
}

/// All nonzero `t_g`, ordered by word length of `g`, then normal form.
pub fn translation_family(x: &PointSet) -> TranslationFamily {
    let ctx = &x.ctx;
    let mut index: Vec<GroupElement> = {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in &x.points {
            for q in &x.points {
                let g = ctx.mul_unchecked(&ctx.inv_unchecked(q), p);
                if seen.insert(g.clone()) {
                    out.push(g);
                }
            }
        }
        out
    };
    index.sort_by(|a, b| {
        ctx.word_length_unchecked(a)
            .cmp(&ctx.word_length_unchecked(b))
            .then_with(|| a.cmp(b))
    });
    let members = index
        .into_iter()
        .map(|g| {
            let t = partial_translation(x, &g).expect("validated points");
            (g, t)
        })
        .collect();
    TranslationFamily {
        points: x.clone(),
        members,
    }
}

impl TranslationFamily {
    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn ctx(&self) -> &GroupContext {
        &self.points.ctx
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.points.carrier
    }

    pub fn members(&self) -> &[(GroupElement, PartialBijection)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn indices(&self) -> Vec<GroupElement> {
        self.members.iter().map(|(g, _)| g.clone()).collect()
    }

    pub fn get(&self, g: &GroupElement) -> Option<&PartialBijection> {
        self.members.iter().find(|(h, _)| h == g).map(|(_, t)| t)
    }

    /// A copy with the member at `g` deleted, used to exercise the checks.
    pub fn remove_member(&self, g: &GroupElement) -> TranslationFamily {
        TranslationFamily {
            points: self.points.clone(),
            members: self.members.iter().filter(|(h, _)| h != g).cloned().collect(),
        }
    }

    /// Generate the inverse monoid with each `t_g` labeled by `g`.
    pub fn monoid(&self, limits: Limits) -> Result<InverseMonoid, TranslationError> {
        Ok(InverseMonoid::generate_labeled(
            self.carrier(),
            self.ctx(),
            &self.members.iter().map(|(g, t)| (t.clone(), g.clone())).collect::<Vec<_>>(),
            limits,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairCover {
    pub source: String,
    pub target: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionCertificate {
    pub points: usize,
    pub pairs: usize,
    pub domain_sum: usize,
    pub covered_once: usize,
    pub uncovered: Vec<PairCover>,
    pub multiply_covered: Vec<PairCover>,
    /// Pairs `(x, y)` covered only by some `t_g` with `g ≠ y⁻¹x`.
    pub wrong_label: Vec<PairCover>,
}

impl PartitionCertificate {
    pub fn holds(&self) -> bool {
        self.uncovered.is_empty()
            && self.multiply_covered.is_empty()
            && self.wrong_label.is_empty()
            && self.covered_once == self.pairs
            && self.domain_sum == self.pairs
    }
}

/// Every ordered pair of points lies in the graph of exactly one member,
/// namely the one labeled `y⁻¹x`.
pub fn verify_partition(fam: &TranslationFamily) -> PartitionCertificate {
    let n = fam.points.len();
    let ctx = fam.ctx();
    let mut cover: Vec<Vec<usize>> = vec![Vec::new(); n * n];
    let mut domain_sum = 0;
    for (m, (_, t)) in fam.members.iter().enumerate() {
        domain_sum += t.size();
        for (x, y) in t.pairs() {
            cover[x * n + y].push(m);
        }
    }
    let names = fam.points.format();
    let mut cert = PartitionCertificate {
        points: n,
        pairs: n * n,
        domain_sum,
        covered_once: 0,
        uncovered: Vec::new(),
        multiply_covered: Vec::new(),
        wrong_label: Vec::new(),
    };
    for x in 0..n {
        for y in 0..n {
            let members = &cover[x * n + y];
            let entry = || PairCover {
                source: names[x].clone(),
                target: names[y].clone(),
                labels: members.iter().map(|&m| ctx.format(&fam.members[m].0)).collect(),
            };
            match members.as_slice() {
                [] => cert.uncovered.push(entry()),
                [m] => {
                    cert.covered_once += 1;
                    let expect = ctx.mul_unchecked(&ctx.inv_unchecked(fam.points.get(y)), fam.points.get(x));
                    if fam.members[*m].0 != expect {
                        cert.wrong_label.push(entry());
                    }
                }
                _ => cert.multiply_covered.push(entry()),
            }
        }
    }
    cert
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContainmentWitness {
    pub g: String,
    pub h: String,
    pub product: String,
    pub bound: String,
}

/// `t_g ∘ t_h ≤ t_{gh}` for every pair of members, where `t_{gh}` is zero
/// when `gh` is not an index.
pub fn verify_containment(fam: &TranslationFamily) -> Verdict<ContainmentWitness> {
    let ctx = fam.ctx();
    let by_label: HashMap<&GroupElement, &PartialBijection> = fam.members.iter().map(|(g, t)| (g, t)).collect();
    let zero = PartialBijection::zero(fam.carrier());
    for (g, tg) in &fam.members {
        for (h, th) in &fam.members {
            let prod = tg.compose_unchecked(th);
            let gh = ctx.mul_unchecked(g, h);
            let bound = by_label.get(&gh).copied().unwrap_or(&zero);
            if !prod.leq_unchecked(bound) {
                return Verdict::Fail(ContainmentWitness {
                    g: ctx.format(g),
                    h: ctx.format(h),
                    product: prod.to_string(),
                    bound: bound.to_string(),
                });
            }
        }
    }
    Verdict::Pass
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub points: Vec<String>,
    pub family_size: usize,
    pub closure: ClosureStatus,
    pub monoid_size: usize,
    pub zero_e_unitary: Verdict<Value>,
    pub zero_f_inverse: Verdict<Value>,
    pub max_equals_family: Verdict<Value>,
    pub phi_prehomomorphism: Verdict<Value>,
    pub phi_idempotent_pure: Verdict<Value>,
    pub outcome: Outcome,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

fn to_value<T: Serialize>(v: Verdict<T>) -> Verdict<Value> {
    match v {
        Verdict::Pass => Verdict::Pass,
        Verdict::Fail(w) => Verdict::Fail(serde_json::to_value(w).expect("serializable witness")),
        Verdict::Unknown(s) => Verdict::Unknown(s),
    }
}

fn error_verdict(e: &MonoidError) -> Verdict<Value> {
    match e {
        MonoidError::Truncated(r) => Verdict::Unknown(format!("closure truncated: {r}")),
        other => Verdict::Fail(json!({ "error": other.to_string() })),
    }
}

/// Generate `S = ⟨𝒯_X⟩` and check that it is 0-E-unitary and 0-F-inverse
/// with `Max(S)` equal to the family, and that `Φ` is an idempotent-pure
/// prehomomorphism (strong 0-F-inversity).
pub fn verify_lemma_pts(fam: &TranslationFamily, limits: Limits) -> Result<LemmaReport, TranslationError> {
    let s = fam.monoid(limits)?;
    let zero_e_unitary = to_value(s.is_zero_e_unitary());
    let zero_f_inverse = match s.is_zero_f_inverse() {
        Ok(v) => to_value(v),
        Err(e) => error_verdict(&e),
    };

    let max_equals_family = if !s.is_complete() {
        Verdict::Unknown("closure truncated".into())
    } else {
        let maxima: HashSet<&PartialBijection> = s.maximal_elements().into_iter().map(|i| s.element(i)).collect();
        let members: HashSet<&PartialBijection> = fam.members.iter().map(|(_, t)| t).collect();
        if maxima == members {
            Verdict::Pass
        } else {
            let mut extra: Vec<String> = maxima.difference(&members).map(|t| t.to_string()).collect();
            let mut missing: Vec<String> = members.difference(&maxima).map(|t| t.to_string()).collect();
            extra.sort();
            missing.sort();
            Verdict::Fail(json!({ "maximal_not_in_family": extra, "family_not_maximal": missing }))
        }
    };

    let (phi_prehomomorphism, phi_idempotent_pure) = match s.phi_map() {
        Ok(phi) => (to_value(phi.is_prehomomorphism()), to_value(phi.is_idempotent_pure())),
        Err(e) => (error_verdict(&e), error_verdict(&e)),
    };

    let outcome = Outcome::all([
        zero_e_unitary.outcome(),
        zero_f_inverse.outcome(),
        max_equals_family.outcome(),
        phi_prehomomorphism.outcome(),
        phi_idempotent_pure.outcome(),
    ]);
    Ok(LemmaReport {
        points: fam.points.format(),
        family_size: fam.len(),
        closure: s.status(),
        monoid_size: s.len(),
        zero_e_unitary,
        zero_f_inverse,
        max_equals_family,
        phi_prehomomorphism,
        phi_idempotent_pure,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistancePair {
    pub u: usize,
    pub v: usize,
    pub graph_distance: usize,
    pub group_distance: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddingReport {
    pub pairs: Vec<DistancePair>,
    /// Smallest group distance observed at each graph distance.
    pub rho_minus: BTreeMap<usize, u32>,
    /// Largest group distance observed at each graph distance.
    pub rho_plus: BTreeMap<usize, u32>,
    pub injective: bool,
    /// Vertex pairs sharing an image.
    pub collisions: Vec<(usize, usize)>,
}

/// Compare graph distances with word distances of the images, over all
/// unordered pairs of vertices in the same component.
pub fn coarse_embedding_report(
    graph: &Graph,
    f: &[GroupElement],
    ctx: &GroupContext,
) -> Result<EmbeddingReport, TranslationError> {
    if f.len() != graph.n() {
        return Err(TranslationError::EmbeddingLength {
            expected: graph.n(),
            found: f.len(),
        });
    }
    for g in f {
        ctx.validate(g)?;
    }
    let mut pairs = Vec::new();
    let mut rho_minus = BTreeMap::new();
    let mut rho_plus = BTreeMap::new();
    let mut collisions = Vec::new();
    for u in 0..graph.n() {
        let dist = graph.bfs(u);
        for v in u + 1..graph.n() {
            if f[u] == f[v] {
                collisions.push((u, v));
            }
            let Some(d) = dist[v] else { continue };
            let gd = ctx.distance(&f[u], &f[v])?;
            rho_minus.entry(d).and_modify(|m: &mut u32| *m = (*m).min(gd)).or_insert(gd);
            rho_plus.entry(d).and_modify(|m: &mut u32| *m = (*m).max(gd)).or_insert(gd);
            pairs.push(DistancePair {
                u,
                v,
                graph_distance: d,
                group_distance: gd,
            });
        }
    }
    Ok(EmbeddingReport {
        pairs,
        rho_minus,
        rho_plus,
        injective: collisions.is_empty(),
        collisions,
    })
}

/// The subgraph of the Cayley graph induced on `X`: `x` and `xs` are joined
/// for each generator `s`.
pub fn cayley_subgraph(x: &PointSet) -> Graph {
    let ctx = &x.ctx;
    let mut edges = Vec::new();
    for (i, p) in x.points.iter().enumerate() {
        for s in ctx.generators() {
            if let Some(j) = x.position(&ctx.mul_unchecked(p, s)) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Graph::new(x.len(), &edges).expect("Cayley graphs of groups have no loops")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z() -> GroupContext {
        GroupContext::free_abelian(1).unwrap()
    }

    fn desk() -> PointSet {
        PointSet::parse(&z(), &["0", "1", "2", "4"]).unwrap()
    }

    #[test]
    fn single_translations() {
        let x = desk();
        let z = z();
        let t1 = partial_translation(&x, &z.parse_element("1").unwrap()).unwrap();
        assert_eq!(t1.to_string(), "{1->0, 2->1}");
        let t0 = partial_translation(&x, &z.identity()).unwrap();
        assert_eq!(t0, PartialBijection::identity(x.carrier()));
        assert!(partial_translation(&x, &z.parse_element("10").unwrap()).unwrap().is_zero());
    }

    #[test]
    fn duplicate_points_rejected() {
        let err = PointSet::parse(&z(), &["0", "1", "0"]).unwrap_err();
        assert_eq!(err, TranslationError::DuplicatePoint("0".into()));
    }

    #[test]
    fn family_of_desk_set() {
        let fam = translation_family(&desk());
        let z = z();
        let labels: Vec<String> = fam.indices().iter().map(|g| z.format(g)).collect();
        assert_eq!(labels, ["0", "-1", "1", "-2", "2", "-3", "3", "-4", "4"]);
        let one = PointSet::parse(&z, &["3"]).unwrap();
        let f1 = translation_family(&one);
        assert_eq!(f1.len(), 1);
        assert_eq!(f1.members()[0].1, PartialBijection::identity(one.carrier()));
    }

    #[test]
    fn free_ball_indices_inside_radius_two() {
        let f2 = GroupContext::free(2).unwrap();
        let ball = f2.ball(&f2.identity(), 1).unwrap();
        let x = PointSet::new(&f2, ball.elements().to_vec()).unwrap();
        let fam = translation_family(&x);
        let b2 = f2.ball(&f2.identity(), 2).unwrap();
        assert!(fam.indices().iter().all(|g| b2.contains(g)));
        // every reduced word of length ≤ 2 is y⁻¹x for some x, y of length ≤ 1
        assert_eq!(fam.len(), 17);
    }

    #[test]
    fn partition_counts() {
        let fam = translation_family(&desk());
        let cert = verify_partition(&fam);
        assert!(cert.holds(), "{cert:?}");
        assert_eq!(cert.domain_sum, 16);
        let sizes: Vec<usize> = fam.members().iter().map(|(_, t)| t.size()).collect();
        assert_eq!(sizes, [4, 2, 2, 2, 2, 1, 1, 1, 1]);

        let z = z();
        let cut = fam.remove_member(&z.parse_element("2").unwrap());
        let cert = verify_partition(&cut);
        assert!(!cert.holds());
        let uncovered: Vec<(String, String)> =
            cert.uncovered.iter().map(|p| (p.source.clone(), p.target.clone())).collect();
        assert_eq!(uncovered, [("2".to_string(), "0".to_string()), ("4".into(), "2".into())]);
    }

    #[test]
    fn containment_law() {
        assert!(verify_containment(&translation_family(&desk())).is_pass());
    }

    #[test]
    fn lemma_on_desk_set() {
        let fam = translation_family(&desk());
        let r = verify_lemma_pts(&fam, Limits::default()).unwrap();
        assert!(r.all_pass(), "{r:?}");
        let s = fam.monoid(Limits::default()).unwrap();
        let phi = s.phi_map().unwrap();
        let z = z();
        let t1 = fam.get(&z.parse_element("1").unwrap()).unwrap();
        let sq = s.position(&t1.compose(t1).unwrap()).unwrap();
        assert_eq!(phi.format_value(sq), "2");
        assert_eq!(phi.format_value(s.identity_index()), "0");
        assert_eq!(phi.format_value(s.zero_index()), "0");
        assert_eq!(phi.value(s.zero_index()), &crate::invmon::PhiValue::Zero);
    }

    #[test]
    fn lemma_on_other_groups() {
        let z2 = GroupContext::free_abelian(2).unwrap();
        let b = z2.ball(&z2.identity(), 2).unwrap();
        let x = PointSet::new(&z2, b.elements().to_vec()).unwrap();
        assert_eq!(x.len(), 13);
        let r = verify_lemma_pts(&translation_family(&x), Limits::default()).unwrap();
        assert!(r.all_pass(), "{r:?}");

        let f2 = GroupContext::free(2).unwrap();
        let x = PointSet::parse(&f2, &["e", "a", "ab"]).unwrap();
        let r = verify_lemma_pts(&translation_family(&x), Limits::default()).unwrap();
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn lemma_reports_truncation_as_unknown() {
        let fam = translation_family(&desk());
        let r = verify_lemma_pts(
            &fam,
            Limits {
                max_elements: 5,
                max_word_length: 16,
            },
        )
        .unwrap();
        assert_eq!(r.outcome, Outcome::Unknown);
    }

    #[test]
    fn lemma_fails_without_a_member() {
        let z = z();
        let fam = translation_family(&desk()).remove_member(&z.parse_element("1").unwrap());
        let r = verify_lemma_pts(&fam, Limits::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Fail);
    }

    #[test]
    fn cycle_embedding_envelopes() {
        let z = z();
        let f: Vec<_> = (0..4).map(|i| GroupElement::Vector(vec![i])).collect();
        let r = coarse_embedding_report(&Graph::cycle(4), &f, &z).unwrap();
        assert_eq!(r.rho_minus[&1], 1);
        assert_eq!(r.rho_plus[&1], 3);
        assert!(r.injective);
        for p in &r.pairs {
            assert!(r.rho_minus[&p.graph_distance] <= p.group_distance);
            assert!(p.group_distance <= r.rho_plus[&p.graph_distance]);
        }

        let single = coarse_embedding_report(&Graph::new(1, &[]).unwrap(), &[z.identity()], &z).unwrap();
        assert!(single.pairs.is_empty() && single.injective);

        let folded = coarse_embedding_report(&Graph::cycle(4), &[f[0].clone(), f[1].clone(), f[0].clone(), f[1].clone()], &z)
            .unwrap();
        assert_eq!(folded.collisions, [(0, 2), (1, 3)]);
    }

    #[test]
    fn cayley_subgraph_of_ball_is_isometric() {
        for ctx in [GroupContext::free(2).unwrap(), GroupContext::free_abelian(2).unwrap()] {
            let ball = ctx.ball(&ctx.identity(), 2).unwrap();
            let x = PointSet::new(&ctx, ball.elements().to_vec()).unwrap();
            let g = cayley_subgraph(&x);
            let r = coarse_embedding_report(&g, x.points(), &ctx).unwrap();
            for (d, lo) in &r.rho_minus {
                assert_eq!(*lo as usize, *d);
                assert_eq!(r.rho_plus[d] as usize, *d);
            }
        }
    }

    proptest! {
        #[test]
        fn partition_and_containment_hold(raw in prop::collection::btree_set((-3i64..=3, -3i64..=3), 1..7)) {
            let z2 = GroupContext::free_abelian(2).unwrap();
            let pts = raw.into_iter().map(|(a, b)| GroupElement::Vector(vec![a, b])).collect();
            let x = PointSet::new(&z2, pts).unwrap();
            let fam = translation_family(&x);
            prop_assert!(verify_partition(&fam).holds());
            prop_assert!(verify_containment(&fam).is_pass());
            let maps: HashSet<&PartialBijection> = fam.members().iter().map(|(_, t)| t).collect();
            prop_assert_eq!(maps.len(), fam.len());
        }
    }
}
