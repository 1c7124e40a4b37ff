//! Inverse monoids of partial bijections.
//!
//! [`InverseMonoid::generate`] closes a finite set of partial bijections under
//! composition and inversion. The order-theoretic classification (0-E-unitary,
//! 0-F-inverse, maximal elements) and the group-valued map `Φ` used to certify
//! strong 0-F-inversity are computed from the closed element set.

pub mod io;
pub mod prefix;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::group::{GroupContext, GroupElement, GroupError};
use crate::pbij::{Carrier, PartialBijection, PbijError};
use crate::verdict::Verdict;

pub const DEFAULT_MAX_ELEMENTS: usize = 100_000;
pub const DEFAULT_MAX_WORD_LENGTH: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonoidError {
    #[error(transparent)]
    Pbij(#[from] PbijError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("monoid closure was truncated ({0}); the check cannot be decided")]
    Truncated(TruncationReason),
    #[error("monoid is not 0-E-unitary: {0}")]
    NotZeroEUnitary(EUnitaryWitness),
    #[error("monoid is not 0-F-inverse: {0}")]
    NotZeroFInverse(CoverWitness),
    #[error("generators carry no group labels")]
    MissingLabels,
    #[error("maximal element {0} has no label")]
    UnlabeledMaximal(String),
    #[error("element {element} carries conflicting labels {labels:?}")]
    AmbiguousLabel { element: String, labels: Vec<String> },
    #[error("the identity map is labeled {0}, not the group identity")]
    IdentityLabel(String),
    #[error("labels violate θ(g)θ(h) ≤ θ(gh) at g = {g}, h = {h}")]
    NotDualPrehomomorphism { g: String, h: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_elements: usize,
    pub max_word_length: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_elements: DEFAULT_MAX_ELEMENTS,
            max_word_length: DEFAULT_MAX_WORD_LENGTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationReason {
    MaxElements,
    MaxWordLength,
}

impl fmt::Display for TruncationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruncationReason::MaxElements => "element limit reached",
            TruncationReason::MaxWordLength => "word length limit reached",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum ClosureStatus {
    Complete,
    Truncated(TruncationReason),
}

/// A generator or the inverse of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    Gen(usize),
    Inv(usize),
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Gen(i) => write!(f, "g{i}"),
            Letter::Inv(i) => write!(f, "g{i}*"),
        }
    }
}

/// How an element was reached. Words are read as products left to right,
/// so `[g0, g1]` is `g0 ∘ g1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    Word(Vec<Letter>),
    /// The zero map, adjoined because no product of generators is empty.
    AdjoinedZero,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Derivation::Word(w) if w.is_empty() => f.write_str("1"),
            Derivation::Word(w) => {
                let parts: Vec<String> = w.iter().map(Letter::to_string).collect();
                f.write_str(&parts.join(" "))
            }
            Derivation::AdjoinedZero => f.write_str("0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EUnitaryWitness {
    pub idempotent: usize,
    pub element: usize,
    pub idempotent_graph: String,
    pub element_graph: String,
}

impl fmt::Display for EUnitaryWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ≤ {} with the latter not idempotent", self.idempotent_graph, self.element_graph)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverWitness {
    pub element: usize,
    pub element_graph: String,
    pub covers: Vec<usize>,
    pub cover_graphs: Vec<String>,
}

impl fmt::Display for CoverWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} has {} maximal covers", self.element_graph, self.covers.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrehomWitness {
    pub left: String,
    pub right: String,
    pub product: String,
    pub phi_product: String,
    pub phi_left_times_right: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PurityWitness {
    pub element: String,
}

/// Order data computed once per monoid.
#[derive(Debug)]
struct OrderAnalysis {
    maximal: Vec<bool>,
    /// Maximal elements above each element; empty for zero.
    covers: Vec<Vec<usize>>,
}

/// A finite inverse monoid of partial bijections.
#[derive(Debug)]
pub struct InverseMonoid {
    carrier: Arc<Carrier>,
    elements: Vec<PartialBijection>,
    index: HashMap<PartialBijection, usize>,
    derivations: Vec<Derivation>,
    generators: Vec<PartialBijection>,
    labels: Option<(GroupContext, Vec<GroupElement>)>,
    status: ClosureStatus,
    zero: usize,
    /// Element ids containing each graph pair `(x, y)`, indexed `x * n + y`.
    pair_index: Vec<Vec<u32>>,
    order: OnceLock<OrderAnalysis>,
}

impl InverseMonoid {
    /// Breadth-first closure of `gens` under composition and inversion.
    pub fn generate(
        carrier: &Arc<Carrier>,
        gens: &[PartialBijection],
        limits: Limits,
    ) -> Result<InverseMonoid, MonoidError> {
        Self::build(carrier, gens.to_vec(), None, limits)
    }

    /// Like [`generate`](Self::generate), recording a group label per generator.
    pub fn generate_labeled(
        carrier: &Arc<Carrier>,
        ctx: &GroupContext,
        gens: &[(PartialBijection, GroupElement)],
        limits: Limits,
    ) -> Result<InverseMonoid, MonoidError> {
        for (_, g) in gens {
            ctx.validate(g)?;
        }
        let maps = gens.iter().map(|(s, _)| s.clone()).collect();
        let labels = gens.iter().map(|(_, g)| g.clone()).collect();
        Self::build(carrier, maps, Some((ctx.clone(), labels)), limits)
    }

    fn build(
        carrier: &Arc<Carrier>,
        generators: Vec<PartialBijection>,
        labels: Option<(GroupContext, Vec<GroupElement>)>,
        limits: Limits,
    ) -> Result<InverseMonoid, MonoidError> {
        let identity = PartialBijection::identity(carrier);
        for g in &generators {
            // carrier check
            identity.compose(g)?;
        }
        let mut letters = Vec::with_capacity(2 * generators.len());
        for (i, g) in generators.iter().enumerate() {
            letters.push((Letter::Gen(i), g.clone()));
            letters.push((Letter::Inv(i), g.inverse()));
        }

        let mut elements = vec![identity.clone()];
        let mut index = HashMap::from([(identity, 0usize)]);
        let mut words: Vec<Vec<Letter>> = vec![Vec::new()];
        let mut status = ClosureStatus::Complete;
        let mut head = 0;
        'bfs: while head < elements.len() {
            let x = elements[head].clone();
            let depth = words[head].len();
            for (letter, map) in &letters {
                let y = x.compose_unchecked(map);
                if index.contains_key(&y) {
                    continue;
                }
                if depth + 1 > limits.max_word_length {
                    status = ClosureStatus::Truncated(TruncationReason::MaxWordLength);
                    break 'bfs;
                }
                if elements.len() >= limits.max_elements {
                    status = ClosureStatus::Truncated(TruncationReason::MaxElements);
                    break 'bfs;
                }
                let mut w = words[head].clone();
                w.push(*letter);
                index.insert(y.clone(), elements.len());
                elements.push(y);
                words.push(w);
            }
            head += 1;
        }

        let mut derivations: Vec<Derivation> = words.into_iter().map(Derivation::Word).collect();
        let zero_map = PartialBijection::zero(carrier);
        let zero = match index.get(&zero_map) {
            Some(&z) => z,
            None => {
                index.insert(zero_map.clone(), elements.len());
                elements.push(zero_map);
                derivations.push(Derivation::AdjoinedZero);
                elements.len() - 1
            }
        };

        let n = carrier.len();
        let mut pair_index = vec![Vec::new(); n * n];
        for (i, s) in elements.iter().enumerate() {
            for (x, y) in s.pairs() {
                pair_index[x * n + y].push(i as u32);
            }
        }

        Ok(InverseMonoid {
            carrier: carrier.clone(),
            elements,
            index,
            derivations,
            generators,
            labels,
            status,
            zero,
            pair_index,
            order: OnceLock::new(),
        })
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[PartialBijection] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &PartialBijection {
        &self.elements[i]
    }

    pub fn position(&self, s: &PartialBijection) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn derivation(&self, i: usize) -> &Derivation {
        &self.derivations[i]
    }

    pub fn generators(&self) -> &[PartialBijection] {
        &self.generators
    }

    pub fn labels(&self) -> Option<(&GroupContext, &[GroupElement])> {
        self.labels.as_ref().map(|(c, l)| (c, l.as_slice()))
    }

    pub fn status(&self) -> ClosureStatus {
        self.status
    }

    pub fn is_complete(&self) -> bool {
        self.status == ClosureStatus::Complete
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn zero_index(&self) -> usize {
        self.zero
    }

    /// Re-evaluate a stored derivation.
    pub fn evaluate(&self, d: &Derivation) -> PartialBijection {
        match d {
            Derivation::AdjoinedZero => PartialBijection::zero(&self.carrier),
            Derivation::Word(w) => w.iter().fold(PartialBijection::identity(&self.carrier), |acc, l| {
                let m = match l {
                    Letter::Gen(i) => self.generators[*i].clone(),
                    Letter::Inv(i) => self.generators[*i].inverse(),
                };
                acc.compose_unchecked(&m)
            }),
        }
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.elements[i].is_idempotent()).collect()
    }

    /// Indices of all elements `t` with `s ≤ t`, ascending.
    pub fn uppers(&self, s: usize) -> Vec<usize> {
        let el = &self.elements[s];
        let n = self.carrier.len();
        let best = el
            .pairs()
            .map(|(x, y)| &self.pair_index[x * n + y])
            .min_by_key(|l| l.len());
        match best {
            None => (0..self.len()).collect(),
            Some(cands) => cands
                .iter()
                .map(|&t| t as usize)
                .filter(|&t| el.leq_unchecked(&self.elements[t]))
                .collect(),
        }
    }

    fn analysis(&self) -> &OrderAnalysis {
        self.order.get_or_init(|| {
            let m = self.len();
            let mut maximal = vec![false; m];
            for (s, flag) in maximal.iter_mut().enumerate() {
                if s == self.zero {
                    continue;
                }
                let size = self.elements[s].size();
                *flag = self.uppers(s).iter().all(|&t| self.elements[t].size() == size);
            }
            let covers = (0..m)
                .map(|s| {
                    if s == self.zero {
                        Vec::new()
                    } else {
                        self.uppers(s).into_iter().filter(|&t| maximal[t]).collect()
                    }
                })
                .collect();
            OrderAnalysis { maximal, covers }
        })
    }

    /// Strict order relation `s < t` as index pairs, sorted.
    pub fn natural_order(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|s| self.uppers(s).into_iter().filter(move |&t| t != s).map(move |t| (s, t)))
            .collect()
    }

    /// Nonzero elements with nothing strictly above them.
    pub fn maximal_elements(&self) -> Vec<usize> {
        let a = self.analysis();
        (0..self.len()).filter(|&i| a.maximal[i]).collect()
    }

    pub fn is_maximal(&self, s: usize) -> bool {
        self.analysis().maximal[s]
    }

    /// Maximal elements above `s`.
    pub fn maximal_covers(&self, s: usize) -> &[usize] {
        &self.analysis().covers[s]
    }

    /// The unique maximal element above `s`, when there is exactly one.
    pub fn unique_cover(&self, s: usize) -> Option<usize> {
        match self.maximal_covers(s) {
            [u] => Some(*u),
            _ => None,
        }
    }

    fn truncation_note(&self) -> Option<String> {
        match self.status {
            ClosureStatus::Complete => None,
            ClosureStatus::Truncated(r) => Some(format!("closure truncated: {r}")),
        }
    }

    /// Every nonzero idempotent below `s` forces `s` to be idempotent.
    pub fn is_zero_e_unitary(&self) -> Verdict<EUnitaryWitness> {
        if let Some(note) = self.truncation_note() {
            return Verdict::Unknown(note);
        }
        for e in self.idempotents() {
            if e == self.zero {
                continue;
            }
            if let Some(s) = self
                .uppers(e)
                .into_iter()
                .find(|&s| !self.elements[s].is_idempotent())
            {
                return Verdict::Fail(EUnitaryWitness {
                    idempotent: e,
                    element: s,
                    idempotent_graph: self.elements[e].to_string(),
                    element_graph: self.elements[s].to_string(),
                });
            }
        }
        Verdict::Pass
    }

    /// Each nonzero element lies below exactly one maximal element.
    ///
    /// Fails with [`MonoidError::NotZeroEUnitary`] when the precondition does
    /// not hold.
    pub fn is_zero_f_inverse(&self) -> Result<Verdict<CoverWitness>, MonoidError> {
        match self.is_zero_e_unitary() {
            Verdict::Unknown(note) => return Ok(Verdict::Unknown(note)),
            Verdict::Fail(w) => return Err(MonoidError::NotZeroEUnitary(w)),
            Verdict::Pass => {}
        }
        for s in 0..self.len() {
            if s == self.zero {
                continue;
            }
            let covers = self.maximal_covers(s);
            if covers.len() != 1 {
                return Ok(Verdict::Fail(CoverWitness {
                    element: s,
                    element_graph: self.elements[s].to_string(),
                    covers: covers.to_vec(),
                    cover_graphs: covers.iter().map(|&c| self.elements[c].to_string()).collect(),
                }));
            }
        }
        Ok(Verdict::Pass)
    }

    /// Presentation of the universal group: generators `Max(S)`, relations
    /// `s * t = u` with `u` the maximal cover of a nonzero product `st`.
    pub fn universal_group_presentation(&self) -> Result<Presentation, MonoidError> {
        self.require_f_inverse()?;
        let generators = self.maximal_elements();
        let mut relations = Vec::new();
        for &a in &generators {
            for &b in &generators {
                let p = self.elements[a].compose_unchecked(&self.elements[b]);
                if p.is_zero() {
                    continue;
                }
                let pi = self.index[&p];
                relations.push((a, b, self.unique_cover(pi).expect("0-F-inverse")));
            }
        }
        Ok(Presentation { generators, relations })
    }

    fn require_f_inverse(&self) -> Result<(), MonoidError> {
        match self.is_zero_f_inverse()? {
            Verdict::Pass => Ok(()),
            Verdict::Fail(w) => Err(MonoidError::NotZeroFInverse(w)),
            Verdict::Unknown(_) => Err(MonoidError::Truncated(match self.status {
                ClosureStatus::Truncated(r) => r,
                ClosureStatus::Complete => unreachable!("unknown verdict on a complete closure"),
            })),
        }
    }

    /// Build `Φ`, sending each element to the label of its maximal cover.
    /// A generator labeled `g` gives its inverse the label `g⁻¹`.
    ///
    /// The labeling must make `g ↦ θ_g` a dual prehomomorphism
    /// (`θ_g θ_h ≤ θ_gh`, with `θ_gh = 0` when no generator carries `gh`), the
    /// identity map must be labeled by the group identity, and every maximal
    /// element must carry exactly one label.
    pub fn phi_map(&self) -> Result<PhiMap<'_>, MonoidError> {
        let (ctx, gen_labels) = self.labels.as_ref().ok_or(MonoidError::MissingLabels)?;
        self.require_f_inverse()?;

        let id = self.identity_index();
        for (map, g) in self.generators.iter().zip(gen_labels) {
            if self.index[map] == id && !ctx.is_identity(g) {
                return Err(MonoidError::IdentityLabel(ctx.format(g)));
            }
        }
        let inverses: Vec<(PartialBijection, GroupElement)> = self
            .generators
            .iter()
            .zip(gen_labels)
            .map(|(m, g)| (m.inverse(), ctx.inv_unchecked(g)))
            .collect();
        let labeled = self.generators.iter().zip(gen_labels).chain(inverses.iter().map(|(m, g)| (m, g)));
        let mut label_of: BTreeMap<usize, GroupElement> = BTreeMap::from([(id, ctx.identity())]);
        for (map, g) in labeled {
            let i = self.index[map];
            match label_of.get(&i) {
                Some(prev) if prev != g => {
                    return Err(MonoidError::AmbiguousLabel {
                        element: map.to_string(),
                        labels: vec![ctx.format(prev), ctx.format(g)],
                    })
                }
                _ => {
                    label_of.insert(i, g.clone());
                }
            }
        }

        let mut by_label: HashMap<&GroupElement, Vec<usize>> = HashMap::new();
        for (i, g) in &label_of {
            by_label.entry(g).or_default().push(*i);
        }
        for (&u, g) in &label_of {
            for (&v, h) in &label_of {
                let prod = self.elements[u].compose_unchecked(&self.elements[v]);
                if prod.is_zero() {
                    continue;
                }
                let gh = ctx.mul_unchecked(g, h);
                let below = by_label
                    .get(&gh)
                    .is_some_and(|cands| cands.iter().any(|&w| prod.leq_unchecked(&self.elements[w])));
                if !below {
                    return Err(MonoidError::NotDualPrehomomorphism {
                        g: ctx.format(g),
                        h: ctx.format(h),
                    });
                }
            }
        }

        let mut values = Vec::with_capacity(self.len());
        for s in 0..self.len() {
            if s == self.zero {
                values.push(PhiValue::Zero);
                continue;
            }
            let u = self.unique_cover(s).expect("0-F-inverse");
            let g = label_of
                .get(&u)
                .ok_or_else(|| MonoidError::UnlabeledMaximal(self.elements[u].to_string()))?;
            values.push(PhiValue::Group(g.clone()));
        }
        Ok(PhiMap {
            monoid: self,
            ctx: ctx.clone(),
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Presentation {
    pub generators: Vec<usize>,
    pub relations: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PhiValue {
    Zero,
    Group(GroupElement),
}

/// The map `Φ: S → Γ ∪ {0}`.
#[derive(Debug)]
pub struct PhiMap<'a> {
    monoid: &'a InverseMonoid,
    ctx: GroupContext,
    values: Vec<PhiValue>,
}

impl<'a> PhiMap<'a> {
    pub fn monoid(&self) -> &'a InverseMonoid {
        self.monoid
    }

    pub fn target(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn value(&self, s: usize) -> &PhiValue {
        &self.values[s]
    }

    pub fn values(&self) -> &[PhiValue] {
        &self.values
    }

    pub fn format_value(&self, s: usize) -> String {
        match &self.values[s] {
            PhiValue::Zero => "0".to_string(),
            PhiValue::Group(g) => self.ctx.format(g),
        }
    }

    /// For all `s, t`: `st = 0` or `Φ(st) = Φ(s)Φ(t)`.
    pub fn is_prehomomorphism(&self) -> Verdict<PrehomWitness> {
        let m = self.monoid;
        if let Some(note) = m.truncation_note() {
            return Verdict::Unknown(note);
        }
        for s in 0..m.len() {
            let PhiValue::Group(gs) = &self.values[s] else { continue };
            for t in 0..m.len() {
                let PhiValue::Group(gt) = &self.values[t] else { continue };
                let prod = m.elements[s].compose_unchecked(&m.elements[t]);
                if prod.is_zero() {
                    continue;
                }
                let st = m.index[&prod];
                let expected = self.ctx.mul_unchecked(gs, gt);
                if self.values[st] != PhiValue::Group(expected.clone()) {
                    return Verdict::Fail(PrehomWitness {
                        left: m.elements[s].to_string(),
                        right: m.elements[t].to_string(),
                        product: prod.to_string(),
                        phi_product: self.format_value(st),
                        phi_left_times_right: self.ctx.format(&expected),
                    });
                }
            }
        }
        Verdict::Pass
    }

    /// `Φ(s) = e` only for idempotent `s`.
    pub fn is_idempotent_pure(&self) -> Verdict<PurityWitness> {
        let m = self.monoid;
        if let Some(note) = m.truncation_note() {
            return Verdict::Unknown(note);
        }
        for (s, v) in self.values.iter().enumerate() {
            if let PhiValue::Group(g) = v {
                if self.ctx.is_identity(g) && !m.elements[s].is_idempotent() {
                    return Verdict::Fail(PurityWitness {
                        element: m.elements[s].to_string(),
                    });
                }
            }
        }
        Verdict::Pass
    }
}
