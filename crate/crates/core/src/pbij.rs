//! Partial bijections of a finite carrier set.
//!
//! Composition is right to left: `s.compose(&t)` is the map `x -> s(t(x))`,
//! defined where both stages are defined.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PbijError {
    #[error("partial bijections live on different carriers")]
    CarrierMismatch,
    #[error("duplicate carrier point `{0}`")]
    DuplicatePoint(String),
    #[error("unknown carrier point `{0}`")]
    UnknownPoint(String),
    #[error("point `{0}` has two images")]
    NotFunctional(String),
    #[error("point `{0}` has two preimages")]
    NotInjective(String),
    #[error("argument is not idempotent: {0}")]
    NotIdempotent(String),
    #[error("cannot parse partial bijection: {0}")]
    Parse(String),
}

/// A finite, ordered set of named points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Carrier {
    points: Vec<String>,
    index: HashMap<String, usize>,
}

impl Carrier {
    pub fn new<I, S>(points: I) -> Result<Arc<Carrier>, PbijError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let points: Vec<String> = points.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(PbijError::DuplicatePoint(p.clone()));
            }
        }
        Ok(Arc::new(Carrier { points, index }))
    }

    /// Carrier with points named `0..n`.
    pub fn range(n: usize) -> Arc<Carrier> {
        Carrier::new((0..n).map(|i| i.to_string())).expect("distinct names")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn name(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// An injective partial map on a carrier, stored as a dense image table.
#[derive(Clone)]
pub struct PartialBijection {
    carrier: Arc<Carrier>,
    image: Vec<u32>,
}

impl PartialEq for PartialBijection {
    fn eq(&self, other: &Self) -> bool {
        same_carrier(&self.carrier, &other.carrier) && self.image == other.image
    }
}

impl Eq for PartialBijection {}

impl Hash for PartialBijection {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.image.hash(state);
    }
}

impl PartialOrd for PartialBijection {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: by image table. Only meaningful on a shared carrier.
impl Ord for PartialBijection {
    fn cmp(&self, other: &Self) -> Ordering {
        self.image.cmp(&other.image)
    }
}

fn same_carrier(a: &Arc<Carrier>, b: &Arc<Carrier>) -> bool {
    Arc::ptr_eq(a, b) || a.points == b.points
}

impl PartialBijection {
    pub fn zero(carrier: &Arc<Carrier>) -> PartialBijection {
        PartialBijection {
            carrier: carrier.clone(),
            image: vec![NONE; carrier.len()],
        }
    }

    pub fn identity(carrier: &Arc<Carrier>) -> PartialBijection {
        PartialBijection {
            carrier: carrier.clone(),
            image: (0..carrier.len() as u32).collect(),
        }
    }

    /// Identity map restricted to the given point indices.
    pub fn partial_identity(carrier: &Arc<Carrier>, points: &[usize]) -> PartialBijection {
        let mut image = vec![NONE; carrier.len()];
        for &p in points {
            image[p] = p as u32;
        }
        PartialBijection {
            carrier: carrier.clone(),
            image,
        }
    }

    /// Build from `(source, target)` index pairs.
    pub fn from_pairs(carrier: &Arc<Carrier>, pairs: &[(usize, usize)]) -> Result<PartialBijection, PbijError> {
        let n = carrier.len();
        let mut image = vec![NONE; n];
        let mut hit = vec![false; n];
        for &(s, t) in pairs {
            if s >= n {
                return Err(PbijError::UnknownPoint(s.to_string()));
            }
            if t >= n {
                return Err(PbijError::UnknownPoint(t.to_string()));
            }
            if image[s] != NONE {
                if image[s] == t as u32 {
                    continue;
                }
                return Err(PbijError::NotFunctional(carrier.name(s).to_string()));
            }
            if hit[t] {
                return Err(PbijError::NotInjective(carrier.name(t).to_string()));
            }
            image[s] = t as u32;
            hit[t] = true;
        }
        Ok(PartialBijection {
            carrier: carrier.clone(),
            image,
        })
    }

    /// Build from pairs of point names.
    pub fn from_named_pairs<S: AsRef<str>>(
        carrier: &Arc<Carrier>,
        pairs: &[(S, S)],
    ) -> Result<PartialBijection, PbijError> {
        let lookup = |name: &str| {
            carrier
                .position(name)
                .ok_or_else(|| PbijError::UnknownPoint(name.to_string()))
        };
        let idx = pairs
            .iter()
            .map(|(s, t)| Ok((lookup(s.as_ref())?, lookup(t.as_ref())?)))
            .collect::<Result<Vec<_>, PbijError>>()?;
        PartialBijection::from_pairs(carrier, &idx)
    }

    /// Parse the canonical text form `{a->b, c->d}`.
    pub fn parse(carrier: &Arc<Carrier>, text: &str) -> Result<PartialBijection, PbijError> {
        let t = text.trim();
        let body = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| PbijError::Parse(format!("expected braces in `{text}`")))?;
        let mut pairs = Vec::new();
        for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (s, t) = item
                .split_once("->")
                .ok_or_else(|| PbijError::Parse(format!("expected `src->tgt`, got `{item}`")))?;
            pairs.push((s.trim().to_string(), t.trim().to_string()));
        }
        PartialBijection::from_named_pairs(carrier, &pairs)
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        match self.image.get(x) {
            Some(&y) if y != NONE => Some(y as usize),
            _ => None,
        }
    }

    /// Graph pairs, sorted by source.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.image
            .iter()
            .enumerate()
            .filter(|(_, &y)| y != NONE)
            .map(|(x, &y)| (x, y as usize))
    }

    pub fn named_pairs(&self) -> Vec<(String, String)> {
        self.pairs()
            .map(|(x, y)| (self.carrier.name(x).to_string(), self.carrier.name(y).to_string()))
            .collect()
    }

    pub fn domain(&self) -> Vec<usize> {
        self.pairs().map(|(x, _)| x).collect()
    }

    pub fn range(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.pairs().map(|(_, y)| y).collect();
        r.sort_unstable();
        r
    }

    pub fn in_domain(&self, x: usize) -> bool {
        self.apply(x).is_some()
    }

    /// Number of pairs in the graph.
    pub fn size(&self) -> usize {
        self.image.iter().filter(|&&y| y != NONE).count()
    }

    pub fn is_zero(&self) -> bool {
        self.image.iter().all(|&y| y == NONE)
    }

    pub fn compose(&self, t: &PartialBijection) -> Result<PartialBijection, PbijError> {
        if !same_carrier(&self.carrier, &t.carrier) {
            return Err(PbijError::CarrierMismatch);
        }
        Ok(self.compose_unchecked(t))
    }

    /// `self ∘ t` for maps known to share a carrier.
    pub(crate) fn compose_unchecked(&self, t: &PartialBijection) -> PartialBijection {
        let image = t
            .image
            .iter()
            .map(|&y| if y == NONE { NONE } else { self.image[y as usize] })
            .collect();
        PartialBijection {
            carrier: self.carrier.clone(),
            image,
        }
    }

    pub fn inverse(&self) -> PartialBijection {
        let mut image = vec![NONE; self.image.len()];
        for (x, &y) in self.image.iter().enumerate() {
            if y != NONE {
                image[y as usize] = x as u32;
            }
        }
        PartialBijection {
            carrier: self.carrier.clone(),
            image,
        }
    }

    /// Natural partial order: `self` is a restriction of `t`.
    pub fn leq(&self, t: &PartialBijection) -> Result<bool, PbijError> {
        if !same_carrier(&self.carrier, &t.carrier) {
            return Err(PbijError::CarrierMismatch);
        }
        Ok(self.leq_unchecked(t))
    }

    pub(crate) fn leq_unchecked(&self, t: &PartialBijection) -> bool {
        self.image
            .iter()
            .zip(&t.image)
            .all(|(&a, &b)| a == NONE || a == b)
    }

    pub fn is_idempotent(&self) -> bool {
        self.image
            .iter()
            .enumerate()
            .all(|(x, &y)| y == NONE || y as usize == x)
    }

    /// Partial identity on the domain, `s* s`.
    pub fn domain_idempotent(&self) -> PartialBijection {
        PartialBijection::partial_identity(&self.carrier, &self.domain())
    }

    /// Partial identity on the range, `s s*`.
    pub fn range_idempotent(&self) -> PartialBijection {
        PartialBijection::partial_identity(&self.carrier, &self.range())
    }

    /// Points fixed by the map.
    pub fn fixed_points(&self) -> Vec<usize> {
        self.pairs().filter(|(x, y)| x == y).map(|(x, _)| x).collect()
    }

    pub fn meet_idempotents(e: &PartialBijection, f: &PartialBijection) -> Result<PartialBijection, PbijError> {
        if !same_carrier(&e.carrier, &f.carrier) {
            return Err(PbijError::CarrierMismatch);
        }
        for x in [e, f] {
            if !x.is_idempotent() {
                return Err(PbijError::NotIdempotent(x.to_string()));
            }
        }
        let image = e
            .image
            .iter()
            .zip(&f.image)
            .map(|(&a, &b)| if a != NONE && b != NONE { a } else { NONE })
            .collect();
        Ok(PartialBijection {
            carrier: e.carrier.clone(),
            image,
        })
    }
}

impl fmt::Display for PartialBijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, y)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}->{}", self.carrier.name(x), self.carrier.name(y))?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for PartialBijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
