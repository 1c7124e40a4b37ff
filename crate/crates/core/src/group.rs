//! Finitely generated groups with a word metric.
//!
//! Three backends are supported: a finite group given by its multiplication
//! table, the free group on `k` letters, and the free abelian group `Z^k`.
//! Elements are stored in normal form, so structural equality is group
//! equality.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bound on the number of elements a single ball may hold.
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("backend mismatch: context is {expected}, element is {found}")]
    BackendMismatch { expected: BackendKind, found: String },
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),
    #[error("invalid generating set: {0}")]
    InvalidGenerators(String),
    #[error("ball of radius {radius} exceeds the enumeration cap of {cap} elements")]
    EnumerationCap { radius: u32, cap: usize },
    #[error("cannot parse group description: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    FiniteTable,
    Free,
    FreeAbelian,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::FiniteTable => "finite-table",
            BackendKind::Free => "free",
            BackendKind::FreeAbelian => "free-abelian",
        })
    }
}

/// A group element in normal form.
///
/// Free-group words use signed letters: `i + 1` is the `i`-th generator and
/// `-(i + 1)` its inverse. Words are always freely reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Table(usize),
    Word(Vec<i32>),
    Vector(Vec<i64>),
}

impl GroupElement {
    fn kind_name(&self) -> String {
        match self {
            GroupElement::Table(i) => format!("table element {i}"),
            GroupElement::Word(w) => format!("word {w:?}"),
            GroupElement::Vector(v) => format!("vector {v:?}"),
        }
    }
}

/// Serializable description of a group and its generating set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum GroupSpec {
    /// Rows of the multiplication table: `table[a][b] = ab`.
    FiniteTable {
        table: Vec<Vec<usize>>,
        generators: Vec<usize>,
    },
    Free {
        rank: usize,
    },
    FreeAbelian {
        rank: usize,
    },
}

impl GroupSpec {
    /// The cyclic group of order `n` generated by `1`.
    pub fn cyclic(n: usize) -> GroupSpec {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        GroupSpec::FiniteTable {
            table,
            generators: if n > 1 { vec![1] } else { vec![0] },
        }
    }

    pub fn build(&self) -> Result<GroupContext, GroupError> {
        GroupContext::new(self.clone())
    }

    /// Parse the plain-text group description format.
    ///
    /// ```text
    /// backend finite-table
    /// table
    /// 0 1 2
    /// 1 2 0
    /// 2 0 1
    /// generators 1
    /// ```
    ///
    /// The free backends only take a `rank <k>` line. Lines starting with `#`
    /// are comments.
    pub fn parse_description(text: &str) -> Result<GroupSpec, GroupError> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut backend = None;
        let mut rank = None;
        let mut table: Vec<Vec<usize>> = Vec::new();
        let mut generators = None;
        let mut in_table = false;
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| GroupError::Parse(format!("expected an integer, got `{s}`")))
        };
        for line in lines {
            let mut words = line.split_whitespace();
            let head = words.next().unwrap_or_default();
            match head {
                "backend" => {
                    in_table = false;
                    let kind = words.next().ok_or_else(|| GroupError::Parse("missing backend kind".into()))?;
                    backend = Some(match kind {
                        "finite" | "finite-table" => BackendKind::FiniteTable,
                        "free" => BackendKind::Free,
                        "free-abelian" | "abelian" => BackendKind::FreeAbelian,
                        other => {
                            return Err(GroupError::Parse(format!(
                                "unsupported backend `{other}` (finite-table, free, free-abelian)"
                            )))
                        }
                    });
                }
                "rank" => {
                    in_table = false;
                    let r = words.next().ok_or_else(|| GroupError::Parse("missing rank".into()))?;
                    rank = Some(parse_usize(r)?);
                }
                "table" => in_table = true,
                "generators" => {
                    in_table = false;
                    generators = Some(words.map(parse_usize).collect::<Result<Vec<_>, _>>()?);
                }
                _ if in_table => {
                    table.push(line.split_whitespace().map(parse_usize).collect::<Result<Vec<_>, _>>()?);
                }
                other => return Err(GroupError::Parse(format!("unknown directive `{other}`"))),
            }
        }
        match backend {
            Some(BackendKind::FiniteTable) => Ok(GroupSpec::FiniteTable {
                table,
                generators: generators.ok_or_else(|| GroupError::Parse("missing generators".into()))?,
            }),
            Some(BackendKind::Free) => Ok(GroupSpec::Free {
                rank: rank.ok_or_else(|| GroupError::Parse("missing rank".into()))?,
            }),
            Some(BackendKind::FreeAbelian) => Ok(GroupSpec::FreeAbelian {
                rank: rank.ok_or_else(|| GroupError::Parse("missing rank".into()))?,
            }),
            None => Err(GroupError::Parse("missing backend line".into())),
        }
    }
}

/// Short names: `free<k>`, `Z`, `Z^<k>`, `Z/<n>`.
impl FromStr for GroupSpec {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || GroupError::Parse(format!("unknown group name `{s}`"));
        if let Some(rest) = s.strip_prefix("free") {
            let rank = rest.parse().map_err(|_| bad())?;
            return Ok(GroupSpec::Free { rank });
        }
        if s == "Z" {
            return Ok(GroupSpec::FreeAbelian { rank: 1 });
        }
        if let Some(rest) = s.strip_prefix("Z^") {
            let rank = rest.parse().map_err(|_| bad())?;
            return Ok(GroupSpec::FreeAbelian { rank });
        }
        if let Some(rest) = s.strip_prefix("Z/") {
            let n: usize = rest.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            return Ok(GroupSpec::cyclic(n));
        }
        Err(bad())
    }
}

/// A group given by short name (`Z`, `Z^2`, `free2`, `Z/5`) or by a full
/// specification object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupChoice {
    Name(String),
    Spec(GroupSpec),
}

impl GroupChoice {
    pub fn build(&self) -> Result<GroupContext, GroupError> {
        match self {
            GroupChoice::Name(s) => s.parse::<GroupSpec>()?.build(),
            GroupChoice::Spec(spec) => spec.build(),
        }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Finite {
        order: usize,
        table: Vec<usize>,
        inverse: Vec<usize>,
        lengths: Vec<u32>,
    },
    Free {
        rank: usize,
    },
    FreeAbelian {
        rank: usize,
    },
}

#[derive(Debug)]
struct Inner {
    spec: GroupSpec,
    backend: Backend,
    generators: Vec<GroupElement>,
    identity: GroupElement,
    ball_cap: usize,
}

/// An immutable, cheaply clonable handle to a finitely generated group.
#[derive(Debug, Clone)]
pub struct GroupContext {
    inner: Arc<Inner>,
}

impl PartialEq for GroupContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl GroupContext {
    pub fn new(spec: GroupSpec) -> Result<GroupContext, GroupError> {
        let (backend, generators, identity) = match &spec {
            GroupSpec::Free { rank } => {
                if *rank == 0 {
                    return Err(GroupError::InvalidGenerators("free group needs rank >= 1".into()));
                }
                if *rank > 26 {
                    return Err(GroupError::InvalidGenerators("free group rank is limited to 26".into()));
                }
                let gens = (1..=*rank as i32)
                    .flat_map(|i| [GroupElement::Word(vec![i]), GroupElement::Word(vec![-i])])
                    .collect();
                (Backend::Free { rank: *rank }, gens, GroupElement::Word(Vec::new()))
            }
            GroupSpec::FreeAbelian { rank } => {
                if *rank == 0 {
                    return Err(GroupError::InvalidGenerators("free abelian group needs rank >= 1".into()));
                }
                let mut gens = Vec::with_capacity(2 * rank);
                for i in 0..*rank {
                    for sign in [1i64, -1] {
                        let mut v = vec![0; *rank];
                        v[i] = sign;
                        gens.push(GroupElement::Vector(v));
                    }
                }
                (Backend::FreeAbelian { rank: *rank }, gens, GroupElement::Vector(vec![0; *rank]))
            }
            GroupSpec::FiniteTable { table, generators } => Self::finite_backend(table, generators)?,
        };
        Ok(GroupContext {
            inner: Arc::new(Inner {
                spec,
                backend,
                generators,
                identity,
                ball_cap: DEFAULT_BALL_CAP,
            }),
        })
    }

    fn finite_backend(
        rows: &[Vec<usize>],
        gens: &[usize],
    ) -> Result<(Backend, Vec<GroupElement>, GroupElement), GroupError> {
        let n = rows.len();
        if n == 0 {
            return Err(GroupError::InvalidTable("empty table".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(GroupError::InvalidTable("table is not square".into()));
        }
        let mut table = Vec::with_capacity(n * n);
        for row in rows {
            for &v in row {
                if v >= n {
                    return Err(GroupError::InvalidTable(format!("entry {v} out of range 0..{n}")));
                }
                table.push(v);
            }
        }
        let at = |a: usize, b: usize| table[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or_else(|| GroupError::InvalidTable("no two-sided identity".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or_else(|| GroupError::InvalidTable(format!("element {a} has no inverse")))?;
            inverse[a] = b;
        }
        let triples = n.saturating_mul(n).saturating_mul(n);
        if triples <= 4_000_000 {
            for a in 0..n {
                for b in 0..n {
                    let ab = at(a, b);
                    for c in 0..n {
                        if at(ab, c) != at(a, at(b, c)) {
                            return Err(GroupError::InvalidTable(format!("not associative at ({a}, {b}, {c})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f_7269_7461);
            for _ in 0..200_000 {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if at(at(a, b), c) != at(a, at(b, c)) {
                    return Err(GroupError::InvalidTable(format!("not associative at ({a}, {b}, {c})")));
                }
            }
        }
        if let Some(&g) = gens.iter().find(|&&g| g >= n) {
            return Err(GroupError::InvalidGenerators(format!("generator {g} out of range")));
        }
        // close the generating set under inverses, keeping the given order
        let mut gen_idx: Vec<usize> = Vec::new();
        for &g in gens {
            if g == identity {
                continue;
            }
            for x in [g, inverse[g]] {
                if !gen_idx.contains(&x) {
                    gen_idx.push(x);
                }
            }
        }
        if gen_idx.is_empty() && n > 1 {
            return Err(GroupError::InvalidGenerators("generating set is empty".into()));
        }
        if gen_idx.is_empty() {
            // trivial group: the identity alone generates
            gen_idx.push(identity);
        }
        let mut lengths = vec![u32::MAX; n];
        lengths[identity] = 0;
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            for &s in &gen_idx {
                let y = at(x, s);
                if lengths[y] == u32::MAX {
                    lengths[y] = lengths[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        if let Some(missing) = lengths.iter().position(|&l| l == u32::MAX) {
            return Err(GroupError::InvalidGenerators(format!(
                "generators do not reach element {missing}"
            )));
        }
        let generators = gen_idx.into_iter().map(GroupElement::Table).collect();
        Ok((
            Backend::Finite {
                order: n,
                table,
                inverse,
                lengths,
            },
            generators,
            GroupElement::Table(identity),
        ))
    }

    pub fn free(rank: usize) -> Result<GroupContext, GroupError> {
        GroupContext::new(GroupSpec::Free { rank })
    }

    pub fn free_abelian(rank: usize) -> Result<GroupContext, GroupError> {
        GroupContext::new(GroupSpec::FreeAbelian { rank })
    }

    pub fn cyclic(n: usize) -> Result<GroupContext, GroupError> {
        GroupContext::new(GroupSpec::cyclic(n))
    }

    /// Replace the ball enumeration cap.
    pub fn with_ball_cap(&self, cap: usize) -> GroupContext {
        let inner = &self.inner;
        GroupContext {
            inner: Arc::new(Inner {
                spec: inner.spec.clone(),
                backend: inner.backend.clone(),
                generators: inner.generators.clone(),
                identity: inner.identity.clone(),
                ball_cap: cap,
            }),
        }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.inner.spec
    }

    pub fn kind(&self) -> BackendKind {
        match self.inner.backend {
            Backend::Finite { .. } => BackendKind::FiniteTable,
            Backend::Free { .. } => BackendKind::Free,
            Backend::FreeAbelian { .. } => BackendKind::FreeAbelian,
        }
    }

    /// Inverse-closed generating set, in enumeration order.
    pub fn generators(&self) -> &[GroupElement] {
        &self.inner.generators
    }

    pub fn identity(&self) -> GroupElement {
        self.inner.identity.clone()
    }

    pub fn is_identity(&self, a: &GroupElement) -> bool {
        *a == self.inner.identity
    }

    /// Order of the group, `None` when infinite.
    pub fn order(&self) -> Option<usize> {
        match self.inner.backend {
            Backend::Finite { order, .. } => Some(order),
            _ => None,
        }
    }

    pub fn validate(&self, a: &GroupElement) -> Result<(), GroupError> {
        let mismatch = || GroupError::BackendMismatch {
            expected: self.kind(),
            found: a.kind_name(),
        };
        match (&self.inner.backend, a) {
            (Backend::Finite { order, .. }, GroupElement::Table(i)) => {
                if i < order {
                    Ok(())
                } else {
                    Err(GroupError::InvalidElement(format!("index {i} out of range 0..{order}")))
                }
            }
            (Backend::Free { rank }, GroupElement::Word(w)) => {
                let r = *rank as i32;
                if w.iter().any(|&l| l == 0 || l.abs() > r) {
                    return Err(GroupError::InvalidElement(format!("letter out of range in {w:?}")));
                }
                if w.windows(2).any(|p| p[0] == -p[1]) {
                    return Err(GroupError::InvalidElement(format!("word {w:?} is not reduced")));
                }
                Ok(())
            }
            (Backend::FreeAbelian { rank }, GroupElement::Vector(v)) => {
                if v.len() == *rank {
                    Ok(())
                } else {
                    Err(GroupError::InvalidElement(format!("vector {v:?} does not have length {rank}")))
                }
            }
            _ => Err(mismatch()),
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    /// Multiplication for elements already known to belong to this context.
    pub(crate) fn mul_unchecked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (&self.inner.backend, a, b) {
            (Backend::Finite { order, table, .. }, GroupElement::Table(x), GroupElement::Table(y)) => {
                GroupElement::Table(table[x * order + y])
            }
            (Backend::Free { .. }, GroupElement::Word(x), GroupElement::Word(y)) => {
                let mut out = x.clone();
                for &l in y {
                    if out.last() == Some(&-l) {
                        out.pop();
                    } else {
                        out.push(l);
                    }
                }
                GroupElement::Word(out)
            }
            (Backend::FreeAbelian { .. }, GroupElement::Vector(x), GroupElement::Vector(y)) => {
                GroupElement::Vector(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            _ => panic!("mul_unchecked called with foreign elements"),
        }
    }

    pub fn inv(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(a)?;
        Ok(self.inv_unchecked(a))
    }

    pub(crate) fn inv_unchecked(&self, a: &GroupElement) -> GroupElement {
        match (&self.inner.backend, a) {
            (Backend::Finite { inverse, .. }, GroupElement::Table(x)) => GroupElement::Table(inverse[*x]),
            (Backend::Free { .. }, GroupElement::Word(w)) => GroupElement::Word(w.iter().rev().map(|l| -l).collect()),
            (Backend::FreeAbelian { .. }, GroupElement::Vector(v)) => {
                GroupElement::Vector(v.iter().map(|x| -x).collect())
            }
            _ => panic!("inv_unchecked called with a foreign element"),
        }
    }

    /// Product of a sequence of elements, left to right.
    pub fn product<'a, I>(&self, items: I) -> Result<GroupElement, GroupError>
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        let mut acc = self.identity();
        for x in items {
            acc = self.mul(&acc, x)?;
        }
        Ok(acc)
    }

    /// Word length with respect to the generating set.
    pub fn word_length(&self, a: &GroupElement) -> Result<u32, GroupError> {
        self.validate(a)?;
        Ok(self.word_length_unchecked(a))
    }

    pub(crate) fn word_length_unchecked(&self, a: &GroupElement) -> u32 {
        match (&self.inner.backend, a) {
            (Backend::Finite { lengths, .. }, GroupElement::Table(x)) => lengths[*x],
            (Backend::Free { .. }, GroupElement::Word(w)) => w.len() as u32,
            (Backend::FreeAbelian { .. }, GroupElement::Vector(v)) => v.iter().map(|x| x.unsigned_abs() as u32).sum(),
            _ => panic!("word_length_unchecked called with a foreign element"),
        }
    }

    /// Left-invariant word distance `|a^-1 b|`.
    pub fn distance(&self, a: &GroupElement, b: &GroupElement) -> Result<u32, GroupError> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(self.word_length_unchecked(&self.mul_unchecked(&self.inv_unchecked(a), b)))
    }

    /// All elements within `radius` of `center`, breadth first, ties broken by
    /// generator order.
    pub fn ball(&self, center: &GroupElement, radius: u32) -> Result<Ball, GroupError> {
        self.validate(center)?;
        let cap = self.inner.ball_cap;
        let mut elements = vec![center.clone()];
        let mut lengths = vec![0u32];
        let mut index = HashMap::from([(center.clone(), 0usize)]);
        let mut head = 0;
        while head < elements.len() {
            let depth = lengths[head];
            if depth == radius {
                break;
            }
            let x = elements[head].clone();
            head += 1;
            for s in &self.inner.generators {
                let y = self.mul_unchecked(&x, s);
                if !index.contains_key(&y) {
                    if elements.len() == cap {
                        return Err(GroupError::EnumerationCap { radius, cap });
                    }
                    index.insert(y.clone(), elements.len());
                    elements.push(y);
                    lengths.push(depth + 1);
                }
            }
        }
        Ok(Ball {
            center: center.clone(),
            radius,
            elements,
            lengths,
            index,
        })
    }

    pub fn parse_element(&self, text: &str) -> Result<GroupElement, GroupError> {
        let t = text.trim();
        let bad = || GroupError::InvalidElement(format!("cannot parse `{text}` as a {} element", self.kind()));
        let el = match &self.inner.backend {
            Backend::Finite { .. } => GroupElement::Table(t.parse().map_err(|_| bad())?),
            Backend::Free { .. } => {
                if t == "e" || t == "1" || t.is_empty() {
                    GroupElement::Word(Vec::new())
                } else {
                    let mut w: Vec<i32> = Vec::new();
                    for c in t.chars() {
                        let l = if c.is_ascii_lowercase() {
                            (c as u8 - b'a') as i32 + 1
                        } else if c.is_ascii_uppercase() {
                            -((c as u8 - b'A') as i32 + 1)
                        } else {
                            return Err(bad());
                        };
                        if w.last() == Some(&-l) {
                            w.pop();
                        } else {
                            w.push(l);
                        }
                    }
                    GroupElement::Word(w)
                }
            }
            Backend::FreeAbelian { .. } => {
                let inner = t.trim_start_matches('(').trim_end_matches(')');
                let v = inner
                    .split(',')
                    .map(|p| p.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad())?;
                GroupElement::Vector(v)
            }
        };
        self.validate(&el)?;
        Ok(el)
    }

    /// Element from a JSON value: a string in text notation, an integer, or an
    /// integer array for `Z^k`.
    pub fn element_from_json(&self, value: &serde_json::Value) -> Result<GroupElement, GroupError> {
        use serde_json::Value;
        match value {
            Value::String(s) => self.parse_element(s),
            Value::Number(n) => self.parse_element(&n.to_string()),
            Value::Array(items) if self.kind() == BackendKind::FreeAbelian => {
                let v = items
                    .iter()
                    .map(|x| x.as_i64().ok_or_else(|| GroupError::InvalidElement(format!("{value}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let el = GroupElement::Vector(v);
                self.validate(&el)?;
                Ok(el)
            }
            other => Err(GroupError::InvalidElement(format!("unsupported JSON element {other}"))),
        }
    }

    pub fn format(&self, a: &GroupElement) -> String {
        match a {
            GroupElement::Table(i) => i.to_string(),
            GroupElement::Word(w) if w.is_empty() => "e".to_string(),
            GroupElement::Word(w) => w
                .iter()
                .map(|&l| {
                    let c = (l.unsigned_abs() - 1) as u8;
                    if l > 0 {
                        (b'a' + c) as char
                    } else {
                        (b'A' + c) as char
                    }
                })
                .collect(),
            GroupElement::Vector(v) if v.len() == 1 => v[0].to_string(),
            GroupElement::Vector(v) => {
                let parts: Vec<String> = v.iter().map(i64::to_string).collect();
                format!("({})", parts.join(","))
            }
        }
    }
}

/// A metric ball in enumeration order.
#[derive(Debug, Clone)]
pub struct Ball {
    center: GroupElement,
    radius: u32,
    elements: Vec<GroupElement>,
    lengths: Vec<u32>,
    index: HashMap<GroupElement, usize>,
}

impl Ball {
    pub fn center(&self) -> &GroupElement {
        &self.center
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    /// Distance from the center of the `i`-th element.
    pub fn depth(&self, i: usize) -> u32 {
        self.lengths[i]
    }

    pub fn position(&self, a: &GroupElement) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        self.index.contains_key(a)
    }

    pub fn to_set(&self) -> HashSet<GroupElement> {
        self.elements.iter().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupContext {
        GroupContext::free_abelian(1).unwrap()
    }

    fn v(xs: &[i64]) -> GroupElement {
        GroupElement::Vector(xs.to_vec())
    }

    #[test]
    fn mul_examples() {
        assert_eq!(z().mul(&v(&[2]), &v(&[3])).unwrap(), v(&[5]));
        let f = GroupContext::free(2).unwrap();
        let ab = f.parse_element("ab").unwrap();
        let b_inv = f.parse_element("B").unwrap();
        assert_eq!(f.mul(&ab, &b_inv).unwrap(), f.parse_element("a").unwrap());
        let z3 = GroupContext::cyclic(3).unwrap();
        assert_eq!(z3.mul(&GroupElement::Table(2), &GroupElement::Table(2)).unwrap(), GroupElement::Table(1));
    }

    #[test]
    fn inverse_and_identity() {
        assert_eq!(z().inv(&v(&[3])).unwrap(), v(&[-3]));
        let f = GroupContext::free(2).unwrap();
        let ab = f.parse_element("ab").unwrap();
        assert_eq!(f.format(&f.inv(&ab).unwrap()), "BA");
        assert_eq!(GroupContext::cyclic(5).unwrap().identity(), GroupElement::Table(0));
    }

    #[test]
    fn backend_mismatch_is_reported() {
        let err = z().mul(&v(&[1]), &GroupElement::Word(vec![1])).unwrap_err();
        assert!(matches!(err, GroupError::BackendMismatch { .. }));
        let err = z().mul(&v(&[1, 2]), &v(&[1])).unwrap_err();
        assert!(matches!(err, GroupError::InvalidElement(_)));
    }

    #[test]
    fn word_lengths() {
        let z2 = GroupContext::free_abelian(2).unwrap();
        assert_eq!(z2.word_length(&v(&[2, 1])).unwrap(), 3);
        let f = GroupContext::free(2).unwrap();
        assert_eq!(f.word_length(&f.parse_element("aBa").unwrap()).unwrap(), 3);
        let a = f.parse_element("ab").unwrap();
        assert_eq!(f.distance(&a, &a).unwrap(), 0);
    }

    #[test]
    fn word_length_matches_bfs_on_cayley_graph() {
        // BFS oracle over the Cayley graph, independent of the closed forms
        for ctx in [GroupContext::free_abelian(2).unwrap(), GroupContext::free(2).unwrap()] {
            let e = ctx.identity();
            let mut dist: HashMap<GroupElement, u32> = HashMap::from([(e.clone(), 0)]);
            let mut queue = VecDeque::from([e]);
            while let Some(x) = queue.pop_front() {
                let d = dist[&x];
                if d == 4 {
                    continue;
                }
                for s in ctx.generators() {
                    let y = ctx.mul(&x, s).unwrap();
                    dist.entry(y.clone()).or_insert_with(|| {
                        queue.push_back(y);
                        d + 1
                    });
                }
            }
            for (x, d) in &dist {
                assert_eq!(ctx.word_length(x).unwrap(), *d, "{}", ctx.format(x));
            }
        }
    }

    #[test]
    fn ball_examples() {
        let b = z().ball(&z().identity(), 2).unwrap();
        let mut got: Vec<i64> = b
            .elements()
            .iter()
            .map(|e| match e {
                GroupElement::Vector(v) => v[0],
                _ => unreachable!(),
            })
            .collect();
        got.sort();
        assert_eq!(got, vec![-2, -1, 0, 1, 2]);

        let f = GroupContext::free(2).unwrap();
        let b1 = f.ball(&f.identity(), 1).unwrap();
        let names: Vec<String> = b1.elements().iter().map(|x| f.format(x)).collect();
        assert_eq!(names, vec!["e", "a", "A", "b", "B"]);
        assert_eq!(f.ball(&f.identity(), 2).unwrap().len(), 17);
    }

    #[test]
    fn free_ball_sizes_follow_closed_form() {
        for k in 1..=3usize {
            let f = GroupContext::free(k).unwrap();
            for r in 1..=4u32 {
                let expected = if k == 1 {
                    1 + 2 * r as usize
                } else {
                    let q = 2 * k - 1;
                    1 + 2 * k * (q.pow(r) - 1) / (q - 1)
                };
                assert_eq!(f.ball(&f.identity(), r).unwrap().len(), expected, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn ball_around_non_identity_center() {
        let f = GroupContext::free(2).unwrap();
        let c = f.parse_element("ab").unwrap();
        let b = f.ball(&c, 2).unwrap();
        assert_eq!(b.len(), 17);
        for (i, x) in b.elements().iter().enumerate() {
            assert_eq!(f.distance(&c, x).unwrap(), b.depth(i));
            assert!(b.depth(i) <= 2);
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let f = GroupContext::free(2).unwrap().with_ball_cap(100);
        assert!(f.ball(&f.identity(), 3).is_ok());
        assert_eq!(
            f.ball(&f.identity(), 4).unwrap_err(),
            GroupError::EnumerationCap { radius: 4, cap: 100 }
        );
    }

    #[test]
    fn finite_table_validation() {
        assert!(GroupContext::new(GroupSpec::FiniteTable {
            table: vec![vec![0, 1], vec![1, 1]],
            generators: vec![1],
        })
        .is_err());
        // Z/4 generated by 2 does not reach 1
        assert!(matches!(
            GroupContext::new(GroupSpec::FiniteTable {
                table: (0..4).map(|a| (0..4).map(|b| (a + b) % 4).collect()).collect(),
                generators: vec![2],
            }),
            Err(GroupError::InvalidGenerators(_))
        ));
        let z4 = GroupContext::cyclic(4).unwrap();
        assert_eq!(z4.generators(), &[GroupElement::Table(1), GroupElement::Table(3)]);
        assert_eq!(z4.word_length(&GroupElement::Table(2)).unwrap(), 2);
        let trivial = GroupContext::cyclic(1).unwrap();
        assert_eq!(trivial.ball(&trivial.identity(), 3).unwrap().len(), 1);
    }

    #[test]
    fn description_and_short_names() {
        let text = "# Z/3\nbackend finite-table\ntable\n0 1 2\n1 2 0\n2 0 1\ngenerators 1\n";
        assert_eq!(GroupSpec::parse_description(text).unwrap(), GroupSpec::cyclic(3));
        assert_eq!(
            GroupSpec::parse_description("backend free\nrank 2").unwrap(),
            GroupSpec::Free { rank: 2 }
        );
        assert!(GroupSpec::parse_description("backend presented\n").is_err());
        assert_eq!("free2".parse::<GroupSpec>().unwrap(), GroupSpec::Free { rank: 2 });
        assert_eq!("Z".parse::<GroupSpec>().unwrap(), GroupSpec::FreeAbelian { rank: 1 });
        assert_eq!("Z^2".parse::<GroupSpec>().unwrap(), GroupSpec::FreeAbelian { rank: 2 });
        assert_eq!("Z/5".parse::<GroupSpec>().unwrap(), GroupSpec::cyclic(5));
    }

    #[test]
    fn text_notation_round_trip() {
        let f = GroupContext::free(3).unwrap();
        for s in ["e", "a", "aBc", "CCb"] {
            assert_eq!(f.format(&f.parse_element(s).unwrap()), s);
        }
        assert_eq!(f.format(&f.parse_element("aAb").unwrap()), "b");
        let z2 = GroupContext::free_abelian(2).unwrap();
        assert_eq!(z2.format(&z2.parse_element("(2,-1)").unwrap()), "(2,-1)");
        assert_eq!(
            z2.element_from_json(&serde_json::json!([2, -1])).unwrap(),
            v(&[2, -1])
        );
        assert_eq!(z().element_from_json(&serde_json::json!(4)).unwrap(), v(&[4]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn word(rank: i32) -> impl Strategy<Value = Vec<i32>> {
            prop::collection::vec((1..=rank, any::<bool>()).prop_map(|(g, s)| if s { g } else { -g }), 0..8)
        }

        fn reduce(ctx: &GroupContext, letters: &[i32]) -> GroupElement {
            let els: Vec<GroupElement> = letters.iter().map(|&l| GroupElement::Word(vec![l])).collect();
            ctx.product(&els).unwrap()
        }

        proptest! {
            #[test]
            fn free_group_axioms(a in word(2), b in word(2), c in word(2)) {
                let f = GroupContext::free(2).unwrap();
                let (a, b, c) = (reduce(&f, &a), reduce(&f, &b), reduce(&f, &c));
                let ab_c = f.mul(&f.mul(&a, &b).unwrap(), &c).unwrap();
                let a_bc = f.mul(&a, &f.mul(&b, &c).unwrap()).unwrap();
                prop_assert_eq!(ab_c, a_bc);
                prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()).unwrap(), f.identity());
                prop_assert_eq!(f.mul(&f.identity(), &a).unwrap(), a.clone());
                // left invariance of the metric
                let d = f.distance(&b, &c).unwrap();
                prop_assert_eq!(f.distance(&f.mul(&a, &b).unwrap(), &f.mul(&a, &c).unwrap()).unwrap(), d);
                // normalising twice is the same as once
                let again = f.parse_element(&f.format(&a)).unwrap();
                prop_assert_eq!(again, a);
            }

            #[test]
            fn abelian_left_invariance(a in prop::collection::vec(-5i64..5, 2), b in prop::collection::vec(-5i64..5, 2), g in prop::collection::vec(-5i64..5, 2)) {
                let z2 = GroupContext::free_abelian(2).unwrap();
                let (a, b, g) = (GroupElement::Vector(a), GroupElement::Vector(b), GroupElement::Vector(g));
                let d = z2.distance(&a, &b).unwrap();
                prop_assert_eq!(z2.distance(&z2.mul(&g, &a).unwrap(), &z2.mul(&g, &b).unwrap()).unwrap(), d);
            }

            #[test]
            fn balls_nest(r in 0u32..4) {
                let f = GroupContext::free(2).unwrap();
                let small = f.ball(&f.identity(), r).unwrap();
                let big = f.ball(&f.identity(), r + 1).unwrap();
                prop_assert!(small.elements().iter().all(|x| big.contains(x)));
                prop_assert!(big.elements().iter().all(|x| f.word_length(x).unwrap() <= r + 1));
            }
        }
    }
}
