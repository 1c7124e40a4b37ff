//! Girth, adjacency spectral gap, random regular graphs and certification of
//! large-girth expander families against explicit thresholds.

use std::collections::{HashSet, VecDeque};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError};

/// Largest graph handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 2000;
/// Pairings attempted before giving up on a simple graph.
pub const PAIRING_BUDGET: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpanderError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no {d}-regular graph on {n} vertices: n·d is odd")]
    OddDegreeSum { n: usize, d: usize },
    #[error("no {d}-regular simple graph on {n} vertices: need d < n")]
    DegreeTooLarge { n: usize, d: usize },
    #[error("no simple pairing found in {0} attempts")]
    BudgetExhausted(usize),
    #[error("cannot certify an empty family")]
    EmptyFamily,
}

/// Length of a shortest cycle, `None` for forests.
///
/// BFS from every vertex; a non-tree edge `uw` closes a cycle of length at
/// most `dist(u) + dist(w) + 1`, with equality for the root on a shortest
/// cycle.
pub fn girth(g: &Graph) -> Option<usize> {
    let n = g.n();
    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        dist.fill(usize::MAX);
        dist[root] = 0;
        parent[root] = usize::MAX;
        let mut queue = VecDeque::from([root]);
        'bfs: while let Some(u) = queue.pop_front() {
            if best.is_some_and(|b| 2 * dist[u] >= b) {
                break;
            }
            for &w in g.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    if best.is_none_or(|b| len < b) {
                        best = Some(len);
                    }
                    if len == 3 {
                        break 'bfs;
                    }
                }
            }
        }
        if best == Some(3) {
            break;
        }
    }
    best
}

/// Adjacency eigenvalues in descending order.
pub fn adjacency_spectrum(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let a = DMatrix::from_fn(n, n, |i, j| if g.has_edge(i, j) { 1.0 } else { 0.0 });
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralReport {
    pub degree: usize,
    pub lambda2: f64,
    /// `d − λ₂`; zero for disconnected graphs.
    pub gap: f64,
    pub connected: bool,
    pub method: SpectralMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMethod {
    Dense,
    PowerIteration,
}

/// Spectral gap `d − λ₂` of a `d`-regular graph.
pub fn spectral_gap(g: &Graph) -> Result<SpectralReport, ExpanderError> {
    let d = g.regular_degree().ok_or(GraphError::NotRegular)?;
    let connected = g.is_connected();
    let (lambda2, method) = if g.n() < 2 {
        (0.0, SpectralMethod::Dense)
    } else if g.n() <= DENSE_LIMIT {
        (adjacency_spectrum(g)[1], SpectralMethod::Dense)
    } else {
        (power_lambda2(g, d), SpectralMethod::PowerIteration)
    };
    let gap = if !connected || g.n() < 2 {
        0.0
    } else {
        d as f64 - lambda2
    };
    Ok(SpectralReport {
        degree: d,
        lambda2,
        gap,
        connected,
        method,
    })
}

/// Second eigenvalue by power iteration on `A + dI` orthogonal to the
/// constant vector.
fn power_lambda2(g: &Graph, d: usize) -> f64 {
    let n = g.n();
    let shift = d as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DVector::from_fn(n, |_, _| rand::Rng::gen_range(&mut rng, -1.0..1.0));
    let deflate = |v: &mut DVector<f64>| {
        let mean = v.sum() / n as f64;
        v.add_scalar_mut(-mean);
        let norm = v.norm();
        if norm > 0.0 {
            *v /= norm;
        }
    };
    deflate(&mut x);
    let mut estimate = 0.0;
    for _ in 0..20_000 {
        let mut y = DVector::from_fn(n, |i, _| shift * x[i] + g.neighbors(i).iter().map(|&j| x[j]).sum::<f64>());
        let rayleigh = x.dot(&y);
        deflate(&mut y);
        x = y;
        if (rayleigh - estimate).abs() < 1e-12 {
            estimate = rayleigh;
            break;
        }
        estimate = rayleigh;
    }
    estimate - shift
}

/// Uniform sample from the pairing model, rejecting loops and multi-edges.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, ExpanderError> {
    if (n * d) % 2 == 1 {
        return Err(ExpanderError::OddDegreeSum { n, d });
    }
    if d >= n && !(d == 0 && n <= 1) {
        return Err(ExpanderError::DegreeTooLarge { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..PAIRING_BUDGET {
        stubs.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(stubs.len() / 2);
        let mut edges = Vec::with_capacity(stubs.len() / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        return Ok(Graph::new(n, &edges)?);
    }
    Err(ExpanderError::BudgetExhausted(PAIRING_BUDGET))
}

/// Required girth as a function of vertex count: the threshold of the last
/// step whose size bound does not exceed `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GirthSchedule {
    steps: Vec<(usize, usize)>,
}

impl GirthSchedule {
    pub fn constant(g: usize) -> GirthSchedule {
        GirthSchedule { steps: vec![(0, g)] }
    }

    /// Steps `(n_i, g_i)`: graphs with `n ≥ n_i` need girth `≥ g_i`.
    pub fn steps(mut steps: Vec<(usize, usize)>) -> GirthSchedule {
        steps.sort_unstable();
        GirthSchedule { steps }
    }

    pub fn required(&self, n: usize) -> usize {
        self.steps.iter().take_while(|(m, _)| *m <= n).last().map_or(0, |&(_, g)| g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberRecord {
    pub n: usize,
    pub max_degree: usize,
    pub girth: Option<usize>,
    pub girth_required: usize,
    pub gap: f64,
    pub connected: bool,
    pub girth_ok: bool,
    pub gap_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCertificate {
    pub members: Vec<MemberRecord>,
    pub girth_schedule: GirthSchedule,
    pub epsilon: f64,
    pub degree_bound: usize,
    pub pass: bool,
}

/// Check every member against the girth schedule and the gap threshold.
/// A forest meets any girth requirement.
pub fn certify_family(
    graphs: &[Graph],
    schedule: &GirthSchedule,
    epsilon: f64,
) -> Result<FamilyCertificate, ExpanderError> {
    if graphs.is_empty() {
        return Err(ExpanderError::EmptyFamily);
    }
    let mut members = Vec::with_capacity(graphs.len());
    for g in graphs {
        let spec = spectral_gap(g)?;
        let gi = girth(g);
        let required = schedule.required(g.n());
        members.push(MemberRecord {
            n: g.n(),
            max_degree: g.max_degree(),
            girth: gi,
            girth_required: required,
            gap: spec.gap,
            connected: spec.connected,
            girth_ok: gi.is_none_or(|x| x >= required),
            gap_ok: spec.gap >= epsilon,
        });
    }
    let pass = members.iter().all(|m| m.girth_ok && m.gap_ok);
    Ok(FamilyCertificate {
        degree_bound: members.iter().map(|m| m.max_degree).max().unwrap_or(0),
        members,
        girth_schedule: schedule.clone(),
        epsilon,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub n: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub regular_degree: Option<usize>,
    pub connected: bool,
    pub girth: Option<usize>,
    pub spectral: Option<SpectralReport>,
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    GraphStats {
        n: g.n(),
        edges: g.edge_count(),
        max_degree: g.max_degree(),
        regular_degree: g.regular_degree(),
        connected: g.is_connected(),
        girth: girth(g),
        spectral: spectral_gap(g).ok(),
    }
}
