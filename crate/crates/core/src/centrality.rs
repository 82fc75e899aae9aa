//! LexRank centrality: damped power iteration over row-stochastic matrices.
//!
//! The update is `p <- d * M^T p + (1 - d) / n`, starting from the uniform
//! distribution and stopping when the L1 change drops below epsilon.
//! Dangling rows (nodes with zero outgoing mass) are treated as uniform over
//! all nodes, so total mass is conserved exactly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Taeg;

/// Parameters of the damped power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerIterationConfig {
    /// Damping factor d in (0, 1].
    pub damping: f64,
    /// L1 convergence threshold.
    pub epsilon: f64,
    /// Iteration cap.
    pub max_iter: usize,
}

impl Default for PowerIterationConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            epsilon: 1e-8,
            max_iter: 200,
        }
    }
}

/// Errors from matrix construction and iteration.
#[derive(Debug, Error, PartialEq)]
pub enum CentralityError {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("negative weight {weight} on edge ({a}, {b})")]
    NegativeWeight { a: usize, b: usize, weight: f64 },
    #[error("row {row} sums to {sum}, expected 1")]
    NonStochastic { row: usize, sum: f64 },
    #[error("invalid power iteration config: {0}")]
    InvalidConfig(String),
}

/// A sparse row-stochastic matrix. Dangling rows are stored as empty and
/// interpreted as the uniform distribution during multiplication.
#[derive(Debug, Clone)]
pub struct StochasticMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    dangling: Vec<bool>,
}

impl StochasticMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn is_dangling(&self, row: usize) -> bool {
        self.dangling[row]
    }

    /// Dense copy with dangling rows materialized as uniform; intended for
    /// small matrices in tests and oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut dense = vec![vec![0.0; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            if self.dangling[i] {
                for x in dense[i].iter_mut() {
                    *x = 1.0 / n as f64;
                }
            } else {
                for &(j, w) in row {
                    dense[i][j] = w;
                }
            }
        }
        dense
    }
}

/// Normalizes an undirected weighted edge set into a row-stochastic matrix.
/// Each edge contributes its weight in both directions; nodes with zero
/// total weight become dangling rows (uniform under iteration).
pub fn to_stochastic(
    node_count: usize,
    edges: &[(usize, usize, f64)],
) -> Result<StochasticMatrix, CentralityError> {
    if node_count == 0 {
        return Err(CentralityError::EmptyGraph);
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); node_count];
    for &(a, b, w) in edges {
        assert!(a < node_count && b < node_count, "edge ({a}, {b}) out of range");
        if w < 0.0 {
            return Err(CentralityError::NegativeWeight { a, b, weight: w });
        }
        if w == 0.0 {
            continue;
        }
        rows[a].push((b, w));
        if a != b {
            rows[b].push((a, w));
        }
    }
    let mut dangling = vec![false; node_count];
    for (i, row) in rows.iter_mut().enumerate() {
        row.sort_by_key(|&(j, _)| j);
        row.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        let sum: f64 = row.iter().map(|&(_, w)| w).sum();
        if sum == 0.0 {
            dangling[i] = true;
            row.clear();
        } else {
            for entry in row.iter_mut() {
                entry.1 /= sum;
            }
        }
    }
    Ok(StochasticMatrix { rows, dangling })
}

/// Stationary scores of one graph, indexed by node id.
#[derive(Debug, Clone)]
pub struct CentralityScores {
    scores: Vec<f64>,
    /// Update steps performed before convergence (or the cap).
    pub iterations: usize,
    pub converged: bool,
}

impl CentralityScores {
    /// Wraps an externally produced score vector; used by tests and by the
    /// per-event scoring mode.
    pub fn from_scores(scores: Vec<f64>) -> Self {
        Self {
            scores,
            iterations: 0,
            converged: true,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&self, node: usize) -> f64 {
        self.scores[node]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }
}

fn validate_config(config: &PowerIterationConfig) -> Result<(), CentralityError> {
    if !(config.damping > 0.0 && config.damping <= 1.0) {
        return Err(CentralityError::InvalidConfig(format!(
            "damping {} is outside (0, 1]",
            config.damping
        )));
    }
    if !config.epsilon.is_finite() || config.epsilon <= 0.0 {
        return Err(CentralityError::InvalidConfig(format!(
            "epsilon {} must be positive",
            config.epsilon
        )));
    }
    if config.max_iter == 0 {
        return Err(CentralityError::InvalidConfig("max_iter must be >= 1".into()));
    }
    Ok(())
}

/// Damped power iteration from the uniform start vector.
pub fn lexrank(
    matrix: &StochasticMatrix,
    config: &PowerIterationConfig,
) -> Result<CentralityScores, CentralityError> {
    validate_config(config)?;
    let n = matrix.n();
    if n == 0 {
        return Err(CentralityError::EmptyGraph);
    }
    for (i, row) in matrix.rows.iter().enumerate() {
        if matrix.dangling[i] {
            continue;
        }
        let sum: f64 = row.iter().map(|&(_, w)| w).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CentralityError::NonStochastic { row: i, sum });
        }
    }

    let d = config.damping;
    let teleport = (1.0 - d) / n as f64;
    let mut p = vec![1.0 / n as f64; n];
    for iteration in 1..=config.max_iter {
        let mut next = vec![teleport; n];
        let mut dangling_mass = 0.0;
        for (i, row) in matrix.rows.iter().enumerate() {
            if matrix.dangling[i] {
                dangling_mass += p[i];
                continue;
            }
            let push = d * p[i];
            for &(j, w) in row {
                next[j] += push * w;
            }
        }
        if dangling_mass > 0.0 {
            let share = d * dangling_mass / n as f64;
            for x in next.iter_mut() {
                *x += share;
            }
        }
        let diff: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if diff < config.epsilon {
            return Ok(CentralityScores {
                scores: p,
                iterations: iteration,
                converged: true,
            });
        }
    }
    Ok(CentralityScores {
        scores: p,
        iterations: config.max_iter,
        converged: false,
    })
}

/// Which subgraph the TAEG scores are computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LexrankScope {
    /// One walk over the whole TAEG: SAME_EVENT weights plus BEFORE edges
    /// symmetrized at weight 1.0.
    #[default]
    Global,
    /// Independent walks over each event's SAME_EVENT clique, rescaled so
    /// the scores still sum to one overall.
    PerEvent,
}

impl fmt::Display for LexrankScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LexrankScope::Global => "global",
            LexrankScope::PerEvent => "per-event",
        })
    }
}

impl FromStr for LexrankScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "global" => Ok(LexrankScope::Global),
            "per-event" => Ok(LexrankScope::PerEvent),
            other => Err(format!("unknown lexrank scope `{other}` (expected `global` or `per-event`)")),
        }
    }
}

/// Scores the TAEG's event versions.
pub fn taeg_scores(
    taeg: &Taeg,
    config: &PowerIterationConfig,
    scope: LexrankScope,
) -> Result<CentralityScores, CentralityError> {
    match scope {
        LexrankScope::Global => {
            let mut edges = taeg.same_event_edges.clone();
            edges.extend(taeg.before_edges.iter().map(|&(a, b)| (a, b, 1.0)));
            let matrix = to_stochastic(taeg.node_count(), &edges)?;
            lexrank(&matrix, config)
        }
        LexrankScope::PerEvent => {
            // Cluster nodes by event, preserving node id order within each.
            let mut clusters: Vec<(crate::corpus::EventIndex, Vec<usize>)> = Vec::new();
            for node in &taeg.nodes {
                match clusters.last_mut() {
                    Some((event, ids)) if *event == node.event => ids.push(node.id),
                    _ => clusters.push((node.event, vec![node.id])),
                }
            }
            let cluster_count = clusters.len();
            let mut scores = vec![0.0; taeg.node_count()];
            let mut iterations = 0;
            let mut converged = true;
            for (event, ids) in clusters {
                let local_index: std::collections::HashMap<usize, usize> =
                    ids.iter().enumerate().map(|(local, &id)| (id, local)).collect();
                let local_edges: Vec<(usize, usize, f64)> = taeg
                    .same_event_edges
                    .iter()
                    .filter(|(a, _, _)| taeg.nodes[*a].event == event)
                    .map(|&(a, b, w)| (local_index[&a], local_index[&b], w))
                    .collect();
                let matrix = to_stochastic(ids.len(), &local_edges)?;
                let local = lexrank(&matrix, config)?;
                iterations = iterations.max(local.iterations);
                converged &= local.converged;
                for (local_id, &node) in ids.iter().enumerate() {
                    scores[node] = local.score(local_id) / cluster_count as f64;
                }
            }
            Ok(CentralityScores {
                scores,
                iterations,
                converged,
            })
        }
    }
}
