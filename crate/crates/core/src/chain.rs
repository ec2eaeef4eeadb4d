//! Finite discrete-time Markov chains and their stationary distributions.
//!
//! All three model chains (PU occupancy, SU system chain, per-SU handoff
//! chain) are small and dense, so the solver works on a dense row-major
//! matrix. The stationary vector is obtained from a direct solve of the
//! balance equations with one equation swapped for normalization; power
//! iteration on the lazy chain is kept as an independent cross-check.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};

/// Allowed deviation of a row sum from one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Allowed L∞ residual of `πP − π` for a solved chain.
pub const BALANCE_TOLERANCE: f64 = 1e-9;

/// Row-stochastic one-step transition matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds a matrix from `n * n` row-major entries, validating stochasticity.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", 0, "at least one state"));
        }
        if data.len() != n * n {
            return Err(Error::invalid(
                "rows",
                data.len(),
                &format!("{} entries", n * n),
            ));
        }
        let matrix = Self { n, data };
        matrix.validate()?;
        Ok(matrix)
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotStochastic {
                    row: i,
                    reason: format!("has {} entries, expected {n}", row.len()),
                });
            }
            data.extend(row);
        }
        Self::new(n, data)
    }

    /// Checks every entry is in `[0, 1]` and every row sums to one.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            let row = self.row(i);
            if let Some((j, &x)) = row
                .iter()
                .enumerate()
                .find(|(_, x)| !(0.0..=1.0).contains(*x))
            {
                return Err(Error::NotStochastic {
                    row: i,
                    reason: format!("entry ({i},{j}) = {x} outside [0,1]"),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NotStochastic {
                    row: i,
                    reason: format!("sums to {sum:.17}"),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.n + to]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Relabels states so that new state `k` is old state `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        assert_eq!(order.len(), self.n, "permutation length mismatch");
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                data[a * n + b] = self.get(i, j);
            }
        }
        Self::new(n, data)
    }

    /// `x P` for a row vector `x`.
    pub fn left_multiply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, &pij) in out.iter_mut().zip(self.row(i)) {
                *o += xi * pij;
            }
        }
        out
    }

    /// Closed communicating classes, each sorted, ordered by smallest state.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let mut graph = DiGraph::<(), ()>::with_capacity(self.n, self.n * 4);
        let nodes: Vec<_> = (0..self.n).map(|_| graph.add_node(())).collect();
        for i in 0..self.n {
            for (j, &x) in self.row(i).iter().enumerate() {
                if x > 0.0 {
                    graph.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        let mut component = vec![0usize; self.n];
        let sccs = tarjan_scc(&graph);
        for (c, scc) in sccs.iter().enumerate() {
            for node in scc {
                component[node.index()] = c;
            }
        }
        let mut closed: Vec<Vec<usize>> = sccs
            .iter()
            .enumerate()
            .filter(|(c, scc)| {
                scc.iter().all(|node| {
                    let i = node.index();
                    self.row(i)
                        .iter()
                        .enumerate()
                        .all(|(j, &x)| x == 0.0 || component[j] == *c)
                })
            })
            .map(|(_, scc)| {
                let mut states: Vec<usize> = scc.iter().map(|n| n.index()).collect();
                states.sort_unstable();
                states
            })
            .collect();
        closed.sort_by_key(|class| class[0]);
        closed
    }
}

/// Probability mass over the states of a finite chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    probs: Vec<f64>,
}

impl StationaryDistribution {
    /// Wraps a probability vector, checking nonnegativity and normalization.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some((i, &x)) = probs.iter().enumerate().find(|(_, x)| x.is_nan() || **x < 0.0) {
            return Err(Error::invalid(&format!("probs[{i}]"), x, "nonnegative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::invalid("probs", format!("sum {sum}"), "sum 1"));
        }
        Ok(Self { probs })
    }

    /// Point mass on `state`.
    pub fn delta(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// L∞ norm of `πP − π`.
    pub fn balance_residual(&self, matrix: &TransitionMatrix) -> f64 {
        matrix
            .left_multiply(&self.probs)
            .iter()
            .zip(&self.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// L∞ distance to another distribution of the same length.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "distribution length mismatch");
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn require_unique_class(matrix: &TransitionMatrix) -> Result<()> {
    let classes = matrix.closed_classes();
    if classes.len() > 1 {
        return Err(Error::MultipleRecurrentClasses { classes });
    }
    Ok(())
}

/// Stationary distribution via a dense solve of `(Pᵀ − I)π = 0` with the last
/// equation replaced by `Σπ = 1`.
///
/// Periodic chains are fine; only a unique closed class is required.
pub fn stationary_distribution(matrix: &TransitionMatrix) -> Result<StationaryDistribution> {
    matrix.validate()?;
    require_unique_class(matrix)?;
    let n = matrix.len();
    let mut a = DMatrix::<f64>::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        matrix.get(j, i) - identity
    });
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let solution = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular(format!("{n}-state balance system")))?;
    finish(solution.iter().copied().collect(), matrix)
}

/// Power iteration on the lazy chain `(P + I) / 2`, which shares the
/// stationary vector of `P` but is aperiodic.
pub fn power_iteration(
    matrix: &TransitionMatrix,
    max_iterations: usize,
    tolerance: f64,
) -> Result<StationaryDistribution> {
    matrix.validate()?;
    require_unique_class(matrix)?;
    let n = matrix.len();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..max_iterations {
        let next: Vec<f64> = matrix
            .left_multiply(&x)
            .iter()
            .zip(&x)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let delta = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if delta < tolerance {
            return finish(x, matrix);
        }
    }
    Err(Error::Singular(format!(
        "power iteration did not converge in {max_iterations} steps"
    )))
}

fn finish(mut probs: Vec<f64>, matrix: &TransitionMatrix) -> Result<StationaryDistribution> {
    // Round-off can leave entries like -1e-17 on transient states.
    for x in probs.iter_mut() {
        if *x < 0.0 {
            if *x < -BALANCE_TOLERANCE {
                return Err(Error::Singular(format!("negative stationary mass {x}")));
            }
            *x = 0.0;
        }
    }
    let sum: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|x| *x /= sum);
    let dist = StationaryDistribution { probs };
    let residual = dist.balance_residual(matrix);
    if residual > BALANCE_TOLERANCE {
        return Err(Error::Singular(format!("balance residual {residual:e}")));
    }
    Ok(dist)
}
