use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_columns, Dataset, Matrix};
use crate::error::Result;
use crate::math;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    /// Inverse of the regularization parameter C.
    pub l2_strength: f64,
    pub max_iter: usize,
    /// Stop once the gradient norm drops below this.
    pub tol: f64,
    /// Recorded for provenance; the optimizer starts from zero and is deterministic.
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2_strength: 1.0,
            max_iter: 1000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Per-feature `(mean, std)` applied before scoring.
    pub standardization: Vec<(f64, f64)>,
    pub converged: bool,
    pub iterations: usize,
    pub l2_strength: f64,
    pub seed: u64,
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + math::exp(-s))
    } else {
        let e = math::exp(s);
        e / (1.0 + e)
    }
}

/// `log(1 + e^s)` without overflow.
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + math::ln_1p(math::exp(-s))
    } else {
        math::ln_1p(math::exp(s))
    }
}

/// Mean negative log-likelihood plus `l2 / (2n) * |w|^2` over standardized
/// features. Parameters are `[w_0, ..., w_{d-1}, bias]`.
pub struct LogisticObjective<'a> {
    z: &'a Matrix,
    y: &'a [u8],
    l2: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(z: &'a Matrix, y: &'a [u8], l2: f64) -> Self {
        Self { z, y, l2 }
    }

    fn score(&self, params: &[f64], row: &[f64]) -> f64 {
        let d = row.len();
        row.iter().zip(&params[..d]).map(|(a, b)| a * b).sum::<f64>() + params[d]
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let n = self.y.len() as f64;
        let d = self.z.cols();
        let nll: f64 = self
            .z
            .iter_rows()
            .zip(self.y)
            .map(|(row, &y)| {
                let s = self.score(params, row);
                softplus(s) - y as f64 * s
            })
            .sum();
        let reg: f64 = params[..d].iter().map(|w| w * w).sum();
        nll / n + 0.5 * self.l2 * reg / n
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let n = self.y.len() as f64;
        let d = self.z.cols();
        let mut g = vec![0.0; d + 1];
        for (row, &y) in self.z.iter_rows().zip(self.y) {
            let r = sigmoid(self.score(params, row)) - y as f64;
            for (gj, &zj) in g[..d].iter_mut().zip(row) {
                *gj += r * zj;
            }
            g[d] += r;
        }
        for j in 0..d {
            g[j] = g[j] / n + self.l2 * params[j] / n;
        }
        g[d] /= n;
        g
    }
}

fn standardize(x: &Matrix, stats: &[(f64, f64)]) -> Matrix {
    let mut z = x.clone();
    for i in 0..z.rows() {
        for (j, &(m, s)) in stats.iter().enumerate() {
            z.set(i, j, (x.get(i, j) - m) / s);
        }
    }
    z
}

impl LogisticModel {
    /// Gradient descent with Armijo backtracking from the zero vector.
    pub fn train(data: &Dataset, cfg: &LogisticConfig) -> Result<Self> {
        Self::train_with_history(data, cfg).map(|(m, _)| m)
    }

    /// Like [`LogisticModel::train`], also returning the objective value
    /// after every accepted step (starting with the initial value).
    pub fn train_with_history(data: &Dataset, cfg: &LogisticConfig) -> Result<(Self, Vec<f64>)> {
        data.require_both_classes()?;
        let d = data.n_features();
        let n = data.len() as f64;
        let standardization: Vec<(f64, f64)> = (0..d)
            .map(|j| {
                let col = data.x().column(j);
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let std = math::sqrt(var);
                (mean, if std > 0.0 && std.is_finite() { std } else { 1.0 })
            })
            .collect();
        let z = standardize(data.x(), &standardization);
        let objective = LogisticObjective::new(&z, data.y(), cfg.l2_strength);

        let mut params = vec![0.0; d + 1];
        let mut value = objective.value(&params);
        let mut history = vec![value];
        let mut step = 1.0;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < cfg.max_iter {
            let g = objective.gradient(&params);
            let gnorm2: f64 = g.iter().map(|v| v * v).sum();
            if math::sqrt(gnorm2) < cfg.tol {
                converged = true;
                break;
            }
            iterations += 1;
            step *= 2.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = params.iter().zip(&g).map(|(p, gi)| p - step * gi).collect();
                let trial_value = objective.value(&trial);
                if trial_value <= value - 1e-4 * step * gnorm2 {
                    params = trial;
                    value = trial_value;
                    history.push(value);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if !converged {
            log::warn!("logistic regression stopped after {iterations} iterations without reaching tolerance");
        }
        let model = Self {
            bias: params[d],
            weights: params[..d].to_vec(),
            standardization,
            converged,
            iterations,
            l2_strength: cfg.l2_strength,
            seed: cfg.seed,
        };
        Ok((model, history))
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    /// Affine score on standardized features.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        row.iter()
            .zip(&self.standardization)
            .zip(&self.weights)
            .map(|((x, (m, s)), w)| w * (x - m) / s)
            .sum::<f64>()
            + self.bias
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_columns(self.weights.len(), x)?;
        Ok(x.iter_rows().map(|r| sigmoid(self.score_row(r))).collect())
    }
}
