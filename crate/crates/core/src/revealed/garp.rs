//! GARP: no strict revealed-preference cycles.
//!
//! Bundle `beta_t` is directly revealed preferred to `beta_s` when `beta_s`
//! was affordable at the prices that produced `beta_t`. The weak relation
//! includes ties; a violation is a chain `t -> ... -> s` in the transitive
//! closure together with a *strict* reverse (`beta_t` strictly cheaper than
//! `beta_s` at `beta_s`'s own prices). The closure is computed by Warshall's
//! O(N^3) pass.

use crate::error::{Error, Result};

use super::{BudgetSpec, RPDataset};

/// Outcome of a GARP test. `Fail` carries a witness cycle of 0-based
/// observation indices, closed (first element repeated at the end), whose
/// consecutive pairs are direct revealed-preference edges and whose closing
/// edge is strict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GarpVerdict {
    Pass,
    Fail { cycle: Vec<usize> },
}

impl GarpVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, GarpVerdict::Pass)
    }
}

fn warshall(closure: &mut [Vec<bool>]) {
    let n = closure.len();
    for k in 0..n {
        for i in 0..n {
            if closure[i][k] {
                for j in 0..n {
                    if closure[k][j] {
                        closure[i][j] = true;
                    }
                }
            }
        }
    }
}

/// Shortest direct-edge path `from -> ... -> to` by BFS; used to materialize
/// the witness cycle once a closure violation is found.
fn bfs_path(direct: &[Vec<bool>], from: usize, to: usize) -> Option<Vec<usize>> {
    if from == to {
        return Some(vec![from]);
    }
    let n = direct.len();
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([from]);
    prev[from] = from;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if i != j && direct[i][j] && prev[j] == usize::MAX {
                prev[j] = i;
                if j == to {
                    let mut path = vec![to];
                    let mut cur = to;
                    while cur != from {
                        cur = prev[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(j);
            }
        }
    }
    None
}

fn garp_over(direct: Vec<Vec<bool>>, strict_reverse: impl Fn(usize, usize) -> bool) -> GarpVerdict {
    let n = direct.len();
    let mut closure = direct.clone();
    warshall(&mut closure);
    for t in 0..n {
        for s in 0..n {
            if t != s && closure[t][s] && strict_reverse(s, t) {
                let mut cycle = bfs_path(&direct, t, s).unwrap_or_else(|| vec![t, s]);
                cycle.push(t);
                return GarpVerdict::Fail { cycle };
            }
        }
    }
    GarpVerdict::Pass
}

/// GARP for linear-budget datasets: `t R s` iff
/// `alpha_t' beta_t >= alpha_t' beta_s`; fail iff some closure pair has the
/// strict reverse `alpha_s' beta_s > alpha_s' beta_t`.
pub fn garp_check(ds: &RPDataset) -> Result<GarpVerdict> {
    if !matches!(ds.budget(), BudgetSpec::Linear { .. }) {
        return Err(Error::Validation(
            "garp_check requires a linear budget; use nonlinear_garp otherwise".into(),
        ));
    }
    let n = ds.len();
    let mut spend = vec![vec![0.0f64; n]; n];
    for t in 0..n {
        for s in 0..n {
            spend[t][s] = ds.probes()[t].dot(&ds.responses()[s]);
        }
    }
    let direct: Vec<Vec<bool>> =
        (0..n).map(|t| (0..n).map(|s| spend[t][t] >= spend[t][s]).collect()).collect();
    Ok(garp_over(direct, |s, t| spend[s][s] > spend[s][t]))
}

/// Generalized GARP for monotone budgets `g_t` with on-boundary responses
/// (`g_t(beta_t) = 0`): `t R s` iff `g_t(beta_s) <= 0`; fail iff some closure
/// pair has `g_s(beta_t) < 0`. Monotonicity of the budget is the caller's
/// contract; for SINR budgets it can be certified with
/// [`super::sinr_monotonicity_check`].
pub fn nonlinear_garp(ds: &RPDataset) -> Result<GarpVerdict> {
    let n = ds.len();
    let mut g = vec![vec![0.0f64; n]; n];
    for t in 0..n {
        for s in 0..n {
            g[t][s] = ds.budget_value(t, &ds.responses()[s])?;
        }
    }
    let direct: Vec<Vec<bool>> =
        (0..n).map(|t| (0..n).map(|s| g[t][s] <= 0.0).collect()).collect();
    Ok(garp_over(direct, |s, t| g[s][t] < 0.0))
}
