//! Surprise guided sampling of counterfactual labeled examples.
//!
//! A pivot node is drawn with weight growing in the magnitude of the
//! surprisal gradient there. A complete path leaving the tree at that pivot
//! is then sampled from the task's policy, restricted to paths the current
//! task labels in the direction that would lower the surprisal, and returned
//! with the opposite label as a conjectured mistake.

use rand::Rng;
use thiserror::Error;

use crate::mdp::{Mdp, Path};
use crate::numeric::{sample_index, softmax};
use crate::planner::{next_dfa_state, sample_rollout, ForcedMove, MaxEntPolicy};
use crate::prefix_tree::{NodeId, PivotMoves, PrefixTree};
use crate::task::{ExampleSet, LabeledExample, ReprClass, TaskSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SgsConfig {
    /// Pivot temperature; `f64::INFINITY` draws pivots uniformly.
    pub beta: f64,
    /// Rollouts tried per drawn pivot.
    pub retry_limit: usize,
    /// Pivots drawn before giving up.
    pub pivot_draws: usize,
    /// Use `exp(−|g|/β)` instead of `exp(+|g|/β)`.
    pub paper_literal_softmax: bool,
    /// Sample suffixes from the policy conditioned on the wanted label
    /// instead of rejection sampling.
    pub conditioned: bool,
}

impl Default for SgsConfig {
    fn default() -> Self {
        SgsConfig {
            beta: (-5f64).exp(),
            retry_limit: 32,
            pivot_draws: 8,
            paper_literal_softmax: false,
            conditioned: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SgsError {
    #[error("the prefix tree has no pivot-capable node")]
    NoPivots,
    #[error("pivot temperature must be positive, got {0}")]
    BadBeta(f64),
}

/// `D ∝ exp(±|g|/β)` over pivot coordinates.
pub fn pivot_distribution(grad: &[f64], beta: f64, paper_literal: bool) -> Result<Vec<f64>, SgsError> {
    let logits = pivot_logits(grad, beta, paper_literal)?;
    if beta == f64::INFINITY {
        return Ok(vec![1.0 / grad.len() as f64; grad.len()]);
    }
    Ok(softmax(&logits))
}

fn pivot_logits(grad: &[f64], beta: f64, paper_literal: bool) -> Result<Vec<f64>, SgsError> {
    if grad.is_empty() {
        return Err(SgsError::NoPivots);
    }
    if !(beta > 0.0) {
        return Err(SgsError::BadBeta(beta));
    }
    if beta == f64::INFINITY {
        return Ok(vec![0.0; grad.len()]);
    }
    let sign = if paper_literal { -1.0 } else { 1.0 };
    Ok(grad.iter().map(|g| sign * g.abs() / beta).collect())
}

/// Whether some task of the class is consistent with `xs ∪ {new}`.
pub fn feasibility_check(xs: &ExampleSet, new: &LabeledExample, repr: &ReprClass) -> bool {
    if xs.label_of(&new.word) == Some(!new.label) {
        return false;
    }
    let Some(prior) = repr.prior() else { return true };
    let in_ref = |w: &[u8]| prior.reference.accepts(w).unwrap_or(false);
    if xs.positives().chain(new.label.then_some(&new.word)).any(|w| !in_ref(w)) {
        return false;
    }
    !prior.mandatory_positives.iter().any(|w| xs.label_of(w) == Some(false) || (!new.label && new.word == *w))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgsSample {
    pub pivot: NodeId,
    pub gradient: f64,
    /// Trace of the sampled path with the flipped label; the path is kept as
    /// provenance.
    pub example: LabeledExample,
    /// Rollouts drawn in total, including rejected ones.
    pub rollouts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SgsOutcome {
    Sample(SgsSample),
    Exhausted { rollouts: usize },
}

/// `Pr(accepted | product state)` under the policy, indexed like the value
/// table.
fn acceptance_table(pol: &MaxEntPolicy, m: &Mdp) -> Vec<f64> {
    let d = pol.dfa();
    let n_q = d.n_states();
    let mut acc = vec![0.0; m.n_states() * n_q];
    for q in 0..n_q {
        acc[m.sink() * n_q + q] = if d.is_accepting(q) { 1.0 } else { 0.0 };
    }
    for &s in m.topological_order().iter().rev() {
        for q in 0..n_q {
            let probs = pol.action_probs(s, q);
            acc[s * n_q + q] = probs
                .iter()
                .enumerate()
                .map(|(k, pa)| {
                    pa * m
                        .dist_at(s, k)
                        .iter()
                        .map(|&(t, p)| p * acc[t * n_q + next_dfa_state(m, d, q, t)])
                        .sum::<f64>()
                })
                .sum();
        }
    }
    acc
}

struct Conditioner<'a> {
    acc: &'a [f64],
    n_q: usize,
    want: bool,
}

impl Conditioner<'_> {
    /// Probability of ending with the wanted label from `(s, q)`.
    fn hit(&self, s: usize, q: usize) -> f64 {
        let a = self.acc[s * self.n_q + q].clamp(0.0, 1.0);
        if self.want {
            a
        } else {
            1.0 - a
        }
    }
}

/// Draws an SGS example for `task` (whose calibrated policy is `pol`) against
/// the current examples `xs`.
#[allow(clippy::too_many_arguments)]
pub fn sgs_sample<R: Rng + ?Sized>(
    task: &TaskSpec,
    pol: &MaxEntPolicy,
    grad: &[f64],
    xs: &ExampleSet,
    tree: &PrefixTree,
    m: &Mdp,
    cfg: &SgsConfig,
    rng: &mut R,
) -> Result<SgsOutcome, SgsError> {
    let logits = pivot_logits(grad, cfg.beta, cfg.paper_literal_softmax)?;
    let acc = acceptance_table(pol, m);
    let n_q = pol.dfa().n_states();
    let node_q = tree.dfa_states(m, pol.dfa());
    // per pivot: first-move candidates, their weights given the wanted label,
    // and the total probability of that label
    let firsts: Vec<(Vec<ForcedMove>, Vec<f64>, f64)> = tree
        .pivots()
        .iter()
        .zip(grad)
        .map(|(&pivot, &g)| {
            let c = Conditioner { acc: &acc, n_q, want: g > 0.0 };
            let node = tree.node(pivot);
            let s = node.prefix.last_state();
            let q = node_q[pivot];
            let hit_after = |t: usize| c.hit(t, next_dfa_state(m, pol.dfa(), q, t));
            let (moves, weights): (Vec<ForcedMove>, Vec<f64>) = match &node.moves {
                PivotMoves::Actions(acts) => {
                    let probs = pol.action_probs(s, q);
                    acts.iter()
                        .map(|&a| {
                            let k = m.action_index(s, a).expect("available");
                            let w = probs[k] * m.dist_at(s, k).iter().map(|&(t, p)| p * hit_after(t)).sum::<f64>();
                            (ForcedMove::Action(a), w)
                        })
                        .unzip()
                }
                PivotMoves::States { states, .. } => {
                    states.iter().map(|&(t, p)| (ForcedMove::State(t), p * hit_after(t))).unzip()
                }
            };
            let total = weights.iter().sum::<f64>();
            (moves, weights, total)
        })
        .collect();
    // pivots are drawn jointly with the label condition: D(ρ)·Pr(label | ρ)
    if firsts.iter().all(|f| f.2 <= 0.0) {
        return Ok(SgsOutcome::Exhausted { rollouts: 0 });
    }
    let mut joint = softmax(&logits.iter().zip(&firsts).map(|(l, f)| l + f.2.ln()).collect::<Vec<_>>());
    let mut rollouts = 0;
    for _ in 0..cfg.pivot_draws {
        let Some(k) = sample_index(&joint, rng) else { break };
        let pivot = tree.pivots()[k];
        let g = grad[k];
        let want = g > 0.0;
        let cond = cfg.conditioned.then(|| Conditioner { acc: &acc, n_q, want });
        let node = tree.node(pivot);
        let (moves, weights, _) = &firsts[k];
        // rejection sampling keeps the unconditioned first-move law
        let weights: Vec<f64> = if cfg.conditioned {
            weights.clone()
        } else {
            match &node.moves {
                PivotMoves::Actions(acts) => {
                    let probs = pol.action_probs(node.prefix.last_state(), node_q[pivot]);
                    acts.iter()
                        .map(|&a| probs[m.action_index(node.prefix.last_state(), a).expect("available")])
                        .collect()
                }
                PivotMoves::States { states, .. } => states.iter().map(|&(_, p)| p).collect(),
            }
        };
        for _ in 0..cfg.retry_limit {
            rollouts += 1;
            let Some(i) = sample_index(&weights, rng) else { break };
            let first = moves[i];
            let path = match &cond {
                None => sample_rollout(pol, m, rng, Some(&node.prefix), Some(first)).expect("pivot moves are possible"),
                Some(c) => conditioned_rollout(pol, m, c, &node.prefix, first, rng),
            };
            let in_task = task.path_in_task(&path, m).expect("rollouts are complete");
            if in_task != want {
                continue;
            }
            let example = LabeledExample::with_path(m.trace_of(&path), !in_task, path);
            if !feasibility_check(xs, &example, task.repr()) {
                continue;
            }
            return Ok(SgsOutcome::Sample(SgsSample { pivot, gradient: g, example, rollouts }));
        }
        joint[k] = 0.0;
    }
    Ok(SgsOutcome::Exhausted { rollouts })
}

/// Rollout from `prefix·first` with every later draw reweighted by the
/// probability of still ending with the wanted label.
fn conditioned_rollout<R: Rng + ?Sized>(
    pol: &MaxEntPolicy,
    m: &Mdp,
    c: &Conditioner<'_>,
    prefix: &Path,
    first: ForcedMove,
    rng: &mut R,
) -> Path {
    let d = pol.dfa();
    let mut path = prefix.clone();
    let mut q = pol.dfa_state_after(m, &path);
    match first {
        ForcedMove::Action(a) => path.push_action(a),
        ForcedMove::State(t) => {
            path.push_state(t);
            q = next_dfa_state(m, d, q, t);
        }
    }
    loop {
        let s = path.last_state();
        if let Some(a) = path.pending_action() {
            let dist = m.transition_dist(s, a).expect("valid action");
            let w: Vec<f64> = dist.iter().map(|&(t, p)| p * c.hit(t, next_dfa_state(m, d, q, t))).collect();
            let t = dist[sample_index(&w, rng).expect("wanted label reachable")].0;
            path.push_state(t);
            q = next_dfa_state(m, d, q, t);
            continue;
        }
        if s == m.sink() {
            return path;
        }
        let probs = pol.action_probs(s, q);
        let w: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(k, pa)| {
                pa * m.dist_at(s, k).iter().map(|&(t, p)| p * c.hit(t, next_dfa_state(m, d, q, t))).sum::<f64>()
            })
            .collect();
        path.push_action(m.actions(s)[sample_index(&w, rng).expect("wanted label reachable")]);
    }
}
