//! Finite MDP dynamics with an absorbing end-of-episode sink.
//!
//! States and actions are dense indices. Every state carries a symbol of the
//! task alphabet (its color), except the sink which is unlabeled. Transition
//! graphs must be acyclic apart from the sink self-loop, so every model here
//! has its finite horizon built in.

mod format;
mod grid;

pub use format::{parse_demos, parse_map, write_demo};
pub use grid::{Color, GridSpec, GridWorld, Move};

use std::collections::VecDeque;

use thiserror::Error;

use crate::task::{Alphabet, Symbol, Word};

pub type StateId = usize;
pub type ActionId = usize;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdpError {
    #[error("state {0} has no actions")]
    NoActions(StateId),
    #[error("state {state} lists action {action} twice")]
    DuplicateAction { state: StateId, action: ActionId },
    #[error("transition ({state}, {action}) has mass {sum}, expected 1")]
    BadDistribution { state: StateId, action: ActionId, sum: f64 },
    #[error("transition ({state}, {action}) points to unknown state {target}")]
    UnknownTarget { state: StateId, action: ActionId, target: StateId },
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("action {action} is not available at state {state}")]
    UnknownAction { state: StateId, action: ActionId },
    #[error("transition graph has a cycle outside the sink; a finite horizon is required")]
    Cyclic,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("path enumeration refused: more than {cap} complete paths")]
    EnumerationCap { cap: usize },
}

/// Finite stochastic dynamics model `(S, A, s₀, P)` with sink `$`.
#[derive(Debug, Clone)]
pub struct Mdp {
    alphabet: Alphabet,
    action_names: Vec<String>,
    actions: Vec<Vec<ActionId>>,
    trans: Vec<Vec<Vec<(StateId, f64)>>>,
    labels: Vec<Option<Symbol>>,
    start: StateId,
    sink: StateId,
    topo: Vec<StateId>,
    include_start_label: bool,
}

/// Incremental construction of an [`Mdp`]. The sink is created up front and
/// absorbs every action.
#[derive(Debug, Clone)]
pub struct MdpBuilder {
    alphabet: Alphabet,
    action_names: Vec<String>,
    actions: Vec<Vec<ActionId>>,
    trans: Vec<Vec<Vec<(StateId, f64)>>>,
    labels: Vec<Option<Symbol>>,
}

impl MdpBuilder {
    pub fn new(alphabet: Alphabet, action_names: Vec<String>) -> Self {
        assert!(!action_names.is_empty(), "an MDP needs at least one action");
        let mut b = MdpBuilder { alphabet, action_names, actions: Vec::new(), trans: Vec::new(), labels: Vec::new() };
        b.actions.push(vec![0]);
        b.trans.push(vec![vec![(0, 1.0)]]);
        b.labels.push(None);
        b
    }

    pub fn sink(&self) -> StateId {
        0
    }

    pub fn add_state(&mut self, label: Symbol) -> StateId {
        assert!((label as usize) < self.alphabet.len(), "label outside alphabet");
        self.actions.push(Vec::new());
        self.trans.push(Vec::new());
        self.labels.push(Some(label));
        self.labels.len() - 1
    }

    /// Adds action `action` at `state` with successor distribution `dist`.
    /// Repeated targets are merged; zero-mass entries dropped.
    pub fn add_transition(&mut self, state: StateId, action: ActionId, dist: &[(StateId, f64)]) {
        let mut merged: Vec<(StateId, f64)> = Vec::new();
        for &(t, p) in dist {
            if p == 0.0 {
                continue;
            }
            match merged.iter_mut().find(|(u, _)| *u == t) {
                Some(e) => e.1 += p,
                None => merged.push((t, p)),
            }
        }
        self.actions[state].push(action);
        self.trans[state].push(merged);
    }

    pub fn build(self, start: StateId) -> Result<Mdp, MdpError> {
        let n = self.labels.len();
        if start >= n {
            return Err(MdpError::UnknownState(start));
        }
        for s in 0..n {
            if self.actions[s].is_empty() {
                return Err(MdpError::NoActions(s));
            }
            for (k, &a) in self.actions[s].iter().enumerate() {
                if a >= self.action_names.len() {
                    return Err(MdpError::UnknownAction { state: s, action: a });
                }
                if self.actions[s][..k].contains(&a) {
                    return Err(MdpError::DuplicateAction { state: s, action: a });
                }
                let dist = &self.trans[s][k];
                if let Some(&(t, _)) = dist.iter().find(|(t, _)| *t >= n) {
                    return Err(MdpError::UnknownTarget { state: s, action: a, target: t });
                }
                let sum: f64 = dist.iter().map(|(_, p)| p).sum();
                if (sum - 1.0).abs() > PROB_TOL || dist.iter().any(|(_, p)| *p < 0.0) {
                    return Err(MdpError::BadDistribution { state: s, action: a, sum });
                }
            }
        }
        let topo = topological_order(&self.trans, 0)?;
        Ok(Mdp {
            alphabet: self.alphabet,
            action_names: self.action_names,
            actions: self.actions,
            trans: self.trans,
            labels: self.labels,
            start,
            sink: 0,
            topo,
            include_start_label: false,
        })
    }
}

/// Kahn's algorithm over non-sink states. Acyclicity also gives the sink
/// reachability invariant: every state has a successor, so every maximal
/// path ends in `$`.
fn topological_order(trans: &[Vec<Vec<(StateId, f64)>>], sink: StateId) -> Result<Vec<StateId>, MdpError> {
    let n = trans.len();
    let mut indeg = vec![0usize; n];
    let mut succ: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in (0..n).filter(|&s| s != sink) {
        for dist in &trans[s] {
            for &(t, _) in dist {
                if t != sink && !succ[s].contains(&t) {
                    succ[s].push(t);
                    indeg[t] += 1;
                }
            }
        }
    }
    let mut queue: VecDeque<StateId> = (0..n).filter(|&s| s != sink && indeg[s] == 0).collect();
    let mut order = Vec::with_capacity(n.saturating_sub(1));
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for &t in &succ[s] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                queue.push_back(t);
            }
        }
    }
    if order.len() + 1 != n {
        return Err(MdpError::Cyclic);
    }
    Ok(order)
}

impl Mdp {
    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn sink(&self) -> StateId {
        self.sink
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    /// `A(s)` in its fixed order.
    pub fn actions(&self, s: StateId) -> &[ActionId] {
        &self.actions[s]
    }

    pub fn label(&self, s: StateId) -> Option<Symbol> {
        self.labels[s]
    }

    /// Non-sink states ordered so that every transition goes forward.
    pub fn topological_order(&self) -> &[StateId] {
        &self.topo
    }

    pub fn include_start_label(&self) -> bool {
        self.include_start_label
    }

    /// Whether traces start with the label of `s₀`. Off by default.
    pub fn with_start_label(mut self, include: bool) -> Self {
        self.include_start_label = include;
        self
    }

    /// Position of `a` within `A(s)`.
    pub fn action_index(&self, s: StateId, a: ActionId) -> Option<usize> {
        self.actions[s].iter().position(|&b| b == a)
    }

    /// Successor distribution by action position within `A(s)`.
    pub fn dist_at(&self, s: StateId, k: usize) -> &[(StateId, f64)] {
        &self.trans[s][k]
    }

    /// `P(· | s, a)`.
    pub fn transition_dist(&self, s: StateId, a: ActionId) -> Result<&[(StateId, f64)], MdpError> {
        if s >= self.n_states() {
            return Err(MdpError::UnknownState(s));
        }
        let k = self.action_index(s, a).ok_or(MdpError::UnknownAction { state: s, action: a })?;
        Ok(&self.trans[s][k])
    }

    /// `P(t | s, a)`, zero for unknown actions or unreachable targets.
    pub fn prob(&self, s: StateId, a: ActionId, t: StateId) -> f64 {
        match self.transition_dist(s, a) {
            Ok(d) => d.iter().find(|(u, _)| *u == t).map_or(0.0, |(_, p)| *p),
            Err(_) => 0.0,
        }
    }

    /// Checks a path against the model. Reports the first bad position in the
    /// alternating sequence `s₀ a₀ s₁ a₁ …` (states at even indices).
    pub fn validate_path(&self, p: &Path) -> Result<(), PathViolation> {
        let bad = |index, kind| Err(PathViolation { index, kind });
        if p.states[0] != self.start {
            return bad(0, ViolationKind::WrongStart);
        }
        for (i, &s) in p.states.iter().enumerate() {
            if s >= self.n_states() {
                return bad(2 * i, ViolationKind::UnknownState);
            }
            if s == self.sink && (i + 1 < p.states.len() || p.actions.len() > i) {
                return bad(2 * i, ViolationKind::SinkNotLast);
            }
        }
        for (i, &a) in p.actions.iter().enumerate() {
            let s = p.states[i];
            let Ok(dist) = self.transition_dist(s, a) else {
                return bad(2 * i + 1, ViolationKind::UnavailableAction);
            };
            if let Some(&t) = p.states.get(i + 1) {
                if !dist.iter().any(|&(u, q)| u == t && q > 0.0) {
                    return bad(2 * i + 2, ViolationKind::ZeroProbability);
                }
            }
        }
        Ok(())
    }

    /// Color sequence of a path: labels of `s₁, s₂, …` with the sink skipped.
    pub fn trace_of(&self, p: &Path) -> Word {
        let skip = usize::from(!self.include_start_label);
        p.states.iter().skip(skip).filter_map(|&s| self.labels[s]).collect()
    }

    /// Every complete path with at most `max_len` transitions. Refuses (rather
    /// than truncating) once more than `cap` paths are found.
    pub fn enumerate_complete_paths(&self, max_len: usize, cap: usize) -> Result<Vec<Path>, MdpError> {
        let mut out = Vec::new();
        if cap == 0 {
            return Err(MdpError::EnumerationCap { cap });
        }
        let mut stack = vec![Path::from_start(self.start)];
        while let Some(p) = stack.pop() {
            let s = p.last_state();
            if s == self.sink {
                if out.len() == cap {
                    return Err(MdpError::EnumerationCap { cap });
                }
                out.push(p);
                continue;
            }
            if p.len() == max_len {
                continue;
            }
            // reversed so that the output follows action/successor order
            for (k, &a) in self.actions[s].iter().enumerate().rev() {
                for &(t, _) in self.trans[s][k].iter().rev() {
                    let mut q = p.clone();
                    q.push(a, t);
                    stack.push(q);
                }
            }
        }
        Ok(out)
    }

    /// Product of transition probabilities along `p`, ignoring the policy.
    pub fn dynamics_prob(&self, p: &Path) -> f64 {
        p.actions
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| p.states.get(i + 1).map(|&t| self.prob(p.states[i], a, t)))
            .product()
    }
}

/// Alternating sequence `s₀ a₀ s₁ … ` starting at the start state.
///
/// A path normally ends in a state. Prefix-tree environment nodes are the one
/// place a path ends in an action; [`Path::ends_in_action`] tells them apart.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    states: Vec<StateId>,
    actions: Vec<ActionId>,
}

impl Path {
    pub fn from_start(s0: StateId) -> Self {
        Path { states: vec![s0], actions: Vec::new() }
    }

    /// Panics unless `states` is nonempty and `actions` has one fewer entry
    /// or the same number (trailing action).
    pub fn new(states: Vec<StateId>, actions: Vec<ActionId>) -> Self {
        assert!(!states.is_empty(), "a path starts at a state");
        assert!(
            actions.len() + 1 == states.len() || actions.len() == states.len(),
            "states and actions must alternate"
        );
        Path { states, actions }
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }

    /// Number of actions taken.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last_state(&self) -> StateId {
        *self.states.last().expect("nonempty")
    }

    pub fn ends_in_action(&self) -> bool {
        self.actions.len() == self.states.len()
    }

    pub fn pending_action(&self) -> Option<ActionId> {
        self.ends_in_action().then(|| *self.actions.last().expect("nonempty"))
    }

    pub fn is_complete(&self, m: &Mdp) -> bool {
        !self.ends_in_action() && self.last_state() == m.sink()
    }

    pub fn push(&mut self, a: ActionId, s: StateId) {
        assert!(!self.ends_in_action());
        self.actions.push(a);
        self.states.push(s);
    }

    pub fn push_action(&mut self, a: ActionId) {
        assert!(!self.ends_in_action());
        self.actions.push(a);
    }

    pub fn push_state(&mut self, s: StateId) {
        assert!(self.ends_in_action());
        self.states.push(s);
    }

    /// `(sᵢ, aᵢ, sᵢ₊₁)` triples; a trailing action is not included.
    pub fn steps(&self) -> impl Iterator<Item = (StateId, ActionId, StateId)> + '_ {
        self.actions.iter().zip(self.states.windows(2)).map(|(&a, w)| (w[0], a, w[1]))
    }

    /// True when `self` is a prefix of `other` in the alternating sequence.
    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.states.starts_with(&self.states) && other.actions.starts_with(&self.actions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    WrongStart,
    UnknownState,
    UnavailableAction,
    ZeroProbability,
    SinkNotLast,
}

/// First invariant violation of a path; `index` counts positions in the
/// alternating state/action sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("path violation at position {index}: {kind:?}")]
pub struct PathViolation {
    pub index: usize,
    pub kind: ViolationKind,
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Two-arm MDP: `s₀ -a→ g -a→ $`, `s₀ -b→ r -a→ $`, deterministic.
    /// Alphabet `{g, r, s}`; `s₀` is labeled `s`.
    pub fn two_arm() -> Mdp {
        two_arm_slip(0.0)
    }

    /// Two-arm MDP where action `a` lands on `r` with probability `slip`.
    pub fn two_arm_slip(slip: f64) -> Mdp {
        let alphabet = Alphabet::new(["g", "r", "s"]).unwrap();
        let mut b = MdpBuilder::new(alphabet, vec!["a".into(), "b".into()]);
        let s0 = b.add_state(2);
        let g = b.add_state(0);
        let r = b.add_state(1);
        let sink = b.sink();
        b.add_transition(s0, 0, &[(g, 1.0 - slip), (r, slip)]);
        b.add_transition(s0, 1, &[(r, 1.0)]);
        b.add_transition(g, 0, &[(sink, 1.0)]);
        b.add_transition(r, 0, &[(sink, 1.0)]);
        b.build(s0).unwrap()
    }
}
