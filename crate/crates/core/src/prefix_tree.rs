//! Demonstration prefix tree and the pivot surprisal.
//!
//! Every node is a prefix of some demonstration. Ego nodes end in a state,
//! env nodes end in an action. The off-tree moves of a node (its pivot moves)
//! are summarized by one number, the pivot value; the node values `V̂`, the
//! local policy on tree edges and the demonstration surprisal then follow
//! from the pivot values alone.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::mdp::{ActionId, Mdp, Path, PathViolation, StateId};
use crate::numeric::log_sum_exp;
use crate::planner::{initial_dfa_state, next_dfa_state, MaxEntPolicy};
use crate::task::{Dfa, DfaState};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Ego,
    Env,
}

/// Off-tree moves of a node.
#[derive(Debug, Clone, PartialEq)]
pub enum PivotMoves {
    /// `A_ρ`, in `A(s)` order.
    Actions(Vec<ActionId>),
    /// `S_ρ` with their transition probabilities, and `P(S_ρ | ρ)`.
    States { states: Vec<(StateId, f64)>, mass: f64 },
}

impl PivotMoves {
    pub fn is_empty(&self) -> bool {
        match self {
            PivotMoves::Actions(a) => a.is_empty(),
            PivotMoves::States { states, .. } => states.is_empty(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub prefix: Path,
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Demonstrations having this prefix; for non-root nodes the traversal
    /// count of the edge from the parent.
    pub count: usize,
    /// Demonstrations ending exactly here.
    pub ends: usize,
    pub moves: PivotMoves,
}

#[derive(Debug, Clone)]
pub struct PrefixTree {
    nodes: Vec<Node>,
    pivots: Vec<NodeId>,
    pivot_index: Vec<Option<usize>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Step {
    Action(ActionId),
    State(StateId),
}

impl PrefixTree {
    /// Builds the tree of a multiset of valid demonstrations. Node ids grow
    /// with depth along every branch, so parents precede children.
    pub fn build(demos: &[Path], m: &Mdp) -> Result<PrefixTree, PathViolation> {
        let root_prefix = Path::from_start(m.start());
        let mut nodes = vec![Node {
            prefix: root_prefix,
            kind: NodeKind::Ego,
            parent: None,
            children: Vec::new(),
            count: 0,
            ends: 0,
            moves: PivotMoves::Actions(Vec::new()),
        }];
        let mut index: HashMap<(NodeId, Step), NodeId> = HashMap::new();
        for d in demos {
            check_demo(m, d)?;
            nodes[0].count += 1;
            let mut cur = 0;
            let mut prefix = Path::from_start(m.start());
            for (i, &a) in d.actions().iter().enumerate() {
                prefix.push_action(a);
                cur = child(&mut nodes, &mut index, cur, Step::Action(a), &prefix);
                if let Some(&s) = d.states().get(i + 1) {
                    prefix.push_state(s);
                    cur = child(&mut nodes, &mut index, cur, Step::State(s), &prefix);
                }
            }
            nodes[cur].ends += 1;
        }
        for id in 0..nodes.len() {
            nodes[id].moves = off_tree_moves(m, &nodes, id);
        }
        let pivots: Vec<NodeId> = (0..nodes.len()).filter(|&i| !nodes[i].moves.is_empty()).collect();
        let mut pivot_index = vec![None; nodes.len()];
        for (k, &n) in pivots.iter().enumerate() {
            pivot_index[n] = Some(k);
        }
        Ok(PrefixTree { nodes, pivots, pivot_index })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Pivot-capable nodes (nonempty move set) in node order; position in
    /// this list is the coordinate of the node in a [`PivotValues`] vector.
    pub fn pivots(&self) -> &[NodeId] {
        &self.pivots
    }

    pub fn pivot_index(&self, id: NodeId) -> Option<usize> {
        self.pivot_index[id]
    }

    /// Longest prefix of `p` in the tree.
    pub fn pivot_of(&self, p: &Path) -> NodeId {
        let mut cur = 0;
        'walk: loop {
            for &c in &self.nodes[cur].children {
                if self.nodes[c].prefix.is_prefix_of(p) {
                    cur = c;
                    continue 'walk;
                }
            }
            return cur;
        }
    }

    /// DFA state of every node's prefix.
    pub fn dfa_states(&self, m: &Mdp, d: &Dfa) -> Vec<DfaState> {
        let mut qs = vec![initial_dfa_state(m, d); self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate().skip(1) {
            let parent = qs[n.parent.expect("non-root")];
            qs[id] = match n.kind {
                NodeKind::Ego => next_dfa_state(m, d, parent, n.prefix.last_state()),
                NodeKind::Env => parent,
            };
        }
        qs
    }
}

fn check_demo(m: &Mdp, d: &Path) -> Result<(), PathViolation> {
    let body = if d.ends_in_action() {
        Path::new(d.states().to_vec(), d.actions()[..d.len() - 1].to_vec())
    } else {
        d.clone()
    };
    m.validate_path(&body)?;
    if let Some(a) = d.pending_action() {
        if d.last_state() == m.sink() || m.action_index(d.last_state(), a).is_none() {
            return Err(PathViolation { index: 2 * d.len() - 1, kind: crate::mdp::ViolationKind::UnavailableAction });
        }
    }
    Ok(())
}

fn child(
    nodes: &mut Vec<Node>,
    index: &mut HashMap<(NodeId, Step), NodeId>,
    cur: NodeId,
    step: Step,
    prefix: &Path,
) -> NodeId {
    let id = *index.entry((cur, step)).or_insert_with(|| {
        let id = nodes.len();
        nodes.push(Node {
            prefix: prefix.clone(),
            kind: match step {
                Step::Action(_) => NodeKind::Env,
                Step::State(_) => NodeKind::Ego,
            },
            parent: Some(cur),
            children: Vec::new(),
            count: 0,
            ends: 0,
            moves: PivotMoves::Actions(Vec::new()),
        });
        nodes[cur].children.push(id);
        id
    });
    nodes[id].count += 1;
    id
}

fn off_tree_moves(m: &Mdp, nodes: &[Node], id: NodeId) -> PivotMoves {
    let n = &nodes[id];
    let s = n.prefix.last_state();
    match n.kind {
        NodeKind::Ego => {
            if s == m.sink() {
                return PivotMoves::Actions(Vec::new());
            }
            let used: Vec<ActionId> =
                n.children.iter().map(|&c| nodes[c].prefix.pending_action().expect("env child")).collect();
            PivotMoves::Actions(m.actions(s).iter().copied().filter(|a| !used.contains(a)).collect())
        }
        NodeKind::Env => {
            let a = n.prefix.pending_action().expect("env node");
            let used: Vec<StateId> = n.children.iter().map(|&c| nodes[c].prefix.last_state()).collect();
            let states: Vec<(StateId, f64)> = m
                .transition_dist(s, a)
                .expect("validated")
                .iter()
                .copied()
                .filter(|(t, p)| *p > 0.0 && !used.contains(t))
                .collect();
            let mass = states.iter().map(|(_, p)| p).sum();
            PivotMoves::States { states, mass }
        }
    }
}

/// The pivot value vector `𝕍` plus the constants of complete-demonstration
/// leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotValues {
    /// Indexed like [`PrefixTree::pivots`].
    pub values: Vec<f64>,
    /// `λ·[accepted]` at every node whose prefix ends in the sink.
    pub leaf_values: BTreeMap<NodeId, f64>,
}

impl PivotValues {
    pub fn with_values(&self, values: Vec<f64>) -> PivotValues {
        assert_eq!(values.len(), self.values.len());
        PivotValues { values, leaf_values: self.leaf_values.clone() }
    }
}

/// `𝕍^φ`: ego nodes aggregate their off-tree actions by LSE of Q, env nodes
/// take the expected value over off-tree successors with the dynamics
/// renormalized to `S_ρ`.
pub fn pivot_values_of_task(tree: &PrefixTree, pol: &MaxEntPolicy, m: &Mdp) -> PivotValues {
    let d = pol.dfa();
    let t = pol.table();
    let qs = tree.dfa_states(m, d);
    let values = tree
        .pivots()
        .iter()
        .map(|&id| {
            let n = tree.node(id);
            let s = n.prefix.last_state();
            let q = qs[id];
            match &n.moves {
                PivotMoves::Actions(acts) => {
                    log_sum_exp(acts.iter().map(|&a| t.q(s, q, m.action_index(s, a).expect("available action"))))
                }
                PivotMoves::States { states, mass } => {
                    states.iter().map(|&(u, p)| p * t.v(u, next_dfa_state(m, d, q, u))).sum::<f64>() / mass
                }
            }
        })
        .collect();
    let leaf_values = (0..tree.len())
        .filter(|&id| tree.node(id).kind == NodeKind::Ego && tree.node(id).prefix.last_state() == m.sink())
        .map(|id| (id, t.v(m.sink(), qs[id])))
        .collect();
    PivotValues { values, leaf_values }
}

/// `V̂`, bottom-up from the pivot values.
pub fn derived_values(tree: &PrefixTree, pv: &PivotValues, m: &Mdp) -> Vec<f64> {
    let mut vhat = vec![0.0; tree.len()];
    for id in (0..tree.len()).rev() {
        let n = tree.node(id);
        let pivot = tree.pivot_index(id).map(|k| pv.values[k]);
        vhat[id] = match n.kind {
            NodeKind::Ego => match pv.leaf_values.get(&id) {
                Some(&c) => c,
                None => log_sum_exp(n.children.iter().map(|&c| vhat[c]).chain(pivot)),
            },
            NodeKind::Env => {
                let (s, a) = (n.prefix.last_state(), n.prefix.pending_action().expect("env node"));
                let on_tree: f64 =
                    n.children.iter().map(|&c| m.prob(s, a, tree.node(c).prefix.last_state()) * vhat[c]).sum();
                let off = match (&n.moves, pivot) {
                    (PivotMoves::States { mass, .. }, Some(v)) => mass * v,
                    _ => 0.0,
                };
                on_tree + off
            }
        };
    }
    vhat
}

/// Probability of the edge from `child`'s parent to `child`.
pub fn edge_prob(tree: &PrefixTree, vhat: &[f64], m: &Mdp, child: NodeId) -> f64 {
    let n = tree.node(child);
    let parent = n.parent.expect("root has no incoming edge");
    let p = tree.node(parent);
    match p.kind {
        NodeKind::Ego => (vhat[child] - vhat[parent]).exp(),
        NodeKind::Env => m.prob(p.prefix.last_state(), p.prefix.pending_action().expect("env"), n.prefix.last_state()),
    }
}

/// `ĥ(𝕍) = −Σ #·ln Pr(edge)` over every tree edge.
pub fn pivot_surprisal(tree: &PrefixTree, pv: &PivotValues, m: &Mdp) -> f64 {
    let vhat = derived_values(tree, pv, m);
    (1..tree.len())
        .map(|c| {
            let count = tree.node(c).count as f64;
            match tree.node(tree.node(c).parent.expect("non-root")).kind {
                NodeKind::Ego => -count * (vhat[c] - vhat[tree.node(c).parent.expect("non-root")]),
                NodeKind::Env => -count * edge_prob(tree, &vhat, m, c).ln(),
            }
        })
        .sum()
}

/// `∂ĥ/∂𝕍ₖ = Σ_{ego edges (i,j)} #ᵢⱼ (pᵢₖ − pⱼₖ)` where `pₓₖ` is the tree
/// probability of reaching `k` from `x` and then leaving through `k`'s pivot
/// moves. Indexed like [`PrefixTree::pivots`].
pub fn surprisal_gradient(tree: &PrefixTree, pv: &PivotValues, m: &Mdp) -> Vec<f64> {
    let vhat = derived_values(tree, pv, m);
    tree.pivots()
        .iter()
        .enumerate()
        .map(|(k_idx, &k)| {
            let node = tree.node(k);
            let stay = match (&node.kind, &node.moves) {
                (NodeKind::Ego, _) => (pv.values[k_idx] - vhat[k]).exp(),
                (NodeKind::Env, PivotMoves::States { mass, .. }) => *mass,
                (NodeKind::Env, PivotMoves::Actions(_)) => unreachable!("env nodes carry state moves"),
            };
            // walk from k to the root; `reach` is Pr(x ⇝ k)
            let mut g = 0.0;
            let mut reach = 1.0;
            let mut below: Option<(NodeId, f64)> = None;
            let mut x = k;
            loop {
                let nx = tree.node(x);
                if nx.kind == NodeKind::Ego {
                    let p_xk = reach * stay;
                    for &j in &nx.children {
                        g += tree.node(j).count as f64 * p_xk;
                    }
                    if let Some((j, p_jk)) = below {
                        g -= tree.node(j).count as f64 * p_jk;
                    }
                }
                let Some(parent) = nx.parent else { break };
                below = Some((x, reach * stay));
                reach *= edge_prob(tree, &vhat, m, x);
                x = parent;
            }
            g
        })
        .collect()
}

/// Graphviz rendering of the tree annotated with `𝕍`, `V̂` and the gradient.
pub fn to_dot(tree: &PrefixTree, pv: &PivotValues, m: &Mdp) -> String {
    let vhat = derived_values(tree, pv, m);
    let grad = surprisal_gradient(tree, pv, m);
    let mut out = String::from("digraph prefix_tree {\n");
    for (id, n) in tree.nodes().iter().enumerate() {
        let shape = if n.kind == NodeKind::Ego { "circle" } else { "box" };
        let mut label = format!("{id}\\nV̂={:.4}", vhat[id]);
        if let Some(k) = tree.pivot_index(id) {
            let _ = write!(label, "\\n𝕍={:.4}\\n∂={:.4}", pv.values[k], grad[k]);
        }
        let _ = writeln!(out, "  n{id} [shape={shape}, label=\"{label}\"];");
        if let Some(p) = n.parent {
            let _ = writeln!(out, "  n{p} -> n{id} [label=\"{}\"];", n.count);
        }
    }
    out.push_str("}\n");
    out
}
