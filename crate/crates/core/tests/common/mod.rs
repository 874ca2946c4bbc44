//! Random instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use diss::mdp::{Color, GridSpec, GridWorld};
use diss::planner::{sample_rollout, MaxEntPolicy};
use diss::task::{Alphabet, Dfa, Symbol, Word};
use diss::{Mdp, Path};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_grid<R: Rng>(rng: &mut R, width: usize, height: usize, horizon: usize, slip: f64) -> GridWorld {
    let tiles = (0..height).map(|_| (0..width).map(|_| *Color::ALL.choose(rng).unwrap()).collect()).collect();
    let start_cell = (rng.gen_range(0..width), rng.gen_range(0..height));
    GridWorld::build(GridSpec { width, height, tiles, slip_prob: slip, start_cell, horizon }).unwrap()
}

pub fn random_dfa<R: Rng>(rng: &mut R, alphabet: &Alphabet, n: usize) -> Dfa {
    let delta = (0..n * alphabet.len()).map(|_| rng.gen_range(0..n)).collect();
    let accepting = rng.gen_range(0..1u64 << n);
    Dfa::new(alphabet.clone(), n, delta, accepting).unwrap()
}

/// Rollouts under a random task and rationality, each truncated to a random
/// prefix with probability `p_incomplete`.
pub fn random_demos<R: Rng>(rng: &mut R, m: &Mdp, k: usize, p_incomplete: f64) -> Vec<Path> {
    let n = rng.gen_range(1..=3);
    let d = random_dfa(rng, m.alphabet(), n);
    let lambda = rng.gen_range(0.0..4.0);
    let pol = MaxEntPolicy::new(m, &d, lambda).unwrap();
    (0..k)
        .map(|_| {
            let p = sample_rollout(&pol, m, rng, None, None).unwrap();
            if rng.gen_bool(p_incomplete) {
                truncate(&p, rng.gen_range(0..p.actions().len() * 2))
            } else {
                p
            }
        })
        .collect()
}

/// First `n_moves` moves of `p`, counting actions and successors alike.
pub fn truncate(p: &Path, n_moves: usize) -> Path {
    let n_states = n_moves / 2 + 1;
    let n_actions = n_moves.div_ceil(2);
    Path::new(p.states()[..n_states].to_vec(), p.actions()[..n_actions].to_vec())
}

/// `L(d) ∪ {w}` by a product with the trie of `w`.
pub fn union_with_word(d: &Dfa, w: &[Symbol]) -> Dfa {
    let k = d.alphabet().len();
    // trie positions 0..=len, then a dead position
    let dead = w.len() + 1;
    let n_t = w.len() + 2;
    let id = |q: usize, t: usize| q * n_t + t;
    let n = d.n_states() * n_t;
    let mut delta = vec![0; n * k];
    let mut accepting = 0u64;
    let mut table = vec![vec![0usize; k]; n];
    for q in 0..d.n_states() {
        for t in 0..n_t {
            for (a, slot) in table[id(q, t)].iter_mut().enumerate() {
                let nt = if t < w.len() && w[t] as usize == a { t + 1 } else { dead };
                *slot = id(d.step(q, a as Symbol), nt);
            }
            if d.is_accepting(q) || t == w.len() {
                accepting |= 1 << id(q, t);
            }
        }
    }
    for (s, row) in table.iter().enumerate() {
        for (a, &t) in row.iter().enumerate() {
            delta[s * k + a] = t;
        }
    }
    // the product may exceed the state cap; minimizing brings it back
    let raw = Dfa::new(d.alphabet().clone(), n, delta, accepting);
    raw.expect("product within the state cap").minimize()
}

fn lse(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Soft value of a path prefix ending in a state, by recursion over all its
/// completions. Knows nothing about the product construction.
pub fn brute_value(m: &Mdp, d: &Dfa, lambda: f64, p: &Path) -> f64 {
    let s = p.last_state();
    if s == m.sink() {
        return if d.accepts(&m.trace_of(p)).unwrap() { lambda } else { 0.0 };
    }
    let qs: Vec<f64> = m.actions(s).iter().map(|&a| brute_q(m, d, lambda, p, a)).collect();
    lse(&qs)
}

pub fn brute_q(m: &Mdp, d: &Dfa, lambda: f64, p: &Path, a: usize) -> f64 {
    let s = p.last_state();
    m.transition_dist(s, a)
        .unwrap()
        .iter()
        .map(|&(t, pr)| {
            let mut q = p.clone();
            q.push(a, t);
            pr * brute_value(m, d, lambda, &q)
        })
        .sum()
}

/// `Pr(ξ)` under the maximum causal entropy agent, from the recursion above.
/// A trailing action contributes its policy probability.
pub fn brute_path_prob(m: &Mdp, d: &Dfa, lambda: f64, xi: &Path) -> f64 {
    let mut pre = Path::from_start(xi.states()[0]);
    let mut prob = 1.0;
    for (s, a, t) in xi.steps() {
        prob *= (brute_q(m, d, lambda, &pre, a) - brute_value(m, d, lambda, &pre)).exp() * m.prob(s, a, t);
        pre.push(a, t);
    }
    if let Some(a) = xi.pending_action() {
        prob *= (brute_q(m, d, lambda, &pre, a) - brute_value(m, d, lambda, &pre)).exp();
    }
    prob
}

/// Every word over `alphabet` of length at most `max_len`.
pub fn all_words(k: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer =
            layer.iter().flat_map(|w: &Word| (0..k as Symbol).map(move |a| [w.as_slice(), &[a]].concat())).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Every DFA with exactly `n` states over `k` symbols, state 0 initial.
pub fn all_dfas(alphabet: &Alphabet, n: usize) -> impl Iterator<Item = Dfa> + '_ {
    let k = alphabet.len();
    let cells = n * k;
    let n_tables = n.pow(cells as u32);
    (0..n_tables).flat_map(move |mut code| {
        let mut delta = vec![0; cells];
        for slot in delta.iter_mut() {
            *slot = code % n;
            code /= n;
        }
        (0..1u64 << n).map(move |acc| Dfa::new(alphabet.clone(), n, delta.clone(), acc).unwrap())
    })
}
