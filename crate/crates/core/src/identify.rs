//! Exact DFA identification from labeled examples.
//!
//! For each state count the examples are encoded as a SAT instance over the
//! augmented prefix tree acceptor (APTA) of the example words, with
//! breadth-first symmetry breaking so that every model is a canonically
//! numbered DFA. Transition tables are enumerated in row-major lexicographic
//! order by a depth-first search over solver assumptions; each table is then
//! completed with accepting masks in ascending order. Only minimal DFAs are
//! emitted, so the output lists distinct languages.

use std::collections::HashMap;

use rand::Rng;
use thiserror::Error;
use varisat::{ExtendFormula, Lit, Solver, Var};

use crate::numeric::{ceil_log2, sample_index};
use crate::task::{Alphabet, Dfa, Hypothesis, LabeledExample, ReprClass, Symbol, TaskSpec, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentifyError {
    #[error("examples label the same word both ways")]
    ConflictingExamples,
    #[error("example uses symbol {0} outside the alphabet")]
    ForeignSymbol(Symbol),
}

#[derive(Debug, Clone)]
pub struct IdentifyQuery<'a> {
    pub alphabet: Alphabet,
    pub examples: Vec<&'a LabeledExample>,
    pub repr: ReprClass,
    pub max_candidates: usize,
    pub max_states: usize,
}

impl<'a> IdentifyQuery<'a> {
    pub fn new<I>(alphabet: Alphabet, examples: I, repr: ReprClass) -> Self
    where
        I: IntoIterator<Item = &'a LabeledExample>,
    {
        IdentifyQuery { alphabet, examples: examples.into_iter().collect(), repr, max_candidates: 20, max_states: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    /// Consistent minimal DFAs in canonical order.
    pub dfas: Vec<Dfa>,
    /// Set when `max_states` ran out before `max_candidates` were found.
    pub truncated: bool,
}

/// APTA of the example words plus the incremental class' mandatory
/// positives. Node 0 is the empty word.
struct Apta {
    children: Vec<Vec<(Symbol, usize)>>,
    label: Vec<Option<bool>>,
}

impl Apta {
    fn build(words: &[(Word, bool)], k: usize) -> Result<Apta, IdentifyError> {
        let mut children: Vec<Vec<(Symbol, usize)>> = vec![Vec::new()];
        let mut label = vec![None];
        let mut index: HashMap<(usize, Symbol), usize> = HashMap::new();
        for (w, l) in words {
            let mut v = 0;
            for &a in w {
                if a as usize >= k {
                    return Err(IdentifyError::ForeignSymbol(a));
                }
                v = *index.entry((v, a)).or_insert_with(|| {
                    children.push(Vec::new());
                    label.push(None);
                    let id = children.len() - 1;
                    children[v].push((a, id));
                    id
                });
            }
            match label[v] {
                Some(old) if old != *l => return Err(IdentifyError::ConflictingExamples),
                _ => label[v] = Some(*l),
            }
        }
        Ok(Apta { children, label })
    }
}

struct Encoding {
    solver: Solver<'static>,
    n: usize,
    k: usize,
    /// `y[(q·k + a)·n + q']`
    y: Vec<Var>,
}

impl Encoding {
    fn y(&self, pos: usize, t: usize) -> Var {
        self.y[pos * self.n + t]
    }

    fn new(apta: &Apta, n: usize, k: usize, repr: &ReprClass) -> Encoding {
        let mut solver = Solver::new();
        let fresh = |s: &mut Solver<'static>, count: usize| -> Vec<Var> { (0..count).map(|_| s.new_var()).collect() };
        let nv = apta.label.len();
        let x = fresh(&mut solver, nv * n);
        let y = fresh(&mut solver, n * k * n);
        let z = fresh(&mut solver, n);
        let xv = |v: usize, q: usize| x[v * n + q];
        let yv = |q: usize, a: usize, t: usize| y[(q * k + a) * n + t];

        // every APTA node has exactly one color; the root is state 0
        for v in 0..nv {
            solver.add_clause(&(0..n).map(|q| xv(v, q).positive()).collect::<Vec<_>>());
            for q in 0..n {
                for r in q + 1..n {
                    solver.add_clause(&[xv(v, q).negative(), xv(v, r).negative()]);
                }
            }
        }
        solver.add_clause(&[xv(0, 0).positive()]);
        // complete deterministic transitions
        for q in 0..n {
            for a in 0..k {
                solver.add_clause(&(0..n).map(|t| yv(q, a, t).positive()).collect::<Vec<_>>());
                for t in 0..n {
                    for u in t + 1..n {
                        solver.add_clause(&[yv(q, a, t).negative(), yv(q, a, u).negative()]);
                    }
                }
            }
        }
        // colors follow transitions, in both directions
        for v in 0..nv {
            for &(a, w) in &apta.children[v] {
                let a = a as usize;
                for q in 0..n {
                    for t in 0..n {
                        solver.add_clause(&[xv(v, q).negative(), yv(q, a, t).negative(), xv(w, t).positive()]);
                        solver.add_clause(&[xv(v, q).negative(), xv(w, t).negative(), yv(q, a, t).positive()]);
                    }
                }
            }
            if let Some(l) = apta.label[v] {
                for (q, zq) in z.iter().enumerate() {
                    solver.add_clause(&[xv(v, q).negative(), zq.lit(l)]);
                }
            }
        }
        add_bfs_symmetry_breaking(&mut solver, n, k, &yv);
        if let Some(prior) = repr.prior() {
            // w[q][r]: (q, r) reachable in the product with the reference
            let rd = &prior.reference;
            let nr = rd.n_states();
            let w = fresh(&mut solver, n * nr);
            let wv = |q: usize, r: usize| w[q * nr + r];
            solver.add_clause(&[wv(0, 0).positive()]);
            for (q, zq) in z.iter().enumerate() {
                for r in 0..nr {
                    if !rd.is_accepting(r) {
                        solver.add_clause(&[wv(q, r).negative(), zq.negative()]);
                    }
                    for a in 0..k {
                        let r2 = rd.step(r, a as Symbol);
                        for t in 0..n {
                            solver.add_clause(&[wv(q, r).negative(), yv(q, a, t).negative(), wv(t, r2).positive()]);
                        }
                    }
                }
            }
        }
        Encoding { solver, n, k, y }
    }

    fn table_from_model(&self, model: &[bool]) -> Vec<usize> {
        (0..self.n * self.k)
            .map(|pos| (0..self.n).find(|&t| model[self.y(pos, t).index()]).expect("exactly one target"))
            .collect()
    }

    fn solve(&mut self, assumptions: &[Lit]) -> Option<Vec<bool>> {
        self.solver.assume(assumptions);
        if !self.solver.solve().expect("solver without proof output cannot fail") {
            return None;
        }
        let lits = self.solver.model().expect("satisfiable");
        let mut model = vec![false; lits.iter().map(|l| l.index() + 1).max().unwrap_or(0)];
        for l in lits {
            model[l.index()] = l.is_positive();
        }
        Some(model)
    }
}

/// Breadth-first canonical numbering: every state `j > 0` has a parent, the
/// smallest state with an edge into `j`; parents are nondecreasing in `j`,
/// and siblings are ordered by the smallest symbol on their parent edge.
fn add_bfs_symmetry_breaking(
    solver: &mut Solver<'static>,
    n: usize,
    k: usize,
    yv: &impl Fn(usize, usize, usize) -> Var,
) {
    if n < 2 {
        return;
    }
    let mut t = HashMap::new();
    let mut p = HashMap::new();
    let mut mm = HashMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let tv = solver.new_var();
            // t ⇔ ∨ₐ y[i][a][j]
            let mut big = vec![tv.negative()];
            for a in 0..k {
                solver.add_clause(&[yv(i, a, j).negative(), tv.positive()]);
                big.push(yv(i, a, j).positive());
            }
            solver.add_clause(&big);
            t.insert((i, j), tv);
        }
    }
    for j in 1..n {
        let mut some_parent = Vec::new();
        for i in 0..j {
            let pv = solver.new_var();
            // p[j][i] ⇔ t[i][j] ∧ ¬t[k][j] for k < i
            let mut back = vec![pv.positive(), t[&(i, j)].negative()];
            solver.add_clause(&[pv.negative(), t[&(i, j)].positive()]);
            for kk in 0..i {
                solver.add_clause(&[pv.negative(), t[&(kk, j)].negative()]);
                back.push(t[&(kk, j)].positive());
            }
            solver.add_clause(&back);
            p.insert((j, i), pv);
            some_parent.push(pv.positive());
        }
        solver.add_clause(&some_parent);
    }
    for j in 1..n - 1 {
        for i in 0..j {
            for kk in 0..i {
                solver.add_clause(&[p[&(j, i)].negative(), p[&(j + 1, kk)].negative()]);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for a in 0..k {
                let mv = solver.new_var();
                // m[i][a][j] ⇔ y[i][a][j] ∧ ¬y[i][b][j] for b < a
                solver.add_clause(&[mv.negative(), yv(i, a, j).positive()]);
                let mut back = vec![mv.positive(), yv(i, a, j).negative()];
                for b in 0..a {
                    solver.add_clause(&[mv.negative(), yv(i, b, j).negative()]);
                    back.push(yv(i, b, j).positive());
                }
                solver.add_clause(&back);
                mm.insert((i, a, j), mv);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n - 1 {
            for a in 0..k {
                for b in 0..a {
                    solver.add_clause(&[
                        p[&(j, i)].negative(),
                        p[&(j + 1, i)].negative(),
                        mm[&(i, a, j)].negative(),
                        mm[&(i, b, j + 1)].negative(),
                    ]);
                }
            }
        }
    }
}

fn labeled_words(q: &IdentifyQuery<'_>) -> Vec<(Word, bool)> {
    let mut words: Vec<(Word, bool)> = q.examples.iter().map(|x| (x.word.clone(), x.label)).collect();
    if let Some(prior) = q.repr.prior() {
        words.extend(prior.mandatory_positives.iter().map(|w| (w.clone(), true)));
    }
    words
}

/// The first `max_candidates` minimal DFAs consistent with the examples and
/// the class, ordered by state count, then transition table, then accepting
/// mask.
pub fn enumerate_consistent(q: &IdentifyQuery<'_>) -> Result<Enumeration, IdentifyError> {
    let k = q.alphabet.len();
    let words = labeled_words(q);
    let apta = Apta::build(&words, k)?;
    let mut out = Vec::new();
    for n in 1..=q.max_states {
        if out.len() >= q.max_candidates {
            break;
        }
        let mut enc = Encoding::new(&apta, n, k, &q.repr);
        let Some(model) = enc.solve(&[]) else { continue };
        let mut ctx = Dfs { q, words: &words, out: &mut out, assumptions: Vec::new() };
        ctx.descend(&mut enc, 0, model);
    }
    let truncated = out.len() < q.max_candidates;
    Ok(Enumeration { dfas: out, truncated })
}

struct Dfs<'q, 'a> {
    q: &'q IdentifyQuery<'a>,
    words: &'q [(Word, bool)],
    out: &'q mut Vec<Dfa>,
    assumptions: Vec<Lit>,
}

impl Dfs<'_, '_> {
    /// Positions `< pos` are fixed by `assumptions`; `model` satisfies them.
    fn descend(&mut self, enc: &mut Encoding, pos: usize, model: Vec<bool>) {
        if self.out.len() >= self.q.max_candidates {
            return;
        }
        let table = enc.table_from_model(&model);
        if pos == enc.n * enc.k {
            self.emit_masks(enc.n, table);
            return;
        }
        for t in 0..enc.n {
            if self.out.len() >= self.q.max_candidates {
                return;
            }
            let lit = enc.y(pos, t).positive();
            self.assumptions.push(lit);
            let next = if table[pos] == t { Some(model.clone()) } else { enc.solve(&self.assumptions) };
            if let Some(m) = next {
                self.descend(enc, pos + 1, m);
            }
            self.assumptions.pop();
        }
    }

    fn emit_masks(&mut self, n: usize, table: Vec<usize>) {
        let alphabet = &self.q.alphabet;
        let probe = Dfa::new(alphabet.clone(), n, table.clone(), 0).expect("valid table");
        let (mut forced_on, mut forced_off) = (0u64, 0u64);
        for (w, l) in self.words {
            let s = probe.run(w).expect("alphabet checked");
            if *l {
                forced_on |= 1 << s;
            } else {
                forced_off |= 1 << s;
            }
        }
        if forced_on & forced_off != 0 {
            return;
        }
        let free: Vec<usize> = (0..n).filter(|&s| (forced_on | forced_off) >> s & 1 == 0).collect();
        // ascending masks: enumerate free-bit patterns and sort
        let mut masks: Vec<u64> = (0u64..1 << free.len())
            .map(|bits| {
                free.iter().enumerate().fold(forced_on, |m, (i, &s)| if bits >> i & 1 == 1 { m | 1 << s } else { m })
            })
            .collect();
        masks.sort_unstable();
        for mask in masks {
            if self.out.len() >= self.q.max_candidates {
                return;
            }
            let d = Dfa::new(alphabet.clone(), n, table.clone(), mask).expect("valid table");
            if d.minimize().n_states() != n || self.q.repr.admits(&d).is_err() {
                continue;
            }
            self.out.push(d);
        }
    }
}

/// Bits to describe `to` as an edit of `from`: state count change, one bit per
/// shared state whose acceptance flips, plus the symmetric difference of
/// non-self-loop edges.
pub fn edit_bits(from: &Dfa, to: &Dfa) -> u64 {
    let (n, n2) = (from.n_states(), to.n_states());
    let lg = ceil_log2(n.max(n2)) as u64;
    let edge_bits = 2 * lg + ceil_log2(to.alphabet().len()) as u64;
    let a: std::collections::BTreeSet<_> = from.edges().collect();
    let b: std::collections::BTreeSet<_> = to.edges().collect();
    let flips = (0..n.min(n2)).filter(|&q| from.is_accepting(q) != to.is_accepting(q)).count() as u64;
    n.abs_diff(n2) as u64 * lg + flips + a.symmetric_difference(&b).count() as u64 * edge_bits
}

/// Sampling weight of every candidate: `2^{−edit_bits}` against a task, or
/// `exp(−size)` against Bottom.
pub fn candidate_weights(candidates: &[TaskSpec], reference: &Hypothesis) -> Vec<f64> {
    match reference {
        Hypothesis::Bottom => candidates.iter().map(|c| (-c.size_nats()).exp()).collect(),
        Hypothesis::Task(r) => candidates.iter().map(|c| (-(edit_bits(r.dfa(), c.dfa()) as f64)).exp2()).collect(),
    }
}

/// `𝓘(· | reference, examples)`: enumerate, weight, draw one. Bottom when no
/// candidate exists.
pub fn sample_candidate<R: Rng + ?Sized>(
    q: &IdentifyQuery<'_>,
    reference: &Hypothesis,
    rng: &mut R,
) -> Result<Hypothesis, IdentifyError> {
    let found = match enumerate_consistent(q) {
        Ok(e) => e.dfas,
        Err(IdentifyError::ConflictingExamples) => return Ok(Hypothesis::Bottom),
        Err(e) => return Err(e),
    };
    let tasks: Vec<TaskSpec> = found
        .into_iter()
        .map(|d| TaskSpec::new(d, q.repr.clone()).expect("enumerated DFAs satisfy the class"))
        .collect();
    if tasks.is_empty() {
        return Ok(Hypothesis::Bottom);
    }
    let weights = candidate_weights(&tasks, reference);
    let i = sample_index(&weights, rng).unwrap_or(0);
    Ok(Hypothesis::Task(tasks.into_iter().nth(i).expect("index in range")))
}
