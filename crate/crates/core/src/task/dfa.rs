use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use super::TaskError;

/// Index of a symbol in an [`Alphabet`].
pub type Symbol = u8;
/// A trace over an alphabet.
pub type Word = Vec<Symbol>;

/// Ordered, named symbol set. Cheap to clone; compared by content.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Alphabet(Arc<[String]>);

impl Alphabet {
    /// Names must be distinct, nonempty and free of whitespace, `,`, `;`,
    /// `-` and `>` so they survive the DFA text format.
    pub fn new<I, S>(names: I) -> Result<Alphabet, TaskError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() || names.len() > Symbol::MAX as usize {
            return Err(TaskError::Parse("alphabet must have 1..=255 symbols".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains(|c: char| c.is_whitespace() || ",;->".contains(c)) {
                return Err(TaskError::Parse(format!("bad symbol name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(TaskError::Parse(format!("duplicate symbol `{n}`")));
            }
        }
        Ok(Alphabet(names.into()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.0[s as usize]
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        self.0.iter().position(|n| n == name).map(|i| i as Symbol)
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    /// Space separated symbol names.
    pub fn render(&self, w: &[Symbol]) -> String {
        w.iter().map(|&s| self.name(s)).collect::<Vec<_>>().join(" ")
    }

    /// Inverse of [`Alphabet::render`].
    pub fn parse_word(&self, text: &str) -> Result<Word, TaskError> {
        text.split_whitespace()
            .map(|t| self.symbol(t).ok_or_else(|| TaskError::Parse(format!("unknown symbol `{t}`"))))
            .collect()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

pub type DfaState = usize;

/// Complete DFA with start state 0. `delta` is row-major:
/// `delta[q * |Σ| + a]`. Bit `q` of `accepting` marks state `q`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dfa {
    alphabet: Alphabet,
    n: usize,
    delta: Vec<DfaState>,
    accepting: u64,
}

pub const MAX_DFA_STATES: usize = 64;

impl Dfa {
    pub fn new(alphabet: Alphabet, n: usize, delta: Vec<DfaState>, accepting: u64) -> Result<Dfa, TaskError> {
        if n == 0 {
            return Err(TaskError::EmptyDfa);
        }
        if n > MAX_DFA_STATES {
            return Err(TaskError::TooManyStates(n));
        }
        if delta.len() != n * alphabet.len() || delta.iter().any(|&q| q >= n) {
            return Err(TaskError::BadTransitions);
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Ok(Dfa { alphabet, n, delta, accepting: accepting & mask })
    }

    /// One-state DFA accepting everything (`accept = true`) or nothing.
    pub fn trivial(alphabet: Alphabet, accept: bool) -> Dfa {
        let k = alphabet.len();
        Dfa { alphabet, n: 1, delta: vec![0; k], accepting: u64::from(accept) }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn delta_table(&self) -> &[DfaState] {
        &self.delta
    }

    pub fn accepting_mask(&self) -> u64 {
        self.accepting
    }

    pub fn is_accepting(&self, q: DfaState) -> bool {
        self.accepting >> q & 1 == 1
    }

    #[inline]
    pub fn step(&self, q: DfaState, a: Symbol) -> DfaState {
        self.delta[q * self.alphabet.len() + a as usize]
    }

    /// Final state of the run from state 0.
    pub fn run(&self, w: &[Symbol]) -> Result<DfaState, TaskError> {
        w.iter().try_fold(0, |q, &a| {
            if (a as usize) < self.alphabet.len() {
                Ok(self.step(q, a))
            } else {
                Err(TaskError::ForeignSymbol(a))
            }
        })
    }

    pub fn accepts(&self, w: &[Symbol]) -> Result<bool, TaskError> {
        Ok(self.is_accepting(self.run(w)?))
    }

    /// Number of `(q, a)` with `δ(q, a) ≠ q`.
    pub fn non_stutter_edges(&self) -> usize {
        let k = self.alphabet.len();
        self.delta.iter().enumerate().filter(|&(i, &t)| t != i / k).count()
    }

    /// Non-self-loop transitions as `(q, a, q')` triples in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (DfaState, Symbol, DfaState)> + '_ {
        let k = self.alphabet.len();
        self.delta
            .iter()
            .enumerate()
            .filter(move |&(i, &t)| t != i / k)
            .map(move |(i, &t)| (i / k, (i % k) as Symbol, t))
    }

    /// States reachable from 0, numbered in breadth-first order over the
    /// ordered alphabet. Unreachable states are dropped, nothing is merged.
    pub fn canonicalize(&self) -> Dfa {
        let k = self.alphabet.len();
        let mut order = vec![usize::MAX; self.n];
        let mut seen = vec![0];
        order[0] = 0;
        let mut head = 0;
        while head < seen.len() {
            let q = seen[head];
            head += 1;
            for a in 0..k {
                let t = self.delta[q * k + a];
                if order[t] == usize::MAX {
                    order[t] = seen.len();
                    seen.push(t);
                }
            }
        }
        let n = seen.len();
        let mut delta = vec![0; n * k];
        let mut accepting = 0u64;
        for (new, &old) in seen.iter().enumerate() {
            for a in 0..k {
                delta[new * k + a] = order[self.delta[old * k + a]];
            }
            if self.is_accepting(old) {
                accepting |= 1 << new;
            }
        }
        Dfa { alphabet: self.alphabet.clone(), n, delta, accepting }
    }

    /// True when every state is reachable and the numbering is the
    /// breadth-first one produced by [`Dfa::canonicalize`].
    pub fn is_canonical(&self) -> bool {
        self.canonicalize() == *self
    }

    /// Language-equivalent minimal DFA in canonical numbering (Moore
    /// partition refinement on the reachable part).
    pub fn minimize(&self) -> Dfa {
        let d = self.canonicalize();
        let k = d.alphabet.len();
        let mut class: Vec<usize> = (0..d.n).map(|q| usize::from(d.is_accepting(q))).collect();
        let mut n_classes = class.iter().copied().max().unwrap_or(0) + 1;
        loop {
            let mut sigs: Vec<(Vec<usize>, DfaState)> = (0..d.n)
                .map(|q| {
                    let mut s = Vec::with_capacity(k + 1);
                    s.push(class[q]);
                    s.extend((0..k).map(|a| class[d.delta[q * k + a]]));
                    (s, q)
                })
                .collect();
            sigs.sort();
            let mut next = vec![0; d.n];
            let mut id = 0;
            for i in 0..sigs.len() {
                if i > 0 && sigs[i].0 != sigs[i - 1].0 {
                    id += 1;
                }
                next[sigs[i].1] = id;
            }
            let count = id + 1;
            class = next;
            if count == n_classes {
                break;
            }
            n_classes = count;
        }
        let mut delta = vec![0; n_classes * k];
        let mut accepting = 0u64;
        for q in 0..d.n {
            let c = class[q];
            for a in 0..k {
                delta[c * k + a] = class[d.delta[q * k + a]];
            }
            if d.is_accepting(q) {
                accepting |= 1 << c;
            }
        }
        // class ids follow sorted signatures, so re-root at the start class
        let start = class[0];
        let mut quotient = Dfa { alphabet: d.alphabet.clone(), n: n_classes, delta, accepting };
        if start != 0 {
            quotient = quotient.swap_states(0, start);
        }
        quotient.canonicalize()
    }

    fn swap_states(&self, a: DfaState, b: DfaState) -> Dfa {
        let k = self.alphabet.len();
        let perm = |q: DfaState| {
            if q == a {
                b
            } else if q == b {
                a
            } else {
                q
            }
        };
        let mut delta = vec![0; self.n * k];
        let mut accepting = 0u64;
        for q in 0..self.n {
            for s in 0..k {
                delta[perm(q) * k + s] = perm(self.delta[q * k + s]);
            }
            if self.is_accepting(q) {
                accepting |= 1 << perm(q);
            }
        }
        Dfa { alphabet: self.alphabet.clone(), n: self.n, delta, accepting }
    }

    pub fn is_minimal(&self) -> bool {
        self.minimize().n == self.n && self.canonicalize().n == self.n
    }

    /// A shortest word in `L(self) \ L(other)`, if any.
    pub fn difference_witness(&self, other: &Dfa) -> Result<Option<Word>, TaskError> {
        if self.alphabet != other.alphabet {
            return Err(TaskError::AlphabetMismatch);
        }
        let k = self.alphabet.len();
        let idx = |p: DfaState, q: DfaState| p * other.n + q;
        let mut parent: Vec<Option<(usize, Symbol)>> = vec![None; self.n * other.n];
        let mut seen = vec![false; self.n * other.n];
        let mut queue = VecDeque::from([(0, 0)]);
        seen[0] = true;
        while let Some((p, q)) = queue.pop_front() {
            if self.is_accepting(p) && !other.is_accepting(q) {
                let mut word = Vec::new();
                let mut cur = idx(p, q);
                while let Some((prev, a)) = parent[cur] {
                    word.push(a);
                    cur = prev;
                }
                word.reverse();
                return Ok(Some(word));
            }
            for a in 0..k {
                let (p2, q2) = (self.delta[p * k + a], other.delta[q * k + a]);
                let j = idx(p2, q2);
                if !seen[j] {
                    seen[j] = true;
                    parent[j] = Some((idx(p, q), a as Symbol));
                    queue.push_back((p2, q2));
                }
            }
        }
        Ok(None)
    }

    /// `L(self) ⊆ L(other)`.
    pub fn language_subset(&self, other: &Dfa) -> Result<bool, TaskError> {
        Ok(self.difference_witness(other)?.is_none())
    }

    pub fn equivalent(&self, other: &Dfa) -> Result<bool, TaskError> {
        Ok(self.language_subset(other)? && other.language_subset(self)?)
    }

    /// Ordering key used by identification: state count, then the row-major
    /// transition table, then the accepting mask.
    pub fn order_key(&self) -> (usize, &[DfaState], u64) {
        (self.n, &self.delta, self.accepting)
    }
}

impl fmt::Debug for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dfa({})", self.to_text())
    }
}
