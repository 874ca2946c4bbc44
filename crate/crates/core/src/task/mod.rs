//! DFA task specifications over a symbol alphabet.

mod dfa;
mod format;

pub use dfa::{Alphabet, Dfa, DfaState, Symbol, Word, MAX_DFA_STATES};

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::mdp::{Mdp, Path};
use crate::numeric::ceil_log2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("symbol {0} is not in the alphabet")]
    ForeignSymbol(Symbol),
    #[error("a DFA needs at least one state")]
    EmptyDfa,
    #[error("{0} states exceed the supported maximum of {MAX_DFA_STATES}")]
    TooManyStates(usize),
    #[error("transition table has the wrong shape or an out-of-range target")]
    BadTransitions,
    #[error("DFAs are over different alphabets")]
    AlphabetMismatch,
    #[error("membership is only defined for complete paths")]
    IncompletePath,
    #[error("task violates its representation class: {0}")]
    ReprViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Prior knowledge for the incremental class: tasks must accept every
/// mandatory positive and stay inside the reference language.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IncrementalPrior {
    pub reference: Dfa,
    pub mandatory_positives: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ReprClass {
    Monolithic,
    Incremental(Arc<IncrementalPrior>),
}

impl ReprClass {
    /// Minimizes the reference and checks that it accepts the mandatory
    /// positives.
    pub fn incremental(reference: Dfa, mandatory_positives: Vec<Word>) -> Result<ReprClass, TaskError> {
        let reference = reference.minimize();
        for w in &mandatory_positives {
            if !reference.accepts(w)? {
                return Err(TaskError::ReprViolation(format!(
                    "reference rejects mandatory positive `{}`",
                    reference.alphabet().render(w)
                )));
            }
        }
        Ok(ReprClass::Incremental(Arc::new(IncrementalPrior { reference, mandatory_positives })))
    }

    pub fn prior(&self) -> Option<&IncrementalPrior> {
        match self {
            ReprClass::Monolithic => None,
            ReprClass::Incremental(p) => Some(p),
        }
    }

    /// Checks `mandatory ⊆ L(d) ⊆ L(reference)`; always passes for the
    /// monolithic class.
    pub fn admits(&self, d: &Dfa) -> Result<(), TaskError> {
        let Some(p) = self.prior() else { return Ok(()) };
        if let Some(w) = d.difference_witness(&p.reference)? {
            return Err(TaskError::ReprViolation(format!(
                "accepts `{}` outside the reference language",
                d.alphabet().render(&w)
            )));
        }
        for w in &p.mandatory_positives {
            if !d.accepts(w)? {
                return Err(TaskError::ReprViolation(format!(
                    "rejects mandatory positive `{}`",
                    d.alphabet().render(w)
                )));
            }
        }
        Ok(())
    }
}

/// Description length in bits of a DFA under the stuttering encoding: state
/// count, accepting bits, start state, then every non-self-loop edge as
/// (source, symbol, target).
pub fn size_bits_raw(d: &Dfa) -> u64 {
    let n = d.n_states();
    let lg_n = ceil_log2(n) as u64;
    let lg_s = ceil_log2(d.alphabet().len()) as u64;
    ceil_log2(n + 1) as u64 + n as u64 + lg_n + d.non_stutter_edges() as u64 * (2 * lg_n + lg_s)
}

pub fn size_nats_raw(d: &Dfa) -> f64 {
    size_bits_raw(d) as f64 * std::f64::consts::LN_2
}

/// A minimal, canonically numbered DFA together with its class. Equality and
/// hashing go through the canonical form, so equal tasks denote equal
/// languages.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaskSpec {
    dfa: Dfa,
    repr: ReprClass,
}

impl TaskSpec {
    pub fn new(dfa: Dfa, repr: ReprClass) -> Result<TaskSpec, TaskError> {
        let dfa = dfa.minimize();
        if let Some(p) = repr.prior() {
            if p.reference.alphabet() != dfa.alphabet() {
                return Err(TaskError::AlphabetMismatch);
            }
        }
        repr.admits(&dfa)?;
        Ok(TaskSpec { dfa, repr })
    }

    pub fn monolithic(dfa: Dfa) -> TaskSpec {
        TaskSpec { dfa: dfa.minimize(), repr: ReprClass::Monolithic }
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn repr(&self) -> &ReprClass {
        &self.repr
    }

    /// Monolithic: the raw size. Incremental: raw size minus the reference's
    /// raw size, which may be negative.
    pub fn size_nats(&self) -> f64 {
        let own = size_nats_raw(&self.dfa);
        match self.repr.prior() {
            None => own,
            Some(p) => own - size_nats_raw(&p.reference),
        }
    }

    pub fn accepts(&self, w: &[Symbol]) -> Result<bool, TaskError> {
        self.dfa.accepts(w)
    }

    /// Membership of a complete path through its trace.
    pub fn path_in_task(&self, p: &Path, m: &Mdp) -> Result<bool, TaskError> {
        if !p.is_complete(m) {
            return Err(TaskError::IncompletePath);
        }
        self.dfa.accepts(&m.trace_of(p))
    }

    /// Every example agrees with the task. Class constraints already hold by
    /// construction.
    pub fn consistent<'a, I>(&self, xs: I) -> bool
    where
        I: IntoIterator<Item = &'a LabeledExample>,
    {
        xs.into_iter().all(|x| self.dfa.accepts(&x.word) == Ok(x.label))
    }
}

/// A task or the distinguished "no consistent task" value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    Bottom,
    Task(TaskSpec),
}

impl Hypothesis {
    pub fn task(&self) -> Option<&TaskSpec> {
        match self {
            Hypothesis::Bottom => None,
            Hypothesis::Task(t) => Some(t),
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Hypothesis::Bottom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledExample {
    pub word: Word,
    pub label: bool,
    pub provenance: Option<Path>,
}

impl LabeledExample {
    pub fn new(word: Word, label: bool) -> Self {
        LabeledExample { word, label, provenance: None }
    }

    pub fn with_path(word: Word, label: bool, path: Path) -> Self {
        LabeledExample { word, label, provenance: Some(path) }
    }
}

/// Conflict-free example set keyed by word, iterated in word order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExampleSet {
    map: BTreeMap<Word, LabeledExample>,
}

impl ExampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `x`, replacing any example with the same word. Returns the
    /// replaced example.
    pub fn insert(&mut self, x: LabeledExample) -> Option<LabeledExample> {
        self.map.insert(x.word.clone(), x)
    }

    pub fn get(&self, w: &[Symbol]) -> Option<&LabeledExample> {
        self.map.get(w)
    }

    pub fn label_of(&self, w: &[Symbol]) -> Option<bool> {
        self.map.get(w).map(|x| x.label)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabeledExample> {
        self.map.values()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&LabeledExample) -> bool) {
        self.map.retain(|_, x| keep(x));
    }

    pub fn positives(&self) -> impl Iterator<Item = &Word> {
        self.map.values().filter(|x| x.label).map(|x| &x.word)
    }

    pub fn negatives(&self) -> impl Iterator<Item = &Word> {
        self.map.values().filter(|x| !x.label).map(|x| &x.word)
    }
}

impl FromIterator<LabeledExample> for ExampleSet {
    fn from_iter<I: IntoIterator<Item = LabeledExample>>(iter: I) -> Self {
        let mut s = ExampleSet::new();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

impl<'a> IntoIterator for &'a ExampleSet {
    type Item = &'a LabeledExample;
    type IntoIter = std::collections::btree_map::Values<'a, Word, LabeledExample>;

    fn into_iter(self) -> Self::IntoIter {
        self.map.values()
    }
}
