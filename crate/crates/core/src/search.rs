//! Simulated annealing over (example set, task) pairs, and the enumeration
//! baseline.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::identify::{enumerate_consistent, sample_candidate, IdentifyError, IdentifyQuery};
use crate::mdp::{Mdp, Path, PathViolation};
use crate::numeric::sample_index;
use crate::planner::{Competency, PlannerConfig, PlannerError, SurprisalModel};
use crate::prefix_tree::{pivot_values_of_task, surprisal_gradient, PrefixTree};
use crate::sgs::{sgs_sample, SgsConfig, SgsOutcome};
use crate::task::{ExampleSet, Hypothesis, LabeledExample, ReprClass, TaskSpec};

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error("invalid demonstration: {0}")]
    Demo(#[from] PathViolation),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Temperature of the softmin used at resets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResetTemp {
    /// Use the current annealing temperature.
    TrackCooling,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissConfig {
    /// Weight of the size term in the energy.
    pub theta: f64,
    pub sgs: SgsConfig,
    pub p_drop: f64,
    /// Reset period; `None` never resets.
    pub kappa: Option<usize>,
    pub t0: f64,
    pub gamma: f64,
    pub reset_temp: ResetTemp,
    pub max_iters: usize,
    pub competency: Competency,
    pub planner: PlannerConfig,
    pub max_candidates: usize,
    pub max_states: usize,
}

impl Default for DissConfig {
    fn default() -> Self {
        DissConfig {
            theta: 1.0 / 50.0,
            sgs: SgsConfig::default(),
            p_drop: 0.25,
            kappa: Some(15),
            t0: 10.0,
            gamma: 0.95,
            reset_temp: ResetTemp::TrackCooling,
            max_iters: 100,
            competency: Competency::Fixed(0.9),
            planner: PlannerConfig::default(),
            max_candidates: 20,
            max_states: 8,
        }
    }
}

impl DissConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.p_drop) {
            return bad("p_drop must lie in [0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) || !(self.t0 > 0.0) {
            return bad("cooling needs t0 > 0 and gamma in (0, 1)");
        }
        if !(self.sgs.beta > 0.0) {
            return bad("beta must be positive");
        }
        if self.kappa == Some(0) {
            return bad("kappa must be positive");
        }
        if let ResetTemp::Fixed(t) = self.reset_temp {
            if !(t > 0.0) {
                return bad("reset temperature must be positive");
            }
        }
        if self.max_candidates == 0 || self.max_states == 0 {
            return bad("max_candidates and max_states must be positive");
        }
        if let Competency::Fixed(p) = self.competency {
            if !(p > 0.0 && p < 1.0) {
                return bad("competency must lie in (0, 1)");
            }
        }
        Ok(())
    }

    pub fn temperature(&self, t: usize) -> f64 {
        self.t0 * self.gamma.powi(t as i32)
    }
}

/// Independent random streams derived from one seed.
#[derive(Debug, Clone)]
pub struct Streams {
    pub sgs: ChaCha8Rng,
    pub sa: ChaCha8Rng,
    pub identify: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Streams {
        let stream = |id: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(id);
            r
        };
        Streams { sgs: stream(1), sa: stream(2), identify: stream(3) }
    }
}

/// Everything fixed for one search: dynamics, demonstrations, class, tree
/// and the shared surprisal memo.
#[derive(Debug)]
pub struct Problem {
    pub mdp: Arc<Mdp>,
    pub demos: Arc<Vec<Path>>,
    pub repr: ReprClass,
    pub tree: PrefixTree,
    pub model: SurprisalModel,
}

impl Problem {
    pub fn new(
        mdp: Mdp,
        demos: Vec<Path>,
        repr: ReprClass,
        competency: Competency,
        planner: PlannerConfig,
    ) -> Result<Problem, SearchError> {
        let tree = PrefixTree::build(&demos, &mdp)?;
        let mdp = Arc::new(mdp);
        let demos = Arc::new(demos);
        let model = SurprisalModel::new(Arc::clone(&mdp), Arc::clone(&demos), competency, planner);
        Ok(Problem { mdp, demos, repr, tree, model })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyTerms {
    pub size_term: f64,
    pub surprisal: f64,
    pub total: f64,
    pub lambda: f64,
}

/// `U = θ·size + h`; `None` stands for the infinite energy of Bottom.
pub fn energy(h: &Hypothesis, problem: &Problem, theta: f64) -> Result<Option<EnergyTerms>, SearchError> {
    let Some(t) = h.task() else { return Ok(None) };
    let eval = problem.model.evaluate(t.dfa())?;
    let size_term = theta * t.size_nats();
    Ok(Some(EnergyTerms {
        size_term,
        surprisal: eval.surprisal,
        total: size_term + eval.surprisal,
        lambda: eval.calibration.lambda,
    }))
}

fn total(e: &Option<EnergyTerms>) -> f64 {
    e.map_or(f64::INFINITY, |e| e.total)
}

/// Metropolis rule with `dU = U(current) − U(proposal)`: improvements are
/// always taken, otherwise accept with probability `e^{dU/T}`.
pub fn sa_accept<R: Rng + ?Sized>(du: f64, temp: f64, rng: &mut R) -> bool {
    if du.is_nan() || du > 0.0 {
        return true;
    }
    if du == f64::NEG_INFINITY {
        return false;
    }
    rng.gen::<f64>() < (du / temp).exp()
}

#[derive(Debug, Clone)]
pub struct SaState {
    pub examples: ExampleSet,
    pub task: Hypothesis,
    pub energy: Option<EnergyTerms>,
}

impl SaState {
    pub fn initial() -> SaState {
        SaState { examples: ExampleSet::new(), task: Hypothesis::Bottom, energy: None }
    }

    pub fn energy(&self) -> f64 {
        total(&self.energy)
    }
}

#[derive(Debug, Clone)]
pub struct HistoryEntry {
    pub examples: ExampleSet,
    pub task: Hypothesis,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgsRecord {
    pub pivot: usize,
    pub gradient: f64,
    pub word: String,
    pub label: bool,
    pub rollouts: usize,
}

/// One line of `trace.jsonl`. Infinite energies are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub seed: u64,
    pub temperature: f64,
    /// Candidate DFA in exchange text; `null` for Bottom.
    pub candidate: Option<String>,
    pub n_states: Option<usize>,
    pub energy: Option<f64>,
    pub surprisal: Option<f64>,
    pub size_term: Option<f64>,
    pub lambda: Option<f64>,
    pub accepted: bool,
    pub reset: bool,
    /// Examples the candidate was identified from.
    pub n_examples: usize,
    pub sgs: Option<SgsRecord>,
    pub min_energy: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    pub records: Vec<IterRecord>,
    /// Lowest-energy task seen and its energy.
    pub best: Option<(TaskSpec, f64)>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl RunTrace {
    fn note(&mut self, h: &Hypothesis, e: f64) {
        if let Hypothesis::Task(t) = h {
            if self.best.as_ref().is_none_or(|(_, b)| e < *b) {
                self.best = Some((t.clone(), e));
            }
        }
    }

    pub fn min_energy(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.1)
    }

    /// Running minimum energy after each iteration.
    pub fn min_energy_curve(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.min_energy.unwrap_or(f64::INFINITY)).collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("iteration,min_energy\n");
        for (i, e) in self.min_energy_curve().iter().enumerate() {
            out.push_str(&format!("{i},{}\n", fmt_energy(*e)));
        }
        out
    }
}

pub fn fmt_energy(e: f64) -> String {
    if e.is_finite() {
        format!("{e:.12}")
    } else {
        "inf".to_string()
    }
}

fn query<'a>(problem: &Problem, xs: &'a ExampleSet, cfg: &DissConfig) -> IdentifyQuery<'a> {
    let mut q = IdentifyQuery::new(problem.mdp.alphabet().clone(), xs.iter(), problem.repr.clone());
    q.max_candidates = cfg.max_candidates;
    q.max_states = cfg.max_states;
    q
}

/// What one annealing step proposed.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub proposal: HistoryEntry,
    pub proposal_energy: Option<EnergyTerms>,
    pub sgs: Option<SgsRecord>,
    pub accepted: bool,
    /// Size of the example set the candidate was identified from.
    pub n_examples: usize,
}

/// Propose `φ′ ~ 𝓘(· | φ, 𝕏)`, extend `𝕏` with an SGS example for `φ′`,
/// drop examples, then accept or reject `(𝕏‴, φ′)`.
pub fn diss_step(
    state: &mut SaState,
    problem: &Problem,
    cfg: &DissConfig,
    temp: f64,
    rngs: &mut Streams,
) -> Result<StepReport, SearchError> {
    let candidate = sample_candidate(&query(problem, &state.examples, cfg), &state.task, &mut rngs.identify)?;
    let mut next = state.examples.clone();
    let mut sgs = None;
    if let Hypothesis::Task(t) = &candidate {
        if !problem.tree.pivots().is_empty() {
            let eval = problem.model.evaluate(t.dfa())?;
            let pv = pivot_values_of_task(&problem.tree, &eval.policy, &problem.mdp);
            let grad = surprisal_gradient(&problem.tree, &pv, &problem.mdp);
            let out = sgs_sample(
                t,
                &eval.policy,
                &grad,
                &state.examples,
                &problem.tree,
                &problem.mdp,
                &cfg.sgs,
                &mut rngs.sgs,
            )
            .expect("pivots exist and beta was validated");
            if let SgsOutcome::Sample(s) = out {
                sgs = Some(SgsRecord {
                    pivot: s.pivot,
                    gradient: s.gradient,
                    word: problem.mdp.alphabet().render(&s.example.word),
                    label: s.example.label,
                    rollouts: s.rollouts,
                });
                next.insert(s.example);
            }
        }
    }
    if cfg.p_drop > 0.0 {
        next.retain(|_| rngs.sa.gen::<f64>() >= cfg.p_drop);
    }
    let e = energy(&candidate, problem, cfg.theta)?;
    let du = state.energy() - total(&e);
    let accepted = sa_accept(du, temp, &mut rngs.sa);
    let n_examples = state.examples.len();
    let proposal = HistoryEntry { examples: next, task: candidate, energy: total(&e) };
    if accepted {
        *state = SaState { examples: proposal.examples.clone(), task: proposal.task.clone(), energy: e };
    }
    Ok(StepReport { proposal, proposal_energy: e, sgs, accepted, n_examples })
}

/// Draws a past proposal with probability `∝ exp(−U/T)` and restarts from its
/// example set with a freshly identified task. `None` when every past energy
/// is infinite.
pub fn maybe_reset(
    history: &[HistoryEntry],
    problem: &Problem,
    cfg: &DissConfig,
    temp: f64,
    rngs: &mut Streams,
) -> Result<Option<SaState>, SearchError> {
    let Some(i) = softmin_pick(history.iter().map(|h| h.energy), temp, &mut rngs.sa) else {
        return Ok(None);
    };
    let examples = history[i].examples.clone();
    let task = sample_candidate(&query(problem, &examples, cfg), &Hypothesis::Bottom, &mut rngs.identify)?;
    let energy = energy(&task, problem, cfg.theta)?;
    Ok(Some(SaState { examples, task, energy }))
}

/// Index drawn with weight `exp(−(Uᵢ − min U)/T)`; infinite energies never
/// win.
pub fn softmin_pick<R: Rng + ?Sized, I: IntoIterator<Item = f64>>(
    energies: I,
    temp: f64,
    rng: &mut R,
) -> Option<usize> {
    let us: Vec<f64> = energies.into_iter().collect();
    let lo = us.iter().copied().fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        return None;
    }
    let w: Vec<f64> = us.iter().map(|u| if u.is_finite() { (-(u - lo) / temp).exp() } else { 0.0 }).collect();
    sample_index(&w, rng)
}

/// The full annealing run from `(∅, ⊥)`.
pub fn run_diss(problem: &Problem, cfg: &DissConfig, seed: u64) -> Result<RunTrace, SearchError> {
    cfg.validate()?;
    let mut rngs = Streams::new(seed);
    let mut state = SaState::initial();
    let mut history: Vec<HistoryEntry> = Vec::new();
    let mut trace = RunTrace::default();
    for t in 0..cfg.max_iters {
        let temp = cfg.temperature(t);
        let step = diss_step(&mut state, problem, cfg, temp, &mut rngs)?;
        trace.note(&step.proposal.task, step.proposal.energy);
        let mut reset = false;
        history.push(step.proposal.clone());
        if cfg.kappa.is_some_and(|k| (t + 1) % k == 0) {
            let reset_t = match cfg.reset_temp {
                ResetTemp::TrackCooling => temp,
                ResetTemp::Fixed(x) => x,
            };
            if let Some(s) = maybe_reset(&history, problem, cfg, reset_t, &mut rngs)? {
                trace.note(&s.task, s.energy());
                state = s;
                reset = true;
            }
        }
        let e = step.proposal_energy;
        trace.records.push(IterRecord {
            iter: t,
            seed,
            temperature: temp,
            candidate: step.proposal.task.task().map(|t| t.dfa().to_text()),
            n_states: step.proposal.task.task().map(|t| t.dfa().n_states()),
            energy: e.map(|e| e.total),
            surprisal: e.map(|e| e.surprisal),
            size_term: e.map(|e| e.size_term),
            lambda: e.map(|e| e.lambda),
            accepted: step.accepted,
            reset,
            n_examples: step.n_examples,
            sgs: step.sgs,
            min_energy: finite(trace.min_energy()),
        });
    }
    Ok(trace)
}

/// Positives the baseline requires: traces of the complete demonstrations.
pub fn demo_positives(problem: &Problem) -> Vec<LabeledExample> {
    problem
        .demos
        .iter()
        .filter(|d| d.is_complete(&problem.mdp))
        .map(|d| LabeledExample::new(problem.mdp.trace_of(d), true))
        .collect()
}

/// The `n` smallest consistent DFAs accepting every complete demonstration,
/// evaluated in order of increasing size.
pub fn run_enumeration_baseline(
    problem: &Problem,
    cfg: &DissConfig,
    n: usize,
    seed: u64,
) -> Result<RunTrace, SearchError> {
    let xs: ExampleSet = demo_positives(problem).into_iter().collect();
    let mut q = IdentifyQuery::new(problem.mdp.alphabet().clone(), xs.iter(), problem.repr.clone());
    q.max_candidates = n;
    q.max_states = cfg.max_states;
    let mut tasks: Vec<TaskSpec> = enumerate_consistent(&q)?
        .dfas
        .into_iter()
        .map(|d| TaskSpec::new(d, problem.repr.clone()).expect("class checked during enumeration"))
        .collect();
    tasks.sort_by(|a, b| a.size_nats().total_cmp(&b.size_nats()));
    let mut trace = RunTrace::default();
    for (i, t) in tasks.into_iter().enumerate() {
        let h = Hypothesis::Task(t);
        let e = energy(&h, problem, cfg.theta)?;
        trace.note(&h, total(&e));
        let t = h.task().expect("task");
        trace.records.push(IterRecord {
            iter: i,
            seed,
            temperature: 0.0,
            candidate: Some(t.dfa().to_text()),
            n_states: Some(t.dfa().n_states()),
            energy: e.map(|e| e.total),
            surprisal: e.map(|e| e.surprisal),
            size_term: e.map(|e| e.size_term),
            lambda: e.map(|e| e.lambda),
            accepted: true,
            reset: false,
            n_examples: xs.len(),
            sgs: None,
            min_energy: finite(trace.min_energy()),
        });
    }
    Ok(trace)
}
