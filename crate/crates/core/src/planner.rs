//! Maximum-causal-entropy planning on the MDP×DFA product.
//!
//! Values live on product states `(s, q)`. Reaching the sink in DFA state `q`
//! is worth `λ·[q accepting]`; elsewhere `V = LSE_a Q` and `Q` is the expected
//! successor value. The policy is `π(a | s, q) = exp(Q − V)`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rand::Rng;
use thiserror::Error;

use crate::mdp::{ActionId, Mdp, Path, PathViolation, StateId};
use crate::numeric::{log_sum_exp, sample_index};
use crate::task::{Dfa, DfaState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlannerError {
    #[error("competency {0} must lie strictly between 0 and 1")]
    InvalidCompetency(f64),
    #[error("rationality {0} must be finite and nonnegative")]
    InvalidLambda(f64),
    #[error("MDP and DFA use different alphabets")]
    AlphabetMismatch,
    #[error("invalid prefix: {0}")]
    InvalidPrefix(#[from] PathViolation),
    #[error("forced move has zero probability")]
    ForcedMoveImpossible,
}

/// DFA state before any symbol is read: `δ(0, label(s₀))` when traces include
/// the start label, else 0.
pub fn initial_dfa_state(m: &Mdp, d: &Dfa) -> DfaState {
    match (m.include_start_label(), m.label(m.start())) {
        (true, Some(l)) => d.step(0, l),
        _ => 0,
    }
}

/// DFA state after entering `s` from DFA state `q`. The unlabeled sink leaves
/// `q` unchanged.
#[inline]
pub fn next_dfa_state(m: &Mdp, d: &Dfa, q: DfaState, s: StateId) -> DfaState {
    m.label(s).map_or(q, |l| d.step(q, l))
}

/// Dense soft value table indexed by `(mdp state, dfa state)`.
#[derive(Debug, Clone)]
pub struct ValueTable {
    lambda: f64,
    n_q: usize,
    v: Vec<f64>,
    /// Q-values by action position in `A(s)`; empty for the sink.
    q: Vec<Vec<f64>>,
}

impl ValueTable {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn v(&self, s: StateId, q: DfaState) -> f64 {
        self.v[s * self.n_q + q]
    }

    /// `Q((s, q), A(s)[k])`.
    pub fn q(&self, s: StateId, q: DfaState, k: usize) -> f64 {
        self.q[s * self.n_q + q][k]
    }

    pub fn q_values(&self, s: StateId, q: DfaState) -> &[f64] {
        &self.q[s * self.n_q + q]
    }

    /// Human-readable dump of every non-sink product state.
    pub fn dump(&self, m: &Mdp) -> String {
        let mut out = format!("lambda={}\n", self.lambda);
        for s in 0..m.n_states() {
            for q in 0..self.n_q {
                let _ = write!(out, "s={s} q={q} v={:.12}", self.v(s, q));
                if s != m.sink() {
                    for (k, &a) in m.actions(s).iter().enumerate() {
                        let _ = write!(out, " Q[{}]={:.12}", m.action_names()[a], self.q(s, q, k));
                    }
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Backward induction over the product in reverse topological order.
pub fn soft_values(m: &Mdp, d: &Dfa, lambda: f64) -> ValueTable {
    let n_q = d.n_states();
    let mut v = vec![0.0; m.n_states() * n_q];
    let mut qt = vec![Vec::new(); m.n_states() * n_q];
    let sink = m.sink();
    for q in 0..n_q {
        v[sink * n_q + q] = if d.is_accepting(q) { lambda } else { 0.0 };
    }
    for &s in m.topological_order().iter().rev() {
        for q in 0..n_q {
            let qs: Vec<f64> = (0..m.actions(s).len())
                .map(|k| m.dist_at(s, k).iter().map(|&(t, p)| p * v[t * n_q + next_dfa_state(m, d, q, t)]).sum())
                .collect();
            v[s * n_q + q] = log_sum_exp(qs.iter().copied());
            qt[s * n_q + q] = qs;
        }
    }
    ValueTable { lambda, n_q, v, q: qt }
}

/// Soft-optimal policy for one DFA at one rationality.
#[derive(Debug, Clone)]
pub struct MaxEntPolicy {
    dfa: Dfa,
    table: ValueTable,
    competency: Option<f64>,
}

impl MaxEntPolicy {
    pub fn new(m: &Mdp, d: &Dfa, lambda: f64) -> Result<MaxEntPolicy, PlannerError> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(PlannerError::InvalidLambda(lambda));
        }
        if m.alphabet() != d.alphabet() {
            return Err(PlannerError::AlphabetMismatch);
        }
        Ok(MaxEntPolicy { dfa: d.clone(), table: soft_values(m, d, lambda), competency: None })
    }

    /// Policy at the rationality calibrated to competency `p`.
    pub fn calibrated(
        m: &Mdp,
        d: &Dfa,
        p: f64,
        cfg: &PlannerConfig,
    ) -> Result<(MaxEntPolicy, Calibration), PlannerError> {
        let cal = calibrate_rationality(m, d, p, cfg)?;
        let mut pol = MaxEntPolicy::new(m, d, cal.lambda)?;
        pol.competency = Some(p);
        Ok((pol, cal))
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn table(&self) -> &ValueTable {
        &self.table
    }

    pub fn lambda(&self) -> f64 {
        self.table.lambda
    }

    /// Target competency the rationality was calibrated to, if any.
    pub fn competency(&self) -> Option<f64> {
        self.competency
    }

    /// `ln π(A(s)[k] | s, q)`.
    pub fn log_prob(&self, s: StateId, q: DfaState, k: usize) -> f64 {
        self.table.q(s, q, k) - self.table.v(s, q)
    }

    /// Action probabilities in `A(s)` order.
    pub fn action_probs(&self, s: StateId, q: DfaState) -> Vec<f64> {
        let v = self.table.v(s, q);
        self.table.q_values(s, q).iter().map(|x| (x - v).exp()).collect()
    }

    /// DFA state reached after the states of `p`.
    pub fn dfa_state_after(&self, m: &Mdp, p: &Path) -> DfaState {
        p.states()[1..].iter().fold(initial_dfa_state(m, &self.dfa), |q, &s| next_dfa_state(m, &self.dfa, q, s))
    }

    /// `ln Pr(p | π, M)`: policy and dynamics log-probabilities along `p`,
    /// including a trailing action. `-inf` for impossible steps.
    pub fn path_log_prob(&self, m: &Mdp, p: &Path) -> f64 {
        let mut q = initial_dfa_state(m, &self.dfa);
        let mut total = 0.0;
        for (i, &a) in p.actions().iter().enumerate() {
            let s = p.states()[i];
            let Some(k) = (s != m.sink()).then(|| m.action_index(s, a)).flatten() else {
                return f64::NEG_INFINITY;
            };
            total += self.log_prob(s, q, k);
            if let Some(&t) = p.states().get(i + 1) {
                total += m.prob(s, a, t).ln();
                q = next_dfa_state(m, &self.dfa, q, t);
            }
        }
        total
    }

    /// Probability that a rollout from `s₀` ends accepted.
    pub fn satisfaction_prob(&self, m: &Mdp) -> f64 {
        satisfaction_from_table(m, &self.dfa, &self.table)
    }
}

fn satisfaction_from_table(m: &Mdp, d: &Dfa, t: &ValueTable) -> f64 {
    let n_q = d.n_states();
    let mut mass = vec![0.0; m.n_states() * n_q];
    mass[m.start() * n_q + initial_dfa_state(m, d)] = 1.0;
    for &s in m.topological_order() {
        for q in 0..n_q {
            let w = mass[s * n_q + q];
            if w == 0.0 {
                continue;
            }
            let v = t.v(s, q);
            for (k, &qa) in t.q_values(s, q).iter().enumerate() {
                let pa = w * (qa - v).exp();
                for &(u, p) in m.dist_at(s, k) {
                    mass[u * n_q + next_dfa_state(m, d, q, u)] += pa * p;
                }
            }
        }
    }
    let sink = m.sink();
    (0..n_q).filter(|&q| d.is_accepting(q)).map(|q| mass[sink * n_q + q]).sum()
}

/// `Pr(ξ ∈ φ | π_λ, M)`.
pub fn satisfaction_prob(m: &Mdp, d: &Dfa, lambda: f64) -> f64 {
    satisfaction_from_table(m, d, &soft_values(m, d, lambda))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub lambda_max: f64,
    /// Required `|Pr_sat − p|` for a successful calibration.
    pub tol: f64,
    pub max_bisections: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { lambda_max: 100.0, tol: 1e-6, max_bisections: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Even λ = 0 satisfies more often than requested.
    Low,
    /// Even λ_max cannot reach the requested competency.
    High,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub lambda: f64,
    pub sat_prob: f64,
    /// Set when the target was out of reach and `lambda` is a boundary value.
    pub boundary: Option<Boundary>,
}

/// Bisection on `λ ∈ [0, λ_max]`; satisfaction probability is nondecreasing
/// in λ.
pub fn calibrate_rationality(m: &Mdp, d: &Dfa, p: f64, cfg: &PlannerConfig) -> Result<Calibration, PlannerError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(PlannerError::InvalidCompetency(p));
    }
    if m.alphabet() != d.alphabet() {
        return Err(PlannerError::AlphabetMismatch);
    }
    let lo_p = satisfaction_prob(m, d, 0.0);
    if lo_p >= p - cfg.tol {
        let boundary = (lo_p > p + cfg.tol).then_some(Boundary::Low);
        return Ok(Calibration { lambda: 0.0, sat_prob: lo_p, boundary });
    }
    let hi_p = satisfaction_prob(m, d, cfg.lambda_max);
    if hi_p <= p + cfg.tol {
        let boundary = (hi_p < p - cfg.tol).then_some(Boundary::High);
        return Ok(Calibration { lambda: cfg.lambda_max, sat_prob: hi_p, boundary });
    }
    let (mut lo, mut hi) = (0.0, cfg.lambda_max);
    let mut best = (cfg.lambda_max, hi_p);
    for _ in 0..cfg.max_bisections {
        let mid = 0.5 * (lo + hi);
        let pm = satisfaction_prob(m, d, mid);
        if (pm - p).abs() < (best.1 - p).abs() {
            best = (mid, pm);
        }
        if pm < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Ok(Calibration { lambda: best.0, sat_prob: best.1, boundary: None })
}

/// `−Σ ln Pr(ξᵢ | π, M)`; `+inf` when some demonstration is impossible.
pub fn demo_surprisal<'a, I>(pol: &MaxEntPolicy, m: &Mdp, demos: I) -> f64
where
    I: IntoIterator<Item = &'a Path>,
{
    -demos.into_iter().map(|p| pol.path_log_prob(m, p)).sum::<f64>()
}

/// First move taken when continuing a prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcedMove {
    /// Action at a prefix ending in a state.
    Action(ActionId),
    /// Successor at a prefix ending in an action.
    State(StateId),
}

/// Completes `prefix` (or starts at `s₀`) by alternating policy and
/// environment draws until the sink.
pub fn sample_rollout<R: Rng + ?Sized>(
    pol: &MaxEntPolicy,
    m: &Mdp,
    rng: &mut R,
    prefix: Option<&Path>,
    forced: Option<ForcedMove>,
) -> Result<Path, PlannerError> {
    let mut path = match prefix {
        Some(p) => {
            let complete_part = if p.ends_in_action() {
                Path::new(p.states().to_vec(), p.actions()[..p.len() - 1].to_vec())
            } else {
                p.clone()
            };
            m.validate_path(&complete_part)?;
            if let Some(a) = p.pending_action() {
                m.transition_dist(p.last_state(), a).map_err(|_| PlannerError::ForcedMoveImpossible)?;
            }
            p.clone()
        }
        None => Path::from_start(m.start()),
    };
    let mut q = pol.dfa_state_after(m, &path);
    let mut forced = forced;
    loop {
        if let Some(a) = path.pending_action() {
            let s = path.last_state();
            let dist = m.transition_dist(s, a).expect("checked above");
            let t = match forced.take() {
                Some(ForcedMove::State(t)) => {
                    if !dist.iter().any(|&(u, p)| u == t && p > 0.0) {
                        return Err(PlannerError::ForcedMoveImpossible);
                    }
                    t
                }
                Some(ForcedMove::Action(_)) => return Err(PlannerError::ForcedMoveImpossible),
                None => {
                    let w: Vec<f64> = dist.iter().map(|&(_, p)| p).collect();
                    dist[sample_index(&w, rng).expect("distribution has mass")].0
                }
            };
            path.push_state(t);
            q = next_dfa_state(m, pol.dfa(), q, t);
            continue;
        }
        let s = path.last_state();
        if s == m.sink() {
            if forced.is_some() {
                return Err(PlannerError::ForcedMoveImpossible);
            }
            return Ok(path);
        }
        let a = match forced.take() {
            Some(ForcedMove::Action(a)) => {
                m.action_index(s, a).ok_or(PlannerError::ForcedMoveImpossible)?;
                a
            }
            Some(ForcedMove::State(_)) => return Err(PlannerError::ForcedMoveImpossible),
            None => {
                let probs = pol.action_probs(s, q);
                m.actions(s)[sample_index(&probs, rng).expect("policy has mass")]
            }
        };
        path.push_action(a);
    }
}

/// How the competency used for calibration is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Competency {
    Fixed(f64),
    /// Fraction of complete demonstrations the task accepts, clamped to
    /// `[floor, 1 − floor]`. Falls back to `fallback` when some demonstration
    /// is incomplete.
    Empirical {
        fallback: f64,
        floor: f64,
    },
}

impl Competency {
    pub fn resolve(&self, m: &Mdp, d: &Dfa, demos: &[Path]) -> f64 {
        match *self {
            Competency::Fixed(p) => p,
            Competency::Empirical { fallback, floor } => {
                if demos.is_empty() || demos.iter().any(|p| !p.is_complete(m)) {
                    return fallback;
                }
                let hits = demos.iter().filter(|p| d.accepts(&m.trace_of(p)) == Ok(true)).count();
                (hits as f64 / demos.len() as f64).clamp(floor, 1.0 - floor)
            }
        }
    }
}

/// Calibrated policy and demonstration surprisal of one task.
#[derive(Debug, Clone)]
pub struct TaskEval {
    pub policy: MaxEntPolicy,
    pub calibration: Calibration,
    pub surprisal: f64,
}

/// Task surprisal with a thread-safe memo keyed by the (canonical) DFA.
#[derive(Debug)]
pub struct SurprisalModel {
    mdp: Arc<Mdp>,
    demos: Arc<Vec<Path>>,
    competency: Competency,
    cfg: PlannerConfig,
    cache: Mutex<HashMap<Dfa, Arc<TaskEval>>>,
}

impl SurprisalModel {
    pub fn new(mdp: Arc<Mdp>, demos: Arc<Vec<Path>>, competency: Competency, cfg: PlannerConfig) -> Self {
        SurprisalModel { mdp, demos, competency, cfg, cache: Mutex::new(HashMap::new()) }
    }

    pub fn mdp(&self) -> &Mdp {
        &self.mdp
    }

    pub fn demos(&self) -> &[Path] {
        &self.demos
    }

    /// Calibrate, plan, score. `d` should be canonical so equal languages
    /// share one entry.
    pub fn evaluate(&self, d: &Dfa) -> Result<Arc<TaskEval>, PlannerError> {
        if let Some(e) = self.cache.lock().expect("cache lock").get(d) {
            return Ok(Arc::clone(e));
        }
        let p = self.competency.resolve(&self.mdp, d, &self.demos);
        let (policy, calibration) = MaxEntPolicy::calibrated(&self.mdp, d, p, &self.cfg)?;
        let surprisal = demo_surprisal(&policy, &self.mdp, self.demos.iter());
        let eval = Arc::new(TaskEval { policy, calibration, surprisal });
        let mut cache = self.cache.lock().expect("cache lock");
        Ok(Arc::clone(cache.entry(d.clone()).or_insert(eval)))
    }

    pub fn task_surprisal(&self, d: &Dfa) -> Result<f64, PlannerError> {
        Ok(self.evaluate(d)?.surprisal)
    }

    /// Number of distinct DFAs planned so far.
    pub fn cache_len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

/// One-shot task surprisal without caching.
pub fn task_surprisal(m: &Mdp, d: &Dfa, demos: &[Path], p: f64, cfg: &PlannerConfig) -> Result<f64, PlannerError> {
    let (pol, _) = MaxEntPolicy::calibrated(m, d, p, cfg)?;
    Ok(demo_surprisal(&pol, m, demos.iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::{two_arm, two_arm_slip};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Accepts exactly the trace `⟨g⟩`.
    fn accept_g(m: &Mdp) -> Dfa {
        let a = m.alphabet().clone();
        let mut delta = vec![2; 3 * a.len()];
        delta[0] = 1;
        Dfa::new(a, 3, delta, 0b010).unwrap()
    }

    fn arm(k: usize) -> Path {
        Path::new(vec![1, 2 + k, 0], vec![k, 0])
    }

    #[test]
    fn two_arm_values() {
        let m = two_arm();
        let d = accept_g(&m);
        for lambda in [0.0, 0.5, 3.0_f64.ln(), 7.0] {
            let t = soft_values(&m, &d, lambda);
            assert_abs_diff_eq!(t.v(1, 0), (lambda.exp() + 1.0).ln(), epsilon = 1e-12);
        }
        let t = soft_values(&m, &d, 0.0);
        assert_abs_diff_eq!(t.v(1, 0), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn slip_expectation() {
        let m = two_arm_slip(0.1);
        let d = accept_g(&m);
        let lambda = 2.0;
        let t = soft_values(&m, &d, lambda);
        // g and r each have a single action, so their value is the terminal value
        assert_abs_diff_eq!(t.q(1, 0, 0), 0.9 * lambda + 0.1 * 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.q(1, 0, 1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn satisfaction_examples() {
        let m = two_arm();
        assert_abs_diff_eq!(satisfaction_prob(&m, &accept_g(&m), 3f64.ln()), 0.75, epsilon = 1e-12);
        let a = m.alphabet().clone();
        for lambda in [0.0, 1.0, 30.0] {
            assert_abs_diff_eq!(satisfaction_prob(&m, &Dfa::trivial(a.clone(), true), lambda), 1.0, epsilon = 1e-12);
            assert_eq!(satisfaction_prob(&m, &Dfa::trivial(a.clone(), false), lambda), 0.0);
        }
    }

    #[test]
    fn calibration_examples() {
        let m = two_arm();
        let d = accept_g(&m);
        let cfg = PlannerConfig::default();
        let c = calibrate_rationality(&m, &d, 0.75, &cfg).unwrap();
        assert!(c.boundary.is_none());
        assert_abs_diff_eq!(c.lambda, 3f64.ln(), epsilon = 1e-6);
        let low = calibrate_rationality(&m, &d, 0.3, &cfg).unwrap();
        assert_eq!((low.lambda, low.boundary), (0.0, Some(Boundary::Low)));
        let all = calibrate_rationality(&m, &Dfa::trivial(m.alphabet().clone(), true), 0.9, &cfg).unwrap();
        assert!(all.boundary.is_some());
        assert!(calibrate_rationality(&m, &d, 1.0, &cfg).is_err());
        assert!(calibrate_rationality(&m, &d, 0.0, &cfg).is_err());
    }

    #[test]
    fn surprisal_examples() {
        let m = two_arm();
        let d = accept_g(&m);
        let pol = MaxEntPolicy::new(&m, &d, 3f64.ln()).unwrap();
        let h = demo_surprisal(&pol, &m, [&arm(0)]);
        assert_abs_diff_eq!(h, -(0.75f64.ln()), epsilon = 1e-12);
        let h2 = demo_surprisal(&pol, &m, [&arm(0), &arm(0)]);
        assert_eq!(h2, 2.0 * h);
        // uniform policy: two decisions, the second forced
        let uni = MaxEntPolicy::new(&m, &d, 0.0).unwrap();
        assert_abs_diff_eq!(demo_surprisal(&uni, &m, [&arm(1)]), 2f64.ln(), epsilon = 1e-12);
        // prefix ending in an action counts the action only
        let pre = Path::new(vec![1], vec![0]);
        assert_abs_diff_eq!(demo_surprisal(&pol, &m, [&pre]), -(0.75f64.ln()), epsilon = 1e-12);
        let bad = Path::new(vec![1, 3, 0], vec![0, 0]);
        assert_eq!(demo_surprisal(&pol, &m, [&bad]), f64::INFINITY);
    }

    #[test]
    fn surprisal_model_memoizes() {
        let m = Arc::new(two_arm());
        let d = accept_g(&m);
        let model = SurprisalModel::new(
            Arc::clone(&m),
            Arc::new(vec![arm(0)]),
            Competency::Fixed(0.75),
            PlannerConfig::default(),
        );
        let h = model.task_surprisal(&d).unwrap();
        assert_abs_diff_eq!(h, -(0.75f64.ln()), epsilon = 1e-6);
        model.task_surprisal(&d).unwrap();
        assert_eq!(model.cache_len(), 1);
        let one_shot = task_surprisal(&m, &d, &[arm(0)], 0.75, &PlannerConfig::default()).unwrap();
        assert_eq!(one_shot, h);
    }

    #[test]
    fn empirical_competency() {
        let m = two_arm();
        let d = accept_g(&m);
        let c = Competency::Empirical { fallback: 0.9, floor: 1e-3 };
        assert_eq!(c.resolve(&m, &d, &[arm(0), arm(1)]), 0.5);
        assert_eq!(c.resolve(&m, &d, &[arm(0)]), 1.0 - 1e-3);
        assert_eq!(c.resolve(&m, &d, &[Path::new(vec![1, 2], vec![0])]), 0.9);
    }

    #[test]
    fn rollout_frequencies() {
        let m = two_arm();
        let d = accept_g(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sharp = MaxEntPolicy::new(&m, &d, 50.0).unwrap();
        let hits = (0..1000).filter(|_| sample_rollout(&sharp, &m, &mut rng, None, None).unwrap() == arm(0)).count();
        assert!(hits > 990);
        let flat = MaxEntPolicy::new(&m, &d, 0.0).unwrap();
        let hits = (0..1000).filter(|_| sample_rollout(&flat, &m, &mut rng, None, None).unwrap() == arm(0)).count();
        assert!((450..=550).contains(&hits), "{hits}");
        for _ in 0..50 {
            let p = sample_rollout(&sharp, &m, &mut rng, None, Some(ForcedMove::Action(1))).unwrap();
            assert_eq!(p, arm(1));
        }
    }

    #[test]
    fn rollout_from_prefixes() {
        let m = two_arm_slip(0.5);
        let d = accept_g(&m);
        let pol = MaxEntPolicy::new(&m, &d, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pre = Path::new(vec![1], vec![0]);
        let p = sample_rollout(&pol, &m, &mut rng, Some(&pre), Some(ForcedMove::State(3))).unwrap();
        assert_eq!(p, Path::new(vec![1, 3, 0], vec![0, 0]));
        assert!(pre.is_prefix_of(&p));
        assert_eq!(
            sample_rollout(&pol, &m, &mut rng, Some(&pre), Some(ForcedMove::State(0))),
            Err(PlannerError::ForcedMoveImpossible)
        );
        let done = arm(0);
        assert_eq!(sample_rollout(&pol, &m, &mut rng, Some(&done), None).unwrap(), done);
    }

    #[test]
    fn policy_rows_normalize_and_dump() {
        let m = two_arm_slip(0.2);
        let pol = MaxEntPolicy::new(&m, &accept_g(&m), 4.0).unwrap();
        for s in m.topological_order() {
            for q in 0..3 {
                assert_abs_diff_eq!(pol.action_probs(*s, q).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
        assert!(pol.table().dump(&m).starts_with("lambda=4"));
    }
}
