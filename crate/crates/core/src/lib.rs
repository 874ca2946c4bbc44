//! Demonstration informed specification search.
//!
//! Infers a DFA task specification that explains a handful of expert
//! demonstrations in a stochastic, finite-horizon MDP. The search alternates
//! four pieces:
//!
//! * [`planner`]: maximum-causal-entropy soft value iteration on the MDP×DFA
//!   product, with the rationality calibrated to a target competency;
//! * [`prefix_tree`] and [`sgs`]: the demonstration prefix tree, pivot values,
//!   the pivot surprisal and its gradient, and the surprise guided sampler
//!   that conjectures mislabeled counterfactual paths;
//! * [`identify`]: exact DFA identification from labeled examples (SAT based,
//!   canonical order) and the description-length weighted candidate sampler;
//! * [`search`]: simulated annealing over (example set, task) pairs, plus the
//!   enumeration baseline.
//!
//! [`mdp`] and [`task`] hold the dynamics model and the automata; [`cli`]
//! wires everything to files and the `diss` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod identify;
pub mod mdp;
pub mod planner;
pub mod prefix_tree;
pub mod presets;
pub mod search;
pub mod sgs;
pub mod task;

mod numeric;

pub use mdp::{Mdp, Path};
pub use task::{Alphabet, Dfa, Hypothesis, LabeledExample, ReprClass, TaskSpec};
