//! Bundled gridworld fixtures and experiment presets.
//!
//! The map, demonstrations and automata live in `fixtures/` and are compiled
//! in, so presets run without any files on disk.

use crate::mdp::{parse_demos, parse_map, GridWorld, Path};
use crate::task::{Dfa, ReprClass};

pub const GRID_MAP: &str = include_str!("../fixtures/grid.map");
pub const MONOLITHIC_DEMOS: &str = include_str!("../fixtures/monolithic.demos");
pub const INCREMENTAL_DEMOS: &str = include_str!("../fixtures/incremental.demos");
pub const DIAGNOSTIC_DEMOS: &str = include_str!("../fixtures/diagnostics.demos");
pub const GROUND_TRUTH_DFA: &str = include_str!("../fixtures/ground_truth.dfa");
pub const REFERENCE_DFA: &str = include_str!("../fixtures/reference.dfa");
pub const MONOLITHIC_TOML: &str = include_str!("../fixtures/monolithic.toml");
pub const INCREMENTAL_TOML: &str = include_str!("../fixtures/incremental.toml");

/// Mandatory positives of the incremental preset, as space separated words.
pub const MANDATORY_POSITIVES: [&str; 2] = ["y", "y y"];

/// Looks up a bundled fixture by its file name.
pub fn fixture(name: &str) -> Option<&'static str> {
    Some(match name {
        "grid.map" => GRID_MAP,
        "monolithic.demos" => MONOLITHIC_DEMOS,
        "incremental.demos" => INCREMENTAL_DEMOS,
        "diagnostics.demos" => DIAGNOSTIC_DEMOS,
        "ground_truth.dfa" => GROUND_TRUTH_DFA,
        "reference.dfa" => REFERENCE_DFA,
        "monolithic.toml" => MONOLITHIC_TOML,
        "incremental.toml" => INCREMENTAL_TOML,
        _ => return None,
    })
}

pub fn grid() -> GridWorld {
    GridWorld::build(parse_map(GRID_MAP).expect("bundled map parses")).expect("bundled map builds")
}

fn demos(grid: &GridWorld, text: &str) -> Vec<Path> {
    let out = parse_demos(text, grid).expect("bundled demos parse");
    for p in &out {
        grid.mdp.validate_path(p).expect("bundled demos are feasible");
    }
    out
}

/// Green and blue complete demonstrations.
pub fn monolithic_demos(grid: &GridWorld) -> Vec<Path> {
    demos(grid, MONOLITHIC_DEMOS)
}

/// The single incomplete blue demonstration.
pub fn incremental_demos(grid: &GridWorld) -> Vec<Path> {
    demos(grid, INCREMENTAL_DEMOS)
}

/// Blue demonstration, blue-then-straight-to-yellow, and through-red paths.
pub fn diagnostic_paths(grid: &GridWorld) -> Vec<Path> {
    demos(grid, DIAGNOSTIC_DEMOS)
}

/// Labels the ground truth assigns to [`diagnostic_paths`].
pub const DIAGNOSTIC_LABELS: [bool; 3] = [true, false, false];

/// Reach yellow without touching red; after blue, brown must come before
/// yellow.
pub fn ground_truth() -> Dfa {
    Dfa::parse_text(GROUND_TRUTH_DFA).expect("bundled ground truth parses")
}

/// Reach yellow without touching red.
pub fn reference() -> Dfa {
    Dfa::parse_text(REFERENCE_DFA).expect("bundled reference parses")
}

pub fn incremental_class() -> ReprClass {
    let r = reference();
    let mps = MANDATORY_POSITIVES.iter().map(|w| r.alphabet().parse_word(w).expect("bundled word parses")).collect();
    ReprClass::incremental(r, mps).expect("reference accepts the mandatory positives")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load_and_validate() {
        let g = grid();
        assert_eq!((g.spec.width, g.spec.height, g.spec.horizon), (8, 8, 15));
        assert_eq!(monolithic_demos(&g).len(), 2);
        assert!(monolithic_demos(&g).iter().all(|p| p.is_complete(&g.mdp)));
        let inc = incremental_demos(&g);
        assert_eq!(inc.len(), 1);
        assert!(!inc[0].is_complete(&g.mdp));
        assert_eq!(diagnostic_paths(&g).len(), 3);
    }

    #[test]
    fn ground_truth_labels_demos_and_diagnostics() {
        let g = grid();
        let gt = ground_truth();
        for p in monolithic_demos(&g) {
            assert!(gt.accepts(&g.mdp.trace_of(&p)).unwrap());
        }
        for (p, want) in diagnostic_paths(&g).iter().zip(DIAGNOSTIC_LABELS) {
            assert_eq!(gt.accepts(&g.mdp.trace_of(p)).unwrap(), want);
        }
        assert!(gt.language_subset(&reference()).unwrap());
    }

    #[test]
    fn incremental_prior() {
        let c = incremental_class();
        assert!(c.admits(&ground_truth().minimize()).is_ok());
    }
}
