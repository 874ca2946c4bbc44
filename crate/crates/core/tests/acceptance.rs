//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process fails when a deterministic criterion fails. The two end-to-end
//! search criteria (8 and 9) are stochastic and only fail the process when
//! `ACCEPTANCE_STRICT` is set.

mod common;

use std::fs;
use std::time::Instant;

use common::*;
use diss::cli::{cmd_run, ExperimentConfig, Preset};
use diss::identify::{enumerate_consistent, IdentifyQuery};
use diss::mdp::MdpBuilder;
use diss::planner::{calibrate_rationality, satisfaction_prob, Boundary, MaxEntPolicy, PlannerConfig};
use diss::prefix_tree::{pivot_surprisal, pivot_values_of_task, surprisal_gradient, PrefixTree};
use diss::presets;
use diss::search::{sa_accept, softmin_pick};
use diss::task::{Alphabet, Dfa, LabeledExample};
use diss::Mdp;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Random grid plus task whose complete paths number at most `cap`.
fn small_instance(rng: &mut ChaCha8Rng, slip: f64, cap: usize) -> (Mdp, Dfa, Vec<diss::Path>) {
    loop {
        let w = rng.gen_range(2..=3);
        let h = rng.gen_range(2..=3);
        let g = random_grid(rng, w, h, 2, slip);
        let n = rng.gen_range(2..=3);
        let d = random_dfa(rng, g.mdp.alphabet(), n);
        if let Ok(paths) = g.mdp.enumerate_complete_paths(64, cap) {
            return (g.mdp, d, paths);
        }
    }
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut worst_stoch: f64 = 0.0;
    for _ in 0..20 {
        let (m, d, paths) = small_instance(&mut rng, 0.0, 200);
        let lambda = rng.gen_range(0.0..6.0);
        let pol = MaxEntPolicy::new(&m, &d, lambda).unwrap();
        let weight = |p: &diss::Path| {
            let acc = d.accepts(&m.trace_of(p)).unwrap();
            (if acc { lambda } else { 0.0 }).exp() * m.dynamics_prob(p)
        };
        let z: f64 = paths.iter().map(weight).sum();
        for p in &paths {
            worst = worst.max((pol.path_log_prob(&m, p).exp() - weight(p) / z).abs());
        }
    }
    // with slip the closed form no longer holds; compare against the
    // prefix recursion instead
    for _ in 0..20 {
        let slip = rng.gen_range(0.05..0.5);
        let (m, d, paths) = small_instance(&mut rng, slip, 200);
        let lambda = rng.gen_range(0.0..6.0);
        let pol = MaxEntPolicy::new(&m, &d, lambda).unwrap();
        for p in &paths {
            worst_stoch = worst_stoch.max((pol.path_log_prob(&m, p).exp() - brute_path_prob(&m, &d, lambda, p)).abs());
        }
    }
    verdict(
        worst <= 1e-9 && worst_stoch <= 1e-9,
        format!("20 deterministic instances, max |Δp| {worst:.1e}; 20 slippery instances vs recursion, max |Δp| {worst_stoch:.1e}"),
    )
}

fn two_arm() -> (Mdp, Dfa) {
    let alphabet = Alphabet::new(["g", "r", "s"]).unwrap();
    let mut b = MdpBuilder::new(alphabet.clone(), vec!["a".into(), "b".into()]);
    let s0 = b.add_state(2);
    let g = b.add_state(0);
    let r = b.add_state(1);
    let sink = b.sink();
    b.add_transition(s0, 0, &[(g, 1.0)]);
    b.add_transition(s0, 1, &[(r, 1.0)]);
    b.add_transition(g, 0, &[(sink, 1.0)]);
    b.add_transition(r, 0, &[(sink, 1.0)]);
    let m = b.build(s0).unwrap();
    // accepts exactly ⟨g⟩
    let mut delta = vec![2; 9];
    delta[0] = 1;
    (m, Dfa::new(alphabet, 3, delta, 0b010).unwrap())
}

fn criterion_2() -> Verdict {
    let cfg = PlannerConfig::default();
    let (m, d) = two_arm();
    let c = calibrate_rationality(&m, &d, 0.75, &cfg).unwrap();
    let two_arm_err = (c.lambda - 3f64.ln()).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut hit, mut flagged, mut bad) = (0, 0, 0);
    while hit + flagged + bad < 20 {
        let slip = rng.gen_range(0.0..0.3);
        let g = random_grid(&mut rng, 3, 3, 4, slip);
        let n = rng.gen_range(2..=3);
        let d = random_dfa(&mut rng, g.mdp.alphabet(), n);
        // mostly targets inside the reachable range, some outside it
        let (lo, hi) = (satisfaction_prob(&g.mdp, &d, 0.0), satisfaction_prob(&g.mdp, &d, cfg.lambda_max));
        let p = if hi - lo > 1e-3 && rng.gen_bool(0.8) {
            lo + rng.gen_range(0.02..0.98) * (hi - lo)
        } else {
            rng.gen_range(0.05..0.95)
        };
        if !(p > 0.0 && p < 1.0) {
            continue;
        }
        let c = calibrate_rationality(&g.mdp, &d, p, &cfg).unwrap();
        let sat = satisfaction_prob(&g.mdp, &d, c.lambda);
        match c.boundary {
            None if (sat - p).abs() <= 1e-6 => hit += 1,
            Some(Boundary::Low) if c.lambda == 0.0 && sat > p => flagged += 1,
            Some(Boundary::High) if c.lambda == cfg.lambda_max && sat < p => flagged += 1,
            _ => bad += 1,
        }
    }
    verdict(
        two_arm_err <= 1e-6 && bad == 0,
        format!(
            "two-arm |λ − ln 3| {two_arm_err:.1e}; random: {hit} calibrated, {flagged} boundary-flagged, {bad} wrong"
        ),
    )
}

/// Grid, task, rationality and 1–3 demonstrations, some incomplete.
fn tree_instance(rng: &mut ChaCha8Rng) -> (Mdp, MaxEntPolicy, Vec<diss::Path>) {
    let slip = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.05..0.4) };
    let (w, h, horizon) = (rng.gen_range(2..=4), rng.gen_range(2..=4), rng.gen_range(3..=5));
    let g = random_grid(rng, w, h, horizon, slip);
    let n = rng.gen_range(1..=3);
    let d = random_dfa(rng, g.mdp.alphabet(), n);
    let lambda = rng.gen_range(0.0..5.0);
    let pol = MaxEntPolicy::new(&g.mdp, &d, lambda).unwrap();
    let k = rng.gen_range(1..=3);
    let demos = random_demos(rng, &g.mdp, k, 0.5);
    (g.mdp, pol, demos)
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    let mut incomplete = 0;
    for _ in 0..50 {
        let (m, pol, demos) = tree_instance(&mut rng);
        incomplete += demos.iter().filter(|p| !p.is_complete(&m)).count();
        let tree = PrefixTree::build(&demos, &m).unwrap();
        let pv = pivot_values_of_task(&tree, &pol, &m);
        let h: f64 = -demos.iter().map(|p| pol.path_log_prob(&m, p)).sum::<f64>();
        worst = worst.max((pivot_surprisal(&tree, &pv, &m) - h).abs());
    }
    verdict(worst <= 1e-9, format!("50 instances ({incomplete} incomplete demos), max |ĥ − h| {worst:.1e}"))
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let mut coords = 0;
    for _ in 0..50 {
        let (m, pol, demos) = tree_instance(&mut rng);
        let tree = PrefixTree::build(&demos, &m).unwrap();
        let base = pivot_values_of_task(&tree, &pol, &m);
        let mut points = vec![base.clone()];
        for _ in 0..10 {
            let v = base.values.iter().map(|x| x + rng.gen_range(-1.0..1.0)).collect();
            points.push(base.with_values(v));
        }
        for pv in &points {
            let grad = surprisal_gradient(&tree, pv, &m);
            for k in 0..pv.values.len() {
                let mut up = pv.values.clone();
                let mut dn = pv.values.clone();
                up[k] += eps;
                dn[k] -= eps;
                let fd = (pivot_surprisal(&tree, &pv.with_values(up), &m)
                    - pivot_surprisal(&tree, &pv.with_values(dn), &m))
                    / (2.0 * eps);
                // relative to the larger magnitude, floored where both
                // are at the level of finite-difference noise
                let rel = (grad[k] - fd).abs() / grad[k].abs().max(fd.abs()).max(1e-6);
                worst = worst.max(rel);
                coords += 1;
            }
        }
    }
    verdict(worst < 1e-4, format!("50 instances × 11 points, {coords} coordinates, max relative error {worst:.1e}"))
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (mut pairs, mut violations) = (0, 0);
    let mut smallest_gap = f64::INFINITY;
    while pairs < 100 {
        let (m, pol, demos) = tree_instance(&mut rng);
        let phi = pol.dfa().clone();
        let tree = PrefixTree::build(&demos, &m).unwrap();
        // witness: a complete path off the demonstrations, rejected by φ
        let xi = diss::planner::sample_rollout(&MaxEntPolicy::new(&m, &phi, 0.0).unwrap(), &m, &mut rng, None, None)
            .unwrap();
        let w = m.trace_of(&xi);
        if phi.accepts(&w).unwrap() || demos.contains(&xi) {
            continue;
        }
        let psi = union_with_word(&phi, &w);
        let Some(rho) = tree.pivot_index(tree.pivot_of(&xi)) else { continue };
        // both tasks share one rationality
        let lambda = rng.gen_range(0.1..5.0);
        let v_phi = pivot_values_of_task(&tree, &MaxEntPolicy::new(&m, &phi, lambda).unwrap(), &m);
        let v_psi = pivot_values_of_task(&tree, &MaxEntPolicy::new(&m, &psi, lambda).unwrap(), &m);
        let gap = v_psi.values[rho] - v_phi.values[rho];
        smallest_gap = smallest_gap.min(gap);
        if gap <= 0.0 {
            violations += 1;
        }
        pairs += 1;
    }
    verdict(violations == 0, format!("{pairs} pairs φ ⊊ ψ, {violations} violations, smallest gap {smallest_gap:.2e}"))
}

fn criterion_6() -> Verdict {
    let alphabet = Alphabet::new(["a", "b"]).unwrap();
    let words = all_words(2, 6);
    let small: Vec<Vec<Dfa>> = (1..=3).map(|n| all_dfas(&alphabet, n).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut violations, mut by_size) = (0, [0; 3]);
    for _ in 0..200 {
        let n = rng.gen_range(1..=3);
        let target = random_dfa(&mut rng, &alphabet, n);
        let n_words = rng.gen_range(1..=12);
        let xs: Vec<LabeledExample> = words
            .choose_multiple(&mut rng, n_words)
            .map(|w| LabeledExample::new(w.clone(), target.accepts(w).unwrap()))
            .collect();
        let consistent = |d: &Dfa| xs.iter().all(|x| d.accepts(&x.word).unwrap() == x.label);
        let min = (1..=3).find(|&n| small[n - 1].iter().any(consistent)).expect("the target is consistent");
        by_size[min - 1] += 1;
        let mut q = IdentifyQuery::new(alphabet.clone(), xs.iter(), diss::ReprClass::Monolithic);
        q.max_candidates = 1;
        let first = enumerate_consistent(&q).unwrap().dfas.into_iter().next();
        if first.map(|d| d.n_states()) != Some(min) {
            violations += 1;
        }
    }
    verdict(
        violations == 0,
        format!(
            "200 sets (minimal sizes 1/2/3: {}/{}/{}), {violations} violations",
            by_size[0], by_size[1], by_size[2]
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let n = 10_000;
    let temp = 0.37;
    let hits = (0..n).filter(|_| sa_accept(-temp * 2f64.ln(), temp, &mut rng)).count();
    let rate = hits as f64 / n as f64;
    let mut ok = (rate - 0.5).abs() <= 0.02;
    let mut worst_z: f64 = 0.0;
    for (energies, t) in
        [(vec![0.0, 9f64.ln() * 2.0], 2.0), (vec![1.0, 2.0, 3.0, f64::INFINITY], 1.0), (vec![5.0, 5.5, 4.0], 0.5)]
    {
        let w: Vec<f64> = energies.iter().map(|e| (-e / t).exp()).collect();
        let z: f64 = w.iter().sum();
        let mut counts = vec![0usize; energies.len()];
        for _ in 0..n {
            counts[softmin_pick(energies.iter().copied(), t, &mut rng).unwrap()] += 1;
        }
        for (c, wi) in counts.iter().zip(&w) {
            let p = wi / z;
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            let diff = (*c as f64 / n as f64 - p).abs();
            if sd == 0.0 {
                ok &= diff == 0.0;
            } else {
                worst_z = worst_z.max(diff / sd);
            }
        }
    }
    ok &= worst_z <= 3.0;
    verdict(ok, format!("acceptance rate at dU = −T ln 2: {rate:.4}; softmin frequencies max |z| {worst_z:.2}"))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

struct EndToEnd {
    c8: Verdict,
    c9: Verdict,
    c10: Verdict,
}

fn criteria_8_to_10() -> EndToEnd {
    let dir = tempfile::tempdir().unwrap();
    let mut exp = ExperimentConfig::preset(Preset::Monolithic).resolve(None).unwrap();
    exp.output = dir.path().join("low");
    let low = cmd_run(&exp).unwrap();
    let baseline = low.baseline.as_ref().expect("preset runs the baseline");
    let base_min = baseline.min_energy_curve()[baseline.records.len() - 1];
    let at40 = |t: &diss::search::RunTrace| {
        let c = t.min_energy_curve();
        c[39.min(c.len() - 1)]
    };
    let low_med = median(low.diss.iter().map(|(_, t)| at40(t)).collect());

    let mut flat = exp.clone();
    flat.output = dir.path().join("flat");
    flat.diss.sgs.beta = f64::INFINITY;
    flat.baseline_n = None;
    let flat_out = cmd_run(&flat).unwrap();
    let flat_med = median(flat_out.diss.iter().map(|(_, t)| at40(t)).collect());
    let per_seed: Vec<String> = low.diss.iter().map(|(s, t)| format!("{s}:{:.2}", at40(t))).collect();
    let c8 = verdict(
        low_med <= base_min && flat_med >= low_med,
        format!(
            "median min-energy at iteration 40: ln β = −5 {low_med:.2} [{}], β = ∞ {flat_med:.2}; enumeration after {} {base_min:.2}",
            per_seed.join(" "),
            baseline.records.len()
        ),
    );

    let g = presets::grid();
    let truth = presets::ground_truth();
    let diag: Vec<_> = presets::diagnostic_paths(&g).iter().map(|p| g.mdp.trace_of(p)).collect();
    let agree: Vec<bool> = low
        .diss
        .iter()
        .map(|(_, t)| {
            let best = t.best.as_ref().expect("some finite energy").0.dfa();
            diag.iter().all(|w| best.accepts(w).unwrap() == truth.accepts(w).unwrap())
        })
        .collect();
    let n_agree = agree.iter().filter(|a| **a).count();
    let c9 = verdict(n_agree >= 3, format!("{n_agree}/5 best DFAs agree with the ground truth on all 3 diagnostics"));

    let mut again = exp.clone();
    again.output = dir.path().join("again");
    again.baseline_n = None;
    cmd_run(&again).unwrap();
    let same = exp.seeds.iter().all(|s| {
        let a = fs::read(exp.output.join(format!("seed-{s}/trace.jsonl"))).unwrap();
        let b = fs::read(again.output.join(format!("seed-{s}/trace.jsonl"))).unwrap();
        a == b
    });
    let c10 = verdict(same, format!("{} seeds re-run, trace.jsonl bit-identical: {same}", exp.seeds.len()));
    EndToEnd { c8, c9, c10 }
}

fn main() {
    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    let mut failed = Vec::new();
    let mut report = |n: usize, v: Verdict, secs: f64, stochastic: bool| {
        println!("{} criterion {n}: {} ({secs:.1}s)", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass && (strict || !stochastic) {
            failed.push(n);
        }
    };
    let checks: [(usize, fn() -> Verdict); 7] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
    ];
    for (n, f) in checks {
        let t = Instant::now();
        let v = f();
        report(n, v, t.elapsed().as_secs_f64(), false);
    }
    let t = Instant::now();
    let e = criteria_8_to_10();
    let secs = t.elapsed().as_secs_f64();
    report(8, e.c8, secs, true);
    report(9, e.c9, secs, true);
    report(10, e.c10, secs, false);
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
