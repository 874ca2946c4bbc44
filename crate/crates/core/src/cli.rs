//! Experiment runner behind the `diss` binary.
//!
//! Configs are TOML. File references resolve against the config's directory,
//! then against the bundled fixtures. Every `*_text` key inlines a file, which
//! is how `run_meta.json` stays self-contained: it can be fed back through
//! `run --config` to repeat a seed.

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mdp::{parse_demos, parse_map, write_demo, GridWorld, Path};
use crate::planner::{Competency, PlannerConfig};
use crate::presets;
use crate::search::{fmt_energy, run_diss, run_enumeration_baseline, DissConfig, Problem, ResetTemp, RunTrace};
use crate::sgs::SgsConfig;
use crate::task::{Dfa, ReprClass};

#[derive(Debug, Parser)]
#[command(name = "diss", version, about = "Learn DFA task specifications from demonstrations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Monolithic,
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    None,
    Enum,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run DISS (and optionally the enumeration baseline) for every seed.
    Run {
        /// TOML config, or a `run_meta.json` from an earlier run.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Comma separated seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// SGS pivot temperature; `inf` samples pivots uniformly.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_enum)]
        baseline: Option<BaselineArg>,
        /// Candidates evaluated by the enumeration baseline.
        #[arg(long = "N", alias = "n")]
        n: Option<usize>,
    },
    /// Check demonstrations against a map and print their traces.
    Validate { map: PathBuf, demos: Vec<PathBuf> },
    /// Render a DFA exchange file as Graphviz DOT.
    ExportDot { dfa: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReprKind {
    Monolithic,
    Incremental,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumOrWord {
    Num(f64),
    Word(String),
}

/// The `[diss]` table. Missing keys take the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissSection {
    pub theta: Option<f64>,
    /// `ln β`; ignored when `beta` is set.
    pub ln_beta: Option<f64>,
    /// Number or `"inf"`.
    pub beta: Option<NumOrWord>,
    pub p_drop: Option<f64>,
    /// Reset period; 0 disables resets.
    pub kappa: Option<usize>,
    pub t0: Option<f64>,
    pub gamma: Option<f64>,
    /// Number or `"track_cooling"`.
    pub reset_temp: Option<NumOrWord>,
    pub max_iters: Option<usize>,
    /// Number or `"empirical"`.
    pub competency: Option<NumOrWord>,
    pub max_candidates: Option<usize>,
    pub max_states: Option<usize>,
    pub sgs_retry_limit: Option<usize>,
    pub sgs_pivot_draws: Option<usize>,
    pub paper_literal_softmax: Option<bool>,
    pub conditioned: Option<bool>,
    pub lambda_max: Option<f64>,
    pub calibration_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    /// `"enum"` or `"none"`.
    pub kind: String,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: Option<String>,
    pub map_text: Option<String>,
    #[serde(default)]
    pub demos: Vec<String>,
    pub demo_texts: Option<Vec<String>>,
    pub repr: ReprKind,
    pub reference: Option<String>,
    pub reference_text: Option<String>,
    #[serde(default)]
    pub mandatory_positives: Vec<String>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub output: Option<String>,
    #[serde(default)]
    pub diss: DissSection,
    pub baseline: Option<BaselineSection>,
}

/// A config with every file read and every parameter resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub map_text: String,
    pub demo_texts: Vec<String>,
    pub repr: ReprKind,
    pub reference_text: Option<String>,
    pub mandatory_positives: Vec<String>,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    pub diss: DissConfig,
    pub baseline_n: Option<usize>,
}

fn read_source(name: &str, base: Option<&FsPath>) -> Result<String> {
    let p = FsPath::new(name);
    let candidates: Vec<PathBuf> = match base {
        Some(b) if p.is_relative() => vec![b.join(p), p.to_path_buf()],
        _ => vec![p.to_path_buf()],
    };
    for c in &candidates {
        if c.is_file() {
            return fs::read_to_string(c).with_context(|| format!("reading {}", c.display()));
        }
    }
    presets::fixture(name).map(str::to_string).ok_or_else(|| anyhow!("file `{name}` not found"))
}

fn num_or(v: &Option<NumOrWord>, word: &str, default: f64, key: &str) -> Result<Option<f64>> {
    match v {
        None => Ok(Some(default)),
        Some(NumOrWord::Num(x)) => Ok(Some(*x)),
        Some(NumOrWord::Word(w)) if w == word => Ok(None),
        Some(NumOrWord::Word(w)) => bail!("`{key}` must be a number or \"{word}\", got \"{w}\""),
    }
}

impl DissSection {
    pub fn resolve(&self) -> Result<DissConfig> {
        let d = DissConfig::default();
        let beta = match (&self.beta, self.ln_beta) {
            (Some(b), _) => num_or(&Some(b.clone()), "inf", 0.0, "beta")?.unwrap_or(f64::INFINITY),
            (None, Some(l)) => l.exp(),
            (None, None) => d.sgs.beta,
        };
        let sgs = SgsConfig {
            beta,
            retry_limit: self.sgs_retry_limit.unwrap_or(d.sgs.retry_limit),
            pivot_draws: self.sgs_pivot_draws.unwrap_or(d.sgs.pivot_draws),
            paper_literal_softmax: self.paper_literal_softmax.unwrap_or(d.sgs.paper_literal_softmax),
            conditioned: self.conditioned.unwrap_or(d.sgs.conditioned),
        };
        let reset_temp = match num_or(&self.reset_temp, "track_cooling", 0.0, "reset_temp")? {
            _ if self.reset_temp.is_none() => d.reset_temp,
            Some(t) => ResetTemp::Fixed(t),
            None => ResetTemp::TrackCooling,
        };
        let competency = match num_or(&self.competency, "empirical", 0.9, "competency")? {
            Some(p) => Competency::Fixed(p),
            None => Competency::Empirical { fallback: 0.9, floor: 1e-3 },
        };
        let planner = PlannerConfig {
            lambda_max: self.lambda_max.unwrap_or(d.planner.lambda_max),
            tol: self.calibration_tol.unwrap_or(d.planner.tol),
            ..d.planner
        };
        let cfg = DissConfig {
            theta: self.theta.unwrap_or(d.theta),
            sgs,
            p_drop: self.p_drop.unwrap_or(d.p_drop),
            kappa: match self.kappa {
                Some(0) => None,
                Some(k) => Some(k),
                None => d.kappa,
            },
            t0: self.t0.unwrap_or(d.t0),
            gamma: self.gamma.unwrap_or(d.gamma),
            reset_temp,
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            competency,
            planner,
            max_candidates: self.max_candidates.unwrap_or(d.max_candidates),
            max_states: self.max_states.unwrap_or(d.max_states),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fully explicit section for `cfg`.
    pub fn from_config(cfg: &DissConfig) -> DissSection {
        let beta =
            if cfg.sgs.beta.is_infinite() { NumOrWord::Word("inf".into()) } else { NumOrWord::Num(cfg.sgs.beta) };
        DissSection {
            theta: Some(cfg.theta),
            ln_beta: None,
            beta: Some(beta),
            p_drop: Some(cfg.p_drop),
            kappa: Some(cfg.kappa.unwrap_or(0)),
            t0: Some(cfg.t0),
            gamma: Some(cfg.gamma),
            reset_temp: Some(match cfg.reset_temp {
                ResetTemp::TrackCooling => NumOrWord::Word("track_cooling".into()),
                ResetTemp::Fixed(t) => NumOrWord::Num(t),
            }),
            max_iters: Some(cfg.max_iters),
            competency: Some(match cfg.competency {
                Competency::Fixed(p) => NumOrWord::Num(p),
                Competency::Empirical { .. } => NumOrWord::Word("empirical".into()),
            }),
            max_candidates: Some(cfg.max_candidates),
            max_states: Some(cfg.max_states),
            sgs_retry_limit: Some(cfg.sgs.retry_limit),
            sgs_pivot_draws: Some(cfg.sgs.pivot_draws),
            paper_literal_softmax: Some(cfg.sgs.paper_literal_softmax),
            conditioned: Some(cfg.sgs.conditioned),
            lambda_max: Some(cfg.planner.lambda_max),
            calibration_tol: Some(cfg.planner.tol),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, json: bool) -> Result<ExperimentConfig> {
        if json {
            let v: serde_json::Value = serde_json::from_str(text).context("parsing JSON config")?;
            let cfg = v.get("config").cloned().unwrap_or(v);
            Ok(serde_json::from_value(cfg).context("invalid config")?)
        } else {
            Ok(toml::from_str(text).context("parsing TOML config")?)
        }
    }

    pub fn load(path: &FsPath) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, path.extension().is_some_and(|e| e == "json"))
    }

    pub fn preset(p: Preset) -> ExperimentConfig {
        let text = match p {
            Preset::Monolithic => presets::MONOLITHIC_TOML,
            Preset::Incremental => presets::INCREMENTAL_TOML,
        };
        Self::parse(text, false).expect("bundled preset parses")
    }

    /// Reads every referenced file; `base` is the config's directory.
    pub fn resolve(&self, base: Option<&FsPath>) -> Result<Experiment> {
        let map_text = match (&self.map_text, &self.map) {
            (Some(t), _) => t.clone(),
            (None, Some(m)) => read_source(m, base)?,
            (None, None) => bail!("config needs `map` or `map_text`"),
        };
        let demo_texts = match &self.demo_texts {
            Some(t) => t.clone(),
            None => self.demos.iter().map(|d| read_source(d, base)).collect::<Result<_>>()?,
        };
        let reference_text = match (&self.reference_text, &self.reference) {
            (Some(t), _) => Some(t.clone()),
            (None, Some(r)) => Some(read_source(r, base)?),
            (None, None) => None,
        };
        if self.repr == ReprKind::Incremental && reference_text.is_none() {
            bail!("the incremental class needs `reference`");
        }
        let baseline_n = match &self.baseline {
            None => None,
            Some(b) if b.kind == "none" => None,
            Some(b) if b.kind == "enum" => Some(b.n.unwrap_or(80)),
            Some(b) => bail!("unknown baseline kind `{}`", b.kind),
        };
        Ok(Experiment {
            map_text,
            demo_texts,
            repr: self.repr,
            reference_text,
            mandatory_positives: self.mandatory_positives.clone(),
            seeds: if self.seeds.is_empty() { vec![0] } else { self.seeds.clone() },
            output: PathBuf::from(self.output.clone().unwrap_or_else(|| "out".into())),
            diss: self.diss.resolve()?,
            baseline_n,
        })
    }
}

impl Experiment {
    pub fn grid(&self) -> Result<GridWorld> {
        Ok(GridWorld::build(parse_map(&self.map_text)?)?)
    }

    pub fn demos(&self, grid: &GridWorld) -> Result<Vec<Path>> {
        let mut out = Vec::new();
        for t in &self.demo_texts {
            out.extend(parse_demos(t, grid)?);
        }
        for (i, p) in out.iter().enumerate() {
            grid.mdp.validate_path(p).map_err(|e| anyhow!("demonstration {i}: {e}"))?;
        }
        Ok(out)
    }

    pub fn repr_class(&self) -> Result<ReprClass> {
        match self.repr {
            ReprKind::Monolithic => Ok(ReprClass::Monolithic),
            ReprKind::Incremental => {
                let r = Dfa::parse_text(self.reference_text.as_deref().expect("checked on resolve"))?;
                let mps =
                    self.mandatory_positives.iter().map(|w| r.alphabet().parse_word(w)).collect::<Result<_, _>>()?;
                Ok(ReprClass::incremental(r, mps)?)
            }
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        let grid = self.grid()?;
        let demos = self.demos(&grid)?;
        if demos.is_empty() {
            bail!("no demonstrations");
        }
        Ok(Problem::new(grid.mdp, demos, self.repr_class()?, self.diss.competency, self.diss.planner.clone())?)
    }

    /// Self-contained config for one seed.
    pub fn echo(&self, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            map: None,
            map_text: Some(self.map_text.clone()),
            demos: Vec::new(),
            demo_texts: Some(self.demo_texts.clone()),
            repr: self.repr,
            reference: None,
            reference_text: self.reference_text.clone(),
            mandatory_positives: self.mandatory_positives.clone(),
            seeds: vec![seed],
            output: Some(self.output.display().to_string()),
            diss: DissSection::from_config(&self.diss),
            baseline: Some(BaselineSection {
                kind: if self.baseline_n.is_some() { "enum".into() } else { "none".into() },
                n: self.baseline_n,
            }),
        }
    }
}

#[derive(Debug, Serialize)]
struct RunMeta<'a> {
    seed: u64,
    kind: &'a str,
    version: &'a str,
    min_energy: Option<f64>,
    config: ExperimentConfig,
}

fn write_run(dir: &FsPath, trace: &RunTrace, meta: &RunMeta<'_>) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("trace.jsonl"), trace.to_jsonl())?;
    fs::write(dir.join("summary.csv"), trace.summary_csv())?;
    if let Some((t, _)) = &trace.best {
        fs::write(dir.join("best_dfa.txt"), t.dfa().to_text() + "\n")?;
        fs::write(dir.join("best_dfa.dot"), t.dfa().to_dot())?;
    }
    fs::write(dir.join("run_meta.json"), serde_json::to_string_pretty(meta)? + "\n")?;
    Ok(())
}

/// Per-iteration median of the running minimum energy across runs.
pub fn median_curve(curves: &[Vec<f64>]) -> Vec<f64> {
    let len = curves.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mut col: Vec<f64> =
                curves.iter().map(|c| c.get(i).or(c.last()).copied().unwrap_or(f64::INFINITY)).collect();
            col.sort_by(f64::total_cmp);
            let n = col.len();
            if n % 2 == 1 {
                col[n / 2]
            } else {
                0.5 * (col[n / 2 - 1] + col[n / 2])
            }
        })
        .collect()
}

fn curve_csv(curve: &[f64]) -> String {
    let mut out = String::from("iteration,min_energy\n");
    for (i, e) in curve.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_energy(*e)));
    }
    out
}

/// Thread pool capped by `DISS_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("DISS_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow!("DISS_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("DISS_THREADS must be positive");
        }
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Outcome of [`cmd_run`]: per-seed DISS traces and the optional baseline.
#[derive(Debug)]
pub struct RunOutput {
    pub diss: Vec<(u64, RunTrace)>,
    pub baseline: Option<RunTrace>,
}

pub fn cmd_run(exp: &Experiment) -> Result<RunOutput> {
    let problem = Arc::new(exp.problem()?);
    let pool = thread_pool()?;
    let runs: Vec<(u64, RunTrace)> = pool.install(|| {
        exp.seeds.par_iter().map(|&s| run_diss(&problem, &exp.diss, s).map(|t| (s, t))).collect::<Result<_, _>>()
    })?;
    let version = env!("CARGO_PKG_VERSION");
    for (seed, trace) in &runs {
        let meta = RunMeta {
            seed: *seed,
            kind: "diss",
            version,
            min_energy: trace.best.as_ref().map(|b| b.1),
            config: exp.echo(*seed),
        };
        write_run(&exp.output.join(format!("seed-{seed}")), trace, &meta)?;
    }
    if runs.len() > 1 {
        let curves: Vec<Vec<f64>> = runs.iter().map(|(_, t)| t.min_energy_curve()).collect();
        fs::write(exp.output.join("median_summary.csv"), curve_csv(&median_curve(&curves)))?;
    }
    let baseline = match exp.baseline_n {
        Some(n) => {
            let seed = exp.seeds[0];
            let trace = run_enumeration_baseline(&problem, &exp.diss, n, seed)?;
            let meta = RunMeta {
                seed,
                kind: "enumeration",
                version,
                min_energy: trace.best.as_ref().map(|b| b.1),
                config: exp.echo(seed),
            };
            write_run(&exp.output.join("baseline"), &trace, &meta)?;
            Some(trace)
        }
        None => None,
    };
    Ok(RunOutput { diss: runs, baseline })
}

/// Report of [`cmd_validate`]; `Err` entries carry the violation text.
pub fn cmd_validate(map: &str, demos: &[String]) -> Result<Vec<Result<String, String>>> {
    let grid = GridWorld::build(parse_map(map)?)?;
    let mut out = Vec::new();
    for t in demos {
        for p in parse_demos(t, &grid)? {
            out.push(match grid.mdp.validate_path(&p) {
                Ok(()) => Ok(format!(
                    "{}{}\n  trace: {}",
                    write_demo(&grid, &p),
                    if p.is_complete(&grid.mdp) { "" } else { "  (incomplete)" },
                    grid.mdp.alphabet().render(&grid.mdp.trace_of(&p))
                )),
                Err(e) => Err(format!("{}\n  {e}", write_demo(&grid, &p))),
            });
        }
    }
    Ok(out)
}

pub fn cmd_export_dot(text: &str) -> Result<String> {
    Ok(Dfa::parse_text(text)?.to_dot())
}

pub fn main_with(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, preset, output, seeds, max_iters, beta, baseline, n } => {
            let (cfg, base) = match (config, preset) {
                (Some(p), _) => (ExperimentConfig::load(&p)?, p.parent().map(FsPath::to_path_buf)),
                (None, Some(p)) => (ExperimentConfig::preset(p), None),
                (None, None) => bail!("pass --config or --preset"),
            };
            let mut exp = cfg.resolve(base.as_deref())?;
            if let Some(o) = output {
                exp.output = o;
            }
            if let Some(s) = seeds {
                exp.seeds = s;
            }
            if let Some(m) = max_iters {
                exp.diss.max_iters = m;
            }
            if let Some(b) = beta {
                exp.diss.sgs.beta = b;
            }
            match baseline {
                Some(BaselineArg::None) => exp.baseline_n = None,
                Some(BaselineArg::Enum) => exp.baseline_n = Some(n.or(exp.baseline_n).unwrap_or(80)),
                None => {
                    if let (Some(n), Some(_)) = (n, exp.baseline_n) {
                        exp.baseline_n = Some(n);
                    }
                }
            }
            exp.diss.validate()?;
            let out = cmd_run(&exp)?;
            for (seed, t) in &out.diss {
                println!("seed {seed}: min energy {}", fmt_energy(t.min_energy()));
            }
            if let Some(b) = &out.baseline {
                println!("enumeration: min energy {}", fmt_energy(b.min_energy()));
            }
            println!("artifacts in {}", exp.output.display());
        }
        Command::Validate { map, demos } => {
            let map = fs::read_to_string(&map).with_context(|| format!("reading {}", map.display()))?;
            let texts = demos
                .iter()
                .map(|d| fs::read_to_string(d).with_context(|| format!("reading {}", d.display())))
                .collect::<Result<Vec<_>>>()?;
            let report = cmd_validate(&map, &texts)?;
            if report.is_empty() {
                eprintln!("warning: no demonstrations found");
            }
            let mut bad = 0;
            for (i, r) in report.iter().enumerate() {
                match r {
                    Ok(s) => println!("[{i}] ok {s}"),
                    Err(s) => {
                        bad += 1;
                        println!("[{i}] INVALID {s}");
                    }
                }
            }
            if bad > 0 {
                bail!("{bad} invalid demonstration(s)");
            }
        }
        Command::ExportDot { dfa } => {
            let text = fs::read_to_string(&dfa).with_context(|| format!("reading {}", dfa.display()))?;
            print!("{}", cmd_export_dot(&text)?);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for p in [Preset::Monolithic, Preset::Incremental] {
            let exp = ExperimentConfig::preset(p).resolve(None).unwrap();
            assert_eq!(exp.seeds, vec![0, 1, 2, 3, 4]);
            assert_eq!(exp.diss, DissConfig::default());
            exp.problem().unwrap();
        }
        let inc = ExperimentConfig::preset(Preset::Incremental).resolve(None).unwrap();
        assert_eq!(inc.baseline_n, Some(40));
        assert!(matches!(inc.repr_class().unwrap(), ReprClass::Incremental(_)));
    }

    #[test]
    fn section_round_trip() {
        let cfg = DissConfig {
            sgs: SgsConfig { beta: f64::INFINITY, ..SgsConfig::default() },
            kappa: None,
            reset_temp: ResetTemp::Fixed(0.5),
            ..DissConfig::default()
        };
        assert_eq!(DissSection::from_config(&cfg).resolve().unwrap(), cfg);
        let text = toml::to_string(&DissSection::from_config(&cfg)).unwrap();
        let back: DissSection = toml::from_str(&text).unwrap();
        assert_eq!(back.resolve().unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        let s = DissSection { p_drop: Some(1.5), ..DissSection::default() };
        assert!(s.resolve().is_err());
        let s = DissSection { reset_temp: Some(NumOrWord::Word("hot".into())), ..DissSection::default() };
        assert!(s.resolve().is_err());
        assert!(ExperimentConfig::parse("repr = \"monolithic\"\nbogus = 1\n", false).is_err());
    }

    #[test]
    fn median_of_curves() {
        let c = median_curve(&[vec![3.0, 1.0], vec![5.0, 2.0], vec![f64::INFINITY, 4.0]]);
        assert_eq!(c, vec![5.0, 2.0]);
        assert_eq!(median_curve(&[vec![1.0], vec![3.0]]), vec![2.0]);
    }

    #[test]
    fn validate_reports_violations() {
        let ok = cmd_validate(presets::GRID_MAP, &[presets::MONOLITHIC_DEMOS.to_string()]).unwrap();
        assert!(ok.iter().all(Result::is_ok));
        // a teleporting second step
        let bad = cmd_validate(presets::GRID_MAP, &["5,1 L 4,1 L 0,0".to_string()]).unwrap();
        assert!(bad[0].as_ref().unwrap_err().contains("position 4"), "{bad:?}");
        assert!(cmd_validate(presets::GRID_MAP, &[String::new()]).unwrap().is_empty());
    }

    #[test]
    fn export_dot_accept_all() {
        let dot = cmd_export_dot("n=1; sigma=a,b; accept=1; edges=").unwrap();
        assert!(dot.contains("doublecircle"));
        assert!(!dot.contains("->"));
    }
}
