//! Command-line front end: argument parsing, run configuration and dispatch.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::decomposition::{choose_a, cz_decompose, verify_halving};
use crate::error::{Error, Result};
use crate::experiments::{
    fs_dual_check, necessity_check, ratio_harness, run_sharpness, stein_weiss_check, write_csv, write_json_lines,
    FsDualConfig, HarnessSpec, PairKind, PairSource, SharpnessConfig, SteinWeissConfig, WeightSpec,
};
use crate::exponent::{Exponent, ExponentProfile, TheoremId};
use crate::grid::{read_mgf, write_mgf, DyadicCube, Grid, GridFunction};
use crate::norms::{lebesgue_norm, morrey_norm, weak_quasinorm, CubeFamily, DEFAULT_ALIGNED_BUDGET};
use crate::operators::{
    b_alpha, b_alpha_dyadic, i_alpha, m_alpha_bilinear, m_alpha_vector, m_tilde, m_triple_dyadic, KernelSpec,
    SingularRule,
};
use crate::selftest::run_selftest;
use crate::weights::{
    ap_characteristic, CharParams, Characteristic, PowerDescriptor, Variant, WeightSystem, DEFAULT_PAIR_BUDGET,
};

pub const THREADS_ENV: &str = "MORREY_THREADS";

#[derive(Parser, Debug)]
#[command(name = "morrey", version, about = "Bilinear fractional integrals and Morrey norms on dyadic grids")]
struct Cli {
    /// Run a saved configuration (canonical JSON) instead of a subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the canonical configuration and exit.
    #[arg(long)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<CliCommand>,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Morrey, Lebesgue or weak quasi-norm of a grid function.
    Norm(Opts),
    /// Apply an operator and write the result as MGF.
    Op(Opts),
    /// Weight characteristic over a cube family.
    Char(Opts),
    /// Stopping-time decomposition of a pair.
    Cz(Opts),
    /// Run an experiment harness.
    Experiment {
        kind: ExperimentKind,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run the acceptance suite.
    Selftest(Opts),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sharpness,
    Ratio,
    SteinWeiss,
    Necessity,
    FsDual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name", content = "kind")]
pub enum Command {
    Norm,
    Op,
    Char,
    Cz,
    Experiment(ExperimentKind),
    Selftest,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    #[default]
    Unit,
    Power,
    Random,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    #[default]
    Dyadic,
    All,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PairArg {
    #[default]
    Step,
    Indicator,
    Bump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OpName {
    BAlpha,
    IAlpha,
    BDyadic,
    MAlpha,
    MVector,
    MTilde,
    MTriple,
}

fn exponent(s: &str) -> std::result::Result<Exponent, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Every flag a subcommand may read. Unused flags are ignored.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Opts {
    #[arg(long, value_parser = exponent)]
    pub alpha: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub p: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub q: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub p1: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub q1: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub p2: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub q2: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub s: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub t: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub r: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub a: Option<Exponent>,
    #[arg(long, value_parser = exponent, allow_hyphen_values = true)]
    pub beta: Option<Exponent>,
    #[arg(long, value_parser = exponent, allow_hyphen_values = true)]
    pub gamma1: Option<Exponent>,
    #[arg(long, value_parser = exponent, allow_hyphen_values = true)]
    pub gamma2: Option<Exponent>,
    /// Averaging or majorant exponents of the first and second function.
    #[arg(long, value_parser = exponent)]
    pub r1: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub r2: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub s1: Option<Exponent>,
    #[arg(long, value_parser = exponent)]
    pub s2: Option<Exponent>,

    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub rootlevel: Option<i32>,
    /// Root levels `K` of the Stein–Weiss sweep, e.g. `0..4`.
    #[arg(long)]
    pub roots: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub cell_level: Option<i32>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long = "in2")]
    pub input2: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub v: Option<PathBuf>,
    #[arg(long)]
    pub w1: Option<PathBuf>,
    #[arg(long)]
    pub w2: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub weights: Option<WeightKind>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, conflicts_with_all = ["lebesgue", "weak"])]
    pub morrey: bool,
    #[arg(long, conflicts_with = "weak")]
    pub lebesgue: bool,
    #[arg(long)]
    pub weak: bool,
    #[arg(long, value_enum)]
    pub op: Option<OpName>,
    /// `two-weight`, `one-weight`, `remark`, `testing`, `ap` or a full variant name.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub theorem: Option<String>,
    #[arg(long, value_enum)]
    pub pairs: Option<PairArg>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Sharpness exponents `k` of `δ = 2^{−k}`, e.g. `4..8` or `4,6,8`.
    #[arg(long)]
    pub deltas: Option<String>,
    #[arg(long)]
    pub levels: Option<String>,

    #[arg(long)]
    pub pair_budget: Option<u64>,
    #[arg(long)]
    pub aligned_budget: Option<u64>,
    #[arg(long)]
    pub ring_depth: Option<u32>,
    #[arg(long)]
    pub refine: Option<u32>,
    #[arg(long)]
    pub floor_tol: Option<f64>,
    #[arg(long)]
    pub slope_tol: Option<f64>,
    #[arg(long)]
    pub growth_tol: Option<f64>,

    /// Emit JSON lines instead of CSV and plain text.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub opts: Opts,
}

impl RunConfig {
    pub fn to_canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_canonical(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Parse `a..b` (inclusive) or a comma list.
pub fn parse_range(s: &str) -> Result<Vec<i64>> {
    let bad = || Error::invalid(format!("cannot parse range {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn unsigned(v: Vec<i64>, what: &str) -> Result<Vec<u32>> {
    v.into_iter()
        .map(|x| u32::try_from(x).map_err(|_| Error::invalid(format!("{what} entry {x} is negative"))))
        .collect()
}

fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(format!("missing --{name}")))
}

fn read_function(path: &Path) -> Result<GridFunction> {
    read_mgf(BufReader::new(File::open(path)?))
}

impl Opts {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn grid(&self) -> Result<Grid> {
        let dim = self.dim.unwrap_or(1);
        Grid::new(DyadicCube::new(self.rootlevel.unwrap_or(0), &vec![0; dim])?, self.depth.unwrap_or(6))
    }

    fn profile(&self) -> ExponentProfile {
        ExponentProfile {
            n: self.dim.unwrap_or(1),
            alpha: self.alpha,
            p1: self.p1,
            q1: self.q1,
            p2: self.p2,
            q2: self.q2,
            p: self.p,
            q: self.q,
            s: self.s,
            t: self.t,
            r: self.r,
            a: self.a,
        }
        .with_combined()
    }

    fn family(&self, root: DyadicCube) -> CubeFamily {
        match self.family.unwrap_or_default() {
            FamilyArg::Dyadic => CubeFamily::dyadic(root),
            FamilyArg::All => {
                CubeFamily::all_aligned(root).with_budget(self.aligned_budget.unwrap_or(DEFAULT_ALIGNED_BUDGET))
            }
        }
    }

    fn kernel(&self, dim: usize) -> Result<KernelSpec> {
        let alpha = require(self.alpha, "alpha")?.value();
        match (dim, self.ring_depth) {
            (2, Some(depth)) => KernelSpec::with_rule(alpha, SingularRule::Subdivide2d { depth }),
            _ => KernelSpec::new(alpha, dim),
        }
    }

    fn descriptor(&self) -> PowerDescriptor {
        let v = |e: Option<Exponent>| e.map_or(0.0, |e| e.value());
        PowerDescriptor { beta: v(self.beta), gamma1: v(self.gamma1), gamma2: v(self.gamma2), center: [0.0; 2] }
    }

    fn weight_spec(&self, grid: &Grid) -> WeightSpec {
        match self.weights.unwrap_or_default() {
            WeightKind::Unit => WeightSpec::Unit,
            WeightKind::Power => WeightSpec::Power(self.descriptor()),
            WeightKind::Random => WeightSpec::Random { seed: self.seed(), index: 0, base_depth: grid.depth().min(3) },
        }
    }

    /// Weights from `--v/--w1/--w2` files when given, otherwise from `--weights`.
    fn weight_system(&self, grid: &Grid) -> Result<WeightSystem> {
        match (&self.v, &self.w1, &self.w2) {
            (Some(v), Some(w1), Some(w2)) => {
                WeightSystem::new(read_function(v)?, read_function(w1)?, read_function(w2)?)
            }
            (None, None, None) => self.weight_spec(grid).system(grid, false),
            _ => Err(Error::invalid("--v, --w1 and --w2 must be given together")),
        }
    }

    fn pairs(&self) -> PairSource {
        let kind = match self.pairs.unwrap_or_default() {
            PairArg::Step => PairKind::RandomStep,
            PairArg::Indicator => PairKind::Indicator,
            PairArg::Bump => PairKind::Bump,
        };
        PairSource::new(kind, self.seed(), self.count.unwrap_or(10))
    }

    fn levels(&self, default: &[u32]) -> Result<Vec<u32>> {
        match &self.levels {
            Some(s) => unsigned(parse_range(s)?, "--levels"),
            None => Ok(default.to_vec()),
        }
    }
}

/// Where tabular output and the summary go.
struct Sink<'a> {
    opts: &'a Opts,
    stdout: io::StdoutLock<'static>,
}

impl Sink<'_> {
    fn rows<T: Serialize>(&mut self, rows: &[T]) -> Result<()> {
        if let Some(path) = &self.opts.out {
            write_csv(rows, BufWriter::new(File::create(path)?))?;
        }
        if self.opts.json {
            write_json_lines(rows, &mut self.stdout)
        } else if self.opts.out.is_none() {
            write_csv(rows, &mut self.stdout)
        } else {
            Ok(())
        }
    }

    fn summary<T: Serialize>(&mut self, text: String, value: &T) -> Result<()> {
        if self.opts.json {
            serde_json::to_writer(&mut self.stdout, value)?;
            writeln!(self.stdout)?;
        } else {
            writeln!(self.stdout, "{text}")?;
        }
        Ok(())
    }
}

fn run_norm(o: &Opts, sink: &mut Sink) -> Result<()> {
    let f = read_function(&require(o.input.as_ref(), "in")?.clone())?;
    let root_box = f.grid().root_box();
    if o.lebesgue {
        let t = require(o.q.or(o.p), "q")?.value();
        let v = lebesgue_norm(&f, t, &root_box)?;
        return sink.summary(format!("lebesgue L^{t} norm = {v:e}"), &serde_json::json!({ "norm": "lebesgue", "value": v }));
    }
    if o.weak {
        let p = require(o.p, "p")?.value();
        let v = weak_quasinorm(&f, p)?;
        return sink.summary(format!("weak L^{p} quasi-norm = {v:e}"), &serde_json::json!({ "norm": "weak", "value": v }));
    }
    let (p, q) = (require(o.p, "p")?.value(), require(o.q, "q")?.value());
    let r = morrey_norm(&f, p, q, &o.family(f.grid().root()))?;
    let cube = r.attaining.to_string();
    sink.summary(
        format!("morrey norm = {:e} attained on {cube}", r.value),
        &serde_json::json!({ "norm": "morrey", "value": r.value, "cube": cube }),
    )
}

fn run_op(o: &Opts, sink: &mut Sink) -> Result<()> {
    let op = require(o.op, "op")?;
    let f = read_function(require(o.input.as_ref(), "in")?)?;
    let second = || -> Result<GridFunction> { read_function(require(o.input2.as_ref(), "in2")?) };
    let family = o.family(f.grid().root());
    let alpha = || require(o.alpha, "alpha").map(|a| a.value());
    let out = match op {
        OpName::BAlpha => b_alpha(&f, &second()?, &o.kernel(f.dim())?)?,
        OpName::IAlpha => i_alpha(&f, &o.kernel(f.dim())?)?,
        OpName::BDyadic => b_alpha_dyadic(&f, &second()?, &o.kernel(f.dim())?, &f.grid().root())?.total(),
        OpName::MAlpha => m_alpha_bilinear(&f, &second()?, alpha()?, &family)?,
        OpName::MVector => {
            let (r1, r2) = (require(o.r1, "r1")?.value(), require(o.r2, "r2")?.value());
            m_alpha_vector(&f, &second()?, alpha()?, r1, r2, &family)?
        }
        OpName::MTilde => {
            let v = read_function(require(o.v.as_ref(), "v")?)?;
            m_tilde(&f, &second()?, &v, alpha()?, require(o.t, "t")?.value(), &family)?
        }
        OpName::MTriple => m_triple_dyadic(&f, &second()?, &family)?,
    };
    let vals = out.values();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    match &o.out {
        Some(path) => write_mgf(out.function(), BufWriter::new(File::create(path)?))?,
        None if !o.json => write_mgf(out.function(), &mut sink.stdout)?,
        None => {}
    }
    let name = op.to_possible_value().expect("named").get_name().to_string();
    sink.summary(
        format!("{name}: {} cells, min {min:e}, max {max:e}", vals.len()),
        &serde_json::json!({ "op": name, "cells": vals.len(), "min": min, "max": max }),
    )
}

fn run_char(o: &Opts, sink: &mut Sink) -> Result<()> {
    let name = o.variant.clone().unwrap_or_else(|| "two-weight".into());
    if name == "ap" {
        let w = match &o.input {
            Some(p) => read_function(p)?,
            None => o.weight_system(&o.grid()?)?.w1,
        };
        let p = require(o.p, "p")?.value();
        let r = ap_characteristic(&w, p, &o.family(w.grid().root()))?;
        return sink.summary(format!("ap characteristic = {:e}", r.value), &r);
    }
    let pr = o.profile();
    let s = require(pr.s, "s")?.value();
    let variant = match name.as_str() {
        "two-weight" => Variant::two_weight_for(s),
        "one-weight" => Variant::one_weight_for(s),
        other => other.parse()?,
    };
    let cp = CharParams::from_profile(&pr, variant)?;
    let grid = o.grid()?;
    let mut ws = o.weight_system(&grid)?;
    if matches!(variant, Variant::OneWeightSLt1 | Variant::OneWeightSGe1) {
        ws = WeightSystem::product(ws.w1, ws.w2)?;
    }
    let grid = *ws.grid();
    let r = Characteristic::new(&ws, cp)?
        .sup(&o.family(grid.root()), o.pair_budget.unwrap_or(DEFAULT_PAIR_BUDGET))?;
    if r.overflow {
        return Err(Error::Numerical(format!("{} characteristic overflows (log value {:e})", variant.name(), r.log_value)));
    }
    sink.summary(format!("{} characteristic = {:e} at {} in {}", variant.name(), r.value, r.inner, r.outer), &r)
}

fn run_cz(o: &Opts, sink: &mut Sink) -> Result<()> {
    let f = read_function(require(o.input.as_ref(), "in")?)?;
    let g = match &o.input2 {
        Some(p) => read_function(p)?,
        None => f.clone(),
    };
    let q0 = f.grid().root();
    let a = match o.a {
        Some(a) => a.value(),
        None => choose_a(&f, &g, &q0)?,
    };
    let sf = cz_decompose(&f, &g, &q0, a)?;
    let h = verify_halving(&sf);
    match &o.out {
        Some(path) => sf.write_csv(BufWriter::new(File::create(path)?))?,
        None if !o.json => sf.write_csv(&mut sink.stdout)?,
        None => {}
    }
    sink.summary(
        format!(
            "a = {a}, {} generations, {} cubes, halving {} (worst ratio {:.4})",
            sf.generations.len(),
            sf.cube_count(),
            if h.holds { "holds" } else { "fails" },
            h.worst_ratio
        ),
        &serde_json::json!({ "a": a, "generations": sf.generations.len(), "cubes": sf.cube_count(), "halving": h }),
    )
}

fn run_experiment(kind: ExperimentKind, o: &Opts, sink: &mut Sink) -> Result<()> {
    match kind {
        ExperimentKind::Sharpness => {
            let mut cfg = SharpnessConfig::new(
                o.dim.unwrap_or(1),
                require(o.alpha, "alpha")?,
                require(o.p1, "p1")?,
                require(o.q1, "q1")?,
                require(o.p2, "p2")?,
                require(o.q2, "q2")?,
                require(o.t, "t")?,
            );
            if let Some(d) = &o.deltas {
                cfg.deltas = unsigned(parse_range(d)?, "--deltas")?;
            }
            cfg.refine = o.refine.unwrap_or(cfg.refine);
            cfg.floor_tol = o.floor_tol.unwrap_or(cfg.floor_tol);
            cfg.slope_tol = o.slope_tol.unwrap_or(cfg.slope_tol);
            let r = run_sharpness(&cfg)?;
            sink.rows(&r.rows)?;
            sink.summary(
                format!(
                    "sharpness {:?}: slope {:.4} (predicted {:.4}), slope {}, pointwise floor {}, norm bounds {}",
                    r.branch,
                    r.slope,
                    r.predicted_slope,
                    ok(r.slope_ok),
                    ok(r.pointwise_ok),
                    ok(r.norms_bounded)
                ),
                &serde_json::json!({
                    "branch": r.branch, "slope": r.slope, "predicted_slope": r.predicted_slope,
                    "slope_ok": r.slope_ok, "pointwise_ok": r.pointwise_ok, "norms_bounded": r.norms_bounded,
                }),
            )
        }
        ExperimentKind::Ratio => {
            let theorem: TheoremId = require(o.theorem.as_deref(), "theorem")?.parse()?;
            let grid = o.grid()?;
            let h = ratio_harness(&HarnessSpec {
                theorem,
                profile: o.profile(),
                weights: o.weight_spec(&grid),
                pairs: o.pairs(),
                levels: o.levels(&[4, 5, 6])?,
            })?;
            sink.rows(&h.records)?;
            sink.summary(
                format!("ratio {theorem}: max by level {:?}, worst growth {:.4}, {}", h.max_by_level, h.worst_growth, stable(h.stable)),
                &serde_json::json!({ "theorem": theorem.name(), "max_by_level": h.max_by_level, "worst_growth": h.worst_growth, "stable": h.stable }),
            )
        }
        ExperimentKind::SteinWeiss => {
            let z = Exponent::integer(0);
            let mut cfg =
                SteinWeissConfig::new(o.profile(), o.beta.unwrap_or(z), o.gamma1.unwrap_or(z), o.gamma2.unwrap_or(z));
            if let Some(r) = &o.roots {
                cfg.roots = parse_range(r)?.into_iter().map(|k| k as i32).collect();
            }
            cfg.cell_level = o.cell_level.unwrap_or(cfg.cell_level);
            cfg.growth_tol = o.growth_tol.unwrap_or(cfg.growth_tol);
            cfg.harness_levels = o.levels(&cfg.harness_levels)?;
            cfg.seed = o.seed();
            let r = stein_weiss_check(&cfg)?;
            sink.rows(&r.rows)?;
            let failing: Vec<&str> = r.conditions.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
            sink.summary(
                format!(
                    "stein-weiss {}: spread {:.4}, conditions {}",
                    r.verdict.name(),
                    r.spread,
                    if failing.is_empty() { "hold".to_string() } else { format!("fail ({})", failing.join(", ")) }
                ),
                &serde_json::json!({ "verdict": r.verdict, "spread": r.spread, "conditions": r.conditions }),
            )
        }
        ExperimentKind::Necessity => {
            let grid = o.grid()?;
            let ws = o.weight_system(&grid)?;
            let r = necessity_check(&ws, &o.profile(), &o.family(ws.grid().root()))?;
            sink.rows(&r.rows)?;
            sink.summary(
                format!(
                    "necessity: char_testing {:e} ≤ C_emp {:.4} × K {:e}: {}; testing estimate {}; indicator estimate {}",
                    r.char_testing,
                    r.c_emp,
                    r.operator_constant,
                    ok(r.holds),
                    ok(r.testing_ok),
                    ok(r.indicator_ok)
                ),
                &serde_json::json!({
                    "char_testing": r.char_testing, "c_emp": r.c_emp, "operator_constant": r.operator_constant,
                    "holds": r.holds, "testing_ok": r.testing_ok, "indicator_ok": r.indicator_ok,
                }),
            )
        }
        ExperimentKind::FsDual => {
            let r = [require(o.r1, "r1")?, require(o.r2, "r2")?];
            let s = [require(o.s1, "s1")?, require(o.s2, "s2")?];
            let mut cfg = FsDualConfig::new(o.profile(), o.descriptor(), r, s);
            cfg.levels = o.levels(&cfg.levels)?;
            cfg.pairs = o.pairs();
            let rep = fs_dual_check(&cfg)?;
            sink.rows(&rep.harness.records)?;
            sink.summary(
                format!("fs-dual: split ratio {:.6} ({}), harness {}", rep.split_ratio, ok(rep.split_ok), stable(rep.stable)),
                &serde_json::json!({ "split_ratio": rep.split_ratio, "split_ok": rep.split_ok, "max_by_level": rep.harness.max_by_level, "stable": rep.stable }),
            )
        }
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

fn stable(b: bool) -> &'static str {
    if b {
        "stable"
    } else {
        "UNSTABLE"
    }
}

/// Run a configuration; the returned code is the process exit status.
pub fn execute(cfg: &RunConfig) -> Result<i32> {
    let o = &cfg.opts;
    let mut sink = Sink { opts: o, stdout: io::stdout().lock() };
    match cfg.command {
        Command::Norm => run_norm(o, &mut sink)?,
        Command::Op => run_op(o, &mut sink)?,
        Command::Char => run_char(o, &mut sink)?,
        Command::Cz => run_cz(o, &mut sink)?,
        Command::Experiment(kind) => run_experiment(kind, o, &mut sink)?,
        Command::Selftest => {
            let dir = o.out.clone().unwrap_or_else(|| PathBuf::from("selftest-out"));
            let report = run_selftest(o.seed(), &dir)?;
            for c in &report.criteria {
                if o.json {
                    serde_json::to_writer(&mut sink.stdout, c)?;
                    writeln!(sink.stdout)?;
                } else {
                    writeln!(sink.stdout, "{}", c.line())?;
                }
            }
            let passed = report.criteria.iter().filter(|c| c.pass).count();
            sink.summary(
                format!("selftest: {passed}/{} criteria pass, tables in {}", report.criteria.len(), dir.display()),
                &serde_json::json!({ "passed": passed, "total": report.criteria.len(), "ok": report.ok() }),
            )?;
            sink.stdout.flush()?;
            return Ok(if report.ok() { 0 } else { 1 });
        }
    }
    sink.stdout.flush()?;
    Ok(0)
}

fn configure_threads(o: &Opts) -> Result<()> {
    let n = match o.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| Error::invalid(format!("{THREADS_ENV} = {v:?} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Parse `args` into a run configuration and the `--print-config` flag.
pub fn parse_args<I, T>(args: I) -> std::result::Result<(RunConfig, bool), clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let cfg = match (cli.command, &cli.config) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| clap::Error::raw(clap::error::ErrorKind::Io, format!("{}: {e}\n", path.display())))?;
            RunConfig::from_canonical(&text)
                .map_err(|e| clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{e}\n")))?
        }
        (Some(c), None) => match c {
            CliCommand::Norm(opts) => RunConfig { command: Command::Norm, opts },
            CliCommand::Op(opts) => RunConfig { command: Command::Op, opts },
            CliCommand::Char(opts) => RunConfig { command: Command::Char, opts },
            CliCommand::Cz(opts) => RunConfig { command: Command::Cz, opts },
            CliCommand::Experiment { kind, opts } => RunConfig { command: Command::Experiment(kind), opts },
            CliCommand::Selftest(opts) => RunConfig { command: Command::Selftest, opts },
        },
        (None, None) => {
            return Err(clap::Error::raw(clap::error::ErrorKind::MissingSubcommand, "a subcommand or --config is required\n"))
        }
    };
    Ok((cfg, cli.print_config))
}

/// Entry point of the `morrey` binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (cfg, print) = match parse_args(args) {
        Ok(x) => x,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if print {
        println!("{}", cfg.to_canonical());
        return 0;
    }
    let run = configure_threads(&cfg.opts).and_then(|_| execute(&cfg));
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        parse_args(std::iter::once("morrey").chain(args.iter().copied())).unwrap().0
    }

    #[test]
    fn config_round_trips_through_canonical_json() {
        let cfg = parse(&[
            "experiment", "sharpness", "--dim", "1", "--alpha", "0.3", "--p1", "4", "--p2", "4", "--q1", "2", "--q2", "2",
            "--t", "5", "--deltas", "4..8", "--beta", "-0.3",
        ]);
        assert_eq!(cfg.command, Command::Experiment(ExperimentKind::Sharpness));
        assert_eq!(cfg.opts.alpha, Some(Exponent::ratio(3, 10)));
        let text = cfg.to_canonical();
        let back = RunConfig::from_canonical(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_canonical(), text);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("4..8").unwrap(), vec![4, 5, 6, 7, 8]);
        assert_eq!(parse_range("0..=2").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_range("4, 6").unwrap(), vec![4, 6]);
        assert!(parse_range("8..4").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn norm_modes_conflict() {
        let args = ["morrey", "norm", "--morrey", "--weak", "--in", "f.mgf"];
        assert!(parse_args(args).is_err());
    }

    #[test]
    fn missing_subcommand_is_an_error() {
        assert!(parse_args(["morrey"]).is_err());
    }
}
