//! JSON-configured experiment runner behind the `ripot` binary.
//!
//! Each command reads one config file and writes CSV/JSON reports into an
//! output directory. Verification commands return [`Status::Mismatch`] when a
//! measured trend differs from the one the config expects.

use anyhow::{bail, Context, Result};
use ripot::interpolation::{holmstedt, k_functional_bruteforce, Couple, KQuery};
use ripot::operators::{riesz, RieszKernelSpec};
use ripot::rearrange::decreasing_rearrangement;
use ripot::spaces::{ext_real, norm, SpaceSpec};
use ripot::verify::{
    check_constrained_riesz, check_hardy_pair, check_orlicz_theorem, check_rearrangement_estimate, check_riesz_fields,
    run_counterexample_lz, HardyOp, Member,
};
use ripot::young::{equivalent, fit_power_log, hat_construction, sobolev_conjugate, Regime, TableOptions};
use ripot::{
    grid::make_divfree_family, grid::make_field, grid::FamilyConfig, FieldDescriptor, GriddedField, InequalityReport, Profile, Trend,
    YoungFunction,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YoungOp {
    Conj,
    Hat,
    Equiv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyOp {
    Hardy,
    Riesz,
    RearrEst,
    Counterexample,
    Orlicz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Rearrange,
    Norm,
    Young(YoungOp),
    Riesz,
    Kfunc,
    Verify(VerifyOp),
}

/// Outcome of a successful run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Mismatch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Mismatch => 2,
        }
    }
}

/// A field descriptor sampled on a grid.
#[derive(Clone, Debug, Deserialize)]
pub struct FieldInput {
    #[serde(flatten)]
    pub descriptor: FieldDescriptor,
    pub n: usize,
    pub side: usize,
    #[serde(default = "one")]
    pub box_length: f64,
}

impl FieldInput {
    fn build(&self, seed: Option<u64>) -> Result<GriddedField> {
        let mut d = self.descriptor.clone();
        if let Some(s) = seed {
            match &mut d {
                FieldDescriptor::RandomModes { seed, .. } | FieldDescriptor::RandomCells { seed, .. } => *seed = s,
                _ => {}
            }
        }
        Ok(make_field(&d, self.n, self.side, self.box_length)?)
    }
}

/// A step profile: `values[j]` on `[breakpoints[j-1], breakpoints[j])`.
#[derive(Clone, Debug, Deserialize)]
pub struct ProfileInput {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default = "infinite", with = "ext_real")]
    pub domain_length: f64,
}

impl ProfileInput {
    fn build(&self) -> Result<Profile> {
        Ok(Profile::new(self.breakpoints.clone(), self.values.clone(), self.domain_length)?)
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct LabelledSpace {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(flatten)]
    pub space: SpaceSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RearrangeConfig {
    field: FieldInput,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormConfig {
    #[serde(default)]
    field: Option<FieldInput>,
    #[serde(default)]
    profile: Option<ProfileInput>,
    spaces: Vec<LabelledSpace>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct FitRequest {
    regime: Regime,
    l_lo: f64,
    l_hi: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct YoungConfig {
    young: YoungFunction,
    n: usize,
    alpha: f64,
    #[serde(default)]
    table: TableOptions,
    #[serde(default = "curve_per_decade")]
    curve_per_decade: usize,
    #[serde(default)]
    fit: Option<FitRequest>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EquivConfig {
    a: YoungFunction,
    b: YoungFunction,
    regime: Regime,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RieszConfig {
    field: FieldInput,
    kernel: RieszKernelSpec,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct KfuncConfig {
    profile: ProfileInput,
    #[serde(flatten)]
    couple: Couple,
    ts: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct MemberInput {
    label: String,
    level: f64,
    profile: ProfileInput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HardyConfig {
    x: SpaceSpec,
    y: SpaceSpec,
    n: usize,
    alpha: f64,
    #[serde(default)]
    op: HardyOp,
    members: Vec<MemberInput>,
    #[serde(default)]
    expected: Option<Trend>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyRieszConfig {
    x: SpaceSpec,
    y: SpaceSpec,
    alpha: f64,
    levels: Vec<f64>,
    #[serde(default = "yes")]
    constrained: bool,
    #[serde(default)]
    family: Option<FamilyConfig>,
    /// Explicit fields, one per level, instead of a generated family.
    #[serde(default)]
    fields: Option<Vec<FieldInput>>,
    #[serde(default)]
    expected: Option<Trend>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RearrEstConfig {
    alpha: f64,
    levels: Vec<f64>,
    family: FamilyConfig,
    #[serde(default = "t_points")]
    t_points: usize,
    #[serde(default)]
    expected: Option<Trend>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CounterexampleConfig {
    n: usize,
    alpha: f64,
    q: f64,
    r: f64,
    gamma: f64,
    eps: Vec<f64>,
    #[serde(default = "per_unit")]
    per_unit: usize,
    #[serde(default)]
    expected: Option<Trend>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrliczConfig {
    young: YoungFunction,
    alpha: f64,
    #[serde(default = "yes")]
    finite_measure: bool,
    levels: Vec<f64>,
    family: FamilyConfig,
    #[serde(default)]
    expected: Option<Trend>,
}

#[derive(Serialize)]
struct ReportSummary<'a> {
    id: &'a str,
    trend: Trend,
    expected: Option<Trend>,
    matches: bool,
}

fn one() -> f64 {
    1.0
}
fn infinite() -> f64 {
    f64::INFINITY
}
fn yes() -> bool {
    true
}
fn curve_per_decade() -> usize {
    10
}
fn t_points() -> usize {
    48
}
fn per_unit() -> usize {
    8
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

struct Out {
    dir: PathBuf,
}

impl Out {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
    }

    fn json<T: Serialize>(&self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, &s)
    }
}

/// Runs `cmd` on the config at `config`, writing reports into `out`.
/// Errors are input errors (exit code 1).
pub fn run(cmd: Command, config: &Path, out: &Path) -> Result<Status> {
    let out = Out::new(out)?;
    match cmd {
        Command::Rearrange => rearrange(load(config)?, &out),
        Command::Norm => norms(load(config)?, &out),
        Command::Young(YoungOp::Equiv) => young_equiv(load(config)?, &out),
        Command::Young(op) => young(op, load(config)?, &out),
        Command::Riesz => riesz_cmd(load(config)?, &out),
        Command::Kfunc => kfunc(load(config)?, &out),
        Command::Verify(op) => {
            let reports = match op {
                VerifyOp::Hardy => verify_hardy(load(config)?)?,
                VerifyOp::Riesz => verify_riesz(load(config)?)?,
                VerifyOp::RearrEst => verify_rearr_est(load(config)?)?,
                VerifyOp::Counterexample => verify_counterexample(load(config)?)?,
                VerifyOp::Orlicz => verify_orlicz(load(config)?)?,
            };
            write_reports(&reports, &out)
        }
    }
}

fn with_expected(mut r: InequalityReport, expected: Option<Trend>) -> InequalityReport {
    if expected.is_some() {
        r.expected = expected;
    }
    r
}

fn write_reports(reports: &[InequalityReport], out: &Out) -> Result<Status> {
    let mut summary = Vec::new();
    for r in reports {
        out.write(&format!("{}.csv", r.id), &r.to_csv())?;
        out.write(&format!("{}.json", r.id), &(r.to_json() + "\n"))?;
        summary.push(ReportSummary { id: &r.id, trend: r.trend, expected: r.expected, matches: r.matches_expected() });
    }
    out.json("summary.json", &summary)?;
    Ok(if summary.iter().all(|s| s.matches) { Status::Ok } else { Status::Mismatch })
}

/// Two rows per step so that the CSV plots as a staircase.
fn staircase(p: &Profile) -> String {
    let mut s = String::from("s,f_star\n");
    let mut lo = 0.0;
    for (&b, &v) in p.breakpoints().iter().zip(p.values()) {
        let _ = writeln!(s, "{lo},{v}");
        let _ = writeln!(s, "{b},{v}");
        lo = b;
    }
    s
}

fn rearrange(c: RearrangeConfig, out: &Out) -> Result<Status> {
    let f = c.field.build(c.seed)?;
    let p = decreasing_rearrangement(&f);
    out.write("rearrangement.csv", &staircase(&p))?;
    out.json(
        "summary.json",
        &serde_json::json!({
            "cells": f.cells(),
            "volume": f.volume(),
            "l1": p.integral_to(f64::INFINITY),
            "sup": p.values().first().copied().unwrap_or(0.0),
            "support_measure": p.measure_above(0.0),
        }),
    )?;
    Ok(Status::Ok)
}

fn norms(c: NormConfig, out: &Out) -> Result<Status> {
    let p = match (&c.field, &c.profile) {
        (Some(f), None) => decreasing_rearrangement(&f.build(c.seed)?),
        (None, Some(p)) => p.build()?,
        _ => bail!("norm needs exactly one of `field` and `profile`"),
    };
    let mut csv = String::from("space,norm\n");
    for (i, s) in c.spaces.iter().enumerate() {
        s.space.validate()?;
        let v = norm(&s.space, &p)?;
        let label = s.label.clone().unwrap_or_else(|| format!("space{i}"));
        let _ = writeln!(csv, "{label},{v}");
    }
    out.write("norms.csv", &csv)?;
    Ok(Status::Ok)
}

fn young(op: YoungOp, c: YoungConfig, out: &Out) -> Result<Status> {
    c.young.validate()?;
    let g = match op {
        YoungOp::Conj => sobolev_conjugate(&c.young, c.n, c.alpha, &c.table)?,
        _ => hat_construction(&c.young, c.n, c.alpha, &c.table)?,
    };
    let (lo, hi) = (c.table.t_min.ln(), c.table.t_max.ln());
    let count = (((hi - lo) / std::f64::consts::LN_10) * c.curve_per_decade as f64).ceil() as usize + 1;
    let mut csv = String::from("ln_t,ln_A\n");
    for k in 0..count {
        let u = lo + (hi - lo) * k as f64 / (count - 1).max(1) as f64;
        let _ = writeln!(csv, "{u},{}", g.ln_eval(u));
    }
    let name = if op == YoungOp::Conj { "conjugate" } else { "hat" };
    out.write(&format!("{name}.csv"), &csv)?;
    if let Some(f) = c.fit {
        let (p, r) = fit_power_log(&g, f.regime, f.l_lo, f.l_hi);
        out.json("fit.json", &serde_json::json!({ "regime": f.regime, "power": p, "log_power": r }))?;
    }
    Ok(Status::Ok)
}

fn young_equiv(c: EquivConfig, out: &Out) -> Result<Status> {
    c.a.validate()?;
    c.b.validate()?;
    out.json("equivalence.json", &equivalent(&c.a, &c.b, c.regime))?;
    Ok(Status::Ok)
}

fn riesz_cmd(c: RieszConfig, out: &Out) -> Result<Status> {
    let f = c.field.build(c.seed)?;
    let g = riesz(&f, &c.kernel)?;
    let n = g.n();
    let mut csv = (0..n).map(|d| format!("x{d}")).collect::<Vec<_>>().join(",");
    for k in 0..g.components() {
        let _ = write!(csv, ",value{k}");
    }
    csv.push('\n');
    for i in 0..g.cells() {
        let x = g.center_of(i);
        let mut row: Vec<String> = x[..n].iter().map(|v| v.to_string()).collect();
        row.extend((0..g.components()).map(|k| g.component(k)[i].to_string()));
        csv += &row.join(",");
        csv.push('\n');
    }
    out.write("riesz.csv", &csv)?;
    out.write("riesz_rearrangement.csv", &staircase(&decreasing_rearrangement(&g)))?;
    Ok(Status::Ok)
}

fn kfunc(c: KfuncConfig, out: &Out) -> Result<Status> {
    let f = c.profile.build()?;
    let mut csv = String::from("t,K,holmstedt\n");
    for &t in &c.ts {
        let k = k_functional_bruteforce(&f, &KQuery::new(c.couple, t)?)?;
        let h = match c.couple {
            Couple::L1Lorentz { p, q } => holmstedt(&f, p, q, t)?.to_string(),
            _ => String::new(),
        };
        let _ = writeln!(csv, "{t},{k},{h}");
    }
    out.write("kfunc.csv", &csv)?;
    Ok(Status::Ok)
}

fn verify_hardy(c: HardyConfig) -> Result<Vec<InequalityReport>> {
    let members = c
        .members
        .iter()
        .map(|m| Ok(Member { label: m.label.clone(), level: m.level, profile: m.profile.build()? }))
        .collect::<Result<Vec<_>>>()?;
    let r = check_hardy_pair(&c.x, &c.y, &members, c.n, c.alpha, c.op)?;
    Ok(vec![with_expected(r, c.expected)])
}

fn verify_riesz(c: VerifyRieszConfig) -> Result<Vec<InequalityReport>> {
    let r = match (&c.fields, &c.family) {
        (Some(fields), None) => {
            let fs = fields.iter().map(|f| f.build(c.seed)).collect::<Result<Vec<_>>>()?;
            check_riesz_fields(&c.x, &c.y, &fs, &c.levels, c.alpha, "riesz_fields", None)?
        }
        (None, Some(cfg)) => check_constrained_riesz(&c.x, &c.y, c.constrained, c.alpha, &c.levels, cfg)?,
        _ => bail!("verify riesz needs exactly one of `family` and `fields`"),
    };
    Ok(vec![with_expected(r, c.expected)])
}

fn verify_rearr_est(c: RearrEstConfig) -> Result<Vec<InequalityReport>> {
    let fam = make_divfree_family(&c.levels, &c.family)?;
    let r = check_rearrangement_estimate(&fam, &c.levels, c.alpha, c.t_points)?;
    Ok(vec![with_expected(r, c.expected)])
}

fn verify_counterexample(c: CounterexampleConfig) -> Result<Vec<InequalityReport>> {
    let r = run_counterexample_lz(c.n, c.alpha, c.q, c.r, c.gamma, &c.eps, c.per_unit)?;
    Ok(vec![with_expected(r, c.expected)])
}

fn verify_orlicz(c: OrliczConfig) -> Result<Vec<InequalityReport>> {
    let rs = check_orlicz_theorem(&c.young, c.alpha, c.finite_measure, &c.levels, &c.family)?;
    Ok(rs.into_iter().map(|r| with_expected(r, c.expected)).collect())
}
