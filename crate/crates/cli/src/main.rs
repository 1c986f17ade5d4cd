//! `tiling`: command-line front end for the tiling-proof toolkit.
//!
//! Every command prints a JSON report. Exit codes: 0 claim verified or
//! theorem true, 1 counterexample or violation found, 2 usage or resource
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use tiling_core::certcheck::{validate_certificate, CertError};
use tiling_core::complex::{
    bijective_labeling, generate_theorem, octahedral_subdivide, validate_elementary_proof, DeltaComplex, MarkedComplex,
};
use tiling_core::excise::{can_excise, witness_cochain, GroupSpec};
use tiling_core::finfield::{Configuration, Field};
use tiling_core::grope::{polygon_grope, random_grope, two_stage_grope, Grope};
use tiling_core::realize::{
    check_theorem, conclusion_holds, realize_from_cochain, violations, Outcome, SearchOptions,
};
use tiling_core::skew::{pappus_counterexample, Quaternion, PAPPUS_LINES};
use tiling_core::trimat::{propagate_traced, IncidenceMatrix, Sweeps, Tri};

mod selftest;

#[derive(Parser)]
#[command(name = "tiling", version, about = "Check incidence theorems and tiling proofs")]
struct Cli {
    /// Worker threads for searches.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide a theorem over F_q by exhaustive search.
    Check {
        matrix: PathBuf,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = SearchOptions::default().node_budget)]
        budget: u64,
    },
    /// Check a configuration against the hypotheses of a matrix.
    Verify { matrix: PathBuf, config: PathBuf },
    /// Seed cells and fill zeros forced by the incidence axiom.
    Propagate {
        matrix: PathBuf,
        /// `row,col,value`, 1-based; repeatable.
        #[arg(long = "seed", value_parser = parse_seed)]
        seeds: Vec<(usize, usize, Tri)>,
        /// Number of sweeps or `fix`.
        #[arg(long, default_value = "fix")]
        sweeps: String,
        /// Print only the resulting matrix.
        #[arg(long)]
        matrix_only: bool,
    },
    /// Decide whether a face can be excised over a group.
    Excise {
        complex: PathBuf,
        /// Face id (0-based) or `marked`.
        #[arg(long)]
        face: String,
        #[arg(long)]
        group: GroupSpec,
        /// Realize the failing cochain as a counterexample over F_q.
        #[arg(long)]
        realize: Option<u32>,
    },
    /// Theorem of a bijectively labeled complex.
    Generate {
        complex: PathBuf,
        #[arg(long)]
        matrix_only: bool,
    },
    /// Check an elementary tiling proof.
    Validate {
        complex: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        group: GroupSpec,
    },
    /// Octahedral subdivision of a labeled complex.
    Subdivide { complex: PathBuf },
    /// Build gropes.
    #[command(subcommand)]
    Grope(GropeCmd),
    /// Validate a proof certificate.
    ProveValidate { certificate: PathBuf },
    /// Quaternion constructions.
    #[command(subcommand)]
    Quat(QuatCmd),
    /// Run the fixture checks.
    Selftest {
        #[arg(long, default_value = "fixtures")]
        fixtures: PathBuf,
    },
}

#[derive(Args)]
struct GropeArgs {
    #[arg(long, default_value_t = 3)]
    k: u64,
    #[arg(long, default_value = "R*")]
    group: GroupSpec,
}

#[derive(Subcommand)]
enum GropeCmd {
    /// Triangle with a 3k-gon glued along its boundary.
    Polygon(GropeArgs),
    /// Polygon grope with a second 3k-gon glued into it.
    TwoStage(GropeArgs),
    /// Random grope; needs `--seed`.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        gluings: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5, 7])]
        ks: Vec<u64>,
        #[arg(long, default_value = "R*")]
        group: GroupSpec,
    },
}

#[derive(Subcommand)]
enum QuatCmd {
    /// Pappus configuration over the quaternions violating the conclusion.
    Pappus {
        #[arg(long, default_value = "i")]
        u: Quaternion,
        #[arg(long, default_value = "j")]
        v: Quaternion,
    },
}

fn parse_seed(s: &str) -> Result<(usize, usize, Tri), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [r, c, v] = parts[..] else { return Err(format!("expected row,col,value, got {s:?}")) };
    let idx = |x: &str| x.parse::<usize>().ok().filter(|&x| x >= 1).ok_or_else(|| format!("bad 1-based index {x:?}"));
    let v: i64 = v.parse().map_err(|_| format!("bad value {v:?}"))?;
    let v = Tri::from_i64(v).ok().filter(|t| *t != Tri::Zero).ok_or_else(|| format!("seed value must be 1 or -1, got {v}"))?;
    Ok((idx(r)? - 1, idx(c)? - 1, v))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Input {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunReport {
    command: Vec<String>,
    inputs: Vec<Input>,
    verdict: String,
    exit_code: u8,
    result: Value,
    tool_version: &'static str,
}

/// Collects inputs while a command runs.
struct Ctx {
    inputs: Vec<Input>,
    jobs: usize,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.inputs.push(Input { path: path.display().to_string(), sha256: format!("{:x}", Sha256::digest(text.as_bytes())) });
        Ok(text)
    }

    fn json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T> {
        let text = self.read(path)?;
        serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
    }

    fn marked(&mut self, path: &Path) -> Result<MarkedComplex> {
        Ok(self.json::<MarkedComplex>(path)?.checked()?)
    }
}

/// What a command produced: verdict name, exit code and payload.
struct Done {
    verdict: &'static str,
    code: u8,
    result: Value,
    /// Print `result` alone instead of the full report.
    bare: bool,
}

fn done(verdict: &'static str, code: u8, result: impl Serialize) -> Result<Done> {
    Ok(Done { verdict, code, result: serde_json::to_value(result)?, bare: false })
}

fn bare(result: impl Serialize) -> Result<Done> {
    Ok(Done { bare: true, ..done("ok", 0, result)? })
}

fn one_based(cells: &[(usize, usize)]) -> Vec<[usize; 2]> {
    cells.iter().map(|&(i, j)| [i + 1, j + 1]).collect()
}

fn labeled_grope(gr: &Grope) -> Result<Value> {
    let mc = MarkedComplex::new(gr.complex.clone(), bijective_labeling(&gr.complex, 0, 0)?, 0)?;
    let mut v = serde_json::to_value(&mc)?;
    v["gluings"] = serde_json::to_value(&gr.gluings)?;
    Ok(v)
}

fn run(cmd: Cmd, ctx: &mut Ctx) -> Result<Done> {
    match cmd {
        Cmd::Check { matrix, q, budget } => {
            let m: IncidenceMatrix = ctx.json(&matrix)?;
            let opts = SearchOptions { node_budget: budget, jobs: ctx.jobs, ..SearchOptions::default() };
            let v = check_theorem(&m, q, &opts)?;
            let (verdict, code) = match v.outcome {
                Outcome::True => ("true", 0),
                Outcome::Vacuous => ("vacuous", 0),
                Outcome::Counterexample(_) => ("counterexample", 1),
                Outcome::ResourceExceeded => ("resourceExceeded", 2),
            };
            done(verdict, code, json!({"q": q, "verdict": v}))
        }
        Cmd::Verify { matrix, config } => {
            let m: IncidenceMatrix = ctx.json(&matrix)?;
            let c: Configuration = ctx.json(&config)?;
            let f = Field::new(c.q)?;
            let c = c.normalized(&f)?;
            if c.points.len() != m.rows_count() || c.lines.len() != m.cols_count() {
                bail!("configuration has {} points and {} lines, matrix is {}x{}", c.points.len(), c.lines.len(), m.rows_count(), m.cols_count());
            }
            let bad = violations(&f, &m, &c);
            let concl = conclusion_holds(&c)?;
            let report = json!({
                "hypothesesHold": bad.is_empty(),
                "conclusionHolds": concl,
                "counterexample": bad.is_empty() && !concl,
                "violations": one_based(&bad),
            });
            if bad.is_empty() {
                done(if concl { "satisfied" } else { "counterexample" }, 0, report)
            } else {
                done("violation", 1, report)
            }
        }
        Cmd::Propagate { matrix, seeds, sweeps, matrix_only } => {
            let m: IncidenceMatrix = ctx.json(&matrix)?;
            let sweeps = match sweeps.as_str() {
                "fix" | "fixpoint" => Sweeps::Fixpoint,
                n => Sweeps::Limit(n.parse().map_err(|_| anyhow!("--sweeps takes a number or `fix`"))?),
            };
            match propagate_traced(&m, &seeds, sweeps) {
                Ok(p) if matrix_only => bare(&p.matrix),
                Ok(p) => done("propagated", 0, json!({"matrix": p.matrix, "sweeps": p.sweeps, "stable": p.stable})),
                Err(e @ tiling_core::trimat::TrimatError::SeedConflict { .. }) => done("seedConflict", 1, json!({"error": e.to_string()})),
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Excise { complex, face, group, realize } => {
            let raw: Value = ctx.json(&complex)?;
            let k: DeltaComplex = serde_json::from_value(raw.clone())?;
            let f = match face.as_str() {
                "marked" => raw["marked"].as_u64().ok_or_else(|| anyhow!("complex has no marked face"))? as usize,
                s => s.parse().context("--face takes a face id or `marked`")?,
            };
            if can_excise(&k, f, &group)? {
                return done("excisable", 0, json!({"face": f, "group": group.to_string(), "excisable": true}));
            }
            let cochain = witness_cochain(&k, f, &group).ok().flatten();
            let mut report = json!({"face": f, "group": group.to_string(), "excisable": false, "failingCochain": cochain});
            if let (Some(q), Some(u)) = (realize, &cochain) {
                let mc: MarkedComplex = serde_json::from_value::<MarkedComplex>(raw)?.checked()?;
                let cfg = realize_from_cochain(&mc, u, q)?;
                report["counterexample"] = serde_json::to_value(cfg)?;
            }
            done("notExcisable", 1, report)
        }
        Cmd::Generate { complex, matrix_only } => {
            let mc = ctx.marked(&complex)?;
            let m = generate_theorem(&mc)?;
            if matrix_only {
                bare(&m)
            } else {
                done("generated", 0, json!({"rows": m.rows_count(), "cols": m.cols_count(), "matrix": m}))
            }
        }
        Cmd::Validate { complex, matrix, group } => {
            let mc = ctx.marked(&complex)?;
            let m: IncidenceMatrix = ctx.json(&matrix)?;
            let r = validate_elementary_proof(&mc, &m, &group);
            done(if r.valid { "valid" } else { "invalid" }, if r.valid { 0 } else { 1 }, r)
        }
        Cmd::Subdivide { complex } => {
            let mc = ctx.marked(&complex)?;
            done("subdivided", 0, octahedral_subdivide(&mc)?)
        }
        Cmd::Grope(g) => {
            let gr = match g {
                GropeCmd::Polygon(a) => polygon_grope(a.k, &a.group)?,
                GropeCmd::TwoStage(a) => two_stage_grope(a.k, &a.group)?,
                GropeCmd::Random { seed, gluings, ks, group } => {
                    if ks.is_empty() {
                        bail!("--ks is empty");
                    }
                    random_grope(&mut ChaCha8Rng::seed_from_u64(seed), gluings, &ks, &group)?
                }
            };
            done("built", 0, labeled_grope(&gr)?)
        }
        Cmd::ProveValidate { certificate } => {
            let text = ctx.read(&certificate)?;
            let cert = serde_json::from_str(&text).with_context(|| format!("cannot parse {}", certificate.display()))?;
            let dir = certificate.parent().unwrap_or(Path::new("."));
            match validate_certificate(&cert, dir) {
                Ok(r) => done(if r.valid { "valid" } else { "invalid" }, if r.valid { 0 } else { 1 }, r),
                Err(e @ CertError::CoverageGap(_)) => done("coverageGap", 1, json!({"error": e.to_string()})),
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Quat(QuatCmd::Pappus { u, v }) => {
            let c = pappus_counterexample(&u, &v)?;
            let cfg = &c.configuration;
            let broken: Vec<String> = PAPPUS_LINES
                .iter()
                .enumerate()
                .skip(1)
                .flat_map(|(j, l)| l.iter().filter(move |&&p| !cfg.lines[j].contains(&cfg.points[p - 1])).map(move |p| format!("P{p} L{}", j + 1)))
                .collect();
            let ok = broken.is_empty() && !cfg.conclusion_holds();
            let report = json!({
                "u": u.to_string(),
                "v": v.to_string(),
                "hypothesesHold": broken.is_empty(),
                "conclusionHolds": cfg.conclusion_holds(),
                "conclusionProduct": c.conclusion_product.to_string(),
                "brokenHypotheses": broken,
                "counterexample": c,
            });
            done(if ok { "counterexample" } else { "invalid" }, if ok { 0 } else { 1 }, report)
        }
        Cmd::Selftest { fixtures } => {
            let checks = selftest::run(&fixtures, ctx.jobs);
            let ok = checks.iter().all(|c| c.pass);
            for c in &checks {
                eprintln!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
            }
            done(if ok { "pass" } else { "fail" }, if ok { 0 } else { 1 }, checks)
        }
    }
}

/// Prints JSON to stdout; a closed pipe is not an error.
fn emit(v: &impl Serialize) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("reports serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command: Vec<String> = std::env::args().skip(1).collect();
    let mut ctx = Ctx { inputs: Vec::new(), jobs: cli.jobs.max(1) };
    match run(cli.cmd, &mut ctx) {
        Ok(o) if o.bare => {
            emit(&o.result);
            ExitCode::from(o.code)
        }
        Ok(o) => {
            let report = RunReport {
                command,
                inputs: ctx.inputs,
                verdict: o.verdict.to_string(),
                exit_code: o.code,
                result: o.result,
                tool_version: env!("CARGO_PKG_VERSION"),
            };
            emit(&report);
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
