//! Quick end-to-end checks over the shipped fixtures.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use tiling_core::certcheck::{load_certificate, validate_certificate};
use tiling_core::complex::MarkedComplex;
use tiling_core::excise::can_excise;
use tiling_core::finfield::{Configuration, Field};
use tiling_core::realize::{check_theorem, conclusion_holds, verify_configuration, Outcome, SearchOptions};
use tiling_core::skew::{pappus_counterexample, Quaternion};
use tiling_core::trimat::{propagate, IncidenceMatrix, Sweeps, Tri};

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn load<T: serde::de::DeserializeOwned>(dir: &Path, rel: &str) -> Result<T> {
    let path = dir.join(rel);
    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn golden(dir: &Path, base: &str, seeds: &[(usize, usize, i64)], want: &str) -> Result<bool> {
    let m: IncidenceMatrix = load(dir, base)?;
    let seeds: Vec<(usize, usize, Tri)> = seeds.iter().map(|&(i, j, v)| Ok((i - 1, j - 1, Tri::from_i64(v)?))).collect::<Result<_>>()?;
    Ok(propagate(&m, &seeds, Sweeps::Fixpoint)? == load::<IncidenceMatrix>(dir, want)?)
}

fn verdict(dir: &Path, rel: &str, q: u32, jobs: usize) -> Result<Outcome> {
    let m: IncidenceMatrix = load(dir, rel)?;
    Ok(check_theorem(&m, q, &SearchOptions { jobs, ..SearchOptions::default() })?.outcome)
}

fn excisable(dir: &Path, rel: &str, g: &str) -> Result<bool> {
    let mc: MarkedComplex = load(dir, rel)?;
    Ok(can_excise(&mc.complex, mc.marked, &g.parse()?)?)
}

pub fn run(dir: &Path, jobs: usize) -> Vec<Check> {
    let m = |p: &str| format!("matrices/{p}.json");
    let is_true = |o: Outcome| o == Outcome::True;
    let is_cex = |o: Outcome| matches!(o, Outcome::Counterexample(_));
    let checks: Vec<(String, Box<dyn Fn() -> Result<bool>>)> = vec![
        ("propagation case 1".into(), Box::new(move || golden(dir, &m("pappus12x9"), &[(10, 4, -1)], &m("pappus12x9-case1")))),
        (
            "propagation case 2".into(),
            Box::new(move || golden(dir, &m("pappus16x10"), &[(1, 1, -1), (10, 10, -1)], &m("pappus16x10-case2"))),
        ),
        (
            "propagation case 3".into(),
            Box::new(move || golden(dir, &m("pappus16x10"), &[(1, 1, -1), (10, 10, 1)], &m("pappus16x10-case3"))),
        ),
        ("q-points true over F2".into(), Box::new(move || Ok(is_true(verdict(dir, &m("q-points-2"), 2, jobs)?)))),
        ("warmup true over F3".into(), Box::new(move || Ok(is_true(verdict(dir, &m("warmup"), 3, jobs)?)))),
        ("fano fails over F2".into(), Box::new(move || Ok(is_cex(verdict(dir, &m("fano"), 2, jobs)?)))),
        (
            "6-gon configuration over F3".into(),
            Box::new(move || {
                let mat: IncidenceMatrix = load(dir, &m("6gon"))?;
                let c: Configuration = load(dir, "configs/6gon-f3.json")?;
                let f = Field::new(c.q)?;
                let c = c.normalized(&f)?;
                Ok(verify_configuration(&mat, &c)? && !conclusion_holds(&c)?)
            }),
        ),
        ("9-gon grope excises over F8*".into(), Box::new(move || excisable(dir, "complexes/ninegon-grope.json", "F8*"))),
        ("9-gon grope does not excise over F4*".into(), Box::new(move || Ok(!excisable(dir, "complexes/ninegon-grope.json", "F4*")?))),
        ("non-grope excises over R*".into(), Box::new(move || excisable(dir, "complexes/nongrope.json", "R*"))),
        ("non-grope does not excise over F5*".into(), Box::new(move || Ok(!excisable(dir, "complexes/nongrope.json", "F5*")?))),
        ("quaternion Pappus".into(), Box::new(|| Ok(!pappus_counterexample(&Quaternion::i(), &Quaternion::j())?.configuration.conclusion_holds()))),
    ];
    let mut out: Vec<Check> = checks
        .into_iter()
        .map(|(name, f)| match f() {
            Ok(pass) => Check { name, pass, error: None },
            Err(e) => Check { name, pass: false, error: Some(format!("{e:#}")) },
        })
        .collect();
    for c in ["pappus", "desargues", "one-line", "ninegon"] {
        let path = dir.join(format!("certificates/{c}.json"));
        let res = load_certificate(&path)
            .map_err(anyhow::Error::from)
            .and_then(|cert| Ok(validate_certificate(&cert, path.parent().unwrap_or(dir))?.valid));
        let name = format!("certificate {c}");
        out.push(match res {
            Ok(pass) => Check { name, pass, error: None },
            Err(e) => Check { name, pass: false, error: Some(format!("{e:#}")) },
        });
    }
    out
}
