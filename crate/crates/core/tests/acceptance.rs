//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tiling_core::certcheck::{load_certificate, validate_certificate};
use tiling_core::complex::{generate_theorem, random_closed_surface, MarkedComplex};
use tiling_core::excise::{can_excise, oracle_can_excise, witness_cochain, GroupSpec, Torsion};
use tiling_core::finfield::{Configuration, Field};
use tiling_core::grope::{fan_disc, glue_unchecked, grope_base, random_grope, two_face_sphere};
use tiling_core::realize::{check_theorem, conclusion_holds, realize_from_cochain, verify_configuration, Outcome, SearchOptions};
use tiling_core::skew::{
    desargues_soundness_sample, evaluate_boundary, free_faces, menelaus_check, pappus_counterexample, random_flat_values,
    random_menelaus_instance, Quaternion, TriangulatedDisc,
};
use tiling_core::trimat::{propagate, IncidenceMatrix, Sweeps, Tri};

type Res = Result<String, String>;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load<T: serde::de::DeserializeOwned>(rel: &str) -> T {
    let path = fixtures().join(rel);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn matrix(name: &str) -> IncidenceMatrix {
    load(&format!("matrices/{name}.json"))
}

fn complex(name: &str) -> MarkedComplex {
    load(&format!("complexes/{name}.json"))
}

fn opts() -> SearchOptions {
    let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    SearchOptions { symmetry: true, jobs, ..SearchOptions::default() }
}

fn outcome(m: &IncidenceMatrix, q: u32) -> Outcome {
    check_theorem(m, q, &opts()).expect("search runs").outcome
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn seeds(s: &[(usize, usize, i64)]) -> Vec<(usize, usize, Tri)> {
    s.iter().map(|&(i, j, v)| (i - 1, j - 1, Tri::from_i64(v).unwrap())).collect()
}

fn criterion_01_golden_propagation() -> Res {
    let cases: [(&str, &[(usize, usize, i64)], &str); 3] = [
        ("pappus12x9", &[(10, 4, -1)], "pappus12x9-case1"),
        ("pappus16x10", &[(1, 1, -1), (10, 10, -1)], "pappus16x10-case2"),
        ("pappus16x10", &[(1, 1, -1), (10, 10, 1)], "pappus16x10-case3"),
    ];
    for (base, s, want) in cases {
        let (m, want_m) = (matrix(base), matrix(want));
        for sweeps in [Sweeps::Limit(3), Sweeps::Fixpoint] {
            let got = propagate(&m, &seeds(s), sweeps).map_err(|e| e.to_string())?;
            ensure(got == want_m, || format!("{want} with {sweeps:?}: {} cells differ", got.diff(&want_m).len()))?;
        }
    }
    let c2 = matrix("pappus16x10-case2");
    let zeros: Vec<_> = c2.zero_cells().iter().map(|&(i, j)| (i + 1, j + 1)).collect();
    ensure(zeros.len() == 3, || format!("case 2 residual zeros {zeros:?}"))?;
    ensure(matrix("pappus16x10-case3").get(9, 3) == Tri::MinusOne, || "case 3 (10,4) is not -1".into())?;
    Ok(format!("3 matrices cell-exact after 3 sweeps and at fixpoint; case 2 zeros {zeros:?}"))
}

fn criterion_02_verdicts() -> Res {
    let want: [(&str, u32, bool); 9] = [
        ("q-points-2", 2, true),
        ("q-points-2", 3, false),
        ("q-points-2", 4, false),
        ("warmup", 2, true),
        ("warmup", 3, true),
        ("warmup", 5, true),
        ("fano", 2, false),
        ("fano", 3, true),
        ("fano", 5, true),
    ];
    for (name, q, truth) in want {
        let m = matrix(name);
        let o = outcome(&m, q);
        let ok = match (&o, truth) {
            (Outcome::True, true) => true,
            (Outcome::Counterexample(c), false) => verify_configuration(&m, c).unwrap() && !conclusion_holds(c).unwrap(),
            _ => false,
        };
        ensure(ok, || format!("{name} over F{q}: {}", o.name()))?;
    }
    Ok("9 verdicts match; counterexamples re-verified".into())
}

fn criterion_03_six_gon() -> Res {
    let m = matrix("6gon");
    let c: Configuration = load("configs/6gon-f3.json");
    let f = Field::new(3).unwrap();
    let c = c.normalized(&f).unwrap();
    let printed = [(0, 0), (1, 0), (0, 1), (1, 2), (0, 2), (1, 1)];
    for (i, &(x, y)) in printed.iter().enumerate() {
        ensure(c.points[i] == f.affine(x, y).unwrap(), || format!("point {} is {:?}, expected ({x},{y})", i + 1, c.points[i]))?;
    }
    ensure(verify_configuration(&m, &c).unwrap(), || "hypotheses fail".into())?;
    ensure(!conclusion_holds(&c).unwrap(), || "conclusion holds".into())?;
    ensure(!f.incident(c.points[0], c.lines[0]), || "P1 on L1".into())?;
    Ok("printed points satisfy the hypotheses, P1 not on L1".into())
}

const FIXTURE_COMPLEXES: [&str; 6] =
    ["tetrahedron", "one-line-octahedron", "pappus-torus-case1", "ninegon-grope", "two-stage-grope", "nongrope"];

fn criterion_04_excision_vs_oracle() -> Res {
    let mut checks = 0;
    for name in FIXTURE_COMPLEXES {
        let k = complex(name).complex;
        for face in 0..k.face_count() {
            for n in 2..=8 {
                let fast = can_excise(&k, face, &GroupSpec::cyclic(n)).map_err(|e| e.to_string())?;
                let slow = oracle_can_excise(&k, face, n).map_err(|e| e.to_string())?;
                ensure(fast == slow, || format!("{name} face {face} Z/{n}: fast {fast}, oracle {slow}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (complex, face, n) triples agree"))
}

/// Excision claim, failing cochain of the given modulus, and its
/// realization over F_q checked against the generated theorem.
fn realizes(mc: &MarkedComplex, g: &GroupSpec, modulus: u64, q: u32) -> Result<(), String> {
    let u = witness_cochain(&mc.complex, mc.marked, g).map_err(|e| e.to_string())?.ok_or("no failing cochain")?;
    ensure(u.modulus == modulus, || format!("witness has modulus {}, expected {modulus}", u.modulus))?;
    let c = realize_from_cochain(mc, &u, q).map_err(|e| e.to_string())?;
    let m = generate_theorem(mc).map_err(|e| e.to_string())?;
    ensure(verify_configuration(&m, &c).unwrap(), || "realized configuration breaks a hypothesis".into())?;
    ensure(!conclusion_holds(&c).unwrap(), || "realized configuration satisfies the conclusion".into())
}

fn criterion_05_ninegon() -> Res {
    let mc = complex("ninegon-grope");
    let ex = |q| can_excise(&mc.complex, mc.marked, &GroupSpec::finite_field(q)).unwrap();
    ensure(ex(2) && ex(8) && !ex(4), || format!("F2* {}, F8* {}, F4* {}", ex(2), ex(8), ex(4)))?;
    realizes(&mc, &GroupSpec::finite_field(4), 3, 4)?;
    let m = generate_theorem(&mc).unwrap();
    let o = outcome(&m, 2);
    ensure(o == Outcome::True, || format!("generated theorem over F2: {}", o.name()))?;
    Ok("excisable over F2*, F8*; Z/3 witness realizes over F4; True over F2".into())
}

fn criterion_06_nongrope() -> Res {
    let mc = complex("nongrope");
    let r = can_excise(&mc.complex, mc.marked, &GroupSpec::reals()).unwrap();
    let f5 = can_excise(&mc.complex, mc.marked, &GroupSpec::finite_field(5)).unwrap();
    ensure(r && !f5, || format!("R* {r}, F5* {f5}"))?;
    realizes(&mc, &GroupSpec::cyclic(4), 4, 5)?;
    Ok("excisable over R*, not F5*; Z/4 witness realizes over F5".into())
}

fn random_spec<R: Rng>(rng: &mut R) -> GroupSpec {
    let infinite = rng.gen_bool(0.5);
    if rng.gen_bool(0.2) {
        return GroupSpec::new(infinite, Torsion::Full).unwrap();
    }
    let orders = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(1..=30)).collect();
    GroupSpec::new(infinite, Torsion::Finite(orders)).unwrap()
}

fn criterion_07_surfaces() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checks = 0;
    for s in 0..50 {
        let genus = rng.gen_range(0..=2);
        let min_faces = rng.gen_range(2..=30);
        let k = random_closed_surface(&mut rng, genus, min_faces);
        ensure(k.face_count() <= 40, || format!("surface {s} has {} faces", k.face_count()))?;
        for _ in 0..20 {
            let g = random_spec(&mut rng);
            for face in 0..k.face_count() {
                ensure(can_excise(&k, face, &g).unwrap(), || format!("surface {s} (genus {genus}) face {face} over {g}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (surface, spec, face) checks excisable"))
}

fn criterion_08_gropes() -> Res {
    let specs: [(&str, GroupSpec); 6] = [
        ("R*", GroupSpec::reals()),
        ("F4*", GroupSpec::finite_field(4)),
        ("F5*", GroupSpec::finite_field(5)),
        ("F7*", GroupSpec::finite_field(7)),
        ("F8*", GroupSpec::finite_field(8)),
        ("F3(X)*", GroupSpec::rational_functions(3)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut built = 0;
    for i in 0..100 {
        let (name, g) = &specs[i % specs.len()];
        let ks: Vec<u64> = [3, 5, 7].into_iter().filter(|&k| g.torsion_coprime(k)).collect();
        ensure(!ks.is_empty(), || format!("no admissible k over {name}"))?;
        let gr = random_grope(&mut rng, 3, &ks, g).map_err(|e| e.to_string())?;
        ensure(gr.complexity() <= 3, || format!("grope {i} has {} gluings", gr.complexity()))?;
        for face in 0..gr.complex.face_count() {
            ensure(can_excise(&gr.complex, face, g).unwrap(), || format!("grope {i} over {name}: face {face}"))?;
        }
        built += 1;
    }
    // Gluing with k = p for a prime p dividing the torsion is exactly what
    // the torsion condition forbids; face 0 then stops being excisable.
    for (name, g) in &specs {
        let n = g.exponent().unwrap();
        let p = (2..=n).find(|d| n % d == 0).ok_or_else(|| format!("{name} has no torsion"))?;
        ensure(!g.torsion_coprime(p), || format!("{p} is coprime to {name}"))?;
        let base = grope_base(two_face_sphere()).unwrap();
        let bad = glue_unchecked(&base, 1, &fan_disc(3 * p as usize), p, 0).unwrap();
        ensure(!can_excise(&bad.complex, 0, g).unwrap(), || format!("k = {p} over {name} still excises"))?;
    }
    Ok(format!("{built} random gropes excise everywhere; a k = p gluing breaks each of {} specs", specs.len()))
}

fn criterion_09_certificates() -> Res {
    let dir = fixtures().join("certificates");
    let mut lines = Vec::new();
    for name in ["pappus", "desargues", "one-line", "ninegon"] {
        let path = dir.join(format!("{name}.json"));
        let cert = load_certificate(&path).map_err(|e| e.to_string())?;
        let rep = validate_certificate(&cert, &dir).map_err(|e| e.to_string())?;
        ensure(rep.valid, || format!("{name} invalid: {:?}", rep.leaves.iter().filter(|l| !l.pass).collect::<Vec<_>>()))?;
        for q in [2u32, 3] {
            let mut c = cert.clone();
            c.group_spec = GroupSpec::finite_field(q as u64);
            let rep = validate_certificate(&c, &dir).map_err(|e| e.to_string())?;
            ensure(rep.valid, || format!("{name} invalid over F{q}*"))?;
            // No configuration at all means the theorem holds vacuously.
            let o = outcome(&cert.base_matrix, q);
            ensure(matches!(o, Outcome::True | Outcome::Vacuous), || format!("{name} base matrix over F{q}: {}", o.name()))?;
            lines.push(format!("{name}/F{q}:{}", o.name()));
        }
    }
    Ok(format!("4 certificates valid; over F2*, F3*: {}", lines.join(" ")))
}

fn criterion_10_noncommutative() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut collinear = 0;
    for t in 0..1000 {
        let [a, b, c, d, e, f] = random_menelaus_instance(&mut rng, t % 2 == 0);
        let rep = menelaus_check(&a, &b, &c, &d, &e, &f).map_err(|e| format!("instance {t}: {e}"))?;
        ensure(rep.agrees(), || format!("instance {t}: product {} vs collinear {}", rep.product, rep.collinear))?;
        collinear += rep.collinear as usize;
    }
    let cex = pappus_counterexample(&Quaternion::i(), &Quaternion::j()).map_err(|e| e.to_string())?;
    let viol = cex.configuration.violations(&matrix("pappus9x9"));
    ensure(viol.is_empty(), || format!("Pappus hypotheses broken at {viol:?}"))?;
    ensure(cex.conclusion_product == Quaternion::from_ints(-1, 0, 0, 0), || format!("product {}", cex.conclusion_product))?;
    ensure(!cex.configuration.conclusion_holds(), || "P1 on L1".into())?;
    let s = desargues_soundness_sample(&mut rng, 100);
    ensure(s.all_passed(), || format!("Desargues sample {s:?}"))?;
    for t in 0..200 {
        let faces = rng.gen_range(1..=50);
        let d = TriangulatedDisc::random(&mut rng, faces);
        let n = d.complex.face_count();
        let free = free_faces(&d).len();
        ensure(n <= 1 || free >= 2, || format!("disc {t}: {n} faces, {free} free"))?;
        let u = random_flat_values(&mut rng, &d);
        let w = evaluate_boundary(&d, &u).map_err(|e| format!("disc {t}: {e}"))?;
        ensure(w.is_one(), || format!("disc {t}: boundary word {w}"))?;
    }
    Ok(format!("1000 Menelaus ({collinear} collinear), Pappus product -1, Desargues 100/100, 200 discs"))
}

fn criterion_11_master() -> Res {
    let pairs: [(&str, &[u32]); 5] = [
        ("tetrahedron", &[2, 3, 4, 5]),
        ("one-line-sphere", &[2, 3, 4, 5, 7]),
        ("nongrope", &[2, 3, 4, 5, 9]),
        ("ninegon-grope", &[2, 3, 4, 7]),
        ("two-stage-grope", &[2, 3, 4, 7]),
    ];
    let mut summary = Vec::new();
    for (name, qs) in pairs {
        let mc = complex(name);
        ensure(mc.labeling.is_bijective(), || format!("{name} is not bijectively labeled"))?;
        let m = generate_theorem(&mc).map_err(|e| e.to_string())?;
        for &q in qs {
            let g = GroupSpec::finite_field(q as u64);
            if can_excise(&mc.complex, mc.marked, &g).unwrap() {
                let o = outcome(&m, q);
                ensure(o == Outcome::True, || format!("{name} excises over F{q}* but search says {}", o.name()))?;
                summary.push(format!("{name}/F{q}:T"));
            } else {
                let u = witness_cochain(&mc.complex, mc.marked, &g).unwrap().ok_or_else(|| format!("{name}/F{q}: no cochain"))?;
                let c = realize_from_cochain(&mc, &u, q).map_err(|e| format!("{name}/F{q}: {e}"))?;
                ensure(verify_configuration(&m, &c).unwrap() && !conclusion_holds(&c).unwrap(), || format!("{name}/F{q}: bad realization"))?;
                summary.push(format!("{name}/F{q}:C"));
            }
        }
    }
    Ok(summary.join(" "))
}

fn main() {
    let criteria: [(&str, fn() -> Res); 11] = [
        ("1 golden propagation", criterion_01_golden_propagation),
        ("2 finite-field verdicts", criterion_02_verdicts),
        ("3 6-gon counterexample", criterion_03_six_gon),
        ("4 excision vs oracle", criterion_04_excision_vs_oracle),
        ("5 9-gon grope", criterion_05_ninegon),
        ("6 non-grope", criterion_06_nongrope),
        ("7 surface excision", criterion_07_surfaces),
        ("8 grope excision", criterion_08_gropes),
        ("9 certificates", criterion_09_certificates),
        ("10 noncommutative suite", criterion_10_noncommutative),
        ("11 master cross-check", criterion_11_master),
    ];
    let only: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, f) in criteria {
        if only.as_deref().is_some_and(|o| !name.contains(o)) {
            continue;
        }
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS criterion {name} ({secs:.1}s): {detail}"),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {e}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
