use std::path::PathBuf;

use tiling_core::certcheck::{load_certificate, validate_certificate};
use tiling_core::complex::{genus, generate_theorem, is_closed_orientable_surface, octahedral_subdivide, validate_elementary_proof, MarkedComplex};
use tiling_core::excise::{can_excise, GroupSpec};
use tiling_core::grope::Grope;
use tiling_core::trimat::{contradiction_form, IncidenceMatrix};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load<T: serde::de::DeserializeOwned>(rel: &str) -> T {
    serde_json::from_str(&std::fs::read_to_string(fixtures().join(rel)).unwrap()).unwrap()
}

fn complex(name: &str) -> MarkedComplex {
    load(&format!("complexes/{name}.json"))
}

fn matrix(name: &str) -> IncidenceMatrix {
    load(&format!("matrices/{name}.json"))
}

#[test]
fn surfaces_have_the_expected_genus() {
    for (name, g) in [("tetrahedron", 0), ("one-line-sphere", 0), ("one-line-octahedron", 0), ("pappus-torus-case1", 1), ("pappus-torus-case2", 1)] {
        let mc = complex(name);
        assert!(is_closed_orientable_surface(&mc.complex).is_some(), "{name}");
        assert_eq!(genus(&mc.complex), Some(g), "{name}");
    }
}

#[test]
fn closed_surfaces_excise_over_every_group() {
    for name in ["tetrahedron", "one-line-sphere", "one-line-octahedron", "pappus-torus-case1", "pappus-torus-case2"] {
        let mc = complex(name);
        for g in [GroupSpec::complexes(), GroupSpec::finite_field(4), GroupSpec::cyclic(6)] {
            assert!(can_excise(&mc.complex, mc.marked, &g).unwrap(), "{name} over {g}");
        }
    }
}

#[test]
fn tetrahedron_proves_desargues() {
    let rep = validate_elementary_proof(&complex("tetrahedron"), &matrix("desargues"), &GroupSpec::complexes());
    assert!(rep.valid, "{:?}", rep.violations);
}

#[test]
fn one_line_sphere_and_its_subdivision() {
    let sphere = complex("one-line-sphere");
    let rep = validate_elementary_proof(&sphere, &matrix("one-line"), &GroupSpec::reals());
    assert!(rep.valid, "{:?}", rep.violations);
    assert_eq!(octahedral_subdivide(&sphere).unwrap(), complex("one-line-octahedron"));
}

#[test]
fn pappus_tori_cover_the_two_cases() {
    let rep = validate_elementary_proof(&complex("pappus-torus-case1"), &matrix("pappus12x9-case1"), &GroupSpec::complexes());
    assert!(rep.valid, "{:?}", rep.violations);
    assert_eq!(matrix("pappus12x9-case1").count(tiling_core::trimat::Tri::PlusOne), 32);
    // The second torus proves (14, 8) from the case 2 matrix: the cell is
    // moved into the corner and labels 1 and 14 (points), 1 and 8 (lines)
    // trade places.
    let target = contradiction_form(&matrix("pappus16x10-case2"), 13, 7).unwrap();
    let mc = complex("pappus-torus-case2");
    let swap = |t: usize| move |x: usize| if x == t { 1 } else if x == 1 { t } else { x };
    let mc = MarkedComplex { labeling: mc.labeling.mapped(swap(14), swap(8)), ..mc };
    let rep = validate_elementary_proof(&mc, &target, &GroupSpec::complexes());
    assert!(rep.valid, "{:?}", rep.violations);
}

#[test]
fn generated_matrices_match_the_shipped_ones() {
    assert_eq!(generate_theorem(&complex("ninegon-grope")).unwrap(), matrix("ninegon"));
    for name in ["tetrahedron", "one-line-sphere", "nongrope", "two-stage-grope"] {
        let mc = complex(name);
        let m = generate_theorem(&mc).unwrap();
        let rep = validate_elementary_proof(&mc, &m, &GroupSpec::trivial());
        assert!(rep.valid, "{name}: {:?}", rep.violations);
    }
}

#[test]
fn grope_fixtures_keep_their_gluing_history() {
    let nine: Grope = load("complexes/ninegon-grope.json");
    assert_eq!(nine.gluings.len(), 1);
    assert_eq!(nine.gluings[0].k, 3);
    let two: Grope = load("complexes/two-stage-grope.json");
    assert_eq!(two.gluings.len(), 2);
}

#[test]
fn unreal_six_gon_excises_but_is_no_proof() {
    let mc = complex("unreal-6gon");
    assert!(can_excise(&mc.complex, mc.marked, &GroupSpec::reals()).unwrap());
    assert!(!can_excise(&mc.complex, mc.marked, &GroupSpec::cyclic(3)).unwrap());
    assert!(!mc.labeling.is_bijective());
    // The vertex labels are auxiliary points the hypotheses never separate.
    let rep = validate_elementary_proof(&mc, &matrix("6gon"), &GroupSpec::reals());
    assert!(!rep.valid);
}

#[test]
fn pappus_certificate_has_three_cases() {
    let path = fixtures().join("certificates/pappus.json");
    let rep = validate_certificate(&load_certificate(&path).unwrap(), path.parent().unwrap()).unwrap();
    assert!(rep.valid);
    let kinds: Vec<&str> = rep.leaves.iter().map(|l| l.kind.as_str()).collect();
    assert_eq!(kinds.iter().filter(|k| **k == "elementary").count(), 2, "{kinds:?}");
    assert!(kinds.contains(&"axiomContradiction"), "{kinds:?}");
}
