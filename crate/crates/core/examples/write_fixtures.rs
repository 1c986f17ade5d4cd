//! Regenerates the complexes, derived matrices, configurations and
//! certificates under `fixtures/`. Run from the workspace root:
//! `cargo run -p tiling-core --example write_fixtures`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use tiling_core::complex::{bijective_labeling, generate_theorem, octahedral_subdivide, DeltaComplex, MarkedComplex};
use tiling_core::excise::GroupSpec;
use tiling_core::finfield::{Configuration, Field, ProjPoint};
use tiling_core::grope::{polygon_grope, two_stage_grope, Grope};
use tiling_core::trimat::IncidenceMatrix;

fn write(root: &Path, rel: &str, v: &impl Serialize) {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, serde_json::to_string_pretty(v).unwrap() + "\n").unwrap();
    println!("wrote {}", path.display());
}

/// Matrices keep one row per line, like the hand-written files.
fn write_matrix(root: &Path, rel: &str, m: &IncidenceMatrix) {
    let rows: Vec<String> = m
        .to_ints()
        .iter()
        .map(|r| format!("  [{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
        .collect();
    let text = format!("{{\"m\":{},\"n\":{},\"entries\":[\n{}\n]}}\n", m.rows_count(), m.cols_count(), rows.join(",\n"));
    let path = root.join(rel);
    fs::write(&path, text).unwrap();
    println!("wrote {}", path.display());
}

fn marked(v: Value) -> MarkedComplex {
    serde_json::from_value::<MarkedComplex>(v).unwrap().checked().unwrap()
}

fn labeled_grope(gr: &Grope) -> Value {
    let mc = MarkedComplex::new(gr.complex.clone(), bijective_labeling(&gr.complex, 0, 0).unwrap(), 0).unwrap();
    let mut v = serde_json::to_value(&mc).unwrap();
    v["gluings"] = serde_json::to_value(&gr.gluings).unwrap();
    v
}

fn tetrahedron() -> MarkedComplex {
    let k = DeltaComplex::from_triangles(4, &[[0, 1, 3], [0, 1, 2], [1, 2, 3], [2, 3, 0]]).unwrap();
    MarkedComplex::new(k.clone(), bijective_labeling(&k, 0, 0).unwrap(), 0).unwrap()
}

fn one_line_sphere() -> MarkedComplex {
    marked(json!({
        "vertices": 3,
        "edges": [[1, 2], [0, 1], [0, 2]],
        "faces": [[2, 1, -3], [3, -1, -2]],
        "p": {"vertices": [4, 5, 6], "edges": [1, 2, 3]},
        "l": {"faces": [1, 2], "edges": [5, 3, 4]},
        "marked": 0
    }))
}

/// Edges are P1..P9 in order; vertices P10, P11, P12.
fn pappus_case1() -> MarkedComplex {
    marked(json!({
        "vertices": 3,
        "edges": [[2, 1], [0, 2], [0, 2], [0, 2], [1, 0], [1, 0], [1, 0], [2, 1], [2, 1]],
        "faces": [[1, 7, 2], [1, 5, 4], [8, 6, 2], [9, 7, 3], [-9, -4, -6], [-8, -3, -5]],
        "p": {"vertices": [10, 11, 12], "edges": [1, 2, 3, 4, 5, 6, 7, 8, 9]},
        "l": {"faces": [1, 9, 5, 6, 8, 7], "edges": [4, 2, 2, 2, 3, 3, 3, 4, 4]},
        "marked": 0
    }))
}

/// The same torus relabeled for the second case; the marked pair is
/// (P14, L8). Edges are P2..P8, P13, P14; vertices P10, P15, P16.
fn pappus_case2() -> MarkedComplex {
    marked(json!({
        "vertices": 3,
        "edges": [[0, 2], [0, 2], [0, 2], [1, 0], [1, 0], [1, 0], [2, 1], [2, 1], [2, 1]],
        "faces": [[7, 5, 1], [7, 4, 2], [8, 6, 1], [8, 4, 3], [9, 6, 2], [9, 5, 3]],
        "p": {"vertices": [10, 15, 16], "edges": [2, 3, 4, 5, 6, 7, 8, 13, 14]},
        "l": {"faces": [5, 7, 1, 9, 6, 8], "edges": [2, 2, 2, 3, 3, 3, 10, 10, 10]},
        "marked": 5
    }))
}

/// Vertices A, B, C, O. Edges: D, G on AB; E, H on BC; F, I on CA; six
/// spokes from O to the hexagon corners A, B, C, A, B, C. Faces 0..2 are
/// the squares, face 3 the marked triangle DEF, faces 4..9 the hexagon.
fn nongrope_complex() -> DeltaComplex {
    let (a, b, c, o) = (0, 1, 2, 3);
    let mut edges = vec![[a, b], [b, c], [c, a], [a, b], [b, c], [c, a]];
    edges.extend([a, b, c, a, b, c].map(|x| [o, x]));
    let (d, e, f, g, h, i) = (1i64, 2, 3, 4, 5, 6);
    let mut faces = vec![[d, h, i], [g, e, i], [g, h, f], [d, e, f]];
    let rim = [d, e, f, d, e, f];
    for s in 0..6i64 {
        faces.push([7 + s, rim[s as usize], -(7 + (s + 1) % 6)]);
    }
    let v = json!({"vertices": 4, "edges": edges, "faces": faces});
    serde_json::from_value(v).unwrap()
}

/// Vertices A, B, C. Edges D, E on AB; P2, P4, P6 on BC; P1, P3, P5 on CA.
fn unreal_sixgon() -> Value {
    let edges = json!([[0, 1], [0, 1], [1, 2], [1, 2], [1, 2], [2, 0], [2, 0], [2, 0]]);
    let (d, e, p2, p4, p6, p1, p3, p5) = (1, 2, 3, 4, 5, 6, 7, 8);
    let faces = json!([
        [d, p2, p1],
        [d, p4, p3],
        [d, p6, p5],
        [e, p2, p3],
        [e, p4, p5],
        [e, p6, p1],
        [e, p2, p1]
    ]);
    json!({
        "vertices": 3,
        "edges": edges,
        "faces": faces,
        "p": {"vertices": [9, 10, 11], "edges": [7, 8, 2, 4, 6, 1, 3, 5]},
        "l": {"faces": [4, 5, 6, 7, 8, 9, 1], "edges": [4, 1, 3, 3, 3, 2, 2, 2]},
        "marked": 6
    })
}

/// Rows P1..P6, D, E; columns L1 = P2 P3 E, L2 = P1 P3 P5, L3 = P2 P4 P6,
/// L4 = P1 P2 D, L5 = P3 P4 D, L6 = P5 P6 D, L7 = P4 P5 E, L8 = P6 P1 E.
/// The -1 entries keep the six points distinct.
fn sixgon_matrix() -> IncidenceMatrix {
    let on: [&[usize]; 8] = [&[2, 3, 8], &[1, 3, 5], &[2, 4, 6], &[1, 2, 7], &[3, 4, 7], &[5, 6, 7], &[4, 5, 8], &[6, 1, 8]];
    let off: [&[usize]; 8] = [&[], &[2, 4, 6], &[1, 3, 5], &[3, 4, 5, 6], &[5, 6], &[], &[], &[]];
    let mut rows = vec![vec![0i64; 8]; 8];
    for (l, pts) in on.iter().enumerate() {
        for &p in pts.iter() {
            rows[p - 1][l] = 1;
        }
        for &p in off[l] {
            rows[p - 1][l] = -1;
        }
    }
    rows[0][0] = 0;
    IncidenceMatrix::from_ints(&rows).unwrap()
}

fn sixgon_config() -> Configuration {
    let f = Field::new(3).unwrap();
    let pts: Vec<ProjPoint> =
        [(0, 0), (1, 0), (0, 1), (1, 2), (0, 2), (1, 1)].iter().map(|&(x, y)| f.affine(x, y).unwrap()).collect();
    let j = |a: usize, b: usize| f.join(pts[a - 1], pts[b - 1]).unwrap();
    let d = f.meet(j(1, 2), j(3, 4)).unwrap();
    let e = f.meet(j(2, 3), j(4, 5)).unwrap();
    let mut points = pts.clone();
    points.extend([d, e]);
    let lines = vec![j(2, 3), j(1, 3), j(2, 4), j(1, 2), j(3, 4), j(5, 6), j(4, 5), j(6, 1)];
    Configuration { q: 3, points, lines }
}

fn elementary(complex: &str, target: Option<[usize; 2]>) -> Value {
    let mut v = json!({"kind": "elementary", "complex": complex});
    if let Some(t) = target {
        v["target"] = json!(t);
    }
    json!({"leaf": v})
}

fn split(cell: [usize; 2], minus: Value, plus: Value) -> Value {
    json!({"split": {"cell": cell, "minus": minus, "plus": plus}})
}

fn read_matrix(root: &Path, rel: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(root.join(rel)).unwrap()).unwrap()
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let root = root.as_path();

    let tet = tetrahedron();
    write(root, "complexes/tetrahedron.json", &tet);
    write_matrix(root, "matrices/desargues.json", &generate_theorem(&tet).unwrap());

    let sphere = one_line_sphere();
    write(root, "complexes/one-line-sphere.json", &sphere);
    write(root, "complexes/one-line-octahedron.json", &octahedral_subdivide(&sphere).unwrap());

    write(root, "complexes/pappus-torus-case1.json", &pappus_case1());
    write(root, "complexes/pappus-torus-case2.json", &pappus_case2());

    let reals = GroupSpec::reals();
    let ninegon = polygon_grope(3, &reals).unwrap();
    write(root, "complexes/ninegon-grope.json", &labeled_grope(&ninegon));
    write_matrix(root, "matrices/ninegon.json", &generate_theorem(&serde_json::from_value(labeled_grope(&ninegon)).unwrap()).unwrap());
    write(root, "complexes/two-stage-grope.json", &labeled_grope(&two_stage_grope(3, &reals).unwrap()));

    let ng = nongrope_complex();
    write(root, "complexes/nongrope.json", &MarkedComplex::new(ng.clone(), bijective_labeling(&ng, 3, 0).unwrap(), 3).unwrap());

    write(root, "complexes/unreal-6gon.json", &marked(unreal_sixgon()));
    write_matrix(root, "matrices/6gon.json", &sixgon_matrix());
    write(root, "configs/6gon-f3.json", &sixgon_config());

    let pappus_aux = json!([
        {"kind": "pointOnTwoLines", "c1": 2, "c2": 3},
        {"kind": "pointOnTwoLines", "c1": 3, "c2": 4},
        {"kind": "pointOnTwoLines", "c1": 2, "c2": 4},
        {"kind": "pointOnTwoLines", "c1": 1, "c2": 9},
        {"kind": "lineThroughTwoPoints", "r1": 13, "r2": 8},
        {"kind": "pointOnTwoLines", "c1": 6, "c2": 10},
        {"kind": "pointOnTwoLines", "c1": 3, "c2": 10},
        {"kind": "pointOnTwoLines", "c1": 2, "c2": 10}
    ]);
    let tree = split(
        [10, 4],
        elementary("../complexes/pappus-torus-case1.json", None),
        split(
            [10, 10],
            elementary("../complexes/pappus-torus-case2.json", Some([14, 8])),
            split([1, 1], json!({"leaf": {"kind": "axiomContradiction"}}), json!({"leaf": {"kind": "tautology"}})),
        ),
    );
    let cert = |base: Value, aux: Value, tree: Value, g: &GroupSpec| {
        json!({"baseMatrix": base, "auxSteps": aux, "caseTree": tree, "groupSpec": g})
    };
    write(
        root,
        "certificates/pappus.json",
        &cert(read_matrix(root, "matrices/pappus9x9.json"), pappus_aux, tree, &GroupSpec::complexes()),
    );
    write(
        root,
        "certificates/desargues.json",
        &cert(
            read_matrix(root, "matrices/desargues.json"),
            json!([]),
            elementary("../complexes/tetrahedron.json", None),
            &GroupSpec::complexes(),
        ),
    );
    write(
        root,
        "certificates/one-line.json",
        &cert(
            read_matrix(root, "matrices/one-line.json"),
            json!([]),
            elementary("../complexes/one-line-sphere.json", None),
            &GroupSpec::complexes(),
        ),
    );
    write(
        root,
        "certificates/ninegon.json",
        &cert(
            read_matrix(root, "matrices/ninegon.json"),
            json!([]),
            elementary("../complexes/ninegon-grope.json", None),
            &GroupSpec::reals(),
        ),
    );
}
