//! Two-dimensional Δ-complexes with point/line labelings.
//!
//! Faces are closed walks of three directed edges, so vertices may be
//! identified (the Pappus torus has three vertices and nine edges). Vertex,
//! edge and face ids are 0-based. Point and line labels are 1-based matrix
//! indices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::excise::{can_excise, GroupSpec};
use crate::trimat::{IncidenceMatrix, Tri};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("edge {edge} has endpoint {vertex} but there are only {count} vertices")]
    BadVertex { edge: usize, vertex: usize, count: usize },
    #[error("face {face} references missing edge {edge}")]
    BadEdge { face: usize, edge: usize },
    #[error("face {0} does not close up head-to-tail")]
    OpenFace(usize),
    #[error("complex is not simplicial: {0}")]
    NotSimplicial(String),
    #[error("face {0} does not exist")]
    FaceNotFound(usize),
    #[error("labeling does not cover the complex: {0}")]
    LabelShape(String),
    #[error("labeling is not bijective: {0}")]
    NotBijective(String),
    #[error("cell ({row}, {col}) is required to be both +1 and -1")]
    LabelConflict { row: usize, col: usize },
    #[error("no edge with point 1 lies in a face with line 1")]
    MarkedPairMissing,
    #[error("face {0} has a repeated vertex")]
    DegenerateFace(usize),
}

/// An edge traversed along (`forward`) or against its stored direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirEdge {
    pub edge: usize,
    pub forward: bool,
}

impl DirEdge {
    pub fn fwd(edge: usize) -> Self {
        DirEdge { edge, forward: true }
    }

    pub fn rev(edge: usize) -> Self {
        DirEdge { edge, forward: false }
    }

    pub fn reversed(self) -> Self {
        DirEdge { edge: self.edge, forward: !self.forward }
    }

    /// Signed 1-based form used in JSON: `+(id+1)` or `-(id+1)`.
    pub fn signed(self) -> i64 {
        let k = self.edge as i64 + 1;
        if self.forward {
            k
        } else {
            -k
        }
    }

    pub fn from_signed(v: i64) -> Option<Self> {
        match v {
            0 => None,
            v if v > 0 => Some(DirEdge::fwd(v as usize - 1)),
            v => Some(DirEdge::rev((-v) as usize - 1)),
        }
    }
}

impl Serialize for DirEdge {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(self.signed())
    }
}

impl<'de> Deserialize<'de> for DirEdge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        DirEdge::from_signed(v).ok_or_else(|| serde::de::Error::custom("edge reference 0 is not allowed"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaComplex {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    faces: Vec<[DirEdge; 3]>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    simplicial: bool,
}

#[derive(Deserialize)]
struct ComplexJson {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    faces: Vec<[DirEdge; 3]>,
    #[serde(default)]
    simplicial: bool,
}

impl<'de> Deserialize<'de> for DeltaComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = ComplexJson::deserialize(d)?;
        let k = DeltaComplex::new(raw.vertices, raw.edges, raw.faces).map_err(serde::de::Error::custom)?;
        if raw.simplicial {
            k.into_simplicial().map_err(serde::de::Error::custom)
        } else {
            Ok(k)
        }
    }
}

impl DeltaComplex {
    pub fn new(vertices: usize, edges: Vec<[usize; 2]>, faces: Vec<[DirEdge; 3]>) -> Result<Self, ComplexError> {
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                if v >= vertices {
                    return Err(ComplexError::BadVertex { edge: i, vertex: v, count: vertices });
                }
            }
        }
        let k = DeltaComplex { vertices, edges, faces, simplicial: false };
        for (f, face) in k.faces.iter().enumerate() {
            for d in face {
                if d.edge >= k.edges.len() {
                    return Err(ComplexError::BadEdge { face: f, edge: d.edge });
                }
            }
            for i in 0..3 {
                if k.head(face[i]) != k.tail(face[(i + 1) % 3]) {
                    return Err(ComplexError::OpenFace(f));
                }
            }
        }
        Ok(k)
    }

    /// Builds a complex from vertex triples, creating one edge per unordered
    /// vertex pair (directed from the smaller id).
    pub fn from_triangles(vertices: usize, tris: &[[usize; 3]]) -> Result<Self, ComplexError> {
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut faces = Vec::with_capacity(tris.len());
        for t in tris {
            let mut face = [DirEdge::fwd(0); 3];
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *ids.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                face[i] = DirEdge { edge: id, forward: a < b };
            }
            faces.push(face);
        }
        DeltaComplex::new(vertices, edges, faces)
    }

    /// Marks the complex as simplicial after checking that edges have
    /// distinct endpoints, distinct edges have distinct endpoint pairs, and
    /// distinct faces have distinct vertex sets.
    pub fn into_simplicial(mut self) -> Result<Self, ComplexError> {
        if let Some(why) = self.simplicial_defect() {
            return Err(ComplexError::NotSimplicial(why));
        }
        self.simplicial = true;
        Ok(self)
    }

    pub fn is_simplicial(&self) -> bool {
        self.simplicial
    }

    /// Why the complex fails to be a simplicial complex, if it does.
    pub fn simplicial_defect(&self) -> Option<String> {
        let mut pairs = BTreeSet::new();
        for (i, &[t, h]) in self.edges.iter().enumerate() {
            if t == h {
                return Some(format!("edge {i} is a loop"));
            }
            if !pairs.insert((t.min(h), t.max(h))) {
                return Some(format!("edge {i} duplicates another edge"));
            }
        }
        let mut triples = BTreeSet::new();
        for f in 0..self.faces.len() {
            let mut v = self.face_vertices(f);
            v.sort_unstable();
            if v[0] == v[1] || v[1] == v[2] {
                return Some(format!("face {f} has a repeated vertex"));
            }
            if !triples.insert(v) {
                return Some(format!("face {f} duplicates another face"));
            }
        }
        None
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[DirEdge; 3]] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> [DirEdge; 3] {
        self.faces[f]
    }

    pub fn tail(&self, d: DirEdge) -> usize {
        let [t, h] = self.edges[d.edge];
        if d.forward {
            t
        } else {
            h
        }
    }

    pub fn head(&self, d: DirEdge) -> usize {
        let [t, h] = self.edges[d.edge];
        if d.forward {
            h
        } else {
            t
        }
    }

    /// Vertices `a, b, c` of a face whose walk is `ab, bc, ca`.
    pub fn face_vertices(&self, f: usize) -> [usize; 3] {
        self.faces[f].map(|d| self.tail(d))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Number of face sides on each edge (an edge used twice by one face
    /// counts twice).
    pub fn edge_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.edges.len()];
        for face in &self.faces {
            for d in face {
                deg[d.edge] += 1;
            }
        }
        deg
    }

    /// Drops one face; edges and vertices are kept.
    pub fn without_face(&self, f: usize) -> Result<DeltaComplex, ComplexError> {
        if f >= self.faces.len() {
            return Err(ComplexError::FaceNotFound(f));
        }
        let mut out = self.clone();
        out.faces.remove(f);
        out.simplicial = false;
        Ok(out)
    }

    pub(crate) fn push_face(&mut self, face: [DirEdge; 3]) {
        self.faces.push(face);
    }

    pub(crate) fn push_edge(&mut self, t: usize, h: usize) -> usize {
        self.edges.push([t, h]);
        self.edges.len() - 1
    }

    pub(crate) fn push_vertex(&mut self) -> usize {
        self.vertices += 1;
        self.vertices - 1
    }
}

impl fmt::Display for DeltaComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V={} E={} F={} chi={}", self.vertices, self.edges.len(), self.faces.len(), self.euler_characteristic())
    }
}

/// Returns, per face, whether its stored walk agrees with a coherent
/// orientation. `None` unless every edge has exactly two sides traversed in
/// opposite directions (after flipping faces) and every vertex link is one
/// cycle.
pub fn is_closed_orientable_surface(k: &DeltaComplex) -> Option<Vec<bool>> {
    if k.faces.is_empty() || k.edge_degrees().iter().any(|&d| d != 2) {
        return None;
    }
    let orient = orient_faces(k)?;
    links_are_cycles(k).then_some(orient)
}

/// Coherent orientation of a complex whose edges lie on at most two face
/// sides: the two sides of an interior edge must run opposite once faces are
/// flipped. `true` keeps the stored walk.
pub(crate) fn orient_faces(k: &DeltaComplex) -> Option<Vec<bool>> {
    // Sides of each edge: (face, slot in face, forward).
    let mut sides: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); k.edges.len()];
    for (f, face) in k.faces.iter().enumerate() {
        for (slot, d) in face.iter().enumerate() {
            sides[d.edge].push((f, slot, d.forward));
        }
    }
    if sides.iter().any(|s| s.len() > 2) {
        return None;
    }
    let mut orient: Vec<Option<bool>> = vec![None; k.faces.len()];
    for start in 0..k.faces.len() {
        if orient[start].is_some() {
            continue;
        }
        orient[start] = Some(true);
        let mut stack = vec![start];
        while let Some(f) = stack.pop() {
            let of = orient[f].expect("set");
            for (slot, d) in k.faces[f].iter().enumerate() {
                let here = d.forward == of;
                for &(g, gslot, gfwd) in &sides[d.edge] {
                    if (g, gslot) == (f, slot) {
                        continue;
                    }
                    let want = gfwd ^ here;
                    match orient[g] {
                        None => {
                            orient[g] = Some(want);
                            stack.push(g);
                        }
                        Some(o) if o != want => return None,
                        _ => {}
                    }
                }
            }
        }
    }
    Some(orient.into_iter().map(|o| o.expect("all faces visited")).collect())
}

/// Every vertex link is a single cycle. Link nodes are edge ends at the
/// vertex; each face corner joins the two edge ends meeting there.
fn links_are_cycles(k: &DeltaComplex) -> bool {
    // End id: 2*edge + (0 for tail, 1 for head).
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for face in &k.faces {
        for i in 0..3 {
            let incoming = face[(i + 2) % 3];
            let outgoing = face[i];
            let end_in = 2 * incoming.edge + usize::from(incoming.forward);
            let end_out = 2 * outgoing.edge + usize::from(!outgoing.forward);
            adj.entry(end_in).or_default().push(end_out);
            adj.entry(end_out).or_default().push(end_in);
        }
    }
    let mut ends_at: Vec<Vec<usize>> = vec![Vec::new(); k.vertices];
    for (e, &[t, h]) in k.edges.iter().enumerate() {
        ends_at[t].push(2 * e);
        ends_at[h].push(2 * e + 1);
    }
    for ends in ends_at {
        if ends.is_empty() {
            return false;
        }
        if ends.iter().any(|e| adj.get(e).map_or(0, Vec::len) != 2) {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![ends[0]];
        while let Some(x) = stack.pop() {
            if seen.insert(x) {
                stack.extend(adj[&x].iter().copied());
            }
        }
        if seen.len() != ends.len() {
            return false;
        }
    }
    true
}

/// Genus of a closed orientable surface from its Euler characteristic.
pub fn genus(k: &DeltaComplex) -> Option<i64> {
    is_closed_orientable_surface(k)?;
    let chi = k.euler_characteristic();
    (chi <= 2 && chi % 2 == 0).then_some((2 - chi) / 2)
}

/// Closed orientable surface of genus `g` with few cells: the tetrahedron
/// for `g = 0`, otherwise the `4g`-gon with sides `a1 b1 a1^-1 b1^-1 ...`
/// fanned from a center (2 vertices, `6g` edges, `4g` faces).
pub fn standard_surface(genus: usize) -> DeltaComplex {
    if genus == 0 {
        return DeltaComplex::from_triangles(4, &[[0, 1, 2], [0, 3, 1], [1, 3, 2], [2, 3, 0]]).expect("tetrahedron");
    }
    // Vertex 0 is the polygon corner class, vertex 1 the center.
    let sides = 4 * genus;
    let mut edges = vec![[0, 0]; 2 * genus];
    let spoke0 = edges.len();
    edges.extend((0..sides).map(|_| [0, 1]));
    let faces = (0..sides)
        .map(|i| {
            let letter = 2 * (i / 4) + i % 2;
            let side = if i % 4 < 2 { DirEdge::fwd(letter) } else { DirEdge::rev(letter) };
            [side, DirEdge::fwd(spoke0 + (i + 1) % sides), DirEdge::rev(spoke0 + i)]
        })
        .collect();
    DeltaComplex::new(2, edges, faces).expect("standard polygon closes up")
}

/// Splits a face into three around a new vertex. The new faces replace `f`
/// and are appended; returns the ids of the three faces.
pub fn stellar_subdivide(k: &mut DeltaComplex, f: usize) -> [usize; 3] {
    let walk = k.faces[f];
    let [a, b, c] = k.face_vertices(f);
    let x = k.push_vertex();
    let [ax, bx, cx] = [a, b, c].map(|v| k.push_edge(v, x));
    k.faces[f] = [walk[0], DirEdge::fwd(bx), DirEdge::rev(ax)];
    k.push_face([walk[1], DirEdge::fwd(cx), DirEdge::rev(bx)]);
    k.push_face([walk[2], DirEdge::fwd(ax), DirEdge::rev(cx)]);
    k.simplicial = false;
    [f, k.faces.len() - 2, k.faces.len() - 1]
}

/// Splits an edge at a new vertex and each face side on it in two. Refuses
/// (returns `false`) when a face uses the edge more than once.
pub fn subdivide_edge(k: &mut DeltaComplex, e: usize) -> bool {
    let users: Vec<(usize, usize)> = k
        .faces
        .iter()
        .enumerate()
        .flat_map(|(f, w)| w.iter().enumerate().filter(move |(_, d)| d.edge == e).map(move |(s, _)| (f, s)))
        .collect();
    let mut seen = BTreeSet::new();
    if users.iter().any(|&(f, _)| !seen.insert(f)) {
        return false;
    }
    let [t, h] = k.edges[e];
    let m = k.push_vertex();
    k.edges[e] = [t, m];
    let e2 = k.push_edge(m, h);
    for (f, slot) in users {
        let walk = k.faces[f];
        let d = walk[slot];
        let (next, prev) = (walk[(slot + 1) % 3], walk[(slot + 2) % 3]);
        let opp = k.head(next);
        // Directed halves from the face's tail of `d` to its head.
        let (first, second) = if d.forward { (DirEdge::fwd(e), DirEdge::fwd(e2)) } else { (DirEdge::rev(e2), DirEdge::rev(e)) };
        let spoke = k.push_edge(m, opp);
        k.faces[f] = [first, DirEdge::fwd(spoke), prev];
        k.push_face([second, next, DirEdge::rev(spoke)]);
    }
    k.simplicial = false;
    true
}

/// Random closed orientable surface of the given genus with at least
/// `min_faces` faces (and fewer than `min_faces + 2`), grown from
/// [`standard_surface`] by random stellar and edge subdivisions.
pub fn random_closed_surface<R: rand::Rng + ?Sized>(rng: &mut R, genus: usize, min_faces: usize) -> DeltaComplex {
    let mut k = standard_surface(genus);
    while k.face_count() < min_faces {
        if rng.gen_bool(0.5) {
            let f = rng.gen_range(0..k.face_count());
            stellar_subdivide(&mut k, f);
        } else {
            let e = rng.gen_range(0..k.edge_count());
            subdivide_edge(&mut k, e);
        }
    }
    k
}

/// Point labels on vertices and edges, line labels on faces and edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    pub p: PointLabels,
    pub l: LineLabels,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointLabels {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineLabels {
    pub faces: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Labeling {
    fn check_shape(&self, k: &DeltaComplex) -> Result<(), ComplexError> {
        let shape = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(ComplexError::LabelShape(format!("{what}: {got} labels for {want} cells")))
            }
        };
        shape("p.vertices", self.p.vertices.len(), k.vertices)?;
        shape("p.edges", self.p.edges.len(), k.edges.len())?;
        shape("l.faces", self.l.faces.len(), k.faces.len())?;
        shape("l.edges", self.l.edges.len(), k.edges.len())?;
        let all = self.p.vertices.iter().chain(&self.p.edges).chain(&self.l.faces).chain(&self.l.edges);
        if all.clone().any(|&x| x == 0) {
            return Err(ComplexError::LabelShape("labels are 1-based".into()));
        }
        Ok(())
    }

    pub fn max_point(&self) -> usize {
        self.p.vertices.iter().chain(&self.p.edges).copied().max().unwrap_or(0)
    }

    pub fn max_line(&self) -> usize {
        self.l.faces.iter().chain(&self.l.edges).copied().max().unwrap_or(0)
    }

    pub fn is_bijective(&self) -> bool {
        let perm = |xs: Vec<usize>| {
            let n = xs.len();
            let set: BTreeSet<usize> = xs.into_iter().collect();
            set.len() == n && set.iter().next() == Some(&1) && set.iter().last() == Some(&n)
        };
        perm(self.p.vertices.iter().chain(&self.p.edges).copied().collect())
            && perm(self.l.faces.iter().chain(&self.l.edges).copied().collect())
    }

    /// Relabels points and lines through the given maps (label -> label).
    pub fn mapped(&self, pmap: impl Fn(usize) -> usize, lmap: impl Fn(usize) -> usize) -> Labeling {
        Labeling {
            p: PointLabels {
                vertices: self.p.vertices.iter().map(|&x| pmap(x)).collect(),
                edges: self.p.edges.iter().map(|&x| pmap(x)).collect(),
            },
            l: LineLabels {
                faces: self.l.faces.iter().map(|&x| lmap(x)).collect(),
                edges: self.l.edges.iter().map(|&x| lmap(x)).collect(),
            },
        }
    }
}

/// Bijective labels with `p(marked_edge) = 1` and `l(marked_face) = 1`.
/// Remaining points go to vertices then edges, remaining lines to faces then
/// edges, each in id order.
pub fn bijective_labeling(k: &DeltaComplex, marked_face: usize, marked_edge: usize) -> Result<Labeling, ComplexError> {
    if marked_face >= k.faces.len() {
        return Err(ComplexError::FaceNotFound(marked_face));
    }
    if !k.faces[marked_face].iter().any(|d| d.edge == marked_edge) {
        return Err(ComplexError::MarkedPairMissing);
    }
    let mut next = 2;
    let vertices = (0..k.vertices).map(|_| post_inc(&mut next)).collect();
    let edges = (0..k.edges.len()).map(|e| if e == marked_edge { 1 } else { post_inc(&mut next) }).collect();
    let mut next = 2;
    let faces = (0..k.faces.len()).map(|f| if f == marked_face { 1 } else { post_inc(&mut next) }).collect();
    let ledges = (0..k.edges.len()).map(|_| post_inc(&mut next)).collect();
    Ok(Labeling { p: PointLabels { vertices, edges }, l: LineLabels { faces, edges: ledges } })
}

fn post_inc(x: &mut usize) -> usize {
    *x += 1;
    *x - 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedComplex {
    #[serde(flatten)]
    pub complex: DeltaComplex,
    #[serde(flatten)]
    pub labeling: Labeling,
    pub marked: usize,
}

impl MarkedComplex {
    pub fn new(complex: DeltaComplex, labeling: Labeling, marked: usize) -> Result<Self, ComplexError> {
        labeling.check_shape(&complex)?;
        if marked >= complex.face_count() {
            return Err(ComplexError::FaceNotFound(marked));
        }
        Ok(MarkedComplex { complex, labeling, marked })
    }

    /// Checks the shape of the labeling (serde cannot do it while flattening).
    pub fn checked(self) -> Result<Self, ComplexError> {
        MarkedComplex::new(self.complex, self.labeling, self.marked)
    }
}

/// Which clause of the elementary-proof definition a pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Property {
    /// The distinguished pair `p(edge) = l(face) = 1`.
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
    #[serde(rename = "*")]
    Excision,
}

/// A cell in the complex: vertex, edge or face id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Cell {
    Vertex(usize),
    Edge(usize),
    Face(usize),
}

/// One labeled pair `(i, j)` with its required matrix entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Requirement {
    pub property: Property,
    pub point_cell: Cell,
    pub line_cell: Cell,
    /// 1-based matrix row and column.
    pub row: usize,
    pub col: usize,
}

/// All `(0)`, `(+1)` and `(-1)` pairs of the labeled complex, deduplicated
/// by (property, cells).
pub fn requirements(k: &DeltaComplex, lab: &Labeling) -> Vec<Requirement> {
    let mut out = BTreeSet::new();
    let pe = |e: usize| lab.p.edges[e];
    let pv = |v: usize| lab.p.vertices[v];
    let le = |e: usize| lab.l.edges[e];
    for (f, face) in k.faces.iter().enumerate() {
        let lf = lab.l.faces[f];
        for d in face {
            let property = if pe(d.edge) == 1 && lf == 1 { Property::Zero } else { Property::Plus };
            out.insert(Requirement { property, point_cell: Cell::Edge(d.edge), line_cell: Cell::Face(f), row: pe(d.edge), col: lf });
        }
        let verts = k.face_vertices(f);
        for (i, dj) in face.iter().enumerate() {
            let ends = k.edges[dj.edge];
            // Opposite vertex of side i is the tail of side i+2.
            let opp = verts[(i + 2) % 3];
            if !ends.contains(&opp) {
                out.insert(Requirement { property: Property::Minus, point_cell: Cell::Vertex(opp), line_cell: Cell::Edge(dj.edge), row: pv(opp), col: le(dj.edge) });
            }
            for di in face {
                if di.edge != dj.edge {
                    out.insert(Requirement { property: Property::Minus, point_cell: Cell::Edge(di.edge), line_cell: Cell::Edge(dj.edge), row: pe(di.edge), col: le(dj.edge) });
                }
            }
        }
    }
    for (e, &[t, h]) in k.edges.iter().enumerate() {
        for v in [t, h] {
            out.insert(Requirement { property: Property::Plus, point_cell: Cell::Vertex(v), line_cell: Cell::Edge(e), row: pv(v), col: le(e) });
        }
        out.insert(Requirement { property: Property::Plus, point_cell: Cell::Edge(e), line_cell: Cell::Edge(e), row: pe(e), col: le(e) });
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub property: Property,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub requirement: Option<Requirement>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub actual: Option<i8>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub valid: bool,
    /// The face of the distinguished pair, when there is exactly one pair.
    pub marked_face: Option<usize>,
    pub excisable: Option<bool>,
    pub violations: Vec<Violation>,
}

/// Checks properties (0), (+1), (-1) against `m` and (*) over `g`.
pub fn validate_elementary_proof(mc: &MarkedComplex, m: &IncidenceMatrix, g: &GroupSpec) -> ValidationReport {
    let mut violations = Vec::new();
    let k = &mc.complex;
    if let Err(e) = mc.labeling.check_shape(k) {
        violations.push(Violation { property: Property::Zero, requirement: None, actual: None, message: e.to_string() });
        return ValidationReport { valid: false, marked_face: None, excisable: None, violations };
    }
    if mc.labeling.max_point() > m.rows_count() || mc.labeling.max_line() > m.cols_count() {
        violations.push(Violation {
            property: Property::Zero,
            requirement: None,
            actual: None,
            message: format!(
                "labels reach point {} / line {} but the matrix is {}x{}",
                mc.labeling.max_point(),
                mc.labeling.max_line(),
                m.rows_count(),
                m.cols_count()
            ),
        });
        return ValidationReport { valid: false, marked_face: None, excisable: None, violations };
    }
    let reqs = requirements(k, &mc.labeling);
    let zero: Vec<&Requirement> = reqs.iter().filter(|r| r.property == Property::Zero).collect();
    let marked_face = match zero.as_slice() {
        [r] => match r.line_cell {
            Cell::Face(f) => Some(f),
            _ => None,
        },
        _ => None,
    };
    if zero.len() != 1 {
        violations.push(Violation {
            property: Property::Zero,
            requirement: None,
            actual: None,
            message: format!("{} edge-in-face pairs have p = l = 1, expected exactly one", zero.len()),
        });
    } else if marked_face != Some(mc.marked) {
        violations.push(Violation {
            property: Property::Zero,
            requirement: Some(*zero[0]),
            actual: None,
            message: format!("the p = l = 1 pair lies in face {:?}, not the marked face {}", marked_face, mc.marked),
        });
    }
    for r in &reqs {
        let want = match r.property {
            Property::Plus => Tri::PlusOne,
            Property::Minus => Tri::MinusOne,
            _ => continue,
        };
        let got = m.get(r.row - 1, r.col - 1);
        if got != want {
            violations.push(Violation {
                property: r.property,
                requirement: Some(*r),
                actual: Some(got.as_i8()),
                message: format!("M[{}][{}] = {}, required {}", r.row, r.col, got, want),
            });
        }
    }
    let excisable = can_excise(k, mc.marked, g).ok();
    if excisable != Some(true) {
        violations.push(Violation {
            property: Property::Excision,
            requirement: None,
            actual: None,
            message: format!("marked face {} cannot be excised over {}", mc.marked, g),
        });
    }
    ValidationReport { valid: violations.is_empty(), marked_face, excisable, violations }
}

/// The matrix with `+1` at every (+1) cell, `-1` at every (-1) cell and `0`
/// elsewhere, for a bijectively labeled complex.
pub fn generate_theorem(mc: &MarkedComplex) -> Result<IncidenceMatrix, ComplexError> {
    let k = &mc.complex;
    mc.labeling.check_shape(k)?;
    if !mc.labeling.is_bijective() {
        return Err(ComplexError::NotBijective("p and l must be permutations of 1..m and 1..n".into()));
    }
    let reqs = requirements(k, &mc.labeling);
    if !reqs.iter().any(|r| r.property == Property::Zero) {
        return Err(ComplexError::MarkedPairMissing);
    }
    let m = k.vertex_count() + k.edge_count();
    let n = k.face_count() + k.edge_count();
    let mut cells: BTreeMap<(usize, usize), Tri> = BTreeMap::new();
    for r in &reqs {
        let v = match r.property {
            Property::Plus => Tri::PlusOne,
            Property::Minus => Tri::MinusOne,
            _ => continue,
        };
        if let Some(&old) = cells.get(&(r.row, r.col)) {
            if old != v {
                return Err(ComplexError::LabelConflict { row: r.row, col: r.col });
            }
        }
        cells.insert((r.row, r.col), v);
    }
    let mut out = IncidenceMatrix::zeros(m, n).expect("nonempty");
    for ((i, j), v) in cells {
        out = out.with(i - 1, j - 1, v).expect("labels in range");
    }
    Ok(out)
}

/// Refines a Δ-complex into a simplicial complex without touching the
/// marked face.
///
/// Every edge outside the marked face gets two new vertices. Every other
/// face `abc` is replaced by the seven faces of an octahedron other than
/// `abc` itself: interior vertices `z, x, y` opposite `ab, bc, ca`, faces
/// `abz zbx bcx xcy cay yaz zxy`. The three faces along `ab, bc, ca` are split
/// in three where that edge was subdivided, giving at most 13 faces.
///
/// Each new vertex is coloured by a corner of the old face, and each new
/// face is a copy of the old one: vertices, edges and the face take the old
/// labels of their colours. So every labeled pair of the output repeats a
/// labeled pair of the input.
pub fn octahedral_subdivide(mc: &MarkedComplex) -> Result<MarkedComplex, ComplexError> {
    let k = &mc.complex;
    mc.labeling.check_shape(k)?;
    for f in 0..k.face_count() {
        let [a, b, c] = k.face_vertices(f);
        if a == b || b == c || a == c {
            return Err(ComplexError::DegenerateFace(f));
        }
    }
    let lab = &mc.labeling;
    let keep: BTreeSet<usize> = k.faces[mc.marked].iter().map(|d| d.edge).collect();

    let mut b = Builder::default();
    for v in 0..k.vertex_count() {
        b.vertex(lab.p.vertices[v]);
    }
    // Chain of vertices along each original edge, tail to head.
    let mut chains: Vec<Vec<usize>> = Vec::with_capacity(k.edge_count());
    for (e, &[t, h]) in k.edges.iter().enumerate() {
        if keep.contains(&e) {
            chains.push(vec![t, h]);
        } else {
            // The vertex next to the tail is coloured like the head and
            // vice versa.
            let w1 = b.vertex(lab.p.vertices[h]);
            let w2 = b.vertex(lab.p.vertices[t]);
            chains.push(vec![t, w1, w2, h]);
        }
        for w in chains[e].windows(2) {
            b.edge(w[0], w[1], lab.p.edges[e], lab.l.edges[e]);
        }
    }
    let mut marked = None;
    for (f, face) in k.faces.iter().enumerate() {
        let lf = lab.l.faces[f];
        if f == mc.marked {
            let [x, y, z] = k.face_vertices(f);
            let labels = face.map(|d| (lab.p.edges[d.edge], lab.l.edges[d.edge]));
            marked = Some(b.face([x, y, z], [labels[0], labels[1], labels[2]], lf));
            continue;
        }
        let [va, vb, vc] = k.face_vertices(f);
        let [eab, ebc, eca] = face.map(|d| (lab.p.edges[d.edge], lab.l.edges[d.edge]));
        // Colour classes: 0 = a, 1 = b, 2 = c.
        let side_labels = |c1: usize, c2: usize| match (c1.min(c2), c1.max(c2)) {
            (0, 1) => eab,
            (1, 2) => ebc,
            _ => eca,
        };
        let z = b.vertex(lab.p.vertices[vc]);
        let x = b.vertex(lab.p.vertices[va]);
        let y = b.vertex(lab.p.vertices[vb]);
        let tri = |b: &mut Builder, t: [(usize, usize); 3]| {
            let labels = [0, 1, 2].map(|i| side_labels(t[i].1, t[(i + 1) % 3].1));
            b.face([t[0].0, t[1].0, t[2].0], labels, lf);
        };
        for (side, (c_from, c_to, apex, c_apex)) in [(0usize, 1usize, z, 2usize), (1, 2, x, 0), (2, 0, y, 1)].into_iter().enumerate() {
            let d = face[side];
            let mut path = chains[d.edge].clone();
            if !d.forward {
                path.reverse();
            }
            // Colours alternate along the side: from, to, from, to.
            for (i, w) in path.windows(2).enumerate() {
                let (c0, c1) = if i % 2 == 0 { (c_from, c_to) } else { (c_to, c_from) };
                tri(&mut b, [(w[0], c0), (w[1], c1), (apex, c_apex)]);
            }
        }
        tri(&mut b, [(z, 2), (vb, 1), (x, 0)]);
        tri(&mut b, [(x, 0), (vc, 2), (y, 1)]);
        tri(&mut b, [(y, 1), (va, 0), (z, 2)]);
        tri(&mut b, [(z, 2), (x, 0), (y, 1)]);
    }
    let marked = marked.expect("marked face visited");
    let complex = DeltaComplex::new(b.vertices.len(), b.edges, b.faces)?.into_simplicial()?;
    let labeling = Labeling {
        p: PointLabels { vertices: b.vertices, edges: b.edge_p },
        l: LineLabels { faces: b.face_l, edges: b.edge_l },
    };
    MarkedComplex::new(complex, labeling, marked)
}

/// Accumulates a relabeled complex, reusing edges by vertex pair.
#[derive(Default)]
struct Builder {
    vertices: Vec<usize>,
    edges: Vec<[usize; 2]>,
    edge_p: Vec<usize>,
    edge_l: Vec<usize>,
    edge_ids: HashMap<(usize, usize), usize>,
    faces: Vec<[DirEdge; 3]>,
    face_l: Vec<usize>,
}

impl Builder {
    fn vertex(&mut self, p: usize) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    fn edge(&mut self, t: usize, h: usize, p: usize, l: usize) -> usize {
        let key = (t.min(h), t.max(h));
        if let Some(&id) = self.edge_ids.get(&key) {
            return id;
        }
        self.edges.push([t, h]);
        self.edge_p.push(p);
        self.edge_l.push(l);
        let id = self.edges.len() - 1;
        self.edge_ids.insert(key, id);
        id
    }

    fn dir(&mut self, t: usize, h: usize, labels: (usize, usize)) -> DirEdge {
        let id = self.edge(t, h, labels.0, labels.1);
        DirEdge { edge: id, forward: self.edges[id][0] == t }
    }

    fn face(&mut self, v: [usize; 3], labels: [(usize, usize); 3], l: usize) -> usize {
        let d = [0, 1, 2].map(|i| self.dir(v[i], v[(i + 1) % 3], labels[i]));
        self.faces.push(d);
        self.face_l.push(l);
        self.faces.len() - 1
    }
}
