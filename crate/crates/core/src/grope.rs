//! Generalized gropes: closed orientable surfaces with faces replaced, one
//! at a time, by surfaces whose boundary wraps `k` times around the removed
//! face.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{
    is_closed_orientable_surface, orient_faces, random_closed_surface, stellar_subdivide, ComplexError, DeltaComplex, DirEdge,
};
use crate::excise::{torsion_coprime, GroupSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GropeError {
    #[error("base complex is not a closed orientable surface")]
    NotAClosedOrientableSurface,
    #[error("bad boundary: {0}")]
    BadBoundary(String),
    #[error("k = {k} is not torsion-coprime over {group}")]
    NotTorsionCoprime { k: u64, group: String },
    #[error("face {0} does not exist")]
    FaceNotFound(usize),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A compact orientable surface with one boundary cycle, listed as vertices
/// in order; consecutive boundary vertices are joined by a boundary edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedSurface {
    pub complex: DeltaComplex,
    pub boundary: Vec<usize>,
}

impl BoundedSurface {
    /// Boundary edge from `boundary[i]` to `boundary[i + 1]`, as a directed
    /// edge of the surface.
    fn boundary_edges(&self) -> Result<Vec<DirEdge>, GropeError> {
        let k = &self.complex;
        let deg = k.edge_degrees();
        let n = self.boundary.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (self.boundary[i], self.boundary[(i + 1) % n]);
            let found = (0..k.edge_count()).filter(|&e| deg[e] == 1).find_map(|e| match k.edges()[e] {
                [t, h] if (t, h) == (a, b) => Some(DirEdge::fwd(e)),
                [t, h] if (t, h) == (b, a) => Some(DirEdge::rev(e)),
                _ => None,
            });
            out.push(found.ok_or_else(|| GropeError::BadBoundary(format!("no boundary edge from {a} to {b}")))?);
        }
        Ok(out)
    }

    /// Checks one boundary cycle of distinct vertices covering every edge on
    /// a single face, all other edges on two faces, and an orientation.
    pub fn check(&self) -> Result<Vec<DirEdge>, GropeError> {
        let k = &self.complex;
        let n = self.boundary.len();
        if n < 3 {
            return Err(GropeError::BadBoundary(format!("boundary has {n} vertices")));
        }
        let mut sorted = self.boundary.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != n || sorted.last().is_some_and(|&v| v >= k.vertex_count()) {
            return Err(GropeError::BadBoundary("boundary vertices must be distinct vertices of the surface".into()));
        }
        let edges = self.boundary_edges()?;
        let deg = k.edge_degrees();
        let on_boundary = deg.iter().filter(|&&d| d == 1).count();
        if on_boundary != n || deg.iter().any(|&d| d == 0 || d > 2) {
            return Err(GropeError::BadBoundary("edges off the boundary cycle must lie on two faces".into()));
        }
        orient_faces(k).ok_or_else(|| GropeError::BadBoundary("surface is not orientable".into()))?;
        Ok(edges)
    }
}

/// Fan triangulation of an `n`-gon: boundary vertices `0..n`, center `n`.
/// Face `i` walks `v_i -> v_{i+1} -> center -> v_i`.
pub fn fan_disc(n: usize) -> BoundedSurface {
    let mut edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
    edges.extend((0..n).map(|i| [i, n]));
    let faces = (0..n).map(|i| [DirEdge::fwd(i), DirEdge::fwd(n + (i + 1) % n), DirEdge::rev(n + i)]).collect();
    BoundedSurface { complex: DeltaComplex::new(n + 1, edges, faces).expect("fan closes up"), boundary: (0..n).collect() }
}

/// Fan disc with `extra` random interior stellar subdivisions.
pub fn random_disc<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, extra: usize) -> BoundedSurface {
    let mut s = fan_disc(n);
    for _ in 0..extra {
        let f = rng.gen_range(0..s.complex.face_count());
        stellar_subdivide(&mut s.complex, f);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    /// Face removed, as an id of the complex before this gluing.
    pub face: usize,
    pub k: u64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub offset: usize,
    /// Faces of the glued surface occupy `first_face..` afterwards.
    pub first_face: usize,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grope {
    #[serde(flatten)]
    pub complex: DeltaComplex,
    pub gluings: Vec<Gluing>,
}

impl Grope {
    pub fn complexity(&self) -> usize {
        self.gluings.len()
    }
}

pub fn grope_base(s: DeltaComplex) -> Result<Grope, GropeError> {
    if is_closed_orientable_surface(&s).is_none() {
        return Err(GropeError::NotAClosedOrientableSurface);
    }
    Ok(Grope { complex: s, gluings: Vec::new() })
}

/// Removes open face `face` and glues `s` along the covering that sends
/// boundary vertex `i` to corner `(i + offset) mod 3` of the face.
pub fn grope_glue(gr: &Grope, face: usize, s: &BoundedSurface, k: u64, offset: usize, g: &GroupSpec) -> Result<Grope, GropeError> {
    if k < 2 || !torsion_coprime(k, g) {
        return Err(GropeError::NotTorsionCoprime { k, group: g.to_string() });
    }
    glue_unchecked(gr, face, s, k, offset)
}

/// [`grope_glue`] without the torsion condition, for building complexes
/// that are deliberately not gropes.
pub fn glue_unchecked(gr: &Grope, face: usize, s: &BoundedSurface, k: u64, offset: usize) -> Result<Grope, GropeError> {
    let x = &gr.complex;
    if face >= x.face_count() {
        return Err(GropeError::FaceNotFound(face));
    }
    let bedges = s.check()?;
    if s.boundary.len() as u64 != 3 * k {
        return Err(GropeError::BadBoundary(format!("boundary has {} vertices, expected 3k = {}", s.boundary.len(), 3 * k)));
    }
    let walk = x.face(face);
    let corners = x.face_vertices(face);
    let sk = &s.complex;

    let mut vertices = x.vertex_count();
    let mut vmap = vec![usize::MAX; sk.vertex_count()];
    for (i, &v) in s.boundary.iter().enumerate() {
        vmap[v] = corners[(i + offset) % 3];
    }
    for m in vmap.iter_mut().filter(|m| **m == usize::MAX) {
        *m = vertices;
        vertices += 1;
    }
    let mut edges = x.edges().to_vec();
    // Image of each surface edge, as a directed edge of the result.
    let mut emap: Vec<Option<DirEdge>> = vec![None; sk.edge_count()];
    for (i, d) in bedges.iter().enumerate() {
        let side = walk[(i + offset) % 3];
        emap[d.edge] = Some(if d.forward { side } else { side.reversed() });
    }
    for (e, &[t, h]) in sk.edges().iter().enumerate() {
        if emap[e].is_none() {
            edges.push([vmap[t], vmap[h]]);
            emap[e] = Some(DirEdge::fwd(edges.len() - 1));
        }
    }
    let mut faces: Vec<[DirEdge; 3]> = x.faces().iter().enumerate().filter(|&(f, _)| f != face).map(|(_, w)| *w).collect();
    let first_face = faces.len();
    for w in sk.faces() {
        faces.push(w.map(|d| {
            let img = emap[d.edge].expect("mapped");
            if d.forward {
                img
            } else {
                img.reversed()
            }
        }));
    }
    let complex = DeltaComplex::new(vertices, edges, faces)?;
    let mut gluings = gr.gluings.clone();
    gluings.push(Gluing { face, k, offset, first_face });
    Ok(Grope { complex, gluings })
}

/// Two triangles glued along their boundary: vertices `A, B, C`, edges
/// `AB, BC, CA`, face 0 walks `A B C` and face 1 the reverse.
pub fn two_face_sphere() -> DeltaComplex {
    DeltaComplex::new(
        3,
        vec![[0, 1], [1, 2], [2, 0]],
        vec![[DirEdge::fwd(0), DirEdge::fwd(1), DirEdge::fwd(2)], [DirEdge::rev(2), DirEdge::rev(1), DirEdge::rev(0)]],
    )
    .expect("two triangles close up")
}

/// The triangle `ABC` (face 0) with a `3k`-gon, fanned from a center `O`,
/// glued to its boundary by the `k`-fold covering. Edge 0 is `AB`.
pub fn polygon_grope(k: u64, g: &GroupSpec) -> Result<Grope, GropeError> {
    let base = grope_base(two_face_sphere())?;
    grope_glue(&base, 1, &fan_disc(3 * k as usize), k, 0, g)
}

/// Glues a second `3k`-gon into the first face of the polygon of
/// [`polygon_grope`].
pub fn two_stage_grope(k: u64, g: &GroupSpec) -> Result<Grope, GropeError> {
    let one = polygon_grope(k, g)?;
    let face = one.gluings[0].first_face;
    grope_glue(&one, face, &fan_disc(3 * k as usize), k, 0, g)
}

/// Random grope: a random sphere or torus with up to `max_gluings` random
/// discs glued in, each along a `k`-fold covering with `k` drawn from `ks`.
/// Every `k` must be torsion-coprime to `g`.
pub fn random_grope<R: rand::Rng + ?Sized>(rng: &mut R, max_gluings: usize, ks: &[u64], g: &GroupSpec) -> Result<Grope, GropeError> {
    let genus = rng.gen_range(0..=1);
    let min_faces = rng.gen_range(4..10);
    let mut gr = grope_base(random_closed_surface(rng, genus, min_faces))?;
    for _ in 0..rng.gen_range(0..=max_gluings) {
        let k = ks[rng.gen_range(0..ks.len())];
        let face = rng.gen_range(0..gr.complex.face_count());
        let extra = rng.gen_range(0..3);
        let disc = random_disc(rng, 3 * k as usize, extra);
        gr = grope_glue(&gr, face, &disc, k, rng.gen_range(0..3), g)?;
    }
    Ok(gr)
}
