//! Truth of incidence theorems over `F_q` by exhaustive search, explicit
//! configuration checks, and counterexamples built from failing cochains.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{generate_theorem, ComplexError, MarkedComplex};
use crate::excise::Cochain;
use crate::finfield::{Configuration, Elem, Field, FieldError, ProjLine, ProjPoint};
use crate::trimat::{IncidenceMatrix, Tri};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("configuration has {points} points and {lines} lines, matrix is {m}x{n}")]
    DimensionMismatch { points: usize, lines: usize, m: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub node_budget: u64,
    /// Pin the first variable to the first point (or line) of the plane.
    /// Sound because the collineation group is transitive on points and on
    /// lines, but off by default.
    pub symmetry: bool,
    pub jobs: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { node_budget: 100_000_000, symmetry: false, jobs: 1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub propagations_forced: u64,
    #[serde(with = "millis")]
    pub elapsed: Duration,
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    True,
    Counterexample(Configuration),
    Vacuous,
    ResourceExceeded,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::True => "True",
            Outcome::Counterexample(_) => "Counterexample",
            Outcome::Vacuous => "Vacuous",
            Outcome::ResourceExceeded => "ResourceExceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

impl Verdict {
    pub fn is_true(&self) -> bool {
        self.outcome == Outcome::True
    }

    pub fn counterexample(&self) -> Option<&Configuration> {
        match &self.outcome {
            Outcome::Counterexample(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct VerdictJson {
    outcome: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    counterexample: Option<Configuration>,
    stats: SearchStats,
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        VerdictJson {
            outcome: self.outcome.name().to_string(),
            counterexample: self.counterexample().cloned(),
            stats: self.stats.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = VerdictJson::deserialize(d)?;
        let outcome = match (raw.outcome.as_str(), raw.counterexample) {
            ("True", _) => Outcome::True,
            ("Vacuous", _) => Outcome::Vacuous,
            ("ResourceExceeded", _) => Outcome::ResourceExceeded,
            ("Counterexample", Some(c)) => Outcome::Counterexample(c),
            (o, _) => return Err(serde::de::Error::custom(format!("bad outcome {o}"))),
        };
        Ok(Verdict { outcome, stats: raw.stats })
    }
}

/// Every `+1` cell is an incidence and every `-1` cell a non-incidence.
pub fn verify_configuration(m: &IncidenceMatrix, c: &Configuration) -> Result<bool, SearchError> {
    let f = Field::new(c.q)?;
    if c.points.len() != m.rows_count() || c.lines.len() != m.cols_count() {
        return Err(SearchError::DimensionMismatch {
            points: c.points.len(),
            lines: c.lines.len(),
            m: m.rows_count(),
            n: m.cols_count(),
        });
    }
    c.check(&f)?;
    Ok(violations(&f, m, c).is_empty())
}

/// Cells whose constraint the configuration breaks.
pub fn violations(f: &Field, m: &IncidenceMatrix, c: &Configuration) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..m.rows_count() {
        for j in 0..m.cols_count() {
            let inc = f.incident(c.points[i], c.lines[j]);
            match m.get(i, j) {
                Tri::PlusOne if !inc => out.push((i, j)),
                Tri::MinusOne if inc => out.push((i, j)),
                _ => {}
            }
        }
    }
    out
}

/// Whether `P1` lies on `L1`.
pub fn conclusion_holds(c: &Configuration) -> Result<bool, SearchError> {
    let f = Field::new(c.q)?;
    Ok(f.incident(c.points[0], c.lines[0]))
}

pub fn check_theorem(m: &IncidenceMatrix, q: u32, opts: &SearchOptions) -> Result<Verdict, SearchError> {
    let start = Instant::now();
    let f = Field::new(q)?;
    let plane = Plane::new(&f);
    let mut stats = SearchStats::default();

    let outcome = 'done: {
        if m.get(0, 0) != Tri::PlusOne {
            let target = if m.get(0, 0) == Tri::Zero { m.with(0, 0, Tri::MinusOne).expect("in range") } else { m.clone() };
            match Search::new(&plane, &target, opts).run(&mut stats) {
                Found::Yes(cfg) => break 'done Outcome::Counterexample(cfg),
                Found::Budget => break 'done Outcome::ResourceExceeded,
                Found::No => {}
            }
        }
        let rest = SearchOptions { node_budget: opts.node_budget.saturating_sub(stats.nodes_expanded), ..*opts };
        match Search::new(&plane, m, &rest).run(&mut stats) {
            Found::Yes(_) => Outcome::True,
            Found::No => Outcome::Vacuous,
            Found::Budget => Outcome::ResourceExceeded,
        }
    };
    stats.elapsed = start.elapsed();
    Ok(Verdict { outcome, stats })
}

/// Does any configuration over `F_q` satisfy `m`? Returns the first one found.
pub fn find_configuration(
    m: &IncidenceMatrix,
    q: u32,
    opts: &SearchOptions,
) -> Result<(Option<Configuration>, SearchStats), SearchError> {
    let f = Field::new(q)?;
    let plane = Plane::new(&f);
    let mut stats = SearchStats::default();
    let start = Instant::now();
    let found = match Search::new(&plane, m, opts).run(&mut stats) {
        Found::Yes(c) => Some(c),
        _ => None,
    };
    stats.elapsed = start.elapsed();
    Ok((found, stats))
}

type Set = u128;

struct Plane {
    q: u32,
    points: Vec<ProjPoint>,
    lines: Vec<ProjLine>,
    /// `on_point[p]`: lines through point `p`.
    on_point: Vec<Set>,
    /// `on_line[l]`: points on line `l`.
    on_line: Vec<Set>,
    full: Set,
}

impl Plane {
    fn new(f: &Field) -> Plane {
        let points = f.points();
        let lines = f.lines();
        let n = points.len();
        let mut on_point = vec![0; n];
        let mut on_line = vec![0; n];
        for (p, &pt) in points.iter().enumerate() {
            for (l, &ln) in lines.iter().enumerate() {
                if f.incident(pt, ln) {
                    on_point[p] |= 1 << l;
                    on_line[l] |= 1 << p;
                }
            }
        }
        let full = if n == 128 { !0 } else { (1u128 << n) - 1 };
        Plane { q: f.order(), points, lines, on_point, on_line, full }
    }
}

enum Found {
    Yes(Configuration),
    No,
    Budget,
}

struct Search<'a> {
    plane: &'a Plane,
    m: usize,
    order: Vec<usize>,
    /// Signed constraints per variable: `(other variable, must be incident)`.
    adj: Vec<Vec<(usize, bool)>>,
    budget: u64,
    symmetry: bool,
    jobs: usize,
}

impl<'a> Search<'a> {
    fn new(plane: &'a Plane, mat: &IncidenceMatrix, opts: &SearchOptions) -> Search<'a> {
        let (m, n) = (mat.rows_count(), mat.cols_count());
        let mut adj = vec![Vec::new(); m + n];
        for i in 0..m {
            for j in 0..n {
                let inc = match mat.get(i, j) {
                    Tri::PlusOne => true,
                    Tri::MinusOne => false,
                    Tri::Zero => continue,
                };
                adj[i].push((m + j, inc));
                adj[m + j].push((i, inc));
            }
        }
        let order = variable_order(&adj, m);
        Search { plane, m, order, adj, budget: opts.node_budget, symmetry: opts.symmetry, jobs: opts.jobs.max(1) }
    }

    fn initial_domains(&self) -> Vec<Set> {
        let mut d = vec![self.plane.full; self.adj.len()];
        if self.symmetry {
            if let Some(&v) = self.order.first() {
                d[v] = 1;
            }
        }
        d
    }

    fn run(&self, stats: &mut SearchStats) -> Found {
        let doms = self.initial_domains();
        if self.order.is_empty() {
            return Found::No;
        }
        let nodes = AtomicU64::new(stats.nodes_expanded);
        let forced = AtomicU64::new(stats.propagations_forced);
        let first = self.order[0];
        let found = if self.jobs <= 1 {
            let mut w = Worker { s: self, nodes: &nodes, forced: &forced, assign: vec![usize::MAX; self.adj.len()] };
            w.dfs(0, doms)
        } else {
            // Split on the values of the first variable and keep the result
            // of the lowest value that decides, so the answer matches the
            // sequential search.
            let values: Vec<usize> = bits(doms[first]).collect();
            let run_one = |&x: &usize| {
                let mut w = Worker { s: self, nodes: &nodes, forced: &forced, assign: vec![usize::MAX; self.adj.len()] };
                let mut d = doms.clone();
                d[first] = 1 << x;
                w.dfs(0, d)
            };
            let results: Vec<Found> = match rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build() {
                Ok(pool) => pool.install(|| values.par_iter().map(run_one).collect()),
                Err(_) => values.iter().map(run_one).collect(),
            };
            results.into_iter().find(|r| !matches!(r, Found::No)).unwrap_or(Found::No)
        };
        stats.nodes_expanded = nodes.into_inner();
        stats.propagations_forced = forced.into_inner();
        found
    }
}

/// Highest-degree variable first, then repeatedly the variable with the most
/// constraints into the already ordered set; ties go to higher total degree,
/// then points before lines, then lower index.
fn variable_order(adj: &[Vec<(usize, bool)>], _m: usize) -> Vec<usize> {
    let k = adj.len();
    let mut placed = vec![false; k];
    let mut links = vec![0usize; k];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let v = (0..k)
            .filter(|&v| !placed[v])
            .max_by(|&a, &b| (links[a], adj[a].len()).cmp(&(links[b], adj[b].len())).then(b.cmp(&a)))
            .expect("unplaced variable");
        placed[v] = true;
        order.push(v);
        for &(w, _) in &adj[v] {
            links[w] += 1;
        }
    }
    order
}

fn bits(mut s: Set) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if s == 0 {
            return None;
        }
        let b = s.trailing_zeros() as usize;
        s &= s - 1;
        Some(b)
    })
}

struct Worker<'s, 'a> {
    s: &'s Search<'a>,
    nodes: &'s AtomicU64,
    forced: &'s AtomicU64,
    assign: Vec<usize>,
}

impl Worker<'_, '_> {
    fn dfs(&mut self, depth: usize, doms: Vec<Set>) -> Found {
        let s = self.s;
        if depth == s.order.len() {
            return Found::Yes(self.configuration());
        }
        let v = s.order[depth];
        let is_point = v < s.m;
        for x in bits(doms[v]) {
            if self.nodes.fetch_add(1, Ordering::Relaxed) >= s.budget {
                return Found::Budget;
            }
            let Some(next) = self.propagate(v, is_point, x, &doms) else { continue };
            self.assign[v] = x;
            match self.dfs(depth + 1, next) {
                Found::No => {}
                other => return other,
            }
            self.assign[v] = usize::MAX;
        }
        Found::No
    }

    /// Restricts the neighbours of `v := x`; `None` when a domain empties.
    /// A point tied by `+1` to two assigned distinct lines collapses to their
    /// meet here, and dually for lines.
    fn propagate(&self, v: usize, is_point: bool, x: usize, doms: &[Set]) -> Option<Vec<Set>> {
        let s = self.s;
        let mut next = doms.to_vec();
        next[v] = 1 << x;
        let inc = if is_point { s.plane.on_point[x] } else { s.plane.on_line[x] };
        for &(w, must) in &s.adj[v] {
            let before = next[w];
            let after = if must { before & inc } else { before & !inc };
            if after == 0 {
                return None;
            }
            if after != before && after.count_ones() == 1 && self.assign[w] == usize::MAX {
                self.forced.fetch_add(1, Ordering::Relaxed);
            }
            next[w] = after;
        }
        Some(next)
    }

    fn configuration(&self) -> Configuration {
        let s = self.s;
        let points = (0..s.m).map(|i| s.plane.points[self.assign[i]]).collect();
        let lines = (s.m..s.adj.len()).map(|j| s.plane.lines[self.assign[j]]).collect();
        Configuration { q: s.plane.q, points, lines }
    }
}

/// Plain backtracking in the fixed order `P1, L1, P2, L2, ...`, checking each
/// cell once both ends are assigned; no forward checking. Exponential; used
/// to cross-check [`check_theorem`] on small inputs.
pub fn check_theorem_naive(mat: &IncidenceMatrix, q: u32) -> Result<Outcome, SearchError> {
    let f = Field::new(q)?;
    let plane = Plane::new(&f);
    if mat.get(0, 0) != Tri::PlusOne {
        let target = mat.with(0, 0, Tri::MinusOne).expect("in range");
        if naive_exists(&plane, &target) {
            // Only the kind of outcome matters to callers of this oracle.
            return Ok(Outcome::Counterexample(Configuration { q, points: vec![], lines: vec![] }));
        }
    }
    Ok(if naive_exists(&plane, mat) { Outcome::True } else { Outcome::Vacuous })
}

fn naive_exists(plane: &Plane, mat: &IncidenceMatrix) -> bool {
    let (m, n) = (mat.rows_count(), mat.cols_count());
    let mut order = Vec::with_capacity(m + n);
    for k in 0..m.max(n) {
        if k < m {
            order.push(k);
        }
        if k < n {
            order.push(m + k);
        }
    }
    let fits = |assign: &[usize], v: usize, x: usize| {
        if v < m {
            (0..n)
                .filter(|&j| assign[m + j] != usize::MAX)
                .all(|j| cell_ok(mat.get(v, j), plane.on_point[x] >> assign[m + j] & 1 == 1))
        } else {
            let j = v - m;
            (0..m)
                .filter(|&i| assign[i] != usize::MAX)
                .all(|i| cell_ok(mat.get(i, j), plane.on_point[assign[i]] >> x & 1 == 1))
        }
    };
    fn go(order: &[usize], assign: &mut [usize], k: usize, size: usize, fits: &dyn Fn(&[usize], usize, usize) -> bool) -> bool {
        if k == order.len() {
            return true;
        }
        let v = order[k];
        for x in 0..size {
            if fits(assign, v, x) {
                assign[v] = x;
                if go(order, assign, k + 1, size, fits) {
                    return true;
                }
                assign[v] = usize::MAX;
            }
        }
        false
    }
    go(&order, &mut vec![usize::MAX; m + n], 0, plane.points.len(), &fits)
}

fn cell_ok(t: Tri, inc: bool) -> bool {
    match t {
        Tri::PlusOne => inc,
        Tri::MinusOne => !inc,
        Tri::Zero => true,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealizeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("cochain modulus {n} does not divide q - 1 = {order}")]
    ModulusMismatch { n: u64, order: u32 },
    #[error("cochain is not flat on face {0}")]
    CochainViolatesF(usize),
    #[error("no placement of {vertices} vertex points over F_{q} gives a configuration with the generated matrix")]
    PlacementFailed { vertices: usize, q: u32 },
}

/// Placements of vertex points tried before giving up.
pub const PLACEMENT_BUDGET: usize = 100_000;

/// Builds a configuration over `F_q` from a Z/n cochain flat on every face
/// but the marked one, for a bijectively labeled complex.
///
/// Vertex points are chosen with no three collinear, in canonical order with
/// backtracking. The point of edge `t -> h` is `T - k H` where
/// `k = g^(u (q-1)/n)` for a generator `g`; `k = 1` gives the improper point
/// of the line. Three edge points of a face are collinear iff the product
/// of their ratios is 1, so flat faces get lines through their edge points
/// and the marked face gets `L1` through its two unmarked edge points. The
/// first placement whose configuration satisfies the generated matrix is
/// returned.
pub fn realize_from_cochain(mc: &MarkedComplex, u: &Cochain, q: u32) -> Result<Configuration, RealizeError> {
    let f = Field::new(q)?;
    let order = q - 1;
    if u.modulus == 0 || order as u64 % u.modulus != 0 {
        return Err(RealizeError::ModulusMismatch { n: u.modulus, order });
    }
    let k = &mc.complex;
    for face in 0..k.face_count() {
        if face != mc.marked && u.face_sum(k, face) != 0 {
            return Err(RealizeError::CochainViolatesF(face));
        }
    }
    let m = generate_theorem(mc)?;
    let g = f.generator();
    let step = order / u.modulus as u32;
    let ratio: Vec<Elem> = (0..k.edge_count()).map(|e| f.pow(g, (u.value(e) % u.modulus) as u32 * step)).collect();

    let build = |verts: &[ProjPoint]| -> Option<Configuration> {
        let lab = &mc.labeling;
        let mut points = vec![ProjPoint([0, 0, 1]); m.rows_count()];
        let mut lines = vec![ProjLine([0, 0, 1]); m.cols_count()];
        for (v, &p) in verts.iter().enumerate() {
            points[lab.p.vertices[v] - 1] = p;
        }
        for (e, &[t, h]) in k.edges().iter().enumerate() {
            let (a, b) = (verts[t].0, verts[h].0);
            let kb = b.map(|x| f.mul(ratio[e], x));
            let x = [0, 1, 2].map(|i| f.sub(a[i], kb[i]));
            points[lab.p.edges[e] - 1] = ProjPoint(f.normalize(x).ok()?);
            lines[lab.l.edges[e] - 1] = f.join(verts[t], verts[h])?;
        }
        for (face, walk) in k.faces().iter().enumerate() {
            let pts = walk.map(|d| points[lab.p.edges[d.edge] - 1]);
            let line = if face == mc.marked {
                // Skip the edge carrying point 1.
                let rest: Vec<ProjPoint> = walk.iter().zip(pts).filter(|(d, _)| lab.p.edges[d.edge] != 1).map(|(_, p)| p).collect();
                f.join(rest[0], *rest.get(1)?)?
            } else {
                f.join(pts[0], pts[1]).or_else(|| f.join(pts[1], pts[2]))?
            };
            lines[lab.l.faces[face] - 1] = line;
        }
        let c = Configuration { q, points, lines };
        verify_configuration(&m, &c).ok()?.then_some(c)
    };

    let plane = f.points();
    let nv = k.vertex_count();
    let mut chosen: Vec<usize> = Vec::with_capacity(nv);
    let mut tried = 0usize;
    // Iterative backtracking over increasing plane indices.
    let mut next = 0usize;
    loop {
        if chosen.len() == nv {
            tried += 1;
            let verts: Vec<ProjPoint> = chosen.iter().map(|&i| plane[i]).collect();
            if let Some(c) = build(&verts) {
                return Ok(c);
            }
            if tried >= PLACEMENT_BUDGET {
                break;
            }
            next = chosen.pop().expect("nonempty") + 1;
            continue;
        }
        let found = (next..plane.len()).find(|&i| {
            let p = plane[i];
            chosen.iter().all(|&a| plane[a] != p)
                && chosen.iter().enumerate().all(|(x, &a)| chosen[x + 1..].iter().all(|&b| !f.collinear(plane[a], plane[b], p)))
        });
        match found {
            Some(i) => {
                chosen.push(i);
                next = 0;
            }
            None => match chosen.pop() {
                Some(i) => next = i + 1,
                None => break,
            },
        }
    }
    Err(RealizeError::PlacementFailed { vertices: nv, q })
}
