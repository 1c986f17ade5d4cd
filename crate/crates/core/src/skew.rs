//! Exact rational quaternions and the left affine plane over them.
//!
//! Points are pairs `(x, y)` and scalars act on the left, so the line
//! through `X` and `Z` is `{X + k (Z - X)}` and a line `(a, b, c)` holds the
//! points with `x a + y b + c = 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::complex::{ComplexError, DeltaComplex};
use crate::trimat::{IncidenceMatrix, Tri};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SkewError {
    #[error("points are not collinear")]
    NotCollinear,
    #[error("bracket denominator vanishes")]
    DegenerateDenominator,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not a triangulated disc: {0}")]
    NotADisc(String),
    #[error("edge ({0}, {1}) has no value")]
    MissingEdge(usize, usize),
    #[error("edge ({0}, {1}) values are not inverse to each other")]
    NotInverse(usize, usize),
    #[error("face {0} violates the flatness condition")]
    FlatnessViolated(usize),
    #[error("shelling and direct boundary products differ")]
    Disagreement,
    #[error("u and v commute")]
    Commuting,
    #[error("degenerate construction: {0}")]
    Degenerate(String),
    #[error("cannot parse quaternion {0:?}")]
    Parse(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// `a + b i + c j + d k` with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Quaternion {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Quaternion {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Self {
        Quaternion { a, b, c, d }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Quaternion::new(rat(a), rat(b), rat(c), rat(d))
    }

    pub fn real(r: BigRational) -> Self {
        Quaternion::new(r, BigRational::zero(), BigRational::zero(), BigRational::zero())
    }

    pub fn zero() -> Self {
        Quaternion::from_ints(0, 0, 0, 0)
    }

    pub fn one() -> Self {
        Quaternion::from_ints(1, 0, 0, 0)
    }

    pub fn i() -> Self {
        Quaternion::from_ints(0, 1, 0, 0)
    }

    pub fn j() -> Self {
        Quaternion::from_ints(0, 0, 1, 0)
    }

    pub fn k() -> Self {
        Quaternion::from_ints(0, 0, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn is_one(&self) -> bool {
        *self == Quaternion::one()
    }

    pub fn conj(&self) -> Self {
        Quaternion::new(self.a.clone(), -self.b.clone(), -self.c.clone(), -self.d.clone())
    }

    pub fn norm(&self) -> BigRational {
        &self.a * &self.a + &self.b * &self.b + &self.c * &self.c + &self.d * &self.d
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Quaternion::new(&self.a * r, &self.b * r, &self.c * r, &self.d * r)
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(self.conj().scale(&n.recip()))
    }

    pub fn commutes_with(&self, o: &Quaternion) -> bool {
        self * o == o * self
    }

    /// Random quaternion with small numerators and denominators.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut r = || BigRational::new(BigInt::from(rng.gen_range(-4i64..=4)), BigInt::from(rng.gen_range(1i64..=3)));
        Quaternion::new(r(), r(), r(), r())
    }

    pub fn random_nonzero<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Quaternion::random(rng);
            if !q.is_zero() {
                return q;
            }
        }
    }
}

impl<'a> Add<&'a Quaternion> for &'a Quaternion {
    type Output = Quaternion;
    fn add(self, o: &Quaternion) -> Quaternion {
        Quaternion::new(&self.a + &o.a, &self.b + &o.b, &self.c + &o.c, &self.d + &o.d)
    }
}

impl<'a> Sub<&'a Quaternion> for &'a Quaternion {
    type Output = Quaternion;
    fn sub(self, o: &Quaternion) -> Quaternion {
        Quaternion::new(&self.a - &o.a, &self.b - &o.b, &self.c - &o.c, &self.d - &o.d)
    }
}

impl<'a> Mul<&'a Quaternion> for &'a Quaternion {
    type Output = Quaternion;
    fn mul(self, o: &Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (&self.a, &self.b, &self.c, &self.d);
        let (a2, b2, c2, d2) = (&o.a, &o.b, &o.c, &o.d);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        &self + &o
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        &self - &o
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        &self * &o
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (x, unit) in [(&self.a, ""), (&self.b, "i"), (&self.c, "j"), (&self.d, "k")] {
            if x.is_zero() {
                continue;
            }
            let sign = if x.is_negative() { "-" } else if out.is_empty() { "" } else { "+" };
            let mag = x.abs();
            let coef = if mag.is_one() && !unit.is_empty() { String::new() } else { mag.to_string() };
            out += &format!("{sign}{coef}{unit}");
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// Accepts sums like `1+i`, `-1/2j+3k`, `2`, or four comma separated
/// rationals `a,b,c,d`.
impl FromStr for Quaternion {
    type Err = SkewError;
    fn from_str(s: &str) -> Result<Self, SkewError> {
        let err = || SkewError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.contains(',') {
            let parts: Vec<BigRational> = t.split(',').map(|p| p.parse().map_err(|_| err())).collect::<Result<_, _>>()?;
            let [a, b, c, d]: [BigRational; 4] = parts.try_into().map_err(|_| err())?;
            return Ok(Quaternion::new(a, b, c, d));
        }
        if t.is_empty() {
            return Err(err());
        }
        let mut q = Quaternion::zero();
        let mut start = 0;
        let bytes = t.as_bytes();
        for end in (1..=t.len()).filter(|&e| e == t.len() || ((bytes[e] == b'+' || bytes[e] == b'-') && bytes[e - 1] != b'/')) {
            let term = &t[start..end];
            start = end;
            let (body, unit) = match term.chars().last() {
                Some(u @ ('i' | 'j' | 'k')) => (&term[..term.len() - 1], Some(u)),
                _ => (term, None),
            };
            let coef: BigRational = match body {
                "" | "+" => BigRational::one(),
                "-" => -BigRational::one(),
                b => b.strip_prefix('+').unwrap_or(b).parse().map_err(|_| err())?,
            };
            match unit {
                None => q.a += coef,
                Some('i') => q.b += coef,
                Some('j') => q.c += coef,
                _ => q.d += coef,
            }
        }
        Ok(q)
    }
}

impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [&self.a, &self.b, &self.c, &self.d].map(|x| x.to_string()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = <[String; 4]>::deserialize(d)?;
        let p = |x: &String| x.parse::<BigRational>().map_err(serde::de::Error::custom);
        Ok(Quaternion::new(p(&raw[0])?, p(&raw[1])?, p(&raw[2])?, p(&raw[3])?))
    }
}

/// A point of the affine chart.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SkewPoint {
    pub x: Quaternion,
    pub y: Quaternion,
}

impl SkewPoint {
    pub fn new(x: Quaternion, y: Quaternion) -> Self {
        SkewPoint { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        SkewPoint::new(Quaternion::from_ints(x, 0, 0, 0), Quaternion::from_ints(y, 0, 0, 0))
    }

    pub fn sub(&self, o: &SkewPoint) -> SkewPoint {
        SkewPoint::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn add(&self, o: &SkewPoint) -> SkewPoint {
        SkewPoint::new(&self.x + &o.x, &self.y + &o.y)
    }

    /// `k · self`.
    pub fn lscale(&self, k: &Quaternion) -> SkewPoint {
        SkewPoint::new(k * &self.x, k * &self.y)
    }

    pub fn is_origin(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// `X + k (Z - X)`.
    pub fn along(x: &SkewPoint, z: &SkewPoint, k: &Quaternion) -> SkewPoint {
        x.add(&z.sub(x).lscale(k))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        SkewPoint::new(Quaternion::random(rng), Quaternion::random(rng))
    }
}

/// Points with `x a + y b + c = 0`; `(a, b) != (0, 0)`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SkewLine {
    pub a: Quaternion,
    pub b: Quaternion,
    pub c: Quaternion,
}

impl SkewLine {
    pub fn through(p: &SkewPoint, q: &SkewPoint) -> Option<SkewLine> {
        let d = p.sub(q);
        let (a, b) = if !d.x.is_zero() {
            (-(&d.x.inv()? * &d.y), Quaternion::one())
        } else if !d.y.is_zero() {
            (Quaternion::one(), Quaternion::zero())
        } else {
            return None;
        };
        let c = -(&(&p.x * &a) + &(&p.y * &b));
        Some(SkewLine { a, b, c })
    }

    pub fn contains(&self, p: &SkewPoint) -> bool {
        (&(&(&p.x * &self.a) + &(&p.y * &self.b)) + &self.c).is_zero()
    }

    /// Intersection point, or `None` for parallel or equal lines.
    pub fn meet(&self, o: &SkewLine) -> Option<SkewPoint> {
        // x a1 + y b1 = -c1, x a2 + y b2 = -c2 with unknowns on the left.
        let solve = |l1: &SkewLine, l2: &SkewLine| -> Option<(Quaternion, Quaternion)> {
            let ai = l1.a.inv()?;
            let t = &ai * &l2.a;
            let den = &l2.b - &(&l1.b * &t);
            let y = &(&(&l1.c * &t) - &l2.c) * &den.inv()?;
            let x = &(-(&l1.c + &(&y * &l1.b))) * &ai;
            Some((x, y))
        };
        let (x, y) = if !self.a.is_zero() {
            solve(self, o)?
        } else if !o.a.is_zero() {
            solve(o, self)?
        } else {
            return None;
        };
        let p = SkewPoint::new(x, y);
        debug_assert!(self.contains(&p) && o.contains(&p));
        Some(p)
    }
}

pub fn collinear(p: &SkewPoint, q: &SkewPoint, r: &SkewPoint) -> bool {
    match SkewLine::through(p, q) {
        Some(l) => l.contains(r),
        None => true,
    }
}

/// The `k` with `Y - X = k (Z - X)`.
pub fn left_bracket(y: &SkewPoint, z: &SkewPoint, x: &SkewPoint) -> Result<Quaternion, SkewError> {
    let num = y.sub(x);
    let den = z.sub(x);
    let k = if let Some(i) = den.x.inv() {
        &num.x * &i
    } else if let Some(i) = den.y.inv() {
        &num.y * &i
    } else {
        return Err(SkewError::DegenerateDenominator);
    };
    if den.lscale(&k) != num {
        return Err(SkewError::NotCollinear);
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MenelausReport {
    pub product: Quaternion,
    pub product_is_one: bool,
    pub collinear: bool,
}

impl MenelausReport {
    pub fn agrees(&self) -> bool {
        self.product_is_one == self.collinear
    }
}

/// Compares `[AD/BD][BE/CE][CF/AF] = 1` with collinearity of `D, E, F`.
pub fn menelaus_check(
    a: &SkewPoint,
    b: &SkewPoint,
    c: &SkewPoint,
    d: &SkewPoint,
    e: &SkewPoint,
    f: &SkewPoint,
) -> Result<MenelausReport, SkewError> {
    let pre = |m: &str| SkewError::Precondition(m.to_string());
    if collinear(a, b, c) {
        return Err(pre("triangle is degenerate"));
    }
    for (p, x, y, name) in [(d, a, b, "D"), (e, b, c, "E"), (f, c, a, "F")] {
        if p == x || p == y {
            return Err(pre(&format!("{name} coincides with a vertex")));
        }
        if !collinear(x, y, p) {
            return Err(pre(&format!("{name} is not on its side")));
        }
    }
    let product = &(&left_bracket(a, b, d)? * &left_bracket(b, c, e)?) * &left_bracket(c, a, f)?;
    let product_is_one = product.is_one();
    Ok(MenelausReport { product, product_is_one, collinear: collinear(d, e, f) })
}

/// Random instance for the Menelaus check; `F` is on line `DE` when
/// `transversal` is set and a random point of `CA` otherwise.
pub fn random_menelaus_instance<R: Rng + ?Sized>(rng: &mut R, transversal: bool) -> [SkewPoint; 6] {
    loop {
        let [a, b, c] = [0; 3].map(|_| SkewPoint::random(rng));
        if collinear(&a, &b, &c) {
            continue;
        }
        let d = SkewPoint::along(&a, &b, &Quaternion::random_nonzero(rng));
        let e = SkewPoint::along(&b, &c, &Quaternion::random_nonzero(rng));
        let f = if transversal {
            match SkewLine::through(&d, &e).zip(SkewLine::through(&c, &a)).and_then(|(l, m)| l.meet(&m)) {
                Some(f) => f,
                None => continue,
            }
        } else {
            SkewPoint::along(&c, &a, &Quaternion::random_nonzero(rng))
        };
        if [&a, &b].contains(&&d) || [&b, &c].contains(&&e) || [&c, &a].contains(&&f) {
            continue;
        }
        return [a, b, c, d, e, f];
    }
}

/// `A ↦ k (A - C) + C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homothety {
    pub k: Quaternion,
    pub center: SkewPoint,
}

/// `A ↦ s A + t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub s: Quaternion,
    pub t: SkewPoint,
}

impl Homothety {
    pub fn apply(&self, p: &SkewPoint) -> SkewPoint {
        p.sub(&self.center).lscale(&self.k).add(&self.center)
    }

    pub fn as_affine(&self) -> AffineMap {
        AffineMap { s: self.k.clone(), t: self.center.sub(&self.center.lscale(&self.k)) }
    }
}

impl AffineMap {
    pub fn apply(&self, p: &SkewPoint) -> SkewPoint {
        p.lscale(&self.s).add(&self.t)
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &AffineMap) -> AffineMap {
        AffineMap { s: &self.s * &inner.s, t: inner.t.lscale(&self.s).add(&self.t) }
    }

    pub fn is_translation(&self) -> bool {
        self.s.is_one()
    }
}

/// A triangulated disc with boundary cycle `p1 … pk`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangulatedDisc {
    pub complex: DeltaComplex,
    pub boundary: Vec<usize>,
}

type Tri3 = [usize; 3];

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn face_edges(t: &Tri3) -> [(usize, usize); 3] {
    [key(t[0], t[1]), key(t[1], t[2]), key(t[2], t[0])]
}

fn edge_counts<'a>(tris: impl Iterator<Item = &'a Tri3>) -> BTreeMap<(usize, usize), usize> {
    let mut m = BTreeMap::new();
    for t in tris {
        for e in face_edges(t) {
            *m.entry(e).or_insert(0) += 1;
        }
    }
    m
}

/// Checks the disc invariants on a set of triangles with a boundary cycle.
fn check_disc(tris: &[Tri3], boundary: &[usize]) -> Result<(), SkewError> {
    let bad = |m: String| Err(SkewError::NotADisc(m));
    if tris.is_empty() {
        return bad("no faces".into());
    }
    let counts = edge_counts(tris.iter());
    if let Some((e, _)) = counts.iter().find(|(_, &c)| c > 2) {
        return bad(format!("edge {e:?} is in more than two faces"));
    }
    let bset: BTreeSet<usize> = boundary.iter().copied().collect();
    if boundary.len() < 3 || bset.len() != boundary.len() {
        return bad("boundary is not a simple cycle".into());
    }
    let bedges: BTreeSet<(usize, usize)> = (0..boundary.len()).map(|i| key(boundary[i], boundary[(i + 1) % boundary.len()])).collect();
    let once: BTreeSet<(usize, usize)> = counts.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
    if bedges != once {
        return bad("boundary cycle does not match the edges in one face".into());
    }
    let verts: BTreeSet<usize> = tris.iter().flatten().copied().collect();
    if verts.len() as i64 - counts.len() as i64 + tris.len() as i64 != 1 {
        return bad("Euler characteristic is not 1".into());
    }
    let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (f, t) in tris.iter().enumerate() {
        for e in face_edges(t) {
            by_edge.entry(e).or_default().push(f);
        }
    }
    let mut seen = vec![false; tris.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(f) = stack.pop() {
        for g in face_edges(&tris[f]).iter().flat_map(|e| &by_edge[e]) {
            if !seen[*g] {
                seen[*g] = true;
                stack.push(*g);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return bad("faces are not connected".into());
    }
    Ok(())
}

impl TriangulatedDisc {
    pub fn new(complex: DeltaComplex, boundary: Vec<usize>) -> Result<Self, SkewError> {
        let complex = complex.into_simplicial()?;
        let d = TriangulatedDisc { complex, boundary };
        check_disc(&d.triangles(), &d.boundary)?;
        Ok(d)
    }

    pub fn triangles(&self) -> Vec<Tri3> {
        (0..self.complex.face_count()).map(|f| self.complex.face_vertices(f)).collect()
    }

    /// Random disc with at least `faces` faces, grown from one triangle by
    /// coning off boundary edges and stellar subdivision of faces.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, faces: usize) -> Self {
        let mut tris: Vec<Tri3> = vec![[0, 1, 2]];
        let mut boundary = vec![0, 1, 2];
        let mut n = 3;
        while tris.len() < faces.max(1) {
            if rng.gen_bool(0.5) {
                let i = rng.gen_range(0..boundary.len());
                let (a, b) = (boundary[i], boundary[(i + 1) % boundary.len()]);
                tris.push([a, b, n]);
                boundary.insert(i + 1, n);
            } else {
                let f = rng.gen_range(0..tris.len());
                let [x, y, z] = tris[f];
                tris[f] = [x, y, n];
                tris.push([y, z, n]);
                tris.push([z, x, n]);
            }
            n += 1;
        }
        let k = DeltaComplex::from_triangles(n, &tris).expect("grown triangles are valid");
        TriangulatedDisc::new(k, boundary).expect("growth keeps disc invariants")
    }
}

fn free_in(tris: &[Option<Tri3>], boundary: &[usize]) -> Vec<usize> {
    let n = boundary.len();
    let bedges: BTreeSet<(usize, usize)> = (0..n).map(|i| key(boundary[i], boundary[(i + 1) % n])).collect();
    let bverts: BTreeSet<usize> = boundary.iter().copied().collect();
    let mut out = Vec::new();
    for (f, t) in tris.iter().enumerate() {
        let Some(t) = t else { continue };
        let on: Vec<usize> = (0..3).filter(|&s| bedges.contains(&key(t[s], t[(s + 1) % 3]))).collect();
        let free = match on.len() {
            2 | 3 => true,
            1 => !bverts.contains(&t[(on[0] + 2) % 3]),
            _ => false,
        };
        if free {
            out.push(f);
        }
    }
    out
}

/// Faces with two boundary edges, or one boundary edge and an interior
/// opposite vertex. A lone face counts as free.
pub fn free_faces(d: &TriangulatedDisc) -> Vec<usize> {
    let tris: Vec<Option<Tri3>> = d.triangles().into_iter().map(Some).collect();
    free_in(&tris, &d.boundary)
}

/// One step of a shelling: the face removed and how the boundary changed.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Move {
    /// Edge at position `t` (from `boundary[t]`) replaced by the path
    /// through `c`.
    Insert { t: usize, c: usize },
    /// Vertex at position `t` dropped.
    Remove { t: usize },
}

fn shell_moves(d: &TriangulatedDisc) -> Result<Vec<(usize, Move, Vec<usize>)>, SkewError> {
    let mut tris: Vec<Option<Tri3>> = d.triangles().into_iter().map(Some).collect();
    let mut boundary = d.boundary.clone();
    let mut out = Vec::new();
    while tris.iter().flatten().count() > 1 {
        let f = *free_in(&tris, &boundary).first().ok_or_else(|| SkewError::NotADisc("no free face".into()))?;
        let t = tris[f].expect("active face");
        let n = boundary.len();
        let pos = |v: usize| boundary.iter().position(|&x| x == v);
        let bidx: Vec<usize> = (0..n).filter(|&i| face_edges(&t).contains(&key(boundary[i], boundary[(i + 1) % n]))).collect();
        let before = boundary.clone();
        let mv = if bidx.len() == 1 {
            let i = bidx[0];
            let c = t.iter().copied().find(|v| *v != boundary[i] && *v != boundary[(i + 1) % n]).expect("third corner");
            boundary.insert(i + 1, c);
            Move::Insert { t: i, c }
        } else {
            // The corner shared by both boundary edges.
            let b = t.iter().copied().find(|&v| {
                let p = pos(v);
                p.is_some_and(|p| bidx.contains(&p) && bidx.contains(&((p + n - 1) % n)))
            });
            let b = b.ok_or_else(|| SkewError::NotADisc("free face has no ear corner".into()))?;
            let p = pos(b).expect("on boundary");
            boundary.remove(p);
            Move::Remove { t: p }
        };
        tris[f] = None;
        let rest: Vec<Tri3> = tris.iter().flatten().copied().collect();
        check_disc(&rest, &boundary)?;
        out.push((f, mv, before));
    }
    Ok(out)
}

/// Removal order of a shelling that always takes the lowest free face.
pub fn shell(d: &TriangulatedDisc) -> Result<Vec<usize>, SkewError> {
    Ok(shell_moves(d)?.into_iter().map(|(f, _, _)| f).collect())
}

/// Values on directed edges; the reverse of a stored edge gets the inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeValues(pub BTreeMap<(usize, usize), Quaternion>);

impl EdgeValues {
    pub fn get(&self, a: usize, b: usize) -> Result<Quaternion, SkewError> {
        if let Some(q) = self.0.get(&(a, b)) {
            return Ok(q.clone());
        }
        self.0.get(&(b, a)).and_then(Quaternion::inv).ok_or(SkewError::MissingEdge(a, b))
    }

    /// `U(ab) = g(a) g(b)^-1` on every edge of `d`.
    pub fn coboundary(d: &TriangulatedDisc, g: &[Quaternion]) -> Result<EdgeValues, SkewError> {
        let mut m = BTreeMap::new();
        for &[a, b] in d.complex.edges() {
            let gb = g[b].inv().ok_or_else(|| SkewError::Precondition("gauge value is zero".into()))?;
            m.insert((a, b), &g[a] * &gb);
        }
        Ok(EdgeValues(m))
    }

    fn path(&self, vs: &[usize]) -> Result<Quaternion, SkewError> {
        vs.windows(2).try_fold(Quaternion::one(), |acc, w| Ok(&acc * &self.get(w[0], w[1])?))
    }
}

/// Product of the edge values around a closed vertex walk.
fn cycle_product(u: &EdgeValues, cycle: &[usize]) -> Result<Quaternion, SkewError> {
    let mut walk = cycle.to_vec();
    walk.push(cycle[0]);
    u.path(&walk)
}

/// Boundary product `U(p1p2) … U(pkp1)` computed through a shelling: each
/// removed face contributes a conjugate of its own relation, and the last
/// face contributes its boundary. The direct product is computed as well
/// and must agree.
pub fn evaluate_boundary(d: &TriangulatedDisc, u: &EdgeValues) -> Result<Quaternion, SkewError> {
    for (a, b) in u.0.keys().copied() {
        if let Some(back) = u.0.get(&(b, a)) {
            if !(&u.0[&(a, b)] * back).is_one() {
                return Err(SkewError::NotInverse(a, b));
            }
        }
    }
    let tris = d.triangles();
    for (f, t) in tris.iter().enumerate() {
        if !cycle_product(u, t)?.is_one() {
            return Err(SkewError::FlatnessViolated(f));
        }
    }
    let direct = cycle_product(u, &d.boundary)?;

    // W(original) = left · W(current) · right.
    let (mut left, mut right) = (Quaternion::one(), Quaternion::one());
    let moves = shell_moves(d)?;
    for (_, mv, bd) in &moves {
        let n = bd.len();
        let at = |i: usize| bd[i % n];
        match *mv {
            Move::Insert { t, c } => {
                let (a, b) = (at(t), at(t + 1));
                let h = &u.path(&[a, c, b])?.inv().expect("nonzero") * &u.get(a, b)?;
                let mut tail: Vec<usize> = (t + 1..n).map(at).collect();
                tail.push(bd[0]);
                let y = u.path(&tail)?;
                let phi = &(&y.inv().expect("nonzero") * &h) * &y;
                right = &phi * &right;
            }
            Move::Remove { t } if t != 0 => {
                let (a, b, c) = (at(t - 1), at(t), at(t + 1));
                let h = &u.get(a, c)?.inv().expect("nonzero") * &u.path(&[a, b, c])?;
                let mut tail: Vec<usize> = (t + 1..n).map(at).collect();
                tail.push(bd[0]);
                let y = u.path(&tail)?;
                let phi = &(&y.inv().expect("nonzero") * &h) * &y;
                right = &phi * &right;
            }
            Move::Remove { .. } => {
                // b = bd[0] leaves; the new walk starts at c = bd[1].
                let (a, b, c) = (at(n - 1), bd[0], at(1));
                left = &left * &u.get(b, c)?;
                right = &(&u.get(a, c)?.inv().expect("nonzero") * &u.get(a, b)?) * &right;
            }
        }
    }
    let last = match moves.last() {
        Some((_, mv, bd)) => {
            let mut bd = bd.clone();
            match *mv {
                Move::Insert { t, c } => bd.insert(t + 1, c),
                Move::Remove { t } => {
                    bd.remove(t);
                }
            }
            bd
        }
        None => d.boundary.clone(),
    };
    let shelled = &(&left * &cycle_product(u, &last)?) * &right;
    if shelled != direct {
        return Err(SkewError::Disagreement);
    }
    Ok(shelled)
}

/// Random flat values: a random nonzero gauge on the vertices.
pub fn random_flat_values<R: Rng + ?Sized>(rng: &mut R, d: &TriangulatedDisc) -> EdgeValues {
    let g: Vec<Quaternion> = (0..d.complex.vertex_count()).map(|_| Quaternion::random_nonzero(rng)).collect();
    EdgeValues::coboundary(d, &g).expect("gauge is nonzero")
}

/// Points `P1 …` and lines `L1 …` in matrix order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewConfiguration {
    pub points: Vec<SkewPoint>,
    pub lines: Vec<SkewLine>,
}

impl SkewConfiguration {
    /// Hypothesis entries of `m` the configuration breaks, 0-based. The
    /// cell `(0, 0)` is the conclusion and is skipped.
    pub fn violations(&self, m: &IncidenceMatrix) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..m.rows_count().min(self.points.len()) {
            for j in 0..m.cols_count().min(self.lines.len()) {
                if (i, j) == (0, 0) {
                    continue;
                }
                let on = self.lines[j].contains(&self.points[i]);
                match m.get(i, j) {
                    Tri::PlusOne if !on => out.push((i, j)),
                    Tri::MinusOne if on => out.push((i, j)),
                    _ => {}
                }
            }
        }
        out
    }

    pub fn conclusion_holds(&self) -> bool {
        self.lines[0].contains(&self.points[0])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PappusCounterexample {
    pub configuration: SkewConfiguration,
    /// Vertices of the reference triangle `P10 P11 P12`.
    pub triangle: [SkewPoint; 3],
    /// Menelaus product of the conclusion face; `1` would mean `P1 ∈ L1`.
    pub conclusion_product: Quaternion,
}

/// Lines of the Pappus configuration, each listed by its points (1-based);
/// `L1` is the conclusion line through `P2, P7` and should hold `P1`.
pub const PAPPUS_LINES: [&[usize]; 9] =
    [&[2, 7], &[2, 3, 4], &[5, 6, 7], &[1, 8, 9], &[2, 6, 8], &[3, 7, 9], &[3, 5, 8], &[4, 6, 9], &[1, 4, 5]];

/// A Pappus configuration in the quaternion plane whose conclusion fails.
///
/// With `A = P10 = (0,0)`, `B = P11 = (1,0)`, `C = P12 = (0,1)`, the points
/// `P5, P6, P7` lie on `AB`, `P1, P8, P9` on `BC` and `P2, P3, P4` on `CA`,
/// each given by its Menelaus bracket. The torus faces `L5 … L9` fix five
/// brackets from `P5 = 2`, `P6 = v`, `P7 = u`, `P1 = 3`, and the product
/// on the face `L1` comes out as the commutator `u v u^-1 v^-1`.
pub fn pappus_counterexample(u: &Quaternion, v: &Quaternion) -> Result<PappusCounterexample, SkewError> {
    if u.commutes_with(v) {
        return Err(SkewError::Commuting);
    }
    let inv = |q: &Quaternion| q.inv().ok_or_else(|| SkewError::Degenerate("zero bracket".into()));
    let (a5, a6, a7) = (Quaternion::from_ints(2, 0, 0, 0), v.clone(), u.clone());
    let b1 = Quaternion::from_ints(3, 0, 0, 0);
    // a5 b1 c4 = 1, a6 b9 c4 = 1, a7 b9 c3 = 1, a5 b8 c3 = 1, a6 b8 c2 = 1.
    let c4 = inv(&(&a5 * &b1))?;
    let b9 = &inv(&a6)? * &inv(&c4)?;
    let c3 = inv(&(&a7 * &b9))?;
    let b8 = &inv(&a5)? * &inv(&c3)?;
    let c2 = inv(&(&a6 * &b8))?;

    let tri = [SkewPoint::from_ints(0, 0), SkewPoint::from_ints(1, 0), SkewPoint::from_ints(0, 1)];
    // A - D = k (B - D) gives D = (1 - k)^-1 (A - k B).
    let place = |x: &SkewPoint, y: &SkewPoint, k: &Quaternion| -> Result<SkewPoint, SkewError> {
        let one_minus = &Quaternion::one() - k;
        if k.is_zero() || one_minus.is_zero() {
            return Err(SkewError::Degenerate(format!("bracket {k} puts a point at a vertex or at infinity")));
        }
        Ok(x.sub(&y.lscale(k)).lscale(&inv(&one_minus)?))
    };
    let [pa, pb, pc] = &tri;
    let brackets: [(&SkewPoint, &SkewPoint, &Quaternion); 9] = [
        (pb, pc, &b1),
        (pc, pa, &c2),
        (pc, pa, &c3),
        (pc, pa, &c4),
        (pa, pb, &a5),
        (pa, pb, &a6),
        (pa, pb, &a7),
        (pb, pc, &b8),
        (pb, pc, &b9),
    ];
    let points: Vec<SkewPoint> = brackets.iter().map(|(x, y, k)| place(x, y, k)).collect::<Result<_, _>>()?;
    for i in 0..9 {
        if points[..i].contains(&points[i]) {
            return Err(SkewError::Degenerate(format!("P{} repeats an earlier point", i + 1)));
        }
    }
    let lines: Vec<SkewLine> = PAPPUS_LINES
        .iter()
        .map(|l| SkewLine::through(&points[l[0] - 1], &points[l[1] - 1]).ok_or_else(|| SkewError::Degenerate("coincident points".into())))
        .collect::<Result<_, _>>()?;
    let conclusion_product = &(&a7 * &b1) * &c2;
    Ok(PappusCounterexample { configuration: SkewConfiguration { points, lines }, triangle: tri, conclusion_product })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleReport {
    pub trials: usize,
    pub passed: usize,
    pub rejected: usize,
}

impl SampleReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

/// Random Desargues configurations: triangles `ABC` and `A'B'C'` in
/// perspective from `O`; the meets `X = AB ∩ A'B'`, `Y = BC ∩ B'C'`,
/// `Z = CA ∩ C'A'` must pass the Menelaus test on `ABC`. Degenerate draws
/// are redrawn and counted.
pub fn desargues_soundness_sample<R: Rng + ?Sized>(rng: &mut R, trials: usize) -> SampleReport {
    let mut rep = SampleReport { trials, ..Default::default() };
    let mut done = 0;
    while done < trials {
        let o = SkewPoint::random(rng);
        let [a, b, c] = [0; 3].map(|_| SkewPoint::random(rng));
        let [a2, b2, c2] = [&a, &b, &c].map(|p| SkewPoint::along(&o, p, &Quaternion::random_nonzero(rng)));
        let meet = |p: &SkewPoint, q: &SkewPoint, r: &SkewPoint, s: &SkewPoint| {
            SkewLine::through(p, q).zip(SkewLine::through(r, s)).and_then(|(l, m)| l.meet(&m))
        };
        let degenerate = collinear(&a, &b, &c)
            || collinear(&a2, &b2, &c2)
            || [&a, &b, &c].iter().any(|p| collinear(&o, p, &a) && collinear(&o, p, &b) && collinear(&o, p, &c))
            || [(&a, &a2), (&b, &b2), (&c, &c2)].iter().any(|(p, q)| p == q || **p == o);
        let meets = if degenerate { None } else { meet(&a, &b, &a2, &b2).zip(meet(&b, &c, &b2, &c2)).zip(meet(&c, &a, &c2, &a2)) };
        let Some(((x, y), z)) = meets else {
            rep.rejected += 1;
            continue;
        };
        match menelaus_check(&a, &b, &c, &x, &y, &z) {
            Ok(m) => {
                done += 1;
                if m.product_is_one && m.collinear {
                    rep.passed += 1;
                }
            }
            Err(_) => rep.rejected += 1,
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(s: &str) -> Quaternion {
        s.parse().unwrap()
    }

    #[test]
    fn units_multiply() {
        let (i, j, k) = (Quaternion::i(), Quaternion::j(), Quaternion::k());
        assert_eq!(&i * &j, k);
        assert_eq!(&j * &i, -k.clone());
        assert_eq!(&i * &i, -Quaternion::one());
        assert_eq!(&(&i * &j) * &k, -Quaternion::one());
    }

    #[test]
    fn field_laws_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let [a, b, c] = [0; 3].map(|_| Quaternion::random(&mut rng));
            assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
            if let Some(ai) = a.inv() {
                assert!((&a * &ai).is_one() && (&ai * &a).is_one());
            }
        }
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(q("1+i"), Quaternion::from_ints(1, 1, 0, 0));
        assert_eq!(q("-1/2j + 3k"), Quaternion::new(rat(0), rat(0), BigRational::new(BigInt::from(-1), BigInt::from(2)), rat(3)));
        assert_eq!(q("1,2,3,4"), Quaternion::from_ints(1, 2, 3, 4));
        assert_eq!(q("-i-j"), Quaternion::from_ints(0, -1, -1, 0));
        for s in ["1+i", "-1/2j+3k", "0", "i", "2-k", "1/3+1/2i"] {
            assert_eq!(q(s).to_string(), s);
        }
        assert!("1+x".parse::<Quaternion>().is_err());
        let js = serde_json::to_string(&q("1/2+i")).unwrap();
        assert_eq!(js, r#"["1/2","1","0","0"]"#);
        assert_eq!(serde_json::from_str::<Quaternion>(&js).unwrap(), q("1/2+i"));
    }

    #[test]
    fn bracket_examples() {
        let x = SkewPoint::new(q("1"), q("j"));
        let z = SkewPoint::new(q("2+k"), q("1"));
        assert!(left_bracket(&x, &z, &x).unwrap().is_zero());
        let y = SkewPoint::along(&x, &z, &Quaternion::i());
        assert_eq!(left_bracket(&y, &z, &x).unwrap(), Quaternion::i());
        assert_eq!(left_bracket(&y, &x, &x), Err(SkewError::DegenerateDenominator));
        let off = y.add(&SkewPoint::new(q("0"), q("1")));
        assert_eq!(left_bracket(&off, &z, &x), Err(SkewError::NotCollinear));
        // Real points: the ordinary affine ratio.
        let (x, y, z) = (SkewPoint::from_ints(0, 0), SkewPoint::from_ints(3, 6), SkewPoint::from_ints(2, 4));
        assert_eq!(left_bracket(&y, &z, &x).unwrap(), Quaternion::real(BigRational::new(BigInt::from(3), BigInt::from(2))));
    }

    #[test]
    fn lines_meet_on_both() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let [a, b, c, d] = [0; 4].map(|_| SkewPoint::random(&mut rng));
            let (Some(l), Some(m)) = (SkewLine::through(&a, &b), SkewLine::through(&c, &d)) else { continue };
            assert!(l.contains(&a) && l.contains(&b));
            if let Some(p) = l.meet(&m) {
                assert!(l.contains(&p) && m.contains(&p));
            }
        }
    }

    #[test]
    fn menelaus_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..100 {
            let [a, b, c, d, e, f] = random_menelaus_instance(&mut rng, n % 2 == 0);
            let r = menelaus_check(&a, &b, &c, &d, &e, &f).unwrap();
            assert!(r.agrees(), "{r:?}");
            if n % 2 == 0 {
                assert!(r.collinear);
            }
        }
    }

    #[test]
    fn menelaus_perturbed_point_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let [a, b, c, d, e, f] = random_menelaus_instance(&mut rng, true);
        let k = left_bracket(&c, &a, &f).unwrap();
        let f2 = SkewPoint::along(&c, &a, &(&k * &Quaternion::i()));
        let r = menelaus_check(&a, &b, &c, &d, &e, &f2).unwrap();
        assert!(!r.collinear && !r.product_is_one);
        assert!(matches!(menelaus_check(&a, &b, &c, &a, &e, &f), Err(SkewError::Precondition(_))));
    }

    #[test]
    fn three_homotheties_with_unit_product_translate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let k1 = Quaternion::random_nonzero(&mut rng);
            let k2 = Quaternion::random_nonzero(&mut rng);
            let k3 = (&k1 * &k2).inv().unwrap();
            let hs = [k1, k2, k3].map(|k| Homothety { k, center: SkewPoint::random(&mut rng) });
            // h1 ∘ h2 ∘ h3 scales by k1 k2 k3 = 1.
            let m = hs[0].as_affine().after(&hs[1].as_affine()).after(&hs[2].as_affine());
            assert!(m.is_translation());
            let p = SkewPoint::random(&mut rng);
            let composed = hs[0].apply(&hs[1].apply(&hs[2].apply(&p)));
            assert_eq!(composed, m.apply(&p));
            assert_eq!(composed.sub(&p), m.t);
        }
    }

    fn disc(tris: &[Tri3], n: usize, boundary: Vec<usize>) -> TriangulatedDisc {
        TriangulatedDisc::new(DeltaComplex::from_triangles(n, tris).unwrap(), boundary).unwrap()
    }

    #[test]
    fn small_discs() {
        let one = disc(&[[0, 1, 2]], 3, vec![0, 1, 2]);
        assert_eq!(free_faces(&one), vec![0]);
        assert!(shell(&one).unwrap().is_empty());
        let two = disc(&[[0, 1, 2], [0, 2, 3]], 4, vec![0, 1, 2, 3]);
        assert_eq!(free_faces(&two), vec![0, 1]);
        assert_eq!(shell(&two).unwrap(), vec![0]);
        assert!(matches!(
            TriangulatedDisc::new(DeltaComplex::from_triangles(4, &[[0, 1, 2], [0, 2, 3]]).unwrap(), vec![0, 1, 2]),
            Err(SkewError::NotADisc(_))
        ));
    }

    #[test]
    fn random_discs_shell_and_evaluate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..40 {
            let n = rng.gen_range(1..30);
            let d = TriangulatedDisc::random(&mut rng, n);
            let faces = d.complex.face_count();
            if faces > 1 {
                assert!(free_faces(&d).len() >= 2);
            }
            assert_eq!(shell(&d).unwrap().len(), faces - 1);
            let u = random_flat_values(&mut rng, &d);
            assert!(evaluate_boundary(&d, &u).unwrap().is_one());
        }
    }

    #[test]
    fn non_flat_values_are_refused() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = TriangulatedDisc::random(&mut rng, 8);
        let mut u = random_flat_values(&mut rng, &d);
        let e = *u.0.keys().next().unwrap();
        let bumped = &u.0[&e] * &Quaternion::from_ints(2, 0, 0, 0);
        u.0.insert(e, bumped);
        assert!(matches!(evaluate_boundary(&d, &u), Err(SkewError::FlatnessViolated(_))));
    }

    #[test]
    fn shelling_tracks_a_non_identity_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let d = TriangulatedDisc::random(&mut rng, 20);
            let u = random_flat_values(&mut rng, &d);
            assert_eq!(evaluate_boundary(&d, &u).unwrap(), cycle_product(&u, &d.boundary).unwrap());
        }
    }

    #[test]
    fn pappus_over_quaternions() {
        let c = pappus_counterexample(&Quaternion::i(), &Quaternion::j()).unwrap();
        assert_eq!(c.conclusion_product, -Quaternion::one());
        assert!(!c.configuration.conclusion_holds());
        for (j, l) in PAPPUS_LINES.iter().enumerate().skip(1) {
            for &p in l.iter() {
                assert!(c.configuration.lines[j].contains(&c.configuration.points[p - 1]), "P{p} L{}", j + 1);
            }
        }
        assert!(pappus_counterexample(&q("1+i"), &q("1+j")).is_ok());
        assert_eq!(pappus_counterexample(&Quaternion::i(), &Quaternion::i()), Err(SkewError::Commuting));
    }

    #[test]
    fn desargues_samples_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = desargues_soundness_sample(&mut rng, 20);
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(desargues_soundness_sample(&mut rng, 0), SampleReport::default());
    }
}
