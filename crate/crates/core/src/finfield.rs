//! Small Galois fields and the projective plane over them.
//!
//! Elements are indices `0..q`. For prime `q` the index is the residue. For
//! `q = 4, 8` the bits of the index are polynomial coefficients (bit `i` is
//! the coefficient of `x^i`) modulo `x^2+x+1` and `x^3+x+1`. For `q = 9` the
//! index `a + 3b` stands for `a + b x` modulo `x^2+1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Elem = u8;

pub const SUPPORTED: [u32; 7] = [2, 3, 4, 5, 7, 8, 9];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("unsupported field order {0} (supported: 2, 3, 4, 5, 7, 8, 9)")]
    Unsupported(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("field tables for q={q} violate {axiom}")]
    AxiomViolated { q: u32, axiom: &'static str },
    #[error("element {0} is not in the field")]
    BadElement(u32),
    #[error("coordinates are all zero")]
    ZeroVector,
    #[error("points are not collinear")]
    NotCollinear,
    #[error("point lies on the chart line")]
    DegenerateChart,
    #[error("base point coincides with the division point")]
    CoincidentBase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    q: u32,
    p: u32,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
}

fn poly_mul_mod(a: u32, b: u32, p: u32, deg: u32, modulus: &[u32]) -> u32 {
    // Coefficient vectors in base p, little-endian; `modulus` lists the
    // coefficients of x^deg reduced, i.e. x^deg = -(modulus[0] + modulus[1] x + ...).
    let digits = |mut v: u32| {
        let mut d = vec![0u32; deg as usize];
        for slot in d.iter_mut() {
            *slot = v % p;
            v /= p;
        }
        d
    };
    let (da, db) = (digits(a), digits(b));
    let mut prod = vec![0u32; 2 * deg as usize];
    for (i, x) in da.iter().enumerate() {
        for (j, y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for top in (deg as usize..prod.len()).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        prod[top] = 0;
        for (k, m) in modulus.iter().enumerate() {
            let at = top - deg as usize + k;
            prod[at] = (prod[at] + p * p - (c * m) % p) % p;
        }
    }
    prod[..deg as usize].iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn poly_add(a: u32, b: u32, p: u32, deg: u32) -> u32 {
    let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
    for _ in 0..deg {
        out += ((a % p + b % p) % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

impl Field {
    pub fn new(q: u32) -> Result<Field, FieldError> {
        let (p, deg, modulus): (u32, u32, &[u32]) = match q {
            2 | 3 | 5 | 7 => (q, 1, &[0]),
            4 => (2, 2, &[1, 1]),
            8 => (2, 3, &[1, 1, 0]),
            9 => (3, 2, &[1, 0]),
            _ => return Err(FieldError::Unsupported(q)),
        };
        let n = q as usize;
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for a in 0..q {
            for b in 0..q {
                let (s, t) = if deg == 1 {
                    ((a + b) % p, (a * b) % p)
                } else {
                    (poly_add(a, b, p, deg), poly_mul_mod(a, b, p, deg, modulus))
                };
                add[(a * q + b) as usize] = s as Elem;
                mul[(a * q + b) as usize] = t as Elem;
            }
        }
        let neg = (0..n).map(|a| (0..n).find(|&b| add[a * n + b] == 0).unwrap_or(0) as Elem).collect();
        let inv = (0..n).map(|a| if a == 0 { 0 } else { (1..n).find(|&b| mul[a * n + b] == 1).unwrap_or(0) as Elem }).collect();
        let f = Field { q, p, add, mul, neg, inv };
        f.check_axioms()?;
        Ok(f)
    }

    fn check_axioms(&self) -> Result<(), FieldError> {
        let q = self.q as Elem;
        let fail = |axiom| Err(FieldError::AxiomViolated { q: self.q, axiom });
        for a in 0..q {
            if self.add(a, 0) != a || self.mul(a, 1) != a {
                return fail("identities");
            }
            if self.add(a, self.neg(a)) != 0 {
                return fail("additive inverses");
            }
            if a != 0 && self.mul(a, self.inv[a as usize]) != 1 {
                return fail("multiplicative inverses");
            }
            for b in 0..q {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return fail("commutativity");
                }
                for c in 0..q {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return fail("additive associativity");
                    }
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return fail("multiplicative associativity");
                    }
                    if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                        return fail("distributivity");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.q as usize + b as usize]
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.inv[a as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u32) -> Elem {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    /// Smallest element generating the multiplicative group.
    pub fn generator(&self) -> Elem {
        let n = self.q - 1;
        (1..self.q as Elem)
            .find(|&g| (1..n).all(|e| n % e != 0 || self.pow(g, e) != 1))
            .expect("multiplicative group of a finite field is cyclic")
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q as Elem
    }

    pub fn check(&self, a: u32) -> Result<Elem, FieldError> {
        if a < self.q {
            Ok(a as Elem)
        } else {
            Err(FieldError::BadElement(a))
        }
    }

    pub fn dot(&self, a: [Elem; 3], b: [Elem; 3]) -> Elem {
        let s = self.add(self.mul(a[0], b[0]), self.mul(a[1], b[1]));
        self.add(s, self.mul(a[2], b[2]))
    }

    pub fn cross(&self, a: [Elem; 3], b: [Elem; 3]) -> [Elem; 3] {
        let c = |i: usize, j: usize| self.sub(self.mul(a[i], b[j]), self.mul(a[j], b[i]));
        [c(1, 2), c(2, 0), c(0, 1)]
    }

    /// Scales so the first nonzero coordinate is 1.
    pub fn normalize(&self, v: [Elem; 3]) -> Result<[Elem; 3], FieldError> {
        let lead = v.iter().copied().find(|&x| x != 0).ok_or(FieldError::ZeroVector)?;
        let s = self.inv(lead)?;
        Ok(v.map(|x| self.mul(x, s)))
    }

    /// All normalized nonzero triples in lexicographic order; these are the
    /// points (and, dually, the lines) of the projective plane.
    pub fn projective_triples(&self) -> Vec<[Elem; 3]> {
        let q = self.q as Elem;
        let mut out = Vec::with_capacity((self.q * self.q + self.q + 1) as usize);
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let v = [a, b, c];
                    if v != [0, 0, 0] && self.normalize(v).ok() == Some(v) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    pub fn points(&self) -> Vec<ProjPoint> {
        self.projective_triples().into_iter().map(ProjPoint).collect()
    }

    pub fn lines(&self) -> Vec<ProjLine> {
        self.projective_triples().into_iter().map(ProjLine).collect()
    }

    pub fn point(&self, v: [u32; 3]) -> Result<ProjPoint, FieldError> {
        Ok(ProjPoint(self.normalize(self.elems(v)?)?))
    }

    pub fn line(&self, v: [u32; 3]) -> Result<ProjLine, FieldError> {
        Ok(ProjLine(self.normalize(self.elems(v)?)?))
    }

    /// Affine point `(x, y)` in the chart `z != 0`.
    pub fn affine(&self, x: u32, y: u32) -> Result<ProjPoint, FieldError> {
        self.point([x, y, 1])
    }

    fn elems(&self, v: [u32; 3]) -> Result<[Elem; 3], FieldError> {
        Ok([self.check(v[0])?, self.check(v[1])?, self.check(v[2])?])
    }

    pub fn incident(&self, p: ProjPoint, l: ProjLine) -> bool {
        self.dot(p.0, l.0) == 0
    }

    pub fn join(&self, a: ProjPoint, b: ProjPoint) -> Option<ProjLine> {
        self.normalize(self.cross(a.0, b.0)).ok().map(ProjLine)
    }

    pub fn meet(&self, a: ProjLine, b: ProjLine) -> Option<ProjPoint> {
        self.normalize(self.cross(a.0, b.0)).ok().map(ProjPoint)
    }

    pub fn collinear(&self, a: ProjPoint, b: ProjPoint, c: ProjPoint) -> bool {
        self.dot(self.cross(a.0, b.0), c.0) == 0
    }

    /// The `k` with `A - X = k (B - X)` in the affine chart complementary to
    /// `chart`; `Infinity` when `X` itself lies on the chart line.
    pub fn menelaus_ratio(
        &self,
        a: ProjPoint,
        b: ProjPoint,
        x: ProjPoint,
        chart: ProjLine,
    ) -> Result<Ratio, FieldError> {
        if !self.collinear(a, b, x) {
            return Err(FieldError::NotCollinear);
        }
        let (ha, hb, hx) = (self.dot(a.0, chart.0), self.dot(b.0, chart.0), self.dot(x.0, chart.0));
        if ha == 0 || hb == 0 {
            return Err(FieldError::DegenerateChart);
        }
        if hx == 0 {
            return Ok(Ratio::Infinity);
        }
        let aff = |v: [Elem; 3], h: Elem| {
            let s = self.inv[h as usize];
            v.map(|c| self.mul(c, s))
        };
        let (va, vb, vx) = (aff(a.0, ha), aff(b.0, hb), aff(x.0, hx));
        let num: Vec<Elem> = (0..3).map(|i| self.sub(va[i], vx[i])).collect();
        let den: Vec<Elem> = (0..3).map(|i| self.sub(vb[i], vx[i])).collect();
        let Some(i) = (0..3).find(|&i| den[i] != 0) else {
            if num.iter().all(|&c| c == 0) {
                return Ok(Ratio::Finite(0));
            }
            return Err(FieldError::CoincidentBase);
        };
        let k = self.mul(num[i], self.inv[den[i] as usize]);
        debug_assert!((0..3).all(|j| num[j] == self.mul(k, den[j])));
        Ok(Ratio::Finite(k))
    }

    /// The line `z = 0`.
    pub fn default_chart(&self) -> ProjLine {
        ProjLine([0, 0, 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjPoint(pub [Elem; 3]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjLine(pub [Elem; 3]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ratio {
    Finite(Elem),
    Infinity,
}

/// Points and lines of the plane over `F_q`, listed in matrix order.
/// Repetitions are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub q: u32,
    pub points: Vec<ProjPoint>,
    pub lines: Vec<ProjLine>,
}

impl Configuration {
    /// Checks that every coordinate is a field element and every triple is
    /// normalized.
    pub fn check(&self, f: &Field) -> Result<(), FieldError> {
        if f.order() != self.q {
            return Err(FieldError::Unsupported(self.q));
        }
        for v in self.points.iter().map(|p| p.0).chain(self.lines.iter().map(|l| l.0)) {
            for c in v {
                f.check(c as u32)?;
            }
            if f.normalize(v)? != v {
                return Err(FieldError::ZeroVector);
            }
        }
        Ok(())
    }

    /// Normalizes every triple in place, so hand-written files may use any
    /// representative.
    pub fn normalized(mut self, f: &Field) -> Result<Self, FieldError> {
        for p in &mut self.points {
            p.0 = f.normalize(p.0)?;
        }
        for l in &mut self.lines {
            l.0 = f.normalize(l.0)?;
        }
        Ok(self)
    }
}
