//! Excision of an open face over an abelian group.
//!
//! A cochain assigns a group element to every edge; it is flat on a face when
//! the signed sum around the face vanishes. A face can be excised over `G`
//! when every cochain flat on all other faces is flat on it too. Additively
//! this asks whether the face's boundary row is killed by every homomorphism
//! `Z^E / rowspan(B) -> G`, which the Smith normal form of `B` decides.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::complex::DeltaComplex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExciseError {
    #[error("face {0} does not exist")]
    FaceNotFound(usize),
    #[error("oracle limited to at most {max_edges} edges and modulus 2..={max_modulus}, got {edges} edges and modulus {modulus}")]
    TooLarge { edges: usize, modulus: u64, max_edges: usize, max_modulus: u64 },
    #[error("bad group spec: {0}")]
    BadGroup(String),
}

pub const ORACLE_MAX_EDGES: usize = 30;
pub const ORACLE_MAX_MODULUS: u64 = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Torsion {
    /// Direct sum of cyclic groups of the given orders.
    Finite(Vec<u64>),
    /// Every finite cyclic group embeds (roots of unity in ℂ).
    Full,
}

/// What the kill test needs to know about a multiplicative group: whether it
/// has elements of infinite order, and its torsion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    pub infinite: bool,
    pub torsion: Torsion,
}

impl GroupSpec {
    pub fn new(infinite: bool, torsion: Torsion) -> Result<Self, ExciseError> {
        if let Torsion::Finite(ms) = &torsion {
            if ms.iter().any(|&m| m == 0) {
                return Err(ExciseError::BadGroup("cyclic orders must be at least 1".into()));
            }
        }
        Ok(GroupSpec { infinite, torsion })
    }

    /// ℝ*: infinite order elements and the torsion {±1}.
    pub fn reals() -> Self {
        GroupSpec { infinite: true, torsion: Torsion::Finite(vec![2]) }
    }

    /// ℂ*: infinite order elements and all roots of unity.
    pub fn complexes() -> Self {
        GroupSpec { infinite: true, torsion: Torsion::Full }
    }

    /// 𝔽_q*, cyclic of order `q - 1`.
    pub fn finite_field(q: u64) -> Self {
        GroupSpec { infinite: false, torsion: Torsion::Finite(vec![q.saturating_sub(1).max(1)]) }
    }

    /// 𝔽_q(X)*: the constants plus the free group on irreducibles.
    pub fn rational_functions(q: u64) -> Self {
        GroupSpec { infinite: true, torsion: Torsion::Finite(vec![q.saturating_sub(1).max(1)]) }
    }

    /// Z/n as an abstract group.
    pub fn cyclic(n: u64) -> Self {
        GroupSpec { infinite: false, torsion: Torsion::Finite(vec![n.max(1)]) }
    }

    pub fn trivial() -> Self {
        GroupSpec { infinite: false, torsion: Torsion::Finite(vec![]) }
    }

    /// Least common multiple of the torsion orders; `None` when unbounded.
    pub fn exponent(&self) -> Option<u64> {
        match &self.torsion {
            Torsion::Full => None,
            Torsion::Finite(ms) => Some(ms.iter().fold(1u64, |acc, &m| acc.lcm(&m))),
        }
    }

    /// Whether `k * x = 0` has only the solution `x = 0`.
    pub fn torsion_coprime(&self, k: u64) -> bool {
        torsion_coprime(k, self)
    }

    /// Whether an integer `x`, viewed in a free summand `Z`, is killed by
    /// every homomorphism into this group.
    fn kills_free(&self, x: &BigInt) -> bool {
        if x.is_zero() {
            return true;
        }
        if self.infinite {
            return false;
        }
        match self.exponent() {
            None => false,
            Some(e) => (x % BigInt::from(e)).is_zero(),
        }
    }

    /// Whether `x mod d`, viewed in `Z/d`, is killed by every homomorphism
    /// into this group.
    fn kills_torsion(&self, x: &BigInt, d: &BigInt) -> bool {
        match &self.torsion {
            Torsion::Full => (x % d).is_zero(),
            Torsion::Finite(ms) => ms.iter().all(|&m| (x % d.gcd(&BigInt::from(m))).is_zero()),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.infinite {
            parts.push("free".to_string());
        }
        match &self.torsion {
            Torsion::Full => parts.push("Q/Z".into()),
            Torsion::Finite(ms) => parts.extend(ms.iter().filter(|&&m| m > 1).map(|m| format!("Z/{m}"))),
        }
        if parts.is_empty() {
            write!(f, "trivial group")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Accepts `R*`, `C*`, `F<q>*`, `F<q>(X)*`, `Z/<n>`, `trivial`, or a raw
/// JSON spec.
impl FromStr for GroupSpec {
    type Err = ExciseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.starts_with('{') {
            return serde_json::from_str(t).map_err(|e| ExciseError::BadGroup(e.to_string()));
        }
        match t {
            "R*" | "R" => return Ok(GroupSpec::reals()),
            "C*" | "C" => return Ok(GroupSpec::complexes()),
            "trivial" => return Ok(GroupSpec::trivial()),
            _ => {}
        }
        let bad = || ExciseError::BadGroup(format!("unknown group {t:?}"));
        if let Some(n) = t.strip_prefix("Z/") {
            let n: u64 = n.parse().map_err(|_| bad())?;
            return if n == 0 { Err(bad()) } else { Ok(GroupSpec::cyclic(n)) };
        }
        let body = t.strip_prefix('F').ok_or_else(bad)?;
        let body = body.strip_suffix('*').unwrap_or(body);
        let (digits, rational) = match body.strip_suffix("(X)") {
            Some(d) => (d, true),
            None => (body, false),
        };
        let q: u64 = digits.parse().map_err(|_| bad())?;
        if !is_prime_power(q) {
            return Err(ExciseError::BadGroup(format!("{q} is not a prime power")));
        }
        Ok(if rational { GroupSpec::rational_functions(q) } else { GroupSpec::finite_field(q) })
    }
}

fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let p = (2..=q).find(|d| q % d == 0).expect("q >= 2");
    let mut r = q;
    while r % p == 0 {
        r /= p;
    }
    r == 1
}

impl Serialize for GroupSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let torsion = match &self.torsion {
            Torsion::Full => serde_json::Value::from("full"),
            Torsion::Finite(ms) => serde_json::Value::from(ms.clone()),
        };
        serde_json::json!({ "infinite": self.infinite, "torsion": torsion }).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Full(String),
            Finite(Vec<u64>),
        }
        #[derive(Deserialize)]
        struct Spec {
            infinite: bool,
            torsion: Raw,
        }
        let spec = Spec::deserialize(d)?;
        let torsion = match spec.torsion {
            Raw::Full(s) if s == "full" => Torsion::Full,
            Raw::Full(s) => return Err(serde::de::Error::custom(format!("torsion must be a list or \"full\", got {s:?}"))),
            Raw::Finite(ms) => Torsion::Finite(ms),
        };
        GroupSpec::new(spec.infinite, torsion).map_err(serde::de::Error::custom)
    }
}

/// True iff `G` has no nonzero element killed by `k`.
pub fn torsion_coprime(k: u64, g: &GroupSpec) -> bool {
    match &g.torsion {
        Torsion::Full => false,
        Torsion::Finite(ms) => ms.iter().all(|&m| k.gcd(&m) == 1),
    }
}

/// Dense integer matrix, row-major.
pub type IntMatrix = Vec<Vec<BigInt>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    /// Nonzero diagonal entries, in divisibility order.
    pub fn divisors(&self) -> Vec<BigInt> {
        (0..self.d.len().min(self.d.first().map_or(0, Vec::len))).map(|i| self.d[i][i].clone()).filter(|x| !x.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.divisors().len()
    }
}

fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix, inner: usize) -> IntMatrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| if row[k].is_zero() { acc } else { acc + &row[k] * &b[k][j] }))
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free elimination (Bareiss).
pub fn determinant(a: &IntMatrix) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// `U·A·V = D` with `U`, `V` unimodular and `D` diagonal, `d1 | d2 | ...`,
/// all divisors nonnegative. Pivots on the smallest absolute value.
pub fn smith_normal_form(a: &IntMatrix) -> Smith {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut d = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry in the remaining block.
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !d[i][j].is_zero())
            .min_by(|&(i, j), &(k, l)| d[i][j].abs().cmp(&d[k][l].abs()));
        let Some((pi, pj)) = pivot else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        for row in d.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            if d[i][t].is_zero() {
                continue;
            }
            let q = d[i][t].div_floor(&d[t][t]);
            row_axpy(&mut d, i, t, &q);
            row_axpy(&mut u, i, t, &q);
            clean &= d[i][t].is_zero();
        }
        for j in t + 1..cols {
            if d[t][j].is_zero() {
                continue;
            }
            let q = d[t][j].div_floor(&d[t][t]);
            col_axpy(&mut d, j, t, &q);
            col_axpy(&mut v, j, t, &q);
            clean &= d[t][j].is_zero();
        }
        if !clean {
            continue;
        }
        // Divisibility: fold a row holding a non-multiple into row t.
        let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&d[i][j] % &d[t][t]).is_zero()));
        if let Some(i) = bad {
            let minus_one = -BigInt::one();
            row_axpy(&mut d, t, i, &minus_one);
            row_axpy(&mut u, t, i, &minus_one);
            continue;
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    let out = Smith { u, d, v };
    #[cfg(test)]
    check_smith(a, &out);
    out
}

/// `m[target] -= q * m[source]`.
fn row_axpy(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    let src = m[source].clone();
    for (x, s) in m[target].iter_mut().zip(src) {
        if !s.is_zero() {
            *x -= q * s;
        }
    }
}

/// Column `target -= q * column source`.
fn col_axpy(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    for row in m.iter_mut() {
        if !row[source].is_zero() {
            let s = row[source].clone();
            row[target] -= q * s;
        }
    }
}

#[cfg(test)]
fn check_smith(a: &IntMatrix, s: &Smith) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return;
    }
    let ua = mat_mul(&s.u, a, rows);
    assert_eq!(mat_mul(&ua, &s.v, cols), s.d, "U A V != D");
    assert!(determinant(&s.u).abs().is_one(), "U is not unimodular");
    assert!(determinant(&s.v).abs().is_one(), "V is not unimodular");
    for i in 0..rows {
        for j in 0..cols {
            assert!(i == j || s.d[i][j].is_zero(), "D is not diagonal");
        }
    }
    let divs = s.divisors();
    for w in divs.windows(2) {
        assert!((&w[1] % &w[0]).is_zero(), "divisibility chain broken");
    }
}

/// One row per face: signed multiplicity of each edge in the face's walk.
pub fn boundary_matrix(k: &DeltaComplex) -> Vec<Vec<i64>> {
    k.faces()
        .iter()
        .map(|face| {
            let mut row = vec![0i64; k.edge_count()];
            for d in face {
                row[d.edge] += if d.forward { 1 } else { -1 };
            }
            row
        })
        .collect()
}

/// Decides whether `face` can be excised over `g`.
pub fn can_excise(k: &DeltaComplex, face: usize, g: &GroupSpec) -> Result<bool, ExciseError> {
    if face >= k.face_count() {
        return Err(ExciseError::FaceNotFound(face));
    }
    let all = boundary_matrix(k);
    let b0: Vec<BigInt> = all[face].iter().map(|&x| BigInt::from(x)).collect();
    let others: IntMatrix = all
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != face)
        .map(|(_, r)| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let e = k.edge_count();
    if e == 0 {
        return Ok(true);
    }
    if others.is_empty() {
        // Quotient is all of Z^E.
        return Ok(b0.iter().all(|x| g.kills_free(x)));
    }
    let s = smith_normal_form(&others);
    // Rowspan(B)·V = rowspan(D), so b0·V gives coordinates in the quotient.
    let y = mat_mul(&vec![b0], &s.v, e).remove(0);
    let divs = s.divisors();
    Ok(y.iter().enumerate().all(|(i, x)| match divs.get(i) {
        Some(d) => g.kills_torsion(x, d),
        None => g.kills_free(x),
    }))
}

/// A Z/n-valued edge cochain; the value on a reversed edge is the negative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cochain {
    pub modulus: u64,
    pub values: BTreeMap<usize, u64>,
}

impl Cochain {
    pub fn value(&self, edge: usize) -> u64 {
        self.values.get(&edge).copied().unwrap_or(0)
    }

    /// Signed sum around a face, reduced mod n.
    pub fn face_sum(&self, k: &DeltaComplex, face: usize) -> u64 {
        let n = self.modulus as i64;
        let s: i64 = k.face(face).iter().map(|d| if d.forward { self.value(d.edge) as i64 } else { -(self.value(d.edge) as i64) }).sum();
        s.rem_euclid(n) as u64
    }
}

/// A failing Z/n cochain for the smallest `n` that embeds in `g` (up to
/// [`ORACLE_MAX_MODULUS`]) and blocks excision. `None` when no such `n`
/// exists, e.g. when only the free part of `g` obstructs.
pub fn witness_cochain(k: &DeltaComplex, face: usize, g: &GroupSpec) -> Result<Option<Cochain>, ExciseError> {
    let ns: Vec<u64> = match &g.torsion {
        Torsion::Full => (2..=ORACLE_MAX_MODULUS).collect(),
        Torsion::Finite(ms) => {
            let set: std::collections::BTreeSet<u64> =
                ms.iter().flat_map(|&m| (2..=m.min(ORACLE_MAX_MODULUS)).filter(move |d| m % d == 0)).collect();
            set.into_iter().collect()
        }
    };
    for n in ns {
        if !can_excise(k, face, &GroupSpec::cyclic(n))? {
            return failing_cochain(k, face, n);
        }
    }
    Ok(None)
}

/// Brute-force excision over Z/n: searches cochains flat on every other
/// face for one that is not flat on `face`.
pub fn oracle_can_excise(k: &DeltaComplex, face: usize, n: u64) -> Result<bool, ExciseError> {
    Ok(failing_cochain(k, face, n)?.is_none())
}

/// A Z/n cochain flat on every face but `face` and not flat on `face`.
///
/// Values are fixed to 0 on a spanning forest of the 1-skeleton (every
/// cochain is cohomologous to such a one and face sums are unchanged); the
/// rest is a backtracking search that fills the last open edge of a face as
/// soon as the face constraint determines it.
pub fn failing_cochain(k: &DeltaComplex, face: usize, n: u64) -> Result<Option<Cochain>, ExciseError> {
    if face >= k.face_count() {
        return Err(ExciseError::FaceNotFound(face));
    }
    if k.edge_count() > ORACLE_MAX_EDGES || !(2..=ORACLE_MAX_MODULUS).contains(&n) {
        return Err(ExciseError::TooLarge { edges: k.edge_count(), modulus: n, max_edges: ORACLE_MAX_EDGES, max_modulus: ORACLE_MAX_MODULUS });
    }
    let rows = boundary_matrix(k);
    let mut fixed: Vec<Option<i64>> = vec![None; k.edge_count()];
    let mut parent: Vec<usize> = (0..k.vertex_count()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (e, &[t, h]) in k.edges().iter().enumerate() {
        let (a, b) = (find(&mut parent, t), find(&mut parent, h));
        if a != b {
            parent[a] = b;
            fixed[e] = Some(0);
        }
    }
    let constraints: Vec<Vec<(usize, i64)>> = rows
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != face)
        .map(|(_, r)| r.iter().enumerate().filter(|&(_, &c)| c != 0).map(|(e, &c)| (e, c)).collect())
        .collect();
    let target: Vec<(usize, i64)> = rows[face].iter().enumerate().filter(|&(_, &c)| c != 0).map(|(e, &c)| (e, c)).collect();
    let search = Oracle { n: n as i64, constraints, target };
    Ok(search.dfs(fixed).map(|values| Cochain {
        modulus: n,
        values: values.into_iter().enumerate().map(|(e, v)| (e, v.expect("complete") as u64)).collect(),
    }))
}

struct Oracle {
    n: i64,
    constraints: Vec<Vec<(usize, i64)>>,
    target: Vec<(usize, i64)>,
}

impl Oracle {
    fn sum(&self, values: &[Option<i64>], terms: &[(usize, i64)]) -> Option<i64> {
        let mut s = 0;
        for &(e, c) in terms {
            s += c * values[e]?;
        }
        Some(s.rem_euclid(self.n))
    }

    /// Fills edges forced by a constraint with one open edge of unit
    /// coefficient; `false` on a violated constraint.
    fn propagate(&self, values: &mut [Option<i64>]) -> bool {
        loop {
            let mut changed = false;
            for c in &self.constraints {
                let open: Vec<&(usize, i64)> = c.iter().filter(|(e, _)| values[*e].is_none()).collect();
                match open.as_slice() {
                    [] => {
                        if self.sum(values, c) != Some(0) {
                            return false;
                        }
                    }
                    [&(e, coef)] => {
                        let coef = coef.rem_euclid(self.n);
                        let Some(inv) = (1..self.n).find(|x| (x * coef) % self.n == 1) else { continue };
                        let rest: i64 = c.iter().filter(|(f, _)| *f != e).map(|&(f, k)| k * values[f].expect("closed")).sum();
                        values[e] = Some((-rest * inv).rem_euclid(self.n));
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn dfs(&self, mut values: Vec<Option<i64>>) -> Option<Vec<Option<i64>>> {
        if !self.propagate(&mut values) {
            return None;
        }
        let Some(e) = values.iter().position(Option::is_none) else {
            return (self.sum(&values, &self.target) != Some(0)).then_some(values);
        };
        (0..self.n).find_map(|x| {
            let mut next = values.clone();
            next[e] = Some(x);
            self.dfs(next)
        })
    }
}

/// Converts a small integer matrix for [`smith_normal_form`].
pub fn to_big(a: &[Vec<i64>]) -> IntMatrix {
    a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

/// Diagonal of `D` as machine integers, for display.
pub fn small_divisors(s: &Smith) -> Vec<i64> {
    s.divisors().iter().map(|d| d.to_i64().unwrap_or(i64::MAX)).collect()
}
