//! Ternary incidence matrices.
//!
//! Rows are points, columns are lines. `+1` forces incidence, `-1` forces
//! non-incidence and `0` leaves the pair unconstrained. All indices in this
//! module are 0-based; the CLI and the certificate format use 1-based cells.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrimatError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("entry {0} is not one of -1, 0, 1")]
    BadEntry(i64),
    #[error("index ({0}, {1}) out of range")]
    IndexOutOfRange(usize, usize),
    #[error("seed at ({row}, {col}) conflicts with existing value {existing}")]
    SeedConflict { row: usize, col: usize, existing: Tri },
    #[error("entry ({0}, {1}) is not -1")]
    NotNegative(usize, usize),
    #[error("{zeros} zero entries exceed the case-split cap of {cap}")]
    TooManyZeros { zeros: usize, cap: usize },
}

/// A single matrix entry. The derived order is `MinusOne < Zero < PlusOne`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tri {
    MinusOne,
    Zero,
    PlusOne,
}

impl Tri {
    pub fn as_i8(self) -> i8 {
        match self {
            Tri::MinusOne => -1,
            Tri::Zero => 0,
            Tri::PlusOne => 1,
        }
    }

    pub fn from_i64(v: i64) -> Result<Tri, TrimatError> {
        match v {
            -1 => Ok(Tri::MinusOne),
            0 => Ok(Tri::Zero),
            1 => Ok(Tri::PlusOne),
            _ => Err(TrimatError::BadEntry(v)),
        }
    }

    pub fn neg(self) -> Tri {
        match self {
            Tri::MinusOne => Tri::PlusOne,
            Tri::Zero => Tri::Zero,
            Tri::PlusOne => Tri::MinusOne,
        }
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

impl Serialize for Tri {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for Tri {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Tri::from_i64(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IncidenceMatrix {
    m: usize,
    n: usize,
    entries: Vec<Tri>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    m: usize,
    n: usize,
    entries: Vec<Vec<Tri>>,
}

impl Serialize for IncidenceMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson { m: self.m, n: self.n, entries: self.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IncidenceMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let m = IncidenceMatrix::from_rows(raw.entries).map_err(serde::de::Error::custom)?;
        if m.m != raw.m || m.n != raw.n {
            return Err(serde::de::Error::custom(format!(
                "declared size {}x{} does not match entries {}x{}",
                raw.m, raw.n, m.m, m.n
            )));
        }
        Ok(m)
    }
}

impl IncidenceMatrix {
    pub fn zeros(m: usize, n: usize) -> Result<Self, TrimatError> {
        if m == 0 || n == 0 {
            return Err(TrimatError::Empty);
        }
        Ok(IncidenceMatrix { m, n, entries: vec![Tri::Zero; m * n] })
    }

    pub fn from_rows(rows: Vec<Vec<Tri>>) -> Result<Self, TrimatError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(TrimatError::Empty);
        }
        let mut entries = Vec::with_capacity(m * n);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(TrimatError::RaggedRow { row: i, got: r.len(), expected: n });
            }
            entries.extend(r);
        }
        Ok(IncidenceMatrix { m, n, entries })
    }

    /// Build from integer rows, e.g. a literal copied from a printed matrix.
    pub fn from_ints<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self, TrimatError> {
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&v| Tri::from_i64(v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(rows)
    }

    pub fn rows_count(&self) -> usize {
        self.m
    }

    pub fn cols_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Tri {
        self.entries[i * self.n + j]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<Tri, TrimatError> {
        if i >= self.m || j >= self.n {
            return Err(TrimatError::IndexOutOfRange(i, j));
        }
        Ok(self.get(i, j))
    }

    /// Returns a copy with one entry replaced.
    pub fn with(&self, i: usize, j: usize, v: Tri) -> Result<Self, TrimatError> {
        if i >= self.m || j >= self.n {
            return Err(TrimatError::IndexOutOfRange(i, j));
        }
        let mut out = self.clone();
        out.entries[i * self.n + j] = v;
        Ok(out)
    }

    fn set(&mut self, i: usize, j: usize, v: Tri) {
        self.entries[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Tri>> {
        self.entries.chunks(self.n).map(<[Tri]>::to_vec).collect()
    }

    pub fn to_ints(&self) -> Vec<Vec<i8>> {
        self.entries.chunks(self.n).map(|r| r.iter().map(|t| t.as_i8()).collect()).collect()
    }

    pub fn zero_cells(&self) -> Vec<(usize, usize)> {
        (0..self.m)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) == Tri::Zero)
            .collect()
    }

    pub fn count(&self, v: Tri) -> usize {
        self.entries.iter().filter(|&&t| t == v).count()
    }

    /// Cells where the two matrices differ. Panics on a size mismatch.
    pub fn diff(&self, other: &IncidenceMatrix) -> Vec<(usize, usize, Tri, Tri)> {
        assert_eq!((self.m, self.n), (other.m, other.n), "size mismatch");
        let mut out = Vec::new();
        for i in 0..self.m {
            for j in 0..self.n {
                if self.get(i, j) != other.get(i, j) {
                    out.push((i, j, self.get(i, j), other.get(i, j)));
                }
            }
        }
        out
    }

    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let mut out = self.clone();
        for i in 0..self.m {
            for j in 0..self.n {
                out.set(row_perm[i], col_perm[j], self.get(i, j));
            }
        }
        out
    }
}

impl fmt::Display for IncidenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.entries.chunks(self.n) {
            let line: Vec<String> = r.iter().map(|t| format!("{:>2}", t.as_i8())).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Rows and columns of a forbidden 3x3 submatrix, listed in pattern order:
/// the rows read `[-1, 1, *]`, `[1, 1, 1]`, `[1, 1, -1]` across the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternWitness {
    pub rows: [usize; 3],
    pub cols: [usize; 3],
}

impl PatternWitness {
    pub fn holds_in(&self, m: &IncidenceMatrix) -> bool {
        use Tri::*;
        let [a, b, c] = self.rows;
        let [x, y, z] = self.cols;
        distinct3(self.rows)
            && distinct3(self.cols)
            && m.get(a, x) == MinusOne
            && m.get(a, y) == PlusOne
            && [m.get(b, x), m.get(b, y), m.get(b, z)] == [PlusOne; 3]
            && [m.get(c, x), m.get(c, y), m.get(c, z)] == [PlusOne, PlusOne, MinusOne]
    }
}

fn distinct3(t: [usize; 3]) -> bool {
    t[0] != t[1] && t[1] != t[2] && t[0] != t[2]
}

/// Searches for two points forced distinct that both lie on two lines
/// forced distinct.
///
/// Lines `x, y` are provably distinct when some row holds `-1` on one and
/// `+1` on the other. Points `b, c` on both are provably distinct when some
/// column `z` holds `+1` at `b` and `-1` at `c`.
pub fn contradicts_incidence_axiom(mat: &IncidenceMatrix) -> Option<PatternWitness> {
    use Tri::*;
    let (m, n) = (mat.m, mat.n);
    let mut common = Vec::with_capacity(m);
    for x in 0..n {
        for y in (x + 1)..n {
            let mut sep = None;
            common.clear();
            for r in 0..m {
                match (mat.get(r, x), mat.get(r, y)) {
                    (PlusOne, PlusOne) => common.push(r),
                    (MinusOne, PlusOne) if sep.is_none() => sep = Some((r, x, y)),
                    (PlusOne, MinusOne) if sep.is_none() => sep = Some((r, y, x)),
                    _ => {}
                }
            }
            let Some((a, x, y)) = sep else { continue };
            if common.len() < 2 {
                continue;
            }
            for &b in &common {
                for &c in &common {
                    if b == c {
                        continue;
                    }
                    if let Some(z) = (0..n).find(|&z| mat.get(b, z) == PlusOne && mat.get(c, z) == MinusOne) {
                        return Some(PatternWitness { rows: [a, b, c], cols: [x, y, z] });
                    }
                }
            }
        }
    }
    None
}

/// Reference implementation: tries every ordered triple of rows and columns.
/// Cubic in both dimensions; meant for cross-checking the fast search.
pub fn contradicts_incidence_axiom_naive(mat: &IncidenceMatrix) -> Option<PatternWitness> {
    let (m, n) = (mat.m, mat.n);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                if !distinct3([a, b, c]) {
                    continue;
                }
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            let w = PatternWitness { rows: [a, b, c], cols: [x, y, z] };
                            if w.holds_in(mat) {
                                return Some(w);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

pub fn is_tautology(m: &IncidenceMatrix) -> bool {
    m.get(0, 0) == Tri::PlusOne
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweeps {
    Limit(usize),
    Fixpoint,
}

/// Outcome of [`propagate_traced`]: the matrix plus how many sweeps ran and
/// whether the last one changed nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Propagation {
    pub matrix: IncidenceMatrix,
    pub sweeps: usize,
    pub stable: bool,
}

pub fn propagate(
    m: &IncidenceMatrix,
    seeds: &[(usize, usize, Tri)],
    sweeps: Sweeps,
) -> Result<IncidenceMatrix, TrimatError> {
    propagate_traced(m, seeds, sweeps).map(|p| p.matrix)
}

/// Seeds cells, then sweeps zero cells in row-major order. Each zero is
/// tentatively set to `+1`; if that creates the forbidden pattern the cell
/// becomes `-1`, otherwise it goes back to `0`.
pub fn propagate_traced(
    m: &IncidenceMatrix,
    seeds: &[(usize, usize, Tri)],
    sweeps: Sweeps,
) -> Result<Propagation, TrimatError> {
    let mut cur = m.clone();
    for &(i, j, v) in seeds {
        let existing = cur.try_get(i, j)?;
        if existing != Tri::Zero && existing != v {
            return Err(TrimatError::SeedConflict { row: i, col: j, existing });
        }
        cur.set(i, j, v);
    }
    let cap = match sweeps {
        Sweeps::Limit(k) => k,
        Sweeps::Fixpoint => usize::MAX,
    };
    let mut done = 0;
    let mut stable = false;
    while done < cap {
        done += 1;
        let mut changed = false;
        for i in 0..cur.m {
            for j in 0..cur.n {
                if cur.get(i, j) != Tri::Zero {
                    continue;
                }
                cur.set(i, j, Tri::PlusOne);
                if contradicts_incidence_axiom(&cur).is_some() {
                    cur.set(i, j, Tri::MinusOne);
                    changed = true;
                } else {
                    cur.set(i, j, Tri::Zero);
                }
            }
        }
        if !changed {
            stable = true;
            break;
        }
    }
    Ok(Propagation { matrix: cur, sweeps: done, stable })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum AuxKind {
    /// New point on lines `c1` and `c2`.
    PointOnTwoLines { c1: usize, c2: usize },
    /// New line through points `r1` and `r2`.
    LineThroughTwoPoints { r1: usize, r2: usize },
    GenericPoint,
    GenericLine,
}

pub fn aux_join(m: &IncidenceMatrix, kind: AuxKind) -> Result<IncidenceMatrix, TrimatError> {
    match kind {
        AuxKind::PointOnTwoLines { c1, c2 } => {
            if c1 >= m.n || c2 >= m.n {
                return Err(TrimatError::IndexOutOfRange(m.m, c1.max(c2)));
            }
            let mut row = vec![Tri::Zero; m.n];
            row[c1] = Tri::PlusOne;
            row[c2] = Tri::PlusOne;
            Ok(append_row(m, row))
        }
        AuxKind::GenericPoint => Ok(append_row(m, vec![Tri::MinusOne; m.n])),
        AuxKind::LineThroughTwoPoints { r1, r2 } => {
            if r1 >= m.m || r2 >= m.m {
                return Err(TrimatError::IndexOutOfRange(r1.max(r2), m.n));
            }
            let mut col = vec![Tri::Zero; m.m];
            col[r1] = Tri::PlusOne;
            col[r2] = Tri::PlusOne;
            Ok(append_col(m, col))
        }
        AuxKind::GenericLine => Ok(append_col(m, vec![Tri::MinusOne; m.m])),
    }
}

fn append_row(m: &IncidenceMatrix, row: Vec<Tri>) -> IncidenceMatrix {
    let mut out = m.clone();
    out.entries.extend(row);
    out.m += 1;
    out
}

fn append_col(m: &IncidenceMatrix, col: Vec<Tri>) -> IncidenceMatrix {
    let mut entries = Vec::with_capacity(m.m * (m.n + 1));
    for (i, r) in m.entries.chunks(m.n).enumerate() {
        entries.extend_from_slice(r);
        entries.push(col[i]);
    }
    IncidenceMatrix { m: m.m, n: m.n + 1, entries }
}

/// Sets `(0,0)` to `-1`, then swaps rows `0,i` and columns `0,j`, moving the
/// negative entry at `(i,j)` into the corner.
pub fn contradiction_form(m: &IncidenceMatrix, i: usize, j: usize) -> Result<IncidenceMatrix, TrimatError> {
    if m.try_get(i, j)? != Tri::MinusOne {
        return Err(TrimatError::NotNegative(i, j));
    }
    let mut out = m.with(0, 0, Tri::MinusOne)?;
    if i != 0 {
        for c in 0..out.n {
            out.entries.swap(c, i * out.n + c);
        }
    }
    if j != 0 {
        for r in 0..out.m {
            out.entries.swap(r * out.n, r * out.n + j);
        }
    }
    Ok(out)
}

pub const DEFAULT_CASE_CAP: usize = 20;

/// Lazy enumeration of all `±1` completions of the zero cells.
#[derive(Debug, Clone)]
pub struct CaseSplit {
    base: IncidenceMatrix,
    zeros: Vec<(usize, usize)>,
    next: u64,
    total: u64,
}

impl CaseSplit {
    pub fn zero_cells(&self) -> &[(usize, usize)] {
        &self.zeros
    }
}

impl Iterator for CaseSplit {
    type Item = IncidenceMatrix;

    fn next(&mut self) -> Option<IncidenceMatrix> {
        if self.next >= self.total {
            return None;
        }
        let k = self.zeros.len();
        let mut out = self.base.clone();
        for (bit, &(i, j)) in self.zeros.iter().enumerate() {
            // The first zero cell is the most significant digit.
            let plus = (self.next >> (k - 1 - bit)) & 1 == 1;
            out.set(i, j, if plus { Tri::PlusOne } else { Tri::MinusOne });
        }
        self.next += 1;
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for CaseSplit {}

pub fn case_split(m: &IncidenceMatrix, cap: usize) -> Result<CaseSplit, TrimatError> {
    let zeros = m.zero_cells();
    if zeros.len() > cap || zeros.len() >= 63 {
        return Err(TrimatError::TooManyZeros { zeros: zeros.len(), cap });
    }
    Ok(CaseSplit { base: m.clone(), total: 1u64 << zeros.len(), zeros, next: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> IncidenceMatrix {
        IncidenceMatrix::from_ints(rows).unwrap()
    }

    #[test]
    fn pattern_itself_is_found() {
        let m = mat(&[&[-1, 1, 0], &[1, 1, 1], &[1, 1, -1]]);
        let w = contradicts_incidence_axiom(&m).unwrap();
        assert_eq!(w, PatternWitness { rows: [0, 1, 2], cols: [0, 1, 2] });
        assert!(contradicts_incidence_axiom_naive(&m).is_some());
    }

    #[test]
    fn zero_matrix_has_no_pattern() {
        assert!(contradicts_incidence_axiom(&IncidenceMatrix::zeros(3, 3).unwrap()).is_none());
    }

    #[test]
    fn axiom_matrix_with_corner_negated() {
        let m = mat(&[&[0, 1, 0], &[1, 1, 1], &[1, 1, -1]]);
        assert!(contradicts_incidence_axiom(&m).is_none());
        let m = m.with(0, 0, Tri::MinusOne).unwrap();
        assert!(contradicts_incidence_axiom(&m).is_some());
    }

    #[test]
    fn tautology_is_corner_plus_one() {
        assert!(is_tautology(&mat(&[&[1, 0]])));
        assert!(!is_tautology(&mat(&[&[0, 1]])));
    }

    #[test]
    fn propagate_without_zeros_is_identity() {
        let m = mat(&[&[1, -1], &[-1, 1]]);
        assert_eq!(propagate(&m, &[], Sweeps::Fixpoint).unwrap(), m);
    }

    #[test]
    fn seed_conflict() {
        let m = mat(&[&[1, 0]]);
        let err = propagate(&m, &[(0, 0, Tri::MinusOne)], Sweeps::Fixpoint).unwrap_err();
        assert!(matches!(err, TrimatError::SeedConflict { .. }));
        assert!(propagate(&m, &[(0, 0, Tri::PlusOne)], Sweeps::Fixpoint).is_ok());
    }

    #[test]
    fn aux_join_shapes() {
        let one = IncidenceMatrix::zeros(1, 1).unwrap();
        assert_eq!(aux_join(&one, AuxKind::GenericLine).unwrap(), mat(&[&[0, -1]]));
        let warm = mat(&[&[0, 1, -1, 0], &[1, 1, 0, -1], &[1, 1, 1, 0], &[0, 1, 1, 1]]);
        let out = aux_join(&warm, AuxKind::GenericPoint).unwrap();
        assert_eq!(out.rows_count(), 5);
        assert_eq!(out.rows()[4], vec![Tri::MinusOne; 4]);
        let out = aux_join(&warm, AuxKind::LineThroughTwoPoints { r1: 1, r2: 1 }).unwrap();
        assert_eq!(out.cols_count(), 5);
        assert_eq!(out.get(1, 4), Tri::PlusOne);
        assert_eq!(out.count(Tri::PlusOne), warm.count(Tri::PlusOne) + 1);
        assert!(aux_join(&warm, AuxKind::PointOnTwoLines { c1: 0, c2: 4 }).is_err());
    }

    #[test]
    fn contradiction_form_small() {
        let m = mat(&[&[0, 1], &[-1, 0]]);
        assert_eq!(contradiction_form(&m, 1, 0).unwrap(), mat(&[&[-1, 0], &[-1, 1]]));
        let m = mat(&[&[-1, 1], &[0, 0]]);
        assert_eq!(contradiction_form(&m, 0, 0).unwrap(), m);
        assert_eq!(contradiction_form(&m, 0, 1), Err(TrimatError::NotNegative(0, 1)));
    }

    #[test]
    fn case_split_counts_and_order() {
        let m = mat(&[&[0, 1, 0], &[1, 1, 1], &[1, 1, -1]]);
        let all: Vec<_> = case_split(&m, DEFAULT_CASE_CAP).unwrap().collect();
        // Zeros at (1,1) and (1,3): four completions, each a tautology or an
        // axiom contradiction.
        assert_eq!(all.len(), 4);
        for x in &all[..2] {
            assert_eq!(x.get(0, 0), Tri::MinusOne);
            assert!(contradicts_incidence_axiom(x).is_some());
        }
        assert!(all[2..].iter().all(is_tautology));
        let one = IncidenceMatrix::zeros(1, 1).unwrap();
        assert_eq!(case_split(&one, DEFAULT_CASE_CAP).unwrap().count(), 2);

        let m = mat(&[&[0, 0], &[1, 0]]);
        let all: Vec<_> = case_split(&m, DEFAULT_CASE_CAP).unwrap().collect();
        assert_eq!(all.len(), 8);
        for (a, x) in all.iter().enumerate() {
            assert_eq!(x.count(Tri::Zero), 0);
            for y in &all[a + 1..] {
                assert_ne!(x, y);
            }
        }
        assert_eq!(all[1].to_ints(), vec![vec![-1, -1], vec![1, 1]]);
        assert!(case_split(&IncidenceMatrix::zeros(3, 7).unwrap(), 20).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = mat(&[&[0, 1, -1], &[1, 1, 0]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"m":2,"n":3,"entries":[[0,1,-1],[1,1,0]]}"#);
        assert_eq!(serde_json::from_str::<IncidenceMatrix>(&s).unwrap(), m);
        assert!(serde_json::from_str::<IncidenceMatrix>(r#"{"m":1,"n":1,"entries":[[2]]}"#).is_err());
        assert!(serde_json::from_str::<IncidenceMatrix>(r#"{"m":2,"n":1,"entries":[[1]]}"#).is_err());
    }

    fn arb_matrix(max: usize) -> impl Strategy<Value = IncidenceMatrix> {
        (1..=max, 1..=max).prop_flat_map(|(m, n)| {
            proptest::collection::vec(proptest::collection::vec(-1i64..=1, n), m)
                .prop_map(|rows| IncidenceMatrix::from_ints(&rows).unwrap())
        })
    }

    fn arb_perm(k: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..k).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn fast_search_agrees_with_naive(m in arb_matrix(6)) {
            let fast = contradicts_incidence_axiom(&m);
            let slow = contradicts_incidence_axiom_naive(&m);
            prop_assert_eq!(fast.is_some(), slow.is_some());
            if let Some(w) = fast {
                prop_assert!(w.holds_in(&m));
            }
        }

        #[test]
        fn pattern_is_permutation_invariant(
            (m, rp, cp) in arb_matrix(6).prop_flat_map(|m| {
                let (r, c) = (m.rows_count(), m.cols_count());
                (Just(m), arb_perm(r), arb_perm(c))
            })
        ) {
            let p = m.permuted(&rp, &cp);
            prop_assert_eq!(contradicts_incidence_axiom(&m).is_some(), contradicts_incidence_axiom(&p).is_some());
        }

        #[test]
        fn propagate_is_monotone_and_idempotent(m in arb_matrix(5)) {
            let out = propagate(&m, &[], Sweeps::Fixpoint).unwrap();
            for (i, j, before, after) in m.diff(&out) {
                prop_assert_eq!(before, Tri::Zero, "cell ({}, {}) changed from nonzero", i, j);
                prop_assert_eq!(after, Tri::MinusOne);
            }
            prop_assert_eq!(propagate(&out, &[], Sweeps::Fixpoint).unwrap(), out);
        }

        #[test]
        fn aux_join_grows_one_dimension(m in arb_matrix(5), pick in 0usize..4) {
            let kind = match pick {
                0 => AuxKind::GenericPoint,
                1 => AuxKind::GenericLine,
                2 => AuxKind::PointOnTwoLines { c1: 0, c2: m.cols_count() - 1 },
                _ => AuxKind::LineThroughTwoPoints { r1: m.rows_count() - 1, r2: 0 },
            };
            let out = aux_join(&m, kind).unwrap();
            let grew = (out.rows_count() - m.rows_count(), out.cols_count() - m.cols_count());
            prop_assert!(grew == (1, 0) || grew == (0, 1));
            for i in 0..m.rows_count() {
                for j in 0..m.cols_count() {
                    prop_assert_eq!(out.get(i, j), m.get(i, j));
                }
            }
        }
    }
}
