//! Proof certificates: auxiliary constructions, a binary case tree over
//! matrix cells, and a justification at every leaf.
//!
//! All cell and aux indices in certificates are 1-based. Complexes inside an
//! `elementary` leaf label points and lines of the leaf matrix; when a
//! target `(i, j)` is given, the complex's marked pair carries labels `i`
//! and `j` instead of 1 (a proof by contradiction).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{validate_elementary_proof, MarkedComplex, ValidationReport};
use crate::excise::GroupSpec;
use crate::trimat::{
    aux_join, contradiction_form, contradicts_incidence_axiom, is_tautology, propagate, AuxKind, IncidenceMatrix,
    PatternWitness, Sweeps, Tri, TrimatError,
};

#[derive(Debug, Error)]
pub enum CertError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {what}: {source}")]
    Parse { what: String, source: serde_json::Error },
    #[error("case tree does not cover every completion: {0}")]
    CoverageGap(String),
    #[error("aux step {step}: {source}")]
    Aux { step: usize, source: TrimatError },
}

/// One auxiliary construction, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum AuxStep {
    PointOnTwoLines { c1: usize, c2: usize },
    LineThroughTwoPoints { r1: usize, r2: usize },
    GenericPoint,
    GenericLine,
}

impl AuxStep {
    fn to_kind(self) -> Result<AuxKind, TrimatError> {
        let dec = |x: usize| x.checked_sub(1).ok_or(TrimatError::IndexOutOfRange(0, 0));
        Ok(match self {
            AuxStep::PointOnTwoLines { c1, c2 } => AuxKind::PointOnTwoLines { c1: dec(c1)?, c2: dec(c2)? },
            AuxStep::LineThroughTwoPoints { r1, r2 } => AuxKind::LineThroughTwoPoints { r1: dec(r1)?, r2: dec(r2)? },
            AuxStep::GenericPoint => AuxKind::GenericPoint,
            AuxStep::GenericLine => AuxKind::GenericLine,
        })
    }
}

/// A complex given inline or as a path relative to the certificate file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRef {
    Path(String),
    Inline(Box<MarkedComplex>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Justification {
    /// The leaf matrix has `+1` at `(1, 1)`.
    Tautology,
    /// The leaf matrix contains the forbidden pattern; a witness (0-based,
    /// as printed by the library) is optional.
    AxiomContradiction {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witness: Option<PatternWitness>,
    },
    Elementary {
        complex: ComplexRef,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<[usize; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Split {
    pub cell: [usize; 2],
    pub minus: Option<Box<CaseTree>>,
    pub plus: Option<Box<CaseTree>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CaseTree {
    Split(Split),
    Leaf(Justification),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub base_matrix: IncidenceMatrix,
    #[serde(default)]
    pub aux_steps: Vec<AuxStep>,
    pub case_tree: CaseTree,
    pub group_spec: GroupSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LeafReport {
    /// Seeds on the path from the root, 1-based.
    pub seeds: Vec<(usize, usize, i8)>,
    pub kind: String,
    pub pass: bool,
    pub diagnostics: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertReport {
    pub valid: bool,
    pub rows: usize,
    pub cols: usize,
    pub leaves: Vec<LeafReport>,
}

pub fn load_certificate(path: &Path) -> Result<Certificate, CertError> {
    let text = std::fs::read_to_string(path).map_err(|source| CertError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CertError::Parse { what: path.display().to_string(), source })
}

/// Applies the aux steps to the base matrix.
pub fn expanded_matrix(c: &Certificate) -> Result<IncidenceMatrix, CertError> {
    c.aux_steps.iter().enumerate().try_fold(c.base_matrix.clone(), |m, (step, a)| {
        a.to_kind().and_then(|k| aux_join(&m, k)).map_err(|source| CertError::Aux { step: step + 1, source })
    })
}

/// Checks every node has both children.
pub fn check_coverage(t: &CaseTree) -> Result<(), CertError> {
    fn walk(t: &CaseTree, path: &mut Vec<String>) -> Result<(), CertError> {
        match t {
            CaseTree::Leaf(_) => Ok(()),
            CaseTree::Split(s) => {
                for (v, child) in [(-1, &s.minus), (1, &s.plus)] {
                    path.push(format!("({},{})={v}", s.cell[0], s.cell[1]));
                    match child {
                        Some(c) => walk(c, path)?,
                        None => return Err(CertError::CoverageGap(format!("no branch for {}", path.join(", ")))),
                    }
                    path.pop();
                }
                Ok(())
            }
        }
    }
    walk(t, &mut Vec::new())
}

/// Validates a certificate. `base_dir` resolves complex paths.
pub fn validate_certificate(c: &Certificate, base_dir: &Path) -> Result<CertReport, CertError> {
    check_coverage(&c.case_tree)?;
    let m = expanded_matrix(c)?;
    let mut leaves = Vec::new();
    walk(&c.case_tree, &m, &mut Vec::new(), c, base_dir, &mut leaves);
    Ok(CertReport { valid: leaves.iter().all(|l| l.pass), rows: m.rows_count(), cols: m.cols_count(), leaves })
}

fn walk(t: &CaseTree, m: &IncidenceMatrix, seeds: &mut Vec<(usize, usize, i8)>, c: &Certificate, dir: &Path, out: &mut Vec<LeafReport>) {
    match t {
        CaseTree::Leaf(j) => out.push(check_leaf(j, m, seeds.clone(), c, dir)),
        CaseTree::Split(s) => {
            let [i, jj] = s.cell;
            for (v, child) in [(Tri::MinusOne, &s.minus), (Tri::PlusOne, &s.plus)] {
                let child = child.as_ref().expect("coverage checked");
                seeds.push((i, jj, v.as_i8()));
                let fail = |msg: String| LeafReport { seeds: seeds.clone(), kind: "split".into(), pass: false, diagnostics: vec![msg], validation: None };
                let cell = i.checked_sub(1).zip(jj.checked_sub(1)).filter(|&(a, b)| a < m.rows_count() && b < m.cols_count());
                match cell {
                    None => out.push(fail(format!("cell ({i},{jj}) is outside the {}x{} matrix", m.rows_count(), m.cols_count()))),
                    Some((a, b)) if m.get(a, b) != Tri::Zero => out.push(fail(format!("cell ({i},{jj}) is {} here, not zero", m.get(a, b)))),
                    Some((a, b)) => match propagate(m, &[(a, b, v)], Sweeps::Fixpoint) {
                        Ok(next) => walk(child, &next, seeds, c, dir, out),
                        Err(e) => out.push(fail(e.to_string())),
                    },
                }
                seeds.pop();
            }
        }
    }
}

fn check_leaf(j: &Justification, m: &IncidenceMatrix, seeds: Vec<(usize, usize, i8)>, c: &Certificate, dir: &Path) -> LeafReport {
    let mut rep = LeafReport { seeds, kind: String::new(), pass: false, diagnostics: Vec::new(), validation: None };
    match j {
        Justification::Tautology => {
            rep.kind = "tautology".into();
            rep.pass = is_tautology(m);
            if !rep.pass {
                rep.diagnostics.push(format!("(1,1) is {}, not +1", m.get(0, 0)));
            }
        }
        Justification::AxiomContradiction { witness } => {
            rep.kind = "axiomContradiction".into();
            match witness {
                Some(w) => {
                    rep.pass = w.holds_in(m);
                    if !rep.pass {
                        rep.diagnostics.push(format!("claimed pattern {w:?} is not in the matrix"));
                    }
                }
                None => match contradicts_incidence_axiom(m) {
                    Some(w) => {
                        rep.pass = true;
                        rep.diagnostics.push(format!("pattern rows {:?} cols {:?} (1-based)", w.rows.map(|x| x + 1), w.cols.map(|x| x + 1)));
                    }
                    None => rep.diagnostics.push("no forbidden pattern".into()),
                },
            }
        }
        Justification::Elementary { complex, target } => {
            rep.kind = "elementary".into();
            let mc = match complex {
                ComplexRef::Inline(mc) => Ok((**mc).clone()),
                ComplexRef::Path(p) => load_complex(&dir.join(p)),
            };
            let mc = match mc.and_then(|mc| mc.checked().map_err(|e| e.to_string())) {
                Ok(mc) => mc,
                Err(e) => {
                    rep.diagnostics.push(e);
                    return rep;
                }
            };
            let (matrix, mc) = match *target {
                None => (m.clone(), mc),
                Some([ti, tj]) => match ti.checked_sub(1).zip(tj.checked_sub(1)).map(|(a, b)| contradiction_form(m, a, b)) {
                    Some(Ok(mm)) => {
                        let swap = |t: usize| move |x: usize| if x == t { 1 } else if x == 1 { t } else { x };
                        let labeling = mc.labeling.mapped(swap(ti), swap(tj));
                        (mm, MarkedComplex { labeling, ..mc })
                    }
                    Some(Err(e)) => {
                        rep.diagnostics.push(format!("target ({ti},{tj}): {e}"));
                        return rep;
                    }
                    None => {
                        rep.diagnostics.push("target cells are 1-based".into());
                        return rep;
                    }
                },
            };
            let v = validate_elementary_proof(&mc, &matrix, &c.group_spec);
            rep.pass = v.valid;
            rep.diagnostics.extend(v.violations.iter().map(|x| x.message.clone()));
            rep.validation = Some(v);
        }
    }
    rep
}

pub fn load_complex(path: &Path) -> Result<MarkedComplex, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(j: Justification) -> Option<Box<CaseTree>> {
        Some(Box::new(CaseTree::Leaf(j)))
    }

    /// Row a = [?, 1, 0], b = [1, 1, 1], c = [1, 1, -1]: putting -1 at the
    /// corner completes the forbidden pattern.
    fn axiom_matrix() -> IncidenceMatrix {
        IncidenceMatrix::from_ints(&[vec![0, 1, 0], vec![1, 1, 1], vec![1, 1, -1]]).unwrap()
    }

    #[test]
    fn split_on_corner_needs_no_complexes() {
        let cert = Certificate {
            base_matrix: axiom_matrix(),
            aux_steps: vec![],
            case_tree: CaseTree::Split(Split {
                cell: [1, 1],
                minus: leaf(Justification::AxiomContradiction { witness: None }),
                plus: leaf(Justification::Tautology),
            }),
            group_spec: GroupSpec::reals(),
        };
        let rep = validate_certificate(&cert, Path::new(".")).unwrap();
        assert!(rep.valid, "{rep:?}");
        assert_eq!(rep.leaves.len(), 2);
    }

    #[test]
    fn missing_branch_is_a_coverage_gap() {
        let cert = Certificate {
            base_matrix: axiom_matrix(),
            aux_steps: vec![],
            case_tree: CaseTree::Split(Split { cell: [1, 1], minus: None, plus: leaf(Justification::Tautology) }),
            group_spec: GroupSpec::reals(),
        };
        assert!(matches!(validate_certificate(&cert, Path::new(".")), Err(CertError::CoverageGap(_))));
    }

    #[test]
    fn wrong_justification_fails_its_leaf() {
        let cert = Certificate {
            base_matrix: axiom_matrix(),
            aux_steps: vec![],
            case_tree: CaseTree::Leaf(Justification::Tautology),
            group_spec: GroupSpec::reals(),
        };
        let rep = validate_certificate(&cert, Path::new(".")).unwrap();
        assert!(!rep.valid);
    }

    #[test]
    fn aux_steps_are_one_based() {
        let cert = Certificate {
            base_matrix: axiom_matrix(),
            aux_steps: vec![AuxStep::PointOnTwoLines { c1: 1, c2: 3 }, AuxStep::LineThroughTwoPoints { r1: 1, r2: 4 }],
            case_tree: CaseTree::Leaf(Justification::Tautology),
            group_spec: GroupSpec::reals(),
        };
        let m = expanded_matrix(&cert).unwrap();
        assert_eq!((m.rows_count(), m.cols_count()), (4, 4));
        assert_eq!(m.get(3, 0), Tri::PlusOne);
        assert_eq!(m.get(3, 2), Tri::PlusOne);
        assert_eq!(m.get(0, 3), Tri::PlusOne);
        assert_eq!(m.get(3, 3), Tri::PlusOne);
    }

    #[test]
    fn certificate_json_shape() {
        let text = r#"{
            "baseMatrix": {"m": 3, "n": 3, "entries": [[0,1,0],[1,1,1],[1,1,-1]]},
            "auxSteps": [{"kind": "genericPoint"}],
            "caseTree": {"split": {"cell": [1, 1],
                "minus": {"leaf": {"kind": "axiomContradiction"}},
                "plus": {"leaf": {"kind": "tautology"}}}},
            "groupSpec": {"infinite": true, "torsion": [2]}
        }"#;
        let c: Certificate = serde_json::from_str(text).unwrap();
        assert_eq!(c.aux_steps, vec![AuxStep::GenericPoint]);
        assert!(validate_certificate(&c, Path::new(".")).unwrap().valid);
    }
}
