//! Finite unitary designs standing in for the Haar integral.
//!
//! The Weyl set is a 1-design. The single-qudit Clifford groups for d = 2, 3,
//! enumerated by breadth-first closure over two generators, are 2-designs.
//! A design's declared strength is only trusted after [`verify_design`].

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::channels::{unitary_choi, UnitaryEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{self, kron, CMatrix, C64};
use crate::moments::{first_moment_exact, second_moment_exact, MomentOrder, MomentReport};
use crate::tolerance;

/// Upper bound on group-closure size.
pub const CLOSURE_CAP: usize = 100_000;

const CANON_GRID: f64 = 1e12;
const NONZERO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryDesign {
    d: usize,
    elements: Vec<CMatrix>,
    strength: u8,
    name: String,
}

impl UnitaryDesign {
    /// Validates unitarity and distinctness up to phase; strength is
    /// declared, not checked.
    pub fn new(d: usize, elements: Vec<CMatrix>, strength: u8, name: impl Into<String>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Empty);
        }
        if !(1..=2).contains(&strength) {
            return Err(Error::Precondition(format!("design strength {strength} not in {{1, 2}}")));
        }
        let mut seen = HashSet::new();
        let mut canon = Vec::with_capacity(elements.len());
        for (index, u) in elements.into_iter().enumerate() {
            if u.shape() != (d, d) {
                return Err(crate::error::shape_mismatch((d, d), u.shape()));
            }
            let residual = linalg::unitarity_residual(&u);
            if residual > tolerance::UNITARY {
                return Err(Error::NotUnitary { index, residual });
            }
            let c = canonicalize_phase(&u);
            if !seen.insert(phase_key(&c)) {
                return Err(Error::Precondition(format!("element {index} repeats an earlier one up to phase")));
            }
            canon.push(c);
        }
        Ok(Self { d, elements: canon, strength, name: name.into() })
    }

    /// Reads a design out of a uniformly weighted ensemble.
    pub fn from_ensemble(e: &UnitaryEnsemble, strength: u8, name: impl Into<String>) -> Result<Self> {
        let w0 = 1.0 / e.len() as f64;
        if e.weights().any(|w| (w - w0).abs() > tolerance::WEIGHT_SUM) {
            return Err(Error::Precondition("design ensembles must be uniformly weighted".into()));
        }
        Self::new(e.d(), e.unitaries().cloned().collect(), strength, name)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn strength(&self) -> u8 {
        self.strength
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn to_ensemble(&self) -> UnitaryEnsemble {
        UnitaryEnsemble::uniform(self.d, self.elements.clone()).expect("design elements are unitary")
    }
}

/// Rescales `u` so its first nonzero entry (row-major) is real positive.
pub fn canonicalize_phase(u: &CMatrix) -> CMatrix {
    let (rows, cols) = u.shape();
    let pivot = (0..rows * cols).map(|k| u[(k / cols, k % cols)]).find(|z| z.norm() > NONZERO);
    match pivot {
        Some(z) => u * (z.conj() / z.norm()),
        None => u.clone(),
    }
}

fn phase_key(canon: &CMatrix) -> Vec<(i64, i64)> {
    let (rows, cols) = canon.shape();
    (0..rows * cols)
        .map(|k| {
            let z = canon[(k / cols, k % cols)];
            ((z.re * CANON_GRID).round() as i64, (z.im * CANON_GRID).round() as i64)
        })
        .collect()
}

/// Cyclic shift `X|j> = |j+1 mod d>`.
pub fn shift_operator(d: usize) -> CMatrix {
    let mut x = CMatrix::zeros(d, d);
    for j in 0..d {
        x[((j + 1) % d, j)] = linalg::ONE;
    }
    x
}

fn root_of_unity(d: usize, k: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((k % d) as f64) / d as f64)
}

/// Clock `Z|j> = ω^j |j>`.
pub fn clock_operator(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == j { root_of_unity(d, i) } else { linalg::ZERO })
}

/// Discrete Fourier matrix `F_{jk} = ω^{jk} / √d`.
pub fn fourier_matrix(d: usize) -> CMatrix {
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |j, k| root_of_unity(d, j * k) * s)
}

/// The `d^2` Weyl operators `X^a Z^b`.
pub fn weyl_operators(d: usize) -> Result<UnitaryDesign> {
    if d < 2 {
        return Err(Error::InvalidDimension { d, reason: "Weyl operators need d >= 2" });
    }
    let x = shift_operator(d);
    let z = clock_operator(d);
    let mut elements = Vec::with_capacity(d * d);
    let mut xa = linalg::identity(d);
    for _ in 0..d {
        let mut zb = linalg::identity(d);
        for _ in 0..d {
            elements.push(&xa * &zb);
            zb = &zb * &z;
        }
        xa = &xa * &x;
    }
    UnitaryDesign::new(d, elements, 1, format!("weyl-{d}"))
}

/// Closure of `generators` under multiplication modulo global phase.
pub fn group_closure(d: usize, generators: &[CMatrix], cap: usize) -> Result<Vec<CMatrix>> {
    let start = linalg::identity(d);
    let mut seen = HashSet::from([phase_key(&start)]);
    let mut elements = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(g) = queue.pop_front() {
        for h in generators {
            let next = canonicalize_phase(&(h * &g));
            if seen.insert(phase_key(&next)) {
                if elements.len() >= cap {
                    return Err(Error::ClosureOverflow { cap });
                }
                elements.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(elements)
}

/// Single-qudit Clifford group modulo phase: 24 elements for d = 2 and
/// 216 for d = 3.
pub fn clifford_group(d: usize) -> Result<UnitaryDesign> {
    let generators = match d {
        2 => vec![fourier_matrix(2), CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![linalg::ONE, C64::i()]))],
        3 => vec![
            fourier_matrix(3),
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![linalg::ONE, linalg::ONE, root_of_unity(3, 1)])),
        ],
        _ => return Err(Error::InvalidDimension { d, reason: "Clifford designs are built only for d = 2, 3" }),
    };
    let elements = group_closure(d, &generators, CLOSURE_CAP)?;
    UnitaryDesign::new(d, elements, 2, format!("clifford-{d}"))
}

/// Outcome of checking a design's moments against the Haar values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub name: String,
    pub d: usize,
    pub size: usize,
    pub strength: u8,
    pub tolerance: f64,
    pub moments: Vec<MomentReport>,
    pub max_error: f64,
    pub passed: bool,
}

/// Compares the uniform average of the order-1 (and for strength 2 also the
/// order-2) moment operator with the exact Haar value.
pub fn verify_design(design: &UnitaryDesign, strength: u8, tol: f64) -> Result<DesignReport> {
    let d = design.d;
    let n = design.len();
    let mut moments = Vec::new();

    let first = design.elements.iter().fold(CMatrix::zeros(d * d, d * d), |acc, u| acc + unitary_choi(u));
    moments.push(MomentReport::new(MomentOrder::First, d, n, first.scale(1.0 / n as f64), first_moment_exact(d)));

    if strength >= 2 {
        let side = d * d * d * d;
        let second = design.elements.iter().fold(CMatrix::zeros(side, side), |acc, u| {
            let p = unitary_choi(u);
            acc + kron(&p, &p)
        });
        moments.push(MomentReport::new(
            MomentOrder::Second,
            d,
            n,
            second.scale(1.0 / n as f64),
            second_moment_exact(d)?,
        ));
    }

    let max_error = moments.iter().map(|m| m.error_frobenius.max(m.error_spectral)).fold(0.0, f64::max);
    Ok(DesignReport {
        name: design.name.clone(),
        d,
        size: n,
        strength,
        tolerance: tol,
        moments,
        max_error,
        passed: max_error <= tol,
    })
}

/// Verifies at the design's declared strength and turns failure into an
/// error.
pub fn require_verified(design: &UnitaryDesign, strength: u8, tol: f64) -> Result<DesignReport> {
    let report = verify_design(design, strength, tol)?;
    if !report.passed {
        return Err(Error::DesignVerification { name: design.name.clone(), strength, error: report.max_error, tol });
    }
    Ok(report)
}
