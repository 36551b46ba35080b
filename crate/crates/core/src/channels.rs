//! Channel representations and validity checks.
//!
//! The Choi matrix `J(Φ) = Σ Φ(|i><j|) ⊗ |i><j|` is the canonical form; Kraus
//! sets and unitary ensembles convert into it. The output factor comes first.

use serde::Serialize;

use crate::error::{shape_mismatch, Error, Result};
use crate::linalg::{self, identity, kron, max_abs, partial_trace, spectral_norm, BipartiteShape, CMatrix, Subsystem};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn new(d: usize, matrix: CMatrix) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension { d, reason: "dimension must be positive" });
        }
        if matrix.shape() != (d * d, d * d) {
            return Err(shape_mismatch((d * d, d * d), matrix.shape()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { d, matrix })
    }

    /// Infers `d` from the side length, which must be a perfect square.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let side = matrix.nrows();
        let d = (side as f64).sqrt().round() as usize;
        if d * d != side {
            return Err(Error::DimensionMismatch {
                expected: "square side d^2".into(),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        Self::new(d, matrix)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn shape(&self) -> BipartiteShape {
        BipartiteShape::square(self.d)
    }

    /// `Tr_Y J`, the input-side marginal (identity iff trace preserving).
    pub fn input_marginal(&self) -> CMatrix {
        partial_trace(&self.matrix, self.shape(), Subsystem::Left).expect("side checked at construction")
    }

    /// `Tr_X J`, the output-side marginal (identity iff unital).
    pub fn output_marginal(&self) -> CMatrix {
        partial_trace(&self.matrix, self.shape(), Subsystem::Right).expect("side checked at construction")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    d: usize,
    operators: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators.first().ok_or(Error::Empty)?;
        let d = first.nrows();
        for op in &operators {
            if op.shape() != (d, d) {
                return Err(shape_mismatch((d, d), op.shape()));
            }
        }
        Ok(Self { d, operators })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// `‖Σ A*A - 1‖_∞`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let sum = self.operators.iter().fold(CMatrix::zeros(self.d, self.d), |acc, a| acc + a.adjoint() * a);
        spectral_norm(&(sum - identity(self.d)))
    }

    /// `‖Σ AA* - 1‖_∞`.
    pub fn unitality_residual(&self) -> f64 {
        let sum = self.operators.iter().fold(CMatrix::zeros(self.d, self.d), |acc, a| acc + a * a.adjoint());
        spectral_norm(&(sum - identity(self.d)))
    }
}

/// Weighted unitaries `(p_i, U_i)` realizing `X ↦ Σ p_i U_i X U_i*`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryEnsemble {
    d: usize,
    terms: Vec<(f64, CMatrix)>,
}

impl UnitaryEnsemble {
    pub fn new(d: usize, terms: Vec<(f64, CMatrix)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Empty);
        }
        let mut sum = 0.0;
        for (index, (w, u)) in terms.iter().enumerate() {
            if u.shape() != (d, d) {
                return Err(shape_mismatch((d, d), u.shape()));
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidProbabilities(format!("weight {index} is {w}")));
            }
            let residual = linalg::unitarity_residual(u);
            if residual > tolerance::ENSEMBLE_UNITARY {
                return Err(Error::NotUnitary { index, residual });
            }
            sum += w;
        }
        if (sum - 1.0).abs() > tolerance::WEIGHT_SUM {
            return Err(Error::InvalidProbabilities(format!("weights sum to {sum}")));
        }
        Ok(Self { d, terms })
    }

    /// Equal weights over `unitaries`.
    pub fn uniform(d: usize, unitaries: Vec<CMatrix>) -> Result<Self> {
        let w = 1.0 / unitaries.len().max(1) as f64;
        Self::new(d, unitaries.into_iter().map(|u| (w, u)).collect())
    }

    /// Drops zero weights, clamps tiny negatives and renormalizes before
    /// validating. Used by constructions whose weights are exact only up
    /// to rounding.
    pub fn normalized(d: usize, terms: Vec<(f64, CMatrix)>) -> Result<Self> {
        let terms: Vec<(f64, CMatrix)> =
            terms.into_iter().map(|(w, u)| (w.max(0.0), u)).filter(|(w, _)| *w > 0.0).collect();
        let sum: f64 = terms.iter().map(|(w, _)| w).sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::InvalidProbabilities(format!("weights sum to {sum}")));
        }
        Self::new(d, terms.into_iter().map(|(w, u)| (w / sum, u)).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(f64, CMatrix)] {
        &self.terms
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|(w, _)| *w)
    }

    pub fn unitaries(&self) -> impl Iterator<Item = &CMatrix> + '_ {
        self.terms.iter().map(|(_, u)| u)
    }
}

/// CP/TP/unital residuals of a Choi matrix and the verdicts at `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    pub d: usize,
    pub tolerance: f64,
    pub hermitian_residual: f64,
    pub cp_residual: f64,
    pub tp_residual: f64,
    pub unital_residual: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub completely_positive: bool,
    pub trace_preserving: bool,
    pub unital: bool,
    pub doubly_stochastic: bool,
}

impl ValidityReport {
    pub fn worst_residual(&self) -> f64 {
        self.cp_residual.max(self.tp_residual).max(self.unital_residual)
    }
}

/// `J = Σ vec(A) vec(A)*`.
pub fn choi_from_kraus(k: &KrausSet) -> ChoiMatrix {
    let n = k.d * k.d;
    let matrix = k.operators.iter().fold(CMatrix::zeros(n, n), |acc, a| {
        let v = linalg::vec(a);
        acc + &v * v.adjoint()
    });
    ChoiMatrix { d: k.d, matrix }
}

/// Choi matrix of `X ↦ <A, X> B`, which is `B ⊗ conj(A)`.
pub fn choi_from_rank_one_form(a: &CMatrix, b: &CMatrix) -> Result<ChoiMatrix> {
    let d = a.nrows();
    if a.shape() != (d, d) || b.shape() != (d, d) {
        return Err(shape_mismatch(a.shape(), b.shape()));
    }
    ChoiMatrix::new(d, kron(b, &a.conjugate()))
}

/// `Φ(X) = Tr_X[J (1 ⊗ Xᵀ)]`.
pub fn apply_channel(j: &ChoiMatrix, x: &CMatrix) -> Result<CMatrix> {
    let d = j.d;
    if x.shape() != (d, d) {
        return Err(shape_mismatch((d, d), x.shape()));
    }
    // Contract directly rather than forming the d^2 x d^2 product.
    Ok(CMatrix::from_fn(d, d, |r, c| {
        let mut acc = linalg::ZERO;
        for a in 0..d {
            for b in 0..d {
                acc += j.matrix[(r * d + a, c * d + b)] * x[(a, b)];
            }
        }
        acc
    }))
}

pub fn validate(j: &ChoiMatrix, tol: f64) -> ValidityReport {
    let m = &j.matrix;
    let id = identity(j.d);
    let hermitian_residual = max_abs(&(m - m.adjoint()));
    let min_eigenvalue = linalg::min_eigenvalue(m);
    let cp_residual = hermitian_residual.max(-min_eigenvalue).max(0.0);
    let tp_residual = spectral_norm(&(j.input_marginal() - &id));
    let unital_residual = spectral_norm(&(j.output_marginal() - &id));
    let completely_positive = cp_residual <= tol;
    let trace_preserving = tp_residual <= tol;
    let unital = unital_residual <= tol;
    ValidityReport {
        d: j.d,
        tolerance: tol,
        hermitian_residual,
        cp_residual,
        tp_residual,
        unital_residual,
        min_eigenvalue,
        trace: linalg::trace(m).re,
        completely_positive,
        trace_preserving,
        unital,
        doubly_stochastic: completely_positive && trace_preserving && unital,
    }
}

/// `J(Ω) = 1/d`, the completely depolarizing channel.
pub fn depolarizing_choi(d: usize) -> ChoiMatrix {
    ChoiMatrix { d, matrix: identity(d * d).scale(1.0 / d as f64) }
}

/// `J(id) = vec(1) vec(1)*`.
pub fn identity_channel_choi(d: usize) -> ChoiMatrix {
    let v = linalg::vec(&identity(d));
    ChoiMatrix { d, matrix: &v * v.adjoint() }
}

/// Convex combination of channels.
pub fn mix(channels: &[ChoiMatrix], probs: &[f64]) -> Result<ChoiMatrix> {
    let first = channels.first().ok_or(Error::Empty)?;
    if channels.len() != probs.len() {
        return Err(Error::InvalidProbabilities(format!("{} channels but {} weights", channels.len(), probs.len())));
    }
    if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(Error::InvalidProbabilities(format!("negative or non-finite weight in {probs:?}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tolerance::WEIGHT_SUM {
        return Err(Error::InvalidProbabilities(format!("weights sum to {sum}")));
    }
    let d = first.d;
    let n = d * d;
    let mut matrix = CMatrix::zeros(n, n);
    for (c, &p) in channels.iter().zip(probs) {
        if c.d != d {
            return Err(Error::DimensionMismatch { expected: format!("d = {d}"), found: format!("d = {}", c.d) });
        }
        matrix += c.matrix.scale(p);
    }
    Ok(ChoiMatrix { d, matrix })
}

/// `Σ p_i vec(U_i) vec(U_i)*`.
pub fn ensemble_to_choi(e: &UnitaryEnsemble) -> ChoiMatrix {
    let n = e.d * e.d;
    let mut matrix = CMatrix::zeros(n, n);
    for (w, u) in &e.terms {
        let v = linalg::vec(u);
        matrix += (&v * v.adjoint()).scale(*w);
    }
    ChoiMatrix { d: e.d, matrix }
}

/// `vec(U) vec(U)*`, the Choi matrix of conjugation by `U`.
pub fn unitary_choi(u: &CMatrix) -> CMatrix {
    let v = linalg::vec(u);
    &v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ginibre, haar_unitary, RandomSource, C64};

    /// Kraus operators from the Choi spectrum; test-only inverse of
    /// `choi_from_kraus`.
    fn kraus_from_choi(j: &ChoiMatrix) -> KrausSet {
        let (values, vectors) = linalg::hermitian_eigh(j.matrix());
        let ops = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 1e-10)
            .map(|(k, &v)| {
                let col = vectors.column(k).into_owned().scale(v.sqrt());
                linalg::unvec(&CMatrix::from_column_slice(col.len(), 1, col.as_slice()), j.d, j.d).unwrap()
            })
            .collect();
        KrausSet::new(ops).unwrap()
    }

    fn weyl(d: usize) -> Vec<CMatrix> {
        crate::designs::weyl_operators(d).unwrap().elements().to_vec()
    }

    #[test]
    fn identity_channel_choi_from_kraus() {
        let j = choi_from_kraus(&KrausSet::new(vec![identity(2)]).unwrap());
        assert_eq!(j, identity_channel_choi(2));
        assert!((linalg::trace(j.matrix()).re - 2.0).abs() < 1e-15);
        let ev = linalg::hermitian_eigenvalues(j.matrix());
        assert_eq!(ev.iter().filter(|v| v.abs() > 1e-12).count(), 1);
    }

    #[test]
    fn dephasing_choi_is_diagonal() {
        let k = KrausSet::new(vec![linalg::basis_op(2, 0, 0), linalg::basis_op(2, 1, 1)]).unwrap();
        let j = choi_from_kraus(&k);
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            [1.0, 0.0, 0.0, 1.0].iter().map(|&x| C64::new(x, 0.0)).collect(),
        ));
        assert_eq!(j.matrix(), &expected);
    }

    #[test]
    fn scaled_weyl_kraus_gives_depolarizing() {
        for d in [2, 3] {
            let ops = weyl(d).into_iter().map(|w| w.scale(1.0 / d as f64)).collect();
            let j = choi_from_kraus(&KrausSet::new(ops).unwrap());
            assert!(max_abs(&(j.matrix() - depolarizing_choi(d).matrix())) < 1e-14);
        }
    }

    #[test]
    fn rank_one_form() {
        let j = choi_from_rank_one_form(&identity(2), &identity(2)).unwrap();
        assert_eq!(j.matrix(), &identity(4));
        let j = choi_from_rank_one_form(&identity(2), &identity(2).scale(0.5)).unwrap();
        assert_eq!(j, depolarizing_choi(2));
        assert!(choi_from_rank_one_form(&identity(2), &identity(3)).is_err());

        let mut rng = RandomSource::new(11);
        let a = ginibre(3, 3, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let j = choi_from_rank_one_form(&a, &b).unwrap();
        for _ in 0..5 {
            let x = ginibre(3, 3, &mut rng);
            let direct = b.clone() * linalg::hs_inner(&a, &x).unwrap();
            assert!(max_abs(&(apply_channel(&j, &x).unwrap() - direct)) < 1e-12);
        }
    }

    #[test]
    fn apply_examples() {
        let mut rng = RandomSource::new(12);
        let mut x = ginibre(3, 3, &mut rng);
        let t = linalg::trace(&x);
        x /= t;
        let out = apply_channel(&depolarizing_choi(3), &x).unwrap();
        assert!(max_abs(&(out - identity(3).scale(1.0 / 3.0))) < 1e-14);
        let y = ginibre(3, 3, &mut rng);
        assert!(max_abs(&(apply_channel(&identity_channel_choi(3), &y).unwrap() - &y)) < 1e-14);
        assert!(apply_channel(&identity_channel_choi(3), &identity(2)).is_err());
    }

    #[test]
    fn apply_matches_kraus_conjugation() {
        let mut rng = RandomSource::new(13);
        for d in [2, 3, 4] {
            for _ in 0..50 {
                let a = ginibre(d, d, &mut rng);
                let x = ginibre(d, d, &mut rng);
                let j = choi_from_kraus(&KrausSet::new(vec![a.clone()]).unwrap());
                let direct = &a * &x * a.adjoint();
                assert!(max_abs(&(apply_channel(&j, &x).unwrap() - direct)) <= 1e-12);
            }
        }
    }

    #[test]
    fn kraus_extraction_round_trips() {
        let mut rng = RandomSource::new(14);
        let ops: Vec<CMatrix> = (0..3).map(|_| ginibre(3, 3, &mut rng)).collect();
        let j = choi_from_kraus(&KrausSet::new(ops).unwrap());
        let back = choi_from_kraus(&kraus_from_choi(&j));
        assert!(max_abs(&(back.matrix() - j.matrix())) < 1e-11);
    }

    #[test]
    fn validate_examples() {
        for d in [2, 3] {
            let r = validate(&depolarizing_choi(d), 1e-12);
            assert!(r.doubly_stochastic);
            assert!(r.worst_residual() < 1e-15);
            assert!(validate(&identity_channel_choi(d), 1e-12).doubly_stochastic);
        }
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = C64::new(2.0, 0.0);
        let r = validate(&ChoiMatrix::new(2, m).unwrap(), 1e-10);
        assert!(r.tp_residual > 0.0);
        assert!(!r.trace_preserving && !r.doubly_stochastic);
        assert!(r.completely_positive);
    }

    #[test]
    fn mix_examples() {
        let mut rng = RandomSource::new(15);
        let u = haar_unitary(2, &mut rng);
        let phi = ChoiMatrix::new(2, unitary_choi(&u)).unwrap();
        let omega = depolarizing_choi(2);
        let mixed = mix(&[phi.clone(), omega.clone()], &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        // (d^2-2)/(d^2-1) Ω + 1/(d^2-1) Φ at d = 2
        let psi = omega.matrix().scale(2.0 / 3.0) + phi.matrix().scale(1.0 / 3.0);
        assert!(max_abs(&(mixed.matrix() - psi)) < 1e-15);
        assert_eq!(mix(std::slice::from_ref(&phi), &[1.0]).unwrap(), phi);
        assert!(max_abs(&(mix(&[phi.clone(), phi.clone()], &[0.5, 0.5]).unwrap().matrix() - phi.matrix())) < 1e-15);
        assert!(mix(&[phi.clone(), omega.clone()], &[0.5, 0.6]).is_err());
        assert!(mix(&[phi, depolarizing_choi(3)], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn ensembles() {
        let single = UnitaryEnsemble::new(3, vec![(1.0, identity(3))]).unwrap();
        assert_eq!(ensemble_to_choi(&single), identity_channel_choi(3));
        for d in [2, 3] {
            let e = UnitaryEnsemble::uniform(d, weyl(d)).unwrap();
            assert!(max_abs(&(ensemble_to_choi(&e).matrix() - depolarizing_choi(d).matrix())) < 1e-14);
        }
        let mut rng = RandomSource::new(16);
        let terms = (0..5).map(|_| (0.2, haar_unitary(3, &mut rng))).collect();
        let r = validate(&ensemble_to_choi(&UnitaryEnsemble::new(3, terms).unwrap()), 1e-12);
        assert!(r.doubly_stochastic, "{r:?}");

        assert!(matches!(UnitaryEnsemble::new(2, vec![(0.5, identity(2))]), Err(Error::InvalidProbabilities(_))));
        assert!(matches!(
            UnitaryEnsemble::new(2, vec![(1.0, identity(2).scale(2.0))]),
            Err(Error::NotUnitary { index: 0, .. })
        ));
        assert!(matches!(UnitaryEnsemble::new(2, vec![]), Err(Error::Empty)));
    }

    #[test]
    fn kraus_residuals() {
        let k = KrausSet::new(vec![identity(2).scale(0.5f64.sqrt()), identity(2).scale(0.5f64.sqrt())]).unwrap();
        assert!(k.trace_preservation_residual() < 1e-15);
        assert!(k.unitality_residual() < 1e-15);
        assert!(KrausSet::new(vec![identity(2), identity(3)]).is_err());
        assert!(matches!(KrausSet::new(vec![]), Err(Error::Empty)));
    }
}
