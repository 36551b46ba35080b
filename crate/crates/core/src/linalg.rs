//! Dense complex linear algebra on small matrices.
//!
//! Everything here works on [`CMatrix`], a heap-allocated `nalgebra` matrix of
//! `Complex64`. Bipartite operators are laid out with the LEFT tensor factor
//! as the slow index, so `vec(|i><j|) = |i> ⊗ |j>` is row-major flattening.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{shape_mismatch, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Builds a matrix from row-major entries, rejecting NaN/Inf.
pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<CMatrix> {
    if rows == 0 || cols == 0 {
        return Err(shape_mismatch((rows.max(1), cols.max(1)), (rows, cols)));
    }
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: format!("{} entries", rows * cols),
            found: format!("{} entries", entries.len()),
        });
    }
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(CMatrix::from_row_slice(rows, cols, entries))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `|i><j|` in dimension `d`.
pub fn basis_op(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Row-major flattening into a column vector.
pub fn vec(a: &CMatrix) -> CMatrix {
    let (rows, cols) = a.shape();
    CMatrix::from_fn(rows * cols, 1, |k, _| a[(k / cols, k % cols)])
}

pub fn unvec(v: &CMatrix, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.ncols() != 1 || v.nrows() != rows * cols {
        return Err(shape_mismatch((rows * cols, 1), v.shape()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| v[(i * cols + j, 0)]))
}

/// Hilbert–Schmidt inner product `Tr(X* Y)`.
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> Result<C64> {
    if x.shape() != y.shape() {
        return Err(shape_mismatch(x.shape(), y.shape()));
    }
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum())
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Factor dimensions of a bipartite space `left ⊗ right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteShape {
    pub dim_left: usize,
    pub dim_right: usize,
}

impl BipartiteShape {
    pub fn new(dim_left: usize, dim_right: usize) -> Self {
        Self { dim_left, dim_right }
    }

    pub fn square(d: usize) -> Self {
        Self::new(d, d)
    }

    pub fn side(&self) -> usize {
        self.dim_left * self.dim_right
    }
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Left,
    Right,
}

/// Traces out one factor. `Left` leaves a `dim_right`-square matrix.
pub fn partial_trace(m: &CMatrix, shape: BipartiteShape, which: Subsystem) -> Result<CMatrix> {
    let n = shape.side();
    if m.shape() != (n, n) {
        return Err(shape_mismatch((n, n), m.shape()));
    }
    let (dl, dr) = (shape.dim_left, shape.dim_right);
    Ok(match which {
        Subsystem::Left => CMatrix::from_fn(dr, dr, |a, b| (0..dl).map(|i| m[(i * dr + a, i * dr + b)]).sum()),
        Subsystem::Right => CMatrix::from_fn(dl, dl, |i, j| (0..dr).map(|a| m[(i * dr + a, j * dr + a)]).sum()),
    })
}

/// Reorders the tensor factors of an operator on `dims[0] ⊗ dims[1] ⊗ ...`.
/// Output factor `k` is input factor `perm[k]`.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let n: usize = dims.iter().product();
    if m.shape() != (n, n) {
        return Err(shape_mismatch((n, n), m.shape()));
    }
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() || perm.iter().any(|&p| p >= dims.len() || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::Precondition(format!("{perm:?} is not a permutation of {} factors", dims.len())));
    }
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let map: Vec<usize> = (0..n)
        .map(|out| {
            let mut rem = out;
            let mut digits = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                digits[perm[k]] = rem % out_dims[k];
                rem /= out_dims[k];
            }
            digits.iter().zip(dims).fold(0, |acc, (&dig, &dim)| acc * dim + dig)
        })
        .collect();
    Ok(CMatrix::from_fn(n, n, |r, c| m[(map[r], map[c])]))
}

/// `W = Σ |i><j| ⊗ |j><i|`, the swap on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> CMatrix {
    let mut w = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            w[(i * d + j, j * d + i)] = ONE;
        }
    }
    w
}

/// Antisymmetric and symmetric projectors `(R, S) = ((1 - W)/2, (1 + W)/2)`.
pub fn sym_antisym_projectors(d: usize) -> (CMatrix, CMatrix) {
    let w = swap_operator(d);
    let id = identity(d * d);
    ((&id - &w).scale(0.5), (&id + &w).scale(0.5))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub spectral: f64,
    pub frobenius: f64,
}

pub fn operator_norms(m: &CMatrix) -> Norms {
    Norms { spectral: spectral_norm(m), frobenius: frobenius_norm(m) }
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-decomposition of the Hermitian part: ascending eigenvalues with
/// matching unit eigenvectors as columns.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Non-Hermitian input is reported as not PSD rather than rejected.
pub fn is_psd(m: &CMatrix, tol: f64) -> bool {
    is_hermitian(m, crate::tolerance::HERMITIAN.max(tol)) && min_eigenvalue(m) >= -tol
}

/// Largest entry of `|U*U - 1|`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

/// Projection `H ↦ H·max(λ, 0)` onto the PSD cone (Hermitian part first).
pub fn project_psd(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigh(m);
    let clipped = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v.max(0.0), 0.0)));
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| vectors[(r, c)] * clipped[c]);
    hermitian_part(&(scaled * vectors.adjoint()))
}

/// Orthonormal basis of the traceless Hermitian `d x d` matrices
/// (generalized Gell-Mann matrices), `d^2 - 1` elements.
pub fn traceless_hermitian_basis(d: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = C64::new(s, 0.0);
            sym[(k, j)] = C64::new(s, 0.0);
            basis.push(sym);
            let mut anti = CMatrix::zeros(d, d);
            anti[(j, k)] = C64::new(0.0, -s);
            anti[(k, j)] = C64::new(0.0, s);
            basis.push(anti);
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = C64::new(1.0 / norm, 0.0);
        }
        diag[(l, l)] = C64::new(-(l as f64) / norm, 0.0);
        basis.push(diag);
    }
    basis
}

/// Seeded, reproducible random stream.
///
/// Streams derived with [`RandomSource::derive`] are independent of each
/// other and of the parent, so parallel workers can each own one.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    /// Independent stream number `index` under the same seed.
    pub fn derive(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(index.wrapping_add(1));
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian, `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.normal() * s, self.normal() * s)
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut RandomSource) -> CMatrix {
    let entries: Vec<C64> = (0..rows * cols).map(|_| rng.complex_normal()).collect();
    CMatrix::from_row_slice(rows, cols, &entries)
}

pub fn random_hermitian(d: usize, rng: &mut RandomSource) -> CMatrix {
    hermitian_part(&ginibre(d, d, rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(d: usize, rng: &mut RandomSource) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { ONE };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn vec_of_identity_and_basis_op() {
        assert_eq!(vec(&identity(2)).as_slice(), &[c(1.0), c(0.0), c(0.0), c(1.0)]);
        // |1><2| in 1-based labels is entry (0, 1).
        assert_eq!(vec(&basis_op(2, 0, 1)).as_slice(), &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn vec_norm_is_hs_norm() {
        let mut rng = RandomSource::new(1);
        let a = ginibre(3, 3, &mut rng);
        let v = vec(&a);
        let lhs = (v.adjoint() * &v)[(0, 0)];
        let rhs = trace(&(a.adjoint() * &a));
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn unvec_inverts_vec() {
        let v = CMatrix::from_row_slice(4, 1, &[c(1.0), c(0.0), c(0.0), c(1.0)]);
        assert_eq!(unvec(&v, 2, 2).unwrap(), identity(2));
        let mut rng = RandomSource::new(2);
        let a = ginibre(4, 3, &mut rng);
        assert_eq!(unvec(&vec(&a), 4, 3).unwrap(), a);
        assert!(matches!(unvec(&v, 3, 2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_non_finite_entries() {
        let e = [c(1.0), C64::new(f64::NAN, 0.0)];
        assert_eq!(from_row_major(1, 2, &e), Err(Error::NonFinite));
        assert!(from_row_major(1, 3, &e).is_err());
    }

    #[test]
    fn hs_inner_examples() {
        assert_eq!(hs_inner(&identity(3), &identity(3)).unwrap(), c(3.0));
        let (r, _) = sym_antisym_projectors(2);
        assert!((hs_inner(&r, &r).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(hs_inner(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn hs_inner_of_rank_one_probe_is_quadratic_form() {
        let mut rng = RandomSource::new(3);
        let g = ginibre(4, 4, &mut rng);
        let j = g.adjoint() * &g;
        let u = haar_unitary(2, &mut rng);
        let v = vec(&u);
        let via_hs = hs_inner(&(&v * v.adjoint()), &j).unwrap();
        let via_form = (v.adjoint() * &j * &v)[(0, 0)];
        assert!((via_hs - via_form).norm() < 1e-12);
        assert!(via_hs.re >= 0.0 && via_hs.im.abs() < 1e-12);
    }

    #[test]
    fn partial_trace_examples() {
        let half = identity(4).scale(0.5);
        assert_eq!(partial_trace(&half, BipartiteShape::square(2), Subsystem::Right).unwrap(), identity(2));
        let v = vec(&identity(2));
        let omega = &v * v.adjoint();
        assert_eq!(partial_trace(&omega, BipartiteShape::square(2), Subsystem::Left).unwrap(), identity(2));
        assert!(partial_trace(&identity(5), BipartiteShape::square(2), Subsystem::Left).is_err());
    }

    #[test]
    fn partial_trace_of_product_matches_contraction() {
        let mut rng = RandomSource::new(4);
        let a = ginibre(2, 2, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let ab = kron(&a, &b);
        let shape = BipartiteShape::new(2, 3);
        // brute-force contraction over the explicit four-index tensor
        let mut right = CMatrix::zeros(2, 2);
        let mut left = CMatrix::zeros(3, 3);
        for i in 0..2 {
            for j in 0..2 {
                for x in 0..3 {
                    for y in 0..3 {
                        let entry = ab[(i * 3 + x, j * 3 + y)];
                        if x == y {
                            right[(i, j)] += entry;
                        }
                        if i == j {
                            left[(x, y)] += entry;
                        }
                    }
                }
            }
        }
        let pr = partial_trace(&ab, shape, Subsystem::Right).unwrap();
        let pl = partial_trace(&ab, shape, Subsystem::Left).unwrap();
        assert!(max_abs(&(&pr - &right)) < 1e-13);
        assert!(max_abs(&(&pl - &left)) < 1e-13);
        assert!(max_abs(&(&pr - a.scale(1.0) * trace(&b))) < 1e-12);
    }

    #[test]
    fn swap_examples() {
        assert_eq!(swap_operator(1), identity(1));
        let w = swap_operator(2);
        let mut expected = identity(4);
        expected.swap_rows(1, 2);
        assert_eq!(w, expected);
        assert_eq!(&w * &w, identity(4));
        let mut rng = RandomSource::new(5);
        let a = ginibre(3, 3, &mut rng);
        let lhs = swap_operator(3) * vec(&a);
        assert!(max_abs(&(lhs - vec(&a.transpose()))) <= 1e-13);
    }

    #[test]
    fn projector_traces() {
        for (d, tr_r, tr_s) in [(2, 1.0, 3.0), (3, 3.0, 6.0)] {
            let (r, s) = sym_antisym_projectors(d);
            assert_eq!(trace(&r), c(tr_r));
            assert_eq!(trace(&s), c(tr_s));
        }
        let (r, s) = sym_antisym_projectors(4);
        assert!(max_abs(&(&r * &s)) < 1e-15);
    }

    #[test]
    fn norms_examples() {
        let n = operator_norms(&identity(3));
        assert!((n.spectral - 1.0).abs() < 1e-14);
        assert!((n.frobenius - 3f64.sqrt()).abs() < 1e-14);
        let z = operator_norms(&CMatrix::zeros(3, 3));
        assert_eq!((z.spectral, z.frobenius), (0.0, 0.0));
    }

    #[test]
    fn spectral_norm_of_hermitian_is_max_abs_eigenvalue() {
        let mut rng = RandomSource::new(6);
        for _ in 0..10 {
            let h = random_hermitian(5, &mut rng);
            let ev = hermitian_eigenvalues(&h);
            let oracle = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!((spectral_norm(&h) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&identity(3), 0.0));
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-1e-6)]));
        assert!(!is_psd(&m, 1e-9));
        let mut rng = RandomSource::new(7);
        let a = ginibre(4, 4, &mut rng);
        assert!(is_psd(&(a.adjoint() * &a), 1e-12));
        // non-Hermitian input is reported, not rejected
        assert!(!is_psd(&basis_op(2, 0, 1), 1e-9));
    }

    #[test]
    fn haar_unitary_is_unitary_and_seeded() {
        let mut rng = RandomSource::new(8);
        let u1 = haar_unitary(1, &mut rng);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-14);
        for _ in 0..100 {
            assert!(unitarity_residual(&haar_unitary(3, &mut rng)) <= 1e-12);
        }
        let a = haar_unitary(4, &mut RandomSource::new(99));
        let b = haar_unitary(4, &mut RandomSource::new(99));
        assert_eq!(a, b);
        let c1 = haar_unitary(4, &mut RandomSource::derive(99, 0));
        assert_ne!(a, c1);
    }

    #[test]
    fn gell_mann_basis_is_orthonormal_and_traceless() {
        for d in 2..=4 {
            let basis = traceless_hermitian_basis(d);
            assert_eq!(basis.len(), d * d - 1);
            for (i, a) in basis.iter().enumerate() {
                assert!(trace(a).norm() < 1e-14);
                assert!(is_hermitian(a, 0.0));
                for (j, b) in basis.iter().enumerate() {
                    let ip = hs_inner(a, b).unwrap();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - c(expected)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn permute_swaps_two_factors_like_w() {
        let mut rng = RandomSource::new(9);
        let a = ginibre(3, 3, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let swapped = permute_subsystems(&kron(&a, &b), &[3, 3], &[1, 0]).unwrap();
        assert!(max_abs(&(swapped - kron(&b, &a))) < 1e-14);
        assert!(permute_subsystems(&identity(4), &[2, 2], &[0, 0]).is_err());
    }

    #[test]
    fn psd_projection_clips_negative_spectrum() {
        let mut rng = RandomSource::new(10);
        let h = random_hermitian(4, &mut rng);
        let p = project_psd(&h);
        assert!(min_eigenvalue(&p) > -1e-12);
        let p2 = project_psd(&p);
        assert!(max_abs(&(p2 - &p)) < 1e-12);
    }
}
