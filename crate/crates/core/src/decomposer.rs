//! Mixed-unitary ensembles for `p·Φ + (1-p)·Ω`.
//!
//! Each unitary `U` is weighted by `w(U) = vec(U)* J(Φ) vec(U)`, which is
//! nonnegative and averages to one over the Haar measure. The resulting
//! channel only depends on the first two Haar moments, so averaging over a
//! verified 2-design gives `((d²-2)·Ω + Φ)/(d²-1)` with no sampling error.
//! Smaller `p` mixes that ensemble with the Weyl ensemble for `Ω`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::channels::{self, depolarizing_choi, ensemble_to_choi, mix, ChoiMatrix, UnitaryEnsemble, ValidityReport};
use crate::designs::{self, UnitaryDesign};
use crate::error::{Error, Result};
use crate::linalg::{self, haar_unitary, CMatrix};
use crate::moments::sample_chunks;
use crate::tolerance::{self, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMode {
    ExactDesign,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub mode: DecompositionMode,
    pub p: f64,
    pub target: ChoiMatrix,
    pub ensemble: UnitaryEnsemble,
    pub residual_frobenius: f64,
    pub residual_spectral: f64,
    pub ensemble_size: usize,
    pub caratheodory_bound: usize,
    pub pruned: bool,
    /// Validity of the input channel at the gate tolerance.
    pub input_validity: ValidityReport,
    pub design: Option<String>,
}

impl DecompositionReport {
    pub(crate) fn build(
        mode: DecompositionMode,
        p: f64,
        target: ChoiMatrix,
        ensemble: UnitaryEnsemble,
        input_validity: ValidityReport,
        design: Option<String>,
    ) -> Self {
        let achieved = ensemble_to_choi(&ensemble);
        let norms = linalg::operator_norms(&(achieved.matrix() - target.matrix()));
        let d = target.d();
        Self {
            mode,
            p,
            ensemble_size: ensemble.len(),
            caratheodory_bound: caratheodory_bound(d),
            target,
            ensemble,
            residual_frobenius: norms.frobenius,
            residual_spectral: norms.spectral,
            pruned: false,
            input_validity,
            design,
        }
    }

    /// Replaces the ensemble with a pruned one and recomputes residuals.
    pub fn prune(self, tol: f64) -> Result<Self> {
        let slack = self.residual_frobenius.max(tol);
        let ensemble = caratheodory_prune(&self.ensemble, &self.target, slack)?;
        let mut out = Self::build(self.mode, self.p, self.target, ensemble, self.input_validity, self.design);
        out.pruned = true;
        Ok(out)
    }

    pub fn d(&self) -> usize {
        self.target.d()
    }
}

/// `d⁴ - 2d² + 2`: one more than the real dimension of the affine hull of
/// doubly stochastic Choi matrices.
pub fn caratheodory_bound(d: usize) -> usize {
    d.pow(4) - 2 * d * d + 2
}

/// `1/(d²-1)`, the largest `p` covered by the construction.
pub fn max_mixing(d: usize) -> f64 {
    1.0 / ((d * d) as f64 - 1.0)
}

/// `vec(U)* J vec(U)`.
pub fn mixing_weight(u: &CMatrix, j: &ChoiMatrix) -> Result<f64> {
    let d = j.d();
    if u.shape() != (d, d) {
        return Err(crate::error::shape_mismatch((d, d), u.shape()));
    }
    Ok(quadratic_form(&linalg::vec(u), j.matrix()))
}

fn quadratic_form(v: &CMatrix, m: &CMatrix) -> f64 {
    let n = v.nrows();
    let mut acc = linalg::ZERO;
    for r in 0..n {
        let mut row = linalg::ZERO;
        for c in 0..n {
            row += m[(r, c)] * v[(c, 0)];
        }
        acc += v[(r, 0)].conj() * row;
    }
    acc.re
}

/// Rejects channels that are not doubly stochastic at `tol`.
pub fn require_doubly_stochastic(j: &ChoiMatrix, tol: f64) -> Result<ValidityReport> {
    let r = channels::validate(j, tol);
    if !r.doubly_stochastic {
        return Err(Error::NotDoublyStochastic {
            cp: r.cp_residual,
            tp: r.tp_residual,
            unital: r.unital_residual,
            tol,
        });
    }
    Ok(r)
}

/// The channel `((d²-2)·Ω + Φ)/(d²-1)`.
pub fn psi_target(j: &ChoiMatrix) -> Result<ChoiMatrix> {
    let d = j.d();
    let q = max_mixing(d);
    mix(&[depolarizing_choi(d), j.clone()], &[1.0 - q, q])
}

/// `p·Φ + (1-p)·Ω`.
pub fn mixed_target(j: &ChoiMatrix, p: f64) -> Result<ChoiMatrix> {
    mix(&[j.clone(), depolarizing_choi(j.d())], &[p, 1.0 - p])
}

fn check_mixing(d: usize, p: f64) -> Result<f64> {
    let bound = max_mixing(d);
    if !p.is_finite() || p < 0.0 || p > bound {
        return Err(Error::MixingOutOfRange { p, bound });
    }
    Ok((p * ((d * d) as f64 - 1.0)).min(1.0))
}

/// Exact decomposition of `((d²-2)·Ω + Φ)/(d²-1)` over a 2-design.
pub fn decompose_exact(j: &ChoiMatrix, design: &UnitaryDesign) -> Result<DecompositionReport> {
    decompose_exact_with(j, design, &Tolerances::default())
}

pub fn decompose_exact_with(j: &ChoiMatrix, design: &UnitaryDesign, tols: &Tolerances) -> Result<DecompositionReport> {
    let d = j.d();
    if design.d() != d {
        return Err(Error::DimensionMismatch {
            expected: format!("design for d = {d}"),
            found: format!("d = {}", design.d()),
        });
    }
    let validity = require_doubly_stochastic(j, tols.gate)?;
    designs::require_verified(design, 2, tols.design)?;
    let n = design.len() as f64;
    // Weights of a PSD J are nonnegative up to rounding; normalized() clamps.
    let terms =
        design.elements().iter().map(|u| Ok((mixing_weight(u, j)? / n, u.clone()))).collect::<Result<Vec<_>>>()?;
    let ensemble = UnitaryEnsemble::normalized(d, terms)?;
    Ok(DecompositionReport::build(
        DecompositionMode::ExactDesign,
        max_mixing(d),
        psi_target(j)?,
        ensemble,
        validity,
        Some(design.name().to_string()),
    ))
}

/// Uniform Weyl ensemble realizing `Ω`.
pub fn depolarizing_ensemble(d: usize) -> Result<UnitaryEnsemble> {
    Ok(designs::weyl_operators(d)?.to_ensemble())
}

fn blend(d: usize, alpha: f64, main: &UnitaryEnsemble) -> Result<UnitaryEnsemble> {
    if alpha >= 1.0 {
        return Ok(main.clone());
    }
    let weyl = depolarizing_ensemble(d)?;
    if alpha <= 0.0 {
        return Ok(weyl);
    }
    let terms = main
        .terms()
        .iter()
        .map(|(w, u)| (alpha * w, u.clone()))
        .chain(weyl.terms().iter().map(|(w, u)| ((1.0 - alpha) * w, u.clone())))
        .collect();
    UnitaryEnsemble::normalized(d, terms)
}

/// Exact decomposition of `p·Φ + (1-p)·Ω` for `0 <= p <= 1/(d²-1)`.
pub fn decompose_target(j: &ChoiMatrix, p: f64, design: &UnitaryDesign) -> Result<DecompositionReport> {
    decompose_target_with(j, p, design, &Tolerances::default())
}

pub fn decompose_target_with(
    j: &ChoiMatrix,
    p: f64,
    design: &UnitaryDesign,
    tols: &Tolerances,
) -> Result<DecompositionReport> {
    let d = j.d();
    let alpha = check_mixing(d, p)?;
    let base = decompose_exact_with(j, design, tols)?;
    let ensemble = blend(d, alpha, &base.ensemble)?;
    Ok(DecompositionReport::build(
        DecompositionMode::ExactDesign,
        p,
        mixed_target(j, p)?,
        ensemble,
        base.input_validity,
        base.design,
    ))
}

/// Weighted Haar samples plus the running Choi sum for one chunk.
struct McChunk {
    terms: Vec<(f64, CMatrix)>,
    choi_sum: CMatrix,
    weight_sum: f64,
}

fn mc_chunks(j: &ChoiMatrix, n_samples: usize, seed: u64, keep_terms: bool) -> Vec<McChunk> {
    let d = j.d();
    sample_chunks(n_samples, seed, |rng, len| {
        let mut chunk = McChunk { terms: Vec::new(), choi_sum: CMatrix::zeros(d * d, d * d), weight_sum: 0.0 };
        for _ in 0..len {
            let u = haar_unitary(d, rng);
            let v = linalg::vec(&u);
            let w = quadratic_form(&v, j.matrix()).max(0.0);
            chunk.choi_sum += (&v * v.adjoint()).scale(w);
            chunk.weight_sum += w;
            if keep_terms {
                chunk.terms.push((w, u));
            }
        }
        chunk
    })
}

/// Self-normalized Haar estimate of `((d²-2)·Ω + Φ)/(d²-1)`.
pub fn monte_carlo_decompose(j: &ChoiMatrix, n_samples: usize, seed: u64) -> Result<DecompositionReport> {
    monte_carlo_decompose_target(j, max_mixing(j.d()), n_samples, seed, &Tolerances::default())
}

/// Monte-Carlo variant of [`decompose_target`].
pub fn monte_carlo_decompose_target(
    j: &ChoiMatrix,
    p: f64,
    n_samples: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<DecompositionReport> {
    let d = j.d();
    if n_samples == 0 {
        return Err(Error::Precondition("n_samples must be at least 1".into()));
    }
    let alpha = check_mixing(d, p)?;
    let validity = require_doubly_stochastic(j, tols.gate)?;
    let terms: Vec<(f64, CMatrix)> = mc_chunks(j, n_samples, seed, true).into_iter().flat_map(|c| c.terms).collect();
    let sampled = UnitaryEnsemble::normalized(d, terms)?;
    let ensemble = blend(d, alpha, &sampled)?;
    Ok(DecompositionReport::build(DecompositionMode::MonteCarlo, p, mixed_target(j, p)?, ensemble, validity, None))
}

/// Frobenius residual of the Monte-Carlo estimate against the exact target,
/// without materializing the ensemble.
pub fn monte_carlo_residual(j: &ChoiMatrix, n_samples: usize, seed: u64) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Precondition("n_samples must be at least 1".into()));
    }
    let d = j.d();
    let (sum, weight) = mc_chunks(j, n_samples, seed, false)
        .into_iter()
        .fold((CMatrix::zeros(d * d, d * d), 0.0), |(m, w), c| (m + c.choi_sum, w + c.weight_sum));
    if weight.is_nan() || weight <= 0.0 {
        return Err(Error::InvalidProbabilities("all sampled weights vanished".into()));
    }
    let target = psi_target(j)?;
    Ok(linalg::frobenius_norm(&(sum.scale(1.0 / weight) - target.matrix())))
}

/// Real coordinates of `vec(U)vec(U)*` in the traceless-marginal subspace,
/// spanned by products of traceless Hermitian basis elements.
struct AffineChart {
    basis: Vec<CMatrix>,
}

impl AffineChart {
    fn new(d: usize) -> Self {
        let single = linalg::traceless_hermitian_basis(d);
        let basis = single.iter().flat_map(|a| single.iter().map(move |b| linalg::kron(a, b))).collect();
        Self { basis }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn coordinates(&self, u: &CMatrix) -> Vec<f64> {
        let v = linalg::vec(u);
        self.basis.iter().map(|b| quadratic_form(&v, b)).collect()
    }
}

/// A nonzero `v` with `Σ v_i = 0` and `Σ v_i x_i = 0` over the given points.
fn affine_dependency(points: &[&Vec<f64>], dim: usize) -> Result<Vec<f64>> {
    let m = points.len();
    // rows: dim coordinates, one row of ones, zero padding up to square
    let a = DMatrix::<f64>::from_fn(m, m, |r, c| {
        if r < dim {
            points[c][r]
        } else if r == dim {
            1.0
        } else {
            0.0
        }
    });
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Pruning("SVD did not return right singular vectors".into()))?;
    let (k, smallest) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, s)| (k, *s))
        .ok_or_else(|| Error::Pruning("empty support".into()))?;
    let largest = svd.singular_values.max();
    if smallest > tolerance::SINGULAR_VALUE * largest.max(1.0) {
        return Err(Error::Pruning(format!(
            "no affine dependency among {m} points (smallest singular value {smallest:.3e})"
        )));
    }
    Ok(v_t.row(k).iter().copied().collect())
}

/// Reduces an ensemble to at most `d⁴ - 2d² + 2` terms with the same Choi
/// matrix.
///
/// Repeatedly takes the first `bound + 1` terms, finds an affine dependency
/// among their coordinates, and shifts weight along it until one weight
/// reaches zero.
pub fn caratheodory_prune(e: &UnitaryEnsemble, target: &ChoiMatrix, tol: f64) -> Result<UnitaryEnsemble> {
    let d = e.d();
    if target.d() != d {
        return Err(Error::DimensionMismatch { expected: format!("d = {d}"), found: format!("d = {}", target.d()) });
    }
    let before = ensemble_to_choi(e);
    let start = linalg::frobenius_norm(&(before.matrix() - target.matrix()));
    if start > tol {
        return Err(Error::Precondition(format!("ensemble is {start:.3e} from target, tolerance {tol:.3e}")));
    }
    let bound = caratheodory_bound(d);
    if e.len() <= bound {
        return Ok(e.clone());
    }

    let chart = AffineChart::new(d);
    let dim = chart.dim();
    let mut support: Vec<(f64, CMatrix, Vec<f64>)> =
        e.terms().iter().map(|(w, u)| (*w, u.clone(), chart.coordinates(u))).collect();

    while support.len() > bound {
        let window = bound + 1;
        let points: Vec<&Vec<f64>> = support[..window].iter().map(|(_, _, x)| x).collect();
        let v = affine_dependency(&points, dim)?;
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let eps = 1e-12 * scale;

        // smallest step along +v and along -v that zeroes a weight
        let step = |sign: f64| {
            (0..window)
                .filter(|&i| sign * v[i] > eps)
                .map(|i| (support[i].0 / (sign * v[i]), i))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        };
        let (t, hit, sign) = match (step(1.0), step(-1.0)) {
            (Some((tp, ip)), Some((tn, i_n))) => {
                if tn < tp || (tn == tp && i_n < ip) {
                    (tn, i_n, -1.0)
                } else {
                    (tp, ip, 1.0)
                }
            }
            (Some((tp, ip)), None) => (tp, ip, 1.0),
            (None, Some((tn, i_n))) => (tn, i_n, -1.0),
            (None, None) => return Err(Error::Pruning("degenerate dependency vector".into())),
        };
        for (i, vi) in v.iter().enumerate() {
            let w = &mut support[i].0;
            *w = (*w - t * sign * vi).max(0.0);
        }
        support[hit].0 = 0.0;
        support.retain(|(w, _, _)| *w > 0.0);
    }

    let terms = support.into_iter().map(|(w, u, _)| (w, u)).collect();
    let pruned = UnitaryEnsemble::normalized(d, terms)?;
    let drift = linalg::frobenius_norm(&(ensemble_to_choi(&pruned).matrix() - before.matrix()));
    if drift > tol + tolerance::PRUNE_DRIFT {
        return Err(Error::Pruning(format!("pruning drifted the Choi matrix by {drift:.3e}")));
    }
    Ok(pruned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{identity_channel_choi, unitary_choi};
    use crate::designs::{clifford_group, weyl_operators};
    use crate::linalg::{max_abs, RandomSource};

    fn random_mixed_unitary(d: usize, k: usize, rng: &mut RandomSource) -> ChoiMatrix {
        let raw: Vec<f64> = (0..k).map(|_| -rng.uniform().ln()).collect();
        let total: f64 = raw.iter().sum();
        let terms = raw.iter().map(|w| (w / total, haar_unitary(d, rng))).collect();
        ensemble_to_choi(&UnitaryEnsemble::normalized(d, terms).unwrap())
    }

    #[test]
    fn bounds() {
        assert_eq!(caratheodory_bound(2), 10);
        assert_eq!(caratheodory_bound(3), 65);
        assert!((max_mixing(2) - 1.0 / 3.0).abs() < 1e-16);
        assert!((max_mixing(3) - 0.125).abs() < 1e-16);
    }

    #[test]
    fn mixing_weight_examples() {
        let id = linalg::identity(3);
        assert!((mixing_weight(&id, &identity_channel_choi(3)).unwrap() - 9.0).abs() < 1e-12);
        let mut rng = RandomSource::new(41);
        let u = haar_unitary(3, &mut rng);
        assert!((mixing_weight(&u, &depolarizing_choi(3)).unwrap() - 1.0).abs() < 1e-12);
        assert!(mixing_weight(&linalg::identity(2), &depolarizing_choi(3)).is_err());
    }

    #[test]
    fn mixing_weight_averages_to_one_over_design() {
        let mut rng = RandomSource::new(42);
        let design = clifford_group(2).unwrap();
        for _ in 0..10 {
            let j = random_mixed_unitary(2, 5, &mut rng);
            let mean = design.elements().iter().map(|u| mixing_weight(u, &j).unwrap()).sum::<f64>() / 24.0;
            assert!((mean - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_on_depolarizing_is_uniform() {
        let design = clifford_group(2).unwrap();
        let r = decompose_exact(&depolarizing_choi(2), &design).unwrap();
        assert_eq!(r.ensemble_size, 24);
        assert!(r.ensemble.weights().all(|w| (w - 1.0 / 24.0).abs() < 1e-14));
        assert!(r.residual_frobenius < 1e-12);
        assert!(max_abs(&(r.target.matrix() - depolarizing_choi(2).matrix())) < 1e-15);
    }

    #[test]
    fn exact_on_identity_channel() {
        let design = clifford_group(2).unwrap();
        let id = identity_channel_choi(2);
        let r = decompose_exact(&id, &design).unwrap();
        let expected = depolarizing_choi(2).matrix().scale(2.0 / 3.0) + id.matrix().scale(1.0 / 3.0);
        assert!(max_abs(&(r.target.matrix() - expected)) < 1e-15);
        assert!(r.residual_frobenius <= 1e-10);
        assert!((r.p - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn exactness_over_random_channels() {
        let mut rng = RandomSource::new(43);
        for d in [2, 3] {
            let design = clifford_group(d).unwrap();
            for _ in 0..50 {
                let j = random_mixed_unitary(d, 4, &mut rng);
                let r = decompose_exact(&j, &design).unwrap();
                assert!(r.residual_frobenius <= 1e-10, "{}", r.residual_frobenius);
                let sum: f64 = r.ensemble.weights().sum();
                assert!((sum - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn exact_rejects_bad_inputs() {
        let clifford = clifford_group(2).unwrap();
        let mut m = depolarizing_choi(2).into_matrix();
        m[(0, 0)] += linalg::C64::new(0.1, 0.0);
        let bad = ChoiMatrix::new(2, m).unwrap();
        assert!(matches!(decompose_exact(&bad, &clifford), Err(Error::NotDoublyStochastic { .. })));
        let weyl = UnitaryDesign::new(2, weyl_operators(2).unwrap().elements().to_vec(), 2, "weyl-claimed-2").unwrap();
        assert!(matches!(decompose_exact(&depolarizing_choi(2), &weyl), Err(Error::DesignVerification { .. })));
        assert!(decompose_exact(&depolarizing_choi(3), &clifford).is_err());
    }

    #[test]
    fn target_range() {
        let design = clifford_group(2).unwrap();
        let mut rng = RandomSource::new(44);
        let j = random_mixed_unitary(2, 3, &mut rng);
        let zero = decompose_target(&j, 0.0, &design).unwrap();
        assert_eq!(zero.ensemble, depolarizing_ensemble(2).unwrap());
        assert!(zero.residual_frobenius < 1e-14);

        let full = decompose_target(&j, max_mixing(2), &design).unwrap();
        let exact = decompose_exact(&j, &design).unwrap();
        assert_eq!(full.ensemble, exact.ensemble);

        let sixth = decompose_target(&j, 1.0 / 6.0, &design).unwrap();
        let oracle = mix(&[j.clone(), depolarizing_choi(2)], &[1.0 / 6.0, 5.0 / 6.0]).unwrap();
        let brute = ensemble_to_choi(&sixth.ensemble);
        assert!(linalg::frobenius_norm(&(brute.matrix() - oracle.matrix())) <= 1e-10);

        assert!(matches!(decompose_target(&j, 0.4, &design), Err(Error::MixingOutOfRange { .. })));
        assert!(matches!(decompose_target(&j, max_mixing(2) + 1e-6, &design), Err(Error::MixingOutOfRange { .. })));
        assert!(decompose_target(&j, -0.1, &design).is_err());
    }

    #[test]
    fn monte_carlo_single_sample() {
        let id = identity_channel_choi(2);
        let r = monte_carlo_decompose(&id, 1, 3).unwrap();
        assert_eq!(r.ensemble_size, 1);
        let u = &r.ensemble.terms()[0].1;
        let expected = linalg::frobenius_norm(&(unitary_choi(u) - r.target.matrix()));
        assert!((r.residual_frobenius - expected).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_converges() {
        let id = identity_channel_choi(2);
        let r = monte_carlo_decompose(&id, 100_000, 0).unwrap();
        assert!(r.residual_frobenius <= 0.05, "{}", r.residual_frobenius);
        let direct = monte_carlo_residual(&id, 100_000, 0).unwrap();
        assert!((direct - r.residual_frobenius).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_residual_shrinks_like_inverse_sqrt() {
        let id = identity_channel_choi(2);
        let mean = |n| (0..5u64).map(|s| monte_carlo_residual(&id, n, s).unwrap()).sum::<f64>() / 5.0;
        let ratio = mean(10_000) / mean(1_000_000);
        assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn prune_leaves_small_ensembles_alone() {
        let e = UnitaryEnsemble::new(2, vec![(1.0, linalg::identity(2))]).unwrap();
        let target = ensemble_to_choi(&e);
        assert_eq!(caratheodory_prune(&e, &target, 1e-12).unwrap(), e);
    }

    #[test]
    fn prune_to_bound() {
        let mut rng = RandomSource::new(45);
        for (d, bound) in [(2, 10), (3, 65)] {
            let design = clifford_group(d).unwrap();
            let j = random_mixed_unitary(d, 6, &mut rng);
            let r = decompose_exact(&j, &design).unwrap();
            let before = ensemble_to_choi(&r.ensemble);
            let pruned = caratheodory_prune(&r.ensemble, &r.target, 1e-10).unwrap();
            assert!(pruned.len() <= bound, "{} > {bound}", pruned.len());
            let drift = linalg::frobenius_norm(&(ensemble_to_choi(&pruned).matrix() - before.matrix()));
            assert!(drift <= 1e-9, "drift {drift}");
            assert!(pruned.weights().all(|w| w >= 0.0));
        }
    }

    #[test]
    fn prune_checks_target() {
        let design = clifford_group(2).unwrap();
        let r = decompose_exact(&depolarizing_choi(2), &design).unwrap();
        assert!(matches!(
            caratheodory_prune(&r.ensemble, &identity_channel_choi(2), 1e-10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn report_prune_keeps_residual() {
        let design = clifford_group(2).unwrap();
        let r = decompose_exact(&identity_channel_choi(2), &design).unwrap();
        let before = r.residual_frobenius;
        let p = r.prune(1e-10).unwrap();
        assert!(p.pruned && p.ensemble_size <= 10);
        assert!(p.residual_frobenius <= before + 1e-9);
    }
}
