//! Test channels, the certified ball around `Ω`, and the density-operator
//! view of doubly stochastic channels.

use serde::Serialize;

use crate::channels::{
    self, depolarizing_choi, ensemble_to_choi, validate, ChoiMatrix, UnitaryEnsemble, ValidityReport,
};
use crate::decomposer::{self, DecompositionMode, DecompositionReport};
use crate::designs::UnitaryDesign;
use crate::error::{Error, Result};
use crate::linalg::{
    self, haar_unitary, identity, kron, partial_trace, BipartiteShape, CMatrix, RandomSource, Subsystem,
};
use crate::tolerance;

/// Werner–Holevo channel `X ↦ (Tr(X)·1 - Xᵀ)/(d-1)`, with Choi matrix
/// `(1 - W)/(d-1)`. Doubly stochastic; for d = 3 it is not mixed-unitary.
pub fn werner_holevo_antisym(d: usize) -> Result<ChoiMatrix> {
    if d < 3 {
        return Err(Error::InvalidDimension { d, reason: "Werner-Holevo channel needs d >= 3" });
    }
    let m = (identity(d * d) - linalg::swap_operator(d)).scale(1.0 / (d as f64 - 1.0));
    ChoiMatrix::new(d, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorMethod {
    /// `terms` Haar unitaries with flat-Dirichlet weights.
    MixedUnitary { terms: usize },
    /// Dykstra projections of a random low-rank PSD matrix onto the doubly
    /// stochastic Choi matrices.
    Projected,
}

/// Orthogonal projection onto `{J : Tr_Y J = 1, Tr_X J = 1}`.
pub fn project_marginals(j: &CMatrix, d: usize) -> CMatrix {
    project_marginals_to(j, d, 1.0)
}

/// Orthogonal projection onto `{H : Tr_Y H = c·1, Tr_X H = c·1}`; `c = 0`
/// gives the traceless directions of the doubly stochastic affine hull.
fn project_marginals_to(j: &CMatrix, d: usize, c: f64) -> CMatrix {
    let shape = BipartiteShape::square(d);
    let id = identity(d);
    let dd = d as f64;
    let input = partial_trace(j, shape, Subsystem::Left).expect("square Choi side") - id.scale(c);
    let output = partial_trace(j, shape, Subsystem::Right).expect("square Choi side") - id.scale(c);
    let excess = linalg::trace(&input);
    j - kron(&id, &input).scale(1.0 / dd) - kron(&output, &id).scale(1.0 / dd) + identity(d * d) * (excess / (dd * dd))
}

fn marginal_residual(j: &CMatrix, d: usize) -> f64 {
    let shape = BipartiteShape::square(d);
    let id = identity(d);
    let tp = linalg::spectral_norm(&(partial_trace(j, shape, Subsystem::Left).expect("square") - &id));
    let un = linalg::spectral_norm(&(partial_trace(j, shape, Subsystem::Right).expect("square") - &id));
    tp.max(un)
}

/// Random doubly stochastic channel.
pub fn random_ds_channel(d: usize, rng: &mut RandomSource, method: GeneratorMethod) -> Result<ChoiMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension { d, reason: "random channels need d >= 2" });
    }
    match method {
        GeneratorMethod::MixedUnitary { terms } => {
            if terms == 0 {
                return Err(Error::Precondition("mixed-unitary generator needs at least one term".into()));
            }
            let raw: Vec<f64> = (0..terms).map(|_| -(1.0 - rng.uniform()).ln()).collect();
            let total: f64 = raw.iter().sum();
            let ensemble =
                UnitaryEnsemble::normalized(d, raw.iter().map(|w| (w / total, haar_unitary(d, rng))).collect())?;
            Ok(ensemble_to_choi(&ensemble))
        }
        GeneratorMethod::Projected => {
            let g = linalg::ginibre(d * d, d, rng);
            let mut start = &g * g.adjoint();
            let tr = linalg::trace(&start).re;
            start.scale_mut(d as f64 / tr);
            let m = dykstra(start, d, tolerance::PROJECTION, tolerance::PROJECTION_SWEEPS)?;
            ChoiMatrix::new(d, m)
        }
    }
}

/// Dykstra's alternating projections between the marginal constraints and
/// the PSD cone, ending on a PSD iterate whose marginals are within
/// `target` of the identity.
pub fn dykstra(start: CMatrix, d: usize, target: f64, max_sweeps: usize) -> Result<CMatrix> {
    let n = d * d;
    let mut x = start;
    let mut p = CMatrix::zeros(n, n);
    let mut q = CMatrix::zeros(n, n);
    let mut residual = f64::INFINITY;
    for _ in 0..max_sweeps {
        let y = project_marginals(&(&x + &p), d);
        p = &x + &p - &y;
        let next = linalg::project_psd(&(&y + &q));
        q = &y + &q - &next;
        x = next;
        residual = marginal_residual(&x, d);
        if residual <= target {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence { iterations: max_sweeps, residual })
}

/// Traceless direction `H` in the doubly stochastic affine hull with
/// `‖H‖_∞ = 1` and `λ_min(H) = -1`.
pub fn affine_direction(d: usize, rng: &mut RandomSource) -> CMatrix {
    loop {
        let g = linalg::random_hermitian(d * d, rng);
        let h = linalg::hermitian_part(&project_marginals_to(&g, d, 0.0));
        let ev = linalg::hermitian_eigenvalues(&h);
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        let norm = lo.abs().max(hi.abs());
        if norm > 1e-6 {
            // orient so the most negative eigenvalue carries the norm
            let sign = if -lo >= hi { 1.0 } else { -1.0 };
            return h.scale(sign / norm);
        }
    }
}

/// `1/(d(d²-1))`.
pub fn ball_radius(d: usize) -> f64 {
    let dd = d as f64;
    1.0 / (dd * (dd * dd - 1.0))
}

/// Channel `J(Ω) + scale·radius·H` for a random affine direction `H`.
pub fn ball_probe(d: usize, scale: f64, rng: &mut RandomSource) -> Result<ChoiMatrix> {
    let h = affine_direction(d, rng);
    ChoiMatrix::new(d, depolarizing_choi(d).into_matrix() + h.scale(scale * ball_radius(d)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallCertificate {
    pub d: usize,
    pub infinity_distance: f64,
    pub radius: f64,
    pub inside: bool,
    /// Validity of `Ψ = (d²-1)Φ - (d²-2)Ω`.
    pub psi_validity: ValidityReport,
    #[serde(skip)]
    pub psi: ChoiMatrix,
}

/// Checks `‖J(Φ) - 1/d‖_∞ <= 1/(d(d²-1))` and builds the channel `Ψ` whose
/// mixture `((d²-2)·Ω + Ψ)/(d²-1)` is `Φ` itself.
pub fn ball_certificate(j: &ChoiMatrix) -> Result<BallCertificate> {
    let d = j.d();
    if d < 2 {
        return Err(Error::InvalidDimension { d, reason: "ball certificate needs d >= 2" });
    }
    let pre = validate(j, tolerance::DS_GATE);
    if !pre.trace_preserving || !pre.unital || pre.hermitian_residual > tolerance::DS_GATE {
        return Err(Error::Precondition(format!(
            "ball certificate needs a Hermitian, trace-preserving, unital map (tp {:.3e}, unital {:.3e}, hermitian {:.3e})",
            pre.tp_residual, pre.unital_residual, pre.hermitian_residual
        )));
    }
    let omega = depolarizing_choi(d);
    let offset = linalg::hermitian_part(&(j.matrix() - omega.matrix()));
    let infinity_distance = linalg::spectral_norm(&offset);
    let radius = ball_radius(d);
    let scale = (d * d) as f64 - 1.0;
    let psi = ChoiMatrix::new(d, offset.scale(scale) + omega.matrix())?;
    let psi_validity = validate(&psi, tolerance::VALIDITY);
    Ok(BallCertificate {
        d,
        infinity_distance,
        radius,
        inside: infinity_distance <= radius + tolerance::BALL_BOUNDARY,
        psi_validity,
        psi,
    })
}

/// Mixed-unitary ensemble for `Φ` itself, for `Φ` inside the certified
/// ball: the exact decomposition of `Ψ` mixes back to `Φ`.
pub fn ball_decompose(j: &ChoiMatrix, design: &UnitaryDesign) -> Result<DecompositionReport> {
    let cert = ball_certificate(j)?;
    if !cert.inside {
        return Err(Error::OutsideBall { distance: cert.infinity_distance, radius: cert.radius });
    }
    if !cert.psi_validity.completely_positive {
        return Err(Error::Precondition(format!(
            "Ψ is not completely positive (min eigenvalue {:.3e})",
            cert.psi_validity.min_eigenvalue
        )));
    }
    let inner = decomposer::decompose_exact(&cert.psi, design)?;
    Ok(DecompositionReport::build(
        DecompositionMode::ExactDesign,
        1.0,
        j.clone(),
        inner.ensemble,
        validate(j, tolerance::DS_GATE),
        inner.design,
    ))
}

/// `1/d²`, radius of the Frobenius ball of separable states.
pub fn separable_ball_radius(d: usize) -> f64 {
    1.0 / (d * d) as f64
}

/// `1/(d²(d²-1))`, the certified ball in state normalization.
pub fn maxent_ball_radius(d: usize) -> f64 {
    let dd = (d * d) as f64;
    1.0 / (dd * (dd - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateView {
    pub d: usize,
    #[serde(skip)]
    pub rho: CMatrix,
    pub trace: f64,
    /// `(‖Tr_Y ρ - 1/d‖_∞, ‖Tr_X ρ - 1/d‖_∞)`.
    pub reduction_residuals: (f64, f64),
    pub sep_ball_distance: f64,
    pub sep_ball_radius: f64,
    pub maxent_ball_distance: f64,
    pub maxent_ball_radius: f64,
}

impl StateView {
    pub fn in_sep_ball(&self) -> bool {
        self.sep_ball_distance <= self.sep_ball_radius
    }

    pub fn in_maxent_ball(&self) -> bool {
        self.maxent_ball_distance <= self.maxent_ball_radius + tolerance::BALL_BOUNDARY
    }
}

/// The density operator `ρ = J(Φ)/d` and its distances from `1/d²`.
pub fn state_view(j: &ChoiMatrix) -> Result<StateView> {
    let d = j.d();
    decomposer::require_doubly_stochastic(j, tolerance::DS_GATE)?;
    let dd = d as f64;
    let rho = j.matrix().scale(1.0 / dd);
    let shape = BipartiteShape::square(d);
    let mixed = identity(d).scale(1.0 / dd);
    let ry = linalg::spectral_norm(&(partial_trace(&rho, shape, Subsystem::Left)? - &mixed));
    let rx = linalg::spectral_norm(&(partial_trace(&rho, shape, Subsystem::Right)? - &mixed));
    let offset = &rho - identity(d * d).scale(1.0 / (dd * dd));
    let norms = linalg::operator_norms(&offset);
    Ok(StateView {
        d,
        trace: linalg::trace(&rho).re,
        rho,
        reduction_residuals: (ry, rx),
        sep_ball_distance: norms.frobenius,
        sep_ball_radius: separable_ball_radius(d),
        maxent_ball_distance: norms.spectral,
        maxent_ball_radius: maxent_ball_radius(d),
    })
}

/// Validity of `channel` at the default tolerance.
pub fn validity(channel: &ChoiMatrix) -> ValidityReport {
    channels::validate(channel, tolerance::VALIDITY)
}
