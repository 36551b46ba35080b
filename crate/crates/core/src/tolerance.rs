//! Default numerical tolerances.

/// Entrywise bound on `|M - M*|` for Hermiticity.
pub const HERMITIAN: f64 = 1e-10;
/// Eigenvalue floor for positive semidefiniteness.
pub const PSD: f64 = 1e-10;
/// Entrywise bound on `|U*U - 1|` for sampled and enumerated unitaries.
pub const UNITARY: f64 = 1e-12;
/// Looser unitarity bound accepted for ensemble terms read from files.
pub const ENSEMBLE_UNITARY: f64 = 1e-10;
/// Ensemble weights must sum to one within this.
pub const WEIGHT_SUM: f64 = 1e-12;
/// Default tolerance for channel validity verdicts.
pub const VALIDITY: f64 = 1e-10;
/// Double-stochasticity gate applied before decomposing.
pub const DS_GATE: f64 = 1e-8;
/// Design moment agreement required before exact decomposition.
pub const DESIGN: f64 = 1e-10;
/// Singular-value cutoff used when locating affine dependencies.
pub const SINGULAR_VALUE: f64 = 1e-10;
/// Allowed extra Choi drift introduced by pruning.
pub const PRUNE_DRIFT: f64 = 1e-10;
/// Convergence target for the projected random-channel generator.
pub const PROJECTION: f64 = 1e-10;
/// Sweep cap for the projected random-channel generator.
pub const PROJECTION_SWEEPS: usize = 10_000;
/// Absolute slack on the ball-membership comparison.
pub const BALL_BOUNDARY: f64 = 1e-12;

/// Tolerance overrides carried through the CLI.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Tolerances {
    pub validity: f64,
    pub gate: f64,
    pub design: f64,
    pub psd: f64,
    pub prune: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { validity: VALIDITY, gate: DS_GATE, design: DESIGN, psd: PSD, prune: PRUNE_DRIFT }
    }
}
