//! Haar moment operators, twirling, and Monte-Carlo estimates of both.
//!
//! Second-moment operators are stored on `Y1 ⊗ X1 ⊗ Y2 ⊗ X2`, the natural
//! order of `vec(U)vec(U)* ⊗ vec(U)vec(U)*`. The closed form pairs the two
//! output copies and the two input copies, so it is built on
//! `Y1 ⊗ Y2 ⊗ X1 ⊗ X2` and then permuted.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::unitary_choi;
use crate::error::{shape_mismatch, Error, Result};
use crate::linalg::{self, haar_unitary, hs_inner, identity, kron, CMatrix, RandomSource};

/// Samples per independently seeded chunk. Fixed so that results do not
/// depend on how many worker threads run.
pub const CHUNK_SIZE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentOrder {
    #[serde(rename = "1")]
    First,
    #[serde(rename = "2")]
    Second,
}

impl MomentOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            MomentOrder::First => 1,
            MomentOrder::Second => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub order: u8,
    pub d: usize,
    pub sample_count: usize,
    #[serde(skip)]
    pub empirical: CMatrix,
    #[serde(skip)]
    pub exact: CMatrix,
    pub error_frobenius: f64,
    pub error_spectral: f64,
}

impl MomentReport {
    pub fn new(order: MomentOrder, d: usize, sample_count: usize, empirical: CMatrix, exact: CMatrix) -> Self {
        let diff = &empirical - &exact;
        let norms = linalg::operator_norms(&diff);
        Self {
            order: order.as_u8(),
            d,
            sample_count,
            empirical,
            exact,
            error_frobenius: norms.frobenius,
            error_spectral: norms.spectral,
        }
    }
}

fn second_moment_coefficients(d: usize) -> (f64, f64) {
    let d = d as f64;
    (2.0 / (d * (d - 1.0)), 2.0 / (d * (d + 1.0)))
}

/// `∫ vec(U)vec(U)* dμ = 1/d`.
pub fn first_moment_exact(d: usize) -> CMatrix {
    identity(d * d).scale(1.0 / d as f64)
}

/// `∫ vec(U)vec(U)* ⊗ vec(U)vec(U)* dμ` on `Y1 X1 Y2 X2`.
pub fn second_moment_exact(d: usize) -> Result<CMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension { d, reason: "second moment needs d >= 2" });
    }
    let (cr, cs) = second_moment_coefficients(d);
    let (r, s) = linalg::sym_antisym_projectors(d);
    // R_{Y1Y2} ⊗ R_{X1X2} lives on Y1 Y2 X1 X2
    let grouped = kron(&r, &r).scale(cr) + kron(&s, &s).scale(cs);
    linalg::permute_subsystems(&grouped, &[d, d, d, d], &[0, 2, 1, 3])
}

/// `∫ (U⊗U) X (U⊗U)* dμ = c_R <R,X> R + c_S <S,X> S`.
pub fn twirl_exact(x: &CMatrix, d: usize) -> Result<CMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension { d, reason: "twirl needs d >= 2" });
    }
    let n = d * d;
    if x.shape() != (n, n) {
        return Err(shape_mismatch((n, n), x.shape()));
    }
    let (cr, cs) = second_moment_coefficients(d);
    let (r, s) = linalg::sym_antisym_projectors(d);
    let ar = hs_inner(&r, x)?;
    let as_ = hs_inner(&s, x)?;
    Ok(&r * (ar * cr) + &s * (as_ * cs))
}

/// Contracts a second-moment operator against `J` on the second copy:
/// `Tr_{Y2 X2}[M (1 ⊗ J)]`.
pub fn contract_second_copy(moment: &CMatrix, j: &CMatrix) -> Result<CMatrix> {
    let n = j.nrows();
    if j.shape() != (n, n) || moment.shape() != (n * n, n * n) {
        return Err(shape_mismatch((n * n, n * n), moment.shape()));
    }
    // [M (1⊗J)]_{(a,x),(b,x)} summed over x
    Ok(CMatrix::from_fn(n, n, |a, b| {
        let mut acc = linalg::ZERO;
        for x in 0..n {
            for y in 0..n {
                acc += moment[(a * n + x, b * n + y)] * j[(y, x)];
            }
        }
        acc
    }))
}

/// Splits `n` samples into fixed-size chunks, each with its own derived
/// stream, runs `f(stream, chunk_len)` in parallel and returns the results
/// in chunk order.
pub fn sample_chunks<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RandomSource, usize) -> T + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK_SIZE.min(n - k * CHUNK_SIZE);
            let mut rng = RandomSource::derive(seed, k as u64);
            f(&mut rng, len)
        })
        .collect()
}

/// Sample-mean estimate of a Haar moment from `n_samples` seeded draws.
pub fn monte_carlo_moment(order: MomentOrder, d: usize, n_samples: usize, seed: u64) -> Result<MomentReport> {
    if n_samples == 0 {
        return Err(Error::Precondition("n_samples must be at least 1".into()));
    }
    let exact = match order {
        MomentOrder::First => first_moment_exact(d),
        MomentOrder::Second => second_moment_exact(d)?,
    };
    let side = exact.nrows();
    let partial = sample_chunks(n_samples, seed, |rng, len| {
        let mut acc = CMatrix::zeros(side, side);
        for _ in 0..len {
            let p = unitary_choi(&haar_unitary(d, rng));
            match order {
                MomentOrder::First => acc += p,
                MomentOrder::Second => acc += kron(&p, &p),
            }
        }
        acc
    });
    let sum = partial.into_iter().fold(CMatrix::zeros(side, side), |acc, m| acc + m);
    Ok(MomentReport::new(order, d, n_samples, sum.scale(1.0 / n_samples as f64), exact))
}
