//! Random operators and channels for tests, property checks and demos.
//!
//! All generators take an explicit RNG so that every instance is reproducible
//! from a seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::channel::CqWiretapChannel;
use crate::density::DensityOperator;
use crate::operator::{CMatrix, HermitianOperator};

/// Standard normal sample (Box-Muller).
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Complex Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(normal(rng), normal(rng)))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = ginibre(rng, dim, dim);
    HermitianOperator::symmetrized(&g + g.adjoint())
}

/// Density operator of the given rank, `G G^H / tr` with `G` a `dim x rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, dim, rank.clamp(1, dim));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::from_operator_unchecked(HermitianOperator::symmetrized(
        m / Complex64::new(tr, 0.0),
    ))
}

/// Full-rank density operator with eigenvalues bounded away from zero by mixing
/// with the maximally mixed state.
pub fn random_full_rank_density<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    floor: f64,
) -> DensityOperator {
    let rho = random_density(rng, dim, dim);
    let mixed = DensityOperator::maximally_mixed(dim);
    let w = (floor * dim as f64).clamp(0.0, 1.0);
    DensityOperator::mixture(&[1.0 - w, w], &[&rho, &mixed]).expect("same dimension")
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniform sample from the probability simplex.
pub fn random_probability<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Diagonal density operator with a random spectrum bounded below by `floor`.
pub fn random_diagonal_density<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    floor: f64,
) -> DensityOperator {
    let p = random_probability(rng, dim);
    let w = (floor * dim as f64).clamp(0.0, 1.0);
    let probs: Vec<f64> = p.iter().map(|x| (1.0 - w) * x + w / dim as f64).collect();
    DensityOperator::diagonal(&probs).expect("valid spectrum")
}

/// Channel with full-rank receiver and eavesdropper states. With `k` small
/// relative to `dz²` such channels are generically in the square-root regime.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    dy: usize,
    dz: usize,
) -> CqWiretapChannel {
    let sigma = (0..k)
        .map(|_| random_full_rank_density(rng, dy, 0.05))
        .collect();
    let rho = (0..k)
        .map(|_| random_full_rank_density(rng, dz, 0.05))
        .collect();
    CqWiretapChannel::new(sigma, rho).expect("consistent random channel")
}

/// Simultaneously diagonal channel (all states commute).
pub fn random_diagonal_channel<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    dy: usize,
    dz: usize,
) -> CqWiretapChannel {
    let sigma = (0..k)
        .map(|_| random_diagonal_density(rng, dy, 0.05))
        .collect();
    let rho = (0..k)
        .map(|_| random_diagonal_density(rng, dz, 0.05))
        .collect();
    CqWiretapChannel::new(sigma, rho).expect("consistent random channel")
}
