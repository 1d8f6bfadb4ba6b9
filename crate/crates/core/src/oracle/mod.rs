//! Brute-force ground truth for the scale: random images of the positive unit
//! ball, exhaustive diagonal projections, the positive-part support function
//! and point-cloud hulls. Nothing here uses the `spectral` module.

pub mod hull;

pub use hull::{hull_faces, Facet, PointCloudHull};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::algebra::{CMatrix, HermitianOperator, OperatorTuple, ScalePoint};
use crate::error::{Error, Result};

/// Largest total dimension for which all `2^d` diagonal projections are enumerated.
pub const EXHAUSTIVE_MAX_DIM: usize = 12;

const SHARD: usize = 256;

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Haar unitary via QR of a complex Ginibre matrix with the phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Random element of the positive unit ball of `M_d`: `U·diag(u)·U*` with `U`
/// Haar. With probability 3/4 `u` is a 0/1 vector of random rank (a random
/// projection), otherwise uniform on `[0,1]^d`.
pub fn random_positive_contraction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let u: Vec<f64> = if rng.random::<f64>() < 0.75 {
        let rank = if d >= 2 { rng.random_range(1..d) } else { rng.random_range(0..=1) };
        let mut v: Vec<f64> = (0..d).map(|k| if k < rank { 1.0 } else { 0.0 }).collect();
        for k in (1..d).rev() {
            v.swap(k, rng.random_range(0..=k));
        }
        v
    } else {
        (0..d).map(|_| rng.random::<f64>()).collect()
    };
    if d == 1 {
        return CMatrix::from_element(1, 1, Complex64::new(u[0], 0.0));
    }
    let q = haar_unitary(d, rng);
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        u.iter().map(|&v| Complex64::new(v, 0.0)),
    ));
    let a = &q * diag * q.adjoint();
    (&a + a.adjoint()).scale(0.5)
}

/// `Ψ` restricted to block `j`, computed directly from the traces.
fn block_image(tuple: &OperatorTuple, j: usize, a: &CMatrix) -> Vec<f64> {
    let w = tuple.algebra().blocks()[j].weight;
    let mut x = Vec::with_capacity(tuple.n() + 1);
    x.push(w * a.trace().re);
    for b in tuple.operators() {
        let bj = &b.blocks()[j];
        let d = a.nrows();
        let mut acc = 0.0;
        for i in 0..d {
            for k in 0..d {
                acc += (bj[(i, k)] * a[(k, i)]).re;
            }
        }
        x.push(w * acc);
    }
    x
}

fn diagonal_patterns(tuple: &OperatorTuple, j: usize) -> Vec<Vec<f64>> {
    let d = tuple.algebra().blocks()[j].dim;
    if d > EXHAUSTIVE_MAX_DIM {
        return Vec::new();
    }
    (0u32..(1u32 << d))
        .map(|mask| {
            let a = CMatrix::from_fn(d, d, |r, c| {
                if r == c && mask & (1 << r) != 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            block_image(tuple, j, &a)
        })
        .collect()
}

/// `m` images `Ψ(a)` of random `a ∈ M₁⁺` (independent per block), followed
/// by the images of all diagonal 0/1 patterns when the total dimension is
/// at most [`EXHAUSTIVE_MAX_DIM`].
pub fn sample_unit_ball(tuple: &OperatorTuple, m: usize, seed: u64) -> Vec<ScalePoint> {
    let blocks = tuple.algebra().blocks();
    let shards = m.div_ceil(SHARD);
    let mut out: Vec<ScalePoint> = (0..shards)
        .into_par_iter()
        .flat_map_iter(|s| {
            let mut rng = shard_rng(seed, s as u64);
            let count = SHARD.min(m - s * SHARD);
            (0..count)
                .map(|_| {
                    let mut x = vec![0.0; tuple.n() + 1];
                    for (j, b) in blocks.iter().enumerate() {
                        let a = random_positive_contraction(b.dim, &mut rng);
                        for (xi, yi) in x.iter_mut().zip(block_image(tuple, j, &a)) {
                            *xi += yi;
                        }
                    }
                    ScalePoint(x)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    if let Some(ex) = exhaustive_diagonal_images(tuple) {
        out.extend(ex);
    }
    out
}

/// Images of all `2^d` diagonal projections, when `d ≤ EXHAUSTIVE_MAX_DIM`.
pub fn exhaustive_diagonal_images(tuple: &OperatorTuple) -> Option<Vec<ScalePoint>> {
    let alg = tuple.algebra();
    let total = alg.total_dim();
    if total > EXHAUSTIVE_MAX_DIM {
        return None;
    }
    let mut diag: Vec<(f64, Vec<f64>)> = Vec::with_capacity(total);
    for (j, b) in alg.blocks().iter().enumerate() {
        for k in 0..b.dim {
            let vals = tuple.operators().iter().map(|op| op.blocks()[j][(k, k)].re).collect();
            diag.push((b.weight, vals));
        }
    }
    Some(
        (0u32..(1u32 << total))
            .map(|mask| {
                let mut x = vec![0.0; tuple.n() + 1];
                for (k, (w, vals)) in diag.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        x[0] += w;
                        for (xi, v) in x[1..].iter_mut().zip(vals) {
                            *xi += w * v;
                        }
                    }
                }
                ScalePoint(x)
            })
            .collect(),
    )
}

/// True when every operator is diagonal in the given block basis, so the
/// scale is the hull of the diagonal projection images.
pub fn is_jointly_diagonal(tuple: &OperatorTuple) -> bool {
    tuple.operators().iter().all(|op| {
        op.blocks().iter().all(|m| {
            (0..m.nrows()).all(|r| (0..m.ncols()).all(|c| r == c || m[(r, c)].norm() == 0.0))
        })
    })
}

/// The max-form support function `h_B(u) = Σ_j c_j Σ_{λ>0} λ` over the
/// eigenvalues of `u₀·1 + b_{(u₁..u_n)}` in each block.
pub fn oracle_support(tuple: &OperatorTuple, u: &[f64]) -> Result<f64> {
    if u.len() != tuple.n() + 1 {
        return Err(Error::DirectionLength {
            expected: tuple.n() + 1,
            got: u.len(),
        });
    }
    let mut h = 0.0;
    for (j, b) in tuple.algebra().blocks().iter().enumerate() {
        let mut c = CMatrix::identity(b.dim, b.dim) * Complex64::new(u[0], 0.0);
        for (ui, op) in u[1..].iter().zip(tuple.operators()) {
            c += &op.blocks()[j] * Complex64::new(*ui, 0.0);
        }
        let c = (&c + c.adjoint()).scale(0.5);
        let vals = if b.dim == 1 {
            vec![c[(0, 0)].re]
        } else {
            c.try_symmetric_eigen(f64::EPSILON, 10_000)
                .map(|e| e.eigenvalues)
                .ok_or(Error::EigenSolver { block: j })?
                .iter()
                .copied()
                .collect()
        };
        h += b.weight * vals.iter().filter(|v| **v > 0.0).sum::<f64>();
    }
    Ok(h)
}

/// Per-block samples of the scale. `B` is the Minkowski sum of the block
/// scales `Ψ(0 ⊕ ⋯ ⊕ (M_{d_j})₁⁺ ⊕ ⋯ ⊕ 0)`, so a linear functional is
/// minimized blockwise; `m` samples per block stand in for `m^{#blocks}`
/// combined points.
#[derive(Clone, Debug)]
pub struct BlockSampledScale {
    blocks: Vec<Vec<Vec<f64>>>,
    len: usize,
}

impl BlockSampledScale {
    pub fn new(tuple: &OperatorTuple, m: usize, seed: u64) -> Self {
        let blocks = tuple
            .algebra()
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, b)| {
                let shards = m.div_ceil(SHARD);
                let mut pts: Vec<Vec<f64>> = (0..shards)
                    .into_par_iter()
                    .flat_map_iter(|s| {
                        let mut rng = shard_rng(seed ^ ((j as u64 + 1) << 40), s as u64);
                        let count = SHARD.min(m - s * SHARD);
                        (0..count)
                            .map(|_| block_image(tuple, j, &random_positive_contraction(b.dim, &mut rng)))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                pts.extend(diagonal_patterns(tuple, j));
                pts
            })
            .collect();
        BlockSampledScale {
            blocks,
            len: tuple.n() + 1,
        }
    }

    /// Sampled `min ⟨u, x⟩`; an upper bound for the true minimum over `B`.
    pub fn min_linear(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.len);
        self.blocks
            .iter()
            .map(|pts| {
                pts.iter()
                    .map(|x| x.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    /// Sampled `max ⟨u, x⟩`; a lower bound for `h_B(u)`.
    pub fn max_linear(&self, u: &[f64]) -> f64 {
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        -self.min_linear(&neg)
    }

    pub fn samples_per_block(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }
}

/// Random self-adjoint element with entries of unit scale (for property tests).
pub fn random_hermitian<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> HermitianOperator {
    let blocks = dims
        .iter()
        .map(|&d| {
            let g = CMatrix::from_fn(d, d, |r, c| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = if r == c { 0.0 } else { StandardNormal.sample(rng) };
                Complex64::new(re, im)
            });
            (&g + g.adjoint()).scale(0.5)
        })
        .collect();
    HermitianOperator::new(blocks).expect("symmetrized by construction")
}

/// Random element of `M₁⁺` for the given block dimensions.
pub fn random_unit_ball_element<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> HermitianOperator {
    HermitianOperator::new(dims.iter().map(|&d| random_positive_contraction(d, rng)).collect())
        .expect("symmetrized by construction")
}

/// Seeded generator used throughout the randomized checks.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
