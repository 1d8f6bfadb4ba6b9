//! Small tuples with known scales, shared by tests, benchmarks and the CLI.

use nalgebra::DMatrix;

use crate::algebra::{Block, FiniteAlgebra, HermitianOperator, OperatorTuple};

pub const NAMES: &[&str] = &["harmonic", "rational-pair", "step-pair", "three-block", "pauli", "diag01"];

pub fn by_name(name: &str) -> Option<OperatorTuple> {
    match name {
        "harmonic" => Some(harmonic()),
        "rational-pair" => Some(rational_pair()),
        "step-pair" => Some(step_pair()),
        "three-block" => Some(three_block()),
        "pauli" => Some(pauli()),
        "diag01" => Some(diag01()),
        _ => None,
    }
}

/// Weights `2^{-k} / (1 − 2^{-d})`, `k = 1..d`.
pub fn dyadic_weights(d: usize) -> Vec<f64> {
    let norm = 1.0 - 0.5f64.powi(d as i32);
    (1..=d).map(|k| 0.5f64.powi(k as i32) / norm).collect()
}

/// `ℓ^∞_8` with dyadic weights and `b = diag(1, 1/2, …, 1/8)`.
pub fn harmonic() -> OperatorTuple {
    let d = 8;
    let alg = FiniteAlgebra::diagonal(&dyadic_weights(d)).unwrap();
    let b: Vec<f64> = (1..=d).map(|k| 1.0 / k as f64).collect();
    let b = HermitianOperator::from_real_diagonal(&alg.dims(), &b).unwrap();
    OperatorTuple::new(alg, vec![b]).unwrap()
}

/// Commuting pair on `ℓ^∞_8` with dyadic weights: `b₁ = diag(1/k)`,
/// `b₂ = diag(r_k/k)` for rationals `r_k` enumerated without repetition.
pub fn rational_pair() -> OperatorTuple {
    let d = 8;
    let alg = FiniteAlgebra::diagonal(&dyadic_weights(d)).unwrap();
    let r = [1.0, 0.5, 2.0, 1.0 / 3.0, 3.0, 2.0 / 3.0, 1.5, 0.25];
    let b1: Vec<f64> = (1..=d).map(|k| 1.0 / k as f64).collect();
    let b2: Vec<f64> = (1..=d).map(|k| r[k - 1] / k as f64).collect();
    let dims = alg.dims();
    let b1 = HermitianOperator::from_real_diagonal(&dims, &b1).unwrap();
    let b2 = HermitianOperator::from_real_diagonal(&dims, &b2).unwrap();
    OperatorTuple::new(alg, vec![b1, b2]).unwrap()
}

/// Commuting pair on `ℓ^∞_6` with uniform weights: `b₁ = diag((k − ½)/6)`
/// and `b₂` the indicator of `b₁ ≤ ½`.
pub fn step_pair() -> OperatorTuple {
    let d = 6;
    let alg = FiniteAlgebra::diagonal(&vec![1.0 / d as f64; d]).unwrap();
    let x: Vec<f64> = (1..=d).map(|k| (k as f64 - 0.5) / d as f64).collect();
    let chi: Vec<f64> = x.iter().map(|&v| if v <= 0.5 { 1.0 } else { 0.0 }).collect();
    let dims = alg.dims();
    let b1 = HermitianOperator::from_real_diagonal(&dims, &x).unwrap();
    let b2 = HermitianOperator::from_real_diagonal(&dims, &chi).unwrap();
    OperatorTuple::new(alg, vec![b1, b2]).unwrap()
}

fn real(d: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, v)
}

const SX: [f64; 4] = [0.0, 1.0, 1.0, 0.0];
const SZ: [f64; 4] = [1.0, 0.0, 0.0, -1.0];
const ZERO2: [f64; 4] = [0.0; 4];

/// `M₂ ⊕ M₂ ⊕ C`, every summand with weight 1/5 per dimension:
/// `b₁ = σ_x ⊕ σ_x ⊕ 3`, `b₂ = σ_z ⊕ 0 ⊕ 5`.
///
/// The projection onto the scalar summand is central and its image is a
/// sharp vertex. The face exposed by `(0, (0,1))` is a parallelogram with
/// `r = 0 ⊕ 1 ⊕ 0`; one of its vertices is not exposed in the whole scale.
pub fn three_block() -> OperatorTuple {
    let alg = FiniteAlgebra::new(vec![
        Block { dim: 2, weight: 0.2 },
        Block { dim: 2, weight: 0.2 },
        Block { dim: 1, weight: 0.2 },
    ])
    .unwrap();
    let b1 = HermitianOperator::from_real_blocks(vec![real(2, &SX), real(2, &SX), real(1, &[3.0])]).unwrap();
    let b2 = HermitianOperator::from_real_blocks(vec![real(2, &SZ), real(2, &ZERO2), real(1, &[5.0])]).unwrap();
    OperatorTuple::new(alg, vec![b1, b2]).unwrap()
}

/// `M₂` with `τ = Tr/2`, `b₁ = σ_x`, `b₂ = σ_z`.
pub fn pauli() -> OperatorTuple {
    let alg = FiniteAlgebra::full_matrix(2);
    let b1 = HermitianOperator::from_real_blocks(vec![real(2, &SX)]).unwrap();
    let b2 = HermitianOperator::from_real_blocks(vec![real(2, &SZ)]).unwrap();
    OperatorTuple::new(alg, vec![b1, b2]).unwrap()
}

/// `M₂` with `τ = Tr/2` and `b = diag(0, 1)`.
pub fn diag01() -> OperatorTuple {
    let alg = FiniteAlgebra::full_matrix(2);
    let b = HermitianOperator::from_real_diagonal(&[2], &[0.0, 1.0]).unwrap();
    OperatorTuple::new(alg, vec![b]).unwrap()
}

/// `n` zero operators on `M_d`.
pub fn zeros(d: usize, n: usize) -> OperatorTuple {
    let alg = FiniteAlgebra::full_matrix(d);
    let ops = (0..n).map(|_| alg.zero()).collect();
    OperatorTuple::new(alg, ops).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_named_fixtures_build() {
        for name in NAMES {
            assert!(by_name(name).is_some(), "{name}");
        }
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn three_block_generators_do_not_commute() {
        assert!(three_block().max_pairwise_commutator() > 1.0);
        assert_eq!(step_pair().max_pairwise_commutator(), 0.0);
    }
}
