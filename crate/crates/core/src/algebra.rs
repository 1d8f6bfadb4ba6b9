//! The ambient finite von Neumann algebra `M = ⊕_j M_{d_j}` with its faithful
//! tracial state `τ(a) = Σ_j c_j Tr(A_j)`, self-adjoint elements stored block by
//! block, and the map `Ψ(a) = (τ(a), τ(b_1 a), …, τ(b_n a))`.

use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest tolerated `‖A − A*‖_max` for ingested operators.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Largest tolerated `|τ(1) − 1|`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Numerical tolerances shared by every analysis on a tuple.
///
/// `cluster_rel` and `eig_eq_rel` are relative: the absolute tolerance used
/// for an operator `a` is the factor times `max(1, ‖a‖)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Merge eigenvalues closer than this (relative).
    pub cluster_rel: f64,
    /// Band around `s` inside which an eigenvalue counts as equal to `s` (relative).
    pub eig_eq_rel: f64,
    /// Projection order and equality tests, in max norm.
    pub order: f64,
    /// Euclidean distance below which two extreme points may merge.
    pub point_dedup: f64,
    /// Max-norm distance below which two projections count as the same.
    pub projection_dedup: f64,
    /// Isolation radius as a fraction of the extreme cloud diameter.
    pub iso_radius_rel: f64,
    /// Commutator bound for declaring a projection central.
    pub central: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cluster_rel: 1e-9,
            eig_eq_rel: 1e-8,
            order: 1e-8,
            point_dedup: 1e-8,
            projection_dedup: 1e-6,
            iso_radius_rel: 1e-3,
            central: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.cluster_rel,
            self.eig_eq_rel,
            self.order,
            self.point_dedup,
            self.projection_dedup,
            self.iso_radius_rel,
            self.central,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidAlgebra("tolerances must be positive and finite".into()))
        }
    }
}

/// One summand `M_{d}` with trace weight `c` (so `τ` restricted to it is `c·Tr`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteAlgebra {
    blocks: Vec<Block>,
    total_dim: usize,
}

impl FiniteAlgebra {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        for (j, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(Error::InvalidAlgebra(format!("block {j} has dimension 0")));
            }
            if !(b.weight > 0.0) || !b.weight.is_finite() {
                return Err(Error::InvalidAlgebra(format!(
                    "block {j} has non-positive weight {}",
                    b.weight
                )));
            }
        }
        let norm: f64 = blocks.iter().map(|b| b.weight * b.dim as f64).sum();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidAlgebra(format!(
                "tau(1) = {norm} (sum of weight*dim must be 1)"
            )));
        }
        let total_dim = blocks.iter().map(|b| b.dim).sum();
        Ok(FiniteAlgebra { blocks, total_dim })
    }

    /// `M_d` with the normalized trace `Tr/d`.
    pub fn full_matrix(d: usize) -> Self {
        FiniteAlgebra::new(vec![Block {
            dim: d,
            weight: 1.0 / d as f64,
        }])
        .expect("full matrix algebra is always valid")
    }

    /// `ℓ^∞` on `weights.len()` points with the given point masses.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        FiniteAlgebra::new(
            weights
                .iter()
                .map(|&weight| Block { dim: 1, weight })
                .collect(),
        )
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn identity(&self) -> HermitianOperator {
        HermitianOperator::identity(&self.dims())
    }

    pub fn zero(&self) -> HermitianOperator {
        HermitianOperator::zeros(&self.dims())
    }

    pub fn check_conforms(&self, a: &HermitianOperator) -> Result<()> {
        if a.blocks.len() != self.blocks.len() {
            return Err(Error::Shape(format!(
                "operator has {} blocks, algebra has {}",
                a.blocks.len(),
                self.blocks.len()
            )));
        }
        for (j, (m, b)) in a.blocks.iter().zip(&self.blocks).enumerate() {
            if m.nrows() != b.dim {
                return Err(Error::Shape(format!(
                    "block {j} is {}x{}, algebra block has dimension {}",
                    m.nrows(),
                    m.ncols(),
                    b.dim
                )));
            }
        }
        Ok(())
    }

    /// `τ(a) = Σ_j c_j Tr(A_j)`.
    pub fn trace(&self, a: &HermitianOperator) -> Result<f64> {
        self.check_conforms(a)?;
        Ok(self.trace_unchecked(a))
    }

    /// `τ(ab)`; real because both factors are self-adjoint.
    pub fn trace_product(&self, a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
        self.check_conforms(a)?;
        self.check_conforms(b)?;
        Ok(self.trace_product_unchecked(a, b))
    }

    pub(crate) fn trace_unchecked(&self, a: &HermitianOperator) -> f64 {
        self.blocks
            .iter()
            .zip(&a.blocks)
            .map(|(b, m)| b.weight * m.trace().re)
            .sum()
    }

    pub(crate) fn trace_product_unchecked(&self, a: &HermitianOperator, b: &HermitianOperator) -> f64 {
        self.blocks
            .iter()
            .zip(a.blocks.iter().zip(&b.blocks))
            .map(|(blk, (x, y))| blk.weight * trace_of_product(x, y))
            .sum()
    }

    /// True when every block is one-dimensional.
    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|b| b.dim == 1)
    }
}

/// `Re Tr(XY)` without forming the product.
fn trace_of_product(x: &CMatrix, y: &CMatrix) -> f64 {
    let n = x.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (x[(i, k)] * y[(k, i)]).re;
        }
    }
    acc
}

/// A self-adjoint element of `M`, stored block by block.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    blocks: Vec<CMatrix>,
}

impl HermitianOperator {
    /// Validates self-adjointness to [`HERMITIAN_TOL`] and symmetrizes.
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        for (j, m) in blocks.iter().enumerate() {
            if m.nrows() != m.ncols() {
                return Err(Error::Shape(format!(
                    "block {j} is {}x{}, not square",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let dev = hermitian_deviation(m);
            if dev > HERMITIAN_TOL {
                return Err(Error::NotHermitian {
                    operator: 0,
                    block: j,
                    deviation: dev,
                });
            }
        }
        Ok(Self::symmetrized(blocks))
    }

    pub(crate) fn symmetrized(blocks: Vec<CMatrix>) -> Self {
        let blocks = blocks
            .into_iter()
            .map(|m| (&m + m.adjoint()).scale(0.5))
            .collect();
        HermitianOperator { blocks }
    }

    pub fn from_real_blocks(blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::new(
            blocks
                .into_iter()
                .map(|m| m.map(|v| Complex64::new(v, 0.0)))
                .collect(),
        )
    }

    /// Diagonal operator; `diag` lists the entries of all blocks in order.
    pub fn from_real_diagonal(dims: &[usize], diag: &[f64]) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if diag.len() != total {
            return Err(Error::Shape(format!(
                "{} diagonal entries for total dimension {total}",
                diag.len()
            )));
        }
        let mut offset = 0;
        let blocks = dims
            .iter()
            .map(|&d| {
                let m = CMatrix::from_fn(d, d, |i, k| {
                    if i == k {
                        Complex64::new(diag[offset + i], 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                offset += d;
                m
            })
            .collect();
        Ok(HermitianOperator { blocks })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        HermitianOperator {
            blocks: dims.iter().map(|&d| CMatrix::zeros(d, d)).collect(),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        HermitianOperator {
            blocks: dims.iter().map(|&d| CMatrix::identity(d, d)).collect(),
        }
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|m| m.nrows()).collect()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.nrows() == b.nrows())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        HermitianOperator {
            blocks: self.blocks.iter().map(|m| m * Complex64::new(alpha, 0.0)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        debug_assert!(self.same_shape(other));
        HermitianOperator {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        debug_assert!(self.same_shape(other));
        HermitianOperator {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        debug_assert!(self.same_shape(other));
        let c = Complex64::new(alpha, 0.0);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b * c;
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert!(self.same_shape(other));
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// `‖self·other − other·self‖_max`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        debug_assert!(self.same_shape(other));
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                let c = a * b - b * a;
                c.iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Jordan product `(xy + yx)/2`.
    pub fn jordan(&self, other: &Self) -> Self {
        HermitianOperator::symmetrized(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| (a * b + b * a).scale(0.5))
                .collect(),
        )
    }

    /// `(xy − yx)/(2i)`, the self-adjoint part carried by the commutator.
    pub fn skew_product(&self, other: &Self) -> Self {
        let factor = Complex64::new(0.0, -0.5);
        HermitianOperator::symmetrized(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| (a * b - b * a) * factor)
                .collect(),
        )
    }

    /// `x·y·x` for self-adjoint `x`, `y` (self-adjoint again).
    pub fn sandwich(&self, inner: &Self) -> Self {
        HermitianOperator::symmetrized(
            self.blocks
                .iter()
                .zip(&inner.blocks)
                .map(|(x, y)| x * y * x)
                .collect(),
        )
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.blocks.iter().all(|m| {
            let sq = m * m;
            sq.iter().zip(m.iter()).all(|(a, b)| (a - b).norm() <= tol)
        })
    }

    /// Projection order `self ≤ other`, tested as `‖self·other − self‖_max ≤ tol`.
    pub fn is_below(&self, other: &Self, tol: f64) -> bool {
        debug_assert!(self.same_shape(other));
        self.blocks.iter().zip(&other.blocks).all(|(p, q)| {
            let pq = p * q;
            pq.iter().zip(p.iter()).all(|(a, b)| (a - b).norm() <= tol)
        })
    }

    /// Smallest and largest eigenvalue over all blocks.
    pub fn eigenvalue_range(&self) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (j, m) in self.blocks.iter().enumerate() {
            let eig = m
                .clone()
                .try_symmetric_eigen(f64::EPSILON, 10_000)
                .ok_or(Error::EigenSolver { block: j })?;
            for &v in eig.eigenvalues.iter() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        Ok((lo, hi))
    }
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            dev = dev.max((m[(i, k)] - m[(k, i)].conj()).norm());
        }
    }
    dev
}

/// A point of `R^{n+1}`; coordinate 0 is the trace coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint(pub Vec<f64>);

impl ScalePoint {
    pub fn zeros(len: usize) -> Self {
        ScalePoint(vec![0.0; len])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trace_coord(&self) -> f64 {
        self.0[0]
    }

    pub fn dot(&self, u: &[f64]) -> f64 {
        self.0.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    pub fn distance(&self, other: &ScalePoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &ScalePoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn plus(&self, other: &ScalePoint) -> ScalePoint {
        ScalePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, other: &ScalePoint) -> ScalePoint {
        ScalePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, alpha: f64) -> ScalePoint {
        ScalePoint(self.0.iter().map(|a| a * alpha).collect())
    }
}

impl Index<usize> for ScalePoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for ScalePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v:.6}")?;
        }
        write!(f, ")")
    }
}

/// The tuple `(b_1, …, b_n)` over a finite algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTuple {
    algebra: FiniteAlgebra,
    operators: Vec<HermitianOperator>,
    tolerances: Tolerances,
}

impl OperatorTuple {
    pub fn new(algebra: FiniteAlgebra, operators: Vec<HermitianOperator>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::Shape("tuple needs at least one operator".into()));
        }
        for op in &operators {
            algebra.check_conforms(op)?;
        }
        Ok(OperatorTuple {
            algebra,
            operators,
            tolerances: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    pub fn operator(&self, i: usize) -> &HermitianOperator {
        &self.operators[i]
    }

    /// Number of operators `n`; the scale lives in `R^{n+1}`.
    pub fn n(&self) -> usize {
        self.operators.len()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn trace(&self, a: &HermitianOperator) -> Result<f64> {
        self.algebra.trace(a)
    }

    /// `b_t = t_1 b_1 + ⋯ + t_n b_n`.
    pub fn linear_combination(&self, t: &[f64]) -> Result<HermitianOperator> {
        if t.len() != self.n() {
            return Err(Error::DirectionLength {
                expected: self.n(),
                got: t.len(),
            });
        }
        let mut acc = self.algebra.zero();
        for (ti, b) in t.iter().zip(&self.operators) {
            if *ti != 0.0 {
                acc.axpy(*ti, b);
            }
        }
        Ok(acc)
    }

    /// `Ψ(a) = (τ(a), τ(b_1 a), …, τ(b_n a))`, with no membership check.
    pub fn psi(&self, a: &HermitianOperator) -> Result<ScalePoint> {
        self.algebra.check_conforms(a)?;
        Ok(self.psi_unchecked(a))
    }

    /// `Ψ(a)` after verifying `0 ≤ a ≤ 1` spectrally (to 1e-10).
    pub fn psi_in_unit_ball(&self, a: &HermitianOperator) -> Result<ScalePoint> {
        self.algebra.check_conforms(a)?;
        let (lo, hi) = a.eigenvalue_range()?;
        if lo < -1e-10 || hi > 1.0 + 1e-10 {
            return Err(Error::NotInUnitBall { min: lo, max: hi });
        }
        Ok(self.psi_unchecked(a))
    }

    pub(crate) fn psi_unchecked(&self, a: &HermitianOperator) -> ScalePoint {
        let mut coords = Vec::with_capacity(self.n() + 1);
        coords.push(self.algebra.trace_unchecked(a));
        for b in &self.operators {
            coords.push(self.algebra.trace_product_unchecked(b, a));
        }
        ScalePoint(coords)
    }

    /// Largest `‖[b_i, x]‖_max` over the generators.
    pub fn max_commutator_with(&self, x: &HermitianOperator) -> f64 {
        self.operators
            .iter()
            .map(|b| b.commutator_norm(x))
            .fold(0.0, f64::max)
    }

    /// Largest `‖[b_i, b_j]‖_max` over generator pairs.
    pub fn max_pairwise_commutator(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                worst = worst.max(self.operators[i].commutator_norm(&self.operators[j]));
            }
        }
        worst
    }
}

/// Trace-orthonormal self-adjoint basis of `N = {b_1, …, b_n, 1}''`.
#[derive(Clone, Debug)]
pub struct GeneratedAlgebra {
    algebra: FiniteAlgebra,
    basis: Vec<HermitianOperator>,
}

impl GeneratedAlgebra {
    /// Closes `{1, b_1, …, b_n}` under Jordan and commutator products,
    /// orthonormalizing under `⟨x, y⟩ = τ(xy)`. The real span of the
    /// self-adjoint basis is the self-adjoint part of `N`, so its size is
    /// the complex dimension of `N`.
    pub fn new(tuple: &OperatorTuple) -> Self {
        let algebra = tuple.algebra().clone();
        let mut basis: Vec<HermitianOperator> = Vec::new();
        let push = |basis: &mut Vec<HermitianOperator>, x: HermitianOperator| {
            if let Some(e) = orthonormal_residual(&algebra, basis, x) {
                basis.push(e);
            }
        };
        push(&mut basis, algebra.identity());
        for b in tuple.operators() {
            push(&mut basis, b.clone());
        }
        let mut i = 0;
        while i < basis.len() {
            for j in 0..=i {
                let x = basis[i].jordan(&basis[j]);
                let y = basis[i].skew_product(&basis[j]);
                push(&mut basis, x);
                push(&mut basis, y);
            }
            i += 1;
        }
        GeneratedAlgebra { algebra, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[HermitianOperator] {
        &self.basis
    }

    /// Max-norm distance from `x` to its trace-orthogonal projection onto `N`.
    pub fn residual(&self, x: &HermitianOperator) -> f64 {
        let mut r = x.clone();
        for _ in 0..2 {
            for e in &self.basis {
                let c = self.algebra.trace_product_unchecked(e, &r);
                r.axpy(-c, e);
            }
        }
        r.max_norm()
    }

    pub fn contains(&self, x: &HermitianOperator, tol: f64) -> bool {
        self.residual(x) <= tol
    }

    /// True when every pair of basis elements commutes to `tol`.
    pub fn is_abelian(&self, tol: f64) -> bool {
        self.basis.iter().enumerate().all(|(i, x)| {
            self.basis[..i].iter().all(|y| x.commutator_norm(y) <= tol)
        })
    }
}

/// Gram–Schmidt step (twice, for stability); `None` when `x` is already in
/// the span.
fn orthonormal_residual(
    algebra: &FiniteAlgebra,
    basis: &[HermitianOperator],
    x: HermitianOperator,
) -> Option<HermitianOperator> {
    let scale = algebra.trace_product_unchecked(&x, &x).sqrt().max(1.0);
    let mut r = x;
    for _ in 0..2 {
        for e in basis {
            let c = algebra.trace_product_unchecked(e, &r);
            r.axpy(-c, e);
        }
    }
    let norm = algebra.trace_product_unchecked(&r, &r).max(0.0).sqrt();
    if norm > 1e-9 * scale {
        Some(r.scaled(1.0 / norm))
    } else {
        None
    }
}

/// Spanning set of the generated von Neumann algebra, orthonormal for `τ(xy)`.
pub fn generated_algebra_basis(tuple: &OperatorTuple) -> Vec<HermitianOperator> {
    GeneratedAlgebra::new(tuple).basis
}
