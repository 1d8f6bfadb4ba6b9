//! Clustered eigendecompositions and the spectral interval projections
//! `p⁺ = χ_(−∞,s](b_t)`, `p⁻ = χ_(−∞,s)(b_t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, FiniteAlgebra, HermitianOperator, OperatorTuple, Tolerances};
use crate::error::{Error, Result};

/// Smallest admissible `‖t‖₂`.
pub const MIN_DIRECTION_NORM: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    pub s: f64,
    pub t: Vec<f64>,
}

impl SpectralPair {
    pub fn new(s: f64, t: Vec<f64>) -> Result<Self> {
        let pair = SpectralPair { s, t };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.t_norm();
        if !(norm > MIN_DIRECTION_NORM) || !self.s.is_finite() {
            return Err(Error::ZeroDirection);
        }
        Ok(())
    }

    pub fn t_norm(&self) -> f64 {
        self.t.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// The normal `(−s, t)` of the supporting half-space.
    pub fn normal(&self) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.t.len() + 1);
        u.push(-self.s);
        u.extend_from_slice(&self.t);
        u
    }

    pub fn unit_normal(&self) -> Vec<f64> {
        let u = self.normal();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        u.into_iter().map(|v| v / norm).collect()
    }

    /// Inverse of [`SpectralPair::normal`].
    pub fn from_normal(u: &[f64]) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::DirectionLength {
                expected: 2,
                got: u.len(),
            });
        }
        SpectralPair::new(-u[0], u[1..].to_vec())
    }

    pub fn scaled(&self, mu: f64) -> SpectralPair {
        SpectralPair {
            s: self.s * mu,
            t: self.t.iter().map(|v| v * mu).collect(),
        }
    }
}

/// One eigenvalue cluster of a self-adjoint element.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    /// `τ` of the cluster projection.
    pub weight: f64,
    pub projection: HermitianOperator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumInfo {
    clusters: Vec<Cluster>,
    dims: Vec<usize>,
    norm: f64,
}

impl SpectrumInfo {
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.value).collect()
    }

    pub fn min(&self) -> f64 {
        self.clusters[0].value
    }

    pub fn max(&self) -> f64 {
        self.clusters[self.clusters.len() - 1].value
    }

    /// Operator norm of the decomposed element.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Sum of the projections of clusters `[from, to)`.
    pub fn projection_range(&self, from: usize, to: usize) -> HermitianOperator {
        let mut p = HermitianOperator::zeros(&self.dims);
        for c in &self.clusters[from..to] {
            p.axpy(1.0, &c.projection);
        }
        p
    }

    /// Cluster indices `(lo, hi)` with `lo = #{λ < s − eq_tol}` and
    /// `hi = #{λ ≤ s + eq_tol}`.
    pub fn split_indices(&self, s: f64, eq_tol: f64) -> (usize, usize) {
        let lo = self.clusters.iter().take_while(|c| c.value < s - eq_tol).count();
        let hi = self.clusters.iter().take_while(|c| c.value <= s + eq_tol).count();
        (lo, hi.max(lo))
    }

    /// `(χ_(−∞,s), χ_(−∞,s])` with the equality band `eq_tol`.
    pub fn interval(&self, s: f64, eq_tol: f64) -> OrderInterval {
        let (lo, hi) = self.split_indices(s, eq_tol);
        let lower = self.projection_range(0, lo);
        let upper = if hi == lo {
            lower.clone()
        } else {
            let mut u = lower.clone();
            u.axpy(1.0, &self.projection_range(lo, hi));
            u
        };
        OrderInterval { lower, upper }
    }

    /// True iff no cluster value lies strictly inside `(s1, s2)`.
    pub fn has_gap(&self, s1: f64, s2: f64) -> bool {
        !self.clusters.iter().any(|c| c.value > s1 && c.value < s2)
    }

    /// Reconstructs `Σ λ P_λ`.
    pub fn reconstruct(&self) -> HermitianOperator {
        let mut a = HermitianOperator::zeros(&self.dims);
        for c in &self.clusters {
            a.axpy(c.value, &c.projection);
        }
        a
    }
}

/// Eigenpairs of every block, sorted by value, as `(value, block, vector)`.
fn raw_eigen(a: &HermitianOperator) -> Result<Vec<(f64, usize, Vec<Complex64>)>> {
    let mut all = Vec::new();
    for (j, m) in a.blocks().iter().enumerate() {
        let d = m.nrows();
        if d == 1 {
            all.push((m[(0, 0)].re, j, vec![Complex64::new(1.0, 0.0)]));
            continue;
        }
        let eig = m
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(Error::EigenSolver { block: j })?;
        for k in 0..d {
            let v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
            all.push((eig.eigenvalues[k], j, v));
        }
    }
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(all)
}

/// Sorted eigenvalues of all blocks, with multiplicity.
pub fn eigenvalues(a: &HermitianOperator) -> Result<Vec<f64>> {
    let mut vals = Vec::new();
    for (j, m) in a.blocks().iter().enumerate() {
        if m.nrows() == 1 {
            vals.push(m[(0, 0)].re);
            continue;
        }
        let ev = m
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(Error::EigenSolver { block: j })?
            .eigenvalues;
        vals.extend(ev.iter().copied());
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Clustered spectral decomposition with an absolute `cluster_tol`.
///
/// Eigenvalues are chained: a value within `cluster_tol` of the previous one
/// joins its cluster. Clusters span blocks.
pub fn decompose(alg: &FiniteAlgebra, a: &HermitianOperator, cluster_tol: f64) -> Result<SpectrumInfo> {
    alg.check_conforms(a)?;
    let raw = raw_eigen(a)?;
    Ok(cluster_raw(alg, &raw, cluster_tol))
}

/// [`decompose`] with the tolerance `tol.cluster_rel · max(1, ‖a‖)`.
pub fn decompose_relative(alg: &FiniteAlgebra, a: &HermitianOperator, tol: &Tolerances) -> Result<SpectrumInfo> {
    alg.check_conforms(a)?;
    let raw = raw_eigen(a)?;
    let norm = raw.iter().map(|e| e.0.abs()).fold(0.0, f64::max);
    Ok(cluster_raw(alg, &raw, tol.cluster_rel * norm.max(1.0)))
}

fn cluster_raw(alg: &FiniteAlgebra, raw: &[(f64, usize, Vec<Complex64>)], cluster_tol: f64) -> SpectrumInfo {
    let dims = alg.dims();
    let norm = raw.iter().map(|e| e.0.abs()).fold(0.0, f64::max);

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, e) in raw.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if e.0 - raw[*g.last().unwrap()].0 <= cluster_tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    let clusters = groups
        .into_iter()
        .map(|g| {
            let value = g.iter().map(|&k| raw[k].0).sum::<f64>() / g.len() as f64;
            let mut blocks: Vec<CMatrix> = dims.iter().map(|&d| CMatrix::zeros(d, d)).collect();
            let mut weight = 0.0;
            for &k in &g {
                let (_, j, ref v) = raw[k];
                let d = v.len();
                let m = &mut blocks[j];
                for r in 0..d {
                    for c in 0..d {
                        m[(r, c)] += v[r] * v[c].conj();
                    }
                }
                weight += alg.blocks()[j].weight;
            }
            Cluster {
                value,
                multiplicity: g.len(),
                weight,
                projection: HermitianOperator::symmetrized(blocks),
            }
        })
        .collect();

    SpectrumInfo {
        clusters,
        dims,
        norm,
    }
}

/// Absolute equality band for "s is an eigenvalue of a".
pub fn eq_band(tol: &Tolerances, info: &SpectrumInfo) -> f64 {
    tol.eig_eq_rel * info.norm().max(1.0)
}

/// Projections `q⁻ ≤ q⁺` representing the face `Ψ([q⁻, q⁺])`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderInterval {
    pub lower: HermitianOperator,
    pub upper: HermitianOperator,
}

impl OrderInterval {
    pub fn new(lower: HermitianOperator, upper: HermitianOperator, tol: f64) -> Result<Self> {
        if !lower.same_shape(&upper) {
            return Err(Error::Shape("interval endpoints differ in shape".into()));
        }
        if !lower.is_projection(tol) || !upper.is_projection(tol) {
            return Err(Error::Invariant("interval endpoints must be projections".into()));
        }
        if !lower.is_below(&upper, tol) {
            return Err(Error::Invariant("interval requires q⁻ ≤ q⁺".into()));
        }
        Ok(OrderInterval { lower, upper })
    }

    pub fn whole(alg: &FiniteAlgebra) -> Self {
        OrderInterval {
            lower: alg.zero(),
            upper: alg.identity(),
        }
    }

    pub fn point(p: HermitianOperator) -> Self {
        OrderInterval {
            lower: p.clone(),
            upper: p,
        }
    }

    /// `r = q⁺ − q⁻`.
    pub fn gap(&self) -> HermitianOperator {
        self.upper.minus(&self.lower)
    }

    pub fn is_point(&self, tol: f64) -> bool {
        self.lower.max_abs_diff(&self.upper) <= tol
    }

    pub fn is_whole(&self, tol: f64) -> bool {
        self.lower.max_norm() <= tol
            && self.upper.max_abs_diff(&HermitianOperator::identity(&self.upper.dims())) <= tol
    }

    /// `self ⊇ other`, i.e. `self.lower ≤ other.lower` and `other.upper ≤ self.upper`.
    pub fn contains(&self, other: &OrderInterval, tol: f64) -> bool {
        self.lower.is_below(&other.lower, tol) && other.upper.is_below(&self.upper, tol)
    }

    pub fn approx_eq(&self, other: &OrderInterval, tol: f64) -> bool {
        self.lower.max_abs_diff(&other.lower) <= tol && self.upper.max_abs_diff(&other.upper) <= tol
    }
}

/// `(p⁻_{s,t}, p⁺_{s,t})` for the pair, using the tuple's tolerances.
pub fn interval_projections(tuple: &OperatorTuple, pair: &SpectralPair) -> Result<OrderInterval> {
    pair.validate()?;
    let bt = tuple.linear_combination(&pair.t)?;
    let info = decompose_relative(tuple.algebra(), &bt, tuple.tolerances())?;
    Ok(info.interval(pair.s, eq_band(tuple.tolerances(), &info)))
}

/// True iff no clustered eigenvalue of `a` lies in the open interval `(s1, s2)`.
pub fn eigengap_of(a: &HermitianOperator, s1: f64, s2: f64) -> Result<bool> {
    let vals = eigenvalues(a)?;
    let norm = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = Tolerances::default().cluster_rel * norm.max(1.0);
    let mut clustered: Vec<f64> = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for v in vals {
        if let Some(&last) = group.last() {
            if v - last > tol {
                clustered.push(group.iter().sum::<f64>() / group.len() as f64);
                group.clear();
            }
        }
        group.push(v);
    }
    if !group.is_empty() {
        clustered.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    Ok(!clustered.iter().any(|&v| v > s1 && v < s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn diag(alg: &FiniteAlgebra, d: &[f64]) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&alg.dims(), d).unwrap()
    }

    #[test]
    fn clusters_repeated_eigenvalue() {
        let alg = FiniteAlgebra::full_matrix(3);
        let a = diag(&alg, &[1.0, 1.0, 2.0]);
        let info = decompose(&alg, &a, 1e-9).unwrap();
        assert_eq!(info.clusters().len(), 2);
        assert_eq!(info.clusters()[0].multiplicity, 2);
        assert!((info.clusters()[0].value - 1.0).abs() < 1e-14);
        assert_eq!(info.clusters()[1].multiplicity, 1);
        assert!((info.clusters()[0].weight - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn sigma_x_eigenprojections() {
        let alg = FiniteAlgebra::full_matrix(2);
        let sx = HermitianOperator::from_real_blocks(vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])])
            .unwrap();
        let info = decompose(&alg, &sx, 1e-9).unwrap();
        assert_eq!(info.eigenvalues().len(), 2);
        assert!((info.min() + 1.0).abs() < 1e-14 && (info.max() - 1.0).abs() < 1e-14);
        let one = alg.identity();
        let p_minus = one.minus(&sx).scaled(0.5);
        let p_plus = one.plus(&sx).scaled(0.5);
        assert!(info.clusters()[0].projection.max_abs_diff(&p_minus) < 1e-12);
        assert!(info.clusters()[1].projection.max_abs_diff(&p_plus) < 1e-12);
        assert!(info.reconstruct().max_abs_diff(&sx) < 1e-12);
    }

    #[test]
    fn clusters_merge_across_blocks() {
        let alg = FiniteAlgebra::new(vec![
            crate::algebra::Block { dim: 2, weight: 0.25 },
            crate::algebra::Block { dim: 1, weight: 0.5 },
        ])
        .unwrap();
        let a = diag(&alg, &[0.0, 1.0, 1.0 + 1e-12]);
        let info = decompose(&alg, &a, 1e-9).unwrap();
        assert_eq!(info.clusters().len(), 2);
        assert!((info.clusters()[1].weight - 0.75).abs() < 1e-14);
    }

    #[test]
    fn interval_in_gap_and_at_eigenvalue() {
        let alg = FiniteAlgebra::full_matrix(2);
        let b = diag(&alg, &[0.0, 1.0]);
        let tuple = OperatorTuple::new(alg.clone(), vec![b]).unwrap();
        let lower_proj = diag(&alg, &[1.0, 0.0]);

        let iv = interval_projections(&tuple, &SpectralPair::new(0.5, vec![1.0]).unwrap()).unwrap();
        assert!(iv.lower.max_abs_diff(&lower_proj) < 1e-14);
        assert!(iv.upper.max_abs_diff(&lower_proj) < 1e-14);

        let iv = interval_projections(&tuple, &SpectralPair::new(1.0, vec![1.0]).unwrap()).unwrap();
        assert!(iv.lower.max_abs_diff(&lower_proj) < 1e-14);
        assert!(iv.upper.max_abs_diff(&alg.identity()) < 1e-14);
    }

    #[test]
    fn zero_direction_rejected() {
        assert_eq!(SpectralPair::new(0.0, vec![0.0, 0.0]), Err(Error::ZeroDirection));
        assert!(SpectralPair::new(0.0, vec![1e-13]).is_err());
    }

    #[test]
    fn gaps() {
        let alg = FiniteAlgebra::full_matrix(2);
        let b = diag(&alg, &[0.0, 1.0]);
        assert!(eigengap_of(&b, 0.1, 0.9).unwrap());
        assert!(!eigengap_of(&b, -0.5, 0.5).unwrap());
        assert!(eigengap_of(&b, 0.0, 1.0).unwrap());
    }

    #[test]
    fn pair_normal_round_trip() {
        let p = SpectralPair::new(0.3, vec![1.0, -2.0]).unwrap();
        assert_eq!(p.normal(), vec![-0.3, 1.0, -2.0]);
        assert_eq!(SpectralPair::from_normal(&p.normal()).unwrap(), p);
    }
}
