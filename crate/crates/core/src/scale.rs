//! The convex body `B = Ψ(M₁⁺)`: support values, exposed faces, direction
//! sweeps, extreme points, the dimension of its span and isotrace slices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{HermitianOperator, OperatorTuple, ScalePoint};
use crate::error::{Error, Result};
use crate::faces;
use crate::spectral::{decompose_relative, eq_band, OrderInterval, SpectralPair, SpectrumInfo};

/// The half-space `−s·x₀ + ⟨t, x⟩ ≥ α` bounding `B`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportHyperplane {
    pub pair: SpectralPair,
    pub alpha: f64,
}

impl SupportHyperplane {
    /// `⟨(−s,t), x⟩ − α`; nonnegative on `B`.
    pub fn slack(&self, x: &ScalePoint) -> f64 {
        x.dot(&self.pair.normal()) - self.alpha
    }
}

/// `τ((b_t − s)p)` evaluated through the trace.
fn shifted_trace(tuple: &OperatorTuple, bt: &HermitianOperator, s: f64, p: &HermitianOperator) -> f64 {
    let alg = tuple.algebra();
    alg.trace_product_unchecked(bt, p) - s * alg.trace_unchecked(p)
}

/// `α = τ((b_t − s)p⁺)`, the minimum of `⟨(−s,t), ·⟩` over `B`.
///
/// The value computed with `p⁻` must agree; the admissible discrepancy is
/// 1e-9 plus the contribution of eigenvalues inside the equality band
/// (those are within `eig_eq_tol` of `s`, not equal to it).
pub fn support_value(tuple: &OperatorTuple, pair: &SpectralPair) -> Result<f64> {
    Ok(support_pair(tuple, pair)?.0)
}

/// `(α⁺, α⁻)`, checked for agreement.
pub fn support_pair(tuple: &OperatorTuple, pair: &SpectralPair) -> Result<(f64, f64)> {
    pair.validate()?;
    let bt = tuple.linear_combination(&pair.t)?;
    let info = decompose_relative(tuple.algebra(), &bt, tuple.tolerances())?;
    let eq = eq_band(tuple.tolerances(), &info);
    let iv = info.interval(pair.s, eq);
    let plus = shifted_trace(tuple, &bt, pair.s, &iv.upper);
    let minus = shifted_trace(tuple, &bt, pair.s, &iv.lower);
    let (lo, hi) = info.split_indices(pair.s, eq);
    let band: f64 = info.clusters()[lo..hi]
        .iter()
        .map(|c| c.weight * (c.value - pair.s).abs())
        .sum();
    let scale = 1.0 + pair.s.abs() + info.norm();
    if (plus - minus).abs() > 1e-9 + band + 1e-13 * scale {
        return Err(Error::Invariant(format!(
            "support values disagree: τ((b_t−s)p⁺) = {plus}, τ((b_t−s)p⁻) = {minus}"
        )));
    }
    Ok((plus, minus))
}

#[derive(Clone, Debug)]
pub struct ExposedFace {
    pub hyperplane: SupportHyperplane,
    pub interval: OrderInterval,
    /// `Ψ(p⁻)`, `Ψ(p⁺)`.
    pub vertices: [ScalePoint; 2],
    pub dimension: usize,
}

impl ExposedFace {
    pub fn is_point(&self) -> bool {
        self.dimension == 0
    }
}

/// The face `Ψ([p⁻_{s,t}, p⁺_{s,t}]) = B ∩ {−s·x₀ + ⟨t,x⟩ = α}`.
pub fn exposed_face(tuple: &OperatorTuple, pair: &SpectralPair) -> Result<ExposedFace> {
    pair.validate()?;
    let bt = tuple.linear_combination(&pair.t)?;
    let info = decompose_relative(tuple.algebra(), &bt, tuple.tolerances())?;
    let interval = info.interval(pair.s, eq_band(tuple.tolerances(), &info));
    let alpha = support_value(tuple, pair)?;
    let dimension = faces::face_dimension(tuple, &interval)?;
    let vertices = [
        tuple.psi_unchecked(&interval.lower),
        tuple.psi_unchecked(&interval.upper),
    ];
    Ok(ExposedFace {
        hyperplane: SupportHyperplane {
            pair: pair.clone(),
            alpha,
        },
        interval,
        vertices,
        dimension,
    })
}

/// Directions `t` for sweeps: the axes `±e_i`, `count` low-discrepancy unit
/// vectors, then any extra directions. For `n = 1` only `±1` exist.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSampling {
    pub count: usize,
    pub extra: Vec<Vec<f64>>,
}

impl Default for DirectionSampling {
    fn default() -> Self {
        DirectionSampling {
            count: 256,
            extra: Vec::new(),
        }
    }
}

impl DirectionSampling {
    pub fn with_count(count: usize) -> Self {
        DirectionSampling {
            count,
            extra: Vec::new(),
        }
    }

    pub fn directions(&self, n: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = sign;
                out.push(e);
            }
        }
        if n >= 2 {
            out.extend(low_discrepancy_sphere(n, self.count));
        }
        for t in &self.extra {
            let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            if t.len() == n && norm > crate::spectral::MIN_DIRECTION_NORM {
                out.push(t.iter().map(|v| v / norm).collect());
            }
        }
        out
    }
}

/// Prefix-stable quasi-random points on `S^{n−1}`: the first `k` points of a
/// request for `m ≥ k` points are the same.
pub fn low_discrepancy_sphere(n: usize, count: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        return (0..count)
            .map(|k| {
                let th = 2.0 * PI * ((k as f64 + 0.5) * golden).fract();
                vec![th.cos(), th.sin()]
            })
            .collect();
    }
    // R-sequence in [0,1)^{2m}, Box–Muller per coordinate pair
    let m = n.div_ceil(2);
    let dim = 2 * m;
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=dim).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
    (0..count)
        .map(|k| {
            let mut g = Vec::with_capacity(dim);
            for p in 0..m {
                let u1 = (0.5 + (k as f64 + 1.0) * alpha[2 * p]).fract().max(1e-12);
                let u2 = (0.5 + (k as f64 + 1.0) * alpha[2 * p + 1]).fract();
                let r = (-2.0 * u1.ln()).sqrt();
                g.push(r * (2.0 * PI * u2).cos());
                g.push(r * (2.0 * PI * u2).sin());
            }
            g.truncate(n);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            g.into_iter().map(|v| v / norm).collect()
        })
        .collect()
}

/// Everything needed to sweep `s` for one direction `t`.
#[derive(Clone, Debug)]
pub struct TSweep {
    pub t: Vec<f64>,
    pub info: SpectrumInfo,
    pub eq_tol: f64,
    /// `prefix[i]` is the sum of the `i` lowest cluster projections.
    pub prefix: Vec<HermitianOperator>,
    /// `Ψ(prefix[i])`.
    pub prefix_points: Vec<ScalePoint>,
}

impl TSweep {
    pub fn new(tuple: &OperatorTuple, t: Vec<f64>) -> Result<Self> {
        let bt = tuple.linear_combination(&t)?;
        let info = decompose_relative(tuple.algebra(), &bt, tuple.tolerances())?;
        let eq_tol = eq_band(tuple.tolerances(), &info);
        let mut prefix = Vec::with_capacity(info.clusters().len() + 1);
        let mut acc = tuple.algebra().zero();
        prefix.push(acc.clone());
        for c in info.clusters() {
            acc.axpy(1.0, &c.projection);
            prefix.push(acc.clone());
        }
        let prefix_points = prefix.iter().map(|p| tuple.psi_unchecked(p)).collect();
        Ok(TSweep {
            t,
            info,
            eq_tol,
            prefix,
            prefix_points,
        })
    }

    /// The `s` values of the sweep: one below the spectrum, every cluster,
    /// every gap midpoint, one above.
    pub fn s_values(&self) -> Vec<f64> {
        let ev = self.info.eigenvalues();
        let mut s = Vec::with_capacity(2 * ev.len() + 1);
        s.push(ev[0] - 1.0);
        for (i, &v) in ev.iter().enumerate() {
            s.push(v);
            if i + 1 < ev.len() {
                s.push(0.5 * (v + ev[i + 1]));
            }
        }
        s.push(ev[ev.len() - 1] + 1.0);
        s
    }

    /// Prefix indices `(lo, hi)` with `p⁻ = prefix[lo]`, `p⁺ = prefix[hi]`.
    pub fn split(&self, s: f64) -> (usize, usize) {
        self.info.split_indices(s, self.eq_tol)
    }

    /// `α = Σ_{λ ≤ s} w_λ (λ − s)` from the clusters.
    pub fn alpha(&self, s: f64) -> f64 {
        let (_, hi) = self.split(s);
        self.info.clusters()[..hi]
            .iter()
            .map(|c| c.weight * (c.value - s))
            .sum()
    }
}

/// Spectral data for every sampled direction.
#[derive(Clone, Debug)]
pub struct SweepTable {
    pub sweeps: Vec<TSweep>,
}

impl SweepTable {
    pub fn build(tuple: &OperatorTuple, sampling: &DirectionSampling) -> Result<Self> {
        let dirs = sampling.directions(tuple.n());
        let sweeps = dirs
            .into_par_iter()
            .map(|t| TSweep::new(tuple, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepTable { sweeps })
    }

    /// Every sampled spectral pair.
    pub fn pairs(&self) -> Vec<SpectralPair> {
        self.sweeps
            .iter()
            .flat_map(|sw| {
                sw.s_values().into_iter().map(move |s| SpectralPair {
                    s,
                    t: sw.t.clone(),
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ExtremePoint {
    pub point: ScalePoint,
    pub projection: HermitianOperator,
}

#[derive(Clone, Debug)]
pub struct ExtremeCloud {
    pub points: Vec<ExtremePoint>,
    /// Number of `Ψ(p^±)` emitted before deduplication.
    pub raw_count: usize,
    pub directions: usize,
}

impl ExtremeCloud {
    pub fn from_table(tuple: &OperatorTuple, table: &SweepTable) -> Self {
        let tol = tuple.tolerances();
        let mut raw: Vec<(&ScalePoint, &HermitianOperator)> = table
            .sweeps
            .iter()
            .flat_map(|sw| sw.prefix_points.iter().zip(&sw.prefix))
            .collect();
        let raw_count = raw.len();
        raw.sort_by(|a, b| {
            a.0.coords()
                .iter()
                .zip(b.0.coords())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut kept: Vec<ExtremePoint> = Vec::new();
        for (x, p) in raw {
            let dup = kept
                .iter()
                .rev()
                .take_while(|k| x[0] - k.point[0] <= tol.point_dedup)
                .any(|k| k.point.distance(x) <= tol.point_dedup && k.projection.max_abs_diff(p) <= tol.projection_dedup);
            if !dup {
                kept.push(ExtremePoint {
                    point: x.clone(),
                    projection: p.clone(),
                });
            }
        }
        ExtremeCloud {
            points: kept,
            raw_count,
            directions: table.sweeps.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scale_points(&self) -> Vec<ScalePoint> {
        self.points.iter().map(|e| e.point.clone()).collect()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.max(a.point.distance(&b.point));
            }
        }
        d
    }
}

/// `Ψ(p^±_{s,t})` over the sweep of every sampled `t`, deduplicated.
pub fn extreme_point_cloud(tuple: &OperatorTuple, sampling: &DirectionSampling) -> Result<ExtremeCloud> {
    let table = SweepTable::build(tuple, sampling)?;
    Ok(ExtremeCloud::from_table(tuple, &table))
}

/// An affine relation `b_t = s·1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineRelation {
    pub t: Vec<f64>,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleDimension {
    /// `dim span(B)`.
    pub dimension: usize,
    pub relations: Vec<AffineRelation>,
}

/// Null space of the centered Gram matrix `τ((b_i − τ(b_i))(b_j − τ(b_j)))`.
///
/// Relations are returned in reduced echelon form: the last nonzero
/// coordinate of each `t` is 1 and no other relation uses it.
pub fn scale_dimension(tuple: &OperatorTuple) -> Result<ScaleDimension> {
    let alg = tuple.algebra();
    let n = tuple.n();
    let one = alg.identity();
    let centered: Vec<HermitianOperator> = tuple
        .operators()
        .iter()
        .map(|b| {
            let mut c = b.clone();
            c.axpy(-alg.trace_unchecked(b), &one);
            c
        })
        .collect();
    let gram = DMatrix::from_fn(n, n, |i, j| alg.trace_product_unchecked(&centered[i], &centered[j]));
    let scale = tuple.operators().iter().map(|b| b.max_norm()).fold(1.0, f64::max);
    let eig = SymmetricEigen::new(gram);
    let mut null: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        if eig.eigenvalues[k].abs() <= 1e-14 * scale * scale {
            null.push(eig.eigenvectors.column(k).iter().copied().collect());
        }
    }
    let relations: Vec<AffineRelation> = echelon_from_right(null)
        .into_iter()
        .filter_map(|t| {
            let bt = tuple.linear_combination(&t).ok()?;
            let s = alg.trace_unchecked(&bt);
            let mut r = bt;
            r.axpy(-s, &one);
            (r.max_norm() <= 1e-8).then_some(AffineRelation { t, s })
        })
        .collect();
    Ok(ScaleDimension {
        dimension: n + 1 - relations.len(),
        relations,
    })
}

/// Gauss–Jordan on the rows, pivoting from the last column.
fn echelon_from_right(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let m = rows.len();
    if m == 0 {
        return rows;
    }
    let n = rows[0].len();
    let mut r = 0;
    for col in (0..n).rev() {
        if r == m {
            break;
        }
        let piv = (r..m)
            .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
            .unwrap();
        if rows[piv][col].abs() < 1e-10 {
            continue;
        }
        rows.swap(r, piv);
        let p = rows[r][col];
        for v in rows[r].iter_mut() {
            *v /= p;
        }
        for i in 0..m {
            if i != r {
                let f = rows[i][col];
                if f != 0.0 {
                    for k in 0..n {
                        rows[i][k] -= f * rows[r][k];
                    }
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    for row in rows.iter_mut() {
        for v in row.iter_mut() {
            if v.abs() < 1e-14 {
                *v = 0.0;
            }
        }
    }
    rows
}

/// `{(x₁..x_n) : (level, x₁..x_n) ∈ B}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsotraceSlice {
    pub level: f64,
    /// Boundary polygon in angular order for `n = 2`, the two endpoints for
    /// `n = 1`, sampled boundary points otherwise.
    pub points: Vec<Vec<f64>>,
}

/// Maximizer of `τ(b_u a)` over `0 ≤ a ≤ 1`, `τ(a) = level`: fill the
/// eigenprojections of `b_u` from the top, with a fraction of the marginal
/// cluster. Returns `(τ(b_1 a), …, τ(b_n a))`.
fn water_fill(tuple: &OperatorTuple, u: &[f64], level: f64) -> Result<Vec<f64>> {
    let bu = tuple.linear_combination(u)?;
    let info = decompose_relative(tuple.algebra(), &bu, tuple.tolerances())?;
    let mut remaining = level;
    let mut x = vec![0.0; tuple.n()];
    for c in info.clusters().iter().rev() {
        if remaining <= 0.0 {
            break;
        }
        let f = if c.weight <= remaining { 1.0 } else { remaining / c.weight };
        remaining -= f * c.weight;
        let img = tuple.psi_unchecked(&c.projection);
        for (xi, yi) in x.iter_mut().zip(&img.coords()[1..]) {
            *xi += f * yi;
        }
    }
    Ok(x)
}

pub fn isotrace_slice(tuple: &OperatorTuple, level: f64, resolution: usize) -> Result<IsotraceSlice> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::LevelOutOfRange(level));
    }
    let n = tuple.n();
    if level == 0.0 {
        return Ok(IsotraceSlice {
            level,
            points: vec![vec![0.0; n]],
        });
    }
    if level == 1.0 {
        let alg = tuple.algebra();
        return Ok(IsotraceSlice {
            level,
            points: vec![tuple.operators().iter().map(|b| alg.trace_unchecked(b)).collect()],
        });
    }
    let dirs: Vec<Vec<f64>> = match n {
        1 => vec![vec![-1.0], vec![1.0]],
        2 => (0..resolution.max(3))
            .map(|k| {
                let th = 2.0 * PI * k as f64 / resolution.max(3) as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => DirectionSampling::with_count(resolution).directions(n),
    };
    let raw = dirs
        .par_iter()
        .map(|u| water_fill(tuple, u, level))
        .collect::<Result<Vec<_>>>()?;
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for p in raw {
        let dup = |q: &Vec<f64>| q.iter().zip(&p).all(|(a, b)| (a - b).abs() <= 1e-12);
        let is_dup = if n == 2 {
            points.last().is_some_and(dup) || points.first().is_some_and(dup)
        } else {
            points.iter().any(dup)
        };
        if !is_dup {
            points.push(p);
        }
    }
    Ok(IsotraceSlice { level, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn support_of_zero_tuple() {
        let t = fixtures::zeros(2, 1);
        let a = support_value(&t, &SpectralPair::new(1.0, vec![1.0]).unwrap()).unwrap();
        assert!((a + 1.0).abs() < 1e-15);
    }

    #[test]
    fn support_harmonic_between_eigenvalues() {
        let t = fixtures::harmonic();
        let a = support_value(&t, &SpectralPair::new(0.6, vec![1.0]).unwrap()).unwrap();
        let norm = 1.0 - 0.5f64.powi(8);
        let expect: f64 = (2..=8).map(|k| 0.5f64.powi(k) / norm * (1.0 / k as f64 - 0.6)).sum();
        assert!((a - expect).abs() < 1e-15);
    }

    #[test]
    fn support_pauli_axis() {
        let t = fixtures::pauli();
        let a = support_value(&t, &SpectralPair::new(0.0, vec![1.0, 0.0]).unwrap()).unwrap();
        assert!((a + 0.5).abs() < 1e-14);
    }

    #[test]
    fn exposed_faces_of_small_fixtures() {
        let t = fixtures::diag01();
        let f = exposed_face(&t, &SpectralPair::new(0.5, vec![1.0]).unwrap()).unwrap();
        assert_eq!(f.dimension, 0);
        assert!(f.vertices[0].distance(&ScalePoint(vec![0.5, 0.0])) < 1e-15);

        let t = fixtures::harmonic();
        let f = exposed_face(&t, &SpectralPair::new(1.0 / 3.0, vec![1.0]).unwrap()).unwrap();
        assert_eq!(f.dimension, 1);

        let t = fixtures::pauli();
        let f = exposed_face(&t, &SpectralPair::new(-1.0, vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(f.dimension, 1);
        assert!(f.vertices[0].distance(&ScalePoint(vec![0.0, 0.0, 0.0])) < 1e-15);
        assert!(f.vertices[1].distance(&ScalePoint(vec![0.5, -0.5, 0.0])) < 1e-14);
        for v in &f.vertices {
            assert!(f.hyperplane.slack(v).abs() < 1e-12);
        }
    }

    #[test]
    fn diag01_cloud_has_four_points() {
        let t = fixtures::diag01();
        let c = extreme_point_cloud(&t, &DirectionSampling::default()).unwrap();
        let mut pts: Vec<Vec<f64>> = c.scale_points().into_iter().map(|p| p.0).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.5, 0.5], vec![1.0, 0.5]]);
    }

    #[test]
    fn zero_tuple_cloud() {
        let t = fixtures::zeros(3, 2);
        let c = extreme_point_cloud(&t, &DirectionSampling::with_count(16)).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn dimension_and_relations() {
        let d = scale_dimension(&fixtures::pauli()).unwrap();
        assert_eq!(d.dimension, 3);
        assert!(d.relations.is_empty());

        let p = fixtures::pauli();
        let alg = p.algebra().clone();
        let b1 = p.operator(0).clone();
        let t = OperatorTuple::new(alg.clone(), vec![b1.clone(), alg.identity()]).unwrap();
        let d = scale_dimension(&t).unwrap();
        assert_eq!(d.dimension, 2);
        assert_eq!(d.relations.len(), 1);
        assert!(d.relations[0].t[0].abs() < 1e-12 && (d.relations[0].t[1] - 1.0).abs() < 1e-12);
        assert!((d.relations[0].s - 1.0).abs() < 1e-12);

        let b2 = b1.scaled(2.0).plus(&alg.identity().scaled(3.0));
        let t = OperatorTuple::new(alg, vec![b1, b2]).unwrap();
        let d = scale_dimension(&t).unwrap();
        assert_eq!(d.relations.len(), 1);
        assert!((d.relations[0].t[0] + 2.0).abs() < 1e-10);
        assert!((d.relations[0].t[1] - 1.0).abs() < 1e-12);
        assert!((d.relations[0].s - 3.0).abs() < 1e-10);
    }

    #[test]
    fn slices_at_end_levels_and_pauli_disk() {
        let t = fixtures::pauli();
        assert_eq!(isotrace_slice(&t, 0.0, 10).unwrap().points, vec![vec![0.0, 0.0]]);
        assert_eq!(isotrace_slice(&t, 1.0, 10).unwrap().points, vec![vec![0.0, 0.0]]);
        let s = isotrace_slice(&t, 0.5, 720).unwrap();
        assert_eq!(s.points.len(), 720);
        for p in &s.points {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 0.5).abs() < 1e-12);
        }
        assert!(matches!(isotrace_slice(&t, 1.5, 10), Err(Error::LevelOutOfRange(_))));
    }

    #[test]
    fn sphere_sequence_is_prefix_stable_and_unit() {
        for n in [2, 3, 4, 5] {
            let a = low_discrepancy_sphere(n, 10);
            let b = low_discrepancy_sphere(n, 20);
            assert_eq!(a[..], b[..10]);
            for v in &b {
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }
}
