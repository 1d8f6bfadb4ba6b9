//! Faces of the scale as order intervals `[q⁻, q⁺]`: cut-downs, facial
//! complexes, face dimension, normal cones, sharpness and minimal exposed
//! chains.

use nalgebra::{DMatrix, SVD};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Block, CMatrix, FiniteAlgebra, GeneratedAlgebra, HermitianOperator, OperatorTuple, ScalePoint};
use crate::error::{Error, Result};
use crate::scale::{exposed_face, scale_dimension, DirectionSampling, ExposedFace, SweepTable};
use crate::spectral::{interval_projections, OrderInterval, SpectralPair};

/// Smallest `τ(r)` for which a cut-down is formed.
pub const MIN_CUT_TRACE: f64 = 1e-10;

/// Orthonormal basis (columns) of the range of a projection block.
fn range_isometry(p: &CMatrix, block: usize) -> Result<CMatrix> {
    let d = p.nrows();
    if d == 1 {
        return Ok(if p[(0, 0)].re > 0.5 {
            CMatrix::identity(1, 1)
        } else {
            CMatrix::zeros(1, 0)
        });
    }
    let eig = p
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(Error::EigenSolver { block })?;
    let cols: Vec<usize> = (0..d).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
    Ok(CMatrix::from_fn(d, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])]))
}

/// Spectrum of `p a p` on the range of the projection `p`.
pub fn compressed_spectrum(a: &HermitianOperator, p: &HermitianOperator) -> Result<Vec<f64>> {
    let mut vals = Vec::new();
    for (j, (aj, pj)) in a.blocks().iter().zip(p.blocks()).enumerate() {
        let v = range_isometry(pj, j)?;
        if v.ncols() == 0 {
            continue;
        }
        let c = v.adjoint() * aj * &v;
        let c = (&c + c.adjoint()).scale(0.5);
        if c.nrows() == 1 {
            vals.push(c[(0, 0)].re);
        } else {
            let ev = c
                .try_symmetric_eigen(f64::EPSILON, 10_000)
                .map(|e| e.eigenvalues)
                .ok_or(Error::EigenSolver { block: j })?;
            vals.extend(ev.iter().copied());
        }
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// The compression of the tuple to `r = q⁺ − q⁻`, with `τ_r = τ/τ(r)`.
///
/// `F = Ψ([q⁻, q⁺])` equals `Ψ(q⁻) + τ(r)·B_F` where `B_F` is the scale of
/// the compressed tuple.
#[derive(Clone, Debug)]
pub struct CutDown {
    pub interval: OrderInterval,
    pub r: HermitianOperator,
    /// `τ(r)`.
    pub tau_r: f64,
    /// The compressed tuple over `M_r`, one summand per block meeting `r`.
    pub tuple: OperatorTuple,
    /// `Ψ(q⁻)`.
    pub base_point: ScalePoint,
    isometries: Vec<CMatrix>,
    block_map: Vec<usize>,
    dims: Vec<usize>,
}

impl CutDown {
    /// `V* x V` blockwise, dropping blocks that miss `r`.
    pub fn compress(&self, x: &HermitianOperator) -> HermitianOperator {
        compress_with(&self.isometries, &self.block_map, x)
    }

    /// `V x V*`, extended by zero.
    pub fn embed(&self, x: &HermitianOperator) -> HermitianOperator {
        let mut blocks: Vec<CMatrix> = self.dims.iter().map(|&d| CMatrix::zeros(d, d)).collect();
        for (k, &j) in self.block_map.iter().enumerate() {
            let v = &self.isometries[j];
            blocks[j] = v * &x.blocks()[k] * v.adjoint();
        }
        HermitianOperator::symmetrized(blocks)
    }

    /// `Ψ(q⁻) + τ(r)·Ψ_r(x)`.
    pub fn reconstruct(&self, x: &HermitianOperator) -> ScalePoint {
        let inner = self.tuple.psi_unchecked(x);
        self.base_point.plus(&inner.scaled(self.tau_r))
    }

    /// A sub-interval of `[q⁻, q⁺]` in compressed coordinates.
    pub fn transport_in(&self, iv: &OrderInterval) -> OrderInterval {
        OrderInterval {
            lower: self.compress(&iv.lower.minus(&self.interval.lower)),
            upper: self.compress(&iv.upper.minus(&self.interval.lower)),
        }
    }

    /// Inverse of [`CutDown::transport_in`].
    pub fn transport_out(&self, iv: &OrderInterval) -> OrderInterval {
        OrderInterval {
            lower: self.interval.lower.plus(&self.embed(&iv.lower)),
            upper: self.interval.lower.plus(&self.embed(&iv.upper)),
        }
    }
}

fn compress_with(isometries: &[CMatrix], block_map: &[usize], x: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::symmetrized(
        block_map
            .iter()
            .map(|&j| {
                let v = &isometries[j];
                v.adjoint() * &x.blocks()[j] * v
            })
            .collect(),
    )
}

pub fn cut_down(tuple: &OperatorTuple, interval: &OrderInterval) -> Result<CutDown> {
    let alg = tuple.algebra();
    alg.check_conforms(&interval.lower)?;
    alg.check_conforms(&interval.upper)?;
    let r = interval.gap();
    let isometries = r
        .blocks()
        .iter()
        .enumerate()
        .map(|(j, m)| range_isometry(m, j))
        .collect::<Result<Vec<_>>>()?;
    let tau_r: f64 = alg
        .blocks()
        .iter()
        .zip(&isometries)
        .map(|(b, v)| b.weight * v.ncols() as f64)
        .sum();
    if tau_r <= MIN_CUT_TRACE {
        return Err(Error::DegenerateFace);
    }
    let block_map: Vec<usize> = (0..isometries.len()).filter(|&j| isometries[j].ncols() > 0).collect();
    let blocks: Vec<Block> = block_map
        .iter()
        .map(|&j| Block {
            dim: isometries[j].ncols(),
            weight: alg.blocks()[j].weight / tau_r,
        })
        .collect();
    let sub_alg = FiniteAlgebra::new(blocks)?;
    let ops = tuple
        .operators()
        .iter()
        .map(|b| compress_with(&isometries, &block_map, b))
        .collect();
    Ok(CutDown {
        interval: interval.clone(),
        r,
        tau_r,
        tuple: OperatorTuple::new(sub_alg, ops)?.with_tolerances(*tuple.tolerances()),
        base_point: tuple.psi_unchecked(&interval.lower),
        isometries,
        block_map,
        dims: alg.dims(),
    })
}

/// One level of a facial complex.
#[derive(Clone, Debug)]
pub struct ComplexLevel {
    pub pair: SpectralPair,
    /// `r_{i−1} b_{t_i} r_{i−1}` (the operator itself at level 1).
    pub cut_op: HermitianOperator,
    /// The (cut-down) interval projections `q^±_i`, in `M`.
    pub q: OrderInterval,
    /// `r_i = q⁺_i − q⁻_i`.
    pub r: HermitianOperator,
    /// The face `[Q⁻_i, Q⁺_i]` after this level.
    pub face: OrderInterval,
}

#[derive(Clone, Debug)]
pub struct FacialComplex {
    pub levels: Vec<ComplexLevel>,
    /// Level at which `r_i = 0` stopped the construction, if any.
    pub terminated_at: Option<usize>,
}

impl FacialComplex {
    pub fn pairs(&self) -> Vec<SpectralPair> {
        self.levels.iter().map(|l| l.pair.clone()).collect()
    }

    pub fn r_chain(&self) -> Vec<HermitianOperator> {
        self.levels.iter().map(|l| l.r.clone()).collect()
    }
}

/// Inductive construction: level 1 takes `p^±` of `(s₁, t₁)`; level `i`
/// takes the interval projections of `r_{i−1} b_{t_i} r_{i−1}` inside
/// `M_{r_{i−1}}`.
pub fn build_facial_complex(tuple: &OperatorTuple, pairs: &[SpectralPair]) -> Result<FacialComplex> {
    let first = pairs.first().ok_or(Error::EmptyComplex)?;
    for p in pairs {
        p.validate()?;
    }
    let tol = tuple.tolerances().order;
    let iv = interval_projections(tuple, first)?;
    let mut levels = vec![ComplexLevel {
        pair: first.clone(),
        cut_op: tuple.linear_combination(&first.t)?,
        r: iv.gap(),
        face: iv.clone(),
        q: iv,
    }];
    let mut terminated_at = None;
    for (i, pair) in pairs.iter().enumerate().skip(1) {
        let prev = levels.last().unwrap();
        if prev.face.is_point(tol) {
            terminated_at = Some(i);
            break;
        }
        let cd = cut_down(tuple, &prev.face)?;
        let local = interval_projections(&cd.tuple, pair)?;
        let q = OrderInterval {
            lower: cd.embed(&local.lower),
            upper: cd.embed(&local.upper),
        };
        let face = cd.transport_out(&local);
        let cut_op = cd.embed(&cd.tuple.linear_combination(&pair.t)?);
        levels.push(ComplexLevel {
            pair: pair.clone(),
            cut_op,
            r: q.gap(),
            q,
            face,
        });
    }
    Ok(FacialComplex { levels, terminated_at })
}

/// A face `Ψ([q⁻, q⁺])`, optionally with the complex that produced it.
#[derive(Clone, Debug)]
pub struct FaceHandle {
    pub interval: OrderInterval,
    pub complex: Option<FacialComplex>,
}

impl FaceHandle {
    pub fn new(interval: OrderInterval) -> Self {
        FaceHandle { interval, complex: None }
    }

    /// Both projections lie in the generated algebra.
    pub fn in_generated_algebra(&self, n: &GeneratedAlgebra, tol: f64) -> bool {
        n.contains(&self.interval.lower, tol) && n.contains(&self.interval.upper, tol)
    }

    pub fn vertices(&self, tuple: &OperatorTuple) -> [ScalePoint; 2] {
        [tuple.psi_unchecked(&self.interval.lower), tuple.psi_unchecked(&self.interval.upper)]
    }
}

/// `q⁻ = p⁻₁ + Σ_{j≥2} q⁻_j`, `q⁺ = q⁻ + (q⁺_k − q⁻_k)`.
pub fn face_from_complex(tuple: &OperatorTuple, complex: &FacialComplex) -> Result<FaceHandle> {
    let first = complex.levels.first().ok_or(Error::EmptyComplex)?;
    let mut lower = first.q.lower.clone();
    for l in &complex.levels[1..] {
        lower.axpy(1.0, &l.q.lower);
    }
    let upper = lower.plus(&complex.levels.last().unwrap().r);
    let tol = tuple.tolerances().order;
    if !lower.is_below(&upper, tol) {
        return Err(Error::Invariant("face from complex violates q⁻ ≤ q⁺".into()));
    }
    Ok(FaceHandle {
        interval: OrderInterval { lower, upper },
        complex: Some(complex.clone()),
    })
}

/// `dim F`: 0 for a point, otherwise the span dimension of the cut-down scale.
pub fn face_dimension(tuple: &OperatorTuple, interval: &OrderInterval) -> Result<usize> {
    if interval.is_point(tuple.tolerances().order) {
        return Ok(0);
    }
    match cut_down(tuple, interval) {
        Ok(cd) => Ok(scale_dimension(&cd.tuple)?.dimension),
        Err(Error::DegenerateFace) => Ok(0),
        Err(e) => Err(e),
    }
}

/// Members `(−s, t)` of the normal cone found among the candidates.
#[derive(Clone, Debug, Serialize)]
pub struct NormalConeSample {
    pub members: Vec<SpectralPair>,
    /// Unit normals `(−s, t)/‖(−s, t)‖`, one per member.
    pub units: Vec<Vec<f64>>,
    /// Rank of the members: a lower bound for the degree.
    pub degree: usize,
    /// The rank reached `n + 1 − dim F`, the largest value allowed.
    pub exact: bool,
    pub face_dimension: usize,
}

/// `(−s,t) ∈ K_F` iff `p⁻_{s,t} ≤ q⁻` and `q⁺ ≤ p⁺_{s,t}`.
pub fn is_normal(p: &OrderInterval, face: &OrderInterval, tol: f64) -> bool {
    p.lower.is_below(&face.lower, tol) && face.upper.is_below(&p.upper, tol)
}

pub fn member_rank(units: &[Vec<f64>]) -> usize {
    if units.is_empty() {
        return 0;
    }
    let cols = units[0].len();
    let m = DMatrix::from_fn(units.len(), cols, |i, j| units[i][j]);
    let sv = SVD::new(m, false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&v| v > 1e-8 * top.max(1e-300)).count()
}

fn relation_pairs(tuple: &OperatorTuple) -> Result<Vec<SpectralPair>> {
    let dim = scale_dimension(tuple)?;
    let mut out = Vec::new();
    for r in dim.relations {
        out.push(SpectralPair { s: r.s, t: r.t.clone() });
        out.push(SpectralPair {
            s: -r.s,
            t: r.t.iter().map(|v| -v).collect(),
        });
    }
    Ok(out)
}

/// Samples `K_F` over every `(s, t)` of the sweep table, the directions
/// `±(−s, t)` of affine relations `b_t = s·1`, and any extra pairs.
pub fn normal_cone(tuple: &OperatorTuple, interval: &OrderInterval, table: &SweepTable) -> Result<NormalConeSample> {
    normal_cone_with(tuple, interval, table, &[])
}

pub fn normal_cone_with(
    tuple: &OperatorTuple,
    interval: &OrderInterval,
    table: &SweepTable,
    extra: &[SpectralPair],
) -> Result<NormalConeSample> {
    let tol = tuple.tolerances().order;
    if interval.is_whole(tol) {
        return Err(Error::NotProperFace);
    }
    let mut members: Vec<SpectralPair> = table
        .sweeps
        .par_iter()
        .flat_map_iter(|sw| {
            sw.s_values()
                .into_iter()
                .filter(|&s| {
                    let (lo, hi) = sw.split(s);
                    sw.prefix[lo].is_below(&interval.lower, tol) && interval.upper.is_below(&sw.prefix[hi], tol)
                })
                .map(|s| SpectralPair { s, t: sw.t.clone() })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut more = relation_pairs(tuple)?;
    more.extend_from_slice(extra);
    for pair in more {
        let p = interval_projections(tuple, &pair)?;
        if is_normal(&p, interval, tol) {
            members.push(pair);
        }
    }
    let units: Vec<Vec<f64>> = members.iter().map(|p| p.unit_normal()).collect();
    let degree = member_rank(&units);
    let dimension = face_dimension(tuple, interval)?;
    Ok(NormalConeSample {
        members,
        units,
        degree,
        exact: degree + dimension == tuple.n() + 1,
        face_dimension: dimension,
    })
}

/// Contained in at least two independent supporting hyperplanes.
pub fn is_sharp(tuple: &OperatorTuple, interval: &OrderInterval, sampling: &DirectionSampling) -> Result<bool> {
    let table = SweepTable::build(tuple, sampling)?;
    Ok(normal_cone(tuple, interval, &table)?.degree >= 2)
}

/// Measured block form of `b_t` relative to `[q⁻, q⁺]` for a normal `(−s,t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockForm {
    /// `max σ(q⁻ b_t q⁻) − s` on the range of `q⁻` (≤ 0 expected).
    pub below: f64,
    /// `‖r b_t r − s·r‖_max` for `r = q⁺ − q⁻`.
    pub middle: f64,
    /// `s − min σ((1−q⁺) b_t (1−q⁺))` on the range of `1 − q⁺` (≤ 0 expected).
    pub above: f64,
    /// `max ‖[b_t, q^±]‖_max`.
    pub commutator: f64,
}

impl BlockForm {
    pub fn holds(&self, tol: f64) -> bool {
        self.below <= tol && self.middle <= tol && self.above <= tol && self.commutator <= tol
    }
}

pub fn block_form(tuple: &OperatorTuple, interval: &OrderInterval, pair: &SpectralPair) -> Result<BlockForm> {
    let bt = tuple.linear_combination(&pair.t)?;
    let one = tuple.algebra().identity();
    let below = compressed_spectrum(&bt, &interval.lower)?
        .last()
        .map_or(f64::NEG_INFINITY, |v| v - pair.s);
    let r = interval.gap();
    let middle = r.sandwich(&bt).max_abs_diff(&r.scaled(pair.s));
    let above = compressed_spectrum(&bt, &one.minus(&interval.upper))?
        .first()
        .map_or(f64::NEG_INFINITY, |v| pair.s - v);
    let commutator = bt.commutator_norm(&interval.lower).max(bt.commutator_norm(&interval.upper));
    Ok(BlockForm {
        below,
        middle,
        above,
        commutator,
    })
}

/// Positive weights for combining normals: scheme 0 is uniform, later
/// schemes are deterministic perturbations.
fn combination_weights(count: usize, scheme: usize) -> Vec<f64> {
    if scheme == 0 {
        return vec![1.0; count];
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    (0..count)
        .map(|k| 0.25 + ((k as f64 + 1.0) * golden * scheme as f64).fract())
        .collect()
}

/// The exposed face cut out by the weighted sum of the sampled normals.
pub fn minimal_exposed_face_from(
    tuple: &OperatorTuple,
    interval: &OrderInterval,
    cone: &NormalConeSample,
    scheme: usize,
) -> Result<ExposedFace> {
    if cone.units.is_empty() {
        return Err(Error::Invariant("no supporting normal found for the face".into()));
    }
    let w = combination_weights(cone.units.len(), scheme);
    let mut u = vec![0.0; tuple.n() + 1];
    for (wk, uk) in w.iter().zip(&cone.units) {
        for (a, b) in u.iter_mut().zip(uk) {
            *a += wk * b;
        }
    }
    let total: f64 = w.iter().sum();
    let t_norm = u[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    if t_norm <= 1e-9 * total {
        return Err(Error::PureTraceNormal);
    }
    let scale = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    let pair = SpectralPair::new(-u[0] / scale, u[1..].iter().map(|v| v / scale).collect())?;
    let face = exposed_face(tuple, &pair)?;
    if !face.interval.contains(interval, tuple.tolerances().order) {
        return Err(Error::Invariant("minimal exposed face does not contain the input face".into()));
    }
    Ok(face)
}

/// Smallest exposed face containing `Ψ([q⁻, q⁺])`.
pub fn minimal_exposed_face(
    tuple: &OperatorTuple,
    interval: &OrderInterval,
    sampling: &DirectionSampling,
) -> Result<ExposedFace> {
    let table = SweepTable::build(tuple, sampling)?;
    let cone = normal_cone(tuple, interval, &table)?;
    minimal_exposed_face_from(tuple, interval, &cone, 0)
}

const WEIGHT_SCHEMES: usize = 6;

fn minimal_exposed_face_retrying(
    tuple: &OperatorTuple,
    interval: &OrderInterval,
    cone: &NormalConeSample,
) -> Result<ExposedFace> {
    let mut last = Error::PureTraceNormal;
    for scheme in 0..WEIGHT_SCHEMES {
        match minimal_exposed_face_from(tuple, interval, cone, scheme) {
            Err(Error::PureTraceNormal) => last = Error::PureTraceNormal,
            other => return other,
        }
    }
    Err(last)
}

/// `F₁ ⊃ F₂ ⊃ ⋯ ⊃ F_k = F` with each `F_{i+1}` the minimal exposed face of
/// `F` inside `F_i`, computed in the cut-down of `F_i`.
pub fn minimal_exposed_chain(
    tuple: &OperatorTuple,
    interval: &OrderInterval,
    sampling: &DirectionSampling,
) -> Result<Vec<FaceHandle>> {
    let tol = tuple.tolerances().order;
    if interval.is_whole(tol) {
        return Err(Error::NotProperFace);
    }
    let limit = tuple.n() + 2;
    let mut chain: Vec<FaceHandle> = Vec::new();
    let mut pairs: Vec<SpectralPair> = Vec::new();
    let mut current: Option<CutDown> = None;

    for _ in 0..limit {
        let (local_tuple, local_face) = match &current {
            None => (tuple.clone(), interval.clone()),
            Some(cd) => (cd.tuple.clone(), cd.transport_in(interval)),
        };
        let table = SweepTable::build(&local_tuple, sampling)?;
        let cone = normal_cone(&local_tuple, &local_face, &table)?;
        let exposed = minimal_exposed_face_retrying(&local_tuple, &local_face, &cone)?;
        pairs.push(exposed.hyperplane.pair.clone());
        let global = match &current {
            None => exposed.interval.clone(),
            Some(cd) => cd.transport_out(&exposed.interval),
        };
        let complex = build_facial_complex(tuple, &pairs)?;
        chain.push(FaceHandle {
            interval: global.clone(),
            complex: Some(complex),
        });
        if global.approx_eq(interval, 1e-6) {
            return Ok(chain);
        }
        current = Some(cut_down(tuple, &global)?);
    }
    Err(Error::ChainDidNotConverge(limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{random_unit_ball_element, seeded_rng};

    fn pair(s: f64, t: &[f64]) -> SpectralPair {
        SpectralPair::new(s, t.to_vec()).unwrap()
    }

    #[test]
    fn whole_interval_cut_down_is_identity() {
        let t = fixtures::pauli();
        let cd = cut_down(&t, &OrderInterval::whole(t.algebra())).unwrap();
        assert!((cd.tau_r - 1.0).abs() < 1e-15);
        let x = random_unit_ball_element(&[2], &mut seeded_rng(1));
        let a = t.psi(&x).unwrap();
        let b = cd.reconstruct(&cd.compress(&x));
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn harmonic_eigenvalue_cut_down_is_scalar() {
        let t = fixtures::harmonic();
        let iv = interval_projections(&t, &pair(1.0 / 3.0, &[1.0])).unwrap();
        let cd = cut_down(&t, &iv).unwrap();
        assert_eq!(cd.tuple.algebra().total_dim(), 1);
        assert!((cd.tuple.operator(0).blocks()[0][(0, 0)].re - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(face_dimension(&t, &iv).unwrap(), 1);
    }

    #[test]
    fn pauli_eigenprojection_cut_down() {
        let t = fixtures::pauli();
        let p = t.algebra().identity().plus(t.operator(0)).scaled(0.5);
        let iv = OrderInterval::new(t.algebra().zero(), p, 1e-12).unwrap();
        let cd = cut_down(&t, &iv).unwrap();
        assert_eq!(cd.tuple.algebra().total_dim(), 1);
        assert!((cd.tuple.operator(0).blocks()[0][(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(cd.tuple.operator(1).blocks()[0][(0, 0)].norm() < 1e-14);
    }

    #[test]
    fn degenerate_cut_down_rejected() {
        let t = fixtures::pauli();
        let iv = OrderInterval::point(t.algebra().zero());
        assert!(matches!(cut_down(&t, &iv), Err(Error::DegenerateFace)));
    }

    #[test]
    fn reconstruction_identity_on_block_face() {
        let t = fixtures::three_block();
        let iv = interval_projections(&t, &pair(0.0, &[0.0, 1.0])).unwrap();
        let cd = cut_down(&t, &iv).unwrap();
        let mut rng = seeded_rng(7);
        for _ in 0..50 {
            let x = random_unit_ball_element(&cd.tuple.algebra().dims(), &mut rng);
            let lhs = cd.reconstruct(&x);
            let rhs = t.psi(&iv.lower.plus(&cd.embed(&x))).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn single_pair_complex_is_the_exposed_interval() {
        let t = fixtures::harmonic();
        let p = pair(1.0 / 3.0, &[1.0]);
        let c = build_facial_complex(&t, std::slice::from_ref(&p)).unwrap();
        let h = face_from_complex(&t, &c).unwrap();
        assert!(h.interval.approx_eq(&interval_projections(&t, &p).unwrap(), 1e-14));
        assert!(matches!(build_facial_complex(&t, &[]), Err(Error::EmptyComplex)));
    }

    #[test]
    fn scalar_second_level() {
        let t = fixtures::harmonic();
        let p1 = pair(1.0 / 3.0, &[1.0]);
        let iv = interval_projections(&t, &p1).unwrap();
        // s₂ below the scalar 1/3: q⁻₂ = q⁺₂ = 0
        let c = build_facial_complex(&t, &[p1.clone(), pair(0.0, &[1.0])]).unwrap();
        let h = face_from_complex(&t, &c).unwrap();
        assert!(h.interval.lower.max_abs_diff(&iv.lower) < 1e-14);
        assert!(h.interval.is_point(1e-14));
        // s₂ at the scalar: q⁻₂ = 0, q⁺₂ = r₁
        let c = build_facial_complex(&t, &[p1.clone(), p1.clone()]).unwrap();
        assert!(c.levels[1].q.upper.max_abs_diff(&c.levels[0].r) < 1e-14);
        assert!(c.levels[1].q.lower.max_norm() < 1e-14);
        // s₂ above the scalar: both equal r₁
        let c = build_facial_complex(&t, &[p1, pair(1.0, &[1.0])]).unwrap();
        assert!(c.levels[1].q.lower.max_abs_diff(&c.levels[0].r) < 1e-14);
        assert!(c.levels[1].q.is_point(1e-14));
    }

    #[test]
    fn early_termination_is_flagged() {
        let t = fixtures::diag01();
        let c = build_facial_complex(&t, &[pair(0.5, &[1.0]), pair(0.0, &[1.0])]).unwrap();
        assert_eq!(c.levels.len(), 1);
        assert_eq!(c.terminated_at, Some(1));
    }

    #[test]
    fn diag01_vertex_cone() {
        let t = fixtures::diag01();
        let table = SweepTable::build(&t, &DirectionSampling::default()).unwrap();
        let p = HermitianOperator::from_real_diagonal(&[2], &[1.0, 0.0]).unwrap();
        let cone = normal_cone(&t, &OrderInterval::point(p), &table).unwrap();
        assert_eq!(cone.degree, 2);
        assert!(cone.exact);
        assert!(cone.members.iter().all(|m| m.t[0] > 0.0 && (0.0..=1.0).contains(&m.s)));
        assert!(matches!(
            normal_cone(&t, &OrderInterval::whole(t.algebra()), &table),
            Err(Error::NotProperFace)
        ));
    }

    #[test]
    fn origin_is_sharp() {
        let t = fixtures::pauli();
        let iv = OrderInterval::point(t.algebra().zero());
        assert!(is_sharp(&t, &iv, &DirectionSampling::with_count(32)).unwrap());
    }

    #[test]
    fn exposed_input_gives_itself() {
        let t = fixtures::harmonic();
        let iv = interval_projections(&t, &pair(1.0 / 3.0, &[1.0])).unwrap();
        let f = minimal_exposed_face(&t, &iv, &DirectionSampling::default()).unwrap();
        assert!(f.interval.approx_eq(&iv, 1e-12));
        let chain = minimal_exposed_chain(&t, &iv, &DirectionSampling::default()).unwrap();
        assert_eq!(chain.len(), 1);
    }

    #[test]
    fn hidden_vertex_has_chain_of_length_two() {
        let t = fixtures::three_block();
        let c = build_facial_complex(&t, &[pair(0.0, &[0.0, 1.0]), pair(0.0, &[1.0, 0.0])]).unwrap();
        let h = face_from_complex(&t, &c).unwrap();
        assert!(h.interval.is_point(1e-12));
        let sampling = DirectionSampling::with_count(64);
        let f = minimal_exposed_face(&t, &h.interval, &sampling).unwrap();
        assert_eq!(f.dimension, 2);
        let chain = minimal_exposed_chain(&t, &h.interval, &sampling).unwrap();
        assert_eq!(chain.len(), 2);
        assert!(chain[1].interval.approx_eq(&h.interval, 1e-8));
    }
}
