//! Algebraic conclusions drawn from the geometry of the scale: central
//! projections from independent normals, spectral gaps from parallel
//! normals, isolated extreme points, and the abelian test. Every geometric
//! finding is re-checked with commutators.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{GeneratedAlgebra, HermitianOperator, OperatorTuple, ScalePoint};
use crate::error::{Error, Result};
use crate::faces::{block_form, normal_cone, FaceHandle, NormalConeSample};
use crate::scale::{DirectionSampling, ExtremeCloud, SweepTable};
use crate::spectral::{decompose_relative, eigengap_of, eq_band, OrderInterval, SpectralPair};

/// Tolerance for the angular grouping of normals and for rank decisions.
const DIRECTION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct CentralityReport {
    /// A maximal set of members with linearly independent `t`.
    pub independent_normals: Vec<SpectralPair>,
    pub t_rank: usize,
    /// `max_i ‖[b_i, q⁻]‖_max`.
    pub lower_commutator: f64,
    /// `max_i ‖[b_i, q⁺]‖_max`.
    pub upper_commutator: f64,
    /// `τ(q⁻)`, `τ(q⁺)`.
    pub traces: [f64; 2],
    /// `t_rank = n`, so `q^±` must be central.
    pub detected: bool,
    /// Detected and `q^±` are not both in `{0, 1}`.
    pub nontrivial: bool,
    pub status: String,
}

impl CentralityReport {
    pub fn commutator_norm(&self) -> f64 {
        self.lower_commutator.max(self.upper_commutator)
    }
}

/// Greedy selection of members whose `t` raise the rank.
fn independent_t(members: &[SpectralPair]) -> Vec<SpectralPair> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for m in members {
        let norm = m.t_norm();
        let mut v: Vec<f64> = m.t.iter().map(|x| x / norm).collect();
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > DIRECTION_TOL.sqrt() {
            basis.push(v.iter().map(|x| x / r).collect());
            chosen.push(m.clone());
        }
    }
    chosen
}

/// If the normals of the face include `n` independent `t`, its endpoint
/// projections are central; the measured commutators must confirm it and
/// the face can be at most a segment.
pub fn detect_central(tuple: &OperatorTuple, face: &FaceHandle, cone: &NormalConeSample) -> Result<CentralityReport> {
    let tol = tuple.tolerances();
    if face.interval.is_whole(tol.order) {
        return Err(Error::NotProperFace);
    }
    let independent = independent_t(&cone.members);
    let t_rank = independent.len();
    let lower_commutator = tuple.max_commutator_with(&face.interval.lower);
    let upper_commutator = tuple.max_commutator_with(&face.interval.upper);
    let alg = tuple.algebra();
    let traces = [
        alg.trace_unchecked(&face.interval.lower),
        alg.trace_unchecked(&face.interval.upper),
    ];
    let detected = t_rank == tuple.n();
    if detected {
        let worst = lower_commutator.max(upper_commutator);
        if worst > tol.central {
            return Err(Error::Invariant(format!(
                "face with {t_rank} independent normals has non-central projection (commutator {worst:.3e})"
            )));
        }
        if cone.face_dimension > 1 {
            return Err(Error::Invariant(format!(
                "face with {t_rank} independent normals has dimension {}",
                cone.face_dimension
            )));
        }
    }
    let trivial = |p: &HermitianOperator| {
        p.max_norm() <= tol.order || p.max_abs_diff(&alg.identity()) <= tol.order
    };
    let nontrivial = detected && !(trivial(&face.interval.lower) && trivial(&face.interval.upper));
    let status = if detected {
        "central".to_string()
    } else {
        "insufficient independent normals".to_string()
    };
    Ok(CentralityReport {
        independent_normals: independent,
        t_rank,
        lower_commutator,
        upper_commutator,
        traces,
        detected,
        nontrivial,
        status,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    /// Unit direction.
    pub t: Vec<f64>,
    pub s1: f64,
    pub s2: f64,
    /// The exposed point `Ψ(q)`.
    pub point: ScalePoint,
}

/// Groups members by the direction of `t`; two distinct `s` for one `t`
/// force `(s₁, s₂)` into a gap of `σ(b_t)` and the face to be a point.
pub fn detect_gap(tuple: &OperatorTuple, face: &FaceHandle, cone: &NormalConeSample) -> Result<Vec<GapReport>> {
    let tol = tuple.tolerances();
    if face.interval.is_whole(tol.order) {
        return Err(Error::NotProperFace);
    }
    let mut groups: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for m in &cone.members {
        let norm = m.t_norm();
        let t: Vec<f64> = m.t.iter().map(|x| x / norm).collect();
        let s = m.s / norm;
        match groups.iter_mut().find(|(g, _)| {
            g.iter().zip(&t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= DIRECTION_TOL
        }) {
            Some((_, ss)) => ss.push(s),
            None => groups.push((t, vec![s])),
        }
    }
    let mut out = Vec::new();
    for (t, ss) in groups {
        let s1 = ss.iter().copied().fold(f64::INFINITY, f64::min);
        let s2 = ss.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bt = tuple.linear_combination(&t)?;
        let info = decompose_relative(tuple.algebra(), &bt, tol)?;
        let eq = eq_band(tol, &info);
        if s2 - s1 <= 2.0 * eq {
            continue;
        }
        if !eigengap_of(&bt, s1 + eq, s2 - eq)? {
            return Err(Error::Invariant(format!(
                "normals at s = {s1} and s = {s2} straddle an eigenvalue"
            )));
        }
        if !face.interval.is_point(tol.order) {
            return Err(Error::Invariant("face with a gap normal pair is not a point".into()));
        }
        out.push(GapReport {
            t,
            s1,
            s2,
            point: tuple.psi_unchecked(&face.interval.lower),
        });
    }
    Ok(out)
}

/// Extreme clouds at a base sampling and at doubled density.
#[derive(Clone, Debug)]
pub struct CloudEscalation {
    pub coarse: ExtremeCloud,
    pub fine: ExtremeCloud,
}

/// Default number of sampled directions for the coarse cloud.
pub const ESCALATION_BASE: usize = 4096;

impl CloudEscalation {
    pub fn build(tuple: &OperatorTuple, base: usize) -> Result<Self> {
        let coarse_table = SweepTable::build(tuple, &DirectionSampling::with_count(base))?;
        let coarse = ExtremeCloud::from_table(tuple, &coarse_table);
        let fine_table = SweepTable::build(tuple, &DirectionSampling::with_count(2 * base))?;
        let fine = ExtremeCloud::from_table(tuple, &fine_table);
        Ok(CloudEscalation { coarse, fine })
    }

    pub fn counts(&self) -> [usize; 2] {
        [self.coarse.len(), self.fine.len()]
    }
}

/// Uniform grid over the first three coordinates for radius queries.
struct Grid {
    cell: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl Grid {
    fn key(cell: f64, x: &ScalePoint) -> [i64; 3] {
        let mut k = [0i64; 3];
        for (i, v) in x.coords().iter().take(3).enumerate() {
            k[i] = (v / cell).floor() as i64;
        }
        k
    }

    fn new(points: &[ScalePoint], cell: f64) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(cell, p)).or_default().push(i);
        }
        Grid { cell, cells }
    }

    /// True if a point other than `skip` lies within `radius ≤ cell` of `x`.
    fn has_neighbor(&self, points: &[ScalePoint], x: &ScalePoint, radius: f64, skip: Option<usize>) -> bool {
        let k = Self::key(self.cell, x);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let key = [k[0] + dx, k[1] + dy, k[2] + dz];
                    if let Some(ids) = self.cells.get(&key) {
                        if ids.iter().any(|&i| Some(i) != skip && points[i].distance(x) <= radius) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IsolatedPoint {
    pub point: ScalePoint,
    #[serde(skip)]
    pub projection: HermitianOperator,
    pub trace: f64,
    pub commutator: f64,
    pub is_central: bool,
}

/// Fine-cloud points with no other point within `iso_radius_rel × diameter`,
/// in both the coarse and the fine cloud, with their measured centrality.
pub fn isolated_extremes_to_center(tuple: &OperatorTuple, clouds: &CloudEscalation) -> Vec<IsolatedPoint> {
    let tol = tuple.tolerances();
    let fine_pts = clouds.fine.scale_points();
    let coarse_pts = clouds.coarse.scale_points();
    let diameter = clouds.fine.diameter();
    let radius = tol.iso_radius_rel * diameter;
    if radius <= 0.0 {
        return clouds
            .fine
            .points
            .iter()
            .map(|e| isolated_point(tuple, &e.point, &e.projection))
            .collect();
    }
    let fine_grid = Grid::new(&fine_pts, radius);
    let coarse_grid = Grid::new(&coarse_pts, radius);
    let same = tol.point_dedup;
    clouds
        .fine
        .points
        .par_iter()
        .enumerate()
        .filter(|(i, e)| {
            if fine_grid.has_neighbor(&fine_pts, &e.point, radius, Some(*i)) {
                return false;
            }
            // present in the coarse cloud, and isolated there too
            let twin = coarse_pts.iter().position(|c| c.distance(&e.point) <= same);
            match twin {
                Some(j) => !coarse_grid.has_neighbor(&coarse_pts, &e.point, radius, Some(j)),
                None => false,
            }
        })
        .map(|(_, e)| isolated_point(tuple, &e.point, &e.projection))
        .collect()
}

fn isolated_point(tuple: &OperatorTuple, point: &ScalePoint, projection: &HermitianOperator) -> IsolatedPoint {
    let commutator = tuple.max_commutator_with(projection);
    IsolatedPoint {
        point: point.clone(),
        projection: projection.clone(),
        trace: tuple.algebra().trace_unchecked(projection),
        commutator,
        is_central: commutator <= tuple.tolerances().central,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AbelianVerdict {
    /// Finite, stable extreme count with all projections central.
    pub geometric: bool,
    /// All generators commute to 1e-8.
    pub algebraic: bool,
    /// Deduplicated cloud sizes at each escalation.
    pub counts: Vec<usize>,
    /// The stable count, or `None` when sampling did not stabilize.
    pub extreme_count: Option<usize>,
    pub all_central: bool,
    /// Dimension of the generated algebra `N`.
    pub n_dim: usize,
    pub max_commutator: f64,
}

impl AbelianVerdict {
    pub fn extreme_count_label(&self) -> String {
        match self.extreme_count {
            Some(c) => c.to_string(),
            None => "sampling-incomplete".to_string(),
        }
    }
}

pub fn abelian_verdict(tuple: &OperatorTuple, clouds: &CloudEscalation) -> AbelianVerdict {
    let n_dim = GeneratedAlgebra::new(tuple).dim();
    let max_commutator = tuple.max_pairwise_commutator();
    let counts = vec![clouds.coarse.len(), clouds.fine.len()];
    let central = tuple.tolerances().central;
    let all_central = clouds
        .fine
        .points
        .par_iter()
        .all(|e| tuple.max_commutator_with(&e.projection) <= central);
    let stable = counts[0] == counts[1];
    let bound = if n_dim >= 63 { usize::MAX } else { 1usize << n_dim };
    let geometric = stable && all_central && counts[1] <= bound;
    AbelianVerdict {
        geometric,
        algebraic: max_commutator <= 1e-8,
        extreme_count: stable.then_some(counts[1]),
        counts,
        all_central,
        n_dim,
        max_commutator,
    }
}

/// Everything known about one face.
#[derive(Clone, Debug, Serialize)]
pub struct FaceReport {
    pub traces: [f64; 2],
    pub vertices: [ScalePoint; 2],
    pub dimension: usize,
    pub degree: usize,
    pub degree_exact: bool,
    pub sharp: bool,
    pub cone: NormalConeSample,
    pub centrality: CentralityReport,
    pub gaps: Vec<GapReport>,
    /// Largest violation of the block inequalities over all members.
    pub block_violation: f64,
}

pub fn analyze_face(tuple: &OperatorTuple, face: &FaceHandle, table: &SweepTable) -> Result<FaceReport> {
    let cone = normal_cone(tuple, &face.interval, table)?;
    let n = tuple.n();
    if cone.degree + cone.face_dimension > n + 1 {
        return Err(Error::Invariant(format!(
            "degree {} + dimension {} exceeds {}",
            cone.degree,
            cone.face_dimension,
            n + 1
        )));
    }
    let block_violation = cone
        .members
        .par_iter()
        .map(|m| {
            block_form(tuple, &face.interval, m).map(|b| {
                b.below.max(b.middle).max(b.above).max(b.commutator)
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let band = tuple.tolerances().eig_eq_rel
        * tuple.operators().iter().map(|b| b.max_norm()).sum::<f64>().max(1.0)
        * (tuple.algebra().dims().into_iter().max().unwrap_or(1) as f64);
    if block_violation > band.max(1e-8) {
        return Err(Error::Invariant(format!(
            "normal cone member violates the block form by {block_violation:.3e}"
        )));
    }
    let centrality = detect_central(tuple, face, &cone)?;
    let gaps = detect_gap(tuple, face, &cone)?;
    let alg = tuple.algebra();
    Ok(FaceReport {
        traces: [
            alg.trace_unchecked(&face.interval.lower),
            alg.trace_unchecked(&face.interval.upper),
        ],
        vertices: face.vertices(tuple),
        dimension: cone.face_dimension,
        degree: cone.degree,
        degree_exact: cone.exact,
        sharp: cone.degree >= 2,
        cone,
        centrality,
        gaps,
        block_violation,
    })
}

/// A distinct face `Ψ([p⁻, p⁺])` reached by the sweep, with the first
/// pair that exposed it.
#[derive(Clone, Debug)]
pub struct SweptFace {
    pub pair: SpectralPair,
    pub interval: OrderInterval,
    pub vertices: [ScalePoint; 2],
}

/// Distinct proper exposed faces of the sampled pairs, in sweep order.
pub fn swept_faces(tuple: &OperatorTuple, table: &SweepTable) -> Vec<SweptFace> {
    let tol = tuple.tolerances();
    let total = table.sweeps.first().map_or(0, |sw| sw.prefix.len() - 1);
    let mut out: Vec<SweptFace> = Vec::new();
    let mut seen: HashMap<[i64; 2], Vec<usize>> = HashMap::new();
    let alg = tuple.algebra();
    for sw in &table.sweeps {
        for s in sw.s_values() {
            let (lo, hi) = sw.split(s);
            if lo == 0 && hi == total {
                continue;
            }
            let v = [sw.prefix_points[lo].clone(), sw.prefix_points[hi].clone()];
            // bucket by the two traces
            let key = [
                (alg.trace_unchecked(&sw.prefix[lo]) * 1e6).round() as i64,
                (alg.trace_unchecked(&sw.prefix[hi]) * 1e6).round() as i64,
            ];
            let near = |k: [i64; 2]| seen.get(&k).cloned().unwrap_or_default();
            let mut candidates = Vec::new();
            for d0 in -1..=1 {
                for d1 in -1..=1 {
                    candidates.extend(near([key[0] + d0, key[1] + d1]));
                }
            }
            let dup = candidates.iter().any(|&i| {
                let f: &SweptFace = &out[i];
                f.vertices[0].distance(&v[0]) <= tol.point_dedup
                    && f.vertices[1].distance(&v[1]) <= tol.point_dedup
                    && f.interval.lower.max_abs_diff(&sw.prefix[lo]) <= tol.projection_dedup
                    && f.interval.upper.max_abs_diff(&sw.prefix[hi]) <= tol.projection_dedup
            });
            if dup {
                continue;
            }
            seen.entry(key).or_default().push(out.len());
            out.push(SweptFace {
                pair: SpectralPair { s, t: sw.t.clone() },
                interval: OrderInterval {
                    lower: sw.prefix[lo].clone(),
                    upper: sw.prefix[hi].clone(),
                },
                vertices: v,
            });
        }
    }
    out
}

/// The combined structure report.
#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub abelian: AbelianVerdict,
    pub central_projections: Vec<CentralityReport>,
    pub gaps: Vec<GapReport>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spectral::interval_projections;

    fn face_of(tuple: &OperatorTuple, s: f64, t: &[f64]) -> FaceHandle {
        FaceHandle::new(interval_projections(tuple, &SpectralPair::new(s, t.to_vec()).unwrap()).unwrap())
    }

    #[test]
    fn diag01_vertex_gap() {
        let t = fixtures::diag01();
        let table = SweepTable::build(&t, &DirectionSampling::default()).unwrap();
        let f = face_of(&t, 0.5, &[1.0]);
        let r = analyze_face(&t, &f, &table).unwrap();
        assert_eq!(r.gaps.len(), 1);
        assert!((r.gaps[0].s1 - 0.0).abs() < 1e-12 && (r.gaps[0].s2 - 1.0).abs() < 1e-12);
        assert!(r.centrality.detected);
    }

    #[test]
    fn harmonic_gap_between_third_and_half() {
        let t = fixtures::harmonic();
        let table = SweepTable::build(&t, &DirectionSampling::default()).unwrap();
        let f = face_of(&t, 0.4, &[1.0]);
        let r = analyze_face(&t, &f, &table).unwrap();
        let g = r.gaps.iter().find(|g| g.t[0] > 0.0).unwrap();
        assert!(g.s1 >= 1.0 / 3.0 - 1e-12 && g.s2 <= 0.5 + 1e-12);
    }

    #[test]
    fn three_block_scalar_vertex_is_central() {
        let t = fixtures::three_block();
        let table = SweepTable::build(&t, &DirectionSampling::with_count(128)).unwrap();
        let z = HermitianOperator::from_real_diagonal(&t.algebra().dims(), &[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let f = FaceHandle::new(OrderInterval::point(z));
        let r = analyze_face(&t, &f, &table).unwrap();
        assert_eq!(r.centrality.t_rank, 2);
        assert!(r.centrality.detected && r.centrality.nontrivial);
        assert!(r.centrality.commutator_norm() <= 1e-12);
    }

    #[test]
    fn step_pair_facet_has_no_gaps() {
        let t = fixtures::step_pair();
        let table = SweepTable::build(&t, &DirectionSampling::with_count(128)).unwrap();
        let f = face_of(&t, 1.0, &[0.0, 1.0]);
        let r = analyze_face(&t, &f, &table).unwrap();
        assert_eq!(r.dimension, 2);
        assert_eq!(r.degree, 1);
        assert!(!r.sharp);
        assert!(r.gaps.is_empty());
    }

    #[test]
    fn swept_faces_of_diag01() {
        // a parallelogram: four vertices, four edges
        let t = fixtures::diag01();
        let table = SweepTable::build(&t, &DirectionSampling::default()).unwrap();
        let faces = swept_faces(&t, &table);
        let dims: Vec<usize> = faces
            .iter()
            .map(|f| crate::faces::face_dimension(&t, &f.interval).unwrap())
            .collect();
        assert_eq!(dims.iter().filter(|&&d| d == 0).count(), 4);
        assert_eq!(dims.iter().filter(|&&d| d == 1).count(), 4);
    }

    #[test]
    fn guard_on_whole_scale() {
        let t = fixtures::pauli();
        let table = SweepTable::build(&t, &DirectionSampling::with_count(8)).unwrap();
        let f = FaceHandle::new(OrderInterval::whole(t.algebra()));
        assert!(matches!(analyze_face(&t, &f, &table), Err(Error::NotProperFace)));
    }
}
