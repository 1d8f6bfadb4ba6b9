//! Convex hulls of point clouds in R² and R³ (any affine dimension up to 3).

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::algebra::ScalePoint;
use crate::error::{Error, Result};

/// A hull facet `⟨normal, x⟩ = offset` with the hull on the `≤` side.
/// In affine dimension 3 it is a triangle; in dimension 2 an edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug)]
pub struct PointCloudHull {
    points: Vec<ScalePoint>,
    vertices: Vec<usize>,
    facets: Vec<Facet>,
    affine_dim: usize,
    scale: f64,
}

impl PointCloudHull {
    pub fn new(points: Vec<ScalePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invariant("hull of an empty point set".into()));
        }
        let ambient = points[0].len();
        if points.iter().any(|p| p.len() != ambient) {
            return Err(Error::Shape("hull points differ in length".into()));
        }
        let frame = AffineFrame::fit(&points);
        let scale = frame.scale;
        if frame.basis.len() > 3 {
            return Err(Error::Invariant(format!(
                "hull of affine dimension {} is not supported",
                frame.basis.len()
            )));
        }
        let local: Vec<Vec<f64>> = points.iter().map(|p| frame.coords(p)).collect();
        let (candidates, local_facets) = match frame.basis.len() {
            0 => (vec![0], Vec::new()),
            1 => hull_1d(&local),
            2 => hull_2d(&local, scale),
            _ => hull_3d(&local, scale),
        };
        let facets: Vec<Facet> = local_facets
            .into_iter()
            .map(|(vertices, n, _)| {
                let normal = frame.lift_direction(&n);
                let offset = points[vertices[0]].dot(&normal);
                Facet { vertices, normal, offset }
            })
            .collect();

        let mut hull = PointCloudHull {
            points,
            vertices: Vec::new(),
            facets,
            affine_dim: frame.basis.len(),
            scale,
        };
        hull.vertices = hull.certify_vertices(&candidates, &frame);
        Ok(hull)
    }

    /// Keeps candidates that are the unique maximizer of the summed normals of
    /// their incident facets (an exposed point, hence a vertex).
    fn certify_vertices(&self, candidates: &[usize], frame: &AffineFrame) -> Vec<usize> {
        if self.affine_dim == 0 {
            return vec![0];
        }
        let margin = 1e-11 * self.scale.max(1e-300);
        let mut out: Vec<usize> = Vec::new();
        for &v in candidates {
            let u: Vec<f64> = if self.affine_dim == 1 {
                frame.lift_direction(&[if frame.coords(&self.points[v])[0] > 0.0 { 1.0 } else { -1.0 }])
            } else {
                let mut acc = vec![0.0; self.points[v].len()];
                let mut seen: Vec<Vec<f64>> = Vec::new();
                for f in self.facets.iter().filter(|f| f.vertices.contains(&v)) {
                    if seen.iter().any(|m| m.iter().zip(&f.normal).all(|(a, b)| (a - b).abs() < 1e-9)) {
                        continue;
                    }
                    seen.push(f.normal.clone());
                    for (a, b) in acc.iter_mut().zip(&f.normal) {
                        *a += b;
                    }
                }
                acc
            };
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let hv = self.points[v].dot(&u) / norm;
            let unique = self.points.iter().all(|p| {
                p.distance(&self.points[v]) <= 1e-12 * self.scale.max(1.0) || p.dot(&u) / norm < hv - margin
            });
            if unique && !out.iter().any(|&w| self.points[w].distance(&self.points[v]) <= 1e-12 * self.scale.max(1.0)) {
                out.push(v);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn points(&self) -> &[ScalePoint] {
        &self.points
    }

    /// Indices into [`PointCloudHull::points`] of the certified vertices.
    pub fn vertex_indices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn vertices(&self) -> Vec<ScalePoint> {
        self.vertices.iter().map(|&i| self.points[i].clone()).collect()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    /// `h(u) = max ⟨u, x⟩` over the cloud.
    pub fn support(&self, u: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| p.dot(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest amount by which an input point violates a facet inequality.
    pub fn max_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for f in &self.facets {
            for p in &self.points {
                worst = worst.max(p.dot(&f.normal) - f.offset);
            }
        }
        worst
    }

    /// Triangles when the hull is a 3-dimensional polytope.
    pub fn triangles(&self) -> Option<Vec<[usize; 3]>> {
        if self.affine_dim != 3 {
            return None;
        }
        Some(
            self.facets
                .iter()
                .map(|f| [f.vertices[0], f.vertices[1], f.vertices[2]])
                .collect(),
        )
    }
}

/// Hull vertices within `tol` of the supporting hyperplane `⟨u, x⟩ = h(u)`.
pub fn hull_faces(hull: &PointCloudHull, u: &[f64], tol: f64) -> Vec<ScalePoint> {
    let h = hull.support(u);
    hull.vertices
        .iter()
        .filter(|&&i| hull.points[i].dot(u) >= h - tol)
        .map(|&i| hull.points[i].clone())
        .collect()
}

/// Orthonormal frame of the affine hull of a cloud.
struct AffineFrame {
    origin: Vec<f64>,
    basis: Vec<Vec<f64>>,
    scale: f64,
}

impl AffineFrame {
    fn fit(points: &[ScalePoint]) -> Self {
        let dim = points[0].len();
        let m = points.len() as f64;
        let mut origin = vec![0.0; dim];
        for p in points {
            for (o, v) in origin.iter_mut().zip(p.coords()) {
                *o += v / m;
            }
        }
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        let mut scale: f64 = 0.0;
        for p in points {
            let c: Vec<f64> = p.coords().iter().zip(&origin).map(|(a, b)| a - b).collect();
            scale = scale.max(c.iter().map(|x| x * x).sum::<f64>().sqrt());
            for i in 0..dim {
                for j in 0..dim {
                    cov[(i, j)] += c[i] * c[j];
                }
            }
        }
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut basis = Vec::new();
        for k in order {
            let e: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let spread = points
                .iter()
                .map(|p| {
                    p.coords()
                        .iter()
                        .zip(&origin)
                        .zip(&e)
                        .map(|((a, b), w)| (a - b) * w)
                        .sum::<f64>()
                        .abs()
                })
                .fold(0.0, f64::max);
            if spread > 1e-9 * scale.max(1e-300) && spread > 1e-14 {
                basis.push(e);
            }
        }
        AffineFrame { origin, basis, scale }
    }

    fn coords(&self, p: &ScalePoint) -> Vec<f64> {
        self.basis
            .iter()
            .map(|e| {
                p.coords()
                    .iter()
                    .zip(&self.origin)
                    .zip(e)
                    .map(|((a, b), w)| (a - b) * w)
                    .sum()
            })
            .collect()
    }

    fn lift_direction(&self, n: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.origin.len()];
        for (c, e) in n.iter().zip(&self.basis) {
            for (o, w) in out.iter_mut().zip(e) {
                *o += c * w;
            }
        }
        out
    }
}

type LocalFacet = (Vec<usize>, Vec<f64>, f64);

fn hull_1d(x: &[Vec<f64>]) -> (Vec<usize>, Vec<LocalFacet>) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, p) in x.iter().enumerate() {
        if p[0] < x[lo][0] {
            lo = i;
        }
        if p[0] > x[hi][0] {
            hi = i;
        }
    }
    (
        vec![lo, hi],
        vec![
            (vec![lo], vec![-1.0], -x[lo][0]),
            (vec![hi], vec![1.0], x[hi][0]),
        ],
    )
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain, dropping collinear points.
fn hull_2d(x: &[Vec<f64>], scale: f64) -> (Vec<usize>, Vec<LocalFacet>) {
    let eps = 1e-12 * scale * scale;
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a][0].total_cmp(&x[b][0]).then(x[a][1].total_cmp(&x[b][1])));
    let mut chain: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = chain.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in iter {
            while chain.len() >= start + 2 {
                let a = chain[chain.len() - 2];
                let b = chain[chain.len() - 1];
                if cross2(&x[a], &x[b], &x[i]) <= eps {
                    chain.pop();
                } else {
                    break;
                }
            }
            chain.push(i);
        }
        chain.pop();
    }
    let mut facets = Vec::new();
    let k = chain.len();
    for e in 0..k {
        let a = chain[e];
        let b = chain[(e + 1) % k];
        let d = [x[b][0] - x[a][0], x[b][1] - x[a][1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if len == 0.0 {
            continue;
        }
        // counterclockwise chain: outward normal is the right-hand perpendicular
        let n = vec![d[1] / len, -d[0] / len];
        let off = n[0] * x[a][0] + n[1] * x[a][1];
        facets.push((vec![a, b], n, off));
    }
    (chain, facets)
}

struct Tri {
    v: [usize; 3],
    n: [f64; 3],
    off: f64,
    alive: bool,
}

fn sub3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: [f64; 3], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn make_tri(x: &[Vec<f64>], v: [usize; 3]) -> Tri {
    let n = cross3(sub3(&x[v[1]], &x[v[0]]), sub3(&x[v[2]], &x[v[0]]));
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let n = [n[0] / len, n[1] / len, n[2] / len];
    Tri {
        v,
        n,
        off: dot3(n, &x[v[0]]),
        alive: true,
    }
}

/// Incremental hull of a full-dimensional cloud in R³.
fn hull_3d(x: &[Vec<f64>], scale: f64) -> (Vec<usize>, Vec<LocalFacet>) {
    let eps = 1e-10 * scale;
    let dist = |a: usize, b: usize| sub3(&x[a], &x[b]).iter().map(|v| v * v).sum::<f64>();
    let p0 = (0..x.len()).min_by(|&a, &b| x[a][0].total_cmp(&x[b][0])).unwrap();
    let p1 = (0..x.len()).max_by(|&a, &b| dist(a, p0).total_cmp(&dist(b, p0))).unwrap();
    let line = sub3(&x[p1], &x[p0]);
    let off_line = |a: usize| {
        let c = cross3(line, sub3(&x[a], &x[p0]));
        c.iter().map(|v| v * v).sum::<f64>()
    };
    let p2 = (0..x.len()).max_by(|&a, &b| off_line(a).total_cmp(&off_line(b))).unwrap();
    let plane = cross3(line, sub3(&x[p2], &x[p0]));
    let height = |a: usize| dot3(plane, &sub3(&x[a], &x[p0]));
    let p3 = (0..x.len())
        .max_by(|&a, &b| height(a).abs().total_cmp(&height(b).abs()))
        .unwrap();

    let centroid: Vec<f64> = (0..3)
        .map(|k| (x[p0][k] + x[p1][k] + x[p2][k] + x[p3][k]) / 4.0)
        .collect();
    let mut tris: Vec<Tri> = Vec::new();
    for v in [[p0, p1, p2], [p0, p1, p3], [p0, p2, p3], [p1, p2, p3]] {
        let mut t = make_tri(x, v);
        if dot3(t.n, &centroid) > t.off {
            t = make_tri(x, [v[0], v[2], v[1]]);
        }
        tris.push(t);
    }

    let initial = [p0, p1, p2, p3];
    for i in 0..x.len() {
        if initial.contains(&i) {
            continue;
        }
        let visible: Vec<usize> = tris
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive && dot3(t.n, &x[i]) - t.off > eps)
            .map(|(k, _)| k)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for &k in &visible {
            let v = tris[k].v;
            for e in 0..3 {
                edges.insert((v[e], v[(e + 1) % 3]));
            }
        }
        let mut horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| !edges.contains(&(*b, *a)))
            .copied()
            .collect();
        horizon.sort_unstable();
        for &k in &visible {
            tris[k].alive = false;
        }
        for (a, b) in horizon {
            tris.push(make_tri(x, [a, b, i]));
        }
    }

    let alive: Vec<&Tri> = tris.iter().filter(|t| t.alive).collect();
    let mut verts: Vec<usize> = alive.iter().flat_map(|t| t.v).collect();
    verts.sort_unstable();
    verts.dedup();
    let facets = alive
        .iter()
        .map(|t| (t.v.to_vec(), t.n.to_vec(), t.off))
        .collect();
    (verts, facets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[f64]]) -> Vec<ScalePoint> {
        v.iter().map(|p| ScalePoint(p.to_vec())).collect()
    }

    #[test]
    fn cube_top_face() {
        let mut cube = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    cube.push(ScalePoint(vec![a as f64, b as f64, c as f64]));
                }
            }
        }
        cube.push(ScalePoint(vec![0.5, 0.5, 0.5]));
        cube.push(ScalePoint(vec![0.5, 0.5, 1.0]));
        let hull = PointCloudHull::new(cube).unwrap();
        assert_eq!(hull.affine_dim(), 3);
        assert_eq!(hull.vertex_indices().len(), 8);
        let top = hull_faces(&hull, &[0.0, 0.0, 1.0], 1e-9);
        assert_eq!(top.len(), 4);
        assert!(top.iter().all(|p| p[2] == 1.0));
        assert!(hull.max_violation() < 1e-12);
    }

    #[test]
    fn simplex_vertex_face() {
        let hull = PointCloudHull::new(pts(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]])).unwrap();
        let f = hull_faces(&hull, &[1.0, 0.2, 0.1], 1e-9);
        assert_eq!(f, pts(&[&[1.0, 0.0, 0.0]]));
    }

    #[test]
    fn square_in_plane_drops_edge_midpoints() {
        let hull = PointCloudHull::new(pts(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[0.0, 1.0],
            &[0.5, 0.0],
            &[0.5, 0.5],
        ]))
        .unwrap();
        assert_eq!(hull.affine_dim(), 2);
        assert_eq!(hull.vertex_indices(), &[0, 1, 2, 3]);
        assert!((hull.support(&[1.0, 1.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn planar_cloud_in_space_and_segments() {
        let hull = PointCloudHull::new(pts(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0], &[0.2, 0.2, 1.0]])).unwrap();
        assert_eq!(hull.affine_dim(), 2);
        assert_eq!(hull.vertex_indices().len(), 3);
        let seg = PointCloudHull::new(pts(&[&[0.0, 0.0], &[0.5, 0.5], &[1.0, 1.0]])).unwrap();
        assert_eq!(seg.affine_dim(), 1);
        assert_eq!(seg.vertex_indices(), &[0, 2]);
        let pt = PointCloudHull::new(pts(&[&[1.0, 2.0], &[1.0, 2.0]])).unwrap();
        assert_eq!(pt.affine_dim(), 0);
        assert_eq!(pt.vertex_indices().len(), 1);
    }

    #[test]
    fn coplanar_lattice_zonotope() {
        // a 3x3x3 lattice: only the 8 corners are vertices
        let mut p = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    p.push(ScalePoint(vec![a as f64 * 0.5, b as f64 * 0.5, c as f64 * 0.5]));
                }
            }
        }
        let hull = PointCloudHull::new(p).unwrap();
        assert_eq!(hull.vertex_indices().len(), 8);
    }
}
