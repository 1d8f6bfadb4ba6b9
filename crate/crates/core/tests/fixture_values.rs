//! Values of the shipped fixtures computed outside this crate (exact
//! rational arithmetic and an external convex hull code) and frozen here.

use spectral_scale::oracle::oracle_support;
use spectral_scale::{
    build_facial_complex, extreme_point_cloud, face_from_complex, fixtures, generated_algebra_basis,
    DirectionSampling, SpectralPair,
};

#[test]
fn harmonic_lower_vertices() {
    let t = fixtures::harmonic();
    let cloud = extreme_point_cloud(&t, &DirectionSampling::default()).unwrap();
    let frozen = [
        (0.00392156862745098, 0.0004901960784313725),
        (0.011764705882352941, 0.0016106442577030811),
        (0.027450980392156862, 0.004225023342670401),
        (1.0, 0.6954668534080298),
    ];
    for (x0, x1) in frozen {
        assert!(
            cloud.points.iter().any(|e| (e.point[0] - x0).abs() < 1e-12 && (e.point[1] - x1).abs() < 1e-12),
            "({x0}, {x1}) missing"
        );
    }
}

#[test]
fn extreme_counts() {
    for (name, count) in [("harmonic", 16), ("rational-pair", 56), ("step-pair", 28), ("diag01", 4)] {
        let t = fixtures::by_name(name).unwrap();
        let cloud = extreme_point_cloud(&t, &DirectionSampling::default()).unwrap();
        assert_eq!(cloud.len(), count, "{name}");
    }
}

#[test]
fn generated_algebra_dimensions() {
    for (name, dim) in [("pauli", 4), ("diag01", 2), ("step-pair", 6), ("three-block", 7), ("harmonic", 8)] {
        let t = fixtures::by_name(name).unwrap();
        assert_eq!(generated_algebra_basis(&t).len(), dim, "{name}");
    }
}

#[test]
fn pauli_support_values() {
    let t = fixtures::pauli();
    assert!((oracle_support(&t, &[0.0, 1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    assert!((oracle_support(&t, &[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    assert!(oracle_support(&t, &[-1.0, 0.0, 0.0]).unwrap().abs() < 1e-15);
    let alpha = spectral_scale::support_value(&t, &SpectralPair::new(0.0, vec![1.0, 0.0]).unwrap()).unwrap();
    assert!((alpha + 0.5).abs() < 1e-15);
}

#[test]
fn three_block_hidden_vertex() {
    // e₋ ⊕ P₋ ⊕ 0 with e₋ = diag(0, 1) and P₋ the −1 eigenprojection of σ_x
    let t = fixtures::three_block();
    let pairs = [
        SpectralPair::new(0.0, vec![0.0, 1.0]).unwrap(),
        SpectralPair::new(0.0, vec![1.0, 0.0]).unwrap(),
    ];
    let face = face_from_complex(&t, &build_facial_complex(&t, &pairs).unwrap()).unwrap();
    assert!(face.interval.is_point(1e-12));
    let x = t.psi(&face.interval.lower).unwrap();
    for (a, b) in x.coords().iter().zip([0.4, -0.2, -0.2]) {
        assert!((a - b).abs() < 1e-12, "{x}");
    }
}
