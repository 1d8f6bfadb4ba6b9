//! Spectral scales of tuples of self-adjoint operators in a finite
//! direct sum of matrix algebras `⊕ M_{d_j}` with trace
//! `τ(a) = Σ c_j Tr(a_j)`.
//!
//! The scale of `(b_1, …, b_n)` is the convex body
//! `B = {(τ(a), τ(b_1 a), …, τ(b_n a)) : 0 ≤ a ≤ 1} ⊂ R^{n+1}`. Its faces are
//! images of order intervals of spectral projections; this crate computes
//! them, their normal cones and cut-downs, and reads off central
//! projections and commutativity from the geometry.

pub mod algebra;
pub mod error;
pub mod export;
pub mod faces;
pub mod fixtures;
pub mod io;
pub mod oracle;
pub mod scale;
pub mod spectral;
pub mod structure;

pub use algebra::{
    generated_algebra_basis, Block, FiniteAlgebra, GeneratedAlgebra, HermitianOperator, OperatorTuple, ScalePoint,
    Tolerances,
};
pub use error::{Error, Result};
pub use faces::{
    build_facial_complex, cut_down, face_dimension, face_from_complex, is_sharp, minimal_exposed_chain,
    minimal_exposed_face, normal_cone, CutDown, FaceHandle, FacialComplex, NormalConeSample,
};
pub use scale::{
    exposed_face, extreme_point_cloud, isotrace_slice, scale_dimension, support_value, DirectionSampling,
    ExposedFace, ExtremeCloud, IsotraceSlice, SupportHyperplane,
};
pub use spectral::{interval_projections, OrderInterval, SpectralPair, SpectrumInfo};
pub use structure::{
    abelian_verdict, analyze_face, detect_central, detect_gap, isolated_extremes_to_center, AbelianVerdict,
    CentralityReport, FaceReport, GapReport, StructureReport,
};
