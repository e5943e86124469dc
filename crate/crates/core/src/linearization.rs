//! Transverse linearization of periodic rays.
//!
//! Jacobi coordinates (transverse offset, transverse slope) with the
//! dispersing sign convention: a diverging wavefront has curvature `B ≥ 0`,
//! free flight maps `B ↦ B/(1 + tB)` and a reflection on a boundary of
//! curvature `κ` at incidence `φ` maps `B ↦ B + 2κ/cos φ`.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::geometry::ObstacleSystem;
use crate::orbit_solver::Orbit;

/// Cosines of incidence below this are treated as tangential.
pub const TANGENCY_LIMIT: f64 = 1e-6;

/// Default length of the past window used to converge the unstable wavefront.
pub const DEFAULT_MEMORY: usize = 40;

/// Unit-determinant 2×2 transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiMatrix(pub Matrix2<f64>);

impl JacobiMatrix {
    pub fn identity() -> Self {
        JacobiMatrix(Matrix2::identity())
    }

    /// Free flight over length `t`.
    pub fn flight(t: f64) -> Self {
        JacobiMatrix(Matrix2::new(1.0, t, 0.0, 1.0))
    }

    /// Reflection on a boundary of curvature `kappa` at incidence cosine `cos_phi`.
    pub fn reflection(kappa: f64, cos_phi: f64) -> Self {
        JacobiMatrix(Matrix2::new(1.0, 0.0, 2.0 * kappa / cos_phi, 1.0))
    }

    /// `self` followed by `next` (i.e. `next · self`).
    pub fn then(&self, next: &JacobiMatrix) -> Self {
        JacobiMatrix(next.0 * self.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity();
        for _ in 0..k {
            acc = acc.then(self);
        }
        acc
    }

    /// `|det − 1|` scaled by the size of the entries: an accumulated product
    /// with entries of order `M` can only resolve its determinant to `ε·M²`.
    pub fn symplectic_defect(&self) -> f64 {
        let scale = self.0.amax().max(1.0);
        (self.det() - 1.0).abs() / (scale * scale)
    }

    /// `|det(I − P)|` computed directly from the entries.
    pub fn det_identity_minus(&self) -> f64 {
        (Matrix2::identity() - self.0).determinant().abs()
    }
}

/// Free-flight curvature evolution `B/(1 + tB)`.
pub fn propagate_curvature(b: f64, t: f64) -> Result<f64> {
    let denom = 1.0 + t * b;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Linearization(format!(
            "focusing singularity: 1 + tB = 0 at B = {b}, t = {t}"
        )));
    }
    Ok(b / denom)
}

/// Dispersing reflection `B + 2κ/cos φ`.
pub fn reflect_curvature(b: f64, kappa: f64, cos_phi: f64) -> Result<f64> {
    if !(cos_phi > 0.0) || cos_phi > 1.0 + 1e-12 {
        return Err(Error::Linearization(format!(
            "incidence cosine {cos_phi} outside (0, 1]"
        )));
    }
    Ok(b + 2.0 * kappa / cos_phi)
}

/// One reflection followed by the flight to the next reflection point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounce {
    pub curvature: f64,
    pub cos_incidence: f64,
    /// Length of the segment leaving this reflection point.
    pub flight: f64,
}

/// Bounce data along one period of `orbit`, starting at its first point.
pub fn bounces(system: &ObstacleSystem, orbit: &Orbit) -> Result<Vec<Bounce>> {
    let pts = &orbit.points;
    let m = pts.len();
    (0..m)
        .map(|j| {
            let d = system.disk(orbit.word()[j]);
            let normal = (pts[j] - d.center) / d.radius;
            let out = pts[(j + 1) % m] - pts[j];
            let flight = out.norm();
            let cos = (out / flight).dot(&normal);
            if cos < TANGENCY_LIMIT {
                return Err(Error::Linearization(format!(
                    "near-tangent reflection on {} at bounce {j} (cos φ = {cos:.3e})",
                    orbit.necklace
                )));
            }
            Ok(Bounce {
                curvature: d.curvature(),
                cos_incidence: cos,
                flight,
            })
        })
        .collect()
}

/// Per-bounce logarithmic expansion of the unstable wavefront at the last
/// bounce of `window`.
///
/// The wavefront is seeded with curvature `seed` just after the reflection
/// `memory` bounces back and pushed forward through the window; the seed's
/// influence decays geometrically.
pub fn g_weight(window: &[Bounce], memory: usize, seed: f64) -> Result<f64> {
    if window.len() < memory + 1 {
        return Err(Error::InvalidArgument(format!(
            "window of {} bounces is shorter than memory {memory} + 1",
            window.len()
        )));
    }
    let start = window.len() - 1 - memory;
    let mut b = seed;
    for i in (start + 1)..window.len() {
        let before = propagate_curvature(b, window[i - 1].flight)?;
        b = reflect_curvature(before, window[i].curvature, window[i].cos_incidence)?;
    }
    Ok((1.0 + window[window.len() - 1].flight * b).ln())
}

/// `g` at bounce `j` of a periodic orbit, using the orbit's own past.
pub fn g_weight_periodic(cycle: &[Bounce], j: usize, memory: usize, seed: f64) -> Result<f64> {
    let m = cycle.len();
    let window: Vec<Bounce> = (0..=memory)
        .map(|i| cycle[(j + m * (memory + 1) - memory + i) % m])
        .collect();
    g_weight(&window, memory, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityData {
    /// Full-period monodromy transverse to the flow.
    pub monodromy: JacobiMatrix,
    /// Expanding eigenvalue.
    pub lambda_u: f64,
    /// `|det(I − P_γ)| = |2 − tr P_γ|`.
    pub det_factor: f64,
    /// `Σ_j g_j` over one period.
    pub g_sum: f64,
}

/// `|det(I − P^k)|` from the expanding eigenvalue of a hyperbolic `P`
/// with positive eigenvalues.
pub fn iterate_det_factor(lambda_u: f64, k: u32) -> f64 {
    let lk = lambda_u.powi(k as i32);
    (lk + 1.0 / lk - 2.0).abs()
}

/// Monodromy, expansion rate and `|det(I − P_γ)|` of a solved orbit.
pub fn poincare_map(system: &ObstacleSystem, orbit: &Orbit) -> Result<StabilityData> {
    poincare_map_with_memory(system, orbit, DEFAULT_MEMORY)
}

pub fn poincare_map_with_memory(
    system: &ObstacleSystem,
    orbit: &Orbit,
    memory: usize,
) -> Result<StabilityData> {
    let cycle = bounces(system, orbit)?;
    let m = cycle.len();
    let mut p = JacobiMatrix::identity();
    for j in 0..m {
        let next = cycle[(j + 1) % m];
        p = p
            .then(&JacobiMatrix::flight(cycle[j].flight))
            .then(&JacobiMatrix::reflection(next.curvature, next.cos_incidence));
    }
    let tr = p.trace();
    if !(tr > 2.0) {
        return Err(Error::Linearization(format!(
            "orbit {} is not hyperbolic (trace {tr})",
            orbit.necklace
        )));
    }
    let lambda_u = 0.5 * (tr + ((tr - 2.0) * (tr + 2.0)).sqrt());
    let mut g_sum = 0.0;
    for j in 0..m {
        g_sum += g_weight_periodic(&cycle, j, memory, 0.0)?;
    }
    Ok(StabilityData {
        monodromy: p,
        lambda_u,
        det_factor: (2.0 - tr).abs(),
        g_sum,
    })
}
