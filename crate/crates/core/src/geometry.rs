//! Disk scatterers in the plane and the no-eclipse condition.
//!
//! Obstacles are disks; everything downstream only consumes them through
//! [`BoundaryPoint`] (position, outward normal, curvature), so other strictly
//! convex parametrizations can be slotted in later.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Strict margin used by the hull-intersection test.
pub const ECLIPSE_TOLERANCE: f64 = 1e-12;

pub type Point = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(x: f64, y: f64, radius: f64) -> Self {
        Disk {
            center: Vector2::new(x, y),
            radius,
        }
    }

    pub fn curvature(&self) -> f64 {
        1.0 / self.radius
    }

    /// Boundary point at polar angle `angle`.
    pub fn boundary_point(&self, angle: f64) -> BoundaryPoint {
        let normal = Vector2::new(angle.cos(), angle.sin());
        BoundaryPoint {
            point: self.center + normal * self.radius,
            normal,
            curvature: self.curvature(),
        }
    }

    /// Signed distance from `p` to the disk (negative inside).
    pub fn signed_distance(&self, p: &Point) -> f64 {
        (p - self.center).norm() - self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Point,
    /// Outward unit normal.
    pub normal: Point,
    pub curvature: f64,
}

/// Free-function form of [`Disk::boundary_point`].
pub fn boundary_point(disk: &Disk, angle: f64) -> BoundaryPoint {
    disk.boundary_point(angle)
}

/// Outcome of the no-eclipse test. Triples are 1-based `(i, j, l)` with
/// `i < j`: the hull of disks `i` and `j` meets disk `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<(usize, usize, usize)>,
    /// Smallest `dist(K_l, conv(K_i ∪ K_j))` over all triples.
    pub worst_margin: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_disks(disks: &[Disk]) -> Result<()> {
    if disks.len() < 3 {
        return Err(Error::Config(format!(
            "at least 3 disks are required, got {}",
            disks.len()
        )));
    }
    for (idx, d) in disks.iter().enumerate() {
        if !(d.radius > 0.0) || !d.radius.is_finite() {
            return Err(Error::Config(format!(
                "disk {} has non-positive radius {}",
                idx + 1,
                d.radius
            )));
        }
        if !d.center.x.is_finite() || !d.center.y.is_finite() {
            return Err(Error::Config(format!("disk {} has a non-finite center", idx + 1)));
        }
    }
    for i in 0..disks.len() {
        for j in (i + 1)..disks.len() {
            let gap = pair_gap(&disks[i], &disks[j]);
            if gap <= 0.0 {
                return Err(Error::Config(format!(
                    "disks {} and {} overlap or touch (gap {gap})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

fn pair_gap(a: &Disk, b: &Disk) -> f64 {
    (a.center - b.center).norm() - a.radius - b.radius
}

/// Distance from `p` to the convex hull of two disjoint disks.
///
/// The hull is the union of the interpolated disks
/// `B((1-λ)c_a + λc_b, (1-λ)r_a + λr_b)`, λ ∈ [0, 1], so the distance is the
/// minimum of a convex function of λ; its stationary point has a closed form.
pub fn distance_to_hull(p: &Point, a: &Disk, b: &Disk) -> f64 {
    let axis = b.center - a.center;
    let len = axis.norm();
    let dir = axis / len;
    let q = p - a.center;
    let along = q.dot(&dir);
    let across = (q.x * dir.y - q.y * dir.x).abs();
    let slope = (b.radius - a.radius) / len;
    let s_star = along + slope * across / (1.0 - slope * slope).sqrt();
    let s = s_star.clamp(0.0, len);
    let dist = ((along - s).powi(2) + across * across).sqrt() - a.radius - slope * s;
    dist.max(0.0)
}

/// Checks that no disk meets the convex hull of any other two.
pub fn validate_no_eclipse(disks: &[Disk]) -> Result<ValidationReport> {
    check_disks(disks)?;
    let n = disks.len();
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            for l in 0..n {
                if l == i || l == j {
                    continue;
                }
                let margin =
                    distance_to_hull(&disks[l].center, &disks[i], &disks[j]) - disks[l].radius;
                worst = worst.min(margin);
                if margin <= ECLIPSE_TOLERANCE {
                    violations.push((i + 1, j + 1, l + 1));
                }
            }
        }
    }
    Ok(ValidationReport {
        violations,
        worst_margin: worst,
    })
}

/// A validated obstacle set: at least three pairwise disjoint disks
/// satisfying the no-eclipse condition. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSystem {
    disks: Vec<Disk>,
    min_gap: f64,
}

impl ObstacleSystem {
    pub fn new(disks: Vec<Disk>) -> Result<Self> {
        let report = validate_no_eclipse(&disks)?;
        if let Some(&(i, j, l)) = report.violations.first() {
            return Err(Error::Eclipse { i, j, l });
        }
        let min_gap = min_separation_of(&disks);
        Ok(ObstacleSystem { disks, min_gap })
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    /// Number of obstacles κ₀.
    pub fn len(&self) -> usize {
        self.disks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty()
    }

    /// Disk for a 1-based symbol.
    pub fn disk(&self, symbol: u8) -> &Disk {
        &self.disks[symbol as usize - 1]
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// `dist(K_i, K_j)` for 1-based symbols.
    pub fn gap(&self, i: u8, j: u8) -> f64 {
        pair_gap(self.disk(i), self.disk(j))
    }

    /// Symmetric test geometry: three unit disks on an equilateral triangle of side 6.
    pub fn symmetric() -> Self {
        Self::equilateral(6.0, 1.0).expect("symmetric calibration geometry is valid")
    }

    /// Three disks of radius `radius` centered on an equilateral triangle with side `side`.
    pub fn equilateral(side: f64, radius: f64) -> Result<Self> {
        let h = side * 3f64.sqrt() / 2.0;
        Self::new(vec![
            Disk::new(0.0, 0.0, radius),
            Disk::new(side, 0.0, radius),
            Disk::new(side / 2.0, h, radius),
        ])
    }

    /// Default experimental geometry: radii 1.0/0.9/1.1 on a scalene triangle
    /// with gaps of roughly 0.5, 0.6 and 0.8. Tightly packed disks make
    /// orbit lengths far from additive in the segment types, and the narrow
    /// 1-2 gap keeps that bouncing family only mildly unstable.
    pub fn default_asymmetric() -> Self {
        Self::new(default_asymmetric_disks()).expect("default geometry is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: GeometryConfig = serde_json::from_str(text)?;
        Self::new(cfg.into_disks())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_config(&self) -> GeometryConfig {
        GeometryConfig {
            disks: self
                .disks
                .iter()
                .map(|d| DiskConfig {
                    center: [d.center.x, d.center.y],
                    radius: d.radius,
                })
                .collect(),
        }
    }

    /// SHA-256 over the disks printed with 17 significant digits.
    pub fn fingerprint(&self) -> String {
        let mut canon = String::new();
        for d in &self.disks {
            let _ = writeln!(
                canon,
                "{:.16e},{:.16e},{:.16e}",
                d.center.x, d.center.y, d.radius
            );
        }
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub(crate) fn default_asymmetric_disks() -> Vec<Disk> {
    vec![
        Disk::new(0.0, 0.0, 1.0),
        Disk::new(2.4, 0.0, 0.9),
        Disk::new(1.1, 2.47, 1.1),
    ]
}

fn min_separation_of(disks: &[Disk]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..disks.len() {
        for j in (i + 1)..disks.len() {
            best = best.min(pair_gap(&disks[i], &disks[j]));
        }
    }
    best
}

/// `min_{i≠j} (‖c_i − c_j‖ − r_i − r_j)`; errors if any pair overlaps.
pub fn min_separation(disks: &[Disk]) -> Result<f64> {
    check_disks(disks)?;
    Ok(min_separation_of(disks))
}

/// JSON layout `{ "disks": [ { "center": [x, y], "radius": r }, ... ] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub disks: Vec<DiskConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

impl GeometryConfig {
    pub fn into_disks(self) -> Vec<Disk> {
        self.disks
            .into_iter()
            .map(|d| Disk::new(d.center[0], d.center[1], d.radius))
            .collect()
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}
