//! Periodic reflecting rays as critical points of the cyclic length functional.
//!
//! Unknowns are the boundary angles `θ_j` of the reflection points. With
//! disks the gradient and Hessian of `L(θ) = Σ ‖x(θ_{j+1}) − x(θ_j)‖` are
//! closed-form, so a damped Newton iteration converges quadratically from
//! the center-bisector initial guess.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, ObstacleSystem, Point};
use crate::symbolic::{format_word, Necklace};

/// Residual allowed in the reflection law `u⁺ = u⁻ − 2⟨u⁻,ν⟩ν`.
pub const REFLECTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop when `‖∇L‖∞ < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Jittered restarts in addition to the deterministic start.
    pub restarts: usize,
    pub jitter: f64,
    /// Restarts must land within this distance of the primary solution.
    pub agreement: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 200,
            restarts: 5,
            jitter: 0.3,
            agreement: 1e-9,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn single_start() -> Self {
        SolverOptions {
            restarts: 0,
            ..Self::default()
        }
    }
}

/// A solved periodic reflecting ray.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub necklace: Necklace,
    pub angles: Vec<f64>,
    pub points: Vec<Point>,
    /// Primitive length `T_γ`.
    pub length: f64,
    /// `‖∇L‖∞` at the returned angles.
    pub gradient_residual: f64,
    pub solver_iterations: usize,
    /// Largest distance between the primary solution and any restart.
    pub restart_spread: f64,
    pub hessian_min_eigenvalue: f64,
}

impl Orbit {
    pub fn word(&self) -> &[u8] {
        self.necklace.symbols()
    }

    pub fn period(&self) -> usize {
        self.necklace.period()
    }

    /// Segment lengths `‖x_{j+1} − x_j‖`, cyclically.
    pub fn segment_lengths(&self) -> Vec<f64> {
        let m = self.points.len();
        (0..m)
            .map(|j| (self.points[(j + 1) % m] - self.points[j]).norm())
            .collect()
    }
}

/// Length, gradient and Hessian of the path functional over angles.
struct PathEval {
    length: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

/// Number of segments: `m` for a closed cycle, `m − 1` for an open path.
fn segment_count(m: usize, closed: bool) -> usize {
    if closed {
        m
    } else {
        m - 1
    }
}

fn points_for(system: &ObstacleSystem, word: &[u8], angles: &[f64]) -> Vec<Point> {
    word.iter()
        .zip(angles)
        .map(|(&s, &th)| system.disk(s).boundary_point(th).point)
        .collect()
}

fn path_length(system: &ObstacleSystem, word: &[u8], angles: &[f64], closed: bool) -> f64 {
    let m = word.len();
    let pts = points_for(system, word, angles);
    (0..segment_count(m, closed))
        .map(|j| (pts[(j + 1) % m] - pts[j]).norm())
        .sum()
}

fn evaluate(system: &ObstacleSystem, word: &[u8], angles: &[f64], closed: bool) -> PathEval {
    let m = word.len();
    let mut grad = DVector::zeros(m);
    let mut hess = DMatrix::zeros(m, m);
    let mut length = 0.0;
    let geo: Vec<(Point, Point, f64)> = word
        .iter()
        .zip(angles)
        .map(|(&s, &th)| {
            let d = system.disk(s);
            let (sn, cs) = th.sin_cos();
            let p = d.center + Point::new(cs, sn) * d.radius;
            // dx/dθ and d²x/dθ² = −(x − c)
            let tangent = Point::new(-sn, cs) * d.radius;
            (p, tangent, d.radius)
        })
        .collect();
    for j in 0..segment_count(m, closed) {
        let k = (j + 1) % m;
        let (a, ta, _) = geo[j];
        let (b, tb, _) = geo[k];
        let diff = b - a;
        let len = diff.norm();
        length += len;
        let u = diff / len;
        // projector onto the normal of the segment, divided by its length
        let q = |v: &Point, w: &Point| (v.dot(w) - v.dot(&u) * w.dot(&u)) / len;
        let a2 = -(a - system.disk(word[j]).center);
        let b2 = -(b - system.disk(word[k]).center);
        grad[j] -= u.dot(&ta);
        grad[k] += u.dot(&tb);
        hess[(j, j)] += q(&ta, &ta) - u.dot(&a2);
        hess[(k, k)] += q(&tb, &tb) + u.dot(&b2);
        let cross = -q(&ta, &tb);
        hess[(j, k)] += cross;
        hess[(k, j)] += cross;
    }
    PathEval { length, grad, hess }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Angle of the outward direction bisecting the directions to the
/// neighbouring centers (or pointing at the single neighbour).
fn initial_angles(system: &ObstacleSystem, word: &[u8], closed: bool) -> Vec<f64> {
    let m = word.len();
    (0..m)
        .map(|j| {
            let c = system.disk(word[j]).center;
            let prev = if closed || j > 0 {
                Some(system.disk(word[(j + m - 1) % m]).center)
            } else {
                None
            };
            let next = if closed || j + 1 < m {
                Some(system.disk(word[(j + 1) % m]).center)
            } else {
                None
            };
            let mut dir = Point::zeros();
            for n in [prev, next].into_iter().flatten() {
                let v = n - c;
                dir += v / v.norm();
            }
            if dir.norm() < 1e-12 {
                // antipodal neighbours cannot happen under (H); fall back to one of them
                let n = next.or(prev).expect("words have at least two symbols");
                dir = n - c;
            }
            dir.y.atan2(dir.x)
        })
        .collect()
}

struct Converged {
    angles: Vec<f64>,
    eval: PathEval,
    iterations: usize,
}

fn newton(
    system: &ObstacleSystem,
    word: &[u8],
    start: Vec<f64>,
    closed: bool,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<Converged, String> {
    let m = word.len();
    let mut angles = start;
    let mut eval = evaluate(system, word, &angles, closed);
    for iter in 0..max_iter {
        let gnorm = inf_norm(&eval.grad);
        if gnorm < tol {
            return Ok(Converged {
                angles,
                eval,
                iterations: iter,
            });
        }
        let direction = match eval.hess.clone().cholesky() {
            Some(ch) => -ch.solve(&eval.grad),
            // indefinite far from the minimum: steepest descent
            None => -eval.grad.clone(),
        };
        let slope = eval.grad.dot(&direction);
        let slack = 8.0 * f64::EPSILON * eval.length.abs();
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-14 {
            let trial: Vec<f64> = (0..m).map(|i| angles[i] + step * direction[i]).collect();
            let trial_len = path_length(system, word, &trial, closed);
            if trial_len <= eval.length + 1e-4 * step * slope + slack {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some(trial) => {
                angles = trial;
                eval = evaluate(system, word, &angles, closed);
            }
            None => {
                return Err(format!(
                    "line search stalled at iteration {iter} with |grad| = {gnorm:.3e}"
                ))
            }
        }
    }
    let gnorm = inf_norm(&eval.grad);
    if gnorm < tol {
        return Ok(Converged {
            angles,
            eval,
            iterations: max_iter,
        });
    }
    Err(format!(
        "no convergence after {max_iter} iterations (|grad| = {gnorm:.3e})"
    ))
}

fn wrap_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = theta.rem_euclid(two_pi);
    if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

/// Deterministic per-word seed so results do not depend on scheduling.
fn word_seed(seed: u64, word: &[u8]) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &s in word {
        h = (h ^ s as u64).wrapping_mul(0x0100_0000_01b3);
        h ^= h >> 29;
    }
    h
}

pub(crate) struct CycleSolution {
    pub angles: Vec<f64>,
    pub length: f64,
    pub residual: f64,
    pub iterations: usize,
    pub spread: f64,
    pub min_eig: f64,
}

/// Solves the periodic ray following an arbitrary cyclically admissible
/// word (not necessarily canonical or primitive).
pub(crate) fn solve_cyclic_word(
    system: &ObstacleSystem,
    word: &[u8],
    opts: &SolverOptions,
) -> std::result::Result<CycleSolution, String> {
    let start = initial_angles(system, word, true);
    let primary = newton(system, word, start.clone(), true, opts.tol, opts.max_iter)?;
    let pts = points_for(system, word, &primary.angles);
    let mut spread: f64 = 0.0;
    if opts.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(word_seed(opts.seed, word));
        for r in 0..opts.restarts {
            let jittered: Vec<f64> = start
                .iter()
                .map(|&t| t + rng.random_range(-opts.jitter..=opts.jitter))
                .collect();
            let alt = newton(system, word, jittered, true, opts.tol, opts.max_iter)
                .map_err(|e| format!("restart {r}: {e}"))?;
            let alt_pts = points_for(system, word, &alt.angles);
            let d = pts
                .iter()
                .zip(&alt_pts)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            spread = spread.max(d);
        }
        if spread >= opts.agreement {
            return Err(format!(
                "restarts disagree: max point distance {spread:.3e}"
            ));
        }
    }
    let min_eig = SymmetricEigen::new(primary.eval.hess.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let angles: Vec<f64> = primary.angles.iter().map(|&t| wrap_angle(t)).collect();
    let length = path_length(system, word, &angles, true);
    Ok(CycleSolution {
        angles,
        length,
        residual: inf_norm(&primary.eval.grad),
        iterations: primary.iterations,
        spread,
        min_eig,
    })
}

/// Finds the unique periodic reflecting ray following `necklace`.
pub fn solve_cycle(
    system: &ObstacleSystem,
    necklace: &Necklace,
    opts: &SolverOptions,
) -> Result<Orbit> {
    let word = necklace.symbols();
    if let Some(&bad) = word.iter().find(|&&s| s as usize > system.len()) {
        return Err(Error::InvalidArgument(format!(
            "symbol {bad} exceeds the number of obstacles {}",
            system.len()
        )));
    }
    let sol = solve_cyclic_word(system, word, opts).map_err(|reason| Error::Solver {
        word: necklace.to_string(),
        reason,
    })?;
    let min_eig = sol.min_eig;
    if min_eig <= 0.0 {
        log::warn!(
            "orbit {necklace}: Hessian of the length functional is not positive definite (min eigenvalue {min_eig:.3e})"
        );
    }
    let orbit = Orbit {
        necklace: necklace.clone(),
        points: points_for(system, word, &sol.angles),
        angles: sol.angles,
        length: sol.length,
        gradient_residual: sol.residual,
        solver_iterations: sol.iterations,
        restart_spread: sol.spread,
        hessian_min_eigenvalue: min_eig,
    };
    let report = verify_admissibility(system, &orbit);
    if !report.admissible {
        return Err(Error::Admissibility {
            word: necklace.to_string(),
            reason: format!(
                "clearance {:.3e}, reflection residual {:.3e}",
                report.worst_clearance, report.max_reflection_residual
            ),
        });
    }
    Ok(orbit)
}

/// Solves the open trajectory visiting `word` in order with free endpoints
/// (normal incidence at the first and last obstacle). Returns the points.
pub fn solve_open_path(system: &ObstacleSystem, word: &[u8], tol: f64) -> Result<Vec<Point>> {
    if word.len() < 2 || word.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!(
            "open path needs an admissible word of length ≥ 2, got {}",
            format_word(word)
        )));
    }
    let start = initial_angles(system, word, false);
    let conv = newton(system, word, start, false, tol, 200).map_err(|reason| Error::Solver {
        word: format_word(word),
        reason,
    })?;
    Ok(points_for(system, word, &conv.angles))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Smallest distance from a segment to a disk other than its endpoints' disks.
    pub worst_clearance: f64,
    pub max_reflection_residual: f64,
    /// Smallest `cos φ` of the incidence angles.
    pub min_cos_incidence: f64,
}

/// Checks the reflection law at every point and that every segment stays
/// outside all obstacles.
pub fn verify_admissibility(system: &ObstacleSystem, orbit: &Orbit) -> AdmissibilityReport {
    let word = orbit.word();
    let pts = &orbit.points;
    let m = pts.len();
    let mut worst_clearance = f64::INFINITY;
    let mut max_residual: f64 = 0.0;
    let mut min_cos = f64::INFINITY;
    for j in 0..m {
        let a = pts[j];
        let b = pts[(j + 1) % m];
        for (idx, disk) in system.disks().iter().enumerate() {
            let sym = (idx + 1) as u8;
            if sym == word[j] || sym == word[(j + 1) % m] {
                continue;
            }
            let clearance = point_segment_distance(&disk.center, &a, &b) - disk.radius;
            worst_clearance = worst_clearance.min(clearance);
        }
        let d = system.disk(word[j]);
        let normal = (a - d.center) / d.radius;
        let incoming = a - pts[(j + m - 1) % m];
        let incoming = incoming / incoming.norm();
        let outgoing = (b - a) / (b - a).norm();
        let reflected = incoming - normal * (2.0 * incoming.dot(&normal));
        let r = (outgoing - reflected).amax();
        max_residual = max_residual.max(r);
        min_cos = min_cos.min(outgoing.dot(&normal));
    }
    AdmissibilityReport {
        admissible: worst_clearance > 0.0 && max_residual < REFLECTION_TOLERANCE && min_cos > 0.0,
        worst_clearance,
        max_reflection_residual: max_residual,
        min_cos_incidence: min_cos,
    }
}

/// The `k`-fold iterate: repeated word and its period `d_γ = k·T_γ`.
pub fn iterate_orbit(orbit: &Orbit, k: usize) -> Result<(Vec<u8>, f64)> {
    if k < 1 {
        return Err(Error::InvalidArgument("iterate count must be at least 1".into()));
    }
    let word = orbit.word().repeat(k);
    Ok((word, k as f64 * orbit.length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Disk;
    use crate::symbolic::enumerate_up_to;
    use approx::assert_abs_diff_eq;

    fn solve(system: &ObstacleSystem, w: &str) -> Orbit {
        solve_cycle(system, &Necklace::parse(w).unwrap(), &SolverOptions::default()).unwrap()
    }

    /// Golden-section minimization of the D₃-symmetric 3-cycle length:
    /// each reflection point sits at angle `φ` off the inward direction.
    fn symmetric_three_cycle_oracle() -> f64 {
        let sys = ObstacleSystem::symmetric();
        let centroid = sys
            .disks()
            .iter()
            .fold(Point::zeros(), |acc, d| acc + d.center)
            / 3.0;
        let len = |phi: f64| {
            let pts: Vec<Point> = sys
                .disks()
                .iter()
                .map(|d| {
                    let v = centroid - d.center;
                    let base = v.y.atan2(v.x);
                    d.boundary_point(base + phi).point
                })
                .collect();
            (0..3).map(|j| (pts[(j + 1) % 3] - pts[j]).norm()).sum::<f64>()
        };
        let (mut lo, mut hi) = (-0.5f64, 0.5f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if len(a) < len(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        len(0.5 * (lo + hi))
    }

    /// Cyclic coordinate descent over the angle torus with golden-section
    /// line searches; independent of the Newton path.
    fn coordinate_descent_length(system: &ObstacleSystem, word: &[u8]) -> f64 {
        let mut th = initial_angles(system, word, true);
        let eval = |th: &[f64]| path_length(system, word, th, true);
        for _sweep in 0..400 {
            for j in 0..th.len() {
                let (mut lo, mut hi) = (th[j] - 0.4, th[j] + 0.4);
                let g = (5f64.sqrt() - 1.0) / 2.0;
                for _ in 0..90 {
                    let a = hi - g * (hi - lo);
                    let b = lo + g * (hi - lo);
                    let mut ta = th.clone();
                    ta[j] = a;
                    let mut tb = th.clone();
                    tb[j] = b;
                    if eval(&ta) < eval(&tb) {
                        hi = b;
                    } else {
                        lo = a;
                    }
                }
                th[j] = 0.5 * (lo + hi);
            }
        }
        eval(&th)
    }

    #[test]
    fn symmetric_two_cycle() {
        let sys = ObstacleSystem::symmetric();
        let o = solve(&sys, "12");
        assert_abs_diff_eq!(o.length, 8.0, epsilon = 1e-12);
        for p in &o.points {
            assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
        }
        assert!(o.gradient_residual < 1e-12);
    }

    #[test]
    fn symmetric_three_cycle() {
        let sys = ObstacleSystem::symmetric();
        let o = solve(&sys, "123");
        let closed = 18.0 - 3.0 * 3f64.sqrt();
        assert_abs_diff_eq!(o.length, closed, epsilon = 1e-9);
        assert_abs_diff_eq!(symmetric_three_cycle_oracle(), closed, epsilon = 1e-9);
    }

    #[test]
    fn four_cycle_matches_coordinate_descent() {
        let sys = ObstacleSystem::symmetric();
        let o = solve(&sys, "1213");
        let oracle = coordinate_descent_length(&sys, &[1, 2, 1, 3]);
        assert_abs_diff_eq!(o.length, oracle, epsilon = 1e-9);
    }

    #[test]
    fn points_lie_on_boundaries_and_length_is_consistent() {
        let sys = ObstacleSystem::default_asymmetric();
        for n in enumerate_up_to(3, 7) {
            let o = solve_cycle(&sys, &n, &SolverOptions::default()).unwrap();
            for (p, &s) in o.points.iter().zip(n.symbols()) {
                let d = sys.disk(s);
                assert!(((p - d.center).norm() - d.radius).abs() < 1e-12);
            }
            let total: f64 = o.segment_lengths().iter().sum();
            assert!((total - o.length).abs() <= 1e-12 * o.length);
            assert!(o.hessian_min_eigenvalue > 0.0);
        }
    }

    #[test]
    fn displaced_point_breaks_reflection_law() {
        let sys = ObstacleSystem::default_asymmetric();
        let mut o = solve(&sys, "123");
        assert!(verify_admissibility(&sys, &o).admissible);
        o.angles[1] += 0.1;
        o.points = points_for(&sys, o.word(), &o.angles);
        let rep = verify_admissibility(&sys, &o);
        assert!(!rep.admissible);
        assert!(rep.max_reflection_residual > REFLECTION_TOLERANCE);
    }

    #[test]
    fn two_bounce_clearance_is_positive() {
        let sys = ObstacleSystem::symmetric();
        let o = solve(&sys, "12");
        let rep = verify_admissibility(&sys, &o);
        assert!(rep.admissible);
        // the 2-cycle sits on the line y = 0; disk 3 is √27 − 1 away from it
        assert_abs_diff_eq!(rep.worst_clearance, 27f64.sqrt() - 1.0, epsilon = 1e-9);
    }

    #[test]
    fn iterates() {
        let sys = ObstacleSystem::symmetric();
        let o = solve(&sys, "12");
        let (w, d) = iterate_orbit(&o, 2).unwrap();
        assert_eq!(w, vec![1, 2, 1, 2]);
        assert_abs_diff_eq!(d, 16.0, epsilon = 1e-12);
        let (_, d3) = iterate_orbit(&o, 3).unwrap();
        assert!((d3 - 3.0 * o.length).abs() < 1e-14);
        let o3 = solve(&sys, "123");
        let (w1, d1) = iterate_orbit(&o3, 1).unwrap();
        assert_eq!(w1, vec![1, 2, 3]);
        assert_eq!(d1, o3.length);
        assert!(iterate_orbit(&o, 0).is_err());
    }

    #[test]
    fn rotation_and_reversal_invariance() {
        let sys = ObstacleSystem::default_asymmetric();
        let word = [1u8, 2, 1, 3, 2, 3];
        let base = solve_cyclic_word(&sys, &word, &SolverOptions::single_start()).unwrap();
        let rotated = [3u8, 2, 3, 1, 2, 1];
        let rot = solve_cyclic_word(&sys, &rotated, &SolverOptions::single_start()).unwrap();
        assert!((base.length - rot.length).abs() < 1e-12);
        let p0 = points_for(&sys, &word, &base.angles);
        let p1 = points_for(&sys, &rotated, &rot.angles);
        for p in &p0 {
            let nearest = p1.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9);
        }
        let n = Necklace::from_cyclic_word(&word).unwrap();
        let fwd = solve_cycle(&sys, &n, &SolverOptions::default()).unwrap();
        let rev = solve_cycle(&sys, &n.reversed(), &SolverOptions::default()).unwrap();
        assert!((fwd.length - rev.length).abs() < 1e-12);
    }

    #[test]
    fn first_variation_is_nonnegative() {
        let sys = ObstacleSystem::default_asymmetric();
        let o = solve(&sys, "12132");
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let th: Vec<f64> = o
                .angles
                .iter()
                .map(|&t| t + rng.random_range(-1e-4..=1e-4))
                .collect();
            let l = path_length(&sys, o.word(), &th, true);
            assert!(l > o.length - 1e-10);
        }
    }

    #[test]
    fn analytic_gradient_and_hessian_match_finite_differences() {
        let sys = ObstacleSystem::default_asymmetric();
        let word = [1u8, 2, 3, 2];
        let th = vec![0.3, 2.9, -1.4, 2.0];
        for closed in [true, false] {
            let e = evaluate(&sys, &word, &th, closed);
            let h = 1e-6;
            for i in 0..4 {
                let mut tp = th.clone();
                tp[i] += h;
                let mut tm = th.clone();
                tm[i] -= h;
                let fd = (path_length(&sys, &word, &tp, closed)
                    - path_length(&sys, &word, &tm, closed))
                    / (2.0 * h);
                assert!((fd - e.grad[i]).abs() < 1e-7);
                let gp = evaluate(&sys, &word, &tp, closed).grad;
                let gm = evaluate(&sys, &word, &tm, closed).grad;
                for k in 0..4 {
                    let fdh = (gp[k] - gm[k]) / (2.0 * h);
                    assert!((fdh - e.hess[(k, i)]).abs() < 1e-6, "closed={closed} ({k},{i})");
                }
            }
        }
    }

    #[test]
    fn open_path_meets_ends_normally() {
        let sys = ObstacleSystem::default_asymmetric();
        let pts = solve_open_path(&sys, &[1, 2, 3], 1e-12).unwrap();
        let d1 = sys.disk(1);
        let n0 = (pts[0] - d1.center) / d1.radius;
        let u0 = (pts[1] - pts[0]).normalize();
        assert!((n0 - u0).norm() < 1e-10);
        assert!(solve_open_path(&sys, &[1, 1], 1e-12).is_err());
    }

    #[test]
    fn symbol_out_of_range_is_rejected() {
        let sys = ObstacleSystem::new(vec![
            Disk::new(0.0, 0.0, 1.0),
            Disk::new(6.0, 0.0, 1.0),
            Disk::new(3.0, 5.0, 1.0),
        ])
        .unwrap();
        let n = Necklace::parse("14").unwrap();
        assert!(solve_cycle(&sys, &n, &SolverOptions::default()).is_err());
    }
}
