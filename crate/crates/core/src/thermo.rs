//! Pressure, entropy and variance from periodic-orbit sums, plus the
//! non-lattice diagnostics.
//!
//! On a period-n point the Birkhoff sum of the reflection-to-reflection
//! flight time equals the geometric length of the closed ray it codes, so
//! every partition sum is assembled directly from the census lengths.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ObstacleSystem;
use crate::orbit_solver::{solve_cyclic_word, solve_open_path, SolverOptions};
use crate::store::SpectrumDb;
use crate::symbolic::{format_word, map_entropy};

/// Largest finite-memory transfer matrix `complex_spectral_radius` will build.
pub const MAX_TRANSFER_DIMENSION: usize = 2048;

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + pairwise_sum(&terms.iter().map(|t| (t - max).exp()).collect::<Vec<_>>()).ln()
}

// fixed summation tree: the result depends only on term order
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `(multiplicity, f_n)` for every period-n point class: each primitive
/// m-necklace with `m | n` gives m points with `f_n = (n/m)·T`.
pub fn periodic_points(db: &SpectrumDb, n: usize) -> Result<Vec<(f64, f64)>> {
    if n < 1 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let missing: Vec<usize> = (2..=n).filter(|m| n.is_multiple_of(*m) && *m > db.n_max()).collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteSpectrum(format!(
            "period {n} needs word lengths {missing:?}, census stops at {}",
            db.n_max()
        )));
    }
    Ok(db
        .rows()
        .iter()
        .filter(|r| n.is_multiple_of(r.period()))
        .map(|r| (r.period() as f64, (n / r.period()) as f64 * r.length))
        .collect())
}

/// `log Σ_{σⁿx=x} e^{s·f_n(x)}`.
pub fn log_partition_sum(db: &SpectrumDb, n: usize, s: f64) -> Result<f64> {
    let pts = periodic_points(db, n)?;
    let terms: Vec<f64> = pts.iter().map(|(w, f)| w.ln() + s * f).collect();
    Ok(log_sum_exp(&terms))
}

/// `Σ_{σⁿx=x} e^{s·f_n(x)}`.
pub fn partition_sum(db: &SpectrumDb, n: usize, s: f64) -> Result<f64> {
    log_partition_sum(db, n, s).map(f64::exp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureEstimate {
    pub value: f64,
    /// Change of the estimate between `n_max − 1` and `n_max`.
    pub error: f64,
}

fn check_nmax(db: &SpectrumDb, n_max: usize) -> Result<()> {
    if n_max < 6 {
        return Err(Error::InvalidArgument(format!(
            "pressure needs n_max ≥ 6, got {n_max}"
        )));
    }
    db.require(n_max)
}

// Two-step ratio: a short two-cycle makes even and odd periods differ
// sharply, and a one-step ratio then oscillates with parity.
fn ratio_estimate(logz: impl Fn(usize) -> Result<f64>, n_max: usize) -> Result<PressureEstimate> {
    let z: Vec<f64> = (n_max - 3..=n_max).map(&logz).collect::<Result<_>>()?;
    let value = (z[3] - z[1]) / 2.0;
    let previous = (z[2] - z[0]) / 2.0;
    Ok(PressureEstimate {
        value,
        error: (value - previous).abs(),
    })
}

/// `P(s f̃) ≈ (log T_n(s) − log T_{n−2}(s))/2` at `n = n_max`.
pub fn pressure(db: &SpectrumDb, s: f64, n_max: usize) -> Result<PressureEstimate> {
    check_nmax(db, n_max)?;
    ratio_estimate(|n| log_partition_sum(db, n, s), n_max)
}

/// Pressure of `s·F` with `F(x, y) = f̃(x) − f̃(y)` on the product shift,
/// summed directly over pairs of period-n points.
pub fn product_pressure(db: &SpectrumDb, s: f64, n_max: usize) -> Result<PressureEstimate> {
    check_nmax(db, n_max)?;
    ratio_estimate(
        |n| {
            let pts = periodic_points(db, n)?;
            let mut terms = Vec::with_capacity(pts.len() * pts.len());
            for (wx, fx) in &pts {
                for (wy, fy) in &pts {
                    terms.push((wx * wy).ln() + s * (fx - fy));
                }
            }
            Ok(log_sum_exp(&terms))
        },
        n_max,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureCurve {
    pub samples: Vec<(f64, f64)>,
    pub n_used: usize,
    /// Largest per-sample extrapolation error.
    pub extrapolation_error: f64,
}

impl PressureCurve {
    /// Smallest normalized second difference over consecutive triples.
    pub fn min_second_difference(&self) -> f64 {
        self.samples
            .windows(3)
            .map(|w| {
                let (s0, p0) = w[0];
                let (s1, p1) = w[1];
                let (s2, p2) = w[2];
                // divided difference, valid for uneven grids
                2.0 * ((p2 - p1) / (s2 - s1) - (p1 - p0) / (s1 - s0)) / (s2 - s0)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_convex(&self) -> bool {
        self.samples.len() < 3 || self.min_second_difference() >= -1e-6
    }
}

pub fn pressure_curve(db: &SpectrumDb, s_grid: &[f64], n_max: usize) -> Result<PressureCurve> {
    let mut grid = s_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut samples = Vec::with_capacity(grid.len());
    let mut err: f64 = 0.0;
    for s in grid {
        let p = pressure(db, s, n_max)?;
        err = err.max(p.error);
        samples.push((s, p.value));
    }
    Ok(PressureCurve {
        samples,
        n_used: n_max,
        extrapolation_error: err,
    })
}

/// The flow entropy `h`, the root of `s ↦ P(−s f̃)`.
pub fn flow_entropy(db: &SpectrumDb, n_max: usize) -> Result<f64> {
    let p = |s: f64| pressure(db, -s, n_max).map(|e| e.value);
    let (mut lo, mut hi) = (0.0, 1.0);
    if p(lo)? <= 0.0 {
        return Err(Error::Bracket("pressure at s = 0 is not positive".into()));
    }
    let mut tries = 0;
    while p(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::Bracket("no sign change of the pressure found".into()));
        }
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if p(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEstimate {
    /// `2·P''(0)`, via `P(sF) = P(s f̃) + P(−s f̃)`.
    pub beta2_pressure: f64,
    /// `2·Var(f_n)/n` over the period-n points.
    pub beta2_orbit: f64,
    /// `|beta2_pressure − beta2_orbit| / max(·,·)`.
    pub agreement: f64,
    /// Symmetric-difference slope of `P(sF)` at 0.
    pub linear_coefficient: f64,
    /// Richardson correction size relative to the estimate; large values
    /// mean `ds` does not resolve the curvature.
    pub curvature_resolution: f64,
}

/// Variance of the equal-weight distribution of `f_n` over period-n points.
pub fn orbit_variance(db: &SpectrumDb, n: usize) -> Result<f64> {
    let pts = periodic_points(db, n)?;
    let total: f64 = pts.iter().map(|(w, _)| w).sum();
    let mean = pts.iter().map(|(w, f)| w * f).sum::<f64>() / total;
    Ok(pts.iter().map(|(w, f)| w * (f - mean).powi(2)).sum::<f64>() / total)
}

pub fn beta2_orbit(db: &SpectrumDb, n: usize) -> Result<f64> {
    Ok(2.0 * orbit_variance(db, n)? / n as f64)
}

pub fn variance_beta2(db: &SpectrumDb, n_max: usize, ds: f64) -> Result<VarianceEstimate> {
    if !(ds > 0.0) {
        return Err(Error::InvalidArgument("ds must be positive".into()));
    }
    let p = |s: f64| pressure(db, s, n_max).map(|e| e.value);
    let p0 = p(0.0)?;
    // P(sF) is even in s, so its second derivative is 2·P''(s f̃) at 0
    let second = |h: f64| -> Result<f64> { Ok((p(h)? - 2.0 * p0 + p(-h)?) / (h * h)) };
    let coarse = second(ds)?;
    let fine = second(ds / 2.0)?;
    let refined = (4.0 * fine - coarse) / 3.0;
    let curvature_resolution = ((fine - coarse) / refined).abs();
    if curvature_resolution > 0.1 {
        log::warn!("pressure step {ds} barely resolves the curvature (relative change {curvature_resolution:.2e})");
    }
    let beta2_pressure = 2.0 * refined;
    let beta2_orbit = beta2_orbit(db, n_max)?;
    let linear_coefficient = (product_pressure(db, ds, n_max)?.value
        - product_pressure(db, -ds, n_max)?.value)
        / (2.0 * ds);
    Ok(VarianceEstimate {
        beta2_pressure,
        beta2_orbit,
        agreement: (beta2_pressure - beta2_orbit).abs() / beta2_pressure.abs().max(beta2_orbit.abs()),
        linear_coefficient,
        curvature_resolution,
    })
}

/// The diagnostic word `(2,1)^{2k}(3,1)`.
pub fn lattice_word(k: usize) -> Vec<u8> {
    let mut w: Vec<u8> = std::iter::repeat_n([2u8, 1u8], 2 * k).flatten().collect();
    w.extend([3, 1]);
    w
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeEntry {
    pub k: usize,
    pub length: f64,
    /// `T_k − T_{k−1} − 4d`; absent for the first word.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeReport {
    /// `dist(K_1, K_2)`.
    pub d: f64,
    pub entries: Vec<LatticeEntry>,
    /// `δ` of the fit `gap_k ≈ C·δ^{2k}`; `None` with fewer than two positive gaps.
    pub delta: Option<f64>,
    pub fit_r2: Option<f64>,
    /// First word the solver could not handle, if any.
    pub failure: Option<String>,
}

impl LatticeReport {
    pub fn gaps(&self) -> Vec<(usize, f64)> {
        self.entries
            .iter()
            .filter_map(|e| e.gap.map(|g| (e.k, g)))
            .collect()
    }
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Solves the words `(2,1)^{2k}(3,1)` for `k = 1..=k_max` and fits the
/// decay of `T_k − T_{k−1} − 4d`.
pub fn lattice_diagnostic(
    system: &ObstacleSystem,
    k_max: usize,
    opts: &SolverOptions,
) -> Result<LatticeReport> {
    if k_max < 2 {
        return Err(Error::InvalidArgument("k_max must be at least 2".into()));
    }
    if system.len() < 3 {
        return Err(Error::Config("the diagnostic words need three obstacles".into()));
    }
    let d = system.gap(1, 2);
    let mut entries: Vec<LatticeEntry> = Vec::new();
    let mut failure = None;
    for k in 1..=k_max {
        let word = lattice_word(k);
        match solve_cyclic_word(system, &word, opts) {
            Ok(sol) => {
                let gap = entries.last().map(|p| sol.length - p.length - 4.0 * d);
                entries.push(LatticeEntry {
                    k,
                    length: sol.length,
                    gap,
                });
            }
            Err(reason) => {
                log::warn!("lattice word {} failed: {reason}", format_word(&word));
                failure = Some(format!("{}: {reason}", format_word(&word)));
                break;
            }
        }
    }
    let positive: Vec<(f64, f64)> = entries
        .iter()
        .filter_map(|e| e.gap.filter(|g| *g > 0.0).map(|g| (e.k as f64, g.ln())))
        .collect();
    let (delta, fit_r2) = if positive.len() >= 2 {
        let xs: Vec<f64> = positive.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = positive.iter().map(|p| p.1).collect();
        let (slope, _, r2) = linear_fit(&xs, &ys);
        (Some((slope / 2.0).exp()), Some(r2))
    } else {
        (None, None)
    };
    Ok(LatticeReport {
        d,
        entries,
        delta,
        fit_r2,
        failure,
    })
}

/// Admissible k-blocks in lexicographic order.
fn blocks(kappa: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = (1..=kappa as u8).map(|s| vec![s]).collect();
    for _ in 1..k {
        out = out
            .into_iter()
            .flat_map(|b| {
                let last = *b.last().unwrap();
                (1..=kappa as u8).filter(move |&s| s != last).map(move |s| {
                    let mut nb = b.clone();
                    nb.push(s);
                    nb
                })
            })
            .collect();
    }
    out
}

/// Segment lengths attached to each k-block: the middle segment of the
/// free-ended open ray through the block.
#[derive(Debug, Clone)]
pub struct BlockWeights {
    pub k: usize,
    pub blocks: Vec<Vec<u8>>,
    pub lengths: Vec<f64>,
}

pub fn block_weights(system: &ObstacleSystem, k: usize) -> Result<BlockWeights> {
    if k < 2 {
        return Err(Error::InvalidArgument("memory k must be at least 2".into()));
    }
    let kappa = system.len();
    let dim = (kappa as f64) * ((kappa - 1) as f64).powi(k as i32 - 1);
    if dim > MAX_TRANSFER_DIMENSION as f64 {
        return Err(Error::InvalidArgument(format!(
            "memory {k} gives a {dim} × {dim} matrix, above the budget {MAX_TRANSFER_DIMENSION}"
        )));
    }
    let blocks = blocks(kappa, k);
    let mid = (k - 1) / 2;
    let lengths = blocks
        .iter()
        .map(|b| {
            let pts = solve_open_path(system, b, 1e-13)?;
            Ok((pts[mid + 1] - pts[mid]).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(BlockWeights { k, blocks, lengths })
}

/// `e^{itf − h₀}` on allowed block transitions.
pub fn transfer_matrix(weights: &BlockWeights, t: f64, h0: f64) -> DMatrix<Complex64> {
    let nb = weights.blocks.len();
    let index: std::collections::HashMap<&[u8], usize> = weights
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.as_slice(), i))
        .collect();
    let mut m = DMatrix::<Complex64>::zeros(nb, nb);
    for (i, b) in weights.blocks.iter().enumerate() {
        let w = Complex64::from_polar((-h0).exp(), t * weights.lengths[i]);
        let kappa = weights.blocks.iter().map(|b| b[0]).max().unwrap_or(0);
        for s in 1..=kappa {
            if s == *b.last().unwrap() {
                continue;
            }
            let mut next = b[1..].to_vec();
            next.push(s);
            m[(i, index[next.as_slice()])] = w;
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRadius {
    pub t: f64,
    pub k: usize,
    /// From the complex Schur form.
    pub radius: f64,
    /// Growth rate of `‖Mⁿv‖` over the power-iteration run.
    pub power_estimate: f64,
    pub dimension: usize,
}

/// Growth rate `‖M^{2N}v‖/‖M^{N}v‖` to the power `1/N`, renormalizing every step.
pub fn power_iteration_radius(m: &DMatrix<Complex64>, steps: usize) -> f64 {
    let n = m.nrows();
    // a generic start vector avoids accidental orthogonality
    let mut v = nalgebra::DVector::<Complex64>::from_iterator(
        n,
        (0..n).map(|i| Complex64::new(1.0 + 0.1 * ((i * 7919) % 97) as f64 / 97.0, 0.0)),
    );
    let mut log_growth = 0.0;
    for step in 0..2 * steps {
        v = m * v;
        let norm = v.norm();
        if norm == 0.0 {
            return 0.0;
        }
        if step >= steps {
            log_growth += norm.ln();
        }
        v /= Complex64::new(norm, 0.0);
    }
    (log_growth / steps as f64).exp()
}

/// Spectral radius of the memory-k complex-weight transfer matrix.
pub fn complex_spectral_radius(
    system: &ObstacleSystem,
    t: f64,
    k: usize,
) -> Result<SpectralRadius> {
    let weights = block_weights(system, k)?;
    spectral_radius_of(&weights, t, map_entropy(system.len())?)
}

pub fn spectral_radius_of(weights: &BlockWeights, t: f64, h0: f64) -> Result<SpectralRadius> {
    let m = transfer_matrix(weights, t, h0);
    let dimension = m.nrows();
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-14, 10_000)
        .ok_or_else(|| Error::Linearization("Schur iteration did not converge".into()))?;
    let radius = schur
        .eigenvalues()
        .ok_or_else(|| Error::Linearization("Schur form is not triangular".into()))?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(SpectralRadius {
        t,
        k: weights.k,
        radius,
        power_estimate: power_iteration_radius(&m, 2000),
        dimension,
    })
}

/// Minimum over closed walks of length `m`, using at least three symbols,
/// of `Σ dist(K_{w_i}, K_{w_{i+1}})`.
fn min_walk_cost(system: &ObstacleSystem, m: usize) -> f64 {
    let kappa = system.len();
    let full = 1usize << kappa;
    let mut best = f64::INFINITY;
    for start in 0..kappa {
        // cost[v][mask]
        let mut cost = vec![vec![f64::INFINITY; full]; kappa];
        cost[start][1 << start] = 0.0;
        for _ in 0..m {
            let mut next = vec![vec![f64::INFINITY; full]; kappa];
            for v in 0..kappa {
                for mask in 0..full {
                    let c = cost[v][mask];
                    if !c.is_finite() {
                        continue;
                    }
                    for u in 0..kappa {
                        if u == v {
                            continue;
                        }
                        let nc = c + system.gap(v as u8 + 1, u as u8 + 1);
                        let nm = mask | (1 << u);
                        if nc < next[u][nm] {
                            next[u][nm] = nc;
                        }
                    }
                }
            }
            cost = next;
        }
        for mask in 0..full {
            if mask.count_ones() >= 3 {
                best = best.min(cost[start][mask]);
            }
        }
    }
    best
}

/// Largest `x` such that every primitive ray with `T ≤ x` has word length
/// at most `n`. Needs at most 12 obstacles.
pub fn census_horizon(system: &ObstacleSystem, n: usize) -> Result<f64> {
    if system.len() > 12 {
        return Err(Error::InvalidArgument("census horizon supports at most 12 obstacles".into()));
    }
    let step = system.min_gap();
    let mut best = f64::INFINITY;
    let mut m = n + 1;
    while (m as f64) * step < best {
        best = best.min(min_walk_cost(system, m));
        m += 1;
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingCheck {
    pub x: f64,
    pub count: usize,
    /// `e^{hx}/(hx)`.
    pub reference: f64,
    pub ratio: f64,
}

/// `#{γ: T_γ ≤ x}` against `e^{hx}/(hx)` at the census horizon.
pub fn counting_check(db: &SpectrumDb, system: &ObstacleSystem, h: f64) -> Result<CountingCheck> {
    let x = census_horizon(system, db.n_max())?;
    let count = db.rows().iter().filter(|r| r.length <= x).count();
    let reference = (h * x).exp() / (h * x);
    Ok(CountingCheck {
        x,
        count,
        reference,
        ratio: count as f64 / reference,
    })
}
