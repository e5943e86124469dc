//! Separation diagnostics for the length spectrum: isolation intervals
//! `J(γ, δ)`, parity classes, the weighted sum over periodic rays and a
//! scan for rationally related lengths.
//!
//! A ray and its time reversal have the same length and the same
//! linearization. They are one geometric ray, so `Π` holds one entry per
//! unoriented ray and records the orientation count.

use crate::correlations::{TestFunction, TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::linearization::iterate_det_factor;
use crate::store::{SpectrumDb, SpectrumRow};
use crate::symbolic::Necklace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(period: usize) -> Self {
        if period.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayEntry {
    /// The lesser of the necklace and its reversal.
    pub necklace: Necklace,
    pub length: f64,
    pub lambda_u: f64,
    /// Census rows merged into this entry: 2 when both orientations are listed.
    pub orientations: usize,
}

impl RayEntry {
    pub fn period(&self) -> usize {
        self.necklace.period()
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.period())
    }
}

/// One element of `Ξ`: the `k`-th iterate of `Π[primitive]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period {
    pub length: f64,
    pub primitive: usize,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSets {
    /// `Π`, ascending.
    pub pi: Vec<RayEntry>,
    /// `Ξ` up to `cutoff`, ascending.
    pub xi: Vec<Period>,
    pub cutoff: f64,
}

fn canonical_pair(row: &SpectrumRow) -> Necklace {
    let rev = row.necklace.reversed();
    if rev.symbols() < row.necklace.symbols() {
        rev
    } else {
        row.necklace.clone()
    }
}

impl SpectrumSets {
    /// Builds `Π` from the census and `Ξ` up to `cutoff` (default `max Π + 2`).
    pub fn from_db(db: &SpectrumDb, cutoff: Option<f64>) -> Result<Self> {
        Self::from_rows(db.rows(), cutoff)
    }

    pub fn from_rows(rows: &[SpectrumRow], cutoff: Option<f64>) -> Result<Self> {
        let mut pi: Vec<RayEntry> = Vec::new();
        let mut seen: std::collections::HashMap<Necklace, usize> = std::collections::HashMap::new();
        for r in rows {
            let key = canonical_pair(r);
            match seen.get(&key) {
                Some(&i) => pi[i].orientations += 1,
                None => {
                    seen.insert(key.clone(), pi.len());
                    pi.push(RayEntry {
                        necklace: key,
                        length: r.length,
                        lambda_u: r.lambda_u,
                        orientations: 1,
                    });
                }
            }
        }
        pi.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.necklace.symbols().cmp(b.necklace.symbols())));
        let max_pi = pi.last().map(|e| e.length).unwrap_or(0.0);
        let cutoff = cutoff.unwrap_or(max_pi + 2.0);
        if !(cutoff > 0.0) {
            return Err(Error::InvalidArgument("cutoff must be positive".into()));
        }
        let mut xi = Vec::new();
        for (i, e) in pi.iter().enumerate() {
            let mut k = 1u32;
            while k as f64 * e.length <= cutoff {
                xi.push(Period {
                    length: k as f64 * e.length,
                    primitive: i,
                    k,
                });
                k += 1;
            }
        }
        xi.sort_by(|a, b| a.length.total_cmp(&b.length).then(a.primitive.cmp(&b.primitive)).then(a.k.cmp(&b.k)));
        Ok(Self { pi, xi, cutoff })
    }

    /// Keeps only the rays satisfying `keep`; `Ξ` is rebuilt.
    pub fn filtered(&self, keep: impl Fn(&RayEntry) -> bool) -> Self {
        let pi: Vec<RayEntry> = self.pi.iter().filter(|e| keep(e)).cloned().collect();
        let mut xi = Vec::new();
        for (i, e) in pi.iter().enumerate() {
            let mut k = 1u32;
            while k as f64 * e.length <= self.cutoff {
                xi.push(Period {
                    length: k as f64 * e.length,
                    primitive: i,
                    k,
                });
                k += 1;
            }
        }
        xi.sort_by(|a, b| a.length.total_cmp(&b.length).then(a.primitive.cmp(&b.primitive)).then(a.k.cmp(&b.k)));
        Self {
            pi,
            xi,
            cutoff: self.cutoff,
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.pi.iter().map(|e| e.length).collect()
    }
}

/// `[T − e^{−δT}, T + e^{−δT}]`.
pub fn interval_j(t: f64, delta: f64) -> (f64, f64) {
    let w = (-delta * t).exp();
    (t - w, t + w)
}

/// Indices of `Π` entries other than `i` whose lengths fall in `[lo, hi]`.
fn others_in(lengths: &[f64], i: usize, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
    let first = lengths.partition_point(|&x| x < lo - TIE_TOLERANCE);
    let end = lengths.partition_point(|&x| x <= hi + TIE_TOLERANCE);
    (first..end).filter(move |&j| j != i)
}

fn isolated(lengths: &[f64], i: usize, delta: f64) -> bool {
    let (lo, hi) = interval_j(lengths[i], delta);
    others_in(lengths, i, lo, hi).next().is_none()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SReport {
    pub delta: f64,
    pub isolated: usize,
    pub total: usize,
    pub fraction: f64,
}

/// Fraction of rays whose interval `J(γ, δ)` contains no other length.
pub fn check_s(sets: &SpectrumSets, delta: f64) -> SReport {
    let ls = sets.lengths();
    let isolated_count = (0..ls.len()).filter(|&i| isolated(&ls, i, delta)).count();
    SReport {
        delta,
        isolated: isolated_count,
        total: ls.len(),
        fraction: if ls.is_empty() {
            1.0
        } else {
            isolated_count as f64 / ls.len() as f64
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub count: usize,
    pub reference: f64,
    pub ratio: f64,
}

fn curve_point(x: f64, count: usize, reference: f64) -> CurvePoint {
    CurvePoint {
        x,
        count,
        reference,
        ratio: count as f64 / reference,
    }
}

/// `#{γ: T_γ ≤ x, J(γ,δ) ∩ Π = {T_γ}}` against `e^{hx/2}`; rays are
/// counted with their orientations.
pub fn check_s2(sets: &SpectrumSets, delta: f64, h: f64, x_grid: &[f64]) -> Vec<CurvePoint> {
    let ls = sets.lengths();
    let good: Vec<(f64, usize)> = (0..ls.len())
        .filter(|&i| isolated(&ls, i, delta))
        .map(|i| (ls[i], sets.pi[i].orientations))
        .collect();
    x_grid
        .iter()
        .map(|&x| {
            let count = good.iter().filter(|g| g.0 <= x).map(|g| g.1).sum();
            curve_point(x, count, (h / 2.0 * x).exp())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S3Point {
    pub x: f64,
    /// Even rays with `T ≤ x` and no odd length in `J(γ, δ)`, against `e^{hx/3}`.
    pub separated: CurvePoint,
    pub even: usize,
    pub odd: usize,
    /// `e^{hx}/(2hx)`.
    pub parity_reference: f64,
}

pub fn check_s3(sets: &SpectrumSets, delta: f64, h: f64, x_grid: &[f64]) -> Vec<S3Point> {
    let odd: Vec<f64> = sets
        .pi
        .iter()
        .filter(|e| e.parity() == Parity::Odd)
        .map(|e| e.length)
        .collect();
    let good: Vec<(f64, usize)> = sets
        .pi
        .iter()
        .filter(|e| e.parity() == Parity::Even)
        .filter(|e| {
            let (lo, hi) = interval_j(e.length, delta);
            let first = odd.partition_point(|&x| x < lo - TIE_TOLERANCE);
            let end = odd.partition_point(|&x| x <= hi + TIE_TOLERANCE);
            first == end
        })
        .map(|e| (e.length, e.orientations))
        .collect();
    x_grid
        .iter()
        .map(|&x| {
            let count_parity = |p: Parity| -> usize {
                sets.pi
                    .iter()
                    .filter(|e| e.parity() == p && e.length <= x)
                    .map(|e| e.orientations)
                    .sum()
            };
            S3Point {
                x,
                separated: curve_point(
                    x,
                    good.iter().filter(|g| g.0 <= x).map(|g| g.1).sum(),
                    (h / 3.0 * x).exp(),
                ),
                even: count_parity(Parity::Even),
                odd: count_parity(Parity::Odd),
                parity_reference: (h * x).exp() / (2.0 * h * x),
            }
        })
        .collect()
}

/// Equal to 1 on `[−c, c]`, 0 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowIndicator {
    pub c: f64,
}

impl TestFunction for WindowIndicator {
    fn eval(&self, t: f64) -> f64 {
        if t.abs() <= self.c {
            1.0
        } else {
            0.0
        }
    }

    fn support(&self) -> f64 {
        self.c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contributor {
    pub necklace: Necklace,
    pub k: u32,
    /// `d_γ = k·T`.
    pub d: f64,
    /// `(−1)^{k|γ|} T |det(I − P^k)|^{−1/2}`.
    pub weight: f64,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpcResult {
    pub j: usize,
    pub center: f64,
    pub value: f64,
    pub contributors: Vec<Contributor>,
}

impl MlpcResult {
    pub fn lone(&self) -> bool {
        self.contributors.len() == 1
    }
}

/// `Σ_γ (−1)^{|γ|} T_γ |det(I − P_γ)|^{−1/2} χ(e^{δT_j}(d_γ − T_j))` over
/// primitive and iterated rays, centred at `Π[j]`.
pub fn mlpc_sum(
    sets: &SpectrumSets,
    j: usize,
    delta: f64,
    chi: &dyn TestFunction,
) -> Result<MlpcResult> {
    let center = sets
        .pi
        .get(j)
        .ok_or_else(|| Error::InvalidArgument(format!("no ray with index {j}")))?
        .length;
    let mut res = mlpc_sum_at(sets, center, delta, chi)?;
    res.j = j;
    Ok(res)
}

/// The same sum with an arbitrary centre; `j` of the result is unused (0).
pub fn mlpc_sum_at(
    sets: &SpectrumSets,
    center: f64,
    delta: f64,
    chi: &dyn TestFunction,
) -> Result<MlpcResult> {
    let scale = (delta * center).exp();
    let reach = chi.support() / scale;
    let needed = center + reach.max(1.0);
    if sets.cutoff < needed {
        return Err(Error::InvalidArgument(format!(
            "iterate cutoff {} too small, need at least {needed}",
            sets.cutoff
        )));
    }
    let first = sets.xi.partition_point(|p| p.length < center - reach);
    let mut contributors = Vec::new();
    let mut value = 0.0;
    for p in sets.xi[first..].iter().take_while(|p| p.length <= center + reach) {
        let phi = chi.eval(scale * (p.length - center));
        if phi == 0.0 {
            continue;
        }
        let ray = &sets.pi[p.primitive];
        let sign = if (p.k as usize * ray.period()).is_multiple_of(2) { 1.0 } else { -1.0 };
        let weight = sign * ray.length / iterate_det_factor(ray.lambda_u, p.k).sqrt();
        let term = weight * phi;
        value += term;
        contributors.push(Contributor {
            necklace: ray.necklace.clone(),
            k: p.k,
            d: p.length,
            weight,
            term,
        });
    }
    Ok(MlpcResult {
        j: 0,
        center,
        value,
        contributors,
    })
}

/// Runs [`mlpc_sum`] centred at every ray whose window fits below the cutoff.
pub fn mlpc_scan(sets: &SpectrumSets, delta: f64, chi: &dyn TestFunction) -> Result<Vec<MlpcResult>> {
    (0..sets.pi.len())
        .filter(|&j| sets.pi[j].length + 1.0 <= sets.cutoff)
        .map(|j| mlpc_sum(sets, j, delta, chi))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFlag {
    pub first: Necklace,
    pub second: Necklace,
    pub p: u64,
    pub q: u64,
    /// `T_first / T_second`, at most 1.
    pub ratio: f64,
}

/// Continued-fraction convergents `p/q` of `x` with `q ≤ q_max`.
pub fn convergents(x: f64, q_max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e15 {
            break;
        }
        let a = a as u64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > q_max {
            break;
        }
        out.push((p2, q2));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - r.floor();
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

/// Pairs of distinct rays whose length ratio is within `tol` of some
/// `p/q` with `q ≤ q_max`. For `tol < 1/(2 q_max²)` any such fraction is a
/// convergent, so scanning convergents is exhaustive.
pub fn rational_independence_scan(sets: &SpectrumSets, q_max: u64, tol: f64) -> Result<Vec<RationalFlag>> {
    if !(tol > 0.0) || q_max == 0 {
        return Err(Error::InvalidArgument("need tol > 0 and q_max ≥ 1".into()));
    }
    let mut flags = Vec::new();
    for i in 0..sets.pi.len() {
        for j in (i + 1)..sets.pi.len() {
            let (a, b) = (&sets.pi[i], &sets.pi[j]);
            let ratio = a.length / b.length;
            let hit = convergents(ratio, q_max)
                .into_iter()
                .find(|&(p, q)| (ratio - p as f64 / q as f64).abs() < tol);
            if let Some((p, q)) = hit {
                flags.push(RationalFlag {
                    first: a.necklace.clone(),
                    second: b.necklace.clone(),
                    p,
                    q,
                    ratio,
                });
            }
        }
    }
    Ok(flags)
}
