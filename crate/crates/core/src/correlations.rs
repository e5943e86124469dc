//! Pair correlations of the length spectrum.
//!
//! Pairs are ordered and include `γ = γ′`. Interval endpoints are closed,
//! widened by [`TIE_TOLERANCE`]; every counter here and any reference
//! double loop use the same predicate [`in_window`].

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::store::SpectrumDb;
use crate::symbolic::map_entropy;

pub const TIE_TOLERANCE: f64 = 1e-12;

/// Closed window `[lo − tol, hi + tol]` membership of a difference.
#[inline]
pub fn in_window(diff: f64, lo: f64, hi: f64) -> bool {
    diff >= lo - TIE_TOLERANCE && diff <= hi + TIE_TOLERANCE
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a < b) {
        return Err(Error::InvalidArgument("interval requires a < b".into()));
    }
    Ok(())
}

fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs
}

/// Ordered pairs `(x, y)` of the sorted slice with `x − y` in the closed window.
///
/// `x − y` is monotone in both arguments under rounding, so the two
/// boundaries move forward only and the count equals the double loop.
pub fn count_pairs_sorted(xs: &[f64], lo: f64, hi: f64) -> u64 {
    let (lo_t, hi_t) = (lo - TIE_TOLERANCE, hi + TIE_TOLERANCE);
    let mut first = 0; // first y with x − y ≤ hi_t
    let mut end = 0; // first y with x − y < lo_t
    let mut count = 0u64;
    for &x in xs {
        while first < xs.len() && x - xs[first] > hi_t {
            first += 1;
        }
        while end < xs.len() && x - xs[end] >= lo_t {
            end += 1;
        }
        count += end.saturating_sub(first) as u64;
    }
    count
}

/// Lengths with `|γ| ≤ n`, in ascending order.
pub fn lengths_up_to(db: &SpectrumDb, n: usize) -> Result<Vec<f64>> {
    db.require(n)?;
    Ok(sorted(db.up_to(n).map(|r| r.length).collect()))
}

/// Lengths with `|γ| = n`, in ascending order.
pub fn lengths_at(db: &SpectrumDb, n: usize) -> Result<Vec<f64>> {
    db.require(n)?;
    Ok(sorted(db.with_period(n).map(|r| r.length).collect()))
}

/// `π(n, [a, b])`.
pub fn pair_count_pi(db: &SpectrumDb, n: usize, a: f64, b: f64) -> Result<u64> {
    check_interval(a, b)?;
    Ok(count_pairs_sorted(&lengths_up_to(db, n)?, a, b))
}

/// `ω(n, I_n(z))` with `I_n(z) = [z + εa, z + εb]`.
pub fn window_count_omega(
    db: &SpectrumDb,
    n: usize,
    z: f64,
    eps: f64,
    a: f64,
    b: f64,
) -> Result<u64> {
    check_interval(a, b)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("window scale ε must be positive".into()));
    }
    Ok(count_pairs_sorted(&lengths_at(db, n)?, z + eps * a, z + eps * b))
}

/// A non-negative test function with support in `[−support, support]`.
pub trait TestFunction {
    fn eval(&self, t: f64) -> f64;
    fn support(&self) -> f64;
}

fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Smooth, even, equal to 1 on `[−ε₀c, ε₀c]`, decreasing to 0 at `±c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauBump {
    pub c: f64,
    pub eps0: f64,
}

impl PlateauBump {
    pub fn new(c: f64, eps0: f64) -> Result<Self> {
        if !(c > 0.0) || !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(Error::InvalidArgument(
                "plateau bump needs c > 0 and 0 < ε₀ < 1".into(),
            ));
        }
        Ok(Self { c, eps0 })
    }
}

impl TestFunction for PlateauBump {
    fn eval(&self, t: f64) -> f64 {
        let u = t.abs() / self.c;
        if u >= 1.0 {
            return 0.0;
        }
        smooth_step((1.0 - u) / (1.0 - self.eps0))
    }

    fn support(&self) -> f64 {
        self.c
    }
}

fn bump(x: f64, half_width: f64) -> f64 {
    let u = x / half_width;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Normalized self-convolution of a smooth bump on `(−s/2, s/2)`: support
/// `(−s, s)`, `χ(0) = 1`, and a non-negative Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutocorrelationBump {
    support: f64,
    norm: f64,
}

const QUADRATURE_INTERVALS: usize = 512;

impl AutocorrelationBump {
    pub fn new(support: f64) -> Result<Self> {
        if !(support > 0.0) {
            return Err(Error::InvalidArgument("support must be positive".into()));
        }
        let mut s = Self { support, norm: 1.0 };
        s.norm = s.raw(0.0);
        Ok(s)
    }

    // composite Simpson over the overlap of the two bump supports
    fn raw(&self, t: f64) -> f64 {
        let hw = self.support / 2.0;
        let t = t.abs();
        if t >= self.support {
            return 0.0;
        }
        let (lo, hi) = (t - hw, hw);
        let n = QUADRATURE_INTERVALS;
        let h = (hi - lo) / n as f64;
        let f = |x: f64| bump(x, hw) * bump(x - t, hw);
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + i as f64 * h);
        }
        acc * h / 3.0
    }
}

impl TestFunction for AutocorrelationBump {
    fn eval(&self, t: f64) -> f64 {
        (self.raw(t) / self.norm).max(0.0)
    }

    fn support(&self) -> f64 {
        self.support
    }
}

/// `factor · χ`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<F> {
    pub inner: F,
    pub factor: f64,
}

impl<F: TestFunction> TestFunction for Scaled<F> {
    fn eval(&self, t: f64) -> f64 {
        self.factor * self.inner.eval(t)
    }

    fn support(&self) -> f64 {
        self.inner.support()
    }
}

fn check_nonnegative(chi: &dyn TestFunction) -> Result<()> {
    let c = chi.support();
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument("test function needs a finite positive support".into()));
    }
    for i in 0..=1000 {
        let t = -c + 2.0 * c * i as f64 / 1000.0;
        if chi.eval(t) < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "test function is negative at t = {t}"
            )));
        }
    }
    Ok(())
}

/// `ρ_N(χ) = Σ_{|γ|,|γ′| ≤ N} χ(T_γ − T_γ′)`.
///
/// Terms are added in census-row order, so the value is bit-identical to
/// the plain double loop.
pub fn smoothed_correlation_rho(db: &SpectrumDb, n: usize, chi: &dyn TestFunction) -> Result<f64> {
    check_nonnegative(chi)?;
    db.require(n)?;
    let lengths: Vec<f64> = db.up_to(n).map(|r| r.length).collect();
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&i, &j| lengths[i].total_cmp(&lengths[j]).then(i.cmp(&j)));
    let sorted_len: Vec<f64> = order.iter().map(|&i| lengths[i]).collect();
    let c = chi.support();
    let mut total = 0.0;
    let mut partners = Vec::new();
    for &x in &lengths {
        let first = sorted_len.partition_point(|&y| x - y > c + TIE_TOLERANCE);
        let end = sorted_len.partition_point(|&y| x - y >= -c - TIE_TOLERANCE);
        partners.clear();
        partners.extend_from_slice(&order[first..end]);
        partners.sort_unstable();
        for &j in &partners {
            let v = chi.eval(x - lengths[j]);
            if v < 0.0 {
                return Err(Error::InvalidArgument("test function took a negative value".into()));
            }
            total += v;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub count: u64,
    pub predicted: f64,
    /// `count / predicted`; NaN when the prediction is 0.
    pub ratio: f64,
}

/// `(b−a)e^{2h₀}/(√(2π)β(e^{h₀}−1)²) · e^{2h₀n}/n^{5/2}`.
pub fn theorem1_prediction(kappa: usize, a: f64, b: f64, beta: f64, n: usize) -> Result<f64> {
    let h0 = map_entropy(kappa)?;
    let nf = n as f64;
    Ok((b - a) * (2.0 * h0).exp()
        / ((2.0 * std::f64::consts::PI).sqrt() * beta * (h0.exp() - 1.0).powi(2))
        * (2.0 * h0 * nf).exp()
        / nf.powf(2.5))
}

/// Census counts `π(n, [a, b])` against the asymptotic prediction.
/// `a = b` is allowed and counts exact ties only.
pub fn theorem1_report(
    db: &SpectrumDb,
    a: f64,
    b: f64,
    beta: f64,
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<CorrelationReport>> {
    if a > b {
        return Err(Error::InvalidArgument("interval requires a ≤ b".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument("β must be positive".into()));
    }
    n_range
        .map(|n| {
            let count = count_pairs_sorted(&lengths_up_to(db, n)?, a, b);
            let predicted = theorem1_prediction(db.kappa(), a, b, beta, n)?;
            let ratio = if predicted > 0.0 {
                count as f64 / predicted
            } else {
                f64::NAN
            };
            Ok(CorrelationReport {
                n,
                a,
                b,
                count,
                predicted,
                ratio,
            })
        })
        .collect()
}

/// Window scales `ε_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    Constant(f64),
    /// `c · n^{−p}`.
    Power { c: f64, p: f64 },
    /// `c · e^{−rate·n}`.
    Exponential { c: f64, rate: f64 },
}

impl EpsRule {
    pub fn at(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            EpsRule::Constant(c) => c,
            EpsRule::Power { c, p } => c * nf.powf(-p),
            EpsRule::Exponential { c, rate } => c * (-rate * nf).exp(),
        }
    }

    /// `limsup |log ε_n| / n`.
    pub fn exponential_rate(&self) -> f64 {
        match *self {
            EpsRule::Exponential { rate, .. } => rate.abs(),
            _ => 0.0,
        }
    }

    /// Rejects windows that shrink exponentially fast, or are not positive.
    pub fn validate(&self, n: usize, h0: f64) -> Result<()> {
        let eps = self.at(n);
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!("ε_{n} = {eps} is not a positive number")));
        }
        let rate = self.exponential_rate();
        if rate > 0.0 || eps.ln().abs() / n as f64 > h0 {
            return Err(Error::InvalidArgument(format!(
                "ε_n decays exponentially (rate {rate}); shrinking windows are only covered for subexponential ε_n, exponentially small windows are the open separation problem"
            )));
        }
        Ok(())
    }
}

impl std::str::FromStr for EpsRule {
    type Err = Error;

    /// `const:C`, `pow:C:P` or `exp:C:RATE`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::InvalidArgument(format!("bad ε rule '{s}'")))
        };
        match parts[0] {
            "const" if parts.len() == 2 => Ok(EpsRule::Constant(num(1)?)),
            "pow" if parts.len() == 3 => Ok(EpsRule::Power { c: num(1)?, p: num(2)? }),
            "exp" if parts.len() == 3 => Ok(EpsRule::Exponential { c: num(1)?, rate: num(2)? }),
            _ => Err(Error::InvalidArgument(format!(
                "bad ε rule '{s}' (expected const:C, pow:C:P or exp:C:RATE)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Row {
    pub z: f64,
    pub pi_count: u64,
    /// `|β n^{5/2}/(ε_n e^{2h₀n}) π − constant·profile|`.
    pub deviation: f64,
    pub omega_count: u64,
    /// `n^{5/2}/(ε_n e^{2h₀n}) ω`.
    pub omega_scaled: f64,
    /// `e^{−z²/2β²n}`.
    pub profile: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Report {
    pub n: usize,
    pub eps_n: f64,
    pub rows: Vec<Theorem2Row>,
    pub sup_deviation: f64,
    /// Squared correlation of the same-length counts with the Gaussian profile.
    pub profile_r2: f64,
}

pub fn pearson_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy * sxy / (sxx * syy)
}

/// Shrinking-window counts on a grid of centres `z`.
pub fn theorem2_report(
    db: &SpectrumDb,
    a: f64,
    b: f64,
    beta: f64,
    eps: &EpsRule,
    z_grid: &[f64],
    n: usize,
) -> Result<Theorem2Report> {
    check_interval(a, b)?;
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument("β must be positive".into()));
    }
    if z_grid.is_empty() {
        return Err(Error::InvalidArgument("z grid is empty".into()));
    }
    let h0 = map_entropy(db.kappa())?;
    eps.validate(n, h0)?;
    let eps_n = eps.at(n);
    let all = lengths_up_to(db, n)?;
    let same = lengths_at(db, n)?;
    let nf = n as f64;
    let scale = nf.powf(2.5) / (eps_n * (2.0 * h0 * nf).exp());
    let constant = (b - a) * (2.0 * h0).exp()
        / ((2.0 * std::f64::consts::PI).sqrt() * (h0.exp() - 1.0).powi(2));
    let rows: Vec<Theorem2Row> = z_grid
        .iter()
        .map(|&z| {
            let (lo, hi) = (z + eps_n * a, z + eps_n * b);
            let pi_count = count_pairs_sorted(&all, lo, hi);
            let omega_count = count_pairs_sorted(&same, lo, hi);
            let profile = (-z * z / (2.0 * beta * beta * nf)).exp();
            Theorem2Row {
                z,
                pi_count,
                deviation: (beta * scale * pi_count as f64 - constant * profile).abs(),
                omega_count,
                omega_scaled: scale * omega_count as f64,
                profile,
            }
        })
        .collect();
    let sup_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let xs: Vec<f64> = rows.iter().map(|r| r.omega_scaled).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.profile).collect();
    Ok(Theorem2Report {
        n,
        eps_n,
        rows,
        sup_deviation,
        profile_r2: pearson_r2(&xs, &ys),
    })
}

/// Kolmogorov–Smirnov distance of a sample to the standard normal.
pub fn ks_standard_normal(samples: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// KS distance of `(T_γ − T_γ′)/(β√n)` over same-length ordered pairs.
pub fn difference_ks(db: &SpectrumDb, n: usize, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument("β must be positive".into()));
    }
    let ls = lengths_at(db, n)?;
    let scale = 1.0 / (beta * (n as f64).sqrt());
    let mut diffs = Vec::with_capacity(ls.len() * ls.len());
    for x in &ls {
        for y in &ls {
            diffs.push((x - y) * scale);
        }
    }
    Ok(ks_standard_normal(&diffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ObstacleSystem;
    use crate::orbit_solver::SolverOptions;
    use crate::store::build_spectrum;

    fn brute(xs: &[f64], lo: f64, hi: f64) -> u64 {
        let mut c = 0;
        for x in xs {
            for y in xs {
                let d = x - y;
                if d >= lo - 1e-12 && d <= hi + 1e-12 {
                    c += 1;
                }
            }
        }
        c
    }

    fn db() -> SpectrumDb {
        let sys = ObstacleSystem::default_asymmetric();
        build_spectrum(&sys, 7, 2, &SolverOptions::single_start()).unwrap()
    }

    #[test]
    fn full_window_counts_all_pairs() {
        let db = db();
        let m = db.up_to(5).count() as u64;
        assert_eq!(pair_count_pi(&db, 5, -1e3, 1e3).unwrap(), m * m);
    }

    #[test]
    fn swap_symmetry() {
        let db = db();
        for (a, b) in [(0.1, 0.9), (-3.0, 1.0), (2.0, 7.5)] {
            assert_eq!(
                pair_count_pi(&db, 6, a, b).unwrap(),
                pair_count_pi(&db, 6, -b, -a).unwrap()
            );
        }
    }

    #[test]
    fn matches_double_loop_small() {
        let db = db();
        let ls = lengths_up_to(&db, 3).unwrap();
        assert_eq!(ls.len(), 5);
        for (a, b) in [(-0.5, 0.5), (0.0, 2.0), (-10.0, -1.0)] {
            assert_eq!(pair_count_pi(&db, 3, a, b).unwrap(), brute(&ls, a, b));
        }
    }

    #[test]
    fn ties_are_counted_once_at_endpoints() {
        let xs = [1.0, 2.0, 3.0];
        assert_eq!(count_pairs_sorted(&xs, 1.0, 1.0), 2);
        assert_eq!(count_pairs_sorted(&xs, 0.0, 1.0), 5);
        assert_eq!(count_pairs_sorted(&xs, 1.0, 2.0), 3);
    }

    #[test]
    fn reversed_interval_rejected() {
        let db = db();
        match pair_count_pi(&db, 4, 1.0, 0.0) {
            Err(Error::InvalidArgument(m)) => assert_eq!(m, "interval requires a < b"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn omega_census_squared() {
        let db = db();
        let c = db.with_period(6).count() as u64;
        assert_eq!(window_count_omega(&db, 6, 0.0, 1.0, -1e3, 1e3).unwrap(), c * c);
        assert_eq!(window_count_omega(&db, 6, 1e6, 1.0, -1.0, 1.0).unwrap(), 0);
    }

    #[test]
    fn rho_sandwich_and_linearity() {
        let db = db();
        let chi = PlateauBump::new(1.0, 0.25).unwrap();
        let rho = smoothed_correlation_rho(&db, 6, &chi).unwrap();
        let inner = pair_count_pi(&db, 6, -0.25, 0.25).unwrap() as f64;
        let outer = pair_count_pi(&db, 6, -1.0, 1.0).unwrap() as f64;
        assert!(inner <= rho && rho <= outer);
        let twice = smoothed_correlation_rho(&db, 6, &Scaled { inner: chi, factor: 2.0 }).unwrap();
        assert_eq!(twice, 2.0 * rho);
    }

    #[test]
    fn negative_test_function_rejected() {
        let db = db();
        let neg = Scaled {
            inner: PlateauBump::new(1.0, 0.5).unwrap(),
            factor: -1.0,
        };
        assert!(smoothed_correlation_rho(&db, 4, &neg).is_err());
    }

    #[test]
    fn autocorrelation_bump_shape() {
        let chi = AutocorrelationBump::new(1.0).unwrap();
        assert!((chi.eval(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(chi.eval(1.0), 0.0);
        assert_eq!(chi.eval(-1.2), 0.0);
        let mut prev = 1.0;
        for i in 1..100 {
            let v = chi.eval(i as f64 / 100.0);
            assert!(v <= prev && v >= 0.0);
            assert!((v - chi.eval(-(i as f64) / 100.0)).abs() < 1e-15);
            prev = v;
        }
    }

    #[test]
    fn autocorrelation_bump_positive_definite() {
        // Σ c_i c_j χ(t_i − t_j) ≥ 0
        let chi = AutocorrelationBump::new(1.0).unwrap();
        let ts: Vec<f64> = (0..12).map(|i| i as f64 * 0.07).collect();
        let cs: Vec<f64> = (0..12).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let mut q = 0.0;
        for i in 0..ts.len() {
            for j in 0..ts.len() {
                q += cs[i] * cs[j] * chi.eval(ts[i] - ts[j]);
            }
        }
        assert!(q >= -1e-9, "{q}");
    }

    #[test]
    fn prediction_constant_for_three_disks() {
        let p = theorem1_prediction(3, -0.5, 0.5, 0.7, 10).unwrap();
        let expect = 4.0 / ((2.0 * std::f64::consts::PI).sqrt() * 0.7) * 4f64.powi(10) / 10f64.powf(2.5);
        assert!((p - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn empty_interval_counts_ties() {
        let db = db();
        let rep = theorem1_report(&db, 0.0, 0.0, 1.0, 5..=5).unwrap();
        assert_eq!(rep[0].predicted, 0.0);
        // each orbit ties with itself and with its time reversal
        let expected: u64 = db
            .up_to(5)
            .map(|r| if r.necklace.reversed() == r.necklace { 1 } else { 2 })
            .sum();
        assert_eq!(rep[0].count, expected);
    }

    #[test]
    fn eps_rules() {
        let h0 = 2f64.ln();
        assert!(EpsRule::Power { c: 1.0, p: 2.0 }.validate(14, h0).is_ok());
        assert!(EpsRule::Exponential { c: 1.0, rate: 1.0 }.validate(14, h0).is_err());
        assert_eq!("pow:1:2".parse::<EpsRule>().unwrap(), EpsRule::Power { c: 1.0, p: 2.0 });
        assert!("pow:1".parse::<EpsRule>().is_err());
    }

    #[test]
    fn theorem2_pointwise_at_zero() {
        let db = db();
        let rep = theorem2_report(&db, -0.5, 0.5, 1.0, &EpsRule::Constant(0.1), &[0.0], 7).unwrap();
        let r = &rep.rows[0];
        assert_eq!(r.profile, 1.0);
        assert_eq!(r.pi_count, pair_count_pi(&db, 7, -0.05, 0.05).unwrap());
    }

    #[test]
    fn ks_of_normal_quantiles_is_small() {
        let normal = Normal::standard();
        let xs: Vec<f64> = (0..1000).map(|i| normal.inverse_cdf((i as f64 + 0.5) / 1000.0)).collect();
        let d = ks_standard_normal(&xs);
        assert!(d <= 0.5 / 1000.0 + 1e-9, "{d}");
    }
}
