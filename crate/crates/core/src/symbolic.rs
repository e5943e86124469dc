//! Words over `{1..κ₀}` with no adjacent repeats, their necklaces, and the
//! counting identities of the full no-repeat shift.

use std::fmt;

use crate::error::{Error, Result};

/// Admissible linear word: consecutive symbols differ. Symbols are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.contains(&0) {
            return Err(Error::InvalidArgument("symbols are 1-based".into()));
        }
        if symbols.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "word {} repeats a symbol",
                format_word(&symbols)
            )));
        }
        Ok(Word(symbols))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_cyclically_admissible(&self) -> bool {
        is_cyclically_admissible(&self.0)
    }
}

/// Canonical identity of a primitive periodic orbit: the lexicographically
/// minimal rotation of a primitive, cyclically admissible word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Necklace {
    symbols: Vec<u8>,
}

impl Necklace {
    /// Canonicalizes any rotation of a primitive, cyclically admissible word.
    pub fn from_cyclic_word(symbols: &[u8]) -> Result<Self> {
        if symbols.len() < 2 {
            return Err(Error::InvalidArgument(
                "a periodic word needs at least two symbols".into(),
            ));
        }
        if symbols.contains(&0) {
            return Err(Error::InvalidArgument("symbols are 1-based".into()));
        }
        if !is_cyclically_admissible(symbols) {
            return Err(Error::InvalidArgument(format!(
                "{} is not cyclically admissible",
                format_word(symbols)
            )));
        }
        if primitive_period(symbols) != symbols.len() {
            return Err(Error::InvalidArgument(format!(
                "{} is a power of a shorter word",
                format_word(symbols)
            )));
        }
        Ok(Necklace {
            symbols: least_rotation(symbols),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_cyclic_word(&parse_word(text)?)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Primitive length `m = |γ|`.
    pub fn period(&self) -> usize {
        self.symbols.len()
    }

    pub fn reversed(&self) -> Necklace {
        let mut rev = self.symbols.clone();
        rev.reverse();
        Necklace {
            symbols: least_rotation(&rev),
        }
    }
}

impl fmt::Display for Necklace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(&self.symbols))
    }
}

/// Digits for alphabets up to 9, dot-separated otherwise.
pub fn format_word(symbols: &[u8]) -> String {
    if symbols.iter().all(|&s| s < 10) {
        symbols.iter().map(|s| char::from(b'0' + s)).collect()
    } else {
        symbols
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

pub fn parse_word(text: &str) -> Result<Vec<u8>> {
    let bad = || Error::InvalidArgument(format!("cannot parse word '{text}'"));
    if text.contains('.') {
        text.split('.')
            .map(|t| t.parse::<u8>().map_err(|_| bad()))
            .collect()
    } else {
        text.chars()
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
            .collect()
    }
}

pub fn is_cyclically_admissible(symbols: &[u8]) -> bool {
    let n = symbols.len();
    n >= 2 && (0..n).all(|j| symbols[j] != symbols[(j + 1) % n])
}

/// Smallest `p` dividing `len` with the word invariant under rotation by `p`.
pub fn primitive_period(symbols: &[u8]) -> usize {
    let n = symbols.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (0..n).all(|i| symbols[i] == symbols[(i + p) % n]))
        .unwrap_or(n)
}

/// Lexicographically least rotation (Duval factorization of the doubled word).
pub fn least_rotation(symbols: &[u8]) -> Vec<u8> {
    let n = symbols.len();
    if n == 0 {
        return Vec::new();
    }
    let doubled: Vec<u8> = symbols.iter().chain(symbols.iter()).copied().collect();
    let mut i = 0;
    let mut start = 0;
    while i < n {
        start = i;
        let mut j = i + 1;
        let mut k = i;
        while j < 2 * n && doubled[k] <= doubled[j] {
            if doubled[k] < doubled[j] {
                k = i;
            } else {
                k += 1;
            }
            j += 1;
        }
        while i <= k {
            i += j - k;
        }
    }
    doubled[start..start + n].to_vec()
}

/// κ₀ × κ₀ transition matrix of the no-repeat shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    size: usize,
}

impl AdjacencyMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        u8::from(i != j)
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Exact `trace(Aⁿ)` by repeated integer multiplication.
    pub fn trace_power(&self, n: u32) -> u128 {
        let k = self.size;
        let mut acc: Vec<Vec<u128>> = (0..k)
            .map(|i| (0..k).map(|j| u128::from(i == j)).collect())
            .collect();
        for _ in 0..n {
            let mut next = vec![vec![0u128; k]; k];
            for i in 0..k {
                for j in 0..k {
                    let mut s = 0u128;
                    for l in 0..k {
                        if l != j {
                            s = s
                                .checked_add(acc[i][l])
                                .expect("trace(A^n) overflows u128");
                        }
                    }
                    next[i][j] = s;
                }
            }
            acc = next;
        }
        (0..k).map(|i| acc[i][i]).sum()
    }
}

fn check_alphabet(kappa: usize) -> Result<()> {
    if kappa < 3 {
        return Err(Error::Config(format!(
            "at least 3 obstacles are required, got {kappa}"
        )));
    }
    Ok(())
}

pub fn adjacency_matrix(kappa: usize) -> Result<AdjacencyMatrix> {
    check_alphabet(kappa)?;
    Ok(AdjacencyMatrix { size: kappa })
}

/// `h₀ = log(κ₀ − 1)`, the Perron root of `A` in closed form.
pub fn map_entropy(kappa: usize) -> Result<f64> {
    check_alphabet(kappa)?;
    Ok(((kappa - 1) as f64).ln())
}

/// Perron root of `A` by power iteration, for cross-checking [`map_entropy`].
pub fn perron_root_power_iteration(kappa: usize, tol: f64, max_iter: usize) -> Result<f64> {
    check_alphabet(kappa)?;
    // start away from the Perron vector so the iteration actually converges
    let mut v: Vec<f64> = (0..kappa).map(|i| 1.0 + i as f64).collect();
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let total: f64 = v.iter().sum();
        let next: Vec<f64> = v.iter().map(|x| total - x).collect();
        let norm = next.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let prev_norm = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let new_estimate = norm / prev_norm;
        v = next.iter().map(|x| x / norm).collect();
        if (new_estimate - estimate).abs() < tol {
            return Ok(new_estimate);
        }
        estimate = new_estimate;
    }
    Ok(estimate)
}

/// Primitive, cyclically admissible necklaces of period exactly `m`, in
/// lexicographic order of their minimal representatives.
///
/// Fredricksen–Kessler–Maiorana generation of Lyndon words with the
/// no-repeat constraint pruned during the descent; the constraint is
/// prefix-closed, so pruning drops nothing admissible.
pub fn enumerate_necklaces(kappa: usize, m: usize) -> Vec<Necklace> {
    let mut out = Vec::new();
    if m < 2 || kappa < 2 {
        return out;
    }
    let mut word = vec![0u8; m + 1];
    lyndon_descend(1, 1, kappa as u8, m, &mut word, &mut out);
    out
}

fn lyndon_descend(t: usize, p: usize, kappa: u8, m: usize, a: &mut [u8], out: &mut Vec<Necklace>) {
    if t > m {
        if p == m && a[m] != a[1] {
            out.push(Necklace {
                symbols: a[1..=m].to_vec(),
            });
        }
        return;
    }
    let forced = if t > p { a[t - p] } else { 1 };
    let start = if t == 1 { 1 } else { forced };
    for sym in start..=kappa {
        if t > 1 && sym == a[t - 1] {
            continue;
        }
        a[t] = sym;
        let next_p = if t > 1 && sym == a[t - p] { p } else { t };
        lyndon_descend(t + 1, next_p, kappa, m, a, out);
    }
}

/// All necklaces with `2 ≤ m ≤ n_max`, ordered by `(m, representative)`.
pub fn enumerate_up_to(kappa: usize, n_max: usize) -> Vec<Necklace> {
    (2..=n_max)
        .flat_map(|m| enumerate_necklaces(kappa, m))
        .collect()
}

/// `trace(Aⁿ)`: number of points of period `n` of the shift.
pub fn count_periodic_points(kappa: usize, n: u32) -> Result<u128> {
    Ok(adjacency_matrix(kappa)?.trace_power(n))
}

fn mobius(mut n: u64) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of primitive necklaces of period `m` by Möbius inversion of
/// `Σ_{d|m} d·c_d = trace(A^m)`.
pub fn necklace_count(kappa: usize, m: usize) -> Result<u64> {
    check_alphabet(kappa)?;
    if m == 0 {
        return Ok(0);
    }
    let a = adjacency_matrix(kappa)?;
    let mut total: i128 = 0;
    for d in 1..=m {
        if m.is_multiple_of(d) {
            total += mobius((m / d) as u64) as i128 * a.trace_power(d as u32) as i128;
        }
    }
    Ok((total / m as i128) as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleCountRow {
    pub n: usize,
    /// Primitive necklaces of period exactly `n` (by enumeration).
    pub primitive: u64,
    pub divisor_sum: u128,
    pub trace: u128,
    pub identity_holds: bool,
    /// `#{γ : |γ| ≤ n}`.
    pub cumulative: u64,
    /// `e^{h₀}/(e^{h₀}−1) · e^{h₀ n}/n`.
    pub asymptotic: f64,
    pub ratio: f64,
}

/// Divisor identity and the cumulative-count asymptotic for `n = 1..=n_max`.
pub fn cycle_count_check(kappa: usize, n_max: usize) -> Result<Vec<CycleCountRow>> {
    check_alphabet(kappa)?;
    if n_max < 2 {
        return Err(Error::InvalidArgument("n_max must be at least 2".into()));
    }
    let a = adjacency_matrix(kappa)?;
    let h0 = map_entropy(kappa)?;
    let lambda = h0.exp();
    let counts: Vec<u64> = (0..=n_max)
        .map(|m| enumerate_necklaces(kappa, m).len() as u64)
        .collect();
    let mut cumulative = 0;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let divisor_sum: u128 = (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| d as u128 * counts[d] as u128)
            .sum();
        let trace = a.trace_power(n as u32);
        cumulative += counts[n];
        let asymptotic = lambda / (lambda - 1.0) * (h0 * n as f64).exp() / n as f64;
        rows.push(CycleCountRow {
            n,
            primitive: counts[n],
            divisor_sum,
            trace,
            identity_holds: divisor_sum == trace,
            cumulative,
            asymptotic,
            ratio: cumulative as f64 / asymptotic,
        });
    }
    Ok(rows)
}
