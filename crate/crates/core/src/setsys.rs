//! Design incidence systems and closed-form parameter arithmetic.
//!
//! Elements of the ground set are 0-based here; file formats and the CLI
//! use 1-based elements. k-sets and t-sets are indexed in colexicographic
//! order, which fixes the row and column order of every incidence matrix.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::repr;

/// Binomial coefficient in arbitrary precision.
pub fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Binomial coefficient in `u64`, `None` on overflow.
pub fn binom_u64(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Parameters (n, k, t, l) of a large-set instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct InstanceParams {
    pub n: u32,
    pub k: u32,
    pub t: u32,
    pub l: u64,
}

impl InstanceParams {
    pub fn new(n: u32, k: u32, t: u32, l: u64) -> Result<Self> {
        validate_nkt(n, k, t)?;
        if l < 1 {
            return Err(Error::params("l must be at least 1"));
        }
        Ok(Self { n, k, t, l })
    }
}

pub(crate) fn validate_nkt(n: u32, k: u32, t: u32) -> Result<()> {
    if !(1 <= t && t < k && k <= n) {
        return Err(Error::params(format!(
            "require 1 <= t < k <= n, got n={n}, k={k}, t={t}"
        )));
    }
    Ok(())
}

/// Bijection between `0..C(n, k)` and the sorted k-subsets of `0..n` in
/// colexicographic order.
#[derive(Debug, Clone)]
pub struct KSetIndexer {
    n: u32,
    k: u32,
    count: u64,
    // table[m][i] = C(m, i) for m <= n, i <= k and m - i <= n - k
    table: Vec<Vec<u64>>,
}

impl KSetIndexer {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if k > n {
            return Err(Error::params(format!("k={k} exceeds n={n}")));
        }
        // rank and unrank only read C(m, i) with m - i <= n - k, and each of
        // those is at most C(n, k); the rest stay unset
        let gap = u64::from(n - k);
        let count = binom_u64(n.into(), k.into())
            .ok_or_else(|| Error::params(format!("C({n}, {k}) does not fit in 64 bits")))?;
        let table = (0..=u64::from(n))
            .map(|m| {
                (0..=u64::from(k))
                    .map(|i| if m <= gap + i { binom_u64(m, i).expect("bounded by C(n, k)") } else { u64::MAX })
                    .collect()
            })
            .collect();
        Ok(Self { n, k, count, table })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of k-subsets, C(n, k).
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Colex rank of a strictly increasing k-subset.
    pub fn rank(&self, set: &[u32]) -> Result<u64> {
        if set.len() != self.k as usize {
            return Err(Error::params(format!(
                "expected a {}-set, got {} elements",
                self.k,
                set.len()
            )));
        }
        let mut r = 0u64;
        for (i, &c) in set.iter().enumerate() {
            if c >= self.n || (i > 0 && set[i - 1] >= c) {
                return Err(Error::params(format!(
                    "set {set:?} is not a strictly increasing subset of 0..{}",
                    self.n
                )));
            }
            r += self.table[c as usize][i + 1];
        }
        Ok(r)
    }

    /// Rank without validation; `set` must be a strictly increasing k-subset.
    pub(crate) fn rank_unchecked(&self, set: &[u32]) -> u64 {
        set.iter()
            .enumerate()
            .map(|(i, &c)| self.table[c as usize][i + 1])
            .sum()
    }

    /// The k-subset with colex rank `r`.
    pub fn unrank(&self, r: u64) -> Result<Vec<u32>> {
        if r >= self.count {
            return Err(Error::IndexOutOfRange { index: r, count: self.count });
        }
        let mut out = vec![0u32; self.k as usize];
        let mut rem = r;
        let mut hi = self.n;
        for i in (1..=self.k as usize).rev() {
            // largest c < hi with C(c, i) <= rem
            let mut c = hi - 1;
            while self.table[c as usize][i] > rem {
                c -= 1;
            }
            out[i - 1] = c;
            rem -= self.table[c as usize][i];
            hi = c;
        }
        Ok(out)
    }

    /// Iterates over all k-subsets in colex order.
    pub fn iter(&self) -> KSetIter {
        KSetIter::new(self.n, self.k)
    }
}

/// Colex-order iterator over k-subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct KSetIter {
    n: u32,
    cur: Option<Vec<u32>>,
}

impl KSetIter {
    pub fn new(n: u32, k: u32) -> Self {
        let cur = (k <= n).then(|| (0..k).collect());
        Self { n, cur }
    }
}

impl Iterator for KSetIter {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let cur = self.cur.take()?;
        let k = cur.len();
        let mut next = cur.clone();
        let mut advanced = false;
        for i in 0..k {
            let limit = if i + 1 < k { next[i + 1] } else { self.n };
            if next[i] + 1 < limit {
                next[i] += 1;
                for (j, v) in next.iter_mut().enumerate().take(i) {
                    *v = j as u32;
                }
                advanced = true;
                break;
            }
        }
        if advanced {
            self.cur = Some(next);
        }
        Some(cur)
    }
}

/// Calls `f` with every `t`-subset of the sorted slice `set`.
pub(crate) fn for_each_subset(set: &[u32], t: usize, mut f: impl FnMut(&[u32])) {
    let k = set.len();
    if t > k {
        return;
    }
    let mut idx: Vec<usize> = (0..t).collect();
    let mut buf = vec![0u32; t];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = set[i];
        }
        f(&buf);
        // advance the index combination lexicographically
        let mut i = t;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < k - t + i {
                idx[i] += 1;
                for j in i + 1..t {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// (n, k, t) labelling of an incidence system built from set inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DesignShape {
    pub n: u32,
    pub k: u32,
    pub t: u32,
}

/// Size limits for dense incidence construction.
#[derive(Debug, Clone, Copy)]
pub struct IncidenceLimits {
    /// Maximum number of rows, C(n, k).
    pub max_blocks: u64,
    /// Maximum number of matrix entries, C(n, k) * C(n, t).
    pub max_entries: u64,
}

impl Default for IncidenceLimits {
    fn default() -> Self {
        Self { max_blocks: 10_000_000, max_entries: 100_000_000 }
    }
}

/// The map from B to integer vectors over A, stored as a dense row-major
/// matrix with one row per element of B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceSystem {
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
    shape: Option<DesignShape>,
}

impl IncidenceSystem {
    /// Wraps an explicit integer matrix (general-V mode).
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::params("matrix has no rows"));
        }
        let ncols = rows[0].len();
        if ncols == 0 {
            return Err(Error::params("matrix has no columns"));
        }
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::params(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Ok(Self { rows: nrows, cols: ncols, entries, shape: None })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> Option<DesignShape> {
        self.shape
    }

    pub fn entry(&self, b: usize, a: usize) -> i64 {
        self.entries[b * self.cols + a]
    }

    pub fn row(&self, b: usize) -> &[i64] {
        &self.entries[b * self.cols..(b + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[i64]> {
        self.entries.chunks_exact(self.cols)
    }

    /// Nonzero (column, value) pairs of row `b`.
    pub fn row_support(&self, b: usize) -> Vec<(usize, i64)> {
        self.row(b)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(a, &v)| (a, v))
            .collect()
    }

    pub fn row_sums(&self) -> Vec<i128> {
        self.row_iter()
            .map(|r| r.iter().map(|&v| i128::from(v)).sum())
            .collect()
    }

    /// Sum of all rows, the vector sum over b of phi(b).
    pub fn column_sums(&self) -> Vec<i128> {
        let mut sums = vec![0i128; self.cols];
        for row in self.row_iter() {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += i128::from(v);
            }
        }
        sums
    }

    pub fn max_abs_entry(&self) -> u64 {
        self.entries.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.row_iter().map(<[i64]>::to_vec).collect()
    }

    pub fn to_bigint_rows(&self) -> Vec<Vec<BigInt>> {
        self.row_iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }
}

/// Builds the t-set/k-set inclusion system with default size limits.
pub fn build_incidence(n: u32, k: u32, t: u32) -> Result<IncidenceSystem> {
    build_incidence_with(n, k, t, IncidenceLimits::default())
}

pub fn build_incidence_with(
    n: u32,
    k: u32,
    t: u32,
    limits: IncidenceLimits,
) -> Result<IncidenceSystem> {
    validate_nkt(n, k, t)?;
    let blocks = KSetIndexer::new(n, k)?;
    let tsets = KSetIndexer::new(n, t)?;
    let rows = blocks.count();
    if rows > limits.max_blocks {
        return Err(Error::CapExceeded {
            what: "C(n, k)",
            size: rows.to_string(),
            cap: limits.max_blocks.to_string(),
        });
    }
    let cols = tsets.count();
    let total = u128::from(rows) * u128::from(cols);
    if total > u128::from(limits.max_entries) {
        return Err(Error::CapExceeded {
            what: "incidence entries C(n, k) * C(n, t)",
            size: total.to_string(),
            cap: limits.max_entries.to_string(),
        });
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let mut entries = vec![0i64; rows * cols];
    for (r, block) in blocks.iter().enumerate() {
        let base = r * cols;
        for_each_subset(&block, t as usize, |sub| {
            entries[base + tsets.rank_unchecked(sub) as usize] = 1;
        });
    }
    Ok(IncidenceSystem { rows, cols, entries, shape: Some(DesignShape { n, k, t }) })
}

/// lambda = C(n-t, k-t) / l for a large set, when integral.
pub fn lambda_of(params: &InstanceParams) -> Result<BigUint> {
    let InstanceParams { n, k, t, l } = *params;
    validate_nkt(n, k, t)?;
    let c = binom(u64::from(n - t), u64::from(k - t));
    let (q, r) = c.div_rem(&BigUint::from(l));
    if !r.is_zero() {
        return Err(Error::NonIntegralLambda { l, binom: c });
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisibilityKind {
    Design,
    LargeSet,
}

/// One constraint `divisor | dividend` for a fixed s.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisibilityCheck {
    pub s: u32,
    #[serde(with = "repr::big")]
    pub divisor: BigUint,
    #[serde(with = "repr::big")]
    pub dividend: BigUint,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisibilityReport {
    pub kind: DivisibilityKind,
    pub n: u32,
    pub k: u32,
    pub t: u32,
    #[serde(with = "repr::big_opt", skip_serializing_if = "Option::is_none")]
    pub lambda: Option<BigUint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    pub checks: Vec<DivisibilityCheck>,
    pub pass: bool,
}

impl DivisibilityReport {
    /// First failing constraint, if any.
    pub fn first_failure(&self) -> Option<&DivisibilityCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

fn check(s: u32, divisor: BigUint, dividend: BigUint) -> DivisibilityCheck {
    let pass = (&dividend % &divisor).is_zero();
    DivisibilityCheck { s, divisor, dividend, pass }
}

/// C(k-s, t-s) | lambda * C(n-s, t-s) for s = 0..t-1.
pub fn check_design_divisibility(
    n: u32,
    k: u32,
    t: u32,
    lambda: &BigUint,
) -> Result<DivisibilityReport> {
    validate_nkt(n, k, t)?;
    if lambda.is_zero() {
        return Err(Error::params("lambda must be at least 1"));
    }
    let (n64, k64, t64) = (u64::from(n), u64::from(k), u64::from(t));
    let checks: Vec<_> = (0..t)
        .map(|s| {
            let s64 = u64::from(s);
            check(s, binom(k64 - s64, t64 - s64), lambda * binom(n64 - s64, t64 - s64))
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(DivisibilityReport {
        kind: DivisibilityKind::Design,
        n,
        k,
        t,
        lambda: Some(lambda.clone()),
        l: None,
        checks,
        pass,
    })
}

/// l * C(k-s, t-s) | C(n-t, k-t) * C(n-s, t-s) for s = 0..t.
pub fn check_largeset_divisibility(params: &InstanceParams) -> Result<DivisibilityReport> {
    let InstanceParams { n, k, t, l } = *params;
    validate_nkt(n, k, t)?;
    if l == 0 {
        return Err(Error::params("l must be at least 1"));
    }
    let (n64, k64, t64) = (u64::from(n), u64::from(k), u64::from(t));
    let top = binom(n64 - t64, k64 - t64);
    let checks: Vec<_> = (0..=t)
        .map(|s| {
            let s64 = u64::from(s);
            check(
                s,
                BigUint::from(l) * binom(k64 - s64, t64 - s64),
                &top * binom(n64 - s64, t64 - s64),
            )
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(DivisibilityReport {
        kind: DivisibilityKind::LargeSet,
        n,
        k,
        t,
        lambda: None,
        l: Some(l),
        checks,
        pass,
    })
}

/// Number of decimal digits at which e is rounded up in [`c3_design_bound`].
pub const E_DIGITS: u32 = 50;

/// e rounded up to [`E_DIGITS`] decimal places, as an exact rational.
pub fn e_upper() -> BigRational {
    // sum_{i<=60} 1/i! plus the tail bound 1/(60! * 60)
    let terms = 60u32;
    let mut sum = BigRational::zero();
    let mut fact = BigInt::one();
    for i in 0..=terms {
        if i > 0 {
            fact *= i;
        }
        sum += BigRational::new(BigInt::one(), fact.clone());
    }
    sum += BigRational::new(BigInt::one(), fact * terms);
    let scale = BigInt::from(10u32).pow(E_DIGITS);
    let scaled = (sum * BigRational::from_integer(scale.clone())).ceil();
    scaled / BigRational::from_integer(scale)
}

/// Upper bound ceil((4 e n / t)^t) on the V-perp boundedness parameter of the
/// design system, with e rounded upward.
pub fn c3_design_bound(n: u32, t: u32) -> Result<BigUint> {
    if !(1 <= t && t <= n) {
        return Err(Error::params(format!("require n >= t >= 1, got n={n}, t={t}")));
    }
    let base = e_upper() * BigRational::new(BigInt::from(4u64 * u64::from(n)), BigInt::from(t));
    let val = num_traits::pow(base, t as usize).ceil();
    Ok(val.to_integer().to_biguint().expect("positive bound"))
}

/// `c3_design_bound` as an f64, saturating to infinity for huge values.
pub fn c3_as_f64(c3: &BigUint) -> f64 {
    c3.to_f64().unwrap_or(f64::INFINITY)
}
