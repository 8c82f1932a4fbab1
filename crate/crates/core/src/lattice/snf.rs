//! Smith normal form with unimodular transforms.
//!
//! Pivoting always takes the nonzero entry of least magnitude in the
//! remaining submatrix, ties broken by lowest row and then lowest column, so
//! the output is a deterministic function of the input.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::{nearest_quotient, IntMat};

/// `S = U * A * W` with `S` diagonal, `d1 | d2 | ...`, and `U`, `W` unimodular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMat,
    pub s: IntMat,
    pub w: IntMat,
}

impl SmithDecomposition {
    /// Diagonal of `S`, including trailing zeros.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols())).map(|i| self.s[(i, i)].clone()).collect()
    }

    /// The nonzero invariant factors.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.diagonal().into_iter().filter(|d| !d.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }

    /// Checks every defining property against the original matrix.
    pub fn verify(&self, a: &IntMat) -> bool {
        let Ok(ua) = self.u.mul(a) else { return false };
        let Ok(uaw) = ua.mul(&self.w) else { return false };
        if uaw != self.s || !self.s.is_diagonal() {
            return false;
        }
        let diag = self.diagonal();
        let nonneg = diag.iter().all(|d| !d.is_negative());
        let chain = diag.windows(2).all(|w| {
            if w[0].is_zero() {
                w[1].is_zero()
            } else {
                (&w[1] % &w[0]).is_zero()
            }
        });
        let unimodular = |m: &IntMat| m.determinant().map(|d| d.abs() == BigInt::from(1)).unwrap_or(false);
        nonneg && chain && unimodular(&self.u) && unimodular(&self.w)
    }
}

fn find_pivot(s: &IntMat, k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in k..s.rows() {
        for j in k..s.cols() {
            let v = &s[(i, j)];
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if s[(bi, bj)].magnitude() <= v.magnitude() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

/// Computes the Smith normal form of `a` together with its transforms.
pub fn smith_normal_form(a: &IntMat) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut s = a.clone();
    let mut u = IntMat::identity(m);
    let mut w = IntMat::identity(n);

    for k in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = find_pivot(&s, k) else {
                debug_assert!(verify_in_debug(a, &u, &s, &w));
                return SmithDecomposition { u, s, w };
            };
            s.swap_rows(k, pi);
            u.swap_rows(k, pi);
            s.swap_cols(k, pj);
            w.swap_cols(k, pj);

            let p = s[(k, k)].clone();
            let mut clean = true;
            for i in k + 1..m {
                if s[(i, k)].is_zero() {
                    continue;
                }
                let q = -nearest_quotient(&s[(i, k)], &p);
                s.add_row_multiple(i, k, &q);
                u.add_row_multiple(i, k, &q);
                clean &= s[(i, k)].is_zero();
            }
            for j in k + 1..n {
                if s[(k, j)].is_zero() {
                    continue;
                }
                let q = -nearest_quotient(&s[(k, j)], &p);
                s.add_col_multiple(j, k, &q);
                w.add_col_multiple(j, k, &q);
                clean &= s[(k, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // the pivot must divide the whole remaining block
            let offender = (k + 1..m).find(|&i| (k + 1..n).any(|j| !s[(i, j)].is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    let one = BigInt::from(1);
                    s.add_row_multiple(k, i, &one);
                    u.add_row_multiple(k, i, &one);
                }
                None => break,
            }
        }
        if s[(k, k)].is_negative() {
            s.negate_row(k);
            u.negate_row(k);
        }
    }
    debug_assert!(verify_in_debug(a, &u, &s, &w));
    SmithDecomposition { u, s, w }
}

#[cfg(debug_assertions)]
fn verify_in_debug(a: &IntMat, u: &IntMat, s: &IntMat, w: &IntMat) -> bool {
    // determinant checks are quadratic-ish in size; keep them to small inputs
    if a.rows() * a.cols() > 4096 {
        return u.mul(a).and_then(|x| x.mul(w)).map(|x| &x == s).unwrap_or(false);
    }
    SmithDecomposition { u: u.clone(), s: s.clone(), w: w.clone() }.verify(a)
}

#[cfg(not(debug_assertions))]
fn verify_in_debug(_: &IntMat, _: &IntMat, _: &IntMat, _: &IntMat) -> bool {
    true
}
