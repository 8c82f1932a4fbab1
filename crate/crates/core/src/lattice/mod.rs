//! Exact integer-lattice algebra.
//!
//! Lattices are represented by their row-style Hermite normal form: an
//! echelon basis with positive pivots and entries above each pivot reduced
//! into `[0, pivot)`. The form is canonical, so two lattices are equal iff
//! their bases are equal. Everything here is exact; no floating point.

mod matrix;
mod snf;

pub use matrix::{IntMat, RatMat};
pub use snf::{smith_normal_form, SmithDecomposition};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::repr;
use crate::setsys::IncidenceSystem;
use matrix::nearest_quotient;

/// Basis of an integer lattice in Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeBasis {
    basis: IntMat,
    pivots: Vec<usize>,
}

impl LatticeBasis {
    /// The basis rows (rank x ambient dimension).
    pub fn basis(&self) -> &IntMat {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }

    /// Pivot column of each basis row.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn require_full_rank(&self) -> Result<()> {
        if self.is_full_rank() {
            Ok(())
        } else {
            Err(Error::NotFullRank { rank: self.rank(), dim: self.dim() })
        }
    }

    /// Rational coordinates of `v` in this basis, or `None` when `v` lies
    /// outside the rational span.
    pub fn coordinates(&self, v: &[BigRational]) -> Result<Option<Vec<BigRational>>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        let mut rest = v.to_vec();
        let mut coords = Vec::with_capacity(self.rank());
        for (i, &p) in self.pivots.iter().enumerate() {
            let row = self.basis.row(i);
            let x = &rest[p] / BigRational::from_integer(row[p].clone());
            if !x.is_zero() {
                for (r, b) in rest.iter_mut().zip(row).skip(p) {
                    *r -= &x * BigRational::from_integer(b.clone());
                }
            }
            coords.push(x);
        }
        Ok(rest.iter().all(Zero::is_zero).then_some(coords))
    }
}

/// Hermite-form basis of the lattice spanned by the rows of `g`.
pub fn lattice_from_generators(g: &IntMat) -> LatticeBasis {
    let d = g.cols();
    let mut rows: Vec<Vec<BigInt>> =
        g.to_rows().into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..d {
        if top == rows.len() {
            break;
        }
        loop {
            // least nonzero magnitude in this column among the unfinished rows
            let best = (top..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .min_by(|&a, &b| rows[a][col].magnitude().cmp(rows[b][col].magnitude()));
            let Some(best) = best else { break };
            rows.swap(top, best);
            let (head, tail) = rows.split_at_mut(top + 1);
            let pivot_row = &head[top];
            let mut done = true;
            for r in tail.iter_mut() {
                if r[col].is_zero() {
                    continue;
                }
                let q = nearest_quotient(&r[col], &pivot_row[col]);
                for (x, y) in r.iter_mut().zip(pivot_row).skip(col) {
                    if !y.is_zero() {
                        *x -= &q * y;
                    }
                }
                done &= r[col].is_zero();
            }
            if done {
                break;
            }
        }
        if rows[top][col].is_zero() {
            continue;
        }
        if rows[top][col].is_negative() {
            for x in rows[top].iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        pivots.push(col);
        top += 1;
        // drop rows that became zero
        let mut i = top;
        while i < rows.len() {
            if rows[i].iter().all(Zero::is_zero) {
                rows.swap_remove(i);
            } else {
                i += 1;
            }
        }
    }
    rows.truncate(top);
    // reduce entries above each pivot into [0, pivot)
    for (i, &p) in pivots.iter().enumerate() {
        let (above, below) = rows.split_at_mut(i);
        let prow = &below[0];
        for r in above.iter_mut() {
            let q = r[p].div_floor(&prow[p]);
            if !q.is_zero() {
                for (x, y) in r.iter_mut().zip(prow).skip(p) {
                    *x -= &q * y;
                }
            }
        }
    }
    let basis = IntMat::from_rows(rows, d).expect("rows share the ambient dimension");
    LatticeBasis { basis, pivots }
}

/// The lattice spanned by the rows of an incidence system.
pub fn lattice_of(sys: &IncidenceSystem) -> LatticeBasis {
    let g = IntMat::from_rows(sys.to_bigint_rows(), sys.cols()).expect("rectangular system");
    lattice_from_generators(&g)
}

/// Whether `v` is an integer combination of the basis rows.
pub fn membership(lattice: &LatticeBasis, v: &[BigRational]) -> Result<bool> {
    Ok(lattice
        .coordinates(v)?
        .is_some_and(|c| c.iter().all(BigRational::is_integer)))
}

/// `sum_b phi(b)` scaled by `scale`, as a rational vector.
fn scaled_column_sums(sys: &IncidenceSystem, scale: &BigRational) -> Vec<BigRational> {
    sys.column_sums()
        .into_iter()
        .map(|s| BigRational::from_integer(BigInt::from(s)) * scale)
        .collect()
}

/// The minimal `c1 >= 1` with `(c1 / |B|) sum_b phi(b)` in the lattice.
pub fn divisibility_parameter(sys: &IncidenceSystem) -> Result<BigInt> {
    divisibility_parameter_in(sys, &lattice_of(sys))
}

/// [`divisibility_parameter`] with a precomputed lattice of `sys`.
pub fn divisibility_parameter_in(sys: &IncidenceSystem, lattice: &LatticeBasis) -> Result<BigInt> {
    lattice.require_full_rank()?;
    let scale = BigRational::new(BigInt::one(), BigInt::from(sys.rows()));
    let v = scaled_column_sums(sys, &scale);
    let coords = lattice.coordinates(&v)?.expect("full-rank lattice spans everything");
    Ok(coords.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom())))
}

/// Whether `(1/l) sum_b phi(b)` lies in the lattice spanned by the rows.
pub fn check_main_divisibility(sys: &IncidenceSystem, l: u64) -> Result<bool> {
    check_main_divisibility_in(sys, &lattice_of(sys), l)
}

pub fn check_main_divisibility_in(
    sys: &IncidenceSystem,
    lattice: &LatticeBasis,
    l: u64,
) -> Result<bool> {
    if l == 0 {
        return Err(Error::params("l must be at least 1"));
    }
    lattice.require_full_rank()?;
    let scale = BigRational::new(BigInt::one(), BigInt::from(l));
    membership(lattice, &scaled_column_sums(sys, &scale))
}

/// Absolute determinant of a full-rank lattice.
pub fn lattice_determinant(lattice: &LatticeBasis) -> Result<BigInt> {
    lattice.require_full_rank()?;
    // Hermite form is upper triangular with positive diagonal
    Ok((0..lattice.rank()).map(|i| lattice.basis[(i, i)].clone()).product())
}

/// Determinant of the (l-1)-fold product lattice, `det(L)^(l-1)`.
pub fn product_lattice_determinant(lattice: &LatticeBasis, l: u64) -> Result<BigInt> {
    if l == 0 {
        return Err(Error::params("l must be at least 1"));
    }
    let det = lattice_determinant(lattice)?;
    let exp = usize::try_from(l - 1).map_err(|_| Error::params("l too large"))?;
    Ok(num_traits::pow(det, exp))
}

/// Basis of the dual lattice: the rows of the inverse transpose of the
/// primal basis, so that `<dual_i, primal_j> = [i == j]`.
pub fn dual_basis(lattice: &LatticeBasis) -> Result<RatMat> {
    lattice.require_full_rank()?;
    let b = RatMat::from_int(lattice.basis());
    Ok(b.inverse()?.transpose())
}

/// Summary of the lattice spanned by a system, as printed by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LatticeReport {
    pub rank: usize,
    pub dim: usize,
    pub full_rank: bool,
    #[serde(with = "repr::big_mat")]
    pub basis: Vec<Vec<BigInt>>,
    #[serde(with = "repr::big_opt")]
    pub c1: Option<BigInt>,
    #[serde(with = "repr::big_opt")]
    pub determinant: Option<BigInt>,
    #[serde(with = "repr::rat_mat_opt")]
    pub dual: Option<Vec<Vec<BigRational>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub main_divisibility: Option<bool>,
    #[serde(with = "repr::big_opt", skip_serializing_if = "Option::is_none")]
    pub product_determinant: Option<BigInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub member: Option<bool>,
}

/// Rank, basis, c1, determinant and dual basis of the lattice of `sys`;
/// with `l`, also the main divisibility check and `det(L)^(l-1)`; with a
/// query vector, its membership. Quantities that need full rank are `None`
/// otherwise.
pub fn lattice_report(sys: &IncidenceSystem, l: Option<u64>, query: Option<&[BigRational]>) -> Result<LatticeReport> {
    let lat = lattice_of(sys);
    let full = lat.is_full_rank();
    let c1 = full.then(|| divisibility_parameter_in(sys, &lat)).transpose()?;
    let determinant = full.then(|| lattice_determinant(&lat)).transpose()?;
    let dual = full.then(|| dual_basis(&lat)).transpose()?.map(|d| d.to_rows());
    let (main_divisibility, product_determinant) = match l {
        Some(l) if full => (
            Some(check_main_divisibility_in(sys, &lat, l)?),
            Some(product_lattice_determinant(&lat, l)?),
        ),
        Some(0) => return Err(Error::params("l must be at least 1")),
        _ => (None, None),
    };
    let member = query.map(|v| membership(&lat, v)).transpose()?;
    Ok(LatticeReport {
        rank: lat.rank(),
        dim: lat.dim(),
        full_rank: full,
        basis: lat.basis().to_rows(),
        c1,
        determinant,
        dual,
        l,
        main_divisibility,
        product_determinant,
        member,
    })
}

/// The rank of the system over the rationals.
pub fn rank(sys: &IncidenceSystem) -> usize {
    lattice_of(sys).rank()
}
