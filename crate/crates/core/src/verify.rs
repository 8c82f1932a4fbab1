//! Verification of designs, large sets and uniform subsets, plus the side
//! conditions on an incidence system (constants in the span, symmetry).
//!
//! Blocks are sorted 0-based arrays internally. Reports serialize sets
//! 1-based to match the file formats.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::IntMat;
use crate::repr;
use crate::setsys::{
    binom_u64, for_each_subset, lambda_of, validate_nkt, IncidenceSystem, InstanceParams,
    KSetIndexer,
};

/// A block collection claimed to be a t-(n, k, lambda) design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub n: u32,
    pub k: u32,
    pub t: u32,
    pub lambda: u64,
    pub blocks: Vec<Vec<u32>>,
}

impl Design {
    /// Validates block syntax: every block a strictly increasing k-subset of `0..n`.
    pub fn new(n: u32, k: u32, t: u32, lambda: u64, blocks: Vec<Vec<u32>>) -> Result<Self> {
        validate_nkt(n, k, t)?;
        check_blocks(n, k, &blocks)?;
        Ok(Self { n, k, t, lambda, blocks })
    }
}

/// A partition of the k-sets of `0..n` into `l` parts claimed to be a large set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LargeSetPartition {
    pub params: InstanceParams,
    pub parts: Vec<Vec<Vec<u32>>>,
}

impl LargeSetPartition {
    pub fn new(params: InstanceParams, parts: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        let InstanceParams { n, k, t, l } = params;
        validate_nkt(n, k, t)?;
        if parts.len() as u64 != l {
            return Err(Error::params(format!("expected {l} parts, got {}", parts.len())));
        }
        for part in &parts {
            check_blocks(n, k, part)?;
        }
        Ok(Self { params, parts })
    }

    /// Part `i` viewed as a design with lambda = C(n-t, k-t)/l.
    pub fn part_design(&self, i: usize) -> Result<Design> {
        let lambda = lambda_u64(&self.params)?;
        let InstanceParams { n, k, t, .. } = self.params;
        Ok(Design { n, k, t, lambda, blocks: self.parts[i].clone() })
    }
}

fn lambda_u64(params: &InstanceParams) -> Result<u64> {
    lambda_of(params)?
        .to_u64()
        .ok_or_else(|| Error::params("lambda does not fit in 64 bits"))
}

fn check_blocks(n: u32, k: u32, blocks: &[Vec<u32>]) -> Result<()> {
    for (index, b) in blocks.iter().enumerate() {
        if b.len() != k as usize {
            return Err(Error::MalformedBlock {
                index,
                reason: format!("has {} elements, expected {k}", b.len()),
            });
        }
        if let Some(&x) = b.iter().find(|&&x| x >= n) {
            return Err(Error::MalformedBlock {
                index,
                reason: format!("element {} outside 1..={n}", u64::from(x) + 1),
            });
        }
        if b.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedBlock {
                index,
                reason: "elements not strictly increasing".into(),
            });
        }
    }
    Ok(())
}

/// Why a verification failed. Only the first offending object is kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Counterexample {
    #[serde(rename_all = "camelCase")]
    DuplicateBlock {
        part: Option<usize>,
        #[serde(with = "repr::one_based")]
        block: Vec<u32>,
    },
    #[serde(rename_all = "camelCase")]
    WrongCount {
        part: Option<usize>,
        #[serde(with = "repr::one_based")]
        tset: Vec<u32>,
        count: u64,
        expected: u64,
    },
    #[serde(rename_all = "camelCase")]
    SharedBlock {
        parts: (usize, usize),
        #[serde(with = "repr::one_based")]
        block: Vec<u32>,
    },
    #[serde(rename_all = "camelCase")]
    MissingBlock {
        #[serde(with = "repr::one_based")]
        block: Vec<u32>,
    },
    /// Column `column` of |B|·sum_T phi differs from |T|·sum_B phi.
    #[serde(rename_all = "camelCase")]
    NonUniform {
        column: usize,
        #[serde(with = "repr::big")]
        subset_side: BigInt,
        #[serde(with = "repr::big")]
        full_side: BigInt,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub counterexample: Option<Counterexample>,
}

impl VerificationReport {
    fn ok() -> Self {
        Self { pass: true, counterexample: None }
    }

    fn fail(c: Counterexample) -> Self {
        Self { pass: false, counterexample: Some(c) }
    }
}

/// Number of blocks containing each t-subset of `0..n`, indexed by the
/// colex rank of the t-subset. Zero counts are included.
pub fn coverage_counts(n: u32, k: u32, t: u32, blocks: &[Vec<u32>]) -> Result<Vec<u64>> {
    check_blocks(n, k, blocks)?;
    let tsets = KSetIndexer::new(n, t)?;
    let mut counts = vec![0u64; tsets.count() as usize];
    for b in blocks {
        for_each_subset(b, t as usize, |a| counts[tsets.rank_unchecked(a) as usize] += 1);
    }
    Ok(counts)
}

fn design_report(d: &Design, part: Option<usize>) -> Result<VerificationReport> {
    let blocks = KSetIndexer::new(d.n, d.k)?;
    let mut seen = vec![false; blocks.count() as usize];
    for b in &d.blocks {
        let r = blocks.rank_unchecked(b) as usize;
        if std::mem::replace(&mut seen[r], true) {
            return Ok(VerificationReport::fail(Counterexample::DuplicateBlock {
                part,
                block: b.clone(),
            }));
        }
    }
    let counts = coverage_counts(d.n, d.k, d.t, &d.blocks)?;
    if let Some(i) = counts.iter().position(|&c| c != d.lambda) {
        let tset = KSetIndexer::new(d.n, d.t)?.unrank(i as u64)?;
        return Ok(VerificationReport::fail(Counterexample::WrongCount {
            part,
            tset,
            count: counts[i],
            expected: d.lambda,
        }));
    }
    Ok(VerificationReport::ok())
}

/// Passes iff the blocks are distinct and every t-set lies in exactly lambda blocks.
pub fn verify_design(design: &Design) -> Result<VerificationReport> {
    check_blocks(design.n, design.k, &design.blocks)?;
    design_report(design, None)
}

/// Passes iff the parts partition all k-sets and each part is a design with
/// lambda = C(n-t, k-t)/l.
pub fn verify_large_set(ls: &LargeSetPartition) -> Result<VerificationReport> {
    let lambda = lambda_u64(&ls.params)?;
    let InstanceParams { n, k, t, .. } = ls.params;
    for part in &ls.parts {
        check_blocks(n, k, part)?;
    }
    let blocks = KSetIndexer::new(n, k)?;
    let mut owner: Vec<Option<usize>> = vec![None; blocks.count() as usize];
    for (p, part) in ls.parts.iter().enumerate() {
        for b in part {
            let r = blocks.rank_unchecked(b) as usize;
            match owner[r] {
                Some(q) if q == p => {
                    return Ok(VerificationReport::fail(Counterexample::DuplicateBlock {
                        part: Some(p),
                        block: b.clone(),
                    }))
                }
                Some(q) => {
                    return Ok(VerificationReport::fail(Counterexample::SharedBlock {
                        parts: (q, p),
                        block: b.clone(),
                    }))
                }
                None => owner[r] = Some(p),
            }
        }
    }
    if let Some(r) = owner.iter().position(Option::is_none) {
        return Ok(VerificationReport::fail(Counterexample::MissingBlock {
            block: blocks.unrank(r as u64)?,
        }));
    }
    for (p, part) in ls.parts.iter().enumerate() {
        let d = Design { n, k, t, lambda, blocks: part.clone() };
        let rep = design_report(&d, Some(p))?;
        if !rep.pass {
            return Ok(rep);
        }
    }
    Ok(VerificationReport::ok())
}

/// Checks `|B| * sum_{b in T} phi(b) == |T| * sum_{b in B} phi(b)` exactly.
/// `subset` holds row indices of `sys`.
pub fn verify_uniform_subset(subset: &[usize], sys: &IncidenceSystem) -> Result<VerificationReport> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut seen = vec![false; sys.rows()];
    for &b in subset {
        if b >= sys.rows() {
            return Err(Error::InvalidSubset(format!(
                "row {b} out of range (system has {} rows)",
                sys.rows()
            )));
        }
        if std::mem::replace(&mut seen[b], true) {
            return Err(Error::InvalidSubset(format!("row {b} listed twice")));
        }
    }
    let mut sub = vec![BigInt::from(0); sys.cols()];
    for &b in subset {
        for (s, &v) in sub.iter_mut().zip(sys.row(b)) {
            *s += v;
        }
    }
    let total = sys.column_sums();
    let nb = BigInt::from(sys.rows());
    let nt = BigInt::from(subset.len());
    for (a, (s, tot)) in sub.iter().zip(&total).enumerate() {
        let lhs = &nb * s;
        let rhs = &nt * BigInt::from(*tot);
        if lhs != rhs {
            return Ok(VerificationReport::fail(Counterexample::NonUniform {
                column: a,
                subset_side: lhs,
                full_side: rhs,
            }));
        }
    }
    Ok(VerificationReport::ok())
}

/// Row indices of `blocks` in a design system of shape (n, k, *).
pub fn block_rows(n: u32, k: u32, blocks: &[Vec<u32>]) -> Result<Vec<usize>> {
    check_blocks(n, k, blocks)?;
    let idx = KSetIndexer::new(n, k)?;
    Ok(blocks.iter().map(|b| idx.rank_unchecked(b) as usize).collect())
}

/// True iff the all-ones function on B lies in the rational column span of the system.
#[allow(non_snake_case)]
pub fn check_constants_in_V(sys: &IncidenceSystem) -> bool {
    let rows = sys.to_bigint_rows();
    let base = IntMat::from_rows(rows.clone(), sys.cols()).map(|m| m.rank());
    let augmented = rows
        .into_iter()
        .map(|mut r| {
            r.push(BigInt::from(1));
            r
        })
        .collect();
    let aug = IntMat::from_rows(augmented, sys.cols() + 1).map(|m| m.rank());
    matches!((base, aug), (Ok(a), Ok(b)) if a == b)
}

fn check_permutation(perm: &[u32], n: u32) -> Result<()> {
    if perm.len() != n as usize {
        return Err(Error::InvalidPermutation(format!(
            "has {} entries, expected {n}",
            perm.len()
        )));
    }
    let mut hit = vec![false; n as usize];
    for &p in perm {
        if p >= n || std::mem::replace(&mut hit[p as usize], true) {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection")));
        }
    }
    Ok(())
}

fn image(perm: &[u32], set: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = set.iter().map(|&x| perm[x as usize]).collect();
    out.sort_unstable();
    out
}

/// Certifies that the permutation `perm` of the ground set (0-based,
/// `perm[i]` is the image of `i`) preserves the design system: the induced
/// permutation of B carries column `a` onto column `perm(a)`.
pub fn check_symmetry_action(perm: &[u32], sys: &IncidenceSystem) -> Result<bool> {
    let shape = sys.shape().ok_or(Error::NotDesignSystem)?;
    check_permutation(perm, shape.n)?;
    let blocks = KSetIndexer::new(shape.n, shape.k)?;
    let tsets = KSetIndexer::new(shape.n, shape.t)?;
    let col_map: Vec<usize> =
        tsets.iter().map(|a| tsets.rank_unchecked(&image(perm, &a)) as usize).collect();
    for (b, block) in blocks.iter().enumerate() {
        let pb = blocks.rank_unchecked(&image(perm, &block)) as usize;
        let src = sys.row(b);
        let dst = sys.row(pb);
        if (0..sys.cols()).any(|a| src[a] != dst[col_map[a]]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A permutation of `0..n` sending the sorted block `from` onto `to`
/// elementwise, and the complement of `from` onto the complement of `to`.
pub fn transitivity_witness(n: u32, from: &[u32], to: &[u32]) -> Result<Vec<u32>> {
    check_blocks(n, from.len() as u32, &[from.to_vec(), to.to_vec()])?;
    let rest = |s: &[u32]| (0..n).filter(|x| !s.contains(x)).collect::<Vec<_>>();
    let mut perm = vec![0u32; n as usize];
    for (&x, &y) in from.iter().zip(to) {
        perm[x as usize] = y;
    }
    for (x, y) in rest(from).into_iter().zip(rest(to)) {
        perm[x as usize] = y;
    }
    Ok(perm)
}

/// C(n-t, k-t), the lambda of the complete design.
pub fn complete_lambda(n: u32, k: u32, t: u32) -> Option<u64> {
    binom_u64(u64::from(n - t), u64::from(k - t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setsys::build_incidence;
    use proptest::prelude::*;

    fn fano() -> Vec<Vec<u32>> {
        // 1-based {124,235,346,457,561,672,713}
        let raw = [[1, 2, 4], [2, 3, 5], [3, 4, 6], [4, 5, 7], [5, 6, 1], [6, 7, 2], [7, 1, 3]];
        raw.iter()
            .map(|b| {
                let mut v: Vec<u32> = b.iter().map(|x| x - 1).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    fn all_blocks(n: u32, k: u32) -> Vec<Vec<u32>> {
        KSetIndexer::new(n, k).unwrap().iter().collect()
    }

    #[test]
    fn fano_pairs_covered_once() {
        let c = coverage_counts(7, 3, 2, &fano()).unwrap();
        assert_eq!(c.len(), 21);
        assert!(c.iter().all(|&x| x == 1));
    }

    #[test]
    fn empty_and_complete_counts() {
        assert!(coverage_counts(6, 3, 2, &[]).unwrap().iter().all(|&x| x == 0));
        let c = coverage_counts(7, 4, 2, &all_blocks(7, 4)).unwrap();
        assert!(c.iter().all(|&x| x == 10));
    }

    #[test]
    fn malformed_blocks_rejected() {
        assert!(matches!(
            coverage_counts(7, 3, 2, &[vec![0, 1, 7]]),
            Err(Error::MalformedBlock { index: 0, .. })
        ));
        assert!(matches!(
            coverage_counts(7, 3, 2, &[vec![0, 1, 2], vec![2, 1, 0]]),
            Err(Error::MalformedBlock { index: 1, .. })
        ));
        assert!(Design::new(7, 3, 2, 1, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn fano_design() {
        let d = Design::new(7, 3, 2, 1, fano()).unwrap();
        assert!(verify_design(&d).unwrap().pass);

        let mut blocks = fano();
        let removed = blocks.pop().unwrap();
        let rep = verify_design(&Design::new(7, 3, 2, 1, blocks).unwrap()).unwrap();
        assert!(!rep.pass);
        match rep.counterexample {
            Some(Counterexample::WrongCount { tset, count: 0, expected: 1, part: None }) => {
                assert!(tset.iter().all(|x| removed.contains(x)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_block_reported() {
        let mut blocks = fano();
        blocks.push(blocks[0].clone());
        let rep = verify_design(&Design::new(7, 3, 2, 2, blocks).unwrap()).unwrap();
        assert!(matches!(rep.counterexample, Some(Counterexample::DuplicateBlock { .. })));
    }

    #[test]
    fn complete_design_passes() {
        let d = Design::new(8, 4, 3, complete_lambda(8, 4, 3).unwrap(), all_blocks(8, 4)).unwrap();
        assert!(verify_design(&d).unwrap().pass);
    }

    fn k4_matchings() -> Vec<Vec<Vec<u32>>> {
        vec![
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![0, 2], vec![1, 3]],
            vec![vec![0, 3], vec![1, 2]],
        ]
    }

    #[test]
    fn k4_one_factorization() {
        let p = InstanceParams::new(4, 2, 1, 3).unwrap();
        let ls = LargeSetPartition::new(p, k4_matchings()).unwrap();
        assert!(verify_large_set(&ls).unwrap().pass);
    }

    #[test]
    fn repeated_part_is_not_disjoint() {
        let p = InstanceParams::new(4, 2, 1, 3).unwrap();
        let mut parts = k4_matchings();
        parts[2] = parts[0].clone();
        let rep = verify_large_set(&LargeSetPartition::new(p, parts).unwrap()).unwrap();
        assert!(matches!(
            rep.counterexample,
            Some(Counterexample::SharedBlock { parts: (0, 2), .. })
        ));
    }

    #[test]
    fn missing_block_and_trivial_large_set() {
        let p = InstanceParams::new(5, 2, 1, 1).unwrap();
        let ls = LargeSetPartition::new(p, vec![all_blocks(5, 2)]).unwrap();
        assert!(verify_large_set(&ls).unwrap().pass);

        let mut blocks = all_blocks(5, 2);
        blocks.remove(3);
        let rep = verify_large_set(&LargeSetPartition::new(p, vec![blocks]).unwrap()).unwrap();
        assert_eq!(rep.counterexample, Some(Counterexample::MissingBlock { block: vec![0, 3] }));
    }

    #[test]
    fn non_integral_lambda_propagates() {
        let p = InstanceParams::new(4, 2, 1, 2).unwrap();
        let ls = LargeSetPartition::new(p, vec![vec![], vec![]]).unwrap();
        assert!(matches!(verify_large_set(&ls), Err(Error::NonIntegralLambda { .. })));
    }

    #[test]
    fn uniform_subsets() {
        let sys = build_incidence(7, 3, 2).unwrap();
        let all: Vec<usize> = (0..sys.rows()).collect();
        assert!(verify_uniform_subset(&all, &sys).unwrap().pass);
        let rows = block_rows(7, 3, &fano()).unwrap();
        assert!(verify_uniform_subset(&rows, &sys).unwrap().pass);
        assert!(!verify_uniform_subset(&[0], &sys).unwrap().pass);
        assert_eq!(verify_uniform_subset(&[], &sys), Err(Error::EmptySubset));
        assert!(matches!(verify_uniform_subset(&[0, 0], &sys), Err(Error::InvalidSubset(_))));
        assert!(matches!(verify_uniform_subset(&[35], &sys), Err(Error::InvalidSubset(_))));
    }

    #[test]
    fn constants_in_span() {
        assert!(check_constants_in_V(&build_incidence(6, 3, 2).unwrap()));
        let zero_row = IncidenceSystem::from_rows(vec![vec![1, 0], vec![0, 0]]).unwrap();
        assert!(!check_constants_in_V(&zero_row));
        let twos = IncidenceSystem::from_rows(vec![vec![2], vec![2], vec![2]]).unwrap();
        assert!(check_constants_in_V(&twos));
    }

    #[test]
    fn symmetry_action() {
        let sys = build_incidence(9, 3, 2).unwrap();
        let id: Vec<u32> = (0..9).collect();
        assert!(check_symmetry_action(&id, &sys).unwrap());
        for i in 0..9 {
            for j in i + 1..9 {
                let mut p = id.clone();
                p.swap(i, j);
                assert!(check_symmetry_action(&p, &sys).unwrap());
            }
        }
        assert!(matches!(
            check_symmetry_action(&[0, 0, 1, 2, 3, 4, 5, 6, 7], &sys),
            Err(Error::InvalidPermutation(_))
        ));
        let general = IncidenceSystem::from_rows(vec![vec![1]]).unwrap();
        assert_eq!(check_symmetry_action(&[0], &general), Err(Error::NotDesignSystem));
    }

    #[test]
    fn witness_maps_block() {
        let p = transitivity_witness(7, &[0, 3, 5], &[1, 2, 6]).unwrap();
        assert_eq!(image(&p, &[0, 3, 5]), vec![1, 2, 6]);
        let sys = build_incidence(7, 3, 2).unwrap();
        assert!(check_symmetry_action(&p, &sys).unwrap());
    }

    fn random_subset(n: u32, k: u32, seed: u64) -> Vec<u32> {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut v: Vec<u32> = (0..n).collect();
        v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let mut out = v[..k as usize].to_vec();
        out.sort_unstable();
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn design_iff_uniform(n in 4u32..=9, k in 2u32..=4, t in 1u32..=3, mask in any::<u64>()) {
            prop_assume!(t < k && k < n);
            let all = all_blocks(n, k);
            let blocks: Vec<Vec<u32>> = all
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
                .map(|(_, b)| b.clone())
                .collect();
            prop_assume!(!blocks.is_empty());
            let sys = build_incidence(n, k, t).unwrap();
            let rows = block_rows(n, k, &blocks).unwrap();
            let uniform = verify_uniform_subset(&rows, &sys).unwrap().pass;
            // a uniform subset is a design with lambda = |T| C(k,t) / C(n,t)
            let num = blocks.len() as u64 * binom_u64(k.into(), t.into()).unwrap();
            let den = binom_u64(n.into(), t.into()).unwrap();
            let design = num % den == 0
                && verify_design(&Design::new(n, k, t, num / den, blocks.clone()).unwrap())
                    .unwrap()
                    .pass;
            prop_assert_eq!(uniform, design);
        }

        #[test]
        fn coverage_total(n in 3u32..=9, k in 2u32..=5, t in 1u32..=4, mask in any::<u64>()) {
            prop_assume!(t < k && k <= n);
            let blocks: Vec<Vec<u32>> = all_blocks(n, k)
                .into_iter()
                .enumerate()
                .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
                .map(|(_, b)| b)
                .collect();
            let c = coverage_counts(n, k, t, &blocks).unwrap();
            let total: u64 = c.iter().sum();
            prop_assert_eq!(total, blocks.len() as u64 * binom_u64(k.into(), t.into()).unwrap());
        }

        #[test]
        fn random_permutations_are_symmetries(
            perm in (4u32..=9).prop_flat_map(|n| Just((0..n).collect::<Vec<u32>>()).prop_shuffle())
        ) {
            let n = perm.len() as u32;
            let k = 3.min(n - 1);
            let sys = build_incidence(n, k, 2.min(k - 1)).unwrap();
            prop_assert!(check_symmetry_action(&perm, &sys).unwrap());
        }

        #[test]
        fn transitivity_on_blocks(n in 4u32..=9, s1 in any::<u64>(), s2 in any::<u64>()) {
            let k = 3.min(n - 1);
            let sys = build_incidence(n, k, k - 1).unwrap();
            let b1 = random_subset(n, k, s1);
            let b2 = random_subset(n, k, s2);
            let p = transitivity_witness(n, &b1, &b2).unwrap();
            prop_assert_eq!(image(&p, &b1), b2);
            prop_assert!(check_symmetry_action(&p, &sys).unwrap());
        }
    }
}
