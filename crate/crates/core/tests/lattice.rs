use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use largesets::lattice::{lattice_from_generators, membership, smith_normal_form, IntMat};

/// Integer coefficients x with x·G = v, found through the Smith form of G.
fn solve(g: &IntMat, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let snf = smith_normal_form(g);
    let d = snf.diagonal();
    let vw: Vec<BigInt> =
        (0..g.cols()).map(|j| (0..g.cols()).map(|i| &v[i] * &snf.w[(i, j)]).sum()).collect();
    let mut y = vec![BigInt::zero(); g.rows()];
    for (j, target) in vw.iter().enumerate() {
        match d.get(j).filter(|x| !x.is_zero()) {
            Some(dj) => {
                let (q, r) = target.div_rem(dj);
                if !r.is_zero() {
                    return None;
                }
                y[j] = q;
            }
            None if !target.is_zero() => return None,
            None => {}
        }
    }
    let x: Vec<BigInt> = (0..g.rows()).map(|c| (0..g.rows()).map(|r| &y[r] * &snf.u[(r, c)]).sum()).collect();
    let back: Vec<BigInt> = (0..g.cols()).map(|j| (0..g.rows()).map(|r| &x[r] * &g[(r, j)]).sum()).collect();
    assert_eq!(back, v, "Smith solve must reproduce the target");
    Some(x)
}

fn generators() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=6, 1usize..=5).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-5i64..=5, c), r))
}

fn rat(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().cloned().map(BigRational::from_integer).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn basis_and_generators_span_each_other(rows in generators()) {
        let g = IntMat::from_i64_rows(&rows).unwrap();
        let lat = lattice_from_generators(&g);
        for i in 0..lat.rank() {
            prop_assert!(solve(&g, lat.basis().row(i)).is_some(), "basis row {i} outside the generated group");
        }
        for r in 0..g.rows() {
            prop_assert!(membership(&lat, &rat(g.row(r))).unwrap());
        }
    }

    #[test]
    fn membership_agrees_with_smith_solve(rows in generators(), seed in prop::collection::vec(-6i64..=6, 5)) {
        let g = IntMat::from_i64_rows(&rows).unwrap();
        let lat = lattice_from_generators(&g);
        let v: Vec<BigInt> = seed[..g.cols()].iter().map(|&x| BigInt::from(x)).collect();
        prop_assert_eq!(membership(&lat, &rat(&v)).unwrap(), solve(&g, &v).is_some());

        // vectors with a non-integer entry are never members
        let half: Vec<BigRational> = v.iter().map(|x| BigRational::new(x.clone(), BigInt::from(2))).collect();
        let integral = half.iter().all(|x| x.is_integer());
        if !integral {
            prop_assert!(!membership(&lat, &half).unwrap());
        }
    }
}
