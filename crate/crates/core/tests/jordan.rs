use bs_spectral::family::{make_custom, make_pencil, make_taylor};
use bs_spectral::jordan::*;
use bs_spectral::seeded;
use bs_spectral::{Complex64, ComplexMatrix, ComplexVector};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn block_diag(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n: usize = blocks.iter().map(|b| b.rows()).sum();
    let mut m = ComplexMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        m.set_block(at, at, b);
        at += b.rows();
    }
    m
}

/// `S J S^{-1}` with Jordan blocks of the given sizes at `lambda0`, plus simple
/// eigenvalues spread away from it.
fn seeded_operator(seed: u64, lambda0: Complex64, sizes: &[usize], extra: usize) -> ComplexMatrix {
    let mut rng = seeded::rng(seed);
    let mut blocks: Vec<ComplexMatrix> = sizes.iter().map(|&k| ComplexMatrix::jordan_block(k, lambda0)).collect();
    for j in 0..extra {
        let mu = lambda0 + c(2.0 + j as f64, 0.5 * j as f64);
        blocks.push(ComplexMatrix::from_diag(&[mu]));
    }
    let j = block_diag(&blocks);
    let (s, s_inv) = seeded::similarity(&mut rng, j.rows()).unwrap();
    s.matmul(&j).unwrap().matmul(&s_inv).unwrap()
}

#[test]
fn gallery_multiplicities() {
    let cases: Vec<(Vec<Option<usize>>, usize, usize, Vec<usize>)> = vec![
        (vec![Some(1), Some(0), Some(0)], 1, 1, vec![1]),
        (vec![Some(1), Some(2), Some(0)], 2, 3, vec![2, 1]),
        (vec![Some(1), Some(5), Some(0)], 2, 6, vec![5, 1]),
        (vec![Some(1), Some(2), Some(2), Some(0)], 3, 5, vec![2, 2, 1]),
    ];
    for (exps, mg, ma, lengths) in cases {
        let f = monomial_diagonal(&exps).unwrap();
        let r = algebraic_multiplicity_with(&f, ZERO, &MultiplicityOptions::default()).unwrap();
        assert_eq!(r.mg, mg, "{exps:?}");
        assert_eq!(r.ma, MultiplicityValue::Finite(ma), "{exps:?}");
        assert_eq!(r.lengths, lengths, "{exps:?}");
        assert_eq!(r.index, Some(ma as i64));
        assert_eq!(r.det_winding, Some(ma as i64));
        assert!(r.index_residual.unwrap() < 1e-6);
        assert_eq!(det_zero_order(&f, ZERO, 0.5).unwrap(), ma as i64);
        let chains = extract_canonical_chains(&f, ZERO).unwrap();
        assert_eq!(chains.iter().map(JordanChain::len).collect::<Vec<_>>(), lengths);
    }
}

#[test]
fn identity_family_has_no_zero() {
    let f = make_taylor(ZERO, vec![ComplexMatrix::identity(3)]).unwrap();
    assert_eq!(toeplitz_kernel_dims(&f, ZERO, 3).unwrap(), vec![0, 0, 0]);
    assert_eq!(det_zero_order(&f, ZERO, 1.0).unwrap(), 0);
    let ch = JordanChain::new(ZERO, vec![ComplexVector::unit(3, 1)], ChainKind::FamilyChain).unwrap();
    assert!((verify_family_chain(&f, ZERO, &ch).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn a_infinity_dims_keep_growing() {
    let f = monomial_diagonal(&[None, Some(1), Some(0)]).unwrap();
    let d = toeplitz_kernel_dims(&f, ZERO, 6).unwrap();
    assert!(d.windows(2).all(|w| w[1] > w[0]), "{d:?}");
}

#[test]
fn pencil_chain_keeps_the_operator_sign() {
    // A' = -I, so (A - lambda0) phi_1 = phi_0 is exactly D_0 phi_1 + D_1 phi_0 = 0.
    let f = make_pencil(ComplexMatrix::jordan_block(2, ZERO)).unwrap();
    let e = |i| ComplexVector::unit(2, i);
    let good = JordanChain::new(ZERO, vec![e(0), e(1)], ChainKind::FamilyChain).unwrap();
    assert_eq!(verify_family_chain(&f, ZERO, &good).unwrap(), 0.0);
    let flipped = JordanChain::new(ZERO, vec![e(0), e(1).scale(c(-1.0, 0.0))], ChainKind::FamilyChain).unwrap();
    assert!(verify_family_chain(&f, ZERO, &flipped).unwrap() > 1.0);
}

#[test]
fn a2_chain_with_free_coefficient() {
    let f = monomial_diagonal(&[Some(1), Some(2), Some(0)]).unwrap();
    for cc in [c(0.0, 0.0), c(3.0, -1.0)] {
        let phi0 = ComplexVector::unit(3, 1);
        let phi1 = phi0.scale(cc);
        let ch = JordanChain::new(ZERO, vec![phi0, phi1], ChainKind::FamilyChain).unwrap();
        assert!(verify_family_chain(&f, ZERO, &ch).unwrap() < 1e-15);
    }
}

#[test]
fn operator_examples() {
    let r = operator_multiplicities(&ComplexMatrix::from_real_diag(&[1.0, 1.0, 2.0]), c(1.0, 0.0)).unwrap();
    assert_eq!((r.mg, r.ma), (2, MultiplicityValue::Finite(2)));
    let r = operator_multiplicities(&ComplexMatrix::from_real_diag(&[5.0]), c(5.0, 0.0)).unwrap();
    assert_eq!((r.mg, r.ma), (1, MultiplicityValue::Finite(1)));
    let a = ComplexMatrix::from_real_diag(&[5.0]);
    let ch = JordanChain::new(c(5.0, 0.0), vec![ComplexVector::unit(1, 0)], ChainKind::OperatorChain).unwrap();
    assert_eq!(verify_operator_chain(&a, c(5.0, 0.0), &ch).unwrap(), 0.0);
}

#[test]
fn perturbed_operator_chain() {
    let a = ComplexMatrix::jordan_block(2, ZERO);
    let d = 1e-3;
    let phi0 = ComplexVector::new(vec![c(1.0, 0.0), c(d, 0.0)]).unwrap();
    let ch = JordanChain::new(ZERO, vec![phi0, ComplexVector::unit(2, 1)], ChainKind::OperatorChain).unwrap();
    let r = verify_operator_chain(&a, ZERO, &ch).unwrap();
    assert!((r - d).abs() < 1e-9, "{r}");
}

#[test]
fn dimension_mismatch_is_reported() {
    let a = ComplexMatrix::identity(3);
    let ch = JordanChain::new(ZERO, vec![ComplexVector::unit(2, 0)], ChainKind::OperatorChain).unwrap();
    assert!(verify_operator_chain(&a, ZERO, &ch).is_err());
}

#[test]
fn family_with_pole_nearby_is_evaluated_on_its_domain() {
    // diag(z, 1/(z - 0.3)) has a zero at 0 and a pole at 0.3.
    let f = make_custom(2, |z, order| {
        let mut m = ComplexMatrix::zeros(2, 2);
        let fact: f64 = (1..=order).map(|k| k as f64).product();
        m[(0, 0)] = match order {
            0 => z,
            1 => c(1.0, 0.0),
            _ => ZERO,
        };
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        m[(1, 1)] = sign * fact / (z - 0.3).powu(order as u32 + 1);
        Ok(m)
    });
    let contour = bs_spectral::Contour::circle(ZERO, 0.1).unwrap();
    let r = algebraic_multiplicity_with(&f, ZERO, &MultiplicityOptions { contour: Some(contour), ..Default::default() }).unwrap();
    assert_eq!(r.ma, MultiplicityValue::Finite(1));
    assert!(r.methods_agree());
}

fn unitary_conjugate(f_exps: &[Option<usize>], seed: u64) -> bs_spectral::family::OperatorFamily {
    let n = f_exps.len();
    let u = seeded::unitary(&mut seeded::rng(seed), n);
    let top = f_exps.iter().flatten().copied().max().unwrap_or(0);
    let coeffs: Vec<ComplexMatrix> = (0..=top)
        .map(|k| {
            let d: Vec<Complex64> = f_exps.iter().map(|e| if *e == Some(k) { c(1.0, 0.0) } else { ZERO }).collect();
            u.matmul(&ComplexMatrix::from_diag(&d)).unwrap().matmul(&u.adjoint()).unwrap()
        })
        .collect();
    make_taylor(ZERO, coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prefixes_of_chains_are_chains(exps in prop::collection::vec(0usize..4, 1..4), seed in any::<u64>()) {
        let exps: Vec<Option<usize>> = exps.into_iter().map(Some).chain(std::iter::once(Some(0))).collect();
        let f = unitary_conjugate(&exps, seed);
        for ch in extract_canonical_chains(&f, ZERO).unwrap() {
            for l in 1..=ch.len() {
                prop_assert!(verify_family_chain(&f, ZERO, &ch.prefix(l).unwrap()).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn multiplicity_is_basis_independent(exps in prop::collection::vec(0usize..4, 1..4), seed in any::<u64>()) {
        let exps: Vec<Option<usize>> = exps.into_iter().map(Some).collect();
        let expected: usize = exps.iter().flatten().sum();
        let plain = monomial_diagonal(&exps).unwrap();
        let rotated = unitary_conjugate(&exps, seed);
        let a: usize = extract_canonical_chains(&plain, ZERO).unwrap().iter().map(JordanChain::len).sum();
        let b: usize = extract_canonical_chains(&rotated, ZERO).unwrap().iter().map(JordanChain::len).sum();
        prop_assert_eq!(a, expected);
        prop_assert_eq!(b, expected);
    }

    #[test]
    fn methods_agree_on_seeded_operators(sizes in prop::collection::vec(1usize..4, 1..4), extra in 0usize..3, seed in any::<u64>()) {
        let lambda0 = c(0.5, -0.25);
        let a = seeded_operator(seed, lambda0, &sizes, extra);
        let r = operator_multiplicities(&a, lambda0).unwrap();
        let ma: usize = sizes.iter().sum();
        prop_assert_eq!(r.mg, sizes.len());
        prop_assert_eq!(r.ma, MultiplicityValue::Finite(ma));
        prop_assert!(r.mg <= ma);
        prop_assert!(r.methods_agree(), "{:?}", r.method_values());
        prop_assert_eq!(r.methods.len(), 4);
        let mut lengths = sizes.clone();
        lengths.sort_unstable_by(|x, y| y.cmp(x));
        prop_assert_eq!(&r.lengths, &lengths);
        prop_assert!(r.residual < 1e-8, "residual {}", r.residual);
    }

    #[test]
    fn pencil_matches_operator(sizes in prop::collection::vec(1usize..3, 1..3), seed in any::<u64>()) {
        let lambda0 = c(-1.0, 0.5);
        let a = seeded_operator(seed, lambda0, &sizes, 1);
        let fam = algebraic_multiplicity_with(&make_pencil(a.clone()).unwrap(), lambda0, &MultiplicityOptions::default()).unwrap();
        let op = operator_multiplicities(&a, lambda0).unwrap();
        prop_assert_eq!(fam.ma, op.ma);
        prop_assert_eq!(op.power_kernel_dims.unwrap().last().copied(), op.ma.finite());
    }
}
