use bs_spectral::bs::*;
use bs_spectral::family::make_simple_bs;
use bs_spectral::jordan::{ChainKind, JordanChain, MultiplicityValue};
use bs_spectral::numerics::rank_nullspace_scaled;
use bs_spectral::seeded;
use bs_spectral::{Complex64, ComplexMatrix, ComplexVector, Contour, Error};
use proptest::prelude::*;
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn toy() -> BsProblem {
    let one = ComplexMatrix::from_real_diag(&[1.0]);
    BsProblem::new(ComplexMatrix::from_real_diag(&[2.0]), one.clone(), one).unwrap()
}

fn random_sizes(rng: &mut seeded::SeededRng, n: usize, max_len: usize) -> Vec<usize> {
    let blocks = rng.gen_range(1..=2usize);
    let mut sizes: Vec<usize> = (0..blocks).map(|_| rng.gen_range(1..=max_len)).collect();
    while sizes.iter().sum::<usize>() > n {
        sizes.pop();
    }
    if sizes.is_empty() {
        sizes.push(1);
    }
    sizes
}

#[test]
fn round_trip_on_seeded_trials() {
    let mut rng = seeded::rng(20240611);
    for _ in 0..100 {
        let n = rng.gen_range(4..=16);
        let sizes = random_sizes(&mut rng, n, 4);
        let z0 = seeded::complex(&mut rng);
        let trial = seeded_trial(&mut rng, n, &sizes, z0).unwrap();
        let p = &trial.problem;
        for chain in &trial.chains {
            let fwd = chain_forward(p, z0, chain).unwrap();
            assert!(fwd.output_residual < 1e-8, "forward {}", fwd.output_residual);
            let back = chain_backward(p, z0, &fwd.output).unwrap();
            assert!(back.output_residual < 1e-8, "backward {}", back.output_residual);
            assert!(back.consistency_residual < 1e-9, "V1 f = phi {}", back.consistency_residual);
            assert_eq!(back.output.len(), chain.len());
            assert!(chain_range_check(p, z0, chain).unwrap() < 1e-8);
            let again = chain_forward(p, z0, &back.output).unwrap();
            for (a, b) in again.output.vectors().iter().zip(fwd.output.vectors()) {
                assert!((a - b).norm() < 1e-9 * b.norm().max(1.0));
            }
        }
        let (mg_h, mg_bs) = geometric_equality(p, z0).unwrap();
        assert_eq!(mg_h, sizes.len());
        assert_eq!(mg_bs, mg_h);
    }
}

#[test]
fn forward_eigenvector_is_classical_bs() {
    let mut rng = seeded::rng(5);
    let trial = seeded_trial(&mut rng, 6, &[1], c(0.3, 0.1)).unwrap();
    let r = chain_forward(&trial.problem, trial.z0, &trial.chains[0]).unwrap();
    let m = trial.problem.family().unwrap().eval(trial.z0).unwrap();
    assert!(m.mul_vec(&r.output.vectors()[0]).unwrap().norm() < 1e-10);
}

#[test]
fn length_two_square_split() {
    // V1 square invertible, V2 = I, H0 = H - V1.
    let mut rng = seeded::rng(77);
    let trial = seeded_trial(&mut rng, 6, &[2], c(-0.4, 0.2)).unwrap();
    let p = BsProblem::simple(trial.problem.h() - &ComplexMatrix::identity(6).scale_real(0.7), ComplexMatrix::identity(6).scale_real(0.7)).unwrap();
    let r = chain_forward(&p, trial.z0, &trial.chains[0]).unwrap();
    assert!(r.output_residual < 1e-9, "{}", r.output_residual);
}

#[test]
fn range_check_vacuous_for_eigenvectors() {
    let mut rng = seeded::rng(9);
    let trial = seeded_trial(&mut rng, 5, &[1], c(0.0, 0.0)).unwrap();
    assert_eq!(chain_range_check(&trial.problem, trial.z0, &trial.chains[0]).unwrap(), 0.0);
    let trial = seeded_trial(&mut rng, 10, &[4], c(0.5, 0.0)).unwrap();
    assert!(chain_range_check(&trial.problem, trial.z0, &trial.chains[0]).unwrap() < 1e-8);
}

#[test]
fn not_a_chain_is_rejected() {
    let mut rng = seeded::rng(10);
    let trial = seeded_trial(&mut rng, 6, &[2], c(0.0, 0.5)).unwrap();
    let mut v = trial.chains[0].vectors().to_vec();
    v[1] = v[1].scale(c(2.0, 0.0));
    let bad = JordanChain::new(trial.z0, v, ChainKind::OperatorChain).unwrap();
    assert!(matches!(chain_forward(&trial.problem, trial.z0, &bad), Err(Error::NotAChain { .. })));
}

#[test]
fn zero_coupling_moves_nothing() {
    // V1 = 0: the family is the identity, H = H0, and no vector is a family chain.
    let h0 = ComplexMatrix::from_real_diag(&[1.0, 2.0, 3.0]);
    let p = BsProblem::new(h0.clone(), ComplexMatrix::zeros(3, 3), ComplexMatrix::identity(3)).unwrap();
    let f = p.family().unwrap();
    let z = c(0.4, 0.3);
    assert_eq!(f.eval(z).unwrap().max_abs_diff(&ComplexMatrix::identity(3)).unwrap(), 0.0);
    assert_eq!(p.h(), &h0);
    let phi = JordanChain::new(z, vec![ComplexVector::unit(3, 0)], ChainKind::FamilyChain).unwrap();
    assert!(matches!(chain_backward(&p, z, &phi), Err(Error::NotAChain { .. })));
    assert_eq!(resolvent_formula_check(&p, z).unwrap(), 0.0);
    assert_eq!(inverse_identities_check(&p, z).unwrap(), (0.0, 0.0));
    let b = multiplicity_balance(&p, c(1.0, 0.0), &Contour::circle(c(1.0, 0.0), 0.5).unwrap()).unwrap();
    assert_eq!((b.ma_h, b.ma_h0, b.index), (1, 1, 0));
}

#[test]
fn simple_form_matches_family() {
    let mut rng = seeded::rng(3);
    let h0 = seeded::matrix(&mut rng, 5, 5);
    let v = seeded::matrix(&mut rng, 5, 5);
    let p = BsProblem::simple(h0.clone(), v.clone()).unwrap();
    let a = p.family().unwrap();
    let b = make_simple_bs(h0, v).unwrap();
    for z in [c(3.0, 1.0), c(-2.5, -2.0)] {
        assert!(a.eval(z).unwrap().max_abs_diff(&b.eval(z).unwrap()).unwrap() < 1e-14);
    }
}

#[test]
fn symmetrized_diagonal_potential() {
    let n = 5;
    let h0 = ComplexMatrix::from_real_diag(&(0..n).map(|k| ((k as f64) - 2.0).powi(2)).collect::<Vec<_>>());
    let v = [0.5, -1.5, 0.25, -0.1, 2.0];
    let p = BsProblem::symmetrized(h0.clone(), &v).unwrap();
    let diff = p.h() - &h0;
    assert!(diff.max_abs_diff(&ComplexMatrix::from_real_diag(&v)).unwrap() < 1e-15);
    let z = c(0.5, 0.5);
    let m = p.family().unwrap().eval(z).unwrap();
    for k in 0..n {
        let expected = 1.0 + v[k] / (h0[(k, k)] - z);
        assert!((m[(k, k)] - expected).norm() < 1e-14);
    }
}

#[test]
fn scalar_toy_balance() {
    let p = toy();
    let b = multiplicity_balance(&p, c(3.0, 0.0), &Contour::circle(c(3.0, 0.0), 0.5).unwrap()).unwrap();
    assert_eq!((b.ma_h, b.ma_h0, b.index), (1, 0, 1));
    assert_eq!(b.family_ma, Some(MultiplicityValue::Finite(1)));
    assert!(b.holds);
    let b = multiplicity_balance(&p, c(0.0, 1.0), &Contour::circle(c(0.0, 1.0), 0.5).unwrap()).unwrap();
    assert_eq!((b.ma_h, b.ma_h0, b.index), (0, 0, 0));
    assert_eq!(geometric_equality(&p, c(0.0, 1.0)).unwrap(), (0, 0));
}

#[test]
fn identities_on_seeded_instances() {
    let mut rng = seeded::rng(42);
    for i in 0..50 {
        let n = [10, 12][i % 2];
        let h0 = seeded::matrix(&mut rng, n, n);
        let v1 = seeded::matrix(&mut rng, n, n).scale_real(0.5);
        let v2 = seeded::matrix(&mut rng, n, n).scale_real(0.5);
        let p = BsProblem::new(h0, v1, v2).unwrap();
        let z = c(4.0, 3.0) + seeded::complex(&mut rng);
        assert!(resolvent_formula_check(&p, z).unwrap() < 1e-10);
        let (a, b) = inverse_identities_check(&p, z).unwrap();
        assert!(a < 1e-10 && b < 1e-10, "{a} {b}");
        let psi = seeded::vector(&mut rng, n);
        assert!(range_formula_check(&p, z, &psi).unwrap() < 1e-9);
    }
}

#[test]
fn balance_on_seeded_trials() {
    let mut rng = seeded::rng(314);
    for _ in 0..10 {
        let n = rng.gen_range(4..=8);
        let sizes = random_sizes(&mut rng, n, 3);
        let z0 = seeded::complex(&mut rng);
        let trial = seeded_trial(&mut rng, n, &sizes, z0).unwrap();
        let contour = isolating_contour(&trial.problem, z0).unwrap();
        let b = multiplicity_balance(&trial.problem, z0, &contour).unwrap();
        assert!(b.holds, "{b:?}");
        assert_eq!(b.ma_h as usize, sizes.iter().sum::<usize>());
        assert_eq!(b.ma_h0, 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn classical_principle_both_ways(seed in any::<u64>(), n in 3usize..8) {
        let mut rng = seeded::rng(seed);
        let z0 = seeded::complex(&mut rng);
        let trial = seeded_trial(&mut rng, n, &[1], z0).unwrap();
        let p = &trial.problem;
        let m = p.family().unwrap().eval(z0).unwrap();
        let ker = rank_nullspace_scaled(&m, 1e-10, 1.0).unwrap().basis;
        prop_assert_eq!(ker.len(), 1);
        let phi = JordanChain::new(z0, vec![ker[0].clone()], ChainKind::FamilyChain).unwrap();
        let back = chain_backward(p, z0, &phi).unwrap();
        prop_assert!(back.output_residual < 1e-9);
        // Away from the spectrum of H neither side has a kernel.
        let w = z0 + c(0.0, 7.5);
        prop_assert_eq!(geometric_equality(p, w).unwrap(), (0, 0));
    }
}
