use bs_spectral::bs::{isolating_contour, BsProblem};
use bs_spectral::contour::search::{locate_spectrum, SpectrumOptions};
use bs_spectral::seeded;
use bs_spectral::wa::*;
use bs_spectral::{Complex64, ComplexMatrix, Contour};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn toy() -> BsProblem {
    let one = ComplexMatrix::from_real_diag(&[1.0]);
    BsProblem::new(ComplexMatrix::from_real_diag(&[2.0]), one.clone(), one).unwrap()
}

#[test]
fn toy_zero_and_pole() {
    let p = toy();
    let around3 = Contour::circle(c(3.0, 0.0), 0.5).unwrap();
    let r = wa_check(&p, c(3.0, 0.0), &[1, 2, 3], &around3).unwrap();
    assert!(r.windings.iter().all(|w| w.standard == 1 && w.negated == 1), "{:?}", r.windings);
    assert_eq!((r.ma_h, r.ma_h0, r.index), (1, 0, 1));
    assert!(r.holds);

    let around2 = Contour::circle(c(2.0, 0.0), 0.5).unwrap();
    assert_eq!(det_multiplicity(&p, 1, &around2).unwrap(), -1);
    let r = wa_check(&p, c(2.0, 0.0), &[1, 2], &around2).unwrap();
    assert_eq!((r.ma_h, r.ma_h0, r.index), (0, 1, -1));
    assert!(r.holds, "{r:?}");
}

#[test]
fn resolvent_point_gives_zeros() {
    let p = toy();
    let r = wa_check(&p, c(0.0, 1.0), &[1, 2, 3], &Contour::circle(c(0.0, 1.0), 0.5).unwrap()).unwrap();
    assert!(r.windings.iter().all(|w| w.standard == 0 && w.negated == 0));
    assert_eq!((r.ma_h, r.ma_h0, r.index), (0, 0, 0));
    assert!(r.holds);
}

#[test]
fn zero_perturbation() {
    let h0 = ComplexMatrix::from_real_diag(&[1.0, 2.0, 3.0]);
    let p = BsProblem::simple(h0, ComplexMatrix::zeros(3, 3)).unwrap();
    for z in [c(1.0, 0.0), c(2.0, 0.0), c(1.5, 0.0)] {
        let r = wa_check(&p, z, &[1, 2, 3], &Contour::circle(z, 0.25).unwrap()).unwrap();
        assert!(r.windings.iter().all(|w| w.standard == 0));
        assert_eq!(r.index, 0);
        assert!(r.holds);
    }
}

fn rank_two_problem(seed: u64) -> BsProblem {
    let mut rng = seeded::rng(seed);
    let h0 = ComplexMatrix::from_real_diag(&(1..=8).map(f64::from).collect::<Vec<_>>());
    let v1 = seeded::matrix(&mut rng, 2, 8).scale_real(0.6);
    let v2 = seeded::matrix(&mut rng, 2, 8).scale_real(0.6);
    BsProblem::new(h0, v1, v2).unwrap()
}

#[test]
fn seeded_sweep_over_eigenvalues() {
    for seed in [1u64, 2, 3] {
        let p = rank_two_problem(seed);
        let clusters = locate_spectrum(p.h(), &SpectrumOptions::default()).unwrap();
        for cl in clusters {
            let contour = isolating_contour(&p, cl.center).unwrap();
            let r = wa_check(&p, cl.center, &[1, 2], &contour).unwrap();
            assert!(r.holds, "seed {seed}: {r:?}");
            assert_eq!(r.ma_h as usize, cl.multiplicity);
        }
        // The free eigenvalues are poles of K: the balance moves the other way.
        for k in 1..=8 {
            let z = c(k as f64, 0.0);
            let contour = isolating_contour(&p, z).unwrap();
            let r = wa_check(&p, z, &[1, 2], &contour).unwrap();
            assert!(r.holds, "seed {seed} z {z}: {r:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn winding_independent_of_p_and_convention(seed in any::<u64>(), re in 0.5f64..8.5, im in -0.8f64..0.8) {
        let p = rank_two_problem(seed);
        let z = c(re, im);
        let contour = Contour::circle(z, 0.3).unwrap();
        let ws: Vec<i64> = (1..=3)
            .flat_map(|q| [Convention::Standard, Convention::Negated].map(|cv| det_multiplicity_with(&p, q, &contour, cv)))
            .filter_map(Result::ok)
            .collect();
        prop_assume!(ws.len() == 6);
        prop_assert!(ws.windows(2).all(|w| w[0] == w[1]), "{:?}", ws);
    }
}
