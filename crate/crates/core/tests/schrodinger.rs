use bs_spectral::bs::{multiplicity_balance, BsProblem};
use bs_spectral::jordan::MultiplicityValue;
use bs_spectral::schrodinger::*;
use bs_spectral::{Complex64, Contour, Error};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> Complex64 {
    c(1.0, 0.0)
}

#[test]
fn jordan_blocks_at_squares() {
    let p = ModelParams::new(one(), 10);
    let r = jordan_structure(&p, 3).unwrap();
    assert_eq!((r.mg, r.ma), (1, MultiplicityValue::Finite(2)));
    assert!(r.methods_agree(), "{:?}", r.method_values());
    let r = jordan_structure(&p, 0).unwrap();
    assert_eq!((r.mg, r.ma), (1, MultiplicityValue::Finite(1)));
    let free = ModelParams::new(c(0.0, 0.0), 10);
    let r = jordan_structure(&free, 3).unwrap();
    assert_eq!((r.mg, r.ma), (2, MultiplicityValue::Finite(2)));
}

#[test]
fn small_truncation_at_four() {
    let r = jordan_structure(&ModelParams::new(one(), 8), 2).unwrap();
    assert_eq!((r.mg, r.ma), (1, MultiplicityValue::Finite(2)));
}

#[test]
fn high_modes_need_the_graded_basis() {
    let p = ModelParams::new(one(), 12);
    for m in 5..=8 {
        let graded = jordan_structure(&p, m).unwrap();
        assert_eq!((graded.mg, graded.ma), (1, MultiplicityValue::Finite(2)), "m = {m}");
        // The raw coupling is about alpha^{4m}/((2m-1)!)^2 and reads as a second kernel direction.
        let raw = jordan_structure_unscaled(&p, m).unwrap();
        assert_eq!(raw.ma, MultiplicityValue::Finite(2));
        assert_eq!(raw.mg, 2, "m = {m}");
    }
}

#[test]
fn antiperiodic_blocks() {
    let p = ModelParams::new(c(0.5, 0.5), 10);
    for m in 1..=4 {
        let r = antiperiodic_structure(&p, m).unwrap();
        assert_eq!((r.mg, r.ma), (1, MultiplicityValue::Finite(2)), "m = {m}");
    }
    assert!(antiperiodic_structure(&p, 0).is_err());
}

#[test]
fn edge_buffer_enforced() {
    let p = ModelParams::new(one(), 6);
    assert!(jordan_structure(&p, 4).is_ok());
    assert!(matches!(jordan_structure(&p, 5), Err(Error::InvalidArgument(_))));
}

#[test]
fn antiperiodic_truncation_shape() {
    let h = build_antiperiodic(&ModelParams::new(c(0.0, 1.0), 3)).unwrap();
    assert_eq!(h.rows(), 6);
    assert_eq!(h[(0, 0)], c(6.25, 0.0));
    assert_eq!(h[(3, 3)], c(0.25, 0.0));
    assert_eq!(h[(1, 0)], c(-1.0, 0.0));
}

#[test]
fn ode_chain_residuals() {
    for alpha in [one(), c(0.5, 0.3)] {
        for m in 1..=4 {
            let r = verify_ode_chain(m, alpha, 256).unwrap();
            assert!(r.eigen < 1e-9 && r.chain < 1e-9 && r.periodic < 1e-9, "m {m} alpha {alpha}: {r:?}");
        }
    }
    // Small |alpha| and larger m inflate dot y by (2m-1)! |alpha|^{-2m}; compare against its size.
    for alpha in [c(0.5, 0.5), c(0.3, -1.2)] {
        for m in 1..=5 {
            let r = verify_ode_chain(m, alpha, 256).unwrap();
            let size = generalized_eigenfunction(m, alpha, 256).unwrap().iter().map(|v| v.norm()).fold(1.0, f64::max);
            assert!(r.chain < 1e-12 * size && r.periodic < 1e-12 * size, "m {m} alpha {alpha}: {r:?}");
        }
    }
    let r = verify_ode_chain(0, one(), 128).unwrap();
    assert!(r.eigen < 1e-10 && r.periodic < 1e-12);
}

#[test]
fn eigenfunction_values() {
    let y = eigenfunction(0, c(0.0, 0.0), 64).unwrap();
    assert!(y.iter().all(|v| *v == one()));
    assert!(matches!(eigenfunction(2, c(0.0, 0.0), 64), Err(Error::DegenerateEigenfunction)));
    assert!(matches!(generalized_eigenfunction(2, c(0.0, 0.0), 64), Err(Error::ZeroCoupling)));
    assert!(matches!(eigenfunction(40, one(), 64), Err(Error::DomainExceeded(_))));
    // dot y(0) for m = 1, alpha = 1: J_0(2)/2 + J_1(2).
    let d = generalized_eigenfunction(1, one(), 64).unwrap();
    let expected = 0.223_890_779_141_235_67 / 2.0 + 0.576_724_807_756_873_4;
    assert!((d[0] - c(expected, 0.0)).norm() < 1e-13);
    let y = eigenfunction(1, one(), 65).unwrap();
    assert!((y[0] - c(0.352_834_028_615_637_74, 0.0)).norm() < 1e-13);
    assert!((y[0] - y[64]).norm() < 1e-13);
}

#[test]
fn fourier_coefficients_lie_in_the_kernel() {
    for (alpha, m) in [(one(), 2), (c(0.7, 0.4), 3), (c(1.0, 0.0), 0)] {
        let n = 12;
        let h = build_periodic(&ModelParams::new(alpha, n)).unwrap();
        let v = eigenfunction_coefficients(m, alpha, n);
        let r = h.shift_diag(c((m * m) as f64, 0.0)).mul_vec(&v).unwrap();
        // Only the dropped outflow of the top mode remains.
        assert!(r.norm() < 1e-12 * v.norm(), "m {m}: {}", r.norm());
        // The coefficients reproduce the closed form.
        let xs = grid_points(64);
        let y = eigenfunction(m, alpha, 64).unwrap();
        for (x, yv) in xs.iter().zip(&y) {
            let s: Complex64 = (0..=2 * n)
                .map(|i| v.as_slice()[i] * Complex64::new(0.0, (i as f64 - n as f64) * x).exp())
                .sum();
            // Half-integer exponents of e^{ix/2} are absent: only integer modes appear.
            assert!((s - yv).norm() < 1e-12, "{s} vs {yv}");
        }
    }
}

#[test]
fn discriminant_matches_cosine() {
    for z in [c(0.3, 0.0), c(2.0, 0.5), c(-1.0, 1.0), c(9.0, 0.0), c(16.5, -0.3)] {
        for alpha in [one(), c(0.5, 0.5)] {
            let r = monodromy(z, alpha, 20_000).unwrap();
            assert!(r.gap < 1e-6, "z {z} alpha {alpha}: {}", r.gap);
            assert!(r.wronskian_residual < 1e-6);
        }
    }
    assert!(monodromy(one(), one(), 10).is_err());
}

#[test]
fn band_criterion() {
    let samples = [c(0.0, 0.0), c(0.7, 0.0), c(4.0, 0.0), c(12.3, 0.0), c(1.0, 0.5), c(-2.0, 0.0), c(3.0, -1.0)];
    let r = band_check(one(), &samples, 20_000).unwrap();
    assert!(r.iter().all(BandSample::pass), "{r:?}");
    assert_eq!(r.iter().filter(|s| s.inside).count(), 4);
}

#[test]
fn determinant_ratio_decays() {
    let z = c(0.5, 0.2);
    let z0 = c(-1.0, 0.0);
    let a = determinant_ratio_check(z, z0, one(), 100).unwrap();
    let b = determinant_ratio_check(z, z0, one(), 200).unwrap();
    // The truncated product misses a tail of size about 2|z - z0|/N.
    let tail = 2.0 * (z - z0).norm() / 200.0;
    assert!(b < a && (b - tail).abs() < 0.05 * tail, "{a} {b} {tail}");
}

#[test]
fn trace_of_resolvent_decays() {
    let a = trace_resolvent_check(c(-1.0, 0.0), one(), 100).unwrap();
    let b = trace_resolvent_check(c(-1.0, 0.0), one(), 300).unwrap();
    assert!(b < a);
    assert!((b - 2.0 / 300.0).abs() < 1e-4, "{b}");
}

#[test]
fn riesz_traces() {
    let r = riesz_trace_check(0, one(), 10).unwrap();
    assert_eq!(r.value, 1);
    for m in 1..=6 {
        let r = riesz_trace_check(m, c(0.5, 0.5), 10).unwrap();
        assert_eq!(r.value, 2);
        assert!(r.residual < 1e-8);
    }
}

#[test]
fn truncated_balance_at_squares() {
    let n = 8;
    let h = build_periodic(&ModelParams::new(one(), n)).unwrap();
    let h0 = build_periodic(&ModelParams::new(c(0.0, 0.0), n)).unwrap();
    let v = &h - &h0;
    let p = BsProblem::simple(h0, v).unwrap();
    assert!(p.h().max_abs_diff(&h).unwrap() < 1e-15);
    for m in 1..=4 {
        let z0 = c((m * m) as f64, 0.0);
        let b = multiplicity_balance(&p, z0, &Contour::circle(z0, 0.5).unwrap()).unwrap();
        assert_eq!((b.ma_h, b.ma_h0, b.index), (2, 2, 0), "m {m}");
        assert!(b.holds);
    }
}

#[test]
fn params_round_trip() {
    let p = ModelParams { alpha: c(0.5, -0.5), modes: 9, grid: 128, ode_steps: 5000 };
    let s = serde_json::to_string(&p).unwrap();
    assert_eq!(serde_json::from_str::<ModelParams>(&s).unwrap(), p);
    let d: ModelParams = serde_json::from_str("{}").unwrap();
    assert_eq!(d, ModelParams::default());
    assert!(build_periodic(&ModelParams::new(one(), 1)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn chain_holds_for_random_couplings(re in -1.5f64..1.5, im in -1.5f64..1.5, m in 1usize..4) {
        prop_assume!(re.hypot(im) > 0.1);
        let alpha = c(re, im);
        let r = verify_ode_chain(m, alpha, 96).unwrap();
        let size = generalized_eigenfunction(m, alpha, 96).unwrap().iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(r.eigen < 1e-12 && r.chain < 1e-12 * size && r.periodic < 1e-12 * size, "{:?}", r);
    }

    #[test]
    fn spectrum_does_not_depend_on_coupling(re in -1.0f64..1.0, im in -1.0f64..1.0, m in 1usize..5) {
        prop_assume!(re.hypot(im) > 0.2);
        let r = jordan_structure(&ModelParams::new(c(re, im), 8), m).unwrap();
        prop_assert_eq!(r.ma, MultiplicityValue::Finite(2));
        prop_assert_eq!(r.mg, 1);
    }
}
