mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use spectroforge::lpc::{self, LpcModel};

fn brute_autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|k| (k..x.len()).map(|n| x[n] * x[n - k]).sum())
        .collect()
}

/// Normal equations `R a = r[1..]` solved densely.
fn toeplitz_solve(r: &[f64], order: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(order, order, |i, j| r[i.abs_diff(j)]);
    let rhs = DVector::from_fn(order, |i, _| r[i + 1]);
    m.lu()
        .solve(&rhs)
        .expect("positive definite")
        .iter()
        .copied()
        .collect()
}

fn random_signal(rng: &mut XorShift, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.signed()).collect()
}

fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len() - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect()
}

fn nearest(list: &[usize], target: f64) -> f64 {
    list.iter()
        .map(|&i| (i as f64 - target).abs())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn autocorrelation_matches_direct_sum() {
    let mut rng = XorShift::new(11);
    for len in [19, 64, 400, 1023] {
        let x = random_signal(&mut rng, len);
        let fast = lpc::autocorrelate(&x, 18).unwrap();
        let slow = brute_autocorrelation(&x, 18);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-10 * slow[0], "{a} vs {b}");
        }
    }
}

#[test]
fn levinson_matches_dense_solve_on_vowel_frames() {
    for (i, v) in VOWELS.iter().enumerate() {
        let x = synth_vowel(v, 110.0 + 10.0 * i as f64, 2400);
        let frame = hamming_frame(&x, 800, 400);
        let r = brute_autocorrelation(&frame, 18);
        let model = lpc::levinson_durbin(&r, 18).unwrap();
        for (a, b) in model.coefficients.iter().zip(toeplitz_solve(&r, 18)) {
            assert!((a - b).abs() < 1e-8, "vowel {i}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn levinson_matches_dense_solve(seed in any::<u64>(), order in 1usize..=18, len in 40usize..400) {
        let mut rng = XorShift::new(seed);
        let r = brute_autocorrelation(&random_signal(&mut rng, len), order);
        let model = lpc::levinson_durbin(&r, order).unwrap();
        let dense = toeplitz_solve(&r, order);
        for (a, b) in model.coefficients.iter().zip(&dense) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        prop_assert!(model.reflection.iter().all(|k| k.abs() < 1.0));
    }

    #[test]
    fn prediction_error_never_grows_with_order(seed in any::<u64>(), len in 40usize..400) {
        let mut rng = XorShift::new(seed);
        let r = brute_autocorrelation(&random_signal(&mut rng, len), 18);
        let errors: Vec<f64> = (1..=18)
            .map(|p| lpc::levinson_durbin(&r, p).unwrap().prediction_error)
            .collect();
        prop_assert!(errors[0] <= r[0]);
        for w in errors.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn envelope_is_positive_and_real_symmetric(seed in any::<u64>()) {
        let mut rng = XorShift::new(seed);
        let frame = random_signal(&mut rng, 400);
        let model = lpc::analyze_frame(&frame, 18, 0).unwrap();
        let env = lpc::envelope(&model, 512, FS).unwrap();
        prop_assert!(env.magnitudes.iter().all(|m| *m > 0.0 && m.is_finite()));
        // conjugate pole pairs: |H(f)| == |H(fs - f)|
        for f in [125.0, 1000.0, 3333.0, 7000.0] {
            let a = model.response_at(f, f64::from(FS));
            let b = model.response_at(f64::from(FS) - f, f64::from(FS));
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }
    }
}

#[test]
fn analytic_model_envelope_peaks_at_resonators() {
    let res = [(730.0, 0.97), (1090.0, 0.97), (2440.0, 0.97)];
    let model = resonator_model(&res, FS);
    let env = lpc::envelope(&model, 512, FS).unwrap();
    let peaks = local_maxima(&env.magnitudes);
    for (f, _) in res {
        assert!(
            nearest(&peaks, f / env.bin_hz) <= 2.0,
            "{f} Hz not near {peaks:?}"
        );
    }
}

#[test]
fn analyzed_envelope_peaks_at_resonators() {
    for v in &VOWELS {
        let x = synth_vowel(v, 100.0, 2400);
        let model = lpc::analyze_frame(&hamming_frame(&x, 1000, 400), 18, 0).unwrap();
        let env = lpc::envelope(&model, 512, FS).unwrap();
        let peaks = local_maxima(&env.magnitudes);
        for &(f, _) in v.iter().filter(|(f, _)| *f >= 400.0) {
            assert!(
                nearest(&peaks, f / env.bin_hz) <= 2.0,
                "{f} Hz not near {peaks:?}"
            );
        }
    }
}

#[test]
fn three_resonator_formants_recovered() {
    let res = [(730.0, 0.97), (1090.0, 0.97), (2440.0, 0.97)];
    let x = synth_vowel(&res, 100.0, 2400);
    let model = lpc::analyze_frame(&hamming_frame(&x, 1000, 400), 18, 0).unwrap();
    let formants = lpc::formants_from_poles(&model, FS).unwrap();
    for (f, _) in res {
        let best = formants
            .iter()
            .map(|c| (c.frequency_hz - f).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(best <= 10.0, "{f} Hz off by {best}");
    }
}

#[test]
fn formants_sit_on_envelope_maxima() {
    let x = synth_vowel(&VOWELS[2], 120.0, 2400);
    let model = lpc::analyze_frame(&hamming_frame(&x, 1000, 400), 18, 0).unwrap();
    let env = lpc::envelope(&model, 512, FS).unwrap();
    let peaks = local_maxima(&env.magnitudes);
    for f in lpc::formants_from_poles(&model, FS).unwrap() {
        if f.bandwidth_hz < 400.0 {
            assert!(nearest(&peaks, f.frequency_hz / env.bin_hz) <= 1.0, "{f:?}");
        }
    }
}

#[test]
fn pole_roots_match_construction() {
    let res = [(500.0, 0.95), (1500.0, 0.9), (2500.0, 0.8)];
    let model: LpcModel = resonator_model(&res, FS);
    let mut found: Vec<(f64, f64)> = lpc::poles(&model)
        .unwrap()
        .into_iter()
        .filter(|p| p.im > 0.0)
        .map(|p| (p.arg() * f64::from(FS) / std::f64::consts::TAU, p.norm()))
        .collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    for ((f, r), (gf, gr)) in res.iter().zip(&found) {
        assert!((f - gf).abs() < 1e-6 && (r - gr).abs() < 1e-9, "{gf} {gr}");
    }
}

#[test]
fn residual_is_flatter_than_raw() {
    let x = synth_vowel(&VOWELS[0], 130.0, 4000);
    let spectrum = lpc::Spectrum::new(512);
    for start in (400..3200).step_by(400) {
        let frame = hamming_frame(&x, start, 400);
        let model = lpc::analyze_frame(&frame, 18, 0).unwrap();
        let env = lpc::envelope(&model, 512, FS).unwrap();
        let raw = spectrum.magnitude(&frame).unwrap();
        let residual = lpc::residual_spectrum(&frame, &env, 512).unwrap();
        assert!(spectral_flatness(&residual) > spectral_flatness(&raw));
    }
}
