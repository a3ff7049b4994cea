use emdsep::experiments::synthetic::{synthetic_speech, SpeakerProfile};
use emdsep::format::write_decomposition_csv;
use emdsep::{
    ceemdan, decompose, eemd, emd, gaussian_noise, is_imf, load_wav, mix, save_wav, synth_sine,
    EnsembleConfig, Method, SiftConfig, Signal, Signal32, Signal64,
};
use proptest::prelude::*;

fn small() -> EnsembleConfig {
    EnsembleConfig {
        trials: 8,
        ..EnsembleConfig::default()
    }
}

fn two_tone() -> Signal64 {
    let a = synth_sine(700.0, 1.0, 0.0, 0.25, 8000).unwrap();
    let b = synth_sine(150.0, 1.0, 0.0, 0.25, 8000).unwrap();
    mix(&a, &b, 1.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn emd_reconstructs_exactly(x in proptest::collection::vec(-10.0f64..10.0, 16..400)) {
        let s = Signal::new(x, 8000).unwrap();
        let d = emd(&s, &SiftConfig::default()).unwrap();
        prop_assert!(d.reconstruction_error(&s) <= 1e-12);
        for imf in &d.imfs {
            prop_assert!(is_imf(imf));
        }
    }

    #[test]
    fn ceemdan_reconstructs_exactly(seed in 0u64..1000, len in 64usize..512) {
        let s: Signal64 = gaussian_noise(len, seed, 0).unwrap();
        let cfg = EnsembleConfig { trials: 4, ..EnsembleConfig::default() };
        let out = ceemdan(&s, &cfg).unwrap();
        prop_assert!(out.decomposition.reconstruction_error(&s) <= 1e-10);
        prop_assert!(out.raw_defect(&s) <= 1e-10);
    }
}

#[test]
fn eemd_closes_the_sum_but_raw_average_does_not() {
    let x = two_tone();
    let out = eemd(&x, &small()).unwrap();
    assert!(out.decomposition.reconstruction_error(&x) <= 1e-10);
    assert!(out.raw_defect(&x) > 1e-6);
}

#[test]
fn ensemble_runs_are_reproducible_and_seed_dependent() {
    let x = two_tone();
    let a = ceemdan(&x, &small()).unwrap();
    let b = ceemdan(&x, &small()).unwrap();
    assert_eq!(a, b);
    let other = EnsembleConfig {
        base_seed: 1,
        ..small()
    };
    assert_ne!(ceemdan(&x, &other).unwrap().decomposition, a.decomposition);
}

#[test]
fn imfs_run_from_high_to_low_frequency_on_two_tones() {
    let x = two_tone();
    let d = emd(&x, &SiftConfig::default()).unwrap();
    let zc = |s: &Signal64| s.samples().windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
    for pair in d.imfs.windows(2) {
        assert!(zc(&pair[0]) >= zc(&pair[1]));
    }
}

#[test]
fn single_precision_follows_double() {
    let x64 = two_tone();
    let x32: Signal32 = x64.cast();
    let d32 = emd(&x32, &SiftConfig::default()).unwrap();
    assert!(d32.reconstruction_error(&x32) <= 1e-5);
    let d64 = emd(&x64, &SiftConfig::default()).unwrap();
    assert!(d32.mode_count().abs_diff(d64.mode_count()) <= 1);
}

#[test]
fn method_dispatch_matches_direct_calls() {
    let x = two_tone();
    let via = decompose(&x, Method::Ceemdan, &small()).unwrap();
    assert_eq!(via, ceemdan(&x, &small()).unwrap());
    let plain = decompose(&x, Method::Emd, &small()).unwrap();
    assert_eq!(plain.decomposition, emd(&x, &small().sift).unwrap());
}

#[test]
fn wav_round_trip_keeps_speech_within_quantization() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("speech.wav");
    let s = synthetic_speech(&SpeakerProfile::female(4), 0.2, 8000).unwrap();
    save_wav(&s, &path).unwrap();
    let back: Signal64 = load_wav(&path).unwrap();
    assert_eq!(back.len(), s.len());
    assert_eq!(back.sample_rate(), 8000);
    let worst = s
        .samples()
        .iter()
        .zip(back.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1.0 / 32768.0);
}

#[test]
fn decomposition_csv_has_one_row_per_sample() {
    let x = two_tone();
    let d = emd(&x, &SiftConfig::default()).unwrap();
    let mut buf = Vec::new();
    write_decomposition_csv(&d, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(header.split(',').count(), d.mode_count() + 1);
    assert!(header.ends_with("residue"));
    assert_eq!(lines.count(), x.len());
}
