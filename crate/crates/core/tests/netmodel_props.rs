use proptest::prelude::*;
use vqoe::dataset::VideoVolume;
use vqoe::netmodel::{
    builtin_presets, delay, embed_delay, stall_frames, strip_stall, throughput, ClipTransmission,
    NetworkCondition, StallMode,
};
use vqoe::Tensor;

fn rate(mss: f64, rtt: f64, loss: f64) -> f64 {
    throughput(&NetworkCondition::new(mss, rtt, loss).unwrap()).unwrap()
}

#[test]
fn throughput_is_monotone_on_grids() {
    let grid: Vec<f64> = (1..=40).map(|i| i as f64).collect();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        assert!(rate(1500.0, a * 0.005, 0.01) > rate(1500.0, b * 0.005, 0.01));
        assert!(rate(1500.0, 0.02, a * 0.0025) > rate(1500.0, 0.02, b * 0.0025));
        assert!(rate(a * 100.0, 0.02, 0.01) < rate(b * 100.0, 0.02, 0.01));
    }
}

#[test]
fn unit_inputs_give_the_constant() {
    assert!((rate(0.125, 1.0, 1.0) - 1.22).abs() < 1e-12);
}

#[test]
fn presets_match_or_are_flagged() {
    for p in builtin_presets() {
        assert!(p.inconsistent || p.relative_gap().abs() <= 0.02, "{}", p.name);
    }
}

#[test]
fn ten_second_stall_on_300_frames() {
    let luma = Tensor::from_fn([2, 2, 300], |i| (i % 251) as f64);
    let vol = VideoVolume::new(luma, 25.0).unwrap();
    let out = embed_delay(&vol, 10.0, 25.0, StallMode::Freeze).unwrap();
    assert_eq!(out.frames(), 550);
    assert_eq!(out.frame_bytes(0), vol.frame_bytes(0));
    assert_eq!(out.frame_bytes(249), vol.frame_bytes(0));
    assert_eq!(out.frame_bytes(250), vol.frame_bytes(0));
    assert_eq!(out.frame_bytes(251), vol.frame_bytes(1));
    let black = embed_delay(&vol, 10.0, 25.0, StallMode::Black).unwrap();
    assert!(black.frame_bytes(100).iter().all(|&b| b == 0));
    assert_eq!(embed_delay(&vol, 0.0, 25.0, StallMode::Freeze).unwrap(), vol);
}

proptest! {
    #[test]
    fn delay_is_linear(b in 1.0f64..1e8, n in 0.1f64..600.0, r in 1e3f64..1e9) {
        let d = |b: f64, n: f64| delay(&ClipTransmission::new(b, n, 25.0).unwrap(), r).unwrap();
        prop_assert_eq!(d(2.0 * b, n), 2.0 * d(b, n));
        prop_assert_eq!(d(b, 2.0 * n), 2.0 * d(b, n));
    }

    #[test]
    fn embed_then_strip_is_identity(
        w in 1usize..5, h in 1usize..5, f in 1usize..6,
        delay_s in 0.0f64..2.0, seed in any::<u64>(), black in any::<bool>(),
    ) {
        let luma = Tensor::from_fn([h, w, f], |i| ((i as u64).wrapping_mul(seed | 1) % 256) as f64);
        let vol = VideoVolume::new(luma, 25.0).unwrap();
        let mode = if black { StallMode::Black } else { StallMode::Freeze };
        let stalled = embed_delay(&vol, delay_s, 25.0, mode).unwrap();
        let n = stall_frames(delay_s, 25.0).unwrap();
        prop_assert_eq!(stalled.frames(), f + n);
        prop_assert_eq!(strip_stall(&stalled, n).unwrap(), vol);
    }
}
