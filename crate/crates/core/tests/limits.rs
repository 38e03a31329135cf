use decoupled_core::limits::{sample_limit_path, LimitConfig, LimitProcess, Window};
use decoupled_core::rng::{map_replicates, StreamKey, REPLICATE_STREAM};
use decoupled_core::verify::{ks_two_sample, ks_two_sample_critical};

#[test]
fn x4_from_the_floor_agrees_with_exact_initial_value() {
    let x4 = LimitProcess::X4 { a_coef: 2.0, mu: 1.0 };
    let n = 5000;
    let draw = |seed: u64, bypass: bool| -> Vec<f64> {
        let cfg = LimitConfig { bypass_initial: bypass, ..LimitConfig::new(Window::new(0.0, 1.0).unwrap(), 1e-4) };
        map_replicates(n, 0, |r| {
            let mut rng = StreamKey::new(seed).replicate(r).stream(REPLICATE_STREAM);
            sample_limit_path(x4, &cfg, &mut rng).unwrap().path.value(1.0)
        })
    };
    let exact = draw(41, false);
    let bypass = draw(42, true);
    let d = ks_two_sample(&exact, &bypass);
    assert!(d < ks_two_sample_critical(n as usize, n as usize, 0.99).unwrap(), "D = {d}");
}

#[test]
fn paths_are_reproducible_from_their_stream() {
    let x2 = LimitProcess::X2 { alpha: 2.5, mu: 1.0 };
    let cfg = LimitConfig::new(Window::new(-1.0, 2.0).unwrap(), 1e-4);
    let key = StreamKey::new(5).replicate(17);
    let a = sample_limit_path(x2, &cfg, &mut key.stream(REPLICATE_STREAM)).unwrap();
    let b = sample_limit_path(x2, &cfg, &mut key.stream(REPLICATE_STREAM)).unwrap();
    assert_eq!(a, b);
}
