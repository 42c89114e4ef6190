use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slb_core::color::LinearImage;
use slb_sensor::*;

fn random_image(seed: u64, w: u32, h: u32) -> LinearImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LinearImage::from_raw(
        w,
        h,
        (0..w * h)
            .map(|_| [rng.random(), rng.random(), rng.random::<f32>() * 1.5])
            .collect(),
    )
}

fn mean_var(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn neutral_chain_is_plain_encoding() {
    let img = random_image(1, 64, 48);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let out = apply_camera_chain(&img, &CameraEffectParams::neutral(), (32.0, 24.0), &mut rng);
    assert_eq!(out, img.to_srgb8());
    let (_, taps) = apply_camera_chain_tapped(
        &img,
        &CameraEffectParams::neutral(),
        (32.0, 24.0),
        Stages::ALL,
        &mut rng,
    );
    assert_eq!(taps.noise, img);
}

#[test]
fn noise_variance_follows_the_model() {
    let (a, b) = (0.001, 0.0001);
    for level in [0.1f32, 0.3, 0.7] {
        let img = LinearImage::filled(400, 250, [level; 3]);
        let params = CameraEffectParams {
            shot_noise_a: a,
            read_noise_b: b,
            ..CameraEffectParams::neutral()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(level.to_bits() as u64);
        let (_, taps) =
            apply_camera_chain_tapped(&img, &params, (200.0, 125.0), Stages::ALL, &mut rng);
        for c in 0..3 {
            let (mean, var) = mean_var(taps.noise.pixels().iter().map(|p| p[c] as f64));
            let expected = a * level as f64 + b;
            assert!(
                (var - expected).abs() / expected <= 0.1,
                "variance {var} vs {expected}"
            );
            assert!(
                (mean - level as f64).abs() / level as f64 <= 0.01,
                "mean {mean} vs {level}"
            );
        }
    }
}

#[test]
fn one_stop_doubles_intensity() {
    let img = LinearImage::filled(4, 4, [0.25; 3]);
    let params = CameraEffectParams {
        exposure_ev: 1.0,
        ..CameraEffectParams::neutral()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (_, taps) = apply_camera_chain_tapped(&img, &params, (2.0, 2.0), Stages::ALL, &mut rng);
    assert!(taps
        .color_temperature
        .pixels()
        .iter()
        .all(|p| *p == [0.5; 3]));
}

#[test]
fn aberration_moves_red_outward() {
    let (w, h) = (401u32, 401u32);
    let mut img = LinearImage::new(w, h);
    img.set(300, 200, [1.0; 3]);
    let centre = (200.5, 200.5);
    let out = apply_chromatic_aberration(&img, 1.01, 1.0, centre);
    let (mut mx, mut my, mut m) = (0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            let v = out.get(x, y)[0] as f64;
            mx += v * (x as f64 + 0.5);
            my += v * (y as f64 + 0.5);
            m += v;
        }
    }
    let (cx, cy) = (mx / m, my / m);
    assert!((cx - (centre.0 + 101.0)).abs() <= 0.2, "centroid x {cx}");
    assert!((cy - centre.1).abs() <= 0.2);
    for (a, b) in img.pixels().iter().zip(out.pixels()) {
        assert_eq!(a[1].to_bits(), b[1].to_bits());
        assert_eq!(a[2].to_bits(), b[2].to_bits());
    }
    assert_eq!(apply_chromatic_aberration(&img, 1.0, 1.0, centre), img);
}

#[test]
fn color_temperature_gains() {
    assert_eq!(slb_sensor::color_temperature_gains(6500.0), [1.0; 3]);
    let img = random_image(3, 8, 8);
    let same = apply_color_temperature(&img, 6500.0);
    for (a, b) in img.pixels().iter().zip(same.pixels()) {
        for c in 0..3 {
            assert!((a[c] - b[c]).abs() <= 1e-6);
        }
    }
    let warm = slb_sensor::color_temperature_gains(3000.0);
    assert!(warm[0] > warm[2]);
    let cool = slb_sensor::color_temperature_gains(9000.0);
    assert!(cool[2] > cool[0]);
    for k in [2000.0, 12000.0] {
        let g = slb_sensor::color_temperature_gains(k);
        assert!(g.iter().all(|v| v.is_finite() && *v > 0.0), "{k}: {g:?}");
    }
    // Gains close to 6500 K are close to one.
    let near = slb_sensor::color_temperature_gains(6510.0);
    assert!(near.iter().all(|g| (g - 1.0).abs() < 0.01));
}

#[test]
fn blur_preserves_constant_images() {
    let img = LinearImage::filled(30, 20, [0.4, 0.2, 0.9]);
    let out = apply_blur(&img, 1.7);
    for p in out.pixels() {
        for c in 0..3 {
            assert!((p[c] - img.pixels()[0][c]).abs() < 1e-5);
        }
    }
    assert_eq!(apply_blur(&img, 0.0), img);
}

#[test]
fn parameter_sampling() {
    let fixed = EffectRanges {
        ca_scale_red: Range::new(1.003, 1.003),
        ca_scale_blue: Range::new(0.997, 0.997),
        blur_sigma: Range::new(1.25, 1.25),
        exposure_ev: Range::new(-0.5, -0.5),
        shot_noise_a: Range::new(0.001, 0.001),
        read_noise_b: Range::new(0.0002, 0.0002),
        color_temp_kelvin: Range::new(4100.0, 4100.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = sample_effect_params(&mut rng, &fixed);
    assert_eq!(
        p,
        CameraEffectParams {
            ca_scale_red: 1.003,
            ca_scale_blue: 0.997,
            blur_sigma: 1.25,
            exposure_ev: -0.5,
            shot_noise_a: 0.001,
            read_noise_b: 0.0002,
            color_temp_kelvin: 4100.0
        }
    );
    let ranges = EffectRanges::default();
    assert!(ranges.validate().is_ok());
    let a = sample_effect_params(&mut ChaCha8Rng::seed_from_u64(42), &ranges);
    let b = sample_effect_params(&mut ChaCha8Rng::seed_from_u64(42), &ranges);
    assert_eq!(a, b);
    assert!(a.validate().is_ok());

    let wide = EffectRanges {
        blur_sigma: Range::new(0.0, 3.0),
        ..ranges
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 10_000;
    let mean = (0..n)
        .map(|_| sample_effect_params(&mut rng, &wide).blur_sigma)
        .sum::<f64>()
        / n as f64;
    let sigma = 3.0 / 12f64.sqrt() / (n as f64).sqrt();
    assert!((mean - 1.5).abs() <= 3.0 * sigma, "mean {mean}");

    let bad = EffectRanges {
        color_temp_kelvin: Range::new(1000.0, 5000.0),
        ..ranges
    };
    assert!(bad.validate().is_err());
}

#[test]
fn chain_is_deterministic_per_seed() {
    let img = random_image(8, 40, 30);
    let params = sample_effect_params(&mut ChaCha8Rng::seed_from_u64(1), &EffectRanges::default());
    let run = |seed| {
        apply_camera_chain(
            &img,
            &params,
            (20.0, 15.0),
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

#[test]
fn disabled_stages_pass_through() {
    let img = random_image(9, 20, 20);
    let params = sample_effect_params(&mut ChaCha8Rng::seed_from_u64(2), &EffectRanges::default());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (out, taps) =
        apply_camera_chain_tapped(&img, &params, (10.0, 10.0), Stages::NONE, &mut rng);
    assert_eq!(out, img.to_srgb8());
    assert_eq!(taps.noise, img);
    // Bypassing only the noise keeps the upstream taps.
    let mut r1 = ChaCha8Rng::seed_from_u64(0);
    let mut r2 = ChaCha8Rng::seed_from_u64(0);
    let (_, full) = apply_camera_chain_tapped(&img, &params, (10.0, 10.0), Stages::ALL, &mut r1);
    let (_, quiet) = apply_camera_chain_tapped(
        &img,
        &params,
        (10.0, 10.0),
        Stages {
            noise: false,
            ..Stages::ALL
        },
        &mut r2,
    );
    assert_eq!(full.color_temperature, quiet.color_temperature);
    assert_eq!(quiet.noise, quiet.color_temperature);
}

proptest! {
    #[test]
    fn exposure_is_monotone(ev1 in -3.0..3.0f64, d in 0.0..2.0f64, seed in 0u64..1000) {
        let img = random_image(seed, 8, 8);
        let lo = apply_exposure(&img, ev1);
        let hi = apply_exposure(&img, ev1 + d);
        for (a, b) in lo.pixels().iter().zip(hi.pixels()) {
            for c in 0..3 {
                prop_assert!(a[c] <= b[c]);
            }
        }
    }

    #[test]
    fn neutral_stages_are_identities(seed in 0u64..1000) {
        let img = random_image(seed, 9, 7);
        prop_assert_eq!(&apply_chromatic_aberration(&img, 1.0, 1.0, (4.5, 3.5)), &img);
        prop_assert_eq!(&apply_blur(&img, 0.0), &img);
        prop_assert_eq!(&apply_exposure(&img, 0.0), &img);
        prop_assert_eq!(&apply_color_temperature(&img, 6500.0), &img);
        prop_assert_eq!(&apply_noise(&img, 0.0, 0.0, &mut ChaCha8Rng::seed_from_u64(seed)), &img);
    }
}
