use std::f64::consts::PI;

use embodykit_core::data::default_acuity_table;
use embodykit_core::growth::AgeMonths;
use embodykit_core::vision::{
    acuity_for_age, apply_csf_filter, csf_filter_unclamped, csf_gain, foveate, laplacian_energy, log_polar_radius,
    radial_warp, vision_pipeline, FoveationParams, ImageBuffer, PipelineOrder,
};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn random_image(w: usize, h: usize, channels: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h * channels)
        .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
        .collect();
    ImageBuffer::new(w, h, channels, data, 60.0).unwrap()
}

/// Direct-summation DFT, per-bin gain, direct-summation inverse. Single channel.
fn naive_filter(img: &ImageBuffer, acuity: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let signed = |k: usize, n: usize| if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    let fov_y = img.fov_deg() * h as f64 / w as f64;
    let mut spectrum = vec![(0.0, 0.0); w * h];
    for ky in 0..h {
        for kx in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = -2.0 * PI * (kx as f64 * x as f64 / w as f64 + ky as f64 * y as f64 / h as f64);
                    let v = img.get(x, y, 0);
                    re += v * phase.cos();
                    im += v * phase.sin();
                }
            }
            let f = (signed(kx, w) / img.fov_deg()).hypot(signed(ky, h) / fov_y);
            let g = if f < acuity { 1.0 - f / acuity } else { 0.0 };
            spectrum[ky * w + kx] = (re * g, im * g);
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut re = 0.0;
            for ky in 0..h {
                for kx in 0..w {
                    let phase = 2.0 * PI * (kx as f64 * x as f64 / w as f64 + ky as f64 * y as f64 / h as f64);
                    let (sr, si) = spectrum[ky * w + kx];
                    re += sr * phase.cos() - si * phase.sin();
                }
            }
            out[y * w + x] = re / (w * h) as f64;
        }
    }
    out
}

#[test]
fn fft_filter_matches_direct_dft() {
    for seed in 0..4 {
        let img = random_image(8, 8, 1, seed);
        let fast = csf_filter_unclamped(&img, 0.07);
        let slow = naive_filter(&img, 0.07);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn gain_endpoints() {
    assert_eq!(csf_gain(0.0, 3.0), 1.0);
    assert_eq!(csf_gain(1.5, 3.0), 0.5);
    assert_eq!(csf_gain(3.0, 3.0), 0.0);
    assert_eq!(csf_gain(6.0, 3.0), 0.0);
}

#[test]
fn grating_attenuates_linearly() {
    let (w, h, cycles, amp) = (64, 32, 4.0, 0.3);
    let img = ImageBuffer::from_fn(w, h, 1, 60.0, |x, _, _| {
        0.5 + amp * (2.0 * PI * cycles * x as f64 / w as f64).cos()
    })
    .unwrap();
    let f0 = cycles / 60.0;
    let acuity = 0.2;
    let out = csf_filter_unclamped(&img, acuity);
    let mean = out.iter().sum::<f64>() / out.len() as f64;
    let measured = 2.0
        * out
            .iter()
            .enumerate()
            .map(|(i, v)| (v - mean) * (2.0 * PI * cycles * (i % w) as f64 / w as f64).cos())
            .sum::<f64>()
        / out.len() as f64;
    assert!((mean - 0.5).abs() < 1e-9);
    assert!((measured - amp * (1.0 - f0 / acuity)).abs() < 1e-6, "{measured}");
}

fn deviation_energy(v: &[f64], channels: usize, c: usize) -> f64 {
    let plane: Vec<f64> = v.iter().skip(c).step_by(channels).copied().collect();
    let m = plane.iter().sum::<f64>() / plane.len() as f64;
    plane.iter().map(|x| (x - m).powi(2)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn filter_is_linear_and_mean_preserving(seed in any::<u64>(), acuity in 0.01f64..2.0) {
        let x = random_image(12, 10, 3, seed);
        let y = random_image(12, 10, 3, seed.wrapping_add(1));
        let mix: Vec<f64> = x.data().iter().zip(y.data()).map(|(a, b)| 0.3 * a + 0.6 * b).collect();
        let xy = ImageBuffer::new(12, 10, 3, mix, 60.0).unwrap();
        let (fx, fy, fxy) = (csf_filter_unclamped(&x, acuity), csf_filter_unclamped(&y, acuity), csf_filter_unclamped(&xy, acuity));
        for i in 0..fxy.len() {
            prop_assert!((fxy[i] - (0.3 * fx[i] + 0.6 * fy[i])).abs() < 1e-9);
        }
        for c in 0..3 {
            let mean_in: f64 = x.data().iter().skip(c).step_by(3).sum::<f64>();
            let mean_out: f64 = fx.iter().skip(c).step_by(3).sum::<f64>();
            prop_assert!((mean_in - mean_out).abs() / 120.0 < 1e-9);
            prop_assert!(deviation_energy(&fx, 3, c) <= deviation_energy(x.data(), 3, c) + 1e-9);
        }
    }

    #[test]
    fn warp_is_monotone_below_identity(alpha in 0.01f64..8.0, radius in 1.0f64..500.0) {
        let mut last = -1.0;
        for k in 0..=1000 {
            let r = radius * (k as f64 / 1000.0);
            let g = radial_warp(r, radius, alpha);
            prop_assert!(g > last);
            prop_assert!(g <= r);
            last = g;
        }
        prop_assert_eq!(radial_warp(0.0, radius, alpha), 0.0);
        prop_assert_eq!(radial_warp(radius, radius, alpha), radius);
    }
}

#[test]
fn blur_decreases_with_age() {
    let table = default_acuity_table().unwrap();
    let img = random_image(64, 48, 1, 7);
    let energies: Vec<f64> = [1.0, 2.0, 4.0, 6.0, 12.0]
        .iter()
        .map(|&age| {
            let acuity = acuity_for_age(&table, AgeMonths::new(age).unwrap()).unwrap();
            laplacian_energy(&apply_csf_filter(&img, acuity))
        })
        .collect();
    assert!(energies.windows(2).all(|w| w[0] < w[1]), "{energies:?}");
}

#[test]
fn warp_midpoint_agrees_with_inverted_log_polar_map() {
    let r = 100.0;
    let direct = radial_warp(r / 2.0, r, 3.0);
    assert!((direct / r - (1.5f64.exp() - 1.0) / (3.0f64.exp() - 1.0)).abs() < 1e-12);
    assert!((direct / r - 0.1824).abs() < 1e-4);
    let (mut lo, mut hi) = (0.0, r);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_polar_radius(mid, r, 3.0) < r / 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((0.5 * (lo + hi) - direct).abs() < 1e-9);
}

#[test]
fn zero_warp_is_identity_resample() {
    let img = random_image(17, 11, 3, 3);
    let out = foveate(&img, &FoveationParams::same_size(0.0, &img).unwrap());
    for (a, b) in out.data().iter().zip(img.data()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn sharp_unwarped_pipeline_is_near_identity() {
    let img = random_image(32, 24, 3, 5);
    let params = FoveationParams::same_size(0.0, &img).unwrap();
    for order in [PipelineOrder::AcuityThenFoveation, PipelineOrder::FoveationThenAcuity] {
        let out = vision_pipeline(&img, 1e9, &params, order);
        for (a, b) in out.to_bytes().iter().zip(img.to_bytes()) {
            assert!(a.abs_diff(b) <= 2);
        }
    }
}

#[test]
fn white_stays_white() {
    let img = ImageBuffer::from_fn(20, 10, 3, 60.0, |_, _, _| 1.0).unwrap();
    let params = FoveationParams::same_size(2.0, &img).unwrap();
    let out = vision_pipeline(&img, 0.5, &params, PipelineOrder::default());
    assert!(out.to_bytes().iter().all(|&b| b == 255));
}
