use isar_core::clutter::{
    clutter_range_profile, doppler_shape, inject_clutter, inject_field, linear_fit, sample_sigma0, ClutterConfig,
    ClutterField, ClutterParams, DopplerShape, RangeProfile, WIND_LADDER,
};
use isar_core::echo::{RadarConfig, RadarParams, RawDataCube};
use isar_core::imaging::{form_image, Corruption, Window};
use isar_core::scalar::SPEED_OF_LIGHT;
use isar_core::Image;
use ndarray::Array2;
use num_complex::Complex;
use proptest::prelude::*;

fn radar() -> RadarParams {
    RadarParams::from_config(&RadarConfig::default()).unwrap()
}

fn params(wind: f64) -> ClutterParams {
    ClutterParams::new(&ClutterConfig { seed: 11, ..ClutterConfig::default() }, &radar(), wind).unwrap()
}

fn small_image(m: usize, n: usize, value: Complex<f64>) -> Image {
    let pri = 1e-4;
    let params = RadarParams::from_config(&RadarConfig {
        pri_s: Some(pri),
        cpi_s: pri * m as f64,
        range_span_m: n as f64 * SPEED_OF_LIGHT / (2.0 * 60e12 * pri),
        ..RadarConfig::default()
    })
    .unwrap();
    let cube = RawDataCube {
        data: Array2::from_elem((m, n), value),
        crp: 20.0,
        center_doppler_removed: true,
        cpi_index: 2,
        t_start: 0.1,
        params,
        stats: Default::default(),
    };
    form_image(&cube, Window::None)
}

#[test]
fn sigma0_mean_matches_asphalt() {
    let p = params(2.5);
    let draws = sample_sigma0(&p, 0, 1_000_000);
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!((mean / 10f64.powf(-1.5) - 1.0).abs() < 0.01, "{mean}");
    assert!(draws.iter().all(|&x| x > 0.0));
}

#[test]
fn doubling_range_follows_closed_form() {
    let p = params(2.5);
    let r = radar();
    let ranges = [5.0, 10.0, 20.0, 40.0, 80.0];
    let prof = clutter_range_profile(&p, &r, &ranges, &[1.0; 5]);
    let sec = |x: f64| 1.0 / (1.0 - (p.radar_height / x).powi(2)).sqrt();
    for i in 0..4 {
        let want = 0.125 * sec(ranges[i + 1]) / sec(ranges[i]);
        assert!((prof.power[i + 1] / prof.power[i] / want - 1.0).abs() < 1e-12);
    }
    let direct = r.tx_power * r.tx_gain * r.rx_gain * p.beamwidth * p.range_resolution * sec(10.0)
        / ((4.0 * std::f64::consts::PI).powi(2) * 1000.0);
    assert!((prof.power[1] / direct - 1.0).abs() < 1e-12);
}

#[test]
fn far_range_slope_is_minus_three() {
    let p = params(2.5);
    let ranges: Vec<f64> = (0..=150).map(|i| 50.0 + i as f64).collect();
    let prof = clutter_range_profile(&p, &radar(), &ranges, &vec![0.03; ranges.len()]);
    let pts: Vec<(f64, f64)> = ranges.iter().zip(&prof.power).map(|(r, c)| (r.ln(), c.ln())).collect();
    let (slope, _) = linear_fit(&pts).unwrap();
    assert!((slope + 3.0).abs() < 0.05, "{slope}");
}

#[test]
fn zero_clutter_leaves_image_unchanged() {
    let img = small_image(8, 6, Complex::new(0.3, -0.2));
    let p = ClutterParams { beamwidth: 0.0, ..params(5.0) };
    let (out, field) = inject_clutter(img.clone(), &p, &radar(), 1).unwrap();
    assert!(field.power.iter().all(|&c| c == 0.0));
    assert_eq!(out.complex, img.complex);
    assert_eq!(out.power, img.power);
    assert_eq!(out.meta.corruption, Corruption::Clutter { wind_mps: 5.0, seed: 11 });
}

#[test]
fn empty_scene_peaks_at_dc_and_is_reproducible() {
    for wind in WIND_LADDER {
        let img = small_image(120, 40, Complex::new(0.0, 0.0));
        let (a, _) = inject_clutter(img.clone(), &params(wind), &radar(), 4).unwrap();
        let (b, _) = inject_clutter(img.clone(), &params(wind), &radar(), 4).unwrap();
        let (c, _) = inject_clutter(img, &params(wind), &radar(), 5).unwrap();
        assert_eq!(a.complex, b.complex);
        assert_ne!(a.complex, c.complex);
        let dc = a.zero_doppler_row();
        for j in 0..a.num_range() {
            let col = a.power.column(j);
            let best = (0..col.len()).max_by(|&x, &y| col[x].total_cmp(&col[y])).unwrap();
            assert_eq!(best, dc, "U = {wind}, bin {j}");
        }
    }
}

#[test]
fn independent_injections_add_noncoherently() {
    let (m, n) = (2, 2);
    let base = small_image(m, n, Complex::new(1e-4, 0.0));
    let c = 3e-10;
    let field = ClutterField {
        power: Array2::from_elem((m, n), c),
        range_profile: RangeProfile { power: vec![c; n], skipped: vec![] },
        shape: DopplerShape { exponent: 0.0, width_hz: 0.0, factor: vec![1.0; m] },
        sigma0: vec![1.0; n],
    };
    let chi0 = base.linear_power().unwrap()[[1, 1]];
    let trials = 10_000;
    let mut acc = 0.0;
    for k in 0..trials {
        let once = inject_field(base.clone(), &field, 3, 2 * k).unwrap();
        let twice = inject_field(once, &field, 3, 2 * k + 1).unwrap();
        acc += twice.linear_power().unwrap()[[1, 1]];
    }
    let mean = acc / trials as f64;
    let want = chi0 + 2.0 * c;
    assert!((mean / want - 1.0).abs() < 0.03, "{mean} vs {want}");
}

#[test]
fn missing_complex_data_is_an_error() {
    let mut img = small_image(4, 4, Complex::new(1.0, 0.0));
    img.complex = None;
    assert!(inject_clutter(img, &params(2.5), &radar(), 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shape_is_even_and_peaks_at_dc(wind in 0.1f64..12.0, f in 1.0f64..20000.0) {
        let s = doppler_shape(wind, 77e9, &[-f, 0.0, f]);
        prop_assert_eq!(s.factor[1], 1.0);
        prop_assert_eq!(s.factor[0], s.factor[2]);
        prop_assert!(s.factor[0] < 1.0 && s.factor[0] > 0.0);
    }

    #[test]
    fn field_dc_row_equals_range_profile(wind in 0.0f64..12.0, key in any::<u64>()) {
        let p = params(wind);
        let ranges: Vec<f64> = (0..30).map(|i| 0.2 + i as f64 * 1.5).collect();
        let doppler: Vec<f64> = (-8..8).map(|i| i as f64 * 500.0).collect();
        let field = ClutterField::new(&p, &radar(), &ranges, &doppler, key);
        prop_assert!(field.power.iter().all(|&c| c >= 0.0));
        for j in 0..ranges.len() {
            prop_assert_eq!(field.power[[8, j]], field.range_profile.power[j]);
        }
        prop_assert_eq!(&field.range_profile.skipped, &vec![0]);
    }
}
