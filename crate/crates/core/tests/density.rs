use std::f64::consts::PI;
use std::fs;

use crc::{Crc, CRC_64_XZ};
use gsrep::density::builtin::{builtin_density, BuiltinKind, DensityParams};
use gsrep::density::grid::{load_grid_density, write_grid_density, GridAxis, GridDensity};
use gsrep::density::PhaseDensity;
use gsrep::{Error, Vec3, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

fn fft3(values: &mut [C64], n: usize) {
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut line = vec![C64::new(0.0, 0.0); n];
    for stride in [1, n, n * n] {
        for start in 0..n * n * n {
            if (start / stride) % n != 0 {
                continue;
            }
            for (i, l) in line.iter_mut().enumerate() {
                *l = values[start + i * stride];
            }
            fft.process(&mut line);
            for (i, l) in line.iter().enumerate() {
                values[start + i * stride] = *l;
            }
        }
    }
}

#[test]
fn gaussian_transform_matches_fft() {
    let params = DensityParams { amplitude: 1.3, width_x: 1.0, width_p: 0.8, center: [0.7, -0.3, 0.2] };
    let f = builtin_density(BuiltinKind::Gaussian, &params).unwrap();
    let p = Vec3::new(0.3, -0.1, 0.5);
    let (n, length) = (32usize, 16.0);
    let h = length / n as f64;
    let coord = |i: usize| -0.5 * length + h * i as f64;
    let mut values = vec![C64::new(0.0, 0.0); n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                values[(a * n + b) * n + c] = C64::new(f.evaluate(0.0, &Vec3::new(coord(a), coord(b), coord(c)), &p), 0.0);
            }
        }
    }
    // index order is (x1, x2, x3) with x3 fastest, matching strides n², n, 1
    fft3(&mut values, n);
    let peak = f.fourier_x(0.0, &Vec3::zeros(), &p).unwrap().norm();
    let step = 2.0 * PI / length;
    for (ka, kb, kc) in [(0i64, 0i64, 0i64), (1, 0, 0), (2, -3, 1), (-5, 4, 6), (8, 0, -2)] {
        let xi = Vec3::new(ka as f64, kb as f64, kc as f64) * step;
        let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
        let origin = C64::from_polar(1.0, 0.5 * length * (xi.x + xi.y + xi.z));
        let oracle = values[(wrap(ka) * n + wrap(kb)) * n + wrap(kc)] * h.powi(3) * origin;
        let got = f.fourier_x(0.0, &xi, &p).unwrap();
        assert!((got - oracle).norm() <= 1e-8 * peak, "ξ {xi:?}: {got} vs {oracle}");
    }
}

#[test]
fn transform_at_zero_is_mass() {
    let f = builtin_density(BuiltinKind::CompactBump, &DensityParams { width_x: 1.5, ..DensityParams::default() }).unwrap();
    let p = Vec3::new(0.1, 0.0, 0.2);
    let g = gsrep::special::quadrature::gauss_legendre(48);
    // radial profile of the bump, panels split at the plateau edge
    let mass: f64 = [(0.0, 0.75), (0.75, 1.5)].iter().map(|&(a, b)| g.integrate(a, b, |r| 4.0 * PI * r * r * f.evaluate(0.0, &Vec3::new(r, 0.0, 0.0), &p))).sum();
    let got = f.fourier_x(0.0, &Vec3::zeros(), &p).unwrap();
    assert!((got.re - mass).abs() <= 1e-9 * mass && got.im == 0.0, "{got} vs {mass}");
}

fn sampled_gaussian(n: usize, half: f64) -> GridDensity {
    let f = builtin_density(BuiltinKind::Gaussian, &DensityParams::default()).unwrap();
    let axis = GridAxis::new(-half, half, n);
    GridDensity::sample(f.as_ref(), [axis; 6], vec![0.0, 1.0]).unwrap()
}

#[test]
fn grid_interpolant_tracks_analytic_density() {
    let grid = sampled_gaussian(7, 0.1);
    let f = builtin_density(BuiltinKind::Gaussian, &DensityParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let x = Vec3::from_fn(|_, _| rng.gen_range(-0.1..0.1));
        let p = Vec3::from_fn(|_, _| rng.gen_range(-0.1..0.1));
        let t = rng.gen_range(0.0..1.5);
        let want = f.evaluate(t, &x, &p);
        assert!((grid.evaluate(t, &x, &p) - want).abs() <= 1e-3 * want);
    }
}

#[test]
fn grid_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = sampled_gaussian(4, 2.0);
    let manifest = write_grid_density(&grid, dir.path(), "g").unwrap();
    let back = load_grid_density(&manifest).unwrap();
    assert_eq!(back.values(), grid.values());
    assert_eq!(back.times(), grid.times());
    let x = Vec3::new(0.3, -0.2, 1.1);
    let p = Vec3::new(0.5, 0.0, -0.4);
    assert_eq!(back.evaluate(0.7, &x, &p), grid.evaluate(0.7, &x, &p));
    assert_eq!(back.fourier_x(0.0, &x, &p), grid.fourier_x(0.0, &x, &p));
}

#[test]
fn zero_payload_evaluates_to_zero() {
    let axis = GridAxis::new(-1.0, 1.0, 3);
    let grid = GridDensity::new("zero", [axis; 6], vec![0.0], vec![0.0; 729]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let x = Vec3::from_fn(|_, _| rng.gen_range(-1.5..1.5));
        let p = Vec3::from_fn(|_, _| rng.gen_range(-1.5..1.5));
        assert_eq!(grid.evaluate(0.0, &x, &p), 0.0);
    }
    assert_eq!(grid.fourier_x(0.0, &Vec3::new(1.0, 2.0, 3.0), &Vec3::zeros()), Some(C64::new(0.0, 0.0)));
}

#[test]
fn short_payload_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let grid = sampled_gaussian(4, 2.0);
    let manifest = write_grid_density(&grid, dir.path(), "g").unwrap();
    // drop one 5-d slab and keep the checksum consistent so only the shape is wrong
    let payload = dir.path().join("g.bin");
    let bytes = fs::read(&payload).unwrap();
    let short = &bytes[..bytes.len() / 4];
    fs::write(&payload, short).unwrap();
    let crc = Crc::<u64>::new(&CRC_64_XZ).checksum(short);
    let text = fs::read_to_string(&manifest).unwrap();
    let old = Crc::<u64>::new(&CRC_64_XZ).checksum(&bytes);
    fs::write(&manifest, text.replace(&format!("{old:016x}"), &format!("{crc:016x}"))).unwrap();
    match load_grid_density(&manifest) {
        Err(Error::Ingestion { field, .. }) => assert_eq!(field, "payload"),
        other => panic!("expected an ingestion error, got {other:?}"),
    }
}

#[test]
fn corrupted_payload_fails_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_grid_density(&sampled_gaussian(3, 1.0), dir.path(), "g").unwrap();
    let payload = dir.path().join("g.bin");
    let mut bytes = fs::read(&payload).unwrap();
    bytes[10] ^= 0xff;
    fs::write(&payload, bytes).unwrap();
    match load_grid_density(&manifest) {
        Err(Error::Ingestion { field, .. }) => assert_eq!(field, "crc64"),
        other => panic!("expected a checksum error, got {other:?}"),
    }
}
