use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gsrep(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsrep")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const ZERO: &str = r#"
schema_version = 1
times = [0.5, 1.0]

[density]
source = "builtin"
name = "zero"

[spectral]
j_max = 4

[bounds]
bernstein_j = [1, 2]
block_j = [1]
caps = { k = 1, m = 1, n = 1 }
lemma22_j_max = 3
arithmetic_j_max = 6
refine = false
"#;

#[test]
fn bounds_on_zero_density_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "zero.toml", ZERO);
    let out = gsrep(&["bounds", "--config", &config, "--out", "run"], tmp.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    for name in ["bernstein", "lemma21", "lemma22", "lemma22_arithmetic", "exponents"] {
        assert!(stdout.contains(&format!("PASS {name} ")), "{name} missing:\n{stdout}");
        assert!(tmp.path().join("run").join(format!("{name}.json")).is_file());
    }
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("run/summary.json")).unwrap()).unwrap();
    assert!(summary.is_object());
}

#[test]
fn unknown_key_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "bad.toml", "schema_version = 1\n[bounds]\nrefinee = true\n");
    let out = gsrep(&["bounds", "--config", &config], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refinee"));
}

#[test]
fn invalid_value_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "bad.toml", "schema_version = 1\ntimes = [1.0, -2.0]\n");
    let out = gsrep(&["theorem", "--config", &config], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("times"));
}

#[test]
fn missing_schema_version_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "bad.toml", "times = [1.0]\n");
    let out = gsrep(&["bounds", "--config", &config], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version"));
}

#[test]
fn failed_check_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    // two different quadratures do not agree to 1e-14
    let config = write(
        tmp.path(),
        "strict.toml",
        r#"
schema_version = 1
times = [1.0]

[fields]
points_per_axis = 2
fourier_points = 1
fourier_tolerance = 1e-14
conservation_nodes = 8
cone = { radial_nodes = 6, sphere_degree = 7, momentum = { kind = "spherical", radius = 8.0, radial_nodes = 8, degree = 7 } }

[spectral.rules]
fft_size = 16
"#,
    );
    let out = gsrep(&["fields", "--config", &config, "--out", "run"], tmp.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("FAIL fourier_route"));
}

#[test]
fn seed_override_changes_hash_and_threads_do_not() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "k.toml", "schema_version = 1\n[kernels]\nsamples = 1000\n");
    let hash = |args: &[&str]| {
        let out = gsrep(args, tmp.path());
        assert!(out.status.success());
        let text = String::from_utf8_lossy(&out.stdout).into_owned();
        text.lines().find_map(|l| l.strip_prefix("config hash ")).unwrap().split(',').next().unwrap().to_string()
    };
    let base = hash(&["verify-kernels", "--config", &config, "--out", "a"]);
    assert_eq!(base, hash(&["verify-kernels", "--config", &config, "--out", "b", "--threads", "1"]));
    assert_ne!(base, hash(&["verify-kernels", "--config", &config, "--out", "c", "--seed", "9"]));
}
