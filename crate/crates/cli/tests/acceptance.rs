//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test --release -p gsrep-cli --test acceptance`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gsrep::density::builtin::{builtin_density, BuiltinKind, DensityParams};
use gsrep::density::{MomentumRule, PhaseDensity, PhaseRules, SpatialRule};
use gsrep::estimates::{
    check_bessel_asymptotics, check_conservation, check_exponents, check_filter_banks, check_fourier_route, check_lemma21, check_lemma22,
    check_lemma22_arithmetic, check_sphere_identity, check_theorem, partition_depth, ExponentLedger, TheoremRules,
};
use gsrep::fieldrep::ConeRule;
use gsrep::kinematics::verify_kernel_bounds;
use gsrep::report::EstimateReport;
use gsrep::special::filters::DyadicFilterBank;
use gsrep::spectral::{BinCaps, SpectralRules, XiGrid};

type Outcome = Result<(bool, String), String>;

const TIMES: [f64; 3] = [0.5, 1.0, 2.0];

fn density(kind: BuiltinKind) -> Box<dyn PhaseDensity> {
    builtin_density(kind, &DensityParams::default()).expect("builtin density")
}

fn summary(report: &EstimateReport) -> String {
    let mut s = format!("fitted_constant={} max_ratio={:.3e}", report.fitted_constant, report.max_ratio());
    for d in report.diagnostics.iter().filter(|d| d.starts_with("failed:")) {
        s.push_str(&format!("; {d}"));
    }
    s
}

fn timed(limit: Duration, f: impl FnOnce() -> gsrep::Result<EstimateReport>) -> Outcome {
    let start = Instant::now();
    let report = f().map_err(|e| e.to_string())?;
    let took = start.elapsed();
    Ok((report.pass && took < limit, format!("{}, {:.1} s (limit {} s)", summary(&report), took.as_secs_f64(), limit.as_secs())))
}

fn all_pass(reports: Vec<gsrep::Result<EstimateReport>>) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in reports {
        let r = r.map_err(|e| e.to_string())?;
        ok &= r.pass;
        parts.push(format!("{} {}", r.name, summary(&r)));
    }
    Ok((ok, parts.join(" | ")))
}

fn kernel_bound() -> Outcome {
    timed(Duration::from_secs(30), || verify_kernel_bounds(1_000_000, 0))
}

fn sphere_identity() -> Outcome {
    timed(Duration::from_secs(120), || check_sphere_identity(1000, 0, 100.0, 0.99))
}

fn bessel() -> Outcome {
    all_pass(vec![check_bessel_asymptotics(10.0, 1e4, 1e-2)])
}

fn filters() -> Outcome {
    all_pass(vec![check_filter_banks(12, partition_depth(1e-6), 1e-6, 100_000)])
}

fn fourier_route() -> Outcome {
    let f = density(BuiltinKind::Gaussian);
    timed(Duration::from_secs(600), || check_fourier_route(f.as_ref(), 1.0, &SpectralRules::default(), &ConeRule::default(), 5, 16, 1e-3))
}

fn block_sweep() -> Outcome {
    let bank = DyadicFilterBank::new(12);
    let js: Vec<u32> = (1..=8).collect();
    all_pass(
        [BuiltinKind::Gaussian, BuiltinKind::CompactBump]
            .into_iter()
            .map(|k| check_lemma21(density(k).as_ref(), &TIMES, &js, BinCaps::uniform(6), &bank, &SpectralRules::default(), &XiGrid::default(), true))
            .collect(),
    )
}

fn band_decay() -> Outcome {
    let bank = DyadicFilterBank::new(12);
    let mut reports: Vec<_> = [BuiltinKind::Gaussian, BuiltinKind::CompactBump]
        .into_iter()
        .map(|k| check_lemma22(density(k).as_ref(), &TIMES, 10, &bank, &SpectralRules::default(), &XiGrid::default()))
        .collect();
    reports.push(check_lemma22_arithmetic(&TIMES, 30, &ExponentLedger::default()));
    all_pass(reports)
}

fn exponents() -> Outcome {
    all_pass(vec![Ok(check_exponents(&ExponentLedger::default()))])
}

fn theorem() -> Outcome {
    let bank = DyadicFilterBank::new(12);
    let ledger = ExponentLedger::default();
    all_pass(
        [BuiltinKind::Gaussian, BuiltinKind::CompactBump, BuiltinKind::Zero]
            .into_iter()
            .map(|k| {
                let f = density(k);
                check_theorem(f.as_ref(), &TIMES, &ledger, &bank, &SpectralRules::default(), &XiGrid::default(), &TheoremRules::default()).map(|mut r| {
                    r.name = format!("theorem[{k}]");
                    r
                })
            })
            .collect(),
    )
}

fn conservation() -> Outcome {
    let f = density(BuiltinKind::FreeStreaming);
    let rules = PhaseRules {
        x: SpatialRule { center: [0.0; 3], radius: f.support_radius_x(2.0), nodes_per_axis: 40 },
        p: MomentumRule::Spherical { radius: f.support_radius_p(), radial_nodes: 16, degree: 7 },
    };
    all_pass(vec![check_conservation(f.as_ref(), &TIMES, &rules, 1e-10)])
}

fn json_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("output dir").flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "json") {
                let rel = path.strip_prefix(dir).expect("inside dir").to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).expect("readable report"));
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/light.toml");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let many = std::thread::available_parallelism().map_or(4, |n| n.get().max(4));
    let mut runs = Vec::new();
    for threads in [1, many] {
        let dir = tmp.path().join(format!("threads{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_gsrep"))
            .args(["all", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&dir)
            .args(["--threads", &threads.to_string()])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Ok((false, format!("run with {threads} threads exited with {}", status.status)));
        }
        runs.push(json_files(&dir));
    }
    let same = runs[0] == runs[1] && !runs[0].is_empty();
    Ok((same, format!("{} JSON reports compared at 1 and {many} threads", runs[0].len())))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("kernel bound sharpness", kernel_bound),
        ("sphere-to-Bessel identity", sphere_identity),
        ("Bessel asymptotics", bessel),
        ("filter banks", filters),
        ("Fourier-route cross-validation", fourier_route),
        ("block bound sweep", block_sweep),
        ("Littlewood-Paley decay", band_decay),
        ("exponent ledger", exponents),
        ("L^q endgame", theorem),
        ("conservation", conservation),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
