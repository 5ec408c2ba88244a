//! Subcommand execution and artifact emission.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gsrep::density::{builtin_density, load_grid_density, PhaseDensity, PhaseRules, SpatialRule};
use gsrep::estimates::{
    check_bernstein, check_bessel_asymptotics, check_conservation, check_embedding, check_exponents, check_filter_banks,
    check_fourier_route, check_lemma21, check_lemma22, check_lemma22_arithmetic, check_sphere_identity, check_theorem,
    partition_depth, ExponentLedger,
};
use gsrep::fieldrep::{write_snapshot_csv, ConeEvaluator};
use gsrep::kinematics::verify_kernel_bounds;
use gsrep::report::{fmt_num, Case, EstimateReport};
use gsrep::special::DyadicFilterBank;
use gsrep::spectral::uj_l2_norm;
use gsrep::Vec3;
use serde_json::json;

use crate::config::{DensitySpec, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    VerifyKernels,
    VerifyIdentity,
    Fields,
    Decompose,
    Bounds,
    Theorem,
    All,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub reports: Vec<EstimateReport>,
    /// Checks not applicable to the configured density, with the reason.
    pub skipped: Vec<String>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

pub fn load_density(spec: &DensitySpec) -> Result<Box<dyn PhaseDensity>> {
    Ok(match spec {
        DensitySpec::Builtin { name, params } => builtin_density(*name, params)?,
        DensitySpec::Grid { manifest } => Box::new(load_grid_density(manifest)?),
    })
}

/// Writes reports, tables and plot data below one directory.
struct Artifacts {
    dir: PathBuf,
    hash: String,
}

impl Artifacts {
    fn file(&self, rel: &str) -> Result<BufWriter<fs::File>> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        Ok(BufWriter::new(fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?))
    }

    fn report(&self, mut report: EstimateReport, outcome: &mut Outcome) -> Result<()> {
        report.config_hash = self.hash.clone();
        if let Some(c) = report.cases.iter().find(|c| !c.measured.is_finite() || !c.bound.is_finite()) {
            let at: Vec<String> = c.inputs.iter().map(|(k, v)| format!("{k}={}", fmt_num(*v))).collect();
            report.require(false, format!("non-finite value in {} at {}", report.name, at.join(" ")));
        }
        let name = report.name.clone();
        self.file(&format!("{name}.json"))?.write_all(report.to_json().as_bytes())?;
        report.write_csv(self.file(&format!("{name}.csv"))?)?;
        write_log_plot(self.file(&format!("plot/{name}.csv"))?, &report.cases)?;
        outcome.reports.push(report);
        Ok(())
    }
}

/// Columns: sorted input keys, then `log2_measured, log2_bound, ratio`.
fn write_log_plot<W: Write>(mut w: W, cases: &[Case]) -> std::io::Result<()> {
    let mut keys: Vec<&String> = cases.iter().flat_map(|c| c.inputs.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
    header.extend(["log2_measured", "log2_bound", "ratio"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for c in cases {
        let mut row: Vec<String> = keys.iter().map(|k| c.inputs.get(*k).map(|v| fmt_num(*v)).unwrap_or_default()).collect();
        row.extend([fmt_num(c.measured.log2()), fmt_num(c.bound.log2()), fmt_num(c.ratio)]);
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// One `m × n` matrix per `(t, j)` holding the largest ratio over `k`.
fn write_heatmaps(art: &Artifacts, prefix: &str, report: &EstimateReport) -> Result<()> {
    let mut maps: BTreeMap<(u64, u32), BTreeMap<(u32, u32), f64>> = BTreeMap::new();
    for c in &report.cases {
        let get = |k: &str| c.inputs.get(k).copied().unwrap_or(0.0);
        let cell = maps.entry((get("t").to_bits(), get("j") as u32)).or_default().entry((get("m") as u32, get("n") as u32)).or_insert(0.0);
        *cell = cell.max(c.ratio);
    }
    for ((t_bits, j), cells) in &maps {
        let t = f64::from_bits(*t_bits);
        let m_max = cells.keys().map(|k| k.0).max().unwrap_or(0);
        let n_max = cells.keys().map(|k| k.1).max().unwrap_or(0);
        let mut w = art.file(&format!("plot/{prefix}_heatmap_t{}_j{j}.csv", fmt_num(t)))?;
        let header: Vec<String> = (0..=n_max).map(|n| format!("n{n}")).collect();
        writeln!(w, "m,{}", header.join(","))?;
        for m in 0..=m_max {
            let row: Vec<String> = (0..=n_max).map(|n| cells.get(&(m, n)).map(|v| fmt_num(*v)).unwrap_or_default()).collect();
            writeln!(w, "{m},{}", row.join(","))?;
        }
    }
    Ok(())
}

fn frozen_product(f: &dyn PhaseDensity) -> bool {
    matches!(f.spectral(), Some(form) if !form.transported)
}

fn t_max(config: &RunConfig) -> f64 {
    config.times.iter().copied().fold(0.0, f64::max)
}

fn verify_kernels(config: &RunConfig, art: &Artifacts, out: &mut Outcome) -> Result<()> {
    art.report(verify_kernel_bounds(config.kernels.samples, config.rng_seed)?, out)
}

fn verify_identity(config: &RunConfig, art: &Artifacts, out: &mut Outcome) -> Result<()> {
    let id = &config.identity;
    art.report(check_sphere_identity(id.samples, config.rng_seed, id.s_xi_max, id.speed_max)?, out)?;
    art.report(check_bessel_asymptotics(id.bessel_r_min, id.bessel_r_max, id.bessel_step)?, out)?;
    art.report(check_filter_banks(id.filter_j_max, partition_depth(id.sigma_min), id.sigma_min, id.filter_samples)?, out)
}

fn fields(config: &RunConfig, f: &dyn PhaseDensity, art: &Artifacts, out: &mut Outcome) -> Result<()> {
    let fl = &config.fields;
    let half = f.support_radius_x(t_max(config)) + t_max(config);
    let n = fl.points_per_axis;
    let coord = |i: usize| if n == 1 { 0.0 } else { -half + 2.0 * half * i as f64 / (n - 1) as f64 };
    let mut points = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                points.push(f.center_x() + Vec3::new(coord(i), coord(j), coord(k)));
            }
        }
    }
    let cone = ConeEvaluator::new(f, fl.cone)?;
    let mut samples = Vec::new();
    let mut cases = Vec::new();
    for &t in &config.times {
        let snap = cone.snapshot(t, &points)?;
        for triple in snap.chunks(3) {
            let (u, e) = match (&triple[0].value, &triple[1].value) {
                (gsrep::fieldrep::SampleValue::Scalar(u), gsrep::fieldrep::SampleValue::Vector(e)) => (*u, e.norm()),
                _ => unreachable!("snapshot order is u, E_T, B_T"),
            };
            let x = triple[0].x;
            cases.push(Case::new(&[("t", t), ("x1", x.x), ("x2", x.y), ("x3", x.z)], e, std::f64::consts::SQRT_2 * u));
        }
        samples.extend(snap);
    }
    write_snapshot_csv(art.file("fields_snapshot.csv")?, &samples)?;
    let report = EstimateReport::with_constant("fields", cases, 1.0).tolerance("ratio", config.theorem.tolerance);
    art.report(report, out)?;
    if frozen_product(f) {
        let rules = &config.spectral.rules;
        art.report(check_fourier_route(f, fl.fourier_time, rules, &fl.cone, fl.fourier_points, fl.fourier_stride, fl.fourier_tolerance)?, out)?;
    } else {
        out.skipped.push("fourier_route: needs a time-independent product density".into());
    }
    let phase = PhaseRules {
        x: SpatialRule { center: f.center_x().into(), radius: f.support_radius_x(t_max(config)), nodes_per_axis: fl.conservation_nodes },
        p: fl.conservation_momentum.with_radius(f.support_radius_p()),
    };
    art.report(check_conservation(f, &config.times, &phase, fl.conservation_tolerance)?, out)
}

fn bank(config: &RunConfig) -> DyadicFilterBank {
    DyadicFilterBank::new(config.spectral.j_max)
}

fn block_tables(config: &RunConfig, f: &dyn PhaseDensity, refine: bool, name: &str, art: &Artifacts, out: &mut Outcome) -> Result<()> {
    let sp = &config.spectral;
    let b = &config.bounds;
    let mut report = check_lemma21(f, &config.times, &b.block_j, b.caps, &bank(config), &sp.rules, &sp.xi, refine)?;
    report.name = name.into();
    write_heatmaps(art, name, &report)?;
    let mut w = art.file("plot/uj_log2_norms.csv")?;
    writeln!(w, "t,j,log2_norm")?;
    for &t in &config.times {
        for j in 0..=sp.j_max {
            let v = uj_l2_norm(t, j, f, &bank(config), &sp.rules, &sp.xi)?;
            writeln!(w, "{},{j},{}", fmt_num(t), fmt_num(v.log2()))?;
        }
    }
    w.flush()?;
    art.report(report, out)
}

fn decompose(config: &RunConfig, f: &dyn PhaseDensity, art: &Artifacts, out: &mut Outcome) -> Result<()> {
    if !frozen_product(f) {
        out.skipped.push("decompose: needs a time-independent product density".into());
        return Ok(());
    }
    block_tables(config, f, false, "decompose", art, out)
}

fn bounds(config: &RunConfig, f: &dyn PhaseDensity, art: &Artifacts, out: &mut Outcome) -> Result<()> {
    let sp = &config.spectral;
    let b = &config.bounds;
    let ledger = ExponentLedger::default();
    art.report(check_bernstein(f, &config.times, &b.bernstein_j, &bank(config), &sp.rules, b.refine)?, out)?;
    if frozen_product(f) {
        block_tables(config, f, b.refine, "lemma21", art, out)?;
        art.report(check_lemma22(f, &config.times, b.lemma22_j_max, &bank(config), &sp.rules, &sp.xi)?, out)?;
    } else {
        out.skipped.push("lemma21: needs a time-independent product density".into());
        out.skipped.push("lemma22: needs a time-independent product density".into());
    }
    let positive: Vec<f64> = config.times.iter().copied().filter(|t| *t > 0.0).collect();
    if positive.is_empty() {
        out.skipped.push("lemma22_arithmetic: needs a positive time".into());
    } else {
        art.report(check_lemma22_arithmetic(&positive, b.arithmetic_j_max, &ledger)?, out)?;
    }
    art.report(check_exponents(&ledger), out)
}

fn theorem(config: &RunConfig, f: &dyn PhaseDensity, art: &Artifacts, out: &mut Outcome) -> Result<()> {
    if !frozen_product(f) {
        out.skipped.push("theorem: needs a time-independent product density".into());
        out.skipped.push("embedding: needs a time-independent product density".into());
        return Ok(());
    }
    let sp = &config.spectral;
    let ledger = ExponentLedger::default();
    art.report(check_theorem(f, &config.times, &ledger, &bank(config), &sp.rules, &sp.xi, &config.theorem)?, out)?;
    art.report(check_embedding(f, &config.times, &ledger, &bank(config), &sp.rules, &sp.xi)?, out)
}

/// Runs `command` and writes every artifact below `dir`, ending with `summary.json`.
pub fn run(command: Command, config: &RunConfig, dir: &Path) -> Result<Outcome> {
    config.validate()?;
    let f = load_density(&config.density)?;
    let art = Artifacts { dir: dir.to_path_buf(), hash: config.hash() };
    let mut out = Outcome::default();
    let f = f.as_ref();
    match command {
        Command::VerifyKernels => verify_kernels(config, &art, &mut out)?,
        Command::VerifyIdentity => verify_identity(config, &art, &mut out)?,
        Command::Fields => fields(config, f, &art, &mut out)?,
        Command::Decompose => decompose(config, f, &art, &mut out)?,
        Command::Bounds => bounds(config, f, &art, &mut out)?,
        Command::Theorem => theorem(config, f, &art, &mut out)?,
        Command::All => {
            verify_kernels(config, &art, &mut out)?;
            verify_identity(config, &art, &mut out)?;
            fields(config, f, &art, &mut out)?;
            bounds(config, f, &art, &mut out)?;
            theorem(config, f, &art, &mut out)?;
        }
    }
    let summary = json!({
        "config_hash": art.hash,
        "density": f.name(),
        "pass": out.pass(),
        "reports": out.reports.iter().map(|r| json!({
            "name": r.name,
            "pass": r.pass,
            "fitted_constant": r.fitted_constant,
        })).collect::<Vec<_>>(),
        "skipped": out.skipped,
    });
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    art.file("summary.json")?.write_all(text.as_bytes())?;
    art.file("config.json")?.write_all(config.canonical_json().as_bytes())?;
    Ok(out)
}
