//! Densities sampled on uniform phase-space grids and stored as a TOML
//! manifest plus a raw little-endian payload.
//!
//! Manifest layout:
//!
//! ```toml
//! format = "gsrep-grid"
//! version = 1
//! dtype = "float64-little-endian"
//! payload = "density.bin"
//! crc64 = "0123456789abcdef"   # CRC-64/XZ of the payload bytes
//! times = [0.0, 0.5]
//!
//! [axes.x1]
//! min = -4.0
//! max = 4.0
//! count = 16
//! # ... x2, x3, p1, p2, p3
//! ```
//!
//! The payload is row-major in `(t, x1, x2, x3, p1, p2, p3)`, slowest first.
//! Between nodes the density is the multilinear interpolant, written as a sum
//! of tensor hat functions; it therefore decays linearly to zero over one
//! cell beyond the outermost nodes, and its spatial Fourier transform is
//! available in closed form.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crc::{Crc, CRC_64_XZ};
use serde::{Deserialize, Serialize};

use super::PhaseDensity;
use crate::{Error, Result, Vec3, C64};

pub const GRID_FORMAT: &str = "gsrep-grid";
pub const GRID_VERSION: i64 = 1;
pub const GRID_DTYPE: &str = "float64-little-endian";
const AXIS_NAMES: [&str; 6] = ["x1", "x2", "x3", "p1", "p2", "p3"];
const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        GridAxis { min, max, count }
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + self.step() * i as f64
    }

    /// Nodes whose hat function is nonzero at `x`, with the hat values.
    #[inline]
    fn hats(&self, x: f64) -> [(usize, f64); 2] {
        let h = self.step();
        let u = (x - self.min) / h;
        if !(u > -1.0 && u < self.count as f64) {
            return [(0, 0.0), (0, 0.0)];
        }
        let i = u.floor();
        let frac = u - i;
        let i = i as isize;
        let left = if i >= 0 { (i as usize, 1.0 - frac) } else { (0, 0.0) };
        let right = if i + 1 < self.count as isize { ((i + 1) as usize, frac) } else { (0, 0.0) };
        [left, right]
    }

    fn validate(&self, name: &str) -> Result<()> {
        let field = format!("axes.{name}");
        if self.count < 2 {
            return Err(Error::ingestion(format!("{field}.count"), format!("needs at least 2 nodes, got {}", self.count)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max > self.min) {
            return Err(Error::ingestion(field, format!("needs finite min < max, got [{}, {}]", self.min, self.max)));
        }
        Ok(())
    }
}

/// Density backed by grid samples, one 6-d array per time stamp.
#[derive(Debug, Clone)]
pub struct GridDensity {
    name: String,
    axes: [GridAxis; 6],
    times: Vec<f64>,
    values: Arc<[f64]>,
    sup: f64,
}

impl GridDensity {
    pub fn new(name: impl Into<String>, axes: [GridAxis; 6], times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        for (axis, n) in axes.iter().zip(AXIS_NAMES) {
            axis.validate(n)?;
        }
        if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::ingestion("times", "needs at least one finite time stamp"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::ingestion("times", "time stamps must be strictly increasing"));
        }
        let expected = times.len() * axes.iter().map(|a| a.count).product::<usize>();
        if values.len() != expected {
            return Err(Error::ingestion(
                "payload",
                format!("shape needs {expected} values, found {}", values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::ingestion("payload", format!("value {} at index {i} is negative or not finite", values[i])));
        }
        let sup = values.iter().copied().fold(0.0, f64::max);
        Ok(GridDensity { name: name.into(), axes, times, values: values.into(), sup })
    }

    pub fn axes(&self) -> &[GridAxis; 6] {
        &self.axes
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn slab_len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    fn nearest_time(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, ti) in self.times.iter().enumerate() {
            if (ti - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }

    fn strides(&self) -> [usize; 6] {
        let mut s = [1usize; 6];
        for d in (0..5).rev() {
            s[d] = s[d + 1] * self.axes[d + 1].count;
        }
        s
    }

    /// Hat-weighted momentum interpolation at every spatial node of one slab.
    fn momentum_slice(&self, slab: usize, p: &Vec3) -> Vec<f64> {
        let strides = self.strides();
        let hp: Vec<[(usize, f64); 2]> = (0..3).map(|d| self.axes[3 + d].hats(p[d])).collect();
        let nx = self.axes[0].count * self.axes[1].count * self.axes[2].count;
        let base = slab * self.slab_len();
        let mut out = vec![0.0; nx];
        for (ix, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(a, wa) in &hp[0] {
                if wa == 0.0 {
                    continue;
                }
                for &(b, wb) in &hp[1] {
                    if wb == 0.0 {
                        continue;
                    }
                    for &(c, wc) in &hp[2] {
                        if wc == 0.0 {
                            continue;
                        }
                        let idx = base + ix * strides[2] + a * strides[3] + b * strides[4] + c * strides[5];
                        acc += wa * wb * wc * self.values[idx];
                    }
                }
            }
            *o = acc;
        }
        out
    }

    /// Samples `f` on the given axes at each time stamp.
    pub fn sample(f: &dyn PhaseDensity, axes: [GridAxis; 6], times: Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(times.len() * axes.iter().map(|a| a.count).product::<usize>());
        for &t in &times {
            for i1 in 0..axes[0].count {
                for i2 in 0..axes[1].count {
                    for i3 in 0..axes[2].count {
                        let x = Vec3::new(axes[0].node(i1), axes[1].node(i2), axes[2].node(i3));
                        for j1 in 0..axes[3].count {
                            for j2 in 0..axes[4].count {
                                for j3 in 0..axes[5].count {
                                    let p = Vec3::new(axes[3].node(j1), axes[4].node(j2), axes[5].node(j3));
                                    values.push(f.evaluate(t, &x, &p));
                                }
                            }
                        }
                    }
                }
            }
        }
        GridDensity::new(format!("grid({})", f.name()), axes, times, values)
    }
}

/// `h sinc²(ξh/2)`, the transform of the unit hat of half-width `h`.
#[inline]
fn hat_transform(xi: f64, h: f64) -> f64 {
    let s = super::builtin::sinc(0.5 * xi * h);
    h * s * s
}

impl PhaseDensity for GridDensity {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, t: f64, x: &Vec3, p: &Vec3) -> f64 {
        let strides = self.strides();
        let base = self.nearest_time(t) * self.slab_len();
        let coords = [x[0], x[1], x[2], p[0], p[1], p[2]];
        let mut hats = [[(0usize, 0.0f64); 2]; 6];
        for d in 0..6 {
            hats[d] = self.axes[d].hats(coords[d]);
            if hats[d][0].1 == 0.0 && hats[d][1].1 == 0.0 {
                return 0.0;
            }
        }
        let mut acc = 0.0;
        for corner in 0..64usize {
            let mut w = 1.0;
            let mut idx = base;
            for d in 0..6 {
                let (i, wd) = hats[d][(corner >> d) & 1];
                w *= wd;
                idx += i * strides[d];
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        acc
    }

    /// Exact transform of the interpolant in `x`: a direct separable sum over
    /// spatial nodes times the hat transforms.
    fn fourier_x(&self, t: f64, xi: &Vec3, p: &Vec3) -> Option<C64> {
        let slice = self.momentum_slice(self.nearest_time(t), p);
        let phases: Vec<Vec<C64>> = (0..3)
            .map(|d| {
                let a = &self.axes[d];
                (0..a.count).map(|i| C64::from_polar(1.0, -xi[d] * a.node(i))).collect()
            })
            .collect();
        let (n2, n3) = (self.axes[1].count, self.axes[2].count);
        let mut total = C64::new(0.0, 0.0);
        for (i1, e1) in phases[0].iter().enumerate() {
            let mut s2 = C64::new(0.0, 0.0);
            for (i2, e2) in phases[1].iter().enumerate() {
                let row = &slice[(i1 * n2 + i2) * n3..(i1 * n2 + i2 + 1) * n3];
                let s3: C64 = row.iter().zip(&phases[2]).map(|(v, e3)| e3 * *v).sum();
                s2 += e2 * s3;
            }
            total += e1 * s2;
        }
        let envelope: f64 = (0..3).map(|d| hat_transform(xi[d], self.axes[d].step())).product();
        Some(total * envelope)
    }

    fn sup_bound(&self) -> f64 {
        self.sup
    }

    fn center_x(&self) -> Vec3 {
        Vec3::from_fn(|d, _| 0.5 * (self.axes[d].min + self.axes[d].max))
    }

    fn support_radius_x(&self, _t: f64) -> f64 {
        (0..3)
            .map(|d| {
                let a = &self.axes[d];
                let half = 0.5 * (a.max - a.min) + a.step();
                half * half
            })
            .sum::<f64>()
            .sqrt()
    }

    fn support_radius_p(&self) -> f64 {
        (3..6)
            .map(|d| {
                let a = &self.axes[d];
                let reach = a.min.abs().max(a.max.abs()) + a.step();
                reach * reach
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn table<'a>(t: &'a toml::Table, key: &str, field: &str) -> Result<&'a toml::Table> {
    t.get(key)
        .ok_or_else(|| Error::ingestion(field, "missing"))?
        .as_table()
        .ok_or_else(|| Error::ingestion(field, "expected a table"))
}

fn string<'a>(t: &'a toml::Table, key: &str) -> Result<&'a str> {
    t.get(key)
        .ok_or_else(|| Error::ingestion(key, "missing"))?
        .as_str()
        .ok_or_else(|| Error::ingestion(key, "expected a string"))
}

fn number(v: &toml::Value, field: &str) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::ingestion(field, "expected a number")),
    }
}

fn parse_axis(t: &toml::Table, name: &str) -> Result<GridAxis> {
    let field = format!("axes.{name}");
    let a = table(t, name, &field)?;
    for key in a.keys() {
        if !["min", "max", "count"].contains(&key.as_str()) {
            return Err(Error::ingestion(format!("{field}.{key}"), "unknown key"));
        }
    }
    let get = |k: &str| a.get(k).ok_or_else(|| Error::ingestion(format!("{field}.{k}"), "missing"));
    let min = number(get("min")?, &format!("{field}.min"))?;
    let max = number(get("max")?, &format!("{field}.max"))?;
    let count = get("count")?
        .as_integer()
        .filter(|c| *c >= 0)
        .ok_or_else(|| Error::ingestion(format!("{field}.count"), "expected a nonnegative integer"))?;
    let axis = GridAxis::new(min, max, count as usize);
    axis.validate(name)?;
    Ok(axis)
}

/// Loads and validates a grid density from its manifest.
pub fn load_grid_density(manifest_path: impl AsRef<Path>) -> Result<GridDensity> {
    let path = manifest_path.as_ref();
    let text = fs::read_to_string(path)?;
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::ingestion("manifest", e.message().to_string()))?;
    for key in doc.keys() {
        if !["format", "version", "dtype", "payload", "crc64", "times", "axes"].contains(&key.as_str()) {
            return Err(Error::ingestion(key.clone(), "unknown key"));
        }
    }
    if string(&doc, "format")? != GRID_FORMAT {
        return Err(Error::ingestion("format", format!("expected \"{GRID_FORMAT}\"")));
    }
    let version = doc.get("version").and_then(|v| v.as_integer()).ok_or_else(|| Error::ingestion("version", "missing integer"))?;
    if version != GRID_VERSION {
        return Err(Error::ingestion("version", format!("unsupported version {version}")));
    }
    let dtype = string(&doc, "dtype")?;
    if dtype != GRID_DTYPE {
        return Err(Error::ingestion("dtype", format!("unsupported dtype \"{dtype}\"")));
    }
    let crc_text = string(&doc, "crc64")?;
    let crc_expected = u64::from_str_radix(crc_text, 16).map_err(|_| Error::ingestion("crc64", "expected a hexadecimal checksum"))?;
    let times = doc
        .get("times")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::ingestion("times", "missing array"))?
        .iter()
        .map(|v| number(v, "times"))
        .collect::<Result<Vec<f64>>>()?;
    let axes_table = table(&doc, "axes", "axes")?;
    for key in axes_table.keys() {
        if !AXIS_NAMES.contains(&key.as_str()) {
            return Err(Error::ingestion(format!("axes.{key}"), "unknown axis"));
        }
    }
    let mut axes = [GridAxis::new(0.0, 1.0, 2); 6];
    for (axis, name) in axes.iter_mut().zip(AXIS_NAMES) {
        *axis = parse_axis(axes_table, name)?;
    }

    let payload_path = path.parent().unwrap_or(Path::new(".")).join(string(&doc, "payload")?);
    let bytes = fs::read(&payload_path).map_err(|e| Error::ingestion("payload", format!("{}: {e}", payload_path.display())))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::ingestion("payload", format!("{} bytes is not a whole number of float64 values", bytes.len())));
    }
    let crc_actual = CRC64.checksum(&bytes);
    if crc_actual != crc_expected {
        return Err(Error::ingestion("crc64", format!("manifest says {crc_expected:016x}, payload has {crc_actual:016x}")));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "grid".into());
    GridDensity::new(name, axes, times, values)
}

/// Writes `grid` as `<dir>/<stem>.toml` plus `<dir>/<stem>.bin` and returns
/// the manifest path.
pub fn write_grid_density(grid: &GridDensity, dir: impl AsRef<Path>, stem: &str) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let payload_name = format!("{stem}.bin");
    let bytes: Vec<u8> = grid.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(dir.join(&payload_name), &bytes)?;

    let mut doc = toml::Table::new();
    doc.insert("format".into(), GRID_FORMAT.into());
    doc.insert("version".into(), GRID_VERSION.into());
    doc.insert("dtype".into(), GRID_DTYPE.into());
    doc.insert("payload".into(), payload_name.into());
    doc.insert("crc64".into(), format!("{:016x}", CRC64.checksum(&bytes)).into());
    doc.insert("times".into(), toml::Value::Array(grid.times.iter().map(|t| (*t).into()).collect()));
    let mut axes = toml::Table::new();
    for (axis, name) in grid.axes.iter().zip(AXIS_NAMES) {
        let mut a = toml::Table::new();
        a.insert("min".into(), axis.min.into());
        a.insert("max".into(), axis.max.into());
        a.insert("count".into(), (axis.count as i64).into());
        axes.insert(name.into(), a.into());
    }
    doc.insert("axes".into(), axes.into());
    let manifest = dir.join(format!("{stem}.toml"));
    fs::write(&manifest, toml::to_string(&doc).map_err(|e| Error::usage(e.to_string()))?)?;
    Ok(manifest)
}
