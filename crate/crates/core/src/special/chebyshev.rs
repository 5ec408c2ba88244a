//! Piecewise Chebyshev interpolation of vector-valued functions.

use std::f64::consts::PI;

/// Vector-valued function stored at Chebyshev points of the first kind on
/// each panel of a partition, evaluated by the barycentric formula.
#[derive(Debug, Clone)]
pub struct ChebyshevTable {
    breaks: Vec<f64>,
    reference: Vec<f64>,
    bary: Vec<f64>,
    width: usize,
    values: Vec<f64>,
}

/// Chebyshev points `cos((2i+1)π/2n)` on `[-1, 1]`, ascending.
pub fn chebyshev_points(n: usize) -> Vec<f64> {
    (0..n).rev().map(|i| ((2 * i + 1) as f64 * PI / (2 * n) as f64).cos()).collect()
}

impl ChebyshevTable {
    /// Samples `f(x, out)` at `n` points per panel; `out` has length `width`.
    pub fn build(breaks: Vec<f64>, n: usize, width: usize, f: impl Fn(f64, &mut [f64])) -> Self {
        let table = Self::layout(breaks, n, width);
        let points = table.points();
        let mut values = vec![0.0; points.len() * width];
        for (x, out) in points.iter().zip(values.chunks_mut(width)) {
            f(*x, out);
        }
        ChebyshevTable { values, ..table }
    }

    /// Empty table with the given layout; fill with [`Self::points`] and [`Self::set_values`].
    pub fn layout(breaks: Vec<f64>, n: usize, width: usize) -> Self {
        assert!(breaks.len() >= 2 && n >= 2 && width >= 1);
        let reference = chebyshev_points(n);
        let bary = (0..n)
            .rev()
            .map(|i| {
                let s = ((2 * i + 1) as f64 * PI / (2 * n) as f64).sin();
                if i % 2 == 0 { s } else { -s }
            })
            .collect();
        ChebyshevTable { breaks, reference, bary, width, values: Vec::new() }
    }

    /// Interpolation points in panel order.
    pub fn points(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity((self.breaks.len() - 1) * self.reference.len());
        for w in self.breaks.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            out.extend(self.reference.iter().map(|t| mid + half * t));
        }
        out
    }

    pub fn set_values(&mut self, values: Vec<f64>) {
        assert_eq!(values.len(), self.points().len() * self.width);
        self.values = values;
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Panel containing `x`, clamped to the table range.
    pub fn panel_of(&self, x: f64) -> usize {
        let last = self.breaks.len() - 2;
        match self.breaks.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    /// Writes the interpolant at `x` into `out`.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        self.eval_in_panel(self.panel_of(x), x, out)
    }

    pub fn eval_in_panel(&self, panel: usize, x: f64, out: &mut [f64]) {
        let (a, b) = (self.breaks[panel], self.breaks[panel + 1]);
        let t = (2.0 * x - a - b) / (b - a);
        let n = self.reference.len();
        let base = panel * n * self.width;
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut denom = 0.0;
        for i in 0..n {
            let d = t - self.reference[i];
            let row = &self.values[base + i * self.width..base + (i + 1) * self.width];
            if d == 0.0 {
                out.copy_from_slice(row);
                return;
            }
            let c = self.bary[i] / d;
            denom += c;
            for (o, v) in out.iter_mut().zip(row) {
                *o += c * v;
            }
        }
        out.iter_mut().for_each(|o| *o /= denom);
    }
}
