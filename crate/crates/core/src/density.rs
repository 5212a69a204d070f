//! Gaussian kernel density estimates and mode finding.

use crate::error::DensityError;
use crate::exec::Exec;

pub const DEFAULT_GRID_POINTS: usize = 512;
/// Default mode threshold as a fraction of the highest ordinate.
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.10;
/// Grid extends this many bandwidths past the data range.
const GRID_PAD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KdeBandwidth {
    /// 0.9 min(sd, IQR/1.34) n^(-1/5).
    #[default]
    Silverman,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityEstimate {
    /// Trapezoid-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }

    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Sample quantile with linear interpolation between order statistics.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule-of-thumb bandwidth.
pub fn silverman_bandwidth(data: &[f64]) -> Result<f64, DensityError> {
    let n = data.len();
    if n == 0 {
        return Err(DensityError::Empty);
    }
    if n == 1 {
        return Err(DensityError::DegenerateBandwidth);
    }
    let mean = data.iter().sum::<f64>() / n as f64;
    let sd = (data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if !(spread > 0.0) {
        return Err(DensityError::DegenerateBandwidth);
    }
    Ok(0.9 * spread * (n as f64).powf(-0.2))
}

/// Distinct values with multiplicities; daily temperatures repeat heavily.
fn tally(data: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((last, count)) if *last == v => *count += 1.0,
            _ => out.push((v, 1.0)),
        }
    }
    out
}

/// Gaussian KDE evaluated on `grid_points` equally spaced points covering
/// [min - 3h, max + 3h].
pub fn kde(
    data: &[f64],
    bandwidth: KdeBandwidth,
    grid_points: usize,
    exec: Exec,
) -> Result<DensityEstimate, DensityError> {
    if data.is_empty() {
        return Err(DensityError::Empty);
    }
    if grid_points < 2 {
        return Err(DensityError::Grid(grid_points));
    }
    let h = match bandwidth {
        KdeBandwidth::Silverman => silverman_bandwidth(data)?,
        KdeBandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        KdeBandwidth::Fixed(h) => return Err(DensityError::Bandwidth(h)),
    };
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min) - GRID_PAD * h;
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max) + GRID_PAD * h;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| lo + step * i as f64).collect();
    Ok(DensityEstimate {
        values: evaluate(data, h, &grid, exec),
        grid,
        bandwidth: h,
    })
}

/// Evaluate the Gaussian KDE with bandwidth `h` at arbitrary points.
pub fn evaluate(data: &[f64], h: f64, points: &[f64], exec: Exec) -> Vec<f64> {
    let counts = tally(data);
    let norm = 1.0 / (data.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    exec.map(points, |&x| {
        counts
            .iter()
            .map(|&(v, c)| {
                let z = (x - v) / h;
                c * (-0.5 * z * z).exp()
            })
            .sum::<f64>()
            * norm
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub location: f64,
    pub height: f64,
}

/// Local maxima of the estimate at least `min_prominence` times the highest
/// ordinate, sorted by location. A flat top counts once, at its left edge.
pub fn find_modes(estimate: &DensityEstimate, min_prominence: f64) -> Vec<Mode> {
    let v = &estimate.values;
    let n = v.len();
    let peak = v.iter().copied().fold(0.0, f64::max);
    if n == 0 || peak <= 0.0 {
        return Vec::new();
    }
    let threshold = min_prominence * peak;
    let mut modes = Vec::new();
    let mut i = 0;
    while i < n {
        // Extent of the plateau starting at i.
        let mut j = i;
        while j + 1 < n && v[j + 1] == v[i] {
            j += 1;
        }
        let rises = i == 0 || v[i - 1] < v[i];
        let falls = j == n - 1 || v[j + 1] < v[i];
        let interior_or_edge = !(i == 0 && j == n - 1);
        if rises && falls && interior_or_edge && v[i] >= threshold {
            modes.push(Mode {
                location: estimate.grid[i],
                height: v[i],
            });
        }
        i = j + 1;
    }
    modes
}
