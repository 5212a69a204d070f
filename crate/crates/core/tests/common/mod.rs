//! Shared oracles and simulators for the integration tests.
//!
//! The oracles here deliberately avoid the library's linear algebra: plain
//! `Vec<Vec<f64>>` matrices, Gauss-Jordan elimination, explicit loops.

#![allow(dead_code)]


use chrono::{Datelike, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use dtr_core::ghcn::{DaySlot, DateWindow, RawDlyRecord, MISSING, SLOTS};
use dtr_core::series::SeasonalDummies;

pub type Mat = Vec<Vec<f64>>;

/// Philadelphia, January 1960, TMAX, in the archive layout. Day 22 carries
/// quality flag I; every value has source flag 0.
pub const FIXTURE_TMAX_LINE: &str = "USW00013739196001TMAX   67  0  111  0   83  0   28  0  -11  0    0  0   44  0  100  0  122  0   61  0   17  0  -22  0   -5  0   39  0   78  0  106  0  144  0   89  0   33  0    6  0  -28  0  -50 I0  -17  0   22  0   56  0   94  0  128  0   72  0   11  0   -6  0   50  0";

/// The values of [`FIXTURE_TMAX_LINE`], read off by hand.
pub const FIXTURE_TMAX_TENTHS: [i32; 31] = [
    67, 111, 83, 28, -11, 0, 44, 100, 122, 61, 17, -22, -5, 39, 78, 106, 144, 89, 33, 6, -28, -50, -17, 22, 56, 94,
    128, 72, 11, -6, 50,
];

pub fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Row-major copy of named columns.
pub fn rows_of(columns: &[Vec<f64>]) -> Mat {
    let n = columns[0].len();
    (0..n).map(|t| columns.iter().map(|c| c[t]).collect()).collect()
}

pub fn xtx(x: &Mat) -> Mat {
    let k = x[0].len();
    let mut m = vec![vec![0.0; k]; k];
    for row in x {
        for i in 0..k {
            for j in 0..k {
                m[i][j] += row[i] * row[j];
            }
        }
    }
    m
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &Mat) -> Mat {
    let k = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&p, &q| aug[p][col].abs().total_cmp(&aug[q][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let d = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    for c in 0..2 * k {
                        aug[r][c] -= f * aug[col][c];
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[k..].to_vec()).collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for l in 0..m {
            for j in 0..p {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

/// beta = (X'X)^-1 X'y.
pub fn normal_equations(x: &Mat, y: &[f64]) -> Vec<f64> {
    let k = x[0].len();
    let inv = invert(&xtx(x));
    let mut xty = vec![0.0; k];
    for (row, yt) in x.iter().zip(y) {
        for i in 0..k {
            xty[i] += row[i] * yt;
        }
    }
    (0..k)
        .map(|i| (0..k).map(|j| inv[i][j] * xty[j]).sum())
        .collect()
}

/// Newey-West covariance by explicit summation over lags and element pairs.
pub fn hac_triple_loop(x: &Mat, u: &[f64], lags: usize) -> Mat {
    let n = x.len();
    let k = x[0].len();
    let mut meat = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let mut s = 0.0;
            for l in -(lags as isize)..=(lags as isize) {
                let w = 1.0 - (l.unsigned_abs() as f64) / (lags as f64 + 1.0);
                for t in 0..n {
                    let s_t = t as isize - l;
                    if s_t < 0 || s_t >= n as isize {
                        continue;
                    }
                    let s_t = s_t as usize;
                    s += w * x[t][a] * u[t] * x[s_t][b] * u[s_t];
                }
            }
            meat[a][b] = s;
        }
    }
    let bread = invert(&xtx(x));
    mat_mul(&mat_mul(&bread, &meat), &bread)
}

/// Γ(df/2) for positive integer df, by recursion from Γ(1/2) and Γ(1).
pub fn gamma_half_integer(df: u32) -> f64 {
    let mut g = if df % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut a = if df % 2 == 0 { 1.0 } else { 0.5 };
    while a < df as f64 / 2.0 - 1e-12 {
        g *= a;
        a += 1.0;
    }
    g
}

pub fn chi2_pdf(x: f64, df: u32) -> f64 {
    let k = df as f64 / 2.0;
    x.powf(k - 1.0) * (-x / 2.0).exp() / (2f64.powf(k) * gamma_half_integer(df))
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Upper tail of the chi-square density by quadrature over [x, x + 600],
/// split into unit-length panels.
pub fn chi2_sf_quadrature(x: f64, df: u32) -> f64 {
    assert!(x > 0.0);
    let f = move |t: f64| chi2_pdf(t, df);
    let mut total = 0.0;
    let mut a = x;
    while a < x + 600.0 {
        total += integrate(&f, a, a + 1.0, 1e-15);
        a += 1.0;
    }
    total
}

/// Kolmogorov-Smirnov distance of a sample from Uniform(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let lo = v - i as f64 / n;
            let hi = (i as f64 + 1.0) / n - v;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Parameters of the joint model's generating process, in its own
/// parameterization (July is the base month).
#[derive(Debug, Clone)]
pub struct JointProcess {
    pub constant: f64,
    pub slope: f64,
    pub rho: f64,
    /// Monthly intercept shifts relative to July, January first; index 6 unused.
    pub dummies: [f64; 12],
    /// Monthly slope shifts relative to July; index 6 unused.
    pub interactions: [f64; 12],
    pub noise_sd: f64,
}

impl JointProcess {
    pub fn avg_like() -> Self {
        JointProcess {
            constant: 22.0,
            slope: 2e-4,
            rho: 0.7,
            dummies: [-12.0, -11.0, -8.0, -5.0, -2.5, -0.5, 0.0, -0.4, -1.8, -4.8, -8.0, -10.8],
            interactions: [0.0; 12],
            noise_sd: 5.0,
        }
    }

    /// Coefficient vector in the order of the joint design's columns.
    pub fn coefficients(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("c".to_string(), self.constant),
            ("TIME".to_string(), self.slope),
            ("Y(-1)".to_string(), self.rho),
        ];
        for m in (1..=12).filter(|&m| m != 7) {
            out.push((format!("D{m}"), self.dummies[m as usize - 1]));
        }
        for m in (1..=12).filter(|&m| m != 7) {
            out.push((format!("D{m}*TIME"), self.interactions[m as usize - 1]));
        }
        out
    }

    /// Simulate `n` days starting at `start`; returns the series and its months.
    pub fn simulate<R: Rng>(&self, start: NaiveDate, n: usize, rng: &mut R) -> (Vec<f64>, SeasonalDummies) {
        let noise = Normal::new(0.0, self.noise_sd).unwrap();
        let months: Vec<u32> = start.iter_days().take(n).map(|d| d.month()).collect();
        let mut y = Vec::with_capacity(n);
        // Start near the process mean; the first value only feeds the lag.
        let mut prev = (self.constant + self.dummies[months[0] as usize - 1]) / (1.0 - self.rho);
        for t in 1..=n {
            let m = months[t - 1] as usize - 1;
            let tf = t as f64;
            let level = self.constant + self.slope * tf + self.dummies[m] + self.interactions[m] * tf;
            let v = level + self.rho * prev + noise.sample(rng);
            y.push(v);
            prev = v;
        }
        (y, SeasonalDummies::from_months(months))
    }
}

/// Synthetic `.dly` payload for a station over `window`.
///
/// Daily TMAX/TMIN (tenths °C) follow a seasonal cycle plus noise with
/// TMAX > TMIN. Days listed in `missing` are written as the sentinel for the
/// given element code.
pub fn synthetic_dly<R: Rng>(
    station_id: &str,
    window: DateWindow,
    rng: &mut R,
    missing: &[(NaiveDate, &str)],
) -> String {
    let noise = Normal::new(0.0, 25.0).unwrap();
    let mut out = String::new();
    let mut month_start = ymd(window.start.year(), window.start.month(), 1);
    while month_start <= window.end {
        let (y, m) = (month_start.year(), month_start.month());
        let mut tmax = [DaySlot::EMPTY; SLOTS];
        let mut tmin = [DaySlot::EMPTY; SLOTS];
        let len = dtr_core::ghcn::days_in_month(y, m) as usize;
        for d in 0..len {
            let date = ymd(y, m, d as u32 + 1);
            let doy = date.ordinal() as f64;
            let season = -110.0 * (2.0 * std::f64::consts::PI * (doy - 15.0) / 365.25).cos();
            let mid = 130.0 + season + noise.sample(rng);
            let range = (95.0 + noise.sample(rng) * 0.6).max(10.0);
            let hi = (mid + range / 2.0).round() as i32;
            let lo = (mid - range / 2.0).round() as i32;
            tmax[d] = DaySlot { value: hi, mflag: ' ', qflag: ' ', sflag: '0' };
            tmin[d] = DaySlot { value: lo, mflag: ' ', qflag: ' ', sflag: '0' };
            for (md, el) in missing {
                if *md == date {
                    let slot = if *el == "TMAX" { &mut tmax[d] } else { &mut tmin[d] };
                    *slot = DaySlot { value: MISSING, ..DaySlot::EMPTY };
                }
            }
        }
        for (element, values) in [("TMAX", tmax), ("TMIN", tmin)] {
            let rec = RawDlyRecord {
                station_id: station_id.to_string(),
                year: y,
                month: m,
                element: element.to_string(),
                values,
            };
            out.push_str(&rec.to_line());
            out.push('\n');
        }
        month_start = if m == 12 { ymd(y + 1, 1, 1) } else { ymd(y, m + 1, 1) };
    }
    out
}
