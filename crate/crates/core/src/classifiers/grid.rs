//! Polar sampling grids and batched evaluation on them.
//!
//! Series-backed functions are evaluated one circle at a time: the
//! coefficients `a_n r^n` are folded modulo the angle count `M` and a single
//! length-`M` inverse FFT yields all `M` values on that circle. Short
//! polynomials are evaluated pointwise instead, so that exact cases such as
//! the identity stay exact.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{AnalyticFunction, Backend, EVAL_GUARD};
use crate::params::{parse_params, parse_real};
use crate::series::{geometric_tail, horner, CoefficientSeries, TAIL_TOLERANCE};
use crate::Complex;

pub const DEFAULT_RADII: [f64; 6] = [0.1, 0.3, 0.5, 0.7, 0.85, 0.95];
pub const DEFAULT_ANGLES: usize = 256;
pub const MIN_ANGLES: usize = 8;
pub const MAX_RADIUS: f64 = 1.0 - EVAL_GUARD;

/// Points `r_i e^{2πik/M}` for every radius `r_i` and `k < M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    radii: Vec<f64>,
    angles_per_radius: usize,
}

impl Default for DiskGrid {
    fn default() -> Self {
        Self {
            radii: DEFAULT_RADII.to_vec(),
            angles_per_radius: DEFAULT_ANGLES,
        }
    }
}

impl DiskGrid {
    pub fn new(radii: Vec<f64>, angles_per_radius: usize) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one radius".into()));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("grid radii must be strictly ascending".into()));
        }
        if radii[0] <= 0.0 || radii[radii.len() - 1] > MAX_RADIUS {
            return Err(Error::InvalidParameter(format!(
                "grid radii must lie in (0, {MAX_RADIUS}]"
            )));
        }
        if angles_per_radius < MIN_ANGLES {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_ANGLES} angles per radius"
            )));
        }
        Ok(Self {
            radii,
            angles_per_radius,
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles_per_radius(&self) -> usize {
        self.angles_per_radius
    }

    pub fn max_radius(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.angles_per_radius
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Angle `2πk/M`; computed so that refined grids reproduce coarse points bit for bit.
    pub fn angle(&self, k: usize) -> f64 {
        (2.0 * PI * k as f64) / self.angles_per_radius as f64
    }

    pub fn point(&self, radius_index: usize, k: usize) -> Complex {
        Complex::from_polar(self.radii[radius_index], self.angle(k))
    }

    /// Points in radius-major order.
    pub fn points(&self) -> impl Iterator<Item = Complex> + '_ {
        (0..self.radii.len())
            .flat_map(move |i| (0..self.angles_per_radius).map(move |k| self.point(i, k)))
    }

    /// Doubled angle count plus an extra circle at `0.99 · r_max`.
    /// The result contains every point of `self`.
    pub fn refined(&self) -> Self {
        let mut radii = self.radii.clone();
        let extra = 0.99 * self.max_radius();
        if !radii.contains(&extra) {
            radii.push(extra);
            radii.sort_by(f64::total_cmp);
        }
        Self {
            radii,
            angles_per_radius: self.angles_per_radius * 2,
        }
    }

    /// `self` refined `level` times.
    pub fn refined_to(&self, level: usize) -> Self {
        (0..level).fold(self.clone(), |g, _| g.refined())
    }

    /// True when every point of `self` is also a point of `other`.
    pub fn is_subset_of(&self, other: &DiskGrid) -> bool {
        other.angles_per_radius.is_multiple_of(self.angles_per_radius)
            && self.radii.iter().all(|r| other.radii.contains(r))
    }
}

impl fmt::Display for DiskGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let radii: Vec<String> = self.radii.iter().map(|r| r.to_string()).collect();
        write!(f, "custom:r={},angles={}", radii.join("/"), self.angles_per_radius)
    }
}

impl FromStr for DiskGrid {
    type Err = Error;

    /// `default`, `default:angles=64`, or `custom:r=0.1/0.5/0.9,angles=64`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, mut params) = parse_params(s)?;
        let grid = match name.as_str() {
            "default" => {
                let angles = params.integer_or("angles", DEFAULT_ANGLES as u64)? as usize;
                DiskGrid::new(DEFAULT_RADII.to_vec(), angles)?
            }
            "custom" => {
                let radii = params
                    .take("r")
                    .ok_or_else(|| Error::Parse("custom grid requires r=r1/r2/...".into()))?;
                let radii = radii
                    .split('/')
                    .map(parse_real)
                    .collect::<Result<Vec<_>>>()?;
                let angles = params.integer_or("angles", DEFAULT_ANGLES as u64)? as usize;
                DiskGrid::new(radii, angles)?
            }
            other => return Err(Error::Parse(format!("unknown grid '{other}'"))),
        };
        params.finish()?;
        Ok(grid)
    }
}

/// Values of `f`, `f'`, `f''` at every grid point, radius-major.
#[derive(Clone, Debug)]
pub struct GridValues {
    pub value: Vec<Complex>,
    pub first: Vec<Complex>,
    pub second: Vec<Complex>,
    /// Per radius: every evaluation on that circle is trustworthy.
    pub reliable: Vec<bool>,
}

impl GridValues {
    pub fn all_reliable(&self) -> bool {
        self.reliable.iter().all(|&r| r)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Values of the power series `coeffs` at the `m` points of the circle `|z| = r`.
fn circle_values(coeffs: &[Complex], r: f64, m: usize) -> Vec<Complex> {
    let mut folded = vec![Complex::new(0.0, 0.0); m];
    let mut power = 1.0;
    for (n, &a) in coeffs.iter().enumerate() {
        folded[n % m] += a * power;
        power *= r;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m));
    fft.process(&mut folded);
    folded
}

/// Polynomials up to this degree skip the FFT.
const POINTWISE_DEGREE: usize = 8;

fn degree(coeffs: &[Complex]) -> usize {
    coeffs.iter().rposition(|a| *a != Complex::new(0.0, 0.0)).unwrap_or(0)
}

fn ring_values(coeffs: &[Complex], grid: &DiskGrid, i: usize) -> Vec<Complex> {
    let deg = degree(coeffs);
    if deg <= POINTWISE_DEGREE {
        let short = &coeffs[..=deg];
        (0..grid.angles_per_radius())
            .map(|k| horner(short, grid.point(i, k)))
            .collect()
    } else {
        circle_values(coeffs, grid.radii()[i], grid.angles_per_radius())
    }
}

/// Evaluates a series and its first two derivatives on the grid.
pub fn evaluate_series(series: &CoefficientSeries, grid: &DiskGrid) -> GridValues {
    let d1 = series.derivative();
    let d2 = d1.derivative();
    let total = grid.len();
    let mut out = GridValues {
        value: Vec::with_capacity(total),
        first: Vec::with_capacity(total),
        second: Vec::with_capacity(total),
        reliable: Vec::with_capacity(grid.radii().len()),
    };
    for (i, &r) in grid.radii().iter().enumerate() {
        out.value.extend(ring_values(series.coeffs(), grid, i));
        out.first.extend(ring_values(d1.coeffs(), grid, i));
        out.second.extend(ring_values(d2.coeffs(), grid, i));
        let tail = geometric_tail(series.coeffs(), r)
            .max(geometric_tail(d1.coeffs(), r))
            .max(geometric_tail(d2.coeffs(), r));
        out.reliable.push(tail <= TAIL_TOLERANCE && r <= MAX_RADIUS);
    }
    out
}

/// Series used when `f` is sampled through its coefficients: at least
/// `order` terms, and never fewer than the function's own finite expansion.
pub fn sampling_series(f: &AnalyticFunction, order: usize) -> Result<CoefficientSeries> {
    f.to_series(order.max(intrinsic_order(f)))
}

fn intrinsic_order(f: &AnalyticFunction) -> usize {
    match &f.backend {
        Backend::Series { series } => series.order(),
        Backend::OperatorApplied { inner, .. } => intrinsic_order(inner),
        Backend::ClosedForm { .. } => 0,
    }
}

/// Evaluates `f` on the grid: closed forms pointwise, everything else
/// through its coefficient series truncated at `order`.
pub fn evaluate_function(f: &AnalyticFunction, grid: &DiskGrid, order: usize) -> Result<GridValues> {
    match &f.backend {
        Backend::ClosedForm { .. } => {
            let m = grid.angles_per_radius();
            let mut out = GridValues {
                value: Vec::with_capacity(grid.len()),
                first: Vec::with_capacity(grid.len()),
                second: Vec::with_capacity(grid.len()),
                reliable: Vec::with_capacity(grid.radii().len()),
            };
            for i in 0..grid.radii().len() {
                let mut ok = true;
                for k in 0..m {
                    let t = f.eval_triple(grid.point(i, k))?;
                    ok &= t.reliable;
                    out.value.push(t.value);
                    out.first.push(t.first);
                    out.second.push(t.second);
                }
                out.reliable.push(ok);
            }
            Ok(out)
        }
        _ => Ok(evaluate_series(&sampling_series(f, order)?, grid)),
    }
}
