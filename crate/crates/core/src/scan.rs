//! δ10 × AOM sweeps, transmission spectra, feature extraction and the contrast threshold.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::doppler::{reduce, VelocityGrid};
use crate::error::PointError;
use crate::liouville::{assemble_liouvillian, steady_state, DensityMatrix, Liouvillian};
use crate::model::{
    build_decay_superop, build_delta_h, build_h0, DecaySuperop, FieldConfig, Level,
};
use crate::probe::{l2_response, solve_delta_rho, ProbeResponse};
use crate::system::{ScanConfig, SystemConfig, ValidationError};

/// Relative level below which a deviation from background counts as numerical noise.
pub const NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScanError {
    #[error(transparent)]
    Config(#[from] ValidationError),
    #[error("grid point delta10 = {delta10} MHz, aom = {aom} MHz, v = {velocity} m/s: {source}")]
    Point {
        delta10: f64,
        aom: f64,
        velocity: f64,
        #[source]
        source: PointError,
    },
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("no feature above the noise floor in the AOM trace at delta10 = {delta10} MHz")]
    NoFeature { delta10: f64 },
    #[error("delta10 = {0} MHz is not on the scan grid")]
    OffGrid(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("contrast never exceeds the noise floor")]
pub struct NoThreshold;

/// Fields and decay for one (δ10, aom) point with the off-resonant switch applied.
#[derive(Debug, Clone)]
pub struct PointModel<'a> {
    system: &'a SystemConfig,
    l1: FieldConfig,
    decay: DecaySuperop,
}

/// One solved grid point in a single velocity class.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub liouvillian: Liouvillian,
    pub rho: DensityMatrix,
    pub probe: ProbeResponse,
    pub l2_coeff: f64,
}

impl<'a> PointModel<'a> {
    pub fn new(system: &'a SystemConfig, off_resonant: bool) -> Result<Self, PointError> {
        let l1 = if off_resonant {
            system.l1.clone()
        } else {
            system.l1.with_leg_rabi(Level::Excited1, 0.0)?
        };
        Ok(Self {
            system,
            l1,
            decay: build_decay_superop(&system.decay),
        })
    }

    pub fn l2_at(&self, aom: f64) -> Result<FieldConfig, PointError> {
        Ok(self.system.l2.with_detuning_offset(aom)?)
    }

    pub fn solve(&self, delta10: f64, aom: f64, velocity: f64) -> Result<PointSolution, PointError> {
        let s = self.system;
        let l2 = self.l2_at(aom)?;
        let h0 = build_h0(&s.scheme, &self.l1, &l2, delta10, velocity)?;
        let liouvillian = assemble_liouvillian(&h0, &self.decay);
        let rho = steady_state(&liouvillian)?;
        let dh = build_delta_h(&s.scheme, &s.l3, delta10, velocity)?;
        let probe = solve_delta_rho(&liouvillian, &dh, &rho, s.decay.gamma_e(), s.probe)?;
        let l2_coeff = l2_response(&rho, &l2, s.decay.gamma_e());
        Ok(PointSolution {
            liouvillian,
            rho,
            probe,
            l2_coeff,
        })
    }

    /// `(l2, l3)` coefficients.
    pub fn coefficients(&self, delta10: f64, aom: f64, velocity: f64) -> Result<(f64, f64), PointError> {
        let p = self.solve(delta10, aom, velocity)?;
        Ok((p.l2_coeff, p.probe.absorption_coefficient))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub delta10: f64,
    pub aom: f64,
    pub l2_coeff: f64,
    pub l2_transmission: f64,
    pub l3_coeff: f64,
    pub l3_transmission: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Beam {
    L2,
    L3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub delta10: Vec<f64>,
    pub aom: Vec<f64>,
    /// Row-major over `(delta10, aom)`.
    pub points: Vec<SpectrumPoint>,
    pub system: SystemConfig,
    pub scan: ScanConfig,
}

impl Spectrum {
    pub fn row(&self, i: usize) -> &[SpectrumPoint] {
        let n = self.aom.len();
        &self.points[i * n..(i + 1) * n]
    }

    pub fn row_index(&self, delta10: f64) -> Option<usize> {
        let tol = 1e-9 * self.scan.delta10.step.max(1.0);
        self.delta10.iter().position(|d| (d - delta10).abs() <= tol)
    }

    pub fn transmission(&self, i: usize, beam: Beam) -> Vec<f64> {
        self.row(i)
            .iter()
            .map(|p| match beam {
                Beam::L2 => p.l2_transmission,
                Beam::L3 => p.l3_transmission,
            })
            .collect()
    }
}

/// `exp(-od·c)` normalized to the mean of the two trace edges.
pub fn normalized_transmission(coeffs: &[f64], optical_depth: f64) -> Vec<f64> {
    let raw: Vec<f64> = coeffs.iter().map(|c| (-optical_depth * c).exp()).collect();
    let bg = edge_mean(&raw);
    raw.iter().map(|t| t / bg).collect()
}

fn edge_mean(trace: &[f64]) -> f64 {
    0.5 * (trace[0] + trace[trace.len() - 1])
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool, ScanError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ScanError::Pool(e.to_string()))
}

/// Runs the full sweep on `workers` threads; the output does not depend on the worker count.
pub fn run_scan(
    system: &SystemConfig,
    scan: &ScanConfig,
    workers: usize,
) -> Result<Spectrum, ScanError> {
    system.validate()?;
    scan.validate()?;
    let grid = system.velocity_grid(scan.doppler)?;
    let delta10 = scan.delta10.points();
    let aom = scan.aom.points();
    let model = PointModel::new(system, scan.off_resonant).map_err(|source| ScanError::Point {
        delta10: delta10[0],
        aom: aom[0],
        velocity: grid.nodes()[0],
        source,
    })?;

    let items: Vec<(usize, usize)> = (0..delta10.len())
        .flat_map(|i| (0..grid.len()).map(move |k| (i, k)))
        .collect();
    let solve_item = |&(i, k): &(usize, usize)| -> Result<(Vec<f64>, Vec<f64>), ScanError> {
        let d = delta10[i];
        let v = grid.nodes()[k];
        let mut l2 = Vec::with_capacity(aom.len());
        let mut l3 = Vec::with_capacity(aom.len());
        for &a in &aom {
            let (c2, c3) = model.coefficients(d, a, v).map_err(|source| ScanError::Point {
                delta10: d,
                aom: a,
                velocity: v,
                source,
            })?;
            l2.push(c2);
            l3.push(c3);
        }
        Ok((l2, l3))
    };
    let solved: Vec<(Vec<f64>, Vec<f64>)> = if workers <= 1 {
        items.iter().map(solve_item).collect::<Result<_, _>>()?
    } else {
        build_pool(workers)?.install(|| items.par_iter().map(solve_item).collect::<Result<_, _>>())?
    };

    let mut points = Vec::with_capacity(delta10.len() * aom.len());
    for (i, &d) in delta10.iter().enumerate() {
        let rows = &solved[i * grid.len()..(i + 1) * grid.len()];
        let (l2s, l3s): (Vec<Vec<f64>>, Vec<Vec<f64>>) = rows.iter().cloned().unzip();
        let (l2, l3) = average_rows(&l2s, &l3s, &grid);
        let t2 = normalized_transmission(&l2, system.optical_depth);
        let t3 = normalized_transmission(&l3, system.optical_depth);
        for j in 0..aom.len() {
            points.push(SpectrumPoint {
                delta10: d,
                aom: aom[j],
                l2_coeff: l2[j],
                l2_transmission: t2[j],
                l3_coeff: l3[j],
                l3_transmission: t3[j],
            });
        }
    }
    Ok(Spectrum {
        delta10,
        aom,
        points,
        system: system.clone(),
        scan: scan.clone(),
    })
}

fn average_rows(l2: &[Vec<f64>], l3: &[Vec<f64>], grid: &VelocityGrid) -> (Vec<f64>, Vec<f64>) {
    (reduce(l2, grid), reduce(l3, grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feature {
    /// AOM offset of the extremum, MHz.
    pub position: f64,
    /// Full width at half depth, MHz; `None` when a half crossing lies outside the trace.
    pub width: Option<f64>,
    /// `(background - extremum) / background`: positive for absorption, negative for transmission.
    pub contrast: f64,
}

/// Feature of a sampled trace: the local extremum nearest `x = 0`.
pub fn trace_feature(x: &[f64], y: &[f64]) -> Option<Feature> {
    let n = y.len();
    if n < 3 || x.len() != n {
        return None;
    }
    let bg = edge_mean(y);
    let centre = (0..n)
        .min_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
        .expect("non-empty");
    let is_extremum = |i: usize| {
        i > 0
            && i + 1 < n
            && ((y[i] >= y[i - 1] && y[i] >= y[i + 1]) || (y[i] <= y[i - 1] && y[i] <= y[i + 1]))
    };
    let idx = (0..n).find_map(|off| {
        let down = centre.checked_sub(off).filter(|&i| is_extremum(i));
        down.or_else(|| Some(centre + off).filter(|&i| i < n && is_extremum(i)))
    })?;
    let ext = y[idx];
    if (ext - bg).abs() < 3.0 * NOISE_FLOOR * bg.abs().max(f64::MIN_POSITIVE) {
        return None;
    }
    let half = 0.5 * (ext + bg);
    let above = ext > half;
    let inside = |i: usize| (y[i] > half) == above;
    let crossing = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);

    let mut lo = idx;
    while lo > 0 && inside(lo) {
        lo -= 1;
    }
    let mut hi = idx;
    while hi + 1 < n && inside(hi) {
        hi += 1;
    }
    let width = (!inside(lo) && !inside(hi)).then(|| crossing(hi - 1, hi) - crossing(lo, lo + 1));
    Some(Feature {
        position: x[idx],
        width,
        contrast: (bg - ext) / bg,
    })
}

pub fn extract_feature(spectrum: &Spectrum, delta10: f64, beam: Beam) -> Result<Feature, FeatureError> {
    let i = spectrum.row_index(delta10).ok_or(FeatureError::OffGrid(delta10))?;
    trace_feature(&spectrum.aom, &spectrum.transmission(i, beam))
        .ok_or(FeatureError::NoFeature { delta10 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastCurve {
    pub delta10: Vec<f64>,
    /// Signed L3 contrast; zero where no feature was found.
    pub contrast: Vec<f64>,
    pub width: Vec<Option<f64>>,
}

pub fn contrast_curve(spectrum: &Spectrum) -> ContrastCurve {
    let mut contrast = Vec::with_capacity(spectrum.delta10.len());
    let mut width = Vec::with_capacity(spectrum.delta10.len());
    for i in 0..spectrum.delta10.len() {
        match trace_feature(&spectrum.aom, &spectrum.transmission(i, Beam::L3)) {
            Some(f) => {
                contrast.push(f.contrast);
                width.push(f.width);
            }
            None => {
                contrast.push(0.0);
                width.push(None);
            }
        }
    }
    ContrastCurve {
        delta10: spectrum.delta10.clone(),
        contrast,
        width,
    }
}

/// Smallest δ10 where the contrast exceeds half its maximum, linearly interpolated.
pub fn threshold_detect(curve: &ContrastCurve) -> Result<f64, NoThreshold> {
    let (d, c) = (&curve.delta10, &curve.contrast);
    let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_nan() || max <= 3.0 * NOISE_FLOOR {
        return Err(NoThreshold);
    }
    let level = 0.5 * max;
    let i = c.iter().position(|&x| x > level).ok_or(NoThreshold)?;
    if i == 0 {
        return Ok(d[0]);
    }
    Ok(d[i - 1] + (level - c[i - 1]) * (d[i] - d[i - 1]) / (c[i] - c[i - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(start: f64, stop: f64, step: f64) -> Vec<f64> {
        crate::system::Axis::new(start, stop, step).unwrap().points()
    }

    #[test]
    fn flat_trace_has_no_feature() {
        let x = axis(-10.0, 10.0, 0.1);
        assert_eq!(trace_feature(&x, &vec![1.0; x.len()]), None);
    }

    #[test]
    fn lorentzian_dip_contrast_and_width() {
        let x = axis(-10.0, 10.0, 0.1);
        let (depth, fwhm) = (0.2f64, 1.0f64);
        let y: Vec<f64> = x
            .iter()
            .map(|&a| 1.0 - depth * (fwhm / 2.0).powi(2) / (a * a + (fwhm / 2.0).powi(2)))
            .collect();
        let f = trace_feature(&x, &y).unwrap();
        // The edges sit slightly below 1, which shifts the background by ~5e-4.
        assert!((f.contrast - 0.2).abs() < 1e-3, "{}", f.contrast);
        assert!((f.width.unwrap() - 1.0).abs() < 0.05, "{:?}", f.width);
        assert!(f.position.abs() < 1e-12);
    }

    #[test]
    fn step_threshold() {
        let d = axis(0.0, 24.0, 1.0);
        let c = d.iter().map(|&x| if x >= 12.0 { 0.1 } else { 0.0 }).collect();
        let curve = ContrastCurve {
            delta10: d.clone(),
            contrast: c,
            width: vec![None; d.len()],
        };
        let t = threshold_detect(&curve).unwrap();
        assert!((t - 12.0).abs() <= 0.5, "{t}");
    }

    #[test]
    fn non_positive_curve_has_no_threshold() {
        let d = axis(-5.0, 5.0, 1.0);
        let curve = ContrastCurve {
            contrast: d.iter().map(|x| -0.01 * (1.0 + x.abs())).collect(),
            width: vec![None; d.len()],
            delta10: d,
        };
        assert_eq!(threshold_detect(&curve), Err(NoThreshold));
    }

    #[test]
    fn fields_off_scan_is_unit_transmission() {
        let system = SystemConfig {
            l1: FieldConfig::l1(0.0, 0.0).unwrap(),
            l2: FieldConfig::l2(0.0, 0.0, 0.0).unwrap(),
            l3: FieldConfig::l3(0.0, 0.0).unwrap(),
            ..SystemConfig::default()
        };
        let scan = ScanConfig {
            delta10: crate::system::Axis::new(-2.0, 2.0, 1.0).unwrap(),
            aom: crate::system::Axis::new(-1.0, 1.0, 0.5).unwrap(),
            ..ScanConfig::default()
        };
        let s = run_scan(&system, &scan, 1).unwrap();
        assert_eq!(s.points.len(), 25);
        assert!(s.points.iter().all(|p| p.l2_transmission == 1.0 && p.l3_transmission == 1.0));
    }
}
