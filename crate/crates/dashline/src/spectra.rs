//! Linearized and homotopy operators on a finite mode window, their
//! eigenvalues, and the chopped-block spectra.
//!
//! The operator couples nearest neighbours along the class line
//! `khat + n*p`; entries on dashed positions are gated by `eps`. Out-of-
//! window neighbours are treated as zero amplitude (hard cutoff), which
//! matches the model's own finite truncations; convergence is studied by
//! growing the window.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::coefficients::{
    epsilon_factor, rational_to_f64, CoefficientTable, ModeIndex, WaveConfig, Window,
};
use crate::error::{Error, Result};
use crate::numerics;

/// Eigenvalues with `|Re| < BAND_RE_TOL * |Gamma|` are classified as the
/// imaginary-axis band; everything else is hyperbolic.
pub const BAND_RE_TOL: f64 = 1e-6;

/// The dense homotopy operator on a window.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    pub config: WaveConfig,
    pub gamma: f64,
    pub eps: f64,
    pub window: Window,
    pub matrix: DMatrix<f64>,
}

/// Builds the homotopy operator: row `n` couples to `n -+ 1` through
/// `eps_{n-+1} A_{n-+1} Gamma` with the sign pattern of the linearized
/// system.
pub fn build_homotopy_operator(
    table: &CoefficientTable,
    gamma: f64,
    eps: f64,
    window: Window,
) -> Result<LinearOperator> {
    if !table.window().covers(window) {
        return Err(Error::WindowNotCovered {
            requested_min: window.n_min,
            requested_max: window.n_max,
            table_min: table.window().n_min,
            table_max: table.window().n_max,
        });
    }
    let dim = window.len();
    let mut m = DMatrix::zeros(dim, dim);
    for n in window.iter() {
        let row = window.index(n);
        if window.contains(n - 1) {
            m[(row, window.index(n - 1))] = epsilon_factor(n - 1, eps) * table.a(n - 1) * gamma;
        }
        if window.contains(n + 1) {
            m[(row, window.index(n + 1))] = -epsilon_factor(n + 1, eps) * table.a(n + 1) * gamma;
        }
    }
    Ok(LinearOperator {
        config: *table.config(),
        gamma,
        eps,
        window,
        matrix: m,
    })
}

/// All eigenvalues of the dense operator.
pub fn dense_eigenvalues(op: &LinearOperator) -> Result<Vec<Complex64>> {
    numerics::eigenvalues(&op.matrix)
}

/// The quadruple `+-(Gamma / (2 sqrt(10))) sqrt(1 +- i sqrt(35))` of the
/// four-mode block; `|Re| = Gamma sqrt(7/80)`, `Im = Gamma/4`.
pub fn four_mode_quadruple(gamma: f64) -> [Complex64; 4] {
    let s = Complex64::new(1.0, 35.0f64.sqrt()).sqrt() * (gamma / (2.0 * 10.0f64.sqrt()));
    [s, -s, s.conj(), -s.conj()]
}

/// Spectrum of the chopped block `{5j+1 .. 5j+4}`.
///
/// For `j != 0` the block has two purely imaginary pairs
/// `+- i (Gamma/sqrt 2) sqrt|b + delta sqrt(b^2-4c)|`; the defining
/// constraints `b < 0`, `c > 0`, `0 < b^2 - 4c < b^2` are checked in exact
/// arithmetic. `j = 0` is permitted (it yields the quadruple through
/// `b^2 - 4c < 0`) but flagged in the result.
#[derive(Debug, Clone)]
pub struct ChoppedSpectrum {
    pub j: i64,
    pub values: [Complex64; 4],
    pub flagged_quadruple: bool,
}

pub fn chopped_block_spectrum(
    table: &CoefficientTable,
    j: i64,
    gamma: f64,
) -> Result<ChoppedSpectrum> {
    let base = 5 * j;
    let mut prod = Vec::with_capacity(3);
    for l in 1..=3 {
        prod.push(table.model_coefficient(base + l)? * table.model_coefficient(base + l + 1)?);
    }
    // b = -(A1 A2 + A2 A3 + A3 A4), c = A1 A2 A3 A4 over the block.
    let b: BigRational = -(prod[0].clone() + prod[1].clone() + prod[2].clone());
    let c: BigRational = prod[0].clone() * prod[2].clone();
    let disc = b.clone() * b.clone() - BigRational::from_integer(4.into()) * c.clone();
    if j != 0 {
        let ok = b.is_negative()
            && c.is_positive()
            && disc.is_positive()
            && disc < b.clone() * b.clone();
        if !ok {
            return Err(Error::ChoppedConstraint {
                j,
                reason: format!("b = {b}, c = {c}, b^2 - 4c = {disc}"),
            });
        }
    }
    // Characteristic polynomial: lambda^4 - Gamma^2 b lambda^2 + Gamma^4 c.
    let g2 = gamma * gamma;
    let values = numerics::biquadratic_roots(-g2 * rational_to_f64(&b), g2 * g2 * rational_to_f64(&c));
    Ok(ChoppedSpectrum {
        j,
        values,
        flagged_quadruple: j == 0,
    })
}

/// The `j -> +-inf` limit `+- i (Gamma/2) sqrt((3 +- sqrt 5)/2)`.
pub fn chopped_block_limit(gamma: f64) -> [Complex64; 4] {
    let small = 0.5 * gamma * ((3.0 - 5.0f64.sqrt()) / 2.0).sqrt();
    let large = 0.5 * gamma * ((3.0 + 5.0f64.sqrt()) / 2.0).sqrt();
    [
        Complex64::new(0.0, small),
        Complex64::new(0.0, -small),
        Complex64::new(0.0, large),
        Complex64::new(0.0, -large),
    ]
}

/// Band classification of one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandClass {
    ImaginaryBand,
    Hyperbolic,
}

impl BandClass {
    pub fn classify(lambda: Complex64, gamma: f64) -> Self {
        if lambda.re.abs() < BAND_RE_TOL * gamma.abs() {
            BandClass::ImaginaryBand
        } else {
            BandClass::Hyperbolic
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BandClass::ImaginaryBand => "imaginary_band",
            BandClass::Hyperbolic => "hyperbolic",
        }
    }
}

/// Eigenvalues per point of an `eps` grid.
#[derive(Debug, Clone)]
pub struct SpectrumSweep {
    pub eps_grid: Vec<f64>,
    pub spectra: Vec<Vec<Complex64>>,
    pub window: Window,
    pub gamma: f64,
}

impl SpectrumSweep {
    /// Worst defect of the `lambda -> -lambda` / `lambda -> conj(lambda)`
    /// closure over all sweep points.
    pub fn max_symmetry_defect(&self) -> f64 {
        self.spectra
            .iter()
            .map(|s| symmetry_defect(s))
            .fold(0.0f64, f64::max)
    }

    /// The eigenvalue closest to `target` at a sweep point.
    pub fn nearest(&self, point: usize, target: Complex64) -> Option<Complex64> {
        self.spectra[point]
            .iter()
            .copied()
            .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
    }
}

/// Dense eigensweep over an `eps` grid; points are independent and run in
/// parallel, results are assembled in grid order.
pub fn homotopy_sweep(
    config: WaveConfig,
    window: Window,
    gamma: f64,
    eps_grid: &[f64],
) -> Result<SpectrumSweep> {
    let table = CoefficientTable::new(config, window)?;
    let spectra: Result<Vec<Vec<Complex64>>> = eps_grid
        .par_iter()
        .map(|&eps| {
            let op = build_homotopy_operator(&table, gamma, eps, window)?;
            dense_eigenvalues(&op)
        })
        .collect();
    Ok(SpectrumSweep {
        eps_grid: eps_grid.to_vec(),
        spectra: spectra?,
        window,
        gamma,
    })
}

/// Half-width `2|b|` of the continuous-spectrum band, with
/// `b = -|Gamma| |p|^-2 det(p, khat) / 2` (raw interaction-coefficient
/// convention); a soft diagnostic, not an acceptance gate.
pub fn continuum_halfband(config: &WaveConfig, gamma: f64) -> f64 {
    let det = config.p.det(config.khat) as f64;
    let b = -0.5 * gamma.abs() / config.p.norm_sq() as f64 * det;
    2.0 * b.abs()
}

/// A class member inside the closed disk of radius `|p|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiskWitness {
    pub n: i64,
    pub mode: ModeIndex,
}

/// Result of the disk test `Sigma_khat intersect closed D_|p|`.
#[derive(Debug, Clone)]
pub struct DiskTestResult {
    pub intersects: bool,
    pub witnesses: Vec<DiskWitness>,
}

/// Scans `khat + n*p` over the range for members with `|k| <= |p|`, the
/// necessary condition for point spectrum.
pub fn class_disk_intersects(
    config: &WaveConfig,
    n_range: impl IntoIterator<Item = i64>,
) -> DiskTestResult {
    let p_sq = config.p.norm_sq();
    let mut witnesses = Vec::new();
    for n in n_range {
        let mode = config.mode(n);
        if !mode.is_zero() && mode.norm_sq() <= p_sq {
            witnesses.push(DiskWitness { n, mode });
        }
    }
    DiskTestResult {
        intersects: !witnesses.is_empty(),
        witnesses,
    }
}

/// Multiset defect of closure under `lambda -> -lambda` and
/// `lambda -> conj(lambda)`: greedy one-to-one matching of each value to
/// its image, returning the worst matched distance.
pub fn symmetry_defect(values: &[Complex64]) -> f64 {
    let defect_under = |map: &dyn Fn(Complex64) -> Complex64| -> f64 {
        let mut used = vec![false; values.len()];
        let mut order: Vec<usize> = (0..values.len()).collect();
        // Largest magnitudes first so outliers claim their partners early.
        order.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()));
        let mut worst = 0.0f64;
        for &i in &order {
            let target = map(values[i]);
            let mut best = f64::INFINITY;
            let mut best_j = usize::MAX;
            for (j, v) in values.iter().enumerate() {
                if !used[j] {
                    let d = (v - target).norm();
                    if d < best {
                        best = d;
                        best_j = j;
                    }
                }
            }
            if best_j != usize::MAX {
                used[best_j] = true;
                worst = worst.max(best);
            }
        }
        worst
    };
    let neg = defect_under(&|z: Complex64| -z);
    let conj = defect_under(&|z: Complex64| z.conj());
    neg.max(conj)
}
