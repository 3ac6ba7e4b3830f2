//! Shared numerical kernels: fixed-step RK4, trapezoidal quadrature,
//! dense nonsymmetric eigensolution, and biquadratic root extraction.
//!
//! Every kernel is deterministic: identical inputs give bit-identical
//! outputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Residual contract for eigenpairs: `||M v - lambda v|| <= RESIDUAL_TOL * ||M||`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Iteration cap for the QR sweep, in units of matrix dimension.
const QR_SWEEPS_PER_DIM: usize = 60;

/// A uniform time grid `t_min + i*dt`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
}

impl GridSpec {
    /// The span must be an integer number of steps within `1e-9` relative.
    pub fn new(t_min: f64, t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !t_min.is_finite() || !t_max.is_finite() || t_max <= t_min {
            return Err(Error::InvalidGrid {
                reason: format!("need t_min < t_max and dt > 0, got [{t_min}, {t_max}] dt={dt}"),
            });
        }
        let steps = (t_max - t_min) / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidGrid {
                reason: format!("(t_max - t_min)/dt = {steps} is not an integer"),
            });
        }
        Ok(Self { t_min, t_max, dt })
    }

    /// Grid with an exact number of steps.
    pub fn with_steps(t_min: f64, dt: f64, steps: usize) -> Self {
        Self {
            t_min,
            t_max: t_min + dt * steps as f64,
            dt,
        }
    }

    pub fn steps(&self) -> usize {
        ((self.t_max - self.t_min) / self.dt).round() as usize
    }

    /// Number of samples, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_min + self.dt * i as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    /// The same span sampled at half the step.
    pub fn halved(&self) -> Self {
        Self::with_steps(self.t_min, self.dt / 2.0, self.steps() * 2)
    }
}

/// A trajectory sampled on a uniform grid, row `i` = state at `time(i)`.
#[derive(Debug, Clone)]
pub struct Sampled {
    pub grid: GridSpec,
    pub dim: usize,
    data: Vec<f64>,
}

impl Sampled {
    pub fn new(grid: GridSpec, dim: usize) -> Self {
        let data = vec![0.0; grid.len() * dim];
        Self { grid, dim, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// One component over time.
    pub fn component(&self, c: usize) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.row(i)[c]).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.row(self.grid.len() - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// One classical RK4 step in place: `y <- y + dt/6 (k1 + 2k2 + 2k3 + k4)`.
///
/// `work` must hold four `y.len()` scratch slabs plus one stage buffer.
pub fn rk4_step<F>(rhs: &mut F, t: f64, y: &mut [f64], dt: f64, work: &mut Rk4Work)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    work.resize(n);
    let Rk4Work { k1, k2, k3, k4, stage } = work;

    rhs(t, y, k1);
    for i in 0..n {
        stage[i] = y[i] + 0.5 * dt * k1[i];
    }
    rhs(t + 0.5 * dt, stage, k2);
    for i in 0..n {
        stage[i] = y[i] + 0.5 * dt * k2[i];
    }
    rhs(t + 0.5 * dt, stage, k3);
    for i in 0..n {
        stage[i] = y[i] + dt * k3[i];
    }
    rhs(t + dt, stage, k4);
    let w = dt / 6.0;
    for i in 0..n {
        y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Scratch buffers for [`rk4_step`].
#[derive(Debug, Default)]
pub struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4Work {
    pub fn new(n: usize) -> Self {
        let mut w = Self::default();
        w.resize(n);
        w
    }

    fn resize(&mut self, n: usize) {
        if self.k1.len() != n {
            self.k1.resize(n, 0.0);
            self.k2.resize(n, 0.0);
            self.k3.resize(n, 0.0);
            self.k4.resize(n, 0.0);
            self.stage.resize(n, 0.0);
        }
    }
}

/// Integrates `y' = rhs(t, y)` over the grid and records every sample.
///
/// Aborts with the step index as soon as a state stops being finite.
pub fn rk4<F>(mut rhs: F, y0: &[f64], grid: &GridSpec) -> Result<Sampled>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut out = Sampled::new(*grid, y0.len());
    let mut y = y0.to_vec();
    let mut work = Rk4Work::new(y0.len());
    out.row_mut(0).copy_from_slice(&y);
    for step in 0..grid.steps() {
        let t = grid.time(step);
        rk4_step(&mut rhs, t, &mut y, grid.dt, &mut work);
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState {
                step: step + 1,
                time: grid.time(step + 1),
            });
        }
        out.row_mut(step + 1).copy_from_slice(&y);
    }
    Ok(out)
}

/// Composite trapezoid value of uniformly sampled data.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    assert!(samples.len() >= 2, "trapezoid needs at least two samples");
    let inner: f64 = samples[1..samples.len() - 1].iter().sum();
    dt * (0.5 * (samples[0] + samples[samples.len() - 1]) + inner)
}

/// Running trapezoid integral, same length as the input, starting at 0.
pub fn cumulative_trapezoid(samples: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in samples.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Roots of `lambda^4 + a lambda^2 + b` via the quadratic in `lambda^2`,
/// with the large root computed first to dodge cancellation.
pub fn biquadratic_roots(a: f64, b: f64) -> [Complex64; 4] {
    let disc = a * a - 4.0 * b;
    let (s1, s2) = if disc >= 0.0 {
        let sq = disc.sqrt();
        // q carries the addition of same-signed quantities.
        let q = -0.5 * (a + a.signum() * sq);
        if q == 0.0 {
            (Complex64::new(-0.5 * a + 0.5 * sq, 0.0), Complex64::new(-0.5 * a - 0.5 * sq, 0.0))
        } else {
            (Complex64::new(q, 0.0), Complex64::new(b / q, 0.0))
        }
    } else {
        let sq = (-disc).sqrt();
        (
            Complex64::new(-0.5 * a, 0.5 * sq),
            Complex64::new(-0.5 * a, -0.5 * sq),
        )
    };
    let r1 = s1.sqrt();
    let r2 = s2.sqrt();
    [r1, -r1, r2, -r2]
}

/// Operator infinity norm (max absolute row sum).
pub fn matrix_inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

/// All eigenvalues of a dense real matrix by the (Hessenberg + shifted QR)
/// Schur decomposition.
///
/// Non-convergence within the iteration cap is surfaced as an error.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    assert_eq!(m.nrows(), m.ncols(), "eigenvalues: matrix must be square");
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if matrix_inf_norm(m) == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, QR_SWEEPS_PER_DIM * n)
        .ok_or(Error::EigenConvergence {
            size: n,
            partial: 0,
            partial_values: Vec::new(),
        })?;
    let vals = schur.complex_eigenvalues();
    Ok(vals.iter().copied().collect())
}

/// Eigenvalues plus eigenvectors from one inverse-iteration pass per value,
/// each pair checked against the residual contract
/// `||M v - lambda v||_2 <= 1e-10 * ||M||_inf`.
pub fn eigenpairs(m: &DMatrix<f64>) -> Result<Vec<(Complex64, DVector<Complex64>)>> {
    let n = m.nrows();
    let norm = matrix_inf_norm(m);
    if norm == 0.0 {
        return Ok((0..n)
            .map(|i| {
                let mut v = DVector::from_element(n, Complex64::new(0.0, 0.0));
                v[i] = Complex64::new(1.0, 0.0);
                (Complex64::new(0.0, 0.0), v)
            })
            .collect());
    }
    let values = eigenvalues(m)?;
    let mc = m.map(|x| Complex64::new(x, 0.0));
    let mut out = Vec::with_capacity(n);
    for &lambda in &values {
        let v = inverse_iteration(&mc, lambda, norm)?;
        let residual = (&mc * &v - v.map(|x| x * lambda)).norm();
        if residual > EIGEN_RESIDUAL_TOL * norm {
            return Err(Error::EigenResidual {
                lambda,
                residual,
                tolerance: EIGEN_RESIDUAL_TOL,
            });
        }
        out.push((lambda, v));
    }
    Ok(out)
}

fn inverse_iteration(
    mc: &DMatrix<Complex64>,
    lambda: Complex64,
    norm: f64,
) -> Result<DVector<Complex64>> {
    let n = mc.nrows();
    // Shift nudges keep the factorization nonsingular when lambda is
    // exact; inverse iteration converges regardless.
    let nudges = [0.0, 1e-14, 1e-12, 1e-10];
    let mut best: Option<(f64, DVector<Complex64>)> = None;
    for &nudge in &nudges {
        let shift = lambda + Complex64::new(nudge * norm, nudge * norm);
        let mut shifted = mc.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let lu = shifted.lu();
        let mut v = DVector::from_element(n, Complex64::new(1.0, 0.0));
        v /= Complex64::new(v.norm(), 0.0);
        let mut ok = true;
        for _ in 0..4 {
            match lu.solve(&v) {
                Some(w) => {
                    let nw = w.norm();
                    if !nw.is_finite() || nw == 0.0 {
                        ok = false;
                        break;
                    }
                    v = w / Complex64::new(nw, 0.0);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let residual = (mc * &v - v.map(|x| x * lambda)).norm();
        match &best {
            Some((r, _)) if *r <= residual => {}
            _ => best = Some((residual, v.clone())),
        }
        if residual <= EIGEN_RESIDUAL_TOL * norm {
            return Ok(v);
        }
    }
    best.map(|(_, v)| v).ok_or(Error::EigenResidual {
        lambda,
        residual: f64::INFINITY,
        tolerance: EIGEN_RESIDUAL_TOL,
    })
}
