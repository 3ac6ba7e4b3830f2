//! The nonlinear dashed-line model on a finite window: right-hand side,
//! exact `f + eps*g` split, conserved quantities, a fixed-step RK4
//! integrator, and a box-truncated 2D Euler right-hand side used as the
//! background reference for conservation tests.
//!
//! Out-of-window modes read as zero (hard cutoff). The windowed system
//! still conserves the kinetic energy and the enstrophy exactly: both
//! cancellations telescope over adjacent in-window pairs through
//! `A_{n-1,n} = A_{n-1} - A_n` and its `|k|^-2`-weighted counterpart.

use std::collections::HashMap;

use crate::coefficients::{
    interaction_coefficient, is_dashed, rational_to_f64, CoefficientTable, ModeIndex, Window,
};
use crate::error::{Error, Result};
use crate::numerics::{self, GridSpec, Rk4Work};
use crate::orbit::OrbitPoint;

/// The dashed-line model: coefficient table (owning the window) plus the
/// homotopy parameter.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub table: CoefficientTable,
    pub eps: f64,
}

impl ModelConfig {
    pub fn new(table: CoefficientTable, eps: f64) -> Self {
        Self { table, eps }
    }

    pub fn window(&self) -> Window {
        self.table.window()
    }

    pub fn dim(&self) -> usize {
        self.window().len() + 1
    }
}

/// Mode amplitudes over a window plus the pump amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub window: Window,
    pub omega: Vec<f64>,
    pub omega_p: f64,
}

impl ModelState {
    pub fn zeros(window: Window) -> Self {
        Self {
            window,
            omega: vec![0.0; window.len()],
            omega_p: 0.0,
        }
    }

    /// The fixed point `omega_p = gamma`, all line modes zero.
    pub fn fixed_point(window: Window, gamma: f64) -> Self {
        let mut s = Self::zeros(window);
        s.omega_p = gamma;
        s
    }

    /// Embeds an orbit point: block modes `0..=5` plus the pump.
    pub fn from_orbit_point(window: Window, point: &OrbitPoint) -> Result<Self> {
        if !(window.contains(0) && window.contains(5)) {
            return Err(Error::InvalidWindow {
                reason: format!("window {window} must cover modes 0..=5 for an orbit state"),
            });
        }
        let mut s = Self::zeros(window);
        for (i, v) in point.omega.iter().enumerate() {
            s.set(i as i64, *v);
        }
        s.omega_p = point.omega_p;
        Ok(s)
    }

    pub fn get(&self, n: i64) -> f64 {
        if self.window.contains(n) {
            self.omega[self.window.index(n)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, n: i64, value: f64) {
        let i = self.window.index(n);
        self.omega[i] = value;
    }

    /// Flat packing `[omega(n_min..=n_max), omega_p]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.omega.clone();
        v.push(self.omega_p);
        v
    }

    pub fn from_flat(window: Window, flat: &[f64]) -> Self {
        debug_assert_eq!(flat.len(), window.len() + 1);
        Self {
            window,
            omega: flat[..window.len()].to_vec(),
            omega_p: flat[window.len()],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.omega
            .iter()
            .fold(self.omega_p.abs(), |m, v| m.max(v.abs()))
    }
}

/// Writes `f` and `eps`-gated `g` parts of the right-hand side into flat
/// slices (`[modes..., p]` layout). All other rhs entry points share this
/// kernel, so `f + eps*g` reconstructs the full field bit-exactly.
fn rhs_split_flat(y: &[f64], f_out: &mut [f64], g_out: &mut [f64], config: &ModelConfig) {
    let window = config.window();
    let len = window.len();
    let omega = &y[..len];
    let omega_p = y[len];
    let table = &config.table;
    let at = |n: i64| omega[window.index(n)];

    for n in window.iter() {
        let i = window.index(n);
        let mut fm = 0.0;
        let mut gm = 0.0;
        let mut fp = 0.0;
        let mut gp = 0.0;
        if window.contains(n - 1) {
            let v = table.a(n - 1) * omega_p * at(n - 1);
            if is_dashed(n - 1) {
                gm = v;
            } else {
                fm = v;
            }
        }
        if window.contains(n + 1) {
            let v = table.a(n + 1) * omega_p * at(n + 1);
            if is_dashed(n + 1) {
                gp = v;
            } else {
                fp = v;
            }
        }
        f_out[i] = fm - fp;
        g_out[i] = gm - gp;
    }

    let mut acc_f = 0.0;
    let mut acc_g = 0.0;
    for n in (window.n_min + 1)..=window.n_max {
        let v = table.adjacent_pair(n - 1) * at(n - 1) * at(n);
        if is_dashed(n) || is_dashed(n - 1) {
            acc_g -= v;
        } else {
            acc_f -= v;
        }
    }
    f_out[len] = acc_f;
    g_out[len] = acc_g;
}

/// Full right-hand side written into a flat slice, `dy = f + eps*g`.
pub(crate) fn rhs_flat(y: &[f64], dy: &mut [f64], config: &ModelConfig, scratch: &mut [f64]) {
    let dim = config.dim();
    let (f_buf, g_buf) = scratch.split_at_mut(dim);
    rhs_split_flat(y, f_buf, g_buf, config);
    for i in 0..dim {
        dy[i] = f_buf[i] + config.eps * g_buf[i];
    }
}

/// The split `omega' = f(omega) + eps g(omega)`: `f` holds every ungated
/// term, `g` every term carrying exactly one `eps` gate. No term carries
/// two gates, so the reconstruction is exact for every `eps`.
pub fn rhs_split(state: &ModelState, config: &ModelConfig) -> (ModelState, ModelState) {
    let y = state.to_flat();
    let dim = config.dim();
    let mut f_buf = vec![0.0; dim];
    let mut g_buf = vec![0.0; dim];
    rhs_split_flat(&y, &mut f_buf, &mut g_buf, config);
    (
        ModelState::from_flat(state.window, &f_buf),
        ModelState::from_flat(state.window, &g_buf),
    )
}

/// The dashed-line right-hand side at `state`.
pub fn dashed_rhs(state: &ModelState, config: &ModelConfig) -> ModelState {
    let y = state.to_flat();
    let dim = config.dim();
    let mut dy = vec![0.0; dim];
    let mut scratch = vec![0.0; 2 * dim];
    rhs_flat(&y, &mut dy, config, &mut scratch);
    ModelState::from_flat(state.window, &dy)
}

/// Kinetic energy and enstrophy of the windowed model:
/// `H = (sum eps_n |khat+np|^-2 omega_n^2 + |p|^-2 omega_p^2) / 2`,
/// `J2 = omega_p^2 + sum eps_n omega_n^2`.
pub fn conserved_quantities(state: &ModelState, config: &ModelConfig) -> (f64, f64) {
    let window = state.window;
    let p_sq = config.table.config().p.norm_sq() as f64;
    let mut h = state.omega_p * state.omega_p / p_sq;
    let mut j2 = state.omega_p * state.omega_p;
    for n in window.iter() {
        let w = state.omega[window.index(n)];
        let gate = crate::coefficients::epsilon_factor(n, config.eps);
        h += gate * w * w / config.table.mode_norm_sq(n);
        j2 += gate * w * w;
    }
    (0.5 * h, j2)
}

/// Gradients of the two conserved quantities in flat layout.
pub fn conserved_gradients(state: &ModelState, config: &ModelConfig) -> (Vec<f64>, Vec<f64>) {
    let window = state.window;
    let p_sq = config.table.config().p.norm_sq() as f64;
    let dim = window.len() + 1;
    let mut gh = vec![0.0; dim];
    let mut gj = vec![0.0; dim];
    for n in window.iter() {
        let i = window.index(n);
        let gate = crate::coefficients::epsilon_factor(n, config.eps);
        gh[i] = gate * state.omega[i] / config.table.mode_norm_sq(n);
        gj[i] = 2.0 * gate * state.omega[i];
    }
    gh[dim - 1] = state.omega_p / p_sq;
    gj[dim - 1] = 2.0 * state.omega_p;
    (gh, gj)
}

/// An integrated trajectory with per-step invariant drift tracking.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub window: Window,
    pub grid: GridSpec,
    pub record_every: usize,
    /// Recorded step indices (multiples of `record_every`, plus the last step).
    pub recorded_steps: Vec<usize>,
    /// Flat states per recorded step.
    pub states: Vec<Vec<f64>>,
    pub h_series: Vec<f64>,
    pub j2_series: Vec<f64>,
    /// Max `|H(t) - H(0)|` over every step, not only recorded ones.
    pub max_h_drift: f64,
    pub max_j2_drift: f64,
    /// Largest edge-mode amplitude seen, for judging window adequacy.
    pub max_boundary_amplitude: f64,
}

/// Classical fixed-step RK4 over `steps` steps of size `dt`.
pub fn integrate(
    state0: &ModelState,
    config: &ModelConfig,
    dt: f64,
    steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    assert!(dt > 0.0 && record_every > 0);
    if state0.window != config.window() {
        return Err(Error::PipelineMismatch {
            reason: format!(
                "state window {} differs from config window {}",
                state0.window,
                config.window()
            ),
        });
    }
    let grid = GridSpec::with_steps(0.0, dt, steps);
    let dim = config.dim();
    let mut y = state0.to_flat();
    let mut scratch = vec![0.0; 2 * dim];
    let mut work = Rk4Work::new(dim);
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| rhs_flat(y, dy, config, &mut scratch);

    let (h0, j20) = conserved_quantities(state0, config);
    let mut traj = Trajectory {
        window: state0.window,
        grid,
        record_every,
        recorded_steps: Vec::new(),
        states: Vec::new(),
        h_series: Vec::new(),
        j2_series: Vec::new(),
        max_h_drift: 0.0,
        max_j2_drift: 0.0,
        max_boundary_amplitude: 0.0,
    };
    let edge_lo = 0usize;
    let edge_hi = state0.window.len() - 1;
    let mut record = |traj: &mut Trajectory, step: usize, y: &[f64]| {
        traj.recorded_steps.push(step);
        traj.states.push(y.to_vec());
        let s = ModelState::from_flat(state0.window, y);
        let (h, j2) = conserved_quantities(&s, config);
        traj.h_series.push(h);
        traj.j2_series.push(j2);
    };
    record(&mut traj, 0, &y);

    for step in 0..steps {
        numerics::rk4_step(&mut rhs, grid.time(step), &mut y, dt, &mut work);
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState {
                step: step + 1,
                time: grid.time(step + 1),
            });
        }
        let s = ModelState::from_flat(state0.window, &y);
        let (h, j2) = conserved_quantities(&s, config);
        traj.max_h_drift = traj.max_h_drift.max((h - h0).abs());
        traj.max_j2_drift = traj.max_j2_drift.max((j2 - j20).abs());
        traj.max_boundary_amplitude = traj
            .max_boundary_amplitude
            .max(y[edge_lo].abs())
            .max(y[edge_hi].abs());
        if (step + 1) % record_every == 0 || step + 1 == steps {
            record(&mut traj, step + 1, &y);
        }
    }
    Ok(traj)
}

/// A Galerkin box truncation of the kinetic 2D Euler system in the real
/// cosine representation: `omega_k' = sum_{k=p+q} A(p,q) omega_p omega_q`
/// over ordered in-box pairs, with the raw (undoubled) coefficients.
#[derive(Debug, Clone)]
pub struct BoxSystem {
    modes: Vec<ModeIndex>,
    index: HashMap<ModeIndex, usize>,
    /// Interaction list `(i, j, k, A(modes[i], modes[j]))`.
    triads: Vec<(usize, usize, usize, f64)>,
}

impl BoxSystem {
    /// The box must be symmetric (closed under `k -> -k`), with distinct
    /// nonzero modes.
    pub fn new(modes: Vec<ModeIndex>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, m) in modes.iter().enumerate() {
            if m.is_zero() {
                return Err(Error::ZeroMode);
            }
            if index.insert(*m, i).is_some() {
                return Err(Error::InvalidConfig {
                    reason: format!("duplicate mode {m} in box"),
                });
            }
        }
        for m in &modes {
            if !index.contains_key(&m.neg()) {
                return Err(Error::InvalidConfig {
                    reason: format!("box is not symmetric: missing {}", m.neg()),
                });
            }
        }
        let mut triads = Vec::new();
        for (i, p) in modes.iter().enumerate() {
            for (j, q) in modes.iter().enumerate() {
                let k = *p + *q;
                if let Some(&ki) = index.get(&k) {
                    let a = rational_to_f64(&interaction_coefficient(*p, *q)?);
                    if a != 0.0 {
                        triads.push((i, j, ki, a));
                    }
                }
            }
        }
        Ok(Self {
            modes,
            index,
            triads,
        })
    }

    /// All modes with `0 < |k|_inf <= half_width`.
    pub fn square(half_width: i64) -> Result<Self> {
        let mut modes = Vec::new();
        for k1 in -half_width..=half_width {
            for k2 in -half_width..=half_width {
                if k1 != 0 || k2 != 0 {
                    modes.push(ModeIndex::new(k1, k2));
                }
            }
        }
        Self::new(modes)
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn index_of(&self, mode: ModeIndex) -> Option<usize> {
        self.index.get(&mode).copied()
    }

    pub fn rhs(&self, amplitudes: &[f64]) -> Vec<f64> {
        assert_eq!(amplitudes.len(), self.modes.len());
        let mut dy = vec![0.0; amplitudes.len()];
        for &(i, j, k, a) in &self.triads {
            dy[k] += a * amplitudes[i] * amplitudes[j];
        }
        dy
    }

    /// Kinetic energy `sum |k|^-2 omega_k^2 / 2`.
    pub fn energy(&self, amplitudes: &[f64]) -> f64 {
        0.5 * self
            .modes
            .iter()
            .zip(amplitudes)
            .map(|(m, w)| w * w / m.norm_sq() as f64)
            .sum::<f64>()
    }

    /// Enstrophy `sum omega_k^2`.
    pub fn enstrophy(&self, amplitudes: &[f64]) -> f64 {
        amplitudes.iter().map(|w| w * w).sum()
    }

    /// A symmetric amplitude assignment from per-orbit values.
    pub fn symmetrize(&self, amplitudes: &mut [f64]) {
        for (i, m) in self.modes.iter().enumerate() {
            let j = self.index[&m.neg()];
            if j > i {
                amplitudes[j] = amplitudes[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{epsilon_factor, WaveConfig};
    use crate::orbit::{KappaBranch, Orbit, OrbitParams};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn config(eps: f64, n_min: i64, n_max: i64) -> ModelConfig {
        let table = CoefficientTable::default_over(Window::new(n_min, n_max).unwrap()).unwrap();
        ModelConfig::new(table, eps)
    }

    fn random_state(window: Window, rng: &mut StdRng) -> ModelState {
        let mut s = ModelState::zeros(window);
        for w in s.omega.iter_mut() {
            *w = rng.gen_range(-1.0..1.0);
        }
        s.omega_p = rng.gen_range(-1.0..1.0);
        s
    }

    /// Literal transcription of the gated right-hand side, association
    /// `gate * (a * omega_p * omega)`, used as the bookkeeping oracle.
    fn direct_rhs(state: &ModelState, config: &ModelConfig) -> Vec<f64> {
        let w = state.window;
        let t = &config.table;
        let mut dy = vec![0.0; w.len() + 1];
        for n in w.iter() {
            let mut d = 0.0;
            if w.contains(n - 1) {
                d += epsilon_factor(n - 1, config.eps) * (t.a(n - 1) * state.omega_p * state.get(n - 1));
            }
            if w.contains(n + 1) {
                d -= epsilon_factor(n + 1, config.eps) * (t.a(n + 1) * state.omega_p * state.get(n + 1));
            }
            dy[w.index(n)] = d;
        }
        let mut acc = 0.0;
        for n in (w.n_min + 1)..=w.n_max {
            let gate = epsilon_factor(n, config.eps) * epsilon_factor(n - 1, config.eps);
            acc -= gate * (t.adjacent_pair(n - 1) * state.get(n - 1) * state.get(n));
        }
        dy[w.len()] = acc;
        dy
    }

    #[test]
    fn fixed_point_has_zero_derivative() {
        for eps in [0.0, 0.3, 1.0] {
            let cfg = config(eps, -10, 15);
            let fp = ModelState::fixed_point(cfg.window(), 1.7);
            let dy = dashed_rhs(&fp, &cfg);
            assert_eq!(dy.omega_p, 0.0);
            assert!(dy.omega.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn split_reconstruction_is_bit_exact() {
        let mut rng = StdRng::seed_from_u64(42);
        for eps in [0.0, 0.3, 1.0] {
            let cfg = config(eps, -10, 15);
            for _ in 0..20 {
                let s = random_state(cfg.window(), &mut rng);
                let (f, g) = rhs_split(&s, &cfg);
                let full = dashed_rhs(&s, &cfg);
                for i in 0..cfg.window().len() {
                    let rebuilt = f.omega[i] + eps * g.omega[i];
                    assert_eq!(rebuilt.to_bits(), full.omega[i].to_bits());
                }
                assert_eq!(
                    (f.omega_p + eps * g.omega_p).to_bits(),
                    full.omega_p.to_bits()
                );
            }
        }
    }

    #[test]
    fn rhs_matches_direct_gated_transcription() {
        let mut rng = StdRng::seed_from_u64(43);
        for eps in [0.0, 0.3, 1.0] {
            let cfg = config(eps, -10, 15);
            for _ in 0..20 {
                let s = random_state(cfg.window(), &mut rng);
                let dy = dashed_rhs(&s, &cfg).to_flat();
                let oracle = direct_rhs(&s, &cfg);
                for (a, b) in dy.iter().zip(&oracle) {
                    assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn eps_zero_block_matches_invariant_subsystem() {
        // On block j = 0 the rhs reduces to the five-mode system with
        // A1 = -3/10, A2 = 1/2, A_{1,2} = -4/5.
        let cfg = config(0.0, -10, 15);
        let mut rng = StdRng::seed_from_u64(44);
        for _ in 0..20 {
            let mut s = ModelState::zeros(cfg.window());
            for n in 1..=4 {
                s.set(n, rng.gen_range(-1.0..1.0));
            }
            s.omega_p = rng.gen_range(-1.0..1.0);
            let dy = dashed_rhs(&s, &cfg);
            let (a1, a2, a12) = (-0.3, 0.5, -0.8);
            let expect1 = -a2 * s.omega_p * s.get(2);
            let expect2 = a1 * s.omega_p * s.get(1) - a2 * s.omega_p * s.get(3);
            let expect3 = a2 * s.omega_p * s.get(2) - a1 * s.omega_p * s.get(4);
            let expect4 = a2 * s.omega_p * s.get(3);
            let expect_p = a12 * (s.get(3) * s.get(4) - s.get(1) * s.get(2));
            assert!((dy.get(1) - expect1).abs() < 1e-15);
            assert!((dy.get(2) - expect2).abs() < 1e-15);
            assert!((dy.get(3) - expect3).abs() < 1e-15);
            assert!((dy.get(4) - expect4).abs() < 1e-15);
            assert!((dy.omega_p - expect_p).abs() < 1e-15);
        }
    }

    #[test]
    fn invariant_gradients_annihilate_the_rhs() {
        let mut rng = StdRng::seed_from_u64(45);
        for eps in [0.0, 0.37, 1.0] {
            let cfg = config(eps, -10, 15);
            for _ in 0..30 {
                let s = random_state(cfg.window(), &mut rng);
                let dy = dashed_rhs(&s, &cfg).to_flat();
                let (gh, gj) = conserved_gradients(&s, &cfg);
                let dot = |g: &[f64]| -> (f64, f64) {
                    let mut acc = 0.0;
                    let mut scale = 0.0;
                    for (a, b) in g.iter().zip(&dy) {
                        acc += a * b;
                        scale += (a * b).abs();
                    }
                    (acc, scale)
                };
                let (dh, sh) = dot(&gh);
                let (dj, sj) = dot(&gj);
                assert!(dh.abs() <= 1e-14 * sh.max(1e-30), "<grad H, rhs> = {dh}");
                assert!(dj.abs() <= 1e-14 * sj.max(1e-30), "<grad J2, rhs> = {dj}");
            }
        }
    }

    #[test]
    fn g_support_on_the_orbit() {
        // On the heteroclinic orbit the eps-gated field acts exactly on
        // modes {-1, 1, 4, 6} and the pump.
        let cfg = config(0.0, -10, 15);
        let orbit = Orbit::with_default_table(OrbitParams::default()).unwrap();
        let point = orbit.point(0.4);
        let s = ModelState::from_orbit_point(cfg.window(), &point).unwrap();
        let (_, g) = rhs_split(&s, &cfg);
        for n in cfg.window().iter() {
            let v = g.get(n);
            if [-1, 1, 4, 6].contains(&n) {
                assert!(v != 0.0, "expected g_{n} nonzero");
            } else {
                assert_eq!(v, 0.0, "expected g_{n} = 0");
            }
        }
        assert!(g.omega_p != 0.0);
    }

    #[test]
    fn conserved_quantities_at_fixed_point() {
        let cfg = config(1.0, -10, 15);
        let fp = ModelState::fixed_point(cfg.window(), 1.0);
        let (h, j2) = conserved_quantities(&fp, &cfg);
        assert!((h - 0.25).abs() < 1e-15);
        assert!((j2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dashed_modes_do_not_count_at_eps_zero() {
        let cfg = config(0.0, -10, 15);
        let mut s = ModelState::zeros(cfg.window());
        s.set(0, 3.0);
        s.set(5, -2.0);
        s.set(-10, 1.0);
        let (h, j2) = conserved_quantities(&s, &cfg);
        assert_eq!(h, 0.0);
        assert_eq!(j2, 0.0);
    }

    #[test]
    fn fixed_point_stays_fixed() {
        let cfg = config(0.8, -10, 15);
        let fp = ModelState::fixed_point(cfg.window(), 1.0);
        let traj = integrate(&fp, &cfg, 1e-2, 10_000, 1000).unwrap();
        let last = traj.states.last().unwrap();
        for (i, v) in last.iter().enumerate() {
            if i == cfg.window().len() {
                assert!((v - 1.0).abs() <= 1e-14);
            } else {
                assert!(v.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn invariant_drift_shrinks_sixteenfold_under_dt_halving() {
        let cfg = config(0.0, -10, 15);
        let orbit = Orbit::with_default_table(OrbitParams::default()).unwrap();
        let ic = ModelState::from_orbit_point(cfg.window(), &orbit.point(-4.0)).unwrap();
        let coarse = integrate(&ic, &cfg, 4e-2, 500, 100).unwrap();
        let fine = integrate(&ic, &cfg, 2e-2, 1000, 200).unwrap();
        let ratio = coarse.max_j2_drift / fine.max_j2_drift;
        assert!(
            (10.0..26.0).contains(&ratio),
            "J2 drift ratio {ratio}, coarse {} fine {}",
            coarse.max_j2_drift,
            fine.max_j2_drift
        );
    }

    #[test]
    fn relative_drift_stays_small_per_unit_time() {
        let cfg = config(0.0, -10, 15);
        let orbit = Orbit::with_default_table(OrbitParams::default()).unwrap();
        let ic = ModelState::from_orbit_point(cfg.window(), &orbit.point(0.0)).unwrap();
        let traj = integrate(&ic, &cfg, 1e-3, 10_000, 1000).unwrap();
        // 10 time units at Gamma = 1: < 1e-10 relative per unit time.
        assert!(traj.max_h_drift / traj.h_series[0].abs() < 1e-9);
        assert!(traj.max_j2_drift / traj.j2_series[0].abs() < 1e-9);
    }

    #[test]
    fn rk4_tracks_the_closed_form_orbit() {
        let cfg = config(0.0, -10, 15);
        let orbit = Orbit::with_default_table(OrbitParams::default()).unwrap();
        let kg = orbit.kappa();
        let t0 = -10.0 / kg;
        let t1 = 10.0 / kg;
        let steps = 8000usize;
        let dt = (t1 - t0) / steps as f64;
        let ic = ModelState::from_orbit_point(cfg.window(), &orbit.point(t0)).unwrap();
        let traj = integrate(&ic, &cfg, dt, steps, steps).unwrap();
        let last = ModelState::from_flat(cfg.window(), traj.states.last().unwrap());
        let expect = orbit.point(t0 + dt * steps as f64);
        assert!((last.omega_p - expect.omega_p).abs() < 1e-6);
        for i in 0..6 {
            assert!(
                (last.get(i as i64) - expect.omega[i]).abs() < 1e-6,
                "mode {i}"
            );
        }
    }

    #[test]
    fn eps_zero_blocks_stay_invariant() {
        let cfg = config(0.0, -10, 15);
        let orbit = Orbit::with_default_table(OrbitParams::default()).unwrap();
        let ic = ModelState::from_orbit_point(cfg.window(), &orbit.point(0.0)).unwrap();
        let traj = integrate(&ic, &cfg, 1e-2, 2000, 500).unwrap();
        for flat in &traj.states {
            let s = ModelState::from_flat(cfg.window(), flat);
            for n in cfg.window().iter() {
                if !(0..=5).contains(&n) {
                    assert_eq!(s.get(n), 0.0, "mode {n} was excited");
                }
            }
        }
    }

    #[test]
    fn scaling_covariance() {
        // s * omega(s t) solves the model when omega does; RK4 commutes
        // with the scaling exactly because it only rescales by powers of 2.
        let cfg = config(0.3, -10, 15);
        let mut rng = StdRng::seed_from_u64(46);
        let ic = random_state(cfg.window(), &mut rng);
        let mut ic2 = ic.clone();
        for w in ic2.omega.iter_mut() {
            *w *= 2.0;
        }
        ic2.omega_p *= 2.0;
        let t1 = integrate(&ic, &cfg, 2e-3, 4000, 4000).unwrap();
        let t2 = integrate(&ic2, &cfg, 1e-3, 4000, 4000).unwrap();
        let last1 = t1.states.last().unwrap();
        let last2 = t2.states.last().unwrap();
        for (a, b) in last1.iter().zip(last2) {
            assert!(
                (2.0 * a - b).abs() <= 1e-8 * b.abs().max(1.0),
                "{a} vs {b}"
            );
        }
    }

    #[test]
    fn integrate_aborts_on_blowup() {
        // A huge state at dt = 1 overflows quickly; the error carries the step.
        let cfg = config(1.0, -10, 15);
        let mut s = ModelState::zeros(cfg.window());
        for n in cfg.window().iter() {
            s.set(n, 1e150);
        }
        s.omega_p = 1e150;
        let err = integrate(&s, &cfg, 1.0, 10, 1);
        assert!(matches!(err, Err(Error::NonFiniteState { .. })));
    }

    #[test]
    fn box_single_mode_is_fixed() {
        let b = BoxSystem::square(2).unwrap();
        let mut amp = vec![0.0; b.len()];
        amp[b.index_of(ModeIndex::new(1, 1)).unwrap()] = 2.5;
        amp[b.index_of(ModeIndex::new(-1, -1)).unwrap()] = 2.5;
        assert!(b.rhs(&amp).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn box_equal_modulus_pair_is_fixed() {
        let b = BoxSystem::square(2).unwrap();
        let mut amp = vec![0.0; b.len()];
        for m in [
            ModeIndex::new(1, 2),
            ModeIndex::new(-1, -2),
            ModeIndex::new(2, 1),
            ModeIndex::new(-2, -1),
        ] {
            amp[b.index_of(m).unwrap()] = 1.0;
        }
        let dy = b.rhs(&amp);
        for (i, v) in dy.iter().enumerate() {
            assert!(
                v.abs() < 1e-15,
                "mode {} moved: {v}",
                b.modes()[i]
            );
        }
    }

    #[test]
    fn box_conserves_energy_and_enstrophy() {
        let mut rng = StdRng::seed_from_u64(47);
        for half in [2i64, 3] {
            let b = BoxSystem::square(half).unwrap();
            for _ in 0..5 {
                let mut amp: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                b.symmetrize(&mut amp);
                let dy = b.rhs(&amp);
                let mut de = 0.0;
                let mut de_scale = 0.0;
                let mut dz = 0.0;
                let mut dz_scale = 0.0;
                for (i, m) in b.modes().iter().enumerate() {
                    let e_term = amp[i] * dy[i] / m.norm_sq() as f64;
                    de += e_term;
                    de_scale += e_term.abs();
                    let z_term = amp[i] * dy[i];
                    dz += z_term;
                    dz_scale += z_term.abs();
                }
                assert!(de.abs() <= 1e-13 * de_scale.max(1e-30), "dE = {de}");
                assert!(dz.abs() <= 1e-13 * dz_scale.max(1e-30), "dJ2 = {dz}");
            }
        }
    }

    #[test]
    fn box_rejects_asymmetric_or_zero_modes() {
        assert!(BoxSystem::new(vec![ModeIndex::new(1, 0)]).is_err());
        assert!(BoxSystem::new(vec![ModeIndex::new(0, 0)]).is_err());
        assert!(BoxSystem::new(vec![
            ModeIndex::new(1, 0),
            ModeIndex::new(-1, 0),
            ModeIndex::new(1, 0)
        ])
        .is_err());
    }

    #[test]
    fn orbit_state_requires_block_window() {
        let orbit = Orbit::with_default_table(OrbitParams {
            branch: KappaBranch::Minus,
            ..OrbitParams::default()
        })
        .unwrap();
        let w = Window::new(1, 4).unwrap();
        assert!(ModelState::from_orbit_point(w, &orbit.point(0.0)).is_err());
    }

    #[test]
    fn boundary_amplitudes_are_reported() {
        let cfg = config(1.0, -10, 15);
        let orbit = Orbit::with_default_table(OrbitParams::default()).unwrap();
        let ic = ModelState::from_orbit_point(cfg.window(), &orbit.point(0.0)).unwrap();
        let traj = integrate(&ic, &cfg, 1e-2, 500, 100).unwrap();
        assert!(traj.max_boundary_amplitude >= 0.0);
        assert!(traj.max_boundary_amplitude < 1e-2);
    }

    #[test]
    fn wave_config_default_is_the_paper_model() {
        let cfg = WaveConfig::default();
        assert_eq!(cfg.khat, ModeIndex::new(-3, -2));
        assert_eq!(cfg.p, ModeIndex::new(1, 1));
    }
}
