//! The closed-form perverted heteroclinic orbit family of the
//! `eps = 0`, `j = 0` block, its auxiliary modes, and its invariants.
//!
//! The block carries four active modes `omega_1..omega_4` plus the pump
//! `omega_p`; the neighbours `omega_0` and `omega_5` are slaved. In polar
//! coordinates `omega_1 = r cos(theta)`, `omega_4 = r sin(theta)`,
//! `omega_2 = rho cos(vartheta)`, `omega_3 = rho sin(vartheta)` the orbit
//! is a tanh/sech profile with a logarithmic phase spiral; the two ends
//! of the connection are helices of opposite handedness.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::coefficients::{kappa_squared, rational_to_f64, CoefficientTable};
use crate::error::{Error, Result};
use crate::numerics::GridSpec;

/// Sign of the hyperbolic rate `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaBranch {
    Plus,
    Minus,
}

impl KappaBranch {
    pub fn sign(self) -> f64 {
        match self {
            KappaBranch::Plus => 1.0,
            KappaBranch::Minus => -1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "+" | "plus" => Some(KappaBranch::Plus),
            "-" | "minus" => Some(KappaBranch::Minus),
            _ => None,
        }
    }
}

impl std::fmt::Display for KappaBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KappaBranch::Plus => write!(f, "+"),
            KappaBranch::Minus => write!(f, "-"),
        }
    }
}

/// Parameters of one member of the two-parameter orbit family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitParams {
    pub gamma: f64,
    pub theta0: f64,
    pub tau0: f64,
    pub branch: KappaBranch,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            theta0: 0.0,
            tau0: 0.0,
            branch: KappaBranch::Plus,
        }
    }
}

/// The orbit evaluated at one time.
#[derive(Debug, Clone, Copy)]
pub struct OrbitPoint {
    pub t: f64,
    pub tau: f64,
    pub omega_p: f64,
    /// Block modes `omega_0 .. omega_5`; entries 1..=4 are the active ones.
    pub omega: [f64; 6],
    pub r: f64,
    pub rho: f64,
    pub theta: f64,
    pub vartheta: f64,
}

/// Closed-form time derivative at one orbit point.
#[derive(Debug, Clone, Copy)]
pub struct OrbitDerivative {
    pub omega_p: f64,
    pub omega: [f64; 6],
}

/// Quadratic invariants of the `j = 0` block.
#[derive(Debug, Clone, Copy)]
pub struct BlockInvariants {
    pub i: f64,
    pub u: f64,
    pub j: f64,
    pub v: f64,
}

/// The orbit family for a coefficient table with the `j = 0` block
/// structure (`A_3 = A_2`, `A_4 = A_1`, `A_5 = A_0`, `A_1 < 0 < A_2`).
#[derive(Debug, Clone)]
pub struct Orbit {
    pub params: OrbitParams,
    a0: f64,
    a1: f64,
    a2: f64,
    a12: f64,
    kappa: f64,
    beta: f64,
    alpha: f64,
    /// `theta + vartheta`, constant along the orbit, fixed by the branch.
    theta_sum: f64,
    /// `sqrt(A2 / (A2 - A1))`.
    r_coef: f64,
    /// `rho / r = sqrt(-A1 / A2)`.
    rho_ratio: f64,
    kappa_sq_exact: BigRational,
}

impl Orbit {
    pub fn new(table: &CoefficientTable, params: OrbitParams) -> Result<Self> {
        for n in [0i64, 1, 2, 3, 4, 5] {
            if !table.window().contains(n) {
                return Err(Error::OrbitStructure {
                    reason: format!("table window {} must cover modes 0..=5", table.window()),
                });
            }
        }
        let a1x = table.model_coefficient(1)?.clone();
        let a2x = table.model_coefficient(2)?.clone();
        if table.model_coefficient(3)? != &a2x || table.model_coefficient(4)? != &a1x {
            return Err(Error::OrbitStructure {
                reason: "need A_3 = A_2 and A_4 = A_1".into(),
            });
        }
        if table.model_coefficient(5)? != table.model_coefficient(0)? {
            return Err(Error::OrbitStructure {
                reason: "need A_5 = A_0".into(),
            });
        }
        let a1 = rational_to_f64(&a1x);
        let a2 = rational_to_f64(&a2x);
        if !(a1 < 0.0 && a2 > 0.0) {
            return Err(Error::OrbitStructure {
                reason: format!("need A_1 < 0 < A_2, got A_1 = {a1}, A_2 = {a2}"),
            });
        }
        let kappa_sq_exact = kappa_squared(&a1x, &a2x);
        let kappa_sq = kappa_sq_exact.to_f64().unwrap_or(f64::NAN);
        if !(kappa_sq > 0.0) {
            return Err(Error::OrbitStructure {
                reason: format!("kappa^2 = {kappa_sq} must be positive"),
            });
        }
        let kappa = params.branch.sign() * kappa_sq.sqrt();
        let beta = -a2 / (2.0 * kappa);
        let r_coef = (a2 / (a2 - a1)).sqrt();
        let alpha = -a1 * params.gamma / kappa * r_coef;
        let half_angle = 0.5 * (a2 / -a1).sqrt();
        let theta_sum = match params.branch {
            KappaBranch::Plus => -half_angle.asin(),
            KappaBranch::Minus => std::f64::consts::PI + half_angle.asin(),
        };
        Ok(Self {
            params,
            a0: table.a(0),
            a1,
            a2,
            a12: table.adjacent_pair(1),
            kappa,
            beta,
            alpha,
            theta_sum,
            r_coef,
            rho_ratio: (-a1 / a2).sqrt(),
            kappa_sq_exact,
        })
    }

    /// Default-configuration orbit.
    pub fn with_default_table(params: OrbitParams) -> Result<Self> {
        let table = CoefficientTable::default_over(crate::coefficients::Window::new(0, 5)?)?;
        Self::new(&table, params)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Exact `kappa^2` (equals `7/80` for the default coefficients).
    pub fn kappa_sq_exact(&self) -> &BigRational {
        &self.kappa_sq_exact
    }

    /// Logarithmic spiral rate `beta = -A2 / (2 kappa)`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Auxiliary-mode amplitude factor.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta_sum(&self) -> f64 {
        self.theta_sum
    }

    /// `tau = kappa Gamma t + tau0`.
    pub fn tau(&self, t: f64) -> f64 {
        self.kappa * self.params.gamma * t + self.params.tau0
    }

    /// The time at which `tau = 0` (the perversion).
    pub fn perversion_time(&self) -> f64 {
        -self.params.tau0 / (self.kappa * self.params.gamma)
    }

    pub fn point(&self, t: f64) -> OrbitPoint {
        let tau = self.tau(t);
        let gamma = self.params.gamma;
        let sech = sech(tau);
        let lc = ln_cosh(tau);
        let r = self.r_coef * gamma * sech;
        let rho = self.rho_ratio * r;
        let theta = self.beta * lc + self.params.theta0;
        let vartheta = self.theta_sum - theta;
        let phase = theta; // beta * ln cosh(tau) + theta0
        let aux = self.alpha * self.beta / (1.0 + self.beta * self.beta) * sech;
        let omega0 = aux * (phase.sin() - phase.cos() / self.beta);
        let omega5 = aux * (phase.cos() + phase.sin() / self.beta);
        OrbitPoint {
            t,
            tau,
            omega_p: gamma * tau.tanh(),
            omega: [
                omega0,
                r * theta.cos(),
                rho * vartheta.cos(),
                rho * vartheta.sin(),
                r * theta.sin(),
                omega5,
            ],
            r,
            rho,
            theta,
            vartheta,
        }
    }

    /// Closed-form differentiation of [`Orbit::point`].
    pub fn derivative(&self, t: f64) -> OrbitDerivative {
        let p = self.point(t);
        let kg = self.kappa * self.params.gamma;
        let th = p.tau.tanh();
        let b = self.beta;
        let d1 = -kg * th * (p.omega[1] + b * p.omega[4]);
        let d4 = -kg * th * (p.omega[4] - b * p.omega[1]);
        let d2 = -kg * th * (p.omega[2] - b * p.omega[3]);
        let d3 = -kg * th * (p.omega[3] + b * p.omega[2]);
        let sech = sech(p.tau);
        let d0 = self.alpha * kg * th * sech * p.theta.cos();
        let d5 = -self.alpha * kg * th * sech * p.theta.sin();
        OrbitDerivative {
            omega_p: kg * self.params.gamma * sech * sech,
            omega: [d0, d1, d2, d3, d4, d5],
        }
    }

    /// Right-hand side of the `j = 0` block (plus slaved neighbours) at a
    /// block state.
    pub fn block_rhs(&self, omega_p: f64, omega: &[f64; 6]) -> (f64, [f64; 6]) {
        let (a1, a2, a12) = (self.a1, self.a2, self.a12);
        let dp = a12 * (omega[3] * omega[4] - omega[1] * omega[2]);
        let d = [
            -a1 * omega_p * omega[1],
            -a2 * omega_p * omega[2],
            a1 * omega_p * omega[1] - a2 * omega_p * omega[3],
            a2 * omega_p * omega[2] - a1 * omega_p * omega[4],
            a2 * omega_p * omega[3],
            a1 * omega_p * omega[4],
        ];
        (dp, d)
    }

    /// Max-norm defect between the closed-form derivative and the block
    /// right-hand side over a time grid.
    pub fn residual(&self, grid: &GridSpec) -> f64 {
        grid.times()
            .map(|t| self.residual_at(t))
            .fold(0.0f64, f64::max)
    }

    pub fn residual_at(&self, t: f64) -> f64 {
        let p = self.point(t);
        let d = self.derivative(t);
        let (rp, r) = self.block_rhs(p.omega_p, &p.omega);
        let mut m = (d.omega_p - rp).abs();
        for i in 0..6 {
            m = m.max((d.omega[i] - r[i]).abs());
        }
        m
    }

    /// The invariants `I`, `U`, `J`, `V` at a block state.
    pub fn invariants(&self, omega_p: f64, omega: &[f64; 6]) -> BlockInvariants {
        let (w1, w2, w3, w4) = (omega[1], omega[2], omega[3], omega[4]);
        let cross = w1 * w3 + w2 * w4;
        let i = 2.0 * self.a12 * cross + self.a2 * omega_p * omega_p;
        let u = self.a1 * (w1 * w1 + w4 * w4) + self.a2 * (w2 * w2 + w3 * w3);
        let j = omega_p * omega_p + w1 * w1 + w2 * w2 + w3 * w3 + w4 * w4;
        let v = self.a2 * (w1 * w1 + w2 * w2 + w3 * w3 + w4 * w4) - 2.0 * self.a12 * cross;
        BlockInvariants { i, u, j, v }
    }

    pub fn invariants_at(&self, t: f64) -> BlockInvariants {
        let p = self.point(t);
        self.invariants(p.omega_p, &p.omega)
    }

    /// The fixed-point amplitudes reached as `t -> -inf` and `t -> +inf`:
    /// `omega_p` tends to `-sign(kappa Gamma) Gamma` backward and
    /// `+sign(kappa Gamma) Gamma` forward, every mode to zero.
    pub fn endpoints(&self) -> (f64, f64) {
        let s = (self.kappa * self.params.gamma).signum() * self.params.gamma;
        (-s, s)
    }

    pub(crate) fn a_block(&self) -> (f64, f64, f64, f64) {
        (self.a0, self.a1, self.a2, self.a12)
    }
}

/// `ln cosh` evaluated as `|x| + ln1p(exp(-2|x|)) - ln 2`, valid for any `x`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Overflow-free `sech`.
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}
