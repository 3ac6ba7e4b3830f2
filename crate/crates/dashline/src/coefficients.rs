//! Exact-rational mode algebra of the kinetic 2D Euler system and the
//! dashed-line model's coefficient tables.
//!
//! All coefficients are kept as exact rationals; conversion to `f64`
//! happens only at the dynamics and eigensolve boundaries.
//!
//! The model-facing coefficients `A_n` and `A_{m,n}` are twice the raw
//! interaction coefficient `A(p, q)`: the real cosine representation of
//! the vorticity doubles every quadratic interaction, and it is the
//! doubled values that reproduce the model's quoted eigenvalues
//! (`A_1 = -3/10`, `A_2 = 1/2`, ...). [`interaction_coefficient`] exposes
//! the raw value; [`CoefficientTable`] stores the doubled ones.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A Fourier mode `k = (k1, k2)` on the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub k1: i64,
    pub k2: i64,
}

impl ModeIndex {
    pub const fn new(k1: i64, k2: i64) -> Self {
        Self { k1, k2 }
    }

    pub fn is_zero(self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    /// `|k|^2 = k1^2 + k2^2`.
    pub fn norm_sq(self) -> i64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }

    /// Determinant `p1*q2 - p2*q1` of the pair `(self, other)`.
    pub fn det(self, other: ModeIndex) -> i64 {
        self.k1 * other.k2 - self.k2 * other.k1
    }

    pub fn neg(self) -> Self {
        Self::new(-self.k1, -self.k2)
    }
}

impl std::ops::Add for ModeIndex {
    type Output = ModeIndex;
    fn add(self, rhs: ModeIndex) -> ModeIndex {
        ModeIndex::new(self.k1 + rhs.k1, self.k2 + rhs.k2)
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

/// Raw interaction coefficient `A(p, q) = (|q|^-2 - |p|^-2)(p1 q2 - p2 q1) / 2`.
///
/// Both modes must be nonzero; the zero mode carries no dynamics.
pub fn interaction_coefficient(p: ModeIndex, q: ModeIndex) -> Result<BigRational> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::ZeroMode);
    }
    let det = BigRational::from_integer(BigInt::from(p.det(q)));
    let inv_q = BigRational::new(BigInt::from(1), BigInt::from(q.norm_sq()));
    let inv_p = BigRational::new(BigInt::from(1), BigInt::from(p.norm_sq()));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    Ok(half * (inv_q - inv_p) * det)
}

/// The fixed-point datum: the pump mode `p`, its amplitude `gamma`, and
/// the class label `khat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveConfig {
    pub khat: ModeIndex,
    pub p: ModeIndex,
    pub gamma: f64,
}

impl Default for WaveConfig {
    /// The configuration of the concrete model: `khat = (-3,-2)`, `p = (1,1)`.
    fn default() -> Self {
        Self {
            khat: ModeIndex::new(-3, -2),
            p: ModeIndex::new(1, 1),
            gamma: 1.0,
        }
    }
}

impl WaveConfig {
    pub fn new(khat: ModeIndex, p: ModeIndex, gamma: f64) -> Result<Self> {
        let cfg = Self { khat, p, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The class member `khat + n*p`.
    pub fn mode(&self, n: i64) -> ModeIndex {
        ModeIndex::new(self.khat.k1 + n * self.p.k1, self.khat.k2 + n * self.p.k2)
    }

    /// Rejects zero modes and classes that degenerate onto the `p`-line.
    pub fn validate(&self) -> Result<()> {
        if self.p.is_zero() {
            return Err(Error::InvalidConfig {
                reason: "the pump mode p must be nonzero".into(),
            });
        }
        if self.khat.is_zero() {
            return Err(Error::InvalidConfig {
                reason: "khat must be nonzero".into(),
            });
        }
        // khat = m*p would put the class through the origin.
        if self.khat.det(self.p) == 0 {
            return Err(Error::InvalidConfig {
                reason: "khat must not be an integer multiple of p".into(),
            });
        }
        Ok(())
    }
}

/// An inclusive window `[n_min, n_max]` of mode offsets along the class line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub n_min: i64,
    pub n_max: i64,
}

impl Window {
    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        if n_min > n_max {
            return Err(Error::InvalidWindow {
                reason: format!("n_min = {n_min} exceeds n_max = {n_max}"),
            });
        }
        Ok(Self { n_min, n_max })
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_min && n <= self.n_max
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }

    /// Offset of `n` inside the window.
    pub fn index(&self, n: i64) -> usize {
        debug_assert!(self.contains(n));
        (n - self.n_min) as usize
    }

    pub fn covers(&self, other: Window) -> bool {
        self.n_min <= other.n_min && self.n_max >= other.n_max
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.n_min, self.n_max)
    }
}

/// Gate factor of the homotopy system: `eps` on every fifth mode, `1` elsewhere.
pub fn epsilon_factor(n: i64, eps: f64) -> f64 {
    if is_dashed(n) {
        eps
    } else {
        1.0
    }
}

/// Whether `n` sits on a dashed (gated) position, i.e. `n = 5j`.
pub fn is_dashed(n: i64) -> bool {
    n % 5 == 0
}

/// Doubled coefficient tables `A_n = 2 A(p, khat + n p)` and
/// `A_{n,n+1} = 2 A(khat + n p, khat + (n+1) p)` over a window, stored as
/// exact rationals with cached `f64` views.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    config: WaveConfig,
    window: Window,
    a: Vec<BigRational>,
    a_f64: Vec<f64>,
    pair: Vec<BigRational>,
    pair_f64: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(config: WaveConfig, window: Window) -> Result<Self> {
        config.validate()?;
        let two = BigRational::from_integer(BigInt::from(2));
        let mut a = Vec::with_capacity(window.len());
        for n in window.iter() {
            let mode = config.mode(n);
            if mode.is_zero() {
                return Err(Error::ZeroModeInWindow { n });
            }
            a.push(two.clone() * interaction_coefficient(config.p, mode)?);
        }
        let mut pair = Vec::with_capacity(window.len().saturating_sub(1));
        for n in window.n_min..window.n_max {
            pair.push(two.clone() * interaction_coefficient(config.mode(n), config.mode(n + 1))?);
        }
        let a_f64 = a.iter().map(rational_to_f64).collect();
        let pair_f64 = pair.iter().map(rational_to_f64).collect();
        Ok(Self {
            config,
            window,
            a,
            a_f64,
            pair,
            pair_f64,
        })
    }

    /// Table for the default configuration over `window`.
    pub fn default_over(window: Window) -> Result<Self> {
        Self::new(WaveConfig::default(), window)
    }

    pub fn config(&self) -> &WaveConfig {
        &self.config
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Exact model coefficient `A_n`.
    pub fn model_coefficient(&self, n: i64) -> Result<&BigRational> {
        if !self.window.contains(n) {
            return Err(Error::WindowNotCovered {
                requested_min: n,
                requested_max: n,
                table_min: self.window.n_min,
                table_max: self.window.n_max,
            });
        }
        Ok(&self.a[self.window.index(n)])
    }

    /// Exact pair coefficient `A_{m,n}`; adjacent pairs come from the
    /// precomputed table, everything else is evaluated on demand.
    pub fn pair_coefficient(&self, m: i64, n: i64) -> Result<BigRational> {
        if n == m + 1 && self.window.contains(m) && self.window.contains(n) {
            return Ok(self.pair[(m - self.window.n_min) as usize].clone());
        }
        let pm = self.config.mode(m);
        let pn = self.config.mode(n);
        if pm.is_zero() {
            return Err(Error::ZeroModeInWindow { n: m });
        }
        if pn.is_zero() {
            return Err(Error::ZeroModeInWindow { n });
        }
        let two = BigRational::from_integer(BigInt::from(2));
        Ok(two * interaction_coefficient(pm, pn)?)
    }

    /// `A_n` as `f64`. The window must contain `n`.
    pub fn a(&self, n: i64) -> f64 {
        self.a_f64[self.window.index(n)]
    }

    /// `A_{n,n+1}` as `f64`. Both ends must be in the window.
    pub fn adjacent_pair(&self, n: i64) -> f64 {
        debug_assert!(self.window.contains(n) && self.window.contains(n + 1));
        self.pair_f64[(n - self.window.n_min) as usize]
    }

    /// `|khat + n p|^2` as `f64`, used by the energy weights.
    pub fn mode_norm_sq(&self, n: i64) -> f64 {
        self.config.mode(n).norm_sq() as f64
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    // numer/denom stay well inside f64's exact-integer range for any
    // window this crate builds, so the division below is correctly rounded.
    let numer = r.numer().to_f64().unwrap_or(f64::NAN);
    let denom = r.denom().to_f64().unwrap_or(f64::NAN);
    numer / denom
}

/// Exact `-A1*A2*(1 + A2/(4*A1))`, the square of the orbit's hyperbolic rate.
pub fn kappa_squared(a1: &BigRational, a2: &BigRational) -> BigRational {
    let one = BigRational::from_integer(BigInt::from(1));
    let four = BigRational::from_integer(BigInt::from(4));
    -(a1 * a2) * (one + a2 / (four * a1))
}

/// Convenience: exact rational from an integer pair.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// True when `r` equals `numer/denom` exactly.
pub fn rational_eq(r: &BigRational, numer: i64, denom: i64) -> bool {
    r == &ratio(numer, denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(k1: i64, k2: i64) -> ModeIndex {
        ModeIndex::new(k1, k2)
    }

    #[test]
    fn interaction_hand_value() {
        // 1/2 * (1/5 - 1/2) * 1 = -3/20
        let a = interaction_coefficient(m(1, 1), m(-2, -1)).unwrap();
        assert_eq!(a, ratio(-3, 20));
    }

    #[test]
    fn interaction_vanishes_on_equal_modulus() {
        assert!(interaction_coefficient(m(1, 1), m(1, 1)).unwrap().is_zero());
        assert!(interaction_coefficient(m(3, 4), m(-4, 3)).unwrap().is_zero());
    }

    #[test]
    fn interaction_is_symmetric() {
        let a = interaction_coefficient(m(1, 1), m(-2, -1)).unwrap();
        let b = interaction_coefficient(m(-2, -1), m(1, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_mode_is_rejected() {
        assert!(matches!(
            interaction_coefficient(m(0, 0), m(1, 1)),
            Err(Error::ZeroMode)
        ));
        assert!(matches!(
            interaction_coefficient(m(1, 1), m(0, 0)),
            Err(Error::ZeroMode)
        ));
    }

    fn default_table() -> CoefficientTable {
        CoefficientTable::default_over(Window::new(-10, 15).unwrap()).unwrap()
    }

    #[test]
    fn model_coefficients_match_quoted_rationals() {
        let t = default_table();
        let expected = [
            (1, -3, 10),
            (2, 1, 2),
            (3, 1, 2),
            (4, -3, 10),
            (-1, -23, 50),
            (-2, -39, 82),
            (-3, -59, 122),
            (-4, -83, 170),
            (0, -11, 26),
            (5, -11, 26),
        ];
        for (n, numer, denom) in expected {
            assert!(
                rational_eq(t.model_coefficient(n).unwrap(), numer, denom),
                "A_{n} != {numer}/{denom}, got {}",
                t.model_coefficient(n).unwrap()
            );
        }
    }

    #[test]
    fn pair_coefficients_match_quoted_rationals() {
        let t = default_table();
        assert_eq!(t.pair_coefficient(1, 2).unwrap(), ratio(-4, 5));
        assert!(t.pair_coefficient(2, 3).unwrap().is_zero());
        assert_eq!(t.pair_coefficient(3, 4).unwrap(), ratio(4, 5));
    }

    #[test]
    fn adjacent_pair_identity() {
        // A_{n-1,n} = A_{n-1} - A_n, exactly, for every adjacent pair.
        let t = default_table();
        for n in -9..=15 {
            let pair = t.pair_coefficient(n - 1, n).unwrap();
            let diff = t.model_coefficient(n - 1).unwrap() - t.model_coefficient(n).unwrap();
            assert_eq!(pair, diff, "A_{{{},{}}} mismatch", n - 1, n);
        }
    }

    #[test]
    fn mirror_symmetry_of_model_coefficients() {
        // A_n = A_{5-n} for the default configuration.
        let t = default_table();
        for n in -10..=15 {
            if (-10..=15).contains(&(5 - n)) {
                assert_eq!(
                    t.model_coefficient(n).unwrap(),
                    t.model_coefficient(5 - n).unwrap()
                );
            }
        }
    }

    #[test]
    fn epsilon_factor_definition() {
        assert_eq!(epsilon_factor(5, 0.3), 0.3);
        assert_eq!(epsilon_factor(-10, 0.3), 0.3);
        assert_eq!(epsilon_factor(0, 0.3), 0.3);
        assert_eq!(epsilon_factor(7, 0.3), 1.0);
        assert_eq!(epsilon_factor(-1, 0.3), 1.0);
    }

    #[test]
    fn zero_mode_window_is_rejected() {
        let cfg = WaveConfig::new(m(-2, 0), m(1, 0), 1.0).unwrap();
        // khat + 2p = 0
        let err = CoefficientTable::new(cfg, Window::new(0, 4).unwrap());
        assert!(matches!(err, Err(Error::ZeroModeInWindow { n: 2 })));
    }

    #[test]
    fn degenerate_class_is_rejected() {
        assert!(WaveConfig::new(m(2, 2), m(1, 1), 1.0).is_err());
        assert!(WaveConfig::new(m(0, 0), m(1, 1), 1.0).is_err());
    }

    fn nonzero_mode() -> impl Strategy<Value = ModeIndex> {
        (-6i64..=6, -6i64..=6)
            .prop_map(|(a, b)| m(a, b))
            .prop_filter("nonzero", |k| !k.is_zero())
    }

    proptest! {
        #[test]
        fn jacobi_identities_hold_exactly(p in nonzero_mode(), q in nonzero_mode()) {
            let k = p.neg() + q.neg();
            prop_assume!(!k.is_zero());
            // k + p + q = 0
            let apq = interaction_coefficient(p, q).unwrap();
            let aqk = interaction_coefficient(q, k).unwrap();
            let akp = interaction_coefficient(k, p).unwrap();
            prop_assert!((apq.clone() + aqk.clone() + akp.clone()).is_zero());

            let w = |mode: ModeIndex| BigRational::new(BigInt::from(1), BigInt::from(mode.norm_sq()));
            let weighted = w(k) * apq + w(p) * aqk + w(q) * akp;
            prop_assert!(weighted.is_zero());
        }

        #[test]
        fn interaction_symmetry(p in nonzero_mode(), q in nonzero_mode()) {
            let a = interaction_coefficient(p, q).unwrap();
            let b = interaction_coefficient(q, p).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
