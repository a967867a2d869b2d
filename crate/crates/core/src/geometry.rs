//! Admissible domains, the auxiliary distance-like function `d`, and the
//! Carleman weight `phi(x, t) = exp(lambda * (d(x) - beta * (t - t0)^2))`.
//!
//! Only configurations whose non-observed boundary `dOmega \ Gamma` is a single
//! face are supported. For those an affine `d` (the distance to that face)
//! satisfies all four admissibility conditions exactly:
//!
//! * `d > 0` in the open domain,
//! * `|grad d| > 0` on the closure,
//! * `d = 0` on `dOmega \ Gamma`,
//! * `grad d . nu <= 0` on `dOmega \ Gamma`.
//!
//! The constants `d0` and `d1` follow the level-set reading: `d0` is the level
//! `epsilon_core` of the target region `Omega_eps = {d >= epsilon_core}` and
//! `d1` is the maximum of `d` over the closed domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A spatial point; the second coordinate is ignored in 1D.
pub type Point = [f64; 2];

/// Boundary faces of an interval or rectangle.
///
/// In 1D only `Left` (x = 0) and `Right` (x = L) exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Face {
    /// `x1 = 0`
    Left,
    /// `x1 = L1`
    Right,
    /// `x2 = 0`
    Bottom,
    /// `x2 = L2`
    Top,
}

impl Face {
    pub fn all(dimension: usize) -> &'static [Face] {
        match dimension {
            1 => &[Face::Left, Face::Right],
            _ => &[Face::Left, Face::Right, Face::Bottom, Face::Top],
        }
    }

    /// Axis normal to the face.
    pub fn axis(self) -> usize {
        match self {
            Face::Left | Face::Right => 0,
            Face::Bottom | Face::Top => 1,
        }
    }

    /// True for the face at the upper end of its axis.
    pub fn is_upper(self) -> bool {
        matches!(self, Face::Right | Face::Top)
    }

    /// Outward unit normal.
    pub fn normal(self) -> [f64; 2] {
        let mut n = [0.0; 2];
        n[self.axis()] = if self.is_upper() { 1.0 } else { -1.0 };
        n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub dimension: usize,
    /// Side lengths: `[L]` or `[L1, L2]`.
    pub extents: Vec<f64>,
    pub gamma_faces: Vec<Face>,
    pub epsilon_core: f64,
}

impl DomainSpec {
    pub fn interval(length: f64, gamma: Face, epsilon_core: f64) -> Self {
        Self {
            dimension: 1,
            extents: vec![length],
            gamma_faces: vec![gamma],
            epsilon_core,
        }
    }

    pub fn rectangle(l1: f64, l2: f64, gamma_faces: &[Face], epsilon_core: f64) -> Self {
        Self {
            dimension: 2,
            extents: vec![l1, l2],
            gamma_faces: gamma_faces.to_vec(),
            epsilon_core,
        }
    }

    /// Faces not in Gamma.
    pub fn complement_faces(&self) -> Vec<Face> {
        Face::all(self.dimension)
            .iter()
            .copied()
            .filter(|f| !self.gamma_faces.contains(f))
            .collect()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extents.get(axis).copied().unwrap_or(1.0)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(Error::InvalidGeometry(format!(
                "dimension must be 1 or 2, got {}",
                self.dimension
            )));
        }
        if self.extents.len() != self.dimension || self.extents.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidGeometry(format!(
                "expected {} positive extents, got {:?}",
                self.dimension, self.extents
            )));
        }
        if self.gamma_faces.is_empty() {
            return Err(Error::InvalidGeometry("Gamma must be non-empty".into()));
        }
        let valid = Face::all(self.dimension);
        for (i, f) in self.gamma_faces.iter().enumerate() {
            if !valid.contains(f) {
                return Err(Error::InvalidGeometry(format!(
                    "face {f:?} does not exist in {}D",
                    self.dimension
                )));
            }
            if self.gamma_faces[..i].contains(f) {
                return Err(Error::InvalidGeometry(format!("face {f:?} listed twice")));
            }
        }
        Ok(())
    }
}

/// Outcome of checking the four admissibility conditions on sampled nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AdmissibilityCheck {
    pub positive_inside: bool,
    pub gradient_nonvanishing: bool,
    pub vanishes_on_complement: bool,
    pub normal_condition: bool,
}

impl AdmissibilityCheck {
    pub fn passed(&self) -> bool {
        self.positive_inside
            && self.gradient_nonvanishing
            && self.vanishes_on_complement
            && self.normal_condition
    }
}

/// Affine `d(x) = offset + gradient . x`, the distance to the single face
/// making up `dOmega \ Gamma`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineD {
    pub dimension: usize,
    pub extents: [f64; 2],
    pub gradient: [f64; 2],
    pub offset: f64,
    pub complement: Face,
    pub check: AdmissibilityCheck,
}

impl AffineD {
    pub fn value(&self, x: Point) -> f64 {
        self.offset + self.gradient[0] * x[0] + self.gradient[1] * x[1]
    }

    /// `max d` over the closed domain.
    pub fn max_value(&self) -> f64 {
        self.extents[self.complement.axis()]
    }

    /// Re-run the four admissibility checks with `nodes` samples per axis.
    pub fn verify(&self, nodes: usize) -> AdmissibilityCheck {
        let nodes = nodes.max(3);
        let tol = 1e-12 * self.max_value();
        let axis_points = |axis: usize| -> Vec<f64> {
            if axis >= self.dimension {
                return vec![0.0];
            }
            let l = self.extents[axis];
            (0..nodes)
                .map(|i| l * i as f64 / (nodes - 1) as f64)
                .collect()
        };
        let xs = axis_points(0);
        let ys = axis_points(1);

        let grad_norm = self.gradient[0].hypot(self.gradient[1]);
        let mut check = AdmissibilityCheck {
            positive_inside: true,
            gradient_nonvanishing: grad_norm > 0.0,
            vanishes_on_complement: true,
            normal_condition: true,
        };
        let on_face = |face: Face, p: Point| -> bool {
            let axis = face.axis();
            if axis >= self.dimension {
                return false;
            }
            let target = if face.is_upper() {
                self.extents[axis]
            } else {
                0.0
            };
            (p[axis] - target).abs() <= 1e-14 * self.extents[axis]
        };
        for &y in &ys {
            for &x in &xs {
                let p = [x, y];
                let on_boundary = Face::all(self.dimension).iter().any(|&f| on_face(f, p));
                let d = self.value(p);
                if !on_boundary && d <= tol {
                    check.positive_inside = false;
                }
                if on_face(self.complement, p) {
                    if d.abs() > tol {
                        check.vanishes_on_complement = false;
                    }
                    let nu = self.complement.normal();
                    if self.gradient[0] * nu[0] + self.gradient[1] * nu[1] > 0.0 {
                        check.normal_condition = false;
                    }
                }
            }
        }
        check
    }
}

/// Construct the affine `d` for a supported configuration.
///
/// Fails with [`Error::NoAdmissibleAffineD`] unless `dOmega \ Gamma` is
/// exactly one face.
pub fn build_d(spec: &DomainSpec) -> Result<AffineD> {
    spec.validate()?;
    let complement = spec.complement_faces();
    if complement.len() != 1 {
        return Err(Error::NoAdmissibleAffineD(format!(
            "dOmega \\ Gamma must be a single face for an affine d, got {complement:?}"
        )));
    }
    let face = complement[0];
    let axis = face.axis();
    let length = spec.extent(axis);
    let mut gradient = [0.0; 2];
    let offset;
    if face.is_upper() {
        gradient[axis] = -1.0;
        offset = length;
    } else {
        gradient[axis] = 1.0;
        offset = 0.0;
    }
    let mut d = AffineD {
        dimension: spec.dimension,
        extents: [
            spec.extent(0),
            if spec.dimension == 2 {
                spec.extent(1)
            } else {
                0.0
            },
        ],
        gradient,
        offset,
        complement: face,
        check: AdmissibilityCheck {
            positive_inside: false,
            gradient_nonvanishing: false,
            vanishes_on_complement: false,
            normal_condition: false,
        },
    };
    d.check = d.verify(33);
    if !d.check.passed() {
        return Err(Error::NoAdmissibleAffineD(format!(
            "discrete check failed: {:?}",
            d.check
        )));
    }
    if !(spec.epsilon_core > 0.0 && spec.epsilon_core < d.max_value()) {
        return Err(Error::InvalidGeometry(format!(
            "epsilon_core must lie in (0, {}), got {}",
            d.max_value(),
            spec.epsilon_core
        )));
    }
    Ok(d)
}

/// `r = fraction * sqrt(d0 / d1)`, strictly inside `(0, sqrt(d0/d1))`.
pub fn select_r(d0: f64, d1: f64, fraction: f64) -> Result<f64> {
    if !(d0 > 0.0) || !(d1 >= d0) {
        return Err(Error::InvalidGeometry(format!(
            "need 0 < d0 <= d1, got d0 = {d0}, d1 = {d1}"
        )));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::ConstraintViolation {
            what: "r fraction",
            lower: 0.0,
            upper: 1.0,
            value: fraction,
        });
    }
    Ok(fraction * (d0 / d1).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaRule {
    GeometricMean,
    Explicit(f64),
}

/// Open interval for `beta`.
pub fn beta_bounds(d0: f64, d1: f64, delta: f64, r: f64) -> (f64, f64) {
    let d2 = delta * delta;
    ((d1 - d0) / (d2 - r * r * d2), d0 / (r * r * d2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaChoice {
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    /// `beta - lower` and `upper - beta`; both strictly positive.
    pub margins: (f64, f64),
}

pub fn select_beta(d0: f64, d1: f64, delta: f64, r: f64, rule: BetaRule) -> Result<BetaChoice> {
    if !(delta > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !(d0 > 0.0 && d1 >= d0) {
        return Err(Error::InvalidGeometry(format!(
            "need 0 < d0 <= d1, got d0 = {d0}, d1 = {d1}"
        )));
    }
    let r_max = (d0 / d1).sqrt();
    if !(r > 0.0 && r < r_max) {
        return Err(Error::ConstraintViolation {
            what: "r",
            lower: 0.0,
            upper: r_max,
            value: r,
        });
    }
    let (lower, upper) = beta_bounds(d0, d1, delta, r);
    let beta = match rule {
        BetaRule::GeometricMean if lower > 0.0 => (lower * upper).sqrt(),
        BetaRule::GeometricMean => 0.5 * (lower + upper),
        BetaRule::Explicit(b) => b,
    };
    if !(beta > lower && beta < upper) {
        return Err(Error::ConstraintViolation {
            what: "beta",
            lower,
            upper,
            value: beta,
        });
    }
    Ok(BetaChoice {
        beta,
        lower,
        upper,
        margins: (beta - lower, upper - beta),
    })
}

/// User-facing knobs from which a [`WeightConfig`] is derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub lambda: f64,
    pub beta: Option<f64>,
    pub r_fraction: f64,
    pub t0: f64,
    pub delta: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            beta: None,
            r_fraction: 0.5,
            t0: 1.0,
            delta: 0.5,
        }
    }
}

/// The full constant ledger of the weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightConfig {
    pub d: AffineD,
    pub lambda: f64,
    pub beta: f64,
    pub t0: f64,
    pub delta: f64,
    pub r: f64,
    pub d0: f64,
    pub d1: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// `0 < r < sqrt(d0/d1)`.
    pub r_valid: bool,
    /// `beta` strictly inside its admissible interval.
    pub beta_valid: bool,
}

impl WeightConfig {
    /// Assemble from explicit constants; the validity flags record whether
    /// the `r` and `beta` constraints hold.
    #[allow(clippy::too_many_arguments)]
    pub fn from_constants(
        d: AffineD,
        lambda: f64,
        beta: f64,
        t0: f64,
        delta: f64,
        r: f64,
        d0: f64,
        d1: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0) || !(beta > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "lambda, beta, delta must be positive (got {lambda}, {beta}, {delta})"
            )));
        }
        if !(t0 - delta > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "need t0 - delta > 0, got t0 = {t0}, delta = {delta}"
            )));
        }
        let r_valid = d0 > 0.0 && d1 >= d0 && r > 0.0 && r < (d0 / d1).sqrt();
        let (lo, up) = beta_bounds(d0, d1, delta, r);
        let beta_valid = r_valid && beta > lo && beta < up;
        let mu1 = (lambda * (d1 - beta * delta * delta)).exp();
        let mu2 = (lambda * (d0 - beta * r * r * delta * delta)).exp();
        Ok(Self {
            d,
            lambda,
            beta,
            t0,
            delta,
            r,
            d0,
            d1,
            mu1,
            mu2,
            r_valid,
            beta_valid,
        })
    }

    /// Derive every constant for `spec`: `d0 = epsilon_core`, `d1 = max d`,
    /// `r` from the fraction rule and `beta` from the geometric-mean rule
    /// unless given explicitly.
    pub fn for_domain(spec: &DomainSpec, params: &WeightParams) -> Result<Self> {
        let d = build_d(spec)?;
        let d0 = spec.epsilon_core;
        let d1 = d.max_value();
        let r = select_r(d0, d1, params.r_fraction)?;
        let rule = params
            .beta
            .map_or(BetaRule::GeometricMean, BetaRule::Explicit);
        let beta = select_beta(d0, d1, params.delta, r, rule)?.beta;
        let cfg = Self::from_constants(d, params.lambda, beta, params.t0, params.delta, r, d0, d1)?;
        compute_mu(&cfg)?;
        Ok(cfg)
    }

    pub fn is_valid(&self) -> bool {
        self.r_valid && self.beta_valid
    }

    /// Same constants re-centred at a different `t0`.
    pub fn with_t0(&self, t0: f64) -> Result<Self> {
        Self::from_constants(
            self.d.clone(),
            self.lambda,
            self.beta,
            t0,
            self.delta,
            self.r,
            self.d0,
            self.d1,
        )
    }

    /// `log phi` given the time offset `t - t0`.
    #[inline]
    pub fn log_phi_offset(&self, x: Point, offset: f64) -> f64 {
        self.lambda * (self.d.value(x) - self.beta * offset * offset)
    }

    /// Largest `phi` over the closed space-time box.
    pub fn phi_max(&self) -> f64 {
        (self.lambda * self.d1).exp()
    }

    /// Smallest `phi` over the closed space-time box (attained on the
    /// complement face at the time ends).
    pub fn phi_min(&self) -> f64 {
        (self.lambda * (0.0 - self.beta * self.delta * self.delta)).exp()
    }
}

/// `(mu1, mu2)`; errors unless `mu2 > max(1, mu1)`.
pub fn compute_mu(cfg: &WeightConfig) -> Result<(f64, f64)> {
    if !cfg.r_valid {
        let upper = if cfg.d1 > 0.0 && cfg.d0 > 0.0 {
            (cfg.d0 / cfg.d1).sqrt()
        } else {
            0.0
        };
        return Err(Error::ConstraintViolation {
            what: "r",
            lower: 0.0,
            upper,
            value: cfg.r,
        });
    }
    let (lower, upper) = beta_bounds(cfg.d0, cfg.d1, cfg.delta, cfg.r);
    if !cfg.beta_valid {
        return Err(Error::ConstraintViolation {
            what: "beta",
            lower,
            upper,
            value: cfg.beta,
        });
    }
    let floor = cfg.mu1.max(1.0);
    if !(cfg.mu2 > floor) {
        return Err(Error::ConstraintViolation {
            what: "mu2 > max(1, mu1)",
            lower: floor,
            upper: f64::INFINITY,
            value: cfg.mu2,
        });
    }
    Ok((cfg.mu1, cfg.mu2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub phi: f64,
    pub log_phi: f64,
}

pub fn eval_phi(x: Point, t: f64, cfg: &WeightConfig) -> PhiValue {
    let log_phi = cfg.log_phi_offset(x, t - cfg.t0);
    PhiValue {
        phi: log_phi.exp(),
        log_phi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_interval() -> AffineD {
        build_d(&DomainSpec::interval(1.0, Face::Left, 0.5)).unwrap()
    }

    #[test]
    fn d_for_interval_with_gamma_at_zero() {
        let d = unit_interval();
        assert_eq!(d.value([1.0, 0.0]), 0.0);
        assert_eq!(d.value([0.25, 0.0]), 0.75);
        assert_eq!(d.gradient, [-1.0, 0.0]);
        let nu = d.complement.normal();
        assert_eq!(d.gradient[0] * nu[0], -1.0);
        assert!(d.check.passed());
    }

    #[test]
    fn d_for_square_with_three_gamma_faces() {
        let spec = DomainSpec::rectangle(1.0, 1.0, &[Face::Left, Face::Bottom, Face::Top], 0.3);
        let d = build_d(&spec).unwrap();
        assert_eq!(d.complement, Face::Right);
        assert_eq!(d.value([0.2, 0.9]), 0.8);
        assert_eq!(d.value([1.0, 0.4]), 0.0);
        assert!(d.verify(65).passed());
    }

    #[test]
    fn single_gamma_face_in_2d_is_rejected() {
        let spec = DomainSpec::rectangle(1.0, 1.0, &[Face::Left], 0.3);
        assert!(matches!(build_d(&spec), Err(Error::NoAdmissibleAffineD(_))));
        let both = DomainSpec {
            dimension: 1,
            extents: vec![1.0],
            gamma_faces: vec![Face::Left, Face::Right],
            epsilon_core: 0.5,
        };
        assert!(matches!(build_d(&both), Err(Error::NoAdmissibleAffineD(_))));
    }

    #[test]
    fn bad_epsilon_and_faces() {
        assert!(build_d(&DomainSpec::interval(1.0, Face::Left, 1.0)).is_err());
        assert!(build_d(&DomainSpec::interval(1.0, Face::Top, 0.5)).is_err());
        assert!(build_d(&DomainSpec::interval(-1.0, Face::Left, 0.5)).is_err());
    }

    #[test]
    fn select_r_examples() {
        assert_eq!(select_r(1.0, 4.0, 0.5).unwrap(), 0.25);
        assert_relative_eq!(select_r(1.0, 1.0, 0.9).unwrap(), 0.9);
        assert!(select_r(0.0, 1.0, 0.5).is_err());
        assert!(select_r(2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn select_beta_examples() {
        let c = select_beta(1.0, 2.0, 1.0, 0.5, BetaRule::GeometricMean).unwrap();
        assert_relative_eq!(c.lower, 4.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(c.upper, 4.0, epsilon = 1e-14);
        assert_relative_eq!(c.beta, (16.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert!(c.margins.0 > 0.0 && c.margins.1 > 0.0);

        let c = select_beta(1.0, 1.0, 1.0, 0.5, BetaRule::GeometricMean).unwrap();
        assert_eq!(c.lower, 0.0);
        assert_eq!(c.beta, 2.0);

        match select_beta(1.0, 2.0, 1.0, 0.5, BetaRule::Explicit(5.0)) {
            Err(Error::ConstraintViolation {
                lower,
                upper,
                value,
                ..
            }) => {
                assert_relative_eq!(lower, 4.0 / 3.0, epsilon = 1e-14);
                assert_eq!(upper, 4.0);
                assert_eq!(value, 5.0);
            }
            other => panic!("expected constraint violation, got {other:?}"),
        }
    }

    #[test]
    fn compute_mu_examples() {
        let cfg = WeightConfig::from_constants(unit_interval(), 1.0, 2.0, 2.0, 1.0, 0.5, 1.0, 2.0)
            .unwrap();
        let (mu1, mu2) = compute_mu(&cfg).unwrap();
        assert_relative_eq!(mu1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(mu2, 0.5f64.exp(), epsilon = 1e-15);

        let cfg = WeightConfig::from_constants(unit_interval(), 2.0, 2.0, 2.0, 1.0, 0.5, 1.0, 2.0)
            .unwrap();
        let (mu1, mu2) = compute_mu(&cfg).unwrap();
        assert_relative_eq!(mu1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(mu2, 1.0f64.exp(), epsilon = 1e-15);
    }

    #[test]
    fn compute_mu_rejects_bypassed_constraints() {
        let cfg = WeightConfig::from_constants(unit_interval(), 1.0, 5.0, 2.0, 1.0, 0.5, 1.0, 2.0)
            .unwrap();
        assert!(!cfg.beta_valid);
        assert!(matches!(
            compute_mu(&cfg),
            Err(Error::ConstraintViolation { what: "beta", .. })
        ));
    }

    #[test]
    fn phi_examples() {
        let cfg = WeightConfig::from_constants(unit_interval(), 1.0, 2.0, 2.0, 1.0, 0.5, 1.0, 2.0)
            .unwrap();
        let at_t0 = eval_phi([0.3, 0.0], 2.0, &cfg);
        assert_relative_eq!(at_t0.phi, (0.7f64).exp(), epsilon = 1e-15);
        // d(x) = 0.5, (t - t0) = 0.5: exponent 0.5 - 2 * 0.25 = 0
        let one = eval_phi([0.5, 0.0], 2.5, &cfg);
        assert_eq!(one.phi, 1.0);
        assert_eq!(one.log_phi, 0.0);
        for k in 0..=10 {
            let sigma = cfg.delta * k as f64 / 10.0;
            let a = eval_phi([0.2, 0.0], cfg.t0 + sigma, &cfg).phi;
            let b = eval_phi([0.2, 0.0], cfg.t0 - sigma, &cfg).phi;
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn default_domain_constants() {
        let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
        let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
        assert!(cfg.is_valid());
        assert!(cfg.mu2 > 1.0 && cfg.mu2 > cfg.mu1);
        assert_relative_eq!(cfg.r, 0.5 * 0.5f64.sqrt(), epsilon = 1e-15);
    }
}
