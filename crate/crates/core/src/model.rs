//! Parameter class, design and error-density specifications.
//!
//! The parameter set consists of twice continuously differentiable functions
//! on `[0,1]` with `|θ| ≤ C_Θ`, `|θ″| ≤ C_Θ` and an α-Hölder second
//! derivative. Designs are quantile transforms of a Lipschitz density bounded
//! away from zero; error densities live on `[-1,1]`, are Lipschitz and
//! positive inside, and jump at one or both endpoints. All constraints are
//! checkable numerically via [`validate_parameter`] and the `validate`
//! methods, on a dense grid.

use serde::{Deserialize, Serialize};

use crate::numeric::fnv1a;
use crate::quad::integrate;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Kernels for the lower-bound bump family
// ---------------------------------------------------------------------------

/// Compactly supported smooth kernels on `[-1/2, 1/2]` used by the
/// lower-bound construction. `SmoothBump` is even (positive at 0, for
/// value-level separation); `TiltedBump` has a positive first derivative at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    SmoothBump { amplitude: f64 },
    TiltedBump { amplitude: f64 },
}

fn bump_base(u: f64) -> (f64, f64, f64) {
    let w = 1.0 - 4.0 * u * u;
    if w <= 1e-12 {
        return (0.0, 0.0, 0.0);
    }
    let psi = (-1.0 / w).exp();
    let g1 = -8.0 * u / (w * w);
    let g2 = -8.0 / (w * w) - 128.0 * u * u / (w * w * w);
    (psi, psi * g1, psi * (g1 * g1 + g2))
}

impl Kernel {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Kernel::SmoothBump { amplitude } => amplitude * bump_base(u).0,
            Kernel::TiltedBump { amplitude } => {
                let (p, _, _) = bump_base(u);
                amplitude * p * (std::f64::consts::PI * u).sin()
            }
        }
    }

    pub fn deriv1(&self, u: f64) -> f64 {
        match *self {
            Kernel::SmoothBump { amplitude } => amplitude * bump_base(u).1,
            Kernel::TiltedBump { amplitude } => {
                let pi = std::f64::consts::PI;
                let (p, p1, _) = bump_base(u);
                amplitude * (p1 * (pi * u).sin() + pi * p * (pi * u).cos())
            }
        }
    }

    pub fn deriv2(&self, u: f64) -> f64 {
        match *self {
            Kernel::SmoothBump { amplitude } => amplitude * bump_base(u).2,
            Kernel::TiltedBump { amplitude } => {
                let pi = std::f64::consts::PI;
                let (p, p1, p2) = bump_base(u);
                amplitude
                    * (p2 * (pi * u).sin() + 2.0 * pi * p1 * (pi * u).cos()
                        - pi * pi * p * (pi * u).sin())
            }
        }
    }

    /// Derivative of order `k ∈ {0, 1, 2}` at a point.
    pub fn deriv_k(&self, k: usize, u: f64) -> f64 {
        match k {
            0 => self.eval(u),
            1 => self.deriv1(u),
            2 => self.deriv2(u),
            _ => f64::NAN,
        }
    }

    /// Generalized Hölder-s norm on a grid (s < 3).
    pub fn holder_norm(&self, s: f64, grid: usize) -> f64 {
        let floor_s = (s.floor() as usize).min(2);
        let frac = s - floor_s as f64;
        let mut sup = 0.0f64;
        let pts: Vec<f64> = (0..=grid).map(|i| -0.5 + i as f64 / grid as f64).collect();
        let top: Vec<f64> = pts.iter().map(|&u| self.deriv_k(floor_s, u)).collect();
        for j in 0..=floor_s {
            for &u in &pts {
                sup = sup.max(self.deriv_k(j, u).abs());
            }
        }
        let mut hol = 0.0f64;
        for lag in [1usize, 2, 7, 31, grid / 3] {
            if lag == 0 {
                continue;
            }
            for i in lag..pts.len() {
                let dx = pts[i] - pts[i - lag];
                let num = (top[i] - top[i - lag]).abs();
                let den = if frac > 0.0 { dx.powf(frac) } else { 1.0 };
                hol = hol.max(num / den);
            }
        }
        sup + hol
    }

    /// A bump kernel scaled to lie inside the Hölder-s unit ball.
    pub fn bump_in_class(s: f64) -> Kernel {
        let raw = Kernel::SmoothBump { amplitude: 1.0 };
        let norm = raw.holder_norm(s, 4000);
        Kernel::SmoothBump {
            amplitude: 0.98 / norm,
        }
    }

    /// A tilted bump (positive slope at 0) inside the Hölder-s unit ball.
    pub fn tilted_in_class(s: f64) -> Kernel {
        let raw = Kernel::TiltedBump { amplitude: 1.0 };
        let norm = raw.holder_norm(s, 4000);
        Kernel::TiltedBump {
            amplitude: 0.98 / norm,
        }
    }
}

// ---------------------------------------------------------------------------
// Parameter functions
// ---------------------------------------------------------------------------

/// Built-in parameter families; the pipeline only ever needs pointwise values
/// of θ, θ′ and θ″, so each family hard-codes exact derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ParamFamily {
    /// Coefficients in increasing degree: θ(x) = Σ `coeffs[i]`·x^i.
    Polynomial { coeffs: Vec<f64> },
    /// θ(x) = amplitude · x · cos(frequency · x).
    ScaledSinusoid { amplitude: f64, frequency: f64 },
    /// θ(x) = amplitude · sin(frequency · x).
    Sine { amplitude: f64, frequency: f64 },
    /// Piecewise-linear interpolant of tabulated values on [0, 1].
    CustomGrid { xs: Vec<f64>, values: Vec<f64> },
    /// Lower-bound bump: θ(x) = level · width^s · K((x − x0)/width).
    Bump {
        level: f64,
        width: f64,
        s: f64,
        x0: f64,
        kernel: Kernel,
    },
    /// Block-constant step function on m equal intervals (oracle/test mode;
    /// not a member of the smooth class, validated on the sup bound only).
    Step { values: Vec<f64> },
}

/// An element θ of the parameter class with its declared constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterFunction {
    #[serde(flatten)]
    pub family: ParamFamily,
    pub c_theta: f64,
    pub alpha: f64,
}

impl ParameterFunction {
    pub fn new(family: ParamFamily, c_theta: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Validation(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(c_theta >= 0.0 && c_theta.is_finite()) {
            return Err(Error::Validation(format!(
                "c_theta must be a nonnegative real, got {c_theta}"
            )));
        }
        Ok(ParameterFunction {
            family,
            c_theta,
            alpha,
        })
    }

    /// Figure-style oscillating family θ(x) = a·x·cos(ωx) with honest class
    /// constants measured from its derivatives.
    pub fn scaled_sinusoid(
        amplitude: f64,
        frequency: f64,
        c_theta: f64,
        alpha: f64,
    ) -> Result<Self> {
        Self::new(
            ParamFamily::ScaledSinusoid {
                amplitude,
                frequency,
            },
            c_theta,
            alpha,
        )
    }

    pub fn zero(c_theta: f64, alpha: f64) -> Self {
        ParameterFunction {
            family: ParamFamily::Polynomial { coeffs: vec![0.0] },
            c_theta,
            alpha,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.family {
            ParamFamily::Polynomial { coeffs } => {
                let mut v = 0.0;
                for &c in coeffs.iter().rev() {
                    v = v * x + c;
                }
                v
            }
            ParamFamily::ScaledSinusoid {
                amplitude,
                frequency,
            } => amplitude * x * (frequency * x).cos(),
            ParamFamily::Sine {
                amplitude,
                frequency,
            } => amplitude * (frequency * x).sin(),
            ParamFamily::CustomGrid { xs, values } => interp_linear(xs, values, x),
            ParamFamily::Bump {
                level,
                width,
                s,
                x0,
                kernel,
            } => level * width.powf(*s) * kernel.eval((x - x0) / width),
            ParamFamily::Step { values } => values[step_block(x, values.len())],
        }
    }

    pub fn deriv1(&self, x: f64) -> f64 {
        match &self.family {
            ParamFamily::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c * x.powi(i as i32 - 1))
                .sum(),
            ParamFamily::ScaledSinusoid {
                amplitude,
                frequency,
            } => amplitude * ((frequency * x).cos() - frequency * x * (frequency * x).sin()),
            ParamFamily::Sine {
                amplitude,
                frequency,
            } => amplitude * frequency * (frequency * x).cos(),
            ParamFamily::CustomGrid { xs, values } => interp_deriv1(xs, values, x),
            ParamFamily::Bump {
                level,
                width,
                s,
                x0,
                kernel,
            } => level * width.powf(s - 1.0) * kernel.deriv1((x - x0) / width),
            ParamFamily::Step { .. } => 0.0,
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        match &self.family {
            ParamFamily::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(2)
                .map(|(i, &c)| (i * (i - 1)) as f64 * c * x.powi(i as i32 - 2))
                .sum(),
            ParamFamily::ScaledSinusoid {
                amplitude,
                frequency,
            } => {
                let (s, c) = (frequency * x).sin_cos();
                amplitude * (-2.0 * frequency * s - frequency * frequency * x * c)
            }
            ParamFamily::Sine {
                amplitude,
                frequency,
            } => -amplitude * frequency * frequency * (frequency * x).sin(),
            ParamFamily::CustomGrid { xs, values } => interp_deriv2(xs, values, x),
            ParamFamily::Bump {
                level,
                width,
                s,
                x0,
                kernel,
            } => level * width.powf(s - 2.0) * kernel.deriv2((x - x0) / width),
            ParamFamily::Step { .. } => 0.0,
        }
    }

    pub fn family_tag(&self) -> &'static str {
        match self.family {
            ParamFamily::Polynomial { .. } => "polynomial",
            ParamFamily::ScaledSinusoid { .. } => "scaled-sinusoid",
            ParamFamily::Sine { .. } => "sine",
            ParamFamily::CustomGrid { .. } => "custom-grid",
            ParamFamily::Bump { .. } => "bump",
            ParamFamily::Step { .. } => "step",
        }
    }

    pub fn is_step(&self) -> bool {
        matches!(self.family, ParamFamily::Step { .. })
    }
}

fn step_block(x: f64, m: usize) -> usize {
    ((x * m as f64).floor() as usize).min(m - 1)
}

fn interp_linear(xs: &[f64], values: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => values[i],
        Err(0) => values[0],
        Err(i) if i >= xs.len() => values[xs.len() - 1],
        Err(i) => {
            let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            values[i - 1] + t * (values[i] - values[i - 1])
        }
    }
}

fn interp_deriv1(xs: &[f64], values: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) | Err(i) => i.clamp(1, n - 1),
    };
    (values[i] - values[i - 1]) / (xs[i] - xs[i - 1])
}

fn interp_deriv2(xs: &[f64], values: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n < 3 {
        return 0.0;
    }
    let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) | Err(i) => i.clamp(1, n - 2),
    };
    let (h1, h2) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
    2.0 * (h1 * values[i + 1] - (h1 + h2) * values[i] + h2 * values[i - 1]) / (h1 * h2 * (h1 + h2))
}

// ---------------------------------------------------------------------------
// Designs
// ---------------------------------------------------------------------------

/// Built-in design distributions on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DesignFamily {
    Uniform,
    /// Density (1 + slope·x) / (1 + slope/2); slope > -1.
    LinearDensity {
        slope: f64,
    },
}

/// A design specification: quantile transform, density and its constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    #[serde(flatten)]
    pub family: DesignFamily,
}

impl DesignSpec {
    pub fn uniform() -> Self {
        DesignSpec {
            family: DesignFamily::Uniform,
        }
    }

    pub fn linear(slope: f64) -> Result<Self> {
        if slope <= -1.0 {
            return Err(Error::Validation(format!(
                "linear design slope must exceed -1, got {slope}"
            )));
        }
        Ok(DesignSpec {
            family: DesignFamily::LinearDensity { slope },
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        match self.family {
            DesignFamily::Uniform => 1.0,
            DesignFamily::LinearDensity { slope } => (1.0 + slope * x) / (1.0 + slope / 2.0),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.family {
            DesignFamily::Uniform => x,
            DesignFamily::LinearDensity { slope } => {
                (x + slope * x * x / 2.0) / (1.0 + slope / 2.0)
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match self.family {
            DesignFamily::Uniform => u,
            DesignFamily::LinearDensity { slope } => {
                if slope.abs() < 1e-12 {
                    u
                } else {
                    (-1.0 + (1.0 + 2.0 * slope * u * (1.0 + slope / 2.0)).sqrt()) / slope
                }
            }
        }
    }

    pub fn density_lower(&self) -> f64 {
        match self.family {
            DesignFamily::Uniform => 1.0,
            DesignFamily::LinearDensity { slope } => {
                (1.0 + slope * if slope >= 0.0 { 0.0 } else { 1.0 }) / (1.0 + slope / 2.0)
            }
        }
    }

    pub fn density_upper(&self) -> f64 {
        match self.family {
            DesignFamily::Uniform => 1.0,
            DesignFamily::LinearDensity { slope } => {
                (1.0 + slope * if slope >= 0.0 { 1.0 } else { 0.0 }) / (1.0 + slope / 2.0)
            }
        }
    }

    pub fn lipschitz_const(&self) -> f64 {
        match self.family {
            DesignFamily::Uniform => 0.0,
            DesignFamily::LinearDensity { slope } => (slope / (1.0 + slope / 2.0)).abs(),
        }
    }

    /// Declared gap constant d with d⁻¹/n ≤ x_{j+1} − x_j ≤ d/n.
    pub fn gap_const(&self) -> f64 {
        2.1 * (1.0 / self.density_lower()).max(self.density_upper())
    }

    /// Mass of the design density over `[a, b]`.
    pub fn mass_on(&self, a: f64, b: f64) -> f64 {
        self.cdf(b) - self.cdf(a)
    }

    /// Numerical validation: positivity, quantile/CDF round trip, gap bounds.
    pub fn validate(&self, grid: usize) -> ValidationReport {
        let grid = grid.max(100);
        let mut report = ValidationReport::default();
        let mut worst = (0.0f64, f64::INFINITY);
        for i in 0..=grid {
            let x = i as f64 / grid as f64;
            let d = self.density(x);
            if d < worst.1 {
                worst = (x, d);
            }
        }
        report.push(
            "density bounded away from zero",
            worst.1 >= self.density_lower() - 1e-9,
            worst.0,
            worst.1,
            self.density_lower(),
        );
        let mut worst_rt = (0.0f64, 0.0f64);
        for i in 0..=grid {
            let u = i as f64 / grid as f64;
            let err = (self.cdf(self.quantile(u)) - u).abs();
            if err > worst_rt.1 {
                worst_rt = (u, err);
            }
        }
        report.push(
            "quantile/CDF round trip",
            worst_rt.1 <= 1e-9,
            worst_rt.0,
            worst_rt.1,
            1e-9,
        );
        let d = self.gap_const();
        let mut gaps_ok = true;
        let mut worst_gap = (0.0f64, 0.0f64);
        for n in [2usize, 17, 101, 1024] {
            if let Ok(xs) = design_points(n, self) {
                for j in 0..n - 1 {
                    let g = (xs[j + 1] - xs[j]) * n as f64;
                    if !(1.0 / d - 1e-12 <= g && g <= d + 1e-12) {
                        gaps_ok = false;
                        worst_gap = (xs[j], g);
                    }
                }
            }
        }
        report.push("design gap bounds", gaps_ok, worst_gap.0, worst_gap.1, d);
        report
    }
}

// ---------------------------------------------------------------------------
// Error densities
// ---------------------------------------------------------------------------

/// Built-in error densities φ on [-1, 1] (extended constantly outside).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ErrorFamily {
    /// φ = 1/2 (uniform errors).
    Uniform,
    /// φ(t) = (1 + tilt·t)/2, |tilt| < 1; asymmetric jumps.
    LinearTilt { tilt: f64 },
    /// φ(t) = 1 − (3/4)(1 − t²); unit jumps φ(±1) = 1.
    QuadraticDip,
    /// φ(t) = (1 − t)/2; one-sided (φ(1) = 0).
    OneSidedLinear,
}

/// An error density with its tabulated inverse CDF (built once).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "ErrorFamily", into = "ErrorFamily")]
pub struct ErrorDensity {
    family: ErrorFamily,
    #[serde(skip)]
    inv_cdf: Vec<f64>,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl PartialEq for ErrorDensity {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}

impl From<ErrorFamily> for ErrorDensity {
    fn from(family: ErrorFamily) -> Self {
        ErrorDensity::new(family)
    }
}

impl From<ErrorDensity> for ErrorFamily {
    fn from(e: ErrorDensity) -> Self {
        e.family
    }
}

/// Resolution of the tabulated inverse CDF.
const ERR_TABLE: usize = 1 << 14;

impl ErrorDensity {
    pub fn new(family: ErrorFamily) -> Self {
        let mut e = ErrorDensity {
            family,
            inv_cdf: Vec::new(),
            cdf: Vec::new(),
        };
        e.build_table();
        e
    }

    pub fn uniform() -> Self {
        Self::new(ErrorFamily::Uniform)
    }

    pub fn family(&self) -> ErrorFamily {
        self.family
    }

    /// φ(t), extended by its endpoint values outside [-1, 1].
    pub fn phi(&self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        match self.family {
            ErrorFamily::Uniform => 0.5,
            ErrorFamily::LinearTilt { tilt } => 0.5 * (1.0 + tilt * t),
            ErrorFamily::QuadraticDip => 1.0 - 0.75 * (1.0 - t * t),
            ErrorFamily::OneSidedLinear => 0.5 * (1.0 - t),
        }
    }

    pub fn jump_left(&self) -> f64 {
        self.phi(-1.0)
    }

    pub fn jump_right(&self) -> f64 {
        self.phi(1.0)
    }

    /// Total jump size J = φ(-1) + φ(1).
    pub fn total_jump(&self) -> f64 {
        self.jump_left() + self.jump_right()
    }

    pub fn one_sided(&self) -> bool {
        matches!(self.family, ErrorFamily::OneSidedLinear)
    }

    /// The C_ε bound: Lipschitz constant plus sup of φ.
    pub fn lipschitz_const(&self) -> f64 {
        let (lip, sup) = match self.family {
            ErrorFamily::Uniform => (0.0, 0.5),
            ErrorFamily::LinearTilt { tilt } => (0.5 * tilt.abs(), 0.5 * (1.0 + tilt.abs())),
            ErrorFamily::QuadraticDip => (1.5, 1.0),
            ErrorFamily::OneSidedLinear => (0.5, 1.0),
        };
        lip + sup
    }

    fn build_table(&mut self) {
        let n = ERR_TABLE;
        let mut cdf = Vec::with_capacity(n + 1);
        cdf.push(0.0);
        let dt = 2.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let a = -1.0 + i as f64 * dt;
            let b = a + dt;
            acc += 0.5 * (self.phi(a) + self.phi(b)) * dt;
            cdf.push(acc);
        }
        let total = cdf[n];
        for v in cdf.iter_mut() {
            *v /= total;
        }
        cdf[n] = 1.0;
        self.cdf = cdf;
        self.inv_cdf = Vec::new();
    }

    /// Inverse CDF by monotone linear interpolation of the table.
    pub fn inv_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let cdf = &self.cdf;
        let mut lo = 0usize;
        let mut hi = cdf.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if cdf[mid] <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let dt = 2.0 / ERR_TABLE as f64;
        let t0 = -1.0 + lo as f64 * dt;
        let span = cdf[hi] - cdf[lo];
        if span <= 0.0 {
            return t0;
        }
        t0 + dt * (u - cdf[lo]) / span
    }

    /// One draw from φ.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        self.inv_cdf(rng.gen::<f64>())
    }

    /// Analytic-order validation: unit mass, C_ε bounds, endpoint jumps.
    pub fn validate(&self, grid: usize) -> ValidationReport {
        let grid = grid.max(100);
        let mut report = ValidationReport::default();
        let mass = integrate(|t| self.phi(t), -1.0, 1.0, 1e-10)
            .map(|r| r.value)
            .unwrap_or(f64::NAN);
        report.push("∫φ = 1", (mass - 1.0).abs() <= 1e-8, 0.0, mass, 1.0);
        let c = self.lipschitz_const();
        let mut sup = (0.0f64, 0.0f64);
        for i in 0..=grid {
            let t = -1.0 + 2.0 * i as f64 / grid as f64;
            let v = self.phi(t).abs();
            if v > sup.1 {
                sup = (t, v);
            }
        }
        report.push("sup|φ| ≤ C_ε", sup.1 <= c + 1e-9, sup.0, sup.1, c);
        let mut lip = (0.0f64, 0.0f64);
        for i in 1..=grid {
            let t0 = -1.0 + 2.0 * (i - 1) as f64 / grid as f64;
            let t1 = -1.0 + 2.0 * i as f64 / grid as f64;
            let r = (self.phi(t1) - self.phi(t0)).abs() / (t1 - t0);
            if r > lip.1 {
                lip = (t0, r);
            }
        }
        report.push("Lipschitz ratio ≤ C_ε", lip.1 <= c + 1e-9, lip.0, lip.1, c);
        if self.one_sided() {
            report.push(
                "one-sided jumps: φ(-1) > 0, φ(1) = 0",
                self.jump_left() > 0.0 && self.jump_right() == 0.0,
                -1.0,
                self.jump_left(),
                0.0,
            );
        } else {
            report.push(
                "two-sided jumps: φ(±1) > 0",
                self.jump_left() > 0.0 && self.jump_right() > 0.0,
                1.0,
                self.jump_right(),
                0.0,
            );
        }
        report
    }
}

// ---------------------------------------------------------------------------
// Experiment specification
// ---------------------------------------------------------------------------

/// Everything needed to generate either experiment: design, error density,
/// sample size and the class constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n: usize,
    pub c_theta: f64,
    pub alpha: f64,
    pub design: DesignSpec,
    pub error: ErrorDensity,
}

impl ExperimentSpec {
    pub fn new(
        n: usize,
        c_theta: f64,
        alpha: f64,
        design: DesignSpec,
        error: ErrorDensity,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Validation(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if c_theta < 0.0 || !c_theta.is_finite() {
            return Err(Error::Validation(format!(
                "c_theta must be nonnegative, got {c_theta}"
            )));
        }
        Ok(ExperimentSpec {
            n,
            c_theta,
            alpha,
            design,
            error,
        })
    }

    /// Vertical bounds of the observation rectangle S.
    pub fn y_bounds(&self) -> (f64, f64) {
        (-self.c_theta - 1.0, self.c_theta + 1.0)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(s).map_err(|e| Error::Validation(e.to_string()))?;
        ExperimentSpec::new(spec.n, spec.c_theta, spec.alpha, spec.design, spec.error)
    }

    /// Stable content identifier of this specification.
    pub fn spec_hash(&self) -> u64 {
        fnv1a(self.to_toml().unwrap_or_default().as_bytes())
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Deterministic quantile design: x_{j,n} = F_D^{-1}((j-1)/(n-1)), j = 1..n.
pub fn design_points(n: usize, design: &DesignSpec) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Validation(format!("design needs n ≥ 2, got {n}")));
    }
    let mut xs = Vec::with_capacity(n);
    for j in 0..n {
        xs.push(design.quantile(j as f64 / (n - 1) as f64));
    }
    for w in xs.windows(2) {
        if w[1] < w[0] {
            return Err(Error::Validation("design quantile is not monotone".into()));
        }
    }
    Ok(xs)
}

/// Taylor-remainder constant bounding the best quadratic approximation error
/// on a window: γ_h := 2·C_Θ (independent of h).
///
/// For θ in the class, the Taylor polynomial at the window center satisfies
/// |θ − T₂| ≤ (C_Θ/2)h^{2+α} and |θ′ − T₂′| ≤ C_Θ h^{1+α}, so the combined
/// normalized error is at most 1.5·C_Θ; rounded up to 2·C_Θ.
pub fn holder_band(h: f64, c_theta: f64) -> f64 {
    debug_assert!(h > 0.0 && h <= 0.5, "bandwidth must lie in (0, 1/2]");
    2.0 * c_theta
}

/// One invariant check within a validation report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub worst_x: f64,
    pub worst_value: f64,
    pub bound: f64,
}

/// Pass/fail listing of numerically checked invariants.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    fn push(&mut self, name: &str, passed: bool, worst_x: f64, worst_value: f64, bound: f64) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            worst_x,
            worst_value,
            bound,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {} (worst at x={:.6}: {:.6e}, bound {:.6e})",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.worst_x,
                c.worst_value,
                c.bound
            )?;
        }
        Ok(())
    }
}

/// Checks the class constraints of a parameter function on a dense grid:
/// sup bounds on θ and θ″, the Hölder condition on θ″, and agreement of the
/// declared derivatives with central finite differences.
///
/// Step-family functions are only checked on the sup bound (they are oracle
/// inputs for the block-constant experiments, not class members).
pub fn validate_parameter(theta: &ParameterFunction, grid_size: usize) -> ValidationReport {
    let g = grid_size.max(100);
    let mut report = ValidationReport::default();
    let xs: Vec<f64> = (0..=g).map(|i| i as f64 / g as f64).collect();

    let mut sup0 = (0.0f64, 0.0f64);
    for &x in &xs {
        let v = theta.eval(x).abs();
        if v > sup0.1 {
            sup0 = (x, v);
        }
    }
    report.push(
        "sup|θ| ≤ C_Θ",
        sup0.1 <= theta.c_theta + 1e-9,
        sup0.0,
        sup0.1,
        theta.c_theta,
    );

    if theta.is_step() {
        return report;
    }

    let d2: Vec<f64> = xs.iter().map(|&x| theta.deriv2(x)).collect();
    let mut sup2 = (0.0f64, 0.0f64);
    for (&x, &v) in xs.iter().zip(&d2) {
        if v.abs() > sup2.1 {
            sup2 = (x, v.abs());
        }
    }
    report.push(
        "sup|θ″| ≤ C_Θ",
        sup2.1 <= theta.c_theta + 1e-9,
        sup2.0,
        sup2.1,
        theta.c_theta,
    );

    let mut hol = (0.0f64, 0.0f64);
    for lag in [1usize, 2, 5, 17, 97, g / 7, g / 3] {
        if lag == 0 {
            continue;
        }
        for i in lag..xs.len() {
            let dx = xs[i] - xs[i - lag];
            let r = (d2[i] - d2[i - lag]).abs() / dx.powf(theta.alpha);
            if r > hol.1 {
                hol = (xs[i - lag], r);
            }
        }
    }
    report.push(
        "Hölder(θ″, α) ≤ C_Θ",
        hol.1 <= theta.c_theta * (1.0 + 1e-6) + 1e-9,
        hol.0,
        hol.1,
        theta.c_theta,
    );

    // Finite-difference consistency of the declared derivatives.
    let dx = 1.0 / g as f64;
    let scale2 = sup2.1.max(1.0);
    let (mut fd1, mut fd2) = ((0.0f64, 0.0f64), (0.0f64, 0.0f64));
    for &x in &xs[1..xs.len() - 1] {
        let f1 = (theta.eval(x + dx) - theta.eval(x - dx)) / (2.0 * dx);
        let e1 = (f1 - theta.deriv1(x)).abs();
        if e1 > fd1.1 {
            fd1 = (x, e1);
        }
        let f2 = (theta.eval(x + dx) - 2.0 * theta.eval(x) + theta.eval(x - dx)) / (dx * dx);
        let e2 = (f2 - theta.deriv2(x)).abs();
        if e2 > fd2.1 {
            fd2 = (x, e2);
        }
    }
    // Central differences are exact to O(dx²) with constants driven by the
    // next derivatives; scale the tolerance by the observed magnitude.
    let tol1 = 1e-6 + 50.0 * scale2 * dx * dx / 6.0 + 1e-12 / dx;
    let tol2 = 1e-4 + 500.0 * scale2 * dx + 1e-10 / (dx * dx);
    report.push(
        "θ′ matches central differences",
        fd1.1 <= tol1,
        fd1.0,
        fd1.1,
        tol1,
    );
    report.push(
        "θ″ matches second differences",
        fd2.1 <= tol2,
        fd2.0,
        fd2.1,
        tol2,
    );
    report
}
