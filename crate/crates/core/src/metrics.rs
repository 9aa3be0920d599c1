//! Distances and quantitative checks: closed-form Hellinger distances for
//! point process laws, the exponential approximation of block extremes, the
//! extreme-value distributional identity, the pointwise lower-bound
//! construction, Monte Carlo rate studies, and the regularity-one
//! counterexample.

use rayon::prelude::*;
use serde::Serialize;

use crate::equivalence::BlockPartition;
use crate::estimators::{admissible_fit_ppp, admissible_fit_regression, pilot_bandwidth};
use crate::model::{
    holder_band, DesignSpec, ErrorDensity, ExperimentSpec, Kernel, ParamFamily, ParameterFunction,
};
use crate::numeric::fnv1a;
use crate::quad::{integrate, integrate_2d};
use crate::rng::derive_seed;
use crate::samplers::{
    sample_ppp, sample_regression, Domain, IntensityFunction, PointProcessRealization, ProcessTag,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Distance reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    HellingerSq,
    Ks,
    TvBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A computed distance with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    pub kind: DistanceKind,
    pub value: f64,
    pub method: DistanceMethod,
    pub error_estimate: f64,
    pub inputs_hash: u64,
}

impl DistanceReport {
    fn new(
        kind: DistanceKind,
        value: f64,
        method: DistanceMethod,
        error_estimate: f64,
        inputs: &str,
    ) -> Self {
        DistanceReport {
            kind,
            value,
            method,
            error_estimate,
            inputs_hash: fnv1a(inputs.as_bytes()),
        }
    }
}

/// Le Cam's upper bound on total variation from a squared Hellinger distance.
pub fn tv_bound(h_sq: f64) -> f64 {
    (h_sq * (1.0 - h_sq / 4.0)).max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// Hellinger distances for point process laws
// ---------------------------------------------------------------------------

fn intensity_hash(a: &IntensityFunction, b: &IntensityFunction) -> String {
    format!(
        "{}|{}",
        serde_json::to_string(a).unwrap_or_default(),
        serde_json::to_string(b).unwrap_or_default()
    )
}

/// ∫(√λ₁ − √λ₂)² for two indicator-region intensities on a common domain.
fn intensity_hellinger_integral(
    l1: &IntensityFunction,
    l2: &IntensityFunction,
) -> Result<(f64, f64)> {
    if l1.domain != l2.domain {
        return Err(Error::Validation(
            "intensities live on different domains".into(),
        ));
    }
    let scale_hint = l1.scale.max(l2.scale).max(1.0);
    let f = |x: f64| {
        let w = |lam: &IntensityFunction| {
            let (a, b) = lam.x_range();
            if x < a || x > b {
                return (0.0, (0.0, 0.0));
            }
            let sect = lam.y_interval(x);
            let w = match lam.x_weight {
                crate::samplers::XWeight::DesignDensity => lam.design.density(x),
                crate::samplers::XWeight::BlockConstant(c) => c,
            };
            (lam.scale * w, sect)
        };
        let (w1, (lo1, hi1)) = w(l1);
        let (w2, (lo2, hi2)) = w(l2);
        let len1 = (hi1 - lo1).max(0.0) * if w1 > 0.0 { 1.0 } else { 0.0 };
        let len2 = (hi2 - lo2).max(0.0) * if w2 > 0.0 { 1.0 } else { 0.0 };
        let overlap = if len1 > 0.0 && len2 > 0.0 {
            (hi1.min(hi2) - lo1.max(lo2)).max(0.0)
        } else {
            0.0
        };
        let s1 = w1.max(0.0).sqrt();
        let s2 = w2.max(0.0).sqrt();
        (s1 - s2) * (s1 - s2) * overlap + w1 * (len1 - overlap) + w2 * (len2 - overlap)
    };
    let r = integrate(f, 0.0, 1.0, 1e-10 * scale_hint)?;
    Ok((r.value.max(0.0), r.abs_error))
}

/// Squared Hellinger distance between the laws of two Poisson point
/// processes: `H² = 2(1 − exp(−∫(√λ₁ − √λ₂)²/2))`.
pub fn hellinger_ppp(l1: &IntensityFunction, l2: &IntensityFunction) -> Result<DistanceReport> {
    let (i, err) = intensity_hellinger_integral(l1, l2)?;
    let value = 2.0 * (1.0 - (-i / 2.0).exp());
    Ok(DistanceReport::new(
        DistanceKind::HellingerSq,
        value,
        DistanceMethod::Quadrature,
        err,
        &intensity_hash(l1, l2),
    ))
}

/// Squared Hellinger distance between the joint laws of the process pairs
/// `(X₁, X₂)` under two parameters (the integrals add in the exponent).
pub fn hellinger_ppp_pair(
    under_a: (&IntensityFunction, &IntensityFunction),
    under_b: (&IntensityFunction, &IntensityFunction),
) -> Result<DistanceReport> {
    let (i1, e1) = intensity_hellinger_integral(under_a.0, under_b.0)?;
    let (i2, e2) = intensity_hellinger_integral(under_a.1, under_b.1)?;
    let value = 2.0 * (1.0 - (-(i1 + i2) / 2.0).exp());
    Ok(DistanceReport::new(
        DistanceKind::HellingerSq,
        value,
        DistanceMethod::Quadrature,
        e1 + e2,
        &format!(
            "{}|{}",
            intensity_hash(under_a.0, under_b.0),
            intensity_hash(under_a.1, under_b.1)
        ),
    ))
}

/// Exact display for boundary pairs:
/// `H² = 2(1 − exp(−(n/2)·J·∫|θ₁ − θ₂| f_D))` with `J = f_ε(-1) + f_ε(1)`.
pub fn hellinger_boundary_closed_form(
    theta1: &ParameterFunction,
    theta2: &ParameterFunction,
    n: f64,
    j_total: f64,
    design: &DesignSpec,
) -> Result<DistanceReport> {
    if j_total <= 0.0 {
        return Err(Error::Validation(format!(
            "total jump J must be positive, got {j_total}"
        )));
    }
    let l1 = integrate(
        |x| (theta1.eval(x) - theta2.eval(x)).abs() * design.density(x),
        0.0,
        1.0,
        1e-12,
    )?;
    let exponent = 0.5 * n * j_total * l1.value;
    let value = 2.0 * (1.0 - (-exponent).exp());
    Ok(DistanceReport::new(
        DistanceKind::HellingerSq,
        value,
        DistanceMethod::ClosedForm,
        l1.abs_error * n * j_total,
        &format!("boundary|n={n}|J={j_total}"),
    ))
}

/// Squared Hellinger distance between exponential densities with a common
/// endpoint and rates μ₁, μ₂: `2(μ₁−μ₂)²(μ₁+μ₂)⁻¹(√μ₁+√μ₂)⁻²`.
pub fn hellinger_exponential(mu1: f64, mu2: f64) -> Result<f64> {
    if mu1 <= 0.0 || mu2 <= 0.0 {
        return Err(Error::Validation(format!(
            "exponential rates must be positive: {mu1}, {mu2}"
        )));
    }
    let d = mu1 - mu2;
    let s = mu1.sqrt() + mu2.sqrt();
    Ok(2.0 * d * d / ((mu1 + mu2) * s * s))
}

/// Quadrature oracle for [`hellinger_exponential`].
pub fn hellinger_exponential_numeric(mu1: f64, mu2: f64) -> Result<f64> {
    if mu1 <= 0.0 || mu2 <= 0.0 {
        return Err(Error::Validation("rates must be positive".into()));
    }
    let t_max = 60.0 / mu1.min(mu2);
    let f = |x: f64| {
        let a = (mu1 * (-mu1 * x).exp()).sqrt();
        let b = (mu2 * (-mu2 * x).exp()).sqrt();
        (a - b) * (a - b)
    };
    Ok(integrate(f, 0.0, t_max, 1e-11)?.value)
}

// ---------------------------------------------------------------------------
// Block-extreme exponential approximation
// ---------------------------------------------------------------------------

fn w_density_table(f_w: &ErrorDensity, delta0: f64, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    // density (normalized) and CDF of W on [delta0 - 1, delta0 + 1]
    let lo = delta0 - 1.0;
    let dt = 2.0 / n as f64;
    let mut dens: Vec<f64> = (0..=n).map(|i| f_w.phi(lo + i as f64 * dt)).collect();
    let mut cdf = vec![0.0];
    let mut acc = 0.0;
    for i in 0..n {
        acc += 0.5 * (dens[i] + dens[i + 1]) * dt;
        cdf.push(acc);
    }
    let z = acc;
    for d in dens.iter_mut() {
        *d /= z;
    }
    for c in cdf.iter_mut() {
        *c /= z;
    }
    (dens, cdf, z)
}

fn lookup(table: &[f64], lo: f64, dt: f64, x: f64) -> f64 {
    let pos = ((x - lo) / dt).clamp(0.0, (table.len() - 1) as f64);
    let i = (pos.floor() as usize).min(table.len() - 2);
    let frac = pos - i as f64;
    table[i] * (1.0 - frac) + table[i + 1] * frac
}

/// Squared Hellinger distance between the exact joint law of `(min, max)` of
/// `l` draws from the shifted W-density and its product-exponential
/// surrogate, computed as `2 − 2∫√(f₁f₂)` over the support triangle.
pub fn block_extreme_hellinger(l: usize, f_w: &ErrorDensity, delta0: f64) -> Result<f64> {
    if l < 3 {
        return Err(Error::Validation(format!("need block size l ≥ 3, got {l}")));
    }
    let (lo, hi) = (delta0 - 1.0, delta0 + 1.0);
    let grid = 8192;
    let dt = 2.0 / grid as f64;
    let (dens, cdf, _z) = w_density_table(f_w, delta0, grid);
    let lf = l as f64;
    let rate_lo = (lf - 2.0) * dens[0];
    let rate_hi = (lf - 2.0) * dens[grid];
    if rate_lo <= 0.0 || rate_hi <= 0.0 {
        return Err(Error::Validation(
            "W-density must be positive at the support endpoints".into(),
        ));
    }
    let front = (lf * (lf - 1.0) * rate_lo * rate_hi).sqrt();
    let integrand = move |x: f64, y: f64| {
        let fx = lookup(&dens, lo, dt, x);
        let fy = lookup(&dens, lo, dt, y);
        let span = (lookup(&cdf, lo, dt, y) - lookup(&cdf, lo, dt, x)).max(0.0);
        front
            * (fx * fy).max(0.0).sqrt()
            * span.powf((lf - 2.0) / 2.0)
            * (-(rate_lo * (x - lo) + rate_hi * (hi - y)) / 2.0).exp()
    };
    let overlap = integrate_2d(integrand, lo, hi, |x| x, move |_| hi, 1e-8)?;
    Ok((2.0 - 2.0 * overlap.value).clamp(0.0, 2.0))
}

/// The univariate check: squared Hellinger distance between the minimum of
/// `i` uniforms on [0, 1] and an Exp(i) variable (≍ i⁻² as i grows).
pub fn hellinger_min_uniform_vs_exp(i: u32) -> Result<f64> {
    let n = i as f64;
    let f = move |x: f64| {
        let a = (n * (1.0 - x).max(0.0).powf(n - 1.0)).sqrt();
        let b = (n * (-n * x).exp()).sqrt();
        (a - b) * (a - b)
    };
    // direct difference form plus the exponential tail mass beyond 1
    let body = integrate(f, 0.0, 1.0, 1e-14)?.value;
    Ok(body + (-n).exp())
}

/// Hellinger gap between the two x-weight conventions for the boundary
/// intensity, i.e. the exact design density `f_D(x)` versus the block-constant
/// `m·∫_{I_k} f_D` used inside the pipeline, with the same curve boundary.
/// Shrinks at the O(n/m²) order for a Lipschitz design density.
pub fn hellinger_block_approx_gap(
    theta: &ParameterFunction,
    m: usize,
    spec: &ExperimentSpec,
    lower: bool,
) -> Result<f64> {
    let domain = Domain::for_spec(spec);
    let scale = spec.n as f64
        * if lower {
            spec.error.jump_right()
        } else {
            spec.error.jump_left()
        };
    let mut total = 0.0;
    for k in 0..m {
        let (a, b) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
        let w_const = m as f64 * spec.design.mass_on(a, b);
        let f = |x: f64| {
            let height = if lower {
                (theta.eval(x) - domain.y_lo).max(0.0)
            } else {
                (domain.y_hi - theta.eval(x)).max(0.0)
            };
            let s1 = (scale * spec.design.density(x)).sqrt();
            let s2 = (scale * w_const).sqrt();
            (s1 - s2) * (s1 - s2) * height
        };
        total += integrate(f, a, b, 1e-10 * (1.0 + scale))?.value;
    }
    Ok(2.0 * (1.0 - (-total / 2.0).exp()))
}

// ---------------------------------------------------------------------------
// Extreme-law identity
// ---------------------------------------------------------------------------

/// CDF of the lower-process strip extreme under a block-constant boundary at
/// `theta_k`: `P[X_{l,k} ≤ y] = exp(−(θ_k − y)·ρ_k·φ(1))` for y ≤ θ_k.
pub fn extreme_cdf_lower(y: f64, theta_k: f64, rho_phi: f64) -> f64 {
    if y >= theta_k {
        1.0
    } else {
        (-(theta_k - y) * rho_phi).exp()
    }
}

/// CDF of the upper-process strip extreme: `1 − exp(−(y − θ_k)·ρ_k·φ(−1))`.
pub fn extreme_cdf_upper(y: f64, theta_k: f64, rho_phi: f64) -> f64 {
    if y <= theta_k {
        0.0
    } else {
        1.0 - (-(y - theta_k) * rho_phi).exp()
    }
}

/// Result of the pooled extreme-law check.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremeLawReport {
    pub ks: DistanceReport,
    pub blocks: usize,
    /// Fraction of strips that were empty and contributed the truncation atom.
    pub censored_fraction: f64,
}

/// Pools probability-integral transforms of per-block strip extremes against
/// the truncated-exponential laws with `ρ_k = (n/2)·∫_{I_k} f_D`.
///
/// Realizations tagged as lower processes contribute strip maxima, upper
/// processes strip minima. `theta` must be the block-constant parameter the
/// realizations were generated from.
pub fn extreme_law_check(
    realizations: &[PointProcessRealization],
    theta: &ParameterFunction,
    partition: &BlockPartition,
    spec: &ExperimentSpec,
) -> Result<ExtremeLawReport> {
    extreme_law_check_with_scale(realizations, theta, partition, spec, spec.n as f64 / 2.0)
}

/// Same with an explicit intensity scale: `ρ_k = scale·∫_{I_k} f_D` (the full
/// pipeline output superposes two half-scale passes, so its extremes follow
/// the `scale = n` law).
pub fn extreme_law_check_with_scale(
    realizations: &[PointProcessRealization],
    theta: &ParameterFunction,
    partition: &BlockPartition,
    spec: &ExperimentSpec,
    scale: f64,
) -> Result<ExtremeLawReport> {
    let m = partition.m;
    let mut pit = Vec::with_capacity(realizations.len() * m);
    let mut censored = 0usize;
    for r in realizations {
        let lower = match r.process_tag {
            ProcessTag::X1LowerRegion | ProcessTag::Xl => true,
            ProcessTag::X2UpperRegion | ProcessTag::Xu => false,
            ProcessTag::Other => {
                return Err(Error::Validation(
                    "untagged realization in extreme-law check".into(),
                ))
            }
        };
        for k in 0..m {
            let (a, b) = partition.interval(k);
            let rho = scale * spec.design.mass_on(a, b);
            let theta_k = theta.eval(partition.center(k));
            let rho_phi = rho
                * if lower {
                    spec.error.jump_right()
                } else {
                    spec.error.jump_left()
                };
            if lower {
                match r.max_y_in_strip(a, b) {
                    Some(y) => pit.push(extreme_cdf_lower(y, theta_k, rho_phi).min(1.0)),
                    None => {
                        censored += 1;
                        pit.push(extreme_cdf_lower(r.domain.y_lo, theta_k, rho_phi));
                    }
                }
            } else {
                match r.min_y_in_strip(a, b) {
                    Some(y) => pit.push(extreme_cdf_upper(y, theta_k, rho_phi).min(1.0)),
                    None => {
                        censored += 1;
                        pit.push(extreme_cdf_upper(r.domain.y_hi, theta_k, rho_phi));
                    }
                }
            }
        }
    }
    let blocks = pit.len();
    if blocks == 0 {
        return Err(Error::Validation("no blocks to check".into()));
    }
    let ks = crate::gof::ks_uniform(&pit);
    Ok(ExtremeLawReport {
        ks: DistanceReport::new(
            DistanceKind::Ks,
            ks,
            DistanceMethod::MonteCarlo,
            crate::gof::ks_critical(blocks, 0.01),
            &format!("extreme-law|m={m}|scale={scale}"),
        ),
        blocks,
        censored_fraction: censored as f64 / blocks as f64,
    })
}

// ---------------------------------------------------------------------------
// Lower-bound construction
// ---------------------------------------------------------------------------

/// The two-point lower-bound pair: θ₁ ≡ 0 and the bump
/// `θ₂(x) = L·h^s·K((x−x₀)/h)` with `h = (L·n·J·f_D(x₀))^{−1/(s+1)}`.
#[derive(Debug, Clone)]
pub struct LowerBoundPair {
    pub theta1: ParameterFunction,
    pub theta2: ParameterFunction,
    pub separation: f64,
    pub hellinger_sq: f64,
    pub h: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn lower_bound_pair(
    s: f64,
    l_norm: f64,
    k: usize,
    n: f64,
    j_total: f64,
    design: &DesignSpec,
    x0: f64,
    kernel: &Kernel,
) -> Result<LowerBoundPair> {
    if s <= 0.0 || s >= 3.0 {
        return Err(Error::Validation(format!(
            "regularity s must lie in (0, 3), got {s}"
        )));
    }
    if l_norm <= 0.0 || n <= 0.0 || j_total <= 0.0 {
        return Err(Error::Validation("L, n and J must be positive".into()));
    }
    if k > s.floor() as usize || k > 2 {
        return Err(Error::Validation(format!(
            "derivative order k = {k} exceeds floor(s) = {}",
            s.floor()
        )));
    }
    // kernel must lie in the Hölder-s unit ball with support [-1/2, 1/2]
    let norm = kernel.holder_norm(s, 4000);
    if norm > 1.0 + 1e-9 {
        return Err(Error::Validation(format!(
            "kernel Hölder-{s} norm {norm:.4} exceeds 1"
        )));
    }
    for &u in &[0.5 + 1e-6, 0.75, 1.0, -0.5 - 1e-6, -0.75] {
        if kernel.eval(u) != 0.0 {
            return Err(Error::Validation(
                "kernel support exceeds [-1/2, 1/2]".into(),
            ));
        }
    }
    let k_at_zero = kernel.deriv_k(k, 0.0);
    if k_at_zero <= 0.0 {
        return Err(Error::Validation(format!(
            "kernel needs K^({k})(0) > 0, got {k_at_zero}"
        )));
    }
    let fd0 = design.density(x0);
    let h = (l_norm * n * j_total * fd0).powf(-1.0 / (s + 1.0));
    if x0 - h / 2.0 < 0.0 || x0 + h / 2.0 > 1.0 {
        return Err(Error::Validation(format!(
            "bump support [{:.4}, {:.4}] leaves [0, 1]; n too small for interior x0 = {x0}",
            x0 - h / 2.0,
            x0 + h / 2.0
        )));
    }
    let alpha = {
        let frac = s - s.floor();
        if frac > 0.0 {
            frac
        } else {
            1.0
        }
    };
    let theta1 =
        ParameterFunction::new(ParamFamily::Polynomial { coeffs: vec![0.0] }, l_norm, alpha)?;
    let theta2 = ParameterFunction::new(
        ParamFamily::Bump {
            level: l_norm,
            width: h,
            s,
            x0,
            kernel: *kernel,
        },
        l_norm,
        alpha,
    )?;
    let separation = k_at_zero
        * l_norm.powf((k as f64 + 1.0) / (s + 1.0))
        * (n * j_total * fd0).powf(-(s - k as f64) / (s + 1.0));
    // cross-check against the direct derivative of the bump at x0
    let direct = l_norm * h.powf(s - k as f64) * k_at_zero;
    if (separation - direct).abs() > 1e-10 * separation.abs().max(1e-300) {
        return Err(Error::Numerical(format!(
            "separation identity violated: {separation:.17e} vs {direct:.17e}"
        )));
    }
    let hell = hellinger_boundary_closed_form(&theta1, &theta2, n, j_total, design)?;
    Ok(LowerBoundPair {
        theta1,
        theta2,
        separation,
        hellinger_sq: hell.value,
        h,
    })
}

// ---------------------------------------------------------------------------
// Counterexample (regularity one)
// ---------------------------------------------------------------------------

/// Power of the support test in the point process experiment against the
/// invisible-at-design-points alternative `f_n(x) = C(π(n−1))⁻¹ sin(π(n−1)x)`.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexamplePower {
    pub empirical_power: f64,
    pub theory_power: f64,
    pub reps: usize,
    /// Mass of the test regions under θ ≡ 0 (exactly zero by region geometry).
    pub null_mass: f64,
}

pub fn counterexample_power(
    c: f64,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<CounterexamplePower> {
    if n < 2 || reps == 0 {
        return Err(Error::Validation(
            "counterexample needs n ≥ 2 and reps ≥ 1".into(),
        ));
    }
    let nm1 = (n - 1) as f64;
    let amp = c / (std::f64::consts::PI * nm1);
    let freq = std::f64::consts::PI * nm1;
    let theta = ParameterFunction::new(
        ParamFamily::Sine {
            amplitude: amp,
            frequency: freq,
        },
        amp.abs(),
        1.0,
    )?;
    let design = DesignSpec::uniform();
    // unit jump sizes f_ε(±1) = 1 make the exponent n·∫|f_n| exact
    let scale = n as f64;
    let pad = 2.0 * amp.abs() + 1e-9;
    let domain = Domain::new(-pad, pad)?;
    // null geometry: the X₁ test region {y > 0} has zero mass under θ ≡ 0
    let zero = ParameterFunction::zero(amp.abs(), 1.0);
    let null_mass = integrate(|x| zero.eval(x).max(0.0), 0.0, 1.0, 1e-14)?.value * scale * 2.0;
    let l1 = IntensityFunction::boundary_lower(theta.clone(), design, scale, domain);
    let l2 = IntensityFunction::boundary_upper(theta.clone(), design, scale, domain);
    let hits: usize = (0..reps)
        .into_par_iter()
        .map(|i| {
            let s1 = derive_seed(seed, "counterexample-x1", i as u64);
            let s2 = derive_seed(seed, "counterexample-x2", i as u64);
            let x1 = sample_ppp(&l1, s1).expect("lower process");
            let x2 = sample_ppp(&l2, s2).expect("upper process");
            let reject =
                x1.points.iter().any(|&(_, y)| y > 0.0) || x2.points.iter().any(|&(_, y)| y < 0.0);
            usize::from(reject)
        })
        .sum();
    let theory =
        1.0 - (-2.0 * c / (std::f64::consts::PI * std::f64::consts::PI) * n as f64 / nm1).exp();
    Ok(CounterexamplePower {
        empirical_power: hits as f64 / reps as f64,
        theory_power: theory,
        reps,
        null_mass,
    })
}

// ---------------------------------------------------------------------------
// Rate studies
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateExperiment {
    Regression,
    PointProcess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateTarget {
    Value,
    Derivative,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateStudyConfig {
    pub experiment: RateExperiment,
    pub target: RateTarget,
    pub x0: f64,
    pub bandwidth_const: f64,
    pub theory_slope: f64,
}

/// Monte Carlo risks across sample sizes with the fitted log-log slope.
#[derive(Debug, Clone, Serialize)]
pub struct RateStudyResult {
    pub ns: Vec<usize>,
    pub risks: Vec<f64>,
    pub ses: Vec<f64>,
    pub slope: f64,
    pub slope_se: f64,
    pub theory_slope: f64,
    pub dropped: Vec<usize>,
}

impl RateStudyResult {
    pub fn csv(&self) -> String {
        let mut out = String::from("n,risk,se\n");
        for ((n, r), s) in self.ns.iter().zip(&self.risks).zip(&self.ses) {
            out.push_str(&format!("{},{},{}\n", n, r, s));
        }
        out
    }
}

fn wls_slope(ts: &[f64], ys: &[f64], ws: &[f64]) -> (f64, f64) {
    let sw: f64 = ws.iter().sum();
    let tbar = ts.iter().zip(ws).map(|(t, w)| t * w).sum::<f64>() / sw;
    let ybar = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = ts
        .iter()
        .zip(ws)
        .map(|(t, w)| w * (t - tbar) * (t - tbar))
        .sum();
    if sxx <= 0.0 {
        return (0.0, f64::INFINITY);
    }
    let sxy: f64 = ts
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((t, y), w)| w * (t - tbar) * (y - ybar))
        .sum();
    (sxy / sxx, (1.0 / sxx).sqrt())
}

/// Runs the pilot estimator at `x0` over geometrically spaced sample sizes
/// and fits the log-log risk slope by weighted least squares.
pub fn rate_study(
    cfg: &RateStudyConfig,
    theta: &ParameterFunction,
    spec_template: &ExperimentSpec,
    ns: &[usize],
    reps: usize,
    seed: u64,
) -> Result<RateStudyResult> {
    if ns.len() < 3 {
        return Err(Error::Validation(
            "rate study needs at least 3 sample sizes".into(),
        ));
    }
    let truth = match cfg.target {
        RateTarget::Value => theta.eval(cfg.x0),
        RateTarget::Derivative => theta.deriv1(cfg.x0),
    };
    let mut kept_ns = Vec::new();
    let mut risks = Vec::new();
    let mut ses = Vec::new();
    let mut dropped = Vec::new();
    for &n in ns {
        let mut spec = spec_template.clone();
        spec.n = n;
        let h = pilot_bandwidth(n, spec.alpha, cfg.bandwidth_const);
        let gamma = holder_band(h, spec.c_theta);
        let errs: Vec<Option<f64>> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = derive_seed(seed, "rate-study", (n as u64) << 24 | rep as u64);
                let fit = match cfg.experiment {
                    RateExperiment::Regression => {
                        let s = sample_regression(theta, &spec, rep_seed).ok()?;
                        admissible_fit_regression(&s, cfg.x0, h, gamma, spec.alpha).ok()?
                    }
                    RateExperiment::PointProcess => {
                        let domain = Domain::for_spec(&spec);
                        let lam1 = IntensityFunction::boundary_lower(
                            theta.clone(),
                            spec.design,
                            n as f64 * spec.error.jump_right(),
                            domain,
                        );
                        let lam2 = IntensityFunction::boundary_upper(
                            theta.clone(),
                            spec.design,
                            n as f64 * spec.error.jump_left(),
                            domain,
                        );
                        let x1 = sample_ppp(&lam1, derive_seed(rep_seed, "x1", 0)).ok()?;
                        let x2 = sample_ppp(&lam2, derive_seed(rep_seed, "x2", 0)).ok()?;
                        admissible_fit_ppp(&x1, &x2, cfg.x0, h, gamma, spec.alpha).ok()?
                    }
                };
                let est = match cfg.target {
                    RateTarget::Value => fit.eval(cfg.x0),
                    RateTarget::Derivative => fit.deriv(cfg.x0),
                };
                Some((est - truth) * (est - truth))
            })
            .collect();
        let ok: Vec<f64> = errs.iter().flatten().copied().collect();
        if ok.len() < reps / 2 || ok.len() < 3 {
            dropped.push(n);
            continue;
        }
        let mean = ok.iter().sum::<f64>() / ok.len() as f64;
        let var =
            ok.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (ok.len().max(2) - 1) as f64;
        kept_ns.push(n);
        risks.push(mean);
        ses.push((var / ok.len() as f64).sqrt());
    }
    if kept_ns.len() < 3 {
        return Err(Error::Numerical(format!(
            "rate study kept only {} sample sizes (dropped {:?})",
            kept_ns.len(),
            dropped
        )));
    }
    if risks.iter().any(|&r| r <= 0.0) {
        return Err(Error::Numerical("nonpositive Monte Carlo risk".into()));
    }
    let degenerate = risks
        .windows(2)
        .all(|w| (w[0] - w[1]).abs() <= f64::EPSILON * w[0].abs());
    let (slope, slope_se) = if degenerate {
        (0.0, f64::INFINITY)
    } else {
        let ts: Vec<f64> = kept_ns.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = risks.iter().map(|&r| r.ln()).collect();
        // Var(log risk) ≈ (se/risk)²
        let ws: Vec<f64> = risks
            .iter()
            .zip(&ses)
            .map(|(r, s)| (r / s) * (r / s))
            .collect();
        wls_slope(&ts, &ys, &ws)
    };
    Ok(RateStudyResult {
        ns: kept_ns,
        risks,
        ses,
        slope,
        slope_se,
        theory_slope: cfg.theory_slope,
        dropped,
    })
}
