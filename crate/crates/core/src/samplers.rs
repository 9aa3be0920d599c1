//! Seeded samplers for both experiments.
//!
//! The regression experiment draws `Y_j = θ(x_j) + ε_j` on the deterministic
//! quantile design. The point process experiment draws planar Poisson point
//! processes on the rectangle `S = [0,1] × [-C_Θ-1, C_Θ+1]` whose intensity
//! is an indicator region scaled by the design density and the endpoint jump
//! of the error density. Two constructions are provided: the two-stage
//! rejection sampler (count, then conditional i.i.d. placement) and the
//! sequential exponential-spacings construction; they generate the same law.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::model::{DesignSpec, ExperimentSpec, ParameterFunction};
use crate::quad::integrate;
use crate::rng::stream;
use crate::{Error, Result};

/// Vertical bounds of the observation rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Domain {
    pub fn new(y_lo: f64, y_hi: f64) -> Result<Self> {
        if !(y_lo.is_finite() && y_hi.is_finite() && y_lo <= y_hi) {
            return Err(Error::Validation(format!(
                "invalid domain [{y_lo}, {y_hi}]"
            )));
        }
        Ok(Domain { y_lo, y_hi })
    }

    pub fn for_spec(spec: &ExperimentSpec) -> Self {
        let (y_lo, y_hi) = spec.y_bounds();
        Domain { y_lo, y_hi }
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }
}

/// Which process a realization belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessTag {
    X1LowerRegion,
    X2UpperRegion,
    Xl,
    Xu,
    Other,
}

impl ProcessTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProcessTag::X1LowerRegion => "x1",
            ProcessTag::X2UpperRegion => "x2",
            ProcessTag::Xl => "xl",
            ProcessTag::Xu => "xu",
            ProcessTag::Other => "other",
        }
    }
}

impl std::str::FromStr for ProcessTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "x1" => ProcessTag::X1LowerRegion,
            "x2" => ProcessTag::X2UpperRegion,
            "xl" => ProcessTag::Xl,
            "xu" => ProcessTag::Xu,
            "other" => ProcessTag::Other,
            _ => return Err(Error::Io(format!("unknown process tag {s:?}"))),
        })
    }
}

/// Per-point bookkeeping carried through the pipeline: which transform pass
/// produced the point and whether it is the deterministic block extreme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PointMark {
    pub pass: u8,
    pub deterministic_extreme: bool,
}

/// A finite planar point pattern with its generating-intensity record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointProcessRealization {
    pub points: Vec<(f64, f64)>,
    pub marks: Vec<PointMark>,
    pub process_tag: ProcessTag,
    pub intensity_mass: f64,
    pub seed: u64,
    pub domain: Domain,
}

impl PointProcessRealization {
    pub fn empty(tag: ProcessTag, domain: Domain, seed: u64) -> Self {
        PointProcessRealization {
            points: Vec::new(),
            marks: Vec::new(),
            process_tag: tag,
            intensity_mass: 0.0,
            seed,
            domain,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points inside an axis-aligned box.
    pub fn count_in(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> usize {
        self.points
            .iter()
            .filter(|&&(x, y)| x >= x_lo && x < x_hi && y >= y_lo && y < y_hi)
            .count()
    }

    /// Largest y among points with x in `[a, b)`; `None` when the strip is empty.
    pub fn max_y_in_strip(&self, a: f64, b: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|&&(x, _)| x >= a && x < b)
            .map(|&(_, y)| y)
            .fold(None, |acc, y| Some(acc.map_or(y, |m: f64| m.max(y))))
    }

    /// Smallest y among points with x in `[a, b)`.
    pub fn min_y_in_strip(&self, a: f64, b: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|&&(x, _)| x >= a && x < b)
            .map(|&(_, y)| y)
            .fold(None, |acc, y| Some(acc.map_or(y, |m: f64| m.min(y))))
    }
}

// ---------------------------------------------------------------------------
// Intensity functions
// ---------------------------------------------------------------------------

/// Horizontal weight of an intensity: the design density itself, or its
/// per-block average `m·∫_{I_k} f_D` (the block-constant form used inside the
/// equivalence pipeline).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum XWeight {
    DesignDensity,
    BlockConstant(f64),
}

/// Vertical section of the intensity region at each x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VerticalRegion {
    BelowCurve(ParameterFunction),
    AboveCurve(ParameterFunction),
    /// y ≤ level − slope·(center − x)
    BelowTiltedLine {
        level: f64,
        slope: f64,
        center: f64,
    },
    /// y ≥ level − slope·(center − x)
    AboveTiltedLine {
        level: f64,
        slope: f64,
        center: f64,
    },
    Band {
        y_lo: f64,
        y_hi: f64,
    },
}

/// An indicator-region intensity λ(x, y) = scale · w(x) · 1{(x,y) ∈ region},
/// truncated to the rectangle `[x-range] × [domain]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityFunction {
    pub design: DesignSpec,
    pub x_weight: XWeight,
    pub region: VerticalRegion,
    pub scale: f64,
    /// Optional x-restriction (a block interval I_k).
    pub block: Option<(f64, f64)>,
    pub domain: Domain,
}

impl IntensityFunction {
    /// λ₁ of the boundary experiment: points below θ at scale `scale`
    /// (e.g. n·f_ε(1), or n/2·f_ε(1) after splitting).
    pub fn boundary_lower(
        theta: ParameterFunction,
        design: DesignSpec,
        scale: f64,
        domain: Domain,
    ) -> Self {
        IntensityFunction {
            design,
            x_weight: XWeight::DesignDensity,
            region: VerticalRegion::BelowCurve(theta),
            scale,
            block: None,
            domain,
        }
    }

    /// λ₂ of the boundary experiment: points above θ.
    pub fn boundary_upper(
        theta: ParameterFunction,
        design: DesignSpec,
        scale: f64,
        domain: Domain,
    ) -> Self {
        IntensityFunction {
            design,
            x_weight: XWeight::DesignDensity,
            region: VerticalRegion::AboveCurve(theta),
            scale,
            block: None,
            domain,
        }
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.block.unwrap_or((0.0, 1.0))
    }

    fn weight(&self, x: f64) -> f64 {
        match self.x_weight {
            XWeight::DesignDensity => self.design.density(x),
            XWeight::BlockConstant(w) => w,
        }
    }

    /// Vertical section `region ∩ domain` at x (may be empty: hi ≤ lo).
    pub fn y_interval(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = match &self.region {
            VerticalRegion::BelowCurve(theta) => (self.domain.y_lo, theta.eval(x)),
            VerticalRegion::AboveCurve(theta) => (theta.eval(x), self.domain.y_hi),
            VerticalRegion::BelowTiltedLine {
                level,
                slope,
                center,
            } => (self.domain.y_lo, level - slope * (center - x)),
            VerticalRegion::AboveTiltedLine {
                level,
                slope,
                center,
            } => (level - slope * (center - x), self.domain.y_hi),
            VerticalRegion::Band { y_lo, y_hi } => (*y_lo, *y_hi),
        };
        (lo.max(self.domain.y_lo), hi.min(self.domain.y_hi))
    }

    /// Pointwise intensity value.
    pub fn lambda(&self, x: f64, y: f64) -> f64 {
        let (a, b) = self.x_range();
        if x < a || x > b {
            return 0.0;
        }
        let (lo, hi) = self.y_interval(x);
        if y < lo || y > hi {
            return 0.0;
        }
        self.scale * self.weight(x)
    }

    /// Total mass ∫λ by one-dimensional quadrature over x.
    pub fn mass(&self) -> Result<f64> {
        if self.scale < 0.0 {
            return Err(Error::Validation(
                "intensity scale must be nonnegative".into(),
            ));
        }
        let (a, b) = self.x_range();
        let f = |x: f64| {
            let (lo, hi) = self.y_interval(x);
            self.scale * self.weight(x) * (hi - lo).max(0.0)
        };
        Ok(integrate(f, a, b, 1e-10 * (1.0 + self.scale))
            .map(|r| r.value)?
            .max(0.0))
    }

    fn default_tag(&self) -> ProcessTag {
        match self.region {
            VerticalRegion::BelowCurve(_) => ProcessTag::X1LowerRegion,
            VerticalRegion::AboveCurve(_) => ProcessTag::X2UpperRegion,
            VerticalRegion::BelowTiltedLine { .. } => ProcessTag::Xl,
            VerticalRegion::AboveTiltedLine { .. } => ProcessTag::Xu,
            VerticalRegion::Band { .. } => ProcessTag::Other,
        }
    }
}

// ---------------------------------------------------------------------------
// Regression experiment
// ---------------------------------------------------------------------------

/// One realization of the regression experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSample {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub spec_ref: u64,
}

/// Draws `Y_j = θ(x_j) + ε_j` with i.i.d. errors from the spec's density.
/// θ must pass validation for its declared constants.
pub fn sample_regression(
    theta: &ParameterFunction,
    spec: &ExperimentSpec,
    seed: u64,
) -> Result<RegressionSample> {
    if (theta.c_theta - spec.c_theta).abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "theta C_Θ = {} differs from spec C_Θ = {}",
            theta.c_theta, spec.c_theta
        )));
    }
    let report = crate::model::validate_parameter(theta, 1000);
    if !report.passed() {
        return Err(Error::Validation(format!(
            "parameter fails validation:\n{report}"
        )));
    }
    let xs = crate::model::design_points(spec.n, &spec.design)?;
    let mut rng = stream(seed, "regression", 0);
    let ys = xs
        .iter()
        .map(|&x| theta.eval(x) + spec.error.sample(&mut rng))
        .collect();
    Ok(RegressionSample {
        xs,
        ys,
        n: spec.n,
        seed,
        spec_ref: spec.spec_hash(),
    })
}

// ---------------------------------------------------------------------------
// Point process samplers
// ---------------------------------------------------------------------------

fn poisson_count<R: Rng>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean <= 0.0 {
        return Ok(0);
    }
    if !mean.is_finite() {
        return Err(Error::Validation(format!(
            "Poisson mean must be finite, got {mean}"
        )));
    }
    let d = rand_distr::Poisson::new(mean)
        .map_err(|e| Error::Numerical(format!("poisson({mean}): {e}")))?;
    Ok(d.sample(rng) as usize)
}

/// Two-stage sampler: `N ~ Poisson(∫λ)`, then `N` i.i.d. points from λ/∫λ by
/// rejection from the bounding box of the region.
pub fn sample_ppp(lambda: &IntensityFunction, seed: u64) -> Result<PointProcessRealization> {
    let mass = lambda.mass()?;
    let tag = lambda.default_tag();
    let mut rng = stream(seed, "ppp", 0);
    let mut out = PointProcessRealization::empty(tag, lambda.domain, seed);
    out.intensity_mass = mass;
    if mass <= 0.0 {
        return Ok(out);
    }
    let n = poisson_count(mass, &mut rng)?;
    let (a, b) = lambda.x_range();
    let (u_lo, u_hi) = (lambda.design.cdf(a), lambda.design.cdf(b));
    let mut proposals = 0usize;
    let budget = 1000 * n + 100_000;
    while out.points.len() < n {
        proposals += 1;
        if proposals > budget {
            return Err(Error::Numerical(format!(
                "rejection sampler stalled: {} of {n} points after {proposals} proposals",
                out.points.len()
            )));
        }
        let x = match lambda.x_weight {
            XWeight::DesignDensity => lambda.design.quantile(rng.gen_range(u_lo..u_hi)),
            XWeight::BlockConstant(_) => rng.gen_range(a..b),
        };
        let y = rng.gen_range(lambda.domain.y_lo..lambda.domain.y_hi);
        let (lo, hi) = lambda.y_interval(x);
        if y >= lo && y <= hi {
            out.points.push((x, y));
            out.marks.push(PointMark::default());
        }
    }
    Ok(out)
}

/// Which boundary process to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// X₁: points below θ, intensity scale n·f_ε(1).
    Lower,
    /// X₂: points above θ, intensity scale n·f_ε(-1).
    Upper,
}

/// Sequential construction: design-distributed x's with cumulative unit-mean
/// exponential spacings from the boundary; points outside S are discarded.
/// Distributionally identical to [`sample_ppp`] with the matching boundary
/// intensity restricted to S.
pub fn sample_ppp_sequential(
    theta: &ParameterFunction,
    spec: &ExperimentSpec,
    side: Side,
    seed: u64,
) -> Result<PointProcessRealization> {
    let domain = Domain::for_spec(spec);
    let (rate, tag) = match side {
        Side::Lower => (
            spec.n as f64 * spec.error.jump_right(),
            ProcessTag::X1LowerRegion,
        ),
        Side::Upper => (
            spec.n as f64 * spec.error.jump_left(),
            ProcessTag::X2UpperRegion,
        ),
    };
    let mut out = PointProcessRealization::empty(tag, domain, seed);
    if rate <= 0.0 {
        return Ok(out);
    }
    let lam = match side {
        Side::Lower => IntensityFunction::boundary_lower(theta.clone(), spec.design, rate, domain),
        Side::Upper => IntensityFunction::boundary_upper(theta.clone(), spec.design, rate, domain),
    };
    out.intensity_mass = lam.mass()?;
    let mut rng = stream(seed, "ppp-seq", 0);
    // Depth below (above) the curve where no point of S can live any more.
    let max_depth = domain.height();
    let mut depth = 0.0f64;
    loop {
        let spacing: f64 = rand_distr::Exp1.sample(&mut rng);
        depth += spacing / rate;
        if depth > max_depth {
            break;
        }
        let x = spec.design.quantile(rng.gen::<f64>());
        let y = match side {
            Side::Lower => theta.eval(x) - depth,
            Side::Upper => theta.eval(x) + depth,
        };
        if y >= domain.y_lo && y <= domain.y_hi {
            out.points.push((x, y));
            out.marks.push(PointMark::default());
        }
    }
    Ok(out)
}

/// Samples the block-constant boundary process: on each of `m` blocks the
/// intensity is `m·φ(±1)·ρ_k` on `I_k × [−C_Θ−1, θ(ξ_k)]` (lower side; the
/// mirror image above for the upper side), with `ρ_k = scale·∫_{I_k} f_D`.
/// This is the step-function experiment whose strip extremes follow the
/// truncated exponential laws exactly.
pub fn sample_ppp_blockwise(
    theta: &ParameterFunction,
    m: usize,
    spec: &ExperimentSpec,
    side: Side,
    scale: f64,
    seed: u64,
) -> Result<PointProcessRealization> {
    if m == 0 {
        return Err(Error::Validation("blockwise sampler needs m ≥ 1".into()));
    }
    let domain = Domain::for_spec(spec);
    let (phi, tag) = match side {
        Side::Lower => (spec.error.jump_right(), ProcessTag::Xl),
        Side::Upper => (spec.error.jump_left(), ProcessTag::Xu),
    };
    let mut out = PointProcessRealization::empty(tag, domain, seed);
    let mut rng = stream(seed, "ppp-blockwise", 0);
    for k in 0..m {
        let (a, b) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
        let rho = scale * spec.design.mass_on(a, b);
        let level = theta.eval((a + b) / 2.0);
        let (y_lo, y_hi) = match side {
            Side::Lower => (domain.y_lo, level),
            Side::Upper => (level, domain.y_hi),
        };
        if y_hi <= y_lo {
            continue;
        }
        let mass = phi * rho * (y_hi - y_lo);
        let count = poisson_count(mass, &mut rng)?;
        out.intensity_mass += mass;
        for _ in 0..count {
            let x = rng.gen_range(a..b);
            let y = rng.gen_range(y_lo..y_hi);
            out.points.push((x, y));
            out.marks.push(PointMark::default());
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// CSV serialization
// ---------------------------------------------------------------------------

/// Regression sample as CSV: comment header with seed, n and spec hash, then
/// `j,x,y` rows at full round-trip precision.
pub fn regression_to_csv(s: &RegressionSample) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# seed={} n={} spec={:016x}\n",
        s.seed, s.n, s.spec_ref
    ));
    out.push_str("j,x,y\n");
    for (j, (x, y)) in s.xs.iter().zip(&s.ys).enumerate() {
        out.push_str(&format!("{},{},{}\n", j + 1, x, y));
    }
    out
}

pub fn regression_from_csv(text: &str) -> Result<RegressionSample> {
    let mut seed = 0u64;
    let mut spec_ref = 0u64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line == "j,x,y" {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    match k {
                        "seed" => {
                            seed = v.parse().map_err(|_| Error::Io(format!("bad seed {v}")))?
                        }
                        "spec" => {
                            spec_ref = u64::from_str_radix(v, 16)
                                .map_err(|_| Error::Io(format!("bad spec hash {v}")))?
                        }
                        _ => {}
                    }
                }
            }
            continue;
        }
        let mut parts = line.split(',');
        let _j = parts.next();
        let x: f64 = parts
            .next()
            .ok_or_else(|| Error::Io("missing x".into()))?
            .parse()
            .map_err(|e| Error::Io(format!("bad x: {e}")))?;
        let y: f64 = parts
            .next()
            .ok_or_else(|| Error::Io("missing y".into()))?
            .parse()
            .map_err(|e| Error::Io(format!("bad y: {e}")))?;
        xs.push(x);
        ys.push(y);
    }
    let n = xs.len();
    if n == 0 {
        return Err(Error::Io("empty regression CSV".into()));
    }
    Ok(RegressionSample {
        xs,
        ys,
        n,
        seed,
        spec_ref,
    })
}

/// Point pattern as CSV. With `with_marks` the pipeline's pass number and
/// deterministic-extreme flag are appended to each row.
pub fn ppp_to_csv(p: &PointProcessRealization, spec_ref: u64, with_marks: bool) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# seed={} n={} spec={:016x} mass={} y_lo={} y_hi={}\n",
        p.seed,
        p.points.len(),
        spec_ref,
        p.intensity_mass,
        p.domain.y_lo,
        p.domain.y_hi
    ));
    out.push_str(if with_marks {
        "tag,x,y,pass,extreme\n"
    } else {
        "tag,x,y\n"
    });
    for (i, (x, y)) in p.points.iter().enumerate() {
        if with_marks {
            let m = p.marks.get(i).copied().unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.process_tag.as_str(),
                x,
                y,
                m.pass,
                u8::from(m.deterministic_extreme)
            ));
        } else {
            out.push_str(&format!("{},{},{}\n", p.process_tag.as_str(), x, y));
        }
    }
    out
}

/// Parses the CSV written by [`ppp_to_csv`] (with or without mark columns).
pub fn ppp_from_csv(text: &str) -> Result<PointProcessRealization> {
    let mut seed = 0u64;
    let mut mass = 0.0f64;
    let (mut y_lo, mut y_hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut tag = ProcessTag::Other;
    let mut points = Vec::new();
    let mut marks = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("tag,") {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for kv in rest.split_whitespace() {
                if let Some((key, v)) = kv.split_once('=') {
                    match key {
                        "seed" => {
                            seed = v.parse().map_err(|_| Error::Io(format!("bad seed {v}")))?
                        }
                        "mass" => {
                            mass = v.parse().map_err(|_| Error::Io(format!("bad mass {v}")))?
                        }
                        "y_lo" => {
                            y_lo = v.parse().map_err(|_| Error::Io(format!("bad y_lo {v}")))?
                        }
                        "y_hi" => {
                            y_hi = v.parse().map_err(|_| Error::Io(format!("bad y_hi {v}")))?
                        }
                        _ => {}
                    }
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 3 {
            return Err(Error::Io(format!("short point row: {line:?}")));
        }
        tag = fields[0].parse()?;
        let x: f64 = fields[1]
            .parse()
            .map_err(|e| Error::Io(format!("bad x: {e}")))?;
        let y: f64 = fields[2]
            .parse()
            .map_err(|e| Error::Io(format!("bad y: {e}")))?;
        points.push((x, y));
        if fields.len() >= 5 {
            marks.push(PointMark {
                pass: fields[3].parse().unwrap_or(0),
                deterministic_extreme: fields[4] == "1",
            });
        } else {
            marks.push(PointMark::default());
        }
    }
    if !(y_lo.is_finite() && y_hi.is_finite()) {
        return Err(Error::Io("point CSV misses domain header".into()));
    }
    Ok(PointProcessRealization {
        points,
        marks,
        process_tag: tag,
        intensity_mass: mass,
        seed,
        domain: Domain::new(y_lo, y_hi)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ErrorDensity, ErrorFamily, ParamFamily};
    use approx::assert_abs_diff_eq;

    fn spec_uniform(n: usize, c_theta: f64) -> ExperimentSpec {
        ExperimentSpec::new(
            n,
            c_theta,
            1.0,
            DesignSpec::uniform(),
            ErrorDensity::uniform(),
        )
        .unwrap()
    }

    #[test]
    fn error_sample_mean_matches_first_moment() {
        let e = ErrorDensity::new(ErrorFamily::LinearTilt { tilt: 0.4 });
        let oracle = integrate(|t| t * e.phi(t), -1.0, 1.0, 1e-12).unwrap().value;
        let mut rng = stream(42, "moments", 0);
        let m = 1_000_000;
        let mean: f64 = (0..m).map(|_| e.sample(&mut rng)).sum::<f64>() / m as f64;
        assert!((mean - oracle).abs() < 0.004, "mean {mean} vs {oracle}");
    }

    #[test]
    fn one_sided_error_ks() {
        let e = ErrorDensity::new(ErrorFamily::OneSidedLinear);
        let cdf = |t: f64| (t / 2.0 - t * t / 4.0 + 0.75).clamp(0.0, 1.0);
        let mut rng = stream(7, "oneside", 0);
        let draws: Vec<f64> = (0..1_000_000).map(|_| e.sample(&mut rng)).collect();
        assert!(draws.iter().all(|&t| (-1.0..=1.0).contains(&t)));
        let ks = crate::gof::ks_statistic(&draws, cdf);
        assert!(ks < 0.002, "ks = {ks}");
    }

    #[test]
    fn regression_bounds_and_determinism() {
        let spec = spec_uniform(100, 1.0);
        let theta = ParameterFunction::zero(1.0, 1.0);
        let s1 = sample_regression(&theta, &spec, 3).unwrap();
        let s2 = sample_regression(&theta, &spec, 3).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.ys.iter().all(|&y| (-1.0..=1.0).contains(&y)));
        assert_eq!(
            s1.xs,
            crate::model::design_points(100, &spec.design).unwrap()
        );
        let s3 = sample_regression(&theta, &spec, 4).unwrap();
        assert_ne!(s1.ys, s3.ys);
    }

    #[test]
    fn regression_figure_residuals_uniform() {
        // Residuals of the oscillating-family sample are uniform on [-1, 1]:
        // KS below the 99% band 1.628/sqrt(100) ≈ 0.163, spec'd as 0.14.
        let spec = ExperimentSpec::new(
            100,
            320.0,
            1.0,
            DesignSpec::uniform(),
            ErrorDensity::uniform(),
        )
        .unwrap();
        let theta = ParameterFunction::scaled_sinusoid(0.3, 10.0, 320.0, 1.0).unwrap();
        let s = sample_regression(&theta, &spec, 12).unwrap();
        let residuals: Vec<f64> =
            s.xs.iter()
                .zip(&s.ys)
                .map(|(&x, &y)| y - theta.eval(x))
                .collect();
        assert!(residuals.iter().all(|&r| (-1.0..=1.0).contains(&r)));
        let ks = crate::gof::ks_statistic(&residuals, |t| ((t + 1.0) / 2.0).clamp(0.0, 1.0));
        assert!(ks < 0.14, "ks = {ks}");
    }

    #[test]
    fn residual_signs_independent_of_design() {
        // exchangeability diagnostic: the sign pattern of the residuals does
        // not track the design (correlation within the 3/sqrt(n) band)
        let spec = spec_uniform(20_000, 1.0);
        let theta = ParameterFunction::new(
            ParamFamily::Polynomial {
                coeffs: vec![0.2, 0.3],
            },
            1.0,
            1.0,
        )
        .unwrap();
        let s = sample_regression(&theta, &spec, 31).unwrap();
        let signs: Vec<f64> =
            s.xs.iter()
                .zip(&s.ys)
                .map(|(&x, &y)| if y - theta.eval(x) > 0.0 { 1.0 } else { -1.0 })
                .collect();
        let n = signs.len() as f64;
        let mx = s.xs.iter().sum::<f64>() / n;
        let ms = signs.iter().sum::<f64>() / n;
        let cov =
            s.xs.iter()
                .zip(&signs)
                .map(|(&x, &g)| (x - mx) * (g - ms))
                .sum::<f64>()
                / n;
        let sx = (s.xs.iter().map(|&x| (x - mx) * (x - mx)).sum::<f64>() / n).sqrt();
        let sg = (signs.iter().map(|&g| (g - ms) * (g - ms)).sum::<f64>() / n).sqrt();
        let corr = cov / (sx * sg);
        assert!(corr.abs() < 3.0 / n.sqrt(), "corr = {corr}");
    }

    #[test]
    fn regression_rejects_invalid_theta() {
        let spec = spec_uniform(50, 3.0);
        let bad = ParameterFunction::scaled_sinusoid(0.3, 10.0, 3.0, 1.0).unwrap();
        assert!(matches!(
            sample_regression(&bad, &spec, 0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn band_intensity_poisson_moments() {
        // Constant intensity 4 on the unit square.
        let lam = IntensityFunction {
            design: DesignSpec::uniform(),
            x_weight: XWeight::BlockConstant(1.0),
            region: VerticalRegion::Band {
                y_lo: 0.0,
                y_hi: 1.0,
            },
            scale: 4.0,
            block: None,
            domain: Domain::new(0.0, 1.0).unwrap(),
        };
        assert_abs_diff_eq!(lam.mass().unwrap(), 4.0, epsilon = 1e-9);
        let reps = 100_000;
        let counts: Vec<f64> = (0..reps)
            .map(|i| {
                sample_ppp(&lam, crate::rng::derive_seed(5, "band", i))
                    .unwrap()
                    .len() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (reps - 1) as f64;
        assert!((mean - 4.0).abs() < 0.02, "mean {mean}");
        assert!((var - 4.0).abs() < 0.06, "var {var}");
    }

    #[test]
    fn boundary_intensity_mass_and_support() {
        // θ ≡ 0, n = 100, f_ε(1) = 1/2, uniform design, C_Θ = 1:
        // mass = 100 · 1/2 · (0 + 1 + 1) = 100, every point below the curve.
        let spec = spec_uniform(100, 1.0);
        let theta = ParameterFunction::zero(1.0, 1.0);
        let lam = IntensityFunction::boundary_lower(
            theta,
            spec.design,
            spec.n as f64 * spec.error.jump_right(),
            Domain::for_spec(&spec),
        );
        assert_abs_diff_eq!(lam.mass().unwrap(), 100.0, epsilon = 1e-7);
        let p = sample_ppp(&lam, 9).unwrap();
        assert!(p
            .points
            .iter()
            .all(|&(x, y)| (0.0..=1.0).contains(&x) && (-2.0..=0.0).contains(&y)));
        assert_eq!(p.process_tag, ProcessTag::X1LowerRegion);
    }

    #[test]
    fn zero_mass_region_is_empty() {
        let lam = IntensityFunction {
            design: DesignSpec::uniform(),
            x_weight: XWeight::DesignDensity,
            region: VerticalRegion::Band {
                y_lo: 0.5,
                y_hi: 0.5,
            },
            scale: 10.0,
            block: None,
            domain: Domain::new(0.0, 1.0).unwrap(),
        };
        let p = sample_ppp(&lam, 1).unwrap();
        assert!(p.is_empty());
        assert_eq!(p.intensity_mass, 0.0);
    }

    #[test]
    fn sequential_empty_for_n_zero() {
        let spec = spec_uniform(2, 1.0);
        let mut spec0 = spec;
        spec0.n = 0;
        let theta = ParameterFunction::zero(1.0, 1.0);
        let p = sample_ppp_sequential(&theta, &spec0, Side::Lower, 0).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn sequential_blockwise_extreme_law() {
        // θ ≡ 0, n·f_ε(1) = 100: the maximal y in block I_k has CDF
        // exp(-100·(0 − y)·∫_{I_k} f_D) for y ≤ 0.
        let spec = spec_uniform(200, 1.0);
        let theta = ParameterFunction::zero(1.0, 1.0);
        let m = 5;
        let rate = 200.0 * 0.5;
        let reps = 4000;
        let mut pit = Vec::with_capacity(reps * m);
        for i in 0..reps {
            let p = sample_ppp_sequential(&theta, &spec, Side::Lower, 1000 + i as u64).unwrap();
            for k in 0..m {
                let (a, b) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
                // truncated at -C-1 = -2: atom probability e^{-40}, negligible
                let y = p.max_y_in_strip(a, b).unwrap_or(-2.0);
                pit.push((rate * (1.0 / m as f64) * y).exp().min(1.0));
            }
        }
        let ks = crate::gof::ks_uniform(&pit);
        assert!(
            ks < crate::gof::ks_critical(pit.len(), 0.001) + 0.003,
            "ks = {ks}"
        );
    }

    #[test]
    fn sequential_and_rejection_same_counts() {
        // Counts in a fixed box under both constructions agree in distribution.
        let spec = spec_uniform(60, 1.0);
        let theta = ParameterFunction::new(
            ParamFamily::Polynomial {
                coeffs: vec![0.2, 0.3],
            },
            1.0,
            1.0,
        )
        .unwrap();
        let lam = IntensityFunction::boundary_lower(
            theta.clone(),
            spec.design,
            spec.n as f64 * spec.error.jump_right(),
            Domain::for_spec(&spec),
        );
        let reps = 1000;
        let in_box = |p: &PointProcessRealization| p.count_in(0.2, 0.8, -0.9, 0.25) as u64;
        let a: Vec<u64> = (0..reps)
            .map(|i| in_box(&sample_ppp(&lam, 40_000 + i).unwrap()))
            .collect();
        let b: Vec<u64> = (0..reps)
            .map(|i| {
                in_box(&sample_ppp_sequential(&theta, &spec, Side::Lower, 50_000 + i).unwrap())
            })
            .collect();
        let (stat, df) = crate::gof::chisq_two_sample_counts(&a, &b, 5.0);
        // 99% chi-square quantile approximation: df + 2.33·sqrt(2 df) + 2
        let threshold = df as f64 + 2.33 * (2.0 * df as f64).sqrt() + 4.0;
        assert!(stat < threshold, "chi2 = {stat}, df = {df}");
    }

    #[test]
    fn void_probability_matches() {
        let spec = spec_uniform(40, 1.0);
        let theta = ParameterFunction::zero(1.0, 1.0);
        let lam = IntensityFunction::boundary_lower(
            theta,
            spec.design,
            spec.n as f64 * 0.5,
            Domain::for_spec(&spec),
        );
        // box below the curve
        let (x_lo, x_hi, y_lo, y_hi) = (0.1f64, 0.5, -0.4, -0.1);
        let box_mass = 20.0 * (x_hi - x_lo) * (y_hi - y_lo);
        let p_void = (-box_mass).exp();
        let reps = 20_000;
        let voids = (0..reps)
            .filter(|&i| {
                sample_ppp(&lam, 70_000 + i)
                    .unwrap()
                    .count_in(x_lo, x_hi, y_lo, y_hi)
                    == 0
            })
            .count() as f64;
        let freq = voids / reps as f64;
        let band = 3.0 * (p_void * (1.0 - p_void) / reps as f64).sqrt();
        assert!(
            (freq - p_void).abs() < band,
            "freq {freq} vs {p_void} ± {band}"
        );
    }

    #[test]
    fn disjoint_box_counts_uncorrelated() {
        let spec = spec_uniform(80, 1.0);
        let theta = ParameterFunction::zero(1.0, 1.0);
        let lam =
            IntensityFunction::boundary_lower(theta, spec.design, 40.0, Domain::for_spec(&spec));
        let reps = 8000;
        let mut a = Vec::with_capacity(reps);
        let mut b = Vec::with_capacity(reps);
        for i in 0..reps {
            let p = sample_ppp(&lam, 90_000 + i as u64).unwrap();
            a.push(p.count_in(0.0, 0.5, -1.0, 0.0) as f64);
            b.push(p.count_in(0.5, 1.0, -1.0, 0.0) as f64);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(&a), mean(&b));
        let cov = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / reps as f64;
        let sd = |v: &[f64], m: f64| {
            (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / reps as f64).sqrt()
        };
        let corr = cov / (sd(&a, ma) * sd(&b, mb));
        assert!(corr.abs() < 3.0 / (reps as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn ppp_csv_round_trip() {
        let spec = spec_uniform(60, 1.0);
        let theta = ParameterFunction::zero(1.0, 1.0);
        let lam =
            IntensityFunction::boundary_lower(theta, spec.design, 30.0, Domain::for_spec(&spec));
        let p = sample_ppp(&lam, 17).unwrap();
        assert_eq!(
            p,
            sample_ppp(&lam, 17).unwrap(),
            "same seed must give identical realizations"
        );
        for with_marks in [true, false] {
            let text = ppp_to_csv(&p, 42, with_marks);
            let back = ppp_from_csv(&text).unwrap();
            assert_eq!(back.points, p.points);
            assert_eq!(back.process_tag, p.process_tag);
            assert_eq!(back.seed, p.seed);
            assert_eq!(back.domain, p.domain);
            if with_marks {
                assert_eq!(back.marks, p.marks);
            }
        }
    }

    #[test]
    fn regression_csv_round_trip() {
        let spec = spec_uniform(17, 1.0);
        let theta = ParameterFunction::zero(1.0, 1.0);
        let s = sample_regression(&theta, &spec, 77).unwrap();
        let text = regression_to_csv(&s);
        let back = regression_from_csv(&text).unwrap();
        assert_eq!(s.xs, back.xs);
        assert_eq!(s.ys, back.ys);
        assert_eq!(s.seed, back.seed);
        assert_eq!(s.spec_ref, back.spec_ref);
    }
}
