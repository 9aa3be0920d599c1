//! Locally admissible quadratic pilot estimators.
//!
//! A quadratic `p` is admissible at `x0` when every observation in the window
//! `U_h` lies inside the band `|Y_j − p(x_j)| ≤ 1 + γ·h^{2+α}` (regression),
//! or when no lower-process point lies above `p + γ·h^{2+α}` and no
//! upper-process point below `p − γ·h^{2+α}` (point process model). The fit
//! returns the deepest admissible polynomial (the minimizer of the maximal
//! constraint violation) with a max-norm tie-break on the optimal face, so
//! the selection is deterministic and reproducible.
//!
//! Coefficients are solved in the scaled coordinate `u = (x − x0)/h`, which
//! keeps the LP well conditioned for every bandwidth.

use crate::lp::{chebyshev_fit, linear_min, min_linf_point};
use crate::model::ParameterFunction;
use crate::samplers::{PointProcessRealization, RegressionSample};
use crate::{Error, Result};

/// A quadratic `p(x) = a0 + a1·(x − x0) + a2·(x − x0)²/2` on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPolynomial {
    pub coeffs: [f64; 3],
    pub center: f64,
    pub window: (f64, f64),
}

impl LocalPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        let dx = x - self.center;
        self.coeffs[0] + self.coeffs[1] * dx + 0.5 * self.coeffs[2] * dx * dx
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.coeffs[1] + self.coeffs[2] * (x - self.center)
    }
}

/// The window `U_h`: symmetric in the interior, one-sided at the edges.
pub fn window_at(x0: f64, h: f64) -> (f64, f64) {
    if x0 < h {
        (0.0, 2.0 * h)
    } else if x0 > 1.0 - h {
        (1.0 - 2.0 * h, 1.0)
    } else {
        (x0 - h, x0 + h)
    }
}

fn in_window(x: f64, w: (f64, f64)) -> bool {
    x >= w.0 && x <= w.1
}

/// One inequality `sign·(p(x) − y) ≤ slack` in scaled coordinates; `x` keeps
/// the original abscissa for the exact post-hoc check.
struct BandRow {
    x: f64,
    u: f64,
    sign: f64,
    rhs: f64,
}

fn fit_rows(rows: &[BandRow]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let g: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.sign, r.sign * r.u, r.sign * 0.5 * r.u * r.u])
        .collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.rhs).collect();
    (g, rhs)
}

/// Shared solve: Chebyshev-center LP plus max-norm tie-break on the optimal
/// face, then exact post-hoc admissibility verification.
fn solve_admissible(
    rows: &[BandRow],
    band: f64,
    x0: f64,
    h: f64,
    what: &str,
) -> Result<LocalPolynomial> {
    let window = window_at(x0, h);
    if rows.is_empty() {
        return Ok(LocalPolynomial {
            coeffs: [0.0; 3],
            center: x0,
            window,
        });
    }
    let (g, rhs) = fit_rows(rows);
    let (_, t_star) = chebyshev_fit(&g, &rhs, -band)?;
    if t_star > 1e-9 {
        return Err(Error::Infeasible(format!(
            "{what}: no admissible polynomial at x0 = {x0} (residual excess {t_star:.3e}); \
             mis-specified band or corrupted data"
        )));
    }
    // Lock the achieved level and take the smallest-coefficient point on it.
    let locked: Vec<f64> = rhs.iter().map(|b| b + t_star.max(-band) + 1e-12).collect();
    let scaled = min_linf_point(&g, &locked, 3)?
        .ok_or_else(|| Error::Numerical(format!("{what}: tie-break infeasible")))?;
    let coeffs = unscale(&scaled, h);
    let p = LocalPolynomial {
        coeffs,
        center: x0,
        window,
    };
    verify(rows, &p, band, what)?;
    Ok(p)
}

fn unscale(b: &[f64], h: f64) -> [f64; 3] {
    [b[0], b[1] / h, b[2] / (h * h)]
}

fn verify(rows: &[BandRow], p: &LocalPolynomial, band: f64, what: &str) -> Result<()> {
    for r in rows {
        let v = r.sign * p.eval(r.x) - r.rhs;
        if v > band * 1e-9 + 1e-9 {
            return Err(Error::Numerical(format!(
                "{what}: post-hoc admissibility check failed at x = {} (violation {v:.3e})",
                r.x
            )));
        }
    }
    Ok(())
}

/// Admissible fit in the regression experiment. `gamma` is the Hölder band
/// constant; the band half-width is `1 + gamma·h^{2+alpha}`.
pub fn admissible_fit_regression(
    sample: &RegressionSample,
    x0: f64,
    h: f64,
    gamma: f64,
    alpha: f64,
) -> Result<LocalPolynomial> {
    let window = window_at(x0, h);
    let band = 1.0 + gamma * h.powf(2.0 + alpha);
    let mut rows = Vec::new();
    for (&x, &y) in sample.xs.iter().zip(&sample.ys) {
        if in_window(x, window) {
            let u = (x - x0) / h;
            rows.push(BandRow {
                x,
                u,
                sign: 1.0,
                rhs: y + band,
            });
            rows.push(BandRow {
                x,
                u,
                sign: -1.0,
                rhs: -y + band,
            });
        }
    }
    if rows.len() < 6 {
        return Err(Error::Validation(format!(
            "window [{:.4}, {:.4}] holds {} design points; need at least 3",
            window.0,
            window.1,
            rows.len() / 2
        )));
    }
    solve_admissible(&rows, band, x0, h, "regression fit")
}

/// Admissible fit in the point process experiment: no X₁ point above
/// `p + γh^{2+α}`, no X₂ point below `p − γh^{2+α}` inside the window.
pub fn admissible_fit_ppp(
    x1: &PointProcessRealization,
    x2: &PointProcessRealization,
    x0: f64,
    h: f64,
    gamma: f64,
    alpha: f64,
) -> Result<LocalPolynomial> {
    let window = window_at(x0, h);
    let slack = gamma * h.powf(2.0 + alpha);
    let mut rows = Vec::new();
    for &(x, y) in x1.points.iter().filter(|&&(x, _)| in_window(x, window)) {
        // y ≤ p(x) + slack  ⟺  −p(x) ≤ −y + slack
        rows.push(BandRow {
            x,
            u: (x - x0) / h,
            sign: -1.0,
            rhs: -y + slack,
        });
    }
    for &(x, y) in x2.points.iter().filter(|&&(x, _)| in_window(x, window)) {
        // y ≥ p(x) − slack  ⟺  p(x) ≤ y + slack
        rows.push(BandRow {
            x,
            u: (x - x0) / h,
            sign: 1.0,
            rhs: y + slack,
        });
    }
    solve_admissible(&rows, slack.max(1.0), x0, h, "point process fit")
}

/// Which frontier a single observed process pins down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierSide {
    /// Only X₂ observed (one-sided errors with φ(1) = 0): θ is the lower
    /// frontier of the upper cloud; the extremal admissible value at x0 is
    /// the largest.
    LowerFrontier,
    /// Only X₁ observed: θ is the upper frontier of the lower cloud; the
    /// extremal admissible value is the smallest.
    UpperFrontier,
}

/// One-sided variant: constraints from a single process plus the class
/// coefficient box, selecting the extremal admissible value at x0.
pub fn admissible_fit_ppp_one_sided(
    x: &PointProcessRealization,
    side: FrontierSide,
    x0: f64,
    h: f64,
    gamma: f64,
    alpha: f64,
    c_theta: f64,
) -> Result<LocalPolynomial> {
    let window = window_at(x0, h);
    let slack = gamma * h.powf(2.0 + alpha);
    let mut rows = Vec::new();
    for &(px, py) in x.points.iter().filter(|&&(px, _)| in_window(px, window)) {
        let u = (px - x0) / h;
        match side {
            FrontierSide::LowerFrontier => rows.push(BandRow {
                x: px,
                u,
                sign: 1.0,
                rhs: py + slack,
            }),
            FrontierSide::UpperFrontier => rows.push(BandRow {
                x: px,
                u,
                sign: -1.0,
                rhs: -py + slack,
            }),
        }
    }
    // Class box in scaled coordinates: |a0| ≤ C_Θ, |a1| ≤ 2C_Θ, |a2| ≤ C_Θ.
    let boxes = [
        (0usize, c_theta + slack),
        (1, 2.0 * c_theta * h),
        (2, c_theta * h * h),
    ];
    let (mut g, mut rhs) = fit_rows(&rows);
    for &(j, bound) in &boxes {
        for s in [1.0, -1.0] {
            let mut row = vec![0.0; 3];
            row[j] = s;
            g.push(row);
            rhs.push(bound);
        }
    }
    let objective = match side {
        FrontierSide::LowerFrontier => [-1.0, 0.0, 0.0], // maximize a0
        FrontierSide::UpperFrontier => [1.0, 0.0, 0.0],  // minimize a0
    };
    let solution = linear_min(&objective, &g, &rhs)?.ok_or_else(|| {
        Error::Infeasible(format!("one-sided fit: empty admissible set at x0 = {x0}"))
    })?;
    let coeffs = unscale(&solution.0, h);
    let p = LocalPolynomial {
        coeffs,
        center: x0,
        window,
    };
    verify(&rows, &p, slack.max(1.0), "one-sided fit")?;
    Ok(p)
}

/// Pilot estimate on a grid: per-point values and derivatives, truncated to
/// the class range.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub bandwidth: f64,
    pub truncated: bool,
}

impl PilotEstimate {
    /// Oracle-mode pilot: the true θ and θ′ evaluated on the grid.
    pub fn from_oracle(theta: &ParameterFunction, grid: &[f64]) -> Self {
        PilotEstimate {
            grid: grid.to_vec(),
            values: grid.iter().map(|&x| theta.eval(x)).collect(),
            derivs: grid.iter().map(|&x| theta.deriv1(x)).collect(),
            bandwidth: 0.0,
            truncated: false,
        }
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("x,theta_hat,theta_hat_prime,h,truncated\n");
        for ((x, v), d) in self.grid.iter().zip(&self.values).zip(&self.derivs) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                x,
                v,
                d,
                self.bandwidth,
                u8::from(self.truncated)
            ));
        }
        out
    }
}

/// Either experiment's data for the pilot.
pub enum PilotData<'a> {
    Regression(&'a RegressionSample),
    Ppp(&'a PointProcessRealization, &'a PointProcessRealization),
}

/// Rate-optimal bandwidth `bandwidth_const · n^{-1/(3+α)}`, clipped to keep
/// the window inside [0, 1].
pub fn pilot_bandwidth(n: usize, alpha: f64, bandwidth_const: f64) -> f64 {
    (bandwidth_const * (n as f64).powf(-1.0 / (3.0 + alpha))).min(0.5)
}

/// Runs the admissible fit at every grid point, then truncates values to
/// `[-C_Θ, C_Θ]` and derivatives to `[-4C_Θ, 4C_Θ]`.
pub fn pilot_estimate(
    data: &PilotData,
    c_theta: f64,
    alpha: f64,
    effective_n: usize,
    bandwidth_const: f64,
    grid: &[f64],
) -> Result<PilotEstimate> {
    let h = pilot_bandwidth(effective_n, alpha, bandwidth_const);
    let gamma = crate::model::holder_band(h, c_theta);
    let mut values = Vec::with_capacity(grid.len());
    let mut derivs = Vec::with_capacity(grid.len());
    let mut truncated = false;
    let deriv_cap = 4.0 * c_theta;
    for &x0 in grid {
        let p = match data {
            PilotData::Regression(sample) => {
                admissible_fit_regression(sample, x0, h, gamma, alpha)?
            }
            PilotData::Ppp(x1, x2) => admissible_fit_ppp(x1, x2, x0, h, gamma, alpha)?,
        };
        let v = p.eval(x0);
        let d = p.deriv(x0);
        let vt = v.clamp(-c_theta, c_theta);
        let dt = d.clamp(-deriv_cap, deriv_cap);
        if vt != v || dt != d {
            truncated = true;
        }
        values.push(vt);
        derivs.push(dt);
    }
    Ok(PilotEstimate {
        grid: grid.to_vec(),
        values,
        derivs,
        bandwidth: h,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DesignSpec, ErrorDensity, ExperimentSpec, ParamFamily};
    use crate::samplers::{sample_ppp, sample_regression, Domain, IntensityFunction};
    use approx::assert_abs_diff_eq;

    fn uniform_spec(n: usize, c_theta: f64) -> ExperimentSpec {
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
    fn quadratic_theta_is_admissible() {
        // Data from θ(x) = 1 + x - x² with noise on [-1, 1]: θ's own
        // coefficients satisfy the band, so the fit must succeed and be
        // admissible after re-checking.
        let theta = crate::model::ParameterFunction::new(
            ParamFamily::Polynomial {
                coeffs: vec![0.25, 1.0, -1.0],
            },
            2.0,
            1.0,
        )
        .unwrap();
        let spec = uniform_spec(400, 2.0);
        let s = sample_regression(&theta, &spec, 21).unwrap();
        let h = pilot_bandwidth(400, 1.0, 1.0);
        let gamma = crate::model::holder_band(h, 2.0);
        let band = 1.0 + gamma * h.powf(3.0);
        let p = admissible_fit_regression(&s, 0.5, h, gamma, 1.0).unwrap();
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            if x >= p.window.0 && x <= p.window.1 {
                assert!((y - p.eval(x)).abs() <= band + 1e-9);
            }
        }
    }

    #[test]
    fn window_too_small_errors() {
        let theta = crate::model::ParameterFunction::zero(1.0, 1.0);
        let spec = uniform_spec(5, 1.0);
        let s = sample_regression(&theta, &spec, 3).unwrap();
        // h so small that at most 2 design points fall inside
        assert!(matches!(
            admissible_fit_regression(&s, 0.5, 0.2, 2.0, 1.0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn boundary_windows_are_one_sided() {
        assert_eq!(window_at(0.02, 0.1), (0.0, 0.2));
        assert_eq!(window_at(0.97, 0.1), (0.8, 1.0));
        assert_eq!(window_at(0.5, 0.1), (0.4, 0.6));
    }

    #[test]
    fn locality_outside_window_is_ignored() {
        let theta = crate::model::ParameterFunction::zero(1.0, 1.0);
        let spec = uniform_spec(600, 1.0);
        let s = sample_regression(&theta, &spec, 8).unwrap();
        let h = 0.08;
        let p1 = admissible_fit_regression(&s, 0.5, h, 2.0, 1.0).unwrap();
        let mut corrupted = s.clone();
        for (x, y) in corrupted.xs.iter().zip(corrupted.ys.iter_mut()) {
            if (x - 0.5).abs() > h + 1e-9 {
                *y += 37.0;
            }
        }
        let p2 = admissible_fit_regression(&corrupted, 0.5, h, 2.0, 1.0).unwrap();
        assert_eq!(p1.coeffs, p2.coeffs);
    }

    #[test]
    fn feasibility_monotone_in_gamma() {
        let theta = crate::model::ParameterFunction::zero(1.0, 1.0);
        let spec = uniform_spec(300, 1.0);
        let s = sample_regression(&theta, &spec, 5).unwrap();
        let h = 0.1;
        let p = admissible_fit_regression(&s, 0.4, h, 2.0, 1.0).unwrap();
        // admissible for gamma stays admissible for larger gamma
        for gamma_big in [3.0, 5.0, 10.0] {
            let band = 1.0 + gamma_big * h.powf(3.0);
            for (&x, &y) in s.xs.iter().zip(&s.ys) {
                if x >= p.window.0 && x <= p.window.1 {
                    assert!((y - p.eval(x)).abs() <= band + 1e-9);
                }
            }
        }
    }

    #[test]
    fn empty_ppp_returns_zero_polynomial() {
        let dom = Domain::new(-2.0, 2.0).unwrap();
        let e1 = PointProcessRealization::empty(crate::samplers::ProcessTag::X1LowerRegion, dom, 0);
        let e2 = PointProcessRealization::empty(crate::samplers::ProcessTag::X2UpperRegion, dom, 0);
        let p = admissible_fit_ppp(&e1, &e2, 0.5, 0.1, 2.0, 1.0).unwrap();
        assert_eq!(p.coeffs, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn regression_pilot_hits_rate_at_zero() {
        // θ ≡ 0, uniform noise, n = 2000, h = n^{-1/4}: |p(x0)| within
        // 10·n^{-3/4} in at least 95% of 200 replicates (frozen calibration).
        let n = 2000;
        let spec = uniform_spec(n, 1.0);
        let theta = crate::model::ParameterFunction::zero(1.0, 1.0);
        let h = (n as f64).powf(-0.25);
        let gamma = crate::model::holder_band(h, 1.0);
        let tol = 10.0 * (n as f64).powf(-0.75);
        let mut hits = 0;
        for rep in 0..200 {
            let s = sample_regression(&theta, &spec, 3000 + rep).unwrap();
            let p = admissible_fit_regression(&s, 0.5, h, gamma, 1.0).unwrap();
            if p.eval(0.5).abs() <= tol {
                hits += 1;
            }
        }
        assert!(hits >= 190, "only {hits}/200 within tolerance");
    }

    #[test]
    fn ppp_pilot_hits_rate_at_zero() {
        // Same oracle calibration for the point process fit at scale n.
        let n = 2000;
        let spec = uniform_spec(n, 1.0);
        let theta = crate::model::ParameterFunction::zero(1.0, 1.0);
        let dom = Domain::for_spec(&spec);
        let h = (n as f64).powf(-0.25);
        let gamma = crate::model::holder_band(h, 1.0);
        let tol = 12.0 * (n as f64).powf(-0.75);
        let scale = n as f64 * 0.5;
        let l1 = IntensityFunction::boundary_lower(theta.clone(), spec.design, scale, dom);
        let l2 = IntensityFunction::boundary_upper(theta.clone(), spec.design, scale, dom);
        let mut hits = 0;
        for rep in 0..200 {
            let x1 = sample_ppp(&l1, 7000 + rep).unwrap();
            let x2 = sample_ppp(&l2, 8000 + rep).unwrap();
            let p = admissible_fit_ppp(&x1, &x2, 0.5, h, gamma, 1.0).unwrap();
            if p.eval(0.5).abs() <= tol {
                hits += 1;
            }
        }
        assert!(hits >= 190, "only {hits}/200 within tolerance");
    }

    #[test]
    fn one_sided_fit_is_extremal() {
        let n = 500;
        let spec = uniform_spec(n, 1.0);
        let theta = crate::model::ParameterFunction::zero(1.0, 1.0);
        let dom = Domain::for_spec(&spec);
        let l2 = IntensityFunction::boundary_upper(theta, spec.design, n as f64 * 0.5, dom);
        let x2 = sample_ppp(&l2, 99).unwrap();
        let h: f64 = 0.15;
        let gamma = 2.0;
        let slack = gamma * h.powf(3.0);
        let p =
            admissible_fit_ppp_one_sided(&x2, FrontierSide::LowerFrontier, 0.5, h, gamma, 1.0, 1.0)
                .unwrap();
        // admissible: no X2 point below p - slack
        for &(x, y) in &x2.points {
            if x >= p.window.0 && x <= p.window.1 {
                assert!(y >= p.eval(x) - slack - 1e-9);
            }
        }
        // extremal: nudging the constant term up must break admissibility or the box
        let bumped = LocalPolynomial {
            coeffs: [p.coeffs[0] + 0.05, p.coeffs[1], p.coeffs[2]],
            ..p.clone()
        };
        let violates = x2.points.iter().any(|&(x, y)| {
            x >= p.window.0 && x <= p.window.1 && y < bumped.eval(x) - slack - 1e-12
        }) || bumped.coeffs[0].abs() > 1.0 + slack;
        assert!(violates, "one-sided fit was not maximal at x0");
        // and it should sit near the frontier rather than at the box floor
        assert!(
            p.eval(0.5) > -0.5,
            "fit collapsed to the box: {}",
            p.eval(0.5)
        );
    }

    #[test]
    fn pilot_estimate_truncates() {
        // A sample shifted far above the class range forces truncation.
        let n = 200;
        let spec = uniform_spec(n, 1.0);
        let theta = crate::model::ParameterFunction::zero(1.0, 1.0);
        let mut s = sample_regression(&theta, &spec, 1).unwrap();
        for y in s.ys.iter_mut() {
            *y += 5.0;
        }
        let grid = vec![0.3, 0.5, 0.7];
        let est = pilot_estimate(&PilotData::Regression(&s), 1.0, 1.0, n, 1.0, &grid).unwrap();
        assert!(est.truncated);
        assert!(est.values.iter().all(|&v| v.abs() <= 1.0));
        assert!(est.derivs.iter().all(|&d| d.abs() <= 4.0));
    }

    #[test]
    fn pilot_oracle_mode_matches_theta() {
        let theta = crate::model::ParameterFunction::new(
            ParamFamily::Polynomial {
                coeffs: vec![0.1, 0.2, 0.3],
            },
            2.0,
            1.0,
        )
        .unwrap();
        let grid = vec![0.25, 0.5, 0.75];
        let est = PilotEstimate::from_oracle(&theta, &grid);
        for (i, &x) in grid.iter().enumerate() {
            assert_abs_diff_eq!(est.values[i], theta.eval(x));
            assert_abs_diff_eq!(est.derivs[i], theta.deriv1(x));
        }
    }
}
