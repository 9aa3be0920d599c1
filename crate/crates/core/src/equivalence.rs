//! The constructive equivalence mapping from the regression experiment to the
//! pair of boundary point processes.
//!
//! Steps: split the sample by index parity; estimate a pilot on one half; bin
//! the other half and linearize around block centers (localization); take
//! per-block extremes; recenter them with the pilot; randomize each block
//! into one deterministic extreme point plus an independent Poisson cloud
//! under (above) the recentered tilted line; redo everything with the halves
//! swapped, the second pilot now coming from the point process data; and
//! superpose the two passes.
//!
//! Localization and recentering are invertible data transformations; both are
//! implemented with an error-free compensation term so the inverse is exact
//! to the bit.

use serde::Serialize;

use crate::estimators::{pilot_estimate, PilotData, PilotEstimate};
use crate::model::ExperimentSpec;
use crate::numeric::{compensated_add, fnv1a, two_sum};
use crate::rng::{derive_seed, stream};
use crate::samplers::{
    sample_ppp, Domain, IntensityFunction, PointMark, PointProcessRealization, ProcessTag,
    RegressionSample, VerticalRegion, XWeight,
};
use crate::{Error, Result};
use rand::Rng;

/// Default number of bins: m = ⌈n^{2/3 − min(α/2, 1/8)}⌉, which meets every
/// growth requirement of the equivalence proof chain simultaneously.
pub fn default_m(n: usize, alpha: f64) -> usize {
    let delta = (alpha / 2.0).min(0.125);
    ((n as f64).powf(2.0 / 3.0 - delta).ceil() as usize).max(1)
}

// ---------------------------------------------------------------------------
// Block partition
// ---------------------------------------------------------------------------

/// The bin structure `I_k = [k/m, (k+1)/m)` (last interval closed) over the
/// points of one half-sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub m: usize,
    /// Block index of each half-sample observation.
    pub index_map: Vec<usize>,
    /// Number of half-sample points per block.
    pub block_counts: Vec<usize>,
    /// Position (within the half-sample) of the first point of each block.
    pub first_index: Vec<usize>,
}

impl BlockPartition {
    pub fn new(m: usize, xs: &[f64]) -> Result<Self> {
        if m == 0 {
            return Err(Error::Validation("partition needs m ≥ 1".into()));
        }
        let mut index_map = Vec::with_capacity(xs.len());
        let mut block_counts = vec![0usize; m];
        let mut first_index = vec![usize::MAX; m];
        for (i, &x) in xs.iter().enumerate() {
            let k = Self::block_of_static(x, m);
            index_map.push(k);
            if block_counts[k] == 0 {
                first_index[k] = i;
            }
            block_counts[k] += 1;
        }
        if let Some(k) = block_counts.iter().position(|&c| c == 0) {
            return Err(Error::Validation(format!(
                "block {k} of {m} holds no design points; m too large for n = {}",
                xs.len()
            )));
        }
        Ok(BlockPartition {
            m,
            index_map,
            block_counts,
            first_index,
        })
    }

    /// Interval structure alone (no design points); used for checks that
    /// operate on point process realizations only.
    pub fn intervals_only(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Validation("partition needs m ≥ 1".into()));
        }
        Ok(BlockPartition {
            m,
            index_map: Vec::new(),
            block_counts: Vec::new(),
            first_index: Vec::new(),
        })
    }

    fn block_of_static(x: f64, m: usize) -> usize {
        ((x * m as f64).floor() as usize).min(m - 1)
    }

    pub fn block_of(&self, x: f64) -> usize {
        Self::block_of_static(x, self.m)
    }

    pub fn interval(&self, k: usize) -> (f64, f64) {
        (k as f64 / self.m as f64, (k + 1) as f64 / self.m as f64)
    }

    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.m as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.m).map(|k| self.center(k)).collect()
    }

    /// j(k): the 1-based original index of the first odd-position observation
    /// in block k (the half-sample holds observations 1, 3, 5, ...).
    pub fn first_odd_index(&self, k: usize) -> usize {
        2 * self.first_index[k] + 1
    }

    /// Minimum block occupancy bound ⌊n/(d·2m)⌋ from the design gap constant.
    pub fn min_count_bound(n: usize, m: usize, gap_const: f64) -> usize {
        (n as f64 / (gap_const * 2.0 * m as f64)).floor() as usize
    }
}

// ---------------------------------------------------------------------------
// Sample splitting
// ---------------------------------------------------------------------------

/// Splits by 1-based index parity: odd observations into the first half (the
/// part that gets binned), even into the second (the pilot part). `n` must be
/// even.
pub fn split_sample(sample: &RegressionSample) -> Result<(RegressionSample, RegressionSample)> {
    if !sample.n.is_multiple_of(2) {
        return Err(Error::Validation(format!(
            "sample splitting requires even n, got {}",
            sample.n
        )));
    }
    let pick = |parity: usize| RegressionSample {
        xs: sample.xs.iter().copied().skip(parity).step_by(2).collect(),
        ys: sample.ys.iter().copied().skip(parity).step_by(2).collect(),
        n: sample.n / 2,
        seed: sample.seed,
        spec_ref: sample.spec_ref,
    };
    Ok((pick(0), pick(1)))
}

/// Exact inverse of [`split_sample`].
pub fn merge_halves(half_a: &RegressionSample, half_b: &RegressionSample) -> RegressionSample {
    let n = half_a.n + half_b.n;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..half_a.n {
        xs.push(half_a.xs[i]);
        ys.push(half_a.ys[i]);
        if i < half_b.n {
            xs.push(half_b.xs[i]);
            ys.push(half_b.ys[i]);
        }
    }
    RegressionSample {
        xs,
        ys,
        n,
        seed: half_a.seed,
        spec_ref: half_a.spec_ref,
    }
}

// ---------------------------------------------------------------------------
// Localization
// ---------------------------------------------------------------------------

/// Residuals after the per-block linear correction, with the compensation
/// terms that make the transformation exactly invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedResiduals {
    pub xs: Vec<f64>,
    pub zbar: Vec<f64>,
    comp: Vec<f64>,
}

fn pilot_offset(pilot: &PilotEstimate, partition: &BlockPartition, k: usize, x: f64) -> f64 {
    pilot.values[k] + pilot.derivs[k] * (x - partition.center(k))
}

/// `Z̄_j = Y_j − θ̂(ξ_j) − θ̂′(ξ_j)(x_j − ξ_j)` with ξ_j the center of the
/// block containing x_j.
pub fn localize(
    half: &RegressionSample,
    pilot: &PilotEstimate,
    partition: &BlockPartition,
) -> Result<LocalizedResiduals> {
    if pilot.grid.len() != partition.m {
        return Err(Error::Validation(format!(
            "pilot grid has {} points but the partition has {} centers",
            pilot.grid.len(),
            partition.m
        )));
    }
    let mut zbar = Vec::with_capacity(half.n);
    let mut comp = Vec::with_capacity(half.n);
    for (i, (&x, &y)) in half.xs.iter().zip(&half.ys).enumerate() {
        let c = pilot_offset(pilot, partition, partition.index_map[i], x);
        let (z, e) = two_sum(y, -c);
        zbar.push(z);
        comp.push(e);
    }
    Ok(LocalizedResiduals {
        xs: half.xs.clone(),
        zbar,
        comp,
    })
}

/// Exact inverse: reconstructs the original responses bit-for-bit.
pub fn undo_localize(
    residuals: &LocalizedResiduals,
    pilot: &PilotEstimate,
    partition: &BlockPartition,
) -> Vec<f64> {
    residuals
        .xs
        .iter()
        .zip(residuals.zbar.iter().zip(&residuals.comp))
        .map(|(&x, (&z, &e))| {
            let k = partition.block_of(x);
            compensated_add(z, pilot_offset(pilot, partition, k, x), e)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Block extremes
// ---------------------------------------------------------------------------

/// Per-block minima/maxima of the localized residuals and their recentered
/// versions `s″ = s + θ̂(ξ) + 1`, `S″ = S + θ̂(ξ) − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStatistics {
    pub minima: Vec<f64>,
    pub maxima: Vec<f64>,
    pub minima_recentered: Vec<f64>,
    pub maxima_recentered: Vec<f64>,
    min_comp: Vec<f64>,
    max_comp: Vec<f64>,
    pub pilot_ref: u64,
}

impl BlockStatistics {
    pub fn m(&self) -> usize {
        self.minima.len()
    }

    /// Exact inverse of the recentering, given the same pilot.
    pub fn undo_recenter(&self, pilot: &PilotEstimate) -> (Vec<f64>, Vec<f64>) {
        let s: Vec<f64> = self
            .minima_recentered
            .iter()
            .zip(self.min_comp.iter().enumerate())
            .map(|(&s2, (k, &e))| compensated_add(s2, -(pilot.values[k] + 1.0), e))
            .collect();
        let big: Vec<f64> = self
            .maxima_recentered
            .iter()
            .zip(self.max_comp.iter().enumerate())
            .map(|(&s2, (k, &e))| compensated_add(s2, -(pilot.values[k] - 1.0), e))
            .collect();
        (s, big)
    }
}

/// Stable identifier of a pilot's values (ties statistics to the pilot used).
pub fn pilot_hash(pilot: &PilotEstimate) -> u64 {
    let mut bytes = Vec::with_capacity(16 * pilot.grid.len());
    for (v, d) in pilot.values.iter().zip(&pilot.derivs) {
        bytes.extend_from_slice(&v.to_bits().to_le_bytes());
        bytes.extend_from_slice(&d.to_bits().to_le_bytes());
    }
    fnv1a(&bytes)
}

/// Exact blockwise min and max of the residuals, recentered via the pilot.
pub fn block_extremes(
    residuals: &LocalizedResiduals,
    partition: &BlockPartition,
    pilot: &PilotEstimate,
) -> Result<BlockStatistics> {
    let m = partition.m;
    let mut minima = vec![f64::INFINITY; m];
    let mut maxima = vec![f64::NEG_INFINITY; m];
    for (i, &z) in residuals.zbar.iter().enumerate() {
        let k = partition.index_map[i];
        minima[k] = minima[k].min(z);
        maxima[k] = maxima[k].max(z);
    }
    if minima.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation(
            "empty block in extremes; m too large".into(),
        ));
    }
    let mut minima_recentered = Vec::with_capacity(m);
    let mut maxima_recentered = Vec::with_capacity(m);
    let mut min_comp = Vec::with_capacity(m);
    let mut max_comp = Vec::with_capacity(m);
    for k in 0..m {
        let (s2, e1) = two_sum(minima[k], pilot.values[k] + 1.0);
        minima_recentered.push(s2);
        min_comp.push(e1);
        let (b2, e2) = two_sum(maxima[k], pilot.values[k] - 1.0);
        maxima_recentered.push(b2);
        max_comp.push(e2);
    }
    Ok(BlockStatistics {
        minima,
        maxima,
        minima_recentered,
        maxima_recentered,
        min_comp,
        max_comp,
        pilot_ref: pilot_hash(pilot),
    })
}

// ---------------------------------------------------------------------------
// Randomization to point processes
// ---------------------------------------------------------------------------

/// Which of the two processes to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SidePair {
    Both,
    LowerOnly,
    UpperOnly,
}

/// Step (5): on each block place one deterministic point on the recentered
/// tilted line through the block maximum (minimum), plus an independent
/// Poisson cloud with block-constant intensity `(n/2)·φ(±1)·(m ∫_{I_k} f_D)`
/// under (above) that line, truncated to S. Blocks are independent.
pub fn randomize_to_ppp(
    stats: &BlockStatistics,
    pilot: &PilotEstimate,
    partition: &BlockPartition,
    spec: &ExperimentSpec,
    side_pair: SidePair,
    seed: u64,
) -> Result<(PointProcessRealization, PointProcessRealization)> {
    let domain = Domain::for_spec(spec);
    let mut xl = PointProcessRealization::empty(ProcessTag::Xl, domain, seed);
    let mut xu = PointProcessRealization::empty(ProcessTag::Xu, domain, seed);
    let half_n = spec.n as f64 / 2.0;
    for k in 0..stats.m() {
        let (a, b) = partition.interval(k);
        let center = partition.center(k);
        let slope = pilot.derivs[k];
        let w = partition.m as f64 * spec.design.mass_on(a, b);
        let (u_lo, u_hi) = (spec.design.cdf(a), spec.design.cdf(b));
        if side_pair != SidePair::UpperOnly {
            let mut rng = stream(seed, "randomize-lower", k as u64);
            let x_det = spec.design.quantile(rng.gen_range(u_lo..u_hi));
            let y_det = stats.maxima_recentered[k] - slope * (center - x_det);
            if y_det >= domain.y_lo && y_det <= domain.y_hi {
                xl.points.push((x_det, y_det));
                xl.marks.push(PointMark {
                    pass: 0,
                    deterministic_extreme: true,
                });
            }
            let cloud = IntensityFunction {
                design: spec.design,
                x_weight: XWeight::BlockConstant(w),
                region: VerticalRegion::BelowTiltedLine {
                    level: stats.maxima_recentered[k],
                    slope,
                    center,
                },
                scale: half_n * spec.error.jump_right(),
                block: Some((a, b)),
                domain,
            };
            let pts = sample_ppp(&cloud, derive_seed(seed, "cloud-lower", k as u64))?;
            xl.intensity_mass += pts.intensity_mass;
            xl.points.extend_from_slice(&pts.points);
            xl.marks
                .extend(std::iter::repeat_n(PointMark::default(), pts.points.len()));
        }
        if side_pair != SidePair::LowerOnly {
            let mut rng = stream(seed, "randomize-upper", k as u64);
            let x_det = spec.design.quantile(rng.gen_range(u_lo..u_hi));
            let y_det = stats.minima_recentered[k] - slope * (center - x_det);
            if y_det >= domain.y_lo && y_det <= domain.y_hi {
                xu.points.push((x_det, y_det));
                xu.marks.push(PointMark {
                    pass: 0,
                    deterministic_extreme: true,
                });
            }
            let cloud = IntensityFunction {
                design: spec.design,
                x_weight: XWeight::BlockConstant(w),
                region: VerticalRegion::AboveTiltedLine {
                    level: stats.minima_recentered[k],
                    slope,
                    center,
                },
                scale: half_n * spec.error.jump_left(),
                block: Some((a, b)),
                domain,
            };
            let pts = sample_ppp(&cloud, derive_seed(seed, "cloud-upper", k as u64))?;
            xu.intensity_mass += pts.intensity_mass;
            xu.points.extend_from_slice(&pts.points);
            xu.marks
                .extend(std::iter::repeat_n(PointMark::default(), pts.points.len()));
        }
    }
    Ok((xl, xu))
}

// ---------------------------------------------------------------------------
// Forward transform
// ---------------------------------------------------------------------------

/// Options for the full transform. The oracle pilot (true θ, θ′ supplied for
/// stage-isolation testing) replaces both estimated pilots when present; the
/// production path has no θ anywhere.
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub m_override: Option<usize>,
    pub bandwidth_const: f64,
    pub side_pair: SidePair,
    pub oracle_pilot: Option<crate::model::ParameterFunction>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            m_override: None,
            bandwidth_const: 1.0,
            side_pair: SidePair::Both,
            oracle_pilot: None,
        }
    }
}

/// Reproducibility sidecar emitted with the transform output.
#[derive(Debug, Clone, Serialize)]
pub struct TransformSidecar {
    pub m: usize,
    pub master_seed: u64,
    pub seed_pass1: u64,
    pub seed_pass2: u64,
    pub bandwidth_pass1: f64,
    pub bandwidth_pass2: f64,
    pub oracle_mode: bool,
    pub pilot1: PilotSummary,
    pub pilot2: PilotSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct PilotSummary {
    pub value_min: f64,
    pub value_max: f64,
    pub truncated: bool,
    pub hash: u64,
}

fn summarize(pilot: &PilotEstimate) -> PilotSummary {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &pilot.values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    PilotSummary {
        value_min: lo,
        value_max: hi,
        truncated: pilot.truncated,
        hash: pilot_hash(pilot),
    }
}

/// The transform's output pair plus its sidecar.
#[derive(Debug, Clone)]
pub struct TransformOutput {
    pub x1: PointProcessRealization,
    pub x2: PointProcessRealization,
    pub sidecar: TransformSidecar,
}

fn set_pass(p: &mut PointProcessRealization, pass: u8) {
    for m in p.marks.iter_mut() {
        m.pass = pass;
    }
}

/// Steps (1)–(6): two transform passes with swapped halves, superposed.
pub fn forward_transform(
    sample: &RegressionSample,
    spec: &ExperimentSpec,
    opts: &PipelineOptions,
    master_seed: u64,
) -> Result<TransformOutput> {
    if sample.n != spec.n {
        return Err(Error::Validation(format!(
            "sample has n = {} but spec says {}",
            sample.n, spec.n
        )));
    }
    let (half_a, half_b) = split_sample(sample)?;
    let m = opts
        .m_override
        .unwrap_or_else(|| default_m(spec.n, spec.alpha));
    let part_a = BlockPartition::new(m, &half_a.xs)?;
    let part_b = BlockPartition::new(m, &half_b.xs)?;
    let centers = part_a.centers();
    let half_n = spec.n / 2;

    let pilot1 = match &opts.oracle_pilot {
        Some(theta) => PilotEstimate::from_oracle(theta, &centers),
        None => pilot_estimate(
            &PilotData::Regression(&half_b),
            spec.c_theta,
            spec.alpha,
            half_n,
            opts.bandwidth_const,
            &centers,
        )?,
    };
    let seed_pass1 = derive_seed(master_seed, "transform-pass", 1);
    let z1 = localize(&half_a, &pilot1, &part_a)?;
    let stats1 = block_extremes(&z1, &part_a, &pilot1)?;
    let (mut xl1, mut xu1) =
        randomize_to_ppp(&stats1, &pilot1, &part_a, spec, opts.side_pair, seed_pass1)?;
    set_pass(&mut xl1, 1);
    set_pass(&mut xu1, 1);

    let pilot2 = match &opts.oracle_pilot {
        Some(theta) => PilotEstimate::from_oracle(theta, &centers),
        None => pilot_estimate(
            &PilotData::Ppp(&xl1, &xu1),
            spec.c_theta,
            spec.alpha,
            half_n,
            opts.bandwidth_const,
            &centers,
        )?,
    };
    let seed_pass2 = derive_seed(master_seed, "transform-pass", 2);
    let z2 = localize(&half_b, &pilot2, &part_b)?;
    let stats2 = block_extremes(&z2, &part_b, &pilot2)?;
    let (mut xl2, mut xu2) =
        randomize_to_ppp(&stats2, &pilot2, &part_b, spec, opts.side_pair, seed_pass2)?;
    set_pass(&mut xl2, 2);
    set_pass(&mut xu2, 2);

    let mut x1 = superpose(&xl1, &xl2)?;
    x1.process_tag = ProcessTag::X1LowerRegion;
    let mut x2 = superpose(&xu1, &xu2)?;
    x2.process_tag = ProcessTag::X2UpperRegion;

    let sidecar = TransformSidecar {
        m,
        master_seed,
        seed_pass1,
        seed_pass2,
        bandwidth_pass1: pilot1.bandwidth,
        bandwidth_pass2: pilot2.bandwidth,
        oracle_mode: opts.oracle_pilot.is_some(),
        pilot1: summarize(&pilot1),
        pilot2: summarize(&pilot2),
    };
    Ok(TransformOutput { x1, x2, sidecar })
}

// ---------------------------------------------------------------------------
// Thinning and superposition
// ---------------------------------------------------------------------------

/// Independent splitting of the point masses: each point goes to the first
/// output with probability `p`. Counts are conserved exactly.
pub fn thin_ppp(
    x: &PointProcessRealization,
    p: f64,
    seed: u64,
) -> Result<(PointProcessRealization, PointProcessRealization)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Validation(format!(
            "thinning probability must lie in [0, 1], got {p}"
        )));
    }
    let mut rng = stream(seed, "thin", 0);
    let mut a = PointProcessRealization::empty(x.process_tag, x.domain, seed);
    let mut b = PointProcessRealization::empty(x.process_tag, x.domain, seed);
    a.intensity_mass = x.intensity_mass * p;
    b.intensity_mass = x.intensity_mass * (1.0 - p);
    for (i, &pt) in x.points.iter().enumerate() {
        let mark = x.marks.get(i).copied().unwrap_or_default();
        if rng.gen::<f64>() < p {
            a.points.push(pt);
            a.marks.push(mark);
        } else {
            b.points.push(pt);
            b.marks.push(mark);
        }
    }
    Ok((a, b))
}

/// Multiset union of two patterns on the same domain; masses add.
pub fn superpose(
    a: &PointProcessRealization,
    b: &PointProcessRealization,
) -> Result<PointProcessRealization> {
    if a.domain != b.domain {
        return Err(Error::Validation(format!(
            "superpose: mismatched domains {:?} vs {:?}",
            a.domain, b.domain
        )));
    }
    let mut out = a.clone();
    out.process_tag = if a.process_tag == b.process_tag {
        a.process_tag
    } else {
        ProcessTag::Other
    };
    out.intensity_mass += b.intensity_mass;
    out.points.extend_from_slice(&b.points);
    out.marks.extend_from_slice(&b.marks);
    Ok(out)
}
