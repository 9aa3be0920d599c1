//! Goodness-of-fit statistic helpers: Kolmogorov–Smirnov distances and
//! chi-square statistics for count data. Only statistics are computed here;
//! tests compare them against external critical values.

/// One-sample KS distance between `samples` and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// KS distance of values in `[0, 1]` against the uniform law.
pub fn ks_uniform(pit: &[f64]) -> f64 {
    ks_statistic(pit, |u| u.clamp(0.0, 1.0))
}

/// Two-sided KS critical value at level `alpha` (asymptotic), e.g.
/// `alpha = 0.01` gives `1.628 / sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c / (n as f64).sqrt()
}

/// Chi-square statistic for observed counts against Poisson(`mean`), pooling
/// bins from both tails until each expected count is at least `min_expected`.
/// Returns `(statistic, degrees_of_freedom)`.
pub fn chisq_poisson(counts: &[u64], mean: f64, min_expected: f64) -> (f64, usize) {
    let n = counts.len() as f64;
    let kmax = counts.iter().copied().max().unwrap_or(0) as usize;
    // Poisson pmf by forward recurrence.
    let mut pmf = Vec::with_capacity(kmax + 2);
    let mut p = (-mean).exp();
    pmf.push(p);
    for k in 1..=kmax {
        p *= mean / k as f64;
        pmf.push(p);
    }
    let tail = 1.0 - pmf.iter().sum::<f64>();
    let mut observed: Vec<f64> = vec![0.0; kmax + 2];
    for &c in counts {
        observed[c as usize] += 1.0;
    }
    let mut expected: Vec<f64> = pmf.iter().map(|q| q * n).collect();
    expected.push(tail.max(0.0) * n);
    pool_and_chisq(&observed, &expected, min_expected)
}

/// Chi-square homogeneity statistic for two count samples (same binning,
/// pooled so every expected cell is at least `min_expected`).
pub fn chisq_two_sample_counts(a: &[u64], b: &[u64], min_expected: f64) -> (f64, usize) {
    let kmax = a.iter().chain(b.iter()).copied().max().unwrap_or(0) as usize;
    let mut oa = vec![0.0; kmax + 1];
    let mut ob = vec![0.0; kmax + 1];
    for &c in a {
        oa[c as usize] += 1.0;
    }
    for &c in b {
        ob[c as usize] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    // Pool adjacent bins until both expected halves clear the floor.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for k in 0..=kmax {
        ca += oa[k];
        cb += ob[k];
        let tot = ca + cb;
        if tot * na / (na + nb) >= min_expected && tot * nb / (na + nb) >= min_expected {
            bins.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        if let Some(last) = bins.last_mut() {
            last.0 += ca;
            last.1 += cb;
        } else {
            bins.push((ca, cb));
        }
    }
    let mut stat = 0.0;
    for &(x, y) in &bins {
        let tot = x + y;
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        if ea > 0.0 {
            stat += (x - ea) * (x - ea) / ea;
        }
        if eb > 0.0 {
            stat += (y - eb) * (y - eb) / eb;
        }
    }
    (stat, bins.len().saturating_sub(1))
}

fn pool_and_chisq(observed: &[f64], expected: &[f64], min_expected: f64) -> (f64, usize) {
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for i in 0..observed.len().max(expected.len()) {
        o += observed.get(i).copied().unwrap_or(0.0);
        e += expected.get(i).copied().unwrap_or(0.0);
        if e >= min_expected {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        if let Some(last) = bins.last_mut() {
            last.0 += o;
            last.1 += e;
        } else {
            bins.push((o, e));
        }
    }
    let stat = bins
        .iter()
        .filter(|&&(_, e)| e > 0.0)
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    (stat, bins.len().saturating_sub(1))
}
