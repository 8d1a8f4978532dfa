//! Robust two-sample statistics, the sustainability penalty report, and
//! refactoring-action frequencies.
//!
//! Sign convention: every two-sample quantity is "first sample minus second
//! sample". The penalty report passes the power-aware experiment first and
//! the baseline second.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::nsga2::Solution;
use crate::objectives::{Objective, ObjectiveVector};
use crate::refactor::ActionKind;

/// Significance level of the Mann-Whitney U test.
pub const ALPHA: f64 = 0.05;

/// `n1 * n2` up to which the exact permutation distribution is used.
pub const EXACT_LIMIT: usize = 400;

/// Objective order of the penalty table.
pub const PSP_ORDER: [Objective; 4] = [
    Objective::Cost,
    Objective::Complexity,
    Objective::Power,
    Objective::ResponseTime,
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("U statistic {u} outside [0, {max}]")]
    UOutOfRange { u: f64, max: f64 },
    #[error("objective sets differ between the two experiments")]
    MismatchedObjectives,
}

fn check(x: &[f64]) -> Result<(), StatsError> {
    if x.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// Median of a non-empty slice (sorted in place); midpoint for even lengths.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); 0 for a single value.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    libm::sqrt(ss / (values.len() - 1) as f64)
}

/// Median of all pairwise differences `x_i - y_j`.
pub fn hodges_lehmann(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check(x)?;
    check(y)?;
    let mut diffs: Vec<f64> = x.iter().flat_map(|a| y.iter().map(move |b| a - b)).collect();
    Ok(median(&mut diffs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwuMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuResult {
    /// U of the first sample: pairs with `x > y`, ties counted one half.
    pub u: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub method: MwuMethod,
}

/// Midranks (1-based) of the pooled sample, plus the tie-group sizes.
fn midranks(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut pooled: Vec<(f64, usize)> = x.iter().chain(y).copied().enumerate().map(|(i, v)| (v, i)).collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for item in &pooled[i..=j] {
            ranks[item.1] = r;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

fn u_statistic(ranks: &[f64], n1: usize) -> f64 {
    let r1: f64 = ranks[..n1].iter().sum();
    r1 - (n1 * (n1 + 1)) as f64 / 2.0
}

/// Two-sided test on the exact permutation distribution of the rank sum,
/// conditional on the observed ties.
pub fn mann_whitney_exact(x: &[f64], y: &[f64]) -> Result<MwuResult, StatsError> {
    check(x)?;
    check(y)?;
    let (n1, n2) = (x.len(), y.len());
    let n = n1 + n2;
    let (ranks, _) = midranks(x, y);
    let u = u_statistic(&ranks, n1);

    // Doubled midranks are integers; count subsets of size k by doubled sum.
    let doubled: Vec<usize> = ranks.iter().map(|r| libm::round(2.0 * r) as usize).collect();
    let (k, observed): (usize, usize) = if n1 <= n2 {
        (n1, doubled[..n1].iter().sum())
    } else {
        (n2, doubled[n1..].iter().sum())
    };
    let max_sum: usize = doubled.iter().sum();
    let mut counts = vec![vec![0.0f64; max_sum + 1]; k + 1];
    counts[0][0] = 1.0;
    let mut reach = 0;
    for &d in &doubled {
        reach += d;
        for size in (1..=k).rev() {
            let (lower, upper) = counts.split_at_mut(size);
            let (prev, cur) = (&lower[size - 1], &mut upper[0]);
            for s in (d..=reach.min(max_sum)).rev() {
                if prev[s - d] != 0.0 {
                    cur[s] += prev[s - d];
                }
            }
        }
    }
    let center = (k * (n + 1)) as i64;
    let dev = |s: usize| (s as i64 - center).abs();
    let observed_dev = dev(observed);
    let (mut extreme, mut total) = (0.0, 0.0);
    for (s, &c) in counts[k].iter().enumerate() {
        total += c;
        if dev(s) >= observed_dev {
            extreme += c;
        }
    }
    Ok(MwuResult {
        u,
        p_value: (extreme / total).min(1.0),
        method: MwuMethod::Exact,
    })
}

/// Two-sided normal approximation with tie and continuity corrections.
pub fn mann_whitney_normal(x: &[f64], y: &[f64]) -> Result<MwuResult, StatsError> {
    check(x)?;
    check(y)?;
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let n = n1 + n2;
    let (ranks, ties) = midranks(x, y);
    let u = u_statistic(&ranks, x.len());
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = if n > 1.0 {
        n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - n1 * n2 / 2.0).abs() - 0.5).max(0.0) / libm::sqrt(var);
        libm::erfc(z / core::f64::consts::SQRT_2).min(1.0)
    };
    Ok(MwuResult {
        u,
        p_value,
        method: MwuMethod::Normal,
    })
}

/// Exact distribution when `n1 * n2 <= EXACT_LIMIT`, normal approximation otherwise.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<MwuResult, StatsError> {
    if x.len() * y.len() <= EXACT_LIMIT {
        mann_whitney_exact(x, y)
    } else {
        mann_whitney_normal(x, y)
    }
}

/// `2U / (n1 n2) - 1`.
pub fn cliffs_delta(u: f64, n1: usize, n2: usize) -> Result<f64, StatsError> {
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::EmptySample);
    }
    let max = (n1 * n2) as f64;
    if !(0.0..=max).contains(&u) {
        return Err(StatsError::UOutOfRange { u, max });
    }
    Ok(2.0 * u / max - 1.0)
}

/// `(#(x > y) - #(x < y)) / (n1 n2)` by direct pair counting.
pub fn cliffs_delta_pairs(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check(x)?;
    check(y)?;
    let mut score = 0i64;
    for a in x {
        for b in y {
            score += match a.partial_cmp(b) {
                Some(Ordering::Greater) => 1,
                Some(Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    Ok(score as f64 / (x.len() * y.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    pub fn name(self) -> &'static str {
        match self {
            Magnitude::Negligible => "negligible",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Romano et al. thresholds on `|delta|`: 0.147, 0.33, 0.474.
pub fn classify_magnitude(delta: f64) -> Magnitude {
    let d = delta.abs();
    if d < 0.147 {
        Magnitude::Negligible
    } else if d < 0.33 {
        Magnitude::Small
    } else if d < 0.474 {
        Magnitude::Medium
    } else {
        Magnitude::Large
    }
}

/// One objective's penalty row.
#[derive(Debug, Clone, PartialEq)]
pub struct PspRow {
    pub objective: Objective,
    pub mean_difference: f64,
    pub hl: f64,
    pub mwu_p: f64,
    pub cliffs_delta: f64,
    /// `(hl, delta)` when significant, `(hl, 0)` otherwise.
    pub psp: (f64, f64),
    pub magnitude: Magnitude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PspReport {
    pub rows: Vec<PspRow>,
}

/// Objective values per objective, pooled over solutions.
pub type ObjectiveSamples = BTreeMap<Objective, Vec<f64>>;

/// Pools every objective of a set of vectors.
pub fn samples_of(vectors: &[ObjectiveVector]) -> ObjectiveSamples {
    Objective::ALL
        .into_iter()
        .map(|o| (o, vectors.iter().map(|v| v.get(o)).collect()))
        .collect()
}

fn psp_row(objective: Objective, with_power: &[f64], baseline: &[f64]) -> Result<PspRow, StatsError> {
    let hl = hodges_lehmann(with_power, baseline)?;
    let test = mann_whitney_u(with_power, baseline)?;
    let delta = cliffs_delta(test.u, with_power.len(), baseline.len())?;
    let (psp, magnitude) = if test.p_value < ALPHA {
        ((hl, delta), classify_magnitude(delta))
    } else {
        ((hl, 0.0), Magnitude::Negligible)
    };
    Ok(PspRow {
        objective,
        mean_difference: mean(with_power) - mean(baseline),
        hl,
        mwu_p: test.p_value,
        cliffs_delta: delta,
        psp,
        magnitude,
    })
}

/// Penalty of adding the power objective, per objective, in table order.
pub fn psp(baseline: &ObjectiveSamples, power_aware: &ObjectiveSamples) -> Result<PspReport, StatsError> {
    if baseline.keys().ne(power_aware.keys()) {
        return Err(StatsError::MismatchedObjectives);
    }
    let rows = PSP_ORDER
        .into_iter()
        .filter(|o| baseline.contains_key(o))
        .map(|o| psp_row(o, &power_aware[&o], &baseline[&o]))
        .collect::<Result<_, _>>()?;
    Ok(PspReport { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub kind: ActionKind,
    pub target: String,
    pub destination: Option<String>,
    pub count: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrequencyReport {
    pub rows: Vec<FrequencyRow>,
    pub total: usize,
}

/// Counts `(kind, target, destination)` over every action of every solution;
/// rows sorted by decreasing count, then by key.
pub fn action_frequencies<T: Solution>(front: &[T]) -> FrequencyReport {
    let mut counts: BTreeMap<(ActionKind, &str, Option<&str>), usize> = BTreeMap::new();
    let mut total = 0;
    for s in front {
        for a in s.genotype().actions() {
            *counts
                .entry((a.kind, a.target.as_str(), a.destination.as_deref()))
                .or_default() += 1;
            total += 1;
        }
    }
    let mut rows: Vec<FrequencyRow> = counts
        .into_iter()
        .map(|((kind, target, destination), count)| FrequencyRow {
            kind,
            target: target.into(),
            destination: destination.map(Into::into),
            count,
            percentage: 100.0 * count as f64 / total as f64,
        })
        .collect();
    rows.sort_by_key(|r| core::cmp::Reverse(r.count));
    FrequencyReport { rows, total }
}
