//! Brute-force oracles for the simulator's core computations.
//!
//! None of these reuse the code path they check: the finite-difference
//! gradient has its own dissonance enumeration over ordered triples, the walk
//! check samples literal walks hop by hop, and the replay checks compare
//! independent executions bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::belief_net::{BeliefNetwork, ConceptId};
use crate::dynamics::{apply_trace, two_step_walk_distribution};
use crate::error::{Error, Result};
use crate::experiment::{run_simulation, run_sweep, SimConfig, Simulation, SweepConfig};

/// Significance level of every statistical oracle.
pub const SIGNIFICANCE: f64 = 1e-3;

// Expected counts below this are pooled into one chi-square category.
const MIN_EXPECTED: f64 = 5.0;

fn dense_weights(net: &BeliefNetwork) -> Vec<Vec<f64>> {
    let n = net.n_concepts();
    (0..n)
        .map(|x| {
            (0..n)
                .map(|y| if x == y { 0.0 } else { net.weight(ConceptId(x), ConceptId(y)) })
                .collect()
        })
        .collect()
}

/// Dissonance by summing over all ordered triples of distinct concepts.
fn enumerated_dissonance(w: &[Vec<f64>]) -> f64 {
    let n = w.len();
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a != b && a != c && b != c {
                    total += -w[a][b] * w[a][c] * w[b][c];
                }
            }
        }
    }
    // each unordered triad appears 6 times
    total / (n * (n - 1) * (n - 2)) as f64
}

/// Central finite difference of dissonance with respect to the belief `(x, y)`.
pub fn fd_gradient(net: &BeliefNetwork, x: ConceptId, y: ConceptId, step: f64) -> Result<f64> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidArgument(format!("finite-difference step {step} must be > 0")));
    }
    let n = net.n_concepts();
    if x.0 >= n || y.0 >= n || x == y {
        return Err(Error::InvalidArgument(format!("bad belief ({x}, {y}) for {n} concepts")));
    }
    if n < 3 {
        return Err(Error::Domain("dissonance needs at least 3 concepts".into()));
    }
    let mut w = dense_weights(net);
    let base = w[x.0][y.0];
    let mut at = |v: f64| {
        w[x.0][y.0] = v;
        w[y.0][x.0] = v;
        enumerated_dissonance(&w)
    };
    let plus = at(base + step);
    let minus = at(base - step);
    Ok((plus - minus) / (2.0 * step))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub critical_value: f64,
    /// Samples that landed where the expected probability is zero.
    pub impossible_hits: u64,
    pub passed: bool,
}

/// Pearson goodness-of-fit of `observed` counts against `expected`
/// probabilities at the given significance level. Sparse categories are pooled.
pub fn chi_square_test(expected: &[f64], observed: &[u64], significance: f64) -> ChiSquareOutcome {
    assert_eq!(expected.len(), observed.len());
    let total: u64 = observed.iter().sum();
    let mass: f64 = expected.iter().filter(|p| **p > 0.0).sum();
    let mut categories: Vec<(f64, u64)> = Vec::new();
    let mut pooled = (0.0, 0u64);
    let mut impossible_hits = 0;
    for (&p, &o) in expected.iter().zip(observed) {
        if p <= 0.0 {
            impossible_hits += o;
            continue;
        }
        let e = p / mass * total as f64;
        if e < MIN_EXPECTED {
            pooled.0 += e;
            pooled.1 += o;
        } else {
            categories.push((e, o));
        }
    }
    if pooled.0 > 0.0 {
        categories.push(pooled);
    }
    let statistic: f64 = categories
        .iter()
        .map(|&(e, o)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let df = categories.len().saturating_sub(1);
    let critical_value = if df == 0 {
        0.0
    } else {
        ChiSquared::new(df as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(1.0 - significance)
    };
    let passed = impossible_hits == 0 && (df == 0 || statistic <= critical_value);
    ChiSquareOutcome {
        statistic,
        degrees_of_freedom: df,
        critical_value,
        impossible_hits,
        passed,
    }
}

fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if target < acc {
                return i;
            }
        }
    }
    last
}

/// Destination counts of `n_samples` accepted literal two-step walks from
/// `source`. Walks that stall or end in `excluded` are discarded and redrawn.
/// Returns `None` if walks almost never reach an allowed destination.
pub fn sample_walk_destinations<R: Rng + ?Sized>(
    net: &BeliefNetwork,
    source: ConceptId,
    excluded: &[ConceptId],
    n_samples: u64,
    rng: &mut R,
) -> Option<Vec<u64>> {
    let w = dense_weights(net);
    let n = w.len();
    let s = source.0;
    let first: Vec<f64> = (0..n).map(|k| if k == s { 0.0 } else { w[s][k].abs() }).collect();
    let first_total: f64 = first.iter().sum();
    let second: Vec<Vec<f64>> = (0..n)
        .map(|m| (0..n).map(|k| if k == m || k == s { 0.0 } else { w[m][k].abs() }).collect())
        .collect();
    let second_totals: Vec<f64> = second.iter().map(|r| r.iter().sum()).collect();
    if first_total <= 0.0 {
        return None;
    }
    let mut counts = vec![0u64; n];
    let mut accepted = 0;
    let mut attempts = 0u64;
    let max_attempts = n_samples.saturating_mul(100);
    while accepted < n_samples {
        attempts += 1;
        if attempts > max_attempts {
            return None;
        }
        let mid = pick_weighted(&first, first_total, rng);
        if second_totals[mid] <= 0.0 {
            continue;
        }
        let dest = pick_weighted(&second[mid], second_totals[mid], rng);
        if dest == s || excluded.iter().any(|e| e.0 == dest) {
            continue;
        }
        counts[dest] += 1;
        accepted += 1;
    }
    Some(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkCheck {
    /// The distribution was degenerate (uniform fallback) and nothing was tested.
    pub skipped: bool,
    pub outcome: Option<ChiSquareOutcome>,
}

impl WalkCheck {
    pub fn passed(&self) -> bool {
        self.outcome.as_ref().is_some_and(|o| o.passed)
    }
}

/// Compares [`two_step_walk_distribution`] with the empirical frequencies of
/// `n_samples` literal walks.
pub fn walk_frequency_check<R: Rng + ?Sized>(
    net: &BeliefNetwork,
    source: ConceptId,
    excluded: &[ConceptId],
    n_samples: u64,
    rng: &mut R,
) -> Result<WalkCheck> {
    let exact = two_step_walk_distribution(net, source, excluded)?;
    if exact.fallback {
        return Ok(WalkCheck {
            skipped: true,
            outcome: None,
        });
    }
    walk_frequency_check_against(&exact.probs, net, source, excluded, n_samples, rng)
}

/// Like [`walk_frequency_check`] against caller-supplied probabilities.
pub fn walk_frequency_check_against<R: Rng + ?Sized>(
    expected: &[f64],
    net: &BeliefNetwork,
    source: ConceptId,
    excluded: &[ConceptId],
    n_samples: u64,
    rng: &mut R,
) -> Result<WalkCheck> {
    if n_samples < 10_000 {
        return Err(Error::InvalidArgument(format!("walk check needs >= 1e4 samples, got {n_samples}")));
    }
    if expected.len() != net.n_concepts() {
        return Err(Error::InvalidArgument("expected distribution has the wrong length".into()));
    }
    Ok(match sample_walk_destinations(net, source, excluded, n_samples, rng) {
        None => WalkCheck {
            skipped: true,
            outcome: None,
        },
        Some(counts) => WalkCheck {
            skipped: false,
            outcome: Some(chi_square_test(expected, &counts, SIGNIFICANCE)),
        },
    })
}

fn bits(agents: &[crate::population::Agent]) -> Vec<Vec<u64>> {
    agents
        .iter()
        .map(|a| a.beliefs.upper().iter().map(|w| w.to_bits()).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    /// Two full runs from the same config agree bit for bit.
    pub rerun_identical: bool,
    /// Re-applying the recorded step traces to the initial state reproduces
    /// the final state bit for bit.
    pub trace_replay_identical: bool,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.rerun_identical && self.trace_replay_identical
    }
}

pub fn replay_check(config: &SimConfig) -> Result<ReplayReport> {
    let a = run_simulation(config)?;
    let b = run_simulation(config)?;
    let rerun_identical = bits(&a.agents) == bits(&b.agents)
        && a.series == b.series
        && a.final_histograms == b.final_histograms;

    let mut sim = Simulation::new(config)?;
    let mut replayed = sim.agents().to_vec();
    let mut traces = Vec::with_capacity(config.steps as usize);
    for _ in 0..config.steps {
        traces.push(sim.step());
    }
    for t in &traces {
        apply_trace(&mut replayed, t)?;
    }
    let trace_replay_identical = bits(&replayed) == bits(sim.agents()) && bits(sim.agents()) == bits(&a.agents);

    Ok(ReplayReport {
        rerun_identical,
        trace_replay_identical,
    })
}

/// Runs `sweep` once per thread count and reports whether every grid is identical.
pub fn sweep_thread_check(sweep: &SweepConfig, thread_counts: &[usize]) -> Result<bool> {
    let mut reference = None;
    for &threads in thread_counts {
        let grid = run_sweep(sweep, threads)?;
        match &reference {
            None => reference = Some(grid),
            Some(r) => {
                if *r != grid {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Moves `amount` of probability from the most likely destination to the
/// least likely nonzero one. Requires the largest entry to be at least `amount`.
pub fn shift_mass(probs: &[f64], amount: f64) -> Vec<f64> {
    let mut out = probs.to_vec();
    let hi = (0..out.len()).max_by(|&a, &b| out[a].total_cmp(&out[b])).unwrap_or(0);
    let lo = (0..out.len())
        .filter(|&i| out[i] > 0.0 && i != hi)
        .min_by(|&a, &b| out[a].total_cmp(&out[b]))
        .unwrap_or(hi);
    out[hi] -= amount;
    out[lo] += amount;
    out
}

/// Random network of `n` concepts with weights uniform in `[-1, 1]`.
pub fn random_network<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BeliefNetwork {
    let upper: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.random_range(-1.0..=1.0)).collect();
    BeliefNetwork::from_upper(n, &upper).unwrap()
}

/// Random network whose weight magnitudes span several orders of magnitude.
pub fn skewed_network<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BeliefNetwork {
    let upper: Vec<f64> = (0..n * (n - 1) / 2)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * 10f64.powf(-rng.random_range(0.0..4.0))
        })
        .collect();
    BeliefNetwork::from_upper(n, &upper).unwrap()
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

/// Maximum |analytic − finite difference| over every belief of `count`
/// random 6-concept networks.
pub fn max_gradient_error(count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        // keep weights inside (-0.9, 0.9) so the perturbation never clips
        let upper: Vec<f64> = (0..15).map(|_| rng.random_range(-0.9..0.9)).collect();
        let net = BeliefNetwork::from_upper(6, &upper)?;
        for x in 0..6 {
            for y in x + 1..6 {
                let (cx, cy) = (ConceptId(x), ConceptId(y));
                let analytic = net.dissonance_gradient(cx, cy)?;
                let numeric = fd_gradient(&net, cx, cy, 1e-5)?;
                worst = worst.max((analytic - numeric).abs());
            }
        }
    }
    Ok(worst)
}

/// Outcomes of walk checks on `count` random networks (alternating uniform
/// and skewed weights) with the coherence-step exclusion pattern.
pub fn walk_checks(count: usize, n_samples: u64, seed: u64) -> Result<Vec<WalkCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.random_range(4..=10);
            let net = if k % 2 == 0 {
                random_network(n, &mut rng)
            } else {
                skewed_network(n, &mut rng)
            };
            let source = ConceptId(rng.random_range(0..n));
            let other = loop {
                let c = ConceptId(rng.random_range(0..n));
                if c != source {
                    break c;
                }
            };
            walk_frequency_check(&net, source, &[source, other], n_samples, &mut rng)
        })
        .collect()
}

/// Oracle suite behind `beliefsim validate`.
pub fn run_validation_suite() -> Result<ValidationReport> {
    let mut report = ValidationReport::default();

    let worst = max_gradient_error(100, 0xD155)?;
    report.record(
        "gradient_vs_finite_difference",
        worst <= 1e-8,
        format!("max |error| {worst:.3e} over 100 random 6-concept networks (tolerance 1e-8)"),
    );

    let single = BeliefNetwork::from_upper(3, &[0.1, 0.5, 0.4])?;
    let fd = fd_gradient(&single, ConceptId(0), ConceptId(1), 1e-5)?;
    report.record(
        "single_triad_gradient",
        (fd + 0.2).abs() <= 1e-10,
        format!("finite difference {fd:.12} (expected -0.2)"),
    );

    let checks = walk_checks(20, 1_000_000, 0x3A1C)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let worst_ratio = checks
        .iter()
        .filter_map(|c| c.outcome.as_ref())
        .map(|o| if o.critical_value > 0.0 { o.statistic / o.critical_value } else { 0.0 })
        .fold(0.0, f64::max);
    report.record(
        "walk_distribution_vs_sampled_walks",
        failed == 0,
        format!("{failed}/20 networks rejected at 1e6 samples; max chi2/critical {worst_ratio:.3}"),
    );

    // The oracle must notice a 0.05 shift of probability mass.
    let mut rng = ChaCha8Rng::seed_from_u64(0x0BAD);
    let net = random_network(6, &mut rng);
    let (source, other) = (ConceptId(0), ConceptId(1));
    let exact = two_step_walk_distribution(&net, source, &[source, other])?;
    let corrupted = shift_mass(&exact.probs, 0.05);
    let mutant = walk_frequency_check_against(&corrupted, &net, source, &[source, other], 1_000_000, &mut rng)?;
    report.record(
        "walk_oracle_detects_corruption",
        !mutant.passed(),
        format!("corrupted distribution {}", if mutant.passed() { "accepted" } else { "rejected" }),
    );

    let small = SimConfig {
        n_agents: 10,
        n_edges: 20,
        steps: 10_000,
        sample_interval: 1_000,
        seed: 0x5EED,
        ..SimConfig::default()
    };
    let replay = replay_check(&small)?;
    report.record(
        "run_replay",
        replay.passed(),
        format!(
            "rerun identical: {}, trace replay identical: {}",
            replay.rerun_identical, replay.trace_replay_identical
        ),
    );

    let other_seed = SimConfig { seed: small.seed + 1, ..small.clone() };
    let differs = run_simulation(&small)?.agents != run_simulation(&other_seed)?.agents;
    report.record("different_seeds_differ", differs, format!("final states differ: {differs}"));

    let sweep = SweepConfig {
        alpha_values: vec![0.0, 0.5, 1.0],
        beta_values: vec![0.0, 1.0],
        runs_per_cell: 2,
        base_seed: 0x5EED,
        template: SimConfig {
            steps: 2_000,
            ..small
        },
    };
    let same = sweep_thread_check(&sweep, &[1, 2, 8])?;
    report.record("sweep_thread_independence", same, format!("grids identical at 1, 2, 8 workers: {same}"));

    Ok(report)
}
