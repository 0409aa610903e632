//! Full runs and α×β sweeps.
//!
//! Every run owns a single ChaCha8 stream seeded from its config. Sweep runs
//! get seeds derived from `(base_seed, alpha index, beta index, run index)`,
//! so a sweep's result does not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Dynamics, DynamicsParams, InfluenceMode, StepTrace};
use crate::error::{Error, Result};
use crate::metrics::{snapshot_histograms, HistogramSet, MetricsSample, MetricsSeries};
use crate::population::{check_graph_feasible, generate_social_graph, init_agents, Agent, SocialGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_agents: usize,
    pub n_edges: usize,
    pub steps: u64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub influence_mode: InfluenceMode,
    /// Standard deviation of the initial non-fixed beliefs.
    pub init_sigma: f64,
    pub sample_interval: u64,
    pub bin_count: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let dynamics = DynamicsParams::default();
        SimConfig {
            n_agents: 100,
            n_edges: 200,
            steps: 2_500_000,
            alpha: dynamics.alpha,
            beta: dynamics.beta,
            sigma: dynamics.sigma,
            influence_mode: dynamics.influence_mode,
            init_sigma: 1e-5,
            sample_interval: 10_000,
            bin_count: 20,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn dynamics(&self) -> DynamicsParams {
        DynamicsParams {
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma,
            influence_mode: self.influence_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_graph_feasible(self.n_agents, self.n_edges)?;
        self.dynamics().validate()?;
        if self.steps == 0 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if !(self.init_sigma >= 0.0 && self.init_sigma.is_finite()) {
            return Err(Error::config("init_sigma", format!("{} must be finite and >= 0", self.init_sigma)));
        }
        if self.sample_interval == 0 {
            return Err(Error::config("sample_interval", "must be at least 1"));
        }
        if self.bin_count < 2 {
            return Err(Error::config("bin_count", format!("{} < 2", self.bin_count)));
        }
        Ok(())
    }
}

/// A population plus the machinery to advance it one step at a time.
pub struct Simulation {
    graph: SocialGraph,
    agents: Vec<Agent>,
    dynamics: Dynamics,
    rng: ChaCha8Rng,
    step: u64,
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let graph = generate_social_graph(config.n_agents, config.n_edges, &mut rng)?;
        let agents = init_agents(&graph, config.init_sigma, &mut rng)?;
        Ok(Simulation {
            graph,
            agents,
            dynamics: Dynamics::new(config.dynamics()),
            rng,
            step: 0,
        })
    }

    pub fn step(&mut self) -> StepTrace {
        self.step += 1;
        self.dynamics.step(&mut self.agents, &self.graph, &mut self.rng)
    }

    /// Steps taken so far.
    pub fn steps_done(&self) -> u64 {
        self.step
    }

    pub fn graph(&self) -> &SocialGraph {
        &self.graph
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn measure(&self) -> Result<MetricsSample> {
        MetricsSample::measure(self.step, &self.agents)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: MetricsSeries,
    pub initial_histograms: HistogramSet,
    pub final_histograms: HistogramSet,
    pub graph: SocialGraph,
    pub agents: Vec<Agent>,
}

/// Runs `config.steps` steps, sampling at step 0, every `sample_interval`
/// steps, and at the final step.
pub fn run_simulation(config: &SimConfig) -> Result<RunOutput> {
    let mut sim = Simulation::new(config)?;
    let mut series = MetricsSeries::new();
    series.push(sim.measure()?)?;
    let initial_histograms = snapshot_histograms(sim.agents(), config.bin_count)?;
    while sim.steps_done() < config.steps {
        sim.step();
        let t = sim.steps_done();
        if t % config.sample_interval == 0 || t == config.steps {
            series.push(sim.measure()?)?;
        }
    }
    let final_histograms = snapshot_histograms(sim.agents(), config.bin_count)?;
    Ok(RunOutput {
        series,
        initial_histograms,
        final_histograms,
        graph: sim.graph,
        agents: sim.agents,
    })
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run` in cell `(alpha_index, beta_index)`.
pub fn derive_seed(base_seed: u64, alpha_index: usize, beta_index: usize, run: usize) -> u64 {
    [alpha_index, beta_index, run]
        .iter()
        .fold(mix64(base_seed), |acc, &k| mix64(acc ^ mix64(k as u64)))
}

/// `0.0, 0.1, ..., 1.0`
pub fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub alpha_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub runs_per_cell: usize,
    pub base_seed: u64,
    /// Everything but `alpha`, `beta`, and `seed` is taken from here.
    pub template: SimConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            alpha_values: default_grid(),
            beta_values: default_grid(),
            runs_per_cell: 10,
            base_seed: 0,
            template: SimConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_values.is_empty() {
            return Err(Error::config("alpha_values", "grid is empty"));
        }
        if self.beta_values.is_empty() {
            return Err(Error::config("beta_values", "grid is empty"));
        }
        if self.runs_per_cell == 0 {
            return Err(Error::config("runs_per_cell", "must be at least 1"));
        }
        for (i, &a) in self.alpha_values.iter().enumerate() {
            self.cell_config(i, 0, 0, a, self.beta_values[0]).validate().map_err(|e| relabel(e, "alpha_values"))?;
        }
        for (j, &b) in self.beta_values.iter().enumerate() {
            self.cell_config(0, j, 0, self.alpha_values[0], b).validate().map_err(|e| relabel(e, "beta_values"))?;
        }
        Ok(())
    }

    fn cell_config(&self, ai: usize, bi: usize, run: usize, alpha: f64, beta: f64) -> SimConfig {
        SimConfig {
            alpha,
            beta,
            seed: derive_seed(self.base_seed, ai, bi, run),
            ..self.template.clone()
        }
    }

    /// Config of one run of one cell, exactly as the sweep executes it.
    pub fn run_config(&self, alpha_index: usize, beta_index: usize, run: usize) -> SimConfig {
        self.cell_config(
            alpha_index,
            beta_index,
            run,
            self.alpha_values[alpha_index],
            self.beta_values[beta_index],
        )
    }
}

fn relabel(e: Error, grid: &str) -> Error {
    match e {
        Error::Config { key, message } if key == "alpha" || key == "beta" => Error::Config {
            key: grid.to_string(),
            message,
        },
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub opinion_polarization: f64,
    pub affective_polarization: f64,
    pub mean_dissonance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub mean_opinion_polarization: f64,
    pub mean_affective_polarization: f64,
    /// Per-run final metrics, in run order.
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub alpha_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    /// Row-major over alpha, then beta.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, alpha_index: usize, beta_index: usize) -> &SweepCell {
        &self.cells[alpha_index * self.beta_values.len() + beta_index]
    }
}

/// Final metrics of one run, without keeping the time series.
pub fn run_final(config: &SimConfig) -> Result<RunSummary> {
    let mut sim = Simulation::new(config)?;
    for _ in 0..config.steps {
        sim.step();
    }
    let m = sim.measure()?;
    Ok(RunSummary {
        opinion_polarization: m.opinion_polarization,
        affective_polarization: m.affective_polarization,
        mean_dissonance: m.mean_dissonance,
    })
}

/// Runs every cell of the sweep on a pool of `threads` workers (0 = rayon default).
pub fn run_sweep(sweep: &SweepConfig, threads: usize) -> Result<SweepGrid> {
    run_sweep_with_progress(sweep, threads, |_, _| {})
}

/// Like [`run_sweep`], calling `progress(done, total)` as runs finish.
pub fn run_sweep_with_progress<F>(sweep: &SweepConfig, threads: usize, progress: F) -> Result<SweepGrid>
where
    F: Fn(usize, usize) + Sync,
{
    sweep.validate()?;
    let (na, nb, nr) = (sweep.alpha_values.len(), sweep.beta_values.len(), sweep.runs_per_cell);
    let total = na * nb * nr;
    let done = std::sync::atomic::AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<RunSummary>> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|k| {
                let (ai, rest) = (k / (nb * nr), k % (nb * nr));
                let (bi, run) = (rest / nr, rest % nr);
                let out = run_final(&sweep.run_config(ai, bi, run));
                let finished = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(finished, total);
                out
            })
            .collect()
    });
    let runs: Vec<RunSummary> = results.into_iter().collect::<Result<_>>()?;
    let cells = runs
        .chunks(nr)
        .enumerate()
        .map(|(cell, chunk)| {
            let (ai, bi) = (cell / nb, cell % nb);
            let mean = |f: fn(&RunSummary) -> f64| chunk.iter().map(f).sum::<f64>() / nr as f64;
            SweepCell {
                alpha: sweep.alpha_values[ai],
                beta: sweep.beta_values[bi],
                mean_opinion_polarization: mean(|r| r.opinion_polarization),
                mean_affective_polarization: mean(|r| r.affective_polarization),
                runs: chunk.to_vec(),
            }
        })
        .collect();
    Ok(SweepGrid {
        alpha_values: sweep.alpha_values.clone(),
        beta_values: sweep.beta_values.clone(),
        cells,
    })
}
