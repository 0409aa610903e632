//! Population-level observables.

use serde::{Deserialize, Serialize};

use crate::belief_net::ConceptId;
use crate::error::{Error, Result};
use crate::population::{Agent, Group, GROUP_A, LATTE, SELF};

/// Gap between the two groups' mean belief `b_i(self, concept)`, in `[0, 2]`.
pub fn opinion_polarization(agents: &[Agent], concept: ConceptId) -> Result<f64> {
    let (mut sum_a, mut n_a, mut sum_b, mut n_b) = (0.0, 0usize, 0.0, 0usize);
    for agent in agents {
        let w = agent.beliefs.try_weight(SELF, concept)?;
        match agent.group {
            Group::A => {
                sum_a += w;
                n_a += 1;
            }
            Group::B => {
                sum_b += w;
                n_b += 1;
            }
        }
    }
    if n_a == 0 || n_b == 0 {
        return Err(Error::Domain("opinion polarization needs both groups non-empty".into()));
    }
    Ok((sum_a / n_a as f64 - sum_b / n_b as f64).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffectivePolarization {
    pub value: f64,
    /// Agents left out because they lack an ingroup or an outgroup neighbor.
    pub skipped: usize,
}

/// Population mean of each agent's (ingroup mean − outgroup mean) belief
/// toward its neighbors, split by the neighbors' true groups.
///
/// Agents without at least one neighbor from each group are skipped and the
/// mean runs over the rest.
pub fn affective_polarization(agents: &[Agent]) -> Result<AffectivePolarization> {
    let mut total = 0.0;
    let mut counted = 0usize;
    let mut skipped = 0usize;
    for agent in agents {
        let (mut sum_in, mut n_in, mut sum_out, mut n_out) = (0.0, 0usize, 0.0, 0usize);
        for &nb in agent.neighbors() {
            let other = agents
                .get(nb)
                .ok_or_else(|| Error::InvalidArgument(format!("neighbor {nb} not in population")))?;
            let w = agent.beliefs.weight(SELF, agent.neighbor_concept(nb).unwrap());
            if other.group == agent.group {
                sum_in += w;
                n_in += 1;
            } else {
                sum_out += w;
                n_out += 1;
            }
        }
        if n_in == 0 || n_out == 0 {
            skipped += 1;
            continue;
        }
        total += sum_in / n_in as f64 - sum_out / n_out as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::Domain(
            "no agent has both an ingroup and an outgroup neighbor".into(),
        ));
    }
    Ok(AffectivePolarization {
        value: total / counted as f64,
        skipped,
    })
}

pub fn mean_dissonance(agents: &[Agent]) -> Result<f64> {
    if agents.is_empty() {
        return Err(Error::Domain("mean dissonance of an empty population".into()));
    }
    let mut total = 0.0;
    for agent in agents {
        total += agent.beliefs.dissonance()?;
    }
    Ok(total / agents.len() as f64)
}

/// Fixed-range histogram over `[-1, 1]`; `1.0` lands in the top bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidArgument(format!("histogram needs >= 2 bins, got {bins}")));
        }
        Ok(Histogram { counts: vec![0; bins] })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, value: f64) {
        let bins = self.counts.len();
        let pos = ((value + 1.0) / 2.0 * bins as f64).floor();
        let idx = if pos.is_nan() { 0 } else { (pos.max(0.0) as usize).min(bins - 1) };
        self.counts[idx] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(lower, upper)` edges of bin `i`.
    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let width = 2.0 / self.counts.len() as f64;
        (-1.0 + i as f64 * width, -1.0 + (i + 1) as f64 * width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramSet {
    /// `b_i(self, latte)` for Group A members.
    pub latte_group_a: Histogram,
    /// `b_i(self, latte)` for Group B members.
    pub latte_group_b: Histogram,
    /// `b_i(Group A, latte)` pooled over everyone.
    pub group_a_latte: Histogram,
    /// `b_i(self, j)` for every ingroup neighbor `j`.
    pub ingroup: Histogram,
    /// `b_i(self, j)` for every outgroup neighbor `j`.
    pub outgroup: Histogram,
}

impl HistogramSet {
    pub fn named(&self) -> [(&'static str, &Histogram); 5] {
        [
            ("latte_group_a", &self.latte_group_a),
            ("latte_group_b", &self.latte_group_b),
            ("group_a_latte", &self.group_a_latte),
            ("ingroup", &self.ingroup),
            ("outgroup", &self.outgroup),
        ]
    }
}

pub fn snapshot_histograms(agents: &[Agent], bins: usize) -> Result<HistogramSet> {
    let mut set = HistogramSet {
        latte_group_a: Histogram::new(bins)?,
        latte_group_b: Histogram::new(bins)?,
        group_a_latte: Histogram::new(bins)?,
        ingroup: Histogram::new(bins)?,
        outgroup: Histogram::new(bins)?,
    };
    for agent in agents {
        let latte = agent.beliefs.weight(SELF, LATTE);
        match agent.group {
            Group::A => set.latte_group_a.add(latte),
            Group::B => set.latte_group_b.add(latte),
        }
        set.group_a_latte.add(agent.beliefs.weight(GROUP_A, LATTE));
        for &nb in agent.neighbors() {
            let w = agent.beliefs.weight(SELF, agent.neighbor_concept(nb).unwrap());
            if agents[nb].group == agent.group {
                set.ingroup.add(w);
            } else {
                set.outgroup.add(w);
            }
        }
    }
    Ok(set)
}

/// Beliefs of every agent toward its ingroup and outgroup neighbors.
pub fn neighbor_beliefs(agents: &[Agent]) -> (Vec<f64>, Vec<f64>) {
    let mut ingroup = Vec::new();
    let mut outgroup = Vec::new();
    for agent in agents {
        for &nb in agent.neighbors() {
            let w = agent.beliefs.weight(SELF, agent.neighbor_concept(nb).unwrap());
            if agents[nb].group == agent.group {
                ingroup.push(w);
            } else {
                outgroup.push(w);
            }
        }
    }
    (ingroup, outgroup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSample {
    pub step: u64,
    pub opinion_polarization: f64,
    pub affective_polarization: f64,
    pub mean_dissonance: f64,
    pub affective_skipped: usize,
}

impl MetricsSample {
    pub fn measure(step: u64, agents: &[Agent]) -> Result<Self> {
        let pa = affective_polarization(agents)?;
        Ok(MetricsSample {
            step,
            opinion_polarization: opinion_polarization(agents, LATTE)?,
            affective_polarization: pa.value,
            mean_dissonance: mean_dissonance(agents)?,
            affective_skipped: pa.skipped,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    samples: Vec<MetricsSample>,
}

impl MetricsSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample. Steps must be strictly increasing.
    pub fn push(&mut self, sample: MetricsSample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if sample.step <= last.step {
                return Err(Error::InvalidArgument(format!(
                    "sample at step {} does not follow step {}",
                    sample.step, last.step
                )));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn samples(&self) -> &[MetricsSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&MetricsSample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&MetricsSample> {
        self.samples.last()
    }
}
