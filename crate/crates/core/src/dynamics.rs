//! One simulation step: pick a receiver and a sender, transmit one belief,
//! then let the receiver adjust an adjacent belief to lower its dissonance.
//!
//! The adjacent belief is found by two-step walks from one endpoint of the
//! transmitted belief, each hop weighted by `|weight|`. The second hop never
//! returns along the edge it just crossed, and destinations equal to either
//! endpoint of the transmitted belief are excluded, so the adjusted belief
//! always shares exactly one concept with the transmitted one.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::belief_net::{BeliefNetwork, ConceptId};
use crate::error::{Error, Result};
use crate::population::{translate_concept, Agent, AgentId, SocialGraph, GROUP_A, GROUP_B, LATTE, SELF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfluenceMode {
    /// Receiver moves toward the sender: mean `alpha * (b_j - b_i)`.
    Convergent,
    /// Sender's belief is added on top: mean `alpha * b_j`.
    Reinforcing,
}

impl fmt::Display for InfluenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfluenceMode::Convergent => f.write_str("convergent"),
            InfluenceMode::Reinforcing => f.write_str("reinforcing"),
        }
    }
}

impl FromStr for InfluenceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "convergent" => Ok(InfluenceMode::Convergent),
            "reinforcing" => Ok(InfluenceMode::Reinforcing),
            other => Err(format!("unknown influence mode `{other}` (expected convergent|reinforcing)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    /// Social influence strength, in `[0, 1]`.
    pub alpha: f64,
    /// Coherence strength, `>= 0`.
    pub beta: f64,
    /// Noise standard deviation shared by both updates.
    pub sigma: f64,
    pub influence_mode: InfluenceMode,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            alpha: 1.0,
            beta: 1.0,
            sigma: 0.1,
            influence_mode: InfluenceMode::Convergent,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config("alpha", format!("{} not in [0, 1]", self.alpha)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::config("beta", format!("{} must be finite and >= 0", self.beta)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config("sigma", format!("{} must be finite and >= 0", self.sigma)));
        }
        Ok(())
    }
}

/// A single belief change. `delta` is the drawn increment before clipping;
/// `applied` is false when the belief is fixed and nothing changed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefUpdate {
    pub edge: (ConceptId, ConceptId),
    pub delta: f64,
    pub applied: bool,
}

/// Everything needed to replay one step on the prior state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub receiver: AgentId,
    pub sender: AgentId,
    /// Transmitted belief, in receiver coordinates. `None` if the sender had
    /// nothing the receiver could represent.
    pub social: Option<BeliefUpdate>,
    pub coherence: Option<BeliefUpdate>,
    /// The walk distribution collapsed and the destination was drawn uniformly.
    pub walk_fallback: bool,
}

/// Destination distribution of the two-step walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkDistribution {
    /// Probability per concept id; sums to 1.
    pub probs: Vec<f64>,
    /// True when no weighted path reached an allowed destination and the
    /// distribution is uniform over allowed concepts instead.
    pub fallback: bool,
}

impl WalkDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ConceptId {
        sample_index(&self.probs, rng)
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> ConceptId {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return ConceptId(i);
            }
        }
    }
    ConceptId(last)
}

/// Exact destination distribution of a two-step weighted walk from `source`.
///
/// First hop: `source -> mid` with probability `|b(source, mid)|` normalized
/// over all beliefs incident to `source`. Second hop: `mid -> dest` with
/// `dest != source`, normalized over the beliefs of `mid` other than the one
/// back to `source`. Concepts in `excluded` (and `source` itself) get zero
/// probability and the rest is renormalized.
pub fn two_step_walk_distribution(
    net: &BeliefNetwork,
    source: ConceptId,
    excluded: &[ConceptId],
) -> Result<WalkDistribution> {
    let mut buf = WalkBuffers::new(net.n_concepts());
    let fallback = fill_walk_distribution(net, source, excluded, &mut buf)?;
    Ok(WalkDistribution {
        probs: buf.probs,
        fallback,
    })
}

#[derive(Debug, Clone, Default)]
struct WalkBuffers {
    probs: Vec<f64>,
}

impl WalkBuffers {
    fn new(n: usize) -> Self {
        WalkBuffers { probs: vec![0.0; n] }
    }

    fn resize(&mut self, n: usize) {
        self.probs.resize(n, 0.0);
    }
}

// Writes the distribution into `buf.probs`; returns the fallback flag.
fn fill_walk_distribution(
    net: &BeliefNetwork,
    source: ConceptId,
    excluded: &[ConceptId],
    buf: &mut WalkBuffers,
) -> Result<bool> {
    let n = net.n_concepts();
    if source.0 >= n || excluded.iter().any(|c| c.0 >= n) {
        return Err(Error::InvalidArgument(format!("concept out of range for {n} concepts")));
    }
    buf.resize(n);
    let allowed = |c: usize| c != source.0 && !excluded.iter().any(|e| e.0 == c);
    let n_allowed = (0..n).filter(|&c| allowed(c)).count();
    if n_allowed == 0 {
        return Err(Error::DegenerateDistribution(format!(
            "no destination from {source} outside the excluded set"
        )));
    }

    let probs = &mut buf.probs;
    probs.iter_mut().for_each(|p| *p = 0.0);
    let first_total: f64 = net.row(source).iter().map(|w| w.abs()).sum();
    if first_total > 0.0 {
        for (mid, w1) in net.row(source).iter().enumerate() {
            let w1 = w1.abs();
            if w1 == 0.0 {
                continue;
            }
            let row = net.row(ConceptId(mid));
            let second_total = row.iter().map(|w| w.abs()).sum::<f64>() - row[source.0].abs();
            if second_total <= 0.0 {
                continue;
            }
            let scale = w1 / first_total / second_total;
            for (p, w2) in probs.iter_mut().zip(row) {
                *p += scale * w2.abs();
            }
        }
    }

    let mut total = 0.0;
    for (c, p) in probs.iter_mut().enumerate() {
        if allowed(c) {
            total += *p;
        } else {
            *p = 0.0;
        }
    }
    if total > 0.0 {
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(false)
    } else {
        let u = 1.0 / n_allowed as f64;
        for (c, p) in probs.iter_mut().enumerate() {
            *p = if allowed(c) { u } else { 0.0 };
        }
        Ok(true)
    }
}

/// Uniform receiver, then a uniform neighbor of the receiver as sender.
pub fn select_interaction<R: Rng + ?Sized>(graph: &SocialGraph, rng: &mut R) -> (AgentId, AgentId) {
    let receiver = rng.random_range(0..graph.n_agents());
    let neighbors = graph.neighbors(receiver);
    assert!(!neighbors.is_empty(), "agent {receiver} has no neighbors");
    let sender = neighbors[rng.random_range(0..neighbors.len())];
    (receiver, sender)
}

/// Step driver holding the parameters plus scratch space reused across steps.
#[derive(Debug, Clone)]
pub struct Dynamics {
    params: DynamicsParams,
    walk: WalkBuffers,
    // (sender concept, receiver concept) pairs the receiver can represent
    shared: Vec<(ConceptId, ConceptId)>,
}

impl Dynamics {
    pub fn new(params: DynamicsParams) -> Self {
        Dynamics {
            params,
            walk: WalkBuffers::default(),
            shared: Vec::new(),
        }
    }

    pub fn params(&self) -> &DynamicsParams {
        &self.params
    }

    fn collect_shared(&mut self, receiver: &Agent, sender: &Agent) {
        self.shared.clear();
        for c in [SELF, LATTE, GROUP_A, GROUP_B] {
            if let Some(t) = translate_concept(sender, receiver, c).unwrap() {
                self.shared.push((c, t));
            }
        }
        // Sender's neighbors that the receiver also knows, or the receiver itself.
        let theirs = sender.neighbors();
        let mine = receiver.neighbors();
        let (mut i, mut j) = (0, 0);
        while i < theirs.len() {
            let agent = theirs[i];
            let sender_concept = sender.neighbor_concept(agent).unwrap();
            if agent == receiver.id {
                self.shared.push((sender_concept, SELF));
                i += 1;
                continue;
            }
            while j < mine.len() && mine[j] < agent {
                j += 1;
            }
            if j < mine.len() && mine[j] == agent {
                self.shared.push((sender_concept, receiver.neighbor_concept(agent).unwrap()));
            }
            i += 1;
        }
    }

    /// Transmits one of the sender's beliefs, chosen uniformly among those
    /// whose endpoints both exist in the receiver's network.
    pub fn social_update<R: Rng + ?Sized>(
        &mut self,
        receiver: &mut Agent,
        sender: &Agent,
        rng: &mut R,
    ) -> Option<BeliefUpdate> {
        self.collect_shared(receiver, sender);
        let t = self.shared.len();
        if t < 2 {
            return None;
        }
        let (p, q) = decode_pair(rng.random_range(0..t * (t - 1) / 2), t);
        let (sx, rx) = self.shared[p];
        let (sy, ry) = self.shared[q];
        let theirs = sender.beliefs.weight(sx, sy);
        let mine = receiver.beliefs.weight(rx, ry);
        let mean = match self.params.influence_mode {
            InfluenceMode::Convergent => self.params.alpha * (theirs - mine),
            InfluenceMode::Reinforcing => self.params.alpha * theirs,
        };
        let delta = mean + self.params.sigma * rng.sample::<f64, _>(StandardNormal);
        let applied = !receiver.beliefs.is_fixed(rx, ry);
        receiver.beliefs.set_belief_clipped(rx, ry, delta).unwrap();
        Some(BeliefUpdate {
            edge: (rx, ry),
            delta,
            applied,
        })
    }

    /// Gradient step on a belief adjacent to `focal`. Returns the update and
    /// whether the walk distribution fell back to uniform.
    pub fn coherence_update<R: Rng + ?Sized>(
        &mut self,
        receiver: &mut Agent,
        focal: (ConceptId, ConceptId),
        rng: &mut R,
    ) -> Result<(BeliefUpdate, bool)> {
        let (a, b) = focal;
        let (source, other) = if rng.random_range(0..2) == 0 { (a, b) } else { (b, a) };
        let net = &receiver.beliefs;
        let fallback = fill_walk_distribution(net, source, &[source, other], &mut self.walk)?;
        let dest = sample_index(&self.walk.probs, rng);
        let grad = net.dissonance_gradient(source, dest)?;
        let delta = -self.params.beta * grad + self.params.sigma * rng.sample::<f64, _>(StandardNormal);
        let applied = !net.is_fixed(source, dest);
        receiver.beliefs.set_belief_clipped(source, dest, delta)?;
        Ok((
            BeliefUpdate {
                edge: (source, dest),
                delta,
                applied,
            },
            fallback,
        ))
    }

    /// Interaction selection, social update, then coherence update on the receiver.
    pub fn step<R: Rng + ?Sized>(&mut self, agents: &mut [Agent], graph: &SocialGraph, rng: &mut R) -> StepTrace {
        let (receiver, sender) = select_interaction(graph, rng);
        let (recv, send) = pair_mut(agents, receiver, sender);
        let social = self.social_update(recv, send, rng);
        let mut trace = StepTrace {
            receiver,
            sender,
            social,
            coherence: None,
            walk_fallback: false,
        };
        if let Some(update) = social {
            // Networks built by `population` always have >= 4 concepts, so the
            // walk always has a destination.
            let (coherence, fallback) = self
                .coherence_update(recv, update.edge, rng)
                .expect("belief network too small for a coherence step");
            trace.coherence = Some(coherence);
            trace.walk_fallback = fallback;
        }
        trace
    }
}

/// Re-applies a recorded step to the state it was recorded on.
pub fn apply_trace(agents: &mut [Agent], trace: &StepTrace) -> Result<()> {
    let agent = agents
        .get_mut(trace.receiver)
        .ok_or_else(|| Error::InvalidArgument(format!("no agent {}", trace.receiver)))?;
    for update in trace.social.iter().chain(trace.coherence.iter()) {
        agent.beliefs.set_belief_clipped(update.edge.0, update.edge.1, update.delta)?;
    }
    Ok(())
}

// k-th unordered pair (p < q) out of t items, in (0,1), (0,2), ..., (1,2), ... order.
fn decode_pair(mut k: usize, t: usize) -> (usize, usize) {
    for p in 0..t {
        let row = t - p - 1;
        if k < row {
            return (p, p + 1 + k);
        }
        k -= row;
    }
    unreachable!("pair index out of range")
}

fn pair_mut(agents: &mut [Agent], receiver: AgentId, sender: AgentId) -> (&mut Agent, &Agent) {
    assert_ne!(receiver, sender);
    if receiver < sender {
        let (lo, hi) = agents.split_at_mut(sender);
        (&mut lo[receiver], &hi[0])
    } else {
        let (lo, hi) = agents.split_at_mut(receiver);
        (&mut hi[0], &lo[sender])
    }
}
