//! Social graph generation, group assignment, and per-agent belief networks.
//!
//! Every agent's belief network holds the same four shared concepts followed
//! by one concept per social neighbor:
//!
//! | id        | entity                         |
//! |-----------|--------------------------------|
//! | 0         | self                           |
//! | 1         | latte                          |
//! | 2         | Group A                        |
//! | 3         | Group B                        |
//! | 4..4+deg  | neighbors, ascending agent id  |

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::belief_net::{BeliefNetwork, ConceptId};
use crate::error::{Error, Result};

pub type AgentId = usize;

pub const SELF: ConceptId = ConceptId(0);
pub const LATTE: ConceptId = ConceptId(1);
pub const GROUP_A: ConceptId = ConceptId(2);
pub const GROUP_B: ConceptId = ConceptId(3);
const FIRST_NEIGHBOR: usize = 4;

// Rejection sampling for the min-degree constraint gives up after this many graphs.
const MAX_GRAPH_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn concept(self) -> ConceptId {
        match self {
            Group::A => GROUP_A,
            Group::B => GROUP_B,
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }
}

/// Global entity a concept node stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entity {
    Myself,
    Latte,
    GroupA,
    GroupB,
    Agent(AgentId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialGraph {
    n_agents: usize,
    edges: Vec<(AgentId, AgentId)>,
    adjacency: Vec<Vec<AgentId>>,
}

impl SocialGraph {
    /// Builds a graph from an explicit edge list. Rejects self-loops,
    /// duplicates, out-of-range endpoints, and isolated agents.
    pub fn from_edges(n_agents: usize, edges: &[(AgentId, AgentId)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n_agents];
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n_agents || b >= n_agents {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at agent {a}")));
            }
            let e = (a.min(b), a.max(b));
            if normalized.contains(&e) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({a}, {b})")));
            }
            normalized.push(e);
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        if let Some(isolated) = adjacency.iter().position(Vec::is_empty) {
            return Err(Error::InvalidArgument(format!("agent {isolated} has no neighbors")));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        normalized.sort_unstable();
        Ok(SocialGraph {
            n_agents,
            edges: normalized,
            adjacency,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn edges(&self) -> &[(AgentId, AgentId)] {
        &self.edges
    }

    /// Neighbors of `agent`, ascending.
    pub fn neighbors(&self, agent: AgentId) -> &[AgentId] {
        &self.adjacency[agent]
    }

    pub fn degree(&self, agent: AgentId) -> usize {
        self.adjacency[agent].len()
    }
}

/// Checks that a simple graph with `n_edges` edges and no isolated agent exists.
pub fn check_graph_feasible(n_agents: usize, n_edges: usize) -> Result<()> {
    if n_agents < 2 {
        return Err(Error::config("n_agents", format!("need at least 2 agents, got {n_agents}")));
    }
    let max_edges = n_agents * (n_agents - 1) / 2;
    if n_edges > max_edges {
        return Err(Error::config(
            "n_edges",
            format!("{n_edges} edges exceed the {max_edges} possible among {n_agents} agents"),
        ));
    }
    if 2 * n_edges < n_agents {
        return Err(Error::config(
            "n_edges",
            format!("{n_edges} edges cannot cover all {n_agents} agents"),
        ));
    }
    Ok(())
}

/// Uniform random simple graph with exactly `n_edges` edges, resampled until
/// every agent has at least one neighbor.
pub fn generate_social_graph<R: Rng + ?Sized>(
    n_agents: usize,
    n_edges: usize,
    rng: &mut R,
) -> Result<SocialGraph> {
    check_graph_feasible(n_agents, n_edges)?;
    let pairs: Vec<(AgentId, AgentId)> = (0..n_agents)
        .flat_map(|a| (a + 1..n_agents).map(move |b| (a, b)))
        .collect();
    let mut degree = vec![0usize; n_agents];
    for _ in 0..MAX_GRAPH_ATTEMPTS {
        let chosen = index::sample(rng, pairs.len(), n_edges);
        degree.iter_mut().for_each(|d| *d = 0);
        for i in chosen.iter() {
            let (a, b) = pairs[i];
            degree[a] += 1;
            degree[b] += 1;
        }
        if degree.iter().all(|&d| d > 0) {
            let edges: Vec<_> = chosen.iter().map(|i| pairs[i]).collect();
            return SocialGraph::from_edges(n_agents, &edges);
        }
    }
    Err(Error::config(
        "n_edges",
        format!(
            "no graph without isolated agents found in {MAX_GRAPH_ATTEMPTS} attempts \
             ({n_agents} agents, {n_edges} edges)"
        ),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub group: Group,
    pub beliefs: BeliefNetwork,
    neighbors: Vec<AgentId>,
}

impl Agent {
    /// An agent whose network has the shared concepts plus one node per
    /// neighbor, with every non-fixed belief at zero and the self-group
    /// beliefs fixed at `+1` (own group) and `-1` (other group).
    pub fn new(id: AgentId, group: Group, neighbors: &[AgentId]) -> Self {
        let mut neighbors = neighbors.to_vec();
        neighbors.sort_unstable();
        neighbors.dedup();
        let mut beliefs = BeliefNetwork::new(FIRST_NEIGHBOR + neighbors.len());
        beliefs.fix_belief(SELF, group.concept(), 1.0).unwrap();
        beliefs.fix_belief(SELF, group.other().concept(), -1.0).unwrap();
        Agent {
            id,
            group,
            beliefs,
            neighbors,
        }
    }

    /// Social neighbors, ascending. Neighbor `k` of this list is concept `4 + k`.
    pub fn neighbors(&self) -> &[AgentId] {
        &self.neighbors
    }

    pub fn n_concepts(&self) -> usize {
        self.beliefs.n_concepts()
    }

    pub fn entity(&self, concept: ConceptId) -> Result<Entity> {
        match concept.0 {
            0 => Ok(Entity::Myself),
            1 => Ok(Entity::Latte),
            2 => Ok(Entity::GroupA),
            3 => Ok(Entity::GroupB),
            k if k < self.n_concepts() => Ok(Entity::Agent(self.neighbors[k - FIRST_NEIGHBOR])),
            _ => Err(Error::InvalidArgument(format!(
                "{concept} not in agent {}'s network of {} concepts",
                self.id,
                self.n_concepts()
            ))),
        }
    }

    /// Concept id of `entity` in this agent's network, if it has one.
    /// `Entity::Agent(self.id)` resolves to the self node.
    pub fn concept_of(&self, entity: Entity) -> Option<ConceptId> {
        match entity {
            Entity::Myself => Some(SELF),
            Entity::Latte => Some(LATTE),
            Entity::GroupA => Some(GROUP_A),
            Entity::GroupB => Some(GROUP_B),
            Entity::Agent(a) if a == self.id => Some(SELF),
            Entity::Agent(a) => self
                .neighbors
                .binary_search(&a)
                .ok()
                .map(|k| ConceptId(FIRST_NEIGHBOR + k)),
        }
    }

    /// Concept id of the node representing neighbor `agent`.
    pub fn neighbor_concept(&self, agent: AgentId) -> Option<ConceptId> {
        if agent == self.id {
            return None;
        }
        self.concept_of(Entity::Agent(agent))
    }
}

/// Maps a concept of `sender`'s network to the node for the same entity in
/// `receiver`'s network. Returns `None` when the receiver has no such node.
pub fn translate_concept(sender: &Agent, receiver: &Agent, concept: ConceptId) -> Result<Option<ConceptId>> {
    let global = match sender.entity(concept)? {
        Entity::Myself => Entity::Agent(sender.id),
        other => other,
    };
    Ok(receiver.concept_of(global))
}

/// Random balanced partition: exactly `n / 2` agents in Group A, the rest in B.
pub fn assign_groups<R: Rng + ?Sized>(n_agents: usize, rng: &mut R) -> Vec<Group> {
    let mut order: Vec<AgentId> = (0..n_agents).collect();
    order.shuffle(rng);
    let mut groups = vec![Group::B; n_agents];
    for &a in &order[..n_agents / 2] {
        groups[a] = Group::A;
    }
    groups
}

/// Creates one agent per graph node with a random balanced group partition
/// and every non-fixed belief drawn from `Normal(0, init_sigma)` (clipped).
pub fn init_agents<R: Rng + ?Sized>(graph: &SocialGraph, init_sigma: f64, rng: &mut R) -> Result<Vec<Agent>> {
    let noise = Normal::new(0.0, init_sigma)
        .map_err(|e| Error::config("init_sigma", format!("{init_sigma}: {e}")))?;
    let groups = assign_groups(graph.n_agents(), rng);
    let agents = (0..graph.n_agents())
        .map(|id| {
            let mut agent = Agent::new(id, groups[id], graph.neighbors(id));
            let n = agent.n_concepts();
            for x in 0..n {
                for y in x + 1..n {
                    let (x, y) = (ConceptId(x), ConceptId(y));
                    if !agent.beliefs.is_fixed(x, y) {
                        agent.beliefs.set_belief(x, y, noise.sample(rng)).unwrap();
                    }
                }
            }
            agent
        })
        .collect();
    Ok(agents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn default_size_graph() {
        let g = generate_social_graph(100, 200, &mut rng(1)).unwrap();
        assert_eq!(g.edges().len(), 200);
        assert!((0..100).all(|a| g.degree(a) >= 1));
        let degree_sum: usize = (0..100).map(|a| g.degree(a)).sum();
        assert_eq!(degree_sum, 400);
        let mut e = g.edges().to_vec();
        e.dedup();
        assert_eq!(e.len(), 200);
        assert!(e.iter().all(|(a, b)| a < b));
    }

    #[test]
    fn forced_graphs() {
        let g = generate_social_graph(2, 1, &mut rng(3)).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        let k4 = generate_social_graph(4, 6, &mut rng(3)).unwrap();
        assert_eq!(k4.edges(), &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn infeasible_graphs_rejected() {
        assert!(matches!(generate_social_graph(4, 7, &mut rng(0)), Err(Error::Config { .. })));
        assert!(matches!(generate_social_graph(10, 4, &mut rng(0)), Err(Error::Config { .. })));
        assert!(matches!(generate_social_graph(1, 0, &mut rng(0)), Err(Error::Config { .. })));
    }

    #[test]
    fn agents_initialized() {
        let mut r = rng(7);
        let g = generate_social_graph(100, 200, &mut r).unwrap();
        let agents = init_agents(&g, 1e-5, &mut r).unwrap();
        assert_eq!(agents.iter().filter(|a| a.group == Group::A).count(), 50);
        for a in &agents {
            assert_eq!(a.n_concepts(), 4 + g.degree(a.id));
            let own = a.group.concept();
            let other = a.group.other().concept();
            assert_eq!(a.beliefs.weight(SELF, own), 1.0);
            assert_eq!(a.beliefs.weight(SELF, other), -1.0);
            let n = a.n_concepts();
            let mut fixed = 0;
            for x in 0..n {
                for y in x + 1..n {
                    let (cx, cy) = (ConceptId(x), ConceptId(y));
                    if a.beliefs.is_fixed(cx, cy) {
                        fixed += 1;
                    } else {
                        assert!(a.beliefs.weight(cx, cy).abs() < 1e-3);
                    }
                }
            }
            assert_eq!(fixed, 2);
        }
    }

    #[test]
    fn odd_population_split() {
        let groups = assign_groups(7, &mut rng(2));
        assert_eq!(groups.iter().filter(|&&g| g == Group::A).count(), 3);
    }

    #[test]
    fn wide_init_sigma_is_clipped() {
        let g = generate_social_graph(6, 8, &mut rng(9)).unwrap();
        let agents = init_agents(&g, 10.0, &mut rng(9)).unwrap();
        for a in &agents {
            assert!(a.beliefs.upper().iter().all(|w| (-1.0..=1.0).contains(w)));
        }
    }

    // Bob(0) - Alice(1) - Carol(2)
    fn path3() -> Vec<Agent> {
        let g = SocialGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        init_agents(&g, 1e-5, &mut rng(5)).unwrap()
    }

    #[test]
    fn translate_examples() {
        let agents = path3();
        let (bob, alice) = (&agents[0], &agents[1]);
        let alice_in_bob = bob.neighbor_concept(1).unwrap();
        assert_eq!(translate_concept(alice, bob, SELF).unwrap(), Some(alice_in_bob));
        assert_eq!(translate_concept(alice, bob, LATTE).unwrap(), Some(LATTE));
        assert_eq!(translate_concept(alice, bob, GROUP_B).unwrap(), Some(GROUP_B));
        let bob_in_alice = alice.neighbor_concept(0).unwrap();
        assert_eq!(translate_concept(alice, bob, bob_in_alice).unwrap(), Some(SELF));
        let carol_in_alice = alice.neighbor_concept(2).unwrap();
        assert_eq!(translate_concept(alice, bob, carol_in_alice).unwrap(), None);
        assert!(translate_concept(alice, bob, ConceptId(99)).is_err());
    }

    #[test]
    fn concept_map_is_bijective_and_round_trips() {
        let mut r = rng(11);
        let g = generate_social_graph(30, 60, &mut r).unwrap();
        let agents = init_agents(&g, 1e-5, &mut r).unwrap();
        for a in &agents {
            for c in 0..a.n_concepts() {
                let e = a.entity(ConceptId(c)).unwrap();
                assert_eq!(a.concept_of(e), Some(ConceptId(c)));
            }
        }
        for &(x, y) in g.edges() {
            let (sx, rx) = (&agents[x], &agents[y]);
            for c in 0..sx.n_concepts() {
                if let Some(t) = translate_concept(sx, rx, ConceptId(c)).unwrap() {
                    assert_eq!(translate_concept(rx, sx, t).unwrap(), Some(ConceptId(c)));
                }
            }
        }
    }
}
