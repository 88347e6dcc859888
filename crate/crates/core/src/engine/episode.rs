use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CueInput, EpisodeConfig, Mode, Network, Occupancy, StableSubgraph, TargetPreference};
use crate::graph::NodeId;
use crate::node::{normalize, select_fanout, ActivationTrace, NodeSet};
use crate::par::map_indices;
use crate::seed::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    Resting,
    Active,
    Dormant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Link {
    /// Chosen, not delivered yet.
    Pending,
    /// Delivered to a resting node that has not activated yet.
    Offered,
    /// Delivered to an active node: an edge of the subgraph.
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Intent {
    target: NodeId,
    link: Link,
}

/// Dynamic state of one node during an episode.
#[derive(Debug, Clone)]
pub struct NodeRuntime {
    pub state: NodeState,
    pub is_initial: bool,
    /// First upstream node still delivering here.
    pub owner: Option<NodeId>,
    /// Upstream nodes currently delivering stimulus here, in arrival order.
    pub current_in: Vec<NodeId>,
    pub repath_count: u32,
    /// Tick of the first delivery since the node last had no input.
    opened: Option<u32>,
    /// Key the fan-out decision was looked up with.
    decision_in: NodeSet,
    /// Resting and holding undecided stimulus.
    stimulated: bool,
    decided: bool,
    intents: Vec<Intent>,
}

impl NodeRuntime {
    fn resting() -> Self {
        NodeRuntime {
            state: NodeState::Resting,
            is_initial: false,
            owner: None,
            current_in: Vec::new(),
            repath_count: 0,
            opened: None,
            decision_in: Vec::new(),
            stimulated: false,
            decided: false,
            intents: Vec::new(),
        }
    }

    /// Downstream nodes currently receiving stimulus from this node.
    pub fn fan_out(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.intents.iter().filter(|i| i.link == Link::Live).map(|i| i.target)
    }

    fn engaged(&self) -> bool {
        self.state != NodeState::Resting
    }

    fn has_unsettled(&self) -> bool {
        self.intents.iter().any(|i| i.link != Link::Live)
    }
}

/// How a due node reaches its fan-out decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Attempt {
    /// Table lookup, fresh draw on a miss.
    First,
    /// Fresh draw only.
    Repath,
}

enum Delivery {
    Live,
    Offered,
    Wait,
    Refused,
}

pub(crate) struct Episode<'a> {
    net: &'a Network,
    cfg: &'a EpisodeConfig,
    initials: Vec<NodeId>,
    nodes: Vec<NodeRuntime>,
    tick: u32,
    /// Resting nodes holding stimulus.
    stimulated: BTreeSet<NodeId>,
    due: Vec<(NodeId, Attempt)>,
    /// Nodes with intents that are not live yet.
    unsettled: BTreeSet<NodeId>,
    worklist: Vec<NodeId>,
    changed: bool,
    release_rounds: u32,
}

impl<'a> Episode<'a> {
    pub(crate) fn new(net: &'a Network, initial: &BTreeSet<NodeId>, cfg: &'a EpisodeConfig) -> Self {
        let n = net.graph().node_count();
        let mut nodes = vec![NodeRuntime::resting(); n];
        for &v in initial {
            let rt = &mut nodes[v.index()];
            rt.state = NodeState::Active;
            rt.is_initial = true;
            rt.decision_in = match cfg.cue_input {
                CueInput::Empty | CueInput::FanIn => Vec::new(),
                CueInput::CueNeighbors => {
                    net.graph().in_neighbors(v).iter().copied().filter(|u| initial.contains(u)).collect()
                }
                CueInput::WholeCue => initial.iter().copied().collect(),
            };
        }
        let initials: Vec<NodeId> = initial.iter().copied().collect();
        let due = initials.iter().map(|&v| (v, Attempt::First)).collect();
        Episode {
            net,
            cfg,
            initials,
            nodes,
            tick: 0,
            stimulated: BTreeSet::new(),
            due,
            unsettled: BTreeSet::new(),
            worklist: Vec::new(),
            changed: false,
            release_rounds: 0,
        }
    }

    pub(crate) fn run(net: &'a Network, initial: &BTreeSet<NodeId>, cfg: &'a EpisodeConfig) -> Self {
        let mut ep = Self::new(net, initial, cfg);
        ep.run_to_end();
        ep
    }

    fn storing(&self) -> bool {
        self.cfg.mode == Mode::Store
    }

    pub(crate) fn run_to_end(&mut self) {
        while self.tick < self.cfg.max_ticks {
            self.step();
            if self.changed {
                continue;
            }
            if !self.unsettled.is_empty() {
                self.abandon_unsettled();
                continue;
            }
            if !self.storing() || !self.has_dormant() || self.release_rounds >= self.cfg.max_release_rounds {
                break;
            }
            self.release_rounds += 1;
            let released = self.release_resources();
            self.wake_dormant();
            if !released {
                break;
            }
        }
    }

    /// One synchronous tick: activation of stimulated nodes, fan-out
    /// decisions, delivery in a seeded order, avalanche retraction and
    /// re-pathfinding bookkeeping.
    pub(crate) fn step(&mut self) {
        self.changed = false;
        self.activate_stimulated();
        self.decide_due();
        self.deliver();
        self.settle_retractions();
        if self.storing() {
            self.track_failed_initials();
        }
        self.tick += 1;
    }

    fn activate_stimulated(&mut self) {
        let storing = self.storing();
        let roll = storing || self.cfg.retrieval_uses_activation_probability;
        for v in std::mem::take(&mut self.stimulated) {
            let rt = &self.nodes[v.index()];
            if !rt.stimulated {
                continue;
            }
            if rt.current_in.is_empty() {
                self.nodes[v.index()].stimulated = false;
                continue;
            }
            if !storing {
                let key = normalize(rt.current_in.clone());
                if !self.net.table(v).lookup(&key, self.cfg.similarity_threshold).matched {
                    // may match once more upstream nodes arrive
                    self.stimulated.insert(v);
                    continue;
                }
            }
            let fires = !roll || {
                let mut rng = seed::rng(self.cfg.seed, &[tag::ACTIVATION, u64::from(self.tick), u64::from(v.0)]);
                rng.gen::<f64>() < self.cfg.activation_probability
            };
            if !fires && self.cfg.retry_activation {
                // still stimulated; rolls again next tick
                self.stimulated.insert(v);
                self.changed |= self.cfg.activation_probability > 0.0;
                continue;
            }
            if !fires {
                self.changed = true;
                let rt = &mut self.nodes[v.index()];
                rt.stimulated = false;
                rt.owner = None;
                rt.opened = None;
                for d in std::mem::take(&mut rt.current_in) {
                    let rd = &mut self.nodes[d.index()];
                    rd.intents.retain(|i| i.target != v);
                    if !rd.has_unsettled() {
                        self.unsettled.remove(&d);
                    }
                    self.worklist.push(d);
                }
                continue;
            }
            self.changed = true;
            let rt = &mut self.nodes[v.index()];
            rt.stimulated = false;
            rt.state = NodeState::Active;
            rt.decision_in = normalize(rt.current_in.clone());
            let upstream = rt.current_in.clone();
            self.due.push((v, Attempt::First));
            for d in upstream {
                self.set_link(d, v, Link::Live);
            }
        }
    }

    fn set_link(&mut self, from: NodeId, to: NodeId, link: Link) {
        let rt = &mut self.nodes[from.index()];
        for i in rt.intents.iter_mut().filter(|i| i.target == to) {
            i.link = link;
        }
        if !rt.has_unsettled() {
            self.unsettled.remove(&from);
        }
    }

    fn decide_due(&mut self) {
        let mut due = std::mem::take(&mut self.due);
        if due.is_empty() {
            return;
        }
        due.sort_unstable_by_key(|&(v, _)| v);
        due.dedup_by_key(|&mut (v, _)| v);
        self.changed = true;
        let this = &*self;
        let decide = |i: usize| this.decide(due[i].0, due[i].1);
        let choices: Vec<NodeSet> =
            if self.cfg.parallel { map_indices(due.len(), decide) } else { (0..due.len()).map(decide).collect() };
        for ((v, _), targets) in due.into_iter().zip(choices) {
            let rt = &mut self.nodes[v.index()];
            rt.decided = true;
            rt.intents = targets.into_iter().map(|target| Intent { target, link: Link::Pending }).collect();
            if rt.intents.is_empty() {
                self.worklist.push(v);
            } else {
                self.unsettled.insert(v);
            }
        }
    }

    /// Fan-out choice of `v`; reads only the state at the start of the
    /// decision phase and the node's own random stream.
    fn decide(&self, v: NodeId, attempt: Attempt) -> NodeSet {
        let rt = &self.nodes[v.index()];
        let table = self.net.table(v);
        let upstream = |t: &NodeId| rt.current_in.contains(t);
        if attempt == Attempt::First || !self.storing() {
            let key = self.lookup_key(rt);
            let m = table.lookup(&key, self.cfg.similarity_threshold);
            if m.matched {
                // traces may name neighbours whose edge has since been removed
                let g = self.net.graph();
                return m.fan_out.into_iter().filter(|t| *t != v && !upstream(t) && g.has_edge(v, *t)).collect();
            }
            if !self.storing() {
                return Vec::new();
            }
        }
        let mut rng = seed::rng(self.cfg.seed, &[tag::DECISION, u64::from(self.tick), u64::from(v.0)]);
        let (mut active, mut resting) = (Vec::new(), Vec::new());
        for &t in self.net.graph().out_neighbors(v) {
            if upstream(&t) {
                continue;
            }
            let tr = &self.nodes[t.index()];
            if !self.accepts(tr) {
                continue;
            }
            if tr.engaged() {
                active.push(t);
            } else {
                resting.push(t);
            }
        }
        match self.cfg.target_preference {
            TargetPreference::Uniform => {
                active.extend(resting);
                select_fanout(table, &normalize(active), self.cfg.e_out, &mut rng)
            }
            TargetPreference::ActiveFirst => {
                let mut chosen = select_fanout(table, &active, self.cfg.e_out, &mut rng);
                if chosen.len() < self.cfg.e_out {
                    chosen.extend(select_fanout(table, &resting, self.cfg.e_out - chosen.len(), &mut rng));
                }
                normalize(chosen)
            }
        }
    }

    fn lookup_key(&self, rt: &NodeRuntime) -> NodeSet {
        if rt.is_initial && self.cfg.cue_input == CueInput::FanIn {
            normalize(rt.current_in.clone())
        } else {
            rt.decision_in.clone()
        }
    }

    /// Whether `tr` takes stimulus from one more upstream node this tick.
    fn accepts(&self, tr: &NodeRuntime) -> bool {
        if tr.engaged() && !tr.is_initial && self.cfg.occupancy != Occupancy::Open {
            return false;
        }
        match self.cfg.occupancy {
            Occupancy::Exclusive => tr.current_in.is_empty(),
            // replayed paths may reach an initial node a tick apart
            Occupancy::SharedInitials if tr.is_initial && !self.storing() => true,
            Occupancy::SharedInitials if tr.is_initial => tr.opened.is_none_or(|t| t == self.tick),
            Occupancy::SharedInitials => tr.current_in.is_empty(),
            Occupancy::SameTick => tr.opened.is_none_or(|t| t == self.tick),
            Occupancy::Open => true,
        }
    }

    fn deliver(&mut self) {
        if self.unsettled.is_empty() {
            return;
        }
        let mut order: Vec<NodeId> = self.unsettled.iter().copied().collect();
        let mut rng = seed::rng(self.cfg.seed, &[tag::PERMUTATION, u64::from(self.tick)]);
        order.shuffle(&mut rng);
        for u in order {
            if self.nodes[u.index()].state != NodeState::Active {
                continue;
            }
            let mut intents = std::mem::take(&mut self.nodes[u.index()].intents);
            intents.retain_mut(|intent| {
                if intent.link != Link::Pending {
                    return true;
                }
                match self.try_deliver(u, intent.target) {
                    Delivery::Live => intent.link = Link::Live,
                    Delivery::Offered => intent.link = Link::Offered,
                    Delivery::Wait => return true,
                    Delivery::Refused => {
                        self.changed = true;
                        return false;
                    }
                }
                self.changed = true;
                true
            });
            let rt = &mut self.nodes[u.index()];
            rt.intents = intents;
            if !rt.has_unsettled() {
                self.unsettled.remove(&u);
            }
            if rt.intents.is_empty() {
                self.worklist.push(u);
            }
        }
    }

    fn try_deliver(&mut self, u: NodeId, t: NodeId) -> Delivery {
        let tick = self.tick;
        let tr = &self.nodes[t.index()];
        if !self.accepts(tr) {
            if !tr.engaged() && matches!(self.cfg.occupancy, Occupancy::Exclusive | Occupancy::SharedInitials) {
                // lost the race; refused once the claimant settles
                return Delivery::Wait;
            }
            return Delivery::Refused;
        }
        let waiting = !self.storing() && self.cfg.cue_input == CueInput::FanIn;
        let tr = &mut self.nodes[t.index()];
        tr.owner.get_or_insert(u);
        tr.opened.get_or_insert(tick);
        tr.current_in.push(u);
        if tr.engaged() {
            if waiting && tr.is_initial && tr.intents.is_empty() {
                self.due.push((t, Attempt::First));
            }
            return Delivery::Live;
        }
        if !tr.stimulated {
            tr.stimulated = true;
            self.stimulated.insert(t);
        }
        Delivery::Offered
    }

    /// Avalanche: non-initial active nodes that deliver nowhere fall back to
    /// resting, which may leave their upstream nodes delivering nowhere.
    fn settle_retractions(&mut self) {
        while let Some(u) = self.worklist.pop() {
            let rt = &self.nodes[u.index()];
            if rt.state == NodeState::Active && !rt.is_initial && rt.decided && rt.intents.is_empty() {
                self.changed = true;
                self.retract(u);
            }
        }
    }

    /// Returns `u` to resting and withdraws every delivery into and out of
    /// it. Non-initial nodes left without any upstream node retract too.
    fn retract(&mut self, u: NodeId) {
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            let rt = &mut self.nodes[x.index()];
            if rt.is_initial || rt.state != NodeState::Active {
                continue;
            }
            rt.state = NodeState::Resting;
            rt.owner = None;
            rt.opened = None;
            rt.decided = false;
            rt.decision_in.clear();
            let upstream = std::mem::take(&mut rt.current_in);
            let downstream = std::mem::take(&mut rt.intents);
            self.unsettled.remove(&x);
            for d in upstream {
                let rd = &mut self.nodes[d.index()];
                rd.intents.retain(|i| i.target != x);
                if !rd.has_unsettled() {
                    self.unsettled.remove(&d);
                }
                self.worklist.push(d);
            }
            for i in downstream {
                if i.link == Link::Pending {
                    continue;
                }
                if self.detach(x, i.target) {
                    stack.push(i.target);
                }
            }
        }
    }

    /// Removes `from` from the inputs of `to`. Returns whether `to` is an
    /// active non-initial node left without input.
    fn detach(&mut self, from: NodeId, to: NodeId) -> bool {
        let c = &mut self.nodes[to.index()];
        c.current_in.retain(|&d| d != from);
        if c.owner == Some(from) {
            c.owner = c.current_in.first().copied();
        }
        if c.current_in.is_empty() {
            c.opened = None;
        }
        c.current_in.is_empty() && !c.is_initial && c.state == NodeState::Active
    }

    fn track_failed_initials(&mut self) {
        for k in 0..self.initials.len() {
            let v = self.initials[k];
            let rt = &mut self.nodes[v.index()];
            if rt.state != NodeState::Active || !rt.decided || !rt.intents.is_empty() {
                continue;
            }
            self.changed = true;
            if rt.repath_count < self.cfg.repath_limit {
                rt.repath_count += 1;
                rt.decided = false;
                self.due.push((v, Attempt::Repath));
            } else {
                rt.state = NodeState::Dormant;
            }
        }
    }

    /// Quiescent, yet some deliveries can never complete: abandon them.
    fn abandon_unsettled(&mut self) {
        for u in std::mem::take(&mut self.unsettled) {
            let intents = std::mem::take(&mut self.nodes[u.index()].intents);
            let mut kept = Vec::with_capacity(intents.len());
            for i in intents {
                match i.link {
                    Link::Live => kept.push(i),
                    Link::Pending => {}
                    Link::Offered => {
                        self.detach(u, i.target);
                    }
                }
            }
            if kept.is_empty() {
                self.worklist.push(u);
            }
            self.nodes[u.index()].intents = kept;
        }
        for v in std::mem::take(&mut self.stimulated) {
            let rt = &mut self.nodes[v.index()];
            rt.stimulated = false;
            rt.current_in.clear();
            rt.owner = None;
            rt.opened = None;
        }
        self.changed = true;
        self.settle_retractions();
        if self.storing() {
            self.track_failed_initials();
        }
    }

    fn has_dormant(&self) -> bool {
        self.initials.iter().any(|v| self.nodes[v.index()].state == NodeState::Dormant)
    }

    /// Every node delivering to more than one downstream node keeps the one
    /// best backed by its table (ties to the lowest id) and lets the rest go.
    pub(crate) fn release_resources(&mut self) -> bool {
        let mut released = false;
        for ui in 0..self.nodes.len() {
            let u = NodeId::from(ui);
            if self.nodes[ui].state != NodeState::Active {
                continue;
            }
            let live: Vec<NodeId> = self.nodes[ui].fan_out().collect();
            if live.len() <= 1 {
                continue;
            }
            let table = self.net.table(u);
            let keep = live
                .iter()
                .copied()
                .max_by(|&a, &b| table.support(a).cmp(&table.support(b)).then(b.cmp(&a)))
                .expect("at least two live targets");
            self.nodes[ui].intents.retain(|i| i.target == keep);
            for t in live.into_iter().filter(|&t| t != keep) {
                released = true;
                if self.detach(u, t) {
                    self.retract(t);
                }
            }
        }
        self.settle_retractions();
        released
    }

    fn wake_dormant(&mut self) {
        for k in 0..self.initials.len() {
            let v = self.initials[k];
            let rt = &mut self.nodes[v.index()];
            if rt.state == NodeState::Dormant {
                rt.state = NodeState::Active;
                rt.repath_count = 0;
                rt.decided = false;
                self.due.push((v, Attempt::Repath));
            }
        }
    }

    /// `(fan_in, fan_out)` of every initial node and of every other node
    /// that ended up forwarding stimulus. Initial nodes are keyed by their
    /// cue input and may record an empty fan-out, so that a stale entry for
    /// the same key is overwritten. Other nodes are keyed by the upstream
    /// nodes delivering to them at the end.
    pub(crate) fn traces(&self) -> Vec<(NodeId, ActivationTrace)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(v, rt)| {
                let out: Vec<NodeId> = rt.fan_out().collect();
                let key = if rt.is_initial {
                    self.lookup_key(rt)
                } else if rt.state == NodeState::Active && !out.is_empty() {
                    rt.current_in.clone()
                } else {
                    return None;
                };
                Some((NodeId::from(v), ActivationTrace::new(key, out)))
            })
            .collect()
    }

    pub(crate) fn into_subgraph(self) -> StableSubgraph {
        let mut active = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for (v, rt) in self.nodes.iter().enumerate() {
            let v = NodeId::from(v);
            if rt.is_initial || rt.state == NodeState::Active {
                active.insert(v);
            }
            if rt.state == NodeState::Active {
                edges.extend(rt.fan_out().map(|t| (v, t)));
            }
        }
        StableSubgraph::assemble(self.initials.iter().copied().collect(), active, edges, self.tick)
    }

    #[cfg(test)]
    pub(crate) fn runtime(&self, v: NodeId) -> &NodeRuntime {
        &self.nodes[v.index()]
    }
}
