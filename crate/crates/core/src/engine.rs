//! Agent state machine and the per-minute update procedure.
//!
//! One call to [`World::advance_step`] simulates one minute: agents are updated
//! one at a time in a fresh random order. A talking agent gains one unit of
//! motivation; a lone agent loses one (never below 1) and then, with the
//! instigation probability evaluated at its *decremented* motivation, makes a
//! Poisson number of contact attempts. Conversations form immediately, so a
//! partner updated later in the same minute already counts as talking.
//!
//! After all updates every conversation that existed before this minute counts
//! down by one, so a conversation of length `d` formed at minute `t` is removed
//! at the end of minute `t + d`. The minute's productivity is then recorded from
//! the end-of-minute status: 0 while talking, `L - 1` otherwise.

use crate::error::ParamError;
use crate::metrics::{RecordOptions, RunRecord};
use crate::stochastics::{RandomStream, RunSeed};

pub type AgentId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stereotype {
    Extrovert,
    Introvert,
}

impl Stereotype {
    pub const ALL: [Stereotype; 2] = [Stereotype::Extrovert, Stereotype::Introvert];

    pub fn as_str(self) -> &'static str {
        match self {
            Stereotype::Extrovert => "extrovert",
            Stereotype::Introvert => "introvert",
        }
    }

    #[inline]
    fn index(self) -> usize {
        self as usize
    }
}

/// Scalar knobs of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub n_agents: u32,
    pub n_extroverts: u32,
    /// Length of the workday in minutes.
    pub horizon: u32,
    /// Conversations last a uniform number of minutes in `1..=max_duration`.
    pub max_duration: u32,
    /// Mean of the Poisson number of contact attempts per instigation.
    pub contact_rate: f64,
    pub tau_extrovert: f64,
    pub tau_introvert: f64,
    pub motivation_cap: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_agents: 100,
            n_extroverts: 50,
            horizon: 480,
            max_duration: 20,
            contact_rate: 2.0,
            tau_extrovert: 1.0,
            tau_introvert: 5.0,
            motivation_cap: 480,
        }
    }
}

impl ModelParams {
    /// Sets the extrovert count to `round(eta * N)`, ties to even.
    pub fn with_eta(mut self, eta: f64) -> Result<Self, ParamError> {
        self.n_extroverts = extroverts_for(eta, self.n_agents)?;
        Ok(self)
    }

    /// Sets the horizon and keeps the motivation cap equal to it.
    pub fn with_horizon(mut self, horizon: u32) -> Self {
        self.horizon = horizon;
        self.motivation_cap = horizon;
        self
    }

    pub fn n_introverts(&self) -> u32 {
        self.n_agents.saturating_sub(self.n_extroverts)
    }

    /// Realized extrovert fraction `N^e / N`.
    pub fn eta(&self) -> f64 {
        f64::from(self.n_extroverts) / f64::from(self.n_agents)
    }

    pub fn tau(&self, stereotype: Stereotype) -> f64 {
        match stereotype {
            Stereotype::Extrovert => self.tau_extrovert,
            Stereotype::Introvert => self.tau_introvert,
        }
    }

    /// Motivation level `T / tau` above which a stereotype never instigates.
    pub fn threshold(&self, stereotype: Stereotype) -> f64 {
        f64::from(self.horizon) / self.tau(stereotype)
    }

    pub fn stereotype_of(&self, id: AgentId) -> Stereotype {
        if id < self.n_extroverts as usize {
            Stereotype::Extrovert
        } else {
            Stereotype::Introvert
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.n_agents == 0 {
            return Err(ParamError::EmptyGroup);
        }
        if self.n_extroverts > self.n_agents {
            return Err(ParamError::TooManyExtroverts {
                n_extroverts: self.n_extroverts,
                n_agents: self.n_agents,
            });
        }
        if self.horizon == 0 {
            return Err(ParamError::ZeroHorizon);
        }
        if self.max_duration == 0 {
            return Err(ParamError::ZeroDuration);
        }
        if !(self.contact_rate.is_finite() && self.contact_rate >= 0.0) {
            return Err(ParamError::InvalidContactRate(self.contact_rate));
        }
        let taus_ok = [self.tau_extrovert, self.tau_introvert]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0);
        if !taus_ok {
            return Err(ParamError::InvalidTau {
                tau_extrovert: self.tau_extrovert,
                tau_introvert: self.tau_introvert,
            });
        }
        if self.tau_introvert < self.tau_extrovert {
            return Err(ParamError::TauOrder {
                tau_extrovert: self.tau_extrovert,
                tau_introvert: self.tau_introvert,
            });
        }
        if self.motivation_cap == 0 {
            return Err(ParamError::ZeroMotivationCap);
        }
        Ok(())
    }
}

/// `round(eta * n)` with ties to even; rejects fractions outside `[0, 1]`.
pub fn extroverts_for(eta: f64, n_agents: u32) -> Result<u32, ParamError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(ParamError::FractionOutOfRange(eta));
    }
    Ok((eta * f64::from(n_agents)).round_ties_even() as u32)
}

/// Probability that a lone agent with the given motivation starts looking for
/// a partner: `(T/tau - L) / (T/tau - 1)` while `L <= T/tau`, zero above.
pub fn instigation_probability(stereotype: Stereotype, motivation: u32, params: &ModelParams) -> f64 {
    let threshold = params.threshold(stereotype);
    let level = f64::from(motivation);
    if level > threshold {
        return 0.0;
    }
    // T/tau <= 1 leaves L = 1 as the only admissible level
    if threshold <= 1.0 {
        return 1.0;
    }
    ((threshold - level) / (threshold - 1.0)).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConversationId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AgentState {
    pub stereotype: Stereotype,
    pub motivation: u32,
    pub conversation: Option<ConversationId>,
}

impl AgentState {
    #[inline]
    pub fn is_talking(&self) -> bool {
        self.conversation.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conversation {
    pub participants: (AgentId, AgentId),
    /// Minutes left, counted down at the end of every step after the one in
    /// which the conversation formed.
    pub remaining: u32,
    /// Formed during the minute currently being simulated; skips that
    /// minute's countdown.
    pub fresh: bool,
}

impl Conversation {
    pub fn involves(&self, id: AgentId) -> bool {
        self.participants.0 == id || self.participants.1 == id
    }

    pub fn partner_of(&self, id: AgentId) -> Option<AgentId> {
        match self.participants {
            (a, b) if a == id => Some(b),
            (a, b) if b == id => Some(a),
            _ => None,
        }
    }
}

/// Full state of one workday in progress.
#[derive(Clone, Debug)]
pub struct World {
    params: ModelParams,
    time: u32,
    agents: Vec<AgentState>,
    conversations: Vec<Conversation>,
    productivity_now: Vec<u32>,
    order: Vec<u32>,
    /// Instigation probability per stereotype, indexed by motivation.
    probability: [Vec<f64>; 2],
}

impl World {
    /// Start of day: the first `n_extroverts` agents are extroverts, everybody
    /// has motivation 1 and nobody is talking.
    pub fn new(params: ModelParams) -> Result<Self, ParamError> {
        params.validate()?;
        let n = params.n_agents as usize;
        let agents = (0..n)
            .map(|id| AgentState {
                stereotype: params.stereotype_of(id),
                motivation: 1,
                conversation: None,
            })
            .collect();
        let table = |s: Stereotype| {
            (0..=params.motivation_cap)
                .map(|level| instigation_probability(s, level.max(1), &params))
                .collect::<Vec<_>>()
        };
        Ok(Self {
            params,
            time: 0,
            agents,
            conversations: Vec::with_capacity(n / 2),
            productivity_now: vec![0; n],
            order: Vec::with_capacity(n),
            probability: [table(Stereotype::Extrovert), table(Stereotype::Introvert)],
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn conversations(&self) -> &[Conversation] {
        &self.conversations
    }

    /// `P_k` of the last completed minute.
    pub fn productivity_now(&self) -> &[u32] {
        &self.productivity_now
    }

    pub fn is_talking(&self, id: AgentId) -> bool {
        self.agents[id].is_talking()
    }

    pub fn conversation_of(&self, id: AgentId) -> Option<&Conversation> {
        self.agents[id]
            .conversation
            .map(|ConversationId(c)| &self.conversations[c])
    }

    /// Scenario setup: overrides an agent's motivation (clamped to `[1, cap]`).
    pub fn set_motivation(&mut self, id: AgentId, motivation: u32) {
        self.agents[id].motivation = motivation.clamp(1, self.params.motivation_cap);
    }

    /// Scenario setup: pairs two free agents for `duration` minutes, counted
    /// from the next simulated minute on.
    /// Returns `None` if either is busy, they coincide, or `duration` is 0.
    pub fn begin_conversation(&mut self, a: AgentId, b: AgentId, duration: u32) -> Option<ConversationId> {
        if a == b || duration == 0 || self.is_talking(a) || self.is_talking(b) {
            return None;
        }
        Some(self.open(a, b, duration, false))
    }

    fn open(&mut self, a: AgentId, b: AgentId, duration: u32, fresh: bool) -> ConversationId {
        let id = ConversationId(self.conversations.len());
        self.conversations.push(Conversation {
            participants: (a, b),
            remaining: duration,
            fresh,
        });
        self.agents[a].conversation = Some(id);
        self.agents[b].conversation = Some(id);
        id
    }

    /// Makes a Poisson(q) number of attempts to engage a uniformly chosen peer
    /// (with replacement); the first free peer is engaged for `d ~ U{1..D}`
    /// minutes.
    pub fn attempt_engagement(&mut self, instigator: AgentId, rng: &mut RandomStream) -> Option<ConversationId> {
        debug_assert!(!self.is_talking(instigator));
        let attempts = rng.poisson(self.params.contact_rate);
        let n = self.agents.len();
        if n < 2 {
            return None;
        }
        for _ in 0..attempts {
            let draw = rng.below(n as u64 - 1) as usize;
            let peer = if draw >= instigator { draw + 1 } else { draw };
            if !self.agents[peer].is_talking() {
                let duration = 1 + rng.below(u64::from(self.params.max_duration)) as u32;
                return Some(self.open(instigator, peer, duration, true));
            }
        }
        None
    }

    pub fn update_agent(&mut self, id: AgentId, rng: &mut RandomStream) {
        let cap = self.params.motivation_cap;
        let agent = &mut self.agents[id];
        if agent.is_talking() {
            agent.motivation = (agent.motivation + 1).min(cap);
            return;
        }
        agent.motivation = agent.motivation.saturating_sub(1).max(1);
        let p = self.probability[agent.stereotype.index()][agent.motivation as usize];
        // the coin is only drawn when the outcome is uncertain
        let instigates = p >= 1.0 || (p > 0.0 && rng.next_f64() < p);
        if instigates {
            self.attempt_engagement(id, rng);
        }
    }

    /// Simulates one minute.
    ///
    /// # Panics
    /// If the workday is already over.
    pub fn advance_step(&mut self, rng: &mut RandomStream) {
        assert!(
            self.time < self.params.horizon,
            "advance_step called at t={} with horizon {}",
            self.time,
            self.params.horizon
        );
        let mut order = std::mem::take(&mut self.order);
        order.clear();
        order.extend(0..self.agents.len() as u32);
        rng.shuffle(&mut order);
        for &id in &order {
            self.update_agent(id as usize, rng);
        }
        self.order = order;

        self.count_down();
        for (p, agent) in self.productivity_now.iter_mut().zip(&self.agents) {
            *p = if agent.is_talking() { 0 } else { agent.motivation - 1 };
        }
        self.time += 1;
    }

    fn count_down(&mut self) {
        let mut ended = false;
        for c in &mut self.conversations {
            if c.fresh {
                c.fresh = false;
                continue;
            }
            c.remaining -= 1;
            if c.remaining == 0 {
                ended = true;
                self.agents[c.participants.0].conversation = None;
                self.agents[c.participants.1].conversation = None;
            }
        }
        if ended {
            self.conversations.retain(|c| c.remaining > 0);
            for (i, c) in self.conversations.iter().enumerate() {
                self.agents[c.participants.0].conversation = Some(ConversationId(i));
                self.agents[c.participants.1].conversation = Some(ConversationId(i));
            }
        }
    }

    pub fn is_over(&self) -> bool {
        self.time >= self.params.horizon
    }
}

/// Simulates a full workday. Deterministic in `(params, seed, options)`.
pub fn run_day(params: &ModelParams, seed: RunSeed, options: RecordOptions) -> Result<RunRecord, ParamError> {
    let mut world = World::new(*params)?;
    let mut rng = RandomStream::new(seed);
    let mut record = RunRecord::new(&world, options);
    while !world.is_over() {
        world.advance_step(&mut rng);
        record.record_step(&world);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32, ne: u32) -> ModelParams {
        ModelParams {
            n_agents: n,
            n_extroverts: ne,
            ..ModelParams::default()
        }
    }

    #[test]
    fn init_assigns_stereotypes_by_index() {
        let w = World::new(params(100, 50)).unwrap();
        assert_eq!(w.time(), 0);
        let ext = w
            .agents()
            .iter()
            .filter(|a| a.stereotype == Stereotype::Extrovert)
            .count();
        assert_eq!(ext, 50);
        assert!(w.agents()[..50].iter().all(|a| a.stereotype == Stereotype::Extrovert));
        assert!(w.agents().iter().all(|a| a.motivation == 1 && !a.is_talking()));
        assert!(w.productivity_now().iter().all(|&p| p == 0));
        assert!(w.conversations().is_empty());

        let single = World::new(params(1, 0)).unwrap();
        assert_eq!(single.agents()[0].stereotype, Stereotype::Introvert);

        let pair = World::new(params(2, 2)).unwrap();
        assert!(pair
            .agents()
            .iter()
            .all(|a| a.stereotype == Stereotype::Extrovert && a.motivation == 1));
    }

    #[test]
    fn init_rejects_bad_groups() {
        assert_eq!(World::new(params(0, 0)).unwrap_err(), ParamError::EmptyGroup);
        assert!(matches!(
            World::new(params(3, 4)).unwrap_err(),
            ParamError::TooManyExtroverts { .. }
        ));
        let bad_tau = ModelParams {
            tau_introvert: 0.5,
            ..ModelParams::default()
        };
        assert!(matches!(bad_tau.validate(), Err(ParamError::TauOrder { .. })));
        let bad_q = ModelParams {
            contact_rate: -1.0,
            ..ModelParams::default()
        };
        assert!(bad_q.validate().is_err());
    }

    #[test]
    fn eta_rounds_ties_to_even() {
        assert_eq!(extroverts_for(0.5, 100).unwrap(), 50);
        assert_eq!(extroverts_for(0.5, 5).unwrap(), 2);
        assert_eq!(extroverts_for(0.7, 5).unwrap(), 4);
        assert_eq!(extroverts_for(0.3, 5).unwrap(), 2);
        assert!(extroverts_for(1.5, 100).is_err());
        assert!(extroverts_for(-0.1, 100).is_err());
    }

    #[test]
    fn instigation_probability_examples() {
        let p = ModelParams::default();
        assert_eq!(instigation_probability(Stereotype::Extrovert, 1, &p), 1.0);
        assert_eq!(instigation_probability(Stereotype::Introvert, 1, &p), 1.0);
        assert_eq!(instigation_probability(Stereotype::Introvert, 96, &p), 0.0);
        assert_eq!(instigation_probability(Stereotype::Introvert, 100, &p), 0.0);
        let half = instigation_probability(Stereotype::Extrovert, 240, &p);
        assert!((half - 240.0 / 479.0).abs() < 1e-15);
        assert!((half - 0.501_043_841_336_117).abs() < 1e-12);
        assert!(instigation_probability(Stereotype::Extrovert, 480, &p) == 0.0);
        assert!(instigation_probability(Stereotype::Extrovert, 479, &p) > 0.0);
    }

    #[test]
    fn instigation_probability_unit_threshold() {
        let p = ModelParams {
            horizon: 5,
            motivation_cap: 5,
            tau_introvert: 5.0,
            ..ModelParams::default()
        };
        assert_eq!(instigation_probability(Stereotype::Introvert, 1, &p), 1.0);
        assert_eq!(instigation_probability(Stereotype::Introvert, 2, &p), 0.0);
    }

    #[test]
    fn zero_contact_rate_never_engages() {
        let p = ModelParams {
            contact_rate: 0.0,
            ..params(10, 5)
        };
        let mut w = World::new(p).unwrap();
        let mut rng = RandomStream::new(RunSeed(1));
        for _ in 0..50 {
            w.advance_step(&mut rng);
            assert!(w.conversations().is_empty());
            assert!(w.agents().iter().all(|a| a.motivation == 1));
            assert!(w.productivity_now().iter().all(|&p| p == 0));
        }
    }

    #[test]
    fn single_agent_cannot_engage() {
        let p = ModelParams {
            contact_rate: 50.0,
            ..params(1, 1)
        };
        let mut w = World::new(p).unwrap();
        let mut rng = RandomStream::new(RunSeed(2));
        assert_eq!(w.attempt_engagement(0, &mut rng), None);
        w.advance_step(&mut rng);
        assert!(w.conversations().is_empty());
    }

    #[test]
    fn engagement_with_busy_peers_fails() {
        let p = ModelParams {
            contact_rate: 1000.0,
            ..params(5, 5)
        };
        let mut w = World::new(p).unwrap();
        w.begin_conversation(1, 2, 5).unwrap();
        w.begin_conversation(3, 4, 5).unwrap();
        let mut rng = RandomStream::new(RunSeed(3));
        for _ in 0..20 {
            assert_eq!(w.attempt_engagement(0, &mut rng), None);
        }
    }

    #[test]
    fn engagement_pairs_two_free_agents() {
        let p = ModelParams {
            contact_rate: 30.0,
            ..params(2, 1)
        };
        let mut rng = RandomStream::new(RunSeed(4));
        for _ in 0..200 {
            let mut w = World::new(p).unwrap();
            let id = w.attempt_engagement(1, &mut rng).expect("q=30 leaves P(m=0) ~ 1e-13");
            let c = w.conversations()[id.0];
            assert_eq!(c.participants, (1, 0));
            assert!((1..=20).contains(&c.remaining));
            assert!(w.is_talking(0) && w.is_talking(1));
        }
    }

    #[test]
    fn engagement_success_rate_two_agents() {
        // one always-free peer: success iff m >= 1, i.e. 1 - e^{-q}
        let q = 0.7;
        let p = ModelParams {
            contact_rate: q,
            ..params(2, 2)
        };
        let mut rng = RandomStream::new(RunSeed(5));
        let trials = 200_000;
        let mut hits = 0;
        for _ in 0..trials {
            let mut w = World::new(p).unwrap();
            if w.attempt_engagement(0, &mut rng).is_some() {
                hits += 1;
            }
        }
        let expected = 1.0 - (-q).exp();
        let freq = f64::from(hits) / f64::from(trials);
        let se = (expected * (1.0 - expected) / f64::from(trials)).sqrt();
        assert!((freq - expected).abs() < 4.0 * se, "{freq} vs {expected}");
    }

    #[test]
    fn update_rules() {
        let p = ModelParams {
            contact_rate: 0.0,
            ..params(4, 2)
        };
        let mut w = World::new(p).unwrap();
        let mut rng = RandomStream::new(RunSeed(6));

        w.update_agent(0, &mut rng);
        assert_eq!(w.agents()[0].motivation, 1);

        w.begin_conversation(1, 2, 3).unwrap();
        w.set_motivation(1, 50);
        w.update_agent(1, &mut rng);
        assert_eq!(w.agents()[1].motivation, 51);

        w.set_motivation(3, 200);
        w.update_agent(3, &mut rng);
        assert_eq!(w.agents()[3].motivation, 199);
        assert!(!w.is_talking(3));
    }

    #[test]
    fn lone_introvert_above_threshold_never_instigates() {
        let p = ModelParams {
            contact_rate: 1000.0,
            ..params(3, 0)
        };
        let mut w = World::new(p).unwrap();
        let mut rng = RandomStream::new(RunSeed(7));
        for _ in 0..100 {
            w.set_motivation(0, 200);
            w.update_agent(0, &mut rng);
            assert_eq!(w.agents()[0].motivation, 199);
            assert!(!w.is_talking(0));
        }
    }

    #[test]
    fn motivation_cap_clamps_increment() {
        let p = ModelParams {
            motivation_cap: 10,
            ..params(2, 2)
        };
        let mut w = World::new(p).unwrap();
        let mut rng = RandomStream::new(RunSeed(8));
        w.begin_conversation(0, 1, 50).unwrap();
        w.set_motivation(0, 10);
        w.update_agent(0, &mut rng);
        assert_eq!(w.agents()[0].motivation, 10);
    }

    #[test]
    fn countdown_removes_finished_conversations() {
        let p = ModelParams {
            contact_rate: 0.0,
            ..params(6, 3)
        };
        let mut w = World::new(p).unwrap();
        let mut rng = RandomStream::new(RunSeed(9));
        w.begin_conversation(0, 1, 1).unwrap();
        w.begin_conversation(2, 3, 2).unwrap();
        w.begin_conversation(4, 5, 1).unwrap();
        w.advance_step(&mut rng);
        assert_eq!(w.conversations().len(), 1);
        assert!(!w.is_talking(0) && !w.is_talking(1) && !w.is_talking(4));
        assert_eq!(w.conversation_of(2).unwrap().participants, (2, 3));
        assert_eq!(w.conversation_of(3).unwrap().remaining, 1);
        assert!(w.agents().iter().all(|a| a.motivation == 2));
        // finished agents are free at the end of the minute and count as working
        assert_eq!(w.productivity_now(), &[1, 1, 0, 0, 1, 1]);
        w.advance_step(&mut rng);
        assert!(w.conversations().is_empty());
        assert!(w.agents().iter().all(|a| a.conversation.is_none()));
    }

    #[test]
    fn partner_updated_later_gains_the_minute() {
        // N=2, q large: whoever is updated first instigates (p = 1 at L = 1) and
        // the other, updated second, is already talking.
        let p = ModelParams {
            contact_rate: 40.0,
            max_duration: 1,
            ..params(2, 2)
        };
        let mut rng = RandomStream::new(RunSeed(10));
        for _ in 0..50 {
            let mut w = World::new(p).unwrap();
            w.set_motivation(0, 5);
            w.set_motivation(1, 5);
            w.advance_step(&mut rng);
            let mut levels: Vec<u32> = w.agents().iter().map(|a| a.motivation).collect();
            levels.sort_unstable();
            assert_eq!(levels, vec![4, 6]);
            assert_eq!(w.productivity_now(), &[0, 0]);
            // d = 1: the conversation covers the next minute too
            assert_eq!(w.conversations().len(), 1);
            assert_eq!(w.conversations()[0].remaining, 1);
            w.advance_step(&mut rng);
            assert!(w.conversations().is_empty());
            let mut levels: Vec<u32> = w.agents().iter().map(|a| a.motivation).collect();
            levels.sort_unstable();
            assert_eq!(levels, vec![5, 7]);
            assert_eq!(w.productivity_now().iter().sum::<u32>(), 10);
        }
    }

    #[test]
    fn run_day_is_deterministic() {
        let p = params(30, 12);
        let opts = RecordOptions {
            series: true,
            trace: true,
        };
        let a = run_day(&p, RunSeed(77), opts).unwrap();
        let b = run_day(&p, RunSeed(77), opts).unwrap();
        assert_eq!(a, b);
        let c = run_day(&p, RunSeed(78), opts).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    #[should_panic(expected = "advance_step called")]
    fn stepping_past_horizon_panics() {
        let p = ModelParams {
            horizon: 1,
            motivation_cap: 1,
            ..params(2, 1)
        };
        let mut w = World::new(p).unwrap();
        let mut rng = RandomStream::new(RunSeed(0));
        w.advance_step(&mut rng);
        w.advance_step(&mut rng);
    }
}
