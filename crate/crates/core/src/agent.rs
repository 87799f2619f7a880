//! The multiplayer Bayesian best-response agent.
//!
//! For the first `switch_hand` hands the agent plays its default profile and
//! only collects observations. From then on, at the start of every hand it
//! best-responds to the posterior-mean models of the two opponents in their
//! current positions. Posteriors are updated after every hand in both phases.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::{
    create_samples, mixture_model, Configuration, ModelKey, PosteriorTable, PriorMode, PriorSpec,
    SampleBank,
};
use crate::best_response::best_response;
use crate::error::{Error, Result};
use crate::game::{Action, HandObservation, InfoSetKey, Position};
use crate::strategy::{
    nash_profile, sample_action, AgentPolicy, BehavioralStrategy, HandContext, Label, NashPoint,
    Profile,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbbrConfig {
    pub epsilon: f64,
    pub k: usize,
    pub eta: f64,
    /// Hands played with the default profile before exploitation starts.
    pub switch_hand: usize,
    pub total_hands: usize,
    /// Strategy played in each of our seats before the switch.
    pub default_profile: Profile,
    /// Prior mean for every opponent model, by position.
    pub prior_mean: Profile,
    pub prior_mode: PriorMode,
    /// Seeds the prior samples.
    pub seed: u64,
}

impl Default for MbbrConfig {
    fn default() -> Self {
        MbbrConfig {
            epsilon: 0.05,
            k: 10,
            eta: 4.0,
            switch_hand: 100,
            total_hands: 3000,
            default_profile: nash_profile(NashPoint::Lower),
            prior_mean: nash_profile(NashPoint::Midpoint),
            prior_mode: PriorMode::Informed,
            seed: 0,
        }
    }
}

impl MbbrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.switch_hand > self.total_hands {
            return Err(Error::InvalidConfig(format!(
                "switch hand {} exceeds total hands {}",
                self.switch_hand, self.total_hands
            )));
        }
        for p in Position::ALL {
            for (what, profile) in [
                ("default", &self.default_profile),
                ("prior", &self.prior_mean),
            ] {
                if profile[p.index()].position != p {
                    return Err(Error::InvalidConfig(format!(
                        "{what} profile entry {} is for position {}",
                        p.index(),
                        profile[p.index()].position
                    )));
                }
            }
        }
        self.prior_spec(&[Label(1), Label(2)]).validate()
    }

    fn prior_spec(&self, opponents: &[Label; 2]) -> PriorSpec {
        let means = opponents
            .iter()
            .flat_map(|&label| {
                Position::ALL.map(|position| {
                    (
                        ModelKey { label, position },
                        self.prior_mean[position.index()].clone(),
                    )
                })
            })
            .collect();
        PriorSpec {
            epsilon: self.epsilon,
            eta: self.eta,
            k: self.k,
            means,
            mode: self.prior_mode,
        }
    }
}

/// Serializable view of the agent's beliefs, for tracing.
#[derive(Clone, Debug, Serialize)]
pub struct MbbrSnapshot<'a> {
    pub hand_index: usize,
    pub seat: Option<Position>,
    pub models: Option<[BehavioralStrategy; 2]>,
    pub posteriors: &'a PosteriorTable,
}

#[derive(Clone, Debug)]
pub struct MbbrAgent {
    config: MbbrConfig,
    label: Label,
    /// Opponents in turn order starting from the player acting after us.
    opponents: [Label; 2],
    bank: SampleBank,
    posteriors: PosteriorTable,
    configs: [Configuration; 3],
    /// 1-based index of the current (or next) hand.
    hand_index: usize,
    seat: Option<Position>,
    response: Option<BehavioralStrategy>,
    updates: [usize; 3],
}

impl MbbrAgent {
    /// `opponents[0]` must be the player who acts right after us and
    /// `opponents[1]` the one after that. Seat rotation keeps this order.
    pub fn new(config: MbbrConfig, label: Label, opponents: [Label; 2]) -> Result<MbbrAgent> {
        config.validate()?;
        if opponents[0] == opponents[1] || opponents.contains(&label) {
            return Err(Error::InvalidConfig("agent labels must be distinct".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bank = create_samples(&config.prior_spec(&opponents), &mut rng)?;
        let configs = Position::ALL.map(|seat| {
            let first = seat.next_in_turn();
            Configuration::new(
                seat,
                ModelKey {
                    label: opponents[0],
                    position: first,
                },
                ModelKey {
                    label: opponents[1],
                    position: first.next_in_turn(),
                },
            )
            .expect("distinct seats")
        });
        let posteriors = PosteriorTable::uniform(config.k, &configs)?;
        Ok(MbbrAgent {
            config,
            label,
            opponents,
            bank,
            posteriors,
            configs,
            hand_index: 1,
            seat: None,
            response: None,
            updates: [0; 3],
        })
    }

    pub fn config(&self) -> &MbbrConfig {
        &self.config
    }

    pub fn bank(&self) -> &SampleBank {
        &self.bank
    }

    pub fn posteriors(&self) -> &PosteriorTable {
        &self.posteriors
    }

    pub fn hand_index(&self) -> usize {
        self.hand_index
    }

    pub fn seat(&self) -> Option<Position> {
        self.seat
    }

    /// Posterior updates applied so far, by our seat.
    pub fn update_counts(&self) -> [usize; 3] {
        self.updates
    }

    pub fn configuration(&self, seat: Position) -> &Configuration {
        &self.configs[seat.index()]
    }

    pub fn exploiting(&self) -> bool {
        self.hand_index > self.config.switch_hand
    }

    /// Posterior-mean models of the opponents for our seat `seat`.
    pub fn models(&self, seat: Position) -> Result<[BehavioralStrategy; 2]> {
        mixture_model(&self.posteriors, &self.configs[seat.index()], &self.bank)
    }

    /// Best response cached for the current hand, if exploiting.
    pub fn current_response(&self) -> Option<&BehavioralStrategy> {
        self.response.as_ref()
    }

    pub fn snapshot(&self) -> MbbrSnapshot<'_> {
        MbbrSnapshot {
            hand_index: self.hand_index,
            seat: self.seat,
            models: self.seat.and_then(|s| self.models(s).ok()),
            posteriors: &self.posteriors,
        }
    }

    /// Starts a hand in `seat`; computes the best response when exploiting.
    pub fn start_hand(&mut self, seat: Position) -> Result<()> {
        self.seat = Some(seat);
        self.response = None;
        if self.exploiting() {
            let [a, b] = self.models(seat)?;
            self.response = Some(best_response(seat, [&a, &b])?.strategy);
        }
        Ok(())
    }

    fn strategy_for(&self, key: &InfoSetKey) -> Result<&BehavioralStrategy> {
        let seat = self
            .seat
            .ok_or_else(|| Error::InvalidConfig("no hand in progress".into()))?;
        if key.position != seat {
            return Err(Error::PositionMismatch {
                expected: seat.number(),
                found: key.position.number(),
            });
        }
        Ok(match &self.response {
            Some(r) => r,
            None => &self.config.default_profile[seat.index()],
        })
    }

    pub fn choose_action<R: Rng + ?Sized>(&self, key: &InfoSetKey, rng: &mut R) -> Result<Action> {
        let p = self.strategy_for(key)?.prob(key)?;
        Ok(sample_action(p, key.situation, rng))
    }

    /// Applies the hand's observation to the live configuration and moves on.
    pub fn finish_hand(&mut self, obs: &HandObservation) -> Result<()> {
        let seat = self
            .seat
            .ok_or_else(|| Error::InvalidConfig("no hand in progress".into()))?;
        if obs.observer != seat {
            return Err(Error::InconsistentObservation(format!(
                "observation from seat {} while sitting in {seat}",
                obs.observer
            )));
        }
        self.posteriors
            .update(&self.configs[seat.index()], obs, &self.bank)?;
        self.updates[seat.index()] += 1;
        self.hand_index += 1;
        self.seat = Some(seat.rotate());
        self.response = None;
        Ok(())
    }
}

impl AgentPolicy for MbbrAgent {
    fn name(&self) -> String {
        "MBBR".into()
    }

    fn begin_hand(&mut self, ctx: &HandContext) -> Result<()> {
        let seat = ctx.seat;
        let first = seat.next_in_turn();
        let expected = [self.label, self.opponents[0], self.opponents[1]];
        let found = [
            ctx.seat_labels[seat.index()],
            ctx.seat_labels[first.index()],
            ctx.seat_labels[first.next_in_turn().index()],
        ];
        if expected != found {
            return Err(Error::InvalidConfig(format!(
                "seating {found:?} does not match the agent's table order {expected:?}"
            )));
        }
        self.start_hand(seat)
    }

    fn aggressive_prob(&mut self, key: &InfoSetKey) -> Result<f64> {
        self.strategy_for(key)?.prob(key)
    }

    fn end_hand(&mut self, obs: &HandObservation) -> Result<()> {
        self.finish_hand(obs)
    }
}
