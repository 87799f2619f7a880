//! Sampled Dirichlet priors over opponent strategies and exact posterior
//! updates over the sampled strategies.
//!
//! Before play, `k` strategies are drawn for every (opponent label, position)
//! model from independent per-information-set Dirichlet distributions
//! centred on a prior mean. The posterior is then a weight table over pairs
//! of sample indices, one `k x k` table per seating configuration, updated by
//! Bayes' rule after every hand. Hidden opponent cards are marginalized out
//! exactly.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    situation_of, ActionSeq, Card, HandObservation, Position, Situation, INFOSETS_PER_POSITION,
};
use crate::strategy::{BehavioralStrategy, Label};

/// One opponent model: a player label in a given position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelKey {
    pub label: Label,
    pub position: Position,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorMode {
    /// Dirichlet centred on the supplied means, scaled by `eta`.
    #[default]
    Informed,
    /// Every Dirichlet parameter equal to 2, ignoring the means.
    Uniform2,
}

impl std::str::FromStr for PriorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<PriorMode> {
        match s.trim() {
            "informed" => Ok(PriorMode::Informed),
            "uniform2" => Ok(PriorMode::Uniform2),
            other => Err(Error::InvalidConfig(format!(
                "unknown prior mode `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriorSpec {
    /// Rounding threshold applied to the prior means.
    pub epsilon: f64,
    /// Multiplier turning mean probabilities into Dirichlet parameters.
    pub eta: f64,
    /// Samples per model.
    pub k: usize,
    pub means: BTreeMap<ModelKey, BehavioralStrategy>,
    pub mode: PriorMode,
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 0.5), got {}",
                self.epsilon
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        for (key, mean) in &self.means {
            if key.position != mean.position {
                return Err(Error::PositionMismatch {
                    expected: key.position.number(),
                    found: mean.position.number(),
                });
            }
        }
        Ok(())
    }
}

/// Clamps both action probabilities at every information set into
/// `[epsilon, 1 - epsilon]` and renormalizes the pair.
pub fn round_and_normalize(strategy: &BehavioralStrategy, epsilon: f64) -> BehavioralStrategy {
    let mut probs = *strategy.probs();
    for p in probs.iter_mut() {
        let aggressive = p.clamp(epsilon, 1.0 - epsilon);
        let passive = (1.0 - *p).clamp(epsilon, 1.0 - epsilon);
        *p = aggressive / (aggressive + passive);
    }
    BehavioralStrategy::new(strategy.position, probs).expect("rounded probabilities are valid")
}

/// Uniform draw on `(0, 1]`.
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Natural log of a Gamma(shape, 1) draw.
///
/// Marsaglia and Tsang's squeeze/rejection method for shape >= 1. Smaller
/// shapes draw Gamma(shape + 1) and multiply by `U^(1/shape)`, done in log
/// space so that tiny shapes do not underflow to zero.
pub fn ln_gamma_sample<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::InvalidShape(shape));
    }
    if shape < 1.0 {
        let boosted = ln_gamma_sample(shape + 1.0, rng)?;
        return Ok(boosted + open_uniform(rng).ln() / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = open_uniform(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return Ok((d * v).ln());
        }
    }
}

/// A draw from Gamma(shape, 1).
pub fn gamma_sample<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    ln_gamma_sample(shape, rng).map(f64::exp)
}

/// Aggressive-action probability drawn from Dirichlet(alpha_aggressive,
/// alpha_passive), via two Gamma draws normalized by their sum.
fn dirichlet_pair<R: Rng + ?Sized>(alpha: [f64; 2], rng: &mut R) -> Result<f64> {
    let ln_a = ln_gamma_sample(alpha[0], rng)?;
    let ln_b = ln_gamma_sample(alpha[1], rng)?;
    // y_a / (y_a + y_b), kept strictly inside (0, 1)
    let x = 1.0 / (1.0 + (ln_b - ln_a).exp());
    Ok(x.clamp(1e-300, 1.0 - f64::EPSILON))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSamples {
    pub model: ModelKey,
    pub samples: Vec<BehavioralStrategy>,
}

/// The `k` sampled strategies for every opponent model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBank {
    pub k: usize,
    /// Sorted by model key.
    pub models: Vec<ModelSamples>,
}

impl SampleBank {
    pub fn samples(&self, model: &ModelKey) -> Result<&[BehavioralStrategy]> {
        self.models
            .binary_search_by(|m| m.model.cmp(model))
            .map(|i| self.models[i].samples.as_slice())
            .map_err(|_| {
                Error::InvalidConfig(format!(
                    "no samples for {} in position {}",
                    model.label, model.position
                ))
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bank serializes")
    }
}

/// Draws `k` strategies per model. For each model, information set and
/// sample index, the aggressive probability is the first coordinate of a
/// Dirichlet draw with parameters `eta * rounded_mean` (or `(2, 2)` in
/// uniform mode).
pub fn create_samples<R: Rng + ?Sized>(spec: &PriorSpec, rng: &mut R) -> Result<SampleBank> {
    spec.validate()?;
    let mut models = Vec::with_capacity(spec.means.len());
    for (key, mean) in &spec.means {
        let rounded = round_and_normalize(mean, spec.epsilon);
        let mut probs = vec![[0.0; INFOSETS_PER_POSITION]; spec.k];
        for (i, &p) in rounded.probs().iter().enumerate() {
            let alpha = match spec.mode {
                PriorMode::Informed => [spec.eta * p, spec.eta * (1.0 - p)],
                PriorMode::Uniform2 => [2.0, 2.0],
            };
            for sample in probs.iter_mut() {
                sample[i] = dirichlet_pair(alpha, rng)?;
            }
        }
        let samples = probs
            .into_iter()
            .map(|p| BehavioralStrategy::new(key.position, p))
            .collect::<Result<Vec<_>>>()?;
        models.push(ModelSamples {
            model: *key,
            samples,
        });
    }
    Ok(SampleBank { k: spec.k, models })
}

/// Opponent decisions along a betting line, as (position, situation,
/// aggressive) triples.
fn opponent_decisions(actions: &ActionSeq, us: Position) -> Vec<(Position, Situation, bool)> {
    let mut prefix = ActionSeq::new();
    let mut out = Vec::with_capacity(actions.len());
    for (player, action) in actions.actors() {
        if player != us {
            let situation = situation_of(player, &prefix).expect("player acts at its turn");
            out.push((player, situation, action.is_aggressive()));
        }
        prefix = prefix.with(action).expect("legal sequence");
    }
    out
}

/// Hidden-card assignments for the two opponents, each with its conditional
/// probability given everything the observer knows.
fn card_assignments(
    observer: Position,
    known: &[Option<Card>; 3],
    opponents: [Position; 2],
) -> Vec<(f64, [Card; 2])> {
    let mut used = [false; 4];
    for c in known.iter().flatten() {
        used[c.index()] = true;
    }
    debug_assert!(known[observer.index()].is_some());
    let choices = |p: Position, taken: &[bool; 4]| -> Vec<Card> {
        match known[p.index()] {
            Some(c) => vec![c],
            None => Card::ALL
                .into_iter()
                .filter(|c| !taken[c.index()])
                .collect(),
        }
    };
    let mut out = Vec::with_capacity(6);
    for a in choices(opponents[0], &used) {
        let mut taken = used;
        taken[a.index()] = true;
        for b in choices(opponents[1], &taken) {
            out.push((0.0, [a, b]));
        }
    }
    let w = 1.0 / out.len() as f64;
    for entry in out.iter_mut() {
        entry.0 = w;
    }
    out
}

/// Probability that `strategy` takes the observed actions at its decision
/// points when holding `card`.
fn decisions_prob(
    decisions: &[(Position, Situation, bool)],
    strategy: &BehavioralStrategy,
    card: Card,
) -> f64 {
    decisions
        .iter()
        .filter(|d| d.0 == strategy.position)
        .map(|&(_, s, aggressive)| strategy.action_prob(card, s, aggressive))
        .product()
}

fn sorted_pair(opponents: [&BehavioralStrategy; 2]) -> [&BehavioralStrategy; 2] {
    if opponents[0].position <= opponents[1].position {
        opponents
    } else {
        [opponents[1], opponents[0]]
    }
}

fn check_opponents(observer: Position, opponents: [&BehavioralStrategy; 2]) -> Result<()> {
    let [a, b] = opponents;
    if a.position == observer || b.position == observer || a.position == b.position {
        return Err(Error::InvalidConfig(format!(
            "opponent strategies must cover the two positions other than {observer}"
        )));
    }
    Ok(())
}

/// Likelihood of the opponents' actions given the cards the observer knows.
/// Does not check the known cards against the showdown rule.
pub(crate) fn likelihood_given_known(
    observer: Position,
    actions: &ActionSeq,
    known: &[Option<Card>; 3],
    opponents: [&BehavioralStrategy; 2],
) -> Result<f64> {
    check_opponents(observer, opponents)?;
    let [a, b] = sorted_pair(opponents);
    let decisions = opponent_decisions(actions, observer);
    Ok(card_assignments(observer, known, [a.position, b.position])
        .into_iter()
        .map(|(w, [ca, cb])| {
            w * decisions_prob(&decisions, a, ca) * decisions_prob(&decisions, b, cb)
        })
        .sum())
}

fn known_cards(obs: &HandObservation) -> [Option<Card>; 3] {
    let mut known = obs.revealed;
    known[obs.observer.index()] = Some(obs.own_card);
    known
}

/// Marginal likelihood of the opponents' observed actions under the two
/// strategies, summing over hidden opponent cards consistent with what the
/// observer saw. Our own action probabilities are left out; they are the
/// same for every sample pair.
pub fn hand_likelihood(
    obs: &HandObservation,
    opponent_a: &BehavioralStrategy,
    opponent_b: &BehavioralStrategy,
) -> Result<f64> {
    obs.validate()?;
    likelihood_given_known(
        obs.observer,
        &obs.actions,
        &known_cards(obs),
        [opponent_a, opponent_b],
    )
}

/// Which opponent models are live when we sit in `our_seat`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub our_seat: Position,
    /// Model indexing the rows of the weight matrix.
    pub row: ModelKey,
    /// Model indexing the columns.
    pub col: ModelKey,
}

impl Configuration {
    pub fn new(our_seat: Position, row: ModelKey, col: ModelKey) -> Result<Configuration> {
        if row.position == our_seat || col.position == our_seat || row.position == col.position {
            return Err(Error::InvalidConfig(format!(
                "configuration for seat {our_seat} must place the opponents in the other two seats"
            )));
        }
        Ok(Configuration { our_seat, row, col })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigPosterior {
    pub config: Configuration,
    /// Row-major `k x k` weights over (row sample, column sample).
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTable {
    pub k: usize,
    pub entries: Vec<ConfigPosterior>,
}

impl PosteriorTable {
    /// Uniform weights `1/k^2` for every configuration.
    pub fn uniform(k: usize, configs: &[Configuration]) -> Result<PosteriorTable> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        let w = 1.0 / (k * k) as f64;
        let entries = configs
            .iter()
            .map(|c| ConfigPosterior {
                config: *c,
                weights: vec![w; k * k],
            })
            .collect();
        Ok(PosteriorTable { k, entries })
    }

    pub fn weights(&self, config: &Configuration) -> Result<&[f64]> {
        self.entries
            .iter()
            .find(|e| e.config == *config)
            .map(|e| e.weights.as_slice())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown configuration {config:?}")))
    }

    fn weights_mut(&mut self, config: &Configuration) -> Result<&mut Vec<f64>> {
        self.entries
            .iter_mut()
            .find(|e| e.config == *config)
            .map(|e| &mut e.weights)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown configuration {config:?}")))
    }

    /// Bayes update of one configuration's weights in place.
    pub fn update(
        &mut self,
        config: &Configuration,
        obs: &HandObservation,
        bank: &SampleBank,
    ) -> Result<()> {
        obs.validate()?;
        let k = self.k;
        if bank.k != k {
            return Err(Error::InvalidConfig(format!(
                "bank has {} samples per model, table expects {k}",
                bank.k
            )));
        }
        if obs.observer != config.our_seat {
            return Err(Error::InconsistentObservation(format!(
                "observation is from seat {} but configuration is for seat {}",
                obs.observer, config.our_seat
            )));
        }
        let rows = bank.samples(&config.row)?;
        let cols = bank.samples(&config.col)?;
        let decisions = opponent_decisions(&obs.actions, obs.observer);
        let assignments = card_assignments(
            obs.observer,
            &known_cards(obs),
            [config.row.position, config.col.position],
        );

        // The likelihood factorizes per opponent once the hidden cards are fixed.
        let per_card = |samples: &[BehavioralStrategy]| -> Vec<[f64; 4]> {
            samples
                .iter()
                .map(|s| Card::ALL.map(|c| decisions_prob(&decisions, s, c)))
                .collect()
        };
        let row_f = per_card(rows);
        let col_f = per_card(cols);

        let weights = self.weights_mut(config)?;
        let mut z = 0.0;
        for (i, rf) in row_f.iter().enumerate() {
            for (j, cf) in col_f.iter().enumerate() {
                let zs: f64 = assignments
                    .iter()
                    .map(|(w, [ca, cb])| w * rf[ca.index()] * cf[cb.index()])
                    .sum();
                let q = weights[i * k + j] * zs;
                weights[i * k + j] = q;
                z += q;
            }
        }
        if z.is_nan() || z <= 0.0 {
            return Err(Error::ImpossibleObservation);
        }
        for w in weights.iter_mut() {
            *w /= z;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

/// Returns the posterior after observing `obs`; only `config`'s weights change.
pub fn update_posterior(
    table: &PosteriorTable,
    config: &Configuration,
    obs: &HandObservation,
    bank: &SampleBank,
) -> Result<PosteriorTable> {
    let mut next = table.clone();
    next.update(config, obs, bank)?;
    Ok(next)
}

/// Posterior-mean strategies of the row and column models of `config`.
pub fn mixture_model(
    table: &PosteriorTable,
    config: &Configuration,
    bank: &SampleBank,
) -> Result<[BehavioralStrategy; 2]> {
    let k = table.k;
    let weights = table.weights(config)?;
    let row_marginal: Vec<f64> = (0..k)
        .map(|i| weights[i * k..(i + 1) * k].iter().sum())
        .collect();
    let col_marginal: Vec<f64> = (0..k)
        .map(|j| (0..k).map(|i| weights[i * k + j]).sum())
        .collect();
    let mix = |samples: &[BehavioralStrategy], marginal: &[f64], position: Position| {
        let mut probs = [0.0; INFOSETS_PER_POSITION];
        for (s, &w) in samples.iter().zip(marginal) {
            for (acc, p) in probs.iter_mut().zip(s.probs()) {
                *acc += w * p;
            }
        }
        for p in probs.iter_mut() {
            *p = p.clamp(0.0, 1.0);
        }
        BehavioralStrategy::new(position, probs)
    };
    Ok([
        mix(
            bank.samples(&config.row)?,
            &row_marginal,
            config.row.position,
        )?,
        mix(
            bank.samples(&config.col)?,
            &col_marginal,
            config.col.position,
        )?,
    ])
}
