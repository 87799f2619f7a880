//! Seeded matches, duplicate sets and tournaments.
//!
//! A duplicate set plays one deal schedule six times, once for every
//! assignment of the three agents to starting seats, so card luck cancels
//! out of the per-agent totals. Every random stream is derived from the set
//! seed, which makes whole tournaments reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::agent::{MbbrAgent, MbbrConfig};
use crate::error::{Error, Result};
use crate::game::{observe, payoff, situation_of, ActionSeq, Deal, InfoSetKey, Position};
use crate::strategy::{
    sample_action, AgentPolicy, HandContext, Label, NashPoint, Profile, StaticAgent, ZooKind,
};

const DEAL_STREAM: u64 = 0;
const ACTION_STREAM: u64 = 1;
const SAMPLE_STREAM: u64 = 2;

/// Every assignment of three agents to starting seats.
pub const SEAT_PERMUTATIONS: [[Position; 3]; 6] = {
    use Position::{First as A, Second as B, Third as C};
    [
        [A, B, C],
        [A, C, B],
        [B, A, C],
        [B, C, A],
        [C, A, B],
        [C, B, A],
    ]
};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes a seed with a path of stream identifiers.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum AgentSpec {
    Nash(NashPoint),
    Zoo(ZooKind),
    Mbbr(Box<MbbrConfig>),
    /// A fixed profile, e.g. loaded from a strategy file.
    Fixed {
        name: String,
        profile: Box<Profile>,
    },
}

impl AgentSpec {
    pub fn mbbr(config: MbbrConfig) -> AgentSpec {
        AgentSpec::Mbbr(Box::new(config))
    }

    pub fn name(&self) -> String {
        match self {
            AgentSpec::Nash(p) => p.agent_name().to_string(),
            AgentSpec::Zoo(z) => z.name().to_string(),
            AgentSpec::Mbbr(_) => "MBBR".to_string(),
            AgentSpec::Fixed { name, .. } => name.clone(),
        }
    }

    /// Builds a fresh agent. `opponents` are listed in turn order after us.
    pub fn build(
        &self,
        label: Label,
        opponents: [Label; 2],
        hands: usize,
        seed: u64,
    ) -> Result<Box<dyn AgentPolicy>> {
        Ok(match self {
            AgentSpec::Nash(p) => Box::new(StaticAgent::nash(*p)),
            AgentSpec::Zoo(z) => Box::new(StaticAgent::new(z.name(), z.profile())?),
            AgentSpec::Fixed { name, profile } => {
                Box::new(StaticAgent::new(name.clone(), (**profile).clone())?)
            }
            AgentSpec::Mbbr(cfg) => {
                let cfg = MbbrConfig {
                    total_hands: hands,
                    seed,
                    ..(**cfg).clone()
                };
                Box::new(MbbrAgent::new(cfg, label, opponents)?)
            }
        })
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses `N1`/`N2`/`N3`, `lower`/`mid`/`upper`, a zoo name or `MBBR`
/// (with default settings).
impl FromStr for AgentSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<AgentSpec> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("mbbr") {
            return Ok(AgentSpec::mbbr(MbbrConfig::default()));
        }
        if let Ok(p) = t.parse::<NashPoint>() {
            return Ok(AgentSpec::Nash(p));
        }
        t.parse::<ZooKind>().map(AgentSpec::Zoo)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DealSchedule {
    deals: Vec<Deal>,
}

impl DealSchedule {
    pub fn generate(seed: u64, hands: usize) -> DealSchedule {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let all = Deal::all();
        let deals = (0..hands)
            .map(|_| all[rng.random_range(0..all.len())])
            .collect();
        DealSchedule { deals }
    }

    pub fn from_deals(deals: Vec<Deal>) -> DealSchedule {
        DealSchedule { deals }
    }

    pub fn deals(&self) -> &[Deal] {
        &self.deals
    }

    pub fn len(&self) -> usize {
        self.deals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deals.is_empty()
    }

    /// One deal per line, cards listed by position.
    pub fn to_text(&self) -> String {
        self.deals.iter().map(|d| format!("{d}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<DealSchedule> {
        let mut deals = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let deal = Deal::parse(line).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            deals.push(deal);
        }
        Ok(DealSchedule { deals })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchSpec {
    /// Agents by slot. Slot `i` plays under label `Li`.
    pub agents: [AgentSpec; 3],
    /// Starting seat of each slot.
    pub seats: [Position; 3],
    pub hands: usize,
    pub seed: u64,
    pub rotate_seats: bool,
}

impl MatchSpec {
    pub fn new(agents: [AgentSpec; 3], hands: usize, seed: u64) -> MatchSpec {
        MatchSpec {
            agents,
            seats: Position::ALL,
            hands,
            seed,
            rotate_seats: true,
        }
    }

    pub fn seat_of(&self, slot: usize, hand: usize) -> Position {
        if self.rotate_seats {
            self.seats[slot].rotate_by(hand)
        } else {
            self.seats[slot]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HandRecord {
    pub hand: usize,
    pub deal: Deal,
    pub actions: ActionSeq,
    /// Seat of each slot.
    pub seats: [Position; 3],
    /// Chips won by each slot.
    pub payoffs: [i32; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchResult {
    pub agents: [String; 3],
    pub seats: [Position; 3],
    pub seed: u64,
    pub hands: usize,
    pub chips: [i64; 3],
    pub log: Vec<HandRecord>,
}

impl MatchResult {
    /// Average winnings of a slot in thousandths of a chip per hand.
    pub fn winrate_mchips(&self, slot: usize) -> f64 {
        mchips(self.chips[slot], self.hands)
    }
}

fn mchips(chips: i64, hands: usize) -> f64 {
    if hands == 0 {
        0.0
    } else {
        chips as f64 * 1000.0 / hands as f64
    }
}

fn validate_seats(seats: &[Position; 3]) -> Result<()> {
    let mut seen = [false; 3];
    for s in seats {
        if std::mem::replace(&mut seen[s.index()], true) {
            return Err(Error::InvalidConfig(format!(
                "starting seats {seats:?} are not a permutation"
            )));
        }
    }
    Ok(())
}

pub fn run_match(spec: &MatchSpec, schedule: &DealSchedule) -> Result<MatchResult> {
    validate_seats(&spec.seats)?;
    if schedule.len() < spec.hands {
        return Err(Error::ScheduleTooShort {
            have: schedule.len(),
            need: spec.hands,
        });
    }
    // Turn order at the table never changes under rotation, so each slot's
    // opponents in turn order are fixed for the whole match.
    let mut slot_at = [0usize; 3];
    for slot in 0..3 {
        slot_at[spec.seats[slot].index()] = slot;
    }
    let mut agents = Vec::with_capacity(3);
    for slot in 0..3 {
        let first = spec.seats[slot].next_in_turn();
        let opponents = [
            Label(slot_at[first.index()] as u8),
            Label(slot_at[first.next_in_turn().index()] as u8),
        ];
        let seed = derive_seed(spec.seed, &[SAMPLE_STREAM, slot as u64]);
        agents.push(spec.agents[slot].build(Label(slot as u8), opponents, spec.hands, seed)?);
    }
    let mut rngs: Vec<ChaCha8Rng> = (0..3)
        .map(|slot| ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[ACTION_STREAM, slot])))
        .collect();

    let mut chips = [0i64; 3];
    let mut log = Vec::with_capacity(spec.hands);
    for (t, deal) in schedule.deals()[..spec.hands].iter().enumerate() {
        let seats = [0, 1, 2].map(|slot| spec.seat_of(slot, t));
        let mut slot_at = [0usize; 3];
        let mut seat_labels = [Label(0); 3];
        for slot in 0..3 {
            slot_at[seats[slot].index()] = slot;
            seat_labels[seats[slot].index()] = Label(slot as u8);
        }
        for slot in 0..3 {
            agents[slot].begin_hand(&HandContext {
                hand_index: t + 1,
                seat: seats[slot],
                seat_labels,
            })?;
        }
        let mut seq = ActionSeq::new();
        while let Some(pos) = seq.to_act() {
            let slot = slot_at[pos.index()];
            let situation =
                situation_of(pos, &seq).ok_or_else(|| Error::IllegalSequence(seq.to_string()))?;
            let key = InfoSetKey::new(pos, deal.card(pos), situation);
            let p = agents[slot].aggressive_prob(&key)?;
            seq = seq.with(sample_action(p, situation, &mut rngs[slot]))?;
        }
        let result = payoff(deal, &seq)?;
        let payoffs = [0, 1, 2].map(|slot| result.get(seats[slot]));
        for slot in 0..3 {
            chips[slot] += payoffs[slot] as i64;
            agents[slot].end_hand(&observe(deal, &seq, seats[slot])?)?;
        }
        log.push(HandRecord {
            hand: t + 1,
            deal: *deal,
            actions: seq,
            seats,
            payoffs,
        });
    }
    debug_assert_eq!(chips.iter().sum::<i64>(), 0);
    Ok(MatchResult {
        agents: spec.agents.clone().map(|a| a.name()),
        seats: spec.seats,
        seed: spec.seed,
        hands: spec.hands,
        chips,
        log,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DuplicateResult {
    pub agents: [String; 3],
    pub seed: u64,
    /// Hands per match; a set is six matches.
    pub hands: usize,
    pub chips: [i64; 3],
    pub matches: Vec<MatchResult>,
}

impl DuplicateResult {
    pub fn winrate_mchips(&self, slot: usize) -> f64 {
        mchips(self.chips[slot], self.hands * self.matches.len())
    }
}

/// Plays the six seatings of `agents` on one shared deal schedule.
pub fn run_duplicate_set(
    agents: &[AgentSpec; 3],
    hands: usize,
    seed: u64,
    rotate_seats: bool,
) -> Result<DuplicateResult> {
    let schedule = DealSchedule::generate(derive_seed(seed, &[DEAL_STREAM]), hands);
    let matches = SEAT_PERMUTATIONS
        .par_iter()
        .enumerate()
        .map(|(i, seats)| {
            let spec = MatchSpec {
                agents: agents.clone(),
                seats: *seats,
                hands,
                seed: derive_seed(seed, &[3, i as u64]),
                rotate_seats,
            };
            run_match(&spec, &schedule)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut chips = [0i64; 3];
    for m in &matches {
        for slot in 0..3 {
            chips[slot] += m.chips[slot];
        }
    }
    Ok(DuplicateResult {
        agents: agents.clone().map(|a| a.name()),
        seed,
        hands,
        chips,
        matches,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WinrateStats {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; needs at least two values.
    pub stderr: Option<f64>,
    pub n: usize,
}

pub fn winrate_stats(values: &[f64]) -> WinrateStats {
    let n = values.len();
    let mean = if n == 0 {
        0.0
    } else {
        values.iter().sum::<f64>() / n as f64
    };
    let stderr = (n >= 2).then(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    });
    WinrateStats { mean, stderr, n }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TournamentSpec {
    pub groupings: Vec<[AgentSpec; 3]>,
    /// Duplicate sets played per grouping.
    pub sets: usize,
    /// Hands per match.
    pub hands: usize,
    pub seed: u64,
    pub rotate_seats: bool,
}

/// Seed of duplicate set `index`. Groupings share set seeds, so they are
/// compared on the same deal schedules.
pub fn set_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, &[4, index as u64])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetSummary {
    pub grouping: usize,
    pub set: usize,
    pub seed: u64,
    pub winrates: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TournamentRow {
    pub grouping: usize,
    pub table: String,
    pub slot: usize,
    pub agent: String,
    pub winrate_mchips: f64,
    pub stderr: Option<f64>,
    pub hands: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankingRow {
    pub rank: usize,
    pub agent: String,
    pub winrate_mchips: f64,
    pub stderr: Option<f64>,
    pub sets: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TournamentResult {
    pub rows: Vec<TournamentRow>,
    pub ranking: Vec<RankingRow>,
    pub sets: Vec<SetSummary>,
}

impl TournamentResult {
    /// Per-set winrates of one slot in one grouping.
    pub fn slot_winrates(&self, grouping: usize, slot: usize) -> Vec<f64> {
        self.sets
            .iter()
            .filter(|s| s.grouping == grouping)
            .map(|s| s.winrates[slot])
            .collect()
    }
}

pub fn run_tournament(spec: &TournamentSpec) -> Result<TournamentResult> {
    if spec.groupings.is_empty() || spec.sets == 0 {
        return Err(Error::InvalidConfig(
            "tournament needs at least one grouping and one set".into(),
        ));
    }
    let jobs: Vec<(usize, usize)> = (0..spec.groupings.len())
        .flat_map(|g| (0..spec.sets).map(move |s| (g, s)))
        .collect();
    let sets = jobs
        .par_iter()
        .map(|&(g, s)| {
            let seed = set_seed(spec.seed, s);
            let r = run_duplicate_set(&spec.groupings[g], spec.hands, seed, spec.rotate_seats)?;
            Ok(SetSummary {
                grouping: g,
                set: s,
                seed,
                winrates: [0, 1, 2].map(|slot| r.winrate_mchips(slot)),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut result = TournamentResult {
        rows: Vec::new(),
        ranking: Vec::new(),
        sets,
    };
    let mut pooled: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (g, agents) in spec.groupings.iter().enumerate() {
        let table = agents
            .iter()
            .map(|a| a.name())
            .collect::<Vec<_>>()
            .join(" vs ");
        for (slot, agent) in agents.iter().enumerate() {
            let values = result.slot_winrates(g, slot);
            let stats = winrate_stats(&values);
            pooled.entry(agent.name()).or_default().extend(&values);
            result.rows.push(TournamentRow {
                grouping: g,
                table: table.clone(),
                slot,
                agent: agent.name(),
                winrate_mchips: stats.mean,
                stderr: stats.stderr,
                hands: spec.sets * SEAT_PERMUTATIONS.len() * spec.hands,
                seed: spec.seed,
            });
        }
    }
    let mut ranking: Vec<RankingRow> = pooled
        .into_iter()
        .map(|(agent, values)| {
            let stats = winrate_stats(&values);
            RankingRow {
                rank: 0,
                agent,
                winrate_mchips: stats.mean,
                stderr: stats.stderr,
                sets: stats.n,
            }
        })
        .collect();
    ranking.sort_by(|a, b| b.winrate_mchips.total_cmp(&a.winrate_mchips));
    for (i, row) in ranking.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    result.ranking = ranking;
    Ok(result)
}

/// Zoo opponent pairs used as a stand-in field; each zoo agent appears in
/// exactly two pairs.
pub fn zoo_pairs() -> Vec<[AgentSpec; 2]> {
    use ZooKind::*;
    [
        (AlwaysAggressive, CallingStation),
        (Honest, TightFolder),
        (UniformRandom, CallingStation),
        (AlwaysAggressive, TightFolder),
        (Honest, UniformRandom),
    ]
    .into_iter()
    .map(|(a, b)| [AgentSpec::Zoo(a), AgentSpec::Zoo(b)])
    .collect()
}

/// MBBR and each equilibrium agent seated against every zoo pair.
pub fn standin_groupings(mbbr: &MbbrConfig) -> Vec<[AgentSpec; 3]> {
    let heads = [
        AgentSpec::mbbr(mbbr.clone()),
        AgentSpec::Nash(NashPoint::Lower),
        AgentSpec::Nash(NashPoint::Upper),
        AgentSpec::Nash(NashPoint::Midpoint),
    ];
    heads
        .iter()
        .flat_map(|h| zoo_pairs().into_iter().map(move |[a, b]| [h.clone(), a, b]))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Epsilon,
    #[serde(rename = "H")]
    SwitchHand,
    Eta,
    K,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Epsilon => "epsilon",
            SweepParam::SwitchHand => "H",
            SweepParam::Eta => "eta",
            SweepParam::K => "k",
        }
    }

    pub fn apply(self, base: &MbbrConfig, value: f64) -> Result<MbbrConfig> {
        let count = || {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!(
                    "{} must be a non-negative integer, got {value}",
                    self.name()
                )))
            }
        };
        let mut cfg = base.clone();
        match self {
            SweepParam::Epsilon => cfg.epsilon = value,
            SweepParam::Eta => cfg.eta = value,
            SweepParam::K => cfg.k = count()?,
            SweepParam::SwitchHand => cfg.switch_hand = count()?,
        }
        Ok(cfg)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<SweepParam> {
        match s.trim() {
            "epsilon" | "eps" => Ok(SweepParam::Epsilon),
            "H" | "h" | "switch-h" => Ok(SweepParam::SwitchHand),
            "eta" => Ok(SweepParam::Eta),
            "k" | "K" => Ok(SweepParam::K),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep parameter `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub base: MbbrConfig,
    /// Opponent pairs the agent is seated with, each forming one grouping.
    pub opponents: Vec<[AgentSpec; 2]>,
    pub sets: usize,
    pub hands: usize,
    pub seed: u64,
    pub rotate_seats: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub winrate_mchips: f64,
    pub stderr: Option<f64>,
    pub sets: usize,
    pub hands: usize,
    pub seed: u64,
}

/// MBBR's pooled winrate for each parameter value. Every value is played on
/// the same deal schedules.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.values
        .iter()
        .map(|&value| {
            let cfg = spec.param.apply(&spec.base, value)?;
            let groupings = spec
                .opponents
                .iter()
                .map(|[a, b]| [AgentSpec::mbbr(cfg.clone()), a.clone(), b.clone()])
                .collect();
            let t = run_tournament(&TournamentSpec {
                groupings,
                sets: spec.sets,
                hands: spec.hands,
                seed: spec.seed,
                rotate_seats: spec.rotate_seats,
            })?;
            let values: Vec<f64> = t.sets.iter().map(|s| s.winrates[0]).collect();
            let stats = winrate_stats(&values);
            Ok(SweepRow {
                param: spec.param.name().to_string(),
                value,
                winrate_mchips: stats.mean,
                stderr: stats.stderr,
                sets: stats.n,
                hands: spec.hands,
                seed: spec.seed,
            })
        })
        .collect()
}
