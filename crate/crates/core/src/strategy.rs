//! Behavioral strategies, the robust equilibrium agents and a zoo of simple
//! exploitable agents.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    Action, Card, HandObservation, InfoSetKey, Position, Situation, INFOSETS_PER_POSITION,
};

/// Probability of the aggressive action (bet or call) at each of one
/// position's 16 information sets, indexed card-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehavioralStrategy {
    pub position: Position,
    probs: [f64; INFOSETS_PER_POSITION],
}

impl BehavioralStrategy {
    pub fn new(position: Position, probs: [f64; INFOSETS_PER_POSITION]) -> Result<Self> {
        if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(BehavioralStrategy { position, probs })
    }

    pub fn constant(position: Position, p: f64) -> Result<Self> {
        Self::new(position, [p; INFOSETS_PER_POSITION])
    }

    pub fn from_fn(position: Position, mut f: impl FnMut(Card, Situation) -> f64) -> Result<Self> {
        let mut probs = [0.0; INFOSETS_PER_POSITION];
        for (i, p) in probs.iter_mut().enumerate() {
            let key = InfoSetKey::from_index(position, i);
            *p = f(key.card, key.situation);
        }
        Self::new(position, probs)
    }

    pub fn probs(&self) -> &[f64; INFOSETS_PER_POSITION] {
        &self.probs
    }

    pub fn get(&self, card: Card, situation: Situation) -> f64 {
        self.probs[card.index() * 4 + situation.index()]
    }

    pub fn prob(&self, key: &InfoSetKey) -> Result<f64> {
        if key.position != self.position {
            return Err(Error::MissingInfoSet(key.to_string()));
        }
        Ok(self.probs[key.index()])
    }

    /// Probability of taking `aggressive` (or its complement) at `key`'s cell.
    pub fn action_prob(&self, card: Card, situation: Situation, aggressive: bool) -> f64 {
        let p = self.get(card, situation);
        if aggressive {
            p
        } else {
            1.0 - p
        }
    }

    pub fn set(&mut self, card: Card, situation: Situation, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        self.probs[card.index() * 4 + situation.index()] = p;
        Ok(())
    }

    pub fn is_pure(&self) -> bool {
        self.probs.iter().all(|&p| p == 0.0 || p == 1.0)
    }
}

/// One strategy per position, indexed by position.
pub type Profile = [BehavioralStrategy; 3];

/// Samples an action at `key`: aggressive with the strategy's probability.
pub fn act<R: Rng + ?Sized>(
    strategy: &BehavioralStrategy,
    key: &InfoSetKey,
    rng: &mut R,
) -> Result<Action> {
    let p = strategy.prob(key)?;
    Ok(sample_action(p, key.situation, rng))
}

pub fn sample_action<R: Rng + ?Sized>(p: f64, situation: Situation, rng: &mut R) -> Action {
    if rng.random::<f64>() < p {
        situation.aggressive_action()
    } else {
        situation.passive_action()
    }
}

/// The three points of the robust equilibrium subfamily used as agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NashPoint {
    /// N1
    Lower,
    /// N3
    Midpoint,
    /// N2
    Upper,
}

impl NashPoint {
    pub const ALL: [NashPoint; 3] = [NashPoint::Lower, NashPoint::Midpoint, NashPoint::Upper];

    pub fn agent_name(self) -> &'static str {
        match self {
            NashPoint::Lower => "N1",
            NashPoint::Upper => "N2",
            NashPoint::Midpoint => "N3",
        }
    }
}

impl fmt::Display for NashPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NashPoint::Lower => "lower",
            NashPoint::Midpoint => "mid",
            NashPoint::Upper => "upper",
        })
    }
}

impl FromStr for NashPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<NashPoint> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lower" | "n1" => Ok(NashPoint::Lower),
            "mid" | "midpoint" | "n3" => Ok(NashPoint::Midpoint),
            "upper" | "n2" => Ok(NashPoint::Upper),
            _ => Err(Error::UnknownNashPoint(s.to_string())),
        }
    }
}

/// An exact rational table entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio(pub u32, pub u32);

impl Ratio {
    pub fn value(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

/// Equilibrium parameter `(card, situation) -> aggressive probability` for
/// one position. Cards and situations are 1-based as in the usual
/// `a_jk`, `b_jk`, `c_jk` notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NashEntry {
    pub position: Position,
    pub card: u8,
    pub situation: u8,
    pub value: Ratio,
}

const LISTED_CELLS: [(u8, u8); 9] = [
    (1, 1),
    (2, 1),
    (2, 2),
    (2, 3),
    (3, 1),
    (3, 2),
    (3, 3),
    (3, 4),
    (4, 1),
];

const Z: Ratio = Ratio(0, 1);
const ONE: Ratio = Ratio(1, 1);
const HALF: Ratio = Ratio(1, 2);

// Rows follow LISTED_CELLS; columns are positions 1, 2, 3.
const LOWER_TABLE: [[Ratio; 3]; 9] = [
    [Z, Z, Z],
    [Z, Z, HALF],
    [Z, Z, Z],
    [Z, Z, Z],
    [Z, Z, Z],
    [Z, Z, Z],
    [HALF, HALF, HALF],
    [Z, Z, Z],
    [Z, Z, ONE],
];

const UPPER_TABLE: [[Ratio; 3]; 9] = [
    [Z, Ratio(1, 4), Z],
    [Z, Ratio(1, 4), HALF],
    [Z, Z, Z],
    [Z, Z, Z],
    [Z, Z, Z],
    [Z, ONE, Z],
    [HALF, Ratio(7, 8), Z],
    [Z, Z, ONE],
    [Z, ONE, ONE],
];

const MIDPOINT_TABLE: [[Ratio; 3]; 9] = [
    [Z, Ratio(1, 8), Z],
    [Z, Ratio(1, 8), HALF],
    [Z, Z, Z],
    [Z, Z, Z],
    [Z, Z, Z],
    [Z, Ratio(23, 64), Z],
    [HALF, Ratio(11, 16), Ratio(1, 4)],
    [Z, Z, HALF],
    [Z, HALF, ONE],
];

/// The 27 tabulated parameters of an equilibrium point.
pub fn nash_listed_params(point: NashPoint) -> Vec<NashEntry> {
    let table = match point {
        NashPoint::Lower => &LOWER_TABLE,
        NashPoint::Midpoint => &MIDPOINT_TABLE,
        NashPoint::Upper => &UPPER_TABLE,
    };
    let mut out = Vec::with_capacity(27);
    for position in Position::ALL {
        for (row, &(card, situation)) in LISTED_CELLS.iter().enumerate() {
            out.push(NashEntry {
                position,
                card,
                situation,
                value: table[row][position.index()],
            });
        }
    }
    out
}

/// Value of a cell the tables leave out. Every such cell is settled by
/// dominance: a Jack never wins a showdown against a bettor, a Queen facing
/// a bet and a call always loses, and an Ace always wins.
fn dominated_cell(card: Card, situation: Situation) -> Option<Ratio> {
    match (card, situation.number()) {
        (Card::Jack, 2..=4) => Some(Z),
        (Card::Queen, 4) => Some(Z),
        (Card::Ace, 2..=4) => Some(ONE),
        _ => None,
    }
}

/// Entries that differ from the printed tables. The upper-bound table prints
/// `b32 = 1`, but with every other entry as printed the profile is an
/// equilibrium only for `b32` in `[1/2, 15/16]` (P1 gains 1/192 per hand by
/// betting the Ace otherwise). The upper end of that interval is used; it is
/// also the value consistent with the midpoint point, whose `b32 = 23/64` is
/// the centre of its own interval `[1/4, 15/32]`.
pub fn nash_corrections(point: NashPoint) -> Vec<NashEntry> {
    match point {
        NashPoint::Upper => vec![NashEntry {
            position: Position::Second,
            card: 3,
            situation: 2,
            value: Ratio(15, 16),
        }],
        NashPoint::Lower | NashPoint::Midpoint => Vec::new(),
    }
}

/// Equilibrium profile for `point`, with the corrections of
/// [`nash_corrections`] applied.
pub fn nash_profile(point: NashPoint) -> Profile {
    let mut profile = table_profile(point);
    for e in nash_corrections(point) {
        let card = Card::ALL[e.card as usize - 1];
        let situation = Situation::ALL[e.situation as usize - 1];
        profile[e.position.index()]
            .set(card, situation, e.value.value())
            .expect("valid probability");
    }
    profile
}

/// Profile built from the printed tables verbatim plus dominance-forced cells.
pub fn table_profile(point: NashPoint) -> Profile {
    let mut probs = [[f64::NAN; INFOSETS_PER_POSITION]; 3];
    for e in nash_listed_params(point) {
        let idx = (e.card as usize - 1) * 4 + (e.situation as usize - 1);
        probs[e.position.index()][idx] = e.value.value();
    }
    for position in Position::ALL {
        for i in 0..INFOSETS_PER_POSITION {
            let key = InfoSetKey::from_index(position, i);
            if let Some(r) = dominated_cell(key.card, key.situation) {
                debug_assert!(probs[position.index()][i].is_nan());
                probs[position.index()][i] = r.value();
            }
        }
    }
    Position::ALL
        .map(|p| BehavioralStrategy::new(p, probs[p.index()]).expect("tables cover every cell"))
}

/// Simple static agents standing in for a population of weak opponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZooKind {
    /// Bets and calls everything.
    AlwaysAggressive,
    /// Never bets, never folds.
    CallingStation,
    /// Bets and calls with K or A, otherwise checks or folds.
    Honest,
    /// Aggressive only with the Ace.
    TightFolder,
    /// Flips a fair coin everywhere.
    UniformRandom,
}

impl ZooKind {
    pub const ALL: [ZooKind; 5] = [
        ZooKind::AlwaysAggressive,
        ZooKind::CallingStation,
        ZooKind::Honest,
        ZooKind::TightFolder,
        ZooKind::UniformRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ZooKind::AlwaysAggressive => "always-aggressive",
            ZooKind::CallingStation => "calling-station",
            ZooKind::Honest => "honest",
            ZooKind::TightFolder => "tight-folder",
            ZooKind::UniformRandom => "uniform-random",
        }
    }

    pub fn aggressive_prob(self, card: Card, situation: Situation) -> f64 {
        let yes = |b: bool| if b { 1.0 } else { 0.0 };
        match self {
            ZooKind::AlwaysAggressive => 1.0,
            ZooKind::CallingStation => yes(situation.facing_bet()),
            ZooKind::Honest => yes(card >= Card::King),
            ZooKind::TightFolder => yes(card == Card::Ace),
            ZooKind::UniformRandom => 0.5,
        }
    }

    pub fn profile(self) -> Profile {
        Position::ALL.map(|p| {
            BehavioralStrategy::from_fn(p, |c, s| self.aggressive_prob(c, s)).expect("valid")
        })
    }
}

impl fmt::Display for ZooKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ZooKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ZooKind> {
        ZooKind::ALL
            .into_iter()
            .find(|z| z.name() == s.trim())
            .ok_or_else(|| Error::UnknownAgent(s.to_string()))
    }
}

/// Identity of an agent at the table, independent of where it sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(pub u8);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

/// What an agent is told when a hand starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HandContext {
    /// 1-based hand number within the match.
    pub hand_index: usize,
    pub seat: Position,
    /// Who sits in each position this hand.
    pub seat_labels: [Label; 3],
}

/// Uniform interface for every agent the harness can seat.
pub trait AgentPolicy: Send {
    fn name(&self) -> String;

    fn begin_hand(&mut self, _ctx: &HandContext) -> Result<()> {
        Ok(())
    }

    /// Probability of the aggressive action at `key` for the current hand.
    fn aggressive_prob(&mut self, key: &InfoSetKey) -> Result<f64>;

    fn end_hand(&mut self, _obs: &HandObservation) -> Result<()> {
        Ok(())
    }
}

/// An agent that plays a fixed profile regardless of history.
#[derive(Clone, Debug)]
pub struct StaticAgent {
    name: String,
    profile: Profile,
}

impl StaticAgent {
    pub fn new(name: impl Into<String>, profile: Profile) -> Result<StaticAgent> {
        for p in Position::ALL {
            let found = profile[p.index()].position;
            if found != p {
                return Err(Error::PositionMismatch {
                    expected: p.number(),
                    found: found.number(),
                });
            }
        }
        Ok(StaticAgent {
            name: name.into(),
            profile,
        })
    }

    pub fn nash(point: NashPoint) -> StaticAgent {
        StaticAgent::new(point.agent_name(), nash_profile(point)).expect("valid profile")
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }
}

impl AgentPolicy for StaticAgent {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn aggressive_prob(&mut self, key: &InfoSetKey) -> Result<f64> {
        self.profile[key.position.index()].prob(key)
    }
}

pub fn zoo_agent(name: &str) -> Result<StaticAgent> {
    let kind: ZooKind = name.parse()?;
    StaticAgent::new(kind.name(), kind.profile())
}

fn format_prob(p: f64) -> String {
    // shortest representation that parses back to the same f64
    format!("{p}")
}

fn parse_prob(text: &str) -> Option<f64> {
    let p = match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            if den == 0.0 {
                return None;
            }
            num / den
        }
        None => text.trim().parse().ok()?,
    };
    (0.0..=1.0).contains(&p).then_some(p)
}

/// Writes strategies as `position card situation aggressive_prob` lines.
pub fn format_strategies<'a>(
    strategies: impl IntoIterator<Item = &'a BehavioralStrategy>,
) -> String {
    let mut out = String::new();
    for s in strategies {
        for (i, p) in s.probs.iter().enumerate() {
            let key = InfoSetKey::from_index(s.position, i);
            out.push_str(&format!(
                "{} {} {} {}\n",
                key.position,
                key.card,
                key.situation,
                format_prob(*p)
            ));
        }
    }
    out
}

/// Parses strategy lines. Blank lines and `#` comments are skipped.
/// Returns one strategy per position mentioned; each must be complete.
pub fn parse_strategies(text: &str) -> Result<Vec<BehavioralStrategy>> {
    let mut cells: [[Option<f64>; INFOSETS_PER_POSITION]; 3] = [[None; INFOSETS_PER_POSITION]; 3];
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |msg: String| Error::Parse { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [pos, card, sit, prob] = fields[..] else {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        };
        let pos: i64 = pos
            .parse()
            .map_err(|_| err(format!("bad position `{pos}`")))?;
        let pos = Position::from_number(pos).map_err(|e| err(e.to_string()))?;
        let card: Card = card.parse().map_err(|e: Error| err(e.to_string()))?;
        let sit: i64 = sit
            .parse()
            .map_err(|_| err(format!("bad situation `{sit}`")))?;
        let sit = Situation::new(sit).map_err(|e| err(e.to_string()))?;
        let prob = parse_prob(prob).ok_or_else(|| err(format!("bad probability `{prob}`")))?;
        let slot = &mut cells[pos.index()][InfoSetKey::new(pos, card, sit).index()];
        if slot.is_some() {
            return Err(err(format!("duplicate entry for {pos} {card} {sit}")));
        }
        *slot = Some(prob);
    }
    let mut out = Vec::new();
    for p in Position::ALL {
        let row = &cells[p.index()];
        if row.iter().all(Option::is_none) {
            continue;
        }
        let mut probs = [0.0; INFOSETS_PER_POSITION];
        for (i, c) in row.iter().enumerate() {
            probs[i] =
                c.ok_or_else(|| Error::MissingInfoSet(InfoSetKey::from_index(p, i).to_string()))?;
        }
        out.push(BehavioralStrategy::new(p, probs)?);
    }
    Ok(out)
}

/// Parses a full three-position profile.
pub fn parse_profile(text: &str) -> Result<Profile> {
    let strategies = parse_strategies(text)?;
    let found: Vec<Position> = strategies.iter().map(|s| s.position).collect();
    for p in Position::ALL {
        if !found.contains(&p) {
            return Err(Error::MissingInfoSet(format!("all of position {p}")));
        }
    }
    let [a, b, c]: [BehavioralStrategy; 3] = strategies.try_into().expect("three positions");
    Ok([a, b, c])
}
