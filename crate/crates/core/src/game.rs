//! Three-player Kuhn poker.
//!
//! Four cards (J < Q < K < A), one card per player, a one-chip ante and a
//! single fixed bet of one chip. Once somebody bets, each remaining player
//! answers once with call or fold. Cards of players reaching showdown are
//! revealed; an uncontested winner shows nothing.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Card {
    Jack,
    Queen,
    King,
    Ace,
}

impl Card {
    pub const ALL: [Card; 4] = [Card::Jack, Card::Queen, Card::King, Card::Ace];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Card> {
        Card::ALL.get(index).copied()
    }

    pub fn to_char(self) -> char {
        match self {
            Card::Jack => 'J',
            Card::Queen => 'Q',
            Card::King => 'K',
            Card::Ace => 'A',
        }
    }

    pub fn from_char(c: char) -> Result<Card> {
        match c.to_ascii_uppercase() {
            'J' => Ok(Card::Jack),
            'Q' => Ok(Card::Queen),
            'K' => Ok(Card::King),
            'A' => Ok(Card::Ace),
            _ => Err(Error::InvalidCard(c.to_string())),
        }
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl FromStr for Card {
    type Err = Error;

    fn from_str(s: &str) -> Result<Card> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Card::from_char(c),
            _ => Err(Error::InvalidCard(s.to_string())),
        }
    }
}

/// Seat in the order of play for a single hand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    First,
    Second,
    Third,
}

impl Position {
    pub const ALL: [Position; 3] = [Position::First, Position::Second, Position::Third];

    pub fn index(self) -> usize {
        self as usize
    }

    /// 1-based seat number.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_index(index: usize) -> Option<Position> {
        Position::ALL.get(index).copied()
    }

    pub fn from_number(n: i64) -> Result<Position> {
        usize::try_from(n - 1)
            .ok()
            .and_then(Position::from_index)
            .ok_or(Error::InvalidPosition(n))
    }

    /// The player acting after this one within a hand.
    pub fn next_in_turn(self) -> Position {
        Position::ALL[(self.index() + 1) % 3]
    }

    /// Seat occupied in the following hand: first to act moves to third,
    /// second to first, third to second.
    pub fn rotate(self) -> Position {
        Position::ALL[(self.index() + 2) % 3]
    }

    pub fn rotate_by(self, hands: usize) -> Position {
        Position::ALL[(self.index() + 2 * (hands % 3)) % 3]
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for Position {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let n = u8::deserialize(d)?;
        Position::from_number(n as i64).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_char(self.to_char())
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = char::deserialize(d)?;
        Card::from_char(c).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Check,
    Bet,
    Call,
    Fold,
}

impl Action {
    pub fn is_aggressive(self) -> bool {
        matches!(self, Action::Bet | Action::Call)
    }

    pub fn to_char(self) -> char {
        match self {
            Action::Check => 'k',
            Action::Bet => 'b',
            Action::Call => 'c',
            Action::Fold => 'f',
        }
    }

    pub fn from_char(c: char) -> Result<Action> {
        match c.to_ascii_lowercase() {
            'k' => Ok(Action::Check),
            'b' => Ok(Action::Bet),
            'c' => Ok(Action::Call),
            'f' => Ok(Action::Fold),
            _ => Err(Error::IllegalSequence(c.to_string())),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

pub const MAX_SEQ_LEN: usize = 5;

/// Public betting history. Always a legal prefix of some complete line.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionSeq {
    buf: [Action; MAX_SEQ_LEN],
    len: u8,
}

impl Default for ActionSeq {
    fn default() -> Self {
        ActionSeq::new()
    }
}

/// Where the betting stands after some prefix.
#[derive(Clone, Copy, Debug)]
struct Progress {
    to_act: Option<Position>,
    bettor: Option<Position>,
    responses: u8,
    folded: [bool; 3],
}

fn progress(actions: &[Action]) -> std::result::Result<Progress, ()> {
    let mut state = Progress {
        to_act: Some(Position::First),
        bettor: None,
        responses: 0,
        folded: [false; 3],
    };
    let mut checks = 0;
    for &action in actions {
        let player = state.to_act.ok_or(())?;
        match (state.bettor, action) {
            (None, Action::Check) => {
                checks += 1;
                state.to_act = (checks < 3).then(|| player.next_in_turn());
            }
            (None, Action::Bet) => {
                state.bettor = Some(player);
                state.to_act = Some(player.next_in_turn());
            }
            (Some(_), Action::Call | Action::Fold) => {
                if action == Action::Fold {
                    state.folded[player.index()] = true;
                }
                state.responses += 1;
                state.to_act = (state.responses < 2).then(|| player.next_in_turn());
            }
            _ => return Err(()),
        }
    }
    Ok(state)
}

impl ActionSeq {
    pub fn new() -> ActionSeq {
        ActionSeq {
            buf: [Action::Check; MAX_SEQ_LEN],
            len: 0,
        }
    }

    pub fn from_actions(actions: &[Action]) -> Result<ActionSeq> {
        let mut seq = ActionSeq::new();
        for &a in actions {
            seq = seq.with(a).map_err(|_| {
                Error::IllegalSequence(actions.iter().map(|a| a.to_char()).collect())
            })?;
        }
        Ok(seq)
    }

    pub fn parse(s: &str) -> Result<ActionSeq> {
        let s = s.trim();
        let actions = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '-')
            .map(Action::from_char)
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::IllegalSequence(s.to_string()))?;
        ActionSeq::from_actions(&actions)
    }

    pub fn as_slice(&self) -> &[Action] {
        &self.buf[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Extends the sequence, rejecting actions that are not legal here.
    pub fn with(&self, action: Action) -> Result<ActionSeq> {
        let legal = legal_actions(self).map_err(|_| Error::IllegalSequence(self.to_string()))?;
        if !legal.contains(&action) {
            return Err(Error::IllegalSequence(format!("{self}{action}")));
        }
        let mut next = *self;
        next.buf[next.len as usize] = action;
        next.len += 1;
        Ok(next)
    }

    fn progress(&self) -> Progress {
        progress(self.as_slice()).expect("ActionSeq holds only legal prefixes")
    }

    pub fn is_terminal(&self) -> bool {
        self.progress().to_act.is_none()
    }

    /// Player whose turn it is, or `None` at a terminal sequence.
    pub fn to_act(&self) -> Option<Position> {
        self.progress().to_act
    }

    pub fn folded(&self) -> [bool; 3] {
        self.progress().folded
    }

    /// Chips put in the pot by each position, antes included.
    pub fn contributions(&self) -> [i32; 3] {
        let mut contrib = [1; 3];
        let mut player = Position::First;
        for &a in self.as_slice() {
            if a.is_aggressive() {
                contrib[player.index()] += 1;
            }
            player = player.next_in_turn();
        }
        contrib
    }

    /// Positions that took each action, in order.
    pub fn actors(&self) -> impl Iterator<Item = (Position, Action)> + '_ {
        let mut player = Position::First;
        self.as_slice().iter().map(move |&a| {
            let p = player;
            player = player.next_in_turn();
            (p, a)
        })
    }

    /// Players still holding cards at the end of betting when two or more remain.
    pub fn showdown(&self) -> Option<[bool; 3]> {
        let folded = self.folded();
        let live = folded.iter().filter(|f| !**f).count();
        (self.is_terminal() && live >= 2).then(|| folded.map(|f| !f))
    }
}

impl fmt::Display for ActionSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in self.as_slice() {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ActionSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActionSeq(\"{self}\")")
    }
}

impl FromStr for ActionSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<ActionSeq> {
        ActionSeq::parse(s)
    }
}

impl Serialize for ActionSeq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ActionSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ActionSeq::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub fn legal_actions(seq: &ActionSeq) -> Result<[Action; 2]> {
    let state = seq.progress();
    match (state.to_act, state.bettor) {
        (None, _) => Err(Error::TerminalSequence),
        (Some(_), None) => Ok([Action::Check, Action::Bet]),
        (Some(_), Some(_)) => Ok([Action::Call, Action::Fold]),
    }
}

pub fn is_terminal(seq: &ActionSeq) -> bool {
    seq.is_terminal()
}

/// One of the four public histories at which a given position acts.
///
/// | situation | P1  | P2   | P3 |
/// |-----------|-----|------|----|
/// | 1         | --  | K    | KK |
/// | 2         | KKB | B    | KB |
/// | 3         | KBF | KKBF | BF |
/// | 4         | KBC | KKBC | BC |
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Situation(u8);

impl Situation {
    pub const ALL: [Situation; 4] = [Situation(1), Situation(2), Situation(3), Situation(4)];

    pub fn new(number: i64) -> Result<Situation> {
        if (1..=4).contains(&number) {
            Ok(Situation(number as u8))
        } else {
            Err(Error::InvalidSituation(number))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn facing_bet(self) -> bool {
        self.0 > 1
    }

    pub fn aggressive_action(self) -> Action {
        if self.facing_bet() {
            Action::Call
        } else {
            Action::Bet
        }
    }

    pub fn passive_action(self) -> Action {
        if self.facing_bet() {
            Action::Fold
        } else {
            Action::Check
        }
    }

    /// Public history preceding this situation for `position`.
    pub fn prefix(self, position: Position) -> ActionSeq {
        let text = match (position, self.0) {
            (Position::First, 1) => "",
            (Position::First, 2) => "kkb",
            (Position::First, 3) => "kbf",
            (Position::First, 4) => "kbc",
            (Position::Second, 1) => "k",
            (Position::Second, 2) => "b",
            (Position::Second, 3) => "kkbf",
            (Position::Second, 4) => "kkbc",
            (Position::Third, 1) => "kk",
            (Position::Third, 2) => "kb",
            (Position::Third, 3) => "bf",
            (Position::Third, _) => "bc",
            _ => unreachable!(),
        };
        ActionSeq::parse(text).expect("situation prefixes are legal")
    }
}

impl TryFrom<u8> for Situation {
    type Error = Error;

    fn try_from(n: u8) -> Result<Situation> {
        Situation::new(n as i64)
    }
}

impl From<Situation> for u8 {
    fn from(s: Situation) -> u8 {
        s.0
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn situation_of(position: Position, seq: &ActionSeq) -> Option<Situation> {
    let state = seq.progress();
    if state.to_act != Some(position) {
        return None;
    }
    let number = match state.bettor {
        None => 1,
        Some(_) if state.responses == 0 => 2,
        Some(_) => match seq.as_slice().last() {
            Some(Action::Fold) => 3,
            _ => 4,
        },
    };
    Some(Situation(number))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InfoSetKey {
    pub position: Position,
    pub card: Card,
    pub situation: Situation,
}

impl InfoSetKey {
    pub fn new(position: Position, card: Card, situation: Situation) -> InfoSetKey {
        InfoSetKey {
            position,
            card,
            situation,
        }
    }

    /// Card-major index within the position, in `0..16`.
    pub fn index(&self) -> usize {
        self.card.index() * 4 + self.situation.index()
    }

    pub fn from_index(position: Position, index: usize) -> InfoSetKey {
        InfoSetKey {
            position,
            card: Card::ALL[index / 4],
            situation: Situation::ALL[index % 4],
        }
    }
}

impl fmt::Display for InfoSetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.position, self.card, self.situation)
    }
}

pub const INFOSETS_PER_POSITION: usize = 16;

pub fn enumerate_infosets(position: Position) -> Vec<InfoSetKey> {
    (0..INFOSETS_PER_POSITION)
        .map(|i| InfoSetKey::from_index(position, i))
        .collect()
}

/// Cards held by positions 1..3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Deal {
    cards: [Card; 3],
}

impl Deal {
    pub fn new(cards: [Card; 3]) -> Result<Deal> {
        if cards[0] == cards[1] || cards[0] == cards[2] || cards[1] == cards[2] {
            let s: String = cards.iter().map(|c| c.to_char()).collect();
            return Err(Error::InvalidDeal(s));
        }
        Ok(Deal { cards })
    }

    pub fn cards(&self) -> [Card; 3] {
        self.cards
    }

    pub fn card(&self, position: Position) -> Card {
        self.cards[position.index()]
    }

    /// All 24 deals in lexicographic order.
    pub fn all() -> &'static [Deal] {
        static DEALS: OnceLock<Vec<Deal>> = OnceLock::new();
        DEALS.get_or_init(|| {
            let mut deals = Vec::with_capacity(24);
            for a in Card::ALL {
                for b in Card::ALL {
                    for c in Card::ALL {
                        if let Ok(d) = Deal::new([a, b, c]) {
                            deals.push(d);
                        }
                    }
                }
            }
            deals
        })
    }

    pub fn parse(s: &str) -> Result<Deal> {
        let s = s.trim();
        let cards: Vec<Card> = s
            .chars()
            .map(Card::from_char)
            .collect::<Result<_>>()
            .map_err(|_| Error::InvalidDeal(s.to_string()))?;
        let cards: [Card; 3] = cards
            .try_into()
            .map_err(|_| Error::InvalidDeal(s.to_string()))?;
        Deal::new(cards)
    }
}

impl fmt::Display for Deal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.cards {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Deal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Deal> {
        Deal::parse(s)
    }
}

impl Serialize for Deal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Deal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Deal::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Net chips won by each position in one hand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PayoffVector(pub [i32; 3]);

impl PayoffVector {
    pub fn get(&self, position: Position) -> i32 {
        self.0[position.index()]
    }
}

pub fn payoff(deal: &Deal, seq: &ActionSeq) -> Result<PayoffVector> {
    if !seq.is_terminal() {
        return Err(Error::NotTerminal(seq.to_string()));
    }
    let contrib = seq.contributions();
    let folded = seq.folded();
    let pot: i32 = contrib.iter().sum();
    let winner = Position::ALL
        .into_iter()
        .filter(|p| !folded[p.index()])
        .max_by_key(|p| deal.card(*p))
        .expect("somebody always stays in");
    let mut net = contrib.map(|c| -c);
    net[winner.index()] += pot;
    Ok(PayoffVector(net))
}

/// What one player sees at the end of a hand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandObservation {
    pub observer: Position,
    pub own_card: Card,
    pub actions: ActionSeq,
    /// Cards shown at showdown, by position.
    pub revealed: [Option<Card>; 3],
}

impl HandObservation {
    /// Checks the observation against the rules: terminal betting, revealed
    /// cards exactly for the showdown participants, no duplicated cards.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InconsistentObservation(msg.to_string()));
        if !self.actions.is_terminal() {
            return bad("betting is not complete");
        }
        let showdown = self.actions.showdown().unwrap_or([false; 3]);
        for p in Position::ALL {
            if showdown[p.index()] != self.revealed[p.index()].is_some() {
                return bad("revealed cards do not match the showdown participants");
            }
        }
        if let Some(c) = self.revealed[self.observer.index()] {
            if c != self.own_card {
                return bad("observer's revealed card differs from own card");
            }
        }
        let mut seen = [false; 4];
        seen[self.own_card.index()] = true;
        for p in Position::ALL {
            if p == self.observer {
                continue;
            }
            if let Some(c) = self.revealed[p.index()] {
                if seen[c.index()] {
                    return bad("duplicate card");
                }
                seen[c.index()] = true;
            }
        }
        Ok(())
    }

    /// Card of `position` if known to the observer.
    pub fn known_card(&self, position: Position) -> Option<Card> {
        if position == self.observer {
            Some(self.own_card)
        } else {
            self.revealed[position.index()]
        }
    }
}

pub fn observe(deal: &Deal, seq: &ActionSeq, observer: Position) -> Result<HandObservation> {
    if !seq.is_terminal() {
        return Err(Error::NotTerminal(seq.to_string()));
    }
    let showdown = seq.showdown().unwrap_or([false; 3]);
    let mut revealed = [None; 3];
    for p in Position::ALL {
        if showdown[p.index()] {
            revealed[p.index()] = Some(deal.card(p));
        }
    }
    Ok(HandObservation {
        observer,
        own_card: deal.card(observer),
        actions: *seq,
        revealed,
    })
}

/// A decision point along a betting line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub position: Position,
    pub situation: Situation,
    pub aggressive: bool,
}

/// A complete betting line with its decisions precomputed.
#[derive(Clone, Debug)]
pub struct TerminalLine {
    pub actions: ActionSeq,
    pub decisions: Vec<Decision>,
    pub folded: [bool; 3],
    pub contributions: [i32; 3],
}

impl TerminalLine {
    pub fn payoff(&self, deal: &Deal) -> PayoffVector {
        payoff(deal, &self.actions).expect("terminal line")
    }
}

/// The 13 complete betting lines, found by walking the tree.
pub fn terminal_lines() -> &'static [TerminalLine] {
    static LINES: OnceLock<Vec<TerminalLine>> = OnceLock::new();
    LINES.get_or_init(|| {
        fn walk(seq: ActionSeq, decisions: &mut Vec<Decision>, out: &mut Vec<TerminalLine>) {
            let Some(player) = seq.to_act() else {
                out.push(TerminalLine {
                    actions: seq,
                    decisions: decisions.clone(),
                    folded: seq.folded(),
                    contributions: seq.contributions(),
                });
                return;
            };
            let situation = situation_of(player, &seq).expect("player to act has a situation");
            for action in legal_actions(&seq).expect("non-terminal") {
                decisions.push(Decision {
                    position: player,
                    situation,
                    aggressive: action.is_aggressive(),
                });
                walk(seq.with(action).expect("legal"), decisions, out);
                decisions.pop();
            }
        }
        let mut out = Vec::new();
        walk(ActionSeq::new(), &mut Vec::new(), &mut out);
        out
    })
}

pub fn terminal_sequences() -> Vec<ActionSeq> {
    terminal_lines().iter().map(|l| l.actions).collect()
}
