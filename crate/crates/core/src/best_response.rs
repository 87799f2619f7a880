//! Exact expected values, best responses and exploitability.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{terminal_lines, Card, Deal, Position, Situation, INFOSETS_PER_POSITION};
use crate::strategy::{BehavioralStrategy, Profile};

/// Values closer than this are treated as ties when picking a response.
pub const TIE_TOLERANCE: f64 = 1e-12;

const DEAL_WEIGHT: f64 = 1.0 / 24.0;

/// Net payoffs indexed `[deal][line]`, following `Deal::all()` and `terminal_lines()`.
fn payoff_table() -> &'static Vec<Vec<[i32; 3]>> {
    static TABLE: OnceLock<Vec<Vec<[i32; 3]>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        Deal::all()
            .iter()
            .map(|d| terminal_lines().iter().map(|l| l.payoff(d).0).collect())
            .collect()
    })
}

/// Expected chips per hand for each position, exact over all deals and lines.
pub fn profile_value(profile: &Profile) -> [f64; 3] {
    let table = payoff_table();
    let mut value = [0.0; 3];
    for (deal, payoffs) in Deal::all().iter().zip(table) {
        for (line, pay) in terminal_lines().iter().zip(payoffs) {
            let reach: f64 = line
                .decisions
                .iter()
                .map(|d| {
                    profile[d.position.index()].action_prob(
                        deal.card(d.position),
                        d.situation,
                        d.aggressive,
                    )
                })
                .product();
            if reach == 0.0 {
                continue;
            }
            for (v, &x) in value.iter_mut().zip(pay) {
                *v += DEAL_WEIGHT * reach * x as f64;
            }
        }
    }
    value
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResponseResult {
    /// Pure strategy: every probability is 0 or 1.
    pub strategy: BehavioralStrategy,
    /// Expected chips per hand for the responding position.
    pub value: f64,
}

/// Places `ours` and the two opponents into a profile indexed by position.
pub fn assemble(ours: &BehavioralStrategy, opponents: [&BehavioralStrategy; 2]) -> Result<Profile> {
    let mut slots: [Option<BehavioralStrategy>; 3] = [None, None, None];
    for s in std::iter::once(ours).chain(opponents) {
        let slot = &mut slots[s.position.index()];
        if slot.is_some() {
            return Err(Error::InvalidConfig(format!(
                "two strategies given for position {}",
                s.position
            )));
        }
        *slot = Some(s.clone());
    }
    let [a, b, c] = slots;
    Ok([a.unwrap(), b.unwrap(), c.unwrap()])
}

/// Contribution of one (deal, line) pair to our value, keyed by the
/// situations at which we act along the line.
struct Term {
    weight: f64,
    /// Bit per situation index: set if we must act at that situation.
    acts: u8,
    /// Bit per situation index: set if the action taken there is aggressive.
    aggressive: u8,
}

fn card_terms(
    position: Position,
    card: Card,
    by_position: &[Option<&BehavioralStrategy>; 3],
) -> Vec<Term> {
    let table = payoff_table();
    let mut terms = Vec::new();
    for (deal, payoffs) in Deal::all().iter().zip(table) {
        if deal.card(position) != card {
            continue;
        }
        for (line, pay) in terminal_lines().iter().zip(payoffs) {
            let mut reach = 1.0;
            let mut acts = 0u8;
            let mut aggressive = 0u8;
            for d in &line.decisions {
                if d.position == position {
                    let bit = 1 << d.situation.index();
                    acts |= bit;
                    if d.aggressive {
                        aggressive |= bit;
                    }
                } else {
                    let s = by_position[d.position.index()].expect("opponent present");
                    reach *= s.action_prob(deal.card(d.position), d.situation, d.aggressive);
                }
            }
            if reach == 0.0 {
                continue;
            }
            terms.push(Term {
                weight: DEAL_WEIGHT * reach * pay[position.index()] as f64,
                acts,
                aggressive,
            });
        }
    }
    terms
}

/// Value of playing the pure situation assignment `mask` with this card.
fn mask_value(terms: &[Term], mask: u8) -> f64 {
    terms
        .iter()
        .filter(|t| mask & t.acts == t.aggressive)
        .map(|t| t.weight)
        .sum()
}

/// Orders masks so that passive play at earlier situations sorts first.
fn passive_order(mask: u8) -> u8 {
    (0..4).fold(0, |acc, bit| (acc << 1) | ((mask >> bit) & 1))
}

/// Best pure assignment over the 4 situations for one card. Among
/// assignments tied with the maximum, prefer the passive action at
/// situation 1, then situation 2, and so on.
fn best_mask(terms: &[Term]) -> u8 {
    let values: [f64; 16] = std::array::from_fn(|m| mask_value(terms, m as u8));
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..16u8)
        .filter(|&m| values[m as usize] >= max - TIE_TOLERANCE)
        .min_by_key(|&m| passive_order(m))
        .expect("at least one mask attains the maximum")
}

fn index_opponents<'a>(
    position: Position,
    opponents: [&'a BehavioralStrategy; 2],
) -> Result<[Option<&'a BehavioralStrategy>; 3]> {
    let mut by_position = [None; 3];
    for s in opponents {
        if s.position == position || by_position[s.position.index()].is_some() {
            return Err(Error::InvalidConfig(format!(
                "opponent strategies must cover the two positions other than {position}"
            )));
        }
        by_position[s.position.index()] = Some(s);
    }
    Ok(by_position)
}

/// Exact best response for `position`: per card, enumerate the 16 pure
/// assignments over our four situations and keep the best.
pub fn best_response(
    position: Position,
    opponents: [&BehavioralStrategy; 2],
) -> Result<ResponseResult> {
    let by_position = index_opponents(position, opponents)?;
    let mut probs = [0.0; INFOSETS_PER_POSITION];
    for card in Card::ALL {
        let terms = card_terms(position, card, &by_position);
        let mask = best_mask(&terms);
        for s in Situation::ALL {
            if mask & (1 << s.index()) != 0 {
                probs[card.index() * 4 + s.index()] = 1.0;
            }
        }
    }
    let strategy = BehavioralStrategy::new(position, probs)?;
    let value = profile_value(&assemble(&strategy, opponents)?)[position.index()];
    Ok(ResponseResult { strategy, value })
}

/// Per position, how much a best response gains over the profile's value.
pub fn exploitability(profile: &Profile) -> [f64; 3] {
    let values = profile_value(profile);
    Position::ALL.map(|p| {
        let others = others(p);
        let br = best_response(
            p,
            [&profile[others[0].index()], &profile[others[1].index()]],
        )
        .expect("profile covers every position");
        (br.value - values[p.index()]).max(0.0)
    })
}

/// The two positions other than `p`, in increasing order.
pub fn others(p: Position) -> [Position; 2] {
    match p {
        Position::First => [Position::Second, Position::Third],
        Position::Second => [Position::First, Position::Third],
        Position::Third => [Position::First, Position::Second],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{payoff, ActionSeq};
    use crate::strategy::{nash_profile, NashPoint, ZooKind};

    /// Independent recursive walk of the betting tree, used to check the
    /// line-table evaluation.
    fn walk_value(profile: &Profile) -> [f64; 3] {
        fn rec(profile: &Profile, deal: &Deal, seq: ActionSeq, reach: f64, acc: &mut [f64; 3]) {
            if reach == 0.0 {
                return;
            }
            match seq.to_act() {
                None => {
                    let pay = payoff(deal, &seq).unwrap();
                    for p in 0..3 {
                        acc[p] += reach * pay.0[p] as f64 / 24.0;
                    }
                }
                Some(player) => {
                    let sit = crate::game::situation_of(player, &seq).unwrap();
                    let p = profile[player.index()].get(deal.card(player), sit);
                    rec(
                        profile,
                        deal,
                        seq.with(sit.aggressive_action()).unwrap(),
                        reach * p,
                        acc,
                    );
                    rec(
                        profile,
                        deal,
                        seq.with(sit.passive_action()).unwrap(),
                        reach * (1.0 - p),
                        acc,
                    );
                }
            }
        }
        let mut acc = [0.0; 3];
        for deal in Deal::all() {
            rec(profile, deal, ActionSeq::new(), 1.0, &mut acc);
        }
        acc
    }

    #[test]
    fn uniform_profile_is_zero_sum() {
        let v = profile_value(&ZooKind::UniformRandom.profile());
        assert!(v.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn line_table_matches_tree_walk() {
        for point in NashPoint::ALL {
            let profile = nash_profile(point);
            let a = profile_value(&profile);
            let b = walk_value(&profile);
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() <= 1e-12, "{point:?}: {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn folder_against_two_maniacs() {
        // P1 checks and folds everything; the others bet and call everything.
        let p1 = BehavioralStrategy::constant(Position::First, 0.0).unwrap();
        let maniac = ZooKind::AlwaysAggressive.profile();
        let profile = [p1, maniac[1].clone(), maniac[2].clone()];
        let v = profile_value(&profile);
        // P1 always checks, P2 always bets, P1 folds, P3 calls: P1 loses the ante.
        // P2 and P3 split by card: each wins the 5-chip pot half the time.
        assert!((v[0] + 1.0).abs() < 1e-12);
        assert!((v[1] - 0.5).abs() < 1e-12);
        assert!((v[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bet_everything_against_folders() {
        // opponents never bet and fold to any bet
        for p in Position::ALL {
            let [a, b] = others(p);
            let nit = |q| BehavioralStrategy::constant(q, 0.0).unwrap();
            let (sa, sb) = (nit(a), nit(b));
            let br = best_response(p, [&sa, &sb]).unwrap();
            assert!((br.value - 2.0).abs() < 1e-12, "{p}: {}", br.value);
            // the Ace wins the same +2 by checking down, and ties go passive
            for c in [Card::Jack, Card::Queen, Card::King] {
                assert_eq!(br.strategy.get(c, Situation::ALL[0]), 1.0);
            }
            assert_eq!(br.strategy.get(Card::Ace, Situation::ALL[0]), 0.0);
        }
    }

    #[test]
    fn best_response_is_pure_and_consistent() {
        let profile = ZooKind::UniformRandom.profile();
        for p in Position::ALL {
            let [a, b] = others(p);
            let br = best_response(p, [&profile[a.index()], &profile[b.index()]]).unwrap();
            assert!(br.strategy.is_pure());
            let assembled =
                assemble(&br.strategy, [&profile[a.index()], &profile[b.index()]]).unwrap();
            assert_eq!(profile_value(&assembled)[p.index()], br.value);
        }
    }

    #[test]
    fn unreachable_cells_are_passive() {
        // Betting first with every card leaves P1's later situations unreachable.
        let nit2 = BehavioralStrategy::constant(Position::Second, 0.0).unwrap();
        let nit3 = BehavioralStrategy::constant(Position::Third, 0.0).unwrap();
        let br = best_response(Position::First, [&nit2, &nit3]).unwrap();
        for c in Card::ALL {
            for s in &Situation::ALL[1..] {
                assert_eq!(br.strategy.get(c, *s), 0.0);
            }
        }
    }

    #[test]
    fn uniform_profile_is_exploitable() {
        let gains = exploitability(&ZooKind::UniformRandom.profile());
        assert!(gains.iter().any(|g| *g > 0.01), "{gains:?}");
    }

    #[test]
    fn best_response_seat_has_zero_gain() {
        let mut profile = ZooKind::UniformRandom.profile();
        let br = best_response(Position::Second, [&profile[0], &profile[2]]).unwrap();
        profile[1] = br.strategy;
        assert_eq!(exploitability(&profile)[1], 0.0);
    }

    #[test]
    fn rejects_bad_opponent_positions() {
        let s = BehavioralStrategy::constant(Position::Second, 0.5).unwrap();
        assert!(best_response(Position::Second, [&s, &s]).is_err());
    }
}
