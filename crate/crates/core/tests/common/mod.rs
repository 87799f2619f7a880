//! Reference implementations used as test oracles.
//!
//! Everything here works from the raw rules on action strings and card
//! ranks, and shares no evaluation code with the library.

#![allow(dead_code)]

/// Card ranks 0..4 (J, Q, K, A) by position.
pub type RawDeal = [usize; 3];

pub fn all_deals() -> Vec<RawDeal> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                if a != b && b != c && a != c {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Whose turn it is after `h`, or `None` at a terminal history.
pub fn to_act(h: &str) -> Option<usize> {
    let bytes = h.as_bytes();
    match bytes.iter().position(|&c| c == b'b') {
        None => (h.len() < 3).then_some(h.len()),
        Some(bettor) => {
            let responses = h.len() - bettor - 1;
            (responses < 2).then_some((bettor + 1 + responses) % 3)
        }
    }
}

/// Situation number (1..=4) of the player to act after `h`.
pub fn situation(h: &str) -> usize {
    match h {
        "" | "k" | "kk" => 1,
        "kkb" | "b" | "kb" => 2,
        "kbf" | "kkbf" | "bf" => 3,
        "kbc" | "kkbc" | "bc" => 4,
        _ => panic!("no decision after {h}"),
    }
}

/// Chips won by each position at a terminal history.
pub fn terminal_payoff(deal: &RawDeal, h: &str) -> [f64; 3] {
    let mut put = [1.0f64; 3];
    let mut folded = [false; 3];
    let bettor = h.find('b');
    for (i, c) in h.chars().enumerate() {
        let who = match bettor {
            Some(b) if i > b => (b + 1 + (i - b - 1)) % 3,
            _ => i,
        };
        match c {
            'b' | 'c' => put[who] += 1.0,
            'f' => folded[who] = true,
            _ => {}
        }
    }
    let winner = (0..3)
        .filter(|&p| !folded[p])
        .max_by_key(|&p| deal[p])
        .unwrap();
    let pot: f64 = put.iter().sum();
    let mut out = [0.0; 3];
    for p in 0..3 {
        out[p] = -put[p];
    }
    out[winner] += pot;
    out
}

/// Aggressive-action probabilities, `probs[pos][card * 4 + situation - 1]`.
pub type RawProfile = [[f64; 16]; 3];

fn aggressive_char(h: &str) -> char {
    if h.contains('b') {
        'c'
    } else {
        'b'
    }
}

fn passive_char(h: &str) -> char {
    if h.contains('b') {
        'f'
    } else {
        'k'
    }
}

fn walk(profile: &RawProfile, deal: &RawDeal, h: &mut String, reach: f64, acc: &mut [f64; 3]) {
    match to_act(h) {
        None => {
            let u = terminal_payoff(deal, h);
            for p in 0..3 {
                acc[p] += reach * u[p];
            }
        }
        Some(p) => {
            let q = profile[p][deal[p] * 4 + situation(h) - 1];
            for (c, w) in [(aggressive_char(h), q), (passive_char(h), 1.0 - q)] {
                if w == 0.0 {
                    continue;
                }
                h.push(c);
                walk(profile, deal, h, reach * w, acc);
                h.pop();
            }
        }
    }
}

/// Expected payoff per position, deals uniform.
pub fn value(profile: &RawProfile) -> [f64; 3] {
    let deals = all_deals();
    let mut acc = [0.0; 3];
    let mut h = String::new();
    for d in &deals {
        walk(profile, d, &mut h, 1.0, &mut acc);
    }
    acc.map(|v| v / deals.len() as f64)
}

/// Probability that the players produce exactly `history` on `deal`.
pub fn history_prob(profile: &RawProfile, deal: &RawDeal, history: &str) -> f64 {
    let mut prob = 1.0;
    for i in 0..history.len() {
        let h = &history[..i];
        let p = to_act(h).expect("history continues past a terminal");
        let q = profile[p][deal[p] * 4 + situation(h) - 1];
        let c = history.as_bytes()[i] as char;
        prob *= if c == aggressive_char(h) { q } else { 1.0 - q };
    }
    prob
}

/// Everything an observer learns from one hand.
#[derive(Clone, Debug)]
pub struct RawObservation {
    pub observer: usize,
    pub history: String,
    pub cards: [Option<usize>; 3],
}

pub fn raw_observe(deal: &RawDeal, history: &str, observer: usize) -> RawObservation {
    let mut folded = [false; 3];
    let bettor = history.find('b');
    for (i, c) in history.chars().enumerate() {
        if c == 'f' {
            let b = bettor.unwrap();
            folded[(b + 1 + (i - b - 1)) % 3] = true;
        }
    }
    let showdown = folded.iter().filter(|f| !**f).count() >= 2;
    let mut cards = [None; 3];
    for p in 0..3 {
        if p == observer || (showdown && !folded[p]) {
            cards[p] = Some(deal[p]);
        }
    }
    RawObservation {
        observer,
        history: history.to_string(),
        cards,
    }
}

/// Posterior over sample pairs after one observation, by brute force over
/// every deal. `pairs[i]` is the full profile for pair `i`; the observer's
/// own entries are arbitrary since they cancel.
pub fn bayes_update(prior: &[f64], pairs: &[RawProfile], obs: &RawObservation) -> Vec<f64> {
    let consistent: Vec<RawDeal> = all_deals()
        .into_iter()
        .filter(|d| (0..3).all(|p| obs.cards[p].is_none_or(|c| c == d[p])))
        .collect();
    let joint: Vec<f64> = prior
        .iter()
        .zip(pairs)
        .map(|(w, prof)| {
            w * consistent
                .iter()
                .map(|d| history_prob(prof, d, &obs.history))
                .sum::<f64>()
        })
        .collect();
    let z: f64 = joint.iter().sum();
    joint.iter().map(|j| j / z).collect()
}
