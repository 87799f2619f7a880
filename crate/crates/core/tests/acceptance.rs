//! Exit criteria for the whole crate. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::RawProfile;
use kuhn_mbbr::agent::MbbrConfig;
use kuhn_mbbr::bayes::{
    create_samples, update_posterior, Configuration, ModelKey, PosteriorTable, PriorMode, PriorSpec,
};
use kuhn_mbbr::best_response::{best_response, exploitability, others};
use kuhn_mbbr::game::{
    observe, payoff, situation_of, terminal_sequences, ActionSeq, Card, Deal, InfoSetKey, Position,
};
use kuhn_mbbr::harness::{
    run_duplicate_set, run_sweep, run_tournament, winrate_stats, zoo_pairs, AgentSpec, SweepParam,
    SweepSpec, TournamentSpec,
};
use kuhn_mbbr::strategy::{
    nash_profile, sample_action, BehavioralStrategy, Label, NashPoint, Profile, ZooKind,
};

const HANDS: usize = 3000;
const SETS: usize = 10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_strategy(position: Position, rng: &mut ChaCha8Rng) -> BehavioralStrategy {
    BehavioralStrategy::from_fn(position, |_, _| rng.random::<f64>()).unwrap()
}

fn pooled(a: Option<f64>, b: Option<f64>) -> f64 {
    (a.unwrap_or(0.0).powi(2) + b.unwrap_or(0.0).powi(2)).sqrt()
}

fn nash_verification() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for point in NashPoint::ALL {
        let gains = exploitability(&nash_profile(point));
        worst = gains.iter().fold(worst, |m, &g| m.max(g));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(1),
        format!("max exploitability {worst:.3e} over N1/N2/N3 in {elapsed:.2?}"),
    )
}

fn worked_example_payoff() -> Outcome {
    let deal = Deal::parse("QKA").unwrap();
    let example = payoff(&deal, &ActionSeq::parse("kkbfc").unwrap())
        .unwrap()
        .0;
    let lines = terminal_sequences();
    let mut cells = 0;
    let mut zero_sum = true;
    let mut matches_oracle = true;
    for d in Deal::all() {
        let rd = d.cards().map(|c| c.index());
        for seq in &lines {
            let u = payoff(d, seq).unwrap().0;
            zero_sum &= u.iter().sum::<i32>() == 0;
            let o = common::terminal_payoff(&rd, &seq.to_string());
            matches_oracle &= (0..3).all(|p| o[p] == u[p] as f64);
            cells += 1;
        }
    }
    outcome(
        example == [-1, -2, 3] && zero_sum && matches_oracle && lines.len() == 13 && cells == 312,
        format!(
            "QKA kkbfc -> {example:?}; {cells} cells zero-sum: {zero_sum}; agree with rule oracle: {matches_oracle}"
        ),
    )
}

fn posterior_oracle() -> Outcome {
    let start = Instant::now();
    let k = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opponents = [Label(1), Label(2)];
    let mut means = std::collections::BTreeMap::new();
    let mid = nash_profile(NashPoint::Midpoint);
    for label in opponents {
        for p in Position::ALL {
            means.insert(ModelKey { label, position: p }, mid[p.index()].clone());
        }
    }
    let spec = PriorSpec {
        epsilon: 0.05,
        eta: 4.0,
        k,
        means,
        mode: PriorMode::Informed,
    };
    let bank = create_samples(&spec, &mut rng).unwrap();
    let configs = Position::ALL.map(|seat| {
        let a = seat.next_in_turn();
        Configuration::new(
            seat,
            ModelKey {
                label: opponents[0],
                position: a,
            },
            ModelKey {
                label: opponents[1],
                position: a.next_in_turn(),
            },
        )
        .unwrap()
    });
    let mut table = PosteriorTable::uniform(k, &configs).unwrap();
    let mut oracle: Vec<Vec<f64>> = vec![vec![1.0 / (k * k) as f64; k * k]; 3];
    let mut worst = 0.0f64;
    let mut spread = 0.0f64;
    for _ in 0..1000 {
        let seat = Position::ALL[rng.random_range(0..3)];
        let config = configs[seat.index()];
        let rows = bank.samples(&config.row).unwrap();
        let cols = bank.samples(&config.col).unwrap();
        // Play the hand with a random own strategy and a random sample pair.
        let mut play: Profile = Position::ALL.map(|p| random_strategy(p, &mut rng));
        play[config.row.position.index()] = rows[rng.random_range(0..k)].clone();
        play[config.col.position.index()] = cols[rng.random_range(0..k)].clone();
        let deal = Deal::all()[rng.random_range(0..24)];
        let mut seq = ActionSeq::new();
        while let Some(pos) = seq.to_act() {
            let sit = situation_of(pos, &seq).unwrap();
            let key = InfoSetKey::new(pos, deal.card(pos), sit);
            let p = play[pos.index()].prob(&key).unwrap();
            seq = seq.with(sample_action(p, sit, &mut rng)).unwrap();
        }
        table =
            update_posterior(&table, &config, &observe(&deal, &seq, seat).unwrap(), &bank).unwrap();

        let raw_obs = common::raw_observe(
            &deal.cards().map(|c| c.index()),
            &seq.to_string(),
            seat.index(),
        );
        let pairs: Vec<RawProfile> = (0..k * k)
            .map(|i| {
                let mut prof = [[0.5; 16]; 3];
                prof[config.row.position.index()] = *rows[i / k].probs();
                prof[config.col.position.index()] = *cols[i % k].probs();
                prof
            })
            .collect();
        let o = &mut oracle[seat.index()];
        *o = common::bayes_update(o, &pairs, &raw_obs);
        let got = table.weights(&config).unwrap();
        for (a, b) in got.iter().zip(o.iter()) {
            worst = worst.max((a - b).abs());
            spread = spread.max((a - 1.0 / (k * k) as f64).abs());
        }
    }
    outcome(
        worst <= 1e-12 && spread > 0.1,
        format!(
            "1000 hands, k = 3: max |posterior - brute force| = {worst:.3e} (max shift from uniform {spread:.3}) in {:.2?}",
            start.elapsed()
        ),
    )
}

fn best_response_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut restricted_worst = 0.0f64;
    let mut exhaustive_worst = 0.0f64;
    let mut dominated = 0usize;
    let mut min_margin = f64::INFINITY;
    for instance in 0..30 {
        let seat = Position::ALL[instance % 3];
        let [a, b] = others(seat);
        let opp = [random_strategy(a, &mut rng), random_strategy(b, &mut rng)];
        let br = best_response(seat, [&opp[0], &opp[1]]).unwrap();
        let mut base: RawProfile = [[0.0; 16]; 3];
        base[a.index()] = *opp[0].probs();
        base[b.index()] = *opp[1].probs();

        // Free choices on two cards, the rest fixed to a random strategy.
        let fixed = random_strategy(seat, &mut rng);
        let c1 = rng.random_range(0..4);
        let c2 = (c1 + 1 + rng.random_range(0..3)) % 4;
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..256 {
            let mut prof = base;
            prof[seat.index()] = *fixed.probs();
            for (j, c) in [c1, c2].into_iter().enumerate() {
                for s in 0..4 {
                    prof[seat.index()][c * 4 + s] = ((mask >> (j * 4 + s)) & 1) as f64;
                }
            }
            best = best.max(common::value(&prof)[seat.index()]);
        }
        let mut combined = base;
        combined[seat.index()] = *fixed.probs();
        for c in [c1, c2] {
            for s in 0..4 {
                combined[seat.index()][c * 4 + s] = br.strategy.probs()[c * 4 + s];
            }
        }
        let per_card = common::value(&combined)[seat.index()];
        restricted_worst = restricted_worst.max((best - per_card).abs());

        if instance < 3 {
            let mut best = f64::NEG_INFINITY;
            for mask in 0u32..(1 << 16) {
                let mut prof = base;
                for i in 0..16 {
                    prof[seat.index()][i] = ((mask >> i) & 1) as f64;
                }
                best = best.max(common::value(&prof)[seat.index()]);
            }
            exhaustive_worst = exhaustive_worst.max((best - br.value).abs());
        }

        for _ in 0..1000 / 30 + 1 {
            let mut prof = base;
            prof[seat.index()] = *random_strategy(seat, &mut rng).probs();
            let v = common::value(&prof)[seat.index()];
            min_margin = min_margin.min(br.value - v);
            if v > br.value + 1e-12 {
                dominated += 1;
            }
        }
    }
    outcome(
        restricted_worst <= 1e-12 && exhaustive_worst <= 1e-12 && dominated == 0,
        format!(
            "two-card exhaustive diff {restricted_worst:.3e}; full 2^16 diff {exhaustive_worst:.3e}; \
             random strategies beating the response: {dominated} (min margin {min_margin:.3e})"
        ),
    )
}

fn dirichlet_machinery() -> Outcome {
    let n = 10_000;
    let mut worst = 0.0f64;
    let mut all_positive = true;
    for (eta, seed) in [(1.0, 51), (4.0, 54)] {
        let means: std::collections::BTreeMap<_, _> = Position::ALL
            .into_iter()
            .map(|p| {
                (
                    ModelKey {
                        label: Label(1),
                        position: p,
                    },
                    nash_profile(NashPoint::Midpoint)[p.index()].clone(),
                )
            })
            .collect();
        let spec = PriorSpec {
            epsilon: 0.05,
            eta,
            k: n,
            means: means.clone(),
            mode: PriorMode::Informed,
        };
        let bank = create_samples(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for (key, mean) in &means {
            let rounded = kuhn_mbbr::bayes::round_and_normalize(mean, 0.05);
            let samples = bank.samples(key).unwrap();
            for i in 0..16 {
                let avg = samples.iter().map(|s| s.probs()[i]).sum::<f64>() / n as f64;
                worst = worst.max((avg - rounded.probs()[i]).abs());
                all_positive &= samples
                    .iter()
                    .all(|s| s.probs()[i] > 0.0 && s.probs()[i] < 1.0);
            }
        }
    }
    outcome(
        worst <= 0.01 && all_positive,
        format!("eta in {{1, 4}}, 10^4 samples: max |mean - p| = {worst:.4}; both actions positive: {all_positive}"),
    )
}

fn exploitation() -> Outcome {
    let start = Instant::now();
    let cs = ZooKind::CallingStation.profile();
    let br_value = Position::ALL
        .iter()
        .map(|&p| {
            let [a, b] = others(p);
            best_response(p, [&cs[a.index()], &cs[b.index()]])
                .unwrap()
                .value
        })
        .sum::<f64>()
        / 3.0
        * 1000.0;
    let station = AgentSpec::Zoo(ZooKind::CallingStation);
    let t = run_tournament(&TournamentSpec {
        groupings: vec![
            [
                AgentSpec::mbbr(MbbrConfig::default()),
                station.clone(),
                station.clone(),
            ],
            [AgentSpec::Nash(NashPoint::Lower), station.clone(), station],
        ],
        sets: SETS,
        hands: HANDS,
        seed: 1,
        rotate_seats: true,
    })
    .unwrap();
    let m = winrate_stats(&t.slot_winrates(0, 0));
    let n = winrate_stats(&t.slot_winrates(1, 0));
    let se = pooled(m.stderr, n.stderr);
    let gap = m.mean - n.mean;
    let target = n.mean + 0.5 * (br_value - n.mean);
    let elapsed = start.elapsed();
    let beats = gap > 3.0 * se;
    let reaches = m.mean >= target;
    outcome(
        beats && reaches && elapsed < Duration::from_secs(120),
        format!(
            "MBBR {:.4} vs N1 {:.4} mchips (gap {gap:.2} = {:.2} pooled SE, need > 3); \
             best response {br_value:.4}, half-gap target {target:.4} (reached: {reaches}); {elapsed:.2?}",
            m.mean,
            n.mean,
            gap / se
        ),
    )
}

fn zoo_sweep(
    param: SweepParam,
    values: &[f64],
    base: MbbrConfig,
) -> Vec<kuhn_mbbr::harness::SweepRow> {
    run_sweep(&SweepSpec {
        param,
        values: values.to_vec(),
        base,
        opponents: zoo_pairs(),
        sets: SETS,
        hands: HANDS,
        seed: 7,
        rotate_seats: true,
    })
    .unwrap()
}

fn ablations() -> Outcome {
    let start = Instant::now();
    let by_k = zoo_sweep(
        SweepParam::K,
        &[1.0, 5.0, 10.0, 20.0],
        MbbrConfig::default(),
    );
    let informed = &by_k[2];
    let uniform = &zoo_sweep(
        SweepParam::K,
        &[10.0],
        MbbrConfig {
            prior_mode: PriorMode::Uniform2,
            ..MbbrConfig::default()
        },
    )[0];
    let a = uniform.winrate_mchips < informed.winrate_mchips;

    let mut b = true;
    for w in by_k.windows(2) {
        b &= w[1].winrate_mchips >= w[0].winrate_mchips - 2.0 * pooled(w[0].stderr, w[1].stderr);
    }

    let never = &zoo_sweep(
        SweepParam::SwitchHand,
        &[HANDS as f64],
        MbbrConfig::default(),
    )[0];
    let nash = run_tournament(&TournamentSpec {
        groupings: zoo_pairs()
            .into_iter()
            .map(|[x, y]| [AgentSpec::Nash(NashPoint::Lower), x, y])
            .collect(),
        sets: SETS,
        hands: HANDS,
        seed: 7,
        rotate_seats: true,
    })
    .unwrap();
    let nash_stats = winrate_stats(&nash.sets.iter().map(|s| s.winrates[0]).collect::<Vec<_>>());
    let c = (never.winrate_mchips - nash_stats.mean).abs()
        <= 2.0 * pooled(never.stderr, nash_stats.stderr);

    let ks: Vec<String> = by_k
        .iter()
        .map(|r| format!("k={} {:.4}", r.value, r.winrate_mchips))
        .collect();
    outcome(
        a && b && c,
        format!(
            "(a) uniform2 {:.4} < informed {:.4}: {a}; (b) {} non-decreasing within 2 SE: {b}; \
             (c) H=3000 {:.4} vs N1 {:.4}: {c}; {:.2?}",
            uniform.winrate_mchips,
            informed.winrate_mchips,
            ks.join(", "),
            never.winrate_mchips,
            nash_stats.mean,
            start.elapsed()
        ),
    )
}

fn determinism_and_protocol() -> Outcome {
    let agents = [
        AgentSpec::mbbr(MbbrConfig::default()),
        AgentSpec::Nash(NashPoint::Lower),
        AgentSpec::Zoo(ZooKind::CallingStation),
    ];
    let first = run_duplicate_set(&agents, 600, 8, true).unwrap();
    let identical = first == run_duplicate_set(&agents, 600, 8, true).unwrap();
    let deals: Vec<Vec<Deal>> = first
        .matches
        .iter()
        .map(|m| m.log.iter().map(|h| h.deal).collect())
        .collect();
    let shared = first.matches.len() == 6 && deals.iter().all(|d| *d == deals[0]);
    let mut coverage = true;
    for m in &first.matches {
        for w in m.log.windows(3) {
            for slot in 0..3 {
                let mut seen = [false; 3];
                for h in w {
                    seen[h.seats[slot].index()] = true;
                }
                coverage &= seen.iter().all(|s| *s);
            }
        }
    }
    let start = Instant::now();
    run_tournament(&TournamentSpec {
        groupings: vec![agents],
        sets: SETS,
        hands: HANDS,
        seed: 8,
        rotate_seats: true,
    })
    .unwrap();
    let elapsed = start.elapsed();
    outcome(
        identical && shared && coverage && elapsed < Duration::from_secs(300),
        format!(
            "bit-identical rerun: {identical}; shared deal schedule: {shared}; \
             each seat once per 3 hands: {coverage}; 10 x 6 x 3000 tournament in {elapsed:.2?}"
        ),
    )
}

fn main() -> ExitCode {
    // Cards in the oracle are rank indices.
    assert_eq!(Card::Ace.index(), 3);
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 nash verification", nash_verification),
        ("2 worked-example payoff", worked_example_payoff),
        ("3 posterior oracle equivalence", posterior_oracle),
        ("4 best-response oracle", best_response_oracle),
        ("5 dirichlet machinery", dirichlet_machinery),
        ("6 exploitation vs calling stations", exploitation),
        ("7 ablation directions", ablations),
        ("8 determinism and protocol", determinism_and_protocol),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
