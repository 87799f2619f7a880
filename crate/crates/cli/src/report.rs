use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use kuhn_mbbr::harness::{MatchResult, SweepRow, TournamentResult};

fn fixed(x: f64) -> String {
    format!("{x:.4}")
}

fn stderr(x: Option<f64>) -> String {
    x.map(fixed).unwrap_or_else(|| "NA".to_string())
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn tournament_csv(result: &TournamentResult) -> Result<String> {
    csv_string(
        &[
            "agent",
            "grouping",
            "winrate_mchips",
            "stderr",
            "hands",
            "seed",
        ],
        result.rows.iter().map(|r| {
            vec![
                r.agent.clone(),
                r.table.clone(),
                fixed(r.winrate_mchips),
                stderr(r.stderr),
                r.hands.to_string(),
                r.seed.to_string(),
            ]
        }),
    )
}

pub fn write_tournament_csv(path: &Path, result: &TournamentResult) -> Result<()> {
    emit(Some(path), &tournament_csv(result)?)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    csv_string(
        &[
            "param",
            "value",
            "winrate_mchips",
            "stderr",
            "sets",
            "hands",
            "seed",
        ],
        rows.iter().map(|r| {
            vec![
                r.param.clone(),
                r.value.to_string(),
                fixed(r.winrate_mchips),
                stderr(r.stderr),
                r.sets.to_string(),
                r.hands.to_string(),
                r.seed.to_string(),
            ]
        }),
    )
}

pub fn write_hand_log(path: &Path, result: &MatchResult) -> Result<()> {
    let mut header = vec!["hand".to_string(), "deal".into(), "actions".into()];
    for a in &result.agents {
        header.push(format!("seat:{a}"));
    }
    for a in &result.agents {
        header.push(format!("chips:{a}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let text = csv_string(
        &header,
        result.log.iter().map(|h| {
            let mut row = vec![
                h.hand.to_string(),
                h.deal.to_string(),
                h.actions.to_string(),
            ];
            row.extend(h.seats.iter().map(|s| s.number().to_string()));
            row.extend(h.payoffs.iter().map(|p| p.to_string()));
            row
        }),
    )?;
    emit(Some(path), &text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    emit(Some(path), &(text + "\n"))
}

pub fn ranking_table(result: &TournamentResult) -> String {
    let width = result
        .ranking
        .iter()
        .map(|r| r.agent.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = format!(
        "{:>4}  {:<width$}  {:>14}  {:>10}  {:>4}\n",
        "rank", "agent", "mchips/hand", "stderr", "sets"
    );
    for r in &result.ranking {
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:>14}  {:>10}  {:>4}",
            r.rank,
            r.agent,
            fixed(r.winrate_mchips),
            stderr(r.stderr),
            r.sets
        );
    }
    out
}
