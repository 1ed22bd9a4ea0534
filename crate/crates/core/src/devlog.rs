//! Token event logs and deterministic replay.
//!
//! A log is JSON-lines, one antenna report per line:
//!
//! ```text
//! {"ts_ms":0,"token":"Mover","phase":"placed","col":3,"row":4}
//! ```
//!
//! Replay feeds each record through the gesture interpreter. Antenna dead
//! spots are simulated by dropping each placement independently with a
//! fixed probability, drawn from a seeded generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{summarize, UsageSummary, DEFAULT_BREAK_GAP_S};
use crate::gesture::{consume, CompletedOp, Phase, TokenEvent, TokenKind};
use crate::model::{Board, CellCoord};
use crate::persist::{load_poster, PosterManifest};
use crate::playback::PlaybackCommand;
use crate::signal::Signal;

/// Wire form of a [`TokenEvent`]: one log line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRecord {
    pub ts_ms: u64,
    pub token: TokenKind,
    pub phase: Phase,
    pub col: i64,
    pub row: i64,
}

impl TryFrom<LogRecord> for TokenEvent {
    type Error = crate::model::GeometryError;

    fn try_from(rec: LogRecord) -> Result<Self, Self::Error> {
        Ok(TokenEvent {
            ts_ms: rec.ts_ms,
            token: rec.token,
            phase: rec.phase,
            cell: CellCoord::from_signed(rec.col, rec.row)?,
        })
    }
}

impl From<TokenEvent> for LogRecord {
    fn from(ev: TokenEvent) -> Self {
        LogRecord {
            ts_ms: ev.ts_ms,
            token: ev.token,
            phase: ev.phase,
            col: ev.cell.col().into(),
            row: ev.cell.row().into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {error}")]
    Syntax { line: usize, error: serde_json::Error },
    #[error("line {line}: timestamp {ts_ms} is earlier than the previous {previous}")]
    NonMonotonicTimestamp { line: usize, ts_ms: u64, previous: u64 },
    #[error("line {line}: cell ({col},{row}) is outside the 8x8 board")]
    InvalidCell { line: usize, col: i64, row: i64 },
}

/// Parses a JSON-lines log. Blank lines are skipped; line numbers in errors are 1-based.
pub fn parse_log(text: &str) -> Result<Vec<TokenEvent>, LogError> {
    let mut events = Vec::new();
    let mut previous = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: LogRecord = serde_json::from_str(raw).map_err(|error| LogError::Syntax { line, error })?;
        let event = TokenEvent::try_from(rec).map_err(|_| LogError::InvalidCell {
            line,
            col: rec.col,
            row: rec.row,
        })?;
        if event.ts_ms < previous {
            return Err(LogError::NonMonotonicTimestamp {
                line,
                ts_ms: event.ts_ms,
                previous,
            });
        }
        previous = event.ts_ms;
        events.push(event);
    }
    Ok(events)
}

pub fn write_log(events: &[TokenEvent]) -> String {
    let mut out = String::new();
    for ev in events {
        out.push_str(&serde_json::to_string(ev).expect("events always serialize"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayConfig {
    pub seed: u64,
    /// Probability in [0,1] that a placement is lost to a dead spot.
    pub dead_spot_prob: f64,
    pub break_gap_s: f64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        ReplayConfig {
            seed: 0,
            dead_spot_prob: 0.0,
            break_gap_s: DEFAULT_BREAK_GAP_S,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("dead-spot probability must lie in [0,1], got {0}")]
    BadProbability(f64),
    #[error("break gap must be positive, got {0}")]
    BadBreakGap(f64),
}

/// What one consumed placement produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    /// Zero-based position in the input event list.
    pub index: usize,
    pub ts_ms: u64,
    pub token: TokenKind,
    pub col: u8,
    pub row: u8,
    pub signals: Vec<Signal>,
    pub commands: Vec<PlaybackCommand>,
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub board: Board,
    pub transcript: Vec<TranscriptEntry>,
    pub completed: Vec<CompletedOp>,
    /// Placements lost to simulated dead spots.
    pub dropped: usize,
    pub summary: UsageSummary,
}

impl ReplayReport {
    pub fn transcript_jsonl(&self) -> String {
        let mut out = String::new();
        for entry in &self.transcript {
            out.push_str(&serde_json::to_string(entry).expect("transcript serializes"));
            out.push('\n');
        }
        out
    }
}

/// Plays a parsed log onto a freshly loaded poster.
pub fn replay(
    manifest: &PosterManifest,
    events: &[TokenEvent],
    config: &ReplayConfig,
) -> Result<ReplayReport, ReplayError> {
    if !(0.0..=1.0).contains(&config.dead_spot_prob) {
        return Err(ReplayError::BadProbability(config.dead_spot_prob));
    }
    if config.break_gap_s.is_nan() || config.break_gap_s <= 0.0 {
        return Err(ReplayError::BadBreakGap(config.break_gap_s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut board = load_poster(manifest).board;
    let mut transcript = Vec::new();
    let mut completed = Vec::new();
    let mut dropped = 0;
    for (index, event) in events.iter().enumerate() {
        if event.phase == Phase::Placed {
            // One draw per placement regardless of p, so runs at different
            // probabilities share the same random stream.
            let roll: f64 = rng.random();
            if roll < config.dead_spot_prob {
                dropped += 1;
                continue;
            }
        }
        let outcome = consume(&mut board, event);
        if event.phase == Phase::Placed {
            transcript.push(TranscriptEntry {
                index,
                ts_ms: event.ts_ms,
                token: event.token,
                col: event.cell.col(),
                row: event.cell.row(),
                signals: outcome.signals,
                commands: outcome.commands,
            });
        }
        completed.extend(outcome.completed);
    }
    let summary = summarize(&completed, config.break_gap_s);
    Ok(ReplayReport {
        board,
        transcript,
        completed,
        dropped,
        summary,
    })
}
