//! Usage statistics over completed token operations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::gesture::{CompletedOp, TokenKind};

/// Inter-operation gaps at least this long (seconds) count as breaks.
pub const DEFAULT_BREAK_GAP_S: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub count: usize,
    /// `round(100 * count / total_ops)`.
    pub percent: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageSummary {
    pub total_ops: usize,
    /// Every token kind, including unused ones.
    pub per_token: BTreeMap<TokenKind, TokenUsage>,
    /// First-to-last span minus break gaps.
    pub active_seconds: f64,
    /// Active seconds per operation, to 0.1 s. Absent below two operations.
    pub mean_interval_s: Option<f64>,
    pub breaks_excluded: usize,
}

/// Builds the summary for time-ordered completed operations.
pub fn summarize(ops: &[CompletedOp], break_gap_s: f64) -> UsageSummary {
    let total = ops.len();
    let mut counts: BTreeMap<TokenKind, usize> = TokenKind::ALL.iter().map(|&t| (t, 0)).collect();
    for op in ops {
        *counts.entry(op.token).or_default() += 1;
    }
    let per_token = counts
        .into_iter()
        .map(|(token, count)| {
            let percent = if total == 0 {
                0
            } else {
                (100.0 * count as f64 / total as f64).round() as u32
            };
            (token, TokenUsage { count, percent })
        })
        .collect();

    let mut active_ms: u64 = 0;
    let mut breaks = 0;
    for pair in ops.windows(2) {
        let gap = pair[1].ts_ms.saturating_sub(pair[0].ts_ms);
        if gap as f64 / 1000.0 >= break_gap_s {
            breaks += 1;
        } else {
            active_ms += gap;
        }
    }
    let active_seconds = active_ms as f64 / 1000.0;
    let mean_interval_s = (total >= 2).then(|| (active_seconds / total as f64 * 10.0).round() / 10.0);
    UsageSummary {
        total_ops: total,
        per_token,
        active_seconds,
        mean_interval_s,
        breaks_excluded: breaks,
    }
}

impl UsageSummary {
    /// Plain-text table, one token per line.
    pub fn to_table(&self) -> String {
        let mut out = String::from("token      count  percent\n");
        for (token, usage) in &self.per_token {
            out.push_str(&format!(
                "{:<10} {:>5}  {:>6}%\n",
                token.label(),
                usage.count,
                usage.percent
            ));
        }
        out.push_str(&format!("total      {:>5}\n", self.total_ops));
        out.push_str(&format!(
            "active time {:.1} s ({} break{} excluded)\n",
            self.active_seconds,
            self.breaks_excluded,
            if self.breaks_excluded == 1 { "" } else { "s" }
        ));
        match self.mean_interval_s {
            Some(mean) => out.push_str(&format!("one operation every {mean:.1} s\n")),
            None => out.push_str("one operation every -- s\n"),
        }
        out
    }
}
