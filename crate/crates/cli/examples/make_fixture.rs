//! Regenerates `fixtures/macbeth/{poster.json,session.jsonl}`.
//!
//! The session is a scripted class period: a fixed number of completed
//! operations per token, with completion times laid out on a schedule that
//! has two long breaks. Every action is chosen against a live board and
//! checked with the real gesture interpreter, so the log replays exactly.
//!
//!     cargo run -p storygrid-cli --example make_fixture [-- <out dir>]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use storygrid_core::gesture::{choose_resize, ResizeChoice};
use storygrid_core::model::UndoKind;
use storygrid_core::persist::{LayoutEntry, LayoutSnapshot};
use storygrid_core::prelude::*;

const OPS: [(TokenKind, u32); 8] = [
    (TokenKind::Eraser, 19),
    (TokenKind::Mover, 100),
    (TokenKind::Player1, 38),
    (TokenKind::Player2, 38),
    (TokenKind::Resizer, 60),
    (TokenKind::Stopper, 19),
    (TokenKind::Undoer, 6),
    (TokenKind::Zoomer, 34),
];
const ACTIVE_MS: u64 = 3_720_000;
const BREAK_MS: u64 = 600_000;
const BREAK_AFTER: [usize; 2] = [97, 211];
const MIN_GAP_MS: u64 = 4_000;

// (id, channels, w, h); channels: 0 image only, 1 = one clip, 2 = video + audio.
const OBJECTS: [(&str, u8, u8, u8); 23] = [
    ("witches", 2, 2, 2),
    ("heath", 1, 2, 1),
    ("banquo", 1, 1, 2),
    ("macbeth", 2, 2, 2),
    ("lady_macbeth", 2, 2, 2),
    ("letter", 1, 1, 1),
    ("dagger", 1, 1, 1),
    ("duncan", 1, 1, 2),
    ("inverness", 0, 2, 1),
    ("porter", 1, 1, 1),
    ("knocking", 1, 1, 1),
    ("murder", 1, 2, 1),
    ("fleance", 0, 1, 1),
    ("banquet", 2, 2, 2),
    ("ghost", 2, 1, 1),
    ("apparitions", 2, 1, 2),
    ("birnam_wood", 1, 2, 1),
    ("macduff", 1, 1, 1),
    ("lady_macduff", 0, 1, 1),
    ("sleepwalking", 2, 1, 1),
    ("dunsinane", 2, 1, 1),
    ("malcolm", 0, 1, 1),
    ("crown", 0, 1, 1),
];

fn manifest() -> PosterManifest {
    let mut objects = Vec::new();
    let mut occupied = [[false; 8]; 8];
    let mut entries = Vec::new();
    for &(id, channels, w, h) in &OBJECTS {
        let av_channels = match channels {
            0 => vec![],
            1 if id.len() % 2 == 0 => vec![AvComponent {
                kind: AvKind::Audio,
                media_ref: format!("audio/{id}.mp3"),
            }],
            1 => vec![AvComponent {
                kind: AvKind::Video,
                media_ref: format!("video/{id}.mp4"),
            }],
            _ => vec![
                AvComponent {
                    kind: AvKind::Video,
                    media_ref: format!("video/{id}.mp4"),
                },
                AvComponent {
                    kind: AvKind::Audio,
                    media_ref: format!("audio/{id}.mp3"),
                },
            ],
        };
        objects.push(ObjectSpec {
            id: id.into(),
            image_ref: format!("img/{id}.png"),
            av_channels,
        });
        // First fit, row-major.
        let (c, r) = (0..=8 - h)
            .flat_map(|r| (0..=8 - w).map(move |c| (c, r)))
            .find(|&(c, r)| (r..r + h).all(|y| (c..c + w).all(|x| !occupied[y as usize][x as usize])))
            .expect("layout fits");
        for y in r..r + h {
            for x in c..c + w {
                occupied[y as usize][x as usize] = true;
            }
        }
        entries.push(LayoutEntry {
            object_id: id.into(),
            rect: Rect::new(c, r, w, h).unwrap(),
            zoomed: None,
        });
    }
    PosterManifest {
        poster_id: "macbeth".into(),
        title: "Macbeth: the Scottish play in scenes".into(),
        objects,
        initial_layout: Some(LayoutSnapshot {
            name: "opening".into(),
            entries,
        }),
    }
}

/// Completion time of every operation.
fn schedule(rng: &mut ChaCha8Rng) -> Vec<u64> {
    let total: u32 = OPS.iter().map(|(_, n)| n).sum();
    let short = total as usize - 1 - BREAK_AFTER.len();
    let raw: Vec<f64> = (0..short)
        .map(|_| {
            if rng.random_bool(0.04) {
                rng.random_range(60.0..150.0)
            } else {
                rng.random::<f64>().powi(2) * 40.0
            }
        })
        .collect();
    let slack = ACTIVE_MS - MIN_GAP_MS * short as u64;
    let sum: f64 = raw.iter().sum();
    let mut gaps: Vec<u64> = raw
        .iter()
        .map(|r| MIN_GAP_MS + (r / sum * slack as f64) as u64)
        .collect();
    let short_gap_total: u64 = gaps.iter().sum();
    for g in gaps.iter_mut().take((ACTIVE_MS - short_gap_total) as usize) {
        *g += 1;
    }
    assert_eq!(gaps.iter().sum::<u64>(), ACTIVE_MS);
    assert!(gaps.iter().all(|&g| g < 300_000));
    for &at in &BREAK_AFTER {
        gaps.insert(at, BREAK_MS);
    }
    let mut t = 0;
    let mut times = vec![0];
    for g in gaps {
        t += g;
        times.push(t);
    }
    times
}

/// Placements making up one operation. The last one completes it.
struct Action {
    token: TokenKind,
    cells: Vec<CellCoord>,
}

struct Gen {
    rng: ChaCha8Rng,
    board: Board,
    events: Vec<TokenEvent>,
    remaining: BTreeMap<TokenKind, u32>,
    zoomed: Option<(ObjectId, u32)>,
    last_op: Option<TokenKind>,
}

impl Gen {
    fn visible_cells(&self, id: &ObjectId) -> Vec<CellCoord> {
        CellCoord::all()
            .filter(|&c| self.board.topmost_at(c) == Some(id))
            .collect()
    }

    fn visible_objects(&self) -> Vec<ObjectId> {
        self.board
            .z_order()
            .iter()
            .filter(|id| !self.visible_cells(id).is_empty())
            .cloned()
            .collect()
    }

    fn empty_cells(&self) -> Vec<CellCoord> {
        CellCoord::all()
            .filter(|&c| self.board.topmost_at(c).is_none())
            .collect()
    }

    fn any_cell(&mut self) -> CellCoord {
        *CellCoord::all().collect::<Vec<_>>().choose(&mut self.rng).unwrap()
    }

    fn pick_cell(&mut self, id: &ObjectId) -> CellCoord {
        *self.visible_cells(id).choose(&mut self.rng).unwrap()
    }

    fn plan(&mut self, token: TokenKind) -> Option<Action> {
        let cells = match token {
            TokenKind::Eraser => {
                let doubles = self
                    .board
                    .objects_back_to_front()
                    .filter(|o| o.av_channels.len() == 2)
                    .count();
                if self.board.len() <= 4 {
                    return None;
                }
                let ids: Vec<_> = self
                    .visible_objects()
                    .into_iter()
                    .filter(|id| doubles > 3 || self.board.object(id).unwrap().av_channels.len() < 2)
                    .collect();
                let id = ids.choose(&mut self.rng)?.clone();
                vec![self.pick_cell(&id)]
            }
            TokenKind::Mover => {
                let id = self.visible_objects().choose(&mut self.rng)?.clone();
                let grab = self.pick_cell(&id);
                let rect = self.board.object(&id).unwrap().rect;
                let (ac, ar) = (grab.col() - rect.origin().col(), grab.row() - rect.origin().row());
                let targets: Vec<CellCoord> = CellCoord::all()
                    .filter(|c| {
                        let (oc, or) = (i64::from(c.col()) - i64::from(ac), i64::from(c.row()) - i64::from(ar));
                        rect.with_origin(oc, or).is_ok()
                            && (oc, or) != (rect.origin().col().into(), rect.origin().row().into())
                    })
                    .collect();
                let dest = *targets.choose(&mut self.rng)?;
                let mut cells = vec![grab];
                // Now and then the first try would push the object off the edge.
                if self.rng.random_bool(0.05) {
                    let bad: Vec<CellCoord> = CellCoord::all()
                        .filter(|c| {
                            rect.with_origin(i64::from(c.col()) - i64::from(ac), i64::from(c.row()) - i64::from(ar))
                                .is_err()
                        })
                        .collect();
                    if let Some(&b) = bad.choose(&mut self.rng) {
                        cells.push(b);
                    }
                }
                cells.push(dest);
                cells
            }
            TokenKind::Resizer => {
                let id = self.visible_objects().choose(&mut self.rng)?.clone();
                let rect = self.board.object(&id).unwrap().rect;
                let border: Vec<CellCoord> = self
                    .visible_cells(&id)
                    .into_iter()
                    .filter(|&c| !rect.edges_at(c).is_empty())
                    .collect();
                let first = *border.choose(&mut self.rng)?;
                let edges = rect.edges_at(first);
                let area = u32::from(rect.width()) * u32::from(rect.height());
                let seconds: Vec<CellCoord> = CellCoord::all()
                    .filter(|&c| match choose_resize(rect, &edges, c) {
                        ResizeChoice::Apply { edge, line } => {
                            let r = rect.with_edge_at(edge, line).unwrap();
                            let a = u32::from(r.width()) * u32::from(r.height());
                            if area > 4 {
                                a < area
                            } else {
                                a <= 6
                            }
                        }
                        _ => false,
                    })
                    .collect();
                vec![first, *seconds.choose(&mut self.rng)?]
            }
            TokenKind::Player1 | TokenKind::Player2 => {
                let channel = if token == TokenKind::Player1 {
                    Channel::One
                } else {
                    Channel::Two
                };
                let ok = |o: &MediaObject| o.channel(channel).is_some() && o.playing != Some(channel);
                let id = match &self.zoomed {
                    Some((z, _)) => Some(z.clone()).filter(|z| ok(self.board.object(z).unwrap())),
                    None => {
                        let ids: Vec<_> = self
                            .visible_objects()
                            .into_iter()
                            .filter(|id| ok(self.board.object(id).unwrap()))
                            .collect();
                        ids.choose(&mut self.rng).cloned()
                    }
                }?;
                vec![self.pick_cell(&id)]
            }
            TokenKind::Stopper => {
                let playing: Vec<ObjectId> = self
                    .visible_objects()
                    .into_iter()
                    .filter(|id| self.board.object(id).unwrap().playing.is_some())
                    .collect();
                match &self.zoomed {
                    Some((z, _)) => vec![self.pick_cell(&playing.contains(z).then(|| z.clone())?)],
                    None => {
                        let empty = self.empty_cells();
                        if !empty.is_empty()
                            && self.rng.random_bool(0.2)
                            && self.board.objects_back_to_front().any(|o| o.playing.is_some())
                        {
                            vec![*empty.choose(&mut self.rng).unwrap()]
                        } else {
                            let id = playing.choose(&mut self.rng)?.clone();
                            vec![self.pick_cell(&id)]
                        }
                    }
                }
            }
            TokenKind::Undoer => {
                // Undo right after the mistake it corrects.
                let last = self.board.undo_stack().last()?;
                if !matches!(last.kind, UndoKind::Erase | UndoKind::Move)
                    || !matches!(self.last_op, Some(TokenKind::Eraser | TokenKind::Mover))
                {
                    return None;
                }
                vec![self.any_cell()]
            }
            TokenKind::Zoomer => match &self.zoomed {
                Some(_) => vec![self.any_cell()],
                None => {
                    let with_media: Vec<_> = self
                        .visible_objects()
                        .into_iter()
                        .filter(|id| !self.board.object(id).unwrap().av_channels.is_empty())
                        .collect();
                    let id = with_media.choose(&mut self.rng)?.clone();
                    vec![self.pick_cell(&id)]
                }
            },
        };
        // Dry run: the plan must complete exactly on its last placement.
        let mut probe = self.board.clone();
        for (i, &cell) in cells.iter().enumerate() {
            let out = consume(&mut probe, &TokenEvent::placed(0, token, cell));
            if out.completed.is_some() != (i + 1 == cells.len()) {
                return None;
            }
        }
        Some(Action { token, cells })
    }

    fn push(&mut self, ev: TokenEvent) -> Outcome {
        if let Some(last) = self.events.last() {
            assert!(last.ts_ms <= ev.ts_ms, "events out of order");
        }
        self.events.push(ev);
        consume(&mut self.board, &ev)
    }

    fn tap(&mut self, ts: u64, token: TokenKind, cell: CellCoord) -> Outcome {
        let out = self.push(TokenEvent::placed(ts, token, cell));
        let lift = ts + self.rng.random_range(300..900);
        self.push(TokenEvent::lifted(lift, token, cell));
        out
    }

    /// A placement that only produces a signal.
    fn misfire(&mut self, ts: u64) {
        let empty = self.empty_cells();
        let token = *[TokenKind::Eraser, TokenKind::Zoomer, TokenKind::Mover]
            .choose(&mut self.rng)
            .unwrap();
        if let Some(&cell) = empty.choose(&mut self.rng) {
            let out = self.tap(ts, token, cell);
            assert!(out.completed.is_none() && !out.signals.is_empty());
        }
    }

    fn choose_token(&mut self, op_index: usize, ops_left: usize) -> Option<Action> {
        if let Some((z, inner)) = self.zoomed.clone() {
            if inner > 0 && ops_left > 1 {
                for token in [TokenKind::Player1, TokenKind::Player2, TokenKind::Stopper] {
                    if self.remaining[&token] > 0 && self.rng.random_bool(0.6) {
                        if let Some(a) = self.plan(token) {
                            self.zoomed = Some((z, inner - 1));
                            return Some(a);
                        }
                    }
                }
            }
            return self.plan(TokenKind::Zoomer);
        }
        let mut pool: Vec<(TokenKind, u32)> = self
            .remaining
            .iter()
            .filter(|&(&t, &n)| {
                n > 0
                    && !(t == TokenKind::Zoomer && ops_left < 2)
                    && !(op_index == 0 && matches!(t, TokenKind::Mover | TokenKind::Resizer))
            })
            .map(|(&t, &n)| (t, n))
            .collect();
        while !pool.is_empty() {
            let total: u32 = pool.iter().map(|(_, n)| n).sum();
            let mut roll = self.rng.random_range(0..total);
            let i = pool
                .iter()
                .position(|&(_, n)| {
                    if roll < n {
                        true
                    } else {
                        roll -= n;
                        false
                    }
                })
                .unwrap();
            let (token, _) = pool.swap_remove(i);
            if let Some(a) = self.plan(token) {
                return Some(a);
            }
        }
        None
    }
}

fn generate(seed: u64) -> Option<(PosterManifest, Vec<TokenEvent>)> {
    let manifest = manifest();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times = schedule(&mut rng);
    let mut g = Gen {
        rng,
        board: load_poster(&manifest).board,
        events: Vec::new(),
        remaining: OPS.into_iter().collect(),
        zoomed: None,
        last_op: None,
    };
    for (i, &t) in times.iter().enumerate() {
        let action = g.choose_token(i, times.len() - i)?;
        let free_from = g.events.last().map_or(0, |e| e.ts_ms + 200);
        let steps = action.cells.len() as u64;
        // Earlier placements of a two-step gesture, spaced before `t`.
        let lead = if steps > 1 {
            (t - free_from).min(2_500 * steps)
        } else {
            0
        };
        if i > 0 && t - free_from > lead + 6_000 && g.zoomed.is_none() && g.rng.random_bool(0.04) {
            g.misfire(free_from + 1_500);
        }
        for (k, &cell) in action.cells.iter().enumerate() {
            let ts = t - lead + lead * k as u64 / (steps - 1).max(1);
            let ts = if k + 1 == action.cells.len() { t } else { ts };
            let out = g.tap(ts, action.token, cell);
            if k + 1 == action.cells.len() {
                assert_eq!(
                    out.completed.as_ref().map(|c| (c.token, c.ts_ms)),
                    Some((action.token, t))
                );
            }
        }
        *g.remaining.get_mut(&action.token).unwrap() -= 1;
        g.last_op = Some(action.token);
        if action.token == TokenKind::Zoomer {
            g.zoomed = match g.zoomed.take() {
                Some(_) => None,
                None => {
                    let id = g
                        .board
                        .objects_back_to_front()
                        .find(|o| o.is_zoomed())
                        .unwrap()
                        .id
                        .clone();
                    let inner = *[0, 1, 1, 2].choose(&mut g.rng).unwrap();
                    Some((id, inner))
                }
            };
        }
    }
    g.zoomed.is_none().then_some((manifest, g.events))
}

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map_or_else(|| "fixtures/macbeth".into(), PathBuf::from);
    let (seed, (manifest, events)) = (0u64..1_000)
        .find_map(|s| generate(s).map(|r| (s, r)))
        .expect("some seed yields a complete session");

    let report = replay(&manifest, &events, &ReplayConfig::default()).unwrap();
    assert_eq!(report.summary.total_ops, 314);
    for (token, n) in OPS {
        assert_eq!(report.summary.per_token[&token].count, n as usize, "{token}");
    }

    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join("poster.json"), manifest_to_json(&manifest)).unwrap();
    std::fs::write(out.join("session.jsonl"), write_log(&events)).unwrap();
    println!("seed {seed}: {} events written to {}", events.len(), out.display());
    print!("{}", report.summary.to_table());
}
