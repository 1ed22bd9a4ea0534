use proptest::prelude::*;
use storygrid_core::gesture::{choose_resize, ResizeChoice};
use storygrid_core::model::Change;
use storygrid_core::persist::LayoutEntry;
use storygrid_core::playback::{self, StopTarget};
use storygrid_core::prelude::*;

fn spec(i: usize, channels: usize) -> ObjectSpec {
    ObjectSpec {
        id: ObjectId::new(format!("o{i}")),
        image_ref: format!("img/{i}.png"),
        av_channels: (0..channels)
            .map(|c| AvComponent {
                kind: if c == 0 { AvKind::Video } else { AvKind::Audio },
                media_ref: format!("av/{i}-{c}"),
            })
            .collect(),
    }
}

fn arb_rect() -> impl Strategy<Value = Rect> {
    (1u8..=8, 1u8..=8)
        .prop_flat_map(|(w, h)| (0..=8 - w, 0..=8 - h, Just(w), Just(h)))
        .prop_map(|(c, r, w, h)| Rect::new(c, r, w, h).unwrap())
}

fn arb_manifest() -> impl Strategy<Value = PosterManifest> {
    prop::collection::vec((arb_rect(), 0usize..=2, any::<bool>()), 0..8).prop_map(|objs| {
        let objects: Vec<ObjectSpec> = objs.iter().enumerate().map(|(i, (_, n, _))| spec(i, *n)).collect();
        let entries = objs
            .iter()
            .enumerate()
            .map(|(i, (rect, _, zoomed))| LayoutEntry {
                object_id: ObjectId::new(format!("o{i}")),
                rect: if *zoomed { Rect::FULL } else { *rect },
                zoomed: zoomed.then_some(*rect),
            })
            .collect();
        PosterManifest {
            poster_id: "prop".into(),
            title: "random".into(),
            objects,
            initial_layout: Some(LayoutSnapshot {
                name: "start".into(),
                entries,
            }),
        }
    })
}

#[derive(Debug, Clone)]
enum Op {
    Move(usize, u8, u8),
    Resize(usize, Edge, i64),
    Zoom(usize),
    Erase(usize),
    Undo,
    Play(usize, Channel),
    Stop(usize),
    StopAll,
    Ended(usize),
}

fn arb_op() -> impl Strategy<Value = Op> {
    let edge = prop_oneof![Just(Edge::Left), Just(Edge::Right), Just(Edge::Top), Just(Edge::Bottom)];
    let channel = prop_oneof![Just(Channel::One), Just(Channel::Two)];
    prop_oneof![
        3 => (0usize..8, 0u8..8, 0u8..8).prop_map(|(i, c, r)| Op::Move(i, c, r)),
        3 => (0usize..8, edge, -1i64..9).prop_map(|(i, e, l)| Op::Resize(i, e, l)),
        1 => (0usize..8).prop_map(Op::Zoom),
        1 => (0usize..8).prop_map(Op::Erase),
        2 => Just(Op::Undo),
        1 => (0usize..8, channel).prop_map(|(i, c)| Op::Play(i, c)),
        1 => (0usize..8).prop_map(Op::Stop),
        1 => Just(Op::StopAll),
        1 => (0usize..8).prop_map(Op::Ended),
    ]
}

fn apply(board: &mut Board, op: &Op) {
    let id = |i: &usize| ObjectId::new(format!("o{i}"));
    match op {
        Op::Move(i, c, r) => {
            let _ = board.move_object(&id(i), CellCoord::new(*c, *r).unwrap());
        }
        Op::Resize(i, e, l) => {
            let _ = board.resize_object(&id(i), *e, *l);
        }
        Op::Zoom(i) => {
            let _ = board.zoom_toggle(&id(i));
        }
        Op::Erase(i) => {
            let _ = board.erase_object(&id(i));
        }
        Op::Undo => {
            board.undo();
        }
        Op::Play(i, c) => {
            let _ = playback::play(board, &id(i), *c);
        }
        Op::Stop(i) => {
            let _ = playback::stop(board, StopTarget::Object(&id(i)));
        }
        Op::StopAll => {
            let _ = playback::stop(board, StopTarget::All);
        }
        Op::Ended(i) => {
            playback::on_media_ended(board, &id(i));
        }
    }
}

fn arb_reachable_board() -> impl Strategy<Value = Board> {
    (arb_manifest(), prop::collection::vec(arb_op(), 0..30)).prop_map(|(m, ops)| {
        let mut board = load_poster(&m).board;
        for op in &ops {
            apply(&mut board, op);
        }
        board
    })
}

fn arb_event() -> impl Strategy<Value = (TokenKind, bool, u8, u8)> {
    (0usize..8, prop::bool::weighted(0.75), 0u8..8, 0u8..8)
        .prop_map(|(k, placed, c, r)| (TokenKind::ALL[k], placed, c, r))
}

fn events(raw: &[(TokenKind, bool, u8, u8)]) -> Vec<TokenEvent> {
    raw.iter()
        .enumerate()
        .map(|(i, &(token, placed, c, r))| {
            let cell = CellCoord::new(c, r).unwrap();
            if placed {
                TokenEvent::placed(i as u64 * 1000, token, cell)
            } else {
                TokenEvent::lifted(i as u64 * 1000, token, cell)
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn invariants_hold_after_every_operation(m in arb_manifest(), ops in prop::collection::vec(arb_op(), 0..60)) {
        let mut board = load_poster(&m).board;
        board.validate().unwrap();
        for op in &ops {
            apply(&mut board, op);
            prop_assert!(board.validate().is_ok(), "after {op:?}: {:?}", board.validate());
        }
    }

    #[test]
    fn undo_inverts_successful_operations(m in arb_manifest(), ops in prop::collection::vec(arb_op(), 1..40)) {
        let mut board = load_poster(&m).board;
        let id = |i: &usize| ObjectId::new(format!("o{i}"));
        for op in &ops {
            let before = board.clone();
            let mut after = board.clone();
            let applied = match op {
                Op::Move(i, c, r) => after.move_object(&id(i), CellCoord::new(*c, *r).unwrap()) == Ok(Change::Applied),
                Op::Resize(i, e, l) => after.resize_object(&id(i), *e, *l) == Ok(Change::Applied),
                Op::Erase(i) => after.erase_object(&id(i)).is_ok(),
                _ => false,
            };
            if applied {
                prop_assert_eq!(after.undo_stack().len(), before.undo_stack().len() + 1);
                after.undo();
                if let Op::Erase(i) = op {
                    // Erasing stops playback; the restored object comes back idle.
                    let mut expected = before.clone();
                    playback::on_media_ended(&mut expected, &id(i));
                    prop_assert_eq!(&after, &expected);
                } else {
                    prop_assert_eq!(&after, &before);
                }
            }
            apply(&mut board, op);
        }
    }

    #[test]
    fn topmost_matches_brute_force(board in arb_reachable_board()) {
        for cell in CellCoord::all() {
            let mut expected = None;
            for id in board.z_order() {
                if board.object(id).unwrap().rect.contains(cell) {
                    expected = Some(id);
                }
            }
            prop_assert_eq!(board.topmost_at(cell), expected);
        }
    }

    #[test]
    fn double_zoom_restores_rect(board in arb_reachable_board(), pick in 0usize..8) {
        let Some(id) = board.z_order().get(pick % board.len().max(1)).cloned() else {
            return Ok(());
        };
        let mut b = board.clone();
        b.zoom_toggle(&id).unwrap();
        b.zoom_toggle(&id).unwrap();
        prop_assert_eq!(b.object(&id).unwrap().rect, board.object(&id).unwrap().rect);
        prop_assert_eq!(b.object(&id).unwrap().zoom_saved, board.object(&id).unwrap().zoom_saved);
    }

    #[test]
    fn gesture_stream_is_deterministic(m in arb_manifest(), raw in prop::collection::vec(arb_event(), 0..80)) {
        let evs = events(&raw);
        let run = || {
            let mut b = load_poster(&m).board;
            let outs: Vec<Outcome> = evs.iter().map(|e| consume(&mut b, e)).collect();
            (b, outs)
        };
        let (b1, o1) = run();
        let (b2, o2) = run();
        prop_assert_eq!(&b1, &b2);
        prop_assert_eq!(o1, o2);
        b1.validate().unwrap();
    }

    #[test]
    fn placements_always_report_and_lifts_never_mutate(m in arb_manifest(), raw in prop::collection::vec(arb_event(), 0..80)) {
        let mut b = load_poster(&m).board;
        for ev in events(&raw) {
            let before = b.clone();
            let out = consume(&mut b, &ev);
            b.validate().unwrap();
            let completed_signal = out.signals.iter().any(|s| s.code == SignalCode::OpCompleted);
            prop_assert_eq!(out.completed.is_some(), completed_signal);
            match ev.phase {
                Phase::Lifted => {
                    prop_assert_eq!(&out, &Outcome::default());
                    prop_assert_eq!(BoardView::of(&b).objects, BoardView::of(&before).objects);
                    prop_assert_eq!(b.pending(), before.pending());
                    prop_assert_eq!(b.undo_stack(), before.undo_stack());
                }
                Phase::Placed => {
                    let state_changed = BoardView::of(&b) != BoardView::of(&before);
                    prop_assert!(state_changed || !out.signals.is_empty());
                }
            }
        }
    }

    #[test]
    fn resize_choice_matches_edge_enumeration(rect in arb_rect(), first in (0u8..8, 0u8..8), second in (0u8..8, 0u8..8)) {
        let first = CellCoord::new(first.0, first.1).unwrap();
        let second = CellCoord::new(second.0, second.1).unwrap();
        let edges = rect.edges_at(first);
        prop_assume!(!edges.is_empty());
        // Independent route: boundaries as (left, right, top, bottom) lines.
        let bounds = [
            i64::from(rect.origin().col()),
            i64::from(rect.last_col()),
            i64::from(rect.origin().row()),
            i64::from(rect.last_row()),
        ];
        let mut best: Option<(usize, i64, [i64; 4])> = None;
        let mut any_valid = false;
        for (slot, edge) in Edge::ALL.iter().enumerate() {
            if !edges.contains(edge) {
                continue;
            }
            let mut b = bounds;
            b[slot] = if slot < 2 { i64::from(second.col()) } else { i64::from(second.row()) };
            if b[0] > b[1] || b[2] > b[3] {
                continue;
            }
            any_valid = true;
            let shift = (b[slot] - bounds[slot]).abs();
            if shift > 0 && best.is_none_or(|(_, s, _)| shift > s) {
                best = Some((slot, shift, b));
            }
        }
        match choose_resize(rect, &edges, second) {
            ResizeChoice::Apply { edge, line } => {
                let (slot, _, b) = best.expect("oracle found a move");
                prop_assert_eq!(Edge::ALL[slot], edge);
                let got = rect.with_edge_at(edge, line).unwrap();
                prop_assert_eq!(
                    [i64::from(got.origin().col()), i64::from(got.last_col()), i64::from(got.origin().row()), i64::from(got.last_row())],
                    b
                );
            }
            ResizeChoice::NoOp => prop_assert!(best.is_none() && any_valid),
            ResizeChoice::Invalid => prop_assert!(!any_valid),
        }
    }

    #[test]
    fn manifest_round_trip_is_exact(m in arb_manifest()) {
        let text = manifest_to_json(&m);
        let parsed = parse_manifest(&text).unwrap();
        prop_assert_eq!(manifest_to_json(&parsed), text);
        let mut sorted = m.clone();
        sorted.objects.sort_by(|a, b| a.id.cmp(&b.id));
        prop_assert_eq!(parsed, sorted);
    }

    #[test]
    fn snapshot_round_trip_and_restore(board in arb_reachable_board()) {
        let snap = save_layout(&board, "mid");
        let text = snapshot_to_json(&snap);
        prop_assert_eq!(&parse_snapshot(&text).unwrap(), &snap);
        let mut restored = board.clone();
        restore_layout(&mut restored, &snap).unwrap();
        let geometry = |b: &Board| b.objects_back_to_front().map(|o| (o.id.clone(), o.rect, o.zoom_saved)).collect::<Vec<_>>();
        prop_assert_eq!(geometry(&restored), geometry(&board));
        prop_assert!(restored.objects_back_to_front().all(|o| o.playing.is_none()));
        restored.validate().unwrap();
    }

    #[test]
    fn replay_is_seed_deterministic(m in arb_manifest(), raw in prop::collection::vec(arb_event(), 0..60), seed in any::<u64>(), p in 0.0f64..=1.0) {
        let evs = events(&raw);
        let cfg = ReplayConfig { seed, dead_spot_prob: p, ..ReplayConfig::default() };
        let a = replay(&m, &evs, &cfg).unwrap();
        let b = replay(&m, &evs, &cfg).unwrap();
        prop_assert_eq!(&a.board, &b.board);
        prop_assert_eq!(&a.transcript, &b.transcript);
        prop_assert_eq!(&a.summary, &b.summary);
        let counted: usize = a.summary.per_token.values().map(|u| u.count).sum();
        prop_assert_eq!(counted, a.summary.total_ops);
        prop_assert_eq!(a.summary.total_ops, a.completed.len());
    }
}
