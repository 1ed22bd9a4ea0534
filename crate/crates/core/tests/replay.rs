//! Replays a small hand-traced session and checks every count.

use storygrid_core::prelude::*;

const POSTER: &str = r#"{
  "poster_id": "verona",
  "title": "Balcony",
  "objects": [
    {"id": "juliet", "image_ref": "juliet.png", "av_channels": [
      {"kind": "video", "media_ref": "romeo-soliloquy.mp4"},
      {"kind": "audio", "media_ref": "juliet-hope.mp3"}]},
    {"id": "dagger", "image_ref": "dagger.png"},
    {"id": "tomb", "image_ref": "tomb.png", "av_channels": [
      {"kind": "audio", "media_ref": "bells.mp3"}]}
  ],
  "initial_layout": {"name": "start", "entries": [
    {"object_id": "tomb",   "rect": {"col": 4, "row": 4, "w": 4, "h": 4}},
    {"object_id": "juliet", "rect": {"col": 0, "row": 0, "w": 2, "h": 2}},
    {"object_id": "dagger", "rect": {"col": 3, "row": 0, "w": 1, "h": 1}}
  ]}
}"#;

// Hand trace (completed ops marked *):
//  1 Player1 on juliet          * start ch1
//  2 Player2 on juliet          * switch to ch2
//  3 Player2 on juliet            AlreadyPlaying
//  4 Mover on juliet (1,1)        pending, anchor (1,1)
//  5 lift
//  6 Mover at (0,0)               DestinationOutOfBounds, still pending
//  7 Mover at (3,3)             * juliet to (2,2)
//  8 Resizer on tomb (4,5)        pending, left edge
//  9 Resizer at (6,5)           * tomb left edge to col 6 -> (6,4) 2x4
// 10 Zoomer on dagger           * full board
// 11 Eraser on (0,7) (dagger)   * erased
// 12 Undoer                     * dagger back, full board
// 13 Zoomer on dagger           * restored to (3,0) 1x1
// 14 Stopper on empty (0,7)     * stops juliet ch2
// 15 Stopper on empty (0,7)       NotPlaying
// 16 Mover on (5,0)               NotOnObject
const LOG: &str = r#"{"ts_ms":0,"token":"Player1","phase":"placed","col":0,"row":0}
{"ts_ms":1000,"token":"Player1","phase":"lifted","col":0,"row":0}
{"ts_ms":9000,"token":"Player2","phase":"placed","col":1,"row":1}
{"ts_ms":12000,"token":"Player2","phase":"placed","col":0,"row":1}
{"ts_ms":13000,"token":"Player2","phase":"lifted","col":0,"row":1}
{"ts_ms":20000,"token":"Mover","phase":"placed","col":1,"row":1}
{"ts_ms":21000,"token":"Mover","phase":"lifted","col":1,"row":1}
{"ts_ms":23000,"token":"Mover","phase":"placed","col":0,"row":0}
{"ts_ms":24000,"token":"Mover","phase":"lifted","col":0,"row":0}
{"ts_ms":26000,"token":"Mover","phase":"placed","col":3,"row":3}
{"ts_ms":27000,"token":"Mover","phase":"lifted","col":3,"row":3}
{"ts_ms":35000,"token":"Resizer","phase":"placed","col":4,"row":5}
{"ts_ms":36000,"token":"Resizer","phase":"lifted","col":4,"row":5}
{"ts_ms":40000,"token":"Resizer","phase":"placed","col":6,"row":5}
{"ts_ms":50000,"token":"Zoomer","phase":"placed","col":3,"row":0}
{"ts_ms":60000,"token":"Eraser","phase":"placed","col":0,"row":7}
{"ts_ms":400000,"token":"Undoer","phase":"placed","col":7,"row":7}
{"ts_ms":410000,"token":"Zoomer","phase":"placed","col":5,"row":5}
{"ts_ms":420000,"token":"Stopper","phase":"placed","col":0,"row":7}
{"ts_ms":425000,"token":"Stopper","phase":"placed","col":0,"row":7}
{"ts_ms":430000,"token":"Mover","phase":"placed","col":5,"row":0}
"#;

#[test]
fn hand_traced_session() {
    let manifest = parse_manifest(POSTER).unwrap();
    let events = parse_log(LOG).unwrap();
    let report = replay(&manifest, &events, &ReplayConfig::default()).unwrap();

    let tokens: Vec<TokenKind> = report.completed.iter().map(|op| op.token).collect();
    use TokenKind::*;
    assert_eq!(
        tokens,
        vec![Player1, Player2, Mover, Resizer, Zoomer, Eraser, Undoer, Zoomer, Stopper]
    );

    let b = &report.board;
    b.validate().unwrap();
    assert_eq!(b.object(&"juliet".into()).unwrap().rect, Rect::new(2, 2, 2, 2).unwrap());
    assert_eq!(b.object(&"tomb".into()).unwrap().rect, Rect::new(6, 4, 2, 4).unwrap());
    let dagger = b.object(&"dagger".into()).unwrap();
    assert_eq!(dagger.rect, Rect::new(3, 0, 1, 1).unwrap());
    assert!(!dagger.is_zoomed());
    assert!(b.objects_back_to_front().all(|o| o.playing.is_none()));
    assert_eq!(b.z_order().last().unwrap().as_str(), "dagger");

    let codes: Vec<Vec<SignalCode>> = report
        .transcript
        .iter()
        .map(|t| t.signals.iter().map(|s| s.code).collect())
        .collect();
    assert_eq!(codes[2], vec![SignalCode::AlreadyPlaying]);
    assert_eq!(codes[4], vec![SignalCode::DestinationOutOfBounds]);
    assert_eq!(codes[12], vec![SignalCode::OpCompleted]);
    assert_eq!(codes[13], vec![SignalCode::NotPlaying]);
    assert_eq!(codes[14], vec![SignalCode::NotOnObject]);

    let s = &report.summary;
    assert_eq!(s.total_ops, 9);
    assert_eq!(s.per_token[&Zoomer].count, 2);
    // One gap (60 s -> 400 s) is a break: active = 60 + 20 = 80 s.
    assert_eq!(s.breaks_excluded, 1);
    assert_eq!(s.active_seconds, 80.0);
    assert_eq!(s.mean_interval_s, Some(8.9));
}

#[test]
fn dead_spots_lose_placements() {
    let manifest = parse_manifest(POSTER).unwrap();
    let events = parse_log(LOG).unwrap();
    let placements = events.iter().filter(|e| e.phase == Phase::Placed).count();
    let none = replay(&manifest, &events, &ReplayConfig::default()).unwrap();
    assert_eq!(none.dropped, 0);
    let all = ReplayConfig {
        dead_spot_prob: 1.0,
        seed: 7,
        ..ReplayConfig::default()
    };
    let all = replay(&manifest, &events, &all).unwrap();
    assert_eq!(all.dropped, placements);
    assert_eq!(all.summary.total_ops, 0);
    assert_eq!(all.board, load_poster(&manifest).board);

    let half = ReplayConfig {
        dead_spot_prob: 0.5,
        seed: 7,
        ..ReplayConfig::default()
    };
    let a = replay(&manifest, &events, &half).unwrap();
    let b = replay(&manifest, &events, &half).unwrap();
    assert_eq!(a.board, b.board);
    assert_eq!(a.dropped, b.dropped);
    assert!(a.dropped > 0 && a.dropped < placements);
    a.board.validate().unwrap();
}
