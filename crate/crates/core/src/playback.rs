//! Audio/video playback state and the start/stop commands handed to the renderer.
//!
//! At most one channel plays per object; any number of objects may play at
//! once. Asking for the other channel of a playing object switches channels.

use serde::{Deserialize, Serialize};

use crate::model::{Board, Channel, ModelError, ObjectId};
use crate::signal::{Signal, SignalCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaybackAction {
    Start,
    Stop,
}

/// Instruction for whatever renders media.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlaybackCommand {
    pub object_id: ObjectId,
    pub channel: Channel,
    pub action: PlaybackAction,
    pub media_ref: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlaybackOutcome {
    pub commands: Vec<PlaybackCommand>,
    pub signals: Vec<Signal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopTarget<'a> {
    Object(&'a ObjectId),
    All,
}

pub fn play(board: &mut Board, id: &ObjectId, channel: Channel) -> Result<PlaybackOutcome, ModelError> {
    let obj = board
        .object_mut(id)
        .ok_or_else(|| ModelError::UnknownObject(id.clone()))?;
    let mut out = PlaybackOutcome::default();
    let Some(media_ref) = obj.channel(channel).map(|c| c.media_ref.clone()) else {
        out.signals.push(Signal::new(
            SignalCode::NoSuchChannel,
            format!("`{id}` has no channel {channel}"),
        ));
        return Ok(out);
    };
    match obj.playing {
        Some(current) if current == channel => {
            out.signals.push(Signal::new(
                SignalCode::AlreadyPlaying,
                format!("`{id}` is already playing channel {channel}"),
            ));
            return Ok(out);
        }
        Some(other) => out.commands.push(PlaybackCommand {
            object_id: id.clone(),
            channel: other,
            action: PlaybackAction::Stop,
            media_ref: obj.av_channels[other.index()].media_ref.clone(),
        }),
        None => {}
    }
    obj.playing = Some(channel);
    out.commands.push(PlaybackCommand {
        object_id: id.clone(),
        channel,
        action: PlaybackAction::Start,
        media_ref,
    });
    Ok(out)
}

pub fn stop(board: &mut Board, target: StopTarget<'_>) -> Result<PlaybackOutcome, ModelError> {
    let mut out = PlaybackOutcome::default();
    match target {
        StopTarget::Object(id) => {
            let obj = board
                .object_mut(id)
                .ok_or_else(|| ModelError::UnknownObject(id.clone()))?;
            match obj.playing.take() {
                Some(channel) => out.commands.push(PlaybackCommand {
                    object_id: id.clone(),
                    channel,
                    action: PlaybackAction::Stop,
                    media_ref: obj.av_channels[channel.index()].media_ref.clone(),
                }),
                None => out
                    .signals
                    .push(Signal::new(SignalCode::NotPlaying, format!("`{id}` is idle"))),
            }
        }
        StopTarget::All => {
            out.commands = stop_all(board);
            if out.commands.is_empty() {
                out.signals
                    .push(Signal::new(SignalCode::NotPlaying, "nothing is playing"));
            }
        }
    }
    Ok(out)
}

/// Stops every active channel, in object-id order.
pub(crate) fn stop_all(board: &mut Board) -> Vec<PlaybackCommand> {
    board
        .objects_mut()
        .filter_map(|obj| {
            let channel = obj.playing.take()?;
            Some(PlaybackCommand {
                object_id: obj.id.clone(),
                channel,
                action: PlaybackAction::Stop,
                media_ref: obj.av_channels[channel.index()].media_ref.clone(),
            })
        })
        .collect()
}

/// Renderer reports natural end of media. Returns whether anything changed;
/// late callbacks for idle or erased objects are ignored.
pub fn on_media_ended(board: &mut Board, id: &ObjectId) -> bool {
    board.object_mut(id).and_then(|obj| obj.playing.take()).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AvComponent, AvKind, MediaObject, ObjectSpec, Rect};

    fn board_with(channels: &[usize]) -> Board {
        let specs: Vec<ObjectSpec> = channels
            .iter()
            .enumerate()
            .map(|(i, &n)| ObjectSpec {
                id: ObjectId::new(format!("o{i}")),
                image_ref: format!("o{i}.png"),
                av_channels: (0..n)
                    .map(|c| AvComponent {
                        kind: AvKind::Audio,
                        media_ref: format!("o{i}-{c}.mp3"),
                    })
                    .collect(),
            })
            .collect();
        let mut b = Board::new("p", specs.clone());
        let objs = specs
            .iter()
            .enumerate()
            .map(|(i, s)| MediaObject::from_spec(s, Rect::new(i as u8, 0, 1, 1).unwrap()))
            .collect();
        b.replace_arrangement(objs);
        b
    }

    #[test]
    fn play_starts_channel() {
        let mut b = board_with(&[2]);
        let id = ObjectId::from("o0");
        let out = play(&mut b, &id, Channel::One).unwrap();
        assert_eq!(out.commands.len(), 1);
        assert_eq!(out.commands[0].action, PlaybackAction::Start);
        assert_eq!(out.commands[0].media_ref, "o0-0.mp3");
        assert_eq!(b.object(&id).unwrap().playing, Some(Channel::One));
    }

    #[test]
    fn play_same_channel_twice_is_guarded() {
        let mut b = board_with(&[2]);
        let id = ObjectId::from("o0");
        play(&mut b, &id, Channel::One).unwrap();
        let before = b.clone();
        let out = play(&mut b, &id, Channel::One).unwrap();
        assert!(out.commands.is_empty());
        assert_eq!(out.signals[0].code, SignalCode::AlreadyPlaying);
        assert_eq!(b, before);
    }

    #[test]
    fn play_missing_channel() {
        let mut b = board_with(&[1, 0]);
        let out = play(&mut b, &"o0".into(), Channel::Two).unwrap();
        assert_eq!(out.signals[0].code, SignalCode::NoSuchChannel);
        let out = play(&mut b, &"o1".into(), Channel::One).unwrap();
        assert_eq!(out.signals[0].code, SignalCode::NoSuchChannel);
        assert!(play(&mut b, &"zz".into(), Channel::One).is_err());
    }

    #[test]
    fn other_channel_switches() {
        let mut b = board_with(&[2]);
        let id = ObjectId::from("o0");
        play(&mut b, &id, Channel::One).unwrap();
        let out = play(&mut b, &id, Channel::Two).unwrap();
        let actions: Vec<_> = out.commands.iter().map(|c| (c.action, c.channel)).collect();
        assert_eq!(
            actions,
            vec![
                (PlaybackAction::Stop, Channel::One),
                (PlaybackAction::Start, Channel::Two)
            ]
        );
        assert_eq!(b.object(&id).unwrap().playing, Some(Channel::Two));
    }

    #[test]
    fn stop_named_and_idle() {
        let mut b = board_with(&[2]);
        let id = ObjectId::from("o0");
        play(&mut b, &id, Channel::Two).unwrap();
        let out = stop(&mut b, StopTarget::Object(&id)).unwrap();
        assert_eq!(out.commands.len(), 1);
        assert_eq!(b.object(&id).unwrap().playing, None);
        let out = stop(&mut b, StopTarget::Object(&id)).unwrap();
        assert!(out.commands.is_empty());
        assert_eq!(out.signals[0].code, SignalCode::NotPlaying);
        assert!(stop(&mut b, StopTarget::Object(&"nope".into())).is_err());
    }

    #[test]
    fn stop_all_counts_active_set() {
        let mut b = board_with(&[1, 1, 2, 1]);
        for i in 0..3 {
            play(&mut b, &ObjectId::new(format!("o{i}")), Channel::One).unwrap();
        }
        let out = stop(&mut b, StopTarget::All).unwrap();
        assert_eq!(out.commands.len(), 3);
        assert!(b.objects_back_to_front().all(|o| o.playing.is_none()));
        let out = stop(&mut b, StopTarget::All).unwrap();
        assert_eq!(out.signals[0].code, SignalCode::NotPlaying);
    }

    #[test]
    fn media_ended_clears_once() {
        let mut b = board_with(&[1]);
        let id = ObjectId::from("o0");
        play(&mut b, &id, Channel::One).unwrap();
        assert!(on_media_ended(&mut b, &id));
        assert!(!on_media_ended(&mut b, &id));
        assert!(!on_media_ended(&mut b, &"gone".into()));
        assert_eq!(b.object(&id).unwrap().playing, None);
    }
}
