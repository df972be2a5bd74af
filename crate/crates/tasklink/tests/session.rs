use tasklink::protocol::{ClientMessage, ServerMessage};
use tasklink::session::{LogEntry, Outbound, Session, SessionConfig};
use tasklink_core::codec::QuantTable;
use tasklink_core::executor::ExecutorConfig;
use tasklink_core::vehicle::Configuration;

fn session(cfg: &SessionConfig) -> Session {
    Session::new(cfg.clone(), Configuration::Cfg3.params(), QuantTable::default(), ExecutorConfig::default()).unwrap()
}

fn frames(out: &[Outbound]) -> Vec<String> {
    out.iter()
        .map(|o| match o {
            Outbound::All(m) => format!("*\t{}", serde_json::to_string(m).unwrap()),
            Outbound::To(c, m) => format!("{c}\t{}", serde_json::to_string(m).unwrap()),
        })
        .collect()
}

#[test]
fn replay_from_serialized_log() {
    let cfg = SessionConfig { ber: 0.04, seed: 21, realtime: 0.0, ..SessionConfig::default() };
    let mut s = session(&cfg);
    let mut live = Vec::new();
    live.extend(s.connect(7));
    live.extend(s.handle_text(7, r#"{"type":"acquire_token"}"#));
    live.extend(s.advance(25));
    for (i, spec) in ["lawnmower speed=0.5 depth=1 width=6 height=3 laps=1", "box_orbit speed=0.4 depth=1.5 radius=2 loops=1 dir=ccw", "helix speed=0.3 start-depth=1 end-depth=3 radius=2 turns=2 dir=cw"].iter().enumerate() {
        for _ in 0..4 {
            live.extend(s.handle(7, ClientMessage::SendCommand { spec: Some(spec.to_string()), pattern: None, params: None }));
            live.extend(s.advance(13 + i as u64));
        }
        live.extend(s.advance(900));
    }
    live.extend(s.handle_text(7, "garbage"));
    live.extend(s.connect(8));
    live.extend(s.handle_text(8, r#"{"type":"pause"}"#));
    live.extend(s.disconnect(7));
    live.extend(s.advance(50));

    let text = serde_json::to_string(s.log()).unwrap();
    let log: Vec<LogEntry> = serde_json::from_str(&text).unwrap();
    let (r, replayed) = Session::replay(cfg, Configuration::Cfg3.params(), QuantTable::default(), ExecutorConfig::default(), &log, s.total_ticks()).unwrap();
    // unparseable frames are not logged, so their error replies are missing
    let live: Vec<String> = frames(&live).into_iter().filter(|f| !f.contains("bad_message")).collect();
    assert_eq!(frames(&replayed), live);
    assert_eq!(r.executor().command_log(), s.executor().command_log());
    assert_eq!(r.executor().snapshot(), s.executor().snapshot());
    assert!(live.iter().any(|f| f.contains("\"type\":\"plan\"")));
}

#[test]
fn telemetry_strictly_increasing_across_commands() {
    let cfg = SessionConfig { ber: 0.1, seed: 3, realtime: 0.0, ..SessionConfig::default() };
    let mut s = session(&cfg);
    s.handle(1, ClientMessage::AcquireToken);
    let mut times = Vec::new();
    for k in 0..30 {
        s.handle(1, ClientMessage::SendCommand { spec: Some("spiral speed=0.5 depth=1 initial-radius=1 final-radius=4 loops=3 dir=ccw".into()), pattern: None, params: None });
        for o in s.advance(40 + k) {
            if let Outbound::All(ServerMessage::Telemetry(t)) = o {
                times.push(t.t);
            }
        }
    }
    assert!(times.len() > 100);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
}
