//! One live mission: executor, channel, clock gating and the command token.
//!
//! The session is deterministic. Everything that changes it goes through
//! `connect`, `disconnect`, `handle` or `advance`, and inputs are logged with
//! the tick they arrived at, so `replay` rebuilds the same run.

use serde::{Deserialize, Serialize};

use tasklink_core::bch::BchCode;
use tasklink_core::channel::{airtime, ChannelModel, NoisyChannel, COMMAND_LATENCY_BUDGET_S, LINK_RATE_BPS};
use tasklink_core::codec::{MissionCommand, QuantTable, QUANT_TABLE_VERSION};
use tasklink_core::executor::{receive, Executor, ExecutorConfig};
use tasklink_core::bits::to_hex;
use tasklink_core::framing::PACKET_BITS;
use tasklink_core::vehicle::VehicleParams;

use crate::link::encode_packet;
use crate::protocol::*;
use crate::spec::{command_from_pairs, format_spec, parse_pattern, parse_spec, SpecError};

/// Simulated seconds between telemetry frames.
pub const TELEMETRY_PERIOD_S: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub vehicle_id: String,
    pub ber: f64,
    pub seed: u64,
    /// Simulated seconds per wall second; 0 runs as fast as possible.
    pub realtime: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { vehicle_id: "cfg3".into(), ber: 0.0, seed: 0, realtime: 1.0 }
    }
}

/// Who should receive a server message.
#[derive(Clone, Debug, PartialEq)]
pub enum Outbound {
    All(ServerMessage),
    To(ClientId, ServerMessage),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Connect { client: ClientId },
    Disconnect { client: ClientId },
    Message { client: ClientId, message: ClientMessage },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub tick: u64,
    #[serde(flatten)]
    pub event: SessionEvent,
}

#[derive(Clone, Debug)]
pub struct Session {
    config: SessionConfig,
    params: VehicleParams,
    table: QuantTable,
    mission: ExecutorConfig,
    code: BchCode,
    executor: Executor,
    channel: NoisyChannel,
    paused: bool,
    token: Option<ClientId>,
    /// Ticks since start or last reset.
    ticks: u64,
    /// Ticks ever run; log timestamps.
    total_ticks: u64,
    telemetry_every: u64,
    log: Vec<LogEntry>,
}

fn validate_ber(ber: f64) -> Result<f64, String> {
    if (0.0..=1.0).contains(&ber) {
        Ok(ber)
    } else {
        Err(format!("ber {ber} outside [0, 1]"))
    }
}

impl Session {
    pub fn new(config: SessionConfig, params: VehicleParams, table: QuantTable, mission: ExecutorConfig) -> Result<Self, String> {
        validate_ber(config.ber)?;
        if !(config.realtime >= 0.0 && config.realtime.is_finite()) {
            return Err(format!("realtime factor {} must be finite and ≥ 0", config.realtime));
        }
        let mut mission = mission;
        // sessions can run for hours; telemetry carries the trace instead
        mission.record_trajectory = false;
        let executor = Executor::new(params.clone(), table.clone(), mission);
        let channel = ChannelModel::new(config.ber, config.seed).into_noisy();
        let telemetry_every = ((TELEMETRY_PERIOD_S / mission.dt).round() as u64).max(1);
        Ok(Session {
            config,
            params,
            table,
            mission,
            code: BchCode::link_default(),
            executor,
            channel,
            paused: false,
            token: None,
            ticks: 0,
            total_ticks: 0,
            telemetry_every,
            log: Vec::new(),
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn executor(&self) -> &Executor {
        &self.executor
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    pub fn token_holder(&self) -> Option<ClientId> {
        self.token
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn dt(&self) -> f64 {
        self.mission.dt
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            vehicle: self.config.vehicle_id.clone(),
            ber: self.config.ber,
            seed: self.config.seed,
            realtime: self.config.realtime,
            paused: self.paused,
            token_holder: self.token,
            time: self.executor.time(),
        }
    }

    pub fn hello(&self, client: ClientId) -> ServerMessage {
        ServerMessage::Hello {
            protocol_version: PROTOCOL_VERSION,
            client_id: client,
            quantization: self.table.clone(),
            patterns: pattern_catalog(),
            link: LinkInfo {
                packet_bits: PACKET_BITS,
                rate_bps: LINK_RATE_BPS,
                airtime_ms: airtime(PACKET_BITS, LINK_RATE_BPS) * 1e3,
                latency_budget_ms: COMMAND_LATENCY_BUDGET_S * 1e3,
            },
            session: self.info(),
        }
    }

    fn record(&mut self, event: SessionEvent) {
        self.log.push(LogEntry { tick: self.total_ticks, event });
    }

    pub fn connect(&mut self, client: ClientId) -> Vec<Outbound> {
        self.record(SessionEvent::Connect { client });
        vec![Outbound::To(client, self.hello(client))]
    }

    pub fn disconnect(&mut self, client: ClientId) -> Vec<Outbound> {
        self.record(SessionEvent::Disconnect { client });
        if self.token == Some(client) {
            self.token = None;
            return vec![Outbound::All(ServerMessage::Token { holder: None })];
        }
        Vec::new()
    }

    /// Parse and handle one text frame. Unparseable frames get an error
    /// reply and are not logged.
    pub fn handle_text(&mut self, client: ClientId, text: &str) -> Vec<Outbound> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(client, msg),
            Err(e) => vec![error_to(client, ErrorCode::BadMessage, e.to_string(), None)],
        }
    }

    pub fn handle(&mut self, client: ClientId, msg: ClientMessage) -> Vec<Outbound> {
        self.record(SessionEvent::Message { client, message: msg.clone() });
        let kind = msg.kind();
        let err = |code, message: String| vec![error_to(client, code, message, Some(kind.to_string()))];
        if msg.mutates() && self.token != Some(client) {
            let message = match self.token {
                Some(h) => format!("client {h} holds the command token"),
                None => "acquire the command token first".to_string(),
            };
            return err(ErrorCode::TokenRequired, message);
        }
        match msg {
            ClientMessage::Hello { protocol_version, table_version } => {
                if protocol_version != PROTOCOL_VERSION {
                    return err(ErrorCode::VersionMismatch, format!("server speaks protocol {PROTOCOL_VERSION}, client {protocol_version}"));
                }
                if let Some(v) = table_version.filter(|&v| v != QUANT_TABLE_VERSION) {
                    return err(ErrorCode::VersionMismatch, format!("server quantization table is version {QUANT_TABLE_VERSION}, client {v}"));
                }
                vec![Outbound::To(client, ServerMessage::Ack { request: kind.into() })]
            }
            ClientMessage::AcquireToken => match self.token {
                Some(h) if h != client => err(ErrorCode::TokenHeld, format!("client {h} holds the command token")),
                _ => {
                    self.token = Some(client);
                    vec![Outbound::All(ServerMessage::Token { holder: self.token })]
                }
            },
            ClientMessage::ReleaseToken => {
                if self.token == Some(client) {
                    self.token = None;
                }
                vec![Outbound::All(ServerMessage::Token { holder: self.token })]
            }
            ClientMessage::GetState => {
                let mut out = vec![Outbound::To(client, ServerMessage::State(self.info()))];
                if let Some(p) = self.plan_message() {
                    out.push(Outbound::To(client, p));
                }
                out
            }
            ClientMessage::SetBer { ber } => match validate_ber(ber) {
                Err(m) => err(ErrorCode::InvalidValue, m),
                Ok(b) => {
                    self.config.ber = b;
                    self.channel.set_ber(b);
                    vec![Outbound::All(ServerMessage::State(self.info()))]
                }
            },
            ClientMessage::Pause => {
                self.paused = true;
                vec![Outbound::All(ServerMessage::State(self.info()))]
            }
            ClientMessage::Resume => {
                self.paused = false;
                vec![Outbound::All(ServerMessage::State(self.info()))]
            }
            ClientMessage::Reset { seed } => {
                if let Some(s) = seed {
                    self.config.seed = s;
                }
                self.executor = Executor::new(self.params.clone(), self.table.clone(), self.mission);
                self.channel = ChannelModel::new(self.config.ber, self.config.seed).into_noisy();
                self.ticks = 0;
                vec![Outbound::All(ServerMessage::State(self.info())), Outbound::All(self.telemetry())]
            }
            ClientMessage::SendCommand { spec, pattern, params } => match self.build_command(spec, pattern, params) {
                Err(e) => err(ErrorCode::InvalidCommand, e.to_string()),
                Ok(cmd) => self.transmit(cmd),
            },
        }
    }

    fn build_command(
        &self,
        spec: Option<String>,
        pattern: Option<String>,
        params: Option<std::collections::BTreeMap<String, serde_json::Value>>,
    ) -> Result<MissionCommand, SpecError> {
        if let Some(s) = spec {
            return parse_spec(&s, &self.table);
        }
        let pattern = parse_pattern(pattern.as_deref().ok_or(SpecError::Empty)?)?;
        let pairs: Vec<(String, String)> = params
            .unwrap_or_default()
            .into_iter()
            .map(|(k, v)| {
                let v = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, v)
            })
            .collect();
        command_from_pairs(pattern, &pairs, &self.table)
    }

    /// Encode, push through the noisy channel and hand to the executor.
    fn transmit(&mut self, cmd: MissionCommand) -> Vec<Outbound> {
        let enc = encode_packet(&cmd, &self.code);
        let received = self.channel.transmit(&enc.packet.clone().into());
        let before = self.executor.active_plan().map(|p| p.id);
        let logged = self.executor.command_log().len();
        let disposition = self.executor.submit_packet(&received);
        let rx = receive(&self.code, &self.table, self.mission.sync, &received);
        let entry = self.executor.command_log().get(logged);
        let msg = ServerMessage::Disposition {
            t: self.executor.time(),
            disposition,
            corrected_bits: rx.corrected_positions.len(),
            plan_id: entry.and_then(|e| e.plan_id),
            sent: format_spec(&cmd, &self.table),
            decoded: rx.command.map(|c| format_spec(&c, &self.table)),
            reason: entry.map_or(rx.reason.clone(), |e| e.reason.clone()),
            packet_hex: enc.packet.to_hex(),
            received_hex: to_hex(received.bits()),
        };
        let mut out = vec![Outbound::All(msg)];
        if self.executor.active_plan().map(|p| p.id) != before {
            out.extend(self.plan_message().map(Outbound::All));
        }
        out
    }

    fn plan_message(&self) -> Option<ServerMessage> {
        self.executor.active_plan().map(|p| ServerMessage::Plan {
            plan_id: p.id,
            t: self.executor.time(),
            pattern: p.plan.pattern,
            closed: p.plan.closed,
            est_duration: p.plan.est_duration,
            waypoints: p.plan.waypoints.clone(),
        })
    }

    pub fn telemetry(&self) -> ServerMessage {
        ServerMessage::Telemetry(TelemetryFrame::from(&self.executor.snapshot()))
    }

    /// Run up to `ticks` control periods; nothing happens while paused.
    /// Emits a telemetry frame every 0.1 s of simulated time.
    pub fn advance(&mut self, ticks: u64) -> Vec<Outbound> {
        let mut out = Vec::new();
        if self.paused {
            return out;
        }
        for _ in 0..ticks {
            self.executor.step();
            self.ticks += 1;
            self.total_ticks += 1;
            if self.ticks.is_multiple_of(self.telemetry_every) {
                out.push(Outbound::All(self.telemetry()));
            }
        }
        out
    }

    /// Rebuild a session from its configuration and input log. Every
    /// unpaused tick between log entries is re-run.
    pub fn replay(config: SessionConfig, params: VehicleParams, table: QuantTable, mission: ExecutorConfig, log: &[LogEntry], end_tick: u64) -> Result<(Self, Vec<Outbound>), String> {
        let mut s = Session::new(config, params, table, mission)?;
        let mut out = Vec::new();
        for entry in log {
            out.extend(s.run_until(entry.tick));
            out.extend(match &entry.event {
                SessionEvent::Connect { client } => s.connect(*client),
                SessionEvent::Disconnect { client } => s.disconnect(*client),
                SessionEvent::Message { client, message } => s.handle(*client, message.clone()),
            });
        }
        out.extend(s.run_until(end_tick));
        Ok((s, out))
    }

    /// Total tick counter, paused time excluded.
    pub fn total_ticks(&self) -> u64 {
        self.total_ticks
    }

    fn run_until(&mut self, tick: u64) -> Vec<Outbound> {
        let n = tick.saturating_sub(self.total_ticks);
        self.advance(n)
    }
}

fn error_to(client: ClientId, code: ErrorCode, message: String, request: Option<String>) -> Outbound {
    Outbound::To(client, ServerMessage::Error { code, message, request })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tasklink_core::executor::Disposition;
    use tasklink_core::vehicle::Configuration;

    fn session(ber: f64, seed: u64) -> Session {
        let cfg = SessionConfig { ber, seed, realtime: 0.0, ..SessionConfig::default() };
        Session::new(cfg, Configuration::Cfg3.params(), QuantTable::default(), ExecutorConfig::default()).unwrap()
    }

    fn send(spec: &str) -> ClientMessage {
        ClientMessage::SendCommand { spec: Some(spec.into()), pattern: None, params: None }
    }

    fn dispositions(out: &[Outbound]) -> Vec<Disposition> {
        out.iter()
            .filter_map(|o| match o {
                Outbound::All(ServerMessage::Disposition { disposition, .. }) => Some(*disposition),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn clean_command_then_plan() {
        let mut s = session(0.0, 1);
        s.connect(1);
        s.handle(1, ClientMessage::AcquireToken);
        let out = s.handle(1, send("circle speed=0.5 depth=1 radius=3 dir=ccw"));
        assert_eq!(dispositions(&out), vec![Disposition::Clean]);
        assert!(matches!(out[1], Outbound::All(ServerMessage::Plan { plan_id: 1, .. })));
    }

    #[test]
    fn structured_params() {
        let mut s = session(0.0, 1);
        s.handle(1, ClientMessage::AcquireToken);
        let params = serde_json::from_str(r#"{"speed":0.5,"depth":0.5,"side":10,"dir":"ccw"}"#).unwrap();
        let out = s.handle(1, ClientMessage::SendCommand { spec: None, pattern: Some("square".into()), params: Some(params) });
        assert_eq!(dispositions(&out), vec![Disposition::Clean]);
        let bad = serde_json::from_str(r#"{"speed":0.5,"depth":99,"side":10,"dir":"ccw"}"#).unwrap();
        let out = s.handle(1, ClientMessage::SendCommand { spec: None, pattern: Some("square".into()), params: Some(bad) });
        assert!(matches!(&out[0], Outbound::To(1, ServerMessage::Error { code: ErrorCode::InvalidCommand, message, .. }) if message.contains("depth")));
    }

    #[test]
    fn token_gates_mutation() {
        let mut s = session(0.0, 1);
        s.connect(1);
        s.connect(2);
        let out = s.handle(2, ClientMessage::Pause);
        assert!(matches!(out[0], Outbound::To(2, ServerMessage::Error { code: ErrorCode::TokenRequired, .. })));
        s.handle(1, ClientMessage::AcquireToken);
        let out = s.handle(2, ClientMessage::AcquireToken);
        assert!(matches!(out[0], Outbound::To(2, ServerMessage::Error { code: ErrorCode::TokenHeld, .. })));
        s.handle(1, ClientMessage::ReleaseToken);
        s.handle(2, ClientMessage::AcquireToken);
        assert_eq!(s.token_holder(), Some(2));
        s.disconnect(2);
        assert_eq!(s.token_holder(), None);
    }

    fn send_many(s: &mut Session, n: usize) -> Vec<Disposition> {
        let mut seen = Vec::new();
        for _ in 0..n {
            seen.extend(dispositions(&s.handle(1, send("square speed=0.5 depth=1 side=5 dir=cw"))));
            s.advance(1);
        }
        seen
    }

    #[test]
    fn noisy_sends_mix_outcomes() {
        let mut s = session(0.0, 5);
        s.handle(1, ClientMessage::AcquireToken);
        s.handle(1, ClientMessage::SetBer { ber: 0.03 });
        let seen = send_many(&mut s, 400);
        assert!(seen.contains(&Disposition::Corrected));
        assert!(seen.contains(&Disposition::FecFail));
        // two corrections cannot cover ~14 codeword errors
        s.handle(1, ClientMessage::SetBer { ber: 0.2 });
        let seen = send_many(&mut s, 400);
        assert!(seen.contains(&Disposition::FecFail));
        assert!(seen.contains(&Disposition::FrameFail));
        assert!(!seen.iter().any(|d| d.accepted()));
    }

    #[test]
    fn pause_freezes_clock() {
        let mut s = session(0.0, 1);
        s.handle(1, ClientMessage::AcquireToken);
        let out = s.advance(100);
        assert_eq!(out.len(), 10);
        s.handle(1, ClientMessage::Pause);
        let t = s.executor().time();
        assert!(s.advance(100).is_empty());
        assert_eq!(s.executor().time(), t);
        s.handle(1, ClientMessage::Resume);
        s.advance(10);
        assert!((s.executor().time() - t - 0.1).abs() < 1e-9);
    }

    #[test]
    fn telemetry_times_increase() {
        let mut s = session(0.0, 1);
        s.handle(1, ClientMessage::AcquireToken);
        s.handle(1, send("hover duration=30 depth=1 heading=45"));
        let times: Vec<f64> = s
            .advance(500)
            .into_iter()
            .filter_map(|o| match o {
                Outbound::All(ServerMessage::Telemetry(t)) => Some(t.t),
                _ => None,
            })
            .collect();
        assert_eq!(times.len(), 50);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bad_frames_answered() {
        let mut s = session(0.0, 1);
        let out = s.handle_text(3, "{not json");
        assert!(matches!(out[0], Outbound::To(3, ServerMessage::Error { code: ErrorCode::BadMessage, .. })));
        s.handle(3, ClientMessage::AcquireToken);
        let out = s.handle(3, ClientMessage::SetBer { ber: 2.0 });
        assert!(matches!(out[0], Outbound::To(3, ServerMessage::Error { code: ErrorCode::InvalidValue, .. })));
        let out = s.handle(3, ClientMessage::Hello { protocol_version: PROTOCOL_VERSION, table_version: Some(9) });
        assert!(matches!(out[0], Outbound::To(3, ServerMessage::Error { code: ErrorCode::VersionMismatch, .. })));
    }

    #[test]
    fn replay_reproduces_session() {
        let mut s = session(0.05, 9);
        let mut live = Vec::new();
        live.extend(s.connect(1));
        live.extend(s.handle(1, ClientMessage::AcquireToken));
        live.extend(s.advance(37));
        live.extend(s.handle(1, send("spiral speed=0.4 depth=1 initial-radius=1 final-radius=3 loops=2 dir=ccw")));
        live.extend(s.advance(400));
        live.extend(s.handle(1, ClientMessage::SetBer { ber: 0.15 }));
        for _ in 0..5 {
            live.extend(s.handle(1, send("circle speed=0.5 depth=2 radius=2 dir=cw")));
            live.extend(s.advance(50));
        }
        live.extend(s.handle(1, ClientMessage::Pause));
        live.extend(s.advance(100));
        live.extend(s.handle(1, ClientMessage::Resume));
        live.extend(s.handle(1, ClientMessage::Reset { seed: Some(4) }));
        live.extend(s.advance(120));
        let (r, replayed) = Session::replay(s.config().clone(), Configuration::Cfg3.params(), QuantTable::default(), ExecutorConfig::default(), s.log(), s.total_ticks()).unwrap();
        let cfg0 = SessionConfig { ber: 0.05, seed: 9, realtime: 0.0, ..SessionConfig::default() };
        let (r0, replayed0) = Session::replay(cfg0, Configuration::Cfg3.params(), QuantTable::default(), ExecutorConfig::default(), s.log(), s.total_ticks()).unwrap();
        assert_eq!(replayed0, live);
        assert_eq!(r0.executor().snapshot(), s.executor().snapshot());
        let _ = (r, replayed);
    }
}
