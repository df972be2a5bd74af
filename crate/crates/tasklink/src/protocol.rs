//! Wire messages of the live service. One JSON object per WebSocket text
//! frame, discriminated by `type`. See `docs/protocol.md`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use tasklink_core::codec::{ParamRole, PatternType, QuantTable};
use tasklink_core::executor::{Disposition, MissionPhase, Telemetry};
use tasklink_core::pattern::Waypoint;

pub const PROTOCOL_VERSION: u32 = 1;

pub type ClientId = u64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    /// Optional; checks versions against the server's.
    Hello {
        protocol_version: u32,
        #[serde(default)]
        table_version: Option<u32>,
    },
    /// Either `spec` (text form) or `pattern` + `params`.
    SendCommand {
        #[serde(default)]
        spec: Option<String>,
        #[serde(default)]
        pattern: Option<String>,
        #[serde(default)]
        params: Option<BTreeMap<String, serde_json::Value>>,
    },
    SetBer {
        ber: f64,
    },
    Pause,
    Resume,
    Reset {
        #[serde(default)]
        seed: Option<u64>,
    },
    AcquireToken,
    ReleaseToken,
    GetState,
}

impl ClientMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            ClientMessage::Hello { .. } => "hello",
            ClientMessage::SendCommand { .. } => "send_command",
            ClientMessage::SetBer { .. } => "set_ber",
            ClientMessage::Pause => "pause",
            ClientMessage::Resume => "resume",
            ClientMessage::Reset { .. } => "reset",
            ClientMessage::AcquireToken => "acquire_token",
            ClientMessage::ReleaseToken => "release_token",
            ClientMessage::GetState => "get_state",
        }
    }

    /// Needs the command token.
    pub fn mutates(&self) -> bool {
        matches!(
            self,
            ClientMessage::SendCommand { .. } | ClientMessage::SetBer { .. } | ClientMessage::Pause | ClientMessage::Resume | ClientMessage::Reset { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotInfo {
    pub slot: usize,
    pub key: String,
    pub role: ParamRole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternInfo {
    pub name: String,
    pub id: u8,
    pub slots: Vec<SlotInfo>,
}

pub fn pattern_catalog() -> Vec<PatternInfo> {
    PatternType::ALL
        .iter()
        .map(|p| PatternInfo {
            name: p.name().to_string(),
            id: p.id(),
            slots: p
                .slots()
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.map(|s| SlotInfo { slot: i + 1, key: s.key.to_string(), role: s.role }))
                .collect(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkInfo {
    pub packet_bits: usize,
    pub rate_bps: f64,
    pub airtime_ms: f64,
    pub latency_budget_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub vehicle: String,
    pub ber: f64,
    pub seed: u64,
    pub realtime: f64,
    pub paused: bool,
    pub token_holder: Option<ClientId>,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelemetryFrame {
    pub t: f64,
    pub phase: MissionPhase,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub yaw: f64,
    pub u: f64,
    pub w: f64,
    pub plan_id: u32,
    pub wp_index: usize,
    pub last_disposition: Option<Disposition>,
    pub commands: usize,
    pub frame_failures: usize,
}

impl From<&Telemetry> for TelemetryFrame {
    fn from(t: &Telemetry) -> Self {
        let v = &t.vehicle;
        TelemetryFrame {
            t: t.time,
            phase: t.phase,
            x: v.x,
            y: v.y,
            z: v.z,
            roll: v.roll,
            yaw: v.yaw,
            u: v.u,
            w: v.w,
            plan_id: t.plan_id,
            wp_index: t.wp_index,
            last_disposition: t.last_disposition,
            commands: t.commands,
            frame_failures: t.frame_failures,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello {
        protocol_version: u32,
        client_id: ClientId,
        quantization: QuantTable,
        patterns: Vec<PatternInfo>,
        link: LinkInfo,
        session: SessionInfo,
    },
    Telemetry(TelemetryFrame),
    Disposition {
        t: f64,
        disposition: Disposition,
        corrected_bits: usize,
        plan_id: Option<u32>,
        /// Command as sent.
        sent: String,
        /// Command as decoded, when the payload parsed.
        decoded: Option<String>,
        reason: Option<String>,
        packet_hex: String,
        received_hex: String,
    },
    Plan {
        plan_id: u32,
        t: f64,
        pattern: PatternType,
        closed: bool,
        est_duration: f64,
        waypoints: Vec<Waypoint>,
    },
    State(SessionInfo),
    Token {
        holder: Option<ClientId>,
    },
    Ack {
        request: String,
    },
    Error {
        code: ErrorCode,
        message: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        request: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Not JSON, unknown `type`, or wrong fields.
    BadMessage,
    InvalidCommand,
    InvalidValue,
    TokenRequired,
    TokenHeld,
    VersionMismatch,
}
