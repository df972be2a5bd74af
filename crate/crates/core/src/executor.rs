//! Onboard mission executor: packets in, waypoint guidance and vehicle
//! dynamics out.
//!
//! The executor owns one vehicle. `submit_packet` runs deframe → BCH decode →
//! payload decode → plan generation and swaps the active plan in at once;
//! `tick` advances guidance, control and dynamics by one period.
//!
//! Phases: `idle`, `executing` and `completed` are the mission state;
//! `re_tasked` and `command_rejected` are one-tick transients shown on top of
//! it. A packet with no sync at all changes nothing except the last
//! disposition and the frame failure counter; every packet with at least one
//! sync candidate gets exactly one `command_log` entry.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::bch::{BchCode, DecodeStatus};
use crate::codec::{decode_payload, MissionCommand, QuantTable, RawPayload};
use crate::framing::{deframe_with, Bitstream, SyncTolerance};
use crate::pattern::{generate_waypoints_with, PatternConfig, WaypointPlan};
use crate::vehicle::{allocate, depth_command, roll_command, step_dynamics, wrap_angle, VehicleParams, VehicleState, DEFAULT_DT, MAX_DT};

pub const DEFAULT_ARRIVAL_RADIUS: f64 = 0.3;
/// Station-keeping: commanded speed per metre of along-track error.
const HOLD_SPEED_GAIN: f64 = 0.5;
const HOLD_MAX_SPEED: f64 = 0.2;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MissionPhase {
    Idle,
    Executing,
    ReTasked,
    Completed,
    CommandRejected,
}

impl MissionPhase {
    pub fn name(self) -> &'static str {
        match self {
            MissionPhase::Idle => "idle",
            MissionPhase::Executing => "executing",
            MissionPhase::ReTasked => "re_tasked",
            MissionPhase::Completed => "completed",
            MissionPhase::CommandRejected => "command_rejected",
        }
    }

    /// Whether `self → to` is an allowed transition. A completed mission may
    /// be restarted by a new plan.
    pub fn can_transition(self, to: MissionPhase) -> bool {
        use MissionPhase::*;
        if self == to || to == CommandRejected {
            return true;
        }
        matches!(
            (self, to),
            (Idle, Executing) | (Executing, ReTasked) | (Executing, Completed) | (ReTasked, Executing) | (ReTasked, Completed) | (Completed, Executing)
        ) || self == CommandRejected
    }
}

impl fmt::Display for MissionPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one packet submission.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Disposition {
    Clean,
    Corrected,
    FecFail,
    FrameFail,
    Malformed,
}

impl Disposition {
    pub fn code(self) -> &'static str {
        match self {
            Disposition::Clean => "CLEAN",
            Disposition::Corrected => "CORRECTED",
            Disposition::FecFail => "FEC_FAIL",
            Disposition::FrameFail => "FRAME_FAIL",
            Disposition::Malformed => "MALFORMED",
        }
    }

    pub fn accepted(self) -> bool {
        matches!(self, Disposition::Clean | Disposition::Corrected)
    }
}

impl fmt::Display for Disposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CommandLogEntry {
    pub time: f64,
    pub disposition: Disposition,
    /// Decoded command, when the payload parsed.
    pub command: Option<MissionCommand>,
    pub corrected_bits: usize,
    /// Plan created by this command.
    pub plan_id: Option<u32>,
    pub reason: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryRow {
    pub t: f64,
    pub phase: MissionPhase,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub wp_index: usize,
    pub plan_id: u32,
}

/// Read-only view of the executor. `plan_id` 0 means no plan.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Telemetry {
    pub time: f64,
    pub phase: MissionPhase,
    pub vehicle: VehicleState,
    pub plan_id: u32,
    pub wp_index: usize,
    pub last_disposition: Option<Disposition>,
    pub last_reason: Option<String>,
    pub commands: usize,
    pub frame_failures: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExecutorConfig {
    pub dt: f64,
    pub arrival_radius: f64,
    pub sync: SyncTolerance,
    pub patterns: PatternConfig,
    /// Keep a trajectory row per tick.
    pub record_trajectory: bool,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        ExecutorConfig {
            dt: DEFAULT_DT,
            arrival_radius: DEFAULT_ARRIVAL_RADIUS,
            sync: SyncTolerance::default(),
            patterns: PatternConfig::default(),
            record_trajectory: true,
        }
    }
}

/// What the receiver made of one bitstream.
#[derive(Clone, Debug, PartialEq)]
pub struct Reception {
    pub disposition: Disposition,
    pub command: Option<MissionCommand>,
    /// Start of the packet that decoded.
    pub offset: Option<usize>,
    pub status: Option<DecodeStatus>,
    pub corrected_positions: Vec<usize>,
    pub reason: Option<String>,
}

/// Deframe, then take the first candidate that BCH-decodes and parse its
/// payload.
pub fn receive(code: &BchCode, table: &QuantTable, sync: SyncTolerance, raw: &Bitstream) -> Reception {
    let mut rx = Reception {
        disposition: Disposition::FrameFail,
        command: None,
        offset: None,
        status: None,
        corrected_positions: Vec::new(),
        reason: Some("no sync".to_string()),
    };
    let candidates = deframe_with(raw, code.n(), sync);
    if candidates.is_empty() {
        return rx;
    }
    rx.disposition = Disposition::FecFail;
    rx.reason = Some("uncorrectable codeword".to_string());
    let decoded = candidates
        .iter()
        .filter_map(|(off, cw)| code.decode(cw).ok().map(|d| (*off, d)))
        .find(|(_, d)| d.status != DecodeStatus::Failure);
    let Some((offset, d)) = decoded else { return rx };
    rx.offset = Some(offset);
    rx.status = Some(d.status);
    rx.corrected_positions = d.corrected_positions;
    match RawPayload::from_message(&d.message).and_then(|p| decode_payload(&p, table)) {
        Err(e) => {
            rx.disposition = Disposition::Malformed;
            rx.reason = Some(e.to_string());
        }
        Ok(cmd) => {
            rx.command = Some(cmd);
            rx.reason = None;
            rx.disposition = if d.status == DecodeStatus::Clean { Disposition::Clean } else { Disposition::Corrected };
        }
    }
    rx
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActivePlan {
    pub id: u32,
    pub plan: WaypointPlan,
}

#[derive(Clone, Debug)]
pub struct Executor {
    params: VehicleParams,
    table: QuantTable,
    code: BchCode,
    config: ExecutorConfig,
    mission: MissionPhase,
    transient: Option<MissionPhase>,
    plan: Option<ActivePlan>,
    wp_index: usize,
    /// Seconds spent holding at the current waypoint, once arrived.
    holding: Option<f64>,
    hold_heading: f64,
    vehicle: VehicleState,
    command_log: Vec<CommandLogEntry>,
    last: Option<(Disposition, Option<String>)>,
    frame_failures: usize,
    next_plan_id: u32,
    trajectory: Vec<TrajectoryRow>,
}

impl Executor {
    pub fn new(params: VehicleParams, table: QuantTable, config: ExecutorConfig) -> Self {
        Self::with_state(params, table, config, VehicleState::default())
    }

    pub fn with_state(params: VehicleParams, table: QuantTable, config: ExecutorConfig, vehicle: VehicleState) -> Self {
        Executor {
            params,
            table,
            code: BchCode::link_default(),
            config,
            mission: MissionPhase::Idle,
            transient: None,
            plan: None,
            wp_index: 0,
            holding: None,
            hold_heading: vehicle.yaw,
            vehicle,
            command_log: Vec::new(),
            last: None,
            frame_failures: 0,
            next_plan_id: 1,
            trajectory: Vec::new(),
        }
    }

    pub fn phase(&self) -> MissionPhase {
        self.transient.unwrap_or(self.mission)
    }

    pub fn time(&self) -> f64 {
        self.vehicle.time
    }

    pub fn vehicle(&self) -> &VehicleState {
        &self.vehicle
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn config(&self) -> &ExecutorConfig {
        &self.config
    }

    pub fn table(&self) -> &QuantTable {
        &self.table
    }

    pub fn active_plan(&self) -> Option<&ActivePlan> {
        self.plan.as_ref()
    }

    pub fn current_waypoint_index(&self) -> usize {
        self.wp_index
    }

    pub fn command_log(&self) -> &[CommandLogEntry] {
        &self.command_log
    }

    pub fn frame_failures(&self) -> usize {
        self.frame_failures
    }

    pub fn trajectory(&self) -> &[TrajectoryRow] {
        &self.trajectory
    }

    pub fn snapshot(&self) -> Telemetry {
        Telemetry {
            time: self.vehicle.time,
            phase: self.phase(),
            vehicle: self.vehicle,
            plan_id: self.plan.as_ref().map_or(0, |p| p.id),
            wp_index: self.wp_index,
            last_disposition: self.last.as_ref().map(|l| l.0),
            last_reason: self.last.as_ref().and_then(|l| l.1.clone()),
            commands: self.command_log.len(),
            frame_failures: self.frame_failures,
        }
    }

    /// Run a received bitstream through the link and re-plan on success.
    pub fn submit_packet(&mut self, raw: &Bitstream) -> Disposition {
        let rx = receive(&self.code, &self.table, self.config.sync, raw);
        if rx.disposition == Disposition::FrameFail {
            self.frame_failures += 1;
            self.last = Some((Disposition::FrameFail, rx.reason));
            return Disposition::FrameFail;
        }
        let mut entry = CommandLogEntry {
            time: self.vehicle.time,
            disposition: rx.disposition,
            command: rx.command,
            corrected_bits: rx.corrected_positions.len(),
            plan_id: None,
            reason: rx.reason,
        };
        if let (true, Some(cmd)) = (rx.disposition.accepted(), rx.command) {
            match generate_waypoints_with(&cmd, &self.vehicle, &self.table, &self.config.patterns) {
                Err(e) => {
                    entry.disposition = Disposition::Malformed;
                    entry.reason = Some(e.to_string());
                }
                Ok(plan) => {
                    let id = self.next_plan_id;
                    self.next_plan_id += 1;
                    self.install(ActivePlan { id, plan });
                    entry.plan_id = Some(id);
                }
            }
        }
        if !entry.disposition.accepted() {
            self.transient = Some(MissionPhase::CommandRejected);
        }
        let disposition = entry.disposition;
        self.last = Some((disposition, entry.reason.clone()));
        self.command_log.push(entry);
        disposition
    }

    fn install(&mut self, plan: ActivePlan) {
        let was = self.mission;
        self.plan = Some(plan);
        self.wp_index = 0;
        self.holding = None;
        self.hold_heading = self.vehicle.yaw;
        self.mission = MissionPhase::Executing;
        self.transient = if was == MissionPhase::Executing { Some(MissionPhase::ReTasked) } else { None };
    }

    /// Advance by the configured control period.
    pub fn step(&mut self) {
        self.tick(self.config.dt);
    }

    /// Advance one control period of `dt` seconds. `dt` is clamped to
    /// (0, 0.1]; a non-positive `dt` does nothing.
    pub fn tick(&mut self, dt: f64) {
        if dt.is_nan() || dt <= 0.0 {
            return;
        }
        let dt = dt.min(MAX_DT);
        let desired = self.control(dt);
        let alloc = allocate(&self.params, desired);
        self.vehicle = step_dynamics(&self.vehicle, &alloc, &self.params, dt);
        if self.mission == MissionPhase::Executing {
            self.advance(dt);
        }
        if self.config.record_trajectory {
            self.trajectory.push(TrajectoryRow {
                t: self.vehicle.time,
                phase: self.phase(),
                x: self.vehicle.x,
                y: self.vehicle.y,
                z: self.vehicle.z,
                yaw: self.vehicle.yaw,
                wp_index: self.wp_index,
                plan_id: self.plan.as_ref().map_or(0, |p| p.id),
            });
        }
        self.transient = None;
    }

    /// Desired body wrench for this period.
    fn control(&self, _dt: f64) -> [f64; 6] {
        let s = &self.vehicle;
        let g = &self.params.gains;
        let roll = roll_command(s, &self.params);
        let Some(active) = self.plan.as_ref().filter(|_| self.mission != MissionPhase::Idle) else {
            return [-g.surge_kp * s.u, 0.0, self.params.trim_force(), roll, 0.0, -g.yaw_kd * s.r];
        };
        let wp = active.plan.waypoints[self.wp_index];
        let heave = depth_command(s, wp.depth, &self.params);
        let (dx, dy) = (wp.x - s.x, wp.y - s.y);
        let (speed, heading) = if self.mission == MissionPhase::Completed || self.holding.is_some() {
            let along = dx * libm::cos(s.yaw) + dy * libm::sin(s.yaw);
            let speed = (HOLD_SPEED_GAIN * along).clamp(-HOLD_MAX_SPEED, HOLD_MAX_SPEED);
            let heading = wp.heading_hint.map_or(self.hold_heading, f64::to_radians);
            (speed, heading)
        } else {
            let heading = libm::atan2(dy, dx);
            let err = wrap_angle(heading - s.yaw);
            (wp.speed * libm::cos(err).max(0.0), heading)
        };
        let yaw_err = wrap_angle(heading - s.yaw);
        let drag = &self.params.damping.surge;
        let surge = drag.linear * speed + drag.quadratic * speed * speed.abs() + g.surge_kp * (speed - s.u);
        [surge, 0.0, heave, roll, 0.0, g.yaw_kp * yaw_err - g.yaw_kd * s.r]
    }

    /// Arrival bookkeeping after the dynamics step. At most one waypoint per
    /// period.
    fn advance(&mut self, dt: f64) {
        let Some(active) = self.plan.as_ref() else { return };
        let wp = active.plan.waypoints[self.wp_index];
        let len = active.plan.len();
        let done = match self.holding {
            Some(t) => {
                let t = t + dt;
                self.holding = Some(t);
                t >= wp.hold
            }
            None => {
                if wp.horizontal_distance(self.vehicle.x, self.vehicle.y) > self.config.arrival_radius {
                    return;
                }
                if wp.hold > 0.0 {
                    self.holding = Some(0.0);
                    self.hold_heading = self.vehicle.yaw;
                    false
                } else {
                    true
                }
            }
        };
        if !done {
            return;
        }
        self.holding = None;
        if self.wp_index + 1 < len {
            self.wp_index += 1;
        } else {
            self.mission = MissionPhase::Completed;
            self.hold_heading = self.vehicle.yaw;
        }
    }
}
