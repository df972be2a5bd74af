//! Delimited text logs: trajectory, command log and waypoint plans.

use std::fmt::Write;

use tasklink_core::codec::QuantTable;
use tasklink_core::executor::{CommandLogEntry, TrajectoryRow};
use tasklink_core::pattern::WaypointPlan;

use crate::spec::format_spec;

pub const TRAJECTORY_HEADER: &str = "t\tphase\tx\ty\tz\tpsi\twp_index\tplan_id";

/// Floats are written in shortest round-trip form, so equal runs give equal
/// bytes.
pub fn trajectory_tsv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 80);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}", r.t, r.phase, r.x, r.y, r.z, r.yaw, r.wp_index, r.plan_id).unwrap();
    }
    out
}

pub fn command_log_tsv(entries: &[CommandLogEntry], table: &QuantTable) -> String {
    let mut out = String::from("t\tdisposition\tcorrected_bits\tplan_id\tcommand\treason\n");
    for e in entries {
        let cmd = e.command.map_or("-".to_string(), |c| format_spec(&c, table));
        let plan = e.plan_id.map_or("-".to_string(), |p| p.to_string());
        let reason = e.reason.as_deref().unwrap_or("-");
        writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", e.time, e.disposition, e.corrected_bits, plan, cmd, reason).unwrap();
    }
    out
}

pub fn plan_tsv(plan: &WaypointPlan) -> String {
    let mut out = format!("# {} closed={} est_duration={}\nindex\tx\ty\tdepth\tspeed\thold\theading_hint\n", plan.pattern, plan.closed, plan.est_duration);
    for (i, w) in plan.waypoints.iter().enumerate() {
        let hint = w.heading_hint.map_or("-".to_string(), |h| h.to_string());
        writeln!(out, "{i}\t{}\t{}\t{}\t{}\t{}\t{hint}", w.x, w.y, w.depth, w.speed, w.hold).unwrap();
    }
    out
}
