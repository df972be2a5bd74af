//! Headless mission runs from a packet schedule.

use tasklink_core::channel::ChannelModel;
use tasklink_core::codec::QuantTable;
use tasklink_core::executor::{Disposition, Executor, ExecutorConfig};
use tasklink_core::pattern::WaypointPlan;
use tasklink_core::vehicle::VehicleParams;

use crate::report::{command_log_tsv, plan_tsv, trajectory_tsv};
use crate::schedule::ScheduledPacket;

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub vehicle: VehicleParams,
    pub table: QuantTable,
    pub mission: ExecutorConfig,
    pub ber: f64,
    pub seed: u64,
    /// Simulated seconds.
    pub duration: f64,
}

#[derive(Clone, Debug)]
pub struct SimulationOutput {
    pub executor: Executor,
    /// Every plan that became active: (plan id, time, plan).
    pub plans: Vec<(u32, f64, WaypointPlan)>,
    /// Disposition of every scheduled packet, in order.
    pub dispositions: Vec<(f64, Disposition)>,
}

impl SimulationOutput {
    pub fn trajectory_tsv(&self) -> String {
        trajectory_tsv(self.executor.trajectory())
    }

    pub fn commands_tsv(&self) -> String {
        command_log_tsv(self.executor.command_log(), self.executor.table())
    }

    pub fn plans_tsv(&self) -> String {
        self.plans.iter().map(|(id, t, p)| format!("# plan {id} at t={t}\n{}", plan_tsv(p))).collect::<Vec<_>>().join("\n")
    }
}

/// Packets due at tick k (time k·dt) are submitted before that tick runs.
pub fn run_simulation(cfg: &SimulationConfig, schedule: &[ScheduledPacket]) -> SimulationOutput {
    let mut ex = Executor::new(cfg.vehicle.clone(), cfg.table.clone(), cfg.mission);
    let mut channel = ChannelModel::new(cfg.ber, cfg.seed).into_noisy();
    let dt = cfg.mission.dt;
    let ticks = (cfg.duration / dt).round() as u64;
    let mut plans = Vec::new();
    let mut dispositions = Vec::new();
    let mut next = 0;
    for k in 0..ticks {
        let now = k as f64 * dt;
        while next < schedule.len() && schedule[next].time <= now + 1e-9 {
            let d = ex.submit_packet(&channel.transmit(&schedule[next].bits));
            dispositions.push((ex.time(), d));
            if let Some(p) = ex.active_plan().filter(|p| plans.last().is_none_or(|(id, _, _)| *id != p.id)) {
                plans.push((p.id, ex.time(), p.plan.clone()));
            }
            next += 1;
        }
        ex.step();
    }
    SimulationOutput { executor: ex, plans, dispositions }
}
