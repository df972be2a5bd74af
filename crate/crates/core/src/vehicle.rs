//! 4-DOF vehicle model (surge, heave, roll, yaw) with hydrostatic roll
//! restoring, thruster mapping, PD depth control and the stability,
//! controllability and maneuverability analytics.
//!
//! Frames: `x`, `y` are a local level plane with yaw `ψ` measured from `+x`
//! toward `+y`; depth `z` is positive down. Thruster positions are body-frame
//! `[x fwd, y, z down]` relative to the center of gravity. Sway and pitch are
//! held at zero.
//!
//! Drag and thruster figures are calibration constants: they are tuned so
//! that configuration 3 reproduces the measured heave and yaw rates and the
//! depth step response, not derived from hull geometry.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::VehicleError;
use crate::linalg::{numerical_rank, Matrix};

pub const GRAVITY: f64 = 9.81;
pub const FRESH_WATER_DENSITY: f64 = 1000.0;
/// Integration step of the shipped simulation.
pub const DEFAULT_DT: f64 = 0.01;
pub const MAX_DT: f64 = 0.1;
/// Default relative tolerance for [`controllability_rank`].
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Depth, positive down, never negative.
    pub z: f64,
    pub roll: f64,
    /// Wrapped to (−π, π].
    pub yaw: f64,
    /// Surge velocity.
    pub u: f64,
    /// Heave velocity, positive down.
    pub w: f64,
    /// Roll rate.
    pub p: f64,
    /// Yaw rate.
    pub r: f64,
    pub time: f64,
}

impl VehicleState {
    pub fn at(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        VehicleState { x, y, z, yaw, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Thruster {
    pub name: String,
    /// Position relative to CG, body frame, m.
    pub position: [f64; 3],
    /// Unit thrust direction, body frame.
    pub direction: [f64; 3],
    /// Max thrust magnitude, N (symmetric forward/reverse).
    pub max_thrust: f64,
    /// Fraction of commanded thrust delivered to the hull (jet interference).
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub efficiency: f64,
}

#[cfg(feature = "serde")]
fn one() -> f64 {
    1.0
}

impl Thruster {
    pub fn new(name: &str, position: [f64; 3], direction: [f64; 3], max_thrust: f64) -> Self {
        Thruster { name: name.into(), position, direction, max_thrust, efficiency: 1.0 }
    }

    /// [f ; r × f].
    pub fn column(&self) -> [f64; 6] {
        let f = self.direction;
        let r = self.position;
        [
            f[0],
            f[1],
            f[2],
            r[1] * f[2] - r[2] * f[1],
            r[2] * f[0] - r[0] * f[2],
            r[0] * f[1] - r[1] * f[0],
        ]
    }
}

/// Linear plus quadratic damping on one axis: `c_l·v + c_q·v|v|`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Damping {
    #[cfg_attr(feature = "serde", serde(default))]
    pub linear: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub quadratic: f64,
}

impl Damping {
    pub const fn quadratic(c: f64) -> Self {
        Damping { linear: 0.0, quadratic: c }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxisDamping {
    pub surge: Damping,
    pub heave: Damping,
    pub roll: Damping,
    pub yaw: Damping,
}

/// Controller gains. Depth: N/m and N·s/m. Roll: N·m/rad and N·m·s/rad.
/// Yaw: N·m/rad and N·m·s/rad. Surge: N·s/m on speed error.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControlGains {
    pub depth_kp: f64,
    pub depth_kd: f64,
    pub roll_kp: f64,
    pub roll_kd: f64,
    pub yaw_kp: f64,
    pub yaw_kd: f64,
    pub surge_kp: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VehicleParams {
    pub name: String,
    pub mass: f64,
    /// Displaced volume, m³.
    pub volume: f64,
    /// z_B − z_G, positive when CG is below CB.
    pub metacentric_height: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_gravity"))]
    pub gravity: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_density"))]
    pub water_density: f64,
    pub inertia_roll: f64,
    pub inertia_yaw: f64,
    pub damping: AxisDamping,
    pub thrusters: Vec<Thruster>,
    pub gains: ControlGains,
}

#[cfg(feature = "serde")]
fn default_gravity() -> f64 {
    GRAVITY
}

#[cfg(feature = "serde")]
fn default_density() -> f64 {
    FRESH_WATER_DENSITY
}

/// Calibrated net buoyancy of the shipped configurations, N.
pub const SHIPPED_NET_BUOYANCY: f64 = 2.0;
pub const SHIPPED_MASS: f64 = 13.9;

/// Which of the three hardware iterations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Configuration {
    /// Three thrusters, single central heave thruster under the antenna.
    Cfg1,
    /// Four thrusters, antenna on top (CG above CB).
    Cfg2,
    /// Four thrusters, antenna below the hull (final design).
    Cfg3,
}

impl Configuration {
    pub const ALL: [Configuration; 3] = [Configuration::Cfg1, Configuration::Cfg2, Configuration::Cfg3];

    pub fn id(self) -> &'static str {
        match self {
            Configuration::Cfg1 => "cfg1",
            Configuration::Cfg2 => "cfg2",
            Configuration::Cfg3 => "cfg3",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.id() == id)
    }

    /// Metacentric height in metres.
    pub fn metacentric_height(self) -> f64 {
        match self {
            Configuration::Cfg1 => 0.0,
            Configuration::Cfg2 => -0.0020,
            Configuration::Cfg3 => 0.0065,
        }
    }

    pub fn params(self) -> VehicleParams {
        let surge_max = 5.0;
        let heave_max = 5.0;
        let mut thrusters = vec![
            Thruster::new("surge_port", [0.0, -0.15, 0.0], [1.0, 0.0, 0.0], surge_max),
            Thruster::new("surge_starboard", [0.0, 0.15, 0.0], [1.0, 0.0, 0.0], surge_max),
        ];
        match self {
            Configuration::Cfg1 => {
                let mut t = Thruster::new("heave_center", [0.0, 0.0, 0.0], [0.0, 0.0, 1.0], heave_max);
                t.efficiency = CFG1_HEAVE_EFFICIENCY;
                thrusters.push(t);
            }
            Configuration::Cfg2 | Configuration::Cfg3 => {
                thrusters.push(Thruster::new("heave_port", [0.0, -0.2, 0.0], [0.0, 0.0, 1.0], heave_max));
                thrusters.push(Thruster::new("heave_starboard", [0.0, 0.2, 0.0], [0.0, 0.0, 1.0], heave_max));
            }
        }
        let weight = SHIPPED_MASS * GRAVITY;
        VehicleParams {
            name: self.id().into(),
            mass: SHIPPED_MASS,
            volume: (weight + SHIPPED_NET_BUOYANCY) / (FRESH_WATER_DENSITY * GRAVITY),
            metacentric_height: self.metacentric_height(),
            gravity: GRAVITY,
            water_density: FRESH_WATER_DENSITY,
            inertia_roll: 0.25,
            inertia_yaw: 0.40,
            damping: AxisDamping {
                surge: Damping::quadratic(6.0),
                heave: Damping::quadratic(HEAVE_QUADRATIC_DRAG),
                roll: Damping { linear: 0.05, quadratic: 0.5 },
                yaw: Damping { linear: 0.0, quadratic: YAW_QUADRATIC_DRAG },
            },
            thrusters,
            gains: DEFAULT_GAINS,
        }
    }
}

/// Heave drag tuned against the full-thrust descent rate of configuration 3.
pub const HEAVE_QUADRATIC_DRAG: f64 = 1150.0;
/// Yaw drag tuned against the full-thrust turn rate of configuration 3.
pub const YAW_QUADRATIC_DRAG: f64 = 5.36;
/// Heave jet impinging on the antenna in configuration 1.
pub const CFG1_HEAVE_EFFICIENCY: f64 = 0.4027;

pub const DEFAULT_GAINS: ControlGains = ControlGains {
    depth_kp: 800.0,
    depth_kd: 200.0,
    roll_kp: 4.0,
    roll_kd: 1.5,
    yaw_kp: 3.0,
    yaw_kd: 2.0,
    surge_kp: 20.0,
};

impl VehicleParams {
    pub fn validate(&self) -> Result<(), VehicleError> {
        if self.mass.is_nan() || self.mass <= 0.0 {
            return Err(VehicleError::NonPositiveMass(self.mass));
        }
        if self.thrusters.is_empty() {
            return Err(VehicleError::NoThrusters);
        }
        Ok(())
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    pub fn buoyancy(&self) -> f64 {
        self.water_density * self.volume * self.gravity
    }

    /// B − W; positive floats.
    pub fn net_buoyancy(&self) -> f64 {
        self.buoyancy() - self.weight()
    }

    /// Downward force that cancels net buoyancy.
    pub fn trim_force(&self) -> f64 {
        self.net_buoyancy()
    }
}

/// Per-thruster commanded force, N.
#[derive(Clone, Debug, PartialEq)]
pub struct ThrustAllocation(pub Vec<f64>);

impl ThrustAllocation {
    pub fn zero(params: &VehicleParams) -> Self {
        ThrustAllocation(vec![0.0; params.thrusters.len()])
    }

    pub fn forces(&self) -> &[f64] {
        &self.0
    }

    pub fn within_limits(&self, params: &VehicleParams) -> bool {
        self.0.iter().zip(&params.thrusters).all(|(f, t)| f.abs() <= t.max_thrust + 1e-12)
    }
}

/// M = W·h·sin θ. Positive `h` opposes the displacement.
pub fn restoring_moment(params: &VehicleParams, theta: f64) -> f64 {
    params.weight() * params.metacentric_height * libm::sin(theta)
}

/// Small-angle form W·h·θ.
pub fn restoring_moment_linear(params: &VehicleParams, theta: f64) -> f64 {
    params.weight() * params.metacentric_height * theta
}

/// 6 × N thruster configuration matrix; column i is [f_i ; r_i × f_i].
pub fn controllability_matrix(params: &VehicleParams) -> Matrix {
    let cols: Vec<Vec<f64>> = params.thrusters.iter().map(|t| t.column().to_vec()).collect();
    Matrix::from_columns(6, &cols)
}

/// Singular values above `tol` × the largest.
pub fn controllability_rank(b: &Matrix, tol: f64) -> usize {
    assert!(tol > 0.0, "rank tolerance must be positive");
    numerical_rank(b, tol)
}

/// Generalized force [X, Y, Z, K, M, N] produced by an allocation.
pub fn wrench(params: &VehicleParams, alloc: &ThrustAllocation) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (t, &f) in params.thrusters.iter().zip(alloc.forces()) {
        let col = t.column();
        for i in 0..6 {
            out[i] += col[i] * f * t.efficiency;
        }
    }
    out
}

/// Least-squares thruster forces for a desired wrench, each clipped to its
/// limit.
pub fn allocate(params: &VehicleParams, desired: [f64; 6]) -> ThrustAllocation {
    let cols: Vec<Vec<f64>> = params
        .thrusters
        .iter()
        .map(|t| t.column().iter().map(|c| c * t.efficiency).collect())
        .collect();
    let pinv = Matrix::from_columns(6, &cols).pseudo_inverse(1e-9);
    let forces = pinv
        .mul_vec(&desired)
        .into_iter()
        .zip(&params.thrusters)
        .map(|(f, t)| f.clamp(-t.max_thrust, t.max_thrust))
        .collect();
    ThrustAllocation(forces)
}

/// Implicit velocity update under force `f` and damping, stable for any dt.
#[inline]
fn damped_update(v: f64, f: f64, inertia: f64, d: Damping, dt: f64) -> f64 {
    (v + dt * f / inertia) / (1.0 + dt * (d.linear + d.quadratic * v.abs()) / inertia)
}

pub fn wrap_angle(a: f64) -> f64 {
    let mut a = libm::fmod(a + PI, 2.0 * PI);
    if a <= 0.0 {
        a += 2.0 * PI;
    }
    a - PI
}

/// Semi-implicit Euler step: velocities first (drag implicit), then pose.
pub fn step_dynamics(state: &VehicleState, alloc: &ThrustAllocation, params: &VehicleParams, dt: f64) -> VehicleState {
    debug_assert!(dt > 0.0 && dt <= MAX_DT);
    let tau = wrench(params, alloc);
    let d = &params.damping;
    let mut s = *state;

    s.u = damped_update(s.u, tau[0], params.mass, d.surge, dt);
    let heave_force = tau[2] - params.net_buoyancy();
    s.w = damped_update(s.w, heave_force, params.mass, d.heave, dt);
    let roll_moment = tau[3] - restoring_moment(params, s.roll);
    s.p = damped_update(s.p, roll_moment, params.inertia_roll, d.roll, dt);
    s.r = damped_update(s.r, tau[5], params.inertia_yaw, d.yaw, dt);

    s.roll += dt * s.p;
    s.yaw = wrap_angle(s.yaw + dt * s.r);
    s.x += dt * s.u * libm::cos(s.yaw);
    s.y += dt * s.u * libm::sin(s.yaw);
    s.z += dt * s.w;
    if s.z <= 0.0 {
        s.z = 0.0;
        s.w = s.w.max(0.0);
    }
    s.time = state.time + dt;
    s
}

/// Vertical force command: trim + Kp·(target − z) − Kd·w.
pub fn depth_command(state: &VehicleState, target_depth: f64, params: &VehicleParams) -> f64 {
    let g = &params.gains;
    params.trim_force() + g.depth_kp * (target_depth - state.z) - g.depth_kd * state.w
}

/// Roll moment command from the attitude damping loop.
pub fn roll_command(state: &VehicleState, params: &VehicleParams) -> f64 {
    -params.gains.roll_kp * state.roll - params.gains.roll_kd * state.p
}

/// Heave and roll thrust for holding `target_depth`.
pub fn pd_depth_control(state: &VehicleState, target_depth: f64, params: &VehicleParams) -> ThrustAllocation {
    let z = depth_command(state, target_depth, params);
    let k = roll_command(state, params);
    allocate(params, [0.0, 0.0, z, k, 0.0, 0.0])
}

/// Mean yaw rate (deg/s, unwrapped) and heave rate (mm/s) over a log.
pub fn maneuver_metrics(log: &[VehicleState]) -> Result<(f64, f64), VehicleError> {
    if log.len() < 2 {
        return Err(VehicleError::ShortLog(log.len()));
    }
    let first = log[0];
    let last = log[log.len() - 1];
    let dt = last.time - first.time;
    if dt <= 0.0 {
        return Err(VehicleError::ZeroDuration);
    }
    let dpsi: f64 = log.windows(2).map(|w| wrap_angle(w[1].yaw - w[0].yaw)).sum();
    let yaw_rate = dpsi.to_degrees() / dt;
    let heave_rate = (last.z - first.z) * 1000.0 / dt;
    Ok((yaw_rate, heave_rate))
}

/// Descend from the surface at full heave thrust until `target` depth;
/// returns the log. Gives up after `max_time`.
pub fn full_thrust_descent(params: &VehicleParams, target: f64, dt: f64, max_time: f64) -> Vec<VehicleState> {
    let alloc = ThrustAllocation(
        params.thrusters.iter().map(|t| if t.direction[2] > 0.5 { t.max_thrust } else { 0.0 }).collect(),
    );
    let mut s = VehicleState::default();
    let mut log = vec![s];
    while s.z < target && s.time < max_time {
        s = step_dynamics(&s, &alloc, params, dt);
        log.push(s);
    }
    log
}

/// Spin at full differential surge thrust at constant depth for `duration`.
pub fn full_thrust_turn(params: &VehicleParams, depth: f64, dt: f64, duration: f64) -> Vec<VehicleState> {
    let yaw_only = allocate(params, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0e3]);
    let mut s = VehicleState { z: depth, ..Default::default() };
    let mut log = vec![s];
    while s.time < duration - 1e-9 {
        let depth_alloc = pd_depth_control(&s, depth, params);
        let combined = ThrustAllocation(
            yaw_only
                .forces()
                .iter()
                .zip(depth_alloc.forces())
                .zip(&params.thrusters)
                .map(|((a, b), t)| (a + b).clamp(-t.max_thrust, t.max_thrust))
                .collect(),
        );
        s = step_dynamics(&s, &combined, params, dt);
        log.push(s);
    }
    log
}

/// Step response bounds of a depth trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepResponse {
    /// First time the depth enters the ±band around the target.
    pub reach_time: Option<f64>,
    /// Time after which the depth never leaves the band.
    pub settle_time: Option<f64>,
    /// Max |error| after settling.
    pub steady_error: f64,
    /// Peak overshoot past the target, as a fraction of the step.
    pub overshoot: f64,
}

pub fn step_response(log: &[VehicleState], start_depth: f64, target: f64, band: f64) -> StepResponse {
    let step = (target - start_depth).abs();
    let dir = (target - start_depth).signum();
    let reach_time = log.iter().find(|s| (s.z - target).abs() <= band).map(|s| s.time);
    let last_out = log.iter().rposition(|s| (s.z - target).abs() > band);
    let settle_idx = match last_out {
        None => Some(0),
        Some(i) if i + 1 < log.len() => Some(i + 1),
        Some(_) => None,
    };
    let settle_time = settle_idx.map(|i| log[i].time);
    let steady_error = settle_idx.map_or(f64::INFINITY, |i| log[i..].iter().map(|s| (s.z - target).abs()).fold(0.0, f64::max));
    let overshoot = log.iter().map(|s| dir * (s.z - target)).fold(0.0, f64::max) / step.max(f64::MIN_POSITIVE);
    StepResponse { reach_time, settle_time, steady_error, overshoot }
}

/// Closed-loop depth hold from `start` for `duration` seconds.
pub fn simulate_depth_step(params: &VehicleParams, start: VehicleState, target: f64, dt: f64, duration: f64) -> Vec<VehicleState> {
    let mut s = start;
    let mut log = vec![s];
    let end = start.time + duration;
    while s.time < end - 1e-9 {
        let alloc = pd_depth_control(&s, target, params);
        s = step_dynamics(&s, &alloc, params, dt);
        log.push(s);
    }
    log
}

/// Zero-thrust roll response from an initial roll angle.
pub fn passive_roll(params: &VehicleParams, initial_roll: f64, dt: f64, duration: f64) -> Vec<VehicleState> {
    let neutral = VehicleParams { volume: params.weight() / (params.water_density * params.gravity), ..params.clone() };
    let zero = ThrustAllocation::zero(params);
    let mut s = VehicleState { z: 1.0, roll: initial_roll, ..Default::default() };
    let mut log = vec![s];
    while s.time < duration - 1e-9 {
        s = step_dynamics(&s, &zero, &neutral, dt);
        log.push(s);
    }
    log
}
