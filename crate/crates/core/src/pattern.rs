//! Waypoint plans for the eight mission patterns.
//!
//! Plans are built in a pattern frame (x forward, y to port, positive turns
//! toward +y) and then placed at the vehicle pose. Patterns without a heading
//! parameter take the vehicle's yaw as their x axis; `straight` and `hover`
//! use the commanded heading, measured from the mission frame's x axis.
//!
//! Conventions:
//! - `dir` 1 (CCW) keeps the pattern interior on the left, 0 (CW) on the right.
//! - Square: the vehicle is the first corner, the first side runs forward.
//! - Circle / helix: the vehicle sits on the circle, initially tangent to it.
//! - Spiral: centred on the vehicle, first point `initial-radius` ahead.
//! - Box orbit: square with half-diagonal `radius`, centred `radius` ahead, so
//!   the vehicle is the rear corner.
//! - Lawnmower: rows along x of length `width`, stacked toward +y over
//!   `height`; later laps sweep the rows back in reverse order.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::codec::{MissionCommand, PatternType, QuantTable};
use crate::error::PatternError;
use crate::vehicle::VehicleState;

/// Angular step used on every curved path.
pub const ARC_STEP_DEG: f64 = 15.0;
pub const STEPS_PER_TURN: usize = 24;
pub const DEFAULT_ROW_SPACING: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    /// Positive down.
    pub depth: f64,
    /// Cruise speed toward this waypoint, m/s.
    pub speed: f64,
    /// Degrees, mission frame.
    pub heading_hint: Option<f64>,
    /// Station-keeping time after arrival, s.
    pub hold: f64,
}

impl Waypoint {
    pub fn horizontal_distance(&self, x: f64, y: f64) -> f64 {
        libm::hypot(self.x - x, self.y - y)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WaypointPlan {
    pub pattern: PatternType,
    pub waypoints: Vec<Waypoint>,
    pub closed: bool,
    pub est_duration: f64,
}

impl WaypointPlan {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// 3D polyline length.
    pub fn path_length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| segment_length(&w[0], &w[1])).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatternConfig {
    /// Upper bound on lawnmower row spacing, m.
    pub row_spacing: f64,
}

impl Default for PatternConfig {
    fn default() -> Self {
        PatternConfig { row_spacing: DEFAULT_ROW_SPACING }
    }
}

fn segment_length(a: &Waypoint, b: &Waypoint) -> f64 {
    let (dx, dy, dz) = (b.x - a.x, b.y - a.y, b.depth - a.depth);
    libm::sqrt(dx * dx + dy * dy + dz * dz)
}

/// Path length over cruise speed plus all hold times.
pub fn estimate_duration(plan: &WaypointPlan) -> Result<f64, PatternError> {
    let mut total: f64 = plan.waypoints.iter().map(|w| w.hold).sum();
    for w in plan.waypoints.windows(2) {
        let len = segment_length(&w[0], &w[1]);
        if len == 0.0 {
            continue;
        }
        if w[1].speed <= 0.0 {
            return Err(PatternError::ZeroSpeed);
        }
        total += len / w[1].speed;
    }
    Ok(total)
}

pub fn generate_waypoints(cmd: &MissionCommand, origin: &VehicleState, table: &QuantTable) -> Result<WaypointPlan, PatternError> {
    generate_waypoints_with(cmd, origin, table, &PatternConfig::default())
}

struct Params<'a> {
    cmd: &'a MissionCommand,
    table: &'a QuantTable,
}

impl Params<'_> {
    fn get(&self, key: &'static str) -> Result<f64, PatternError> {
        self.cmd.value(key, self.table).ok_or(PatternError::MissingParam(key))
    }

    /// +1 for CCW, −1 for CW.
    fn turn(&self) -> Result<f64, PatternError> {
        Ok(if self.get("dir")? >= 0.5 { 1.0 } else { -1.0 })
    }

    fn count(&self, key: &'static str) -> Result<usize, PatternError> {
        Ok(libm::round(self.get(key)?) as usize)
    }
}

/// Local-frame point (x, y, depth).
type Pt = (f64, f64, f64);

fn arc(center: (f64, f64), radius: f64, start_angle: f64, turn: f64, steps: usize) -> impl Iterator<Item = (f64, f64)> {
    let step = turn * ARC_STEP_DEG.to_radians();
    (0..=steps).map(move |i| {
        let a = start_angle + step * i as f64;
        (center.0 + radius * libm::cos(a), center.1 + radius * libm::sin(a))
    })
}

pub fn generate_waypoints_with(
    cmd: &MissionCommand,
    origin: &VehicleState,
    table: &QuantTable,
    config: &PatternConfig,
) -> Result<WaypointPlan, PatternError> {
    let p = Params { cmd, table };
    let pattern = cmd.pattern();
    let mut frame_yaw = origin.yaw;
    let mut speed = 0.0;
    let mut hold = 0.0;
    let mut heading_hint = None;
    let mut closed = false;
    let pts: Vec<Pt> = match pattern {
        PatternType::Straight => {
            speed = p.get("speed")?;
            let depth = p.get("depth")?;
            let heading = p.get("heading")?;
            frame_yaw = heading.to_radians();
            heading_hint = Some(heading);
            let len = speed * p.get("duration")?;
            if len <= 0.0 {
                return Err(if speed <= 0.0 { PatternError::ZeroSpeed } else { PatternError::Degenerate("zero-length leg") });
            }
            alloc::vec![(0.0, 0.0, depth), (len, 0.0, depth)]
        }
        PatternType::Square => {
            speed = p.get("speed")?;
            let depth = p.get("depth")?;
            let s = p.get("side")?;
            let d = p.turn()?;
            if s <= 0.0 {
                return Err(PatternError::Degenerate("zero side span"));
            }
            closed = true;
            alloc::vec![(0.0, 0.0, depth), (s, 0.0, depth), (s, d * s, depth), (0.0, d * s, depth)]
        }
        PatternType::Lawnmower => {
            speed = p.get("speed")?;
            let depth = p.get("depth")?;
            let width = p.get("width")?;
            let height = p.get("height")?;
            let laps = p.count("laps")?;
            if width <= 0.0 {
                return Err(PatternError::Degenerate("zero grid width"));
            }
            if laps == 0 {
                return Err(PatternError::Degenerate("zero laps"));
            }
            let rows = lawnmower_rows(height, config.row_spacing);
            let row_y = |j: usize| if rows == 1 { 0.0 } else { height * j as f64 / (rows - 1) as f64 };
            let mut pts: Vec<Pt> = Vec::new();
            let mut forward = true;
            for lap in 0..laps {
                let order: Vec<usize> = if lap % 2 == 0 { (0..rows).collect() } else { (0..rows).rev().collect() };
                for j in order {
                    let y = row_y(j);
                    let (a, b) = if forward { (0.0, width) } else { (width, 0.0) };
                    for pt in [(a, y, depth), (b, y, depth)] {
                        if pts.last() != Some(&pt) {
                            pts.push(pt);
                        }
                    }
                    forward = !forward;
                }
            }
            pts
        }
        PatternType::Circle => {
            speed = p.get("speed")?;
            let depth = p.get("depth")?;
            let r = p.get("radius")?;
            let d = p.turn()?;
            if r <= 0.0 {
                return Err(PatternError::Degenerate("zero radius"));
            }
            closed = true;
            arc((0.0, d * r), r, -d * PI / 2.0, d, STEPS_PER_TURN - 1).map(|(x, y)| (x, y, depth)).collect()
        }
        PatternType::Spiral => {
            speed = p.get("speed")?;
            let depth = p.get("depth")?;
            let r0 = p.get("initial-radius")?;
            let r1 = p.get("final-radius")?;
            let loops = p.count("loops")?;
            let d = p.turn()?;
            if loops == 0 {
                return Err(PatternError::Degenerate("zero loops"));
            }
            if r0 <= 0.0 && r1 <= 0.0 {
                return Err(PatternError::Degenerate("zero radius"));
            }
            let steps = loops * STEPS_PER_TURN;
            let step = ARC_STEP_DEG.to_radians();
            (0..=steps)
                .map(|i| {
                    let f = i as f64 / steps as f64;
                    let r = if i == steps { r1 } else { r0 + (r1 - r0) * f };
                    let a = d * step * i as f64;
                    (r * libm::cos(a), r * libm::sin(a), depth)
                })
                .collect()
        }
        PatternType::Helix => {
            speed = p.get("speed")?;
            let z0 = p.get("start-depth")?;
            let z1 = p.get("end-depth")?;
            let r = p.get("radius")?;
            let turns = p.count("turns")?;
            let d = p.turn()?;
            if r <= 0.0 {
                return Err(PatternError::Degenerate("zero radius"));
            }
            if turns == 0 {
                return Err(PatternError::Degenerate("zero turns"));
            }
            let steps = turns * STEPS_PER_TURN;
            arc((0.0, d * r), r, -d * PI / 2.0, d, steps)
                .enumerate()
                .map(|(i, (x, y))| {
                    let z = match i {
                        0 => z0,
                        i if i == steps => z1,
                        i => z0 + (z1 - z0) * i as f64 / steps as f64,
                    };
                    (x, y, z)
                })
                .collect()
        }
        PatternType::Hover => {
            let depth = p.get("depth")?;
            let heading = p.get("heading")?;
            hold = p.get("duration")?;
            heading_hint = Some(heading);
            alloc::vec![(0.0, 0.0, depth)]
        }
        PatternType::BoxOrbit => {
            speed = p.get("speed")?;
            let depth = p.get("depth")?;
            let r = p.get("radius")?;
            let d = p.turn()?;
            let laps = p.count("laps")?;
            if r <= 0.0 {
                return Err(PatternError::Degenerate("zero radius"));
            }
            if laps == 0 {
                return Err(PatternError::Degenerate("zero laps"));
            }
            closed = true;
            let corners = [(0.0, 0.0), (r, -d * r), (2.0 * r, 0.0), (r, d * r)];
            (0..4 * laps).map(|i| (corners[i % 4].0, corners[i % 4].1, depth)).collect()
        }
    };
    if pattern != PatternType::Hover && speed <= 0.0 {
        return Err(PatternError::ZeroSpeed);
    }

    let (s, c) = (libm::sin(frame_yaw), libm::cos(frame_yaw));
    let mut waypoints: Vec<Waypoint> = pts
        .into_iter()
        .map(|(lx, ly, depth)| Waypoint {
            x: origin.x + c * lx - s * ly,
            y: origin.y + s * lx + c * ly,
            depth,
            speed,
            heading_hint,
            hold: 0.0,
        })
        .collect();
    if closed {
        let first = waypoints[0];
        waypoints.push(first);
    }
    if let Some(last) = waypoints.last_mut() {
        last.hold = hold;
    }
    let mut plan = WaypointPlan { pattern, waypoints, closed, est_duration: 0.0 };
    plan.est_duration = estimate_duration(&plan)?;
    Ok(plan)
}

/// Rows needed so that spacing never exceeds `spacing`.
pub fn lawnmower_rows(height: f64, spacing: f64) -> usize {
    if height <= 0.0 {
        return 1;
    }
    let spacing = if spacing > 0.0 { spacing } else { DEFAULT_ROW_SPACING };
    libm::ceil(height / spacing - 1e-9) as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cmd(pattern: PatternType, values: &[(&str, f64)]) -> MissionCommand {
        MissionCommand::from_physical(pattern, values, &QuantTable::default()).unwrap()
    }

    fn plan(pattern: PatternType, values: &[(&str, f64)]) -> WaypointPlan {
        generate_waypoints(&cmd(pattern, values), &VehicleState::default(), &QuantTable::default()).unwrap()
    }

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
    }

    #[test]
    fn square_corners() {
        let p = plan(PatternType::Square, &[("speed", 0.5), ("depth", 0.5), ("side", 10.0), ("dir", 1.0)]);
        let xy: Vec<(f64, f64)> = p.waypoints.iter().map(|w| (w.x, w.y)).collect();
        assert_eq!(xy, vec![(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0), (0.0, 0.0)]);
        assert!(p.closed);
        assert!((p.est_duration - 80.0).abs() < 1e-12);
        assert!(p.waypoints.iter().all(|w| w.depth == 0.5 && w.speed == 0.5));
    }

    #[test]
    fn straight_and_hover() {
        let p = plan(PatternType::Straight, &[("speed", 1.0), ("depth", 1.0), ("duration", 10.0), ("heading", 90.0)]);
        assert_eq!(p.len(), 2);
        assert!(close((p.waypoints[1].x, p.waypoints[1].y), (0.0, 10.0)));
        assert!((p.est_duration - 10.0).abs() < 1e-12);
        assert!(!p.closed);

        let h = plan(PatternType::Hover, &[("duration", 120.0), ("depth", 1.0), ("heading", 90.0)]);
        assert_eq!(h.len(), 1);
        assert_eq!(h.est_duration, 120.0);
        assert_eq!(h.waypoints[0].heading_hint, Some(90.0));
    }

    #[test]
    fn circle_on_radius() {
        for dir in [0.0, 1.0] {
            let p = plan(PatternType::Circle, &[("speed", 0.5), ("depth", 1.0), ("radius", 7.5), ("dir", dir)]);
            let cy = if dir == 1.0 { 7.5 } else { -7.5 };
            assert_eq!(p.len(), STEPS_PER_TURN + 1);
            for w in &p.waypoints {
                assert!((libm::hypot(w.x, w.y - cy) - 7.5).abs() < 1e-12);
            }
            assert_eq!(p.waypoints[0], *p.waypoints.last().unwrap());
        }
    }

    #[test]
    fn helix_depths() {
        let p = plan(
            PatternType::Helix,
            &[("speed", 0.5), ("start-depth", 1.0), ("end-depth", 3.0), ("radius", 5.0), ("turns", 4.0), ("dir", 1.0)],
        );
        assert_eq!(p.waypoints[0].depth, 1.0);
        assert_eq!(p.waypoints.last().unwrap().depth, 3.0);
        assert!(p.waypoints.windows(2).all(|w| w[1].depth > w[0].depth));
        assert_eq!(p.len(), 4 * STEPS_PER_TURN + 1);
        assert!(!p.closed);
    }

    #[test]
    fn spiral_radius_monotone() {
        let p = plan(
            PatternType::Spiral,
            &[("speed", 0.5), ("depth", 2.0), ("initial-radius", 1.0), ("final-radius", 10.0), ("loops", 3.0), ("dir", 0.0)],
        );
        let r: Vec<f64> = p.waypoints.iter().map(|w| libm::hypot(w.x, w.y)).collect();
        assert!(r.windows(2).all(|w| w[1] >= w[0]));
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[r.len() - 1] - 10.0).abs() < 1e-12);
        assert!(p.waypoints.iter().all(|w| w.depth == 2.0));
    }

    #[test]
    fn lawnmower_rows_alternate() {
        let p = plan(PatternType::Lawnmower, &[("speed", 0.5), ("depth", 1.0), ("width", 10.0), ("height", 4.0), ("laps", 1.0)]);
        let rows = lawnmower_rows(4.0, DEFAULT_ROW_SPACING);
        assert_eq!(rows, 9);
        assert_eq!(p.len(), 2 * rows);
        for (j, seg) in p.waypoints.chunks(2).enumerate() {
            assert_eq!(seg[0].y, seg[1].y);
            assert!((seg[0].y - 4.0 * j as f64 / 8.0).abs() < 1e-12);
            let dx = seg[1].x - seg[0].x;
            assert_eq!(dx, if j % 2 == 0 { 10.0 } else { -10.0 });
        }
    }

    #[test]
    fn lawnmower_second_lap_reverses() {
        let p = plan(PatternType::Lawnmower, &[("speed", 0.5), ("depth", 1.0), ("width", 6.0), ("height", 1.0), ("laps", 2.0)]);
        let ys: Vec<f64> = p.waypoints.iter().map(|w| w.y).collect();
        assert_eq!(ys, vec![0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0, 0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn box_orbit_half_diagonal() {
        let p = plan(PatternType::BoxOrbit, &[("speed", 0.5), ("depth", 1.0), ("radius", 4.0), ("dir", 1.0), ("laps", 2.0)]);
        assert_eq!(p.len(), 9);
        for w in &p.waypoints {
            assert!((libm::hypot(w.x - 4.0, w.y) - 4.0).abs() < 1e-12);
        }
        let side = libm::hypot(p.waypoints[1].x - p.waypoints[0].x, p.waypoints[1].y - p.waypoints[0].y);
        assert!((side - 4.0 * core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_commands() {
        let t = QuantTable::default();
        let o = VehicleState::default();
        let bad = [
            cmd(PatternType::Circle, &[("speed", 0.5), ("depth", 1.0), ("radius", 0.0), ("dir", 1.0)]),
            cmd(PatternType::Square, &[("speed", 0.0), ("depth", 1.0), ("side", 3.0), ("dir", 1.0)]),
            cmd(PatternType::Lawnmower, &[("speed", 0.5), ("depth", 1.0), ("width", 0.0), ("height", 4.0), ("laps", 1.0)]),
            cmd(PatternType::Lawnmower, &[("speed", 0.5), ("depth", 1.0), ("width", 3.0), ("height", 4.0), ("laps", 0.0)]),
            cmd(PatternType::Straight, &[("speed", 0.0), ("depth", 1.0), ("duration", 10.0), ("heading", 0.0)]),
        ];
        for c in bad {
            assert!(generate_waypoints(&c, &o, &t).is_err(), "{c:?}");
        }
    }

    #[test]
    fn anchored_at_pose() {
        let c = cmd(PatternType::Square, &[("speed", 0.5), ("depth", 0.5), ("side", 10.0), ("dir", 1.0)]);
        let o = VehicleState::at(3.0, -2.0, 0.0, PI / 2.0);
        let p = generate_waypoints(&c, &o, &QuantTable::default()).unwrap();
        assert!(close((p.waypoints[0].x, p.waypoints[0].y), (3.0, -2.0)));
        assert!(close((p.waypoints[1].x, p.waypoints[1].y), (3.0, 8.0)));
        assert!(close((p.waypoints[2].x, p.waypoints[2].y), (-7.0, 8.0)));
    }

    mod props {
        use super::*;
        use crate::codec::tests::props::command;
        use proptest::prelude::*;

        fn pose() -> impl Strategy<Value = VehicleState> {
            (-50.0..50.0f64, -50.0..50.0f64, -PI..PI).prop_map(|(x, y, yaw)| VehicleState::at(x, y, 0.0, yaw))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(500))]

            #[test]
            fn plan_invariants(c in command(), o in pose()) {
                let t = QuantTable::default();
                let Ok(p) = generate_waypoints(&c, &o, &t) else { return Ok(()) };
                prop_assert!(!p.is_empty());
                prop_assert!(p.waypoints.iter().all(|w| w.depth >= 0.0 && w.speed >= 0.0));
                if p.closed {
                    let (a, b) = (p.waypoints[0], *p.waypoints.last().unwrap());
                    prop_assert!(libm::hypot(a.x - b.x, a.y - b.y) <= 1e-9);
                }
                prop_assert_eq!(p.closed, matches!(c.pattern(), PatternType::Square | PatternType::Circle | PatternType::BoxOrbit));
                if !matches!(c.pattern(), PatternType::Helix) {
                    let d = c.value("depth", &t).unwrap();
                    prop_assert!(p.waypoints.iter().all(|w| w.depth == d));
                }
            }

            #[test]
            fn cw_ccw_mirror(c in command()) {
                let t = QuantTable::default();
                let Some(i) = c.pattern().slot_index("dir") else { return Ok(()) };
                let mut raw = c.raw_params();
                raw[i] = 0;
                let cw = MissionCommand::new(c.pattern(), raw, &t).unwrap();
                raw[i] = 1;
                let ccw = MissionCommand::new(c.pattern(), raw, &t).unwrap();
                let o = VehicleState::default();
                let (Ok(a), Ok(b)) = (generate_waypoints(&cw, &o, &t), generate_waypoints(&ccw, &o, &t)) else { return Ok(()) };
                prop_assert_eq!(a.len(), b.len());
                for (p, q) in a.waypoints.iter().zip(&b.waypoints) {
                    prop_assert!((p.x - q.x).abs() < 1e-9 && (p.y + q.y).abs() < 1e-9);
                }
            }
        }
    }
}
