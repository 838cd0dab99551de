//! Longitudinal vehicle kinematics on single-lane edges: Krauss safe-speed
//! car following, bounded speed updates, and halting for signals and
//! container stops.
//!
//! All functions here are pure over a read-only snapshot. The engine calls
//! them for every vehicle against the pre-step state and applies the results
//! afterwards, so the iteration order never matters.

use std::collections::HashMap;

use serde::Serialize;

use crate::net_model::{LightState, Network};
use crate::scenario_io::VehicleTypeSpec;

/// Longest vehicle the leader search accounts for, m.
const MAX_VEHICLE_LENGTH: f64 = 50.0;

/// Speeds below this count as standing still.
pub const HALTING_SPEED: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KraussParams {
    /// Reaction time, s.
    pub tau: f64,
    /// Deceleration assumed when computing safe speeds, m/s².
    pub decel_b: f64,
    /// Driver imperfection in [0, 1].
    pub sigma: f64,
}

impl Default for KraussParams {
    fn default() -> Self {
        KraussParams {
            tau: 1.0,
            decel_b: 4.5,
            sigma: 0.0,
        }
    }
}

impl KraussParams {
    /// The parameters as applied to one vehicle: a safe speed is only safe
    /// if the vehicle can actually brake at the assumed rate.
    pub fn for_vehicle(&self, vtype: &VehicleTypeSpec) -> KraussParams {
        KraussParams {
            decel_b: self.decel_b.min(vtype.decel),
            ..*self
        }
    }
}

/// Highest speed that still lets the vehicle stop behind a leader `gap`
/// meters ahead which itself brakes from `leader_speed`.
pub fn krauss_safe_speed(gap: f64, leader_speed: f64, params: &KraussParams) -> f64 {
    let bt = params.decel_b * params.tau;
    let gap = gap.max(0.0);
    let vl = leader_speed.max(0.0);
    (-bt + (bt * bt + vl * vl + 2.0 * params.decel_b * gap).sqrt()).max(0.0)
}

/// Desired cruising speed on an edge posted at `edge_limit`: the effective
/// limit, floored by the type's minimum speed where the edge permits it.
pub fn free_flow_speed(edge_limit: f64, vtype: &VehicleTypeSpec) -> f64 {
    edge_limit
        .min(vtype.max_speed)
        .max(vtype.min_speed.min(edge_limit))
}

/// Krauss speed update. `noise` is a uniform draw in [0, 1]; it only
/// matters when `params.sigma > 0`.
pub fn step_speed(
    speed: f64,
    v_limit: f64,
    v_safe: f64,
    vtype: &VehicleTypeSpec,
    params: &KraussParams,
    dt: f64,
    noise: f64,
) -> f64 {
    let v_des = v_safe.min(v_limit).min(speed + vtype.accel * dt);
    let dawdle = params.sigma * vtype.accel * dt * noise;
    0.0f64
        .max(speed - vtype.decel * dt)
        .max(v_des - dawdle)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StopState {
    Driving,
    Dwelling { remaining: f64 },
    Done,
}

/// A container stop resolved against a vehicle's route.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledStop {
    pub id: String,
    pub route_index: usize,
    pub start_pos: f64,
    pub end_pos: f64,
    pub dwell: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: String,
    pub vtype: usize,
    pub route: Vec<String>,
    /// Lengths of `route` edges, m.
    pub edge_lengths: Vec<f64>,
    pub edge_index: usize,
    /// Front bumper offset along the current edge, m.
    pub offset: f64,
    pub speed: f64,
    pub accel_applied: f64,
    pub stop_state: StopState,
    pub stops: Vec<ScheduledStop>,
    /// Index into `stops` of the next stop not yet served.
    pub next_stop: usize,
    pub odometer: f64,
    pub departed_at: Option<f64>,
    pub arrived_at: Option<f64>,
}

impl VehicleState {
    pub fn new(
        id: impl Into<String>,
        vtype: usize,
        route: Vec<String>,
        edge_lengths: Vec<f64>,
        stops: Vec<ScheduledStop>,
    ) -> Self {
        VehicleState {
            id: id.into(),
            vtype,
            route,
            edge_lengths,
            edge_index: 0,
            offset: 0.0,
            speed: 0.0,
            accel_applied: 0.0,
            stop_state: StopState::Driving,
            stops,
            next_stop: 0,
            odometer: 0.0,
            departed_at: None,
            arrived_at: None,
        }
    }

    pub fn edge(&self) -> &str {
        &self.route[self.edge_index]
    }

    pub fn pending_stop(&self) -> Option<&ScheduledStop> {
        self.stops.get(self.next_stop)
    }

    pub fn is_dwelling(&self) -> bool {
        matches!(self.stop_state, StopState::Dwelling { .. })
    }

    pub fn route_length(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }

    /// Position as (route index, offset); arrival maps past every edge.
    pub fn route_key(&self) -> (usize, f64) {
        if self.arrived_at.is_some() {
            (self.route.len(), 0.0)
        } else {
            (self.edge_index, self.offset)
        }
    }

    /// Distance along the route from the current front position to
    /// `offset` on route edge `index` (which must not lie behind).
    pub fn distance_to(&self, index: usize, offset: f64) -> f64 {
        let mut d = -self.offset;
        for len in &self.edge_lengths[self.edge_index..index] {
            d += len;
        }
        d + offset
    }
}

/// Vehicle as seen by others during a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupant<'a> {
    pub id: &'a str,
    pub edge: &'a str,
    pub offset: f64,
    pub length: f64,
    pub speed: f64,
    /// Hardest deceleration the occupant can apply, m/s².
    pub decel: f64,
}

/// Read-only view of everything outside one vehicle that can constrain it.
pub struct Surroundings<'a> {
    pub network: &'a Network,
    pub t: f64,
    /// Occupants per edge id, sorted by offset.
    pub occupants: HashMap<&'a str, Vec<Occupant<'a>>>,
}

impl<'a> Surroundings<'a> {
    pub fn new(network: &'a Network, t: f64, occupants: impl IntoIterator<Item = Occupant<'a>>) -> Self {
        let mut by_edge: HashMap<&str, Vec<Occupant>> = HashMap::new();
        for o in occupants {
            by_edge.entry(o.edge).or_default().push(o);
        }
        for list in by_edge.values_mut() {
            list.sort_by(|a, b| a.offset.total_cmp(&b.offset).then_with(|| a.id.cmp(b.id)));
        }
        Surroundings {
            network,
            t,
            occupants: by_edge,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstacleKind {
    Vehicle,
    Signal,
    ContainerStop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    /// For vehicles: bumper-to-bumper distance minus the follower's min gap.
    /// For signals and stops: distance to the stop line / halt position.
    pub gap: f64,
    pub leader_speed: f64,
    pub kind: ObstacleKind,
}

/// Beyond this distance a standing obstacle cannot lower the safe speed
/// below what the vehicle could reach in one step anyway.
fn horizon(vtype: &VehicleTypeSpec, speed: f64, params: &KraussParams, dt: f64) -> f64 {
    let v = vtype.max_speed.max(speed + vtype.accel * dt);
    let bt = params.decel_b * params.tau;
    ((v + bt).powi(2) - bt * bt) / (2.0 * params.decel_b) + 1.0
}

/// Every constraint within the vehicle's look-ahead: the nearest vehicle
/// ahead on its route, stop lines of red (and stoppable yellow) signals,
/// and the halt position of its next pending container stop.
/// A leader that brakes harder than this vehicle can stops in
/// vl²/(2·b_l) rather than vl²/(2·b). The speed with the same stopping
/// distance at b keeps the safe-speed formula valid.
fn equivalent_leader_speed(occ: &Occupant, params: &KraussParams) -> f64 {
    if occ.decel > params.decel_b {
        occ.speed * (params.decel_b / occ.decel).sqrt()
    } else {
        occ.speed
    }
}

pub fn constraints_ahead(
    state: &VehicleState,
    vtype: &VehicleTypeSpec,
    env: &Surroundings,
    params: &KraussParams,
    dt: f64,
) -> Vec<Obstacle> {
    let mut out = Vec::new();
    if state.arrived_at.is_some() {
        return out;
    }
    let params = &params.for_vehicle(vtype);
    let reach = horizon(vtype, state.speed, params, dt);

    // leader
    let mut dist_to_start = -state.offset;
    'edges: for (k, edge) in state.route.iter().enumerate().skip(state.edge_index) {
        // a leader's tail may hang back onto the previous edge
        if dist_to_start > reach + MAX_VEHICLE_LENGTH {
            break;
        }
        if let Some(list) = env.occupants.get(edge.as_str()) {
            for occ in list {
                if occ.id == state.id {
                    continue;
                }
                if k == state.edge_index && occ.offset < state.offset {
                    continue;
                }
                if k == state.edge_index && occ.offset == state.offset && occ.id < state.id.as_str() {
                    continue;
                }
                let front = dist_to_start + occ.offset;
                out.push(Obstacle {
                    gap: front - occ.length - vtype.min_gap,
                    leader_speed: equivalent_leader_speed(occ, params),
                    kind: ObstacleKind::Vehicle,
                });
                break 'edges;
            }
        }
        dist_to_start += state.edge_lengths[k];
    }

    // signals at the downstream end of route edges
    let mut dist_to_end = -state.offset;
    for (k, edge) in state.route.iter().enumerate().skip(state.edge_index) {
        dist_to_end += state.edge_lengths[k];
        if dist_to_end > reach {
            break;
        }
        let Some(program) = env.network.signal_at_end(edge) else {
            continue;
        };
        let stop_for_it = match program.state_for(edge, env.t) {
            Some(LightState::Red) => true,
            Some(LightState::Yellow) => {
                // safe-speed driving ends each step exactly at the braking
                // distance, so allow for rounding
                state.speed * state.speed / (2.0 * params.decel_b) <= dist_to_end + 1e-6
            }
            _ => false,
        };
        if stop_for_it {
            out.push(Obstacle {
                gap: dist_to_end.max(0.0),
                leader_speed: 0.0,
                kind: ObstacleKind::Signal,
            });
        }
    }

    if state.stop_state == StopState::Driving {
        if let Some(stop) = state.pending_stop() {
            if stop.route_index >= state.edge_index {
                let gap = state.distance_to(stop.route_index, stop.end_pos);
                if gap <= reach {
                    out.push(Obstacle {
                        gap: gap.max(0.0),
                        leader_speed: 0.0,
                        kind: ObstacleKind::ContainerStop,
                    });
                }
            }
        }
    }
    out
}

/// The nearest constraint ahead, if any.
pub fn obstacle_ahead(
    state: &VehicleState,
    vtype: &VehicleTypeSpec,
    env: &Surroundings,
    params: &KraussParams,
    dt: f64,
) -> Option<Obstacle> {
    constraints_ahead(state, vtype, env, params, dt)
        .into_iter()
        .min_by(|a, b| a.gap.total_cmp(&b.gap))
}

/// Next speed for a vehicle against the snapshot `env`.
pub fn next_speed(
    state: &VehicleState,
    vtype: &VehicleTypeSpec,
    env: &Surroundings,
    params: &KraussParams,
    dt: f64,
    noise: f64,
) -> f64 {
    if state.is_dwelling() || state.arrived_at.is_some() {
        return 0.0;
    }
    let v_limit = env
        .network
        .edge(state.edge())
        .map(|e| free_flow_speed(e.speed_limit, vtype))
        .unwrap_or(vtype.max_speed);
    let b = params.for_vehicle(vtype);
    let v_safe = constraints_ahead(state, vtype, env, params, dt)
        .iter()
        .map(|o| krauss_safe_speed(o.gap, o.leader_speed, &b))
        .fold(f64::INFINITY, f64::min);
    step_speed(state.speed, v_limit, v_safe, vtype, params, dt, noise)
}

/// What happened to a vehicle while advancing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Advance {
    Moved,
    StartedDwell,
    Dwelled,
    FinishedDwell,
    Arrived,
}

/// Move the vehicle by `v_next·dt` along its route, counting down dwells,
/// starting a dwell when it comes to rest inside its pending container
/// stop, and marking arrival at the route end. `t_next` is the clock after
/// this step.
pub fn advance_position(
    state: &mut VehicleState,
    v_next: f64,
    dt: f64,
    decel: f64,
    t_next: f64,
) -> Advance {
    let prev_speed = state.speed;
    if let StopState::Dwelling { remaining } = state.stop_state {
        let remaining = remaining - dt;
        state.speed = 0.0;
        state.accel_applied = (0.0 - prev_speed) / dt;
        if remaining <= 1e-9 {
            state.stop_state = StopState::Driving;
            state.next_stop += 1;
            return Advance::FinishedDwell;
        }
        state.stop_state = StopState::Dwelling { remaining };
        return Advance::Dwelled;
    }
    if state.arrived_at.is_some() {
        return Advance::Arrived;
    }

    let mut travel = v_next * dt;
    let mut speed = v_next;
    let mut outcome = Advance::Moved;

    // never run past the halt position of a pending stop
    if let Some(stop) = state.pending_stop() {
        if stop.route_index >= state.edge_index {
            let to_halt = state.distance_to(stop.route_index, stop.end_pos).max(0.0);
            if travel >= to_halt {
                travel = to_halt;
                speed = 0.0;
                outcome = Advance::StartedDwell;
            }
        }
    }

    state.offset += travel;
    state.odometer += travel;
    while state.offset > state.edge_lengths[state.edge_index] {
        if state.edge_index + 1 == state.route.len() {
            // leaves the network at the route end
            let overshoot = state.offset - state.edge_lengths[state.edge_index];
            state.odometer -= overshoot;
            state.offset = state.edge_lengths[state.edge_index];
            state.speed = v_next;
            state.accel_applied = (v_next - prev_speed) / dt;
            state.arrived_at = Some(t_next);
            state.stop_state = StopState::Done;
            return Advance::Arrived;
        }
        state.offset -= state.edge_lengths[state.edge_index];
        state.edge_index += 1;
    }
    if state.edge_index + 1 == state.route.len()
        && state.offset >= state.edge_lengths[state.edge_index]
        && state.pending_stop().is_none()
    {
        state.speed = v_next;
        state.accel_applied = (v_next - prev_speed) / dt;
        state.arrived_at = Some(t_next);
        state.stop_state = StopState::Done;
        return Advance::Arrived;
    }

    if outcome == Advance::Moved {
        if let Some(stop) = state.pending_stop() {
            if stop.route_index == state.edge_index
                && state.offset >= stop.start_pos
                && speed <= decel * dt
            {
                speed = 0.0;
                outcome = Advance::StartedDwell;
            }
        }
    }
    if outcome == Advance::StartedDwell {
        let dwell = state.pending_stop().map(|s| s.dwell).unwrap_or(0.0);
        state.stop_state = if dwell > 0.0 {
            StopState::Dwelling { remaining: dwell }
        } else {
            state.next_stop += 1;
            StopState::Driving
        };
    }
    state.speed = speed;
    state.accel_applied = (speed - prev_speed) / dt;
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_model::{build_network, Edge, Node, Phase, TrafficLightProgram};

    fn params() -> KraussParams {
        KraussParams::default()
    }

    fn truck() -> VehicleTypeSpec {
        VehicleTypeSpec::reference_single()
    }

    #[test]
    fn safe_speed_closed_form() {
        // −4.5 + sqrt(20.25 + 90)
        assert!((krauss_safe_speed(10.0, 0.0, &params()) - 6.0).abs() < 1e-12);
        assert_eq!(krauss_safe_speed(0.0, 0.0, &params()), 0.0);
        let v = krauss_safe_speed(0.0, 10.0, &params());
        assert!((v - (-4.5 + 120.25f64.sqrt())).abs() < 1e-12);
        assert!((v - 6.466).abs() < 1e-3);
        assert!(krauss_safe_speed(-3.0, 0.0, &params()) == 0.0);
    }

    #[test]
    fn free_flow_saturates_at_limit() {
        let v = step_speed(14.0, 15.0, f64::INFINITY, &truck(), &params(), 1.0, 0.7);
        assert_eq!(v, 15.0);
        let v = step_speed(0.0, 15.0, f64::INFINITY, &truck(), &params(), 1.0, 0.7);
        assert_eq!(v, 1.3);
    }

    #[test]
    fn red_light_as_standing_leader() {
        let v_safe = krauss_safe_speed(10.0, 0.0, &params());
        let mut vt = truck();
        vt.decel = 4.0;
        let v = step_speed(10.0, 13.89, v_safe, &vt, &params(), 1.0, 0.0);
        assert!(v <= 6.0 + 1e-12, "{v}");
    }

    #[test]
    fn sigma_zero_ignores_noise() {
        for noise in [0.0, 0.3, 1.0] {
            assert_eq!(step_speed(8.0, 13.89, 9.0, &truck(), &params(), 1.0, noise), 9.0);
        }
        let mut vt = truck();
        vt.sigma = 0.5;
        let p = KraussParams { sigma: 0.5, ..params() };
        assert!(step_speed(8.0, 13.89, 9.0, &vt, &p, 1.0, 1.0) < 9.0);
    }

    #[test]
    fn deceleration_is_bounded() {
        let v = step_speed(15.0, 13.89, 0.0, &truck(), &params(), 1.0, 0.0);
        assert_eq!(v, 11.0);
    }

    #[test]
    fn min_speed_floor() {
        let mut vt = truck();
        vt.min_speed = 5.0;
        assert_eq!(free_flow_speed(22.22, &vt), 15.0);
        assert_eq!(free_flow_speed(13.89, &vt), 13.89);
        assert_eq!(free_flow_speed(3.0, &vt), 3.0);
    }

    fn net_with_light(state: LightState) -> Network {
        build_network(
            vec![Node::plain("a"), Node::traffic_light("b", "p"), Node::plain("c")],
            vec![
                Edge::new("ab", "a", "b", 100.0, 13.89, 10),
                Edge::new("bc", "b", "c", 100.0, 13.89, 10),
            ],
            vec![TrafficLightProgram {
                id: "p".into(),
                offset: 0.0,
                controlled: vec!["ab".into()],
                phases: vec![Phase { duration: 60.0, states: vec![state] }],
            }],
        )
        .unwrap()
    }

    fn vehicle_at(offset: f64, speed: f64) -> VehicleState {
        let mut v = VehicleState::new(
            "f",
            0,
            vec!["ab".into(), "bc".into()],
            vec![100.0, 100.0],
            vec![],
        );
        v.offset = offset;
        v.speed = speed;
        v
    }

    #[test]
    fn green_light_nothing_ahead() {
        let net = net_with_light(LightState::Green);
        let env = Surroundings::new(&net, 0.0, []);
        assert_eq!(obstacle_ahead(&vehicle_at(75.0, 10.0), &truck(), &env, &params(), 1.0), None);
    }

    #[test]
    fn red_light_is_virtual_leader() {
        let net = net_with_light(LightState::Red);
        let env = Surroundings::new(&net, 0.0, []);
        let o = obstacle_ahead(&vehicle_at(75.0, 10.0), &truck(), &env, &params(), 1.0).unwrap();
        assert_eq!((o.gap, o.leader_speed, o.kind), (25.0, 0.0, ObstacleKind::Signal));
    }

    #[test]
    fn nearer_leader_wins() {
        let net = net_with_light(LightState::Red);
        let vt = truck();
        // leader back 8 m + min gap ahead of the follower's front
        let leader = Occupant {
            id: "l",
            edge: "ab",
            offset: 75.0 + 8.0 + vt.min_gap + 12.0,
            length: 12.0,
            speed: 5.0,
            decel: 4.0,
        };
        let env = Surroundings::new(&net, 0.0, [leader]);
        let o = obstacle_ahead(&vehicle_at(75.0, 10.0), &vt, &env, &params(), 1.0).unwrap();
        assert_eq!(o.kind, ObstacleKind::Vehicle);
        assert!((o.gap - 8.0).abs() < 1e-12);
        assert_eq!(o.leader_speed, 5.0);
        assert_eq!(constraints_ahead(&vehicle_at(75.0, 10.0), &vt, &env, &params(), 1.0).len(), 2);
    }

    #[test]
    fn yellow_proceeds_when_too_close_to_stop() {
        let net = net_with_light(LightState::Yellow);
        let env = Surroundings::new(&net, 0.0, []);
        // 13.89²/9 = 21.4 m needed
        assert!(obstacle_ahead(&vehicle_at(90.0, 13.89), &truck(), &env, &params(), 1.0).is_none());
        assert!(obstacle_ahead(&vehicle_at(70.0, 13.89), &truck(), &env, &params(), 1.0).is_some());
    }

    #[test]
    fn harder_braking_leader_looks_slower() {
        let net = net_with_light(LightState::Green);
        let mut vt = truck();
        vt.decel = 2.0;
        let leader = Occupant { id: "l", edge: "bc", offset: 20.0, length: 12.0, speed: 8.0, decel: 8.0 };
        let env = Surroundings::new(&net, 0.0, [leader]);
        let o = obstacle_ahead(&vehicle_at(90.0, 5.0), &vt, &env, &params(), 1.0).unwrap();
        // same stopping distance: 8²/(2·8) = 4²/(2·2)
        assert!((o.leader_speed - 4.0).abs() < 1e-12);
    }

    #[test]
    fn leader_on_next_edge() {
        let net = net_with_light(LightState::Green);
        let leader = Occupant { id: "l", edge: "bc", offset: 20.0, length: 12.0, speed: 3.0, decel: 4.0 };
        let env = Surroundings::new(&net, 0.0, [leader]);
        let o = obstacle_ahead(&vehicle_at(90.0, 5.0), &truck(), &env, &params(), 1.0).unwrap();
        assert!((o.gap - (10.0 + 20.0 - 12.0 - 2.5)).abs() < 1e-12);
    }

    #[test]
    fn rollover() {
        let mut v = vehicle_at(95.0, 10.0);
        assert_eq!(advance_position(&mut v, 10.0, 1.0, 4.0, 1.0), Advance::Moved);
        assert_eq!((v.edge_index, v.offset), (1, 5.0));
        assert_eq!(v.odometer, 10.0);
    }

    #[test]
    fn dwell_countdown() {
        let mut v = vehicle_at(50.0, 0.0);
        v.stop_state = StopState::Dwelling { remaining: 30.0 };
        v.stops.push(ScheduledStop {
            id: "s".into(),
            route_index: 0,
            start_pos: 40.0,
            end_pos: 60.0,
            dwell: 30.0,
        });
        assert_eq!(advance_position(&mut v, 0.0, 1.0, 4.0, 1.0), Advance::Dwelled);
        assert_eq!(v.stop_state, StopState::Dwelling { remaining: 29.0 });
        assert_eq!(v.offset, 50.0);
    }

    #[test]
    fn arrival_at_route_end() {
        let mut v = vehicle_at(95.0, 10.0);
        v.edge_index = 1;
        assert_eq!(advance_position(&mut v, 10.0, 1.0, 4.0, 42.0), Advance::Arrived);
        assert_eq!(v.arrived_at, Some(42.0));
        assert_eq!(v.stop_state, StopState::Done);
        assert_eq!(v.odometer, 5.0);
        assert_eq!(v.route_key(), (2, 0.0));
    }

    #[test]
    fn stop_clamps_at_halt_position() {
        let mut v = vehicle_at(50.0, 13.0);
        v.stops.push(ScheduledStop {
            id: "s".into(),
            route_index: 0,
            start_pos: 55.0,
            end_pos: 60.0,
            dwell: 90.0,
        });
        assert_eq!(advance_position(&mut v, 13.0, 1.0, 4.0, 1.0), Advance::StartedDwell);
        assert_eq!(v.offset, 60.0);
        assert_eq!(v.speed, 0.0);
        assert_eq!(v.stop_state, StopState::Dwelling { remaining: 90.0 });
    }

    #[test]
    fn slow_entry_into_stop_starts_dwell() {
        let mut v = vehicle_at(50.0, 5.0);
        v.stops.push(ScheduledStop {
            id: "s".into(),
            route_index: 0,
            start_pos: 52.0,
            end_pos: 80.0,
            dwell: 90.0,
        });
        assert_eq!(advance_position(&mut v, 3.0, 1.0, 4.0, 1.0), Advance::StartedDwell);
        assert_eq!(v.offset, 53.0);
        assert_eq!(v.accel_applied, -5.0);
    }
}
