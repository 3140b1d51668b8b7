//! Leader-follower formation keeping.
//!
//! The formation layer is a [`RoleGraph`]: a tree saying which UAV follows
//! which, with one [`FormationSpec`] per edge. Targets are generated by either
//! Fixed Global Difference (a world-frame offset) or Double Fixation (an offset
//! in the leader's heading frame plus a relative heading). The movement layer
//! turns a target pose into a [`ControlInput`] for the dynamics model.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, ControlInput, PidGains, UavParams, UavState};
use crate::{normalize_angle, Error, Result, Vec3};

pub type UavId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    /// Heading in `(-π, π]`.
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Vec3, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }

    pub fn of_state(state: &UavState) -> Self {
        Self::new(state.position, state.yaw())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormationMode {
    FixedGlobalDifference,
    DoubleFixation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationSpec {
    pub mode: FormationMode,
    /// World-frame `Δ` for FGD; leader-frame `(X_D, Y_D, Z_D)` for DF.
    pub offset: Vec3,
    /// `θ_D`, used by DF only.
    #[serde(default)]
    pub relative_heading: f64,
}

impl FormationSpec {
    pub fn fgd(offset: Vec3) -> Self {
        Self {
            mode: FormationMode::FixedGlobalDifference,
            offset,
            relative_heading: 0.0,
        }
    }

    pub fn df(offset: Vec3, relative_heading: f64) -> Self {
        Self {
            mode: FormationMode::DoubleFixation,
            offset,
            relative_heading: normalize_angle(relative_heading),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.offset.iter().all(|v| v.is_finite()) || !self.relative_heading.is_finite() {
            return Err(Error::domain("formation offset and relative heading must be finite"));
        }
        Ok(())
    }

    /// Dispatches on the mode.
    pub fn target(&self, leader: &Pose) -> Pose {
        match self.mode {
            FormationMode::FixedGlobalDifference => fgd_unchecked(leader, self),
            FormationMode::DoubleFixation => df_unchecked(leader, self),
        }
    }
}

fn fgd_unchecked(leader: &Pose, spec: &FormationSpec) -> Pose {
    Pose::new(leader.position + spec.offset, leader.heading)
}

fn df_unchecked(leader: &Pose, spec: &FormationSpec) -> Pose {
    let (s, c) = leader.heading.sin_cos();
    let o = spec.offset;
    let rotated = Vec3::new(c * o.x - s * o.y, s * o.x + c * o.y, o.z);
    Pose::new(leader.position + rotated, leader.heading + spec.relative_heading)
}

/// Fixed Global Difference: `(X_L + Δx, Y_L + Δy, Z_L + Δz)`, leader heading.
pub fn fgd_target(leader: &Pose, spec: &FormationSpec) -> Result<Pose> {
    if spec.mode != FormationMode::FixedGlobalDifference {
        return Err(Error::domain("fgd_target needs a FixedGlobalDifference spec"));
    }
    Ok(fgd_unchecked(leader, spec))
}

/// Double Fixation: the offset is rotated about the vertical axis by the
/// leader heading, and the follower heading is `θ_L + θ_D`.
pub fn df_target(leader: &Pose, spec: &FormationSpec) -> Result<Pose> {
    if spec.mode != FormationMode::DoubleFixation {
        return Err(Error::domain("df_target needs a DoubleFixation spec"));
    }
    Ok(df_unchecked(leader, spec))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleEdge {
    pub leader: UavId,
    pub follower: UavId,
    pub spec: FormationSpec,
}

/// Directed tree of leader-follower relations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleGraph {
    pub root: UavId,
    pub edges: Vec<RoleEdge>,
}

impl RoleGraph {
    pub fn new(root: UavId, edges: Vec<RoleEdge>) -> Result<Self> {
        let g = Self { root, edges };
        g.validate()?;
        Ok(g)
    }

    /// Star formation: every follower tracks the root directly.
    pub fn star(root: UavId, followers: impl IntoIterator<Item = (UavId, FormationSpec)>) -> Result<Self> {
        let edges = followers
            .into_iter()
            .map(|(follower, spec)| RoleEdge {
                leader: root,
                follower,
                spec,
            })
            .collect();
        Self::new(root, edges)
    }

    pub fn members(&self) -> BTreeSet<UavId> {
        std::iter::once(self.root)
            .chain(self.edges.iter().map(|e| e.follower))
            .collect()
    }

    /// Edges in breadth-first order from the root, children sorted by id.
    pub fn topological_edges(&self) -> Result<Vec<&RoleEdge>> {
        let mut seen_followers = BTreeSet::new();
        for e in &self.edges {
            e.spec.validate()?;
            if e.follower == self.root {
                return Err(Error::Structural(format!("root {} cannot be a follower", self.root)));
            }
            if e.leader == e.follower {
                return Err(Error::Structural(format!("uav {} follows itself", e.follower)));
            }
            if !seen_followers.insert(e.follower) {
                return Err(Error::Structural(format!(
                    "uav {} has more than one leader",
                    e.follower
                )));
            }
        }

        let mut children: BTreeMap<UavId, Vec<&RoleEdge>> = BTreeMap::new();
        for e in &self.edges {
            children.entry(e.leader).or_default().push(e);
        }
        for list in children.values_mut() {
            list.sort_by_key(|e| e.follower);
        }

        let mut order = Vec::with_capacity(self.edges.len());
        let mut queue = VecDeque::from([self.root]);
        while let Some(n) = queue.pop_front() {
            for e in children.get(&n).into_iter().flatten() {
                order.push(*e);
                queue.push_back(e.follower);
            }
        }
        if order.len() != self.edges.len() {
            let reached: BTreeSet<UavId> = order.iter().map(|e| e.follower).collect();
            let stray: Vec<UavId> = self
                .edges
                .iter()
                .map(|e| e.follower)
                .filter(|f| !reached.contains(f))
                .collect();
            return Err(Error::Structural(format!(
                "uavs {stray:?} are not reachable from root {} (cycle or missing leader)",
                self.root
            )));
        }
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        self.topological_edges().map(|_| ())
    }
}

/// Computes every follower's target from the root outward.
///
/// A follower whose leader is itself a follower uses that leader's computed
/// target, so only the root pose has to be supplied. Supplied poses for other
/// ids are ignored.
pub fn formation_targets(leader_poses: &BTreeMap<UavId, Pose>, roles: &RoleGraph) -> Result<BTreeMap<UavId, Pose>> {
    let order = roles.topological_edges()?;
    let root_pose = leader_poses
        .get(&roles.root)
        .ok_or_else(|| Error::Structural(format!("no pose for root {}", roles.root)))?;
    let mut resolved = BTreeMap::from([(roles.root, *root_pose)]);
    let mut targets = BTreeMap::new();
    for e in order {
        let leader = resolved[&e.leader];
        let t = e.spec.target(&leader);
        resolved.insert(e.follower, t);
        targets.insert(e.follower, t);
    }
    Ok(targets)
}

// ---------------------------------------------------------------------------
// Movement layer

/// Gains for the cascaded movement controller.
///
/// The outer loops map position error to a desired acceleration; the
/// attitude loop tracks the tilt that produces it. Defaults put the attitude
/// poles (double pole at −8) well outside the horizontal ones (−1, −2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovementGains {
    pub horizontal: PidGains,
    pub altitude: PidGains,
    pub attitude: PidGains,
    /// Limit on commanded pitch and roll, rad.
    pub max_tilt: f64,
}

impl Default for MovementGains {
    fn default() -> Self {
        Self {
            horizontal: PidGains {
                kp: 2.0,
                kd: 3.0,
                ki: 0.0,
            },
            altitude: PidGains {
                kp: 4.0,
                kd: 4.0,
                ki: 0.0,
            },
            attitude: PidGains {
                kp: 64.0,
                kd: 16.0,
                ki: 0.0,
            },
            max_tilt: 0.5,
        }
    }
}

impl MovementGains {
    pub fn with_horizontal(horizontal: PidGains) -> Self {
        Self {
            horizontal,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.horizontal.validate()?;
        self.altitude.validate()?;
        self.attitude.validate()?;
        if !(self.max_tilt > 0.0 && self.max_tilt < std::f64::consts::FRAC_PI_2) {
            return Err(Error::domain("max_tilt must lie in (0, π/2)"));
        }
        Ok(())
    }
}

/// PID terms of the horizontal position loop, kept apart for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub proportional: Vec3,
    pub derivative: Vec3,
    pub integral: Vec3,
}

impl Correction {
    pub fn total(&self) -> Vec3 {
        self.proportional + self.derivative + self.integral
    }
}

/// Position-loop correction with `z` zeroed; `error_integral` is `∫e dt`.
pub fn position_correction(
    current: &UavState,
    target: &Pose,
    target_velocity: Vec3,
    error_integral: Vec3,
    gains: &PidGains,
) -> Correction {
    let flat = |v: Vec3| Vec3::new(v.x, v.y, 0.0);
    let e = flat(target.position - current.position);
    let de = flat(target_velocity - current.velocity);
    Correction {
        proportional: e * gains.kp,
        derivative: de * gains.kd,
        integral: flat(error_integral) * gains.ki,
    }
}

fn control_law(
    current: &UavState,
    target: &Pose,
    target_velocity: Vec3,
    integral: Vec3,
    gains: &MovementGains,
    params: &UavParams,
) -> ControlInput {
    let g = params.gravity;
    let a = position_correction(current, target, target_velocity, integral, &gains.horizontal).total();

    let psi = current.yaw();
    let (s_psi, c_psi) = psi.sin_cos();
    let tilt = gains.max_tilt;
    let pitch_des = ((a.x * c_psi + a.y * s_psi) / g).clamp(-tilt, tilt);
    let roll_des = ((a.x * s_psi - a.y * c_psi) / g).clamp(-tilt, tilt);

    let ez = target.position.z - current.position.z;
    let dez = target_velocity.z - current.velocity.z;
    let az = dynamics::pid_control(ez, dez, integral.z, &gains.altitude);
    // Keep the tilt compensation bounded away from the singularity at 90°.
    let cos_tilt = (current.pitch().cos() * current.roll().cos()).max(0.2);
    let total_thrust = (params.mass * (g + az) / cos_tilt).max(0.0);

    let att = &gains.attitude;
    let moments = Vec3::new(
        att.kp * normalize_angle(target.heading - psi) - att.kd * current.euler_rates[0],
        att.kp * (pitch_des - current.pitch()) - att.kd * current.euler_rates[1],
        att.kp * (roll_des - current.roll()) - att.kd * current.euler_rates[2],
    );
    ControlInput { total_thrust, moments }
}

/// One stateless movement-layer evaluation for a stationary target.
///
/// At the target with zero velocity and level attitude this returns the
/// hover input.
pub fn movement_step(
    current: &UavState,
    target: &Pose,
    gains: &MovementGains,
    params: &UavParams,
    dt: f64,
) -> Result<ControlInput> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("dt must be > 0, got {dt}")));
    }
    let e = target.position - current.position;
    Ok(control_law(current, target, Vec3::zeros(), e * dt, gains, params))
}

/// Movement layer with memory: differences successive targets into a target
/// velocity feed-forward and accumulates the position-error integral.
#[derive(Debug, Clone)]
pub struct MovementController {
    gains: MovementGains,
    params: UavParams,
    previous_target: Option<Vec3>,
    integral: Vec3,
}

impl MovementController {
    pub fn new(gains: MovementGains, params: UavParams) -> Result<Self> {
        gains.validate()?;
        params.validate()?;
        Ok(Self {
            gains,
            params,
            previous_target: None,
            integral: Vec3::zeros(),
        })
    }

    pub fn reset(&mut self) {
        self.previous_target = None;
        self.integral = Vec3::zeros();
    }

    pub fn step(&mut self, current: &UavState, target: &Pose, dt: f64) -> Result<ControlInput> {
        if !(dt > 0.0) {
            return Err(Error::domain(format!("dt must be > 0, got {dt}")));
        }
        let target_velocity = self
            .previous_target
            .map_or(Vec3::zeros(), |p| (target.position - p) / dt);
        self.previous_target = Some(target.position);
        self.integral += (target.position - current.position) * dt;
        Ok(control_law(
            current,
            target,
            target_velocity,
            self.integral,
            &self.gains,
            &self.params,
        ))
    }
}

// ---------------------------------------------------------------------------
// Closed-loop simulation

/// Kinematic leader path: straight segments between waypoints at constant
/// speed. The leader holds the last waypoint once reached, and its heading
/// follows the direction of travel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderPath {
    pub waypoints: Vec<Vec3>,
    pub speed: f64,
}

impl LeaderPath {
    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::domain("leader path needs at least one waypoint"));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(Error::domain("leader speed must be >= 0"));
        }
        Ok(())
    }

    pub fn pose_at(&self, t: f64) -> Pose {
        let mut remaining = self.speed * t.max(0.0);
        let mut heading = 0.0;
        for w in self.waypoints.windows(2) {
            let seg = w[1] - w[0];
            let len = seg.norm();
            if len == 0.0 {
                continue;
            }
            heading = seg.y.atan2(seg.x);
            if remaining <= len {
                return Pose::new(w[0] + seg * (remaining / len), heading);
            }
            remaining -= len;
        }
        Pose::new(*self.waypoints.last().expect("validated"), heading)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationScenario {
    pub roles: RoleGraph,
    pub leader_path: LeaderPath,
    /// Initial state per follower; followers without one start at rest on
    /// their first target.
    #[serde(default)]
    pub initial: BTreeMap<UavId, UavState>,
    #[serde(default)]
    pub params: UavParams,
    #[serde(default)]
    pub gains: MovementGains,
    pub dt: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationSample {
    pub time: f64,
    pub id: UavId,
    pub pose: Pose,
    /// Equal to `pose` for the root.
    pub target: Pose,
}

impl FormationSample {
    pub fn offset_error(&self) -> f64 {
        (self.pose.position - self.target.position).norm()
    }
}

/// Runs the leader kinematically and every follower through the full
/// dynamics in lockstep. Samples are ordered by tick, then by id.
pub fn simulate_formation(s: &FormationScenario) -> Result<Vec<FormationSample>> {
    s.roles.validate()?;
    s.leader_path.validate()?;
    s.params.validate()?;
    if !(s.dt > 0.0 && s.duration >= 0.0) {
        return Err(Error::domain("dt must be > 0 and duration >= 0"));
    }

    let root = s.roles.root;
    let leader0 = BTreeMap::from([(root, s.leader_path.pose_at(0.0))]);
    let first = formation_targets(&leader0, &s.roles)?;

    let mut states: BTreeMap<UavId, UavState> = BTreeMap::new();
    let mut controllers = BTreeMap::new();
    for (&id, target) in &first {
        let mut st = s
            .initial
            .get(&id)
            .cloned()
            .unwrap_or_else(|| UavState::at_rest(target.position));
        st.validate()?;
        if !s.initial.contains_key(&id) {
            st.euler[0] = target.heading;
        }
        states.insert(id, st);
        controllers.insert(id, MovementController::new(s.gains, s.params)?);
    }

    let ticks = (s.duration / s.dt).round() as usize;
    let mut samples = Vec::with_capacity((ticks + 1) * (states.len() + 1));
    for k in 0..=ticks {
        let t = k as f64 * s.dt;
        let leader = s.leader_path.pose_at(t);
        let targets = formation_targets(&BTreeMap::from([(root, leader)]), &s.roles)?;

        samples.push(FormationSample {
            time: t,
            id: root,
            pose: leader,
            target: leader,
        });
        for (&id, st) in &states {
            samples.push(FormationSample {
                time: t,
                id,
                pose: Pose::of_state(st),
                target: targets[&id],
            });
        }
        if k == ticks {
            break;
        }
        for (id, st) in states.iter_mut() {
            let u = controllers
                .get_mut(id)
                .expect("one per follower")
                .step(st, &targets[id], s.dt)?;
            *st = dynamics::step_state(st, &u, &s.params, s.dt)?;
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: Vec3, b: Vec3) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn fgd_examples() {
        let leader = Pose::new(Vec3::new(1.0, 2.0, 3.0), 0.4);
        let t = fgd_target(&leader, &FormationSpec::fgd(Vec3::new(-1.0, 0.0, 2.0))).unwrap();
        assert_eq!(t.position, Vec3::new(0.0, 2.0, 5.0));
        assert_eq!(t.heading, 0.4);
        assert_eq!(fgd_target(&leader, &FormationSpec::fgd(Vec3::zeros())).unwrap(), leader);
        assert!(fgd_target(&leader, &FormationSpec::df(Vec3::zeros(), 0.0)).is_err());
    }

    #[test]
    fn df_examples() {
        let leader = Pose::new(Vec3::new(5.0, 5.0, 1.0), FRAC_PI_2);
        let t = df_target(&leader, &FormationSpec::df(Vec3::new(1.0, 0.0, 0.0), 0.0)).unwrap();
        assert!(close(t.position - leader.position, Vec3::new(0.0, 1.0, 0.0)));

        let level = Pose::new(Vec3::new(1.0, 1.0, 1.0), 0.0);
        let off = Vec3::new(-2.0, 1.0, 0.5);
        let t = df_target(&level, &FormationSpec::df(off, 0.3)).unwrap();
        assert!(close(t.position, level.position + off));
        assert!((t.heading - 0.3).abs() < 1e-15);
        assert!(df_target(&level, &FormationSpec::fgd(off)).is_err());
    }

    #[test]
    fn role_graph_rejects_bad_structure() {
        let s = FormationSpec::fgd(Vec3::zeros());
        let e = |leader, follower| RoleEdge {
            leader,
            follower,
            spec: s,
        };
        assert!(matches!(
            RoleGraph::new(0, vec![e(0, 1), e(2, 1)]),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            RoleGraph::new(0, vec![e(1, 2), e(2, 1)]),
            Err(Error::Structural(_))
        ));
        assert!(matches!(RoleGraph::new(0, vec![e(1, 0)]), Err(Error::Structural(_))));
        assert!(matches!(RoleGraph::new(0, vec![e(3, 3)]), Err(Error::Structural(_))));
        assert!(RoleGraph::new(0, vec![e(0, 1), e(1, 2)]).is_ok());
    }

    #[test]
    fn chain_composes_offsets() {
        let d1 = Vec3::new(-1.0, 1.0, 0.0);
        let d2 = Vec3::new(-1.0, -2.0, 0.5);
        let roles = RoleGraph::new(
            7,
            vec![
                RoleEdge {
                    leader: 8,
                    follower: 9,
                    spec: FormationSpec::fgd(d2),
                },
                RoleEdge {
                    leader: 7,
                    follower: 8,
                    spec: FormationSpec::fgd(d1),
                },
            ],
        )
        .unwrap();
        let root = Pose::new(Vec3::new(10.0, 0.0, 5.0), 0.0);
        let t = formation_targets(&BTreeMap::from([(7, root)]), &roles).unwrap();
        assert!(close(t[&9].position, root.position + d1 + d2));
        assert_eq!(t.len(), 2);
        assert!(matches!(
            formation_targets(&BTreeMap::new(), &roles),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn hover_at_target() {
        let p = UavParams::default();
        let st = UavState::at_rest(Vec3::new(1.0, 2.0, 3.0));
        let u = movement_step(&st, &Pose::of_state(&st), &MovementGains::default(), &p, 0.01).unwrap();
        assert_eq!(u, ControlInput::hover(&p));
    }

    #[test]
    fn proportional_term_is_linear_in_kp() {
        let st = UavState::at_rest(Vec3::zeros());
        let target = Pose::new(Vec3::new(1.0, -0.5, 0.0), 0.0);
        let g1 = PidGains::pd(2.0, 3.0).unwrap();
        let g2 = PidGains::pd(4.0, 3.0).unwrap();
        let c1 = position_correction(&st, &target, Vec3::zeros(), Vec3::zeros(), &g1);
        let c2 = position_correction(&st, &target, Vec3::zeros(), Vec3::zeros(), &g2);
        assert!(close(c2.proportional, c1.proportional * 2.0));
        assert_eq!(c1.derivative, c2.derivative);
    }

    #[test]
    fn leader_path_interpolates() {
        let path = LeaderPath {
            waypoints: vec![Vec3::zeros(), Vec3::new(10.0, 0.0, 0.0), Vec3::new(10.0, 10.0, 0.0)],
            speed: 2.0,
        };
        assert!(close(path.pose_at(2.5).position, Vec3::new(5.0, 0.0, 0.0)));
        let p = path.pose_at(7.5);
        assert!(close(p.position, Vec3::new(10.0, 5.0, 0.0)));
        assert!((p.heading - FRAC_PI_2).abs() < 1e-15);
        assert!(close(path.pose_at(100.0).position, Vec3::new(10.0, 10.0, 0.0)));
    }
}
