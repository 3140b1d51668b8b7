//! Quadrotor rigid-body model and PD/PID control.
//!
//! The airframe is a point mass with Euler-angle attitude `(ψ, θ, φ)` =
//! (yaw, pitch, roll). Translational acceleration follows from the total
//! thrust `u` tilted by the attitude:
//!
//! ```text
//! m ẍ = u (sin φ sin ψ + cos φ cos ψ sin θ)
//! m ÿ = u (cos φ sin θ sin ψ − cos ψ sin φ)
//! m z̈ = u cos θ cos φ − m g
//! ```
//!
//! and the angular accelerations are the commanded moments directly
//! (`ψ̈ = τ̃_ψ`, `θ̈ = τ̃_θ`, `φ̈ = τ̃_φ`). No rotor mixer is modeled, so a
//! [`ControlInput`] carries the moments rather than four motor commands.

use serde::{Deserialize, Serialize};

use crate::{normalize_angle, Error, Result, Vec3};

pub const STANDARD_GRAVITY: f64 = 9.81;

/// Physical constants of one airframe.
///
/// `air_density` and `rotor_disc_area` feed the rotor drag torque
/// `τ_drag = ½ ρ v²`. That expression has no area or drag coefficient, so it is
/// not dimensionally a torque; it is kept literally and `rotor_disc_area` is
/// carried for callers that want to scale it themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavParams {
    /// kg
    pub mass: f64,
    /// m/s²
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    /// Thrust coefficient `k` in N·s²/rad².
    pub thrust_coeff: f64,
    /// kg·m²
    pub rotor_inertia: f64,
    /// kg/m³
    #[serde(default = "default_air_density")]
    pub air_density: f64,
    /// m²
    pub rotor_disc_area: f64,
}

fn default_gravity() -> f64 {
    STANDARD_GRAVITY
}

fn default_air_density() -> f64 {
    1.225
}

impl Default for UavParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            gravity: STANDARD_GRAVITY,
            thrust_coeff: 1e-5,
            rotor_inertia: 6e-5,
            air_density: 1.225,
            rotor_disc_area: 0.01,
        }
    }
}

impl UavParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("gravity", self.gravity),
            ("thrust_coeff", self.thrust_coeff),
            ("rotor_inertia", self.rotor_inertia),
            ("air_density", self.air_density),
            ("rotor_disc_area", self.rotor_disc_area),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Weight `m g` in newtons.
    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    /// Rotor speed at which four equal rotors exactly carry the weight.
    pub fn hover_rotor_speed(&self) -> f64 {
        (self.weight() / (4.0 * self.thrust_coeff)).sqrt()
    }
}

/// Full rigid-body state of one quadrotor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    /// m, inertial frame.
    pub position: Vec3,
    /// m/s
    pub velocity: Vec3,
    /// `(ψ yaw, θ pitch, φ roll)` in radians, each in `(−π, π]`.
    pub euler: Vec3,
    /// rad/s
    pub euler_rates: Vec3,
    /// rad/s, non-negative.
    pub rotor_speeds: [f64; 4],
}

impl Default for UavState {
    fn default() -> Self {
        Self::at_rest(Vec3::zeros())
    }
}

impl UavState {
    pub fn at_rest(position: Vec3) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            euler: Vec3::zeros(),
            euler_rates: Vec3::zeros(),
            rotor_speeds: [0.0; 4],
        }
    }

    pub fn yaw(&self) -> f64 {
        self.euler[0]
    }

    pub fn pitch(&self) -> f64 {
        self.euler[1]
    }

    pub fn roll(&self) -> f64 {
        self.euler[2]
    }

    pub fn validate(&self) -> Result<()> {
        if self.rotor_speeds.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::domain("rotor speeds must be non-negative"));
        }
        let finite = self
            .position
            .iter()
            .chain(self.velocity.iter())
            .chain(self.euler.iter())
            .chain(self.euler_rates.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("state contains non-finite values"));
        }
        Ok(())
    }
}

/// PID gains in conventional roles: `kp` multiplies the error, `kd` its rate.
///
/// The characteristic equation `ë + a ė + b e = 0` is sometimes written with
/// the gain names swapped (`a` called "proportional"). Use
/// [`PidGains::from_swapped`] to enter gains in that convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub kd: f64,
    #[serde(default)]
    pub ki: f64,
}

impl PidGains {
    pub fn new(kp: f64, kd: f64, ki: f64) -> Result<Self> {
        let gains = Self { kp, kd, ki };
        gains.validate()?;
        Ok(gains)
    }

    pub fn pd(kp: f64, kd: f64) -> Result<Self> {
        Self::new(kp, kd, 0.0)
    }

    /// Builds gains from `ë + k_rate·ė + k_err·e (+ k_i ∫e) = 0` written with
    /// `k_rate` named "kp" and `k_err` named "kd".
    pub fn from_swapped(kp_on_rate: f64, kd_on_error: f64, ki: f64) -> Result<Self> {
        Self::new(kd_on_error, kp_on_rate, ki)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kp > 0.0 && self.kp.is_finite()) {
            return Err(Error::domain(format!("kp must be > 0, got {}", self.kp)));
        }
        if !(self.kd > 0.0 && self.kd.is_finite()) {
            return Err(Error::domain(format!("kd must be > 0, got {}", self.kd)));
        }
        if !(self.ki >= 0.0 && self.ki.is_finite()) {
            return Err(Error::domain(format!("ki must be >= 0, got {}", self.ki)));
        }
        Ok(())
    }
}

/// Total thrust plus the three attitude moments `(τ̃_ψ, τ̃_θ, τ̃_φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    /// N, non-negative.
    pub total_thrust: f64,
    pub moments: Vec3,
}

impl ControlInput {
    pub fn hover(params: &UavParams) -> Self {
        Self {
            total_thrust: params.weight(),
            moments: Vec3::zeros(),
        }
    }

    /// Assembles `u = Σ F_i` from four rotor speeds.
    pub fn from_rotor_speeds(params: &UavParams, speeds: [f64; 4], moments: Vec3) -> Result<Self> {
        let total_thrust = speeds.iter().map(|&w| rotor_thrust(params, w)).sum::<Result<f64>>()?;
        Ok(Self { total_thrust, moments })
    }
}

/// Thrust `F = k ω²` of one rotor.
pub fn rotor_thrust(params: &UavParams, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::domain(format!("rotor speed must be >= 0, got {omega}")));
    }
    Ok(params.thrust_coeff * omega * omega)
}

/// Rotor angular acceleration from `I_rot ω̇ = τ − ½ ρ v²`.
pub fn rotor_spin_dynamics(params: &UavParams, omega: f64, motor_torque: f64, airflow_speed: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::domain(format!("rotor speed must be >= 0, got {omega}")));
    }
    let drag = 0.5 * params.air_density * airflow_speed * airflow_speed;
    Ok((motor_torque - drag) / params.rotor_inertia)
}

/// Linear and angular accelerations for the given state and input.
pub fn rigid_body_accel(state: &UavState, input: &ControlInput, params: &UavParams) -> (Vec3, Vec3) {
    let (psi, theta, phi) = (state.yaw(), state.pitch(), state.roll());
    let (s_psi, c_psi) = psi.sin_cos();
    let (s_th, c_th) = theta.sin_cos();
    let (s_phi, c_phi) = phi.sin_cos();
    let per_mass = input.total_thrust / params.mass;

    let linear = Vec3::new(
        per_mass * (s_phi * s_psi + c_phi * c_psi * s_th),
        per_mass * (c_phi * s_th * s_psi - c_psi * s_phi),
        per_mass * c_th * c_phi - params.gravity,
    );
    (linear, input.moments)
}

/// One semi-implicit Euler step: rates first, then positions and angles.
pub fn step_state(state: &UavState, input: &ControlInput, params: &UavParams, dt: f64) -> Result<UavState> {
    step_state_with_force(state, input, params, Vec3::zeros(), dt)
}

/// As [`step_state`], with an additional external force in newtons (wind drag,
/// gusts) applied at the centre of mass.
pub fn step_state_with_force(
    state: &UavState,
    input: &ControlInput,
    params: &UavParams,
    external_force: Vec3,
    dt: f64,
) -> Result<UavState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("dt must be > 0, got {dt}")));
    }
    if !(input.total_thrust >= 0.0) {
        return Err(Error::domain("total thrust must be >= 0"));
    }
    let (lin, ang) = rigid_body_accel(state, input, params);
    let lin = lin + external_force / params.mass;

    let velocity = state.velocity + lin * dt;
    let euler_rates = state.euler_rates + ang * dt;
    let position = state.position + velocity * dt;
    let euler = (state.euler + euler_rates * dt).map(normalize_angle);

    Ok(UavState {
        position,
        velocity,
        euler,
        euler_rates,
        rotor_speeds: state.rotor_speeds,
    })
}

/// `kp·e + kd·ė + ki·∫e`.
pub fn pid_control(error: f64, error_rate: f64, error_integral: f64, gains: &PidGains) -> f64 {
    gains.kp * error + gains.kd * error_rate + gains.ki * error_integral
}

/// Stateful single-axis PID loop that accumulates the error integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidController {
    pub gains: PidGains,
    integral: f64,
}

impl PidController {
    pub fn new(gains: PidGains) -> Self {
        Self { gains, integral: 0.0 }
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
    }

    /// Integrates the error over `dt` (rectangle rule) and returns the command.
    pub fn update(&mut self, error: f64, error_rate: f64, dt: f64) -> f64 {
        self.integral += error * dt;
        pid_control(error, error_rate, self.integral, &self.gains)
    }
}
