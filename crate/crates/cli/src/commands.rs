//! One function per subcommand. Each validates the scenario first, then runs
//! the models and writes its artifacts; nothing is written on a violation.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;
use swarmlink::channel::{
    ber_monte_carlo_with, ber_qpsk_awgn_theoretical, ber_qpsk_rayleigh_theoretical, log_space, qpsk_modulate,
    received_power_sweep, transmit, FadingKind, FadingParams,
};
use swarmlink::dynamics::{step_state, UavState};
use swarmlink::formation::{simulate_formation, FormationScenario, MovementController, Pose};
use swarmlink::linkbudget::{ber_vs_distance, compute_budget, render_report, BudgetMode};
use swarmlink::network::{
    apf_plan, build_topology, compare_propagation, link_failure, validate_structure, GROUND_STATION,
};
use swarmlink::rng::{derive_seed, rng_from_seed, UnitDraw};
use swarmlink::swarm_opt::benchmarks::{rastrigin, sphere};
use swarmlink::swarm_opt::{gwo_optimize, pso_optimize, wpa_optimize, OptimizerRun, SearchSpace};
use swarmlink::wind::{
    airflow_drag_force, synthesize_turbulence, synthesized_variance, wind_shear_response, Component,
};
use swarmlink::Vec3;

use crate::config::{Algorithm, Benchmark, Requirement, ScenarioConfig};
use crate::error::CliError;
use crate::output::{f, fading_tag, Artifact, Writer};

/// Run-wide switches from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Overrides the budget section's mode.
    pub mode: Option<BudgetMode>,
    /// Spread fitness evaluation and Monte Carlo shards over threads. Results
    /// are identical to the serial run.
    pub parallel: bool,
}

/// Which channel artifacts to produce; all three when none is selected.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChannelParts {
    pub sweep: bool,
    pub constellation: bool,
    pub ber: bool,
}

impl ChannelParts {
    fn resolved(self) -> Self {
        if self.sweep || self.constellation || self.ber {
            self
        } else {
            Self {
                sweep: true,
                constellation: true,
                ber: true,
            }
        }
    }
}

fn require(cfg: &ScenarioConfig, req: Requirement) -> Result<(), CliError> {
    let v = cfg.violations_for(req);
    if v.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(v))
    }
}

/// Validated configs always carry a seed where one is needed.
fn seed(cfg: &ScenarioConfig) -> u64 {
    cfg.seed.expect("seed checked by validation")
}

fn steps(cfg: &ScenarioConfig) -> usize {
    (cfg.duration / cfg.dt).round() as usize
}

fn xyz(v: &Vec3) -> [String; 3] {
    [f(v.x), f(v.y), f(v.z)]
}

// ---------------------------------------------------------------------------
// dynamics

/// Flies every UAV to its hold point with the cascaded movement controller.
pub fn dynamics(cfg: &ScenarioConfig, out: &mut Writer) -> Result<(), CliError> {
    require(cfg, Requirement::Uavs)?;
    let gains = cfg.dynamics.clone().unwrap_or_default().gains;
    let mut rows = Vec::new();
    for u in &cfg.uavs {
        let mut ctl = MovementController::new(gains, u.params)?;
        let mut st = UavState::at_rest(u.position);
        st.velocity = u.velocity;
        st.euler.x = u.heading;
        let target = Pose::new(u.target.unwrap_or(u.position), u.heading);
        for k in 0..=steps(cfg) {
            if k > 0 {
                let input = ctl.step(&st, &target, cfg.dt)?;
                st = step_state(&st, &input, &u.params, cfg.dt)?;
            }
            let t = k as f64 * cfg.dt;
            let mut row = vec![f(t), u.id.to_string()];
            row.extend(xyz(&st.position));
            row.extend(xyz(&st.velocity));
            row.extend([f(st.yaw()), f(st.pitch()), f(st.roll())]);
            rows.push((k, u.id, row));
        }
        println!(
            "uav {}: final distance to target {:.6} m",
            u.id,
            (st.position - target.position).norm()
        );
    }
    // Interleave by time, then id, to match the formation output.
    rows.sort_by_key(|(k, id, _)| (*k, *id));
    out.csv(
        Artifact::Dynamics,
        &["time", "id", "x", "y", "z", "vx", "vy", "vz", "yaw", "pitch", "roll"],
        rows.into_iter().map(|(_, _, r)| r),
    )
}

// ---------------------------------------------------------------------------
// wind

pub fn wind(cfg: &ScenarioConfig, out: &mut Writer) -> Result<(), CliError> {
    require(cfg, Requirement::Wind)?;
    let w = cfg.wind.as_ref().expect("required");
    let spec = &w.turbulence;
    let seed = seed(cfg);

    let omegas = log_space(w.psd.omega_min, w.psd.omega_max, w.psd.points);
    let mut psd_rows = Vec::with_capacity(omegas.len());
    for &om in &omegas {
        let mut row = vec![f(om)];
        for c in Component::ALL {
            row.push(f(spec.psd(c, om)?));
        }
        psd_rows.push(row);
    }

    let mut series = Vec::new();
    let mut components = BTreeMap::new();
    for (c, tag) in Component::ALL.into_iter().zip(["u", "v", "w"]) {
        let x = synthesize_turbulence(
            spec,
            c,
            w.sample_spacing,
            w.n_samples,
            derive_seed(seed, &format!("wind-{tag}")),
        )?;
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let expected = synthesized_variance(spec, c, w.sample_spacing, w.n_samples)?;
        components.insert(tag, json!({ "sample_variance": var, "expected_variance": expected }));
        series.push(x);
    }
    let series_rows = (0..w.n_samples).map(|i| {
        vec![
            f(i as f64 * w.sample_spacing),
            f(series[0][i]),
            f(series[1][i]),
            f(series[2][i]),
        ]
    });

    let shear = match &w.shear {
        Some(s) => {
            let (dvg, dva) = wind_shear_response(&s.coeff, s.delta_vw)?;
            json!({ "p": s.coeff.p, "delta_vw": s.delta_vw, "delta_vg": dvg, "delta_va": dva })
        }
        None => serde_json::Value::Null,
    };
    let drag = w.drag.as_ref().map(|d| {
        json!({
            "force_n": airflow_drag_force(d.air_density, d.airflow_speed, d.drag_coeff, d.windward_area),
        })
    });

    out.csv(
        Artifact::WindPsd,
        &["omega_rad_per_m", "phi_u", "phi_v", "phi_w"],
        psd_rows,
    )?;
    out.csv(Artifact::WindSeries, &["x_m", "u", "v", "w"], series_rows)?;
    out.json(
        Artifact::WindSummary,
        &json!({
            "turbulence": spec,
            "sample_spacing_m": w.sample_spacing,
            "n_samples": w.n_samples,
            "components": components,
            "shear": shear,
            "drag": drag,
        }),
    )?;
    for (tag, c) in &components {
        println!(
            "wind {tag}: variance {} (expected {})",
            c["sample_variance"], c["expected_variance"]
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// optimize

#[derive(Serialize)]
struct AlgorithmSummary<'a> {
    algorithm: &'a str,
    seed: u64,
    best_value: f64,
    best_position: &'a [f64],
    iterations_used: usize,
}

pub fn optimize(cfg: &ScenarioConfig, opts: RunOptions, out: &mut Writer) -> Result<(), CliError> {
    require(cfg, Requirement::Optimize)?;
    let o = cfg.optimize.as_ref().expect("required");
    let space = SearchSpace::cube(o.dim, o.lower, o.upper)?;
    let fitness: fn(&[f64]) -> f64 = match o.function {
        Benchmark::Sphere => sphere,
        Benchmark::Rastrigin => rastrigin,
    };
    let mut runs: Vec<(Algorithm, u64, OptimizerRun)> = Vec::new();
    for &alg in &o.algorithms {
        let s = derive_seed(seed(cfg), alg.tag());
        let run = match alg {
            Algorithm::Pso => {
                let mut c = o.pso.clone();
                c.seed = s;
                c.parallel |= opts.parallel;
                pso_optimize(fitness, &space, &c)?
            }
            Algorithm::Gwo => {
                let mut c = o.gwo.clone();
                c.seed = s;
                c.parallel |= opts.parallel;
                gwo_optimize(fitness, &space, &c)?
            }
            Algorithm::Wpa => {
                let mut c = o.wpa.clone();
                c.seed = s;
                wpa_optimize(fitness, &space, &c)?
            }
        };
        println!(
            "{}: best {} after {} iterations",
            alg.tag(),
            run.best_value,
            run.iterations_used
        );
        runs.push((alg, s, run));
    }
    let trace = runs.iter().flat_map(|(alg, _, run)| {
        run.trace
            .iter()
            .enumerate()
            .map(move |(i, v)| vec![alg.tag().to_string(), i.to_string(), f(*v)])
    });
    out.csv(
        Artifact::OptimizeTrace,
        &["algorithm", "iteration", "best_value"],
        trace,
    )?;
    let summaries: Vec<AlgorithmSummary> = runs
        .iter()
        .map(|(alg, s, run)| AlgorithmSummary {
            algorithm: alg.tag(),
            seed: *s,
            best_value: run.best_value,
            best_position: &run.best_position,
            iterations_used: run.iterations_used,
        })
        .collect();
    out.json(
        Artifact::OptimizeSummary,
        &json!({
            "function": o.function,
            "dim": o.dim,
            "lower": o.lower,
            "upper": o.upper,
            "runs": summaries,
        }),
    )
}

// ---------------------------------------------------------------------------
// formation

pub fn formation(cfg: &ScenarioConfig, out: &mut Writer) -> Result<(), CliError> {
    require(cfg, Requirement::Formation)?;
    let fm = cfg.formation.as_ref().expect("required");
    let followers = fm.roles.members();
    let initial = cfg
        .uavs
        .iter()
        .filter(|u| u.id != fm.roles.root && followers.contains(&u.id))
        .map(|u| {
            let mut st = UavState::at_rest(u.position);
            st.velocity = u.velocity;
            st.euler.x = u.heading;
            (u.id, st)
        })
        .collect();
    let scenario = FormationScenario {
        roles: fm.roles.clone(),
        leader_path: fm.leader_path.clone(),
        initial,
        params: fm.params,
        gains: fm.gains,
        dt: cfg.dt,
        duration: cfg.duration,
    };
    let samples = simulate_formation(&scenario)?;
    let mut last = BTreeMap::new();
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| {
            if s.id != fm.roles.root {
                last.insert(s.id, s.offset_error());
            }
            let mut row = vec![f(s.time), s.id.to_string()];
            row.extend(xyz(&s.pose.position));
            row.push(f(s.pose.heading));
            row.extend(xyz(&s.target.position));
            row.push(f(s.offset_error()));
            row
        })
        .collect();
    for (id, e) in last {
        println!("uav {id}: final offset error {e:.6} m");
    }
    out.csv(
        Artifact::Formation,
        &[
            "time",
            "id",
            "x",
            "y",
            "z",
            "heading",
            "target_x",
            "target_y",
            "target_z",
            "offset_error",
        ],
        rows,
    )
}

// ---------------------------------------------------------------------------
// channel

pub fn channel(cfg: &ScenarioConfig, parts: ChannelParts, opts: RunOptions, out: &mut Writer) -> Result<(), CliError> {
    require(cfg, Requirement::Channel)?;
    let c = cfg.channel.as_ref().expect("required");
    let parts = parts.resolved();
    let seed = seed(cfg);

    if parts.sweep {
        let d = log_space(c.sweep.d_min, c.sweep.d_max, c.sweep.points);
        let sweep = received_power_sweep(&c.link, &d)?;
        println!("two-ray crossover distance {} m", c.link.crossover_distance());
        out.csv(
            Artifact::ChannelSweep,
            &["d", "pr_friis_dbm", "pr_tworay_dbm"],
            sweep
                .iter()
                .map(|s| vec![f(s.distance), f(s.friis_dbm), f(s.two_ray_dbm)]),
        )?;
    }

    if parts.constellation {
        let n_bits = 2 * c.constellation.n_symbols;
        let mut rng = rng_from_seed(derive_seed(seed, "constellation-bits"));
        let bits: Vec<u8> = (0..n_bits).map(|_| (rng.unit() < 0.5) as u8).collect();
        let symbols = qpsk_modulate(&bits)?;
        for fd in &c.fading {
            let tag = fading_tag(fd.kind);
            let fading = FadingParams {
                seed: derive_seed(seed, &format!("constellation-{tag}")),
                ..*fd
            };
            let rx = transmit(&symbols, &fading, c.constellation.ebn0_db)?.equalized();
            out.csv(
                Artifact::Constellation(fd.kind),
                &["i", "q"],
                rx.iter().map(|s| vec![f(s.in_phase), f(s.quadrature)]),
            )?;
        }
    }

    if parts.ber {
        for fd in &c.fading {
            let tag = fading_tag(fd.kind);
            let mc_seed = derive_seed(seed, &format!("ber-{tag}"));
            let mut rows = Vec::new();
            for &e in &c.ebn0_db {
                let theory = match fd.kind {
                    FadingKind::Awgn => f(ber_qpsk_awgn_theoretical(e)),
                    FadingKind::Rayleigh => f(ber_qpsk_rayleigh_theoretical(e)),
                    // No closed form is provided for Rician fading.
                    FadingKind::Rician => String::new(),
                };
                let est = ber_monte_carlo_with(fd, e, c.n_bits, mc_seed, opts.parallel)?;
                rows.push(vec![f(e), theory, f(est.ber), est.n_errors.to_string()]);
            }
            out.csv(
                Artifact::Ber(fd.kind),
                &["ebn0_db", "ber_theory", "ber_mc", "n_errors"],
                rows,
            )?;
            println!("ber {tag}: {} points, {} bits each", c.ebn0_db.len(), c.n_bits);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// budget and berdist

pub fn budget(cfg: &ScenarioConfig, opts: RunOptions, out: &mut Writer) -> Result<(), CliError> {
    require(cfg, Requirement::Budget)?;
    let b = cfg.budget.as_ref().expect("required");
    let config = b.resolve().map_err(CliError::Validation)?;
    let lb = compute_budget(&config, opts.mode.unwrap_or(b.mode))?;
    let report = render_report(&lb);
    print!("{report}");
    out.text(Artifact::BudgetReport, &report)?;
    out.json(Artifact::Budget, &lb)
}

pub fn berdist(cfg: &ScenarioConfig, out: &mut Writer) -> Result<(), CliError> {
    require(cfg, Requirement::BerDist)?;
    let b = cfg.berdist.as_ref().expect("required");
    let d = log_space(b.distances.d_min, b.distances.d_max, b.distances.points);
    let pts = ber_vs_distance(&b.link, b.data_rate, b.noise_power_dbm, &d, b.formula)?;
    if let (Some(first), Some(last)) = (pts.first(), pts.last()) {
        println!(
            "ber {} at {} m, {} at {} m",
            first.ber, first.distance_m, last.ber, last.distance_m
        );
    }
    out.csv(
        Artifact::BerDist,
        &["distance_m", "pr_dbm", "ebn0_db", "ber"],
        pts.iter()
            .map(|p| vec![f(p.distance_m), f(p.pr_dbm), f(p.ebn0_db), f(p.ber)]),
    )
}

// ---------------------------------------------------------------------------
// network

/// Ground station at the origin; UAVs uniform in `x, y ∈ [−area, area]`,
/// `z ∈ [0.1·area, area]`.
fn random_positions(n_uavs: usize, area: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = rng_from_seed(derive_seed(seed, "network-positions"));
    let mut p = vec![Vec3::zeros()];
    for _ in 0..n_uavs {
        let x = (2.0 * rng.unit() - 1.0) * area;
        let y = (2.0 * rng.unit() - 1.0) * area;
        let z = area * (0.1 + 0.9 * rng.unit());
        p.push(Vec3::new(x, y, z));
    }
    p
}

pub fn network(cfg: &ScenarioConfig, out: &mut Writer) -> Result<(), CliError> {
    require(cfg, Requirement::Network)?;
    let n = cfg.network.as_ref().expect("required");
    let positions = match &n.positions {
        Some(p) => p.clone(),
        None => random_positions(n.n_uavs, n.area, seed(cfg)),
    };
    let topo = build_topology(n.kind, n.n_uavs, n.n_groups, n.link_range, &positions)?;
    validate_structure(&topo)?;
    let dst = n.dst.unwrap_or(n.n_uavs);
    let cmp = compare_propagation(&topo.graph, n.src, dst, n.per_hop_delay)?;
    let failure = link_failure(&topo.graph, n.src, dst)?;

    println!(
        "{:?}: {} nodes, {} links; routing {} messages, flooding {} messages",
        n.kind,
        topo.graph.node_count(),
        topo.graph.edge_count(),
        cmp.routing.messages,
        cmp.flooding.messages
    );
    let edges: Vec<_> = topo
        .graph
        .edges()
        .into_iter()
        .map(|(a, b, cost)| json!({ "a": a, "b": b, "cost": cost }))
        .collect();
    out.json(
        Artifact::NetworkTopology,
        &json!({
            "kind": topo.kind,
            "ground_station": GROUND_STATION,
            "roles": topo.roles,
            "groups": topo.groups,
            "positions": topo.positions,
            "edges": edges,
        }),
    )?;
    out.json(
        Artifact::NetworkComparison,
        &json!({
            "src": cmp.src,
            "dst": cmp.dst,
            "per_hop_delay_s": n.per_hop_delay,
            "routing": cmp.routing,
            "flooding": cmp.flooding,
            "path": cmp.path,
            "link_failure": failure,
        }),
    )?;

    if let Some(a) = &n.apf {
        let plan = apf_plan(a.start, &a.field, &a.params)?;
        let last = plan.trajectory.last().map(|s| s.position).unwrap_or(a.start);
        let goal_distance = (last - a.field.goal).norm();
        println!(
            "apf: {:?} after {} steps",
            plan.outcome,
            plan.trajectory.len().saturating_sub(1)
        );
        out.csv(
            Artifact::Apf,
            &["step", "x", "y", "z", "potential"],
            plan.trajectory.iter().enumerate().map(|(i, s)| {
                let mut row = vec![i.to_string()];
                row.extend(xyz(&s.position));
                row.push(f(s.potential));
                row
            }),
        )?;
        out.json(
            Artifact::ApfSummary,
            &json!({
                "outcome": plan.outcome,
                "steps": plan.trajectory.len().saturating_sub(1),
                "final_position": last,
                "goal_distance": goal_distance,
                "min_clearance": plan
                    .trajectory
                    .iter()
                    .map(|s| a.field.min_clearance(&s.position))
                    .fold(f64::INFINITY, f64::min),
            }),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// validate

/// Every violation in the file, without running anything.
pub fn validate(cfg: &ScenarioConfig) -> Vec<String> {
    cfg.violations()
}
