//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 assumption violation,
//! 3 runtime solver error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::error;
use serde_json::json;

use reactive_sim::log::write_logs;
use reactive_sim::run::{run, RunOptions};
use reactive_sim::scenario::{load_params, load_scenario, ScenarioError};
use reactive_traj::error::GuaranteeError;
use reactive_traj::guarantees::{cruise_velocity_with, force_budget, solve_tau_f};

#[derive(Parser)]
#[command(name = "reactive-sim", version, about = "Reactive trajectory generation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write logs and plot data to a directory.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario duration, s.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Solve the cruise speed for a parameter file.
    SolveVc {
        #[arg(long)]
        params: PathBuf,
    },
    /// Solve the sigmoid timespan for one fresh request.
    SolveTauf {
        #[arg(long)]
        params: PathBuf,
        /// Heading change, rad.
        #[arg(long, allow_hyphen_values = true)]
        dphi: f64,
        /// Speed change, m/s.
        #[arg(long, allow_hyphen_values = true)]
        dv: f64,
        /// Initial speed, m/s.
        #[arg(long)]
        vi: f64,
    },
    /// Validate a scenario's assumptions without running it.
    Check {
        #[arg(long)]
        scenario: PathBuf,
    },
}

const EXIT_USAGE: u8 = 1;
const EXIT_ASSUMPTION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn guarantee_code(e: &GuaranteeError) -> u8 {
    match e {
        GuaranteeError::HoverInfeasible { .. } | GuaranteeError::WindTooStrong { .. } | GuaranteeError::BadParams(_) => {
            EXIT_ASSUMPTION
        }
        _ => EXIT_SOLVER,
    }
}

fn scenario_code(e: &ScenarioError) -> u8 {
    match e {
        ScenarioError::Io { .. } | ScenarioError::Parse { .. } => EXIT_USAGE,
        ScenarioError::Solver { source, .. } => guarantee_code(source),
        _ => EXIT_ASSUMPTION,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    error!("{msg}");
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Simulate { scenario, out, seed, duration } => {
            let sc = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => return fail(scenario_code(&e), e),
            };
            let started = Instant::now();
            let output = match run(&sc, RunOptions { seed, duration }) {
                Ok(o) => o,
                Err(e) => return fail(EXIT_SOLVER, e),
            };
            if let Err(e) = write_logs(&output, &out) {
                return fail(EXIT_USAGE, e);
            }
            let s = &output.summary;
            println!(
                "{}: {} at t = {:.2} s, min clearance {:.3} m, wall time {:.2} s",
                s.scenario,
                if s.completed { "all vehicles at goal" } else { "not completed" },
                s.t_end,
                s.min_clearance(),
                started.elapsed().as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Command::SolveVc { params } => {
            let p = match load_params(&params) {
                Ok(p) => p,
                Err(e) => return fail(scenario_code(&e), e),
            };
            let started = Instant::now();
            match cruise_velocity_with(&p.vehicle, &p.sensor, p.first_turn) {
                Ok(c) => {
                    let out = json!({
                        "v_c": c.v_c,
                        "v_c_thrust": c.v_c_thrust,
                        "v_c_sensor": c.v_c_sensor,
                        "tau_f": c.tau_f,
                        "tau_f1": c.tau_f1,
                        "dphi1": c.dphi1,
                        "dphi2": c.dphi2,
                        "marginal": c.marginal,
                        "elapsed_s": started.elapsed().as_secs_f64(),
                    });
                    println!("{}", serde_json::to_string_pretty(&out).expect("plain JSON"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(guarantee_code(&e), e),
            }
        }
        Command::SolveTauf { params, dphi, dv, vi } => {
            let p = match load_params(&params) {
                Ok(p) => p,
                Err(e) => return fail(scenario_code(&e), e),
            };
            if vi.is_nan() || dv.is_nan() || vi < 0.0 || vi + dv < 0.0 {
                return fail(EXIT_ASSUMPTION, format!("speeds must stay non-negative (vi = {vi}, vi + dv = {})", vi + dv));
            }
            let result = force_budget(&p.vehicle).and_then(|b| solve_tau_f(dphi, dv, vi, &b, &p.vehicle, None, 0.0));
            match result {
                Ok(s) => {
                    println!("{}", serde_json::to_string_pretty(&s).expect("plain JSON"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(guarantee_code(&e), e),
            }
        }
        Command::Check { scenario } => match load_scenario(&scenario) {
            Ok(sc) => {
                let speeds: Vec<String> = sc.cruise.iter().map(|c| format!("{:.3}", c.v_c)).collect();
                println!("{}: ok (cruise speeds {} m/s)", sc.name(), speeds.join(", "));
                ExitCode::SUCCESS
            }
            Err(e) => fail(scenario_code(&e), e),
        },
    }
}
