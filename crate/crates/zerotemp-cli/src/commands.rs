//! The five experiment subcommands. Every file is UTF-8 with LF line
//! endings, a mandatory header row, and numbers at 17 significant digits, so
//! identical configs produce byte-identical outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use zerotemp::measurement::{ground_state_attainment, measure_ensemble, write_ensemble_csv};
use zerotemp::output::sig17;
use zerotemp::processes::staircase;
use zerotemp::thermo::{
    entropy, gibbs_populations, gibbs_state, partition_function, specific_heat, EntropySurface,
};
use zerotemp::unattainability::{b2_solve, equivalence_harness, B2Outcome, HarnessOptions};

use crate::config::{
    policy, B2Cfg, EquivalenceCfg, MeasureEnsembleCfg, StaircaseCfg, ThermoTableCfg,
};
use crate::CliError;

fn create(out_dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = out_dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

pub fn thermo_table(cfg: &ThermoTableCfg, out_dir: &Path, quiet: bool) -> Result<(), CliError> {
    let model = cfg.model.build()?;
    let policy = policy(cfg.tail_tolerance, cfg.max_levels);
    let quad_tol = cfg.quad_tol.unwrap_or(1e-9);
    for &t in &cfg.temperatures {
        if !t.is_finite() || t < 0.0 {
            return Err(CliError::Validation(format!(
                "temperature grid entries must be finite and nonnegative, got {t}"
            )));
        }
    }
    let default_t_max = cfg.temperatures.iter().copied().fold(1.0f64, f64::max);
    let t_max = cfg.t_max.unwrap_or(default_t_max);
    let surface = EntropySurface::for_model(&model, cfg.parameter, t_max, &policy)?;
    let levels = surface.levels();

    let mut w = create(out_dir, "thermo_table.csv")?;
    let p_cols: Vec<String> = (0..levels.len()).map(|i| format!("p_{i}")).collect();
    writeln!(w, "T,Z,{},S_direct,S_integral,residual,C", p_cols.join(","))?;
    let mut max_residual = 0.0f64;
    for &t in &cfg.temperatures {
        let state = gibbs_populations(levels, t)?;
        let populations: Vec<String> = state.populations().iter().map(|&p| sig17(p)).collect();
        let s_direct = entropy(&state);
        let s_integral = surface.entropy_via_integral(t, quad_tol)?;
        let residual = (s_integral - s_direct).abs();
        max_residual = max_residual.max(residual);
        let (z_field, c_field) = if t == 0.0 {
            // Z and C are left empty at zero temperature.
            (String::new(), String::new())
        } else {
            (
                sig17(partition_function(levels, t)?),
                sig17(specific_heat(levels, t)?),
            )
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            sig17(t),
            z_field,
            populations.join(","),
            sig17(s_direct),
            sig17(s_integral),
            sig17(residual),
            c_field
        )?;
    }
    w.flush()?;
    if !quiet {
        println!(
            "thermo-table: {} rows ({} levels), max |S_integral - S_direct| = {:.3e}",
            cfg.temperatures.len(),
            levels.len(),
            max_residual
        );
    }
    Ok(())
}

pub fn staircase_cmd(cfg: &StaircaseCfg, out_dir: &Path, quiet: bool) -> Result<(), CliError> {
    let surf_a = cfg.surface_a.build()?;
    let surf_b = cfg.surface_b.build()?;
    let result = staircase(&surf_a, &surf_b, cfg.t0, cfg.t_target, cfg.max_steps)?;

    let mut w = create(out_dir, "staircase.csv")?;
    writeln!(w, "step,t_start,entropy_a,entropy_b,t_end,heat,work")?;
    // Trace layout: initial record, then one isothermal and one adiabatic
    // record per round.
    let records = &result.trace.records;
    for round in 1..=result.steps {
        let before = &records[2 * round - 2];
        let iso = &records[2 * round - 1];
        let adia = &records[2 * round];
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            round,
            sig17(before.temperature.expect("staircase states are on-surface")),
            sig17(before.entropy),
            sig17(iso.entropy),
            sig17(adia.temperature.expect("staircase states are on-surface")),
            sig17(iso.heat),
            sig17(iso.work + adia.work),
        )?;
    }
    w.flush()?;
    let reached = result.final_temperature <= cfg.t_target;
    if !quiet {
        println!(
            "staircase: steps={} reached={} reached_zero={} final_t={}",
            result.steps,
            reached,
            result.reached_zero,
            sig17(result.final_temperature)
        );
    }
    Ok(())
}

pub fn b2_solve_cmd(cfg: &B2Cfg, out_dir: &Path, quiet: bool) -> Result<(), CliError> {
    let alpha = cfg.surface_alpha.build()?;
    let beta = cfg.surface_beta.build()?;
    let bracket_max = cfg.bracket_max.unwrap_or(1e3);
    let solution = b2_solve(&alpha, &beta, bracket_max)?;
    let t1_line = match solution.outcome {
        B2Outcome::Solved => format!("t1 = {}", sig17(solution.t1.expect("solved"))),
        B2Outcome::NoSolution => "t1 = NONE".to_string(),
        B2Outcome::BracketExhausted => {
            format!("t1 = NONE (bracket exhausted at {})", sig17(bracket_max))
        }
    };
    let report = format!(
        "delta_s0 = {}\n{}\nresidual = {}\n",
        sig17(solution.delta_s0),
        t1_line,
        sig17(solution.residual)
    );
    let mut w = create(out_dir, "b2_solve.txt")?;
    w.write_all(report.as_bytes())?;
    w.flush()?;
    if !quiet {
        print!("{report}");
    }
    Ok(())
}

pub fn measure_ensemble_cmd(
    cfg: &MeasureEnsembleCfg,
    seed: u64,
    out_dir: &Path,
    quiet: bool,
) -> Result<(), CliError> {
    let model = cfg.model.build()?;
    let policy = policy(cfg.tail_tolerance, cfg.max_levels);
    if cfg.trials == 0 {
        return Err(CliError::Validation("trials must be at least 1".into()));
    }
    let state = gibbs_state(&model, cfg.parameter, cfg.temperature, &policy)?;
    let rows = measure_ensemble(&state, cfg.trials, seed);
    let mut w = create(out_dir, "measure_ensemble.csv")?;
    write_ensemble_csv(&rows, &mut w)?;
    w.flush()?;

    // Same seed, so the report's trials are exactly the rows written above.
    let report = ground_state_attainment(
        &model,
        cfg.parameter,
        cfg.temperature,
        cfg.trials,
        seed,
        &policy,
    )?;
    if !quiet {
        println!(
            "measure-ensemble: trials={} q0_exact={} q0_empirical={} ci3=[{}, {}] within_ci={}",
            report.trials,
            sig17(report.exact_q0),
            sig17(report.empirical_ground_frequency),
            sig17(report.ci_lo),
            sig17(report.ci_hi),
            report.within_ci
        );
        let table: Vec<String> = report
            .q0_grid
            .iter()
            .map(|(t, q)| format!("q0({}) = {}", sig17(*t), sig17(*q)))
            .collect();
        println!(
            "measure-ensemble: q0 decreasing in T: {} [{}]",
            report.q0_strictly_decreasing,
            table.join(", ")
        );
    }
    Ok(())
}

pub fn equivalence_suite_cmd(
    cfg: &EquivalenceCfg,
    seed: u64,
    out_dir: &Path,
    quiet: bool,
) -> Result<(), CliError> {
    let mut opts = HarnessOptions::default();
    if let Some(steps) = cfg.max_steps {
        opts.max_steps = steps;
    }
    if let Some(bracket) = cfg.bracket_max {
        opts.bracket_max = bracket;
    }
    let report = equivalence_harness::<f64>(cfg.n_models, seed, &opts)?;
    let mut w = create(out_dir, "equivalence_suite.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;
    if !quiet {
        print!("{}", report.summary());
    }
    if report.counterexamples > 0 {
        return Err(CliError::Counterexamples(report.counterexamples));
    }
    Ok(())
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {e}"))
    }
}
