use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use spinbath_core::dynamics::{boson_population, coherence_series, scaled_time_grid, spin_population, time_grid};
use spinbath_core::numerics::QuadratureSpec;
use spinbath_core::renorm::ground_state_energy_of;
use spinbath_core::{
    critical_coupling, niba_boundary, niba_population, pole_data, shiba_table, solve_eta_boson, solve_eta_spin,
    wwa_population, BathKind, NibaKernel, RenormalizedSystem, ShibaReport, TauX, REFERENCE_TABLE,
};

use crate::config::{CommandKind, RunConfig};
use crate::output::Table;

const ETA_TOL: f64 = 1e-12;
/// Largest Volterra step for the NIBA solver, in units of 1/ωc and 1/Δ.
const NIBA_STEP: f64 = 0.1;
const NIBA_STEP_DELTA: f64 = 0.01;
const NIBA_TOL: f64 = 1e-4;

pub fn run(cfg: &RunConfig) -> Result<Table> {
    let mut table = match cfg.command {
        CommandKind::Dynamics => dynamics(cfg)?,
        CommandKind::TauX => tau_x(cfg)?,
        CommandKind::BosonDynamics => boson_dynamics(cfg)?,
        CommandKind::Niba => niba(cfg)?,
        CommandKind::ShibaTable => shiba(cfg)?,
        CommandKind::PhaseDiagram => phase_diagram(cfg)?,
        CommandKind::GroundEnergy => ground_energy(cfg)?,
    };
    let mut head = Table::default();
    head.meta("command", cfg.command.name()).meta("version", env!("CARGO_PKG_VERSION"));
    head.metadata.append(&mut table.metadata);
    table.metadata = head.metadata;
    Ok(table)
}

fn spec(cfg: &RunConfig) -> QuadratureSpec {
    let base = QuadratureSpec::series();
    let (abs, rel) = (cfg.tol_abs.unwrap_or(base.abs_tol), cfg.tol_rel.unwrap_or(base.rel_tol));
    base.with_tolerances(abs, rel)
}

fn describe(table: &mut Table, cfg: &RunConfig, sys: Option<&RenormalizedSystem>) {
    table.meta("bath", cfg.bath);
    if let Some(d) = cfg.delta {
        table.meta_f64("delta", d);
    }
    if let Some(a) = cfg.alpha {
        table.meta_f64("alpha", a);
    }
    table.meta_f64("temperature", cfg.temperature);
    if let Some(s) = sys {
        table.meta_f64("eta", s.eta).meta_f64("eta_delta", s.effective_tunneling);
    }
}

fn tolerances(table: &mut Table, spec: &QuadratureSpec) {
    table.meta_f64("tol_abs", spec.abs_tol).meta_f64("tol_rel", spec.rel_tol);
}

fn spin_system(cfg: &RunConfig) -> Result<RenormalizedSystem> {
    let (delta, alpha) = (cfg.delta().map_err(anyhow::Error::msg)?, cfg.alpha().map_err(anyhow::Error::msg)?);
    let sys = solve_eta_spin(delta, alpha, ETA_TOL)
        .with_context(|| format!("solving eta for delta = {delta}, alpha = {alpha}"))?;
    if sys.localized {
        bail!("eta vanishes at delta = {delta}, alpha = {alpha}: the spin is localized and has no dynamics");
    }
    Ok(sys)
}

fn dynamics(cfg: &RunConfig) -> Result<Table> {
    let sys = spin_system(cfg)?;
    let spec = spec(cfg);
    let times = scaled_time_grid(sys.effective_tunneling, cfg.tmax, cfg.points);
    let full = spin_population(&sys, spec.clone())
        .and_then(|p| p.series(&times))
        .with_context(|| format!("P(t) at delta = {}, alpha = {}", sys.params.delta, sys.params.alpha))?;
    let pole = pole_data(&sys)?;
    let wwa: Vec<f64> = times.iter().map(|&t| wwa_population(t, &pole).unwrap_or(f64::NAN)).collect();

    let mut table = Table::new(&["t", "P_full", "P_wwa"]);
    describe(&mut table, cfg, Some(&sys));
    table.meta_f64("omega0", pole.omega0).meta_f64("gamma", pole.gamma_wwa).meta("pole", pole.exists);
    tolerances(&mut table, &spec);
    for ((t, p), w) in times.iter().zip(full).zip(wwa) {
        table.push(vec![*t, p, w]);
    }
    Ok(table)
}

fn tau_x(cfg: &RunConfig) -> Result<Table> {
    let sys = spin_system(cfg)?;
    let spec = spec(cfg);
    let times = scaled_time_grid(sys.effective_tunneling, cfg.tmax, cfg.points);
    let what =
        || format!("<tau_x> at delta = {}, alpha = {}, T = {}", sys.params.delta, sys.params.alpha, cfg.temperature);
    let tau = TauX::new(cfg.temperature, &sys).with_context(what)?;
    let values = tau.series(&times).with_context(what)?;
    let rho = coherence_series(&times, cfg.temperature, &sys, &spec).with_context(what)?;

    let mut table = Table::new(&["t", "tau_x", "diag_diff", "offdiag_sum", "offdiag_diff"]);
    describe(&mut table, cfg, Some(&sys));
    table.meta_f64("tau_x_limit", tau.long_time_limit());
    tolerances(&mut table, &spec);
    for ((t, v), r) in times.iter().zip(values).zip(rho) {
        table.push(vec![*t, v, r.diag_diff, r.offdiag_sum, r.offdiag_diff]);
    }
    Ok(table)
}

fn boson_dynamics(cfg: &RunConfig) -> Result<Table> {
    let spin = spin_system(cfg)?;
    let (delta, alpha, temp) = (spin.params.delta, spin.params.alpha, cfg.temperature);
    let spec = spec(cfg);
    let sys_b = solve_eta_boson(delta, alpha, temp, ETA_TOL)
        .with_context(|| format!("solving boson eta for delta = {delta}, alpha = {alpha}, T = {temp}"))?;
    if sys_b.localized {
        bail!("boson eta vanishes at delta = {delta}, alpha = {alpha}, T = {temp}: the spin is localized");
    }
    let times = scaled_time_grid(spin.effective_tunneling, cfg.tmax, cfg.points);
    let what = || format!("P(t) at delta = {delta}, alpha = {alpha}, T = {temp}");
    let (boson, spin_p) = rayon::join(
        || boson_population(&sys_b, spec.clone()).and_then(|p| p.series(&times)),
        || spin_population(&spin, spec.clone()).and_then(|p| p.series(&times)),
    );
    let (boson, spin_p) = (boson.with_context(what)?, spin_p.with_context(what)?);

    let mut table = Table::new(&["t", "P_boson", "P_spin"]);
    describe(&mut table, cfg, Some(&spin));
    table.meta_f64("eta_boson", sys_b.eta);
    tolerances(&mut table, &spec);
    for ((t, b), s) in times.iter().zip(boson).zip(spin_p) {
        table.push(vec![*t, b, s]);
    }
    Ok(table)
}

fn niba(cfg: &RunConfig) -> Result<Table> {
    let (delta, alpha) = (cfg.delta().map_err(anyhow::Error::msg)?, cfg.alpha().map_err(anyhow::Error::msg)?);
    let tol = cfg.tol_abs.unwrap_or(NIBA_TOL);
    let out_times = time_grid(cfg.tmax / delta, cfg.points);
    let out_step = out_times[1];
    let sub = (out_step / NIBA_STEP.min(NIBA_STEP_DELTA / delta)).ceil().max(1.0) as usize;
    let inner = time_grid(out_times[out_times.len() - 1], (cfg.points - 1) * sub + 1);
    let what =
        || format!("NIBA P(t) for the {} bath at delta = {delta}, alpha = {alpha}, T = {}", cfg.bath, cfg.temperature);
    let kernel = NibaKernel::new(cfg.bath, alpha, cfg.temperature).with_context(what)?;
    let series = niba_population(&inner, delta, &kernel, tol).with_context(what)?;

    let mut table = Table::new(&["t", "P_niba"]);
    describe(&mut table, cfg, None);
    table.meta_f64("step", inner[1]).meta_f64("tol_abs", tol);
    for (t, p) in out_times.iter().zip(series.values.iter().step_by(sub)) {
        table.push(vec![*t, *p]);
    }
    Ok(table)
}

fn shiba(cfg: &RunConfig) -> Result<Table> {
    match cfg.rows.as_deref().unwrap_or("table1") {
        "table1" => {}
        other => bail!("shiba-table: unknown row set {other:?}, expected table1"),
    }
    let columns: Vec<&str> = ShibaReport::CSV_HEADER.split(',').collect();
    let mut table = Table::new(&columns);
    table.meta("rows", "table1");
    for (row, report) in REFERENCE_TABLE.iter().zip(shiba_table()) {
        let r = report.with_context(|| format!("Shiba check at delta = {}, alpha = {}", row.delta, row.alpha))?;
        table.push(vec![r.delta, r.alpha, r.chi0_half, r.c_over_j_limit, r.ratio, r.sum_rule]);
    }
    Ok(table)
}

fn phase_diagram(cfg: &RunConfig) -> Result<Table> {
    if let Some(grid) = cfg.temperature_grid {
        let delta = cfg.delta().map_err(anyhow::Error::msg)?;
        let bath = cfg.bath;
        let rows: Vec<Vec<f64>> = grid
            .points()
            .par_iter()
            .map(|&t| {
                let a = niba_boundary(bath, t, delta)
                    .with_context(|| format!("NIBA boundary for the {bath} bath at delta = {delta}, T = {t}"))?;
                Ok(vec![t, a])
            })
            .collect::<Result<_>>()?;
        let mut table = Table::new(&["temperature", "niba_boundary"]);
        table.meta("bath", bath).meta_f64("delta", delta).meta("temperature_grid", grid);
        table.rows = rows;
        return Ok(table);
    }
    let Some(grid) = cfg.delta_grid else {
        bail!("phase-diagram needs --delta-grid start:stop:count (or --temperature-grid with --delta)");
    };
    let rows: Vec<Vec<f64>> = grid
        .points()
        .par_iter()
        .map(|&d| Ok(vec![d, critical_coupling(d).with_context(|| format!("critical coupling at delta = {d}"))?]))
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["delta", "alpha_c"]);
    table.meta("bath", BathKind::Spin).meta("delta_grid", grid);
    table.rows = rows;
    Ok(table)
}

fn ground_energy(cfg: &RunConfig) -> Result<Table> {
    let (delta, alpha) = (cfg.delta().map_err(anyhow::Error::msg)?, cfg.alpha().map_err(anyhow::Error::msg)?);
    let sys = solve_eta_spin(delta, alpha, ETA_TOL)
        .with_context(|| format!("solving eta for delta = {delta}, alpha = {alpha}"))?;
    let energy = ground_state_energy_of(&sys);
    let mut table = Table::new(&["delta", "alpha", "eta", "energy"]);
    describe(&mut table, cfg, Some(&sys));
    table.push(vec![delta, alpha, sys.eta, energy.value]);
    Ok(table)
}
