//! Acceptance criteria. Prints every check, then one PASS/FAIL line per
//! criterion, and exits nonzero if any criterion fails.

use std::process::ExitCode;

use spinbath_core::reproduce::{
    boundary_condition_checks, critical_coupling_checks, method_consistency_checks, niba_checks, scaling_limit_checks,
    structure_checks, table_checks, temperature_independence_checks, Check, ReproduceOptions,
};

fn main() -> ExitCode {
    let opts = ReproduceOptions::default();
    let criteria: [(&str, fn(&ReproduceOptions) -> Vec<Check>); 8] = [
        ("1 (reference table)", table_checks),
        ("2 (critical coupling)", |_| critical_coupling_checks()),
        ("3 (scaling-limit eta)", |_| scaling_limit_checks()),
        ("4 (initial and final values)", boundary_condition_checks),
        ("5 (temperature independence)", temperature_independence_checks),
        ("6 (NIBA cross-checks)", |_| niba_checks()),
        ("7 (method consistency)", method_consistency_checks),
        ("8 (curve structure)", structure_checks),
    ];

    let mut verdicts = Vec::new();
    for (name, run) in criteria {
        let checks = run(&opts);
        for c in &checks {
            println!("{c}");
        }
        verdicts.push((name, checks.iter().all(|c| c.passed)));
    }
    println!();
    for (name, passed) in &verdicts {
        println!("{} criterion {name}", if *passed { "PASS" } else { "FAIL" });
    }
    let failed = verdicts.iter().filter(|(_, p)| !p).count();
    println!("{} of {} criteria passed", verdicts.len() - failed, verdicts.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
