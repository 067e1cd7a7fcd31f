//! Acceptance criteria 1–12, run in order with one PASS/FAIL line each.
//!
//! Custom harness: every criterion runs even if an earlier one fails, and the
//! lines are printed unconditionally. Arguments that do not start with `-`
//! select criteria by substring, e.g. `cargo test --test acceptance -- truncation`.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use ramsey_spectrum::validate::{self, CheckReport};

type Criterion = (&'static str, fn() -> CheckReport);

const CRITERIA: [Criterion; 12] = [
    ("criterion_01_oracle_equivalence", || validate::check_oracle_equivalence(false)),
    ("criterion_02_trace_bw_vs_swap_sum", || validate::check_trace_bw(false)),
    ("criterion_03_permutation_traces", || validate::check_permutation_traces(false)),
    ("criterion_04_meanfield_pipeline", || validate::check_meanfield(false)),
    ("criterion_05_asymptotic_convergence", validate::check_asymptotic_convergence),
    ("criterion_06_energy_degeneracy", validate::check_energy_degeneracy),
    ("criterion_07_eyd_normalization_and_concentration", || validate::check_eyd(false)),
    ("criterion_08_shot_variance", validate::check_shot_variance),
    ("criterion_09_round_trip_estimation", validate::check_round_trip),
    ("criterion_10_truncation", validate::check_truncation),
    ("criterion_11_loss_and_imperfections", validate::check_loss_limits),
    ("criterion_12_physical_constants", validate::check_physical_constants),
];

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected: Vec<&Criterion> =
        CRITERIA.iter().filter(|(name, _)| filters.is_empty() || filters.iter().any(|f| name.contains(f.as_str()))).collect();

    let start = Instant::now();
    let mut failed = Vec::new();
    for (name, check) in selected.iter().copied() {
        match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => {
                println!("{}", r.summary_line());
                for m in &r.measurements {
                    println!("    {} = {:.6e} (bound {:.3e})", m.name, m.value, m.bound);
                }
                if !r.passed() {
                    failed.push(*name);
                }
            }
            Err(_) => {
                println!("FAIL {name} panicked");
                failed.push(*name);
            }
        }
    }
    println!("\nacceptance: {} passed; {} failed; finished in {:.2}s", selected.len() - failed.len(), failed.len(), start.elapsed().as_secs_f64());
    for name in &failed {
        println!("    failed: {name}");
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
