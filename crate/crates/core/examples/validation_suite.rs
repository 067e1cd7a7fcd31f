//! Quick pass of the numerical checks, one line per check.

fn main() {
    let reports = ramsey_spectrum::validate::run_all(true);
    for r in &reports {
        println!("{}", r.summary_line());
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} of {} checks passed", reports.len() - failed, reports.len());
}
