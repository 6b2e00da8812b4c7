//! Acceptance suite: one line per criterion, exit status 1 if any fails.

use std::process::ExitCode;
use std::time::Instant;

use heisenberg_sft::checks::{self, Check, CheckConfig, CheckReport};

fn summary(r: &CheckReport) -> String {
    let d = &r.details;
    let pick = |k: &str| d.get(k).map(|v| format!(" {k}={v}")).unwrap_or_default();
    match r.check {
        Check::Plancherel => pick("min_order"),
        Check::Dilation => pick("identity_residual"),
        Check::Subspace => pick("table_worst"),
        Check::Hs => pick("bound_violations"),
        Check::Donoho => format!("{}{}{}", pick("cases"), pick("non_vacuous"), pick("violations")),
        Check::Chain => format!("{}{}{}", pick("mean_slack"), pick("mean_slack_refined"), pick("slack_ratio")),
        Check::Nazarov => format!(" C={} violations={}", d["c"], d["violations"]),
        Check::Price => pick("l1_interp_max_change"),
        Check::Radial => pick("parseval_worst"),
        Check::Sublaplacian => pick("min_order"),
        Check::Gram => pick("closed_form_ratio"),
        Check::Beurling => format!(" gauss={} zero={}", d["plain_gauss"]["verdict"], d["zero"]["verdict"]),
        Check::Inversion => String::new(),
    }
}

fn line(index: usize, title: &str, r: &Result<CheckReport, String>, secs: f64) -> bool {
    match r {
        Ok(r) => {
            println!(
                "[{}] {index:>2} {title}: lhs={:.4e} rhs={:.4e} slack={}{} ({secs:.1}s)",
                if r.pass { "PASS" } else { "FAIL" },
                r.lhs,
                r.rhs,
                r.slack,
                summary(r)
            );
            if let Some(note) = &r.note {
                println!("          note: {note}");
            }
            r.pass
        }
        Err(e) => {
            println!("[FAIL] {index:>2} {title}: error: {e} ({secs:.1}s)");
            false
        }
    }
}

fn single(cfg: &CheckConfig, index: usize, title: &str, check: Check) -> bool {
    let t = Instant::now();
    let r = checks::run(check, cfg).map_err(|e| e.to_string());
    line(index, title, &r, t.elapsed().as_secs_f64())
}

fn main() -> ExitCode {
    let cfg = CheckConfig::default();
    if let Err(e) = cfg.validate() {
        println!("[FAIL] configuration: {e}");
        return ExitCode::FAILURE;
    }
    let mut ok = true;

    let t = Instant::now();
    let ladder = checks::ladder_stats(&cfg);
    let secs = t.elapsed().as_secs_f64();
    let p = ladder.as_ref().map(|rows| checks::plancherel_report(&cfg, rows)).map_err(|e| e.to_string());
    let i = ladder.as_ref().map(|rows| checks::inversion_report(&cfg, rows)).map_err(|e| e.to_string());
    ok &= line(1, "Plancherel ratio and convergence order", &p, secs);
    ok &= line(2, "Inversion round trip", &i, 0.0);

    ok &= single(&cfg, 3, "Dilation covariance", Check::Dilation);
    ok &= single(&cfg, 4, "Reproducing identity", Check::Subspace);
    ok &= single(&cfg, 5, "Hilbert-Schmidt norm and closed-form bound", Check::Hs);

    let t = Instant::now();
    let base = checks::sweep(&cfg, &cfg.resolution);
    let base_secs = t.elapsed().as_secs_f64();
    let ds = base.as_ref().map(|b| checks::donoho_report(&cfg, b)).map_err(|e| e.to_string());
    ok &= line(6, "Donoho-Stark sweep", &ds, base_secs);
    let t = Instant::now();
    let fine = checks::sweep(&cfg, &cfg.resolution.lambda_refined());
    let chain = match (&base, &fine) {
        (Ok(b), Ok(f)) => Ok(checks::chain_report(&cfg, b, f)),
        (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
    };
    ok &= line(7, "Chain inequality and slack under refinement", &chain, t.elapsed().as_secs_f64());

    ok &= single(&cfg, 8, "Nazarov-type inequality", Check::Nazarov);
    ok &= single(&cfg, 9, "Price ratios and dilation invariance", Check::Price);
    ok &= single(&cfg, 10, "Radial product form and Parseval", Check::Radial);
    ok &= single(&cfg, 11, "Sublaplacian eigen-relation", Check::Sublaplacian);
    ok &= single(&cfg, 12, "Gram matrix of dilates", Check::Gram);
    ok &= single(&cfg, 13, "Beurling diagnostic", Check::Beurling);

    println!("acceptance: {}", if ok { "all criteria pass" } else { "FAILURES" });
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
