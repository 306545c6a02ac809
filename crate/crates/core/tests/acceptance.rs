//! Acceptance suite: one line per criterion at reference resolution. Exits
//! non-zero when any criterion fails.

use std::process::ExitCode;

use ch_tails::cli_io::config::{Experiment, RunConfig};
use ch_tails::scenarios::report::{ExperimentReport, Status, Verdict, CRITERIA};
use ch_tails::scenarios::studies::convergence_suite;
use ch_tails::scenarios::{
    run_compact_support, run_fast_decay, run_optimal_tail, run_peakon_validation, run_persistence,
    run_unique_continuation,
};

/// A verdict and the run it came from.
struct Entry {
    source: String,
    verdict: Verdict,
}

fn collect(entries: &mut Vec<Entry>, source: &str, report: ch_tails::error::Result<ExperimentReport>, ids: &[&str]) {
    match report {
        Ok(r) => {
            if r.status == Status::Inconclusive {
                for id in ids {
                    let detail = r.blow_up.clone().unwrap_or_default();
                    entries.push(Entry {
                        source: source.into(),
                        verdict: Verdict::new(id, "run completed", f64::NAN, 0.0, false).with_detail(detail),
                    });
                }
            }
            entries.extend(r.verdicts.into_iter().map(|verdict| Entry { source: source.into(), verdict }));
        }
        Err(e) => {
            for id in ids {
                entries.push(Entry {
                    source: source.into(),
                    verdict: Verdict::new(id, "run", f64::NAN, 0.0, false).with_detail(e.to_string()),
                });
            }
        }
    }
}

fn main() -> ExitCode {
    let reference = |e: Experiment| RunConfig::reference(e);
    let mut entries = Vec::new();

    let cfg = reference(Experiment::Persistence);
    let mut time = cfg.time.clone();
    time.checkpoints.clear();
    match cfg.grid().and_then(|g| convergence_suite(&g, &time, cfg.tolerances.conservation_tol)) {
        Ok(r) => entries.extend(r.verdicts.into_iter().map(|verdict| Entry { source: "convergence".into(), verdict })),
        Err(e) => collect(&mut entries, "convergence", Err(e), &["AC1", "AC2", "AC3", "AC11"]),
    }

    collect(&mut entries, "compact_support", run_compact_support(1.0, &reference(Experiment::CompactSupport)), &["AC4", "AC5", "AC6", "AC9"]);
    collect(
        &mut entries,
        "unique_continuation",
        run_unique_continuation(0.5, &reference(Experiment::UniqueContinuation)),
        &["AC7"],
    );
    for theta in [0.5, 0.75] {
        collect(
            &mut entries,
            &format!("persistence theta={theta}"),
            run_persistence(theta, 1.0, &reference(Experiment::Persistence)),
            &["AC8"],
        );
    }
    collect(
        &mut entries,
        "peakon_validation",
        run_peakon_validation(1.0, 0.1, 1.0, &reference(Experiment::PeakonValidation)),
        &["AC10"],
    );
    collect(&mut entries, "fast_decay", run_fast_decay(0.5, 1.0, &reference(Experiment::FastDecay)), &["AC6"]);
    collect(&mut entries, "optimal_tail", run_optimal_tail(1.0, &reference(Experiment::OptimalTail)), &["AC6"]);

    let mut all = true;
    for (id, name) in CRITERIA {
        let mine: Vec<&Entry> = entries.iter().filter(|e| e.verdict.id == id).collect();
        let failed: Vec<&&Entry> = mine.iter().filter(|e| !e.verdict.pass).collect();
        let pass = !mine.is_empty() && failed.is_empty();
        all &= pass;
        let mark = if pass { "PASS" } else { "FAIL" };
        let mut line = format!("{id:<5} {mark}  {name} ({} checks)", mine.len());
        for e in failed {
            let v = &e.verdict;
            line += &format!("; {} / {}: measured {:.4e}, tolerance {:.4e}", e.source, v.name, v.measured, v.tolerance);
            if !v.detail.is_empty() {
                line += &format!(" [{}]", v.detail);
            }
        }
        println!("{line}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
