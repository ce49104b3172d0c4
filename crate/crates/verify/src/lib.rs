//! Pass/fail bookkeeping for the acceptance run.
//!
//! Each criterion runs in isolation; a panic inside one is recorded as a
//! failure of that criterion and the run continues.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Default)]
pub struct Report {
    outcomes: Vec<Outcome>,
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".to_string()
    }
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    /// Runs one criterion. `Ok(detail)` passes, `Err(detail)` fails.
    pub fn run(&mut self, id: usize, title: &'static str, check: impl FnOnce() -> Result<String, String>) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(p) => (false, format!("panicked: {}", panic_message(p.as_ref()))),
        };
        let outcome = Outcome {
            id,
            title,
            passed,
            detail,
            elapsed,
        };
        println!("{}", render(&outcome));
        self.outcomes.push(outcome);
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| !o.passed).count()
    }

    /// Prints the tally; failure exit status if any criterion failed.
    pub fn finish(self) -> ExitCode {
        let failed = self.failures();
        println!(
            "\nacceptance: {} passed, {} failed of {}",
            self.outcomes.len() - failed,
            failed,
            self.outcomes.len()
        );
        if failed == 0 {
            ExitCode::SUCCESS
        } else {
            let ids: Vec<String> = self
                .outcomes
                .iter()
                .filter(|o| !o.passed)
                .map(|o| o.id.to_string())
                .collect();
            println!("failing criteria: {}", ids.join(", "));
            ExitCode::FAILURE
        }
    }
}

pub fn render(o: &Outcome) -> String {
    format!(
        "criterion {:>2} {} [{:.2?}] {}: {}",
        o.id,
        if o.passed { "PASS" } else { "FAIL" },
        o.elapsed,
        o.title,
        o.detail
    )
}
