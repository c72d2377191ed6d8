//! Pass/fail bookkeeping for the acceptance run.

use std::panic::{catch_unwind, AssertUnwindSafe};

/// Outcome of one check: whether it held and what was measured.
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Default)]
pub struct Tally {
    passed: usize,
    failed: Vec<String>,
}

impl Tally {
    /// Runs `check`, printing one line. A panic counts as a failure.
    pub fn run(&mut self, label: &str, check: impl FnOnce() -> Outcome) {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Outcome::new(false, format!("error: {msg}"))
        });
        println!("{label:<13} {}  {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        if outcome.pass {
            self.passed += 1;
        } else {
            self.failed.push(label.to_string());
        }
    }

    pub fn failed(&self) -> &[String] {
        &self.failed
    }

    /// Prints the summary and returns the process exit code.
    pub fn finish(self) -> i32 {
        println!();
        println!("{} passed, {} failed", self.passed, self.failed.len());
        if self.failed.is_empty() {
            0
        } else {
            println!("failed: {}", self.failed.join(", "));
            1
        }
    }
}
