//! Reporting for the acceptance run: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

/// Outcome of one criterion body: a short measurement summary, or the reason
/// it failed.
pub type Check = Result<String, String>;

pub struct Report {
    failures: Vec<&'static str>,
    passes: Vec<&'static str>,
    filters: Vec<String>,
}

impl Default for Report {
    fn default() -> Self {
        Self::new()
    }
}

impl Report {
    pub fn new() -> Self {
        Report {
            failures: Vec::new(),
            passes: Vec::new(),
            filters: Vec::new(),
        }
    }

    /// Only criteria whose name contains one of `filters` run; none means all.
    pub fn filtered(filters: Vec<String>) -> Self {
        Report {
            failures: Vec::new(),
            passes: Vec::new(),
            filters,
        }
    }

    /// Run `body` and print its line. Exceeding `budget` fails the criterion
    /// even when the body passes; a panic inside the body is a failure.
    pub fn criterion(&mut self, name: &'static str, budget: Duration, body: impl FnOnce() -> Check) -> bool {
        if !self.filters.is_empty() && !self.filters.iter().any(|f| name.contains(f.as_str())) {
            println!("SKIP {name}");
            return true;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(body))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; over budget {}", secs(budget))),
            other => other,
        };
        let (status, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{status} {name} [{} / {}] {detail}", secs(elapsed), secs(budget));
        match result {
            Ok(_) => self.passes.push(name),
            Err(_) => self.failures.push(name),
        }
        result.is_ok()
    }

    pub fn failures(&self) -> &[&'static str] {
        &self.failures
    }

    pub fn passes(&self) -> &[&'static str] {
        &self.passes
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "non-string panic".into())
}

/// `Err` with `message` unless `ok`.
pub fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}
