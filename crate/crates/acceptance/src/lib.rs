//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.

use std::fmt::Write as _;
use std::path::PathBuf;

use predift::experiment::ExperimentConfig;

/// Path of a config bundled with the `predift` crate.
pub fn bundled_config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/configs")
        .join(name)
}

pub fn load_bundled(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&bundled_config(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// One acceptance criterion and the checks that make it up.
#[derive(Debug, Default)]
pub struct Criterion {
    pub id: u32,
    pub title: String,
    checks: Vec<(bool, String)>,
    notes: Vec<String>,
}

impl Criterion {
    pub fn new(id: u32, title: impl Into<String>) -> Self {
        Self {
            id,
            title: title.into(),
            ..Default::default()
        }
    }

    /// Records a check; `detail` should carry the measured and required values.
    pub fn check(&mut self, pass: bool, detail: impl Into<String>) -> bool {
        self.checks.push((pass, detail.into()));
        pass
    }

    /// Information that does not affect the verdict.
    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|(p, _)| *p)
    }

    /// Verdict line followed by one indented line per check and note.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let failed = self.checks.iter().filter(|(p, _)| !p).count();
        let _ = writeln!(
            s,
            "criterion {}: {} - {} ({}/{} checks passed)",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len() - failed,
            self.checks.len()
        );
        for (p, d) in &self.checks {
            let _ = writeln!(s, "    [{}] {d}", if *p { "ok" } else { "FAILED" });
        }
        for n in &self.notes {
            let _ = writeln!(s, "    note: {n}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict() {
        let mut c = Criterion::new(1, "x");
        assert!(!c.passed());
        c.check(true, "a");
        assert!(c.passed());
        c.check(false, "b");
        assert!(!c.passed());
        assert!(c.render().starts_with("criterion 1: FAIL - x (1/2 checks passed)"));
    }

    #[test]
    fn bundled_configs_exist() {
        for n in ["example1.cfg", "example2.cfg", "example3.cfg"] {
            assert!(bundled_config(n).is_file(), "{n}");
        }
    }
}
