//! Buffered per-problem output. Each problem renders into its own report so
//! batch runs can execute concurrently and still print in list order.

use std::fmt::Write;

use epddl::diagnostic::has_errors;
use epddl::{Diagnostic, Severity, SourceMap};
use serde_json::{json, Value};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Ok = 0,
    Errors = 1,
    Io = 2,
    Exhausted = 3,
}

#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub json: bool,
    pub color: bool,
}

impl Style {
    /// Coloring is on when `EPDDL_COLOR` is set to anything but `0`, `never` or empty.
    pub fn from_env(json: bool) -> Self {
        let color = std::env::var("EPDDL_COLOR")
            .map(|v| !matches!(v.as_str(), "" | "0" | "never" | "false"))
            .unwrap_or(false);
        Style { json, color }
    }
}

#[derive(Debug)]
pub struct Report {
    pub style: Style,
    pub out: String,
    pub err: String,
    pub exit: Exit,
}

impl Report {
    pub fn new(style: Style) -> Self {
        Report {
            style,
            out: String::new(),
            err: String::new(),
            exit: Exit::Ok,
        }
    }

    pub fn fail(&mut self, exit: Exit) {
        self.exit = self.exit.max(exit);
    }

    /// A structured record: a JSON line in `--json` mode, otherwise nothing.
    pub fn record(&mut self, value: Value) {
        if self.style.json {
            writeln!(self.out, "{value}").unwrap();
        }
    }

    /// Plain text for stdout; suppressed in `--json` mode.
    pub fn text(&mut self, line: impl AsRef<str>) {
        if !self.style.json {
            writeln!(self.out, "{}", line.as_ref()).unwrap();
        }
    }

    /// Diagnostics go to stderr as lines, or to stdout as records. Errors set exit 1.
    pub fn diagnostics(&mut self, files: &SourceMap, diags: &[Diagnostic]) {
        for d in diags {
            if self.style.json {
                writeln!(
                    self.out,
                    "{}",
                    serde_json::to_string(&d.to_record(files)).unwrap()
                )
                .unwrap();
            } else {
                let line = d.render_line(files);
                let line = match (self.style.color, d.severity) {
                    (false, _) => line,
                    (true, Severity::Error) => format!("\x1b[31m{line}\x1b[0m"),
                    (true, Severity::Warning) => format!("\x1b[33m{line}\x1b[0m"),
                };
                writeln!(self.err, "{line}").unwrap();
            }
        }
        if has_errors(diags) {
            self.fail(Exit::Errors);
        }
    }

    pub fn io_error(&mut self, path: &str, message: impl std::fmt::Display) {
        if self.style.json {
            let rec = json!({"kind": "io_error", "path": path, "message": message.to_string()});
            writeln!(self.out, "{rec}").unwrap();
        } else {
            writeln!(self.err, "error: {path}: {message}").unwrap();
        }
        self.fail(Exit::Io);
    }
}
