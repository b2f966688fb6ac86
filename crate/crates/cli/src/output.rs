//! CSV and JSON emission. Rationals and half-integers are always strings.

use anyhow::Result;
use clap::ValueEnum;
use kn_core::knalgebra::{GradingReport, TableRow};
use kn_core::knbasis::BasisEntry;
use kn_core::kncohomology::{BoundednessReport, CocycleEntry};
use kn_core::verify::Report;
use kn_core::{CocycleSpec, HalfInt, Rat, StructTable};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
struct CocycleRow {
    parity_pattern: String,
    n: String,
    p: usize,
    m: String,
    r: usize,
    value: String,
}

pub struct Sink {
    format: Format,
    buf: Vec<u8>,
}

fn level(l: Option<HalfInt>) -> String {
    l.map_or_else(|| "none".to_string(), |l| l.to_string())
}

impl Sink {
    pub fn new(format: Format) -> Self {
        Sink { format, buf: Vec::new() }
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    fn line(&mut self, s: &str) {
        self.buf.extend_from_slice(s.as_bytes());
        self.buf.push(b'\n');
    }

    fn json(&mut self, v: &Value) -> Result<()> {
        let text = serde_json::to_string_pretty(v)?;
        self.line(&text);
        Ok(())
    }

    /// Rows with a header line; the header is written even when empty.
    fn csv<R: Serialize>(&mut self, header: &[&str], rows: &[R]) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        self.buf.extend_from_slice(&bytes);
        Ok(())
    }

    pub fn basis(&mut self, entries: &[BasisEntry]) -> Result<()> {
        match self.format {
            Format::Csv => self.csv(&["lambda", "n", "p", "num", "den"], entries),
            Format::Json => self.json(&serde_json::to_value(entries)?),
        }
    }

    pub fn table(&mut self, table: &StructTable, rows: &[TableRow], grading: Option<&GradingReport>) -> Result<()> {
        match self.format {
            Format::Csv => {
                self.csv(&["n", "p", "m", "r", "h", "s", "coeff"], rows)?;
                let footer = match grading {
                    Some(g) => format!(
                        "# grading window={} r_low={} r_high={} outer={} outer_r_low={} outer_r_high={} stable={}",
                        g.inner,
                        g.inner_bounds.0,
                        g.inner_bounds.1,
                        g.outer,
                        g.outer_bounds.0,
                        g.outer_bounds.1,
                        g.stable
                    ),
                    None => format!("# grading window={} empty", table.window),
                };
                self.line(&footer);
                Ok(())
            }
            Format::Json => self.json(&json!({
                "op": table.op.to_string(),
                "lambda": table.lambda,
                "nu": table.nu,
                "window": table.window,
                "rows": rows,
                "grading": grading,
            })),
        }
    }

    pub fn cocycle(
        &mut self,
        spec: &CocycleSpec,
        classical: bool,
        sqrt2_odd: bool,
        entries: &[CocycleEntry<Rat>],
        bounds: &BoundednessReport,
    ) -> Result<()> {
        let rows: Vec<CocycleRow> = entries
            .iter()
            .map(|e| CocycleRow {
                parity_pattern: e.parity_pattern(),
                n: e.x.index.degree.to_string(),
                p: e.x.index.point,
                m: e.y.index.degree.to_string(),
                r: e.y.index.point,
                value: e.value.to_string(),
            })
            .collect();
        let cycle: Vec<String> = spec.cycle.coeffs().iter().map(|c| c.to_string()).collect();
        let normalization = if classical { "classical" } else { "raw" };
        match self.format {
            Format::Csv => {
                self.line(&format!("# cycle: {}", cycle.join(",")));
                self.line(&format!("# omega: {}", spec.connection.omega()));
                self.line(&format!("# normalization: {normalization}"));
                if sqrt2_odd {
                    self.line("# odd generators scaled by sqrt(2)");
                }
                self.csv(&["parity_pattern", "n", "p", "m", "r", "value"], &rows)?;
                self.line(&format!(
                    "# boundedness window={} max_level_nonzero={} min_level_nonzero={}",
                    bounds.window,
                    level(bounds.max_level_nonzero),
                    level(bounds.min_level_nonzero)
                ));
                Ok(())
            }
            Format::Json => self.json(&json!({
                "cycle": spec.cycle.coeffs(),
                "omega": spec.connection.omega().to_string(),
                "normalization": normalization,
                "sqrt2_odd": sqrt2_odd,
                "rows": rows,
                "boundedness": bounds,
            })),
        }
    }

    pub fn report(&mut self, report: &Report) -> Result<()> {
        match self.format {
            Format::Json => self.json(&serde_json::to_value(report)?),
            Format::Csv => {
                #[derive(Serialize)]
                struct Line<'a> {
                    suite: String,
                    check: &'a str,
                    status: &'static str,
                    checked: usize,
                }
                let lines: Vec<Line> = report
                    .checks
                    .iter()
                    .map(|c| Line {
                        suite: c.suite.to_string(),
                        check: &c.name,
                        status: if c.passed { "pass" } else { "fail" },
                        checked: c.checked,
                    })
                    .collect();
                self.csv(&["suite", "check", "status", "checked"], &lines)?;
                for c in report.failures() {
                    let witness = c.counterexample.as_ref().map_or_else(String::new, |v| v.to_string());
                    self.line(&format!("# counterexample {}: {}", c.name, witness));
                }
                Ok(())
            }
        }
    }
}
