//! Run-directory persistence: resolved config echo, state snapshots,
//! diagnostics CSV and the monitor summary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use configforce::diagnostics::DiagnosticsReport;
use configforce::evolution::{RunSink, State};
use configforce::Grid1D;

/// Sink that writes one snapshot CSV per recorded frame.
pub struct DirSink {
    dir: PathBuf,
    grid: Grid1D,
    pub error: Option<std::io::Error>,
}

impl DirSink {
    pub fn new(dir: &Path, grid: &Grid1D) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            grid: grid.clone(),
            error: None,
        })
    }

    fn write_snapshot(&self, index: usize, state: &State) -> std::io::Result<()> {
        let path = self.dir.join(format!("state_{index:05}.csv"));
        let mut f = fs::File::create(path)?;
        writeln!(f, "# t = {:.16e}", state.time)?;
        writeln!(f, "x,s,u1,u2,u3,t11,t22,t33,t12,t13,t23")?;
        for (i, x) in self.grid.nodes().enumerate() {
            let u = &state.elastic.displacement[i];
            let t = &state.elastic.stress[i];
            writeln!(
                f,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                x, state.s[i], u[0], u[1], u[2], t.a11, t.a22, t.a33, t.a12, t.a13, t.a23
            )?;
        }
        Ok(())
    }
}

impl RunSink for DirSink {
    fn on_frame(&mut self, frame_index: usize, state: &State) {
        if self.error.is_none() {
            if let Err(e) = self.write_snapshot(frame_index, state) {
                self.error = Some(e);
            }
        }
    }
}

/// Monitor verdicts for the run summary; `passed` gates the exit code.
pub struct Summary {
    pub lines: Vec<(String, bool)>,
}

impl Summary {
    pub fn from_report(report: &DiagnosticsReport, body_is_zero: bool) -> Self {
        let mut lines = Vec::new();
        let max_ok = report.max_principle_excess <= 1e-8;
        lines.push((
            format!(
                "maximum principle: worst excess {:.3e} (bound 1e-8)",
                report.max_principle_excess
            ),
            max_ok,
        ));
        if body_is_zero {
            let allowance = 1e-8 * report.initial_energy.max(1.0);
            let energy_ok = report.max_energy_step_increase <= allowance;
            lines.push((
                format!(
                    "energy monotone: worst step increase {:.3e} (allowance {:.3e})",
                    report.max_energy_step_increase, allowance
                ),
                energy_ok,
            ));
        }
        let finite = report
            .records
            .iter()
            .all(|r| r.energy.is_finite() && r.sup_s.is_finite());
        lines.push(("all monitored quantities finite".into(), finite));
        Self { lines }
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|(_, ok)| *ok)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (line, ok) in &self.lines {
            out.push_str(if *ok { "[pass] " } else { "[FAIL] " });
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(if self.passed() {
            "result: pass\n"
        } else {
            "result: FAIL\n"
        });
        out
    }
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content)
}
