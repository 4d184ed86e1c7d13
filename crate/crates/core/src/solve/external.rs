//! Runs an external MILP solver on an exported MPS file and imports the
//! variable values it writes back.

use std::path::Path;
use std::process::Command;

use super::{export_mps, import_solution, Problem, SolveError, SolveResult};

fn quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

/// Replaces `{mps}` and `{sol}` in `template` with shell-quoted paths.
pub fn substitute_command(template: &str, mps: &Path, sol: &Path) -> String {
    template
        .replace("{mps}", &quote(mps))
        .replace("{sol}", &quote(sol))
}

/// Exports the model, runs `template` through `sh -c`, and imports the
/// solution file the command leaves at `{sol}`.
pub fn solve_external(problem: &Problem<'_>, template: &str) -> Result<SolveResult, SolveError> {
    let dir = tempfile::tempdir()?;
    let mps = dir.path().join("model.mps");
    let sol = dir.path().join("model.sol");
    export_mps(problem.model, &mps)?;
    let cmd = substitute_command(template, &mps, &sol);
    log::info!("running external solver: {cmd}");
    let output = Command::new("sh").arg("-c").arg(&cmd).output()?;
    if !output.status.success() {
        return Err(SolveError::External(format!(
            "'{cmd}' exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let text = std::fs::read_to_string(&sol)
        .map_err(|e| SolveError::External(format!("no solution file at {}: {e}", sol.display())))?;
    Ok(import_solution(&text, problem)?)
}
