use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Columns `d, h_exact, h_asym`.
    HVersusD,
    /// Columns `a, gamma_exact, gamma_asym`.
    Gamma,
}

/// Writes a gnuplot script next to the CSV table at `table` and returns its
/// path. The table must exist and hold at least one data row.
pub fn emit_plot_script(table: &Path, kind: PlotKind) -> Result<PathBuf, CliError> {
    let contents = fs::read_to_string(table).map_err(|e| CliError::io(table, e))?;
    let rows = contents.lines().skip(1).filter(|l| !l.trim().is_empty()).count();
    if rows == 0 {
        return Err(CliError::Usage(format!("{} has no data rows", table.display())));
    }
    let name = table
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::Usage(format!("{} is not a file path", table.display())))?;
    let stem = table.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    let (xlabel, ylabel, exact_style, asym_style, asym_title) = match kind {
        PlotKind::HVersusD => ("d", "h", "points pt 6", "points pt 2", "asymptotic"),
        PlotKind::Gamma => ("a", "<a|Gamma>", "points pt 6", "linespoints pt 7 ps 0.5", "Gaussian"),
    };
    let script = format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 800,600\n\
         set output '{stem}.png'\n\
         set xlabel '{xlabel}'\n\
         set ylabel '{ylabel}'\n\
         set key top right autotitle columnhead\n\
         plot '{name}' using 1:2 with {exact_style} title 'exact', \\\n     \
         '{name}' using 1:3 with {asym_style} title '{asym_title}'\n"
    );
    let path = table.with_extension("gp");
    fs::write(&path, script).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_table_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plot_script(&dir.path().join("none.csv"), PlotKind::Gamma).is_err());
    }

    #[test]
    fn empty_table_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let table = dir.path().join("h.csv");
        fs::write(&table, "d,h_exact,h_asym\n").unwrap();
        assert!(emit_plot_script(&table, PlotKind::HVersusD).is_err());
        assert!(!dir.path().join("h.gp").exists());
    }

    #[test]
    fn script_references_table() {
        let dir = tempfile::tempdir().unwrap();
        let table = dir.path().join("h.csv");
        fs::write(&table, "d,h_exact,h_asym\n2,0.7,0.2\n").unwrap();
        let script = emit_plot_script(&table, PlotKind::HVersusD).unwrap();
        let text = fs::read_to_string(script).unwrap();
        assert!(text.contains("'h.csv' using 1:2 with points"));
        assert!(text.contains("title 'asymptotic'"));
    }
}
