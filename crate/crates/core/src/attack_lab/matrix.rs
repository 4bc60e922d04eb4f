//! Security-attribute matrix over all seven schemes.

use std::fmt;

use serde::Serialize;

use super::{run_scenario, AttackReport, Scenario, ScenarioOptions};
use crate::framework::SchemeId;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    /// The scheme has the attribute.
    Yes,
    No,
    /// The attribute does not apply.
    NotApplicable,
}

impl Mark {
    pub fn symbol(self) -> &'static str {
        match self {
            Mark::Yes => "✓",
            Mark::No => "×",
            Mark::NotApplicable => "−",
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowSource {
    Simulated,
    Asserted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatrixCell {
    pub scheme: SchemeId,
    pub mark: Mark,
    pub reference: Mark,
    /// Indices into [`Matrix::reports`].
    pub evidence: Vec<usize>,
}

impl MatrixCell {
    pub fn matches_reference(&self) -> bool {
        self.mark == self.reference
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatrixRow {
    pub attribute: String,
    pub source: RowSource,
    pub cells: Vec<MatrixCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Matrix {
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<SchemeId>,
    pub rows: Vec<MatrixRow>,
    /// Report summaries backing the simulated cells.
    pub reports: Vec<AttackReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub attribute: String,
    pub scheme: SchemeId,
    pub simulated: Mark,
    pub reference: Mark,
}

const Y: Mark = Mark::Yes;
const N: Mark = Mark::No;
const NA: Mark = Mark::NotApplicable;

/// Table marks in [`SchemeId::ALL`] order: wei, zhu, leeliu, lin, caozhai, xie, xu.
const REFERENCE_ROWS: [(&str, RowSource, Option<Scenario>, [Mark; 7]); 8] = [
    ("User anonymity", RowSource::Asserted, None, [N, N, Y, Y, Y, Y, Y]),
    ("Insider Attack", RowSource::Asserted, None, [Y, Y, Y, Y, Y, Y, Y]),
    ("Replay attack", RowSource::Simulated, Some(Scenario::ReplayLogin), [Y, Y, Y, Y, N, Y, Y]),
    ("Session key agreement", RowSource::Simulated, Some(Scenario::HonestKeyAgreement), [Y, N, Y, Y, Y, Y, Y]),
    ("Session key verification", RowSource::Asserted, None, [Y, NA, Y, N, Y, N, Y]),
    ("Efficient password change", RowSource::Simulated, Some(Scenario::DosViaPasswordChange), [N, N, N, N, Y, N, N]),
    (
        "User-friendly password change",
        RowSource::Simulated,
        Some(Scenario::OfflineChangeBlocked),
        [N, N, N, Y, N, Y, Y],
    ),
    ("Efficient login", RowSource::Simulated, Some(Scenario::WrongPasswordLogin), [N, N, N, N, N, N, N]),
];

/// Scenario runs behind one scheme's simulated cells.
fn evidence_runs(scheme: SchemeId, scenario: Scenario, base: &ScenarioOptions) -> Vec<ScenarioOptions> {
    if scenario == Scenario::ReplayLogin && scheme_has_timestamps(scheme) {
        return vec![
            ScenarioOptions { refresh_timestamp: false, ..base.clone() },
            ScenarioOptions { refresh_timestamp: true, ..base.clone() },
        ];
    }
    vec![base.clone()]
}

fn scheme_has_timestamps(scheme: SchemeId) -> bool {
    matches!(scheme, SchemeId::Lin | SchemeId::Xie | SchemeId::Xu)
}

/// A cell has the attribute iff none of its reports is vulnerable.
fn mark_from(reports: &[&AttackReport]) -> Mark {
    if reports.iter().any(|r| r.vulnerable) {
        Mark::No
    } else {
        Mark::Yes
    }
}

pub fn attribute_matrix(trials: usize, seed: u64) -> Result<Matrix> {
    attribute_matrix_with(&ScenarioOptions::new(trials, seed))
}

/// Runs every simulated row's scenarios, one worker thread per scheme.
pub fn attribute_matrix_with(opts: &ScenarioOptions) -> Result<Matrix> {
    let scenarios: Vec<Scenario> = REFERENCE_ROWS.iter().filter_map(|r| r.2).collect();
    let per_scheme: Vec<Result<Vec<AttackReport>>> = std::thread::scope(|s| {
        let handles: Vec<_> = SchemeId::ALL
            .iter()
            .map(|&scheme| {
                let scenarios = &scenarios;
                s.spawn(move || {
                    let mut out = Vec::new();
                    for &scenario in scenarios {
                        for o in evidence_runs(scheme, scenario, opts) {
                            out.push(run_scenario(scheme, scenario, &o)?.summary());
                        }
                    }
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("matrix worker panicked")).collect()
    });
    let mut reports = Vec::new();
    for r in per_scheme {
        reports.extend(r?);
    }

    let rows = REFERENCE_ROWS
        .iter()
        .map(|(attribute, source, scenario, reference)| {
            let cells = SchemeId::ALL
                .iter()
                .zip(reference)
                .map(|(&scheme, &reference)| {
                    let evidence: Vec<usize> = match scenario {
                        Some(sc) => reports
                            .iter()
                            .enumerate()
                            .filter(|(_, r)| r.scheme == scheme && r.scenario == *sc)
                            .map(|(i, _)| i)
                            .collect(),
                        None => Vec::new(),
                    };
                    let mark = match source {
                        RowSource::Asserted => reference,
                        RowSource::Simulated => mark_from(&evidence.iter().map(|&i| &reports[i]).collect::<Vec<_>>()),
                    };
                    MatrixCell { scheme, mark, reference, evidence }
                })
                .collect();
            MatrixRow { attribute: (*attribute).to_owned(), source: *source, cells }
        })
        .collect();

    Ok(Matrix { trials: opts.trials, seed: opts.seed, schemes: SchemeId::ALL.to_vec(), rows, reports })
}

impl Matrix {
    pub fn simulated_rows(&self) -> impl Iterator<Item = &MatrixRow> {
        self.rows.iter().filter(|r| r.source == RowSource::Simulated)
    }

    pub fn row(&self, attribute: &str) -> Option<&MatrixRow> {
        self.rows.iter().find(|r| r.attribute == attribute)
    }

    /// Simulated cells whose mark differs from the reference.
    pub fn mismatches(&self) -> Vec<Mismatch> {
        self.simulated_rows()
            .flat_map(|row| {
                row.cells.iter().filter(|c| !c.matches_reference()).map(|c| Mismatch {
                    attribute: row.attribute.clone(),
                    scheme: c.scheme,
                    simulated: c.mark,
                    reference: c.reference,
                })
            })
            .collect()
    }

    pub fn matches_reference(&self) -> bool {
        self.mismatches().is_empty()
    }

    /// Every simulated cell must cite at least one report and agree with
    /// the marks its reports imply.
    pub fn check_consistency(&self) -> std::result::Result<(), String> {
        for row in self.simulated_rows() {
            for cell in &row.cells {
                if cell.evidence.is_empty() {
                    return Err(format!("{} / {}: no supporting report", row.attribute, cell.scheme));
                }
                let mut cited = Vec::new();
                for &i in &cell.evidence {
                    let r = self
                        .reports
                        .get(i)
                        .ok_or_else(|| format!("{} / {}: dangling report #{i}", row.attribute, cell.scheme))?;
                    if r.scheme != cell.scheme {
                        return Err(format!("{} / {}: report #{i} is for {}", row.attribute, cell.scheme, r.scheme));
                    }
                    cited.push(r);
                }
                let implied = mark_from(&cited);
                if implied != cell.mark {
                    return Err(format!(
                        "{} / {}: cell {} but reports imply {}",
                        row.attribute, cell.scheme, cell.mark, implied
                    ));
                }
            }
        }
        Ok(())
    }

    fn cell_text(cell: &MatrixCell) -> String {
        if cell.matches_reference() {
            cell.mark.symbol().to_owned()
        } else {
            format!("{} (reference {})", cell.mark, cell.reference)
        }
    }

    fn grid(&self) -> Vec<Vec<String>> {
        let mut grid = Vec::with_capacity(self.rows.len() + 1);
        let mut header = vec!["Attribute".to_owned()];
        header.extend(self.schemes.iter().map(|s| s.to_string()));
        header.push("Source".to_owned());
        grid.push(header);
        for row in &self.rows {
            let mut line = vec![row.attribute.clone()];
            line.extend(row.cells.iter().map(Self::cell_text));
            line.push(match row.source {
                RowSource::Simulated => "simulated".to_owned(),
                RowSource::Asserted => "asserted".to_owned(),
            });
            grid.push(line);
        }
        grid
    }

    fn widths(grid: &[Vec<String>]) -> Vec<usize> {
        let cols = grid[0].len();
        (0..cols).map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect()
    }

    fn pad(s: &str, w: usize) -> String {
        let n = s.chars().count();
        format!("{s}{}", " ".repeat(w.saturating_sub(n)))
    }

    /// GitHub-style table with padded columns.
    pub fn to_markdown(&self) -> String {
        let grid = self.grid();
        let widths = Self::widths(&grid);
        let mut out = String::new();
        for (i, row) in grid.iter().enumerate() {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| Self::pad(c, w)).collect();
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let grid = self.grid();
        let widths = Self::widths(&grid);
        let mut out = format!("attribute matrix: {} trials per scenario, seed {}\n\n", self.trials, self.seed);
        for row in &grid {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| Self::pad(c, w)).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        let mismatches = self.mismatches();
        if mismatches.is_empty() {
            out.push_str("\nsimulated rows match the reference\n");
        } else {
            out.push_str(&format!("\n{} simulated cell(s) differ from the reference:\n", mismatches.len()));
            for m in mismatches {
                out.push_str(&format!(
                    "  {} / {}: simulated {}, reference {}\n",
                    m.attribute, m.scheme, m.simulated, m.reference
                ));
            }
        }
        out
    }
}
