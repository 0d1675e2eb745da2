// SPDX-License-Identifier: MIT OR Apache-2.0

//! The comparison table: virtues as rows, explanations as columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::virtues::{Level, VirtueScorecard};

use super::rubric::{map_rubric, normalized_value, RubricThresholds, VIRTUES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub level: Level,
    /// The normalized value the level was read from.
    pub raw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<String>,
    /// Explanation ids, matching the scorecards.
    pub columns: Vec<String>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<Cell>>,
}

impl ComparisonTable {
    /// One column per scorecard. No scorecards gives a table with no rows.
    pub fn from_scorecards(cards: &[VirtueScorecard], t: &RubricThresholds) -> Result<Self> {
        if cards.is_empty() {
            return Ok(ComparisonTable::default());
        }
        let levels = cards.iter().map(|c| map_rubric(c, t)).collect::<Result<Vec<_>>>()?;
        let rows: Vec<String> = VIRTUES.iter().map(|(n, _)| n.to_string()).collect();
        let cells = rows
            .iter()
            .map(|r| {
                cards
                    .iter()
                    .zip(&levels)
                    .map(|(c, l)| Cell {
                        level: l[r],
                        raw: normalized_value(c, r),
                    })
                    .collect()
            })
            .collect();
        Ok(ComparisonTable {
            rows,
            columns: cards.iter().map(|c| c.id.clone()).collect(),
            cells,
        })
    }

    pub fn cell(&self, row: &str, column: &str) -> Option<Cell> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        Some(self.cells[r][c])
    }

    fn cell_text(c: &Cell) -> String {
        match c.raw {
            Some(v) => format!("{} {:.3}", c.level.glyph(), v),
            None => format!("{} -", c.level.glyph()),
        }
    }

    /// Fixed-width text with ✓, ○, and ✗ for high, weak, and none.
    pub fn render_text(&self) -> String {
        let texts: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|r| r.iter().map(Self::cell_text).collect())
            .collect();
        let first = self
            .rows
            .iter()
            .map(|r| r.chars().count())
            .chain([6])
            .max()
            .unwrap_or(6);
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                texts
                    .iter()
                    .map(|r| r[j].chars().count())
                    .chain([c.chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w - s.chars().count()));
        let mut lines = Vec::new();
        let mut header = pad("virtue", first);
        for (c, &w) in self.columns.iter().zip(&widths) {
            header.push_str("  ");
            header.push_str(&pad(c, w));
        }
        lines.push(header.trim_end().to_string());
        for (r, row) in self.rows.iter().zip(&texts) {
            let mut line = pad(r, first);
            for (t, &w) in row.iter().zip(&widths) {
                line.push_str("  ");
                line.push_str(&pad(t, w));
            }
            lines.push(line.trim_end().to_string());
        }
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    /// Long format: one record per cell with `virtue,explanation,level,raw`.
    /// Raw values use the shortest representation that parses back exactly.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["virtue", "explanation", "level", "raw"])?;
        for (r, row) in self.rows.iter().zip(&self.cells) {
            for (c, cell) in self.columns.iter().zip(row) {
                let level = cell.level.glyph().to_string();
                let raw = cell.raw.map(|v| v.to_string()).unwrap_or_default();
                w.write_record([r.as_str(), c.as_str(), &level, &raw])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut t = ComparisonTable::default();
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 4 {
                return Err(Error::InvalidArgument(format!("table record has {} fields", rec.len())));
            }
            let mut chars = rec[2].chars();
            let level = match (chars.next().and_then(Level::from_glyph), chars.next()) {
                (Some(l), None) => l,
                _ => return Err(Error::InvalidArgument(format!("unknown level `{}`", &rec[2]))),
            };
            let raw = if rec[3].is_empty() {
                None
            } else {
                Some(
                    rec[3]
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidArgument(format!("raw value: {e}")))?,
                )
            };
            if !t.rows.iter().any(|r| r == &rec[0]) {
                t.rows.push(rec[0].to_string());
            }
            if !t.columns.iter().any(|c| c == &rec[1]) {
                t.columns.push(rec[1].to_string());
            }
            entries.push((rec[0].to_string(), rec[1].to_string(), Cell { level, raw }));
        }
        let mut cells: Vec<Vec<Option<Cell>>> = vec![vec![None; t.columns.len()]; t.rows.len()];
        for (r, c, cell) in entries {
            let i = t.rows.iter().position(|x| *x == r).expect("row recorded");
            let j = t.columns.iter().position(|x| *x == c).expect("column recorded");
            cells[i][j] = Some(cell);
        }
        t.cells = cells
            .into_iter()
            .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("table CSV is missing cells".into()))?;
        Ok(t)
    }
}
