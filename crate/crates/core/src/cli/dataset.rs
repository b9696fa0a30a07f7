use std::collections::HashSet;
use std::path::Path;

use super::args::DataFlags;
use super::CliError;
use crate::kernels::Input;
use crate::trees::{read_tree_file, ParsedTree, SymbolTable};

/// Target columns with their names.
#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Targets {
    pub fn column_index(&self, key: &str) -> Result<usize, CliError> {
        if let Some(i) = self.names.iter().position(|n| n == key) {
            return Ok(i);
        }
        match key.parse::<usize>() {
            Ok(i) if i < self.columns.len() => Ok(i),
            _ => Err(CliError::Usage(format!("no target column '{key}'"))),
        }
    }
}

/// Aligned tree slots, optional dense features and optional targets.
pub struct Dataset {
    pub slots: Vec<Vec<ParsedTree>>,
    pub features: Option<Vec<Vec<f64>>>,
    pub feature_names: Vec<String>,
    pub targets: Option<Targets>,
    pub rows: usize,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn parse_number(text: &str, path: &Path, line: usize) -> Result<f64, CliError> {
    text.trim().parse::<f64>().map_err(|_| CliError::Format {
        path: path.display().to_string(),
        line,
        message: format!("'{}' is not a number", text.trim()),
    })
}

/// Reads comma-separated target columns. A first line containing any
/// non-numeric field is a header; blank lines are skipped.
pub fn read_targets(path: &Path) -> Result<Targets, CliError> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let mut names = None;
    if let Some((_, first)) = lines.peek() {
        if first.split(',').any(|f| f.trim().parse::<f64>().is_err()) {
            names = Some(first.split(',').map(|f| f.trim().to_owned()).collect::<Vec<_>>());
            lines.next();
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in lines {
        let row = line.split(',').map(|f| parse_number(f, path, i + 1)).collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::Format {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    let width = rows.first().map_or(names.as_ref().map_or(1, Vec::len), Vec::len);
    let names = names.unwrap_or_else(|| (0..width).map(|i| format!("y{i}")).collect());
    if names.len() != width {
        return Err(CliError::Format {
            path: path.display().to_string(),
            line: 1,
            message: format!("header names {} columns, rows have {width}", names.len()),
        });
    }
    let columns = (0..width).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    Ok(Targets { names, columns })
}

/// Reads a dense feature CSV with a header of unique column names.
pub fn read_features(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let io = |e: csv::Error| CliError::Io { path: path.display().to_string(), message: e.to_string() };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(io)?;
    let names: Vec<String> = reader.headers().map_err(io)?.iter().map(str::to_owned).collect();
    let mut seen = HashSet::new();
    if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
        return Err(CliError::Format { path: path.display().to_string(), line: 1, message: format!("duplicate column '{dup}'") });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(io)?;
        rows.push(record.iter().map(|f| parse_number(f, path, i + 2)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok((names, rows))
}

impl Dataset {
    /// Loads every file named in `flags`, interning trees into `table`.
    pub fn load(flags: &DataFlags, table: &mut SymbolTable) -> Result<Self, CliError> {
        let slots = flags.trees.iter().map(|p| read_tree_file(p, table)).collect::<Result<Vec<_>, _>>()?;
        let (feature_names, features) = match &flags.features {
            Some(p) => {
                let (n, f) = read_features(p)?;
                (n, Some(f))
            }
            None => (Vec::new(), None),
        };
        let targets = flags.targets.as_deref().map(read_targets).transpose()?;
        if slots.is_empty() && features.is_none() {
            return Err(CliError::Usage("no inputs: pass --trees and/or --features".into()));
        }
        let mut counts: Vec<(String, usize)> = flags
            .trees
            .iter()
            .zip(&slots)
            .map(|(p, s)| (p.display().to_string(), s.len()))
            .collect();
        if let (Some(p), Some(f)) = (&flags.features, &features) {
            counts.push((p.display().to_string(), f.len()));
        }
        if let (Some(p), Some(t)) = (&flags.targets, &targets) {
            counts.push((p.display().to_string(), t.columns[0].len()));
        }
        let rows = counts[0].1;
        if let Some((path, n)) = counts.iter().find(|(_, n)| *n != rows) {
            return Err(CliError::Shape(format!("{path} has {n} rows, {} has {rows}", counts[0].0)));
        }
        let mut data = Dataset { slots, features, feature_names, targets, rows };
        if let Some(slot) = flags.per_word {
            data.divide_by_tokens(slot)?;
        }
        Ok(data)
    }

    fn divide_by_tokens(&mut self, slot: usize) -> Result<(), CliError> {
        let trees = self.slots.get(slot).ok_or_else(|| CliError::Usage(format!("--per-word slot {slot} does not exist")))?;
        let counts: Vec<f64> = trees.iter().map(|t| t.token_count().max(1) as f64).collect();
        if let Some(t) = &mut self.targets {
            for col in &mut t.columns {
                col.iter_mut().zip(&counts).for_each(|(y, c)| *y /= c);
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> Vec<Input> {
        (0..self.rows)
            .map(|r| Input {
                trees: self.slots.iter().map(|s| s[r].clone()).collect(),
                features: self.features.as_ref().map(|f| f[r].clone()),
            })
            .collect()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.features.as_ref().map(|f| f.first().map_or(self.feature_names.len(), Vec::len))
    }

    pub fn targets(&self) -> Result<&Targets, CliError> {
        self.targets.as_ref().ok_or_else(|| CliError::Usage("--targets is required".into()))
    }
}
