use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{invalid, IrtError, ItemStatus, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Correct,
    Incorrect,
    Missing,
}

impl Cell {
    pub fn from_correct(correct: bool) -> Self {
        if correct {
            Cell::Correct
        } else {
            Cell::Incorrect
        }
    }

    pub fn is_observed(self) -> bool {
        self != Cell::Missing
    }

    fn symbol(self) -> char {
        match self {
            Cell::Correct => '1',
            Cell::Incorrect => '0',
            Cell::Missing => '.',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            '1' => Some(Cell::Correct),
            '0' => Some(Cell::Incorrect),
            '.' => Some(Cell::Missing),
            _ => None,
        }
    }
}

/// Dichotomous outcomes, one row per model and one column per item.
///
/// Serialized with each row as a string of `1` (correct), `0` (incorrect)
/// and `.` (missing).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ResponseMatrix {
    model_ids: Vec<String>,
    item_ids: Vec<String>,
    cells: Vec<Cell>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    model_ids: Vec<String>,
    item_ids: Vec<String>,
    rows: Vec<String>,
}

impl From<ResponseMatrix> for MatrixRepr {
    fn from(m: ResponseMatrix) -> Self {
        let rows = (0..m.n_models())
            .map(|r| m.row(r).iter().map(|c| c.symbol()).collect())
            .collect();
        MatrixRepr { model_ids: m.model_ids, item_ids: m.item_ids, rows }
    }
}

impl TryFrom<MatrixRepr> for ResponseMatrix {
    type Error = IrtError;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let mut cells = Vec::with_capacity(repr.model_ids.len() * repr.item_ids.len());
        for (r, row) in repr.rows.iter().enumerate() {
            for ch in row.chars() {
                cells.push(
                    Cell::from_symbol(ch)
                        .ok_or_else(|| invalid(format!("row {r}: unknown cell symbol {ch:?}")))?,
                );
            }
        }
        ResponseMatrix::new(repr.model_ids, repr.item_ids, cells)
    }
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(invalid(format!("duplicate {what} id {id:?}")));
        }
    }
    Ok(())
}

impl ResponseMatrix {
    /// `cells` is row-major: all items of the first model, then the next.
    pub fn new(model_ids: Vec<String>, item_ids: Vec<String>, cells: Vec<Cell>) -> Result<Self> {
        check_unique(&model_ids, "model")?;
        check_unique(&item_ids, "item")?;
        if cells.len() != model_ids.len() * item_ids.len() {
            return Err(invalid(format!(
                "{} cells do not fill a {}x{} matrix",
                cells.len(),
                model_ids.len(),
                item_ids.len()
            )));
        }
        Ok(Self { model_ids, item_ids, cells })
    }

    pub fn from_rows(model_ids: Vec<String>, item_ids: Vec<String>, rows: Vec<Vec<Cell>>) -> Result<Self> {
        if rows.len() != model_ids.len() {
            return Err(invalid(format!("{} rows for {} models", rows.len(), model_ids.len())));
        }
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != item_ids.len()) {
            return Err(invalid(format!("row {r} has {} cells, expected {}", row.len(), item_ids.len())));
        }
        Self::new(model_ids, item_ids, rows.into_iter().flatten().collect())
    }

    /// Parses rows written as strings of `1`, `0` and `.`; ids are generated.
    pub fn from_strings(rows: &[&str]) -> Result<Self> {
        let n_items = rows.first().map_or(0, |r| r.chars().count());
        let repr = MatrixRepr {
            model_ids: (0..rows.len()).map(|m| format!("m{m}")).collect(),
            item_ids: (0..n_items).map(|i| format!("i{i}")).collect(),
            rows: rows.iter().map(|r| r.to_string()).collect(),
        };
        Self::try_from(repr)
    }

    pub fn n_models(&self) -> usize {
        self.model_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn cell(&self, model: usize, item: usize) -> Cell {
        self.cells[model * self.n_items() + item]
    }

    pub fn row(&self, model: usize) -> &[Cell] {
        let n = self.n_items();
        &self.cells[model * n..(model + 1) * n]
    }

    pub fn column(&self, item: usize) -> impl Iterator<Item = Cell> + '_ {
        (0..self.n_models()).map(move |m| self.cell(m, item))
    }

    pub fn model_index(&self, model_id: &str) -> Option<usize> {
        self.model_ids.iter().position(|m| m == model_id)
    }

    pub fn item_index(&self, item_id: &str) -> Option<usize> {
        self.item_ids.iter().position(|i| i == item_id)
    }

    /// (correct, observed) counts for one item.
    pub fn item_counts(&self, item: usize) -> (usize, usize) {
        self.column(item).fold((0, 0), |(c, o), cell| match cell {
            Cell::Correct => (c + 1, o + 1),
            Cell::Incorrect => (c, o + 1),
            Cell::Missing => (c, o),
        })
    }

    /// (correct, observed) counts for one model.
    pub fn model_counts(&self, model: usize) -> (usize, usize) {
        self.row(model).iter().fold((0, 0), |(c, o), cell| match cell {
            Cell::Correct => (c + 1, o + 1),
            Cell::Incorrect => (c, o + 1),
            Cell::Missing => (c, o),
        })
    }

    /// Keeps only the listed item columns, in the given order.
    pub fn select_items(&self, items: &[usize]) -> Self {
        let item_ids = items.iter().map(|&i| self.item_ids[i].clone()).collect();
        let mut cells = Vec::with_capacity(self.n_models() * items.len());
        for m in 0..self.n_models() {
            cells.extend(items.iter().map(|&i| self.cell(m, i)));
        }
        Self { model_ids: self.model_ids.clone(), item_ids, cells }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub item_id: String,
    pub reason: ItemStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub excluded: Vec<Exclusion>,
}

impl ExclusionReport {
    pub fn is_empty(&self) -> bool {
        self.excluded.is_empty()
    }

    pub fn reason(&self, item_id: &str) -> Option<ItemStatus> {
        self.excluded.iter().find(|e| e.item_id == item_id).map(|e| e.reason)
    }
}

/// Drops items that no observed respondent answered correctly, or that every
/// observed respondent answered correctly. Items with no observed cells at all
/// count as zero-accuracy.
pub fn filter_degenerate_items(matrix: &ResponseMatrix) -> Result<(ResponseMatrix, ExclusionReport)> {
    let mut keep = Vec::with_capacity(matrix.n_items());
    let mut report = ExclusionReport::default();
    for item in 0..matrix.n_items() {
        let (correct, observed) = matrix.item_counts(item);
        let reason = if correct == 0 {
            Some(ItemStatus::ExcludedZeroAccuracy)
        } else if correct == observed {
            Some(ItemStatus::ExcludedPerfectAccuracy)
        } else {
            None
        };
        match reason {
            Some(reason) => report
                .excluded
                .push(Exclusion { item_id: matrix.item_ids[item].clone(), reason }),
            None => keep.push(item),
        }
    }
    if keep.is_empty() {
        return Err(IrtError::EmptyMatrix);
    }
    Ok((matrix.select_items(&keep), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// First item has `correct` of `total` right; the second alternates.
    fn column_matrix(correct: usize, total: usize) -> ResponseMatrix {
        let rows: Vec<String> = (0..total)
            .map(|m| format!("{}{}", u8::from(m < correct), m % 2))
            .collect();
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        ResponseMatrix::from_strings(&refs).unwrap()
    }

    #[test]
    fn zero_accuracy_item_is_excluded() {
        let (filtered, report) = filter_degenerate_items(&column_matrix(0, 80)).unwrap();
        assert_eq!(report.reason("i0"), Some(ItemStatus::ExcludedZeroAccuracy));
        assert_eq!(filtered.item_ids(), &["i1".to_string()]);
    }

    #[test]
    fn perfect_accuracy_item_is_excluded() {
        let (_, report) = filter_degenerate_items(&column_matrix(80, 80)).unwrap();
        assert_eq!(report.reason("i0"), Some(ItemStatus::ExcludedPerfectAccuracy));
    }

    #[test]
    fn mixed_item_is_retained() {
        let (filtered, report) = filter_degenerate_items(&column_matrix(40, 80)).unwrap();
        assert!(report.is_empty());
        assert_eq!(filtered.n_items(), 2);
    }

    #[test]
    fn all_excluded_is_an_error() {
        let m = ResponseMatrix::from_strings(&["10", "10"]).unwrap();
        assert_eq!(filter_degenerate_items(&m).unwrap_err(), IrtError::EmptyMatrix);
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        assert!(ResponseMatrix::new(vec!["a".into()], vec!["x".into()], vec![]).is_err());
        assert!(ResponseMatrix::new(vec!["a".into(), "a".into()], vec![], vec![]).is_err());
        assert!(ResponseMatrix::from_strings(&["10", "1"]).is_err());
        assert!(ResponseMatrix::from_strings(&["1x"]).is_err());
    }

    #[test]
    fn serde_uses_row_strings() {
        let m = ResponseMatrix::from_strings(&["10.", "011"]).unwrap();
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["rows"], serde_json::json!(["10.", "011"]));
        let back: ResponseMatrix = serde_json::from_value(json).unwrap();
        assert_eq!(back, m);
    }
}
