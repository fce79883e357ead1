//! Wide-column carrier: cells addressed by row, column and timestamp, with
//! columns grouped into families.

use std::collections::{BTreeMap, BTreeSet};

/// One timestamped version of a cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WideCell {
    pub row: String,
    pub family: String,
    pub qualifier: String,
    pub timestamp: i64,
    pub value: String,
}

impl WideCell {
    /// `(row, family, qualifier)`, the cell address without its version.
    pub fn address(&self) -> (&str, &str, &str) {
        (&self.row, &self.family, &self.qualifier)
    }

    /// Column name `family:qualifier`.
    pub fn column(&self) -> String {
        format!("{}:{}", self.family, self.qualifier)
    }
}

/// Columns of one family.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColumnFamily {
    pub name: String,
    pub qualifiers: BTreeSet<String>,
}

/// The family called `family_name` with every qualifier seen under it.
pub fn family_of(cells: &[WideCell], family_name: &str) -> ColumnFamily {
    ColumnFamily {
        name: family_name.to_string(),
        qualifiers: cells
            .iter()
            .filter(|c| c.family == family_name)
            .map(|c| c.qualifier.clone())
            .collect(),
    }
}

/// Keeps only the newest version of every cell, ordered by address.
pub fn latest_versions(cells: &[WideCell]) -> Vec<&WideCell> {
    let mut newest: BTreeMap<(&str, &str, &str), &WideCell> = BTreeMap::new();
    for cell in cells {
        newest
            .entry(cell.address())
            .and_modify(|cur| {
                if cell.timestamp > cur.timestamp {
                    *cur = cell;
                }
            })
            .or_insert(cell);
    }
    newest.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(row: &str, family: &str, qualifier: &str, ts: i64) -> WideCell {
        WideCell {
            row: row.into(),
            family: family.into(),
            qualifier: qualifier.into(),
            timestamp: ts,
            value: format!("v{ts}"),
        }
    }

    #[test]
    fn family_collects_qualifiers() {
        let cells = [cell("com.cnn.www", "Contents", "html", 3)];
        let fam = family_of(&cells, "Contents");
        assert_eq!(fam.name, "Contents");
        assert_eq!(fam.qualifiers, BTreeSet::from(["html".to_string()]));
    }

    #[test]
    fn unseen_family_is_empty() {
        let cells = [cell("r", "Contents", "html", 1)];
        assert!(family_of(&cells, "Anchor").qualifiers.is_empty());
    }

    #[test]
    fn two_qualifiers_in_one_family() {
        let cells = [
            cell("r", "Anchor", "cnnsi.com", 1),
            cell("r", "Anchor", "my.look.ca", 2),
            cell("r", "Contents", "html", 2),
        ];
        let fam = family_of(&cells, "Anchor");
        assert_eq!(fam.qualifiers.len(), 2);
        assert!(fam.qualifiers.contains("cnnsi.com"));
        assert!(fam.qualifiers.contains("my.look.ca"));
    }

    #[test]
    fn latest_versions_keeps_newest() {
        let cells = [
            cell("r", "Contents", "html", 5),
            cell("r", "Contents", "html", 9),
            cell("r", "Contents", "html", 7),
            cell("s", "Contents", "html", 1),
        ];
        let got = latest_versions(&cells);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].timestamp, 9);
        assert_eq!(got[1].row, "s");
    }
}
