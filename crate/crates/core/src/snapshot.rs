//! Text snapshots of a store and its source registry.
//!
//! ```text
//! efgrid-v1
//! source<TAB>name<TAB>kind<TAB>records<TAB>associations
//! cover<TAB>source<TAB>entity<TAB>count
//! entity<TAB>feature<TAB>count
//! ```
//!
//! Source lines are sorted by name, cover lines by source then entity, and
//! association lines by entity then feature, all on canonical forms. The
//! output depends only on store content. A store that has not been frozen
//! yet can be written as a working file with the header `efgrid-v1-draft`;
//! [`load`] only accepts frozen snapshots.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::id::{EntityId, FeatureId};
use crate::source::{SourceDescriptor, SourceKind};
use crate::store::AssociationStore;

pub const FORMAT_VERSION: u32 = 1;
pub const HEADER: &str = "efgrid-v1";
pub const DRAFT_HEADER: &str = "efgrid-v1-draft";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("only frozen stores can be saved as snapshots")]
    NotFrozen,
    #[error("unsupported snapshot header {0:?} (expected {HEADER:?})")]
    Version(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

struct CountingWriter<W> {
    inner: W,
    written: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Writes the store in snapshot layout (draft header if not frozen) and
/// returns the number of bytes written.
pub fn write_snapshot<W: Write>(store: &AssociationStore, writer: W) -> io::Result<u64> {
    let mut w = CountingWriter {
        inner: writer,
        written: 0,
    };
    writeln!(
        w,
        "{}",
        if store.is_frozen() {
            HEADER
        } else {
            DRAFT_HEADER
        }
    )?;
    for s in store.sources() {
        writeln!(
            w,
            "source\t{}\t{}\t{}\t{}",
            s.name, s.kind, s.records_ingested, s.associations_added
        )?;
    }
    for s in store.sources() {
        for (entity, n) in store.coverage(&s.name).into_iter().flatten() {
            writeln!(w, "cover\t{}\t{}\t{}", s.name, entity, n)?;
        }
    }
    write_associations(store, &mut w)?;
    w.flush()?;
    Ok(w.written)
}

/// One `entity<TAB>feature<TAB>count` line per stored association.
pub fn write_associations<W: Write>(store: &AssociationStore, mut writer: W) -> io::Result<()> {
    for (e, f, n) in store.associations() {
        writeln!(writer, "{e}\t{f}\t{n}")?;
    }
    Ok(())
}

pub fn to_bytes(store: &AssociationStore) -> Vec<u8> {
    let mut out = Vec::new();
    write_snapshot(store, &mut out).expect("writing to a Vec cannot fail");
    out
}

/// Freezes the store in place. Idempotent.
pub fn freeze(store: &mut AssociationStore) -> &AssociationStore {
    store.freeze();
    store
}

/// Saves a frozen store to `path`, returning the byte count.
pub fn save(store: &AssociationStore, path: &Path) -> Result<u64, SnapshotError> {
    if !store.is_frozen() {
        return Err(SnapshotError::NotFrozen);
    }
    save_any(store, path)
}

/// Saves a store whether or not it is frozen.
pub fn save_any(store: &AssociationStore, path: &Path) -> Result<u64, SnapshotError> {
    let file = File::create(path)?;
    let n = write_snapshot(store, BufWriter::new(file))?;
    Ok(n)
}

/// Loads a frozen snapshot.
pub fn load(path: &Path) -> Result<AssociationStore, SnapshotError> {
    read_snapshot(BufReader::new(File::open(path)?), false)
}

/// Loads a frozen snapshot or a draft working file.
pub fn open(path: &Path) -> Result<AssociationStore, SnapshotError> {
    read_snapshot(BufReader::new(File::open(path)?), true)
}

#[derive(PartialEq, PartialOrd)]
enum Section {
    Sources,
    Cover,
    Associations,
}

pub fn read_snapshot<R: BufRead>(
    reader: R,
    allow_draft: bool,
) -> Result<AssociationStore, SnapshotError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let frozen = match header.as_str() {
        HEADER => true,
        DRAFT_HEADER if allow_draft => false,
        _ => return Err(SnapshotError::Version(header)),
    };

    let mut store = AssociationStore::new();
    let mut section = Section::Sources;
    let mut last_source: Option<String> = None;
    let mut last_cover: Option<(String, EntityId)> = None;
    let mut last_pair: Option<(EntityId, FeatureId)> = None;

    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        let bad = |message: String| SnapshotError::Malformed {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let count = |s: &str| -> Result<u64, SnapshotError> {
            match s.parse::<u64>() {
                Ok(n) => Ok(n),
                Err(_) => Err(bad(format!("invalid count {s:?}"))),
            }
        };
        let positive = |s: &str| match count(s)? {
            0 => Err(bad("count must be positive".into())),
            n => Ok(n),
        };

        match fields[0] {
            "source" => {
                if section > Section::Sources {
                    return Err(bad("source line after cover or association lines".into()));
                }
                if fields.len() != 5 {
                    return Err(bad(format!(
                        "source line needs 5 fields, found {}",
                        fields.len()
                    )));
                }
                let name = fields[1].to_string();
                let kind: SourceKind = fields[2].parse().map_err(|e| bad(format!("{e}")))?;
                crate::id::validate_namespace(&name).map_err(|e| bad(e.to_string()))?;
                if last_source.as_ref().is_some_and(|prev| *prev >= name) {
                    return Err(bad(format!("source {name:?} out of order or repeated")));
                }
                store.restore_source(SourceDescriptor {
                    name: name.clone(),
                    kind,
                    records_ingested: count(fields[3])?,
                    associations_added: count(fields[4])?,
                });
                last_source = Some(name);
            }
            "cover" => {
                if section > Section::Cover {
                    return Err(bad("cover line after association lines".into()));
                }
                section = Section::Cover;
                if fields.len() != 4 {
                    return Err(bad(format!(
                        "cover line needs 4 fields, found {}",
                        fields.len()
                    )));
                }
                let source = fields[1].to_string();
                if store.source(&source).is_none() {
                    return Err(bad(format!("cover line names unknown source {source:?}")));
                }
                let entity: EntityId = fields[2].parse().map_err(|e| bad(format!("{e}")))?;
                let key = (source, entity);
                if last_cover.as_ref().is_some_and(|prev| *prev >= key) {
                    return Err(bad("cover lines out of order or repeated".into()));
                }
                store.restore_coverage(&key.0, key.1.clone(), positive(fields[3])?);
                last_cover = Some(key);
            }
            _ => {
                section = Section::Associations;
                if fields.len() != 3 {
                    return Err(bad(format!(
                        "association line needs 3 fields, found {}",
                        fields.len()
                    )));
                }
                let entity: EntityId = fields[0].parse().map_err(|e| bad(format!("{e}")))?;
                let feature: FeatureId = fields[1].parse().map_err(|e| bad(format!("{e}")))?;
                let n = positive(fields[2])?;
                let key = (entity, feature);
                if last_pair.as_ref().is_some_and(|prev| *prev >= key) {
                    return Err(bad("association lines out of order or repeated".into()));
                }
                store.restore_association(key.0.clone(), key.1.clone(), n);
                last_pair = Some(key);
            }
        }
    }
    if frozen {
        store.freeze();
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::FeatureKind;

    fn sample() -> AssociationStore {
        let mut store = AssociationStore::new();
        store.register_source("kv1", SourceKind::Kv).unwrap();
        let red = EntityId::new("kv1", "red").unwrap();
        let blue = EntityId::new("kv1", "blue").unwrap();
        let color = FeatureId::new(FeatureKind::Kv, "color", "");
        store.add_from_source("kv1", red, color.clone(), 2).unwrap();
        store.add_from_source("kv1", blue, color, 1).unwrap();
        store.note_record("kv1").unwrap();
        store.freeze();
        store
    }

    #[test]
    fn empty_store_is_header_only() {
        let mut store = AssociationStore::new();
        freeze(&mut store);
        assert_eq!(to_bytes(&store), b"efgrid-v1\n");
    }

    #[test]
    fn layout_is_sorted() {
        let text = String::from_utf8(to_bytes(&sample())).unwrap();
        assert_eq!(
            text,
            "efgrid-v1\n\
             source\tkv1\tkv\t1\t3\n\
             cover\tkv1\tkv1/blue\t1\n\
             cover\tkv1\tkv1/red\t2\n\
             kv1/blue\tkv:color=\t1\n\
             kv1/red\tkv:color=\t2\n"
        );
    }

    #[test]
    fn draft_header_for_unfrozen() {
        let store = AssociationStore::new();
        assert_eq!(to_bytes(&store), b"efgrid-v1-draft\n");
        let back = read_snapshot(&b"efgrid-v1-draft\n"[..], true).unwrap();
        assert!(!back.is_frozen());
        assert!(matches!(
            read_snapshot(&b"efgrid-v1-draft\n"[..], false),
            Err(SnapshotError::Version(_))
        ));
    }

    #[test]
    fn round_trip_in_memory() {
        let store = sample();
        let back = read_snapshot(&to_bytes(&store)[..], false).unwrap();
        assert_eq!(back, store);
        assert!(back.is_frozen());
        assert_eq!(to_bytes(&back), to_bytes(&store));
    }

    #[test]
    fn save_requires_frozen() {
        let dir = tempfile::tempdir().unwrap();
        let store = AssociationStore::new();
        assert!(matches!(
            save(&store, &dir.path().join("x")),
            Err(SnapshotError::NotFrozen)
        ));
    }

    #[test]
    fn save_reports_bytes_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        let store = sample();
        let n = save(&store, &a).unwrap();
        save(&store, &b).unwrap();
        let bytes = std::fs::read(&a).unwrap();
        assert_eq!(n as usize, bytes.len());
        assert_eq!(bytes, std::fs::read(&b).unwrap());
        assert_eq!(load(&a).unwrap(), store);
    }

    #[test]
    fn corrupted_count_names_the_line() {
        let text = "efgrid-v1\nglobal/a\tattr:x=\t1\nglobal/b\tattr:x=\tmany\n";
        match read_snapshot(text.as_bytes(), false) {
            Err(SnapshotError::Malformed { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("many"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_header_is_a_version_error() {
        let err = read_snapshot(&b"efgrid-v2\n"[..], false).unwrap_err();
        assert!(matches!(err, SnapshotError::Version(h) if h == "efgrid-v2"));
        assert!(matches!(
            read_snapshot(&b""[..], false),
            Err(SnapshotError::Version(_))
        ));
    }

    #[test]
    fn malformed_bodies() {
        let cases = [
            "efgrid-v1\nglobal/a\tattr:x=\t0\n",
            "efgrid-v1\nglobal/b\tattr:x=\t1\nglobal/a\tattr:x=\t1\n",
            "efgrid-v1\nglobal/a\tattr:x=\t1\nglobal/a\tattr:x=\t1\n",
            "efgrid-v1\ncover\tnobody\tglobal/a\t1\n",
            "efgrid-v1\nglobal/a\tattr:x=\t1\nsource\ts\tkv\t0\t0\n",
            "efgrid-v1\nsource\ts\tzip\t0\t0\n",
            "efgrid-v1\nnoslash\tattr:x=\t1\n",
            "efgrid-v1\nglobal/a\tattr:x=\n",
        ];
        for text in cases {
            assert!(
                matches!(
                    read_snapshot(text.as_bytes(), false),
                    Err(SnapshotError::Malformed { line: 2..=3, .. })
                ),
                "accepted {text:?}"
            );
        }
    }
}
