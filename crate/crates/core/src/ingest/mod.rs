//! Reading carrier files into an [`AssociationStore`].
//!
//! Every non-blank, non-comment line either becomes exactly one record or
//! exactly one diagnostic; bad lines are reported and skipped. A line is
//! applied to the store only after it has parsed and mapped successfully.

mod parse;

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use parse::{parse_doc, parse_graph_line, parse_kv, parse_ntriples, parse_wide, ParseError};

use crate::carriers::{
    map_to_associations, validate_cell, GraphElement, KvMode, MappingContext, Record,
};
use crate::id::{validate_namespace, IdError};
use crate::source::SourceKind;
use crate::store::{AssociationStore, StoreError};

pub use crate::source::SourceDescriptor;

/// Lines longer than this many bytes are rejected.
pub const MAX_LINE_BYTES: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("invalid entity namespace: {0}")]
    Namespace(IdError),
}

/// A diagnostic tied to a 1-based input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestReport {
    /// The source's registration after this run.
    pub source: SourceDescriptor,
    pub parse_errors: Vec<LineError>,
    /// Accepted lines worth flagging, such as a repeated document id.
    pub warnings: Vec<LineError>,
    pub accepted: usize,
}

impl IngestReport {
    /// Non-blank, non-comment lines seen.
    pub fn lines_processed(&self) -> usize {
        self.accepted + self.parse_errors.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Entity namespace; defaults to the source name.
    pub namespace: Option<String>,
    pub kv_mode: KvMode,
    /// Count each wide-column cell once, however many versions it has.
    pub latest_only: bool,
}

/// Reads `path` as a `kind` file into `store` under source `source_name`.
pub fn ingest(
    path: &Path,
    kind: SourceKind,
    source_name: &str,
    store: &mut AssociationStore,
) -> Result<IngestReport, IngestError> {
    ingest_with(path, kind, source_name, store, &IngestOptions::default())
}

pub fn ingest_with(
    path: &Path,
    kind: SourceKind,
    source_name: &str,
    store: &mut AssociationStore,
    options: &IngestOptions,
) -> Result<IngestReport, IngestError> {
    if store.is_frozen() {
        return Err(StoreError::Frozen.into());
    }
    let io_err = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    ingest_reader(BufReader::new(file), kind, source_name, store, options).map_err(|e| match e {
        IngestError::Io { source, .. } => io_err(source),
        other => other,
    })
}

/// Per-run state for checks that span lines.
#[derive(Default)]
struct Seen {
    cells: HashSet<(String, String, String, i64)>,
    addresses: HashSet<(String, String, String)>,
    doc_ids: HashSet<String>,
    root: bool,
}

enum Outcome {
    Record(Record),
    /// Accepted, but contributes no associations.
    Skip,
}

pub fn ingest_reader<R: BufRead>(
    mut reader: R,
    kind: SourceKind,
    source_name: &str,
    store: &mut AssociationStore,
    options: &IngestOptions,
) -> Result<IngestReport, IngestError> {
    let namespace = options.namespace.as_deref().unwrap_or(source_name);
    validate_namespace(namespace).map_err(IngestError::Namespace)?;
    store.register_source(source_name, kind)?;
    let ctx = MappingContext::new(namespace).with_kv_mode(options.kv_mode);

    let mut parse_errors = Vec::new();
    let mut warnings = Vec::new();
    let mut accepted = 0;
    let mut seen = Seen::default();
    let mut buf = Vec::new();
    let mut line_no = 0;

    while let Some(fits) =
        read_bounded_line(&mut reader, &mut buf, MAX_LINE_BYTES).map_err(|source| {
            IngestError::Io {
                path: PathBuf::new(),
                source,
            }
        })?
    {
        line_no += 1;
        let mut fail = |message: String| {
            parse_errors.push(LineError {
                line: line_no,
                message,
            })
        };
        if !fits {
            fail(format!("line exceeds {MAX_LINE_BYTES} bytes"));
            continue;
        }
        let Ok(line) = std::str::from_utf8(&buf) else {
            fail("invalid UTF-8".to_string());
            continue;
        };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let outcome = match read_record(line, kind, options, &mut seen, &mut warnings, line_no) {
            Ok(o) => o,
            Err(message) => {
                fail(message);
                continue;
            }
        };
        let associations = match &outcome {
            Outcome::Record(r) => match map_to_associations(r, &ctx) {
                Ok(a) => a,
                Err(e) => {
                    fail(e.to_string());
                    continue;
                }
            },
            Outcome::Skip => Vec::new(),
        };
        store.note_record(source_name)?;
        for a in associations {
            store.add_from_source(source_name, a.entity, a.feature, a.count)?;
        }
        accepted += 1;
    }

    let source = store
        .source(source_name)
        .cloned()
        .expect("source was registered above");
    Ok(IngestReport {
        source,
        parse_errors,
        warnings,
        accepted,
    })
}

fn read_record(
    line: &str,
    kind: SourceKind,
    options: &IngestOptions,
    seen: &mut Seen,
    warnings: &mut Vec<LineError>,
    line_no: usize,
) -> Result<Outcome, String> {
    let err = |e: ParseError| e.to_string();
    Ok(match kind {
        SourceKind::Kv => Outcome::Record(Record::Kv(parse_kv(line).map_err(err)?)),
        SourceKind::Wide => {
            let cell = parse_wide(line).map_err(err)?;
            validate_cell(&cell).map_err(|e| e.to_string())?;
            let version = (
                cell.row.clone(),
                cell.family.clone(),
                cell.qualifier.clone(),
                cell.timestamp,
            );
            if !seen.cells.insert(version) {
                return Err(format!(
                    "duplicate cell {}/{} at timestamp {}",
                    cell.row,
                    cell.column(),
                    cell.timestamp
                ));
            }
            let address = (
                cell.row.clone(),
                cell.family.clone(),
                cell.qualifier.clone(),
            );
            if options.latest_only && !seen.addresses.insert(address) {
                Outcome::Skip
            } else {
                Outcome::Record(Record::Wide(cell))
            }
        }
        SourceKind::Doc => {
            let doc = parse_doc(line).map_err(err)?;
            if !seen.doc_ids.insert(doc.id.clone()) {
                warnings.push(LineError {
                    line: line_no,
                    message: format!("document id {:?} repeated; counts accumulate", doc.id),
                });
            }
            Outcome::Record(Record::Doc(doc))
        }
        SourceKind::Rdf => Outcome::Record(Record::Rdf(parse_ntriples(line).map_err(err)?)),
        SourceKind::Graph => {
            let el = parse_graph_line(line).map_err(err)?;
            if matches!(el, GraphElement::Root(_)) {
                if seen.root {
                    return Err("graph root declared more than once".to_string());
                }
                seen.root = true;
            }
            Outcome::Record(Record::GraphElement(el))
        }
    })
}

/// Reads one `\n`-terminated line into `buf` (terminator and a trailing
/// `\r` removed). Returns `Some(false)` when the line exceeded `max` bytes;
/// the excess is consumed but not kept. `None` at end of input.
fn read_bounded_line<R: BufRead>(
    reader: &mut R,
    buf: &mut Vec<u8>,
    max: usize,
) -> io::Result<Option<bool>> {
    buf.clear();
    let mut fits = true;
    let mut any = false;
    loop {
        let chunk = reader.fill_buf()?;
        if chunk.is_empty() {
            break;
        }
        any = true;
        let (take, done) = match chunk.iter().position(|&b| b == b'\n') {
            Some(i) => (i, true),
            None => (chunk.len(), false),
        };
        if fits {
            if buf.len() + take > max + 1 {
                fits = false;
                buf.clear();
            } else {
                buf.extend_from_slice(&chunk[..take]);
            }
        }
        reader.consume(if done { take + 1 } else { take });
        if done {
            break;
        }
    }
    if !any {
        return Ok(None);
    }
    if buf.last() == Some(&b'\r') {
        buf.pop();
    }
    if buf.len() > max {
        fits = false;
        buf.clear();
    }
    Ok(Some(fits))
}
