//! Batch command-line front end over an efgrid index file.
//!
//! The index file is a working snapshot: ingests append to it as a draft,
//! `freeze` seals it, and every query needs a frozen index.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use efgrid::carriers::KvMode;
use efgrid::snapshot;
use efgrid::{AssociationStore, EntityId, IngestOptions, Measure, SourceKind};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

const AFTER_HELP: &str = "\
TSV output columns (numbers always carry 10 decimal places):
  ingest           source  kind  accepted  errors  associations
  freeze           entities  features  pairs
  stats            key  value, then: source  name  kind  records  associations
  importance       feature  bits
  vector           feature  weight
  neighbors        entity  distance
  distance         distance
  source-distance  distance
  export           entity  feature  count

Exit status: 0 success, 1 usage error, 2 data error.";

#[derive(Debug, Parser)]
#[command(
    name = "efgrid",
    version,
    about = "Entity-feature importance and distance over heterogeneous sources"
)]
#[command(after_help = AFTER_HELP)]
struct Cli {
    /// Index file to read and update.
    #[arg(
        long,
        env = "EFGRID_INDEX",
        global = true,
        default_value = "efgrid.idx"
    )]
    index: PathBuf,
    #[arg(long, value_enum, global = true, default_value_t = Format::Tsv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Kv,
    Wide,
    Doc,
    Rdf,
    Graph,
}

impl From<Kind> for SourceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Kv => SourceKind::Kv,
            Kind::Wide => SourceKind::Wide,
            Kind::Doc => SourceKind::Doc,
            Kind::Rdf => SourceKind::Rdf,
            Kind::Graph => SourceKind::Graph,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KeyMode {
    Literal,
    Composite,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest a source file into the (unfrozen) index.
    Ingest {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Source name.
        #[arg(long)]
        source: String,
        file: PathBuf,
        /// Entity namespace; defaults to the source name.
        #[arg(long)]
        namespace: Option<String>,
        #[arg(long, value_enum, default_value_t = KeyMode::Literal)]
        kv_mode: KeyMode,
        /// Count each wide-column cell once regardless of versions.
        #[arg(long)]
        latest_only: bool,
    },
    /// Seal the index for querying.
    Freeze,
    /// Cardinalities and registered sources.
    Stats,
    /// Features of an entity ranked by importance.
    Importance {
        #[arg(long)]
        entity: String,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        top: u64,
    },
    /// Unit-normalized importance vector of an entity.
    Vector {
        #[arg(long)]
        entity: String,
    },
    /// Nearest entities, closest first.
    Neighbors {
        #[arg(long)]
        entity: String,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        top: u64,
        /// Use the raw rather than the normalized distance.
        #[arg(long)]
        raw: bool,
    },
    /// Distance between two entities.
    Distance {
        e1: String,
        e2: String,
        #[arg(long)]
        raw: bool,
    },
    /// Distance between two sources.
    SourceDistance {
        s1: String,
        s2: String,
        #[arg(long)]
        raw: bool,
    },
    /// Dump every association as TSV.
    Export,
    /// Write the frozen index to FILE.
    Save { file: PathBuf },
    /// Replace the index with the frozen snapshot FILE.
    Load { file: PathBuf },
}

/// A failure with its exit status.
struct Failure {
    code: i32,
    message: String,
}

fn data(message: impl Display) -> Failure {
    Failure {
        code: EXIT_DATA,
        message: message.to_string(),
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        data(e)
    }
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "efgrid: {}", f.message);
            f.code
        }
    }
}

fn open_index(path: &Path) -> Result<AssociationStore, Failure> {
    snapshot::open(path).map_err(|e| data(format!("cannot open index {}: {e}", path.display())))
}

fn open_frozen(path: &Path) -> Result<AssociationStore, Failure> {
    let store = open_index(path)?;
    if !store.is_frozen() {
        return Err(data(format!(
            "index {} is not frozen; run `efgrid freeze` first",
            path.display()
        )));
    }
    Ok(store)
}

/// Canonical `ns/local` first, then a unique local-name match.
fn find_entity(store: &AssociationStore, name: &str) -> Result<EntityId, Failure> {
    if let Ok(id) = name.parse::<EntityId>() {
        if store.contains_entity(&id) {
            return Ok(id);
        }
    }
    let matches: Vec<&EntityId> = store.entities().filter(|e| e.local() == name).collect();
    match matches.as_slice() {
        [one] => Ok((*one).clone()),
        [] => Err(data(format!("unknown entity {name:?}"))),
        many => {
            let names: Vec<&str> = many.iter().map(|e| e.canonical()).collect();
            Err(data(format!(
                "entity {name:?} is ambiguous: {}",
                names.join(", ")
            )))
        }
    }
}

fn fixed(x: f64) -> String {
    format!("{x:.10}")
}

fn measure(raw: bool) -> Measure {
    if raw {
        Measure::Raw
    } else {
        Measure::Normalized
    }
}

/// Prints rows as TSV or as a JSON array of objects keyed by `columns`.
fn emit(
    out: &mut dyn Write,
    format: Format,
    columns: &[&str],
    rows: Vec<Vec<Value>>,
) -> io::Result<()> {
    match format {
        Format::Tsv => {
            for row in rows {
                let cells: Vec<String> = row
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => s.clone(),
                        Value::Number(n) if n.is_f64() => fixed(n.as_f64().unwrap()),
                        other => other.to_string(),
                    })
                    .collect();
                writeln!(out, "{}", cells.join("\t"))?;
            }
        }
        Format::Json => {
            let objects: Vec<Value> = rows
                .into_iter()
                .map(|row| Value::Object(columns.iter().map(|c| c.to_string()).zip(row).collect()))
                .collect();
            writeln!(out, "{}", Value::Array(objects))?;
        }
    }
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let index = cli.index.as_path();
    match &cli.command {
        Command::Ingest {
            kind,
            source,
            file,
            namespace,
            kv_mode,
            latest_only,
        } => {
            let mut store = if index.exists() {
                open_index(index)?
            } else {
                AssociationStore::new()
            };
            if store.is_frozen() {
                return Err(data(format!(
                    "index {} is frozen; ingest into a new index",
                    index.display()
                )));
            }
            let options = IngestOptions {
                namespace: namespace.clone(),
                kv_mode: match kv_mode {
                    KeyMode::Literal => KvMode::Literal,
                    KeyMode::Composite => KvMode::Composite,
                },
                latest_only: *latest_only,
            };
            let report = efgrid::ingest_with(file, (*kind).into(), source, &mut store, &options)
                .map_err(data)?;
            snapshot::save_any(&store, index).map_err(data)?;
            for w in &report.warnings {
                writeln!(err, "{}:{}: warning: {}", file.display(), w.line, w.message)?;
            }
            for e in &report.parse_errors {
                writeln!(err, "{}:{}: {}", file.display(), e.line, e.message)?;
            }
            let s = &report.source;
            emit(
                out,
                cli.format,
                &["source", "kind", "accepted", "errors", "associations"],
                vec![vec![
                    json!(s.name),
                    json!(s.kind.as_str()),
                    json!(report.accepted),
                    json!(report.parse_errors.len()),
                    json!(s.associations_added),
                ]],
            )?;
            Ok(if report.parse_errors.is_empty() {
                EXIT_OK
            } else {
                EXIT_DATA
            })
        }
        Command::Freeze => {
            let mut store = open_index(index)?;
            store.freeze();
            snapshot::save(&store, index).map_err(data)?;
            let c = store.cardinalities();
            emit(
                out,
                cli.format,
                &["entities", "features", "pairs"],
                vec![vec![json!(c.entities), json!(c.features), json!(c.pairs)]],
            )?;
            Ok(EXIT_OK)
        }
        Command::Stats => {
            let store = open_index(index)?;
            let c = store.cardinalities();
            match cli.format {
                Format::Tsv => {
                    writeln!(out, "frozen\t{}", store.is_frozen())?;
                    writeln!(out, "entities\t{}", c.entities)?;
                    writeln!(out, "features\t{}", c.features)?;
                    writeln!(out, "pairs\t{}", c.pairs)?;
                    for s in store.sources() {
                        writeln!(
                            out,
                            "source\t{}\t{}\t{}\t{}",
                            s.name, s.kind, s.records_ingested, s.associations_added
                        )?;
                    }
                }
                Format::Json => {
                    let sources: Vec<Value> = store
                        .sources()
                        .map(|s| {
                            json!({
                                "name": s.name,
                                "kind": s.kind.as_str(),
                                "records": s.records_ingested,
                                "associations": s.associations_added,
                            })
                        })
                        .collect();
                    let v = json!({
                        "frozen": store.is_frozen(),
                        "entities": c.entities,
                        "features": c.features,
                        "pairs": c.pairs,
                        "sources": sources,
                    });
                    writeln!(out, "{v}")?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Importance { entity, top } => {
            let store = open_frozen(index)?;
            let id = find_entity(&store, entity)?;
            let ranked =
                efgrid::metrics::ranked_importance(&store, &id, *top as usize).map_err(data)?;
            let rows = ranked
                .into_iter()
                .map(|(f, i)| vec![json!(f.canonical()), json!(i.bits())])
                .collect();
            emit(out, cli.format, &["feature", "bits"], rows)?;
            Ok(EXIT_OK)
        }
        Command::Vector { entity } => {
            let store = open_frozen(index)?;
            let id = find_entity(&store, entity)?;
            let v = efgrid::entity_vector(&store, &id).map_err(data)?;
            let rows = v
                .weights()
                .iter()
                .map(|(f, w)| vec![json!(f.canonical()), json!(*w)])
                .collect();
            emit(out, cli.format, &["feature", "weight"], rows)?;
            Ok(EXIT_OK)
        }
        Command::Neighbors { entity, top, raw } => {
            let store = open_frozen(index)?;
            let id = find_entity(&store, entity)?;
            let m = measure(*raw);
            let found = efgrid::neighbors(&store, &id, *top as usize, m).map_err(data)?;
            let rows = found
                .into_iter()
                .map(|(e, d)| vec![json!(e.canonical()), json!(d.get(m))])
                .collect();
            emit(out, cli.format, &["entity", "distance"], rows)?;
            Ok(EXIT_OK)
        }
        Command::Distance { e1, e2, raw } => {
            let store = open_frozen(index)?;
            let (a, b) = (find_entity(&store, e1)?, find_entity(&store, e2)?);
            let d = efgrid::distance(&store, &a, &b).map_err(data)?;
            emit(
                out,
                cli.format,
                &["distance"],
                vec![vec![json!(d.get(measure(*raw)))]],
            )?;
            Ok(EXIT_OK)
        }
        Command::SourceDistance { s1, s2, raw } => {
            let store = open_frozen(index)?;
            let d = efgrid::source_distance(&store, s1, s2).map_err(data)?;
            emit(
                out,
                cli.format,
                &["distance"],
                vec![vec![json!(d.get(measure(*raw)))]],
            )?;
            Ok(EXIT_OK)
        }
        Command::Export => {
            let store = open_index(index)?;
            match cli.format {
                Format::Tsv => snapshot::write_associations(&store, &mut *out)?,
                Format::Json => {
                    let rows = store
                        .associations()
                        .map(|(e, f, n)| vec![json!(e.canonical()), json!(f.canonical()), json!(n)])
                        .collect();
                    emit(out, cli.format, &["entity", "feature", "count"], rows)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Save { file } => {
            let store = open_frozen(index)?;
            snapshot::save(&store, file).map_err(data)?;
            Ok(EXIT_OK)
        }
        Command::Load { file } => {
            let store = snapshot::load(file)
                .map_err(|e| data(format!("cannot load {}: {e}", file.display())))?;
            snapshot::save(&store, index).map_err(data)?;
            Ok(EXIT_OK)
        }
    }
}
