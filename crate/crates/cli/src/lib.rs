//! Argument parsing and output formatting for the `medal` command.
//!
//! [`run`] parses an argument list, executes one subcommand against the
//! catalog and returns the process exit code: 0 on success, 1 for domain
//! errors, 2 for usage errors and 3 when the catalog is corrupt.

mod output;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use medal_core::index::SearchMode;
use medal_core::inter::Direction;
use medal_core::intra::{TransformationSpec, UpdateSpec};
use medal_core::model::{attr, AttrValue, Attributes, TagSource};
use medal_core::store::{AttrFilter, CatalogExport};
use medal_core::{Catalog, Error};
use thiserror::Error;

use output::Printer;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CORRUPT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "medal", version, about = "Metadata catalog for data lakes")]
pub struct Cli {
    /// Catalog directory
    #[arg(long, env = "MEDAL_CATALOG", global = true)]
    pub catalog: Option<PathBuf>,

    /// Name recorded in the usage log
    #[arg(long, global = true)]
    pub actor: Option<String>,

    /// Whitespace-separated stopwords applied to the index
    #[arg(long, global = true)]
    pub stopwords_file: Option<PathBuf>,

    /// Thesaurus used by `search --expand` and `group --by tags` when none is named
    #[arg(long, global = true)]
    pub thesaurus: Option<String>,

    /// Machine-readable output
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty catalog
    Init,
    /// Profile files and register one object per file
    Ingest(IngestArgs),
    /// Show an object
    Show {
        id: String,
        #[arg(long)]
        tree: bool,
        /// Log an access event
        #[arg(long)]
        record_access: bool,
    },
    /// Add a representation derived from a node
    Represent(RepresentArgs),
    /// Add a version of a version node
    Update(UpdateArgs),
    /// Attach tags
    Tag {
        id: String,
        #[arg(required = true)]
        tags: Vec<String>,
        #[arg(long, value_enum, default_value_t = SourceArg::Manual)]
        source: SourceArg,
    },
    /// Set the description
    Describe { id: String, text: String },
    /// Compute the similarity of two objects
    Link {
        a: String,
        b: String,
        #[arg(long)]
        metric: String,
    },
    /// Compute similarities between all comparable pairs
    LinkAll {
        #[arg(long)]
        metric: String,
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
    /// Connected components of the similarity graph
    Clusters {
        #[arg(long)]
        threshold: f64,
        #[arg(long)]
        metric: Option<String>,
    },
    /// Group objects by an attribute or by tags
    Group {
        /// Attribute label, or `tags`
        #[arg(long)]
        by: String,
        #[arg(long)]
        thesaurus: Option<String>,
    },
    /// Record that a child object was derived from two or more parents
    Parent {
        #[arg(long, num_args = 2.., required = true)]
        parents: Vec<String>,
        #[arg(long)]
        child: String,
        #[arg(long)]
        note: Option<String>,
    },
    /// Ancestors or descendants through parenthood links
    Lineage {
        id: String,
        #[arg(long, default_value = "ancestors")]
        direction: Direction,
    },
    /// Objects sharing a child with the given object
    CoParents { id: String },
    /// Related objects by similarity and shared tags
    Recommend {
        id: String,
        #[arg(short, long, default_value_t = 5)]
        k: usize,
    },
    /// Keyword search
    Search(SearchArgs),
    /// Usage log
    Log {
        #[arg(long, conflicts_with = "top")]
        object: Option<String>,
        /// Most accessed objects
        #[arg(long)]
        top: Option<usize>,
    },
    /// Semantic resources
    Resource {
        #[command(subcommand)]
        command: ResourceCommand,
    },
    /// List objects, optionally filtered by attribute values
    List {
        /// `label=value`; repeat to combine
        #[arg(long = "where", value_name = "LABEL=VALUE")]
        filters: Vec<String>,
    },
    /// Check every structural invariant
    Validate,
    /// Write the whole catalog as one document
    Export {
        #[arg(long, value_enum, default_value_t = ExportFormat::Json)]
        format: ExportFormat,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Load an export into an empty catalog
    Import { file: PathBuf },
    /// Rebuild the inverted index
    Reindex,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[arg(long)]
    pub origin: String,
    #[arg(long, value_delimiter = ',')]
    pub tags: Vec<String>,
    /// Also attach the proposed word-cloud tags
    #[arg(long)]
    pub accept_proposed: bool,
}

#[derive(Debug, Args)]
pub struct RepresentArgs {
    pub id: String,
    #[arg(long)]
    pub parent: String,
    #[arg(long)]
    pub desc: Option<String>,
    #[arg(long, conflicts_with = "extract_schema")]
    pub locator: Option<String>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub script: Option<String>,
    /// Extract the parent's schema as an on-demand view
    #[arg(long)]
    pub extract_schema: bool,
}

#[derive(Debug, Args)]
pub struct UpdateArgs {
    pub id: String,
    #[arg(long)]
    pub parent: String,
    #[arg(long)]
    pub desc: String,
    #[arg(long)]
    pub locator: String,
    #[arg(long)]
    pub in_place: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    pub query: Vec<String>,
    /// Require every term
    #[arg(long)]
    pub all: bool,
    /// Expand terms with a thesaurus (the default one when no name is given)
    #[arg(long, num_args = 0..=1, value_name = "THESAURUS")]
    pub expand: Option<Option<String>>,
    /// Log an access event per hit
    #[arg(long)]
    pub record_access: bool,
}

#[derive(Debug, Subcommand)]
pub enum ResourceCommand {
    /// Load a thesaurus file, named after its file stem
    Load { path: PathBuf },
    List,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SourceArg {
    Manual,
    Derived,
    Business,
}

impl From<SourceArg> for TagSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Manual => TagSource::Manual,
            SourceArg::Derived => TagSource::Derived,
            SourceArg::Business => TagSource::Business,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExportFormat {
    Json,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::CorruptCatalog(_)) => EXIT_CORRUPT,
            CliError::Core(Error::EmptyQuery) | CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.exit_code() == EXIT_USAGE {
                let _ = writeln!(err, "\n{}", synopsis(&cli.command));
            }
            e.exit_code()
        }
    }
}

fn synopsis(command: &Command) -> String {
    let name = command_name(command);
    let mut cmd = Cli::command();
    cmd.build();
    match cmd.find_subcommand_mut(name) {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Init => "init",
        Command::Ingest(_) => "ingest",
        Command::Show { .. } => "show",
        Command::Represent(_) => "represent",
        Command::Update(_) => "update",
        Command::Tag { .. } => "tag",
        Command::Describe { .. } => "describe",
        Command::Link { .. } => "link",
        Command::LinkAll { .. } => "link-all",
        Command::Clusters { .. } => "clusters",
        Command::Group { .. } => "group",
        Command::Parent { .. } => "parent",
        Command::Lineage { .. } => "lineage",
        Command::CoParents { .. } => "co-parents",
        Command::Recommend { .. } => "recommend",
        Command::Search(_) => "search",
        Command::Log { .. } => "log",
        Command::Resource { .. } => "resource",
        Command::List { .. } => "list",
        Command::Validate => "validate",
        Command::Export { .. } => "export",
        Command::Import { .. } => "import",
        Command::Reindex => "reindex",
    }
}

impl Command {
    fn writes(&self) -> bool {
        match self {
            Command::Show { record_access, .. } => *record_access,
            Command::Search(s) => s.record_access,
            Command::Clusters { .. }
            | Command::Lineage { .. }
            | Command::CoParents { .. }
            | Command::Recommend { .. }
            | Command::Log { .. }
            | Command::Resource {
                command: ResourceCommand::List,
            }
            | Command::List { .. }
            | Command::Validate
            | Command::Export { .. } => false,
            _ => true,
        }
    }
}

fn default_actor() -> String {
    std::env::var("USER")
        .or_else(|_| std::env::var("USERNAME"))
        .unwrap_or_else(|_| "system".to_owned())
}

fn open(cli: &Cli) -> CliResult<Catalog> {
    let path = cli
        .catalog
        .as_deref()
        .ok_or_else(|| CliError::Usage("no catalog given (use --catalog or MEDAL_CATALOG)".into()))?;
    let create = matches!(cli.command, Command::Init | Command::Import { .. });
    if !cli.command.writes() && cli.stopwords_file.is_none() {
        return Ok(Catalog::open_read_only(path)?);
    }
    let mut c = Catalog::open(path, create)?;
    c.set_actor(cli.actor.clone().unwrap_or_else(default_actor))?;
    if let Some(file) = &cli.stopwords_file {
        let text = read_text(file)?;
        c.set_stopwords(text.split_whitespace().map(str::to_owned).collect())?;
    }
    Ok(c)
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| {
        Error::Unreadable {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn thesaurus_for(cli: &Cli, named: Option<&String>) -> Option<String> {
    named.or(cli.thesaurus.as_ref()).cloned()
}

fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult {
    let mut c = open(cli)?;
    let mut p = Printer::new(out, cli.json);
    match &cli.command {
        Command::Init => p.init(&c)?,
        Command::Ingest(a) => {
            let mut ingested = Vec::new();
            for path in &a.paths {
                let id = c.ingest_file(path, &a.origin, &a.tags)?;
                let proposed = c.proposed_tags(&id)?;
                if a.accept_proposed && !proposed.is_empty() {
                    c.tag_object(&id, &proposed, TagSource::Derived)?;
                }
                ingested.push((id, proposed));
            }
            p.ingested(&c, &ingested, a.accept_proposed)?;
        }
        Command::Show {
            id,
            tree,
            record_access,
        } => {
            let id = c.resolve_object(id)?;
            let h = c.get_object(&id, *record_access)?;
            if *tree {
                p.tree(&c.get_tree(&id)?)?;
            } else {
                p.object(&h)?;
            }
        }
        Command::Represent(a) => {
            let id = c.resolve_object(&a.id)?;
            let parent = c.resolve_node(&id, &a.parent)?;
            let node = if a.extract_schema {
                c.represent_schema(&id, &parent, a.desc.as_deref())?
            } else {
                let desc = a
                    .desc
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--desc is required unless --extract-schema".into()))?;
                let mut spec = TransformationSpec::new(desc);
                if let Some(l) = &a.locator {
                    spec = spec.locator(l);
                }
                if let Some(s) = &a.script {
                    spec = spec.script(s);
                }
                c.add_representation(&id, &parent, spec, format_attr(a.format.as_deref()))?
            };
            p.node(&id, &node)?;
        }
        Command::Update(a) => {
            let id = c.resolve_object(&a.id)?;
            let parent = c.resolve_node(&id, &a.parent)?;
            let mut spec = UpdateSpec::new(&a.desc, &a.locator);
            if a.in_place {
                spec = spec.in_place();
            }
            let node = c.add_version(&id, &parent, spec, Attributes::new())?;
            p.node(&id, &node)?;
        }
        Command::Tag { id, tags, source } => {
            let id = c.resolve_object(id)?;
            let all = c.tag_object(&id, tags, (*source).into())?;
            p.tags(&id, &all)?;
        }
        Command::Describe { id, text } => {
            let id = c.resolve_object(id)?;
            c.describe_object(&id, text)?;
            p.done(&id)?;
        }
        Command::Link { a, b, metric } => {
            let (a, b) = (c.resolve_object(a)?, c.resolve_object(b)?);
            let link = c.compute_similarity(&a, &b, metric)?;
            p.similarity(&link)?;
        }
        Command::LinkAll { metric, threshold } => {
            let n = c.link_all(metric, *threshold)?;
            p.count("links", n)?;
        }
        Command::Clusters { threshold, metric } => {
            let clusters = c.clusters(*threshold, metric.as_deref());
            p.clusters(&clusters)?;
        }
        Command::Group { by, thesaurus } => {
            let grouping = if by == "tags" {
                c.group_by_tags(thesaurus_for(cli, thesaurus.as_ref()).as_deref())?
            } else {
                c.group_by(by)?
            };
            p.grouping(&grouping)?;
        }
        Command::Parent {
            parents,
            child,
            note,
        } => {
            let parents = parents
                .iter()
                .map(|p| c.resolve_object(p))
                .collect::<Result<Vec<_>, _>>()?;
            let child = c.resolve_object(child)?;
            let mut attrs = Attributes::new();
            if let Some(n) = note {
                attrs.insert(attr::DESCRIPTION.into(), AttrValue::text(n));
            }
            let link = c.add_parenthood(parents, &child, attrs)?;
            p.link_id(&link)?;
        }
        Command::Lineage { id, direction } => {
            let id = c.resolve_object(id)?;
            p.ids(&c, &c.lineage(&id, *direction)?)?;
        }
        Command::CoParents { id } => {
            let id = c.resolve_object(id)?;
            p.ids(&c, &c.co_parents(&id)?)?;
        }
        Command::Recommend { id, k } => {
            let id = c.resolve_object(id)?;
            p.recommendations(&c, &c.recommend(&id, *k)?)?;
        }
        Command::Search(a) => {
            let query = a.query.join(" ");
            let expand = match &a.expand {
                None => None,
                Some(named) => Some(thesaurus_for(cli, named.as_ref()).ok_or_else(|| {
                    CliError::Usage("--expand needs a thesaurus name (or --thesaurus)".into())
                })?),
            };
            let mode = if a.all {
                SearchMode::AllTerms
            } else {
                SearchMode::AnyTerm
            };
            let hits = c.search(&query, mode, expand.as_deref(), a.record_access)?;
            p.hits(&c, &hits)?;
        }
        Command::Log { object, top } => match (object, top) {
            (_, Some(k)) => p.access_report(&c, &c.access_report(*k, None)?)?,
            (Some(id), None) => {
                let id = c.resolve_object(id)?;
                p.events(&c.events_for(&id))?;
            }
            (None, None) => p.events(&c.events().iter().collect::<Vec<_>>())?,
        },
        Command::Resource { command } => match command {
            ResourceCommand::Load { path } => {
                let name = c.load_resource(path)?;
                p.resource_loaded(&c, &name)?;
            }
            ResourceCommand::List => p.resources(&c)?,
        },
        Command::List { filters } => {
            let filters = filters
                .iter()
                .map(|f| parse_filter(f))
                .collect::<CliResult<Vec<_>>>()?;
            p.list(&c.list_objects(&filters))?;
        }
        Command::Validate => {
            let report = c.validate();
            p.validation(&report)?;
            if !report.is_valid() {
                return Err(Error::ValidationFailed(report.violations).into());
            }
        }
        Command::Export { format, output } => {
            let ExportFormat::Json = format;
            let text = c.export().to_json()?;
            match output {
                Some(path) => fs::write(path, text + "\n")?,
                None => p.raw(&text)?,
            }
        }
        Command::Import { file } => {
            let export = CatalogExport::from_json(&read_text(file)?)?;
            c.import(export)?;
            p.count("objects", c.len())?;
        }
        Command::Reindex => {
            let stats = c.rebuild_index();
            c.flush_index()?;
            p.index_stats(&stats)?;
        }
    }
    if c.is_writable() {
        c.close()?;
    }
    Ok(())
}

fn format_attr(format: Option<&str>) -> Attributes {
    format
        .map(|f| Attributes::from([(attr::FORMAT.into(), AttrValue::text(f))]))
        .unwrap_or_default()
}

fn parse_filter(raw: &str) -> CliResult<AttrFilter> {
    let (label, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("filter `{raw}` is not LABEL=VALUE")))?;
    Ok(AttrFilter::new(label.trim(), AttrValue::parse_loose(value.trim())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        let (code, _, err) = run_str(&["medal", "frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn missing_catalog_is_a_usage_error() {
        std::env::remove_var("MEDAL_CATALOG");
        let (code, _, err) = run_str(&["medal", "validate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--catalog"));
    }

    #[test]
    fn filters_parse_values() {
        let f = parse_filter("batch = 3").unwrap();
        assert_eq!(f, AttrFilter::new("batch", 3i64));
        assert!(parse_filter("nonsense").is_err());
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::Core(Error::CorruptCatalog("x".into())).exit_code(), EXIT_CORRUPT);
        assert_eq!(CliError::Core(Error::EmptyQuery).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Core(Error::EmptyTagSet).exit_code(), EXIT_DOMAIN);
    }
}
