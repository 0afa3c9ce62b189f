//! OEIS b-file cache, sequence matching up to simple normalizations, and
//! reproduction of the catalog of identifications.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{exact_coefficients, exact_cumulative, support_period};
use crate::classes::{ClassError, ClassSpec, Family, FlowerKind, IndexSet, Parameter};

pub const DEFAULT_BASE_URL: &str = "https://oeis.org";
/// Number of coefficients computed per catalog cell.
pub const CATALOG_TERMS: usize = 30;
pub const MIN_ALIGNED: usize = 10;
pub const MIN_COMPUTED: usize = 14;
pub const MAX_SHIFT: i64 = 3;
pub const MAX_SCALE: u32 = 4;
pub const MAX_DROPPED: usize = 3;
/// Minimum spacing between two network requests.
pub const REQUEST_INTERVAL: Duration = Duration::from_secs(1);

const CATALOG: &str = include_str!("../data/catalog.txt");

static LAST_REQUEST: Mutex<Option<Instant>> = Mutex::new(None);
static CACHE_WRITE: Mutex<()> = Mutex::new(());

#[derive(Debug, Error)]
pub enum OeisError {
    #[error("malformed OEIS id {0:?}")]
    MalformedId(String),
    #[error("{0} is not cached and network access is disabled")]
    CacheMiss(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed b-file for {id}, line {line}: {message}")]
    MalformedBFile { id: String, line: usize, message: String },
    #[error("malformed catalog line {line}: {message}")]
    MalformedCatalog { line: usize, message: String },
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Asymptotics(#[from] crate::asymptotics::AsymptoticsError),
}

pub fn validate_id(id: &str) -> Result<(), OeisError> {
    let ok = id.len() == 7 && id.starts_with('A') && id[1..].bytes().all(|b| b.is_ascii_digit());
    if ok {
        Ok(())
    } else {
        Err(OeisError::MalformedId(id.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OeisSequence {
    pub id: String,
    pub offset: i64,
    pub terms: Vec<BigInt>,
}

/// Parse a b-file: lines `n a(n)`, `#` comments and blank lines ignored,
/// indices must be consecutive.
pub fn parse_bfile(id: &str, text: &str) -> Result<OeisSequence, OeisError> {
    validate_id(id)?;
    let bad = |line: usize, message: String| OeisError::MalformedBFile { id: id.to_string(), line, message };
    let mut offset = None;
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(n), Some(a)) = (parts.next(), parts.next()) else {
            return Err(bad(i + 1, format!("expected two fields, got {line:?}")));
        };
        if parts.next().is_some() {
            return Err(bad(i + 1, format!("trailing fields in {line:?}")));
        }
        let n: i64 = n.parse().map_err(|_| bad(i + 1, format!("bad index {n:?}")))?;
        let a: BigInt = a.parse().map_err(|_| bad(i + 1, format!("bad term {a:?}")))?;
        match offset {
            None => offset = Some(n),
            Some(o) => {
                let expected = o + terms.len() as i64;
                if n != expected {
                    return Err(bad(i + 1, format!("index {n} where {expected} was expected")));
                }
            }
        }
        terms.push(a);
    }
    let offset = offset.ok_or_else(|| bad(0, "no terms".to_string()))?;
    Ok(OeisSequence { id: id.to_string(), offset, terms })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CacheMeta {
    pub id: String,
    pub retrieved: String,
    pub terms: usize,
}

#[derive(Clone, Debug)]
pub struct FetchConfig {
    pub cache_dir: PathBuf,
    pub network: bool,
    pub base_url: String,
    pub timeout: Duration,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            cache_dir: fixture_dir(),
            network: false,
            base_url: DEFAULT_BASE_URL.to_string(),
            timeout: Duration::from_secs(30),
        }
    }
}

/// The fixtures shipped with the crate.
pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("oeis")
}

fn bfile_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.txt"))
}

fn meta_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.json"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OeisError + '_ {
    move |source| OeisError::Io { path: path.to_path_buf(), source }
}

/// Sequence from the cache, downloading it first when missing and allowed.
pub fn fetch(id: &str, config: &FetchConfig) -> Result<OeisSequence, OeisError> {
    validate_id(id)?;
    let path = bfile_path(&config.cache_dir, id);
    if path.exists() {
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        return parse_bfile(id, &text);
    }
    if !config.network {
        return Err(OeisError::CacheMiss(id.to_string()));
    }
    refresh(id, config)
}

/// Download the b-file regardless of the cache and store it.
pub fn refresh(id: &str, config: &FetchConfig) -> Result<OeisSequence, OeisError> {
    validate_id(id)?;
    if !config.network {
        return Err(OeisError::CacheMiss(id.to_string()));
    }
    let text = download(id, config)?;
    let seq = parse_bfile(id, &text)?;
    store(id, &text, seq.terms.len(), config)?;
    Ok(seq)
}

fn download(id: &str, config: &FetchConfig) -> Result<String, OeisError> {
    let mut last = LAST_REQUEST.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = *last {
        let since = t.elapsed();
        if since < REQUEST_INTERVAL {
            std::thread::sleep(REQUEST_INTERVAL - since);
        }
    }
    let url = format!("{}/{}/b{}.txt", config.base_url.trim_end_matches('/'), id, &id[1..]);
    let result = reqwest::blocking::Client::builder()
        .timeout(config.timeout)
        .build()
        .and_then(|c| c.get(&url).send())
        .and_then(|r| r.error_for_status())
        .and_then(|r| r.text());
    *last = Some(Instant::now());
    result.map_err(|e| OeisError::Network(format!("{url}: {e}")))
}

fn store(id: &str, text: &str, terms: usize, config: &FetchConfig) -> Result<(), OeisError> {
    let _guard = CACHE_WRITE.lock().unwrap_or_else(|e| e.into_inner());
    let dir = &config.cache_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = CacheMeta { id: id.to_string(), retrieved: stamp.to_string(), terms };
    let meta_text = serde_json::to_string(&meta).expect("plain record") + "\n";
    for (path, body) in [(bfile_path(dir, id), text.to_string()), (meta_path(dir, id), meta_text)] {
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(body.as_bytes()).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub id: String,
    /// `computed[i] = scale * terms[i + shift]` for every compared `i`.
    pub shift: i64,
    pub scale: u32,
    pub dropped_leading: usize,
    pub matched_length: usize,
    /// 1, or `d` when only the terms `computed[residue + d k]` are compared.
    pub decimation: usize,
    pub residue: usize,
}

fn aligned(computed: &[BigInt], terms: &[BigInt], dropped: usize, shift: i64, scale: u32) -> Option<usize> {
    let start = dropped as i64 + shift;
    if start < 0 {
        return None;
    }
    let scale = BigInt::from(scale);
    let mut count = 0;
    for (i, c) in computed.iter().enumerate().skip(dropped) {
        let j = (i as i64 + shift) as usize;
        let Some(t) = terms.get(j) else { break };
        if *c != t * &scale {
            return None;
        }
        count += 1;
    }
    (count >= MIN_ALIGNED).then_some(count)
}

fn search(computed: &[BigInt], cand: &OeisSequence, decimation: usize, residue: usize) -> Option<MatchResult> {
    for dropped in 0..=MAX_DROPPED {
        for mag in 0..=MAX_SHIFT {
            for scale in 1..=MAX_SCALE {
                let shifts: &[i64] = if mag == 0 { &[0] } else { &[-mag, mag] };
                for &shift in shifts {
                    if let Some(n) = aligned(computed, &cand.terms, dropped, shift, scale) {
                        return Some(MatchResult {
                            id: cand.id.clone(),
                            shift,
                            scale,
                            dropped_leading: dropped,
                            matched_length: n,
                            decimation,
                            residue,
                        });
                    }
                }
            }
        }
    }
    None
}

/// Smallest `(dropped, |shift|, scale)` aligning at least ten terms exactly.
/// When the full sequence does not align, every second term (either
/// residue) is tried, and so is the residue class carrying the support when
/// that support has a period above two.
pub fn match_sequence(computed: &[BigInt], cand: &OeisSequence) -> Option<MatchResult> {
    if computed.len() < MIN_COMPUTED {
        return None;
    }
    if let Some(m) = search(computed, cand, 1, 0) {
        return Some(m);
    }
    let (period, residue) = support_period(computed);
    let mut tries: Vec<(usize, usize)> = vec![(2, 0), (2, 1)];
    if period > 2 {
        tries.push((period, residue));
    }
    tries.into_iter().find_map(|(d, r)| {
        let thinned: Vec<BigInt> = computed.iter().skip(r).step_by(d).cloned().collect();
        search(&thinned, cand, d, r)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Table {
    A1,
    A2,
    A3,
    A4,
}

impl Table {
    pub const ALL: [Table; 4] = [Table::A1, Table::A2, Table::A3, Table::A4];

    pub fn k_set(self) -> IndexSet {
        match self {
            Table::A1 => IndexSet::AllPositive,
            Table::A2 => IndexSet::single(2),
            Table::A3 => IndexSet::Finite(vec![1, 2]),
            Table::A4 => IndexSet::single(1),
        }
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Table::A1 => "A1",
            Table::A2 => "A2",
            Table::A3 => "A3",
            Table::A4 => "A4",
        };
        f.write_str(s)
    }
}

impl FromStr for Table {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().trim_start_matches('A') {
            "1" => Ok(Table::A1),
            "2" => Ok(Table::A2),
            "3" => Ok(Table::A3),
            "4" => Ok(Table::A4),
            _ => Err(format!("unknown table {s:?}, expected A1..A4")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Column {
    pub flower: FlowerKind,
    pub param: Option<Parameter>,
}

pub const COLUMNS: [Column; 6] = [
    Column { flower: FlowerKind::RootedPlane, param: None },
    Column { flower: FlowerKind::NonPlane, param: None },
    Column { flower: FlowerKind::RootedPlane, param: Some(Parameter::Petals) },
    Column { flower: FlowerKind::NonPlane, param: Some(Parameter::Petals) },
    Column { flower: FlowerKind::RootedPlane, param: Some(Parameter::PetalEdges) },
    Column { flower: FlowerKind::NonPlane, param: Some(Parameter::PetalEdges) },
];

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param {
            None => write!(f, "{} count", self.flower),
            Some(p) => write!(f, "{} {p}", self.flower),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellId {
    pub id: String,
    pub scale_hint: Option<u32>,
    pub dagger: bool,
    pub conjecture: bool,
    pub no_asymptotics: bool,
}

impl CellId {
    fn flags(&self) -> String {
        let mut s = String::new();
        for (on, c) in [(self.dagger, 'd'), (self.conjecture, 'b'), (self.no_asymptotics, 'o')] {
            if on {
                s.push(c);
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cell {
    New,
    SameAsLeft,
    Ids(Vec<CellId>),
}

#[derive(Clone, Debug)]
pub struct CatalogRow {
    pub table: Table,
    pub family: Family,
    pub starred: bool,
    pub n_set: IndexSet,
    pub cells: Vec<Cell>,
}

impl CatalogRow {
    pub fn spec(&self, column: Column) -> ClassSpec {
        ClassSpec::new(self.family, self.starred, self.table.k_set(), self.n_set.clone(), column.flower)
    }
}

fn parse_cell_id(s: &str) -> Result<CellId, String> {
    let (scale_hint, rest) = match s.split_once('*') {
        Some((k, r)) => (Some(k.parse::<u32>().map_err(|_| format!("bad scale {k:?}"))?), r),
        None => (None, s),
    };
    let (id, flags) = rest.split_once('^').unwrap_or((rest, ""));
    validate_id(id).map_err(|e| e.to_string())?;
    if let Some(c) = flags.chars().find(|c| !"dbo".contains(*c)) {
        return Err(format!("unknown flag {c:?}"));
    }
    Ok(CellId {
        id: id.to_string(),
        scale_hint,
        dagger: flags.contains('d'),
        conjecture: flags.contains('b'),
        no_asymptotics: flags.contains('o'),
    })
}

pub fn parse_catalog(text: &str) -> Result<Vec<CatalogRow>, OeisError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| OeisError::MalformedCatalog { line: i + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(bad(format!("expected 9 fields, found {}", fields.len())));
        }
        let table: Table = fields[0].parse().map_err(bad)?;
        let (fam, starred) = match fields[1].strip_suffix('*') {
            Some(f) => (f, true),
            None => (fields[1], false),
        };
        let family = match fam {
            "R" => Family::R,
            "S" => Family::S,
            "T" => Family::T,
            other => return Err(bad(format!("unknown family {other:?}"))),
        };
        let n_set: IndexSet = fields[2].parse().map_err(|e: ClassError| bad(e.to_string()))?;
        let mut cells = Vec::new();
        for (k, c) in fields[3..].iter().enumerate() {
            let cell = match *c {
                "-" => Cell::New,
                "<" if k > 0 => Cell::SameAsLeft,
                "<" => return Err(bad("first cell cannot refer to its left".to_string())),
                ids => Cell::Ids(ids.split('/').map(parse_cell_id).collect::<Result<_, _>>().map_err(bad)?),
            };
            cells.push(cell);
        }
        rows.push(CatalogRow { table, family, starred, n_set, cells });
    }
    Ok(rows)
}

/// The catalog rows shipped with the crate.
pub fn catalog_rows() -> Vec<CatalogRow> {
    parse_catalog(CATALOG).expect("bundled catalog parses")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntryStatus {
    Matched,
    NoMatch,
    FixtureMissing,
    New,
    SameAsLeft,
    DiffersFromLeft,
}

impl EntryStatus {
    pub fn is_failure(self) -> bool {
        matches!(self, EntryStatus::NoMatch | EntryStatus::FixtureMissing | EntryStatus::DiffersFromLeft)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub table: Table,
    pub spec: String,
    pub column: String,
    pub id: Option<String>,
    pub flags: String,
    pub scale_hint: Option<u32>,
    pub status: EntryStatus,
    pub computed: Vec<String>,
    pub fetched: Vec<String>,
    pub matched: Option<MatchResult>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogReport {
    pub entries: Vec<CatalogEntry>,
}

impl CatalogReport {
    pub fn passed(&self) -> bool {
        !self.entries.iter().any(|e| e.status.is_failure())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(|e| e.status.is_failure())
    }

    pub fn find(&self, id: &str) -> impl Iterator<Item = &CatalogEntry> {
        let id = id.to_string();
        self.entries.iter().filter(move |e| e.id.as_deref() == Some(id.as_str()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain record")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let id = e.id.as_deref().unwrap_or("-");
            let how = match &e.matched {
                Some(m) => format!(
                    "shift {} scale {} dropped {} aligned {}{}",
                    m.shift,
                    m.scale,
                    m.dropped_leading,
                    m.matched_length,
                    if m.decimation > 1 { format!(" terms {} mod {}", m.residue, m.decimation) } else { String::new() }
                ),
                None => String::new(),
            };
            out += &format!(
                "{:<3} {:<34} {:<20} {:<8} {:<4} {:<16} {}\n",
                e.table.to_string(),
                e.spec,
                e.column,
                id,
                e.flags,
                format!("{:?}", e.status),
                how
            );
            if e.status.is_failure() || e.status == EntryStatus::New {
                out += &format!("      computed: {}\n", e.computed.join(","));
            }
            if !e.fetched.is_empty() && e.status.is_failure() {
                out += &format!("      fetched:  {}\n", e.fetched.join(","));
            }
            if let Some(n) = &e.note {
                out += &format!("      note: {n}\n");
            }
        }
        out
    }
}

fn compute(spec: &ClassSpec, column: Column) -> Result<Vec<BigInt>, OeisError> {
    let order = CATALOG_TERMS - 1;
    Ok(match column.param {
        None => exact_coefficients(spec, order)?,
        Some(p) => exact_cumulative(spec, p, order)?,
    })
}

fn strings(v: &[BigInt], n: usize) -> Vec<String> {
    v.iter().take(n).map(ToString::to_string).collect()
}

/// Check every cell of the selected tables against the cache.
pub fn run_catalog(tables: &[Table], config: &FetchConfig) -> Result<CatalogReport, OeisError> {
    let mut entries = Vec::new();
    for row in catalog_rows().into_iter().filter(|r| tables.contains(&r.table)) {
        let mut left: Option<(Vec<BigInt>, Cell)> = None;
        for (k, cell) in row.cells.iter().enumerate() {
            let column = COLUMNS[k];
            let spec = row.spec(column);
            let computed = compute(&spec, column)?;
            let base = CatalogEntry {
                table: row.table,
                spec: spec.to_string(),
                column: column.to_string(),
                id: None,
                flags: String::new(),
                scale_hint: None,
                status: EntryStatus::New,
                computed: strings(&computed, 16),
                fetched: Vec::new(),
                matched: None,
                note: None,
            };
            let effective = match cell {
                Cell::SameAsLeft => {
                    let (prev, prev_cell) = left.clone().expect("left cell exists");
                    let status = if prev == computed { EntryStatus::SameAsLeft } else { EntryStatus::DiffersFromLeft };
                    entries.push(CatalogEntry { status, ..base.clone() });
                    prev_cell
                }
                c => c.clone(),
            };
            match &effective {
                Cell::New | Cell::SameAsLeft => {
                    if *cell == Cell::New {
                        entries.push(CatalogEntry { note: Some("not in OEIS".to_string()), ..base.clone() });
                    }
                }
                Cell::Ids(ids) => {
                    for cid in ids {
                        let mut e = CatalogEntry {
                            id: Some(cid.id.clone()),
                            flags: cid.flags(),
                            scale_hint: cid.scale_hint,
                            ..base.clone()
                        };
                        if cid.conjecture {
                            e.note = Some("OEIS entry states an open conjecture; not evaluated".to_string());
                        }
                        match fetch(&cid.id, config) {
                            Ok(seq) => {
                                e.fetched = strings(&seq.terms, 16);
                                e.matched = match_sequence(&computed, &seq);
                                e.status = if e.matched.is_some() { EntryStatus::Matched } else { EntryStatus::NoMatch };
                            }
                            Err(OeisError::CacheMiss(_)) => e.status = EntryStatus::FixtureMissing,
                            Err(err) => return Err(err),
                        }
                        entries.push(e);
                    }
                }
            }
            left = Some((computed, effective));
        }
    }
    Ok(CatalogReport { entries })
}
