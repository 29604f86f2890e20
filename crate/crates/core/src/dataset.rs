//! Benchmark collections in the TU plain-text format, with a local cache.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Cursor, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::graph::{Graph, Label};

pub const DEFAULT_BASE_URL: &str = "https://www.chrsmrrs.com/graphkerneldatasets";
pub const CACHE_ENV: &str = "GKL_CACHE_DIR";

const MAX_ARCHIVE_BYTES: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub name: String,
    pub graphs: Vec<Graph>,
    /// Class ids exactly as written in the file.
    pub targets: Vec<i64>,
    pub has_node_labels: bool,
    pub has_edge_labels: bool,
    pub has_node_attributes: bool,
    pub has_edge_attributes: bool,
}

impl DatasetBundle {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Distinct class ids, ascending.
    pub fn classes(&self) -> Vec<i64> {
        let mut c = self.targets.clone();
        c.sort_unstable();
        c.dedup();
        c
    }
}

fn file_path(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

/// Non-blank lines with their 1-based line numbers.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::CorruptDataset {
        file: path.to_path_buf(),
        line: None,
        reason: e.to_string(),
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn read_optional(path: &Path) -> Result<Option<Vec<(usize, String)>>> {
    if path.exists() {
        read_lines(path).map(Some)
    } else {
        Ok(None)
    }
}

fn parse_error(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        file: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn corrupt(path: &Path, line: Option<usize>, reason: impl Into<String>) -> Error {
    Error::CorruptDataset {
        file: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn parse_int(path: &Path, line: usize, token: &str) -> Result<i64> {
    token.trim().parse().map_err(|_| {
        parse_error(
            path,
            line,
            format!("expected an integer, got {:?}", token.trim()),
        )
    })
}

fn parse_reals(path: &Path, line: usize, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim().parse().map_err(|_| {
                parse_error(path, line, format!("expected a real, got {:?}", t.trim()))
            })
        })
        .collect()
}

fn parse_single_ints(path: &Path, lines: &[(usize, String)]) -> Result<Vec<i64>> {
    lines.iter().map(|(l, s)| parse_int(path, *l, s)).collect()
}

fn parse_attribute_rows(path: &Path, lines: &[(usize, String)]) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::with_capacity(lines.len());
    let mut dim = None;
    for (l, s) in lines {
        let row = parse_reals(path, *l, s)?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(parse_error(
                    path,
                    *l,
                    format!("{} values, expected {d}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
    }
    Ok(rows)
}

fn check_count(path: &Path, found: usize, expected: usize, what: &str) -> Result<()> {
    if found != expected {
        return Err(corrupt(
            path,
            None,
            format!("{found} lines, expected one per {what} ({expected})"),
        ));
    }
    Ok(())
}

/// Reads `{name}_*.txt` from `dir`.
pub fn parse_tu(dir: &Path, name: &str) -> Result<DatasetBundle> {
    let a_path = file_path(dir, name, "A");
    let gi_path = file_path(dir, name, "graph_indicator");
    let gl_path = file_path(dir, name, "graph_labels");

    let indicator_lines = read_lines(&gi_path)?;
    let indicator = parse_single_ints(&gi_path, &indicator_lines)?;
    let n_total = indicator.len();
    let n_graphs = indicator.iter().copied().max().unwrap_or(0);
    if let Some((pos, &bad)) = indicator.iter().enumerate().find(|(_, &g)| g < 1) {
        return Err(corrupt(
            &gi_path,
            Some(indicator_lines[pos].0),
            format!("graph id {bad} < 1"),
        ));
    }
    let n_graphs = n_graphs as usize;
    // local index of every global vertex
    let mut sizes = vec![0usize; n_graphs];
    let mut local = Vec::with_capacity(n_total);
    for &g in &indicator {
        let g = g as usize - 1;
        local.push(sizes[g]);
        sizes[g] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(corrupt(
            &gi_path,
            None,
            format!("graph {} has no vertices", empty + 1),
        ));
    }

    let target_lines = read_lines(&gl_path)?;
    let targets = parse_single_ints(&gl_path, &target_lines)?;
    check_count(&gl_path, targets.len(), n_graphs, "graph")?;

    let edge_lines = read_lines(&a_path)?;
    let mut edge_rows = Vec::with_capacity(edge_lines.len());
    for (l, s) in &edge_lines {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| parse_error(&a_path, *l, "expected \"i, j\""))?;
        let (a, b) = (parse_int(&a_path, *l, a)?, parse_int(&a_path, *l, b)?);
        for v in [a, b] {
            if v < 1 || v as usize > n_total {
                return Err(corrupt(
                    &a_path,
                    Some(*l),
                    format!("vertex {v} outside 1..={n_total}"),
                ));
            }
        }
        let (a, b) = (a as usize - 1, b as usize - 1);
        if indicator[a] != indicator[b] {
            return Err(corrupt(
                &a_path,
                Some(*l),
                format!(
                    "edge ({}, {}) joins graph {} and graph {}",
                    a + 1,
                    b + 1,
                    indicator[a],
                    indicator[b]
                ),
            ));
        }
        edge_rows.push((a, b));
    }

    let nl_path = file_path(dir, name, "node_labels");
    let node_labels = match read_optional(&nl_path)? {
        Some(lines) => {
            let v = parse_single_ints(&nl_path, &lines)?;
            check_count(&nl_path, v.len(), n_total, "vertex")?;
            Some(v)
        }
        None => None,
    };
    let el_path = file_path(dir, name, "edge_labels");
    let edge_labels = match read_optional(&el_path)? {
        Some(lines) => {
            let v = parse_single_ints(&el_path, &lines)?;
            check_count(&el_path, v.len(), edge_rows.len(), "row of the edge file")?;
            Some(v)
        }
        None => None,
    };
    let na_path = file_path(dir, name, "node_attributes");
    let node_attributes = match read_optional(&na_path)? {
        Some(lines) => {
            let v = parse_attribute_rows(&na_path, &lines)?;
            check_count(&na_path, v.len(), n_total, "vertex")?;
            Some(v)
        }
        None => None,
    };
    let ea_path = file_path(dir, name, "edge_attributes");
    let edge_attributes = match read_optional(&ea_path)? {
        Some(lines) => {
            let v = parse_attribute_rows(&ea_path, &lines)?;
            check_count(&ea_path, v.len(), edge_rows.len(), "row of the edge file")?;
            Some(v)
        }
        None => None,
    };

    // per graph: unordered local edge -> first row listing it; self-loops dropped
    let mut graph_edges: Vec<BTreeMap<(usize, usize), usize>> = vec![BTreeMap::new(); n_graphs];
    for (row, &(a, b)) in edge_rows.iter().enumerate() {
        if a == b {
            continue;
        }
        let g = indicator[a] as usize - 1;
        let (u, v) = (local[a].min(local[b]), local[a].max(local[b]));
        graph_edges[g].entry((u, v)).or_insert(row);
    }
    let mut vertices: Vec<Vec<usize>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    for (v, &g) in indicator.iter().enumerate() {
        vertices[g as usize - 1].push(v);
    }

    let mut graphs = Vec::with_capacity(n_graphs);
    for (g, edges) in graph_edges.into_iter().enumerate() {
        let with_location = |e: Error| corrupt(&a_path, None, format!("graph {}: {e}", g + 1));
        let mut graph = Graph::new(sizes[g], edges.keys().copied()).map_err(with_location)?;
        // Graph stores edges sorted, which is the BTreeMap order
        let rows: Vec<usize> = edges.values().copied().collect();
        if let Some(labels) = &node_labels {
            let l: Vec<Label> = vertices[g].iter().map(|&v| labels[v]).collect();
            graph = graph.with_vertex_labels(l).map_err(with_location)?;
        }
        if let Some(attrs) = &node_attributes {
            let a = vertices[g].iter().map(|&v| attrs[v].clone()).collect();
            graph = graph.with_vertex_attributes(a).map_err(with_location)?;
        }
        if let Some(labels) = &edge_labels {
            graph = graph
                .with_aligned_edge_labels(rows.iter().map(|&r| labels[r]).collect())
                .map_err(with_location)?;
        }
        if let Some(attrs) = &edge_attributes {
            graph = graph
                .with_aligned_edge_attributes(rows.iter().map(|&r| attrs[r].clone()).collect())
                .map_err(with_location)?;
        }
        graphs.push(graph);
    }

    Ok(DatasetBundle {
        name: name.to_string(),
        graphs,
        targets,
        has_node_labels: node_labels.is_some(),
        has_edge_labels: edge_labels.is_some(),
        has_node_attributes: node_attributes.is_some(),
        has_edge_attributes: edge_attributes.is_some(),
    })
}

fn write_reals<W: Write>(out: &mut W, row: &[f64]) -> Result<()> {
    let text: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
    writeln!(out, "{}", text.join(", "))?;
    Ok(())
}

/// Writes `bundle` to `dir` in the TU format, both directions of every edge listed.
pub fn write_tu(bundle: &DatasetBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let name = &bundle.name;
    let create = |suffix: &str| -> Result<std::io::BufWriter<File>> {
        Ok(std::io::BufWriter::new(File::create(file_path(
            dir, name, suffix,
        ))?))
    };
    let mut a = create("A")?;
    let mut gi = create("graph_indicator")?;
    let mut gl = create("graph_labels")?;
    let first = bundle.graphs.first();
    let mut nl = first
        .and_then(|g| g.vertex_labels())
        .map(|_| create("node_labels"))
        .transpose()?;
    let mut na = first
        .and_then(|g| g.vertex_attributes())
        .map(|_| create("node_attributes"))
        .transpose()?;
    let mut el = first
        .and_then(|g| g.edge_labels())
        .map(|_| create("edge_labels"))
        .transpose()?;
    let mut ea = first
        .and_then(|g| g.edge_attributes())
        .map(|_| create("edge_attributes"))
        .transpose()?;

    let mut offset = 1;
    for (gid, (g, target)) in bundle.graphs.iter().zip(&bundle.targets).enumerate() {
        writeln!(gl, "{target}")?;
        for v in 0..g.order() {
            writeln!(gi, "{}", gid + 1)?;
            if let (Some(out), Some(l)) = (nl.as_mut(), g.vertex_labels()) {
                writeln!(out, "{}", l[v])?;
            }
            if let (Some(out), Some(at)) = (na.as_mut(), g.vertex_attributes()) {
                write_reals(out, &at[v])?;
            }
        }
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            for (x, y) in [(u, v), (v, u)] {
                writeln!(a, "{}, {}", x + offset, y + offset)?;
                if let (Some(out), Some(l)) = (el.as_mut(), g.edge_labels()) {
                    writeln!(out, "{}", l[e])?;
                }
                if let (Some(out), Some(at)) = (ea.as_mut(), g.edge_attributes()) {
                    write_reals(out, &at[e])?;
                }
            }
        }
        offset += g.order();
    }
    for w in [
        Some(&mut a),
        Some(&mut gi),
        Some(&mut gl),
        nl.as_mut(),
        na.as_mut(),
        el.as_mut(),
        ea.as_mut(),
    ]
    .into_iter()
    .flatten()
    {
        w.flush()?;
    }
    Ok(())
}

/// Explicit argument, then `GKL_CACHE_DIR`, then the platform data directory.
pub fn resolve_cache_dir(explicit: Option<&Path>) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os(CACHE_ENV).filter(|p| !p.is_empty()) {
        return Ok(PathBuf::from(p));
    }
    dirs::data_dir().map(|d| d.join("gkl")).ok_or_else(|| {
        Error::Io(std::io::Error::other(
            "no platform data directory; set GKL_CACHE_DIR",
        ))
    })
}

fn required_files(dir: &Path, name: &str) -> [PathBuf; 3] {
    [
        file_path(dir, name, "A"),
        file_path(dir, name, "graph_indicator"),
        file_path(dir, name, "graph_labels"),
    ]
}

fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !name.starts_with('.');
    if !ok {
        return Err(Error::spec(
            "dataset",
            format!("invalid dataset name {name:?}"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub path: PathBuf,
    /// True when the dataset was already present and nothing was downloaded.
    pub cached: bool,
}

/// Downloads and extracts `{base_url}/{name}.zip` into `{cache}/{name}` unless
/// the required files are already there.
pub fn fetch_dataset(
    name: &str,
    base_url: Option<&str>,
    cache_dir: Option<&Path>,
) -> Result<Fetched> {
    check_name(name)?;
    let cache = resolve_cache_dir(cache_dir)?;
    fs::create_dir_all(&cache)?;
    let lock = File::create(cache.join(".lock"))?;
    lock.lock()?;
    let target = cache.join(name);
    if required_files(&target, name).iter().all(|p| p.is_file()) {
        return Ok(Fetched {
            path: target,
            cached: true,
        });
    }
    let base = base_url.unwrap_or(DEFAULT_BASE_URL).trim_end_matches('/');
    let archive = download(&format!("{base}/{name}.zip"))?;
    let staging = cache.join(format!(".{name}.partial"));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    let result = extract(&archive, &staging).and_then(|()| {
        for p in required_files(&staging, name) {
            if !p.is_file() {
                let file = target.join(p.file_name().expect("file name"));
                return Err(corrupt(&file, None, "required file missing from archive"));
            }
        }
        if target.exists() {
            fs::remove_dir_all(&target)?;
        }
        fs::rename(&staging, &target)?;
        Ok(())
    });
    if result.is_err() && staging.exists() {
        let _ = fs::remove_dir_all(&staging);
    }
    result?;
    Ok(Fetched {
        path: target,
        cached: false,
    })
}

/// Fetches (or reuses) and parses.
pub fn load_dataset(
    name: &str,
    base_url: Option<&str>,
    cache_dir: Option<&Path>,
) -> Result<DatasetBundle> {
    let fetched = fetch_dataset(name, base_url, cache_dir)?;
    parse_tu(&fetched.path, name)
}

fn download(url: &str) -> Result<Vec<u8>> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_connect(Some(Duration::from_secs(30)))
        .timeout_global(Some(Duration::from_secs(600)))
        .build()
        .into();
    let mut response = agent.get(url).call().map_err(|e| match e {
        ureq::Error::StatusCode(code) => Error::Fetch {
            status: Some(code),
            message: format!("GET {url}"),
        },
        other => Error::Fetch {
            status: None,
            message: format!("GET {url}: {other}"),
        },
    })?;
    response
        .body_mut()
        .with_config()
        .limit(MAX_ARCHIVE_BYTES)
        .read_to_vec()
        .map_err(|e| Error::Fetch {
            status: None,
            message: format!("reading {url}: {e}"),
        })
}

/// Extracts regular files by base name, flattening any directories.
fn extract(archive: &[u8], dest: &Path) -> Result<()> {
    let bad = |e: zip::result::ZipError| corrupt(dest, None, format!("bad archive: {e}"));
    let mut zip = zip::ZipArchive::new(Cursor::new(archive)).map_err(bad)?;
    fs::create_dir_all(dest)?;
    for i in 0..zip.len() {
        let mut entry = zip.by_index(i).map_err(bad)?;
        if !entry.is_file() {
            continue;
        }
        let Some(base) = entry
            .enclosed_name()
            .and_then(|p| p.file_name().map(|f| f.to_os_string()))
        else {
            continue;
        };
        let mut bytes = Vec::with_capacity(entry.size() as usize);
        entry.read_to_end(&mut bytes)?;
        fs::write(dest.join(base), bytes)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, suffix: &str, body: &str) {
        fs::write(file_path(dir, "T", suffix), body).unwrap();
    }

    fn fixture(dir: &Path) {
        write(dir, "A", "1, 2\n2, 1\n2,3\n3, 2\n4, 5\n5, 4\n");
        write(dir, "graph_indicator", "1\n1\n1\n2\n2\n");
        write(dir, "graph_labels", "3\n-1\n");
        write(dir, "node_labels", "0\n1\n0\n2\n2\n");
        write(dir, "edge_labels", "7\n7\n8\n8\n9\n9\n");
    }

    #[test]
    fn parses_small_fixture() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        let b = parse_tu(dir.path(), "T").unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.targets, vec![3, -1]);
        assert_eq!(b.classes(), vec![-1, 3]);
        assert_eq!(b.graphs[0].edges(), &[(0, 1), (1, 2)]);
        assert_eq!(b.graphs[0].vertex_labels(), Some(&[0, 1, 0][..]));
        assert_eq!(b.graphs[0].edge_labels(), Some(&[7, 8][..]));
        assert_eq!(b.graphs[1].edges(), &[(0, 1)]);
        assert!(b.has_node_labels && b.has_edge_labels && !b.has_node_attributes);
    }

    #[test]
    fn cross_graph_edge_has_line_number() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        write(dir.path(), "A", "1, 2\n3, 4\n");
        write(dir.path(), "edge_labels", "0\n0\n");
        match parse_tu(dir.path(), "T") {
            Err(Error::CorruptDataset { line: Some(2), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_numeric_token_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        write(dir.path(), "node_labels", "0\n1\nx\n2\n2\n");
        match parse_tu(dir.path(), "T") {
            Err(Error::Parse { line: 3, file, .. }) => assert!(file.ends_with("T_node_labels.txt")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_attributes_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        write(
            dir.path(),
            "node_attributes",
            "1.0, 2.0\n1.0, 2.0\n1.0\n0, 0\n0, 0\n",
        );
        assert!(matches!(
            parse_tu(dir.path(), "T"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        let b = parse_tu(dir.path(), "T").unwrap();
        let out = tempfile::tempdir().unwrap();
        write_tu(&b, out.path()).unwrap();
        assert_eq!(parse_tu(out.path(), "T").unwrap(), b);
    }

    #[test]
    fn cache_dir_precedence() {
        let p = Path::new("/tmp/explicit");
        assert_eq!(resolve_cache_dir(Some(p)).unwrap(), p);
    }

    #[test]
    fn names_cannot_escape_cache() {
        for bad in ["../x", "a/b", "", ".hidden"] {
            assert!(
                matches!(check_name(bad), Err(Error::InvalidSpec { .. })),
                "{bad}"
            );
        }
        assert!(check_name("PROTEINS_full").is_ok());
    }
}
