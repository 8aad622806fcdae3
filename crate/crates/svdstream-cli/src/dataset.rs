//! Dataset ingestion: matrix market files, whitespace-separated edge lists
//! and `userId,movieId,rating` CSV files with contiguous reindexing.

use crate::{CliError, CACHE_DIR_ENV};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use svdstream::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    MatrixMarket,
    EdgeListTsv,
    RatingsCsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    ItemMeanCenter,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub format: DataFormat,
    pub path: PathBuf,
    #[serde(default)]
    pub undirected: bool,
    #[serde(default)]
    pub normalization: Normalization,
}

/// Resolve a dataset path, falling back to the cache directory from
/// `SVDSTREAM_CACHE_DIR` for relative paths that do not exist locally.
pub fn resolve_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(CACHE_DIR_ENV) {
        Some(dir) => {
            let candidate = PathBuf::from(dir).join(path);
            if candidate.exists() {
                candidate
            } else {
                path.to_path_buf()
            }
        }
        None => path.to_path_buf(),
    }
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<SparseMatrix, CliError> {
    if spec.undirected && spec.format != DataFormat::EdgeListTsv {
        return Err(CliError::Usage(
            "--undirected only applies to edge-list datasets".into(),
        ));
    }
    let path = resolve_path(&spec.path);
    let matrix = match spec.format {
        DataFormat::MatrixMarket => svdstream::mmio::read_matrix_market_file(&path)?,
        DataFormat::EdgeListTsv => load_edge_list(&path, spec.undirected)?,
        DataFormat::RatingsCsv => load_ratings_csv(&path)?,
    };
    Ok(match spec.normalization {
        Normalization::None => matrix,
        Normalization::ItemMeanCenter => center_item_means(&matrix),
    })
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(std::io::BufReader::new(file)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l)))
}

/// Whitespace-separated node pairs, one edge per line; `#` and `%` start
/// comments. Node ids become matrix indices directly, so the adjacency is
/// (max id + 1) square. Duplicate edges keep the maximum weight.
fn load_edge_list(path: &Path, undirected: bool) -> Result<SparseMatrix, CliError> {
    let mut edges: HashMap<(usize, usize), f64> = HashMap::new();
    let mut max_node = 0usize;
    for (lineno, line) in open_lines(path)? {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let mut fields = t.split_whitespace();
        let u: usize = parse_field(path, lineno, fields.next(), "source node")?;
        let v: usize = parse_field(path, lineno, fields.next(), "target node")?;
        let w: f64 = match fields.next() {
            Some(tok) => tok.parse().map_err(|_| CliError::Malformed {
                path: path.display().to_string(),
                line: lineno,
                msg: format!("bad edge weight {tok:?}"),
            })?,
            None => 1.0,
        };
        max_node = max_node.max(u).max(v);
        merge_max(&mut edges, (u, v), w);
        if undirected {
            merge_max(&mut edges, (v, u), w);
        }
    }
    if edges.is_empty() {
        return Err(CliError::Dataset(format!("{}: no edges found", path.display())));
    }
    let n = max_node + 1;
    let triplets: Vec<(usize, usize, f64)> =
        edges.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    Ok(SparseMatrix::from_triplets(n, n, &triplets))
}

/// `userId,movieId,rating[,timestamp]` with an optional header line. User
/// and item ids are reindexed contiguously in order of first appearance.
/// Duplicate (user, item) pairs keep the maximum rating.
fn load_ratings_csv(path: &Path) -> Result<SparseMatrix, CliError> {
    let mut users: HashMap<u64, usize> = HashMap::new();
    let mut items: HashMap<u64, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), f64> = HashMap::new();
    for (lineno, line) in open_lines(path)? {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let fields: Vec<&str> = t.split(',').collect();
        if fields.len() < 3 {
            return Err(CliError::Malformed {
                path: path.display().to_string(),
                line: lineno,
                msg: "expected userId,movieId,rating".into(),
            });
        }
        // Header detection: a first field that does not parse on line 1.
        if lineno == 1 && fields[0].parse::<u64>().is_err() {
            continue;
        }
        let uid: u64 = parse_field(path, lineno, Some(fields[0]), "user id")?;
        let iid: u64 = parse_field(path, lineno, Some(fields[1]), "item id")?;
        let rating: f64 = parse_field(path, lineno, Some(fields[2]), "rating")?;
        let un = users.len();
        let u = *users.entry(uid).or_insert(un);
        let inn = items.len();
        let i = *items.entry(iid).or_insert(inn);
        merge_max(&mut cells, (u, i), rating);
    }
    if cells.is_empty() {
        return Err(CliError::Dataset(format!("{}: no ratings found", path.display())));
    }
    let triplets: Vec<(usize, usize, f64)> =
        cells.into_iter().map(|((u, i), r)| (u, i, r)).collect();
    Ok(SparseMatrix::from_triplets(users.len(), items.len(), &triplets))
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    field: Option<&str>,
    what: &str,
) -> Result<T, CliError> {
    let tok = field.ok_or_else(|| CliError::Malformed {
        path: path.display().to_string(),
        line,
        msg: format!("missing {what}"),
    })?;
    tok.trim().parse().map_err(|_| CliError::Malformed {
        path: path.display().to_string(),
        line,
        msg: format!("bad {what}: {tok:?}"),
    })
}

fn merge_max(map: &mut HashMap<(usize, usize), f64>, key: (usize, usize), value: f64) {
    map.entry(key)
        .and_modify(|v| {
            if value > *v {
                *v = value;
            }
        })
        .or_insert(value);
}

/// Subtract each column's mean over its stored entries.
fn center_item_means(a: &SparseMatrix) -> SparseMatrix {
    let entries: Vec<(usize, usize, f64)> = a.iter_entries().collect();
    let means = svdstream::eval::item_means(&entries, a.cols());
    let centered: Vec<(usize, usize, f64)> = entries
        .into_iter()
        .map(|(i, j, v)| (i, j, v - means[j].unwrap_or(0.0)))
        .collect();
    SparseMatrix::from_triplets(a.rows(), a.cols(), &centered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_file(name: &str, contents: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("svdstream-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn edge_list_three_lines_gives_symmetric_adjacency() {
        let path = temp_file("edges.tsv", "0 1\n1 2\n0 2\n");
        let spec = DatasetSpec {
            format: DataFormat::EdgeListTsv,
            path,
            undirected: true,
            normalization: Normalization::None,
        };
        let m = load_dataset(&spec).unwrap();
        assert_eq!(m.rows(), 3);
        assert_eq!(m.cols(), 3);
        assert_eq!(m.nnz(), 6);
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            assert_eq!(m.col(j).get(i), 1.0);
            assert_eq!(m.col(i).get(j), 1.0);
        }
    }

    #[test]
    fn single_rating_row_gives_one_by_one() {
        let path = temp_file("ratings1.csv", "userId,movieId,rating\n7,99,4.5\n");
        let spec = DatasetSpec {
            format: DataFormat::RatingsCsv,
            path,
            undirected: false,
            normalization: Normalization::None,
        };
        let m = load_dataset(&spec).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert_eq!(m.col(0).get(0), 4.5);
    }

    #[test]
    fn duplicate_edges_keep_max() {
        let path = temp_file("dup.tsv", "0 1 2.0\n0 1 5.0\n0 1 1.0\n");
        let spec = DatasetSpec {
            format: DataFormat::EdgeListTsv,
            path,
            undirected: false,
            normalization: Normalization::None,
        };
        let m = load_dataset(&spec).unwrap();
        assert_eq!(m.col(1).get(0), 5.0);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let path = temp_file("bad.tsv", "0 1\nnot numbers here\n");
        let spec = DatasetSpec {
            format: DataFormat::EdgeListTsv,
            path,
            undirected: false,
            normalization: Normalization::None,
        };
        match load_dataset(&spec) {
            Err(CliError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn matrix_market_round_trip() {
        let mut rng = svdstream::rng::Rng64::new(5);
        let m = svdstream::rng::random_sparse_matrix(12, 9, 0.2, &mut rng);
        let dir = std::env::temp_dir().join(format!("svdstream-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rt.mtx");
        svdstream::mmio::write_matrix_market_file(&path, &m).unwrap();
        let spec = DatasetSpec {
            format: DataFormat::MatrixMarket,
            path,
            undirected: false,
            normalization: Normalization::None,
        };
        let back = load_dataset(&spec).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn undirected_rejected_for_csv() {
        let path = temp_file("r.csv", "1,1,3\n");
        let spec = DatasetSpec {
            format: DataFormat::RatingsCsv,
            path,
            undirected: true,
            normalization: Normalization::None,
        };
        assert!(matches!(load_dataset(&spec), Err(CliError::Usage(_))));
    }
}
