//! Update-batch files: a one-line header naming the batch kind, followed by
//! one matrix market document (two for weight updates: D then E).

use crate::CliError;
use std::io::Write;
use std::path::Path;
use svdstream::engine::UpdateBatch;
use svdstream::mmio;
use svdstream::sparse::SparseMatrix;

/// Parse a batch file. Row batches are stored in their natural `s x n`
/// orientation and transposed here into the column form the engine takes.
pub fn read_batch_file(path: &Path) -> Result<UpdateBatch, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    let kind = loop {
        match lines.next() {
            Some(l) if l.trim().is_empty() => continue,
            Some(l) => break l.trim().to_string(),
            None => {
                return Err(CliError::Malformed {
                    path: path.display().to_string(),
                    line: 1,
                    msg: "empty batch file".into(),
                })
            }
        }
    };
    let rest: String = lines.collect::<Vec<_>>().join("\n");
    let mut docs = split_mm_documents(&rest);
    let mut next_doc = |what: &str| -> Result<SparseMatrix, CliError> {
        let doc = docs.next().ok_or_else(|| CliError::Malformed {
            path: path.display().to_string(),
            line: 0,
            msg: format!("missing {what} payload"),
        })?;
        Ok(mmio::read_matrix_market(std::io::Cursor::new(doc))?)
    };
    match kind.as_str() {
        "add_rows" => {
            let e = next_doc("row-block")?;
            Ok(UpdateBatch::AddRows(e.transpose()))
        }
        "add_columns" => Ok(UpdateBatch::AddColumns(next_doc("column-block")?)),
        "update_weights" => {
            let d = next_doc("weight left factor")?;
            let e = next_doc("weight right factor")?;
            Ok(UpdateBatch::UpdateWeights { d, e })
        }
        other => Err(CliError::Malformed {
            path: path.display().to_string(),
            line: 1,
            msg: format!("unknown batch kind {other:?}"),
        }),
    }
}

pub fn write_batch_file(path: &Path, batch: &UpdateBatch) -> Result<(), CliError> {
    let mut out: Vec<u8> = Vec::new();
    let emit = |out: &mut Vec<u8>, m: &SparseMatrix| -> Result<(), CliError> {
        mmio::write_matrix_market(out, m)?;
        Ok(())
    };
    match batch {
        UpdateBatch::AddRows(e_rt) => {
            writeln!(out, "add_rows").unwrap();
            emit(&mut out, &e_rt.transpose())?;
        }
        UpdateBatch::AddColumns(e) => {
            writeln!(out, "add_columns").unwrap();
            emit(&mut out, e)?;
        }
        UpdateBatch::UpdateWeights { d, e } => {
            writeln!(out, "update_weights").unwrap();
            emit(&mut out, d)?;
            emit(&mut out, e)?;
        }
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// Split concatenated matrix market documents on their `%%MatrixMarket`
/// header lines.
fn split_mm_documents(text: &str) -> impl Iterator<Item = String> + '_ {
    let mut docs: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.starts_with("%%MatrixMarket") {
            docs.push(String::new());
        }
        if let Some(cur) = docs.last_mut() {
            cur.push_str(line);
            cur.push('\n');
        }
    }
    docs.into_iter()
}

#[cfg(test)]
mod tests {
    use super::*;
    use svdstream::rng::{random_sparse_matrix, Rng64};

    fn temp_path(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("svdstream-batch-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn batch_round_trips_all_kinds() {
        let mut rng = Rng64::new(2);
        let path = temp_path("cols.batch");
        let e = random_sparse_matrix(10, 3, 0.3, &mut rng);
        write_batch_file(&path, &UpdateBatch::AddColumns(e.clone())).unwrap();
        match read_batch_file(&path).unwrap() {
            UpdateBatch::AddColumns(got) => assert_eq!(got, e),
            other => panic!("wrong kind {other:?}"),
        }

        let path = temp_path("rows.batch");
        let e_rt = random_sparse_matrix(12, 2, 0.3, &mut rng);
        write_batch_file(&path, &UpdateBatch::AddRows(e_rt.clone())).unwrap();
        match read_batch_file(&path).unwrap() {
            UpdateBatch::AddRows(got) => assert_eq!(got, e_rt),
            other => panic!("wrong kind {other:?}"),
        }

        let path = temp_path("weights.batch");
        let d = random_sparse_matrix(9, 2, 0.4, &mut rng);
        let e = random_sparse_matrix(7, 2, 0.4, &mut rng);
        write_batch_file(&path, &UpdateBatch::UpdateWeights { d: d.clone(), e: e.clone() })
            .unwrap();
        match read_batch_file(&path).unwrap() {
            UpdateBatch::UpdateWeights { d: gd, e: ge } => {
                assert_eq!(gd, d);
                assert_eq!(ge, e);
            }
            other => panic!("wrong kind {other:?}"),
        }
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let path = temp_path("bad.batch");
        std::fs::write(&path, "drop_everything\n").unwrap();
        assert!(matches!(read_batch_file(&path), Err(CliError::Malformed { .. })));
    }
}
