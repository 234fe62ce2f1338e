use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

use super::problem::BlockProblem;

/// Reads a raw matrix file: little-endian `u64` rows and cols, then
/// `rows·cols` little-endian `f64` values in column-major order.
pub fn read_raw_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let bytes = fs::read(path)?;
    if bytes.len() < 16 {
        return Err(Error::Dimension("raw matrix file is shorter than its header".into()));
    }
    let word = |k: usize| <[u8; 8]>::try_from(&bytes[8 * k..8 * k + 8]).expect("8 bytes");
    let rows = u64::from_le_bytes(word(0)) as usize;
    let cols = u64::from_le_bytes(word(1)) as usize;
    let expected = rows.checked_mul(cols).and_then(|n| n.checked_mul(8)).and_then(|n| n.checked_add(16));
    if expected != Some(bytes.len()) {
        return Err(Error::Dimension(format!(
            "raw matrix header says {rows}x{cols} but the file has {} bytes",
            bytes.len()
        )));
    }
    let data: Vec<f64> = (0..rows * cols).map(|k| f64::from_le_bytes(word(k + 2))).collect();
    DenseMatrix::from_col_major(rows, cols, &data)
}

/// Writes the format read by [`read_raw_matrix`].
pub fn write_raw_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 + 8 * m.rows() * m.cols());
    bytes.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.to_col_major() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn save_problem(path: impl AsRef<Path>, prob: &BlockProblem) -> Result<()> {
    fs::write(path, serde_json::to_vec(prob)?)?;
    Ok(())
}

/// Loads a problem from JSON.
///
/// Besides the serialized `{"dense": ...}` and `{"sparse": ...}` forms, a
/// block matrix may be written as `{"rows": [[...], ...]}` (nested arrays)
/// or `{"file": "name.bin"}` (a raw matrix file, resolved relative to the
/// JSON file).
pub fn load_problem(path: impl AsRef<Path>) -> Result<BlockProblem> {
    let path = path.as_ref();
    let mut doc: Value = serde_json::from_slice(&fs::read(path)?)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for key in ["h_blocks", "a_blocks"] {
        if let Some(Value::Array(blocks)) = doc.get_mut(key) {
            for blk in blocks.iter_mut() {
                expand_matrix(blk, base)?;
            }
        }
    }
    Ok(serde_json::from_value(doc)?)
}

fn expand_matrix(blk: &mut Value, base: &Path) -> Result<()> {
    let dense = if let Some(rows) = blk.get("rows").filter(|r| r.is_array()) {
        let rows: Vec<Vec<f64>> = serde_json::from_value(rows.clone())?;
        DenseMatrix::from_rows(&rows)?
    } else if let Some(file) = blk.get("file").and_then(Value::as_str) {
        read_raw_matrix(base.join(file))?
    } else {
        return Ok(());
    };
    *blk = serde_json::json!({ "dense": dense });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gen_qp;

    #[test]
    fn raw_roundtrip_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let m = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let p = dir.path().join("m.bin");
        write_raw_matrix(&p, &m).unwrap();
        let bytes = fs::read(&p).unwrap();
        // column-major payload
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 4.0);
        assert_eq!(read_raw_matrix(&p).unwrap(), m);
        fs::write(&p, &bytes[..bytes.len() - 1]).unwrap();
        assert!(read_raw_matrix(&p).is_err());
    }

    #[test]
    fn problem_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let q = gen_qp(3, 6, 2, 1).unwrap();
        let p = dir.path().join("q.json");
        save_problem(&p, &q).unwrap();
        assert_eq!(load_problem(&p).unwrap(), q);
    }

    #[test]
    fn nested_rows_and_file_references() {
        let dir = tempfile::tempdir().unwrap();
        write_raw_matrix(dir.path().join("a2.bin"), &DenseMatrix::from_rows(&[[2.0]]).unwrap()).unwrap();
        let doc = r#"{
            "h_blocks": [{"rows": [[1.0]]}, {"rows": [[0.0]]}],
            "a_blocks": [{"rows": [[1.0]]}, {"file": "a2.bin"}],
            "b": [3.0],
            "g": [{"kind": "zero"}, {"kind": "nonneg_indicator"}]
        }"#;
        let p = dir.path().join("p.json");
        fs::write(&p, doc).unwrap();
        let prob = load_problem(&p).unwrap();
        assert_eq!(prob.feasibility(&[vec![1.0], vec![1.0]]).unwrap(), 0.0);
        fs::write(&p, doc.replace("[3.0]", "[3.0, 1.0]")).unwrap();
        assert!(load_problem(&p).is_err());
    }
}
