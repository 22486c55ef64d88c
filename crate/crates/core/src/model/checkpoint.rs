use std::path::Path;

use super::{ModelConfig, ModelError, TwoTowerModel};
use crate::io::write_atomic;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"AFFTT\0\0\0";
pub const CHECKPOINT_VERSION: u32 = 1;

impl TwoTowerModel {
    /// Magic, version (u32 LE), config JSON length (u64 LE) and bytes,
    /// parameter count (u64 LE), then every parameter as f64 LE.
    pub fn to_bytes(&self) -> Vec<u8> {
        let config = serde_json::to_vec(&self.config).expect("config serializes");
        let mut out = Vec::with_capacity(32 + config.len() + 8 * self.params.len());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(config.len() as u64).to_le_bytes());
        out.extend_from_slice(&config);
        out.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let bad = |m: &str| ModelError::Checkpoint(m.to_string());
        let mut at = 0usize;
        let mut take = |n: usize| -> Result<&[u8], ModelError> {
            let s = bytes.get(at..at + n).ok_or_else(|| bad("truncated"))?;
            at += n;
            Ok(s)
        };
        if take(8)? != CHECKPOINT_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let len = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
        let config: ModelConfig = serde_json::from_slice(take(len)?).map_err(|e| bad(&e.to_string()))?;
        config.validate().map_err(|e| bad(&e))?;
        let n = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
        let mut model = TwoTowerModel::zeros(config);
        if n != model.params.len() {
            return Err(bad(&format!("{n} parameters, config implies {}", model.params.len())));
        }
        for p in model.params.iter_mut() {
            *p = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
            if !p.is_finite() {
                return Err(bad("non-finite parameter"));
            }
        }
        if at != bytes.len() {
            return Err(bad("trailing bytes"));
        }
        Ok(model)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ModelError + '_ {
    move |source| ModelError::Io { path: path.display().to_string(), source }
}

pub fn save_model(model: &TwoTowerModel, path: &Path) -> Result<(), ModelError> {
    write_atomic(path, &model.to_bytes()).map_err(io_err(path))
}

pub fn load_model(path: &Path) -> Result<TwoTowerModel, ModelError> {
    TwoTowerModel::from_bytes(&std::fs::read(path).map_err(io_err(path))?)
}

/// CSV with a `post_id,e0,...` header. Values use shortest round-trip form.
pub fn write_embeddings(table: &[(String, Vec<f64>)], path: &Path) -> Result<(), ModelError> {
    let dim = table.first().map_or(0, |r| r.1.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = std::iter::once("post_id".to_string()).chain((0..dim).map(|i| format!("e{i}"))).collect();
    w.write_record(&header).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    for (id, v) in table {
        let row: Vec<String> = std::iter::once(id.clone()).chain(v.iter().map(|x| format!("{x:?}"))).collect();
        w.write_record(&row).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    write_atomic(path, &bytes).map_err(io_err(path))
}

pub fn read_embeddings(path: &Path) -> Result<Vec<(String, Vec<f64>)>, ModelError> {
    let bad = |m: String| ModelError::Checkpoint(format!("{}: {m}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let id = rec.get(0).ok_or_else(|| bad(format!("row {}: empty", i + 1)))?.to_string();
        let v = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", i + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push((id, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bytes_round_trip_exactly() {
        let m = TwoTowerModel::new(ModelConfig::default(), 5);
        let back = TwoTowerModel::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
        let mut bytes = m.to_bytes();
        bytes.pop();
        assert!(TwoTowerModel::from_bytes(&bytes).is_err());
        assert!(TwoTowerModel::from_bytes(b"nonsense").is_err());
    }

    #[test]
    fn embeddings_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        let table = vec![("p1".to_string(), vec![0.1, -1.0 / 3.0]), ("p2".to_string(), vec![0.0, 1e-300])];
        write_embeddings(&table, &path).unwrap();
        assert_eq!(read_embeddings(&path).unwrap(), table);
    }
}
