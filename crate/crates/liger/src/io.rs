//! File formats: the LGEM embedding binary, the CSV layouts for votes,
//! labels, provenance, and predictions, and the JSON documents for
//! configuration, partitions, and fitted models.
//!
//! LGEM layout, no padding anywhere:
//!
//! | bytes | content                              |
//! |-------|--------------------------------------|
//! | 0-3   | ASCII `LGEM`                         |
//! | 4-7   | u32 LE version = 1                   |
//! | 8-15  | u64 LE n                             |
//! | 16-19 | u32 LE d                             |
//! | 20    | u8 metric (0 euclidean, 1 cosine)    |
//! | 21..  | n*d f32 LE, row-major                |
//!
//! Store followed by load reproduces the matrix bit for bit.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::data::{EmbeddingDataset, EngineConfig, LabelVector, Metric, VoteMatrix};
use crate::error::{LigerError, Result};
use crate::extend::{ExtendedVoteMatrix, Provenance};
use crate::model::{LabelModel, LabelModelDoc, PredictionRow, Predictions};
use crate::partition::{Partition, PartitionDoc};

const LGEM_MAGIC: &[u8; 4] = b"LGEM";
const LGEM_VERSION: u32 = 1;

/// Writes the LGEM binary layout.
pub fn store_embeddings(path: &Path, emb: &EmbeddingDataset) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(LGEM_MAGIC)?;
    out.write_all(&LGEM_VERSION.to_le_bytes())?;
    out.write_all(&(emb.n() as u64).to_le_bytes())?;
    out.write_all(&(emb.d() as u32).to_le_bytes())?;
    out.write_all(&[match emb.metric() {
        Metric::Euclidean => 0u8,
        Metric::Cosine => 1u8,
    }])?;
    for v in emb.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn load_lgem(path: &Path, bytes: &[u8]) -> Result<EmbeddingDataset> {
    let header_len = 4 + 4 + 8 + 4 + 1;
    if bytes.len() < header_len {
        return Err(LigerError::format(path, "truncated header"));
    }
    if &bytes[0..4] != LGEM_MAGIC {
        return Err(LigerError::format(
            path,
            format!("bad magic {:?}, expected \"LGEM\"", &bytes[0..4]),
        ));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != LGEM_VERSION {
        return Err(LigerError::format(
            path,
            format!("unsupported version {version}, expected {LGEM_VERSION}"),
        ));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as usize;
    let metric = match bytes[20] {
        0 => Metric::Euclidean,
        1 => Metric::Cosine,
        other => {
            return Err(LigerError::format(path, format!("unknown metric byte {other}")));
        }
    };
    let expected = header_len + n * d * 4;
    if bytes.len() != expected {
        return Err(LigerError::format(
            path,
            format!("payload length {} does not match n*d = {}*{}", bytes.len() - header_len, n, d),
        ));
    }
    let mut data = Vec::with_capacity(n * d);
    for chunk in bytes[header_len..].chunks_exact(4) {
        data.push(f32::from_le_bytes(chunk.try_into().unwrap()));
    }
    EmbeddingDataset::new(data, d.max(1), metric)
}

fn load_embeddings_csv(path: &Path, bytes: &[u8], metric: Metric) -> Result<EmbeddingDataset> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| LigerError::format(path, "embeddings CSV is not valid UTF-8"))?;
    let mut data = Vec::new();
    let mut d = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match d {
            None => d = Some(fields.len()),
            Some(d) if d != fields.len() => {
                return Err(LigerError::shape(
                    format!("embeddings CSV line {}", lineno + 1),
                    d,
                    fields.len(),
                ));
            }
            _ => {}
        }
        for f in fields {
            let v: f32 = f.trim().parse().map_err(|_| {
                // Neither LGEM magic nor a parseable CSV float: the file
                // matches no supported layout.
                LigerError::format(path, format!("bad float `{f}` on line {}", lineno + 1))
            })?;
            data.push(v);
        }
    }
    let d = d.ok_or_else(|| LigerError::format(path, "empty embeddings CSV"))?;
    EmbeddingDataset::new(data, d, metric)
}

/// Loads embeddings from either layout, sniffing the LGEM magic. A CSV file
/// carries no metric, so `csv_metric` supplies it out-of-band.
pub fn load_embeddings(path: &Path, csv_metric: Metric) -> Result<EmbeddingDataset> {
    let bytes = fs::read(path)?;
    if bytes.len() >= 4 && &bytes[0..4] == LGEM_MAGIC {
        load_lgem(path, &bytes)
    } else {
        load_embeddings_csv(path, &bytes, csv_metric)
    }
}

fn expect_header(path: &Path, got: &str, want: &str) -> Result<()> {
    if got.trim_end() == want {
        Ok(())
    } else {
        Err(LigerError::format(
            path,
            format!("bad header `{got}`, expected `{want}`"),
        ))
    }
}

fn votes_header(m: usize) -> String {
    let mut h = String::from("id");
    for i in 0..m {
        h.push_str(&format!(",lf_{i}"));
    }
    h
}

/// Writes the votes CSV: header `id,lf_0,...`, one row per point.
pub fn store_votes(path: &Path, votes: &VoteMatrix) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", votes_header(votes.m()))?;
    for p in 0..votes.n() {
        write!(out, "{p}")?;
        for s in 0..votes.m() {
            write!(out, ",{}", votes.get(p, s))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Loads the votes CSV, enforcing the header shape, ascending ids from 0,
/// the `{-1,0,1}` vote domain, and the expected row count.
pub fn load_votes(path: &Path, n_expected: usize) -> Result<VoteMatrix> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| LigerError::format(path, "missing header"))?;
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    if cols.first() != Some(&"id") || cols.len() < 2 {
        return Err(LigerError::format(path, "header must start with `id` and name sources"));
    }
    let m = cols.len() - 1;
    expect_header(path, header, &votes_header(m))?;

    let mut votes = Vec::new();
    let mut row = 0usize;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != m + 1 {
            return Err(LigerError::shape(format!("votes row {row}"), m + 1, fields.len()));
        }
        let id: usize = fields[0].trim().parse().map_err(|_| {
            LigerError::validation("id", format!("bad id `{}` on row {row}", fields[0]))
        })?;
        if id != row {
            return Err(LigerError::validation(
                "id",
                format!("ids must ascend from 0; row {row} has id {id}"),
            ));
        }
        for f in &fields[1..] {
            let v: i64 = f.trim().parse().map_err(|_| {
                LigerError::validation("votes", format!("bad vote `{f}` on row {row}"))
            })?;
            if !matches!(v, -1..=1) {
                return Err(LigerError::validation(
                    "votes",
                    format!("vote {v} on row {row} not in {{-1,0,1}}"),
                ));
            }
            votes.push(v as i8);
        }
        row += 1;
    }
    if row != n_expected {
        return Err(LigerError::shape("votes row count", n_expected, row));
    }
    VoteMatrix::new(votes, m)
}

/// Writes the labels CSV: header `id,y`, y in {-1, 1}.
pub fn store_labels(path: &Path, labels: &LabelVector) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "id,y")?;
    for i in 0..labels.n() {
        writeln!(out, "{},{}", i, labels.get(i))?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_labels(path: &Path) -> Result<LabelVector> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| LigerError::format(path, "missing header"))?;
    expect_header(path, header, "id,y")?;
    let mut labels = Vec::new();
    let mut row = 0usize;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(LigerError::shape(format!("labels row {row}"), 2, fields.len()));
        }
        let id: usize = fields[0].trim().parse().map_err(|_| {
            LigerError::validation("id", format!("bad id `{}` on row {row}", fields[0]))
        })?;
        if id != row {
            return Err(LigerError::validation(
                "id",
                format!("ids must ascend from 0; row {row} has id {id}"),
            ));
        }
        let y: i64 = fields[1].trim().parse().map_err(|_| {
            LigerError::validation("labels", format!("bad label `{}` on row {row}", fields[1]))
        })?;
        if !matches!(y, -1 | 1) {
            return Err(LigerError::validation(
                "labels",
                format!("label {y} on row {row} not in {{-1,1}}"),
            ));
        }
        labels.push(y as i8);
        row += 1;
    }
    LabelVector::new(labels)
}

/// Writes extended votes as the votes CSV plus a parallel provenance CSV
/// with values O (original), E (extended), A (abstain).
pub fn store_extended_votes(
    votes_path: &Path,
    provenance_path: &Path,
    extended: &ExtendedVoteMatrix,
) -> Result<()> {
    store_votes(votes_path, &extended.to_vote_matrix())?;
    let mut out = BufWriter::new(fs::File::create(provenance_path)?);
    writeln!(out, "{}", votes_header(extended.m()))?;
    for p in 0..extended.n() {
        write!(out, "{p}")?;
        for s in 0..extended.m() {
            write!(out, ",{}", extended.provenance(p, s).letter())?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_provenance(path: &Path, n: usize, m: usize) -> Result<Vec<Provenance>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| LigerError::format(path, "missing header"))?;
    expect_header(path, header, &votes_header(m))?;
    let mut prov = Vec::with_capacity(n * m);
    for (row, line) in lines.filter(|l| !l.is_empty()).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != m + 1 {
            return Err(LigerError::shape(format!("provenance row {row}"), m + 1, fields.len()));
        }
        for f in &fields[1..] {
            let c = f.trim().chars().next().ok_or_else(|| {
                LigerError::validation("provenance", format!("empty cell on row {row}"))
            })?;
            prov.push(Provenance::from_letter(c)?);
        }
    }
    if prov.len() != n * m {
        return Err(LigerError::shape("provenance entries", n * m, prov.len()));
    }
    Ok(prov)
}

/// Writes predictions: `id,part,posterior,label,abstains`.
pub fn store_predictions(path: &Path, predictions: &Predictions) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "id,part,posterior,label,abstains")?;
    for r in &predictions.rows {
        writeln!(out, "{},{},{},{},{}", r.id, r.part, r.posterior, r.label, r.abstains)?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_predictions(path: &Path) -> Result<Predictions> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| LigerError::format(path, "missing header"))?;
    expect_header(path, header, "id,part,posterior,label,abstains")?;
    let mut rows = Vec::new();
    for (rowno, line) in lines.filter(|l| !l.is_empty()).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(LigerError::shape(format!("predictions row {rowno}"), 5, fields.len()));
        }
        let parse_err = |field: &str, value: &str| {
            LigerError::validation(field.to_string(), format!("bad value `{value}` on row {rowno}"))
        };
        let id = fields[0].trim().parse().map_err(|_| parse_err("id", fields[0]))?;
        let part = fields[1].trim().parse().map_err(|_| parse_err("part", fields[1]))?;
        let posterior: f64 = fields[2].trim().parse().map_err(|_| parse_err("posterior", fields[2]))?;
        let label: i8 = fields[3].trim().parse().map_err(|_| parse_err("label", fields[3]))?;
        let abstains = fields[4].trim().parse().map_err(|_| parse_err("abstains", fields[4]))?;
        if !matches!(label, -1 | 1) {
            return Err(parse_err("label", fields[3]));
        }
        rows.push(PredictionRow {
            id,
            part,
            posterior,
            label,
            abstains,
        });
    }
    Ok(Predictions { rows })
}

pub fn load_config(path: &Path) -> Result<EngineConfig> {
    let text = fs::read_to_string(path)?;
    let config: EngineConfig = serde_json::from_str(&text)
        .map_err(|e| LigerError::format(path, format!("bad config document: {e}")))?;
    config.validate()?;
    Ok(config)
}

pub fn store_config(path: &Path, config: &EngineConfig) -> Result<()> {
    fs::write(path, format!("{}\n", serde_json::to_string_pretty(config).unwrap()))?;
    Ok(())
}

pub fn store_partition(path: &Path, partition: &Partition) -> Result<()> {
    let doc = partition.to_doc();
    fs::write(path, format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))?;
    Ok(())
}

pub fn load_partition(path: &Path) -> Result<Partition> {
    let text = fs::read_to_string(path)?;
    let doc: PartitionDoc = serde_json::from_str(&text)
        .map_err(|e| LigerError::format(path, format!("bad partition document: {e}")))?;
    Partition::from_doc(doc)
}

pub fn store_model(path: &Path, model: &LabelModel) -> Result<()> {
    let doc = model.to_doc();
    fs::write(path, format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<LabelModel> {
    let text = fs::read_to_string(path)?;
    let doc: LabelModelDoc = serde_json::from_str(&text)
        .map_err(|e| LigerError::format(path, format!("bad model document: {e}")))?;
    LabelModel::from_doc(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn lgem_roundtrip_is_bitwise() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("e.lgem");
        let emb =
            EmbeddingDataset::new(vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0], 3, Metric::Euclidean).unwrap();
        store_embeddings(&path, &emb).unwrap();
        let back = load_embeddings(&path, Metric::Euclidean).unwrap();
        assert_eq!(back.n(), 2);
        assert_eq!(back.d(), 3);
        assert_eq!(back.metric(), Metric::Euclidean);
        let a: Vec<u32> = emb.data().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u32> = back.data().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.lgem");
        // Valid-looking header but wrong magic. The payload does not start
        // with LGEM and is not an embeddings CSV either.
        fs::write(&path, b"XXXX\x01\x00\x00\x00").unwrap();
        assert!(matches!(
            load_embeddings(&path, Metric::Euclidean),
            Err(LigerError::Format { .. })
        ));
    }

    #[test]
    fn embeddings_csv_parses() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("e.csv");
        fs::write(&path, "1.5,2.5\n3.5,4.5\n").unwrap();
        let emb = load_embeddings(&path, Metric::Euclidean).unwrap();
        assert_eq!(emb.n(), 2);
        assert_eq!(emb.d(), 2);
        assert_eq!(emb.row(0), &[1.5, 2.5]);
        assert_eq!(emb.row(1), &[3.5, 4.5]);
    }

    #[test]
    fn votes_csv_roundtrip_and_domain() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("v.csv");
        fs::write(&path, "id,lf_0,lf_1\n0,1,0\n1,-1,1\n").unwrap();
        let votes = load_votes(&path, 2).unwrap();
        assert_eq!(votes.m(), 2);
        assert_eq!(votes.row(0), &[1, 0]);
        assert_eq!(votes.row(1), &[-1, 1]);

        let out = dir.path().join("v2.csv");
        store_votes(&out, &votes).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&out).unwrap());

        fs::write(&path, "id,lf_0\n0,2\n").unwrap();
        assert!(matches!(load_votes(&path, 1), Err(LigerError::Validation { .. })));
    }

    #[test]
    fn votes_row_count_mismatch_is_shape_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("v.csv");
        fs::write(&path, "id,lf_0\n0,1\n1,0\n").unwrap();
        assert!(matches!(load_votes(&path, 3), Err(LigerError::Shape { .. })));
    }

    #[test]
    fn votes_out_of_order_ids_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("v.csv");
        fs::write(&path, "id,lf_0\n1,1\n0,0\n").unwrap();
        assert!(load_votes(&path, 2).is_err());
    }

    #[test]
    fn labels_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("y.csv");
        let labels = LabelVector::new(vec![1, -1, 1]).unwrap();
        store_labels(&path, &labels).unwrap();
        assert_eq!(load_labels(&path).unwrap(), labels);
    }

    #[test]
    fn config_document_mirrors_field_names() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(
            &path,
            r#"{"seed": 7, "s": 3, "radii": [0.1, 0.0], "metric": "cosine",
                "class_balance_mode": "uniform", "accuracy_clamp": 0.001,
                "kmeans_max_iters": 50, "kmeans_tol": 1e-8}"#,
        )
        .unwrap();
        let config = load_config(&path).unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.s, 3);
        assert_eq!(config.metric, Metric::Cosine);
        assert_eq!(config.kmeans_max_iters, 50);
    }

    #[test]
    fn provenance_roundtrip() {
        let dir = tempdir().unwrap();
        let votes = VoteMatrix::new(vec![1, 0, 0, 0], 2).unwrap();
        let emb = EmbeddingDataset::new(vec![0.0, 1.0], 1, Metric::Euclidean).unwrap();
        let ext = crate::extend::extend_all(&emb, &votes, &[5.0, 0.0]).unwrap();
        let vp = dir.path().join("v.csv");
        let pp = dir.path().join("v.prov.csv");
        store_extended_votes(&vp, &pp, &ext).unwrap();
        let prov = load_provenance(&pp, 2, 2).unwrap();
        assert_eq!(
            prov,
            vec![
                Provenance::Original,
                Provenance::Abstain,
                Provenance::Extended,
                Provenance::Abstain
            ]
        );
    }
}
