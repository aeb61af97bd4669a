//! Binary checkpoints for models and EWC anchors.
//!
//! Layout (version 1), all integers and floats little-endian:
//!
//! | offset | size      | field                                        |
//! |--------|-----------|----------------------------------------------|
//! | 0      | 8         | magic `KGCLCKPT`                             |
//! | 8      | 4         | format version (`u32`, currently 1)          |
//! | 12     | 1         | kind: 0 = model, 1 = EWC anchor              |
//! | 13     | 1         | normalize_entities flag (0/1)                |
//! | 14     | 2         | reserved, zero                               |
//! | 16     | 8         | dim (`u64`)                                  |
//! | 24     | 8         | entity count (`u64`)                         |
//! | 32     | 8         | relation count (`u64`)                       |
//! | 40     | 8         | init seed (`u64`)                            |
//! | 48     | 8         | margin (`f64`)                               |
//! | 56     | 8         | task index (`u64`, anchors only, else 0)     |
//! | 64     | 8·nE·d    | entity table, row-major `f64`                |
//! |        | 8·nR·d    | relation table, row-major `f64`              |
//! |        | 8·nE·d    | anchors only: Fisher entity table            |
//! |        | 8·nR·d    | anchors only: Fisher relation table          |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::continual::{EwcAnchor, FisherDiagonal};
use crate::error::{Error, Result};
use crate::transe::{ModelConfig, Table, TransEModel};

pub const MAGIC: &[u8; 8] = b"KGCLCKPT";
pub const FORMAT_VERSION: u32 = 1;

const KIND_MODEL: u8 = 0;
const KIND_ANCHOR: u8 = 1;

struct Header {
    kind: u8,
    config: ModelConfig,
    num_entities: usize,
    num_relations: usize,
    seed: u64,
    task_index: u64,
}

fn io(e: std::io::Error) -> Error {
    Error::io("<checkpoint>", e)
}

fn write_header(w: &mut impl Write, model: &TransEModel, kind: u8, task_index: u64) -> Result<()> {
    let cfg = model.config();
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&[kind, u8::from(cfg.normalize_entities), 0, 0])
        .map_err(io)?;
    for v in [
        cfg.dim as u64,
        model.num_entities() as u64,
        model.num_relations() as u64,
        model.seed(),
    ] {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.write_all(&cfg.margin.to_le_bytes()).map_err(io)?;
    w.write_all(&task_index.to_le_bytes()).map_err(io)?;
    Ok(())
}

fn read_header(r: &mut impl Read) -> Result<Header> {
    let mut buf = [0u8; 64];
    r.read_exact(&mut buf).map_err(io)?;
    if &buf[0..8] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let u64_at = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    let config = ModelConfig {
        dim: u64_at(16) as usize,
        margin: f64::from_le_bytes(buf[48..56].try_into().unwrap()),
        normalize_entities: buf[13] != 0,
    };
    Ok(Header {
        kind: buf[12],
        config,
        num_entities: u64_at(24) as usize,
        num_relations: u64_at(32) as usize,
        seed: u64_at(40),
        task_index: u64_at(56),
    })
}

fn write_floats(w: &mut impl Write, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    Ok(())
}

fn read_floats(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 8];
    r.read_exact(&mut bytes).map_err(io)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_tables(r: &mut impl Read, h: &Header) -> Result<(Vec<f64>, Vec<f64>)> {
    let e = read_floats(r, h.num_entities * h.config.dim)?;
    let rel = read_floats(r, h.num_relations * h.config.dim)?;
    Ok((e, rel))
}

pub fn write_model(model: &TransEModel, mut w: impl Write) -> Result<()> {
    write_header(&mut w, model, KIND_MODEL, 0)?;
    write_floats(&mut w, model.table(Table::Entity))?;
    write_floats(&mut w, model.table(Table::Relation))?;
    w.flush().map_err(io)
}

pub fn read_model(mut r: impl Read) -> Result<TransEModel> {
    let h = read_header(&mut r)?;
    if h.kind != KIND_MODEL {
        return Err(Error::Checkpoint("not a model checkpoint".into()));
    }
    let (e, rel) = read_tables(&mut r, &h)?;
    TransEModel::from_tables(h.config, h.seed, e, rel)
}

pub fn write_anchor(anchor: &EwcAnchor, mut w: impl Write) -> Result<()> {
    let model = anchor.theta_star();
    write_header(&mut w, model, KIND_ANCHOR, anchor.task_index() as u64)?;
    write_floats(&mut w, model.table(Table::Entity))?;
    write_floats(&mut w, model.table(Table::Relation))?;
    write_floats(&mut w, anchor.fisher().table(Table::Entity))?;
    write_floats(&mut w, anchor.fisher().table(Table::Relation))?;
    w.flush().map_err(io)
}

pub fn read_anchor(mut r: impl Read) -> Result<EwcAnchor> {
    let h = read_header(&mut r)?;
    if h.kind != KIND_ANCHOR {
        return Err(Error::Checkpoint("not an anchor checkpoint".into()));
    }
    let (e, rel) = read_tables(&mut r, &h)?;
    let (fe, frel) = read_tables(&mut r, &h)?;
    let model = TransEModel::from_tables(h.config, h.seed, e, rel)?;
    let fisher = FisherDiagonal::from_tables(h.config.dim, fe, frel)?;
    EwcAnchor::new(h.task_index as usize, model, fisher)
}

pub fn save_model(model: &TransEModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(model, BufWriter::new(f))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TransEModel> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(f))
}

pub fn save_anchor(anchor: &EwcAnchor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_anchor(anchor, BufWriter::new(f))
}

pub fn load_anchor(path: impl AsRef<Path>) -> Result<EwcAnchor> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_anchor(BufReader::new(f))
}
