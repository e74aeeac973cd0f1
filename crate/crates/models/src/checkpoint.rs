//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!   magic `ASADCKPT` | u32 version | str model_id | str config | u64 seed |
//!   str metadata | u32 n_records | records... | u8 has_optimizer |
//!   [f64 lr, beta1, beta2, eps | u64 step | u32 n_pairs | (m, v) records...]
//!
//! `str` is u32 length + UTF-8 bytes. A record is: str name | u8 precision
//! bits (32 or 64) | u32 rank | u64 extents... | raw IEEE-754 values.
//! Records cover every parameter plus batch-norm running statistics.

use std::io::{Read, Write};
use std::path::Path;

use asad_nn::{Scalar, Tensor};

use crate::config::ModelConfig;
use crate::error::{ModelError, Result};
use crate::graph::ModelGraph;

pub const MAGIC: &[u8; 8] = b"ASADCKPT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum RecordData {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl RecordData {
    pub fn len(&self) -> usize {
        match self {
            RecordData::F32(v) => v.len(),
            RecordData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn precision_bits(&self) -> u8 {
        match self {
            RecordData::F32(_) => 32,
            RecordData::F64(_) => 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: RecordData,
}

impl Record {
    pub fn from_tensor<T: Scalar>(name: impl Into<String>, t: &Tensor<T>) -> Self {
        let data = match T::PRECISION {
            asad_nn::Precision::F32 => {
                RecordData::F32(t.data().iter().map(|v| v.as_f64() as f32).collect())
            }
            asad_nn::Precision::F64 => RecordData::F64(t.data().iter().map(|v| v.as_f64()).collect()),
        };
        Record {
            name: name.into(),
            shape: t.shape().to_vec(),
            data,
        }
    }

    /// Into a tensor of precision T. Widening f32 -> f64 is exact and
    /// allowed; narrowing is rejected.
    pub fn to_tensor<T: Scalar>(&self) -> Result<Tensor<T>> {
        let vals: Vec<T> = match (&self.data, T::PRECISION) {
            (RecordData::F32(v), _) => v.iter().map(|&x| T::of_f64(x as f64)).collect(),
            (RecordData::F64(v), asad_nn::Precision::F64) => {
                v.iter().map(|&x| T::of_f64(x)).collect()
            }
            (RecordData::F64(_), asad_nn::Precision::F32) => {
                return Err(ModelError::Record {
                    name: self.name.clone(),
                    detail: "64-bit record cannot be loaded into a 32-bit graph".into(),
                })
            }
        };
        Tensor::from_vec(&self.shape, vals).map_err(|e| ModelError::Record {
            name: self.name.clone(),
            detail: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    /// First/second moment per parameter, parameter order.
    pub moments: Vec<(Record, Record)>,
}

/// Saved model: config, seed, metadata, parameter and running-stat records.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub seed: u64,
    /// Ordered key/value training metadata (no timestamps; re-runs must be
    /// byte-identical).
    pub metadata: Vec<(String, String)>,
    pub records: Vec<Record>,
    pub optimizer: Option<OptimizerState>,
}

impl Checkpoint {
    /// Snapshot a graph: parameters in declaration order, then batch-norm
    /// running statistics.
    pub fn from_graph<T: Scalar>(
        graph: &ModelGraph<T>,
        metadata: Vec<(String, String)>,
    ) -> Self {
        let mut records = Vec::with_capacity(graph.params.len() + 2 * graph.bns.len());
        for p in &graph.params {
            records.push(Record::from_tensor(p.name.clone(), &p.value));
        }
        for (bn, name) in graph.bns.iter().zip(graph.bn_names.iter()) {
            records.push(Record::from_tensor(
                format!("{name}.running_mean"),
                &bn.running_mean,
            ));
            records.push(Record::from_tensor(
                format!("{name}.running_var"),
                &bn.running_var,
            ));
        }
        Checkpoint {
            config: graph.config.clone(),
            seed: graph.seed,
            metadata,
            records,
            optimizer: None,
        }
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Load every record into a freshly built graph of the same config.
    pub fn load_into<T: Scalar>(&self, graph: &mut ModelGraph<T>) -> Result<()> {
        let mut used = vec![false; self.records.len()];
        let mut lookup = |name: &str| -> Result<usize> {
            match self.records.iter().position(|r| r.name == name) {
                Some(i) => {
                    used[i] = true;
                    Ok(i)
                }
                None => Err(ModelError::InventoryMismatch {
                    name: name.to_string(),
                    detail: "present in graph, missing from checkpoint".into(),
                }),
            }
        };

        let mut param_values = Vec::with_capacity(graph.params.len());
        for p in &graph.params {
            let idx = lookup(&p.name)?;
            let rec = &self.records[idx];
            if rec.shape != p.value.shape() {
                return Err(ModelError::Record {
                    name: p.name.clone(),
                    detail: format!(
                        "shape {:?} in checkpoint, {:?} in graph",
                        rec.shape,
                        p.value.shape()
                    ),
                });
            }
            param_values.push(rec.to_tensor::<T>()?);
        }
        let mut bn_values = Vec::with_capacity(graph.bns.len());
        for name in &graph.bn_names {
            let mean = self.records[lookup(&format!("{name}.running_mean"))?].to_tensor::<T>()?;
            let var = self.records[lookup(&format!("{name}.running_var"))?].to_tensor::<T>()?;
            bn_values.push((mean, var));
        }
        if let Some(first_unused) = used.iter().position(|u| !u) {
            return Err(ModelError::InventoryMismatch {
                name: self.records[first_unused].name.clone(),
                detail: "present in checkpoint, missing from graph".into(),
            });
        }

        for (p, v) in graph.params.iter_mut().zip(param_values) {
            p.value = v;
            p.zero_grad();
        }
        for (bn, (mean, var)) in graph.bns.iter_mut().zip(bn_values) {
            bn.running_mean = mean;
            bn.running_var = var;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::read(&mut bytes.as_slice())
    }

    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        write_str(w, self.config.kind().as_str())?;
        write_str(w, &self.config.to_text())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let meta: String = self
            .metadata
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        write_str(w, &meta)?;
        w.write_all(&(self.records.len() as u32).to_le_bytes())?;
        for r in &self.records {
            write_record(w, r)?;
        }
        match &self.optimizer {
            None => w.write_all(&[0u8])?,
            Some(opt) => {
                w.write_all(&[1u8])?;
                for v in [opt.learning_rate, opt.beta1, opt.beta2, opt.epsilon] {
                    w.write_all(&v.to_le_bytes())?;
                }
                w.write_all(&opt.step.to_le_bytes())?;
                w.write_all(&(opt.moments.len() as u32).to_le_bytes())?;
                for (m, v) in &opt.moments {
                    write_record(w, m)?;
                    write_record(w, v)?;
                }
            }
        }
        Ok(())
    }

    pub fn read(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(ModelError::BadMagic(magic.to_vec()));
        }
        let version = read_u32(r)?;
        if version != FORMAT_VERSION {
            return Err(ModelError::BadVersion(version));
        }
        let model_id = read_str(r)?;
        let config_text = read_str(r)?;
        let config = ModelConfig::from_text(&config_text)?;
        if config.kind().as_str() != model_id {
            return Err(ModelError::Config(format!(
                "model id {model_id:?} disagrees with config kind {}",
                config.kind()
            )));
        }
        let seed = read_u64(r)?;
        let meta_text = read_str(r)?;
        let metadata = meta_text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let n_records = read_u32(r)? as usize;
        let mut records = Vec::with_capacity(n_records);
        for _ in 0..n_records {
            records.push(read_record(r)?);
        }
        let mut flag = [0u8; 1];
        read_exact(r, &mut flag)?;
        let optimizer = if flag[0] == 1 {
            let learning_rate = read_f64(r)?;
            let beta1 = read_f64(r)?;
            let beta2 = read_f64(r)?;
            let epsilon = read_f64(r)?;
            let step = read_u64(r)?;
            let n = read_u32(r)? as usize;
            let mut moments = Vec::with_capacity(n);
            for _ in 0..n {
                let m = read_record(r)?;
                let v = read_record(r)?;
                moments.push((m, v));
            }
            Some(OptimizerState {
                learning_rate,
                beta1,
                beta2,
                epsilon,
                step,
                moments,
            })
        } else {
            None
        };
        Ok(Checkpoint {
            config,
            seed,
            metadata,
            records,
            optimizer,
        })
    }
}

fn write_str(w: &mut impl Write, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn write_record(w: &mut impl Write, r: &Record) -> Result<()> {
    write_str(w, &r.name)?;
    w.write_all(&[r.data.precision_bits()])?;
    w.write_all(&(r.shape.len() as u32).to_le_bytes())?;
    for &e in &r.shape {
        w.write_all(&(e as u64).to_le_bytes())?;
    }
    match &r.data {
        RecordData::F32(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        RecordData::F64(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    let mut got = 0;
    while got < buf.len() {
        let n = r.read(&mut buf[got..])?;
        if n == 0 {
            return Err(ModelError::Truncated {
                expected: buf.len() - got,
                actual: got,
            });
        }
        got += n;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_str(r: &mut impl Read) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut b = vec![0u8; len];
    read_exact(r, &mut b)?;
    String::from_utf8(b).map_err(|e| ModelError::Config(format!("bad utf-8: {e}")))
}

fn read_record(r: &mut impl Read) -> Result<Record> {
    let name = read_str(r)?;
    let mut bits = [0u8; 1];
    read_exact(r, &mut bits)?;
    let rank = read_u32(r)? as usize;
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        shape.push(read_u64(r)? as usize);
    }
    let numel: usize = shape.iter().product();
    let data = match bits[0] {
        32 => {
            let mut v = Vec::with_capacity(numel);
            for _ in 0..numel {
                let mut b = [0u8; 4];
                read_exact(r, &mut b)?;
                v.push(f32::from_le_bytes(b));
            }
            RecordData::F32(v)
        }
        64 => {
            let mut v = Vec::with_capacity(numel);
            for _ in 0..numel {
                let mut b = [0u8; 8];
                read_exact(r, &mut b)?;
                v.push(f64::from_le_bytes(b));
            }
            RecordData::F64(v)
        }
        other => {
            return Err(ModelError::Record {
                name,
                detail: format!("unknown precision tag {other}"),
            })
        }
    };
    Ok(Record { name, shape, data })
}
