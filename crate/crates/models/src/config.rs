//! Model identities and their build-time configuration.

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    DenseNet2d,
    DenseNet3d,
    CnnBaseline,
    Cnn3d,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::DenseNet2d => "densenet2d",
            ModelKind::DenseNet3d => "densenet3d",
            ModelKind::CnnBaseline => "cnn-baseline",
            ModelKind::Cnn3d => "cnn3d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "densenet2d" => Ok(ModelKind::DenseNet2d),
            "densenet3d" => Ok(ModelKind::DenseNet3d),
            "cnn-baseline" => Ok(ModelKind::CnnBaseline),
            "cnn3d" => Ok(ModelKind::Cnn3d),
            other => Err(ModelError::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Width/depth knobs of the densely connected models. The bottleneck width
/// is 4k and the stem emits 2k channels.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetConfig {
    pub growth_rate: usize,
    pub compression: f64,
    pub num_blocks: usize,
    pub layers_per_block: usize,
    pub num_classes: usize,
    pub grid_h: usize,
    pub grid_w: usize,
}

impl Default for DenseNetConfig {
    fn default() -> Self {
        DenseNetConfig {
            growth_rate: 16,
            compression: 0.5,
            num_blocks: 4,
            layers_per_block: 4,
            num_classes: 2,
            grid_h: 10,
            grid_w: 11,
        }
    }
}

impl DenseNetConfig {
    pub fn with_growth_rate(k: usize) -> Self {
        DenseNetConfig {
            growth_rate: k,
            ..Default::default()
        }
    }

    pub fn bottleneck_width(&self) -> usize {
        4 * self.growth_rate
    }

    pub fn stem_channels(&self) -> usize {
        2 * self.growth_rate
    }

    pub fn validate(&self) -> Result<()> {
        if self.growth_rate == 0
            || self.num_blocks == 0
            || self.layers_per_block == 0
            || self.num_classes < 2
        {
            return Err(ModelError::Config(format!("degenerate config {self:?}")));
        }
        if !(self.compression > 0.0 && self.compression <= 1.0) {
            return Err(ModelError::Config(format!(
                "compression must be in (0, 1], got {}",
                self.compression
            )));
        }
        Ok(())
    }
}

/// Everything needed to rebuild a graph with the same structure.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    DenseNet2d { dn: DenseNetConfig },
    DenseNet3d { dn: DenseNetConfig, t_len: usize },
    CnnBaseline { t_len: usize },
    Cnn3d { t_len: usize },
}

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::DenseNet2d { .. } => ModelKind::DenseNet2d,
            ModelConfig::DenseNet3d { .. } => ModelKind::DenseNet3d,
            ModelConfig::CnnBaseline { .. } => ModelKind::CnnBaseline,
            ModelConfig::Cnn3d { .. } => ModelKind::Cnn3d,
        }
    }

    pub fn densenet(&self) -> Option<&DenseNetConfig> {
        match self {
            ModelConfig::DenseNet2d { dn } => Some(dn),
            ModelConfig::DenseNet3d { dn, .. } => Some(dn),
            _ => None,
        }
    }

    pub fn t_len(&self) -> Option<usize> {
        match self {
            ModelConfig::DenseNet3d { t_len, .. }
            | ModelConfig::CnnBaseline { t_len }
            | ModelConfig::Cnn3d { t_len } => Some(*t_len),
            ModelConfig::DenseNet2d { .. } => None,
        }
    }

    /// Key-value text block stored in checkpoint headers.
    pub fn to_text(&self) -> String {
        let mut out = format!("kind={}\n", self.kind());
        if let Some(dn) = self.densenet() {
            out.push_str(&format!(
                "growth_rate={}\ncompression={}\nnum_blocks={}\nlayers_per_block={}\nnum_classes={}\ngrid_h={}\ngrid_w={}\n",
                dn.growth_rate, dn.compression, dn.num_blocks, dn.layers_per_block,
                dn.num_classes, dn.grid_h, dn.grid_w
            ));
        }
        if let Some(t) = self.t_len() {
            out.push_str(&format!("t_len={t}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut kv = std::collections::HashMap::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                kv.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |k: &str| -> Result<&String> {
            kv.get(k)
                .ok_or_else(|| ModelError::Config(format!("missing config key {k}")))
        };
        let parse_usize = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| ModelError::Config(format!("bad value for {k}")))
        };
        let kind = ModelKind::parse(get("kind")?)?;
        let dn = || -> Result<DenseNetConfig> {
            Ok(DenseNetConfig {
                growth_rate: parse_usize("growth_rate")?,
                compression: get("compression")?
                    .parse()
                    .map_err(|_| ModelError::Config("bad compression".into()))?,
                num_blocks: parse_usize("num_blocks")?,
                layers_per_block: parse_usize("layers_per_block")?,
                num_classes: parse_usize("num_classes")?,
                grid_h: parse_usize("grid_h")?,
                grid_w: parse_usize("grid_w")?,
            })
        };
        Ok(match kind {
            ModelKind::DenseNet2d => ModelConfig::DenseNet2d { dn: dn()? },
            ModelKind::DenseNet3d => ModelConfig::DenseNet3d {
                dn: dn()?,
                t_len: parse_usize("t_len")?,
            },
            ModelKind::CnnBaseline => ModelConfig::CnnBaseline {
                t_len: parse_usize("t_len")?,
            },
            ModelKind::Cnn3d => ModelConfig::Cnn3d {
                t_len: parse_usize("t_len")?,
            },
        })
    }
}
