//! Plain-text `key = value` run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::{Weighting, DEFAULT_MIN_DOC_FREQ};
use crate::error::{Error, Result};
use crate::lsi::Metric;
use crate::relief::{PeakScaling, DEFAULT_ALTITUDE, DEFAULT_AZIMUTH, DEFAULT_MARGIN};
use crate::sidecar::content_lines;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Svg,
    Png,
    Both,
}

impl OutputFormat {
    pub fn svg(self) -> bool {
        matches!(self, OutputFormat::Svg | OutputFormat::Both)
    }

    pub fn png(self) -> bool {
        matches!(self, OutputFormat::Png | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svg" => Ok(OutputFormat::Svg),
            "png" => Ok(OutputFormat::Png),
            "both" => Ok(OutputFormat::Both),
            _ => Err(Error::Validation(format!("unknown format `{s}` (svg | png | both)"))),
        }
    }
}

/// Everything a `map` or `evolve` run needs.
///
/// Keys in the file (repeatable keys marked `*`):
///
/// ```text
/// snapshot*        source root, one per snapshot, in order
/// include*         glob relative to the root (default **/*)
/// exclude*         glob relative to the root
/// seed             required
/// weighting        tf-idf | raw
/// min_doc_freq     2
/// strip_comments   false
/// k                latent rank (default from corpus size)
/// metric           cosine | pearson
/// max_iterations   2000
/// stress_tolerance 1e-7
/// learning_rate    0.1
/// starts           4
/// grid             512x512
/// margin           0.1
/// sigma            pixels (default 4% of the shorter side)
/// peak             kloc | sqrt-kloc
/// relief           0.05  peak height as a fraction of the shorter side, for shading
/// azimuth          315
/// altitude         45
/// contour_interval default max/8 rounded
/// font_size        10
/// markers          false
/// overlay_edges    file of `from to [weight]` lines
/// overlay_glyphs   file of `glyph pattern` lines
/// out              output directory (default out)
/// format           svg | png | both
/// png_scale        2
/// ```
///
/// Relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub snapshots: Vec<PathBuf>,
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub seed: Option<u64>,
    pub weighting: Weighting,
    pub min_doc_freq: usize,
    pub strip_comments: bool,
    pub k: Option<usize>,
    pub metric: Metric,
    pub max_iterations: usize,
    pub stress_tolerance: f64,
    pub learning_rate: f64,
    pub starts: usize,
    pub grid: (usize, usize),
    pub margin: f64,
    pub sigma: Option<f64>,
    pub peak: PeakScaling,
    pub relief: f64,
    pub azimuth: f64,
    pub altitude: f64,
    pub contour_interval: Option<f64>,
    pub font_size: f64,
    pub markers: bool,
    pub overlay_edges: Option<PathBuf>,
    pub overlay_glyphs: Option<PathBuf>,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub png_scale: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            snapshots: Vec::new(),
            include: Vec::new(),
            exclude: Vec::new(),
            seed: None,
            weighting: Weighting::TfIdf,
            min_doc_freq: DEFAULT_MIN_DOC_FREQ,
            strip_comments: false,
            k: None,
            metric: Metric::Cosine,
            max_iterations: 2000,
            stress_tolerance: 1e-7,
            learning_rate: 0.1,
            starts: 4,
            grid: (512, 512),
            margin: DEFAULT_MARGIN,
            sigma: None,
            peak: PeakScaling::Kloc,
            relief: 0.05,
            azimuth: DEFAULT_AZIMUTH,
            altitude: DEFAULT_ALTITUDE,
            contour_interval: None,
            font_size: 10.0,
            markers: false,
            overlay_edges: None,
            overlay_glyphs: None,
            out: PathBuf::from("out"),
            format: OutputFormat::Both,
            png_scale: 2,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Validation(format!("`{key}` expects a number, got `{value}`")))
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let v: f64 = num(key, value)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Validation(format!("`{key}` must be positive")))
    }
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Validation(format!("`{key}` expects true or false, got `{value}`"))),
    }
}

/// Parses `WxH` (or a single number for a square grid).
pub fn parse_grid(value: &str) -> Result<(usize, usize)> {
    let (w, h) = value.split_once(['x', 'X']).unwrap_or((value, value));
    Ok((num("grid", w.trim())?, num("grid", h.trim())?))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        RunConfig::parse(&text, base, &path.display().to_string())
    }

    pub fn parse(text: &str, base: &Path, origin: &str) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        for (ln, line) in content_lines(text) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, ln, "expected `key = value`"))?;
            config.set(key.trim(), value.trim(), base).map_err(|e| match e {
                Error::Validation(m) => Error::parse(origin, ln, m),
                other => other,
            })?;
        }
        Ok(config)
    }

    /// Sets one key; file lines and command-line overrides go through here.
    /// Repeatable keys append.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = |v: &str| base.join(v);
        match key {
            "snapshot" => self.snapshots.push(path(value)),
            "include" => self.include.push(value.to_string()),
            "exclude" => self.exclude.push(value.to_string()),
            "seed" => self.seed = Some(num(key, value)?),
            "weighting" => self.weighting = value.parse()?,
            "min_doc_freq" => self.min_doc_freq = num(key, value)?,
            "strip_comments" => self.strip_comments = boolean(key, value)?,
            "k" => self.k = Some(num(key, value)?),
            "metric" => self.metric = value.parse()?,
            "max_iterations" => self.max_iterations = num(key, value)?,
            "stress_tolerance" => self.stress_tolerance = positive(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "starts" => self.starts = num(key, value)?,
            "grid" => self.grid = parse_grid(value)?,
            "margin" => self.margin = num(key, value)?,
            "sigma" => self.sigma = Some(positive(key, value)?),
            "peak" => {
                self.peak = match value {
                    "kloc" => PeakScaling::Kloc,
                    "sqrt-kloc" => PeakScaling::SqrtKloc,
                    _ => return Err(Error::Validation(format!("unknown peak scaling `{value}` (kloc | sqrt-kloc)"))),
                }
            }
            "relief" => self.relief = num(key, value)?,
            "azimuth" => self.azimuth = num(key, value)?,
            "altitude" => self.altitude = num(key, value)?,
            "contour_interval" => self.contour_interval = Some(positive(key, value)?),
            "font_size" => self.font_size = positive(key, value)?,
            "markers" => self.markers = boolean(key, value)?,
            "overlay_edges" => self.overlay_edges = Some(path(value)),
            "overlay_glyphs" => self.overlay_glyphs = Some(path(value)),
            "out" => self.out = path(value),
            "format" => self.format = value.parse()?,
            "png_scale" => self.png_scale = num(key, value)?,
            _ => return Err(Error::Validation(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.snapshots.is_empty() {
            return Err(Error::Validation("config names no snapshot".into()));
        }
        if self.seed.is_none() {
            return Err(Error::Validation("`seed` is required".into()));
        }
        if self.min_doc_freq < 1 {
            return Err(Error::Validation("`min_doc_freq` must be at least 1".into()));
        }
        if self.k == Some(0) {
            return Err(Error::Validation("`k` must be at least 1".into()));
        }
        if self.png_scale < 1 {
            return Err(Error::Validation("`png_scale` must be at least 1".into()));
        }
        if !(self.relief >= 0.0 && self.relief.is_finite()) {
            return Err(Error::Validation("`relief` must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or_default()
    }

    /// Include patterns, defaulting to everything when none were given.
    pub fn include_patterns(&self) -> Vec<String> {
        if self.include.is_empty() {
            vec!["**/*".to_string()]
        } else {
            self.include.clone()
        }
    }
}
