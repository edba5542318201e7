//! Dataset container and loaders: IRIS-style CSV, IDX image/label files,
//! and seeded synthetic generators for desk-scale runs.

use std::fs;
use std::path::Path;

use ndarray::Array1;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum Targets {
    /// Class label per sample.
    Classes(Vec<usize>),
    /// Target vector per sample (regression / reconstruction).
    Vectors(Vec<Array1<f64>>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes(c) => c.len(),
            Targets::Vectors(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub inputs: Vec<Array1<f64>>,
    pub targets: Targets,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.inputs.first().map(|v| v.len()).unwrap_or(0)
    }

    pub fn num_classes(&self) -> Option<usize> {
        match &self.targets {
            Targets::Classes(c) => c.iter().max().map(|m| m + 1),
            Targets::Vectors(_) => None,
        }
    }

    /// Replaces the targets with the inputs themselves (reconstruction task).
    pub fn into_autoencoder(mut self) -> Dataset {
        self.targets = Targets::Vectors(self.inputs.clone());
        self
    }

    fn check(self) -> Result<Dataset> {
        let n = self.inputs.len();
        if self.targets.len() != n {
            return Err(Error::invalid("dataset: inputs/targets length mismatch"));
        }
        let d = self.feature_dim();
        if self.inputs.iter().any(|v| v.len() != d) {
            return Err(Error::invalid("dataset: nonuniform feature dimension"));
        }
        let mut seen = vec![false; n];
        for &i in self.train_idx.iter().chain(self.test_idx.iter()) {
            if i >= n || seen[i] {
                return Err(Error::invalid("dataset: split not disjoint and covering"));
            }
            seen[i] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::invalid("dataset: split does not cover all rows"));
        }
        Ok(self)
    }
}

/// Stratified 80/20 split with a seeded shuffle within each class.
fn stratified_split(labels: &[usize], seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_classes = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..num_classes {
        let mut idx: Vec<usize> =
            (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let cut = (idx.len() * 4) / 5;
        train.extend_from_slice(&idx[..cut]);
        test.extend_from_slice(&idx[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Loads an IRIS-format CSV: four numeric feature columns and a species
/// label, comma-separated, optional header auto-detected. Classes are
/// numbered by sorted label name. The split is a seeded stratified 80/20.
pub fn load_iris(path: &Path, seed: u64) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let mut inputs = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                location: format!("{}:{}", path.display(), lineno + 1),
                message: format!("expected 5 comma-separated fields, got {}", fields.len()),
            });
        }
        // Header detection: first field not numeric on the first line.
        if lineno == 0 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        let mut feats = Array1::zeros(4);
        for (i, f) in fields[..4].iter().enumerate() {
            feats[i] = f.parse::<f64>().map_err(|_| Error::Parse {
                location: format!("{}:{}", path.display(), lineno + 1),
                message: format!("field {} is not a number: {f:?}", i + 1),
            })?;
        }
        inputs.push(feats);
        raw_labels.push(fields[4].to_string());
        if !label_names.contains(&fields[4].to_string()) {
            label_names.push(fields[4].to_string());
        }
    }
    if inputs.is_empty() {
        return Err(Error::Parse {
            location: path.display().to_string(),
            message: "no data rows".into(),
        });
    }
    label_names.sort();
    let labels: Vec<usize> = raw_labels
        .iter()
        .map(|l| label_names.iter().position(|n| n == l).unwrap())
        .collect();
    let (train_idx, test_idx) = stratified_split(&labels, seed);
    Dataset {
        name: "iris".into(),
        inputs,
        targets: Targets::Classes(labels),
        train_idx,
        test_idx,
    }
    .check()
}

fn read_be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::Parse {
            location: format!("{} @ byte {offset}", path.display()),
            message: "unexpected end of file".into(),
        });
    }
    Ok(u32::from_be_bytes([bytes[offset], bytes[offset + 1], bytes[offset + 2], bytes[offset + 3]]))
}

/// Loads an IDX image/label pair (big-endian magics 0x00000803 and
/// 0x00000801). Pixels are scaled to [0, 1]; `limit` caps the number of
/// rows. The split is a seeded stratified 80/20 over the loaded rows.
pub fn load_idx(
    images_path: &Path,
    labels_path: &Path,
    limit: Option<usize>,
    seed: u64,
) -> Result<Dataset> {
    let img_bytes = fs::read(images_path)?;
    let lbl_bytes = fs::read(labels_path)?;

    let magic = read_be_u32(&img_bytes, 0, images_path)?;
    if magic != 0x0000_0803 {
        return Err(Error::Parse {
            location: format!("{} @ byte 0", images_path.display()),
            message: format!("bad image magic 0x{magic:08x}, expected 0x00000803"),
        });
    }
    let count = read_be_u32(&img_bytes, 4, images_path)? as usize;
    let rows = read_be_u32(&img_bytes, 8, images_path)? as usize;
    let cols = read_be_u32(&img_bytes, 12, images_path)? as usize;
    let pixels = rows * cols;
    let needed = 16 + count * pixels;
    if img_bytes.len() < needed {
        return Err(Error::Parse {
            location: format!("{} @ byte {}", images_path.display(), img_bytes.len()),
            message: format!("file truncated: need {needed} bytes for {count} images"),
        });
    }

    let lmagic = read_be_u32(&lbl_bytes, 0, labels_path)?;
    if lmagic != 0x0000_0801 {
        return Err(Error::Parse {
            location: format!("{} @ byte 0", labels_path.display()),
            message: format!("bad label magic 0x{lmagic:08x}, expected 0x00000801"),
        });
    }
    let lcount = read_be_u32(&lbl_bytes, 4, labels_path)? as usize;
    if lcount != count {
        return Err(Error::Parse {
            location: format!("{} @ byte 4", labels_path.display()),
            message: format!("label count {lcount} != image count {count}"),
        });
    }
    if lbl_bytes.len() < 8 + count {
        return Err(Error::Parse {
            location: format!("{} @ byte {}", labels_path.display(), lbl_bytes.len()),
            message: "label file truncated".into(),
        });
    }

    let take = limit.map(|l| l.min(count)).unwrap_or(count);
    let mut inputs = Vec::with_capacity(take);
    let mut labels = Vec::with_capacity(take);
    for i in 0..take {
        let start = 16 + i * pixels;
        let img = Array1::from_iter(
            img_bytes[start..start + pixels].iter().map(|&b| b as f64 / 255.0),
        );
        inputs.push(img);
        labels.push(lbl_bytes[8 + i] as usize);
    }
    let (train_idx, test_idx) = stratified_split(&labels, seed);
    Dataset {
        name: format!("idx-{rows}x{cols}"),
        inputs,
        targets: Targets::Classes(labels),
        train_idx,
        test_idx,
    }
    .check()
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BlobSpec {
    pub samples_per_class: usize,
    pub dim: usize,
    pub classes: usize,
    /// Distance between adjacent class centers.
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        BlobSpec { samples_per_class: 100, dim: 2, classes: 2, separation: 4.0, noise: 0.5, seed: 0 }
    }
}

/// Gaussian blobs, one per class, centers spread along a random direction.
pub fn synth_blobs(spec: &BlobSpec) -> Result<Dataset> {
    if spec.samples_per_class == 0 || spec.dim == 0 || spec.classes == 0 {
        return Err(Error::invalid("synth_blobs: empty spec"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    let mut centers = Vec::new();
    for c in 0..spec.classes {
        let mut center = Array1::zeros(spec.dim);
        center[c % spec.dim] = spec.separation * (c / spec.dim + 1) as f64;
        centers.push(center);
    }
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..spec.samples_per_class {
            let sample = Array1::from_shape_fn(spec.dim, |j| {
                center[j] + spec.noise * gaussian(&mut rng)
            });
            inputs.push(sample);
            labels.push(c);
        }
    }
    let (train_idx, test_idx) = stratified_split(&labels, spec.seed.wrapping_add(1));
    Dataset {
        name: "blobs".into(),
        inputs,
        targets: Targets::Classes(labels),
        train_idx,
        test_idx,
    }
    .check()
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// 8×8 digit glyphs. Ten fixed stroke patterns, jittered per sample with
/// pixel noise and intensity scaling, give a deterministic desk-scale stand-in
/// for downsampled handwritten digits.
pub fn synth_digits(count: usize, seed: u64) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::invalid("synth_digits: count must be positive"));
    }
    const GLYPHS: [[&str; 8]; 10] = [
        ["..####..", ".#....#.", "#......#", "#......#", "#......#", "#......#", ".#....#.", "..####.."],
        ["...##...", "..###...", "...#...", "...#...", "...#...", "...#...", "...#...", "..####.."],
        [".#####..", "#.....#.", "......#.", ".....#..", "...##...", "..#.....", ".#......", "#######."],
        [".#####..", "......#.", "......#.", "..####..", "......#.", "......#.", "#.....#.", ".#####.."],
        ["...##...", "..#.#...", ".#..#...", "#...#...", "########", "....#...", "....#...", "....#..."],
        ["#######.", "#.......", "#.......", "######..", "......#.", "......#.", "#.....#.", ".#####.."],
        ["..####..", ".#......", "#.......", "######..", "#.....#.", "#.....#.", ".#....#.", "..####.."],
        ["#######.", "......#.", ".....#..", "....#...", "...#....", "..#.....", "..#.....", "..#....."],
        [".#####..", "#.....#.", "#.....#.", ".#####..", "#.....#.", "#.....#.", "#.....#.", ".#####.."],
        [".#####..", "#.....#.", "#.....#.", ".######.", "......#.", "......#.", ".....#..", "####...."],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let digit = i % 10;
        let glyph = &GLYPHS[digit];
        let dx: i32 = rng.gen_range(-1..=1);
        let dy: i32 = rng.gen_range(-1..=1);
        let intensity: f64 = rng.gen_range(0.7..1.0);
        let mut img = Array1::zeros(64);
        for r in 0..8usize {
            let row = glyph[r].as_bytes();
            for c in 0..8usize {
                let on = c < row.len() && row[c] == b'#';
                if !on {
                    continue;
                }
                let rr = r as i32 + dy;
                let cc = c as i32 + dx;
                if (0..8).contains(&rr) && (0..8).contains(&cc) {
                    img[(rr * 8 + cc) as usize] = intensity;
                }
            }
        }
        for v in img.iter_mut() {
            *v = (*v + 0.05 * gaussian(&mut rng)).clamp(0.0, 1.0);
        }
        inputs.push(img);
        labels.push(digit);
    }
    let (train_idx, test_idx) = stratified_split(&labels, seed.wrapping_add(1));
    Dataset {
        name: "synth-digits".into(),
        inputs,
        targets: Targets::Classes(labels),
        train_idx,
        test_idx,
    }
    .check()
}
