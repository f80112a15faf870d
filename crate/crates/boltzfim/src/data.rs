//! Dataset generation and persistence: Bars-and-Stripes grids and synthetic
//! data sampled exactly from random-coupling spin models.
//!
//! Both generators are deterministic in their seed. Synthetic couplings are
//! drawn through an explicit inverse-CDF Gaussian (algorithm AS 241) rather
//! than a library-provided sampler, so regenerating a dataset from its spec
//! reproduces it bit-for-bit regardless of RNG-library internals.
//!
//! Dataset file format (text):
//!
//! ```text
//! <kind> <d> <count> <seed>      header; kind is "bas" or "ising"
//! 0110                            one configuration per line, variable 0
//! ...                             leftmost, repeated once per occurrence,
//! ```                             in ascending configuration-integer order
//!
//! A sidecar `<stem>.meta.json` records the generating parameters and the
//! SHA-256 digest of the data file; synthetic datasets also get a
//! `<stem>.params` file with the ground-truth model.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::{Encoding, ModelParams};
use crate::error::{Error, Result};
use crate::gibbs::{enumerate_distribution, sample_exact, EmpiricalDistribution, ENUMERATION_LIMIT};
use crate::index::param_len;
use crate::util::stream_seed;

/// Version tag written into dataset metadata files.
pub const DATASET_SCHEMA_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Inverse normal CDF (algorithm AS 241, PPND16)
// ---------------------------------------------------------------------------

/// Quantile function of the standard normal distribution, accurate to about
/// 1e-15 relative over (0, 1). Errors outside the open interval.
pub fn inv_norm_cdf(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "normal quantile needs 0 < p < 1, got {p}"
        )));
    }
    const A: [f64; 8] = [
        3.387_132_872_796_366_608e0,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 7] = [
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34e0,
        4.630_337_846_156_545_295_9e0,
        5.769_497_221_460_691_405_5e0,
        3.647_848_324_763_204_605_04e0,
        1.270_458_252_452_368_382_58e0,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 7] = [
        2.053_191_626_637_758_821_87e0,
        1.676_384_830_183_803_849_4e0,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2e0,
        5.463_784_911_164_114_369_9e0,
        1.784_826_539_917_291_335_8e0,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 7] = [
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-6,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    // rational approximation with a monic denominator
    fn ratio(num: &[f64; 8], den: &[f64; 7], r: f64) -> f64 {
        let mut n = num[7];
        for k in (0..7).rev() {
            n = n * r + num[k];
        }
        let mut d = den[6];
        for k in (0..6).rev() {
            d = d * r + den[k];
        }
        n / (d * r + 1.0)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return Ok(q * ratio(&A, &B, r));
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        ratio(&C, &D, r - 1.6)
    } else {
        ratio(&E, &F, r - 5.0)
    };
    Ok(if q < 0.0 { -x } else { x })
}

/// Map raw RNG output to the open interval (0, 1): 53 uniform bits centered
/// in their bucket, so 0 and 1 are never produced.
pub(crate) fn uniform_open(bits: u64) -> f64 {
    // 52 explicit bits: the +0.5 offset then stays strictly inside (0,1)
    // even at the extremes, where a 53-bit mantissa would round to 1.0
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

// ---------------------------------------------------------------------------
// Bars and Stripes
// ---------------------------------------------------------------------------

/// All n×n grids whose rows are each uniform, or whose columns are each
/// uniform, as configuration integers over d = n² bit variables flattened
/// row-major. Sorted ascending; there are 2^(n+1) − 2 of them.
pub fn bas_patterns(n: usize) -> Vec<u64> {
    assert!(n >= 1 && n * n <= 64, "grid side out of range: {n}");
    let mut set = BTreeSet::new();
    for bits in 0..(1u64 << n) {
        let mut rows = 0u64;
        let mut cols = 0u64;
        for k in 0..n {
            if (bits >> k) & 1 == 1 {
                rows |= ((1u64 << n) - 1) << (k * n);
                for r in 0..n {
                    cols |= 1 << (r * n + k);
                }
            }
        }
        set.insert(rows);
        set.insert(cols);
    }
    set.into_iter().collect()
}

/// Whether a configuration integer is a bar or stripe pattern on an n×n grid.
pub fn is_bas_pattern(n: usize, mask: u64) -> bool {
    assert!(n >= 1 && n * n <= 64, "grid side out of range: {n}");
    let rows_uniform = (0..n).all(|r| {
        let first = (mask >> (r * n)) & 1;
        (1..n).all(|c| (mask >> (r * n + c)) & 1 == first)
    });
    let cols_uniform = (0..n).all(|c| {
        let first = (mask >> c) & 1;
        (1..n).all(|r| (mask >> (r * n + c)) & 1 == first)
    });
    rows_uniform || cols_uniform
}

/// Bars-and-Stripes dataset: `total` draws uniformly with replacement from
/// the n×n pattern set, as a bit-convention empirical distribution over
/// d = n² variables.
pub fn gen_bas(n: usize, total: usize, seed: u64) -> Result<EmpiricalDistribution> {
    if n < 1 {
        return Err(Error::InvalidArgument("grid side must be at least 1".into()));
    }
    let d = n * n;
    if d > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            d,
            limit: ENUMERATION_LIMIT,
        });
    }
    let patterns = bas_patterns(n);
    if total < patterns.len() {
        return Err(Error::InvalidArgument(format!(
            "total {} is below the pattern count {}",
            total,
            patterns.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks = (0..total).map(|_| patterns[rng.gen_range(0..patterns.len())]);
    EmpiricalDistribution::from_masks(d, masks)
}

// ---------------------------------------------------------------------------
// Synthetic spin-model data
// ---------------------------------------------------------------------------

/// Pair couplings J_ij ~ Normal(0, jc²/d) in flat pair-rank order.
pub(crate) fn draw_couplings(d: usize, jc: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if !(jc.is_finite() && jc > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "coupling scale must be positive and finite, got {jc}"
        )));
    }
    let sigma = jc / (d as f64).sqrt();
    (0..d * (d - 1) / 2)
        .map(|_| Ok(sigma * inv_norm_cdf(uniform_open(rng.next_u64()))?))
        .collect()
}

/// Synthetic dataset: draw a zero-field spin model with pair couplings
/// J_ij ~ Normal(0, jc²/d), then take `count` exact Gibbs samples at β = 1.
/// Returns the dataset and the ground-truth model.
pub fn gen_ising_synthetic(
    d: usize,
    jc: f64,
    count: usize,
    seed: u64,
) -> Result<(EmpiricalDistribution, ModelParams)> {
    if d < 2 {
        return Err(Error::InvalidArgument(
            "synthetic datasets need d >= 2 for pair couplings".into(),
        ));
    }
    if d > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            d,
            limit: ENUMERATION_LIMIT,
        });
    }
    if count < 1 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let couplings = draw_couplings(d, jc, &mut rng)?;
    let mut theta = vec![0.0; param_len(d)];
    theta[d..].copy_from_slice(&couplings);
    let params = ModelParams::new(Encoding::Ising, d, theta)?;
    let dist = enumerate_distribution(&params, 1.0)?;
    let samples = sample_exact(&dist, count, stream_seed(seed, 0))?;
    Ok((EmpiricalDistribution::from_sample_set(&samples)?, params))
}

// ---------------------------------------------------------------------------
// Dataset specs and files
// ---------------------------------------------------------------------------

/// What kind of dataset to generate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetKind {
    /// Bars and Stripes on an n×n grid (d = n²).
    Bas { n: usize },
    /// Exact samples from a random-coupling zero-field spin model.
    #[serde(rename = "ising")]
    IsingSynth { d: usize, jc: f64 },
}

/// A dataset is fully determined by its spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub kind: DatasetKind,
    pub count: usize,
    pub seed: u64,
}

impl DatasetKind {
    pub fn d(&self) -> usize {
        match *self {
            DatasetKind::Bas { n } => n * n,
            DatasetKind::IsingSynth { d, .. } => d,
        }
    }

    fn token(&self) -> &'static str {
        match self {
            DatasetKind::Bas { .. } => "bas",
            DatasetKind::IsingSynth { .. } => "ising",
        }
    }
}

impl DatasetSpec {
    pub fn d(&self) -> usize {
        self.kind.d()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d();
        if d > ENUMERATION_LIMIT {
            return Err(Error::EnumerationGuard {
                d,
                limit: ENUMERATION_LIMIT,
            });
        }
        if self.count < 1 {
            return Err(Error::InvalidArgument("count must be at least 1".into()));
        }
        match self.kind {
            DatasetKind::Bas { n } if n < 1 => {
                Err(Error::InvalidArgument("grid side must be at least 1".into()))
            }
            DatasetKind::IsingSynth { jc, .. } if !(jc.is_finite() && jc > 0.0) => Err(
                Error::InvalidArgument(format!("jc must be positive and finite, got {jc}")),
            ),
            DatasetKind::IsingSynth { d, .. } if d < 2 => Err(Error::InvalidArgument(
                "synthetic datasets need d >= 2".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Filesystem-safe stem naming the dataset.
    pub fn slug(&self) -> String {
        match self.kind {
            DatasetKind::Bas { n } => format!("bas{}_c{}_s{}", n, self.count, self.seed),
            DatasetKind::IsingSynth { d, jc } => {
                format!("synth_d{}_jc{}_c{}_s{}", d, jc, self.count, self.seed)
            }
        }
    }

    /// Generate the dataset this spec describes.
    pub fn generate(&self) -> Result<Dataset> {
        self.validate()?;
        let (dist, true_params) = match self.kind {
            DatasetKind::Bas { n } => (gen_bas(n, self.count, self.seed)?, None),
            DatasetKind::IsingSynth { d, jc } => {
                let (dist, params) = gen_ising_synthetic(d, jc, self.count, self.seed)?;
                (dist, Some(params))
            }
        };
        Ok(Dataset {
            spec: *self,
            dist,
            true_params,
        })
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.slug())
    }
}

/// Sidecar metadata for a dataset file.
#[derive(Debug, Serialize, Deserialize)]
struct DatasetMeta {
    schema_version: u32,
    #[serde(flatten)]
    spec: DatasetSpec,
    digest: String,
    /// The synthetic generator draws pair couplings only; linear terms are
    /// exactly zero in the ground-truth model.
    #[serde(skip_serializing_if = "Option::is_none")]
    h_is_zero: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params_file: Option<String>,
}

/// Paths produced by [`Dataset::write`].
#[derive(Debug, Clone)]
pub struct DatasetFiles {
    pub data: PathBuf,
    pub meta: PathBuf,
    pub params: Option<PathBuf>,
}

/// A realized dataset: spec, empirical distribution, and (for synthetic
/// data) the ground-truth model.
#[derive(Debug, Clone)]
pub struct Dataset {
    spec: DatasetSpec,
    dist: EmpiricalDistribution,
    true_params: Option<ModelParams>,
}

impl Dataset {
    pub fn spec(&self) -> &DatasetSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.dist.d()
    }

    pub fn distribution(&self) -> &EmpiricalDistribution {
        &self.dist
    }

    pub fn true_params(&self) -> Option<&ModelParams> {
        self.true_params.as_ref()
    }

    /// Canonical file text: header, then one 0/1 line per sample (variable 0
    /// leftmost), ascending configuration order, repeats adjacent.
    pub fn to_text(&self) -> String {
        let d = self.d();
        let mut out = format!(
            "{} {} {} {}\n",
            self.spec.kind.token(),
            d,
            self.spec.count,
            self.spec.seed
        );
        let mut line = String::with_capacity(d + 1);
        for (&mask, &count) in self.dist.counts() {
            line.clear();
            for i in 0..d {
                line.push(if (mask >> i) & 1 == 1 { '1' } else { '0' });
            }
            line.push('\n');
            for _ in 0..count {
                out.push_str(&line);
            }
        }
        out
    }

    /// SHA-256 hex digest of the canonical file bytes.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_text().as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Write `<slug>.txt`, `<slug>.meta.json`, and (synthetic) `<slug>.params`
    /// under `dir`. Returns the paths.
    pub fn write(&self, dir: &Path) -> Result<DatasetFiles> {
        // extensions are appended, not substituted: the slug itself may
        // contain dots (e.g. jc0.5)
        let slug = self.spec.slug();
        let data = dir.join(format!("{slug}.txt"));
        let meta_path = dir.join(format!("{slug}.meta.json"));
        let params_path = self
            .true_params
            .as_ref()
            .map(|_| dir.join(format!("{slug}.params")));
        crate::harness::atomic_write(&data, self.to_text().as_bytes())?;
        if let (Some(params), Some(path)) = (&self.true_params, &params_path) {
            params.save(path)?;
        }
        let meta = DatasetMeta {
            schema_version: DATASET_SCHEMA_VERSION,
            spec: self.spec,
            digest: self.digest(),
            h_is_zero: self.true_params.as_ref().map(|_| true),
            params_file: params_path
                .as_ref()
                .and_then(|p| p.file_name())
                .map(|f| f.to_string_lossy().into_owned()),
        };
        let meta_text = serde_json::to_string_pretty(&meta)
            .map_err(|e| Error::InvalidArgument(format!("metadata serialization: {e}")))?;
        crate::harness::atomic_write(&meta_path, meta_text.as_bytes())?;
        Ok(DatasetFiles {
            data,
            meta: meta_path,
            params: params_path,
        })
    }

    /// Read a dataset file (and its metadata sidecar when present). Without
    /// metadata, a synthetic dataset's jc is recorded as NaN — the samples
    /// and dimension are all training needs.
    pub fn read(path: &Path) -> Result<Self> {
        let file = path.display().to_string();
        let text = std::fs::read_to_string(path)?;
        let parse = |line: usize, msg: String| Error::Parse {
            file: file.clone(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse(1, "empty dataset file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse(
                1,
                format!("header needs `kind d count seed`, got {} fields", fields.len()),
            ));
        }
        let d: usize = fields[1]
            .parse()
            .map_err(|e| parse(1, format!("bad d: {e}")))?;
        let count: usize = fields[2]
            .parse()
            .map_err(|e| parse(1, format!("bad count: {e}")))?;
        let seed: u64 = fields[3]
            .parse()
            .map_err(|e| parse(1, format!("bad seed: {e}")))?;
        let kind = match fields[0] {
            "bas" => {
                let n = (1..=8)
                    .find(|n| n * n == d)
                    .ok_or_else(|| parse(1, format!("bas dimension {d} is not a square")))?;
                DatasetKind::Bas { n }
            }
            "ising" => DatasetKind::IsingSynth { d, jc: f64::NAN },
            other => return Err(parse(1, format!("unknown dataset kind `{other}`"))),
        };
        let mut masks = Vec::with_capacity(count);
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.len() != d {
                return Err(parse(
                    idx + 1,
                    format!("expected {d} characters, got {}", line.len()),
                ));
            }
            let mut mask = 0u64;
            for (i, ch) in line.chars().enumerate() {
                match ch {
                    '1' => mask |= 1 << i,
                    '0' => {}
                    other => return Err(parse(idx + 1, format!("expected 0 or 1, got `{other}`"))),
                }
            }
            masks.push(mask);
        }
        if masks.len() != count {
            return Err(parse(
                1,
                format!("header count {} but {} sample lines", count, masks.len()),
            ));
        }
        let dist = EmpiricalDistribution::from_masks(d, masks)?;
        let mut spec = DatasetSpec { kind, count, seed };
        let mut true_params = None;
        // swap a trailing .txt for .meta.json; otherwise append, so stems
        // containing dots (e.g. jc0.5) survive intact
        let path_str = path.as_os_str().to_string_lossy();
        let meta_path = PathBuf::from(match path_str.strip_suffix(".txt") {
            Some(stem) => format!("{stem}.meta.json"),
            None => format!("{path_str}.meta.json"),
        });
        if meta_path.exists() {
            let meta_text = std::fs::read_to_string(&meta_path)?;
            let meta: DatasetMeta = serde_json::from_str(&meta_text).map_err(|e| Error::Parse {
                file: meta_path.display().to_string(),
                line: 0,
                msg: e.to_string(),
            })?;
            if meta.schema_version != DATASET_SCHEMA_VERSION {
                return Err(Error::SchemaVersion {
                    found: meta.schema_version,
                    supported: DATASET_SCHEMA_VERSION,
                });
            }
            spec = meta.spec;
            if let Some(name) = &meta.params_file {
                let params_path = path.with_file_name(name);
                if params_path.exists() {
                    true_params = Some(ModelParams::load(&params_path)?);
                }
            }
            let loaded = Dataset {
                spec,
                dist: dist.clone(),
                true_params: true_params.clone(),
            };
            if loaded.digest() != meta.digest {
                return Err(Error::Parse {
                    file: file.clone(),
                    line: 0,
                    msg: "data file does not match the digest in its metadata".into(),
                });
            }
        }
        Ok(Dataset {
            spec,
            dist,
            true_params,
        })
    }

    /// Build a dataset around an existing distribution (used by tests and
    /// the harness when data arrives without provenance).
    pub fn from_distribution(spec: DatasetSpec, dist: EmpiricalDistribution) -> Result<Self> {
        if spec.d() != dist.d() {
            return Err(Error::DimensionMismatch {
                context: "dataset spec vs distribution",
                expected: spec.d(),
                actual: dist.d(),
            });
        }
        Ok(Dataset {
            spec,
            dist,
            true_params: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    /// Upper tail mass ∫_x^∞ φ by composite Simpson on [x, x+45].
    fn upper_tail(x: f64) -> f64 {
        let steps = 90_000usize;
        let h = 45.0 / steps as f64;
        let mut acc = phi(x) + phi(x + 45.0);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * phi(x + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn quantiles_match_reference_values() {
        let cases = [
            (0.975, 1.959963984540054),
            (0.995, 2.5758293035489004),
            (0.9, 1.2815515655446004),
            (0.75, 0.6744897501960817),
            (0.001, -3.090232306167813),
        ];
        for (p, want) in cases {
            let got = inv_norm_cdf(p).unwrap();
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "p={p}: got {got}, want {want}"
            );
        }
        assert_eq!(inv_norm_cdf(0.5).unwrap(), 0.0);
        for p in [0.3, 0.9] {
            let lo = inv_norm_cdf(1.0 - p).unwrap();
            let hi = inv_norm_cdf(p).unwrap();
            assert!((lo + hi).abs() <= 1e-15);
        }
    }

    #[test]
    fn quantiles_invert_the_normal_cdf_in_all_branches() {
        // covers central, intermediate, and far-tail branches
        for p in [1e-12, 1e-7, 1e-3, 0.2, 0.5, 0.77, 1.0 - 1e-9] {
            let x = inv_norm_cdf(p).unwrap();
            let tail = upper_tail(x);
            assert!(
                ((1.0 - tail) - p).abs() <= 5e-11,
                "p={p}: x={x}, cdf={}",
                1.0 - tail
            );
        }
    }

    #[test]
    fn quantile_is_continuous_across_branch_joins() {
        // |q| = 0.425 join
        let a = inv_norm_cdf(0.925 - 1e-9).unwrap();
        let b = inv_norm_cdf(0.925 + 1e-9).unwrap();
        assert!((a - b).abs() <= 1e-7);
        // sqrt(-ln p) = 5 join at p = e^-25
        let p = (-25.0f64).exp();
        let a = inv_norm_cdf(p * (1.0 - 1e-9)).unwrap();
        let b = inv_norm_cdf(p * (1.0 + 1e-9)).unwrap();
        assert!((a - b).abs() <= 1e-7);
    }

    #[test]
    fn quantile_is_strictly_increasing() {
        let grid: Vec<f64> = (1..200)
            .map(|k| k as f64 / 200.0)
            .chain([1e-14, 1e-10, 1e-6, 1.0 - 1e-6, 1.0 - 1e-10])
            .collect();
        let mut sorted = grid.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let values: Vec<f64> = sorted.iter().map(|&p| inv_norm_cdf(p).unwrap()).collect();
        for w in values.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn quantile_rejects_closed_endpoints() {
        for p in [0.0, 1.0, -0.1, 1.1, f64::NAN] {
            assert!(inv_norm_cdf(p).is_err(), "p={p}");
        }
    }

    #[test]
    fn uniform_open_stays_inside_unit_interval() {
        for bits in [0u64, 1, u64::MAX, u64::MAX - 1, 1 << 63] {
            let u = uniform_open(bits);
            assert!(u > 0.0 && u < 1.0, "bits={bits}: {u}");
        }
        assert!((uniform_open(u64::MAX) - 1.0).abs() < 3e-16);
        assert!(uniform_open(0) < 2e-16);
    }

    #[test]
    fn bas_pattern_counts_and_membership() {
        for (n, want) in [(1usize, 2usize), (2, 6), (3, 14), (4, 30)] {
            let patterns = bas_patterns(n);
            assert_eq!(patterns.len(), want, "n={n}");
            for w in patterns.windows(2) {
                assert!(w[0] < w[1]);
            }
            for &p in &patterns {
                assert!(is_bas_pattern(n, p));
            }
        }
        // n=2: horizontal bar 0b0011 (row 0 set) is a pattern, a single bit is not
        assert!(is_bas_pattern(2, 0b0011));
        assert!(is_bas_pattern(2, 0b0101)); // vertical stripe
        assert!(!is_bas_pattern(2, 0b0001));
        assert!(!is_bas_pattern(3, 0b000_011_000));
    }

    #[test]
    fn bas_dataset_draws_patterns_uniformly_with_replacement() {
        let data = gen_bas(2, 450, 7).unwrap();
        assert_eq!(data.d(), 4);
        assert_eq!(data.total(), 450);
        let patterns = bas_patterns(2);
        assert_eq!(data.support_size(), 6);
        for (&mask, &count) in data.counts() {
            assert!(patterns.contains(&mask));
            assert!(count > 0);
        }
        // determinism
        let again = gen_bas(2, 450, 7).unwrap();
        assert_eq!(data.counts(), again.counts());
        let other = gen_bas(2, 450, 8).unwrap();
        assert_ne!(data.counts(), other.counts());
    }

    #[test]
    fn bas_3x3_at_study_scale() {
        let data = gen_bas(3, 1_120, 0).unwrap();
        assert_eq!(data.d(), 9);
        assert_eq!(data.total(), 1_120);
        assert!(data.support_size() <= 14);
        for &mask in data.counts().keys() {
            assert!(is_bas_pattern(3, mask));
        }
    }

    #[test]
    fn bas_guards() {
        assert!(matches!(
            gen_bas(2, 5, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            gen_bas(5, 1_000, 0),
            Err(Error::EnumerationGuard { d: 25, .. })
        ));
        assert!(gen_bas(0, 10, 0).is_err());
    }

    #[test]
    fn synthetic_model_has_zero_fields_and_seeded_samples() {
        let (data, params) = gen_ising_synthetic(6, 1.0, 500, 3).unwrap();
        assert_eq!(data.d(), 6);
        assert_eq!(data.total(), 500);
        assert_eq!(params.encoding(), Encoding::Ising);
        for i in 0..6 {
            assert_eq!(params.linear(i), 0.0);
        }
        let mut nonzero = 0;
        for i in 0..6 {
            for j in (i + 1)..6 {
                if params.pair(i, j) != 0.0 {
                    nonzero += 1;
                }
            }
        }
        assert_eq!(nonzero, 15);
        let (again, params_again) = gen_ising_synthetic(6, 1.0, 500, 3).unwrap();
        assert_eq!(data.counts(), again.counts());
        assert_eq!(params.theta(), params_again.theta());
    }

    #[test]
    fn near_zero_couplings_give_near_uniform_data() {
        let (data, _) = gen_ising_synthetic(6, 1e-8, 2_000, 11).unwrap();
        let m = data.moments(Encoding::Ising, 1).unwrap();
        // spin means: σ ≈ 1/√2000, 5σ band
        let band = 5.0 / (2_000f64).sqrt();
        for i in 0..6 {
            let v = m.moment(&[i]).unwrap();
            assert!(v.abs() <= band, "site {i}: {v}");
        }
    }

    #[test]
    fn coupling_variance_matches_the_target() {
        let d = 10;
        let jc = 1.0;
        let target = jc * jc / d as f64;
        let mut draws = Vec::with_capacity(10_035);
        let mut seed = 0u64;
        while draws.len() < 10_000 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            draws.extend(draw_couplings(d, jc, &mut rng).unwrap());
            seed += 1;
        }
        let n = draws.len() as f64;
        let mean: f64 = draws.iter().sum::<f64>() / n;
        let var: f64 = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        // sampling std of the variance estimate: σ² √(2/n)
        let band = 4.0 * target * (2.0 / n).sqrt();
        assert!(
            (var - target).abs() <= band,
            "var {var} vs target {target} (band {band})"
        );
    }

    #[test]
    fn synthetic_guards() {
        assert!(gen_ising_synthetic(1, 1.0, 10, 0).is_err());
        assert!(matches!(
            gen_ising_synthetic(25, 1.0, 10, 0),
            Err(Error::EnumerationGuard { .. })
        ));
        assert!(gen_ising_synthetic(4, 0.0, 10, 0).is_err());
        assert!(gen_ising_synthetic(4, f64::NAN, 10, 0).is_err());
        assert!(gen_ising_synthetic(4, 1.0, 0, 0).is_err());
    }

    #[test]
    fn spec_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let spec = DatasetSpec {
            kind: DatasetKind::IsingSynth { d: 5, jc: 0.5 },
            count: 200,
            seed: 9,
        };
        let dataset = spec.generate().unwrap();
        let files = dataset.write(dir.path()).unwrap();
        assert!(files.params.is_some());
        let loaded = Dataset::read(&files.data).unwrap();
        assert_eq!(loaded.spec(), dataset.spec());
        assert_eq!(loaded.distribution().counts(), dataset.distribution().counts());
        assert_eq!(loaded.digest(), dataset.digest());
        let true_params = loaded.true_params().unwrap();
        assert_eq!(true_params.theta(), dataset.true_params().unwrap().theta());

        // regenerating from the spec reproduces the digest exactly
        assert_eq!(spec.generate().unwrap().digest(), dataset.digest());
    }

    #[test]
    fn bas_round_trip_without_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let spec = DatasetSpec {
            kind: DatasetKind::Bas { n: 2 },
            count: 450,
            seed: 7,
        };
        let dataset = spec.generate().unwrap();
        let files = dataset.write(dir.path()).unwrap();
        std::fs::remove_file(&files.meta).unwrap();
        let loaded = Dataset::read(&files.data).unwrap();
        assert_eq!(loaded.spec(), dataset.spec());
        assert_eq!(loaded.distribution().counts(), dataset.distribution().counts());
    }

    #[test]
    fn file_text_is_canonical() {
        let spec = DatasetSpec {
            kind: DatasetKind::Bas { n: 2 },
            count: 6,
            seed: 1,
        };
        // force one draw per pattern by building directly
        let dist = EmpiricalDistribution::from_masks(4, bas_patterns(2)).unwrap();
        let dataset = Dataset::from_distribution(spec, dist).unwrap();
        let text = dataset.to_text();
        // lines are in ascending mask order; within a line, variable 0 is
        // the leftmost character, so mask 3 (variables 0 and 1 set) is 1100
        let want = "bas 4 6 1\n0000\n1100\n1010\n0101\n0011\n1111\n";
        assert_eq!(text, want);
    }

    #[test]
    fn malformed_dataset_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, text: &str| {
            let p = dir.path().join(name);
            std::fs::write(&p, text).unwrap();
            p
        };
        let cases = [
            ("empty.txt", ""),
            ("kind.txt", "foo 4 1 0\n0000\n"),
            ("fields.txt", "bas 4 1\n0000\n"),
            ("square.txt", "bas 5 1 0\n00000\n"),
            ("width.txt", "bas 4 1 0\n000\n"),
            ("chars.txt", "bas 4 1 0\n00x0\n"),
            ("count.txt", "bas 4 2 0\n0000\n"),
        ];
        for (name, text) in cases {
            let p = write(name, text);
            assert!(Dataset::read(&p).is_err(), "{name}");
        }
    }

    #[test]
    fn corrupted_data_fails_the_digest_check() {
        let dir = tempfile::tempdir().unwrap();
        let spec = DatasetSpec {
            kind: DatasetKind::Bas { n: 2 },
            count: 20,
            seed: 3,
        };
        let files = spec.generate().unwrap().write(dir.path()).unwrap();
        let mut text = std::fs::read_to_string(&files.data).unwrap();
        text = text.replacen("\n0000\n", "\n1111\n", 1);
        std::fs::write(&files.data, text).unwrap();
        let err = Dataset::read(&files.data);
        match err {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("digest")),
            other => panic!("expected digest mismatch, got {other:?}"),
        }
    }

    #[test]
    fn slugs_are_distinct_and_stable() {
        let a = DatasetSpec {
            kind: DatasetKind::Bas { n: 2 },
            count: 450,
            seed: 7,
        };
        let b = DatasetSpec {
            kind: DatasetKind::IsingSynth { d: 10, jc: 0.5 },
            count: 2_000,
            seed: 7,
        };
        assert_eq!(a.slug(), "bas2_c450_s7");
        assert_eq!(b.slug(), "synth_d10_jc0.5_c2000_s7");
    }
}
