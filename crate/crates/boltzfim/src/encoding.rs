//! Model parameterizations over spin and bit alphabets, and the affine map
//! between them.
//!
//! An Ising model on `d` spins s_i ∈ {-1,+1} has energy
//! E(s) = Σ_i h_i s_i + Σ_{i<j} J_ij s_i s_j; a QUBO model on bits
//! x_i ∈ {0,1} has energy E(x) = Σ_{i≤j} Q_ij x_i x_j with Q stored upper
//! triangular (diagonal entries are the linear coefficients). The change of
//! variables s = 2x - 1 maps one family onto the other up to a constant:
//! converting parameters A into parameters B returns that constant c with
//!
//! ```text
//! E_A(v) = E_B(map(v)) + c   for every configuration v.
//! ```
//!
//! Both encodings share the flat coefficient layout of [`crate::index`]:
//! `d` linear coefficients, then `d(d-1)/2` pair coefficients in
//! lexicographic order.
//!
//! # Parameter file format
//!
//! Plain text, whitespace separated, one item per line:
//!
//! ```text
//! encoding ising          (or: encoding qubo)
//! d 3
//! h 0 5.0000000000000000e-1      (ising linear terms:  h i value)
//! J 0 1 -2.5000000000000000e-1   (ising pair terms:    J i j value, i < j)
//! Q 0 0 1.0000000000000000e0     (qubo terms:          Q i j value, i <= j)
//! ```
//!
//! Writers emit every coefficient at 17 significant digits so files
//! round-trip losslessly; readers treat omitted coefficients as zero and
//! reject duplicates, out-of-range indices and coefficients that do not
//! belong to the declared encoding.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::index::{flat_pair_index, pair_from_rank, param_len};

/// Variable alphabet: spins take values in {-1,+1}, bits in {0,1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Convention {
    Spin,
    Bit,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Spin => "spin",
            Convention::Bit => "bit",
        })
    }
}

/// Model family: Ising works on spins, QUBO on bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Ising,
    Qubo,
}

impl Encoding {
    pub fn convention(self) -> Convention {
        match self {
            Encoding::Ising => Convention::Spin,
            Encoding::Qubo => Convention::Bit,
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Ising => "ising",
            Encoding::Qubo => "qubo",
        })
    }
}

impl std::str::FromStr for Encoding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ising" => Ok(Encoding::Ising),
            "qubo" => Ok(Encoding::Qubo),
            other => Err(Error::InvalidArgument(format!(
                "unknown encoding '{other}' (expected 'ising' or 'qubo')"
            ))),
        }
    }
}

/// One configuration of `d` variables in a declared alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryConfig {
    values: Vec<i8>,
    convention: Convention,
}

impl BinaryConfig {
    pub fn new(values: Vec<i8>, convention: Convention) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "a configuration needs at least one variable".into(),
            ));
        }
        let ok = match convention {
            Convention::Spin => values.iter().all(|&v| v == -1 || v == 1),
            Convention::Bit => values.iter().all(|&v| v == 0 || v == 1),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "configuration values do not match the {convention} alphabet"
            )));
        }
        Ok(Self { values, convention })
    }

    /// Configuration from its canonical integer: bit i of `mask` is variable i
    /// in the bit alphabet (spin -1 maps to bit 0).
    pub fn from_mask(mask: u64, d: usize, convention: Convention) -> Self {
        let values = (0..d)
            .map(|i| {
                let bit = ((mask >> i) & 1) as i8;
                match convention {
                    Convention::Bit => bit,
                    Convention::Spin => 2 * bit - 1,
                }
            })
            .collect();
        Self { values, convention }
    }

    /// Canonical configuration integer (bit convention bits, spin +1 ↦ 1).
    pub fn mask(&self) -> u64 {
        self.values
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &v)| if v > 0 { m | (1 << i) } else { m })
    }

    pub fn d(&self) -> usize {
        self.values.len()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn get(&self, i: usize) -> i8 {
        self.values[i]
    }
}

/// Map a configuration to the other alphabet via s = 2x - 1. Involutive.
pub fn convert_config(config: &BinaryConfig) -> BinaryConfig {
    let (values, convention) = match config.convention {
        Convention::Spin => (
            config.values.iter().map(|&s| (s + 1) / 2).collect(),
            Convention::Bit,
        ),
        Convention::Bit => (
            config.values.iter().map(|&x| 2 * x - 1).collect(),
            Convention::Spin,
        ),
    };
    BinaryConfig { values, convention }
}

/// Coefficients of a fully connected pairwise model in one encoding, stored
/// in the canonical flat layout.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    encoding: Encoding,
    d: usize,
    theta: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(encoding: Encoding, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        Ok(Self {
            encoding,
            d,
            theta: vec![0.0; param_len(d)],
        })
    }

    pub fn new(encoding: Encoding, d: usize, theta: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        if theta.len() != param_len(d) {
            return Err(Error::DimensionMismatch {
                context: "parameter vector",
                expected: param_len(d),
                actual: theta.len(),
            });
        }
        if !theta.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("parameter vector"));
        }
        Ok(Self { encoding, d, theta })
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Replacement parameter vector in the same encoding (validated).
    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        Self::new(self.encoding, self.d, theta)
    }

    /// Linear coefficient of variable i (h_i for Ising, Q_ii for QUBO).
    pub fn linear(&self, i: usize) -> f64 {
        self.theta[i]
    }

    /// Pair coefficient of {i, j}, i ≠ j (J_ij for Ising, Q_ij for QUBO).
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.theta[flat_pair_index(self.d, i, j)]
    }

    pub fn set_linear(&mut self, i: usize, v: f64) {
        self.theta[i] = v;
    }

    pub fn set_pair(&mut self, i: usize, j: usize, v: f64) {
        self.theta[flat_pair_index(self.d, i, j)] = v;
    }

    /// Energy of the configuration given by its canonical integer.
    pub fn energy_of_mask(&self, mask: u64) -> f64 {
        let d = self.d;
        let mut e = 0.0;
        match self.encoding {
            Encoding::Ising => {
                for i in 0..d {
                    let si = if (mask >> i) & 1 == 1 { 1.0 } else { -1.0 };
                    e += self.theta[i] * si;
                }
                let mut flat = d;
                for i in 0..d {
                    let si = if (mask >> i) & 1 == 1 { 1.0 } else { -1.0 };
                    for j in (i + 1)..d {
                        let sj = if (mask >> j) & 1 == 1 { 1.0 } else { -1.0 };
                        e += self.theta[flat] * si * sj;
                        flat += 1;
                    }
                }
            }
            Encoding::Qubo => {
                let mut flat = d;
                for i in 0..d {
                    let xi = (mask >> i) & 1 == 1;
                    if xi {
                        e += self.theta[i];
                    }
                    for j in (i + 1)..d {
                        if xi && (mask >> j) & 1 == 1 {
                            e += self.theta[flat];
                        }
                        flat += 1;
                    }
                }
            }
        }
        e
    }

    /// Serialize in the parameter file format.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "encoding {}", self.encoding)?;
        writeln!(w, "d {}", self.d)?;
        let (lin, pair) = match self.encoding {
            Encoding::Ising => ("h", "J"),
            Encoding::Qubo => ("Q", "Q"),
        };
        for i in 0..self.d {
            match self.encoding {
                Encoding::Ising => writeln!(w, "{lin} {i} {:.16e}", self.theta[i])?,
                Encoding::Qubo => writeln!(w, "{lin} {i} {i} {:.16e}", self.theta[i])?,
            }
        }
        for r in 0..self.d * (self.d - 1) / 2 {
            let (i, j) = pair_from_rank(self.d, r);
            writeln!(w, "{pair} {i} {j} {:.16e}", self.theta[self.d + r])?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("parameter text is ASCII")
    }

    /// Parse the parameter file format.
    pub fn read_text<R: BufRead>(r: R, name: &str) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            file: name.to_string(),
            line,
            msg,
        };
        let mut encoding: Option<Encoding> = None;
        let mut d: Option<usize> = None;
        let mut theta: Vec<f64> = Vec::new();
        let mut seen: Vec<bool> = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() || tokens[0].starts_with('#') {
                continue;
            }
            match tokens[0] {
                "encoding" => {
                    if tokens.len() != 2 {
                        return Err(parse_err(lineno, "expected: encoding <ising|qubo>".into()));
                    }
                    encoding = Some(tokens[1].parse().map_err(|e| parse_err(lineno, format!("{e}")))?);
                }
                "d" => {
                    if tokens.len() != 2 {
                        return Err(parse_err(lineno, "expected: d <positive integer>".into()));
                    }
                    let val: usize = tokens[1]
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad dimension '{}'", tokens[1])))?;
                    if val == 0 {
                        return Err(parse_err(lineno, "d must be at least 1".into()));
                    }
                    theta = vec![0.0; param_len(val)];
                    seen = vec![false; param_len(val)];
                    d = Some(val);
                }
                kind @ ("h" | "J" | "Q") => {
                    let enc = encoding
                        .ok_or_else(|| parse_err(lineno, "encoding line must come first".into()))?;
                    let dim =
                        d.ok_or_else(|| parse_err(lineno, "d line must precede coefficients".into()))?;
                    let expected_kinds: &[&str] = match enc {
                        Encoding::Ising => &["h", "J"],
                        Encoding::Qubo => &["Q"],
                    };
                    if !expected_kinds.contains(&kind) {
                        return Err(parse_err(
                            lineno,
                            format!("coefficient '{kind}' does not belong to encoding {enc}"),
                        ));
                    }
                    let want = if kind == "h" { 3 } else { 4 };
                    if tokens.len() != want {
                        return Err(parse_err(lineno, format!("expected {want} fields", want = want)));
                    }
                    let i: usize = tokens[1]
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad index '{}'", tokens[1])))?;
                    let (j, value_tok) = if kind == "h" {
                        (i, tokens[2])
                    } else {
                        let j: usize = tokens[2]
                            .parse()
                            .map_err(|_| parse_err(lineno, format!("bad index '{}'", tokens[2])))?;
                        (j, tokens[3])
                    };
                    if i >= dim || j >= dim {
                        return Err(parse_err(lineno, format!("index out of range for d = {dim}")));
                    }
                    if kind == "J" && i == j {
                        return Err(parse_err(lineno, "J requires two distinct indices".into()));
                    }
                    let value: f64 = value_tok
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad value '{value_tok}'")))?;
                    if !value.is_finite() {
                        return Err(parse_err(lineno, "coefficient must be finite".into()));
                    }
                    let flat = if i == j {
                        i
                    } else {
                        flat_pair_index(dim, i, j)
                    };
                    if seen[flat] {
                        return Err(parse_err(lineno, "duplicate coefficient".into()));
                    }
                    seen[flat] = true;
                    theta[flat] = value;
                }
                other => {
                    return Err(parse_err(lineno, format!("unknown line kind '{other}'")));
                }
            }
        }
        let encoding = encoding.ok_or_else(|| parse_err(0, "missing encoding line".into()))?;
        let d = d.ok_or_else(|| parse_err(0, "missing d line".into()))?;
        ModelParams::new(encoding, d, theta)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::harness::atomic_write(path, self.to_text().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_text(
            std::io::BufReader::new(file),
            &path.display().to_string(),
        )
    }
}

/// Constant split off by a parameter conversion: E_source(v) = E_target(map(v)) + c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineConstant {
    pub c: f64,
}

fn check_encoding(params: &ModelParams, expected: Encoding) -> Result<()> {
    if params.encoding != expected {
        return Err(Error::EncodingMismatch {
            expected,
            actual: params.encoding,
        });
    }
    Ok(())
}

fn check_config(config: &BinaryConfig, params: &ModelParams) -> Result<()> {
    if config.d() != params.d {
        return Err(Error::DimensionMismatch {
            context: "configuration vs parameters",
            expected: params.d,
            actual: config.d(),
        });
    }
    let expected = params.encoding.convention();
    if config.convention != expected {
        return Err(Error::ConventionMismatch {
            expected,
            actual: config.convention,
        });
    }
    Ok(())
}

/// Ising energy E(s) = Σ_i h_i s_i + Σ_{i<j} J_ij s_i s_j.
pub fn ising_energy(config: &BinaryConfig, params: &ModelParams) -> Result<f64> {
    check_encoding(params, Encoding::Ising)?;
    check_config(config, params)?;
    Ok(params.energy_of_mask(config.mask()))
}

/// QUBO energy E(x) = Σ_{i≤j} Q_ij x_i x_j.
pub fn qubo_energy(config: &BinaryConfig, params: &ModelParams) -> Result<f64> {
    check_encoding(params, Encoding::Qubo)?;
    check_config(config, params)?;
    Ok(params.energy_of_mask(config.mask()))
}

/// Energy in whichever encoding the parameters declare.
pub fn energy(config: &BinaryConfig, params: &ModelParams) -> Result<f64> {
    check_config(config, params)?;
    Ok(params.energy_of_mask(config.mask()))
}

/// Rewrite a QUBO model as an Ising model.
///
/// Substituting x = (s+1)/2 into the QUBO energy gives, per configuration,
/// E_QUBO(x) = E_Ising(s(x)) + c with
///
/// ```text
/// h_i  = Q_ii/2 + (1/4) Σ_{j≠i} Q_{min(i,j),max(i,j)}
/// J_ij = Q_ij/4                       (i < j)
/// c    = (1/2) Σ_i Q_ii + (1/4) Σ_{i<j} Q_ij
/// ```
pub fn qubo_to_ising(params: &ModelParams) -> Result<(ModelParams, AffineConstant)> {
    check_encoding(params, Encoding::Qubo)?;
    let d = params.d;
    let mut out = ModelParams::zeros(Encoding::Ising, d)?;
    let mut c = 0.0;
    for i in 0..d {
        let qii = params.linear(i);
        let mut h = qii / 2.0;
        for j in 0..d {
            if j != i {
                h += params.pair(i, j) / 4.0;
            }
        }
        out.set_linear(i, h);
        c += qii / 2.0;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let qij = params.pair(i, j);
            out.set_pair(i, j, qij / 4.0);
            c += qij / 4.0;
        }
    }
    Ok((out, AffineConstant { c }))
}

/// Rewrite an Ising model as a QUBO model. Inverse of [`qubo_to_ising`].
///
/// Substituting s = 2x - 1 gives E_Ising(s) = E_QUBO(x(s)) + c with
///
/// ```text
/// Q_ii = 2 h_i - 2 Σ_{j≠i} J_{min(i,j),max(i,j)}
/// Q_ij = 4 J_ij                       (i < j)
/// c    = Σ_{i<j} J_ij - Σ_i h_i
/// ```
pub fn ising_to_qubo(params: &ModelParams) -> Result<(ModelParams, AffineConstant)> {
    check_encoding(params, Encoding::Ising)?;
    let d = params.d;
    let mut out = ModelParams::zeros(Encoding::Qubo, d)?;
    let mut c = 0.0;
    for i in 0..d {
        let hi = params.linear(i);
        let mut q = 2.0 * hi;
        for j in 0..d {
            if j != i {
                q -= 2.0 * params.pair(i, j);
            }
        }
        out.set_linear(i, q);
        c -= hi;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let jij = params.pair(i, j);
            out.set_pair(i, j, 4.0 * jij);
            c += jij;
        }
    }
    Ok((out, AffineConstant { c }))
}
