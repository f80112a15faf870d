//! Sufficient statistics, likelihood gradients, and Fisher information
//! matrices from moment tables.
//!
//! The sufficient statistics of a fully connected pairwise model are
//! φ(v) = (v_1, ..., v_d, v_1 v_2, ..., v_{d-1} v_d) in the model's alphabet,
//! in the canonical flat layout. The Fisher information matrix is their
//! covariance under the model,
//!
//! ```text
//! M[a,b] = E[φ_a φ_b] - E[φ_a] E[φ_b],
//! ```
//!
//! scaled by β² for β ≠ 1 so that M equals the Hessian of the exact negative
//! log-likelihood at every β. Entry products reduce symbolically to plain
//! moments: spins square to one (keep indices of odd multiplicity), bits are
//! idempotent (keep distinct indices), so order-4 moment tables suffice.
//!
//! The optimizer-facing gradient is g = β (E_data[φ] - E_model[φ]), which is
//! the gradient of the negative log-likelihood; optimizers step θ ← θ - η·g
//! (ascent on the likelihood).

use nalgebra::DMatrix;

use crate::encoding::{BinaryConfig, Convention, Encoding};
use crate::error::{Error, Result};
use crate::index::{pair_from_rank, param_len};
use crate::moments::{MomentSource, MomentTable};

/// Sufficient statistics φ(v) of one configuration, flat layout.
pub fn sufficient_stats(config: &BinaryConfig) -> Vec<f64> {
    let d = config.d();
    let mut phi = Vec::with_capacity(param_len(d));
    for i in 0..d {
        phi.push(config.get(i) as f64);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            phi.push((config.get(i) * config.get(j)) as f64);
        }
    }
    phi
}

/// Reduce a product of two statistic tuples to the sorted moment tuple it
/// equals in expectation: spins keep odd-multiplicity indices (s² = 1), bits
/// keep distinct indices (x² = x).
pub fn reduce_stat_product(convention: Convention, a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut merged: Vec<usize> = a.iter().chain(b).copied().collect();
    merged.sort_unstable();
    let mut out = Vec::with_capacity(merged.len());
    let mut idx = 0;
    while idx < merged.len() {
        let v = merged[idx];
        let mut mult = 1;
        while idx + mult < merged.len() && merged[idx + mult] == v {
            mult += 1;
        }
        let keep = match convention {
            Convention::Spin => mult % 2 == 1,
            Convention::Bit => true,
        };
        if keep {
            out.push(v);
        }
        idx += mult;
    }
    out
}

/// The statistic tuple behind flat index `flat`: [i] for linear entries,
/// [i, j] for pair entries.
fn stat_tuple(d: usize, flat: usize) -> Vec<usize> {
    if flat < d {
        vec![flat]
    } else {
        let (i, j) = pair_from_rank(d, flat - d);
        vec![i, j]
    }
}

fn check_tables(data: &MomentTable, model: &MomentTable) -> Result<()> {
    if data.d() != model.d() {
        return Err(Error::DimensionMismatch {
            context: "moment tables",
            expected: data.d(),
            actual: model.d(),
        });
    }
    if data.encoding() != model.encoding() {
        return Err(Error::EncodingMismatch {
            expected: data.encoding(),
            actual: model.encoding(),
        });
    }
    Ok(())
}

/// Optimizer-facing gradient g = β (E_data[φ] - E_model[φ]), the exact
/// negative log-likelihood gradient. Needs both tables complete to order 2.
pub fn likelihood_gradient(data: &MomentTable, model: &MomentTable, beta: f64) -> Result<Vec<f64>> {
    check_tables(data, model)?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    let d = data.d();
    let mut g = Vec::with_capacity(param_len(d));
    for (a, b) in data.order(1)?.iter().zip(model.order(1)?) {
        g.push(beta * (a - b));
    }
    if d > 1 {
        for (a, b) in data.order(2)?.iter().zip(model.order(2)?) {
            g.push(beta * (a - b));
        }
    }
    Ok(g)
}

/// Fisher information matrix in the canonical flat layout, tagged with the
/// moment source it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct FimMatrix {
    d: usize,
    encoding: Encoding,
    source: MomentSource,
    matrix: DMatrix<f64>,
}

/// Views of the linear/pair block split of a [`FimMatrix`].
#[derive(Debug, Clone)]
pub struct FimBlocks {
    /// d × d linear-linear block.
    pub f11: DMatrix<f64>,
    /// d × d(d-1)/2 linear-pair block.
    pub f12: DMatrix<f64>,
    /// Transpose of f12.
    pub f21: DMatrix<f64>,
    /// Pair-pair block.
    pub f22: DMatrix<f64>,
}

impl FimMatrix {
    /// Wrap an explicit matrix (used for synthetic positive semidefinite test
    /// matrices as much as for real FIMs). Checks shape, symmetry to 1e-12,
    /// finite entries, and diagonal ≥ -1e-9.
    pub fn from_matrix(
        d: usize,
        encoding: Encoding,
        source: MomentSource,
        matrix: DMatrix<f64>,
    ) -> Result<Self> {
        let p = param_len(d);
        if matrix.nrows() != p || matrix.ncols() != p {
            return Err(Error::DimensionMismatch {
                context: "FIM shape",
                expected: p,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        for i in 0..p {
            if !matrix[(i, i)].is_finite() || matrix[(i, i)] < -1e-9 {
                return Err(Error::NonFinite("FIM diagonal entry negative beyond tolerance"));
            }
            for j in (i + 1)..p {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::NonFinite("FIM entry"));
                }
                if (a - b).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "FIM asymmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self {
            d,
            encoding,
            source,
            matrix,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn source(&self) -> MomentSource {
        self.source
    }

    /// Side length d + d(d-1)/2.
    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Split into the linear/pair blocks.
    pub fn blocks(&self) -> FimBlocks {
        let d = self.d;
        let p = self.matrix.nrows();
        let npairs = p - d;
        let f11 = self.matrix.view((0, 0), (d, d)).into_owned();
        let f12 = self.matrix.view((0, d), (d, npairs)).into_owned();
        let f21 = self.matrix.view((d, 0), (npairs, d)).into_owned();
        let f22 = self.matrix.view((d, d), (npairs, npairs)).into_owned();
        FimBlocks { f11, f12, f21, f22 }
    }

    /// ‖F12‖_F / ‖F‖_F, the off-block mass fraction.
    pub fn offblock_ratio(&self) -> f64 {
        let blocks = self.blocks();
        blocks.f12.norm() / self.matrix.norm()
    }

    /// Dense CSV export: a one-line header naming (encoding, d, iteration),
    /// its values, then the matrix rows.
    pub fn write_csv<W: std::io::Write>(&self, iteration: usize, mut w: W) -> Result<()> {
        writeln!(w, "encoding,d,iteration")?;
        writeln!(w, "{},{},{}", self.encoding, self.d, iteration)?;
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|j| format!("{}", self.matrix[(i, j)]))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// FIM at β = 1: the covariance of the sufficient statistics under the model
/// distribution the moments were taken from.
pub fn fim_from_moments(m: &MomentTable) -> Result<FimMatrix> {
    fim_from_moments_beta(m, 1.0)
}

/// FIM at inverse temperature β: β² · Cov[φ], matching the exact NLL Hessian.
pub fn fim_from_moments_beta(m: &MomentTable, beta: f64) -> Result<FimMatrix> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    let d = m.d();
    let needed = 4.min(d);
    if m.max_order() < needed {
        return Err(Error::MomentOrder {
            needed,
            have: m.max_order(),
        });
    }
    let p = param_len(d);
    let convention = m.encoding().convention();
    let tuples: Vec<Vec<usize>> = (0..p).map(|flat| stat_tuple(d, flat)).collect();
    let means: Vec<f64> = tuples
        .iter()
        .map(|t| m.moment(t))
        .collect::<Result<_>>()?;
    let scale = beta * beta;
    let mut matrix = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let reduced = reduce_stat_product(convention, &tuples[a], &tuples[b]);
            let cov = m.moment(&reduced)? - means[a] * means[b];
            let v = scale * cov;
            matrix[(a, b)] = v;
            matrix[(b, a)] = v;
        }
    }
    FimMatrix::from_matrix(d, m.encoding(), m.source(), matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::ModelParams;
    use crate::gibbs::{enumerate_distribution, exact_moments};
    use crate::index::flat_pair_index;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sufficient_stats_hand_examples() {
        let s = BinaryConfig::new(vec![1, -1], Convention::Spin).unwrap();
        assert_eq!(sufficient_stats(&s), vec![1.0, -1.0, -1.0]);
        let x = BinaryConfig::new(vec![1, 0, 1], Convention::Bit).unwrap();
        assert_eq!(sufficient_stats(&x), vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn reduction_rules() {
        use Convention::*;
        assert_eq!(reduce_stat_product(Spin, &[2], &[2]), Vec::<usize>::new());
        assert_eq!(reduce_stat_product(Bit, &[2], &[2]), vec![2]);
        assert_eq!(reduce_stat_product(Spin, &[0, 1], &[1, 2]), vec![0, 2]);
        assert_eq!(reduce_stat_product(Bit, &[0, 1], &[1, 2]), vec![0, 1, 2]);
        assert_eq!(reduce_stat_product(Spin, &[0, 1], &[0, 1]), Vec::<usize>::new());
        assert_eq!(reduce_stat_product(Bit, &[0, 1], &[0, 1]), vec![0, 1]);
        assert_eq!(reduce_stat_product(Spin, &[0], &[1, 2]), vec![0, 1, 2]);
    }

    /// The reduction rule is exact: E[φ_a φ_b] computed through the reduced
    /// tuple must equal the direct expectation of the product, for every pair
    /// of statistics, under an arbitrary distribution.
    #[test]
    fn reduction_matches_direct_expectation_exhaustively() {
        let d = 3;
        for encoding in [Encoding::Ising, Encoding::Qubo] {
            let mut params = ModelParams::zeros(encoding, d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let theta: Vec<f64> = (0..params.theta().len())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            params = params.with_theta(theta).unwrap();
            let dist = enumerate_distribution(&params, 1.0).unwrap();
            let m = exact_moments(&dist, encoding, 4.min(d)).unwrap();
            let p = param_len(d);
            let conv = encoding.convention();
            for a in 0..p {
                for b in 0..p {
                    let ta = stat_tuple(d, a);
                    let tb = stat_tuple(d, b);
                    let via_reduction = m.moment(&reduce_stat_product(conv, &ta, &tb)).unwrap();
                    let mut direct = 0.0;
                    for mask in 0..(1u64 << d) {
                        let cfg = BinaryConfig::from_mask(mask, d, conv);
                        let phi = sufficient_stats(&cfg);
                        direct += dist.prob(mask) * phi[a] * phi[b];
                    }
                    assert!(
                        (via_reduction - direct).abs() <= 1e-12,
                        "{encoding} a={a} b={b}: {via_reduction} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_is_beta_scaled_moment_gap() {
        let d = 3;
        let data = crate::gibbs::EmpiricalDistribution::from_masks(d, [0b011u64, 0b011, 0b100])
            .unwrap()
            .moments(Encoding::Ising, 2)
            .unwrap();
        let uniform = enumerate_distribution(&ModelParams::zeros(Encoding::Ising, d).unwrap(), 1.0)
            .unwrap();
        let model = exact_moments(&uniform, Encoding::Ising, 2).unwrap();
        let g = likelihood_gradient(&data, &model, 2.0).unwrap();
        // uniform model has zero spin moments, so g = 2 * data moments
        let d1 = data.order(1).unwrap();
        let d2 = data.order(2).unwrap();
        for i in 0..d {
            assert!((g[i] - 2.0 * d1[i]).abs() < 1e-15);
        }
        for r in 0..d2.len() {
            assert!((g[d + r] - 2.0 * d2[r]).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_rejects_mismatched_tables() {
        let u2 = enumerate_distribution(&ModelParams::zeros(Encoding::Ising, 2).unwrap(), 1.0)
            .unwrap();
        let u3 = enumerate_distribution(&ModelParams::zeros(Encoding::Ising, 3).unwrap(), 1.0)
            .unwrap();
        let a = exact_moments(&u2, Encoding::Ising, 2).unwrap();
        let b = exact_moments(&u3, Encoding::Ising, 2).unwrap();
        let c = exact_moments(&u2, Encoding::Qubo, 2).unwrap();
        assert!(likelihood_gradient(&a, &b, 1.0).is_err());
        assert!(likelihood_gradient(&a, &c, 1.0).is_err());
        assert!(likelihood_gradient(&a, &a, 0.0).is_err());
    }

    /// Direct-covariance oracle: Σ_v P(v) φ(v)φ(v)ᵀ - μμᵀ, built without the
    /// moment-table path.
    fn covariance_oracle(params: &ModelParams, beta: f64) -> DMatrix<f64> {
        let d = params.d();
        let p = param_len(d);
        let dist = enumerate_distribution(params, beta).unwrap();
        let conv = params.encoding().convention();
        let mut second = DMatrix::zeros(p, p);
        let mut mean = nalgebra::DVector::zeros(p);
        for mask in 0..(1u64 << d) {
            let phi =
                nalgebra::DVector::from_vec(sufficient_stats(&BinaryConfig::from_mask(mask, d, conv)));
            let w = dist.prob(mask);
            second += w * &phi * phi.transpose();
            mean += w * phi;
        }
        (second - &mean * mean.transpose()) * beta * beta
    }

    #[test]
    fn fim_matches_direct_covariance() {
        for encoding in [Encoding::Ising, Encoding::Qubo] {
            for seed in 0..3 {
                let d = 3;
                let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
                let theta: Vec<f64> = (0..param_len(d)).map(|_| rng.gen_range(-0.8..0.8)).collect();
                let params = ModelParams::new(encoding, d, theta).unwrap();
                for beta in [1.0, 1.7] {
                    let dist = enumerate_distribution(&params, beta).unwrap();
                    let m = exact_moments(&dist, encoding, 3).unwrap();
                    let fim = fim_from_moments_beta(&m, beta).unwrap();
                    let oracle = covariance_oracle(&params, beta);
                    let diff = (fim.matrix() - &oracle).abs().max();
                    assert!(diff <= 1e-12, "{encoding} seed {seed} beta {beta}: {diff}");
                }
            }
        }
    }

    #[test]
    fn zero_field_ising_fim_is_identity() {
        let params = ModelParams::zeros(Encoding::Ising, 4).unwrap();
        let dist = enumerate_distribution(&params, 1.0).unwrap();
        let m = exact_moments(&dist, Encoding::Ising, 4).unwrap();
        let fim = fim_from_moments(&m).unwrap();
        let p = param_len(4);
        for i in 0..p {
            for j in 0..p {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((fim.matrix()[(i, j)] - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_field_qubo_fim_closed_forms() {
        let d = 4;
        let params = ModelParams::zeros(Encoding::Qubo, d).unwrap();
        let dist = enumerate_distribution(&params, 1.0).unwrap();
        let m = exact_moments(&dist, Encoding::Qubo, 4).unwrap();
        let fim = fim_from_moments(&m).unwrap();
        let mat = fim.matrix();
        for i in 0..d {
            assert!((mat[(i, i)] - 0.25).abs() <= 1e-12);
            for j in 0..d {
                if i != j {
                    assert!(mat[(i, j)].abs() <= 1e-12);
                    let col = flat_pair_index(d, i, j);
                    assert!((mat[(i, col)] - 0.125).abs() <= 1e-12);
                }
            }
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let row = flat_pair_index(d, i, j);
                assert!((mat[(row, row)] - 0.1875).abs() <= 1e-12);
                for k in 0..d {
                    for l in (k + 1)..d {
                        if (k, l) == (i, j) {
                            continue;
                        }
                        let col = flat_pair_index(d, k, l);
                        let shared = [i, j].iter().filter(|v| [k, l].contains(v)).count();
                        let want = if shared == 1 { 0.0625 } else { 0.0 };
                        assert!(
                            (mat[(row, col)] - want).abs() <= 1e-12,
                            "({i},{j}) vs ({k},{l})"
                        );
                    }
                }
                for v in 0..d {
                    if v != i && v != j {
                        assert!(mat[(v, row)].abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn beta_scaling_of_fim() {
        let mut params = ModelParams::zeros(Encoding::Ising, 3).unwrap();
        params.set_pair(0, 1, 0.4);
        params.set_linear(2, -0.2);
        let beta = 1.7;
        let dist = enumerate_distribution(&params, beta).unwrap();
        let m = exact_moments(&dist, Encoding::Ising, 3).unwrap();
        let at_one = fim_from_moments(&m).unwrap();
        let at_beta = fim_from_moments_beta(&m, beta).unwrap();
        let rescaled = at_one.matrix() * beta * beta;
        assert!((at_beta.matrix() - rescaled).abs().max() <= 1e-12);
    }

    #[test]
    fn blocks_and_offblock_ratio() {
        let d = 4;
        let params = ModelParams::zeros(Encoding::Ising, d).unwrap();
        let dist = enumerate_distribution(&params, 1.0).unwrap();
        let m = exact_moments(&dist, Encoding::Ising, 4).unwrap();
        let fim = fim_from_moments(&m).unwrap();
        let blocks = fim.blocks();
        assert_eq!(blocks.f11.shape(), (4, 4));
        assert_eq!(blocks.f12.shape(), (4, 6));
        assert_eq!(blocks.f21.shape(), (6, 4));
        assert_eq!(blocks.f22.shape(), (6, 6));
        assert_eq!(blocks.f12, blocks.f21.transpose());
        // F12 vanishes at θ = 0 for Ising
        assert!(fim.offblock_ratio() <= 1e-12);
    }

    #[test]
    fn fim_needs_enough_moment_orders() {
        let params = ModelParams::zeros(Encoding::Ising, 5).unwrap();
        let dist = enumerate_distribution(&params, 1.0).unwrap();
        let m = exact_moments(&dist, Encoding::Ising, 2).unwrap();
        assert!(matches!(
            fim_from_moments(&m).map(|_| ()),
            Err(Error::MomentOrder { needed: 4, have: 2 })
        ));
    }

    #[test]
    fn from_matrix_validates() {
        let good = DMatrix::identity(3, 3);
        assert!(FimMatrix::from_matrix(2, Encoding::Ising, MomentSource::Exact, good).is_ok());
        let asym = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.4, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(FimMatrix::from_matrix(2, Encoding::Ising, MomentSource::Exact, asym).is_err());
        let neg_diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1e-5, 1.0]));
        assert!(FimMatrix::from_matrix(2, Encoding::Ising, MomentSource::Exact, neg_diag).is_err());
        let wrong_shape = DMatrix::identity(4, 4);
        assert!(FimMatrix::from_matrix(2, Encoding::Ising, MomentSource::Exact, wrong_shape).is_err());
    }

    #[test]
    fn csv_export_shape() {
        let fim = FimMatrix::from_matrix(
            2,
            Encoding::Qubo,
            MomentSource::Exact,
            DMatrix::identity(3, 3),
        )
        .unwrap();
        let mut buf = Vec::new();
        fim.write_csv(100, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "encoding,d,iteration");
        assert_eq!(lines[1], "qubo,2,100");
        assert_eq!(lines.len(), 2 + 3);
        assert_eq!(lines[2], "1,0,0");
    }
}
