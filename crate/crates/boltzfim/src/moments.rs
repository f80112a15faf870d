//! Expectation tables of variable products up to fourth order.
//!
//! A [`MomentTable`] stores E[v_{i1} ... v_{ik}] for every sorted tuple
//! i1 < ... < ik of distinct variables, k = 1..=max_order, in the tuple-rank
//! order of [`crate::index`]. The alphabet of the products follows the
//! encoding tag: spin values ±1 for Ising, bit values 0/1 for QUBO. Gradients
//! need order 2; Fisher matrices need order 4.

use crate::encoding::{Convention, Encoding};
use crate::error::{Error, Result};
use crate::index::{binomial, tuple_mask, tuple_rank, tuples};

/// Where the expectations came from: exhaustive enumeration or samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentSource {
    Exact,
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    d: usize,
    encoding: Encoding,
    source: MomentSource,
    max_order: usize,
    /// orders[k-1][rank] = E[product over the rank-th k-tuple].
    orders: Vec<Vec<f64>>,
}

impl MomentTable {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn source(&self) -> MomentSource {
        self.source
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// All moments of one order, in tuple-rank layout.
    pub fn order(&self, k: usize) -> Result<&[f64]> {
        if k == 0 || k > self.max_order {
            return Err(Error::MomentOrder {
                needed: k,
                have: self.max_order,
            });
        }
        Ok(&self.orders[k - 1])
    }

    /// Moment of a sorted tuple of distinct variables; the empty tuple is 1.
    pub fn moment(&self, tuple: &[usize]) -> Result<f64> {
        let k = tuple.len();
        if k == 0 {
            return Ok(1.0);
        }
        if k > self.max_order {
            return Err(Error::MomentOrder {
                needed: k,
                have: self.max_order,
            });
        }
        Ok(self.orders[k - 1][tuple_rank(self.d, tuple)])
    }

    /// Range and (for bits) monotonicity-under-inclusion checks. Exercised by
    /// tests; real data cannot violate these short of NaN propagation.
    pub fn check_invariants(&self) -> Result<()> {
        let tol = 1e-12;
        for vals in &self.orders {
            for &m in vals {
                let ok = match self.encoding.convention() {
                    Convention::Spin => m.is_finite() && m.abs() <= 1.0 + tol,
                    Convention::Bit => m.is_finite() && (-tol..=1.0 + tol).contains(&m),
                };
                if !ok {
                    return Err(Error::NonFinite("moment table entry out of range"));
                }
            }
        }
        if self.encoding.convention() == Convention::Bit {
            for k in 2..=self.max_order {
                for t in tuples(self.d, k) {
                    let m = self.moment(&t)?;
                    for drop in 0..k {
                        let mut sub = t.clone();
                        sub.remove(drop);
                        if m > self.moment(&sub)? + tol {
                            return Err(Error::InvalidArgument(format!(
                                "bit moment of {t:?} exceeds its sub-tuple {sub:?}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Accumulate moments from weighted configuration integers. Weights need not
/// be normalized; the result divides by their sum. Fixed iteration order, so
/// results are bit-reproducible.
pub(crate) fn accumulate(
    d: usize,
    encoding: Encoding,
    source: MomentSource,
    max_order: usize,
    items: &[(u64, f64)],
) -> Result<MomentTable> {
    if !(1..=4).contains(&max_order) {
        return Err(Error::InvalidArgument(format!(
            "moment order must be between 1 and 4, got {max_order}"
        )));
    }
    if items.is_empty() {
        return Err(Error::InvalidArgument("no configurations to average".into()));
    }
    let masks_by_order: Vec<Vec<u64>> = (1..=max_order)
        .map(|k| tuples(d, k).iter().map(|t| tuple_mask(t)).collect())
        .collect();
    let mut orders: Vec<Vec<f64>> = (1..=max_order)
        .map(|k| vec![0.0; binomial(d, k) as usize])
        .collect();
    let spin = encoding.convention() == Convention::Spin;
    let mut total = 0.0;
    for &(mask, w) in items {
        total += w;
        for (acc, tms) in orders.iter_mut().zip(&masks_by_order) {
            for (slot, &tm) in acc.iter_mut().zip(tms) {
                if spin {
                    // product of ±1 over the tuple: sign from the count of -1 entries
                    if (tm & !mask).count_ones() & 1 == 0 {
                        *slot += w;
                    } else {
                        *slot -= w;
                    }
                } else if mask & tm == tm {
                    *slot += w;
                }
            }
        }
    }
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NonFinite("total weight"));
    }
    for acc in &mut orders {
        for slot in acc.iter_mut() {
            *slot /= total;
        }
    }
    Ok(MomentTable {
        d,
        encoding,
        source,
        max_order,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_configuration_moments_are_its_products() {
        // mask 0b101 on 3 variables: x = (1,0,1), s = (+1,-1,+1)
        let bit = accumulate(3, Encoding::Qubo, MomentSource::Exact, 4, &[(0b101, 1.0)]).unwrap();
        assert_eq!(bit.moment(&[0]).unwrap(), 1.0);
        assert_eq!(bit.moment(&[1]).unwrap(), 0.0);
        assert_eq!(bit.moment(&[0, 2]).unwrap(), 1.0);
        assert_eq!(bit.moment(&[0, 1, 2]).unwrap(), 0.0);

        let spin = accumulate(3, Encoding::Ising, MomentSource::Exact, 3, &[(0b101, 1.0)]).unwrap();
        assert_eq!(spin.moment(&[1]).unwrap(), -1.0);
        assert_eq!(spin.moment(&[0, 1]).unwrap(), -1.0);
        assert_eq!(spin.moment(&[0, 2]).unwrap(), 1.0);
        assert_eq!(spin.moment(&[0, 1, 2]).unwrap(), -1.0);
        assert_eq!(spin.moment(&[]).unwrap(), 1.0);
    }

    #[test]
    fn uniform_two_variable_moments() {
        let items: Vec<(u64, f64)> = (0..4).map(|m| (m, 0.25)).collect();
        let bit = accumulate(2, Encoding::Qubo, MomentSource::Exact, 2, &items).unwrap();
        assert!((bit.moment(&[0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((bit.moment(&[0, 1]).unwrap() - 0.25).abs() < 1e-15);
        let spin = accumulate(2, Encoding::Ising, MomentSource::Exact, 2, &items).unwrap();
        assert!(spin.moment(&[0]).unwrap().abs() < 1e-15);
        assert!(spin.moment(&[0, 1]).unwrap().abs() < 1e-15);
        bit.check_invariants().unwrap();
        spin.check_invariants().unwrap();
    }

    #[test]
    fn weights_are_normalized() {
        let a = accumulate(2, Encoding::Qubo, MomentSource::Empirical, 1, &[(0b11, 3.0), (0b00, 1.0)])
            .unwrap();
        assert!((a.moment(&[0]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn order_guard() {
        let t = accumulate(2, Encoding::Qubo, MomentSource::Exact, 2, &[(0, 1.0)]).unwrap();
        assert!(matches!(
            t.moment(&[0, 1, 1]).map(|_| ()),
            Err(Error::MomentOrder { needed: 3, have: 2 })
        ));
        assert!(accumulate(2, Encoding::Qubo, MomentSource::Exact, 5, &[(0, 1.0)]).is_err());
        assert!(accumulate(2, Encoding::Qubo, MomentSource::Exact, 2, &[]).is_err());
    }
}
