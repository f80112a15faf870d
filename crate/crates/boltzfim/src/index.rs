//! Flat parameter indexing and sorted-tuple ranking.
//!
//! Both encodings share one canonical layout for a model on `d` variables:
//! the `d` linear coefficients come first, then the `d(d-1)/2` pair
//! coefficients in lexicographic order (0,1), (0,2), ..., (d-2,d-1).
//! Gradients, Fisher matrices and parameter vectors all use this layout, so
//! entries line up across encodings without bookkeeping at call sites.
//!
//! Moment tables additionally need ranks for sorted index tuples of length
//! up to 4; [`tuple_rank`] is the lexicographic rank of a k-combination.

/// Number of parameters of a fully connected pairwise model on `d` variables.
pub fn param_len(d: usize) -> usize {
    d + d * (d - 1) / 2
}

/// Rank of the pair (i, j), i < j, in lexicographic order.
pub fn pair_rank(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < d);
    i * d - i * (i + 1) / 2 + (j - i - 1)
}

/// Inverse of [`pair_rank`].
pub fn pair_from_rank(d: usize, rank: usize) -> (usize, usize) {
    let mut i = 0;
    let mut base = 0;
    loop {
        let row = d - i - 1;
        if rank < base + row {
            return (i, i + 1 + rank - base);
        }
        base += row;
        i += 1;
    }
}

/// Flat index of the pair coefficient (i, j) in the canonical layout.
pub fn flat_pair_index(d: usize, i: usize, j: usize) -> usize {
    d + pair_rank(d, i.min(j), i.max(j))
}

/// Binomial coefficient C(n, k) in u64 (small n only; callers stay below d = 64).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for step in 0..k {
        acc = acc * (n - step) as u64 / (step + 1) as u64;
    }
    acc
}

/// Lexicographic rank of the sorted tuple `t` among all |t|-combinations of 0..d.
pub fn tuple_rank(d: usize, t: &[usize]) -> usize {
    let k = t.len();
    let mut rank = 0u64;
    let mut prev = 0usize;
    for (pos, &v) in t.iter().enumerate() {
        debug_assert!(v < d && (pos == 0 || v > t[pos - 1]));
        for skipped in prev..v {
            rank += binomial(d - 1 - skipped, k - 1 - pos);
        }
        prev = v + 1;
    }
    rank as usize
}

/// All sorted k-tuples over 0..d in lexicographic (rank) order.
pub fn tuples(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(d, k) as usize);
    let mut current = Vec::with_capacity(k);
    fn rec(d: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        let remaining = k - current.len();
        for v in start..=d - remaining {
            current.push(v);
            rec(d, k, v + 1, current, out);
            current.pop();
        }
    }
    if k == 0 {
        out.push(Vec::new());
    } else if k <= d {
        rec(d, k, 0, &mut current, &mut out);
    }
    out
}

/// Bitmask with the tuple's bits set.
pub fn tuple_mask(t: &[usize]) -> u64 {
    t.iter().fold(0u64, |m, &i| m | (1u64 << i))
}
