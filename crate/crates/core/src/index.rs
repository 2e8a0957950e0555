//! Canonical indexing of tuples over the alphabet `{0, .., n-1}`.
//!
//! A k-tuple `(t_1, .., t_k)` maps to the flat index `sum_i t_i * n^(k-i)`,
//! i.e. tuples are ordered lexicographically with symbol 0 first and the
//! first tuple position most significant. Every serialized vector in this
//! crate uses this order.

use crate::error::{Error, Result};

/// Number of k-tuples over an alphabet of size n, if it fits in `usize`.
pub fn tuple_count(n: usize, k: usize) -> Option<usize> {
    n.checked_pow(u32::try_from(k).ok()?)
}

/// Bijective lexicographic index of `tuple` in `0..n^k`.
pub fn flat_index(tuple: &[usize], n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::EmptyAlphabet);
    }
    let mut idx = 0usize;
    for &symbol in tuple {
        if symbol >= n {
            return Err(Error::SymbolOutOfRange { symbol, n });
        }
        idx = idx * n + symbol;
    }
    Ok(idx)
}

/// Inverse of [`flat_index`]: the k-tuple with the given flat index.
pub fn unflatten(mut index: usize, n: usize, k: usize) -> Vec<usize> {
    let mut tuple = vec![0usize; k];
    for slot in tuple.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    tuple
}

/// Visits every path in `A^l` in lexicographic order, reusing one buffer.
pub fn for_each_path(n: usize, l: usize, mut visit: impl FnMut(&[usize])) {
    if n == 0 {
        return;
    }
    let mut path = vec![0usize; l];
    loop {
        visit(&path);
        // odometer increment
        let mut pos = l;
        while pos > 0 {
            pos -= 1;
            path[pos] += 1;
            if path[pos] < n {
                break;
            }
            path[pos] = 0;
            if pos == 0 {
                return;
            }
        }
        if l == 0 {
            return;
        }
    }
}
