//! Small enumeration helpers shared by the brute-force oracles and the exact engine.

use alloc::vec::Vec;

/// Advances `items` to the next permutation in lexicographic order.
/// Returns `false` (leaving `items` sorted ascending) after the last one.
pub fn next_permutation<T: Ord>(items: &mut [T]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let mut i = items.len() - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        items.reverse();
        return false;
    }
    let mut j = items.len() - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

/// All orderings of `items`, lexicographic in the order `items` are given.
pub fn orderings(items: &[usize]) -> Vec<Vec<usize>> {
    // permute positions so the caller's order (not numeric order) defines "lexicographic"
    let mut positions: Vec<usize> = (0..items.len()).collect();
    let mut out = Vec::new();
    loop {
        out.push(positions.iter().map(|&p| items[p]).collect());
        if !next_permutation(&mut positions) {
            break;
        }
    }
    out
}

/// `n!`, saturating at `u128::MAX`.
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |acc, k| acc.saturating_mul(k))
}
