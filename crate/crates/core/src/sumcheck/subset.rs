use std::collections::HashMap;

use thiserror::Error;

use crate::rational::{common_denominator, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubsetSumConfig {
    /// Largest scaled target solved by dynamic programming.
    pub dp_bound: u64,
    /// Largest item count solved by meet-in-the-middle.
    pub mitm_max_items: usize,
    /// Memory ceiling for the DP tables, in bytes.
    pub dp_memory_bytes: u64,
}

impl Default for SubsetSumConfig {
    fn default() -> Self {
        SubsetSumConfig {
            dp_bound: 10_000_000,
            mitm_max_items: 40,
            dp_memory_bytes: 256 << 20,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SubsetSumError {
    #[error("subset-sum too large: {items} items, scaled target {scaled_target}")]
    ResourceExceeded { items: usize, scaled_target: String },
    #[error("negative value {0} in subset-sum input")]
    Negative(Rational),
}

/// Finds indices whose values sum exactly to `target`.
///
/// Among all solutions the lexicographically smallest sorted index list is
/// returned, so results do not depend on which solver ran.
pub fn subset_sum(values: &[Rational], target: Rational) -> Result<Option<Vec<usize>>, SubsetSumError> {
    subset_sum_with(values, target, &SubsetSumConfig::default())
}

pub fn subset_sum_with(
    values: &[Rational],
    target: Rational,
    cfg: &SubsetSumConfig,
) -> Result<Option<Vec<usize>>, SubsetSumError> {
    if let Some(v) = values.iter().chain(std::iter::once(&target)).find(|v| v.is_negative()) {
        return Err(SubsetSumError::Negative(*v));
    }
    if target.is_zero() {
        return Ok(Some(Vec::new()));
    }
    let exceeded = || SubsetSumError::ResourceExceeded {
        items: values.len(),
        scaled_target: target.to_string(),
    };
    let scale = common_denominator(values.iter().chain(std::iter::once(&target))).ok_or_else(exceeded)?;
    let to_int = |v: &Rational| -> Option<u128> {
        let scaled = v.checked_mul(&Rational::from_integer(scale))?;
        u128::try_from(scaled.numer()).ok()
    };
    let scaled: Vec<u128> = values.iter().map(to_int).collect::<Option<_>>().ok_or_else(exceeded)?;
    let goal = to_int(&target).ok_or_else(exceeded)?;

    let total = scaled.iter().try_fold(0u128, |acc, v| acc.checked_add(*v));
    if total.is_some_and(|t| t < goal) {
        return Ok(None);
    }

    let dp_bytes = (scaled.len() as u128 + 1)
        .checked_mul(goal + 1)
        .map_or(u128::MAX, |b| b / 8);
    if goal <= cfg.dp_bound as u128 && dp_bytes <= cfg.dp_memory_bytes as u128 {
        let small: Vec<usize> = scaled.iter().map(|&v| v.min(goal + 1) as usize).collect();
        return Ok(dp_solve(&small, goal as usize));
    }
    if scaled.len() <= cfg.mitm_max_items.min(62) {
        return Ok(mitm_solve(&scaled, goal));
    }
    Err(exceeded())
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    /// `self |= src << shift`, truncated to `self`'s length.
    fn or_shifted(&mut self, src: &Bits, shift: usize) {
        let words = shift / 64;
        let bits = shift % 64;
        let n = self.0.len();
        for i in (words..n).rev() {
            let j = i - words;
            let mut w = src.0[j] << bits;
            if bits != 0 && j > 0 {
                w |= src.0[j - 1] >> (64 - bits);
            }
            self.0[i] |= w;
        }
    }

    fn clear_above(&mut self, len: usize) {
        let extra = self.0.len() * 64 - len;
        if extra > 0 {
            let last = self.0.len() - 1;
            self.0[last] &= u64::MAX >> extra;
        }
    }
}

/// `reach[i]` holds every sum reachable with items `i..`.
fn dp_solve(values: &[usize], goal: usize) -> Option<Vec<usize>> {
    let n = values.len();
    let width = goal + 1;
    let mut reach: Vec<Bits> = Vec::with_capacity(n + 1);
    let mut base = Bits::new(width);
    base.set(0);
    reach.push(base);
    for &v in values.iter().rev() {
        let prev = reach.last().unwrap();
        let mut next = Bits(prev.0.clone());
        if v <= goal {
            next.or_shifted(prev, v);
            next.clear_above(width);
        }
        reach.push(next);
    }
    reach.reverse();
    if !reach[0].get(goal) {
        return None;
    }
    let mut picked = Vec::new();
    let mut remaining = goal;
    let mut pos = 0;
    while remaining > 0 {
        let j = (pos..n)
            .find(|&j| values[j] <= remaining && reach[j + 1].get(remaining - values[j]))
            .expect("reachable sum has a witness");
        picked.push(j);
        remaining -= values[j];
        pos = j + 1;
    }
    Some(picked)
}

/// Lexicographic order of the sorted index lists encoded by two bitmasks.
fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let i = diff.trailing_zeros();
    if a >> i & 1 == 1 {
        // `a` lists i where `b` lists something later, or stops.
        b >> i != 0
    } else {
        a >> i == 0
    }
}

fn mitm_solve(values: &[u128], goal: u128) -> Option<Vec<usize>> {
    let n = values.len();
    let half = n / 2;
    let (left, right) = values.split_at(half);

    let mut best_right: HashMap<u128, u64> = HashMap::new();
    for mask in 0u64..(1 << right.len()) {
        let mut sum = 0u128;
        for (k, v) in right.iter().enumerate() {
            if mask >> k & 1 == 1 {
                sum = sum.saturating_add(*v);
            }
        }
        if sum > goal {
            continue;
        }
        let full = mask << half;
        best_right
            .entry(sum)
            .and_modify(|m| {
                if lex_less(full, *m) {
                    *m = full;
                }
            })
            .or_insert(full);
    }

    let mut best: Option<u64> = None;
    for mask in 0u64..(1 << left.len()) {
        let mut sum = 0u128;
        for (k, v) in left.iter().enumerate() {
            if mask >> k & 1 == 1 {
                sum = sum.saturating_add(*v);
            }
        }
        if sum > goal {
            continue;
        }
        if let Some(&r) = best_right.get(&(goal - sum)) {
            let cand = mask | r;
            if best.is_none_or(|b| lex_less(cand, b)) {
                best = Some(cand);
            }
        }
    }
    best.map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}
