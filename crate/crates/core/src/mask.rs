// Copyright 2026 The subgroup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Fixed-length bitsets over observations.
//!
//! Every objective evaluation in the crate reduces to OR/AND over cached
//! masks followed by a popcount and a weighted sum, so the representation is
//! a plain `Vec<u64>` with the population count cached alongside.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

const WORD_BITS: usize = 64;

/// The set of observations covered by a rule or rule set.
///
/// Bits past `len` in the final word are always zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoverageMask {
    words: Vec<u64>,
    len: usize,
    count: usize,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

impl CoverageMask {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
            count: 0,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut words = vec![u64::MAX; words_for(len)];
        let tail = len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << tail) - 1;
            }
        }
        Self {
            words,
            len,
            count: len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut words = vec![0u64; words_for(len)];
        for i in 0..len {
            if f(i) {
                words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
            }
        }
        Self::from_words(words, len)
    }

    /// Builds a mask from raw words, clearing anything past `len`.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let tail = len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        let count = words.iter().map(|w| w.count_ones() as usize).sum();
        Self { words, len, count }
    }

    /// Number of observations the mask ranges over.
    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Number of covered observations (the support).
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for mask of {}", self.len);
        let word = &mut self.words[i / WORD_BITS];
        let bit = 1u64 << (i % WORD_BITS);
        let was = *word & bit != 0;
        if value && !was {
            *word |= bit;
            self.count += 1;
        } else if !value && was {
            *word &= !bit;
            self.count -= 1;
        }
    }

    pub fn and(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn and_not(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn or_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "mask length mismatch");
        let mut count = 0;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
            count += a.count_ones() as usize;
        }
        self.count = count;
    }

    pub fn and_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "mask length mismatch");
        let mut count = 0;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
            count += a.count_ones() as usize;
        }
        self.count = count;
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.len, other.len, "mask length mismatch");
        let mut count = 0;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| {
                let w = f(a, b);
                count += w.count_ones() as usize;
                w
            })
            .collect();
        Self {
            words,
            len: self.len,
            count,
        }
    }

    /// True when every bit of `self` is also set in `other`.
    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(&a, &b)| a & !b == 0)
    }

    /// Indices of the covered observations, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    /// Restricts the mask to the given observation indices, in order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), |k| self.get(indices[k]))
    }

    /// 64-bit FNV-1a digest of the covered bits; stable across platforms.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in (self.len as u64)
            .to_le_bytes()
            .into_iter()
            .chain(self.words.iter().flat_map(|w| w.to_le_bytes()))
        {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

impl fmt::Debug for CoverageMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoverageMask[")?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        write!(f, "; {}]", self.count)
    }
}

/// Sums a per-observation weight over a mask with one table lookup per byte.
///
/// The table holds, for every byte position and every 8-bit pattern, the sum
/// of the weights of the set bits. Summation order is fixed, so equal masks
/// always produce bit-identical sums, and adding observations of weight zero
/// never changes the result.
#[derive(Clone, Debug)]
pub struct WeightedSum {
    table: Vec<f64>,
    len: usize,
}

impl WeightedSum {
    pub fn new(weights: &[f64]) -> Self {
        let len = weights.len();
        let n_bytes = len.div_ceil(64) * 8;
        let mut table = vec![0.0; n_bytes * 256];
        for pos in 0..n_bytes {
            let block = &mut table[pos * 256..(pos + 1) * 256];
            for pattern in 1usize..256 {
                let low = pattern.trailing_zeros() as usize;
                let idx = pos * 8 + low;
                let w = if idx < len { weights[idx] } else { 0.0 };
                block[pattern] = block[pattern & (pattern - 1)] + w;
            }
        }
        Self { table, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sum(&self, mask: &CoverageMask) -> f64 {
        debug_assert_eq!(mask.len(), self.len);
        self.sum_words(mask.words().iter().copied())
    }

    /// Sum over a mask given word by word; agrees bit-for-bit with [`sum`]
    /// on the same words.
    ///
    /// [`sum`]: WeightedSum::sum
    pub fn sum_words(&self, words: impl Iterator<Item = u64>) -> f64 {
        // One accumulator per byte lane, combined in a fixed order. Adding a
        // zero weight never changes any lane, so results stay tie-exact.
        let mut acc = [0.0f64; 8];
        for (wi, w) in words.enumerate() {
            if w == 0 {
                continue;
            }
            let block = &self.table[wi * 8 * 256..(wi + 1) * 8 * 256];
            for (lane, b) in w.to_le_bytes().into_iter().enumerate() {
                acc[lane] += block[lane * 256 + b as usize];
            }
        }
        ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
    }
}
