//! Fixed-length bitset over `[0, len)` with word-parallel shifted OR.

const WORD: usize = 64;
/// Destination words processed per block in [`Bitset::or_shifted_many`].
const BLOCK_WORDS: usize = 2048;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for Bitset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bitset")
            .field("len", &self.len)
            .field("ones", &self.count_ones())
            .finish()
    }
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of set bits in `[lo, hi)`.
    pub fn count_range(&self, lo: usize, hi: usize) -> usize {
        let hi = hi.min(self.len);
        if lo >= hi {
            return 0;
        }
        let (lw, hw) = (lo / WORD, (hi - 1) / WORD);
        let low_mask = u64::MAX << (lo % WORD);
        let high_mask = u64::MAX >> (WORD - 1 - (hi - 1) % WORD);
        if lw == hw {
            return (self.words[lw] & low_mask & high_mask).count_ones() as usize;
        }
        let mut total = (self.words[lw] & low_mask).count_ones() as usize;
        total += self.words[lw + 1..hw]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>();
        total + (self.words[hw] & high_mask).count_ones() as usize
    }

    /// True when any bit is set in both sets.
    pub fn intersects(&self, other: &Bitset) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    /// `self |= ⋃_{k} (src << shifts[k])`, truncated to `len`.
    ///
    /// Work is blocked over destination words so each block stays in cache
    /// while every shift is applied to it.
    pub fn or_shifted_many(&mut self, src: &Bitset, shifts: &[usize]) {
        debug_assert_eq!(self.len, src.len);
        let n_words = self.words.len();
        for block_start in (0..n_words).step_by(BLOCK_WORDS) {
            let block_end = (block_start + BLOCK_WORDS).min(n_words);
            let dst = &mut self.words[block_start..block_end];
            for &shift in shifts {
                or_shifted_block(dst, block_start, &src.words, shift);
            }
        }
        self.mask_tail();
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

/// `dst[k] |= word (block_start + k) of (src << shift)`.
#[inline]
fn or_shifted_block(dst: &mut [u64], block_start: usize, src: &[u64], shift: usize) {
    let word_shift = shift / WORD;
    let bit_shift = shift % WORD;
    let first = word_shift.max(block_start);
    let end = block_start + dst.len();
    if first >= end {
        return;
    }
    let dst = &mut dst[first - block_start..];
    let hi = &src[first - word_shift..end - word_shift];
    if bit_shift == 0 {
        for (d, s) in dst.iter_mut().zip(hi) {
            *d |= s;
        }
    } else if first == word_shift {
        // word `word_shift` has no lower neighbour in src
        dst[0] |= hi[0] << bit_shift;
        let lo = &src[..end - word_shift - 1];
        for ((d, h), l) in dst[1..].iter_mut().zip(&hi[1..]).zip(lo) {
            *d |= (h << bit_shift) | (l >> (WORD - bit_shift));
        }
    } else {
        let lo = &src[first - word_shift - 1..end - word_shift - 1];
        for ((d, h), l) in dst.iter_mut().zip(hi).zip(lo) {
            *d |= (h << bit_shift) | (l >> (WORD - bit_shift));
        }
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD + bit);
            }
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
    }
}
