//! s-fold sumsets, representation counts and gap records.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{domain, Error, Result};

/// Membership bitmap of `sA ∩ [1, N]`. Bit `n` is set iff `n` is a sum of
/// exactly `s` elements of `A`, repetition allowed; bit 0 is never set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumsetProfile {
    pub s: u32,
    pub limit_n: u64,
    membership: Bitset,
    source: Vec<u64>,
}

impl SumsetProfile {
    pub fn contains(&self, n: u64) -> bool {
        n <= self.limit_n && self.membership.get(n as usize)
    }

    pub fn membership(&self) -> &Bitset {
        &self.membership
    }

    /// The set `A` the profile was built from, sorted.
    pub fn source(&self) -> &[u64] {
        &self.source
    }

    /// Members of `sA ∩ [1, N]` in increasing order.
    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.membership.ones().map(|i| i as u64)
    }

    pub fn count(&self) -> usize {
        self.membership.count_ones()
    }

    /// `|sA ∩ [lo, hi]|`.
    pub fn count_between(&self, lo: u64, hi: u64) -> usize {
        if lo > hi {
            return 0;
        }
        self.membership.count_range(lo as usize, hi as usize + 1)
    }

    /// Maximal runs `[start, end]` of consecutive members.
    pub fn runs(&self) -> Vec<(u64, u64)> {
        let mut runs: Vec<(u64, u64)> = Vec::new();
        for m in self.members() {
            match runs.last_mut() {
                Some((_, end)) if *end + 1 == m => *end = m,
                _ => runs.push((m, m)),
            }
        }
        runs
    }

    /// Run-length CSV with header `start,end`.
    pub fn write_runs_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "start,end")?;
        for (a, b) in self.runs() {
            writeln!(out, "{a},{b}")?;
        }
        Ok(())
    }
}

fn normalized_source(a: &[u64], limit_n: u64) -> Result<Vec<u64>> {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&bad) = v.iter().find(|&&x| x == 0 || x > limit_n) {
        return Err(Error::Precondition(format!(
            "element {bad} of A lies outside [1, {limit_n}]"
        )));
    }
    Ok(v)
}

fn check_len(limit_n: u64) -> Result<usize> {
    usize::try_from(limit_n)
        .ok()
        .and_then(|n| n.checked_add(1))
        .ok_or_else(|| domain(format!("limit_n {limit_n} does not fit in memory")))
}

/// `sA ∩ [1, N]` by iterated shifted OR: `B_1 = A`, `B_{k+1} = ⋃_{a ∈ A} (B_k << a)`.
pub fn sumset(a: &[u64], s: u32, limit_n: u64) -> Result<SumsetProfile> {
    if s < 1 {
        return Err(domain("sumset requires s >= 1"));
    }
    let len = check_len(limit_n)?;
    let source = normalized_source(a, limit_n)?;
    let mut current = Bitset::new(len);
    for &x in &source {
        current.set(x as usize);
    }
    let shifts: Vec<usize> = source.iter().map(|&x| x as usize).collect();
    for _ in 1..s {
        if current.count_ones() == 0 {
            break;
        }
        let mut next = Bitset::new(len);
        next.or_shifted_many(&current, &shifts);
        current = next;
    }
    Ok(SumsetProfile {
        s,
        limit_n,
        membership: current,
        source,
    })
}

/// `r_s(A, n)` for `n ∈ [0, N]`: the number of non-decreasing s-tuples of
/// elements of `A` summing to `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepCountTable {
    pub s: u32,
    pub limit_n: u64,
    counts: Vec<u32>,
}

impl RepCountTable {
    pub fn get(&self, n: u64) -> u32 {
        self.counts.get(n as usize).copied().unwrap_or(0)
    }

    /// Counts indexed by `n`; index 0 is always 0 for `s >= 1`.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }
}

/// Depth-first enumeration of non-decreasing tuples over sorted `A`,
/// pruned once the partial sum can no longer stay within `N`.
pub fn representation_counts(a: &[u64], s: u32, limit_n: u64) -> Result<RepCountTable> {
    if s < 1 {
        return Err(domain("representation_counts requires s >= 1"));
    }
    let len = check_len(limit_n)?;
    let source = normalized_source(a, limit_n)?;
    let mut counts = vec![0u32; len];
    if s == 2 {
        for (i, &x) in source.iter().enumerate() {
            if 2 * x > limit_n {
                break;
            }
            for &y in &source[i..] {
                let total = x + y;
                if total > limit_n {
                    break;
                }
                counts[total as usize] += 1;
            }
        }
    } else {
        count_tuples(&source, s, 0, 0, limit_n, &mut counts);
    }
    Ok(RepCountTable {
        s,
        limit_n,
        counts,
    })
}

fn count_tuples(source: &[u64], remaining: u32, start: usize, partial: u64, limit: u64, counts: &mut [u32]) {
    if remaining == 0 {
        counts[partial as usize] += 1;
        return;
    }
    for (offset, &x) in source[start..].iter().enumerate() {
        // every remaining part is at least x
        if partial + x * u64::from(remaining) > limit {
            break;
        }
        count_tuples(source, remaining - 1, start + offset, partial + x, limit, counts);
    }
}

/// A pair of consecutive members `b_n < b_{n+1}` of `sA`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub left: u64,
    pub right: u64,
    pub gap: u64,
    /// `gap / ln(left)`.
    pub normalized: f64,
}

impl GapRecord {
    pub fn new(left: u64, right: u64) -> Self {
        let gap = right - left;
        Self {
            left,
            right,
            gap,
            normalized: gap as f64 / (left as f64).ln(),
        }
    }
}

/// Streaming form of [`gaps`].
pub fn gap_iter(profile: &SumsetProfile, min_b: u64) -> impl Iterator<Item = GapRecord> + '_ {
    let mut members = profile.members().skip_while(move |&m| m < min_b.max(2));
    let mut prev = members.next();
    std::iter::from_fn(move || {
        let left = prev?;
        let right = members.next()?;
        prev = Some(right);
        Some(GapRecord::new(left, right))
    })
}

/// All consecutive member pairs with `b_n >= min_b`. The censored stretch
/// after the last member is not a gap.
pub fn gaps(profile: &SumsetProfile, min_b: u64) -> Result<Vec<GapRecord>> {
    if min_b < 2 {
        return Err(domain("gaps requires min_b >= 2 so that ln(b_n) > 0"));
    }
    Ok(gap_iter(profile, min_b).collect())
}

/// Largest normalized gap of a record list.
pub fn max_normalized_gap(records: &[GapRecord]) -> Result<f64> {
    records
        .iter()
        .map(|r| r.normalized)
        .reduce(f64::max)
        .ok_or_else(|| Error::NoData("no gap records".into()))
}

/// Record with the largest normalized gap, without materializing the list.
pub fn widest_normalized_gap(profile: &SumsetProfile, min_b: u64) -> Option<GapRecord> {
    gap_iter(profile, min_b).reduce(|best, r| if r.normalized > best.normalized { r } else { best })
}

/// Gap CSV with header `left,right,gap,normalized`.
pub fn write_gaps_csv<'a, W, I>(mut out: W, records: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a GapRecord>,
{
    writeln!(out, "left,right,gap,normalized")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{}",
            r.left,
            r.right,
            r.gap,
            crate::stats::format_real(r.normalized)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members(p: &SumsetProfile) -> Vec<u64> {
        p.members().collect()
    }

    #[test]
    fn hand_examples() {
        assert_eq!(members(&sumset(&[1, 2], 2, 5).unwrap()), vec![2, 3, 4]);
        assert_eq!(members(&sumset(&[1], 3, 10).unwrap()), vec![3]);
        assert!(members(&sumset(&[], 2, 10).unwrap()).is_empty());
        assert_eq!(members(&sumset(&[3, 1], 1, 5).unwrap()), vec![1, 3]);
        assert!(sumset(&[0, 1], 2, 5).is_err());
        assert!(sumset(&[6], 2, 5).is_err());
        assert!(sumset(&[1], 0, 5).is_err());
    }

    #[test]
    fn full_interval_scaling() {
        let a: Vec<u64> = (1..=300).collect();
        let p = sumset(&a, 2, 300).unwrap();
        assert_eq!(members(&p), (2..=300).collect::<Vec<_>>());
        let p = sumset(&a[..100], 2, 300).unwrap();
        assert_eq!(members(&p), (2..=200).collect::<Vec<_>>());
    }

    #[test]
    fn rep_count_examples() {
        let t = representation_counts(&[1, 2, 3], 2, 6).unwrap();
        assert_eq!(t.counts(), &[0, 0, 1, 1, 2, 1, 1]);
        let t = representation_counts(&[1], 2, 6).unwrap();
        assert_eq!(t.counts(), &[0, 0, 1, 0, 0, 0, 0]);
        let t = representation_counts(&[1, 2, 3], 3, 9).unwrap();
        // 3:111 4:112 5:113,122 6:123,222 7:133,223 8:233 9:333
        assert_eq!(t.counts(), &[0, 0, 0, 1, 1, 2, 2, 2, 1, 1]);
        assert_eq!(t.total(), 10);
    }

    fn profile_of(members: &[u64], limit: u64) -> SumsetProfile {
        // s = 1 makes the profile equal to the given set
        sumset(members, 1, limit).unwrap()
    }

    #[test]
    fn gap_examples() {
        let p = profile_of(&[2, 3, 4, 8], 10);
        let g = gaps(&p, 2).unwrap();
        assert_eq!(
            g.iter().map(|r| (r.left, r.right, r.gap)).collect::<Vec<_>>(),
            vec![(2, 3, 1), (3, 4, 1), (4, 8, 4)]
        );
        let m = max_normalized_gap(&g).unwrap();
        assert!((m - 4.0 / 4f64.ln()).abs() < 1e-15);
        assert!((m - 2.885_390_081_777_927).abs() < 1e-12);
        assert_eq!(widest_normalized_gap(&p, 2).unwrap().left, 4);

        let full = profile_of(&(2..=10).collect::<Vec<_>>(), 10);
        assert!(gaps(&full, 2).unwrap().iter().all(|r| r.gap == 1));
        let from3 = gaps(&full, 3).unwrap();
        assert_eq!(from3[0].left, 3);
        assert!((max_normalized_gap(&from3).unwrap() - 1.0 / 3f64.ln()).abs() < 1e-15);

        assert!(gaps(&p, 1).is_err());
        assert!(gaps(&profile_of(&[5], 10), 2).unwrap().is_empty());
        assert!(matches!(max_normalized_gap(&[]), Err(Error::NoData(_))));
    }

    #[test]
    fn runs_and_csv() {
        let p = profile_of(&[2, 3, 4, 8, 10, 11], 12);
        assert_eq!(p.runs(), vec![(2, 4), (8, 8), (10, 11)]);
        let mut buf = Vec::new();
        p.write_runs_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "start,end\n2,4\n8,8\n10,11\n");
        let mut buf = Vec::new();
        write_gaps_csv(&mut buf, &gaps(&p, 2).unwrap()[2..3]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "left,right,gap,normalized\n4,8,4,2.8853900817779268e0\n"
        );
    }
}
