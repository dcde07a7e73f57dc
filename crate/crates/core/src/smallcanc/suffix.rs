//! Suffix array by prefix doubling and the Kasai LCP array.

/// Suffix array of `text`: starting positions in lexicographic order of
/// the suffixes.
pub fn suffix_array(text: &[u32]) -> Vec<usize> {
    let n = text.len();
    let mut sa: Vec<usize> = (0..n).collect();
    if n <= 1 {
        return sa;
    }
    let mut rank: Vec<u64> = text.iter().map(|&c| c as u64).collect();
    let mut next = vec![0u64; n];
    let mut k = 1;
    loop {
        let key = |i: usize, rank: &[u64]| (rank[i], if i + k < n { rank[i + k] + 1 } else { 0 });
        sa.sort_unstable_by_key(|&i| key(i, &rank));
        next[sa[0]] = 0;
        for w in 1..n {
            let bump = key(sa[w - 1], &rank) != key(sa[w], &rank);
            next[sa[w]] = next[sa[w - 1]] + bump as u64;
        }
        std::mem::swap(&mut rank, &mut next);
        if rank[sa[n - 1]] as usize == n - 1 {
            return sa;
        }
        k *= 2;
    }
}

/// `lcp[i]` is the longest common prefix of the suffixes at `sa[i - 1]` and
/// `sa[i]`; `lcp[0]` is 0.
pub fn lcp_array(text: &[u32], sa: &[usize]) -> Vec<usize> {
    let n = text.len();
    let mut rank = vec![0usize; n];
    for (i, &s) in sa.iter().enumerate() {
        rank[s] = i;
    }
    let mut lcp = vec![0usize; n];
    let mut h = 0usize;
    for i in 0..n {
        if rank[i] > 0 {
            let j = sa[rank[i] - 1];
            while i + h < n && j + h < n && text[i + h] == text[j + h] {
                h += 1;
            }
            lcp[rank[i]] = h;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    lcp
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(text: &[u32]) -> Vec<usize> {
        let mut sa: Vec<usize> = (0..text.len()).collect();
        sa.sort_by(|&a, &b| text[a..].cmp(&text[b..]));
        sa
    }

    #[test]
    fn banana() {
        let text: Vec<u32> = "banana".bytes().map(u32::from).collect();
        let sa = suffix_array(&text);
        assert_eq!(sa, [5, 3, 1, 0, 4, 2]);
        assert_eq!(lcp_array(&text, &sa), [0, 1, 3, 0, 0, 2]);
    }

    proptest! {
        #[test]
        fn matches_sorting(text in proptest::collection::vec(0u32..4, 0..60)) {
            let sa = suffix_array(&text);
            prop_assert_eq!(&sa, &naive(&text));
            let lcp = lcp_array(&text, &sa);
            for i in 1..sa.len() {
                let h = text[sa[i - 1]..].iter().zip(&text[sa[i]..]).take_while(|(a, b)| a == b).count();
                prop_assert_eq!(lcp[i], h);
            }
        }
    }
}
