//! Subset enumeration shared by the spark check, support generation, and
//! dependent-subset search.

/// Binomial coefficient in u128; saturates instead of overflowing so budget
/// checks stay meaningful at silly inputs.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Lexicographic k-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    k: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let done = k > n;
        Combinations {
            n,
            k,
            current: (0..k).collect(),
            done,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self.current.clone();
        if self.k == 0 {
            self.done = true;
            return Some(item);
        }
        // advance
        let mut i = self.k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.n - self.k + i {
                self.current[i] += 1;
                for j in i + 1..self.k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(item)
    }
}

/// Lexicographic k-subsets of `first..n` that start with `first` followed
/// by a (k-1)-subset of `first+1..n`. Lets enumeration partition by first
/// element while preserving global lexicographic order across partitions.
pub fn subsets_with_first(first: usize, n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    Combinations::new(n.saturating_sub(first + 1), k.saturating_sub(1)).map(move |tail| {
        let mut s = Vec::with_capacity(k);
        s.push(first);
        s.extend(tail.into_iter().map(|t| t + first + 1));
        s
    })
}
