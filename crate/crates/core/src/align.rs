//! Token-level Levenshtein alignment (match 0, substitution/insertion/deletion 1).

/// `d[i][j]` is the edit distance between `a[..i]` and `b[..j]`.
pub fn prefix_distances<T: PartialEq>(a: &[T], b: &[T]) -> Vec<Vec<u32>> {
    let mut d = vec![vec![0u32; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i as u32;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let diag = d[i - 1][j - 1] + u32::from(a[i - 1] != b[j - 1]);
            d[i][j] = diag.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d
}

/// `d[i][j]` is the edit distance between `a[i..]` and `b[j..]`.
pub fn suffix_distances<T: PartialEq>(a: &[T], b: &[T]) -> Vec<Vec<u32>> {
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..=n).rev() {
        d[i][m] = (n - i) as u32;
    }
    for j in (0..=m).rev() {
        d[n][j] = (m - j) as u32;
    }
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            let diag = d[i + 1][j + 1] + u32::from(a[i] != b[j]);
            d[i][j] = diag.min(d[i + 1][j] + 1).min(d[i][j + 1] + 1);
        }
    }
    d
}

/// One step of an alignment between `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignOp {
    Match(usize, usize),
    Substitute(usize, usize),
    /// `a[i]` has no counterpart.
    Delete(usize),
    /// `b[j]` has no counterpart.
    Insert(usize),
}

/// One optimal alignment. Ties prefer a match, then a substitution, then a
/// deletion, then an insertion.
pub fn align<T: PartialEq>(a: &[T], b: &[T]) -> Vec<AlignOp> {
    let d = prefix_distances(a, b);
    let (mut i, mut j) = (a.len(), b.len());
    let mut ops = Vec::with_capacity(i.max(j));
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && a[i - 1] == b[j - 1] && d[i][j] == d[i - 1][j - 1] {
            ops.push(AlignOp::Match(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1 {
            ops.push(AlignOp::Substitute(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            ops.push(AlignOp::Delete(i - 1));
            i -= 1;
        } else {
            ops.push(AlignOp::Insert(j - 1));
            j -= 1;
        }
    }
    ops.reverse();
    ops
}
