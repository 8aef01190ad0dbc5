//! Dense linear algebra over GF(2), sized for tableau bookkeeping.

/// Solve `A·c = b` where `A` is given column-wise (`columns[j]` is column `j`).
/// Returns one solution if the system is consistent.
pub(crate) fn solve(columns: &[Vec<bool>], rhs: &[bool]) -> Option<Vec<bool>> {
    let rows = rhs.len();
    let cols = columns.len();
    // augmented matrix, row-major
    let mut m: Vec<Vec<bool>> = (0..rows)
        .map(|r| {
            let mut row: Vec<bool> = columns.iter().map(|c| c[r]).collect();
            row.push(rhs[r]);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| m[i][c]) else { continue };
        m.swap(r, p);
        for i in 0..rows {
            if i != r && m[i][c] {
                let pivot_row = m[r].clone();
                for (a, b) in m[i].iter_mut().zip(pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| row[cols]) {
        return None;
    }
    let mut sol = vec![false; cols];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = m[i][cols];
    }
    Some(sol)
}

/// Rank of a set of vectors.
pub(crate) fn rank(vectors: &[Vec<bool>]) -> usize {
    let mut basis: Vec<Vec<bool>> = Vec::new();
    for v in vectors {
        let mut v = v.clone();
        for b in &basis {
            let lead = b.iter().position(|&x| x).unwrap();
            if v[lead] {
                for (a, y) in v.iter_mut().zip(b) {
                    *a ^= *y;
                }
            }
        }
        if let Some(lead) = v.iter().position(|&x| x) {
            for b in basis.iter_mut() {
                if b[lead] {
                    for (a, y) in b.iter_mut().zip(&v) {
                        *a ^= *y;
                    }
                }
            }
            basis.push(v);
        }
    }
    basis.len()
}
