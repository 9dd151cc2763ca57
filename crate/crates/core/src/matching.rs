//! Maximum bipartite matching on a boolean pattern and the König zero block.

/// Rows are the left vertices, columns the right; `pattern[i][j]` marks an edge.
pub fn maximum_matching(pattern: &[Vec<bool>], cols: usize) -> Vec<Option<usize>> {
    let rows = pattern.len();
    let mut row_of_col: Vec<Option<usize>> = vec![None; cols];
    for r in 0..rows {
        let mut seen = vec![false; cols];
        augment(pattern, r, &mut seen, &mut row_of_col);
    }
    let mut col_of_row = vec![None; rows];
    for (c, r) in row_of_col.iter().enumerate() {
        if let Some(r) = r {
            col_of_row[*r] = Some(c);
        }
    }
    col_of_row
}

fn augment(pattern: &[Vec<bool>], r: usize, seen: &mut [bool], row_of_col: &mut [Option<usize>]) -> bool {
    for c in 0..seen.len() {
        if pattern[r][c] && !seen[c] {
            seen[c] = true;
            if row_of_col[c].is_none_or(|r2| augment(pattern, r2, seen, row_of_col)) {
                row_of_col[c] = Some(r);
                return true;
            }
        }
    }
    false
}

/// Rows `R` and columns `S` with every `pattern[i][j]` false on `R x S` and `|R| + |S|`
/// maximal, equal to `rows + cols - matching size`.
pub fn max_zero_block(pattern: &[Vec<bool>], cols: usize) -> (Vec<usize>, Vec<usize>) {
    let rows = pattern.len();
    let col_of_row = maximum_matching(pattern, cols);
    let mut row_of_col = vec![None; cols];
    for (r, c) in col_of_row.iter().enumerate() {
        if let Some(c) = c {
            row_of_col[*c] = Some(r);
        }
    }
    // Alternating reachability from unmatched rows; the unreached rows and reached columns
    // form a minimum vertex cover, so its complement is a maximum independent set.
    let mut row_seen = vec![false; rows];
    let mut col_seen = vec![false; cols];
    let mut stack: Vec<usize> = (0..rows).filter(|&r| col_of_row[r].is_none()).collect();
    for &r in &stack {
        row_seen[r] = true;
    }
    while let Some(r) = stack.pop() {
        for c in 0..cols {
            if pattern[r][c] && !col_seen[c] {
                col_seen[c] = true;
                if let Some(r2) = row_of_col[c] {
                    if !row_seen[r2] {
                        row_seen[r2] = true;
                        stack.push(r2);
                    }
                }
            }
        }
    }
    let zr = (0..rows).filter(|&r| row_seen[r]).collect();
    let zc = (0..cols).filter(|&c| !col_seen[c]).collect();
    (zr, zc)
}
