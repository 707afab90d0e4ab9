//! Exact cover by dancing links. Branches on the column with the fewest
//! remaining rows (least index on ties) and tries rows in input order, so
//! solutions come out in a fixed order.

use rayon::prelude::*;

#[derive(Clone)]
pub struct ExactCover {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    col: Vec<usize>,
    row: Vec<usize>,
    size: Vec<usize>,
    ncols: usize,
    nrows: usize,
    forced: Vec<usize>,
}

impl ExactCover {
    /// `rows[i]` lists the columns covered by row `i`; columns are
    /// `0..ncols`.
    pub fn new(ncols: usize, rows: &[Vec<usize>]) -> ExactCover {
        let header = ncols + 1;
        let cap = header + rows.iter().map(Vec::len).sum::<usize>();
        let mut dl = ExactCover {
            left: Vec::with_capacity(cap),
            right: Vec::with_capacity(cap),
            up: Vec::with_capacity(cap),
            down: Vec::with_capacity(cap),
            col: Vec::with_capacity(cap),
            row: Vec::with_capacity(cap),
            size: vec![0; ncols],
            ncols,
            nrows: rows.len(),
            forced: Vec::new(),
        };
        // node 0 is the root, nodes 1..=ncols are column headers
        for i in 0..header {
            dl.left.push(if i == 0 { ncols } else { i - 1 });
            dl.right.push(if i == ncols { 0 } else { i + 1 });
            dl.up.push(i);
            dl.down.push(i);
            dl.col.push(i);
            dl.row.push(usize::MAX);
        }
        for (r, cols) in rows.iter().enumerate() {
            let mut cols = cols.clone();
            cols.sort_unstable();
            cols.dedup();
            let first = dl.col.len();
            for (j, &c) in cols.iter().enumerate() {
                assert!(c < ncols, "column {c} out of range");
                let n = dl.col.len();
                let h = c + 1;
                dl.col.push(h);
                dl.row.push(r);
                dl.up.push(dl.up[h]);
                dl.down.push(h);
                let u = dl.up[h];
                dl.down[u] = n;
                dl.up[h] = n;
                dl.left.push(if j == 0 { n } else { n - 1 });
                dl.right.push(first);
                if j > 0 {
                    dl.right[n - 1] = n;
                    dl.left[first] = n;
                }
                dl.size[c] += 1;
            }
        }
        dl
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    fn cover(&mut self, c: usize) {
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = r;
        self.left[r] = l;
        let mut i = self.down[c];
        while i != c {
            let mut j = self.right[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = d;
                self.up[d] = u;
                self.size[self.col[j] - 1] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, c: usize) {
        let mut i = self.up[c];
        while i != c {
            let mut j = self.left[i];
            while j != i {
                self.size[self.col[j] - 1] += 1;
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[d] = j;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = c;
        self.left[r] = c;
    }

    fn choose(&self) -> Option<usize> {
        let mut best = None;
        let mut best_size = usize::MAX;
        let mut c = self.right[0];
        while c != 0 {
            if self.size[c - 1] < best_size {
                best_size = self.size[c - 1];
                best = Some(c);
            }
            c = self.right[c];
        }
        best
    }

    fn select(&mut self, node: usize) {
        let mut j = self.right[node];
        while j != node {
            self.cover(self.col[j]);
            j = self.right[j];
        }
    }

    fn deselect(&mut self, node: usize) {
        let mut j = self.left[node];
        while j != node {
            self.uncover(self.col[j]);
            j = self.left[j];
        }
    }

    /// Forces row `r` into every solution. Returns false if it clashes with
    /// rows forced earlier.
    pub fn force_row(&mut self, r: usize) -> bool {
        let Some(node) = (self.ncols + 1..self.row.len()).find(|&n| self.row[n] == r) else {
            return true;
        };
        let mut j = node;
        loop {
            let c = self.col[j];
            if self.right[self.left[c]] != c {
                return false;
            }
            j = self.right[j];
            if j == node {
                break;
            }
        }
        self.cover(self.col[node]);
        self.select(node);
        self.forced.push(r);
        true
    }

    fn search(&mut self, partial: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let Some(c) = self.choose() else {
            return visit(partial);
        };
        if self.size[c - 1] == 0 {
            return true;
        }
        self.cover(c);
        let mut r = self.down[c];
        let mut go_on = true;
        while r != c && go_on {
            partial.push(self.row[r]);
            self.select(r);
            go_on = self.search(partial, visit);
            self.deselect(r);
            partial.pop();
            r = self.down[r];
        }
        self.uncover(c);
        go_on
    }

    /// Calls `visit` on each solution (row indices in selection order)
    /// until it returns false.
    pub fn for_each(&mut self, visit: &mut dyn FnMut(&[usize]) -> bool) {
        let mut partial = self.forced.clone();
        self.search(&mut partial, visit);
    }

    /// Up to `limit` solutions, each sorted.
    pub fn solutions(&mut self, limit: Option<usize>) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each(&mut |s| {
            let mut s = s.to_vec();
            s.sort_unstable();
            out.push(s);
            limit.is_none_or(|l| out.len() < l)
        });
        out
    }

    /// All solutions, splitting the work over the rows of the first
    /// branching column. Same order as [`ExactCover::solutions`].
    pub fn solutions_par(&self, limit: Option<usize>) -> Vec<Vec<usize>> {
        let Some(c) = self.choose() else {
            let mut s = self.forced.clone();
            s.sort_unstable();
            return vec![s];
        };
        let mut starts = Vec::new();
        let mut r = self.down[c];
        while r != c {
            starts.push(r);
            r = self.down[r];
        }
        let parts: Vec<Vec<Vec<usize>>> = starts
            .par_iter()
            .map(|&node| {
                let mut dl = self.clone();
                dl.cover(c);
                dl.select(node);
                let mut out = Vec::new();
                let mut partial = dl.forced.clone();
                partial.push(dl.row[node]);
                dl.search(&mut partial, &mut |s| {
                    let mut s = s.to_vec();
                    s.sort_unstable();
                    out.push(s);
                    limit.is_none_or(|l| out.len() < l)
                });
                out
            })
            .collect();
        let mut all: Vec<Vec<usize>> = parts.into_iter().flatten().collect();
        if let Some(l) = limit {
            all.truncate(l);
        }
        all
    }

    pub fn count(&mut self) -> usize {
        let mut n = 0;
        self.for_each(&mut |_| {
            n += 1;
            true
        });
        n
    }
}
