/// Uniform bucket grid over pixel coordinates. Points are stored by cell in
/// counting-sort order, so queries visit candidates in a fixed order.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell: u32,
    cols: u32,
    rows: u32,
    cell_start: Vec<u32>,
    entries: Vec<u32>,
    points: Vec<(u32, u32)>,
}

impl GridIndex {
    pub fn new(points: &[(u32, u32)], dims: (u32, u32), cell: u32) -> Self {
        let cell = cell.max(1);
        let cols = dims.0.div_ceil(cell).max(1);
        let rows = dims.1.div_ceil(cell).max(1);
        let n_cells = (cols * rows) as usize;
        let cell_of = |&(x, y): &(u32, u32)| ((y / cell) * cols + x / cell) as usize;
        let mut cell_start = vec![0u32; n_cells + 1];
        for p in points {
            cell_start[cell_of(p) + 1] += 1;
        }
        for i in 0..n_cells {
            cell_start[i + 1] += cell_start[i];
        }
        let mut fill = cell_start.clone();
        let mut entries = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p);
            entries[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Self {
            cell,
            cols,
            rows,
            cell_start,
            entries,
            points: points.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Calls `f` with the index of every stored point whose Euclidean
    /// distance to `at` is at most `radius`.
    pub fn for_each_within(&self, at: (u32, u32), radius: u32, mut f: impl FnMut(usize)) {
        self.scan(at, radius, |j| {
            f(j);
            false
        });
    }

    pub fn any_within(&self, at: (u32, u32), radius: u32) -> bool {
        self.scan(at, radius, |_| true)
    }

    // Visits matches until `f` returns true; returns whether it stopped early.
    fn scan(&self, at: (u32, u32), radius: u32, mut f: impl FnMut(usize) -> bool) -> bool {
        let r2 = radius as i64 * radius as i64;
        let reach = radius.div_ceil(self.cell);
        let (cx, cy) = (at.0 / self.cell, at.1 / self.cell);
        let x0 = cx.saturating_sub(reach);
        let x1 = (cx + reach).min(self.cols - 1);
        let y0 = cy.saturating_sub(reach);
        let y1 = (cy + reach).min(self.rows - 1);
        for gy in y0..=y1 {
            for gx in x0..=x1 {
                let c = (gy * self.cols + gx) as usize;
                let (s, e) = (self.cell_start[c] as usize, self.cell_start[c + 1] as usize);
                for &j in &self.entries[s..e] {
                    let (px, py) = self.points[j as usize];
                    let dx = px as i64 - at.0 as i64;
                    let dy = py as i64 - at.1 as i64;
                    if dx * dx + dy * dy <= r2 && f(j as usize) {
                        return true;
                    }
                }
            }
        }
        false
    }
}
