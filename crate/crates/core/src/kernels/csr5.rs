use crate::formats::Csr5Matrix;

/// Segmented sum over one CSR5 tile.
///
/// Each column (lane) is reduced independently: entries before the column's
/// first flag form its head, every flag opens a new segment. A column's last
/// segment then absorbs the heads of the `seg_off` columns it spills into.
/// Returns `(row, partial)` pairs in row order; the first and last rows may
/// also receive partials from neighbouring tiles.
pub fn csr5_tile_partials(m: &Csr5Matrix, t: usize, x: &[f64]) -> Vec<(usize, f64)> {
    let range = m.tile_range(t);
    let (omega, sigma) = (m.omega(), m.sigma());
    let (flags, indices, data) = (m.bit_flag(), m.indices(), m.data());
    let ptr = m.ptr();
    let used_cols = range.len().div_ceil(sigma);
    let full = range.len() == omega * sigma;

    let mut heads = vec![0.0; used_cols];
    let mut segments: Vec<Vec<(usize, f64)>> = vec![Vec::new(); used_cols];
    let mut row_floor = m.tile_ptr()[t];
    for j in 0..used_cols {
        // The f-th flag of the tile sits on row tile_ptr + f or later.
        let mut next_row = row_floor.max(m.tile_ptr()[t] + m.y_off()[t * omega + j] as usize);
        let mut open: Option<(usize, f64)> = None;
        for i in 0..sigma {
            let local = j * sigma + i;
            if local >= range.len() {
                break;
            }
            let s = if full {
                range.start + i * omega + j
            } else {
                range.start + local
            };
            let v = data[s] * x[indices[s] as usize];
            if flags[s] {
                if let Some(seg) = open.take() {
                    segments[j].push(seg);
                }
                let g = range.start + local;
                let mut r = next_row;
                while ptr[r + 1] <= g {
                    r += 1;
                }
                next_row = r + 1;
                open = Some((r, 0.0 + v));
            } else if let Some((_, sum)) = open.as_mut() {
                *sum += v;
            } else {
                heads[j] += v;
            }
        }
        if let Some(seg) = open {
            segments[j].push(seg);
        }
        row_floor = next_row;
    }

    let seg_off = &m.seg_off()[t * omega..(t + 1) * omega];
    let mut out = Vec::with_capacity(segments.iter().map(Vec::len).sum());
    for j in 0..used_cols {
        let spill = seg_off[j] as usize;
        if let Some(last) = segments[j].last_mut() {
            for head in &heads[j + 1..=j + spill] {
                last.1 += head;
            }
        }
        out.append(&mut segments[j]);
    }
    out
}
