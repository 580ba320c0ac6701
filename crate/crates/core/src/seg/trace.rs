//! External contour extraction by Moore-neighbor tracing.

use std::collections::VecDeque;

use super::{Contour, LabelMap};

/// Clockwise (with y pointing down) starting from west.
const DIRS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn dir_index(dx: i64, dy: i64) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("not an 8-neighbor offset")
}

/// Labels 8-connected components of equal nonzero segment id.
/// Returns per-pixel component numbers (0 = background, then 1, 2, ... in
/// raster order of each component's first pixel) and the component count.
fn label_components(map: &LabelMap) -> (Vec<u32>, u32) {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let mut comp = vec![0u32; map.labels().len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..comp.len() {
        let id = map.labels()[start];
        if id == 0 || comp[start] != 0 {
            continue;
        }
        next += 1;
        comp[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let (x, y) = ((p as i64) % w, (p as i64) / w);
            for (dx, dy) in DIRS {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let q = (ny * w + nx) as usize;
                if comp[q] == 0 && map.labels()[q] == id {
                    comp[q] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    (comp, next)
}

/// One external contour per 8-connected component of each nonzero segment
/// id, in order of each component's first pixel in raster order.
///
/// Tracing starts at that first pixel, entered from the west, and walks the
/// Moore neighborhood clockwise. It stops when it is about to repeat its
/// first move out of the start pixel, which also handles start pixels that
/// the boundary passes through twice.
pub fn trace_external_contours(map: &LabelMap) -> Vec<Contour> {
    let (comp, count) = label_components(map);
    let w = map.width() as i64;
    let h = map.height() as i64;
    let mut starts = vec![usize::MAX; count as usize + 1];
    for (i, &c) in comp.iter().enumerate() {
        if c != 0 && starts[c as usize] == usize::MAX {
            starts[c as usize] = i;
        }
    }

    let inside = |x: i64, y: i64, c: u32| -> bool {
        x >= 0 && y >= 0 && x < w && y < h && comp[(y * w + x) as usize] == c
    };

    let mut contours = Vec::with_capacity(count as usize);
    for c in 1..=count {
        let s = starts[c as usize];
        let start = ((s as i64) % w, (s as i64) / w);
        let segment_id = map.labels()[s];
        let mut points = vec![start];

        let step = |cur: (i64, i64), back: usize| -> Option<((i64, i64), usize)> {
            for k in 1..=8 {
                let d = (back + k) % 8;
                let p = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
                if inside(p.0, p.1, c) {
                    let prev = (back + k - 1) % 8;
                    let b = (cur.0 + DIRS[prev].0, cur.1 + DIRS[prev].1);
                    return Some((p, dir_index(b.0 - p.0, b.1 - p.1)));
                }
            }
            None
        };

        if let Some((first_move, mut back)) = step(start, 0) {
            let mut cur = first_move;
            // Every boundary pixel is entered at most 4 times.
            let limit = 4 * comp.len() + 8;
            for _ in 0..limit {
                let (next, nb) = step(cur, back).expect("component pixel lost its neighbors");
                if cur == start && next == first_move {
                    break;
                }
                points.push(cur);
                cur = next;
                back = nb;
            }
        }
        contours.push(Contour {
            segment_id,
            points: points
                .into_iter()
                .map(|(x, y)| (x as u32, y as u32))
                .collect(),
            closed: true,
        });
    }
    contours
}
