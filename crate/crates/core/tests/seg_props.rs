use cvc_core::model::{SplitMix64, VideoMeta};
use cvc_core::seg::{
    chord_length_params, encode_seg_frame_with, fit_points, fit_points_with_params, render_seg_frame,
    trace_external_contours, BezierCurve, LabelMap, Point,
};
use proptest::prelude::*;

fn bernstein_eval(ctrl: &[Point], t: f64) -> Point {
    // Direct Bernstein sum, independent of the library's de Casteljau.
    let n = ctrl.len() - 1;
    let mut binom = 1.0;
    let mut p = Point::new(0.0, 0.0);
    for (k, c) in ctrl.iter().enumerate() {
        if k > 0 {
            binom = binom * (n + 1 - k) as f64 / k as f64;
        }
        let b = binom * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32);
        p.x += b * c.x;
        p.y += b * c.y;
    }
    p
}

fn chord_params_oracle(pts: &[Point]) -> Vec<f64> {
    let mut acc = vec![0.0];
    for w in pts.windows(2) {
        let d = ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt();
        acc.push(acc.last().unwrap() + d);
    }
    let total = *acc.last().unwrap();
    acc.iter().map(|a| a / total).collect()
}

#[test]
fn quadratic_is_recovered_from_chord_length_samples() {
    let ctrl = [Point::new(0.0, 0.0), Point::new(5.0, 10.0), Point::new(10.0, 0.0)];
    // Parameters that are their own chord-length parametrization.
    let mut t: Vec<f64> = (0..50).map(|j| j as f64 / 49.0).collect();
    for _ in 0..20_000 {
        let pts: Vec<Point> = t.iter().map(|&s| bernstein_eval(&ctrl, s)).collect();
        let next = chord_params_oracle(&pts);
        let delta = next.iter().zip(&t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        t = next;
        if delta < 1e-15 {
            break;
        }
    }
    let pts: Vec<Point> = t.iter().map(|&s| bernstein_eval(&ctrl, s)).collect();
    let lib_t = chord_length_params(&pts);
    for (a, b) in lib_t.iter().zip(&t) {
        assert!((a - b).abs() < 1e-12);
    }
    let fit = fit_points(&pts, 2).unwrap();
    let p1 = fit.curve.control_points()[1];
    assert!((p1.x - 5.0).abs() < 1e-3 && (p1.y - 10.0).abs() < 1e-3, "{p1:?}");
    assert!(fit.rms_residual < 1e-6, "{}", fit.rms_residual);
}

/// Label map of a filled ellipse.
fn ellipse_map(w: u32, h: u32, cx: f64, cy: f64, a: f64, b: f64, rot: f64) -> LabelMap {
    let (s, c) = rot.sin_cos();
    let mut labels = vec![0u16; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let u = dx * c + dy * s;
            let v = -dx * s + dy * c;
            if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                labels[(y * w + x) as usize] = 1;
            }
        }
    }
    LabelMap::new(w, h, labels).unwrap()
}

fn unit(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn residual_never_grows_with_order_on_convex_contours() {
    let mut rng = SplitMix64::new(17);
    for case in 0..100 {
        let a = 6.0 + 20.0 * unit(&mut rng);
        let b = 6.0 + 20.0 * unit(&mut rng);
        let rot = std::f64::consts::PI * unit(&mut rng);
        let map = ellipse_map(64, 64, 32.0 + 2.0 * unit(&mut rng), 32.0 + 2.0 * unit(&mut rng), a, b, rot);
        let contours = trace_external_contours(&map);
        assert_eq!(contours.len(), 1, "case {case}");
        let pts = contours[0].fit_points();
        let params = chord_length_params(&pts);
        let mut prev = f64::INFINITY;
        for n in 1..=10 {
            let fit = fit_points_with_params(&pts, &params, n).unwrap();
            assert!(fit.rms_residual <= prev + 1e-9, "case {case} order {n}: {} > {prev}", fit.rms_residual);
            prev = fit.rms_residual;
        }
    }
}

#[test]
fn circle_fits_within_two_pixels_at_order_eight() {
    let map = ellipse_map(64, 64, 32.0, 32.0, 20.0, 20.0, 0.0);
    let contour = &trace_external_contours(&map)[0];
    let fit = fit_points(&contour.fit_points(), 8).unwrap();
    assert!(fit.rms_residual < 2.0, "{}", fit.rms_residual);
}

fn point_strategy() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 12..40)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fit_commutes_with_affine_maps(
        pts in point_strategy(),
        m in prop::array::uniform4(-2.0f64..2.0),
        t in prop::array::uniform2(-50.0f64..50.0),
        order in 1usize..8,
    ) {
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.1);
        let f = |p: Point| Point::new(m[0] * p.x + m[1] * p.y + t[0], m[2] * p.x + m[3] * p.y + t[1]);
        let params = chord_length_params(&pts);
        let fitted = fit_points_with_params(&pts, &params, order).unwrap().curve;
        let moved: Vec<Point> = pts.iter().map(|&p| f(p)).collect();
        let fit_moved = fit_points_with_params(&moved, &params, order).unwrap().curve;
        for (a, b) in fitted.map_points(f).control_points().iter().zip(fit_moved.control_points()) {
            prop_assert!(a.dist(*b) < 1e-6, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn endpoints_are_pinned(pts in point_strategy(), order in 1usize..10) {
        let fit = fit_points(&pts, order).unwrap();
        let c = fit.curve.control_points();
        prop_assert!(c[0].dist(pts[0]) < 1e-9);
        prop_assert!(c[c.len() - 1].dist(*pts.last().unwrap()) < 1e-9);
        prop_assert!(fit.curve.eval(0.0).dist(pts[0]) < 1e-9);
        prop_assert!(fit.curve.eval(1.0).dist(*pts.last().unwrap()) < 1e-9);
    }

    #[test]
    fn de_casteljau_matches_bernstein(
        ctrl in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..12),
        t in 0.0f64..=1.0,
    ) {
        let ctrl: Vec<Point> = ctrl.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let curve = BezierCurve::new(ctrl.clone()).unwrap();
        prop_assert!(curve.eval(t).dist(bernstein_eval(&ctrl, t)) < 1e-9);
        let up = curve.elevate_to(curve.order() + 3).unwrap();
        prop_assert!(up.eval(t).dist(curve.eval(t)) < 1e-9);
    }

    #[test]
    fn traced_contours_are_component_boundaries(
        w in 1u32..24,
        h in 1u32..24,
        seed in any::<u64>(),
        ids in 1u16..4,
    ) {
        let mut rng = SplitMix64::new(seed);
        let labels: Vec<u16> = (0..w * h).map(|_| (rng.next_u64() % u64::from(ids + 1)) as u16).collect();
        let map = LabelMap::new(w, h, labels.clone()).unwrap();
        let contours = trace_external_contours(&map);
        let at = |x: i64, y: i64| -> Option<u16> {
            (x >= 0 && y >= 0 && x < i64::from(w) && y < i64::from(h)).then(|| labels[(y as u32 * w + x as u32) as usize])
        };
        for c in &contours {
            prop_assert!(c.segment_id != 0);
            prop_assert!(!c.points.is_empty());
            for &(x, y) in &c.points {
                let (x, y) = (i64::from(x), i64::from(y));
                prop_assert_eq!(at(x, y), Some(c.segment_id));
                let on_edge = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|&(dx, dy)| at(x + dx, y + dy) != Some(c.segment_id));
                prop_assert!(on_edge, "({x},{y}) is interior");
            }
            for pair in c.points.windows(2) {
                let dx = (i64::from(pair[0].0) - i64::from(pair[1].0)).abs();
                let dy = (i64::from(pair[0].1) - i64::from(pair[1].1)).abs();
                prop_assert!(dx <= 1 && dy <= 1 && dx + dy > 0);
            }
        }
        prop_assert_eq!(contours.len(), count_components(w, h, &labels));
    }
}

/// Number of 8-connected non-background components, by flood fill.
fn count_components(w: u32, h: u32, labels: &[u16]) -> usize {
    let (w, h) = (w as i64, h as i64);
    let mut seen = vec![false; labels.len()];
    let mut count = 0;
    for start in 0..labels.len() {
        if labels[start] == 0 || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (x, y) = (i as i64 % w, i as i64 / w);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if !seen[j] && labels[j] == labels[start] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
    }
    count
}

fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let directed = |p: &[(f64, f64)], q: &[(f64, f64)]| {
        p.iter()
            .map(|&(x, y)| q.iter().map(|&(u, v)| ((x - u).powi(2) + (y - v).powi(2)).sqrt()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Filled convex polygon with the given vertices around (48, 48).
fn polygon_map(verts: &[(f64, f64)]) -> LabelMap {
    let mut labels = vec![0u16; 96 * 96];
    for y in 0..96 {
        for x in 0..96 {
            let (px, py) = (x as f64 - 48.0, y as f64 - 48.0);
            let inside = (0..verts.len()).all(|k| {
                let (ax, ay) = verts[k];
                let (bx, by) = verts[(k + 1) % verts.len()];
                (bx - ax) * (py - ay) - (by - ay) * (px - ax) >= 0.0
            });
            if inside {
                labels[y * 96 + x] = 1;
            }
        }
    }
    LabelMap::new(96, 96, labels).unwrap()
}

fn round_trip_distance(map: &LabelMap) -> f64 {
    let meta = VideoMeta::new(96, 96, 1, 2).unwrap();
    let contour = &trace_external_contours(map)[0];
    assert!(contour.points.len() <= 200);
    let truth: Vec<(f64, f64)> = contour.points.iter().map(|&(x, y)| (f64::from(x), f64::from(y))).collect();
    let img = render_seg_frame(&encode_seg_frame_with(map, 1, 8).unwrap(), &meta);
    let drawn: Vec<(f64, f64)> = img
        .pixels()
        .filter(|&(_, _, c)| c != [0, 0, 0])
        .map(|(x, y, _)| (f64::from(x), f64::from(y)))
        .collect();
    hausdorff(&truth, &drawn)
}

#[test]
fn coded_ellipses_stay_within_three_pixels() {
    let mut rng = SplitMix64::new(5);
    for case in 0..40 {
        let b = 8.0 + 14.0 * unit(&mut rng);
        let a = b * (1.0 + 1.5 * unit(&mut rng));
        let rot = std::f64::consts::PI * unit(&mut rng);
        let map = ellipse_map(96, 96, 48.0, 48.0, a.min(30.0), b, rot);
        let d = round_trip_distance(&map);
        assert!(d <= 3.0, "case {case}: a={a:.1} b={b:.1} hausdorff {d:.2}");
    }
}

#[test]
fn coded_polygons_stay_within_three_pixels() {
    let mut rng = SplitMix64::new(6);
    for case in 0..40 {
        let sides = 4 + (rng.next_u64() % 5) as usize;
        let aspect = 1.0 + 0.5 * unit(&mut rng);
        let r = 10.0 + 10.0 * unit(&mut rng);
        let (phase, rot) = (unit(&mut rng), std::f64::consts::PI * unit(&mut rng));
        let verts: Vec<(f64, f64)> = (0..sides)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / sides as f64 + phase;
                let (x, y) = (r * aspect.sqrt() * t.cos(), r / aspect.sqrt() * t.sin());
                (x * rot.cos() - y * rot.sin(), x * rot.sin() + y * rot.cos())
            })
            .collect();
        let d = round_trip_distance(&polygon_map(&verts));
        assert!(d <= 3.0, "case {case}: {sides} sides aspect {aspect:.2} hausdorff {d:.2}");
    }
}

#[test]
fn coded_circle_stays_within_three_pixels() {
    let d = round_trip_distance(&ellipse_map(96, 96, 48.0, 48.0, 20.0, 20.0, 0.0));
    assert!(d <= 3.0, "{d}");
}
