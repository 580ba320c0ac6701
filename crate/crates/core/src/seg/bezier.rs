//! Least-squares Bézier fitting with chord-length parameters and pinned
//! endpoints.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

/// Bézier curve of order `control_points.len() - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BezierCurve {
    control_points: Vec<Point>,
}

impl BezierCurve {
    pub fn new(control_points: Vec<Point>) -> Result<Self> {
        if control_points.len() < 2 {
            return Err(Error::invalid(format!(
                "a Bézier curve needs at least 2 control points, got {}",
                control_points.len()
            )));
        }
        Ok(BezierCurve { control_points })
    }

    /// Curve of the given order that stays at `p`.
    pub fn constant(p: Point, order: usize) -> Self {
        BezierCurve {
            control_points: vec![p; order.max(1) + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.control_points.len() - 1
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control_points
    }

    /// De Casteljau evaluation.
    pub fn eval(&self, t: f64) -> Point {
        let mut pts = self.control_points.clone();
        for k in (1..pts.len()).rev() {
            for i in 0..k {
                pts[i] = pts[i].lerp(pts[i + 1], t);
            }
        }
        pts[0]
    }

    /// Raises the order without changing the curve.
    pub fn elevate_to(&self, order: usize) -> Result<BezierCurve> {
        if order < self.order() {
            return Err(Error::invalid(format!(
                "cannot elevate order {} down to {order}",
                self.order()
            )));
        }
        let mut pts = self.control_points.clone();
        while pts.len() - 1 < order {
            let k = pts.len(); // new order
            let mut next = Vec::with_capacity(k + 1);
            next.push(pts[0]);
            for i in 1..k {
                let a = i as f64 / k as f64;
                next.push(pts[i - 1].lerp(pts[i], 1.0 - a));
            }
            next.push(pts[k - 1]);
            pts = next;
        }
        Ok(BezierCurve {
            control_points: pts,
        })
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> BezierCurve {
        BezierCurve {
            control_points: self.control_points.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Result of [`fit_points`].
#[derive(Debug, Clone, PartialEq)]
pub struct BezierFit {
    pub curve: BezierCurve,
    pub rms_residual: f64,
    /// Order asked for. The curve's order is lower when there were too few
    /// samples to determine it.
    pub requested_order: usize,
}

impl BezierFit {
    pub fn reduced(&self) -> bool {
        self.curve.order() < self.requested_order
    }
}

/// Normalized cumulative chord length. Degenerate polylines (all points
/// equal) get uniform parameters.
pub fn chord_length_params(points: &[Point]) -> Vec<f64> {
    let mut acc = Vec::with_capacity(points.len());
    let mut total = 0.0;
    acc.push(0.0);
    for w in points.windows(2) {
        total += w[0].dist(w[1]);
        acc.push(total);
    }
    if total > 0.0 {
        acc.iter().map(|d| d / total).collect()
    } else if points.len() > 1 {
        let last = (points.len() - 1) as f64;
        (0..points.len()).map(|j| j as f64 / last).collect()
    } else {
        vec![0.0]
    }
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for i in 1..n {
        row[i] = row[i - 1] * (n - i + 1) as f64 / i as f64;
    }
    row
}

fn bernstein(n: usize, t: f64, binom: &[f64]) -> Vec<f64> {
    let s = 1.0 - t;
    (0..=n)
        .map(|i| binom[i] * s.powi((n - i) as i32) * t.powi(i as i32))
        .collect()
}

/// Fits an order-`order` curve through `points` with chord-length parameters.
pub fn fit_points(points: &[Point], order: usize) -> Result<BezierFit> {
    let params = chord_length_params(points);
    fit_points_with_params(points, &params, order)
}

/// Fits with caller-supplied parameters `params[j] ∈ [0,1]` for `points[j]`.
///
/// The first and last control points are pinned to the first and last
/// sample; the interior ones minimize `Σ ‖B(t_j) − q_j‖²`. If there are
/// fewer than `order + 1` samples the order is reduced to `samples − 1`.
pub fn fit_points_with_params(
    points: &[Point],
    params: &[f64],
    order: usize,
) -> Result<BezierFit> {
    if points.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 points to fit a curve, got {}",
            points.len()
        )));
    }
    if order == 0 {
        return Err(Error::invalid("Bézier order must be at least 1"));
    }
    if params.len() != points.len() {
        return Err(Error::invalid("parameter count does not match point count"));
    }
    let n = order.min(points.len() - 1);
    let first = points[0];
    let last = points[points.len() - 1];

    let mut control = vec![first; n + 1];
    control[n] = last;
    if n >= 2 {
        let binom = binomial_row(n);
        let m = points.len();
        let unknowns = n - 1;
        let mut a = DMatrix::<f64>::zeros(m, unknowns);
        let mut rhs = DMatrix::<f64>::zeros(m, 2);
        for (j, (&q, &t)) in points.iter().zip(params).enumerate() {
            let b = bernstein(n, t, &binom);
            for i in 1..n {
                a[(j, i - 1)] = b[i];
            }
            rhs[(j, 0)] = q.x - b[0] * first.x - b[n] * last.x;
            rhs[(j, 1)] = q.y - b[0] * first.y - b[n] * last.y;
        }
        let svd = a.svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::invalid(format!("least-squares solve failed: {e}")))?;
        for i in 1..n {
            control[i] = Point::new(sol[(i - 1, 0)], sol[(i - 1, 1)]);
        }
    }
    let curve = BezierCurve {
        control_points: control,
    };
    let sq: f64 = points
        .iter()
        .zip(params)
        .map(|(&q, &t)| {
            let p = curve.eval(t);
            (p.x - q.x).powi(2) + (p.y - q.y).powi(2)
        })
        .sum();
    Ok(BezierFit {
        curve,
        rms_residual: (sq / points.len() as f64).sqrt(),
        requested_order: order,
    })
}
