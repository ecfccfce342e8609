//! Colored point sets, rectangles, and matching feasibility.
//!
//! Rectangles are closed. Two rectangles that touch on the boundary
//! intersect. A matching is stored as index pairs; the rectangle of a pair
//! is the bounding box of its two points, which loses no generality: any
//! rectangle covering exactly two points contains their bounding box.

mod csv;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub use self::csv::{read_instance_csv, write_instance_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    /// Encoded as 0.
    Red,
    /// Encoded as 1.
    Blue,
}

impl Color {
    pub fn code(self) -> u8 {
        match self {
            Color::Red => 0,
            Color::Blue => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Color> {
        match c {
            0 => Some(Color::Red),
            1 => Some(Color::Blue),
            _ => None,
        }
    }

    pub fn flipped(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Blue => 'B',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColoredPoint {
    pub x: f64,
    pub y: f64,
    pub color: Color,
}

impl ColoredPoint {
    pub fn new(x: f64, y: f64, color: Color) -> Self {
        ColoredPoint { x, y, color }
    }
}

/// How an instance's coordinates were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointModel {
    /// x and y i.i.d. uniform on [0,1].
    UniformSquare,
    /// Point i (1-based) sits at x = i/n, y uniform.
    GridX,
    /// Supplied by the caller (files, hand-built fixtures, sub-instances).
    Explicit,
}

/// A colored point set in general position, sorted by x.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    points: Vec<ColoredPoint>,
    model: PointModel,
    seed: Option<u64>,
    retries: u32,
}

impl Instance {
    /// Builds an explicit instance. Points are sorted by x; coordinates must
    /// lie in [0,1] and be pairwise distinct in each axis.
    pub fn new(mut points: Vec<ColoredPoint>) -> Result<Instance> {
        for (i, p) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
                return Err(Error::InvalidParameter(format!(
                    "point {i} = ({}, {}) lies outside the unit square",
                    p.x, p.y
                )));
            }
        }
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
        check_general_position(&points)?;
        Ok(Instance { points, model: PointModel::Explicit, seed: None, retries: 0 })
    }

    pub fn points(&self) -> &[ColoredPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &ColoredPoint {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn model(&self) -> PointModel {
        self.model
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Number of coordinate redraws needed to reach general position.
    pub fn retries(&self) -> u32 {
        self.retries
    }

    pub fn red_count(&self) -> usize {
        self.points.iter().filter(|p| p.color == Color::Red).count()
    }

    /// Points with x-rank in `range`, as an explicit instance.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Instance {
        Instance { points: self.points[range].to_vec(), model: PointModel::Explicit, seed: None, retries: 0 }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.points.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.points.len() });
        }
        Ok(())
    }

    /// Moves point `i` vertically to `y`. x order is unaffected.
    pub fn perturb_y(&self, i: usize, y: f64) -> Result<Instance> {
        self.check_index(i)?;
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidParameter(format!("y = {y} outside [0,1]")));
        }
        if let Some(j) = self.points.iter().enumerate().position(|(j, p)| j != i && p.y == y) {
            return Err(Error::GeneralPositionViolation(format!("y = {y} already used by point {j}")));
        }
        let mut out = self.clone();
        out.points[i].y = y;
        Ok(out)
    }

    pub fn flip_color(&self, i: usize) -> Result<Instance> {
        self.check_index(i)?;
        let mut out = self.clone();
        out.points[i].color = out.points[i].color.flipped();
        Ok(out)
    }

    /// Applies a strictly increasing map to one coordinate axis of every point.
    pub fn apply_monotone_map(&self, map: MonotoneMap, axis: Axis) -> Result<Instance> {
        let mut points = self.points.clone();
        for p in &mut points {
            match axis {
                Axis::X => p.x = map.apply(p.x),
                Axis::Y => p.y = map.apply(p.y),
            }
        }
        check_general_position(&points)?;
        let model = match (axis, self.model) {
            (Axis::Y, m) => m,
            (Axis::X, _) => PointModel::Explicit,
        };
        Ok(Instance { points, model, seed: self.seed, retries: self.retries })
    }
}

fn check_general_position(points: &[ColoredPoint]) -> Result<()> {
    for w in points.windows(2) {
        if w[0].x >= w[1].x {
            return Err(Error::GeneralPositionViolation(format!("repeated x coordinate {}", w[1].x)));
        }
    }
    let mut ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    ys.sort_by(f64::total_cmp);
    if let Some(w) = ys.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::GeneralPositionViolation(format!("repeated y coordinate {}", w[0])));
    }
    Ok(())
}

/// Draws i.i.d. uniforms until all are distinct; returns the redraw count.
fn draw_distinct(rng: &mut crate::rng::Rng, n: usize) -> (Vec<f64>, u32) {
    let mut values: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let mut retries = 0;
    loop {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        match order.windows(2).find(|w| values[w[0]] == values[w[1]]) {
            Some(w) => {
                values[w[1]] = rng.random::<f64>();
                retries += 1;
            }
            None => return (values, retries),
        }
    }
}

/// Random instance of `n` points. Colors are fair coins (red iff the coin is 0).
///
/// Draw order from the seeded stream: x coordinates (uniform model only),
/// then y coordinates, then colors. Collisions are redrawn from the same
/// stream immediately after the coordinate block they occur in.
pub fn generate_instance(n: usize, seed: u64, model: PointModel) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut retries = 0;
    let xs = match model {
        PointModel::UniformSquare => {
            let (xs, r) = draw_distinct(&mut rng, n);
            retries += r;
            xs
        }
        PointModel::GridX => (1..=n).map(|i| i as f64 / n as f64).collect(),
        PointModel::Explicit => return Err(Error::InvalidParameter("explicit instances are not generated".into())),
    };
    let (ys, r) = draw_distinct(&mut rng, n);
    retries += r;
    let mut points: Vec<ColoredPoint> = (0..n)
        .map(|i| {
            let color = if rng.random::<bool>() { Color::Blue } else { Color::Red };
            ColoredPoint::new(xs[i], ys[i], color)
        })
        .collect();
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(Instance { points, model, seed: Some(seed), retries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotoneMap {
    /// t ↦ t³
    Cube,
    /// t ↦ √t
    Sqrt,
    /// t ↦ (t + 1) / 2
    AffineUp,
}

impl MonotoneMap {
    pub const ALL: [MonotoneMap; 3] = [MonotoneMap::Cube, MonotoneMap::Sqrt, MonotoneMap::AffineUp];

    pub fn apply(self, t: f64) -> f64 {
        match self {
            MonotoneMap::Cube => t * t * t,
            MonotoneMap::Sqrt => t.sqrt(),
            MonotoneMap::AffineUp => (t + 1.0) / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Closed axis-aligned rectangle. Degenerate (segment or point) rectangles are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Rect {
        debug_assert!(xmin <= xmax && ymin <= ymax);
        Rect { xmin, xmax, ymin, ymax }
    }

    pub fn contains(&self, p: &ColoredPoint) -> bool {
        self.xmin <= p.x && p.x <= self.xmax && self.ymin <= p.y && p.y <= self.ymax
    }
}

/// Smallest closed rectangle containing `p` and `q`.
pub fn bbox(p: &ColoredPoint, q: &ColoredPoint) -> Rect {
    Rect::new(p.x.min(q.x), p.x.max(q.x), p.y.min(q.y), p.y.max(q.y))
}

/// True iff the closed rectangles share no point.
pub fn rects_disjoint(a: &Rect, b: &Rect) -> bool {
    a.xmax < b.xmin || b.xmax < a.xmin || a.ymax < b.ymin || b.ymax < a.ymin
}

/// Indices of the points inside the closed rectangle, ascending.
pub fn points_in_rect(inst: &Instance, r: &Rect) -> Vec<usize> {
    let pts = inst.points();
    let lo = pts.partition_point(|p| p.x < r.xmin);
    let hi = pts.partition_point(|p| p.x <= r.xmax);
    (lo..hi).filter(|&i| r.contains(&pts[i])).collect()
}

/// A set of unordered index pairs. Pairs are kept as `(min, max)` in sorted order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Matching {
        let mut pairs: Vec<(usize, usize)> =
            pairs.into_iter().map(|(i, j)| if i <= j { (i, j) } else { (j, i) }).collect();
        pairs.sort_unstable();
        Matching { pairs }
    }

    pub fn empty() -> Matching {
        Matching::default()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of points covered: twice the number of pairs.
    pub fn matched_count(&self) -> usize {
        2 * self.pairs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A point appears in more than one pair (or twice in one pair).
    PointReused {
        point: usize,
        pairs: Vec<(usize, usize)>,
    },
    ColorMismatch {
        pair: (usize, usize),
    },
    /// The pair's bounding box covers a third point.
    ExtraPointCovered {
        pair: (usize, usize),
        point: usize,
    },
    RectanglesIntersect {
        first: (usize, usize),
        second: (usize, usize),
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    /// First violated invariant, checked in the order: point reuse,
    /// color, coverage, disjointness.
    pub violation: Option<Violation>,
}

pub fn validate_matching(inst: &Instance, m: &Matching) -> Result<ValidationReport> {
    let n = inst.len();
    for &(i, j) in m.pairs() {
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
    }
    let fail = |v| Ok(ValidationReport { valid: false, violation: Some(v) });

    let mut owner: Vec<Option<(usize, usize)>> = vec![None; n];
    for &pair in m.pairs() {
        for idx in [pair.0, pair.1] {
            match owner[idx] {
                Some(prev) => {
                    let pairs = if prev == pair { vec![pair] } else { vec![prev, pair] };
                    return fail(Violation::PointReused { point: idx, pairs });
                }
                None => owner[idx] = Some(pair),
            }
        }
    }
    for &(i, j) in m.pairs() {
        if inst.point(i).color != inst.point(j).color {
            return fail(Violation::ColorMismatch { pair: (i, j) });
        }
    }
    let rects: Vec<Rect> = m.pairs().iter().map(|&(i, j)| bbox(inst.point(i), inst.point(j))).collect();
    for (&(i, j), r) in m.pairs().iter().zip(&rects) {
        if let Some(k) = points_in_rect(inst, r).into_iter().find(|&k| k != i && k != j) {
            return fail(Violation::ExtraPointCovered { pair: (i, j), point: k });
        }
    }
    for a in 0..rects.len() {
        for b in a + 1..rects.len() {
            if !rects_disjoint(&rects[a], &rects[b]) {
                return fail(Violation::RectanglesIntersect { first: m.pairs()[a], second: m.pairs()[b] });
            }
        }
    }
    Ok(ValidationReport { valid: true, violation: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64, c: Color) -> ColoredPoint {
        ColoredPoint::new(x, y, c)
    }

    #[test]
    fn grid_single_point_at_one() {
        let inst = generate_instance(1, 9, PointModel::GridX).unwrap();
        assert_eq!(inst.point(0).x, 1.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_instance(5, 42, PointModel::UniformSquare).unwrap();
        let b = generate_instance(5, 42, PointModel::UniformSquare).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_instance(5, 43, PointModel::UniformSquare).unwrap());
    }

    #[test]
    fn zero_points_rejected() {
        assert!(generate_instance(0, 1, PointModel::GridX).is_err());
    }

    #[test]
    fn red_count_within_binomial_window() {
        // Binomial(10^4, 1/2): sigma = 50, window 4 sigma.
        let inst = generate_instance(10_000, 7, PointModel::UniformSquare).unwrap();
        let red = inst.red_count() as f64;
        assert!((red - 5000.0).abs() <= 4.0 * (10_000.0f64 * 0.25).sqrt(), "{red}");
    }

    #[test]
    fn grid_x_coordinates() {
        let inst = generate_instance(4, 3, PointModel::GridX).unwrap();
        let xs: Vec<f64> = inst.points().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn rejects_degenerate_input() {
        let dup_x = Instance::new(vec![pt(0.1, 0.2, Color::Red), pt(0.1, 0.3, Color::Red)]);
        assert!(matches!(dup_x, Err(Error::GeneralPositionViolation(_))));
        let dup_y = Instance::new(vec![pt(0.1, 0.2, Color::Red), pt(0.4, 0.2, Color::Red)]);
        assert!(matches!(dup_y, Err(Error::GeneralPositionViolation(_))));
        assert!(Instance::new(vec![pt(1.5, 0.2, Color::Red)]).is_err());
    }

    #[test]
    fn bbox_examples() {
        let r = bbox(&pt(0.1, 0.2, Color::Red), &pt(0.5, 0.8, Color::Red));
        assert_eq!(r, Rect::new(0.1, 0.5, 0.2, 0.8));
        let r = bbox(&pt(0.3, 0.3, Color::Red), &pt(0.3, 0.3, Color::Red));
        assert_eq!(r, Rect::new(0.3, 0.3, 0.3, 0.3));
        let r = bbox(&pt(0.2, 0.9, Color::Red), &pt(0.4, 0.1, Color::Blue));
        assert_eq!(r, Rect::new(0.2, 0.4, 0.1, 0.9));
    }

    #[test]
    fn disjointness_examples() {
        let a = Rect::new(0.0, 0.1, 0.0, 0.1);
        let b = Rect::new(0.2, 0.3, 0.2, 0.3);
        assert!(rects_disjoint(&a, &b));
        let c = Rect::new(0.0, 0.2, 0.0, 0.2);
        assert!(!rects_disjoint(&c, &b), "shared corner counts as contact");
        assert!(!rects_disjoint(&c, &c));
    }

    #[test]
    fn points_in_rect_examples() {
        let two = Instance::new(vec![pt(0.2, 0.3, Color::Red), pt(0.6, 0.7, Color::Red)]).unwrap();
        assert!(points_in_rect(&two, &Rect::new(0.8, 0.9, 0.0, 0.1)).is_empty());
        assert_eq!(points_in_rect(&two, &bbox(two.point(0), two.point(1))), vec![0, 1]);
        let mono =
            Instance::new(vec![pt(0.1, 0.1, Color::Red), pt(0.2, 0.2, Color::Blue), pt(0.3, 0.3, Color::Red)]).unwrap();
        assert_eq!(points_in_rect(&mono, &bbox(mono.point(0), mono.point(2))), vec![0, 1, 2]);
    }

    #[test]
    fn validate_examples() {
        let same = Instance::new(vec![pt(0.2, 0.3, Color::Red), pt(0.6, 0.7, Color::Red)]).unwrap();
        let m = Matching::new([(0, 1)]);
        assert!(validate_matching(&same, &m).unwrap().valid);

        let diff = Instance::new(vec![pt(0.2, 0.3, Color::Red), pt(0.6, 0.7, Color::Blue)]).unwrap();
        let rep = validate_matching(&diff, &m).unwrap();
        assert_eq!(rep.violation, Some(Violation::ColorMismatch { pair: (0, 1) }));

        let mono =
            Instance::new(vec![pt(0.1, 0.1, Color::Red), pt(0.2, 0.2, Color::Blue), pt(0.3, 0.3, Color::Red)]).unwrap();
        let rep = validate_matching(&mono, &Matching::new([(0, 2)])).unwrap();
        assert_eq!(rep.violation, Some(Violation::ExtraPointCovered { pair: (0, 2), point: 1 }));

        assert!(matches!(
            validate_matching(&same, &Matching::new([(0, 5)])),
            Err(Error::IndexOutOfRange { index: 5, len: 2 })
        ));
    }

    #[test]
    fn validate_reuse_and_intersection() {
        let inst = Instance::new(vec![
            pt(0.1, 0.1, Color::Red),
            pt(0.2, 0.5, Color::Red),
            pt(0.3, 0.3, Color::Blue),
            pt(0.4, 0.9, Color::Blue),
        ])
        .unwrap();
        let rep = validate_matching(&inst, &Matching::new([(0, 1), (1, 0)])).unwrap();
        assert!(matches!(rep.violation, Some(Violation::PointReused { point: 0, .. })));
        // [0.1,0.2]x[0.1,0.5] and [0.3,0.4]x[0.3,0.9] are disjoint in x.
        assert!(validate_matching(&inst, &Matching::new([(0, 1), (2, 3)])).unwrap().valid);

        let crossing = Instance::new(vec![
            pt(0.1, 0.5, Color::Red),
            pt(0.2, 0.1, Color::Blue),
            pt(0.3, 0.9, Color::Blue),
            pt(0.4, 0.6, Color::Red),
        ])
        .unwrap();
        let rep = validate_matching(&crossing, &Matching::new([(0, 3), (1, 2)])).unwrap();
        // (0,3) spans y in [0.5,0.6] and x in [0.1,0.4]: it covers neither 1 nor 2,
        // but it crosses the box of (1,2).
        assert_eq!(rep.violation, Some(Violation::RectanglesIntersect { first: (0, 3), second: (1, 2) }));
    }

    #[test]
    fn perturbation_and_flip() {
        let inst = generate_instance(6, 11, PointModel::GridX).unwrap();
        assert_eq!(inst.flip_color(2).unwrap().flip_color(2).unwrap(), inst);
        let y = inst.point(3).y;
        assert_eq!(inst.perturb_y(3, y).unwrap(), inst);
        let other = inst.point(1).y;
        assert!(matches!(inst.perturb_y(3, other), Err(Error::GeneralPositionViolation(_))));
        let moved = inst.perturb_y(3, 0.123456789).unwrap();
        assert_eq!(moved.point(3).y, 0.123456789);
        assert!(Instance::new(moved.points().to_vec()).is_ok());
        assert!(matches!(inst.flip_color(6), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn monotone_maps() {
        let inst = Instance::new(vec![pt(0.2, 0.1, Color::Red), pt(0.5, 0.7, Color::Blue)]).unwrap();
        let cubed = inst.apply_monotone_map(MonotoneMap::Cube, Axis::X).unwrap();
        assert!((cubed.point(0).x - 0.008).abs() < 1e-15);
        assert!((cubed.point(1).x - 0.125).abs() < 1e-15);
        let up = inst.apply_monotone_map(MonotoneMap::AffineUp, Axis::Y).unwrap();
        assert!(up.points().iter().all(|p| (0.0..=1.0).contains(&p.y)));
        assert_eq!(up.point(0).y, 0.55);
    }

    #[test]
    fn matched_count_examples() {
        assert_eq!(Matching::empty().matched_count(), 0);
        assert_eq!(Matching::new([(0, 1)]).matched_count(), 2);
        assert_eq!(Matching::new([(0, 1), (2, 3)]).matched_count(), 4);
    }

    proptest! {
        #[test]
        fn generated_instances_are_well_formed(n in 1usize..60, seed: u64, grid: bool) {
            let model = if grid { PointModel::GridX } else { PointModel::UniformSquare };
            let inst = generate_instance(n, seed, model).unwrap();
            prop_assert_eq!(inst.len(), n);
            prop_assert!(inst.points().windows(2).all(|w| w[0].x < w[1].x));
            prop_assert!(Instance::new(inst.points().to_vec()).is_ok());
            let blue = inst.points().iter().filter(|p| p.color == Color::Blue).count();
            prop_assert_eq!(inst.red_count() + blue, n);
            prop_assert!(validate_matching(&inst, &Matching::empty()).unwrap().valid);
            for i in 0..n {
                for j in i + 1..n {
                    let inside = points_in_rect(&inst, &bbox(inst.point(i), inst.point(j)));
                    prop_assert!(inside.contains(&i) && inside.contains(&j));
                }
            }
        }

        #[test]
        fn disjointness_is_symmetric(
            a in prop::array::uniform4(0.0f64..1.0),
            b in prop::array::uniform4(0.0f64..1.0),
        ) {
            let r1 = Rect::new(a[0].min(a[1]), a[0].max(a[1]), a[2].min(a[3]), a[2].max(a[3]));
            let r2 = Rect::new(b[0].min(b[1]), b[0].max(b[1]), b[2].min(b[3]), b[2].max(b[3]));
            prop_assert_eq!(rects_disjoint(&r1, &r2), rects_disjoint(&r2, &r1));
            prop_assert!(!rects_disjoint(&r1, &r1));
        }
    }
}
