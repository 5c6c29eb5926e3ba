//! Adaptive Gauss–Kronrod quadrature, one-dimensional and iterated.
//!
//! Each panel is integrated with a Gauss rule and its Kronrod extension; the
//! difference between the two levels is the panel's error estimate. Panels
//! with the largest estimate are bisected until the total estimate meets the
//! tolerance or every remaining panel has reached the depth limit. Panel sums
//! are reduced left to right with compensated summation, so results do not
//! depend on the order in which panels were refined.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

#[rustfmt::skip]
#[allow(clippy::excessive_precision)]
const GK15: [[f64; 3]; 8] = [
    [0.9914553711208126392069, 0.02293532201052922496373, 0.0],
    [0.9491079123427585245262, 0.0630920926299785532907, 0.1294849661688696932706],
    [0.8648644233597690727897, 0.1047900103222501838399, 0.0],
    [0.7415311855993944398639, 0.1406532597155259187452, 0.2797053914892766679015],
    [0.5860872354676911302941, 0.1690047266392679028266, 0.0],
    [0.4058451513773971669066, 0.1903505780647854099133, 0.3818300505051189449504],
    [0.2077849550078984676007, 0.2044329400752988924142, 0.0],
    [0.0, 0.209482141084727828013, 0.4179591836734693877551],
];
#[rustfmt::skip]
#[allow(clippy::excessive_precision)]
const GK21: [[f64; 3]; 11] = [
    [0.9956571630258080807355, 0.01169463886737187427806, 0.0],
    [0.973906528517171720078, 0.03255816230796472747882, 0.06667134430868813759357],
    [0.9301574913557082260012, 0.05475589657435199603138, 0.0],
    [0.8650633666889845107321, 0.07503967481091995276704, 0.1494513491505805931458],
    [0.7808177265864168970637, 0.09312545458369760553507, 0.0],
    [0.6794095682990244062343, 0.1093871588022976418992, 0.2190863625159820439955],
    [0.562757134668604683339, 0.123491976262065851078, 0.0],
    [0.4333953941292471907993, 0.1347092173114733259281, 0.2692667193099963550912],
    [0.2943928627014601981311, 0.1427759385770600807971, 0.0],
    [0.1488743389816312108848, 0.1477391049013384913748, 0.2955242247147528701739],
    [0.0, 0.1494455540029169056649, 0.0],
];
#[rustfmt::skip]
#[allow(clippy::excessive_precision)]
const GK31: [[f64; 3]; 16] = [
    [0.9980022986933970602852, 0.005377479872923348987792, 0.0],
    [0.9879925180204854284896, 0.01500794732931612253837, 0.03075324199611726835463],
    [0.9677390756791391342573, 0.02546084732671532018687, 0.0],
    [0.9372733924007059043078, 0.03534636079137584622204, 0.07036604748810812470927],
    [0.8972645323440819008825, 0.04458975132476487660823, 0.0],
    [0.8482065834104272162006, 0.05348152469092808726534, 0.1071592204671719350119],
    [0.7904185014424659329676, 0.06200956780067064028514, 0.0],
    [0.7244177313601700474162, 0.06985412131872825870952, 0.1395706779261543144478],
    [0.6509967412974169705337, 0.07684968075772037889443, 0.0],
    [0.5709721726085388475372, 0.08308050282313302103829, 0.1662692058169939335532],
    [0.4850818636402396806937, 0.08856444305621177064728, 0.0],
    [0.3941513470775633698972, 0.09312659817082532122549, 0.1861610000155622110268],
    [0.2991800071531688121668, 0.09664272698362367850518, 0.0],
    [0.2011940939974345223006, 0.09917359872179195933239, 0.1984314853271115764561],
    [0.1011420669187174990271, 0.1007698455238755950449, 0.0],
    [0.0, 0.1013300070147915490174, 0.2025782419255612728806],
];

/// A Gauss–Kronrod pair; rows are `[node, kronrod weight, gauss weight]` for
/// the nonnegative nodes in decreasing order, centre last.
#[derive(Clone, Copy, Debug)]
pub struct GaussKronrod {
    rows: &'static [[f64; 3]],
}

impl GaussKronrod {
    pub const SUPPORTED: [usize; 3] = [15, 21, 31];

    /// The rule with `points` Kronrod nodes (15, 21 or 31).
    pub fn with_points(points: usize) -> Option<Self> {
        let rows: &'static [[f64; 3]] = match points {
            15 => &GK15,
            21 => &GK21,
            31 => &GK31,
            _ => return None,
        };
        Some(Self { rows })
    }

    pub fn points(&self) -> usize {
        2 * self.rows.len() - 1
    }

    /// Kronrod value, Gauss value and summed inner error on `[a, b]`.
    fn panel<V: QuadValue>(
        &self,
        f: &mut dyn FnMut(f64) -> Estimate<V>,
        a: f64,
        b: f64,
    ) -> Panel<V> {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut kron = V::default();
        let mut gauss = V::default();
        let mut inner_err = 0.0;
        let mut evals = 0;
        let mut exhausted = false;
        let mut take = |x: f64, wk: f64, wg: f64, kron: &mut V, gauss: &mut V| {
            let e = f(x);
            *kron = *kron + e.value * wk;
            if wg != 0.0 {
                *gauss = *gauss + e.value * wg;
            }
            inner_err += wk * e.err;
            evals += e.evals.max(1);
            exhausted |= e.exhausted;
        };
        let last = self.rows.len() - 1;
        for (i, &[x, wk, wg]) in self.rows.iter().enumerate() {
            if i == last {
                take(c, wk, wg, &mut kron, &mut gauss);
            } else {
                take(c - h * x, wk, wg, &mut kron, &mut gauss);
                take(c + h * x, wk, wg, &mut kron, &mut gauss);
            }
        }
        let value = kron * h;
        Panel {
            a,
            b,
            depth: 0,
            value,
            err: (kron - gauss).norm() * h,
            inner_err: inner_err * h,
            evals,
            exhausted,
        }
    }
}

/// Values the integrators can accumulate.
pub trait QuadValue:
    Copy + Default + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

/// An integral estimate with its error estimate and bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<V> {
    pub value: V,
    pub err: f64,
    pub evals: u64,
    /// Set when some refinement stopped at a budget limit without meeting its tolerance.
    pub exhausted: bool,
}

impl<V: QuadValue> Estimate<V> {
    pub fn exact(value: V) -> Self {
        Self { value, err: 0.0, evals: 1, exhausted: false }
    }

    pub fn zero() -> Self {
        Self { value: V::default(), err: 0.0, evals: 0, exhausted: false }
    }

    pub fn scale(self, s: f64) -> Self {
        Self { value: self.value * s, err: self.err * s.abs(), ..self }
    }

    pub fn plus(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            err: self.err + other.err,
            evals: self.evals + other.evals,
            exhausted: self.exhausted || other.exhausted,
        }
    }

    pub fn minus(self, other: Self) -> Self {
        Self {
            value: self.value - other.value,
            err: self.err + other.err,
            evals: self.evals + other.evals,
            exhausted: self.exhausted || other.exhausted,
        }
    }
}

/// Stopping rule shared by every level of an iterated integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Maximum bisection depth of a single panel.
    pub max_depth: u32,
    /// Maximum number of panels in one one-dimensional pass.
    pub max_panels: usize,
}

impl Tolerance {
    /// Tolerance handed to the next inner level of an iterated integral.
    pub fn inner(&self, outer_length: f64) -> Self {
        Self {
            rel: (self.rel * INNER_TIGHTENING).max(MIN_REL_TOL),
            abs: self.abs * INNER_TIGHTENING / outer_length.max(1.0),
            ..*self
        }
    }
}

const INNER_TIGHTENING: f64 = 0.1;
const MIN_REL_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug)]
struct Panel<V> {
    a: f64,
    b: f64,
    depth: u32,
    value: V,
    err: f64,
    inner_err: f64,
    evals: u64,
    exhausted: bool,
}

struct ByError {
    err: f64,
    idx: usize,
}

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ByError {}
impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties go to the leftmost-created panel so refinement is deterministic
        self.err.total_cmp(&other.err).then(other.idx.cmp(&self.idx))
    }
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Default)]
pub struct CompensatedSum<V> {
    sum: V,
    carry: V,
}

impl<V: QuadValue> CompensatedSum<V> {
    pub fn add(&mut self, x: V) {
        let t = self.sum + x;
        if self.sum.norm() >= x.norm() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> V {
        self.sum + self.carry
    }
}

/// Integrates `f` over `[a, b]`. The integrand may itself be an estimate (an
/// inner integral); its error estimates are propagated but do not drive refinement.
pub fn integrate<V: QuadValue>(
    f: &mut dyn FnMut(f64) -> Estimate<V>,
    a: f64,
    b: f64,
    rule: &GaussKronrod,
    tol: &Tolerance,
) -> Estimate<V> {
    // also catches NaN endpoints
    if b.partial_cmp(&a) != Some(std::cmp::Ordering::Greater) {
        return Estimate::zero();
    }
    let mut panels = vec![rule.panel(f, a, b)];
    let mut heap = BinaryHeap::new();
    heap.push(ByError { err: panels[0].err, idx: 0 });
    let mut value = panels[0].value;
    let mut disc_err = panels[0].err;
    let mut met = false;

    loop {
        if disc_err <= tol.abs.max(tol.rel * value.norm()) {
            met = true;
            break;
        }
        let Some(ByError { idx, .. }) = heap.pop() else {
            break;
        };
        if panels.len() >= tol.max_panels {
            break;
        }
        let p = panels[idx];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // cannot bisect further in floating point
            continue;
        }
        let mut left = rule.panel(f, p.a, mid);
        let mut right = rule.panel(f, mid, p.b);
        left.depth = p.depth + 1;
        right.depth = p.depth + 1;
        value = value - p.value + left.value + right.value;
        disc_err += left.err + right.err - p.err;
        // keep the parent's evaluations in the count
        left.evals += p.evals;
        panels[idx] = left;
        panels.push(right);
        let ridx = panels.len() - 1;
        for (i, child) in [(idx, &left), (ridx, &right)] {
            if child.depth < tol.max_depth {
                heap.push(ByError { err: child.err, idx: i });
            }
        }
    }

    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut sum = CompensatedSum::default();
    let mut err = 0.0;
    let mut evals = 0;
    let mut exhausted = !met;
    for p in &panels {
        sum.add(p.value);
        err += p.err + p.inner_err;
        evals += p.evals;
        exhausted |= p.exhausted;
    }
    Estimate { value: sum.total(), err, evals, exhausted }
}

/// Iterated integral over the box `bounds[0] × bounds[1] × …`, outermost
/// coordinate first. `rules[k]` integrates coordinate `k`; the tolerance is
/// tightened at each inner level.
pub fn integrate_box<V: QuadValue>(
    leaf: &mut dyn FnMut(&[f64]) -> Estimate<V>,
    bounds: &[(f64, f64)],
    rules: &[GaussKronrod],
    tol: &Tolerance,
) -> Estimate<V> {
    assert_eq!(bounds.len(), rules.len(), "one rule per coordinate");
    let mut point = vec![0.0; bounds.len()];
    nested_level(leaf, bounds, rules, tol, 0, &mut point)
}

fn nested_level<V: QuadValue>(
    leaf: &mut dyn FnMut(&[f64]) -> Estimate<V>,
    bounds: &[(f64, f64)],
    rules: &[GaussKronrod],
    tol: &Tolerance,
    level: usize,
    point: &mut Vec<f64>,
) -> Estimate<V> {
    if level == bounds.len() {
        return leaf(point);
    }
    let (a, b) = bounds[level];
    let inner = tol.inner(b - a);
    let mut f = |x: f64| {
        point[level] = x;
        nested_level(leaf, bounds, rules, &inner, level + 1, point)
    };
    integrate(&mut f, a, b, &rules[level], tol)
}
