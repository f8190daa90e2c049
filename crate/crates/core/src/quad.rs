//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error meets the tolerance. Running out of subintervals is an error, never a
//! silently degraded result.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_745_109_687,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions<F> {
    pub rel_tol: F,
    pub abs_tol: F,
    pub max_intervals: usize,
}

impl<F: Scalar> Default for QuadOptions<F> {
    fn default() -> Self {
        Self { rel_tol: F::lit(F::QUAD_RTOL), abs_tol: F::zero(), max_intervals: 4000 }
    }
}

impl<F: Scalar> QuadOptions<F> {
    pub fn with_rel_tol(rel_tol: F) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<F> {
    pub value: F,
    pub error: F,
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment<F> {
    a: F,
    b: F,
    value: F,
    error: F,
}

impl<F: Scalar> PartialEq for Segment<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<F: Scalar> Eq for Segment<F> {}

impl<F: Scalar> PartialOrd for Segment<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Scalar> Ord for Segment<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn rescale_error<F: Scalar>(err: F, res_abs: F, res_asc: F) -> F {
    let mut scaled = err.abs();
    if res_asc != F::zero() && scaled != F::zero() {
        let scale = (F::lit(200.0) * scaled / res_asc).powf(F::lit(1.5));
        scaled = if scale < F::one() { res_asc * scale } else { res_asc };
    }
    let eps50 = F::lit(50.0) * F::epsilon();
    if res_abs > F::min_positive_value() / eps50 {
        scaled = scaled.max(eps50 * res_abs);
    }
    scaled
}

/// One 21-point Gauss–Kronrod panel on `[a, b]`: `(value, error estimate)`.
pub fn gauss_kronrod_21<F: Scalar, G: FnMut(F) -> F>(f: &mut G, a: F, b: F) -> (F, F) {
    let half = F::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);
    let mut res_gauss = F::zero();
    let mut res_kronrod = f_center * F::lit(WGK[10]);
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [F::zero(); 10];
    let mut fv2 = [F::zero(); 10];
    for j in 0..10 {
        let x = half_len * F::lit(XGK[j]);
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = F::lit(WGK[j]);
        res_kronrod = res_kronrod + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss = res_gauss + F::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_kronrod * half;
    let mut res_asc = F::lit(WGK[10]) * (f_center - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + F::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half_len.abs();
    let value = res_kronrod * half_len;
    let err = rescale_error((res_kronrod - res_gauss) * half_len, res_abs * abs_half, res_asc * abs_half);
    (value, err)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Scalar, G: FnMut(F) -> F>(f: G, a: F, b: F, opts: &QuadOptions<F>) -> Result<QuadResult<F>> {
    integrate_with_breakpoints(f, &[a, b], opts)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by the sorted `points` (kinks and endpoint singularities belong
/// there).
pub fn integrate_with_breakpoints<F: Scalar, G: FnMut(F) -> F>(
    mut f: G,
    points: &[F],
    opts: &QuadOptions<F>,
) -> Result<QuadResult<F>> {
    if points.len() < 2 {
        return Err(invalid("quadrature needs at least two points"));
    }
    if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(invalid("quadrature breakpoints must be finite and sorted"));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (value, error) = gauss_kronrod_21(&mut f, w[0], w[1]);
        evaluations += 21;
        heap.push(Segment { a: w[0], b: w[1], value, error });
    }
    if heap.is_empty() {
        return Ok(QuadResult { value: F::zero(), error: F::zero(), intervals: 0, evaluations });
    }

    let totals = |heap: &BinaryHeap<Segment<F>>| {
        // sum in a fixed order so results do not depend on heap layout
        let mut segs: Vec<&Segment<F>> = heap.iter().collect();
        segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
        let value: F = segs.iter().map(|s| s.value).sum();
        let error: F = segs.iter().map(|s| s.error).sum();
        (value, error)
    };

    let mut running_value: F = heap.iter().map(|s| s.value).sum();
    let mut running_error: F = heap.iter().map(|s| s.error).sum();
    loop {
        if !running_value.is_finite() || !running_error.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                intervals: heap.len(),
                estimate: running_value.to_f64_lossy(),
                error: running_error.to_f64_lossy(),
            });
        }
        if running_error <= opts.abs_tol.max(opts.rel_tol * running_value.abs()) {
            // re-sum exactly before the final test to shed drift from updates
            let (value, error) = totals(&heap);
            if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
                return Ok(QuadResult { value, error, intervals: heap.len(), evaluations });
            }
            running_value = value;
            running_error = error;
        }
        if heap.len() >= opts.max_intervals {
            let (value, error) = totals(&heap);
            return Err(Error::QuadratureNonConvergence {
                intervals: heap.len(),
                estimate: value.to_f64_lossy(),
                error: error.to_f64_lossy(),
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = F::lit(0.5) * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel at floating-point resolution; nothing left to refine
            let (value, error) = totals(&heap);
            return Err(Error::QuadratureNonConvergence {
                intervals: heap.len() + 1,
                estimate: (value + worst.value).to_f64_lossy(),
                error: (error + worst.error).to_f64_lossy(),
            });
        }
        let (v1, e1) = gauss_kronrod_21(&mut f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_21(&mut f, mid, worst.b);
        evaluations += 42;
        running_value = running_value - worst.value + v1 + v2;
        running_error = running_error - worst.error + e1 + e2;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
}
