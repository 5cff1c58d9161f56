//! Adaptive Gauss-Kronrod (G10/K21) quadrature over a list of pieces sharing
//! one global error heap.
//!
//! Endpoint singularities `(x-a)^e` are removed by `x = a + (b-a) t^q` with
//! `q = max(1, 2/(1+e))`. Pieces away from 0 whose endpoints differ by a
//! large factor are pre-split geometrically, which suits integrands that
//! behave like powers of `x`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Behaviour of the integrand at one end of a piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoint {
    Smooth,
    /// `|x - end|^e` with `e > -1`.
    Power(f64),
    /// `log |x - end|`.
    Log,
}

impl Endpoint {
    fn exponent(self) -> f64 {
        match self {
            Endpoint::Smooth => 1.0,
            Endpoint::Power(e) => e,
            Endpoint::Log => 0.0,
        }
    }

    fn mapping_power(self) -> f64 {
        match self {
            Endpoint::Smooth => 1.0,
            _ => (2.0 / (1.0 + self.exponent().max(-0.999))).max(1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_segments: 4000,
        }
    }
}

impl QuadOptions {
    pub fn abs(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub segments: usize,
}

/// One stretch of the integration range, with its endpoint behaviour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub left: Endpoint,
    pub right: Endpoint,
}

impl Piece {
    pub fn smooth(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            left: Endpoint::Smooth,
            right: Endpoint::Smooth,
        }
    }
}

/// A piece mapped onto `t in [0, 1]` with at most one singular end.
#[derive(Clone, Copy, Debug)]
struct Mapped {
    anchor: f64,
    /// Signed length; `x = anchor + len * t^q`.
    len: f64,
    q: f64,
}

impl Mapped {
    fn eval<F: Fn(f64) -> f64>(&self, f: &F, t: f64) -> f64 {
        if self.q == 1.0 {
            return f(self.anchor + self.len * t) * self.len.abs();
        }
        let tq1 = t.powf(self.q - 1.0);
        let x = self.anchor + self.len * tq1 * t;
        let jac = self.q * self.len.abs() * tq1;
        if jac == 0.0 {
            return 0.0;
        }
        f(x) * jac
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// `(integral, error, integral of |f|)` of `g` over `[a, b]`.
fn gk21(g: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center);
    let mut gauss = 0.0;
    let mut kronrod = fc * WGK[10];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = g(center - x);
        let f2 = g(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (kronrod - gauss) * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    (kronrod * half, rescale_error(err, res_abs, res_asc), res_abs)
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    piece: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn map_piece(p: &Piece, out: &mut Vec<Mapped>) {
    let singular_left = p.left != Endpoint::Smooth;
    let singular_right = p.right != Endpoint::Smooth;
    match (singular_left, singular_right) {
        (false, false) => out.push(Mapped {
            anchor: p.a,
            len: p.b - p.a,
            q: 1.0,
        }),
        (true, false) => out.push(Mapped {
            anchor: p.a,
            len: p.b - p.a,
            q: p.left.mapping_power(),
        }),
        (false, true) => out.push(Mapped {
            anchor: p.b,
            len: p.a - p.b,
            q: p.right.mapping_power(),
        }),
        (true, true) => {
            let mid = 0.5 * (p.a + p.b);
            out.push(Mapped {
                anchor: p.a,
                len: mid - p.a,
                q: p.left.mapping_power(),
            });
            out.push(Mapped {
                anchor: p.b,
                len: mid - p.b,
                q: p.right.mapping_power(),
            });
        }
    }
}

/// Splits pieces that stay on one side of 0 and span a large ratio into
/// geometric sub-pieces with ratio at most 4.
fn geometric_split(pieces: &[Piece]) -> Vec<Piece> {
    let mut out = Vec::with_capacity(pieces.len());
    for p in pieces {
        let (lo, hi) = (p.a.abs().min(p.b.abs()), p.a.abs().max(p.b.abs()));
        let same_side = p.a * p.b > 0.0;
        if !same_side || hi / lo <= 8.0 {
            out.push(*p);
            continue;
        }
        let n = ((hi / lo).ln() / 4f64.ln()).ceil() as usize;
        let ratio = (p.b / p.a).powf(1.0 / n as f64);
        let mut a = p.a;
        for i in 0..n {
            let b = if i + 1 == n {
                p.b
            } else {
                p.a * ratio.powi(i as i32 + 1)
            };
            out.push(Piece {
                a,
                b,
                left: if i == 0 { p.left } else { Endpoint::Smooth },
                right: if i + 1 == n { p.right } else { Endpoint::Smooth },
            });
            a = b;
        }
    }
    out
}

/// Integrates `f` over the union of `pieces` to `max(abs_tol, rel_tol |I|)`.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, pieces: &[Piece], opts: &QuadOptions) -> Result<QuadResult> {
    let pieces: Vec<Piece> = pieces.iter().filter(|p| p.b > p.a).copied().collect();
    if pieces.is_empty() {
        return Ok(QuadResult::default());
    }
    let mut mapped = Vec::new();
    for p in geometric_split(&pieces) {
        map_piece(&p, &mut mapped);
    }
    let mut heap = BinaryHeap::with_capacity(2 * mapped.len());
    let mut evaluations = 0;
    for (i, m) in mapped.iter().enumerate() {
        let g = |t: f64| m.eval(&f, t);
        let (value, error, abs) = gk21(&g, 0.0, 1.0);
        evaluations += 21;
        heap.push(Segment {
            piece: i,
            a: 0.0,
            b: 1.0,
            value,
            error,
            abs,
        });
    }
    let (lo, hi) = (pieces[0].a, pieces[pieces.len() - 1].b);
    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature {
                a: lo,
                b: hi,
                tol: opts.abs_tol,
                estimate: error,
            });
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        // error below the rounding floor of the segments cannot improve
        let floor: f64 = heap.iter().map(|s| 50.0 * f64::EPSILON * s.abs).sum();
        if error <= target || error <= 2.0 * floor {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
                segments: heap.len(),
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() + 2 > opts.max_segments || mid <= worst.a || mid >= worst.b || worst.b - worst.a < 1e-15 {
            return Err(Error::Quadrature {
                a: lo,
                b: hi,
                tol: target,
                estimate: error,
            });
        }
        let m = mapped[worst.piece];
        let g = |t: f64| m.eval(&f, t);
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error, abs) = gk21(&g, a, b);
            heap.push(Segment {
                piece: worst.piece,
                a,
                b,
                value,
                error,
                abs,
            });
        }
        evaluations += 42;
    }
}

/// Integrates a smooth `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    integrate_pieces(f, &[Piece::smooth(a, b)], opts)
}

/// Integrates over `[a, b]` split at `breaks`, marking every break listed in
/// `singular` with its endpoint behaviour on both sides. Returns exactly 0 for
/// an empty range.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    singular: &[(f64, Endpoint)],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(b > a) {
        return Ok(QuadResult::default());
    }
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|x| *x > a && *x < b))
        .chain(singular.iter().map(|s| s.0).filter(|x| *x > a && *x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let kind = |x: f64| {
        singular
            .iter()
            .find(|s| s.0 == x)
            .map(|s| s.1)
            .unwrap_or(Endpoint::Smooth)
    };
    let pieces: Vec<Piece> = pts
        .windows(2)
        .map(|w| Piece {
            a: w[0],
            b: w[1],
            left: kind(w[0]),
            right: kind(w[1]),
        })
        .collect();
    integrate_pieces(f, &pieces, opts)
}
