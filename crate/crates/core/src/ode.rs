//! Dormand-Prince 8(5,3) integrator for complex linear systems, sampled at
//! prescribed output points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-11,
            max_steps: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

type State<const N: usize> = [Complex64; N];

#[inline]
fn axpy<const N: usize>(y: &State<N>, terms: &[(f64, &State<N>)], h: f64) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Integrates `y' = rhs(x, y)` from `xs[0]` with `y(xs[0]) = y0` and returns
/// the state at every point of `xs`, which must be strictly monotone (either
/// direction).
pub fn integrate<const N: usize, F>(
    mut rhs: F,
    xs: &[f64],
    y0: State<N>,
    opts: &OdeOptions,
) -> Result<(Vec<State<N>>, OdeStats)>
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    let mut out = Vec::with_capacity(xs.len());
    out.push(y0);
    let mut stats = OdeStats::default();
    if xs.len() < 2 {
        return Ok((out, stats));
    }
    let dir = (xs[1] - xs[0]).signum();
    let mut x = xs[0];
    let mut y = y0;
    let mut k1 = rhs(x, &y);
    stats.evals += 1;

    // Initial step guess.
    let norm = |v: &State<N>, scale: &State<N>| {
        let mut s = 0.0;
        for i in 0..N {
            let sk = opts.atol + opts.rtol * scale[i].norm();
            s += (v[i].norm() / sk).powi(2);
        }
        (s / N as f64).sqrt()
    };
    let (d0, d1) = (norm(&y, &y), norm(&k1, &y));
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min((xs[xs.len() - 1] - xs[0]).abs()) * dir;

    let mut last_rejected = false;
    for &target in &xs[1..] {
        if (target - x) * dir <= 0.0 {
            return Err(Error::StepFailure {
                x,
                reason: "output points are not strictly monotone".into(),
            });
        }
        loop {
            let remaining = target - x;
            let landing =
                (h.abs() >= remaining.abs()) || (remaining.abs() - h.abs()) < 1e-14 * remaining.abs().max(1.0);
            let step = if landing { remaining } else { h };
            if step.abs() < 1e-15 * x.abs().max(1.0) {
                return Err(Error::StepFailure {
                    x,
                    reason: "step size underflow".into(),
                });
            }
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::StepFailure {
                    x,
                    reason: format!("step budget of {} exhausted", opts.max_steps),
                });
            }
            let (y_new, k_new, err) = dop853_step(&mut rhs, x, &y, &k1, step, opts);
            stats.evals += 12;
            let fac11 = err.powf(1.0 / 8.0);
            let fac = (1.0 / 6.0_f64).max(3.0_f64.min(fac11 / 0.9));
            if err <= 1.0 {
                stats.accepted += 1;
                x = if landing { target } else { x + step };
                y = y_new;
                k1 = k_new;
                stats.evals += 1;
                let mut h_new = step / fac;
                if last_rejected {
                    h_new = if h_new.abs() < step.abs() { h_new } else { step };
                }
                last_rejected = false;
                // A clipped landing step says nothing about the natural size.
                if !landing || h_new.abs() > h.abs() {
                    h = h_new;
                }
                if landing {
                    break;
                }
            } else {
                stats.rejected += 1;
                last_rejected = true;
                h = step / 3.0_f64.min(fac11 / 0.9);
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

fn dop853_step<const N: usize, F>(
    rhs: &mut F,
    x: f64,
    y: &State<N>,
    k1: &State<N>,
    h: f64,
    opts: &OdeOptions,
) -> (State<N>, State<N>, f64)
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    let k2 = rhs(x + C2 * h, &axpy(y, &[(A21, k1)], h));
    let k3 = rhs(x + C3 * h, &axpy(y, &[(A31, k1), (A32, &k2)], h));
    let k4 = rhs(x + C4 * h, &axpy(y, &[(A41, k1), (A43, &k3)], h));
    let k5 = rhs(x + C5 * h, &axpy(y, &[(A51, k1), (A53, &k3), (A54, &k4)], h));
    let k6 = rhs(x + C6 * h, &axpy(y, &[(A61, k1), (A64, &k4), (A65, &k5)], h));
    let k7 = rhs(
        x + C7 * h,
        &axpy(y, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)], h),
    );
    let k8 = rhs(
        x + C8 * h,
        &axpy(y, &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)], h),
    );
    let k9 = rhs(
        x + C9 * h,
        &axpy(
            y,
            &[(A91, k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)],
            h,
        ),
    );
    let k10 = rhs(
        x + C10 * h,
        &axpy(
            y,
            &[
                (A101, k1),
                (A104, &k4),
                (A105, &k5),
                (A106, &k6),
                (A107, &k7),
                (A108, &k8),
                (A109, &k9),
            ],
            h,
        ),
    );
    let k11 = rhs(
        x + C11 * h,
        &axpy(
            y,
            &[
                (A111, k1),
                (A114, &k4),
                (A115, &k5),
                (A116, &k6),
                (A117, &k7),
                (A118, &k8),
                (A119, &k9),
                (A1110, &k10),
            ],
            h,
        ),
    );
    let x_new = x + h;
    let yy1 = axpy(
        y,
        &[
            (A121, k1),
            (A124, &k4),
            (A125, &k5),
            (A126, &k6),
            (A127, &k7),
            (A128, &k8),
            (A129, &k9),
            (A1210, &k10),
            (A1211, &k11),
        ],
        h,
    );
    let k12 = rhs(x_new, &yy1);
    let zero = [Complex64::new(0.0, 0.0); N];
    let b = axpy(
        &zero,
        &[
            (B1, k1),
            (B6, &k6),
            (B7, &k7),
            (B8, &k8),
            (B9, &k9),
            (B10, &k10),
            (B11, &k11),
            (B12, &k12),
        ],
        1.0,
    );
    let y_new = axpy(y, &[(1.0, &b)], h);

    // Real and imaginary parts count as separate components.
    let (mut err, mut err2) = (0.0, 0.0);
    for i in 0..N {
        let e2 = b[i] - k1[i] * BHH1 - k9[i] * BHH2 - k12[i] * BHH3;
        let e = k1[i] * ER1
            + k6[i] * ER6
            + k7[i] * ER7
            + k8[i] * ER8
            + k9[i] * ER9
            + k10[i] * ER10
            + k11[i] * ER11
            + k12[i] * ER12;
        let pairs = [(y[i].re, y_new[i].re, e.re, e2.re), (y[i].im, y_new[i].im, e.im, e2.im)];
        for (a, c, ei, e2i) in pairs {
            let sk = opts.atol + opts.rtol * a.abs().max(c.abs());
            err += (ei / sk).powi(2);
            err2 += (e2i / sk).powi(2);
        }
    }
    // Written to avoid 0 * inf when the sums are subnormal.
    let deno = err + 0.01 * err2;
    let err = if err == 0.0 {
        0.0
    } else {
        h.abs() * err / (deno * (2 * N) as f64).sqrt()
    };
    let k_new = rhs(x_new, &y_new);
    (y_new, k_new, err)
}

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        // y' = i k y, y(0) = 1
        let k = 50.0;
        let xs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
        let (ys, stats) = integrate(
            |_, y: &[Complex64; 1]| [y[0] * Complex64::new(0.0, k)],
            &xs,
            [Complex64::new(1.0, 0.0)],
            &OdeOptions::default(),
        )
        .unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((y[0] - Complex64::from_polar(1.0, k * x)).norm() < 1e-9, "x={x}");
        }
        assert!(stats.accepted >= 200);
    }

    #[test]
    fn backward_integration() {
        // y' = x y, y = exp(x^2/2)
        let xs: Vec<f64> = (0..=50).map(|i| 1.0 - i as f64 * 0.04).collect();
        let y1 = (0.5f64).exp();
        let (ys, _) = integrate(
            |x, y: &[Complex64; 1]| [y[0] * x],
            &xs,
            [Complex64::new(y1, 0.0)],
            &OdeOptions::default(),
        )
        .unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((y[0].re - (x * x / 2.0).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_monotone_outputs() {
        let r = integrate(
            |_, y: &[Complex64; 1]| *y,
            &[0.0, 1.0, 0.5],
            [Complex64::new(1.0, 0.0)],
            &OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::StepFailure { .. })));
    }
}
