//! Dormand-Prince 8(5,3) integrator with 7th-order dense output.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// First-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed step; infinite by default.
    pub h_max: f64,
    /// Initial step; chosen automatically when zero.
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            h_max: f64::INFINITY,
            h_init: 0.0,
            max_steps: 50_000_000,
        }
    }
}

/// Observer verdict after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub stopped: bool,
    pub stats: Stats,
}

struct Work {
    k: [Vec<f64>; 16],
    y1: Vec<f64>,
    ynew: Vec<f64>,
    cont: [Vec<f64>; 8],
}

/// Read access to an accepted step, including interpolation inside it.
pub struct StepView<'a, S: OdeSystem> {
    sys: &'a S,
    t_old: f64,
    h: f64,
    y_old: &'a [f64],
    work: &'a mut Work,
    dense_ready: bool,
    evaluations: usize,
}

impl<S: OdeSystem> StepView<'_, S> {
    pub fn t_old(&self) -> f64 {
        self.t_old
    }

    pub fn t(&self) -> f64 {
        self.t_old + self.h
    }

    pub fn y_old(&self) -> &[f64] {
        self.y_old
    }

    pub fn y(&self) -> &[f64] {
        &self.work.ynew
    }

    /// Derivative at the end of the step.
    pub fn dy(&self) -> &[f64] {
        &self.work.k[12]
    }

    /// Derivative at the start of the step.
    pub fn dy_old(&self) -> &[f64] {
        &self.work.k[0]
    }

    /// Dense-output value at `t` within the step.
    pub fn interpolate(&mut self, t: f64, out: &mut [f64]) {
        if !self.dense_ready {
            self.prepare_dense();
        }
        let s = (t - self.t_old) / self.h;
        let s1 = 1.0 - s;
        let c = &self.work.cont;
        for i in 0..out.len() {
            let conpar = c[4][i] + s * (c[5][i] + s1 * (c[6][i] + s * c[7][i]));
            out[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * conpar)));
        }
    }

    fn prepare_dense(&mut self) {
        let n = self.y_old.len();
        let h = self.h;
        let t = self.t_old;
        let w = &mut *self.work;
        for i in 0..n {
            let k = &w.k;
            let ydiff = w.ynew[i] - self.y_old[i];
            let bspl = h * k[0][i] - ydiff;
            w.cont[0][i] = self.y_old[i];
            w.cont[1][i] = ydiff;
            w.cont[2][i] = bspl;
            w.cont[3][i] = ydiff - h * k[12][i] - bspl;
            for (row, d) in D.iter().enumerate() {
                w.cont[4 + row][i] = d[0] * k[0][i]
                    + d[1] * k[5][i]
                    + d[2] * k[6][i]
                    + d[3] * k[7][i]
                    + d[4] * k[8][i]
                    + d[5] * k[9][i]
                    + d[6] * k[10][i]
                    + d[7] * k[11][i]
                    + d[8] * k[12][i];
            }
        }
        for i in 0..n {
            let k = &w.k;
            w.y1[i] = self.y_old[i]
                + h * (A14[0] * k[0][i]
                    + A14[1] * k[6][i]
                    + A14[2] * k[7][i]
                    + A14[3] * k[8][i]
                    + A14[4] * k[9][i]
                    + A14[5] * k[10][i]
                    + A14[6] * k[11][i]
                    + A14[7] * k[12][i]);
        }
        self.sys.rhs(t + C14 * h, &w.y1, &mut w.k[13]);
        for i in 0..n {
            let k = &w.k;
            w.y1[i] = self.y_old[i]
                + h * (A15[0] * k[0][i]
                    + A15[1] * k[5][i]
                    + A15[2] * k[6][i]
                    + A15[3] * k[7][i]
                    + A15[4] * k[10][i]
                    + A15[5] * k[11][i]
                    + A15[6] * k[12][i]
                    + A15[7] * k[13][i]);
        }
        self.sys.rhs(t + C15 * h, &w.y1, &mut w.k[14]);
        for i in 0..n {
            let k = &w.k;
            w.y1[i] = self.y_old[i]
                + h * (A16[0] * k[0][i]
                    + A16[1] * k[5][i]
                    + A16[2] * k[6][i]
                    + A16[3] * k[7][i]
                    + A16[4] * k[8][i]
                    + A16[5] * k[12][i]
                    + A16[6] * k[13][i]
                    + A16[7] * k[14][i]);
        }
        self.sys.rhs(t + C16 * h, &w.y1, &mut w.k[15]);
        for i in 0..n {
            for (row, d) in D.iter().enumerate() {
                let k = &w.k;
                let v = w.cont[4 + row][i] + d[9] * k[13][i] + d[10] * k[14][i] + d[11] * k[15][i];
                w.cont[4 + row][i] = h * v;
            }
        }
        self.evaluations += 3;
        self.dense_ready = true;
    }
}

fn weighted_rms_sq(y: &[f64], scale: &[f64]) -> f64 {
    y.iter().zip(scale).map(|(v, s)| (v / s) * (v / s)).sum()
}

fn initial_step<S: OdeSystem>(
    sys: &S,
    t: f64,
    y: &[f64],
    f0: &[f64],
    opts: &Options,
    tmp: &mut [f64],
    f1: &mut [f64],
) -> f64 {
    let n = y.len();
    let sk: Vec<f64> = y
        .iter()
        .map(|v| opts.atol + opts.rtol * libm::fabs(*v))
        .collect();
    let dnf = weighted_rms_sq(f0, &sk);
    let dny = weighted_rms_sq(y, &sk);
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        libm::sqrt(dny / dnf) * 0.01
    };
    h = h.min(opts.h_max);
    for i in 0..n {
        tmp[i] = y[i] + h * f0[i];
    }
    sys.rhs(t + h, tmp, f1);
    let der2: f64 = libm::sqrt(
        f1.iter()
            .zip(f0)
            .zip(&sk)
            .map(|((a, b), s)| ((a - b) / s) * ((a - b) / s))
            .sum::<f64>(),
    ) / h;
    let der12 = der2.max(libm::sqrt(dnf));
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        libm::pow(0.01 / der12, 1.0 / 8.0)
    };
    (100.0 * h).min(h1).min(opts.h_max)
}

/// Integrates from `t0` to `t_end > t0`, handing every accepted step to `observer`.
pub fn integrate<S, O>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &Options,
    mut observer: O,
) -> Result<Outcome>
where
    S: OdeSystem,
    O: FnMut(&mut StepView<'_, S>) -> Control,
{
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: y0.len(),
        });
    }
    if !(t_end > t0) {
        return Err(Error::InvalidInput(
            "integration interval must be increasing",
        ));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0 && opts.rtol <= 1e-3 && opts.atol <= 1e-3) {
        return Err(Error::InvalidInput("tolerances must lie in (0, 1e-3]"));
    }
    let mut work = Work {
        k: core::array::from_fn(|_| vec![0.0; n]),
        y1: vec![0.0; n],
        ynew: vec![0.0; n],
        cont: core::array::from_fn(|_| vec![0.0; n]),
    };
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    sys.rhs(t, &y, &mut work.k[0]);
    stats.evaluations += 1;
    let mut h = if opts.h_init > 0.0 {
        opts.h_init.min(opts.h_max)
    } else {
        let (head, tail) = work.k.split_at_mut(1);
        stats.evaluations += 1;
        initial_step(sys, t, &y, &head[0], opts, &mut work.y1, &mut tail[0])
    };
    let mut last_rejected = false;
    let mut sk = vec![0.0; n];
    let mut err_a = vec![0.0; n];
    let mut err_b = vec![0.0; n];
    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps(t));
        }
        if 0.1 * libm::fabs(h) <= libm::fabs(t) * f64::EPSILON {
            return Err(Error::StepSizeUnderflow(t));
        }
        let last = t + 1.01 * h >= t_end;
        if last {
            h = t_end - t;
        }
        stage_all(sys, t, &y, h, &mut work);
        stats.evaluations += 11;
        for i in 0..n {
            let k = &work.k;
            let sum = B[0] * k[0][i]
                + B[1] * k[5][i]
                + B[2] * k[6][i]
                + B[3] * k[7][i]
                + B[4] * k[8][i]
                + B[5] * k[9][i]
                + B[6] * k[10][i]
                + B[7] * k[11][i];
            work.ynew[i] = y[i] + h * sum;
            sk[i] = opts.atol + opts.rtol * libm::fabs(y[i]).max(libm::fabs(work.ynew[i]));
            err_b[i] = sum - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
            err_a[i] = ER[0] * k[0][i]
                + ER[1] * k[5][i]
                + ER[2] * k[6][i]
                + ER[3] * k[7][i]
                + ER[4] * k[8][i]
                + ER[5] * k[9][i]
                + ER[6] * k[10][i]
                + ER[7] * k[11][i];
        }
        let err = weighted_rms_sq(&err_a, &sk);
        let err2 = weighted_rms_sq(&err_b, &sk);
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = libm::fabs(h) * err * libm::sqrt(1.0 / (n as f64 * deno));
        if !err.is_finite() || work.ynew.iter().any(|v| !v.is_finite()) {
            stats.rejected += 1;
            h *= 0.1;
            last_rejected = true;
            continue;
        }
        let fac11 = libm::pow(err, 1.0 / 8.0);
        let fac = (fac11 / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_new = h / fac;
        if err <= 1.0 {
            sys.rhs(t + h, &work.ynew, &mut work.k[12]);
            stats.evaluations += 1;
            stats.accepted += 1;
            if libm::fabs(h_new) > opts.h_max {
                h_new = opts.h_max;
            }
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            let mut view = StepView {
                sys,
                t_old: t,
                h,
                y_old: &y,
                work: &mut work,
                dense_ready: false,
                evaluations: 0,
            };
            let control = observer(&mut view);
            stats.evaluations += view.evaluations;
            t = if last { t_end } else { t + h };
            y.copy_from_slice(&work.ynew);
            let (head, tail) = work.k.split_at_mut(12);
            head[0].copy_from_slice(&tail[0]);
            if control == Control::Stop {
                return Ok(Outcome {
                    t,
                    y,
                    stopped: true,
                    stats,
                });
            }
            if last {
                return Ok(Outcome {
                    t,
                    y,
                    stopped: false,
                    stats,
                });
            }
        } else {
            h_new = h / (1.0 / FAC_MIN).min(fac11 / SAFE);
            stats.rejected += 1;
            last_rejected = true;
        }
        h = h_new;
    }
}

fn stage_all<S: OdeSystem>(sys: &S, t: f64, y: &[f64], h: f64, w: &mut Work) {
    for (s, (row, c)) in A.iter().zip(C.iter()).enumerate() {
        // Stage index s + 1 uses k[0..=s].
        for (i, (y1, yi)) in w.y1.iter_mut().zip(y).enumerate() {
            let mut acc = 0.0;
            for (j, a) in row.iter().enumerate() {
                if *a != 0.0 {
                    acc += a * w.k[j][i];
                }
            }
            *y1 = yi + h * acc;
        }
        sys.rhs(t + c * h, &w.y1, &mut w.k[s + 1]);
    }
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

const C: [f64; 11] = [
    0.526001519587677318785587544488E-01,
    0.789002279381515978178381316732E-01,
    0.118350341907227396726757197510E+00,
    0.281649658092772603273242802490E+00,
    0.333333333333333333333333333333E+00,
    0.25E+00,
    0.307692307692307692307692307692E+00,
    0.651282051282051282051282051282E+00,
    0.6E+00,
    0.857142857142857142857142857142E+00,
    1.0,
];
const C14: f64 = 0.1;
const C15: f64 = 0.2;
const C16: f64 = 0.777777777777777777777777777778;

// Rows of the Butcher matrix for stages 2..=12, indexed by the earlier stage.
const A: [&[f64]; 11] = [
    &[5.26001519587677318785587544488E-2],
    &[
        1.97250569845378994544595329183E-2,
        5.91751709536136983633785987549E-2,
    ],
    &[
        2.95875854768068491816892993775E-2,
        0.0,
        8.87627564304205475450678981324E-2,
    ],
    &[
        2.41365134159266685502369798665E-1,
        0.0,
        -8.84549479328286085344864962717E-1,
        9.24834003261792003115737966543E-1,
    ],
    &[
        3.7037037037037037037037037037E-2,
        0.0,
        0.0,
        1.70828608729473871279604482173E-1,
        1.25467687566822425016691814123E-1,
    ],
    &[
        3.7109375E-2,
        0.0,
        0.0,
        1.70252211019544039314978060272E-1,
        6.02165389804559606850219397283E-2,
        -1.7578125E-2,
    ],
    &[
        3.70920001185047927108779319836E-2,
        0.0,
        0.0,
        1.70383925712239993810214054705E-1,
        1.07262030446373284651809199168E-1,
        -1.53194377486244017527936158236E-2,
        8.27378916381402288758473766002E-3,
    ],
    &[
        6.24110958716075717114429577812E-1,
        0.0,
        0.0,
        -3.36089262944694129406857109825E0,
        -8.68219346841726006818189891453E-1,
        2.75920996994467083049415600797E1,
        2.01540675504778934086186788979E1,
        -4.34898841810699588477366255144E1,
    ],
    &[
        4.77662536438264365890433908527E-1,
        0.0,
        0.0,
        -2.48811461997166764192642586468E0,
        -5.90290826836842996371446475743E-1,
        2.12300514481811942347288949897E1,
        1.52792336328824235832596922938E1,
        -3.32882109689848629194453265587E1,
        -2.03312017085086261358222928593E-2,
    ],
    &[
        -9.3714243008598732571704021658E-1,
        0.0,
        0.0,
        5.18637242884406370830023853209E0,
        1.09143734899672957818500254654E0,
        -8.14978701074692612513997267357E0,
        -1.85200656599969598641566180701E1,
        2.27394870993505042818970056734E1,
        2.49360555267965238987089396762E0,
        -3.0467644718982195003823669022E0,
    ],
    &[
        2.27331014751653820792359768449E0,
        0.0,
        0.0,
        -1.05344954667372501984066689879E1,
        -2.00087205822486249909675718444E0,
        -1.79589318631187989172765950534E1,
        2.79488845294199600508499808837E1,
        -2.85899827713502369474065508674E0,
        -8.87285693353062954433549289258E0,
        1.23605671757943030647266201528E1,
        6.43392746015763530355970484046E-1,
    ],
];

// Weights on k1, k6..k12.
const B: [f64; 8] = [
    5.42937341165687622380535766363E-2,
    4.45031289275240888144113950566E0,
    1.89151789931450038304281599044E0,
    -5.8012039600105847814672114227E0,
    3.1116436695781989440891606237E-1,
    -1.52160949662516078556178806805E-1,
    2.01365400804030348374776537501E-1,
    4.47106157277725905176885569043E-2,
];

// Weights on k1, k9, k12.
const BHH: [f64; 3] = [
    0.244094488188976377952755905512E+00,
    0.733846688281611857341361741547E+00,
    0.220588235294117647058823529412E-01,
];

// Weights on k1, k6..k12.
const ER: [f64; 8] = [
    0.1312004499419488073250102996E-01,
    -0.1225156446376204440720569753E+01,
    -0.4957589496572501915214079952E+00,
    0.1664377182454986536961530415E+01,
    -0.3503288487499736816886487290E+00,
    0.3341791187130174790297318841E+00,
    0.8192320648511571246570742613E-01,
    -0.2235530786388629525884427845E-01,
];

// Stage 14 on k1, k7..k13; stage 15 on k1, k6, k7, k8, k11, k12, k13, k14;
// stage 16 on k1, k6, k7, k8, k9, k13, k14, k15.
const A14: [f64; 8] = [
    5.61675022830479523392909219681E-2,
    2.53500210216624811088794765333E-1,
    -2.46239037470802489917441475441E-1,
    -1.24191423263816360469010140626E-1,
    1.5329179827876569731206322685E-1,
    8.20105229563468988491666602057E-3,
    7.56789766054569976138603589584E-3,
    -8.298E-3,
];
const A15: [f64; 8] = [
    3.18346481635021405060768473261E-2,
    2.83009096723667755288322961402E-2,
    5.35419883074385676223797384372E-2,
    -5.49237485713909884646569340306E-2,
    -1.08347328697249322858509316994E-4,
    3.82571090835658412954920192323E-4,
    -3.40465008687404560802977114492E-4,
    1.41312443674632500278074618366E-1,
];
const A16: [f64; 8] = [
    -4.28896301583791923408573538692E-1,
    -4.69762141536116384314449447206E0,
    7.68342119606259904184240953878E0,
    4.06898981839711007970213554331E0,
    3.56727187455281109270669543021E-1,
    -1.39902416515901462129418009734E-3,
    2.9475147891527723389556272149E0,
    -9.15095847217987001081870187138E0,
];

// Dense-output rows 4..=7 on k1, k6..k13, k14, k15, k16.
const D: [[f64; 12]; 4] = [
    [
        -0.84289382761090128651353491142E+01,
        0.56671495351937776962531783590E+00,
        -0.30689499459498916912797304727E+01,
        0.23846676565120698287728149680E+01,
        0.21170345824450282767155149946E+01,
        -0.87139158377797299206789907490E+00,
        0.22404374302607882758541771650E+01,
        0.63157877876946881815570249290E+00,
        -0.88990336451333310820698117400E-01,
        0.18148505520854727256656404962E+02,
        -0.91946323924783554000451984436E+01,
        -0.44360363875948939664310572000E+01,
    ],
    [
        0.10427508642579134603413151009E+02,
        0.24228349177525818288430175319E+03,
        0.16520045171727028198505394887E+03,
        -0.37454675472269020279518312152E+03,
        -0.22113666853125306036270938578E+02,
        0.77334326684722638389603898808E+01,
        -0.30674084731089398182061213626E+02,
        -0.93321305264302278729567221706E+01,
        0.15697238121770843886131091075E+02,
        -0.31139403219565177677282850411E+02,
        -0.93529243588444783865713862664E+01,
        0.35816841486394083752465898540E+02,
    ],
    [
        0.19985053242002433820987653617E+02,
        -0.38703730874935176555105901742E+03,
        -0.18917813819516756882830838328E+03,
        0.52780815920542364900561016686E+03,
        -0.11573902539959630126141871134E+02,
        0.68812326946963000169666922661E+01,
        -0.10006050966910838403183860980E+01,
        0.77771377980534432092869265740E+00,
        -0.27782057523535084065932004339E+01,
        -0.60196695231264120758267380846E+02,
        0.84320405506677161018159903784E+02,
        0.11992291136182789328035130030E+02,
    ],
    [
        -0.25693933462703749003312586129E+02,
        -0.15418974869023643374053993627E+03,
        -0.23152937917604549567536039109E+03,
        0.35763911791061412378285349910E+03,
        0.93405324183624310003907691704E+02,
        -0.37458323136451633156875139351E+02,
        0.10409964950896230045147246184E+03,
        0.29840293426660503123344363579E+02,
        -0.43533456590011143754432175058E+02,
        0.96324553959188282948394950600E+02,
        -0.39177261675615439165231486172E+02,
        -0.14972683625798562581422125276E+03,
    ],
];
