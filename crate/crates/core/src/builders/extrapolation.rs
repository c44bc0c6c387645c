//! Euler and midpoint extrapolation with the harmonic step sequence.

use crate::exact::{integer, rational, Rational, Tableau, TableauError};

use super::symbolic::{Recorder, State};
use super::StageInfo;

fn stage(k: usize, j: usize) -> StageInfo {
    StageInfo {
        label: format!("Y_{{{k},{j}}}"),
        chain: Some(k),
        step: j,
    }
}

/// Aitken-Neville table on the first-column values `t1[0..r]`, where
/// `ratio(j, k)` is the step-size ratio for `T_{jk}` (1-based). Returns the
/// diagonal `T_{11}, T_{22}, ..., T_{rr}`.
fn aitken_neville(
    t1: Vec<State<Rational>>,
    ratio: impl Fn(usize, usize) -> Rational,
) -> Vec<State<Rational>> {
    let r = t1.len();
    let mut diag = vec![t1[0].clone()];
    let mut col = t1;
    for k in 2..=r {
        let mut next = Vec::with_capacity(r);
        for j in k..=r {
            // col[i] holds T_{i+k-1, k-1}.
            let hi = &col[j - k + 1];
            let lo = &col[j - k];
            let d = (ratio(j, k) - integer(1)).recip();
            let one_d = d.clone() + integer(1);
            next.push(hi.combine(&one_d, lo, &-d));
        }
        diag.push(next[0].clone());
        col = next;
    }
    diag
}

/// Ex-Euler of order `p`: `p` Euler chains with `1..p` substeps.
pub(crate) fn ex_euler(p: u32) -> Result<(Tableau, Vec<super::StageInfo>), TableauError> {
    let p = p as usize;
    let mut rec = Recorder::<Rational>::new();
    let mut first_column = Vec::with_capacity(p);
    for k in 1..=p {
        let h_k = rational(1, k as i64);
        let mut y = State::y_n();
        for j in 1..=k {
            let kk = rec.eval(&y, stage(k, j - 1));
            y = y.plus_stage(&h_k, kk);
        }
        first_column.push(y);
    }
    let diag = aitken_neville(first_column, |j, k| rational(j as i64, (j - k + 1) as i64));
    rec.finish(
        format!("ex-euler-{p}"),
        &diag[p - 1],
        &diag[p - 2],
        p as u32,
        p as u32 - 1,
    )
}

/// Ex-Midpoint of even order `p`: `p/2` chains, chain `k` taking one Euler
/// substep and `2k - 1` midpoint substeps of size `h/(2k)`.
pub(crate) fn ex_midpoint(p: u32) -> Result<(Tableau, Vec<super::StageInfo>), TableauError> {
    let r = p as usize / 2;
    let mut rec = Recorder::<Rational>::new();
    let mut first_column = Vec::with_capacity(r);
    for k in 1..=r {
        let half = rational(1, 2 * k as i64);
        let full = rational(1, k as i64);
        let mut ys = vec![State::y_n()];
        let k0 = rec.eval(&ys[0], stage(k, 0));
        ys.push(ys[0].plus_stage(&half, k0));
        for j in 2..=2 * k {
            let kk = rec.eval(&ys[j - 1], stage(k, j - 1));
            let next = ys[j - 2].plus_stage(&full, kk);
            ys.push(next);
        }
        first_column.push(ys.pop().expect("chain has states"));
    }
    let diag = aitken_neville(first_column, |j, k| {
        let q = rational(j as i64, (j - k + 1) as i64);
        q.clone() * q
    });
    let embedded = if r >= 2 { &diag[r - 2] } else { &diag[0] };
    rec.finish(format!("ex-midpoint-{p}"), &diag[r - 1], embedded, p, p - 2)
}
