//! Inner loops of the dense oracle. The density matrix is stored as separate
//! real and imaginary planes so that loops over contiguous columns vectorize;
//! on x86-64 the same loops are also compiled for AVX2/FMA and selected at
//! run time.

use crate::circuit::Superop1;
use crate::linalg::{Matrix4, C64, ONE, ZERO};

/// Single-qubit superoperator with real entries on the diagonal and on the two
/// population couplings `(0,3)`, `(3,0)` only. Every built-in noise channel
/// has this form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(super) struct PopChannel {
    pub d: [f64; 4],
    pub p03: f64,
    pub p30: f64,
}

impl PopChannel {
    pub const IDENTITY: Self = Self {
        d: [1.0; 4],
        p03: 0.0,
        p30: 0.0,
    };

    pub fn from_superop(s: &Superop1) -> Option<Self> {
        let ok = (0..4).all(|i| {
            (0..4).all(|j| {
                let allowed = i == j || (i, j) == (0, 3) || (i, j) == (3, 0);
                s[i][j].im == 0.0 && (allowed || s[i][j] == ZERO)
            })
        });
        ok.then(|| Self {
            d: std::array::from_fn(|i| s[i][i].re),
            p03: s[0][3].re,
            p30: s[3][0].re,
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

pub(super) fn is_identity_superop(s: &Superop1) -> bool {
    (0..4).all(|i| (0..4).all(|j| s[i][j] == if i == j { ONE } else { ZERO }))
}

/// `U (.) U^dagger` on a qubit pair followed by a channel on each qubit.
#[derive(Clone, Copy, Debug)]
pub(super) struct PairOp {
    pub u: Option<Matrix4>,
    pub a: PopChannel,
    pub b: PopChannel,
}

#[inline(always)]
unsafe fn sl<'a>(p: *mut f64, start: usize, len: usize) -> &'a mut [f64] {
    std::slice::from_raw_parts_mut(p.add(start), len)
}

/// `x_i <- sum_k m[i][k] x_k` over four complex streams.
#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn mix4(
    x0r: &mut [f64],
    x1r: &mut [f64],
    x2r: &mut [f64],
    x3r: &mut [f64],
    x0i: &mut [f64],
    x1i: &mut [f64],
    x2i: &mut [f64],
    x3i: &mut [f64],
    m: &[[C64; 4]; 4],
) {
    let len = x0r.len();
    let (x1r, x2r, x3r) = (&mut x1r[..len], &mut x2r[..len], &mut x3r[..len]);
    let (x0i, x1i, x2i, x3i) = (&mut x0i[..len], &mut x1i[..len], &mut x2i[..len], &mut x3i[..len]);
    for t in 0..len {
        let vr = [x0r[t], x1r[t], x2r[t], x3r[t]];
        let vi = [x0i[t], x1i[t], x2i[t], x3i[t]];
        let mut or = [0.0; 4];
        let mut oi = [0.0; 4];
        for i in 0..4 {
            for k in 0..4 {
                or[i] += m[i][k].re * vr[k] - m[i][k].im * vi[k];
                oi[i] += m[i][k].re * vi[k] + m[i][k].im * vr[k];
            }
        }
        x0r[t] = or[0];
        x1r[t] = or[1];
        x2r[t] = or[2];
        x3r[t] = or[3];
        x0i[t] = oi[0];
        x1i[t] = oi[1];
        x2i[t] = oi[2];
        x3i[t] = oi[3];
    }
}

/// Applies a population channel to the streams `(v00, v01, v10, v11)`.
#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn pop4(
    v0r: &mut [f64],
    v1r: &mut [f64],
    v2r: &mut [f64],
    v3r: &mut [f64],
    v0i: &mut [f64],
    v1i: &mut [f64],
    v2i: &mut [f64],
    v3i: &mut [f64],
    ch: &PopChannel,
) {
    let len = v0r.len();
    let (v1r, v2r, v3r) = (&mut v1r[..len], &mut v2r[..len], &mut v3r[..len]);
    let (v0i, v1i, v2i, v3i) = (&mut v0i[..len], &mut v1i[..len], &mut v2i[..len], &mut v3i[..len]);
    let [d0, d1, d2, d3] = ch.d;
    for t in 0..len {
        let (a, b) = (v0r[t], v3r[t]);
        v0r[t] = d0 * a + ch.p03 * b;
        v3r[t] = d3 * b + ch.p30 * a;
        let (a, b) = (v0i[t], v3i[t]);
        v0i[t] = d0 * a + ch.p03 * b;
        v3i[t] = d3 * b + ch.p30 * a;
        v1r[t] *= d1;
        v1i[t] *= d1;
        v2r[t] *= d2;
        v2i[t] *= d2;
    }
}

/// Shortest contiguous column run handled by the streaming path.
const MIN_RUN: usize = 4;

#[inline(always)]
fn apply_pair_body(re: &mut [f64], im: &mut [f64], n: usize, pa: usize, pb: usize, op: &PairOp) {
    let dim = 1usize << n;
    assert_eq!(re.len(), dim * dim);
    assert_eq!(im.len(), dim * dim);
    let (ma, mb) = (1usize << pa, 1usize << pb);
    let off = [0, mb, ma, ma | mb];
    let (lo, hi) = (pa.min(pb), pa.max(pb));
    let run = 1usize << lo;
    let u = op.u.map(|m| m.0);
    let uc = op.u.map(|m| m.0.map(|row| row.map(|v| v.conj())));
    let (pr, pi) = (re.as_mut_ptr(), im.as_mut_ptr());
    for r in (0..dim).filter(|r| r & (ma | mb) == 0) {
        let rows = off.map(|o| (r + o) * dim);
        for c_hi in (0..dim).step_by(2 << hi) {
            for c in (c_hi..c_hi + (1 << hi)).step_by(2 << lo) {
                // SAFETY: every slice below covers `len` entries starting at
                // row * dim + c + off[j] + t0, inside the row and inside the
                // planes. Slices passed to one call are pairwise disjoint
                // because the (row, offset) pairs differ and runs never reach
                // the next offset.
                unsafe {
                    if run >= MIN_RUN {
                        let e = |p: *mut f64, i: usize, j: usize| sl(p, rows[i] + c + off[j], run);
                        if let (Some(u), Some(uc)) = (&u, &uc) {
                            for j in 0..4 {
                                mix4(
                                    e(pr, 0, j), e(pr, 1, j), e(pr, 2, j), e(pr, 3, j),
                                    e(pi, 0, j), e(pi, 1, j), e(pi, 2, j), e(pi, 3, j),
                                    u,
                                );
                            }
                            for i in 0..4 {
                                mix4(
                                    e(pr, i, 0), e(pr, i, 1), e(pr, i, 2), e(pr, i, 3),
                                    e(pi, i, 0), e(pi, i, 1), e(pi, i, 2), e(pi, i, 3),
                                    uc,
                                );
                            }
                        }
                        if !op.a.is_identity() {
                            // Qubit a is the high bit of the block indices.
                            for (ib, jb) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                                pop4(
                                    e(pr, ib, jb), e(pr, ib, 2 + jb), e(pr, 2 + ib, jb), e(pr, 2 + ib, 2 + jb),
                                    e(pi, ib, jb), e(pi, ib, 2 + jb), e(pi, 2 + ib, jb), e(pi, 2 + ib, 2 + jb),
                                    &op.a,
                                );
                            }
                        }
                        if !op.b.is_identity() {
                            for (ia, ja) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
                                pop4(
                                    e(pr, ia, ja), e(pr, ia, ja + 1), e(pr, ia + 1, ja), e(pr, ia + 1, ja + 1),
                                    e(pi, ia, ja), e(pi, ia, ja + 1), e(pi, ia + 1, ja), e(pi, ia + 1, ja + 1),
                                    &op.b,
                                );
                            }
                        }
                    } else {
                        for t in 0..run {
                            let idx = |i: usize, j: usize| rows[i] + c + t + off[j];
                            let mut blk = [[ZERO; 4]; 4];
                            for (i, row) in blk.iter_mut().enumerate() {
                                for (j, v) in row.iter_mut().enumerate() {
                                    *v = C64::new(*pr.add(idx(i, j)), *pi.add(idx(i, j)));
                                }
                            }
                            block_op(&mut blk, &u, &uc, op);
                            for (i, row) in blk.iter().enumerate() {
                                for (j, v) in row.iter().enumerate() {
                                    *pr.add(idx(i, j)) = v.re;
                                    *pi.add(idx(i, j)) = v.im;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[inline(always)]
fn block_op(blk: &mut [[C64; 4]; 4], u: &Option<[[C64; 4]; 4]>, uc: &Option<[[C64; 4]; 4]>, op: &PairOp) {
    if let (Some(u), Some(uc)) = (u, uc) {
        let mut t = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                t[i][j] = (0..4).map(|k| u[i][k] * blk[k][j]).sum();
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                blk[i][j] = (0..4).map(|k| t[i][k] * uc[j][k]).sum();
            }
        }
    }
    let pop = |ch: &PopChannel, v: [C64; 4]| {
        [
            v[0] * ch.d[0] + v[3] * ch.p03,
            v[1] * ch.d[1],
            v[2] * ch.d[2],
            v[3] * ch.d[3] + v[0] * ch.p30,
        ]
    };
    if !op.a.is_identity() {
        for (ib, jb) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let w = pop(&op.a, [blk[ib][jb], blk[ib][2 + jb], blk[2 + ib][jb], blk[2 + ib][2 + jb]]);
            blk[ib][jb] = w[0];
            blk[ib][2 + jb] = w[1];
            blk[2 + ib][jb] = w[2];
            blk[2 + ib][2 + jb] = w[3];
        }
    }
    if !op.b.is_identity() {
        for (ia, ja) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
            let w = pop(&op.b, [blk[ia][ja], blk[ia][ja + 1], blk[ia + 1][ja], blk[ia + 1][ja + 1]]);
            blk[ia][ja] = w[0];
            blk[ia][ja + 1] = w[1];
            blk[ia + 1][ja] = w[2];
            blk[ia + 1][ja + 1] = w[3];
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn apply_pair_avx2(re: &mut [f64], im: &mut [f64], n: usize, pa: usize, pb: usize, op: &PairOp) {
    apply_pair_body(re, im, n, pa, pb, op)
}

/// Applies `op` to the qubits at bit positions `pa` and `pb`.
pub(super) fn apply_pair(re: &mut [f64], im: &mut [f64], n: usize, pa: usize, pb: usize, op: &PairOp) {
    #[cfg(target_arch = "x86_64")]
    if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
        // SAFETY: the required CPU features were detected above.
        unsafe { apply_pair_avx2(re, im, n, pa, pb, op) };
        return;
    }
    apply_pair_body(re, im, n, pa, pb, op)
}

/// Applies an arbitrary single-qubit superoperator at bit position `p`.
pub(super) fn apply_single(re: &mut [f64], im: &mut [f64], n: usize, p: usize, s: &Superop1) {
    let dim = 1usize << n;
    let m = 1usize << p;
    for r in (0..dim).filter(|r| r & m == 0) {
        for c in (0..dim).filter(|c| c & m == 0) {
            let idx = [r * dim + c, r * dim + c + m, (r + m) * dim + c, (r + m) * dim + c + m];
            let v = idx.map(|k| C64::new(re[k], im[k]));
            for (i, &k) in idx.iter().enumerate() {
                let w: C64 = (0..4).map(|j| s[i][j] * v[j]).sum();
                re[k] = w.re;
                im[k] = w.im;
            }
        }
    }
}
