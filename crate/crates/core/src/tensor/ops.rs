use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor};

/// Valid-mode 1-D convolution (cross-correlation) of an `[n, d]` sequence with
/// an `[h, d]` kernel. Returns the `n - h + 1` pre-activations.
pub fn conv1d_valid<F: Real>(input: &Tensor<F>, kernel: &Tensor<F>, bias: F) -> Result<Tensor<F>> {
    let (n, d) = input.dims2()?;
    let (h, kd) = kernel.dims2()?;
    if kd != d {
        return Err(Error::shape(format!(
            "kernel width {kd} does not match input width {d}"
        )));
    }
    if n < h {
        return Err(Error::SequenceShorterThanKernel { len: n, kernel: h });
    }
    let mut out = Vec::with_capacity(n - h + 1);
    conv_valid_into(input.data(), n, d, kernel.data(), h, bias, &mut out);
    Tensor::new(vec![n - h + 1], out)
}

/// Slice form of [`conv1d_valid`]; `out` is cleared and refilled.
pub(crate) fn conv_valid_into<F: Real>(x: &[F], n: usize, d: usize, w: &[F], h: usize, bias: F, out: &mut Vec<F>) {
    // A window of h consecutive rows is contiguous in row-major storage.
    let span = h * d;
    out.clear();
    out.extend((0..=n - h).map(|i| {
        x[i * d..i * d + span]
            .iter()
            .zip(w)
            .fold(F::zero(), |acc, (&a, &b)| acc + a * b)
            + bias
    }));
}

pub fn matmul<F: Real>(a: &Tensor<F>, b: &Tensor<F>) -> Result<Tensor<F>> {
    let (m, k) = a.dims2()?;
    let (k2, n) = b.dims2()?;
    if k != k2 {
        return Err(Error::shape(format!(
            "matmul inner dimensions differ: [{m},{k}] x [{k2},{n}]"
        )));
    }
    let (ad, bd) = (a.data(), b.data());
    let mut out = vec![F::zero(); m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = ad[i * k + p];
            for (o, &bv) in row.iter_mut().zip(&bd[p * n..(p + 1) * n]) {
                *o = *o + aip * bv;
            }
        }
    }
    Tensor::new(vec![m, n], out)
}

pub fn relu<F: Real>(t: &Tensor<F>) -> Tensor<F> {
    t.map(|x| if x > F::zero() { x } else { F::zero() })
}

pub fn sigmoid_scalar<F: Real>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

pub fn sigmoid<F: Real>(t: &Tensor<F>) -> Tensor<F> {
    t.map(sigmoid_scalar)
}

/// Row-wise softmax over the last dimension of a matrix, max-subtracted.
pub fn softmax_rows<F: Real>(t: &Tensor<F>) -> Result<Tensor<F>> {
    let (m, _) = t.dims2()?;
    let mut out = t.clone();
    for i in 0..m {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(F::neg_infinity(), F::max);
        let mut total = F::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total = total + *v;
        }
        for v in row.iter_mut() {
            *v = *v / total;
        }
    }
    Ok(out)
}

/// Mean binary cross-entropy of logits against {0, 1} labels, in the stable
/// form `log(1 + exp(-|z|)) + max(z, 0) - z·y`.
pub fn bce_with_logits<F: Real>(logits: &Tensor<F>, labels: &Tensor<F>) -> Result<F> {
    logits.expect_same_shape(labels)?;
    if labels.data().iter().any(|&y| y != F::zero() && y != F::one()) {
        return Err(Error::invalid("labels must be 0 or 1"));
    }
    let total: F = logits
        .data()
        .iter()
        .zip(labels.data())
        .map(|(&z, &y)| bce_term(z, y))
        .sum();
    Ok(total / F::from_usize(logits.numel()).expect("count fits"))
}

pub(crate) fn bce_term<F: Real>(z: F, y: F) -> F {
    (-z.abs()).exp().ln_1p() + z.max(F::zero()) - z * y
}

/// `softmax(Q Kᵀ / √d_k) V`.
pub fn scaled_dot_attention<F: Real>(q: &Tensor<F>, k: &Tensor<F>, v: &Tensor<F>) -> Result<Tensor<F>> {
    let (_, dk) = q.dims2()?;
    let (nk, dk2) = k.dims2()?;
    let (nv, _) = v.dims2()?;
    if dk != dk2 {
        return Err(Error::shape(format!("Q width {dk} vs K width {dk2}")));
    }
    if nk != nv {
        return Err(Error::shape(format!("K rows {nk} vs V rows {nv}")));
    }
    let scale = F::one() / F::from_usize(dk).expect("dim fits").sqrt();
    let scores = matmul(q, &k.transpose()?)?.scale(scale);
    matmul(&softmax_rows(&scores)?, v)
}
