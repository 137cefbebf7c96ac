//! Kullback-Leibler and Jeffreys divergences, and the one-hot chain that
//! reduces the Jeffreys divergence to the adaptive loss.

use super::{ClassIndex, ProbVector};
use crate::error::{invalid, Error, Result};

fn same_len(p: &ProbVector, q: &ProbVector) -> Result<()> {
    if p.len() != q.len() {
        return Err(invalid(format!(
            "distributions differ in length: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// `D(P, Q) = Σ p_i ln(p_i / q_i)`, with `0 · ln(0 / q) = 0`.
pub fn kl_divergence(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    same_len(p, q)?;
    let mut d = 0.0;
    for (i, (&pi, &qi)) in p.values().iter().zip(q.values()).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::InfiniteDivergence { index: i, p: pi });
        }
        d += pi * (pi / qi).ln();
    }
    Ok(d)
}

/// Symmetric divergence `J(P, Q) = D(P, Q) + D(Q, P)`. Both inputs must be
/// strictly positive.
pub fn jeffreys_divergence(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    same_len(p, q)?;
    for (name, v) in [("p", p), ("q", q)] {
        if let Some(i) = v.values().iter().position(|&x| x == 0.0) {
            return Err(invalid(format!("{name}[{i}] = 0: Jeffreys divergence is infinite")));
        }
    }
    Ok(kl_divergence(p, q)? + kl_divergence(q, p)?)
}

/// One-hot label with every false class set to `eps` and the true class to
/// `1 - (C - 1) eps`. Requires `0 < eps < 1/C`, so the true class keeps the
/// largest mass.
pub fn smoothed_one_hot(c: ClassIndex, num_classes: usize, eps: f64) -> Result<ProbVector> {
    if num_classes < 2 {
        return Err(invalid(format!("need at least 2 classes, got {num_classes}")));
    }
    let c = c.checked(num_classes)?;
    let upper = 1.0 / num_classes as f64;
    if !(eps > 0.0 && eps < upper) {
        return Err(invalid(format!(
            "eps must lie in (0, {upper}) for {num_classes} classes, got {eps}"
        )));
    }
    let mut p = vec![eps; num_classes];
    p[c.0] = 1.0 - (num_classes - 1) as f64 * eps;
    ProbVector::new(p)
}

/// The two one-hot simplified terms `(D(P,Q), D(Q,P)) ≈ (-ln q_c, q_c ln q_c)`.
///
/// The second term keeps only the true-class summand of `D(Q, P)` with
/// `p_c = 1`; the dropped false-class summands `q_i ln(q_i / ε)` diverge as
/// the label smoothing `ε → 0`, so the pair is not a limit of `J(P_ε, Q)`.
/// Their sum is the adaptive loss value.
pub fn jeffreys_one_hot_decomposition(q: &ProbVector, c: ClassIndex) -> Result<(f64, f64)> {
    let c = c.checked(q.len())?;
    let qc = q.get(c);
    if qc == 0.0 {
        return Err(invalid(format!("q[{}] = 0: -ln q_c is infinite", c.0)));
    }
    let ln_qc = qc.ln();
    Ok((-ln_qc, qc * ln_qc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{adaptive_cross_entropy, cross_entropy, softmax};
    use crate::numeric::Rng;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    fn random_logits(rng: &mut Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.uniform(-4.0, 4.0).unwrap()).collect()
    }

    #[test]
    fn kl_examples() {
        let p = pv(&[0.2, 0.3, 0.5]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        // 0.5 ln(4/3), mpmath
        let d = kl_divergence(&pv(&[0.5, 0.5]), &pv(&[0.25, 0.75])).unwrap();
        assert!((d - 0.143_841_036_225_890_46).abs() < 1e-15);
        let q = pv(&[0.3, 0.7]);
        let d = kl_divergence(&pv(&[1.0, 0.0]), &q).unwrap();
        assert!((d + 0.3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn kl_infinite_is_error() {
        let err = kl_divergence(&pv(&[0.5, 0.5]), &pv(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::InfiniteDivergence { index: 1, .. }));
        assert!(kl_divergence(&pv(&[0.5, 0.5]), &pv(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn jeffreys_examples() {
        let p = pv(&[0.9, 0.1]);
        let q = pv(&[0.6, 0.4]);
        // mpmath: D(p,q) = 0.22628916118535888, D(q,p) = 0.31123867958305762
        assert!((kl_divergence(&p, &q).unwrap() - 0.226_289_161_185_358_9).abs() < 1e-15);
        assert!((kl_divergence(&q, &p).unwrap() - 0.311_238_679_583_057_6).abs() < 1e-15);
        assert!((jeffreys_divergence(&p, &q).unwrap() - 0.537_527_840_768_416_5).abs() < 1e-15);
        assert_eq!(jeffreys_divergence(&p, &p).unwrap(), 0.0);
        assert!(jeffreys_divergence(&pv(&[1.0, 0.0]), &q).is_err());
    }

    #[test]
    fn jeffreys_is_symmetric() {
        let mut rng = Rng::new(31);
        for _ in 0..200 {
            let p = softmax(&random_logits(&mut rng, 6)).unwrap();
            let q = softmax(&random_logits(&mut rng, 6)).unwrap();
            let a = jeffreys_divergence(&p, &q).unwrap();
            let b = jeffreys_divergence(&q, &p).unwrap();
            assert!((a - b).abs() <= 1e-14 * a.max(1.0));
        }
    }

    #[test]
    fn smoothed_one_hot_examples() {
        let p = smoothed_one_hot(ClassIndex(1), 4, 0.01).unwrap();
        assert_eq!(p.values(), &[0.01, 0.97, 0.01, 0.01]);
        let p = smoothed_one_hot(ClassIndex(0), 3, 1e-15).unwrap();
        assert!((p.values()[0] - 1.0).abs() < 1e-14);
        assert!(smoothed_one_hot(ClassIndex(0), 2, 0.5 - 1e-9).is_ok());
        assert!(smoothed_one_hot(ClassIndex(0), 2, 0.5).is_err());
        assert!(smoothed_one_hot(ClassIndex(0), 2, 0.0).is_err());
        assert!(smoothed_one_hot(ClassIndex(2), 2, 0.1).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let (a, b) = jeffreys_one_hot_decomposition(&pv(&[0.5, 0.5]), ClassIndex(0)).unwrap();
        assert!((a - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((b + 0.346_573_590_279_972_65).abs() < 1e-15);
        let adp = adaptive_cross_entropy(&[0.0, 0.0], ClassIndex(0)).unwrap();
        assert!((a + b - adp.value).abs() < 1e-15);

        assert_eq!(
            jeffreys_one_hot_decomposition(&pv(&[1.0, 0.0]), ClassIndex(0)).unwrap(),
            (0.0, 0.0)
        );
        assert!(jeffreys_one_hot_decomposition(&pv(&[1.0, 0.0]), ClassIndex(1)).is_err());
    }

    #[test]
    fn decomposition_sums_to_adaptive() {
        let mut rng = Rng::new(77);
        for _ in 0..1000 {
            let n = 2 + rng.below(20);
            let z = random_logits(&mut rng, n);
            let c = ClassIndex(rng.below(n));
            let (a, b) = jeffreys_one_hot_decomposition(&softmax(&z).unwrap(), c).unwrap();
            let adp = adaptive_cross_entropy(&z, c).unwrap();
            assert!((a + b - adp.value).abs() <= 1e-12);
        }
    }

    #[test]
    fn smoothed_kl_approaches_cross_entropy() {
        let mut rng = Rng::new(4);
        for _ in 0..100 {
            let z = random_logits(&mut rng, 10);
            let c = ClassIndex(rng.below(10));
            let q = softmax(&z).unwrap();
            let ce = cross_entropy(&z, c).unwrap().value;
            let mut prev = f64::INFINITY;
            for eps in [1e-4, 1e-6, 1e-8] {
                let gap = (kl_divergence(&smoothed_one_hot(c, 10, eps).unwrap(), &q).unwrap() - ce).abs();
                assert!(gap <= 2.0 * 10.0 * eps * eps.ln().abs(), "eps {eps} gap {gap}");
                assert!(gap < prev);
                prev = gap;
            }
        }
    }

    #[test]
    fn full_reverse_divergence_blows_up_as_eps_shrinks() {
        // The dropped false-class terms of D(Q, P_eps) grow like ln(1/eps).
        let q = pv(&[0.7, 0.2, 0.1]);
        let d = |eps| kl_divergence(&q, &smoothed_one_hot(ClassIndex(0), 3, eps).unwrap()).unwrap();
        assert!(d(1e-8) > d(1e-4) && d(1e-4) > d(1e-2));
    }
}
