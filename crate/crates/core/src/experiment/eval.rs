use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::losses::{
    adaptive_cross_entropy, cross_entropy, gradient_scale_factor, jeffreys_one_hot_decomposition, softmax,
    ClassIndex, PROB_FLOOR,
};

/// Everything `eval-loss` prints for one logit vector.
#[derive(Debug, Clone, Serialize)]
pub struct LossEvaluation {
    pub class: usize,
    pub probs: Vec<f64>,
    pub cross_entropy: f64,
    pub cross_entropy_grad: Vec<f64>,
    pub adaptive: f64,
    pub adaptive_grad: Vec<f64>,
    pub scale_factor: f64,
    /// `(-ln q_c, q_c ln q_c)`.
    pub jeffreys_terms: (f64, f64),
}

pub fn cmd_eval_loss(logits: &[f64], class: usize) -> Result<LossEvaluation> {
    let c = ClassIndex(class);
    let q = softmax(logits)?;
    let ce = cross_entropy(logits, c)?;
    let adp = adaptive_cross_entropy(logits, c)?;
    let qc = q.values()[c.checked(q.len())?.0].max(PROB_FLOOR);
    Ok(LossEvaluation {
        class,
        scale_factor: gradient_scale_factor(qc)?,
        jeffreys_terms: jeffreys_one_hot_decomposition(&q, c).unwrap_or((-qc.ln(), qc * qc.ln())),
        probs: q.into_vec(),
        cross_entropy: ce.value,
        cross_entropy_grad: ce.grad_logits,
        adaptive: adp.value,
        adaptive_grad: adp.grad_logits,
    })
}

fn vector(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", items.join(", "))
}

impl fmt::Display for LossEvaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class            {}", self.class)?;
        writeln!(f, "q                {}", vector(&self.probs))?;
        writeln!(f, "cross_entropy    {:.6}", self.cross_entropy)?;
        writeln!(f, "  grad           {}", vector(&self.cross_entropy_grad))?;
        writeln!(f, "  grad sum       {:.3e}", self.cross_entropy_grad.iter().sum::<f64>())?;
        writeln!(f, "adaptive         {:.6}", self.adaptive)?;
        writeln!(f, "  grad           {}", vector(&self.adaptive_grad))?;
        writeln!(f, "  grad sum       {:.3e}", self.adaptive_grad.iter().sum::<f64>())?;
        writeln!(f, "k(q_c)           {:.6}", self.scale_factor)?;
        write!(
            f,
            "D(P,Q) ≈ {:.6}, D(Q,P) ≈ {:.6}",
            self.jeffreys_terms.0, self.jeffreys_terms.1
        )
    }
}
