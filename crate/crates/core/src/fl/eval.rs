use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{cross_entropy_loss, predict, Model, ModelSpec, ParamVector};

const EVAL_CHUNK: usize = 512;

/// Index of the largest logit; the lowest index wins ties.
pub fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Test accuracy and mean cross-entropy of `params` on `test`.
pub fn evaluate(params: &ParamVector, spec: &ModelSpec, test: &Dataset) -> Result<(f64, f64)> {
    if test.is_empty() {
        return Err(Error::validation("test set is empty"));
    }
    spec.check_classes(test.num_classes())?;
    let model = Model::new(spec.clone(), params.clone())?;
    let all: Vec<usize> = (0..test.len()).collect();
    let mut correct = 0usize;
    let mut loss_sum = 0.0;
    for chunk in all.chunks(EVAL_CHUNK) {
        let (x, y) = test.batch(chunk)?;
        let logits = predict(&model, &x)?;
        loss_sum += cross_entropy_loss(&logits, &y)? * y.len() as f64;
        correct += y
            .iter()
            .enumerate()
            .filter(|(s, &label)| argmax(logits.row(*s)) == label)
            .count();
    }
    let n = test.len() as f64;
    Ok((correct as f64 / n, loss_sum / n))
}
