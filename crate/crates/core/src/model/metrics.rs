use super::{Example, TwoTowerModel};

/// Area under the ROC curve via the Mann-Whitney statistic, with tied
/// scores given their average rank. `None` when either class is absent.
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len());
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// Per-class test AUC of the model's probabilities.
pub fn per_class_auc(model: &TwoTowerModel, examples: &[Example]) -> Vec<Option<f64>> {
    let preds: Vec<Vec<f64>> = examples.iter().map(|e| model.logits(&e.content, &e.user)).collect();
    (0..model.config().n_classes)
        .map(|k| {
            let scores: Vec<f64> = preds.iter().map(|p| p[k]).collect();
            let labels: Vec<bool> = examples.iter().map(|e| e.labels[k] > 0.5).collect();
            auc_roc(&scores, &labels)
        })
        .collect()
}
