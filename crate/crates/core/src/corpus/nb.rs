//! Two-class naive-Bayes prefilter over page tokens.
//!
//! Token probabilities are smoothed over per-class *relative* frequencies,
//! P(t|c) = (freq(t,c)/total(c) + α) / (1 + α·|V|), not raw counts — that
//! keeps scores invariant when the training set is duplicated wholesale and
//! still sums to one over the vocabulary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dom::parse_document;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Spam,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBModel {
    pub vocabulary: BTreeMap<String, usize>,
    pub log_likelihood_spam: Vec<f64>,
    pub log_likelihood_normal: Vec<f64>,
    pub log_prior_spam: f64,
    pub log_prior_normal: f64,
    pub cost_fp: f64,
    pub cost_fn: f64,
    pub alpha: f64,
}

impl NBModel {
    /// Minimum posterior that makes flagging the cheaper mistake.
    pub fn threshold(&self) -> f64 {
        self.cost_fp / (self.cost_fp + self.cost_fn)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TrainError {
    #[error("training set has no {0:?} documents")]
    MissingClass(Class),
    #[error("smoothing alpha must be positive, got {0}")]
    BadAlpha(f64),
    #[error("costs must be positive, got fp={0} fn={1}")]
    BadCosts(f64, f64),
}

/// Fits the model from labeled token multisets.
pub fn nb_train(
    docs: &[(Vec<String>, Class)],
    cost_fp: f64,
    cost_fn: f64,
    alpha: f64,
) -> Result<NBModel, TrainError> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(TrainError::BadAlpha(alpha));
    }
    if !cost_fp.is_finite() || cost_fp <= 0.0 || !cost_fn.is_finite() || cost_fn <= 0.0 {
        return Err(TrainError::BadCosts(cost_fp, cost_fn));
    }
    for class in [Class::Spam, Class::Normal] {
        if !docs.iter().any(|(_, c)| *c == class) {
            return Err(TrainError::MissingClass(class));
        }
    }

    let mut vocabulary: BTreeMap<String, usize> = BTreeMap::new();
    for (tokens, _) in docs {
        for t in tokens {
            let next = vocabulary.len();
            vocabulary.entry(t.clone()).or_insert(next);
        }
    }
    let v = vocabulary.len();

    let mut counts = [vec![0u64; v], vec![0u64; v]];
    let mut totals = [0u64, 0u64];
    let mut doc_counts = [0u64, 0u64];
    for (tokens, class) in docs {
        let c = (*class == Class::Normal) as usize;
        doc_counts[c] += 1;
        for t in tokens {
            counts[c][vocabulary[t]] += 1;
            totals[c] += 1;
        }
    }

    let denom = 1.0 + alpha * v as f64;
    let likelihoods = |c: usize| -> Vec<f64> {
        (0..v)
            .map(|i| {
                let relfreq = if totals[c] == 0 {
                    0.0
                } else {
                    counts[c][i] as f64 / totals[c] as f64
                };
                ((relfreq + alpha) / denom).ln()
            })
            .collect()
    };

    let n = (doc_counts[0] + doc_counts[1]) as f64;
    Ok(NBModel {
        vocabulary,
        log_likelihood_spam: likelihoods(0),
        log_likelihood_normal: likelihoods(1),
        log_prior_spam: (doc_counts[0] as f64 / n).ln(),
        log_prior_normal: (doc_counts[1] as f64 / n).ln(),
        cost_fp,
        cost_fn,
        alpha,
    })
}

/// Posterior probability of spam, in [0, 1]. Tokens outside the vocabulary
/// carry the same smoothed mass under both classes, so they drop out.
pub fn nb_score(model: &NBModel, tokens: &[String]) -> f64 {
    let mut log_odds = model.log_prior_spam - model.log_prior_normal;
    for t in tokens {
        if let Some(&i) = model.vocabulary.get(t) {
            log_odds += model.log_likelihood_spam[i] - model.log_likelihood_normal[i];
        }
    }
    1.0 / (1.0 + (-log_odds).exp())
}

/// Indices of the pages whose posterior clears the cost threshold.
pub fn nb_filter(model: &NBModel, pages: &[Vec<String>]) -> Vec<usize> {
    let threshold = model.threshold();
    pages
        .iter()
        .enumerate()
        .filter(|(_, tokens)| nb_score(model, tokens) >= threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Feature extraction for the prefilter: lowercase alphanumeric runs from the
/// raw source, plus structural tokens — tag names, style-attribute
/// property:value pairs, and a script-presence marker.
pub fn page_tokens(html: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut run = String::new();
    for ch in html.chars() {
        if ch.is_alphanumeric() {
            run.extend(ch.to_lowercase());
        } else if !run.is_empty() {
            out.push(std::mem::take(&mut run));
        }
    }
    if !run.is_empty() {
        out.push(run);
    }

    let doc = parse_document(html.as_bytes(), None);
    let mut saw_script = false;
    for (_, el) in doc.elements() {
        out.push(format!("tag:{}", el.tag));
        saw_script |= el.tag == "script";
        if let Some(style) = el.attr("style") {
            for decl in style.split(';') {
                if let Some((prop, value)) = decl.split_once(':') {
                    let prop = prop.trim().to_lowercase();
                    let value = value.trim().to_lowercase();
                    if !prop.is_empty() && !value.is_empty() {
                        out.push(format!("{prop}:{value}"));
                    }
                }
            }
        }
    }
    if saw_script {
        out.push("has:script".to_string());
    }
    out
}
