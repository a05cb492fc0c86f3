#include "mia/reference.hpp"

#include <cmath>

#include "mia/error.hpp"
#include "mia/rng.hpp"

namespace mia::reference {

std::vector<Classifier> train_ensemble(const Dataset& ds,
                                       const MembershipMask& mask,
                                       const EnsembleConfig& cfg) {
    if (mask.num_models != cfg.num_models)
        throw ValidationError("train_ensemble: mask rows != cfg.num_models");
    if (mask.num_examples != ds.num_examples)
        throw ValidationError("train_ensemble: mask columns != dataset size");

    std::vector<Classifier> models;
    models.reserve(cfg.num_models);
    for (std::size_t i = 0; i < cfg.num_models; ++i) {
        std::vector<std::size_t> indices;
        for (std::size_t j = 0; j < ds.num_examples; ++j)
            if (mask.in(i, j)) indices.push_back(j);
        TrainConfig per_model = cfg.train_template;
        per_model.seed = derive_seed(cfg.master_seed, i);
        models.push_back(train_subset(ds, indices, cfg.arch, per_model));
    }
    return models;
}

PredictionMatrix predict_matrix(const std::vector<Classifier>& models,
                                const Dataset& ds) {
    if (models.empty()) throw ValidationError("predict_matrix: no models");
    PredictionMatrix pm;
    pm.num_models = models.size();
    pm.num_examples = ds.num_examples;
    pm.num_classes = ds.num_classes;
    pm.probs.resize(pm.num_models * pm.num_examples * pm.num_classes);
    for (std::size_t i = 0; i < pm.num_models; ++i) {
        for (std::size_t j = 0; j < pm.num_examples; ++j) {
            const std::vector<double> p = forward(models[i], ds.row(j), ds.dim);
            double* out = pm.cell(i, j);
            for (std::size_t c = 0; c < pm.num_classes; ++c) out[c] = p[c];
        }
    }
    return pm;
}

ScoreMatrix score_matrix(const PredictionMatrix& pm,
                         const std::vector<std::uint32_t>* labels,
                         ScoreVariant variant) {
    if (needs_labels(variant) && labels == nullptr)
        throw ValidationError("score_matrix: labels required");

    ScoreMatrix sm;
    sm.variant = variant;
    sm.num_models = pm.num_models;
    sm.num_examples = pm.num_examples;
    sm.scores.resize(pm.num_models * pm.num_examples);
    for (std::size_t i = 0; i < pm.num_models; ++i) {
        for (std::size_t j = 0; j < pm.num_examples; ++j) {
            const double* p = pm.cell(i, j);
            double s = 0.0;
            switch (variant) {
                case ScoreVariant::baseline_logit_loss:
                    s = score_baseline(p, pm.num_classes, (*labels)[j]);
                    break;
                case ScoreVariant::confidence:
                    s = score_confidence(p, pm.num_classes, (*labels)[j]);
                    break;
                case ScoreVariant::log_confidence:
                    s = score_log_confidence(p, pm.num_classes, (*labels)[j]);
                    break;
                case ScoreVariant::argmax:
                    s = score_argmax(p, pm.num_classes);
                    break;
                case ScoreVariant::log_argmax:
                    s = score_log_argmax(p, pm.num_classes);
                    break;
            }
            sm.scores[i * pm.num_examples + j] = s;
        }
    }
    return sm;
}

namespace {

// Leave-one-out fit by materializing the reduced sample set. Falls back to
// the target's own score when exclusion empties the population, mirroring
// the kernel's rule.
GaussianParams refit_without(const std::vector<double>& values,
                             std::size_t skip_slot, double target_value,
                             bool target_in_population) {
    if (!target_in_population)
        return fit_gaussian(std::span<const double>(values));
    std::vector<double> reduced;
    reduced.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k)
        if (k != skip_slot) reduced.push_back(values[k]);
    if (reduced.empty()) reduced.push_back(target_value);
    return fit_gaussian(std::span<const double>(reduced));
}

}  // namespace

AttackResult run_attack(const ScoreMatrix& scores, const MembershipMask& mask,
                        AttackVariant variant) {
    const std::size_t n_models = scores.num_models;
    const std::size_t m = scores.num_examples;
    if (mask.num_models != n_models || mask.num_examples != m)
        throw ValidationError("run_attack: mask and score dims disagree");

    AttackResult result;
    result.variant = variant;
    result.score_variant = scores.variant;
    result.scores.resize(n_models * m);
    result.membership_truth.resize(n_models * m);
    for (std::size_t t = 0; t < n_models; ++t)
        for (std::size_t j = 0; j < m; ++j)
            result.membership_truth[t * m + j] = mask.in(t, j) ? 1 : 0;

    if (variant == AttackVariant::global_threshold) {
        result.scores = scores.scores;
        return result;
    }

    const bool online_variant =
        variant == AttackVariant::online ||
        variant == AttackVariant::online_fixed_variance;
    const bool fixed_variance =
        variant == AttackVariant::online_fixed_variance ||
        variant == AttackVariant::offline_fixed_variance;

    // Column sample sets, rebuilt per example.
    std::vector<std::vector<double>> in_vals(m), out_vals(m);
    std::vector<std::vector<std::size_t>> in_slot(m), out_slot(m);
    for (std::size_t j = 0; j < m; ++j) {
        in_slot[j].assign(n_models, ~std::size_t{0});
        out_slot[j].assign(n_models, ~std::size_t{0});
        for (std::size_t i = 0; i < n_models; ++i) {
            if (mask.in(i, j)) {
                in_slot[j][i] = in_vals[j].size();
                in_vals[j].push_back(scores.at(i, j));
            } else {
                out_slot[j][i] = out_vals[j].size();
                out_vals[j].push_back(scores.at(i, j));
            }
        }
        if (out_vals[j].empty())
            throw ValidationError("run_attack: example " + std::to_string(j) +
                                  " has no OUT shadow scores");
        if (online_variant && in_vals[j].empty())
            throw ValidationError("run_attack: example " + std::to_string(j) +
                                  " has no IN shadow scores");
    }

    double pooled_in = kVarianceFloor, pooled_out = kVarianceFloor;
    if (fixed_variance) {
        double sum_in = 0.0, sum_out = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            sum_in += fit_gaussian(std::span<const double>(in_vals[j]))
                          .variance;
            sum_out += fit_gaussian(std::span<const double>(out_vals[j]))
                           .variance;
        }
        pooled_in = std::max(sum_in / static_cast<double>(m), kVarianceFloor);
        pooled_out =
            std::max(sum_out / static_cast<double>(m), kVarianceFloor);
    }

    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t t = 0; t < n_models; ++t) {
            const double s = scores.at(t, j);
            const bool t_in = mask.in(t, j);
            GaussianParams q_out =
                refit_without(out_vals[j], out_slot[j][t], s, !t_in);
            if (fixed_variance) q_out.variance = pooled_out;
            double cell;
            if (online_variant) {
                GaussianParams q_in =
                    refit_without(in_vals[j], in_slot[j][t], s, t_in);
                if (fixed_variance) q_in.variance = pooled_in;
                cell = online_score(s, q_in, q_out);
            } else {
                cell = offline_score(s, q_out);
            }
            result.scores[t * m + j] = cell;
        }
    }
    return result;
}

}  // namespace mia::reference
