#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mia/shadows.hpp"

namespace mia {

// The five per-cell confidence transforms. Codes are the on-disk values.
enum class ScoreVariant : std::uint8_t {
    baseline_logit_loss = 0,  // log(p_y / (1 - p_y)), clamped
    confidence = 1,           // p_y
    log_confidence = 2,       // log(p_y + 1e-45)
    argmax = 3,               // max_c p_c (label-free)
    log_argmax = 4,           // log(max_c p_c + 1e-45) (label-free)
};

inline constexpr ScoreVariant kAllScoreVariants[] = {
    ScoreVariant::baseline_logit_loss, ScoreVariant::confidence,
    ScoreVariant::log_confidence, ScoreVariant::argmax,
    ScoreVariant::log_argmax};

bool needs_labels(ScoreVariant v);
const char* to_token(ScoreVariant v);  // CLI/report token, e.g. "logconf"
ScoreVariant score_variant_from_token(const std::string& token);

// N x M scalar confidences under one variant.
struct ScoreMatrix {
    std::vector<double> scores;  // row-major
    std::size_t num_models = 0;
    std::size_t num_examples = 0;
    ScoreVariant variant = ScoreVariant::log_confidence;

    double at(std::size_t model, std::size_t example) const {
        return scores[model * num_examples + example];
    }

    bool operator==(const ScoreMatrix&) const = default;
};

double score_baseline(const double* probs, std::size_t num_classes,
                      std::uint32_t y);
double score_confidence(const double* probs, std::size_t num_classes,
                        std::uint32_t y);
double score_log_confidence(const double* probs, std::size_t num_classes,
                            std::uint32_t y);
double score_argmax(const double* probs, std::size_t num_classes);
double score_log_argmax(const double* probs, std::size_t num_classes);

// Elementwise transform of the whole prediction matrix. labels may be null
// only for the label-free variants.
ScoreMatrix score_matrix(const PredictionMatrix& pm,
                         const std::vector<std::uint32_t>* labels,
                         ScoreVariant variant, int jobs = 1);

// Score file "SCOR" v1: magic, version u32, variant u8, N u64, M u64,
// N*M f64 LE.
void save_scores(const ScoreMatrix& sm, const std::string& path);
ScoreMatrix load_scores(const std::string& path);

}  // namespace mia
