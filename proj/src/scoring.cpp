#include "mia/scoring.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "mia/binio.hpp"
#include "mia/error.hpp"
#include "mia/numeric.hpp"

namespace mia {

bool needs_labels(ScoreVariant v) {
    return v == ScoreVariant::baseline_logit_loss ||
           v == ScoreVariant::confidence || v == ScoreVariant::log_confidence;
}

const char* to_token(ScoreVariant v) {
    switch (v) {
        case ScoreVariant::baseline_logit_loss: return "baseline";
        case ScoreVariant::confidence: return "conf";
        case ScoreVariant::log_confidence: return "logconf";
        case ScoreVariant::argmax: return "argmax";
        case ScoreVariant::log_argmax: return "logargmax";
    }
    throw ValidationError("unknown score variant code");
}

ScoreVariant score_variant_from_token(const std::string& token) {
    for (ScoreVariant v : kAllScoreVariants)
        if (token == to_token(v)) return v;
    throw ValidationError("unknown score variant \"" + token +
                          "\" (expected baseline|conf|logconf|argmax|"
                          "logargmax)");
}

namespace {

std::uint32_t checked_label(std::size_t num_classes, std::uint32_t y) {
    if (y >= num_classes)
        throw ValidationError("score: class id " + std::to_string(y) +
                              " out of range");
    return y;
}

}  // namespace

double score_baseline(const double* probs, std::size_t num_classes,
                      std::uint32_t y) {
    const double p = std::clamp(probs[checked_label(num_classes, y)],
                                kConfidenceEpsilon, kLogitCeiling);
    return std::log(p / (1.0 - p));
}

double score_confidence(const double* probs, std::size_t num_classes,
                        std::uint32_t y) {
    return probs[checked_label(num_classes, y)];
}

double score_log_confidence(const double* probs, std::size_t num_classes,
                            std::uint32_t y) {
    return std::log(probs[checked_label(num_classes, y)] +
                    kConfidenceEpsilon);
}

double score_argmax(const double* probs, std::size_t num_classes) {
    return *std::max_element(probs, probs + num_classes);
}

double score_log_argmax(const double* probs, std::size_t num_classes) {
    return std::log(score_argmax(probs, num_classes) + kConfidenceEpsilon);
}

ScoreMatrix score_matrix(const PredictionMatrix& pm,
                         const std::vector<std::uint32_t>* labels,
                         ScoreVariant variant, int jobs) {
    if (needs_labels(variant)) {
        if (labels == nullptr)
            throw ValidationError(std::string("score variant \"") +
                                  to_token(variant) +
                                  "\" needs labels but none were given");
        if (labels->size() != pm.num_examples)
            throw ValidationError("score: label count != example count");
    }

    ScoreMatrix sm;
    sm.variant = variant;
    sm.num_models = pm.num_models;
    sm.num_examples = pm.num_examples;
    sm.scores.resize(pm.num_models * pm.num_examples);

    const std::size_t cells = sm.scores.size();
    const std::size_t m = pm.num_examples;
    const std::size_t c = pm.num_classes;
#pragma omp parallel for schedule(static) \
    num_threads(jobs > 0 ? jobs : omp_get_max_threads())
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const double* p = pm.probs.data() + cell * c;
        double s = 0.0;
        switch (variant) {
            case ScoreVariant::baseline_logit_loss:
                s = score_baseline(p, c, (*labels)[cell % m]);
                break;
            case ScoreVariant::confidence:
                s = score_confidence(p, c, (*labels)[cell % m]);
                break;
            case ScoreVariant::log_confidence:
                s = score_log_confidence(p, c, (*labels)[cell % m]);
                break;
            case ScoreVariant::argmax:
                s = score_argmax(p, c);
                break;
            case ScoreVariant::log_argmax:
                s = score_log_argmax(p, c);
                break;
        }
        sm.scores[cell] = s;
    }
    return sm;
}

namespace {
constexpr char kMagic[4] = {'S', 'C', 'O', 'R'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_scores(const ScoreMatrix& sm, const std::string& path) {
    BinaryWriter w(path);
    w.magic(kMagic);
    w.u32(kVersion);
    w.u8(static_cast<std::uint8_t>(sm.variant));
    w.u64(sm.num_models);
    w.u64(sm.num_examples);
    w.f64_array(sm.scores.data(), sm.scores.size());
    w.commit();
}

ScoreMatrix load_scores(const std::string& path) {
    BinaryReader r(path, "scores");
    r.expect_magic(kMagic);
    if (r.u32() != kVersion) r.fail("unsupported version");
    const std::uint8_t code = r.u8();
    if (code > 4) r.fail("unknown score variant code " + std::to_string(code));
    ScoreMatrix sm;
    sm.variant = static_cast<ScoreVariant>(code);
    sm.num_models = r.u64();
    sm.num_examples = r.u64();
    const std::uint64_t header = r.offset();
    const unsigned __int128 cells =
        static_cast<unsigned __int128>(sm.num_models) * sm.num_examples;
    if (cells * 8 + header != r.file_size())
        r.fail("dimension mismatch: file size does not match N*M");
    sm.scores.resize(static_cast<std::size_t>(cells));
    r.f64_array(sm.scores.data(), sm.scores.size());
    for (std::size_t k = 0; k < sm.scores.size(); ++k)
        if (!std::isfinite(sm.scores[k]))
            r.fail_at("non-finite score", header + 8 * k);
    r.expect_eof();
    return sm;
}

}  // namespace mia
