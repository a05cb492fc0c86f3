#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mia/numeric.hpp"
#include "mia/scoring.hpp"
#include "mia/shadows.hpp"

namespace mia {

struct GaussianParams {
    double mean = 0.0;
    double variance = kVarianceFloor;
};

// Arithmetic mean and unbiased (n-1) sample variance, clamped below at
// kVarianceFloor; a single sample gets the floor directly.
GaussianParams fit_gaussian(std::span<const double> samples);

// log N(conf; q_in) - log N(conf; q_out), evaluated in log space so the
// result is finite for any finite inputs. Higher means more member-like.
double online_score(double conf, const GaussianParams& q_in,
                    const GaussianParams& q_out);

// Probability mass of the OUT distribution below conf:
// normal_cdf((conf - mean) / sqrt(variance)). Monotone increasing in conf.
double offline_score(double conf, const GaussianParams& q_out);

// Attack rows of the report grid. Codes are the on-disk values.
enum class AttackVariant : std::uint8_t {
    online = 0,
    online_fixed_variance = 1,
    offline = 2,
    offline_fixed_variance = 3,
    global_threshold = 4,
};

inline constexpr AttackVariant kAllAttackVariants[] = {
    AttackVariant::online, AttackVariant::online_fixed_variance,
    AttackVariant::offline, AttackVariant::offline_fixed_variance,
    AttackVariant::global_threshold};

const char* to_token(AttackVariant v);  // "online", "online-fv", ...
AttackVariant attack_variant_from_token(const std::string& token);

// Pooled leave-one-model-out evaluation: every (target model t, example j)
// cell is scored once, so scores/truth have length N*M with cell (t, j) at
// index t*M + j.
struct AttackResult {
    std::vector<double> scores;
    std::vector<std::uint8_t> membership_truth;
    AttackVariant variant = AttackVariant::online;
    ScoreVariant score_variant = ScoreVariant::log_confidence;

    bool operator==(const AttackResult&) const = default;
};

// For each cell (t, j), model t's score is attacked with Gaussians fitted on
// the remaining models' scores at j, split by the mask. The fixed-variance
// variants replace per-example variances with population-pooled ones (the
// mean over examples of per-example unbiased variances, IN and OUT pooled
// separately). If excluding t empties its own population (N = 2), the fit
// falls back to the target's single score, which lands on the variance
// floor.
AttackResult run_attack(const ScoreMatrix& scores, const MembershipMask& mask,
                        AttackVariant variant, int jobs = 1);

// Attack file "ATTK" v1: magic, version u32, attack variant u8, score
// variant u8, L u64, L scores f64 LE, L truth bytes (0/1).
void save_attack_result(const AttackResult& result, const std::string& path);
AttackResult load_attack_result(const std::string& path);

}  // namespace mia
