#include "mia/attack.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "mia/binio.hpp"
#include "mia/error.hpp"

namespace mia {

GaussianParams fit_gaussian(std::span<const double> samples) {
    if (samples.empty())
        throw ValidationError("fit_gaussian: empty sample set");
    for (double v : samples)
        if (!std::isfinite(v))
            throw ValidationError("fit_gaussian: non-finite sample");

    GaussianParams g;
    double sum = 0.0;
    for (double v : samples) sum += v;
    g.mean = sum / static_cast<double>(samples.size());

    if (samples.size() < 2) {
        g.variance = kVarianceFloor;
        return g;
    }
    double ss = 0.0;
    for (double v : samples) {
        const double d = v - g.mean;
        ss += d * d;
    }
    g.variance =
        std::max(ss / static_cast<double>(samples.size() - 1), kVarianceFloor);
    return g;
}

double online_score(double conf, const GaussianParams& q_in,
                    const GaussianParams& q_out) {
    return gaussian_log_pdf(conf, q_in.mean, q_in.variance) -
           gaussian_log_pdf(conf, q_out.mean, q_out.variance);
}

double offline_score(double conf, const GaussianParams& q_out) {
    return normal_cdf((conf - q_out.mean) / std::sqrt(q_out.variance));
}

const char* to_token(AttackVariant v) {
    switch (v) {
        case AttackVariant::online: return "online";
        case AttackVariant::online_fixed_variance: return "online-fv";
        case AttackVariant::offline: return "offline";
        case AttackVariant::offline_fixed_variance: return "offline-fv";
        case AttackVariant::global_threshold: return "global";
    }
    throw ValidationError("unknown attack variant code");
}

AttackVariant attack_variant_from_token(const std::string& token) {
    for (AttackVariant v : kAllAttackVariants)
        if (token == to_token(v)) return v;
    throw ValidationError("unknown attack variant \"" + token +
                          "\" (expected online|online-fv|offline|offline-fv|"
                          "global)");
}

namespace {

// Column statistics for one population (IN or OUT) at example j:
// count, mean, and centered sums S_u = sum(x_i - mean), SS_u = sum of
// squares, which make the leave-one-out mean/variance exact:
//   mean' = mean + (S_u - u_t) / (n - 1)
//   sum_{i != t} (x_i - mean')^2 = SS_u - u_t^2 - (n - 1) * delta^2
struct ColumnStats {
    std::size_t count = 0;
    double mean = 0.0;
    double s_u = 0.0;
    double ss_u = 0.0;
    // Unbiased variance of the full population (floor-clamped), for pooling.
    double variance = kVarianceFloor;
};

ColumnStats column_stats(const std::vector<double>& vals) {
    ColumnStats st;
    st.count = vals.size();
    if (vals.empty()) return st;
    double sum = 0.0;
    for (double v : vals) sum += v;
    st.mean = sum / static_cast<double>(vals.size());
    for (double v : vals) {
        const double u = v - st.mean;
        st.s_u += u;
        st.ss_u += u * u;
    }
    st.variance =
        vals.size() < 2
            ? kVarianceFloor
            : std::max(st.ss_u / static_cast<double>(vals.size() - 1),
                       kVarianceFloor);
    return st;
}

// Gaussian fitted on the population with the target's value removed. When
// removal empties the population, falls back to the single target value
// (variance floor), keeping tiny ensembles runnable.
GaussianParams leave_one_out(const ColumnStats& st, double target_value,
                             bool target_in_population) {
    GaussianParams g;
    if (!target_in_population) {
        g.mean = st.mean;
        g.variance = st.variance;
        return g;
    }
    const std::size_t n = st.count;
    if (n <= 1) {
        g.mean = target_value;
        g.variance = kVarianceFloor;
        return g;
    }
    const double u_t = target_value - st.mean;
    const double delta = (st.s_u - u_t) / static_cast<double>(n - 1);
    g.mean = st.mean + delta;
    if (n - 1 < 2) {
        g.variance = kVarianceFloor;
        return g;
    }
    const double ss =
        st.ss_u - u_t * u_t - static_cast<double>(n - 1) * delta * delta;
    g.variance =
        std::max(ss / static_cast<double>(n - 2), kVarianceFloor);
    return g;
}

}  // namespace

AttackResult run_attack(const ScoreMatrix& scores, const MembershipMask& mask,
                        AttackVariant variant, int jobs) {
    const std::size_t n_models = scores.num_models;
    const std::size_t m = scores.num_examples;
    if (mask.num_models != n_models || mask.num_examples != m)
        throw ValidationError("run_attack: mask and score dims disagree");
    if (n_models < 2)
        throw ValidationError("run_attack: need at least 2 models");

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

    // Preconditions: per-example population sizes (before target exclusion).
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t in_count = 0;
        for (std::size_t i = 0; i < n_models; ++i)
            in_count += mask.in(i, j) ? 1 : 0;
        const std::size_t out_count = n_models - in_count;
        if (out_count < 1)
            throw ValidationError("run_attack: example " + std::to_string(j) +
                                  " has no OUT shadow scores");
        if (online_variant && in_count < 1)
            throw ValidationError("run_attack: example " + std::to_string(j) +
                                  " has no IN shadow scores");
    }

    const int threads = jobs > 0 ? jobs : omp_get_max_threads();

    // Pass 1 (fixed-variance only): per-example variances, then their means
    // as the pooled variances. The reduction over examples is done serially
    // in index order so the result is thread-count independent.
    double pooled_in = kVarianceFloor;
    double pooled_out = kVarianceFloor;
    if (fixed_variance) {
        std::vector<double> var_in(m, 0.0), var_out(m, 0.0);
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<double> in_vals, out_vals;
            for (std::size_t i = 0; i < n_models; ++i)
                (mask.in(i, j) ? in_vals : out_vals).push_back(scores.at(i, j));
            var_in[j] = column_stats(in_vals).variance;
            var_out[j] = column_stats(out_vals).variance;
        }
        double sum_in = 0.0, sum_out = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            sum_in += var_in[j];
            sum_out += var_out[j];
        }
        pooled_in = std::max(sum_in / static_cast<double>(m), kVarianceFloor);
        pooled_out =
            std::max(sum_out / static_cast<double>(m), kVarianceFloor);
    }

#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> in_vals, out_vals;
        for (std::size_t i = 0; i < n_models; ++i)
            (mask.in(i, j) ? in_vals : out_vals).push_back(scores.at(i, j));
        const ColumnStats in_stats = column_stats(in_vals);
        const ColumnStats out_stats = column_stats(out_vals);

        for (std::size_t t = 0; t < n_models; ++t) {
            const double s = scores.at(t, j);
            const bool t_in = mask.in(t, j);
            GaussianParams q_out = leave_one_out(out_stats, s, !t_in);
            if (fixed_variance) q_out.variance = pooled_out;
            double cell;
            if (online_variant) {
                GaussianParams q_in = leave_one_out(in_stats, s, t_in);
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

namespace {
constexpr char kMagic[4] = {'A', 'T', 'T', 'K'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_attack_result(const AttackResult& result, const std::string& path) {
    BinaryWriter w(path);
    w.magic(kMagic);
    w.u32(kVersion);
    w.u8(static_cast<std::uint8_t>(result.variant));
    w.u8(static_cast<std::uint8_t>(result.score_variant));
    w.u64(result.scores.size());
    w.f64_array(result.scores.data(), result.scores.size());
    w.bytes(result.membership_truth.data(), result.membership_truth.size());
    w.commit();
}

AttackResult load_attack_result(const std::string& path) {
    BinaryReader r(path, "attack result");
    r.expect_magic(kMagic);
    if (r.u32() != kVersion) r.fail("unsupported version");
    const std::uint8_t attack_code = r.u8();
    if (attack_code > 4)
        r.fail("unknown attack variant code " + std::to_string(attack_code));
    const std::uint8_t score_code = r.u8();
    if (score_code > 4)
        r.fail("unknown score variant code " + std::to_string(score_code));

    AttackResult result;
    result.variant = static_cast<AttackVariant>(attack_code);
    result.score_variant = static_cast<ScoreVariant>(score_code);
    const std::uint64_t len = r.u64();
    const std::uint64_t header = r.offset();
    if (static_cast<unsigned __int128>(len) * 9 + header != r.file_size())
        r.fail("length mismatch: file size does not match L");
    result.scores.resize(len);
    r.f64_array(result.scores.data(), result.scores.size());
    for (std::size_t k = 0; k < result.scores.size(); ++k)
        if (!std::isfinite(result.scores[k]))
            r.fail_at("non-finite attack score", header + 8 * k);
    result.membership_truth.resize(len);
    r.bytes(result.membership_truth.data(), result.membership_truth.size());
    for (std::size_t k = 0; k < result.membership_truth.size(); ++k)
        if (result.membership_truth[k] > 1)
            r.fail_at("truth byte must be 0 or 1", header + 8 * len + k);
    r.expect_eof();
    return result;
}

}  // namespace mia
