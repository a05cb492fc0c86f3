#include "mia/shadows.hpp"

#include <omp.h>

#include <cmath>
#include <numeric>
#include <utility>

#include "mia/binio.hpp"
#include "mia/error.hpp"
#include "mia/rng.hpp"

namespace mia {

namespace {

int resolve_jobs(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

}  // namespace

void validate(const MembershipMask& mask) {
    if (mask.num_models < 2)
        throw ValidationError("mask: need at least 2 models");
    if (mask.entries.size() != mask.num_models * mask.num_examples)
        throw ValidationError("mask: entry buffer size mismatch");
    if (mask.num_models % 2 == 0) {
        const std::size_t half = mask.num_models / 2;
        for (std::size_t j = 0; j < mask.num_examples; ++j) {
            std::size_t in_count = 0;
            for (std::size_t i = 0; i < mask.num_models; ++i)
                in_count += mask.in(i, j) ? 1 : 0;
            if (in_count != half)
                throw ValidationError(
                    "mask: column " + std::to_string(j) + " has " +
                    std::to_string(in_count) + " IN entries, expected " +
                    std::to_string(half));
        }
    }
}

void validate(const PredictionMatrix& pm) {
    if (pm.probs.size() != pm.num_models * pm.num_examples * pm.num_classes)
        throw ValidationError("predictions: buffer size mismatch");
    for (std::size_t i = 0; i < pm.num_models; ++i) {
        for (std::size_t j = 0; j < pm.num_examples; ++j) {
            const double* p = pm.cell(i, j);
            double sum = 0.0;
            for (std::size_t c = 0; c < pm.num_classes; ++c) {
                if (!(p[c] >= 0.0) || !std::isfinite(p[c]))
                    throw ValidationError(
                        "predictions: invalid probability at model " +
                        std::to_string(i) + ", example " + std::to_string(j));
                sum += p[c];
            }
            if (std::fabs(sum - 1.0) > 1e-9)
                throw ValidationError(
                    "predictions: row does not sum to 1 at model " +
                    std::to_string(i) + ", example " + std::to_string(j));
        }
    }
}

MembershipMask build_mask(std::size_t num_models, std::size_t num_examples,
                          std::uint64_t seed) {
    if (num_models < 2 || num_models % 2 != 0)
        throw ValidationError(
            "build_mask: num_models must be even and >= 2 (got " +
            std::to_string(num_models) + "); the exactly-half split needs it");
    if (num_examples < 1)
        throw ValidationError("build_mask: num_examples must be >= 1");

    MembershipMask mask;
    mask.num_models = num_models;
    mask.num_examples = num_examples;
    mask.entries.assign(num_models * num_examples, 0);

    const std::size_t half = num_models / 2;
    std::vector<std::size_t> pool(num_models);
    for (std::size_t j = 0; j < num_examples; ++j) {
        Rng rng(derive_seed(seed, j));
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        // Partial Fisher-Yates: the first N/2 slots become the IN set.
        for (std::size_t k = 0; k < half; ++k) {
            const std::size_t r =
                k + static_cast<std::size_t>(rng.next_below(num_models - k));
            std::swap(pool[k], pool[r]);
            mask.entries[pool[k] * num_examples + j] = 1;
        }
    }
    return mask;
}

std::vector<Classifier> train_ensemble(const Dataset& ds,
                                       const MembershipMask& mask,
                                       const EnsembleConfig& cfg,
                                       int jobs) {
    if (mask.num_models != cfg.num_models)
        throw ValidationError("train_ensemble: mask rows != cfg.num_models");
    if (mask.num_examples != ds.num_examples)
        throw ValidationError("train_ensemble: mask columns != dataset size");
    validate(cfg.arch);
    validate(cfg.train_template);

    const std::size_t n = cfg.num_models;
    std::vector<Classifier> models(n);
    std::vector<std::string> failures(n);

#pragma omp parallel for schedule(dynamic) num_threads(resolve_jobs(jobs))
    for (std::size_t i = 0; i < n; ++i) {
        try {
            std::vector<std::size_t> indices;
            for (std::size_t j = 0; j < ds.num_examples; ++j)
                if (mask.in(i, j)) indices.push_back(j);
            TrainConfig per_model = cfg.train_template;
            per_model.seed = derive_seed(cfg.master_seed, i);
            models[i] = train_subset(ds, indices, cfg.arch, per_model);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        if (!failures[i].empty())
            throw NumericError("model " + std::to_string(i) + ": " +
                               failures[i]);
    return models;
}

PredictionMatrix predict_matrix(const std::vector<Classifier>& models,
                                const Dataset& ds, int jobs) {
    if (models.empty())
        throw ValidationError("predict_matrix: no models");
    for (const Classifier& m : models)
        if (m.arch.input_dim != ds.dim || m.arch.num_classes != ds.num_classes)
            throw ValidationError(
                "predict_matrix: model shape does not match dataset");

    PredictionMatrix pm;
    pm.num_models = models.size();
    pm.num_examples = ds.num_examples;
    pm.num_classes = ds.num_classes;
    pm.probs.resize(pm.num_models * pm.num_examples * pm.num_classes);

    const std::size_t cells = pm.num_models * pm.num_examples;
#pragma omp parallel for schedule(static) num_threads(resolve_jobs(jobs))
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const std::size_t i = cell / pm.num_examples;
        const std::size_t j = cell % pm.num_examples;
        const std::vector<double> p = forward(models[i], ds.row(j), ds.dim);
        double* out = pm.cell(i, j);
        for (std::size_t c = 0; c < pm.num_classes; ++c) out[c] = p[c];
    }
    return pm;
}

namespace {
constexpr char kMaskMagic[4] = {'M', 'M', 'S', 'K'};
constexpr char kPredMagic[4] = {'P', 'M', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_mask(const MembershipMask& mask, const std::string& path) {
    BinaryWriter w(path);
    w.magic(kMaskMagic);
    w.u32(kVersion);
    w.u64(mask.num_models);
    w.u64(mask.num_examples);
    w.bytes(mask.entries.data(), mask.entries.size());
    w.commit();
}

MembershipMask load_mask(const std::string& path) {
    BinaryReader r(path, "mask");
    r.expect_magic(kMaskMagic);
    if (r.u32() != kVersion) r.fail("unsupported version");
    MembershipMask mask;
    mask.num_models = r.u64();
    mask.num_examples = r.u64();
    const std::uint64_t header = r.offset();
    const unsigned __int128 cells =
        static_cast<unsigned __int128>(mask.num_models) * mask.num_examples;
    if (cells + header != r.file_size())
        r.fail("dimension mismatch: file size does not match N*M");
    mask.entries.resize(mask.num_models * mask.num_examples);
    r.bytes(mask.entries.data(), mask.entries.size());
    for (std::size_t k = 0; k < mask.entries.size(); ++k)
        if (mask.entries[k] > 1)
            r.fail_at("mask entry must be 0 or 1", header + k);
    r.expect_eof();
    return mask;
}

void save_predictions(const PredictionMatrix& pm, const std::string& path) {
    BinaryWriter w(path);
    w.magic(kPredMagic);
    w.u32(kVersion);
    w.u64(pm.num_models);
    w.u64(pm.num_examples);
    w.u64(pm.num_classes);
    w.f64_array(pm.probs.data(), pm.probs.size());
    w.commit();
}

PredictionMatrix load_predictions(const std::string& path) {
    BinaryReader r(path, "predictions");
    r.expect_magic(kPredMagic);
    if (r.u32() != kVersion) r.fail("unsupported version");
    PredictionMatrix pm;
    pm.num_models = r.u64();
    pm.num_examples = r.u64();
    pm.num_classes = r.u64();
    const std::uint64_t header = r.offset();
    const unsigned __int128 values =
        static_cast<unsigned __int128>(pm.num_models) * pm.num_examples *
        pm.num_classes;
    if (values * 8 + header != r.file_size())
        r.fail("dimension mismatch: file size does not match N*M*C");
    pm.probs.resize(static_cast<std::size_t>(values));
    r.f64_array(pm.probs.data(), pm.probs.size());
    r.expect_eof();
    validate(pm);
    return pm;
}

}  // namespace mia
