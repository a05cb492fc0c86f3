#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mia/dataset.hpp"
#include "mia/model.hpp"

namespace mia {

// N x M boolean matrix: entry (i, j) says model i trained on example j.
// Columns are balanced: every example is IN for exactly N/2 models.
struct MembershipMask {
    std::vector<std::uint8_t> entries;  // N x M, row-major, 0/1
    std::size_t num_models = 0;
    std::size_t num_examples = 0;

    bool in(std::size_t model, std::size_t example) const {
        return entries[model * num_examples + example] != 0;
    }

    bool operator==(const MembershipMask&) const = default;
};

// N x M x C softmax outputs of every model on every example.
struct PredictionMatrix {
    std::vector<double> probs;  // row-major
    std::size_t num_models = 0;
    std::size_t num_examples = 0;
    std::size_t num_classes = 0;

    const double* cell(std::size_t model, std::size_t example) const {
        return probs.data() +
               (model * num_examples + example) * num_classes;
    }
    double* cell(std::size_t model, std::size_t example) {
        return probs.data() +
               (model * num_examples + example) * num_classes;
    }

    bool operator==(const PredictionMatrix&) const = default;
};

struct EnsembleConfig {
    std::size_t num_models = 16;  // must be even
    Architecture arch;
    TrainConfig train_template;  // per-model seed is derived, see below
    std::uint64_t master_seed = 0;
};

void validate(const MembershipMask& mask);
void validate(const PredictionMatrix& pm);

// Per example j, a seeded uniform choice of exactly N/2 model indices is
// marked IN (column streams derive_seed(seed, j), so the result does not
// depend on evaluation order). Odd N is rejected: the exactly-half contract
// cannot hold.
MembershipMask build_mask(std::size_t num_models, std::size_t num_examples,
                          std::uint64_t seed);

// Trains model i on { j : mask(i, j) } with seed derive_seed(master_seed, i).
// Models are independent, so the result is identical for any jobs count.
std::vector<Classifier> train_ensemble(const Dataset& ds,
                                       const MembershipMask& mask,
                                       const EnsembleConfig& cfg,
                                       int jobs = 1);

// probs[i][j] = forward(models[i], ds.features[j]). Schedule-independent.
PredictionMatrix predict_matrix(const std::vector<Classifier>& models,
                                const Dataset& ds, int jobs = 1);

// Mask file "MMSK" v1: magic, version u32, N u64, M u64, N*M bytes (0/1).
void save_mask(const MembershipMask& mask, const std::string& path);
MembershipMask load_mask(const std::string& path);

// Prediction file "PMAT" v1: magic, version u32, N u64, M u64, C u64,
// N*M*C f64 LE row-major.
void save_predictions(const PredictionMatrix& pm, const std::string& path);
PredictionMatrix load_predictions(const std::string& path);

}  // namespace mia
