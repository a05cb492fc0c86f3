#pragma once

#include "mia/attack.hpp"
#include "mia/dataset.hpp"
#include "mia/scoring.hpp"
#include "mia/shadows.hpp"

// Single-threaded reference implementations of the parallel kernels, written
// as plain loops with no shared-state tricks. Tests compare them against the
// OpenMP paths; the benchmark tool measures the gap. The attack reference
// rebuilds every leave-one-out sample set explicitly and refits with
// fit_gaussian, providing an independent check of the incremental
// leave-one-out algebra used by the kernel.
namespace mia::reference {

std::vector<Classifier> train_ensemble(const Dataset& ds,
                                       const MembershipMask& mask,
                                       const EnsembleConfig& cfg);

PredictionMatrix predict_matrix(const std::vector<Classifier>& models,
                                const Dataset& ds);

ScoreMatrix score_matrix(const PredictionMatrix& pm,
                         const std::vector<std::uint32_t>* labels,
                         ScoreVariant variant);

AttackResult run_attack(const ScoreMatrix& scores, const MembershipMask& mask,
                        AttackVariant variant);

}  // namespace mia::reference
