#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mia/attack.hpp"
#include "mia/dataset.hpp"
#include "mia/model.hpp"
#include "mia/scoring.hpp"

namespace mia {

// Full experiment description: dataset (generated or external), ensemble
// shape, the score/attack grid, and report settings. Everything downstream
// is a deterministic function of this struct.
struct PipelineConfig {
    std::string dataset_path;  // empty: generate from synth below
    SynthSpec synth{.num_classes = 10,
                    .dim = 16,
                    .per_class_count = 40,
                    .cluster_spread = 1.0,
                    .class_center_scale = 3.0,
                    .seed = 0};
    // When unset, the dataset seed is derived from master_seed.
    std::optional<std::uint64_t> synth_seed;

    std::size_t num_models = 16;
    std::vector<std::size_t> hidden_dims = {64};
    Activation activation = Activation::relu;
    TrainConfig train_template{.epochs = 21,
                               .batch_size = 32,
                               .learning_rate = 0.1,
                               .seed = 0,
                               .init_scale = 0.5};

    std::vector<ScoreVariant> score_variants{kAllScoreVariants,
                                             kAllScoreVariants + 5};
    std::vector<AttackVariant> attack_variants{kAllAttackVariants,
                                               kAllAttackVariants + 5};
    std::vector<double> fpr_levels = {0.01, 0.001};

    std::string out_dir = "mia-out";
    std::uint64_t master_seed = 0;
    int jobs = 1;
};

// Applies one key=value setting (config file line or CLI override).
// Unknown keys or unparsable values throw ValidationError.
void apply_config_kv(PipelineConfig& cfg, const std::string& key,
                     const std::string& value);

// Plain-text config: one key=value per line, '#' comments, blank lines ok.
PipelineConfig load_config_file(const std::string& path);

void validate(const PipelineConfig& cfg);

struct RunSummary {
    int stages_run = 0;
    int stages_reused = 0;
    std::string csv_path;
    std::string svg_path;
};

// Runs synth/load -> shadows -> score -> attack -> eval, writing every
// intermediate artifact under cfg.out_dir. Artifacts whose recorded input
// hash (manifest.txt sidecar) still matches are reused instead of
// recomputed. Fully determined by cfg; rerunning changes nothing.
RunSummary run_pipeline(const PipelineConfig& cfg);

}  // namespace mia
