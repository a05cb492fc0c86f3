#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mia {

// Labeled feature matrix; the population from which shadow training sets are
// sampled. Examples carry dense stable ids 0..M-1.
struct Dataset {
    std::vector<double> features;  // M x dim, row-major
    std::vector<std::uint32_t> labels;
    std::vector<std::uint64_t> ids;
    std::size_t num_examples = 0;
    std::size_t dim = 0;
    std::uint32_t num_classes = 0;

    const double* row(std::size_t j) const { return features.data() + j * dim; }

    bool operator==(const Dataset&) const = default;
};

// Parameters for the seeded Gaussian-mixture generator: one isotropic cluster
// per class, centered at a random direction of norm class_center_scale.
struct SynthSpec {
    std::uint32_t num_classes = 2;
    std::size_t dim = 2;
    std::size_t per_class_count = 1;
    double cluster_spread = 1.0;
    double class_center_scale = 1.0;
    std::uint64_t seed = 0;
};

void validate(const SynthSpec& spec);
void validate(const Dataset& ds);

// Pure function of the spec: identical spec (including seed) produces a
// bit-identical Dataset. Examples are laid out class-major, so each class
// appears exactly per_class_count times.
Dataset generate_synthetic(const SynthSpec& spec);

// File format "DSET" v1: magic, version u32, M u64, d u64, C u64,
// M*d features (f64 LE row-major), M labels (u32 LE).
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace mia
