#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mia/dataset.hpp"

namespace mia {

enum class Activation : std::uint32_t { relu = 0, tanh = 1 };

// Feed-forward softmax classifier shape. Empty hidden_dims degenerates to
// multinomial logistic regression.
struct Architecture {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::uint32_t num_classes = 0;
    Activation activation = Activation::relu;

    bool operator==(const Architecture&) const = default;
};

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> biases;   // out

    bool operator==(const DenseLayer&) const = default;
};

struct Classifier {
    Architecture arch;
    std::vector<DenseLayer> layers;

    std::size_t parameter_count() const;
    bool operator==(const Classifier&) const = default;
};

struct TrainConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    double init_scale = 0.5;
};

void validate(const Architecture& arch);
void validate(const TrainConfig& cfg);

// Uniform [-init_scale, init_scale) parameters from derive_seed(seed, 0),
// drawn layer by layer, weights row-major then biases.
Classifier init_classifier(const Architecture& arch, std::uint64_t seed,
                           double init_scale);

// Softmax output over classes; max-subtraction keeps any finite logits from
// overflowing. Pure and thread-safe.
std::vector<double> forward(const Classifier& model, const double* x,
                            std::size_t dim);
std::vector<double> forward(const Classifier& model,
                            const std::vector<double>& x);

// -log(probs[y] + 1e-45); finite for every valid distribution.
double cross_entropy(const std::vector<double>& probs, std::uint32_t y);

// Deterministic mini-batch SGD over the whole dataset. Same (ds, arch, cfg)
// yields a bit-identical Classifier.
Classifier train(const Dataset& ds, const Architecture& arch,
                 const TrainConfig& cfg);

// Same, restricted to the given example indices (shadow-model training sets).
Classifier train_subset(const Dataset& ds,
                        const std::vector<std::size_t>& indices,
                        const Architecture& arch, const TrainConfig& cfg);

// Max relative error between analytic parameter gradients of
// cross_entropy(forward(x), y) and central finite differences, over a
// deterministically sampled parameter subset.
double gradient_check(const Classifier& model, const double* x,
                      std::uint32_t y, double epsilon);

// Fraction of examples whose argmax class matches the label.
double accuracy(const Classifier& model, const Dataset& ds);

// Mean cross-entropy over the given indices (full dataset if empty).
double mean_loss(const Classifier& model, const Dataset& ds,
                 const std::vector<std::size_t>& indices);

// File format "CMLP" v1: magic, version u32, activation u32, L u64 (weight
// layers), L+1 dims u64, then per layer weights (row-major) and biases, f64.
void save_classifier(const Classifier& model, const std::string& path);
Classifier load_classifier(const std::string& path);

}  // namespace mia
