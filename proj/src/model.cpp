#include "mia/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mia/binio.hpp"
#include "mia/error.hpp"
#include "mia/numeric.hpp"
#include "mia/rng.hpp"

namespace mia {

namespace {

double activate(double z, Activation act) {
    return act == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Derivative expressed through the activation output a = act(z).
double activate_grad(double a, double z, Activation act) {
    return act == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - a * a;
}

void softmax_inplace(std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

// Per-layer activations kept around for backprop.
struct ForwardTrace {
    // pre[l]: z of layer l; post[l]: act(z) for hidden layers, softmax for
    // the last.
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
};

void forward_trace(const Classifier& model, const double* x,
                   ForwardTrace& t) {
    const std::size_t L = model.layers.size();
    t.pre.resize(L);
    t.post.resize(L);
    const double* input = x;
    std::size_t input_dim = model.arch.input_dim;
    for (std::size_t l = 0; l < L; ++l) {
        const DenseLayer& layer = model.layers[l];
        t.pre[l].assign(layer.out, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double* w = layer.weights.data() + o * layer.in;
            double z = layer.biases[o];
            for (std::size_t i = 0; i < layer.in; ++i) z += w[i] * input[i];
            t.pre[l][o] = z;
        }
        t.post[l] = t.pre[l];
        if (l + 1 < L) {
            for (std::size_t o = 0; o < layer.out; ++o)
                t.post[l][o] = activate(t.pre[l][o], model.arch.activation);
        } else {
            softmax_inplace(t.post[l]);
        }
        input = t.post[l].data();
        input_dim = layer.out;
    }
    (void)input_dim;
}

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void zero_like(const Classifier& model) {
        weights.resize(model.layers.size());
        biases.resize(model.layers.size());
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            weights[l].assign(model.layers[l].weights.size(), 0.0);
            biases[l].assign(model.layers[l].biases.size(), 0.0);
        }
    }
};

// Accumulates the gradient of cross_entropy(softmax(logits), y) for one
// example into g. dL/dlogits = probs - onehot(y).
void backward_accumulate(const Classifier& model, const double* x,
                         std::uint32_t y, const ForwardTrace& t,
                         Gradients& g) {
    const std::size_t L = model.layers.size();
    std::vector<double> delta = t.post[L - 1];
    delta[y] -= 1.0;

    for (std::size_t l = L; l-- > 0;) {
        const DenseLayer& layer = model.layers[l];
        const double* input = (l == 0) ? x : t.post[l - 1].data();
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double d = delta[o];
            double* gw = g.weights[l].data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) gw[i] += d * input[i];
            g.biases[l][o] += d;
        }
        if (l == 0) break;
        std::vector<double> prev(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double d = delta[o];
            const double* w = layer.weights.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) prev[i] += d * w[i];
        }
        for (std::size_t i = 0; i < layer.in; ++i)
            prev[i] *= activate_grad(t.post[l - 1][i], t.pre[l - 1][i],
                                     model.arch.activation);
        delta = std::move(prev);
    }
}

}  // namespace

void validate(const Architecture& arch) {
    if (arch.input_dim < 1)
        throw ValidationError("architecture: input_dim must be >= 1");
    if (arch.num_classes < 2)
        throw ValidationError("architecture: num_classes must be >= 2");
    for (std::size_t h : arch.hidden_dims)
        if (h < 1)
            throw ValidationError("architecture: hidden dims must be >= 1");
}

void validate(const TrainConfig& cfg) {
    if (cfg.epochs < 1)
        throw ValidationError("train config: epochs must be >= 1");
    if (cfg.batch_size < 1)
        throw ValidationError("train config: batch_size must be >= 1");
    if (!(cfg.learning_rate > 0.0))
        throw ValidationError("train config: learning_rate must be > 0");
    if (!(cfg.init_scale > 0.0))
        throw ValidationError("train config: init_scale must be > 0");
}

std::size_t Classifier::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& l : layers) n += l.weights.size() + l.biases.size();
    return n;
}

Classifier init_classifier(const Architecture& arch, std::uint64_t seed,
                           double init_scale) {
    validate(arch);
    Classifier model;
    model.arch = arch;

    std::vector<std::size_t> dims;
    dims.push_back(arch.input_dim);
    dims.insert(dims.end(), arch.hidden_dims.begin(), arch.hidden_dims.end());
    dims.push_back(arch.num_classes);

    Rng rng(derive_seed(seed, 0));
    model.layers.resize(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer& layer = model.layers[l];
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.weights.resize(layer.in * layer.out);
        layer.biases.resize(layer.out);
        for (double& w : layer.weights)
            w = rng.next_uniform(-init_scale, init_scale);
        for (double& b : layer.biases)
            b = rng.next_uniform(-init_scale, init_scale);
    }
    return model;
}

std::vector<double> forward(const Classifier& model, const double* x,
                            std::size_t dim) {
    if (dim != model.arch.input_dim)
        throw ValidationError(
            "forward: input has dimension " + std::to_string(dim) +
            ", model expects " + std::to_string(model.arch.input_dim));
    thread_local ForwardTrace trace;
    forward_trace(model, x, trace);
    return trace.post.back();
}

std::vector<double> forward(const Classifier& model,
                            const std::vector<double>& x) {
    return forward(model, x.data(), x.size());
}

double cross_entropy(const std::vector<double>& probs, std::uint32_t y) {
    if (y >= probs.size())
        throw ValidationError("cross_entropy: class id " + std::to_string(y) +
                              " out of range");
    return -std::log(probs[y] + kConfidenceEpsilon);
}

Classifier train_subset(const Dataset& ds,
                        const std::vector<std::size_t>& indices,
                        const Architecture& arch, const TrainConfig& cfg) {
    validate(arch);
    validate(cfg);
    if (indices.empty())
        throw ValidationError("train: empty training set");
    if (arch.input_dim != ds.dim)
        throw ValidationError("train: architecture input_dim != dataset dim");
    if (arch.num_classes != ds.num_classes)
        throw ValidationError(
            "train: architecture num_classes != dataset num_classes");
    for (std::size_t j : indices)
        if (j >= ds.num_examples)
            throw ValidationError("train: example index out of range");

    Classifier model = init_classifier(arch, cfg.seed, cfg.init_scale);

    // Stream 0 of cfg.seed initializes parameters, stream 1 drives the
    // per-epoch permutation of example order.
    Rng shuffle_rng(derive_seed(cfg.seed, 1));
    std::vector<std::size_t> order(indices);

    ForwardTrace trace;
    Gradients grads;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t k = order.size(); k > 1; --k)
            std::swap(order[k - 1], order[shuffle_rng.next_below(k)]);

        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size, ++batch_index) {
            const std::size_t end =
                std::min(start + cfg.batch_size, order.size());
            grads.zero_like(model);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t j = order[k];
                forward_trace(model, ds.row(j), trace);
                batch_loss += cross_entropy(trace.post.back(), ds.labels[j]);
                backward_accumulate(model, ds.row(j), ds.labels[j], trace,
                                    grads);
            }
            if (!std::isfinite(batch_loss))
                throw NumericError("training diverged: non-finite loss at "
                                   "epoch " +
                                   std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index));
            const double scale =
                cfg.learning_rate / static_cast<double>(end - start);
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                DenseLayer& layer = model.layers[l];
                for (std::size_t i = 0; i < layer.weights.size(); ++i)
                    layer.weights[i] -= scale * grads.weights[l][i];
                for (std::size_t i = 0; i < layer.biases.size(); ++i)
                    layer.biases[i] -= scale * grads.biases[l][i];
            }
        }
    }
    return model;
}

Classifier train(const Dataset& ds, const Architecture& arch,
                 const TrainConfig& cfg) {
    std::vector<std::size_t> all(ds.num_examples);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return train_subset(ds, all, arch, cfg);
}

double gradient_check(const Classifier& model, const double* x,
                      std::uint32_t y, double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1e-2)
        throw ValidationError("gradient_check: epsilon must be in (0, 1e-2]");
    if (y >= model.arch.num_classes)
        throw ValidationError("gradient_check: class id out of range");

    ForwardTrace trace;
    forward_trace(model, x, trace);
    Gradients analytic;
    analytic.zero_like(model);
    backward_accumulate(model, x, y, trace, analytic);

    // Flatten parameter references: weights then biases per layer.
    Classifier probe = model;
    std::vector<double*> params;
    std::vector<const double*> grads;
    for (std::size_t l = 0; l < probe.layers.size(); ++l) {
        for (std::size_t i = 0; i < probe.layers[l].weights.size(); ++i) {
            params.push_back(&probe.layers[l].weights[i]);
            grads.push_back(&analytic.weights[l][i]);
        }
        for (std::size_t i = 0; i < probe.layers[l].biases.size(); ++i) {
            params.push_back(&probe.layers[l].biases[i]);
            grads.push_back(&analytic.biases[l][i]);
        }
    }

    const std::size_t total = params.size();
    const std::size_t max_probes = 512;
    const std::size_t stride =
        total <= max_probes ? 1 : (total + max_probes - 1) / max_probes;

    double max_rel = 0.0;
    for (std::size_t p = 0; p < total; p += stride) {
        const double saved = *params[p];
        *params[p] = saved + epsilon;
        const double up =
            cross_entropy(forward(probe, x, probe.arch.input_dim), y);
        *params[p] = saved - epsilon;
        const double down =
            cross_entropy(forward(probe, x, probe.arch.input_dim), y);
        *params[p] = saved;
        const double fd = (up - down) / (2.0 * epsilon);
        const double a = *grads[p];
        const double rel =
            std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), 1e-6});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

double accuracy(const Classifier& model, const Dataset& ds) {
    if (ds.num_examples == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < ds.num_examples; ++j) {
        const std::vector<double> p = forward(model, ds.row(j), ds.dim);
        const std::size_t top = static_cast<std::size_t>(
            std::max_element(p.begin(), p.end()) - p.begin());
        if (top == ds.labels[j]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ds.num_examples);
}

double mean_loss(const Classifier& model, const Dataset& ds,
                 const std::vector<std::size_t>& indices) {
    std::vector<std::size_t> all;
    const std::vector<std::size_t>* use = &indices;
    if (indices.empty()) {
        all.resize(ds.num_examples);
        std::iota(all.begin(), all.end(), std::size_t{0});
        use = &all;
    }
    double sum = 0.0;
    for (std::size_t j : *use)
        sum += cross_entropy(forward(model, ds.row(j), ds.dim), ds.labels[j]);
    return sum / static_cast<double>(use->size());
}

namespace {
constexpr char kMagic[4] = {'C', 'M', 'L', 'P'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_classifier(const Classifier& model, const std::string& path) {
    BinaryWriter w(path);
    w.magic(kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(model.arch.activation));
    w.u64(model.layers.size());
    w.u64(model.arch.input_dim);
    for (std::size_t h : model.arch.hidden_dims) w.u64(h);
    w.u64(model.arch.num_classes);
    for (const DenseLayer& layer : model.layers) {
        w.f64_array(layer.weights.data(), layer.weights.size());
        w.f64_array(layer.biases.data(), layer.biases.size());
    }
    w.commit();
}

Classifier load_classifier(const std::string& path) {
    BinaryReader r(path, "classifier");
    r.expect_magic(kMagic);
    if (r.u32() != kVersion) r.fail("unsupported version");
    const std::uint32_t act = r.u32();
    if (act > 1) r.fail("unknown activation code " + std::to_string(act));
    const std::uint64_t L = r.u64();
    if (L == 0 || L > 64) r.fail("layer count out of range");

    std::vector<std::size_t> dims(L + 1);
    for (std::size_t i = 0; i <= L; ++i) {
        dims[i] = r.u64();
        if (dims[i] == 0 || dims[i] > (1u << 24))
            r.fail("dimension out of range");
    }

    Classifier model;
    model.arch.activation = static_cast<Activation>(act);
    model.arch.input_dim = dims.front();
    model.arch.hidden_dims.assign(dims.begin() + 1, dims.end() - 1);
    if (dims.back() < 2) r.fail("class count must be >= 2");
    model.arch.num_classes = static_cast<std::uint32_t>(dims.back());

    model.layers.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        DenseLayer& layer = model.layers[l];
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.weights.resize(layer.in * layer.out);
        layer.biases.resize(layer.out);
        r.f64_array(layer.weights.data(), layer.weights.size());
        r.f64_array(layer.biases.data(), layer.biases.size());
        for (double v : layer.weights)
            if (!std::isfinite(v)) r.fail("non-finite weight");
        for (double v : layer.biases)
            if (!std::isfinite(v)) r.fail("non-finite bias");
    }
    r.expect_eof();
    return model;
}

}  // namespace mia
