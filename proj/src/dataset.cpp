#include "mia/dataset.hpp"

#include <cmath>
#include <limits>

#include "mia/binio.hpp"
#include "mia/error.hpp"
#include "mia/rng.hpp"

namespace mia {

void validate(const SynthSpec& spec) {
    if (spec.num_classes < 1)
        throw ValidationError("synth spec: num_classes must be >= 1");
    if (spec.dim < 1) throw ValidationError("synth spec: dim must be >= 1");
    if (spec.per_class_count < 1)
        throw ValidationError("synth spec: per_class_count must be >= 1");
    if (!(spec.cluster_spread > 0.0))
        throw ValidationError("synth spec: cluster_spread must be > 0");
    if (!(spec.class_center_scale > 0.0))
        throw ValidationError("synth spec: class_center_scale must be > 0");
}

void validate(const Dataset& ds) {
    if (ds.features.size() != ds.num_examples * ds.dim)
        throw ValidationError("dataset: feature buffer size mismatch");
    if (ds.labels.size() != ds.num_examples)
        throw ValidationError("dataset: label count mismatch");
    if (ds.ids.size() != ds.num_examples)
        throw ValidationError("dataset: id count mismatch");
    for (std::size_t j = 0; j < ds.num_examples; ++j) {
        if (ds.labels[j] >= ds.num_classes)
            throw ValidationError("dataset: label out of range at example " +
                                  std::to_string(j));
        if (ds.ids[j] != j)
            throw ValidationError("dataset: ids must be dense 0..M-1");
    }
    for (double v : ds.features)
        if (!std::isfinite(v))
            throw ValidationError("dataset: non-finite feature value");
}

Dataset generate_synthetic(const SynthSpec& spec) {
    validate(spec);

    Dataset ds;
    ds.num_classes = spec.num_classes;
    ds.dim = spec.dim;
    ds.num_examples =
        static_cast<std::size_t>(spec.num_classes) * spec.per_class_count;
    ds.features.resize(ds.num_examples * ds.dim);
    ds.labels.resize(ds.num_examples);
    ds.ids.resize(ds.num_examples);

    std::vector<double> center(spec.dim);
    for (std::uint32_t c = 0; c < spec.num_classes; ++c) {
        // Stream 2c draws the class center, stream 2c+1 its points; the
        // layout is part of the determinism contract.
        Rng center_rng(derive_seed(spec.seed, 2 * std::uint64_t{c}));
        double norm_sq = 0.0;
        for (std::size_t k = 0; k < spec.dim; ++k) {
            center[k] = center_rng.next_gauss();
            norm_sq += center[k] * center[k];
        }
        const double norm = std::sqrt(norm_sq);
        if (norm < 1e-300) {
            for (std::size_t k = 0; k < spec.dim; ++k) center[k] = 0.0;
            center[0] = 1.0;
        } else {
            for (std::size_t k = 0; k < spec.dim; ++k) center[k] /= norm;
        }
        for (std::size_t k = 0; k < spec.dim; ++k)
            center[k] *= spec.class_center_scale;

        Rng point_rng(derive_seed(spec.seed, 2 * std::uint64_t{c} + 1));
        for (std::size_t i = 0; i < spec.per_class_count; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(c) * spec.per_class_count + i;
            double* x = ds.features.data() + j * spec.dim;
            for (std::size_t k = 0; k < spec.dim; ++k)
                x[k] = center[k] + spec.cluster_spread * point_rng.next_gauss();
            ds.labels[j] = c;
            ds.ids[j] = j;
        }
    }
    return ds;
}

namespace {
constexpr char kMagic[4] = {'D', 'S', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    BinaryWriter w(path);
    w.magic(kMagic);
    w.u32(kVersion);
    w.u64(ds.num_examples);
    w.u64(ds.dim);
    w.u64(ds.num_classes);
    w.f64_array(ds.features.data(), ds.features.size());
    for (std::uint32_t l : ds.labels) w.u32(l);
    w.commit();
}

Dataset load_dataset(const std::string& path) {
    BinaryReader r(path, "dataset");
    r.expect_magic(kMagic);
    const std::uint32_t version = r.u32();
    if (version != kVersion) r.fail("unsupported version");

    Dataset ds;
    ds.num_examples = r.u64();
    ds.dim = r.u64();
    const std::uint64_t c = r.u64();
    if (c == 0 || c > std::numeric_limits<std::uint32_t>::max())
        r.fail("class count out of range");
    ds.num_classes = static_cast<std::uint32_t>(c);
    if (ds.dim == 0) r.fail("dimension must be positive");
    const std::uint64_t header = r.offset();
    const unsigned __int128 wide =
        header + static_cast<unsigned __int128>(ds.num_examples) *
                     (static_cast<unsigned __int128>(ds.dim) * 8 + 4);
    const std::uint64_t expected =
        wide > ~std::uint64_t{0} ? ~std::uint64_t{0}
                                 : static_cast<std::uint64_t>(wide);
    if (r.file_size() != expected)
        r.fail("dimension mismatch: header promises " +
               std::to_string(expected) + " bytes, file has " +
               std::to_string(r.file_size()));

    ds.features.resize(ds.num_examples * ds.dim);
    r.f64_array(ds.features.data(), ds.features.size());
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        if (!std::isfinite(ds.features[i]))
            r.fail_at("non-finite feature value", header + 8 * i);

    ds.labels.resize(ds.num_examples);
    for (std::size_t j = 0; j < ds.num_examples; ++j) {
        const std::uint32_t l = r.u32();
        if (l >= ds.num_classes)
            r.fail("label " + std::to_string(l) + " out of range at example " +
                   std::to_string(j));
        ds.labels[j] = l;
    }
    r.expect_eof();

    ds.ids.resize(ds.num_examples);
    for (std::size_t j = 0; j < ds.num_examples; ++j) ds.ids[j] = j;
    return ds;
}

}  // namespace mia
