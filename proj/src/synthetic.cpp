#include "annosim/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "annosim/error.hpp"
#include "annosim/rng.hpp"

namespace annosim {

void SyntheticSpec::validate() const {
    if (num_instances < 1) throw ValidationError("synthetic: N must be >= 1");
    if (num_classes < 2) throw ValidationError("synthetic: C must be >= 2");
    if (feature_dim < num_classes) throw ValidationError("synthetic: F must be >= C");
    if (annotators < 1) throw ValidationError("synthetic: M must be >= 1");
    if (noise < 0.0 || noise > 1.0) throw ValidationError("synthetic: noise must be in [0,1]");
    if (!std::isfinite(separation)) throw ValidationError("synthetic: separation must be finite");
}

std::vector<double> SyntheticSpec::centroid(int cls) const {
    std::vector<double> c(static_cast<std::size_t>(feature_dim), 0.0);
    c[static_cast<std::size_t>(cls)] = separation;
    return c;
}

std::vector<double> SyntheticSpec::conditional(int true_cls) const {
    std::vector<double> pi(static_cast<std::size_t>(num_classes), noise / num_classes);
    pi[static_cast<std::size_t>(true_cls)] += 1.0 - noise;
    return pi;
}

int SyntheticSpec::bayes_class(std::span<const double> features) const {
    int best = 0;
    double best_dist = 0.0;
    for (int cls = 0; cls < num_classes; ++cls) {
        const std::vector<double> mu = centroid(cls);
        double dist = 0.0;
        for (std::size_t d = 0; d < mu.size(); ++d) {
            const double diff = features[d] - mu[d];
            dist += diff * diff;
        }
        if (cls == 0 || dist < best_dist) {
            best = cls;
            best_dist = dist;
        }
    }
    return best;
}

namespace {

int draw_categorical(std::span<const double> pmf, SplitMix64& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < pmf.size(); ++j) {
        acc += pmf[j];
        if (u < acc) return static_cast<int>(j);
    }
    return static_cast<int>(pmf.size() - 1);
}

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec, std::vector<int>* true_class_out) {
    spec.validate();

    Dataset ds;
    ds.name = spec.name;
    ds.annotator_count = spec.annotators;
    for (int c = 0; c < spec.num_classes; ++c) ds.class_labels.push_back("class_" + std::to_string(c));
    ds.instances.reserve(static_cast<std::size_t>(spec.num_instances));
    if (true_class_out) {
        true_class_out->clear();
        true_class_out->reserve(static_cast<std::size_t>(spec.num_instances));
    }

    char id_buf[32];
    for (int i = 0; i < spec.num_instances; ++i) {
        // One stream per instance: the draw order of other instances never
        // affects this one.
        SplitMix64 rng(stream_seed({seed_tag::synthetic, spec.seed, static_cast<std::uint64_t>(i)}));

        const int z = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(spec.num_classes)));
        if (true_class_out) true_class_out->push_back(z);

        Instance inst;
        std::snprintf(id_buf, sizeof id_buf, "syn-%06d", i);
        inst.id = id_buf;

        std::vector<double> x = spec.centroid(z);
        for (double& v : x) v += rng.next_gaussian();
        inst.features = std::move(x);

        const std::vector<double> pi = spec.conditional(z);
        inst.label_counts.assign(static_cast<std::size_t>(spec.num_classes), 0);
        for (int a = 0; a < spec.annotators; ++a) {
            ++inst.label_counts[static_cast<std::size_t>(draw_categorical(pi, rng))];
        }
        ds.instances.push_back(std::move(inst));
    }

    ds.validate();
    return ds;
}

}  // namespace annosim
