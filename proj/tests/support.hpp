#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "fedscreen/dataset.hpp"
#include "fedscreen/learners/local_model.hpp"
#include "fedscreen/learners/samples.hpp"
#include "fedscreen/preprocess.hpp"
#include "fedscreen/rng.hpp"
#include "fedscreen/synthgen.hpp"

namespace testing {

using namespace fedscreen;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("fedscreen_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline BinnedRecord random_record(Rng& rng, int label) {
    BinnedRecord r;
    for (auto& b : r.bins) b = static_cast<std::uint8_t>(rng.below(6));
    r.gender_bin = static_cast<std::uint8_t>(rng.below(2));
    r.age_bin = static_cast<std::uint8_t>(rng.below(2));
    r.label = static_cast<std::uint8_t>(label);
    return r;
}

inline Dataset random_dataset(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) d.records.push_back(random_record(rng, static_cast<int>(i % 2)));
    return d;
}

// Binned synthetic cohort.
inline Dataset synthetic(std::uint64_t seed, std::size_t n = 600, std::size_t carriers = 240, double signal = 0.9) {
    synth::GenConfig cfg;
    cfg.n_total = n;
    cfg.n_carrier = carriers;
    cfg.signal_strength = signal;
    cfg.seed = seed;
    return preprocess::normalize_dataset(synth::generate(cfg), default_schema());
}

inline std::vector<double> random_input(Rng& rng) {
    std::vector<double> x(kFeatureCount);
    const auto card = feature_cardinality();
    for (std::size_t f = 0; f < x.size(); ++f) x[f] = static_cast<double>(rng.below(static_cast<std::uint64_t>(card[f])));
    return x;
}

// A model of `kind` trained on a small random dataset with random
// hyperparameters. Labels are noisy functions of the features so trees grow.
inline learn::LocalModel generated_model(learn::ModelKind kind, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = 8 + rng.below(40);
    learn::Samples s(kFeatureCount, feature_cardinality());
    const auto f = rng.below(kFeatureCount);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = random_input(rng);
        int y = (x[f] <= 1 ? 1 : 0) ^ (rng.bernoulli(0.15) ? 1 : 0);
        if (i < 2) y = static_cast<int>(i);  // both classes present
        s.add(x, y);
    }
    if (kind == learn::ModelKind::nb && rng.bernoulli(0.1)) {
        // single-class data gives an infinite log prior
        for (auto& y : s.labels) y = 1;
    }
    learn::LearnerHyper h;
    h.dt.max_depth = 1 + rng.below(6);
    h.dt.min_leaf = 1 + rng.below(4);
    h.nb_alpha = 0.25 + rng.uniform() * 2;
    h.svm.C = 0.1 + rng.uniform() * 10;
    h.svm.epochs = 5 + rng.below(30);
    h.svm.seed = rng.next();
    h.svm.gamma = rng.uniform();
    h.svm.encoding = rng.bernoulli(0.5) ? learn::SvmEncoding::one_hot : learn::SvmEncoding::ordinal;
    learn::LocalModel m;
    m.model = learn::train_model(kind, s, h);
    m.meta.client_id = static_cast<std::uint32_t>(rng.below(8));
    m.meta.train_size = n;
    m.meta.train_accuracy = learn::accuracy(m.model, s);
    return m;
}

}  // namespace testing
