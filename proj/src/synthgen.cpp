#include "fedscreen/synthgen.hpp"

#include <cmath>

#include "fedscreen/error.hpp"
#include "fedscreen/rng.hpp"

namespace fedscreen::synth {

namespace {

constexpr std::size_t kHb = 1, kMcv = 3, kMch = 4;

std::int64_t hundredths(double v) { return static_cast<std::int64_t>(std::llround(v * 100.0)); }

double in_range(Rng& rng, const Range& r) {
    return static_cast<double>(rng.between(hundredths(r.lower), hundredths(r.upper))) / 100.0;
}

double below_range(Rng& rng, const Range& r, double span) {
    const std::int64_t hi = hundredths(r.lower) - 1;
    const std::int64_t lo = std::max<std::int64_t>(1, hundredths(r.lower - span * (r.upper - r.lower)));
    return static_cast<double>(rng.between(std::min(lo, hi), hi)) / 100.0;
}

template <class T>
std::vector<T> exact_counts(std::size_t n, std::size_t n_first, T first, T second, Rng& rng) {
    std::vector<T> v(n, second);
    for (std::size_t i = 0; i < n_first; ++i) v[i] = first;
    rng.shuffle(v);
    return v;
}

}  // namespace

void GenConfig::validate() const {
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::invalid_config, "gen: " + msg); };
    if (n_total == 0) bad("row count must be positive");
    if (n_carrier > n_total) bad("carrier count exceeds row count");
    if (!(male_fraction >= 0.0 && male_fraction <= 1.0)) bad("male fraction must lie in [0, 1]");
    if (!(adult_fraction >= 0.0 && adult_fraction <= 1.0)) bad("adult fraction must lie in [0, 1]");
    if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) bad("signal strength must lie in [0, 1]");
    for (double s : below_span) {
        if (!(s > 0.0) || !std::isfinite(s)) bad("below-range span must be positive");
    }
}

std::vector<RawRecord> generate(const GenConfig& cfg, const FeatureSchema& schema) {
    cfg.validate();
    Rng rng(cfg.seed);
    const std::size_t n = cfg.n_total;
    const auto labels = exact_counts(n, cfg.n_carrier, Label::carrier, Label::non_carrier, rng);
    const auto genders = exact_counts(n, expected_count(cfg.male_fraction, n), Gender::male, Gender::female, rng);
    const auto adult = exact_counts(n, expected_count(cfg.adult_fraction, n), true, false, rng);

    std::vector<RawRecord> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        RawRecord& r = out[i];
        r.label = labels[i];
        r.gender = genders[i];
        r.age_years = adult[i] ? static_cast<double>(rng.between(18, 85)) : static_cast<double>(rng.between(1, 17));
        // The Bernoulli draw is consumed for every carrier so that the stream
        // layout does not depend on signal_strength.
        const bool low_indices = labels[i] == Label::carrier && rng.bernoulli(cfg.signal_strength);
        for (std::size_t f = 0; f < kCbcCount; ++f) {
            const Range& range = schema[f].range_for(genders[i]);
            const bool below = low_indices && (f == kHb || f == kMcv || f == kMch);
            r.cbc[f] = below ? below_range(rng, range, cfg.below_span[f]) : in_range(rng, range);
        }
    }
    return out;
}

}  // namespace fedscreen::synth
