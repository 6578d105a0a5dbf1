#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedscreen/dataset.hpp"
#include "fedscreen/schema.hpp"

namespace fedscreen::synth {

// Population defaults reproduce the screening cohort's marginals: 5066
// patients, 2015 carriers, 53% male, 54% adult.
struct GenConfig {
    std::size_t n_total = 5066;
    std::size_t n_carrier = 2015;
    double male_fraction = 0.53;
    double adult_fraction = 0.54;
    // Probability that a carrier's MCV, MCH and HB are jointly drawn below
    // their normal ranges (microcytic, hypochromic indices).
    double signal_strength = 0.9;
    // Width of the below-range band as a fraction of the normal-range width.
    std::array<double, kCbcCount> below_span{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    std::uint64_t seed = 42;

    void validate() const;
};

// Exact-count generator: class, gender and age marginals are fixed label
// vectors shuffled by seed. Values are drawn on a 0.01 grid so they survive a
// CSV round trip unchanged.
std::vector<RawRecord> generate(const GenConfig& cfg, const FeatureSchema& schema = default_schema());

inline std::size_t expected_count(double fraction, std::size_t n) {
    return static_cast<std::size_t>(fraction * static_cast<double>(n) + 0.5);
}

}  // namespace fedscreen::synth
