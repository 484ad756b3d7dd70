#pragma once

#include "waveletvfi/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wvfi {

// Counting convention: one multiply-accumulate = 2 FLOPs, biases and
// activations uncharged, warping/resampling/IDWT uncharged. Sparse layers are
// charged at dense * density of their governing mask. Ratios between ledger
// totals are what the benchmarks compare, and those are convention-invariant.
struct FlopsEntry {
    std::string name;
    std::int64_t dense = 0;
    double valid_fraction = 1.0;
    std::int64_t charged = 0;
};

struct FlopsLedger {
    std::vector<FlopsEntry> entries;
    std::int64_t total = 0;

    void add(std::string name, std::int64_t dense, double valid_fraction);
    void append(const std::vector<FlopsEntry>& more);
};

std::int64_t conv_flops(const ConvSpec& spec, int out_h, int out_w, double valid_fraction);
std::int64_t fc_flops(int in_features, int out_features);

} // namespace wvfi
