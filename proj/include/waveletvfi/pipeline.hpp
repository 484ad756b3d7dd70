#pragma once

#include "waveletvfi/config.hpp"
#include "waveletvfi/synthesis.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wvfi {

// Symmetric (edge-inclusive) reflection on the bottom/right edges up to the
// next multiple of 16. Inputs already divisible by 16 pass through untouched.
Tensor pad_reflect_to16(const Tensor& image, int& pad_bottom, int& pad_right);
Tensor crop_top_left(const Tensor& image, int height, int width);

struct PipelineRun {
    SynthesisResult synthesis; // at padded resolution
    Tensor frame;              // cropped back to the input resolution
    MotionEstimate motion;
    ThresholdPolicy policy; // probabilities always filled; sample in dynamic mode
    std::vector<std::int64_t> candidate_flops;
    int pad_bottom = 0;
    int pad_right = 0;
};

// Pads, runs the two-stage pipeline in the config's threshold mode (fixed eta
// or dynamic argmax selection) and crops the result.
PipelineRun run_pipeline(const Tensor& i0, const Tensor& i1, const EngineConfig& config,
                         const NetworkWeights& weights, std::uint64_t seed);

// Stable-key-order JSON text for the interpolate subcommand.
std::string interpolate_report_json(const PipelineRun& run, const EngineConfig& config,
                                    int input_height, int input_width, std::uint64_t seed);

struct BenchRow {
    float eta = 0.0f;
    double psnr = 0.0;
    double ssim = 0.0;
    std::int64_t flops_total = 0; // full-pipeline ledger
    double mask_density[3] = {0.0, 0.0, 0.0};
};

struct BenchTriplet {
    std::string name;
    std::vector<BenchRow> rows;
};

struct BenchReport {
    std::vector<float> etas;
    std::vector<BenchTriplet> triplets;
    std::vector<BenchRow> aggregate; // means over triplets per eta
};

// Sweeps every eta over every triplet directory (<name>/frame0.png|ppm,
// frame1, gt). Motion estimation and context encoding run once per triplet;
// only the synthesis decoders depend on eta.
BenchReport run_bench(const std::string& dir, const std::vector<float>& etas,
                      const EngineConfig& config, const NetworkWeights& weights);

std::string bench_report_json(const BenchReport& report);

// Deterministic synthetic fixtures: a few flat rectangles over a flat
// background with a small shift between frames, and a dense-noise variant.
struct Triplet {
    Tensor frame0, frame1, gt;
};
Triplet make_piecewise_triplet(std::uint64_t seed, int height, int width);
Triplet make_noise_triplet(std::uint64_t seed, int height, int width);

// Property suite behind `wvfi verify`; prints one line per property.
// Returns the number of failures.
int run_verify(std::ostream& out);

// FNV-1a over the raw float bytes; used for determinism checks and reports.
std::uint64_t tensor_hash(const Tensor& t);

} // namespace wvfi
