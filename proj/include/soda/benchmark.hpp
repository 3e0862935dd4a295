#pragma once

#include "soda/selector.hpp"
#include "soda/simgen.hpp"
#include "soda/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace soda {

struct BenchmarkConfig {
    std::string example = "1.1";
    char scenario = 'a';          // ignored for 1.x
    std::vector<int> n_grid;      // per-class sizes for 1.x, totals for 2.x/3.x
    int p = 0;                    // 0 = example default
    int reps = 10;
    uint64_t seed = 1;
    int h_select = 5;             // slices for S-SODA selection
    int h_predict = 25;           // slices for the 3.x prediction model
    int grid_size = 20;           // 3.x evaluation grid per axis over [-2, 2]
    int test_size = 10000;        // oracle test points per replicate (1.x)
    NoiseReading noise = NoiseReading::Variance;
    SelectionConfig selection;
};

struct BenchmarkRow {
    std::string example;
    char scenario = 'a';
    int n = 0;
    int replicate = 0;
    SelectionMetrics metrics;
    std::optional<double> te;
    std::optional<double> corr;  // 3.x surface correlation
    double seconds = 0.0;
};

struct GridRow {
    int replicate = 0;
    double x1 = 0.0, x2 = 0.0;
    double y_true = 0.0, y_pred = 0.0;
};

struct BenchmarkOutput {
    std::vector<BenchmarkRow> rows;
    std::vector<GridRow> grid;  // populated for 3.x only
};

// Runs reps x n-grid replicates of the configured experiment. Replicate r of
// size n draws its dataset from substream (seed, r) and, for classification,
// its test set from substream (seed, r + 2^32). Deterministic given the
// config; `progress`, when set, is called after each replicate.
BenchmarkOutput run_benchmark(const BenchmarkConfig& cfg,
                              const std::function<void(const BenchmarkRow&)>& progress = {});

// Mean and (sample) standard deviation per metric for one (example, scenario,
// n) group, in row order of the input.
struct BenchmarkSummary {
    std::string example;
    char scenario = 'a';
    int n = 0;
    int reps = 0;
    double vfp = 0, vfn = 0, mfp = 0, mfn = 0, ifp = 0, ifn = 0;
    double vfp_sd = 0, vfn_sd = 0, mfp_sd = 0, mfn_sd = 0, ifp_sd = 0, ifn_sd = 0;
    std::optional<double> te, te_sd;
    std::optional<double> corr, corr_sd;
    double seconds = 0;
};

std::vector<BenchmarkSummary> summarize(const std::vector<BenchmarkRow>& rows);

}  // namespace soda
