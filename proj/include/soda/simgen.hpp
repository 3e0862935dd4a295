#pragma once

#include "soda/glm.hpp"
#include "soda/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace soda {

// How to read a noise spec like "N(0, 2)": as variance 2 (default) or as
// standard deviation 2. The sources are ambiguous, so both are available.
enum class NoiseReading { Variance, StdDev };

struct OracleModel {
    enum class Kind { Classification, Regression };
    Kind kind = Kind::Classification;
    // Classification: discriminant polynomial Q(x) = constant + sum coef * term(x);
    // class 1 iff Q(x) > 0.
    double constant = 0.0;
    std::vector<std::pair<Term, double>> coefficients;
    // Regression: the closed-form link is identified by the example id.
    std::string example;
    double sigma = 0.0;
};

struct ClassificationSim {
    Dataset data;
    TermSet truth;
    OracleModel oracle;
};

struct RegressionSim {
    Dataset data;
    std::vector<int> truth_predictors;
    OracleModel oracle;
};

// Examples 1.1-1.6: two Gaussian classes on the relevant block, scheme-specific
// irrelevant predictors. n_per_class rows per class; replicate selects the RNG
// substream. p = 0 picks the example's default (50, or 1000 for 1.4).
ClassificationSim gen_classification(const std::string& example, int n_per_class, int p,
                                     uint64_t seed, uint64_t replicate = 0,
                                     NoiseReading noise = NoiseReading::Variance);

// Examples 2.1-2.5 and 3.1-3.3 under predictor scenarios (a), (b), (c).
// p = 0 picks the default 1000; scenario (c) requires p = 1000.
RegressionSim gen_regression(const std::string& example, char scenario, int n, int p,
                             uint64_t seed, uint64_t replicate = 0);

// 1 iff Q(x) > 0, else 0 (boundary counts as class 0).
int oracle_classify(const OracleModel& oracle, const Vector& x);

// E[Y | X] under the example's link (the noise term has mean zero).
double oracle_regression_mean(const OracleModel& oracle, const Vector& x);

double oracle_discriminant(const OracleModel& oracle, const Vector& x);

struct SelectionMetrics {
    int vfp = 0, vfn = 0;  // predictor-level false positives / negatives
    int mfp = 0, mfn = 0;  // main-effect terms
    int ifp = 0, ifn = 0;  // interaction terms
    std::optional<double> te;
};

SelectionMetrics selection_metrics(const TermSet& selected, const TermSet& truth);

// Predictor-level counts only (regression truth has no term structure).
SelectionMetrics predictor_metrics(const std::vector<int>& selected,
                                   const std::vector<int>& truth);

// Misclassification rate of a fitted model / of the oracle rule on test data.
double test_error(const ModelFit& fit, const Dataset& test);
double test_error(const OracleModel& oracle, const Dataset& test);

// Default predictor count for an example id (for CLI defaults).
int default_p(const std::string& example);
bool is_classification_example(const std::string& example);

}  // namespace soda
