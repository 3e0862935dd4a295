#pragma once

#include "soda/selector.hpp"
#include "soda/types.hpp"

#include <string>
#include <vector>

namespace soda {

struct SliceAssignment {
    std::vector<int> h;              // per-sample slice id in 1..H, original order
    int H = 0;
    std::vector<double> boundaries;  // H-1 cut values: last y of each slice in sorted order
    std::vector<int> sizes;          // slice sizes, largest-first by construction
};

// Rank-based slicing: stable sort by y (ties keep original order), then split
// into H nearly-equal runs with the n mod H larger slices first. H = 1 is
// accepted and assigns everything to one slice.
SliceAssignment slice(const Vector& y, int H);

// Slice a continuous response and run SODA on the slice labels (K = H).
SelectionResult s_soda_select(const Dataset& data, int H, const SelectionConfig& cfg);

// Per-slice Gaussian summaries of the selected predictors plus the slice means
// of the response; the pieces behind the Bayes-inversion predictor.
class SlicedModel {
  public:
    SlicedModel(std::vector<int> predictors, int H);

    void set_slice(int h, int count, Vector mean, Matrix covariance, double response_mean);
    void finalize();  // factorizes covariances; call after all slices are set

    const std::vector<int>& predictors() const { return predictors_; }
    int dimension() const { return static_cast<int>(predictors_.size()); }
    int slices() const { return H_; }
    int count(int h) const { return counts_[static_cast<size_t>(h)]; }
    const Vector& mean(int h) const { return means_[static_cast<size_t>(h)]; }
    const Matrix& covariance(int h) const { return covariances_[static_cast<size_t>(h)]; }
    double response_mean(int h) const { return response_means_[static_cast<size_t>(h)]; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

    double log_density(int h, const Vector& x) const;

  private:
    std::vector<int> predictors_;
    int H_;
    std::vector<int> counts_;
    std::vector<Vector> means_;
    std::vector<Matrix> covariances_;
    std::vector<double> response_means_;
    std::vector<Matrix> chol_;  // lower Cholesky factors
    std::vector<double> logdet_;
    std::vector<std::string> warnings_;
};

// Per-slice sample means and covariances (denominator n_h) of x restricted to
// `predictors`, ridge-regularized so every covariance is positive definite.
SlicedModel fit_sliced_gaussian(const Dataset& data, const std::vector<int>& predictors, int H);

// Density-weighted average of the slice response means; always a convex
// combination, so the output lies in [min_h M_h, max_h M_h].
double predict(const SlicedModel& model, const Vector& x_new);

}  // namespace soda
