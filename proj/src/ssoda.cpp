#include "soda/ssoda.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace soda {

SliceAssignment slice(const Vector& y, int H) {
    const int n = static_cast<int>(y.size());
    if (H < 1) throw BadInput("slice count must be >= 1");
    if (H > n) throw HTooLarge("H=" + std::to_string(H) + " exceeds n=" + std::to_string(n));

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return y(a) < y(b); });

    SliceAssignment out;
    out.H = H;
    out.h.assign(static_cast<size_t>(n), 0);
    const int q = n / H;
    const int r = n % H;
    int pos = 0;
    for (int s = 0; s < H; ++s) {
        const int size = q + (s < r ? 1 : 0);  // larger slices first
        for (int i = 0; i < size; ++i) out.h[static_cast<size_t>(order[static_cast<size_t>(pos + i)])] = s + 1;
        pos += size;
        out.sizes.push_back(size);
        if (s + 1 < H) out.boundaries.push_back(y(order[static_cast<size_t>(pos - 1)]));
    }
    return out;
}

SelectionResult s_soda_select(const Dataset& data, int H, const SelectionConfig& cfg) {
    if (data.is_categorical())
        throw DimensionMismatch("s_soda_select requires a continuous response");
    if (H < 2) throw BadInput("s_soda_select needs H >= 2");
    SliceAssignment sa = slice(data.y(), H);
    Dataset sliced = Dataset::categorical(data.x(), sa.h, data.column_names());
    return soda_select(sliced, cfg);
}

SlicedModel::SlicedModel(std::vector<int> predictors, int H)
    : predictors_(std::move(predictors)), H_(H) {
    if (H_ < 1) throw BadInput("SlicedModel needs H >= 1");
    counts_.assign(static_cast<size_t>(H_), 0);
    means_.assign(static_cast<size_t>(H_), Vector::Zero(dimension()));
    covariances_.assign(static_cast<size_t>(H_), Matrix::Zero(dimension(), dimension()));
    response_means_.assign(static_cast<size_t>(H_), 0.0);
}

void SlicedModel::set_slice(int h, int count, Vector mean, Matrix covariance,
                            double response_mean) {
    if (h < 0 || h >= H_) throw IndexOutOfRange("slice index out of range");
    if (mean.size() != dimension() || covariance.rows() != dimension() ||
        covariance.cols() != dimension())
        throw DimensionMismatch("slice parameter dimensions do not match predictors");
    counts_[static_cast<size_t>(h)] = count;
    means_[static_cast<size_t>(h)] = std::move(mean);
    covariances_[static_cast<size_t>(h)] = std::move(covariance);
    response_means_[static_cast<size_t>(h)] = response_mean;
}

void SlicedModel::finalize() {
    chol_.clear();
    logdet_.clear();
    for (int h = 0; h < H_; ++h) {
        Eigen::LLT<Matrix> llt(covariances_[static_cast<size_t>(h)]);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("slice " + std::to_string(h + 1) +
                                      " covariance is not positive definite");
        Matrix l = llt.matrixL();
        logdet_.push_back(2.0 * l.diagonal().array().log().sum());
        chol_.push_back(std::move(l));
    }
}

double SlicedModel::log_density(int h, const Vector& x) const {
    if (chol_.empty()) throw DataError("SlicedModel::finalize was not called");
    if (x.size() != dimension()) throw DimensionMismatch("x length does not match predictors");
    const Matrix& l = chol_[static_cast<size_t>(h)];
    Vector v = x - means_[static_cast<size_t>(h)];
    l.triangularView<Eigen::Lower>().solveInPlace(v);
    return -0.5 * (dimension() * std::log(2.0 * std::numbers::pi) +
                   logdet_[static_cast<size_t>(h)] + v.squaredNorm());
}

SlicedModel fit_sliced_gaussian(const Dataset& data, const std::vector<int>& predictors, int H) {
    if (data.is_categorical())
        throw DimensionMismatch("fit_sliced_gaussian requires a continuous response");
    const int d = static_cast<int>(predictors.size());
    if (d < 1) throw BadInput("need at least one predictor");
    for (int j : predictors)
        if (j < 1 || j > data.p()) throw IndexOutOfRange("predictor index out of range");

    SliceAssignment sa = slice(data.y(), H);
    SlicedModel model(predictors, H);
    for (int h = 1; h <= H; ++h) {
        const int nh = sa.sizes[static_cast<size_t>(h - 1)];
        if (nh < 2) throw SliceTooSmall("slice " + std::to_string(h) + " has " +
                                        std::to_string(nh) + " samples; need at least 2");
        Matrix rows(nh, d);
        double y_sum = 0.0;
        int r = 0;
        for (int i = 0; i < data.n(); ++i) {
            if (sa.h[static_cast<size_t>(i)] != h) continue;
            for (int c = 0; c < d; ++c) rows(r, c) = data.x()(i, predictors[static_cast<size_t>(c)] - 1);
            y_sum += data.y()(i);
            ++r;
        }
        Vector mu = rows.colwise().mean();
        Matrix centered = rows.rowwise() - mu.transpose();
        Matrix sigma = (centered.transpose() * centered) / nh;
        const double lambda = 1e-6 * std::max(1.0, sigma.trace() / d);
        sigma.diagonal().array() += lambda;
        model.set_slice(h - 1, nh, std::move(mu), std::move(sigma), y_sum / nh);
        if (nh < d + 2)
            model.add_warning("slice " + std::to_string(h) + " has only " + std::to_string(nh) +
                              " samples for " + std::to_string(d) + " predictors");
    }
    model.finalize();
    return model;
}

double predict(const SlicedModel& model, const Vector& x_new) {
    if (!x_new.allFinite()) throw DataError("prediction point contains non-finite values");
    const int h_count = model.slices();
    Vector logw(h_count);
    for (int h = 0; h < h_count; ++h) logw(h) = model.log_density(h, x_new);
    const double top = logw.maxCoeff();
    double wsum = 0.0;
    double acc = 0.0;
    for (int h = 0; h < h_count; ++h) {
        const double w = std::exp(logw(h) - top);
        wsum += w;
        acc += w * model.response_mean(h);
    }
    return acc / wsum;
}

}  // namespace soda
