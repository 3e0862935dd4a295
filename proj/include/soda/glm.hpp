#pragma once

#include "soda/types.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace soda {

// Design matrix restricted to a term set: column 0 is the intercept, column
// 1+i is the product column of terms()[i].
struct AugmentedDesign {
    Matrix z;
    TermSet terms;

    int n() const { return static_cast<int>(z.rows()); }
    int width() const { return static_cast<int>(z.cols()); }
};

AugmentedDesign augment(const Matrix& x, const TermSet& s);
AugmentedDesign augment(const Dataset& data, const TermSet& s);

// EBIC_gamma = -2*loglik + s_size*log(n) + 2*gamma*s_size*log(p).
double ebic(double loglik, int s_size, int n, int p, double gamma);

// Multinomial log-likelihood with class K as baseline (theta_K = 0).
// theta is (1+|S|) x (K-1), one coefficient column per non-baseline class.
// Computed with log-sum-exp stabilization.
double log_likelihood(const Matrix& theta, const AugmentedDesign& design,
                      const std::vector<int>& labels);

// Gradient and Hessian of the log-likelihood at theta, stacked class-major:
// entries [k*m, (k+1)*m) belong to class k's coefficient block.
void score_and_hessian(const Matrix& theta, const AugmentedDesign& design,
                       const std::vector<int>& labels, Vector* gradient, Matrix* hessian);

enum class FitStatus { Ok, Separation, RankDeficient };

std::string to_string(FitStatus s);

struct ModelFit {
    TermSet terms;
    int k_classes = 0;
    int n = 0;
    int p = 0;
    double gamma = 0.0;
    // Original-scale coefficients, (1+|S|) x (K-1); row 0 holds intercepts.
    Matrix theta;
    double loglik = std::numeric_limits<double>::quiet_NaN();
    double ebic = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    int iterations = 0;
    int penalty_df = 0;  // (K-1) * |S|, the coefficient count charged by EBIC
    // Standardization constants of the augmented columns (entry 0 = intercept).
    Vector column_mean;
    Vector column_sd;
    std::vector<double> loglik_path;  // accepted-step log-likelihood trajectory
};

struct FitResult {
    FitStatus status = FitStatus::RankDeficient;
    ModelFit fit;
    bool ok() const { return status == FitStatus::Ok; }
};

// Damped Newton-Raphson MLE from theta = 0 (or from `warm` when given).
// Only ascent steps are accepted (up to 30 halvings); stops when the
// log-likelihood gain drops below cfg.newton.tolerance. Augmented columns are
// standardized internally; reported coefficients are on the original scale.
FitResult fit_mle(const Dataset& data, const TermSet& s, const SelectionConfig& cfg,
                  const ModelFit* warm = nullptr);

// Class probabilities (n x K) for new rows under Eq-style softmax with
// baseline class K.
Matrix class_probabilities(const ModelFit& fit, const Matrix& x);

// argmax class per row; ties resolved toward the smaller class index.
std::vector<int> classify(const ModelFit& fit, const Matrix& x);

struct QdaParameters {
    std::vector<double> priors;       // K entries, positive, summing to 1
    std::vector<Vector> means;        // K mean vectors of length d
    std::vector<Matrix> covariances;  // K symmetric positive-definite d x d
};

struct QdaCoefficients {
    Vector alpha;                 // K-1 intercepts
    std::vector<Vector> beta;     // K-1 linear blocks
    std::vector<Matrix> a;        // K-1 symmetric quadratic blocks
    // Discriminant delta_k(x) = alpha[k] + beta[k]'x + x'A[k]x, k = 0..K-2.
    double discriminant(int k, const Vector& x) const;
};

// Maps Gaussian class-conditional parameters to the logistic discriminant
// blocks against baseline class K.
QdaCoefficients qda_to_logistic(const QdaParameters& params);

}  // namespace soda
