#include "soda/glm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <unordered_map>

namespace soda {

namespace {

constexpr double kSdFloor = 1e-12;     // below this a column counts as constant
constexpr double kPivotRidgeFactor = 16.0;  // pivots this close to the ridge mean collinearity

// eta and class probabilities for the K-1 non-baseline classes; returns the
// log-likelihood. probs may be null when only the value is needed.
double multinomial_loglik(const Matrix& z, const Matrix& theta, const std::vector<int>& labels,
                          Matrix* probs) {
    const int n = static_cast<int>(z.rows());
    const int km1 = static_cast<int>(theta.cols());
    Matrix eta = z * theta;  // n x (K-1)
    Vector rowmax = eta.rowwise().maxCoeff().cwiseMax(0.0);
    Matrix shifted = (eta.colwise() - rowmax).array().exp().matrix();
    Vector sumexp = shifted.rowwise().sum() + (-rowmax.array()).exp().matrix();
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
        const int y = labels[static_cast<size_t>(i)];
        if (y <= km1) ll += eta(i, y - 1);
        ll -= rowmax(i) + std::log(sumexp(i));
    }
    if (probs) *probs = shifted.array().colwise() / sumexp.array();
    return ll;
}

void check_design_labels(const AugmentedDesign& design, const Matrix& theta,
                         const std::vector<int>& labels) {
    if (theta.rows() != design.z.cols())
        throw DimensionMismatch("theta rows do not match design width");
    if (theta.cols() < 1) throw DimensionMismatch("theta needs at least one class block");
    if (static_cast<int>(labels.size()) != design.n())
        throw DimensionMismatch("labels size does not match design rows");
    const int k = static_cast<int>(theta.cols()) + 1;
    for (int y : labels)
        if (y < 1 || y > k) throw DimensionMismatch("label outside 1..K");
}

}  // namespace

AugmentedDesign augment(const Matrix& x, const TermSet& s) {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    for (const Term& t : s)
        if (t.max_index() > p)
            throw IndexOutOfRange("term " + t.label() + " references column beyond p=" +
                                  std::to_string(p));
    Matrix z(n, 1 + s.size());
    z.col(0).setOnes();
    int c = 1;
    for (const Term& t : s) {
        if (t.is_main())
            z.col(c) = x.col(t.first() - 1);
        else
            z.col(c) = x.col(t.first() - 1).cwiseProduct(x.col(t.second() - 1));
        ++c;
    }
    return AugmentedDesign{std::move(z), s};
}

AugmentedDesign augment(const Dataset& data, const TermSet& s) { return augment(data.x(), s); }

double ebic(double loglik, int s_size, int n, int p, double gamma) {
    if (n < 1 || p < 1) throw BadInput("ebic requires n >= 1 and p >= 1");
    return -2.0 * loglik + s_size * std::log(static_cast<double>(n)) +
           2.0 * gamma * s_size * std::log(static_cast<double>(p));
}

double log_likelihood(const Matrix& theta, const AugmentedDesign& design,
                      const std::vector<int>& labels) {
    check_design_labels(design, theta, labels);
    return multinomial_loglik(design.z, theta, labels, nullptr);
}

void score_and_hessian(const Matrix& theta, const AugmentedDesign& design,
                       const std::vector<int>& labels, Vector* gradient, Matrix* hessian) {
    check_design_labels(design, theta, labels);
    const Matrix& z = design.z;
    const int n = design.n();
    const int m = design.width();
    const int km1 = static_cast<int>(theta.cols());

    Matrix probs;
    multinomial_loglik(z, theta, labels, &probs);

    if (gradient) {
        Matrix resid = -probs;
        for (int i = 0; i < n; ++i) {
            const int y = labels[static_cast<size_t>(i)];
            if (y <= km1) resid(i, y - 1) += 1.0;
        }
        Matrix g = z.transpose() * resid;  // m x (K-1)
        gradient->resize(km1 * m);
        for (int k = 0; k < km1; ++k) gradient->segment(k * m, m) = g.col(k);
    }

    if (hessian) {
        hessian->resize(km1 * m, km1 * m);
        if (km1 == 1) {
            Vector w = probs.col(0).array() * (1.0 - probs.col(0).array());
            *hessian = -(z.transpose() * w.asDiagonal() * z);
            return;
        }
        std::vector<Matrix> scaled(static_cast<size_t>(km1));
        for (int k = 0; k < km1; ++k)
            scaled[static_cast<size_t>(k)] = z.array().colwise() * probs.col(k).array();
        for (int k = 0; k < km1; ++k) {
            for (int l = k; l < km1; ++l) {
                Matrix block;
                if (k == l)
                    block = scaled[static_cast<size_t>(k)].transpose() *
                                scaled[static_cast<size_t>(k)] -
                            z.transpose() * scaled[static_cast<size_t>(k)];
                else
                    block = scaled[static_cast<size_t>(k)].transpose() * scaled[static_cast<size_t>(l)];
                hessian->block(k * m, l * m, m, m) = block;
                if (l != k) hessian->block(l * m, k * m, m, m) = block.transpose();
            }
        }
    }
}

std::string to_string(FitStatus s) {
    switch (s) {
        case FitStatus::Ok: return "ok";
        case FitStatus::Separation: return "separation";
        case FitStatus::RankDeficient: return "rank-deficient";
    }
    return "unknown";
}

FitResult fit_mle(const Dataset& data, const TermSet& s, const SelectionConfig& cfg,
                  const ModelFit* warm) {
    if (!data.is_categorical()) throw DimensionMismatch("fit_mle requires a categorical response");
    cfg.validate();
    const int n = data.n();
    const int p = data.p();
    const int k = data.num_classes();
    const int km1 = k - 1;
    const int m = 1 + s.size();

    FitResult out;
    if (m >= n) {
        out.status = FitStatus::RankDeficient;
        return out;
    }

    AugmentedDesign design = augment(data, s);
    Matrix& z = design.z;

    Vector col_mean = Vector::Zero(m);
    Vector col_sd = Vector::Ones(m);
    for (int c = 1; c < m; ++c) {
        const double mu = z.col(c).mean();
        z.col(c).array() -= mu;
        const double sd = std::sqrt(z.col(c).squaredNorm() / n);
        if (!std::isfinite(sd) || sd < kSdFloor) {
            out.status = FitStatus::RankDeficient;
            return out;
        }
        z.col(c) /= sd;
        col_mean(c) = mu;
        col_sd(c) = sd;
    }

    Matrix theta = Matrix::Zero(m, km1);
    bool cold_start = true;
    if (warm && warm->k_classes == k && warm->theta.size() > 0) {
        cold_start = false;
        // Map the warm fit's original-scale coefficients onto the standardized
        // columns of the current term set; terms absent from the warm fit start
        // at zero, terms absent from the current set are dropped.
        std::unordered_map<uint64_t, int> warm_col;
        auto key = [](const Term& t) {
            return (static_cast<uint64_t>(t.is_main() ? 0 : 1) << 62) |
                   (static_cast<uint64_t>(t.first()) << 31) | static_cast<uint64_t>(t.second());
        };
        int wc = 1;
        for (const Term& t : warm->terms) warm_col[key(t)] = wc++;
        for (int cls = 0; cls < km1; ++cls) {
            double intercept = warm->theta(0, cls);
            int c = 1;
            for (const Term& t : s) {
                auto it = warm_col.find(key(t));
                if (it != warm_col.end()) {
                    const double orig = warm->theta(it->second, cls);
                    theta(c, cls) = orig * col_sd(c);
                    intercept += orig * col_mean(c);
                }
                ++c;
            }
            theta(0, cls) = intercept;
        }
    }

    Matrix probs;
    double ll = multinomial_loglik(z, theta, data.labels(), &probs);
    if (!std::isfinite(ll)) {
        theta.setZero();
        ll = multinomial_loglik(z, theta, data.labels(), &probs);
    }

    const int dim = km1 * m;
    Vector grad(dim);
    Matrix info(dim, dim);  // negative Hessian of the log-likelihood
    Matrix resid(n, km1);
    std::vector<Matrix> scaled(static_cast<size_t>(km1));

    ModelFit& fit = out.fit;
    fit.loglik_path.push_back(ll);

    bool converged = false;
    int iterations = 0;
    FitStatus status = FitStatus::Ok;

    for (int iter = 1; iter <= cfg.newton.max_iterations; ++iter) {
        iterations = iter;

        resid = -probs;
        for (int i = 0; i < n; ++i) {
            const int y = data.labels()[static_cast<size_t>(i)];
            if (y <= km1) resid(i, y - 1) += 1.0;
        }
        {
            Matrix g = z.transpose() * resid;
            for (int cls = 0; cls < km1; ++cls) grad.segment(cls * m, m) = g.col(cls);
        }
        if (km1 == 1) {
            Vector w = probs.col(0).array() * (1.0 - probs.col(0).array());
            info.noalias() = z.transpose() * (z.array().colwise() * w.array()).matrix();
        } else {
            for (int cls = 0; cls < km1; ++cls)
                scaled[static_cast<size_t>(cls)] = z.array().colwise() * probs.col(cls).array();
            for (int a = 0; a < km1; ++a) {
                for (int b = a; b < km1; ++b) {
                    Matrix block;
                    if (a == b)
                        block = z.transpose() * scaled[static_cast<size_t>(a)] -
                                scaled[static_cast<size_t>(a)].transpose() *
                                    scaled[static_cast<size_t>(a)];
                    else
                        block = -(scaled[static_cast<size_t>(a)].transpose() *
                                  scaled[static_cast<size_t>(b)]);
                    info.block(a * m, b * m, m, m) = block;
                    if (a != b) info.block(b * m, a * m, m, m) = block.transpose();
                }
            }
        }

        const double ridge_eps = cfg.newton.ridge * (1.0 + info.diagonal().cwiseAbs().maxCoeff());
        info.diagonal().array() += ridge_eps;

        Eigen::LDLT<Matrix> ldlt(info);
        if (iter == 1 && cold_start) {
            // At theta = 0 the weights are uniform, so a pivot that is mostly
            // ridge exposes a numerically collinear augmented design.
            const double dmin = ldlt.vectorD().minCoeff();
            if (ldlt.info() != Eigen::Success || dmin < kPivotRidgeFactor * ridge_eps) {
                out.status = FitStatus::RankDeficient;
                return out;
            }
        }
        Vector dir = ldlt.solve(grad);
        if (!dir.allFinite()) {
            out.status = FitStatus::RankDeficient;
            return out;
        }

        double step = 1.0;
        bool accepted = false;
        Matrix theta_try;
        Matrix probs_try;
        double ll_try = 0.0;
        for (int h = 0; h <= cfg.newton.max_halvings; ++h) {
            theta_try = theta;
            for (int cls = 0; cls < km1; ++cls)
                theta_try.col(cls) += step * dir.segment(cls * m, m);
            ll_try = multinomial_loglik(z, theta_try, data.labels(), &probs_try);
            if (std::isfinite(ll_try) && ll_try > ll) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = true;  // no ascent available: numerically at the optimum
            break;
        }
        const double gain = ll_try - ll;
        theta.swap(theta_try);
        probs.swap(probs_try);
        ll = ll_try;
        fit.loglik_path.push_back(ll);

        if (theta.cwiseAbs().maxCoeff() > cfg.newton.coefficient_cap) {
            status = FitStatus::Separation;
            break;
        }
        if (gain < cfg.newton.tolerance) {
            converged = true;
            break;
        }
    }

    // A perfect empirical fit means the classes are completely separated in
    // this design; the MLE is at infinity and the EBIC is not comparable.
    if (ll > -cfg.newton.separation_loglik * n) status = FitStatus::Separation;
    if (status == FitStatus::Separation) {
        out.status = FitStatus::Separation;
        out.fit = ModelFit{};
        return out;
    }

    // Back to the original column scale.
    Matrix theta_orig(m, km1);
    for (int cls = 0; cls < km1; ++cls) {
        double intercept = theta(0, cls);
        for (int c = 1; c < m; ++c) {
            theta_orig(c, cls) = theta(c, cls) / col_sd(c);
            intercept -= theta(c, cls) * col_mean(c) / col_sd(c);
        }
        theta_orig(0, cls) = intercept;
    }

    fit.terms = s;
    fit.k_classes = k;
    fit.n = n;
    fit.p = p;
    fit.gamma = cfg.gamma;
    fit.theta = std::move(theta_orig);
    fit.loglik = ll;
    fit.penalty_df = km1 * s.size();
    // K > 2 generalization: the log(n) part charges every coefficient block,
    // the 2*gamma*log(p) part is a prior over term sets and counts terms.
    // For K = 2 this is exactly ebic(ll, |S|, n, p, gamma).
    fit.ebic = ebic(ll, s.size(), n, p, cfg.gamma) +
               (km1 - 1) * s.size() * std::log(static_cast<double>(n));
    fit.converged = converged;
    fit.iterations = iterations;
    fit.column_mean = std::move(col_mean);
    fit.column_sd = std::move(col_sd);
    out.status = FitStatus::Ok;
    return out;
}

Matrix class_probabilities(const ModelFit& fit, const Matrix& x) {
    if (fit.k_classes < 2) throw DimensionMismatch("fit has no class blocks");
    AugmentedDesign design = augment(x, fit.terms);
    const int n = design.n();
    const int km1 = fit.k_classes - 1;
    Matrix eta = design.z * fit.theta;
    Vector rowmax = eta.rowwise().maxCoeff().cwiseMax(0.0);
    Matrix shifted = (eta.colwise() - rowmax).array().exp().matrix();
    Vector baseline = (-rowmax.array()).exp().matrix();
    Vector denom = shifted.rowwise().sum() + baseline;
    Matrix probs(n, fit.k_classes);
    for (int c = 0; c < km1; ++c) probs.col(c) = shifted.col(c).cwiseQuotient(denom);
    probs.col(km1) = baseline.cwiseQuotient(denom);
    return probs;
}

std::vector<int> classify(const ModelFit& fit, const Matrix& x) {
    Matrix probs = class_probabilities(fit, x);
    std::vector<int> out(static_cast<size_t>(probs.rows()));
    for (int i = 0; i < probs.rows(); ++i) {
        int best = 0;
        for (int c = 1; c < probs.cols(); ++c)
            if (probs(i, c) > probs(i, best)) best = c;
        out[static_cast<size_t>(i)] = best + 1;
    }
    return out;
}

double QdaCoefficients::discriminant(int k, const Vector& x) const {
    return alpha(k) + beta[static_cast<size_t>(k)].dot(x) +
           x.dot(a[static_cast<size_t>(k)] * x);
}

QdaCoefficients qda_to_logistic(const QdaParameters& params) {
    const size_t k = params.priors.size();
    if (k < 2) throw DimensionMismatch("need at least two classes");
    if (params.means.size() != k || params.covariances.size() != k)
        throw DimensionMismatch("priors, means, covariances must have K entries");
    const int d = static_cast<int>(params.means[0].size());
    double prior_sum = 0.0;
    for (double pi : params.priors) {
        if (!(pi > 0.0)) throw BadInput("priors must be positive");
        prior_sum += pi;
    }
    if (std::abs(prior_sum - 1.0) > 1e-8) throw BadInput("priors must sum to 1");

    std::vector<Matrix> precision(k);
    std::vector<double> logdet(k);
    for (size_t c = 0; c < k; ++c) {
        const Matrix& sigma = params.covariances[c];
        if (sigma.rows() != d || sigma.cols() != d ||
            static_cast<int>(params.means[c].size()) != d)
            throw DimensionMismatch("inconsistent class parameter dimensions");
        if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
            1e-10 * (1.0 + sigma.cwiseAbs().maxCoeff()))
            throw NotPositiveDefinite("covariance matrix is not symmetric");
        Eigen::LLT<Matrix> llt(sigma);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("covariance matrix is not positive definite");
        precision[c] = llt.solve(Matrix::Identity(d, d));
        logdet[c] = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
    }

    const size_t base = k - 1;
    const Vector base_term = precision[base] * params.means[base];
    const double base_quad = params.means[base].dot(base_term);

    QdaCoefficients out;
    out.alpha.resize(static_cast<int>(k) - 1);
    out.beta.resize(k - 1);
    out.a.resize(k - 1);
    for (size_t c = 0; c + 1 < k; ++c) {
        const Vector own_term = precision[c] * params.means[c];
        out.alpha(static_cast<int>(c)) =
            std::log(params.priors[c] / params.priors[base]) -
            0.5 * (logdet[c] - logdet[base] + params.means[c].dot(own_term) - base_quad);
        out.beta[c] = own_term - base_term;
        out.a[c] = -0.5 * (precision[c] - precision[base]);
    }
    return out;
}

}  // namespace soda
