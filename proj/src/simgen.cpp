#include "soda/simgen.hpp"

#include "soda/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace soda {

namespace {

struct ExampleId {
    int family = 0;  // 1, 2 or 3
    int sub = 0;
};

ExampleId parse_example(const std::string& example) {
    ExampleId id;
    const auto dot = example.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= example.size())
        throw BadExampleId("unknown example id '" + example + "'");
    try {
        id.family = std::stoi(example.substr(0, dot));
        id.sub = std::stoi(example.substr(dot + 1));
    } catch (const std::exception&) {
        throw BadExampleId("unknown example id '" + example + "'");
    }
    const bool ok = (id.family == 1 && id.sub >= 1 && id.sub <= 6) ||
                    (id.family == 2 && id.sub >= 1 && id.sub <= 5) ||
                    (id.family == 3 && id.sub >= 1 && id.sub <= 3);
    if (!ok) throw BadExampleId("unknown example id '" + example + "'");
    return id;
}

// The two-class Gaussian design shared by Examples 1.x: class 1 drawn from
// N(mu1, Omega1^-1) and class 2 from N(mu2, Omega2^-1), Omega1 = I - W,
// Omega2 = I + W. W's diagonal is (-0.6, 0, -0.6) and the off-diagonals are
// w12 = w23 = -0.35, w13 = 0; the (2,2) entry must be 0 for both precisions
// to stay positive definite, which also makes the class-1 discriminant carry
// no x2^2 term and a constant of 1.6273 (1.7773 for centered means).
struct TwoClassGaussian {
    Vector mu1, mu2;
    Matrix sigma1, sigma2;  // covariances
    Matrix chol1, chol2;
};

TwoClassGaussian figure_design(bool zero_means) {
    Matrix w = Matrix::Zero(3, 3);
    w(0, 0) = -0.60;
    w(2, 2) = -0.60;
    w(0, 1) = w(1, 0) = -0.35;
    w(1, 2) = w(2, 1) = -0.35;
    Matrix omega1 = Matrix::Identity(3, 3) - w;
    Matrix omega2 = Matrix::Identity(3, 3) + w;
    TwoClassGaussian d;
    d.mu1 = Vector::Zero(3);
    if (!zero_means) d.mu1(0) = 0.5;
    d.mu2 = -d.mu1;
    d.sigma1 = omega1.inverse();
    d.sigma2 = omega2.inverse();
    d.chol1 = Eigen::LLT<Matrix>(d.sigma1).matrixL();
    d.chol2 = Eigen::LLT<Matrix>(d.sigma2).matrixL();
    return d;
}

double noise_sd(double stated, NoiseReading reading) {
    return reading == NoiseReading::Variance ? std::sqrt(stated) : stated;
}

// Irrelevant-predictor schemes. Anchors are drawn per column, coefficients
// are fresh U[-1,1] draws.
void fill_linear_noise(Matrix& x, int col, Rng& rng, const std::vector<int>& anchor_pool,
                       double sd) {
    const int k = anchor_pool[rng.index(anchor_pool.size())];
    const int l = anchor_pool[rng.index(anchor_pool.size())];
    const double b0 = rng.uniform(-1.0, 1.0);
    const double b1 = rng.uniform(-1.0, 1.0);
    const double b2 = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < x.rows(); ++i)
        x(i, col) = b0 + b1 * x(i, l) + b2 * x(i, k) + rng.normal(0.0, sd);
}

void fill_quadratic_noise(Matrix& x, int col, Rng& rng, const std::vector<int>& anchor_pool,
                          double sd, const Matrix* anchor_values = nullptr) {
    const Matrix& src = anchor_values ? *anchor_values : x;
    const int k = anchor_pool[rng.index(anchor_pool.size())];
    const int l = anchor_pool[rng.index(anchor_pool.size())];
    const double b0 = rng.uniform(-1.0, 1.0);
    const double b1 = rng.uniform(-1.0, 1.0);
    const double b2 = rng.uniform(-1.0, 1.0);
    const double b3 = rng.uniform(-1.0, 1.0);
    const double b4 = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < x.rows(); ++i) {
        const double xk = src(i, k);
        const double xl = src(i, l);
        x(i, col) = b0 + b1 * xk + b2 * xl + b3 * xk * xk + b4 * xl * xl + rng.normal(0.0, sd);
    }
}

void fill_heteroskedastic_noise(Matrix& x, int col, Rng& rng, const std::vector<int>& anchor_pool,
                                const Matrix* anchor_values = nullptr) {
    const Matrix& src = anchor_values ? *anchor_values : x;
    const int k = anchor_pool[rng.index(anchor_pool.size())];
    const int l = anchor_pool[rng.index(anchor_pool.size())];
    const double b1 = rng.uniform(-1.0, 1.0);
    const double b2 = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < x.rows(); ++i)
        x(i, col) = b1 * src(i, k) + b2 * src(i, l) + std::abs(src(i, k)) * rng.normal();
}

OracleModel classification_oracle(const ExampleId& id, const TwoClassGaussian& design) {
    // Build delta_1 exactly from the Gaussian parameters; with equal priors it
    // is the Bayes discriminant.
    const int d = id.sub == 6 ? 5 : 3;
    QdaParameters qp;
    qp.priors = {0.5, 0.5};
    Vector m1 = Vector::Zero(d), m2 = Vector::Zero(d);
    m1.head(3) = design.mu1;
    m2.head(3) = design.mu2;
    Matrix s1 = Matrix::Identity(d, d), s2 = Matrix::Identity(d, d);
    s1.topLeftCorner(3, 3) = design.sigma1;
    s2.topLeftCorner(3, 3) = design.sigma2;
    if (id.sub == 6) {
        m1(3) = 0.5;
        m1(4) = -0.5;
        m2(3) = -0.5;
        m2(4) = 0.5;
    }
    qp.means = {m1, m2};
    qp.covariances = {s1, s2};
    QdaCoefficients qc = qda_to_logistic(qp);

    OracleModel oracle;
    oracle.kind = OracleModel::Kind::Classification;
    oracle.example = "1." + std::to_string(id.sub);
    oracle.constant = qc.alpha(0);
    for (int j = 0; j < d; ++j)
        if (std::abs(qc.beta[0](j)) > 1e-12)
            oracle.coefficients.emplace_back(Term::main(j + 1), qc.beta[0](j));
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const double coef = i == j ? qc.a[0](i, i) : 2.0 * qc.a[0](i, j);
            if (std::abs(coef) > 1e-12)
                oracle.coefficients.emplace_back(Term::interaction(i + 1, j + 1), coef);
        }
    }
    return oracle;
}

TermSet classification_truth(const ExampleId& id) {
    std::vector<Term> t = {Term::interaction(1, 1), Term::interaction(3, 3),
                           Term::interaction(1, 2), Term::interaction(2, 3)};
    if (id.sub <= 4) t.push_back(Term::main(1));
    if (id.sub == 6) {
        t.push_back(Term::main(4));
        t.push_back(Term::main(5));
    }
    return TermSet(std::move(t));
}

}  // namespace

int default_p(const std::string& example) {
    const ExampleId id = parse_example(example);
    if (id.family == 1) return id.sub == 4 ? 1000 : 50;
    return 1000;
}

bool is_classification_example(const std::string& example) {
    return parse_example(example).family == 1;
}

ClassificationSim gen_classification(const std::string& example, int n_per_class, int p,
                                     uint64_t seed, uint64_t replicate, NoiseReading noise) {
    const ExampleId id = parse_example(example);
    if (id.family != 1) throw BadExampleId("gen_classification needs an example 1.x id");
    if (p == 0) p = default_p(example);
    if (id.sub == 4 && p != 1000) throw BadExampleId("example 1.4 is defined for p = 1000");
    const int p_min = id.sub == 6 ? 5 : 3;
    if (p < p_min) throw BadExampleId("example " + example + " needs p >= " + std::to_string(p_min));
    if (n_per_class < 2) throw BadInput("need at least 2 observations per class");

    const bool zero_means = id.sub >= 5;
    const TwoClassGaussian design = figure_design(zero_means);
    const int n = 2 * n_per_class;
    Rng rng(seed, replicate);

    Matrix x(n, p);
    // Relevant block: class 1 rows first, then class 2.
    for (int i = 0; i < n; ++i) {
        Vector z(3);
        for (int c = 0; c < 3; ++c) z(c) = rng.normal();
        const bool first = i < n_per_class;
        x.row(i).head(3) =
            (first ? design.mu1 + design.chol1 * z : design.mu2 + design.chol2 * z).transpose();
    }
    int noise_start = 3;  // 0-based first irrelevant column
    if (id.sub == 6) {
        for (int i = 0; i < n; ++i) {
            const double s = i < n_per_class ? 1.0 : -1.0;
            x(i, 3) = rng.normal(0.5 * s, 1.0);
            x(i, 4) = rng.normal(-0.5 * s, 1.0);
        }
        noise_start = 5;
    }

    const std::vector<int> relevant_anchors = {0, 1, 2};
    if (id.sub == 4) {
        // Columns 4..100: 60% plain Gaussian, the rest tied to the relevant block.
        std::vector<int> block_a;
        for (int j = 3; j < 100; ++j) block_a.push_back(j);
        std::vector<int> shuffled = block_a;
        rng.shuffle(shuffled);
        const size_t n_gauss = static_cast<size_t>(std::llround(0.6 * static_cast<double>(block_a.size())));
        std::set<int> gauss(shuffled.begin(), shuffled.begin() + static_cast<long>(n_gauss));
        for (int j : block_a) {
            if (gauss.count(j)) {
                const double m = rng.uniform(0.0, 1.0);
                for (int i = 0; i < n; ++i) x(i, j) = rng.normal(m, 1.0);
            } else if (rng.bernoulli(0.5)) {
                fill_quadratic_noise(x, j, rng, relevant_anchors, noise_sd(5.0, noise));
            } else {
                fill_heteroskedastic_noise(x, j, rng, relevant_anchors);
            }
        }
        // Columns 101..1000: Gaussian base, then 40% re-simulated against base
        // values of anchors drawn from the same block.
        std::vector<int> block_b;
        for (int j = 100; j < 1000; ++j) block_b.push_back(j);
        for (int j : block_b) {
            const double m = rng.uniform(0.0, 1.0);
            for (int i = 0; i < n; ++i) x(i, j) = rng.normal(m, 1.0);
        }
        Matrix base = x.middleCols(100, 900);
        std::vector<int> shuffled_b = block_b;
        rng.shuffle(shuffled_b);
        const size_t n_resim = static_cast<size_t>(std::llround(0.4 * static_cast<double>(block_b.size())));
        std::set<int> resim(shuffled_b.begin(), shuffled_b.begin() + static_cast<long>(n_resim));
        std::vector<int> base_anchors(900);
        std::iota(base_anchors.begin(), base_anchors.end(), 0);
        for (int j : block_b) {
            if (!resim.count(j)) continue;
            if (rng.bernoulli(0.5))
                fill_quadratic_noise(x, j, rng, base_anchors, noise_sd(5.0, noise), &base);
            else
                fill_heteroskedastic_noise(x, j, rng, base_anchors, &base);
        }
    } else {
        for (int j = noise_start; j < p; ++j) {
            switch (id.sub) {
                case 1:
                    fill_linear_noise(x, j, rng, relevant_anchors, noise_sd(2.0, noise));
                    break;
                case 3:
                    fill_heteroskedastic_noise(x, j, rng, relevant_anchors);
                    break;
                default:  // 1.2, and 1.5/1.6 follow the same scheme
                    fill_quadratic_noise(x, j, rng, relevant_anchors, noise_sd(5.0, noise));
                    break;
            }
        }
    }

    std::vector<int> labels(static_cast<size_t>(n), 2);
    for (int i = 0; i < n_per_class; ++i) labels[static_cast<size_t>(i)] = 1;

    ClassificationSim sim{Dataset::categorical(std::move(x), std::move(labels)),
                          classification_truth(id), classification_oracle(id, design)};
    return sim;
}

RegressionSim gen_regression(const std::string& example, char scenario, int n, int p,
                             uint64_t seed, uint64_t replicate) {
    const ExampleId id = parse_example(example);
    if (id.family != 2 && id.family != 3)
        throw BadExampleId("gen_regression needs an example 2.x or 3.x id");
    if (id.family == 3) {
        if (scenario == 0) scenario = 'a';
        if (scenario != 'a') throw BadScenario("examples 3.x are defined for scenario (a)");
    }
    if (scenario != 'a' && scenario != 'b' && scenario != 'c')
        throw BadScenario(std::string("unknown scenario '") + scenario + "'");
    if (p == 0) p = default_p(example);
    if (scenario == 'c' && p != 1000) throw BadScenario("scenario (c) is defined for p = 1000");
    const int p_min = id.family == 3 ? 2 : (id.sub == 1 ? 5 : 3);
    if (p < p_min) throw BadExampleId("example " + example + " needs p >= " + std::to_string(p_min));
    if (n < 2) throw BadInput("need n >= 2");

    Rng rng(seed, replicate);
    Matrix x(n, p);
    const double ar = 0.5;
    const double ar_sd = std::sqrt(1.0 - ar * ar);
    for (int i = 0; i < n; ++i) {
        switch (scenario) {
            case 'a':
                x(i, 0) = rng.normal();
                for (int j = 1; j < p; ++j) x(i, j) = ar * x(i, j - 1) + ar_sd * rng.normal();
                break;
            case 'b':
                for (int j = 0; j < p; ++j) x(i, j) = rng.chi_squared_1();
                break;
            case 'c': {
                x(i, 0) = rng.normal();
                for (int j = 1; j < 125; ++j) x(i, j) = ar * x(i, j - 1) + ar_sd * rng.normal();
                for (int j = 125; j < 1000; ++j) {
                    const double e = rng.normal();
                    if (j < 250)
                        x(i, j) = x(i, j - 125) * x(i, j - 125) + e;
                    else if (j < 375)
                        x(i, j) = std::sqrt(std::abs(x(i, j - 250))) + e;
                    else if (j < 500)
                        x(i, j) = std::sin(x(i, j - 375)) + e;
                    else if (j < 625)
                        x(i, j) = std::log(std::abs(x(i, j - 500))) + e;
                    else if (j < 750)
                        x(i, j) = std::exp(x(i, j - 625)) + e;
                    else if (j < 875)
                        x(i, j) = std::exp(std::abs(x(i, j - 750))) + e;
                    else
                        x(i, j) = x(i, j - 875) * x(i, j - 875) * e;
                }
                break;
            }
        }
    }

    OracleModel oracle;
    oracle.kind = OracleModel::Kind::Regression;
    oracle.example = example;
    oracle.sigma = 0.2;

    Vector y(n);
    for (int i = 0; i < n; ++i) {
        const double e = rng.normal();
        const Vector row = x.row(i).transpose();
        if (id.family == 2 && id.sub == 5)
            y(i) = x(i, 0) + x(i, 1) + (1.0 + x(i, 2)) * (1.0 + x(i, 2)) * e;
        else
            y(i) = oracle_regression_mean(oracle, row) + oracle.sigma * e;
    }

    std::vector<int> truth;
    if (id.family == 3)
        truth = {1, 2};
    else if (id.sub == 1)
        truth = {1, 2, 3, 4, 5};
    else
        truth = {1, 2, 3};

    RegressionSim sim{Dataset::continuous(std::move(x), std::move(y)), std::move(truth),
                      std::move(oracle)};
    return sim;
}

double oracle_discriminant(const OracleModel& oracle, const Vector& x) {
    if (oracle.kind != OracleModel::Kind::Classification)
        throw DimensionMismatch("oracle is not a classification rule");
    double q = oracle.constant;
    for (const auto& [term, coef] : oracle.coefficients) {
        if (term.max_index() > x.size()) throw IndexOutOfRange("oracle term beyond x length");
        const double v = term.is_main() ? x(term.first() - 1)
                                        : x(term.first() - 1) * x(term.second() - 1);
        q += coef * v;
    }
    return q;
}

int oracle_classify(const OracleModel& oracle, const Vector& x) {
    return oracle_discriminant(oracle, x) > 0.0 ? 1 : 0;
}

double oracle_regression_mean(const OracleModel& oracle, const Vector& x) {
    if (oracle.kind != OracleModel::Kind::Regression)
        throw DimensionMismatch("oracle is not a regression rule");
    const ExampleId id = parse_example(oracle.example);
    auto at = [&](int j) { return x(j - 1); };
    if (id.family == 2) {
        switch (id.sub) {
            case 1: return 3.0 * at(1) + 1.5 * at(2) + 2.0 * at(3) + 2.0 * at(4) + 2.0 * at(5);
            case 2: return at(1) + at(1) * at(2) + at(1) * at(3);
            case 3: return at(1) * at(1) * at(2) / (at(3) * at(3));
            case 4: return at(1) / std::exp(at(2) + at(3));
            case 5: return at(1) + at(2);
        }
    }
    switch (id.sub) {
        case 1: return at(1) + at(2);
        case 2: return at(1) / std::exp(at(2));
        default: return 1.0 / (1.0 + at(1) * at(1) + at(2) * at(2));
    }
}

SelectionMetrics selection_metrics(const TermSet& selected, const TermSet& truth) {
    SelectionMetrics m;
    for (const Term& t : selected) {
        if (!truth.contains(t)) (t.is_main() ? m.mfp : m.ifp)++;
    }
    for (const Term& t : truth) {
        if (!selected.contains(t)) (t.is_main() ? m.mfn : m.ifn)++;
    }
    const auto sel_pred = predictors_of(selected);
    const auto true_pred = predictors_of(truth);
    const SelectionMetrics vm = predictor_metrics(sel_pred, true_pred);
    m.vfp = vm.vfp;
    m.vfn = vm.vfn;
    return m;
}

SelectionMetrics predictor_metrics(const std::vector<int>& selected,
                                   const std::vector<int>& truth) {
    SelectionMetrics m;
    std::set<int> sel(selected.begin(), selected.end());
    std::set<int> tru(truth.begin(), truth.end());
    for (int j : sel)
        if (!tru.count(j)) m.vfp++;
    for (int j : tru)
        if (!sel.count(j)) m.vfn++;
    return m;
}

double test_error(const ModelFit& fit, const Dataset& test) {
    if (!test.is_categorical()) throw DimensionMismatch("test_error needs categorical labels");
    const std::vector<int> pred = classify(fit, test.x());
    long wrong = 0;
    for (int i = 0; i < test.n(); ++i)
        if (pred[static_cast<size_t>(i)] != test.labels()[static_cast<size_t>(i)]) ++wrong;
    return static_cast<double>(wrong) / test.n();
}

double test_error(const OracleModel& oracle, const Dataset& test) {
    if (!test.is_categorical()) throw DimensionMismatch("test_error needs categorical labels");
    long wrong = 0;
    for (int i = 0; i < test.n(); ++i) {
        const Vector row = test.x().row(i).transpose();
        const int label = oracle_classify(oracle, row) == 1 ? 1 : 2;
        if (label != test.labels()[static_cast<size_t>(i)]) ++wrong;
    }
    return static_cast<double>(wrong) / test.n();
}

}  // namespace soda
