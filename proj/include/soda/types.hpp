#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace soda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error hierarchy. The CLI maps UsageError-derived types to exit 2 and
// DataError-derived types to exit 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct DimensionMismatch : DataError {
    using DataError::DataError;
};
struct IndexOutOfRange : DataError {
    using DataError::DataError;
};
struct NotPositiveDefinite : DataError {
    using DataError::DataError;
};
struct HTooLarge : DataError {
    using DataError::DataError;
};
struct SliceTooSmall : DataError {
    using DataError::DataError;
};
struct SchemaMismatch : DataError {
    using DataError::DataError;
};
struct BadExampleId : UsageError {
    using UsageError::UsageError;
};
struct BadScenario : UsageError {
    using UsageError::UsageError;
};
struct BadInput : UsageError {
    using UsageError::UsageError;
};

// A model term: either a main effect X_j or a second-order term X_i*X_j.
// Indices are 1-based. Interaction pairs are canonicalized with i <= j so the
// quadratic X_j^2 is Interaction(j, j); the symmetric quadratic form has one
// coefficient per unordered pair.
class Term {
  public:
    enum class Kind { Main, Interaction };

    static Term main(int j) {
        if (j < 1) throw IndexOutOfRange("Term::main: index must be >= 1");
        return Term(Kind::Main, j, j);
    }
    static Term interaction(int i, int j) {
        if (i < 1 || j < 1) throw IndexOutOfRange("Term::interaction: indices must be >= 1");
        if (i > j) std::swap(i, j);
        return Term(Kind::Interaction, i, j);
    }

    Kind kind() const { return kind_; }
    bool is_main() const { return kind_ == Kind::Main; }
    bool is_interaction() const { return kind_ == Kind::Interaction; }
    bool is_quadratic() const { return kind_ == Kind::Interaction && i_ == j_; }

    // first() == second() for main effects.
    int first() const { return i_; }
    int second() const { return j_; }
    int max_index() const { return j_; }

    // Lexicographic: all main effects (by index) before interactions (by pair).
    // Gives deterministic iteration order for tie-breaking.
    friend auto operator<=>(const Term&, const Term&) = default;

    std::string label(const std::vector<std::string>& names = {}) const;

  private:
    Term(Kind kind, int i, int j) : kind_(kind), i_(i), j_(j) {}
    Kind kind_;
    int i_;
    int j_;
};

// Ordered, duplicate-free set of terms. Immutable value type; mutations
// return new sets.
class TermSet {
  public:
    TermSet() = default;
    explicit TermSet(std::vector<Term> terms) : terms_(std::move(terms)) {
        std::sort(terms_.begin(), terms_.end());
        terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
    }

    int size() const { return static_cast<int>(terms_.size()); }
    bool empty() const { return terms_.empty(); }
    bool contains(const Term& t) const {
        return std::binary_search(terms_.begin(), terms_.end(), t);
    }
    const Term& operator[](int idx) const { return terms_[static_cast<size_t>(idx)]; }

    TermSet with(const Term& t) const {
        std::vector<Term> v = terms_;
        v.push_back(t);
        return TermSet(std::move(v));
    }
    TermSet without(const Term& t) const {
        std::vector<Term> v;
        v.reserve(terms_.size());
        for (const Term& u : terms_)
            if (u != t) v.push_back(u);
        return TermSet(std::move(v));
    }
    TermSet unioned(const TermSet& other) const {
        std::vector<Term> v = terms_;
        v.insert(v.end(), other.terms_.begin(), other.terms_.end());
        return TermSet(std::move(v));
    }

    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }
    const std::vector<Term>& terms() const { return terms_; }

    friend bool operator==(const TermSet&, const TermSet&) = default;

  private:
    std::vector<Term> terms_;
};

// Predictor indices covered by any term in s: {j : Main(j)} u {i,j : Interaction(i,j)}.
std::vector<int> predictors_of(const TermSet& s);

// The term set induced by a predictor set c on top of preliminary main
// effects: mains u {Main(j) : j in c} u {Interaction(i,j) : i,j in c, i <= j}.
TermSet induced_term_set(const TermSet& preliminary_mains, const std::vector<int>& c);

// n x p data matrix with either class labels in {1..K} or a real-valued
// response. Immutable after construction.
class Dataset {
  public:
    static Dataset categorical(Matrix x, std::vector<int> labels,
                               std::vector<std::string> column_names = {});
    static Dataset continuous(Matrix x, Vector y, std::vector<std::string> column_names = {});

    bool is_categorical() const { return k_classes_ > 0; }
    int n() const { return static_cast<int>(x_.rows()); }
    int p() const { return static_cast<int>(x_.cols()); }
    int num_classes() const { return k_classes_; }

    const Matrix& x() const { return x_; }
    const std::vector<int>& labels() const { return labels_; }
    const Vector& y() const { return y_; }
    const std::vector<std::string>& column_names() const { return column_names_; }

  private:
    Dataset() = default;
    Matrix x_;
    std::vector<int> labels_;  // 1..K, empty when continuous
    Vector y_;                 // size 0 when categorical
    int k_classes_ = 0;
    std::vector<std::string> column_names_;
};

struct NewtonOptions {
    double tolerance = 1e-8;  // stop when log-likelihood gain < tolerance
    int max_iterations = 100;
    double ridge = 1e-8;  // scaled by (1 + max |Hessian diagonal|)
    int max_halvings = 30;
    // Runaway guard on standardized columns. Complete separation is detected
    // by a perfect empirical fit (loglik ~ 0), not by this cap: sliced
    // low-noise responses legitimately need coefficients in the hundreds.
    double coefficient_cap = 1e4;
    double separation_loglik = 1e-6;  // per-sample |loglik| below this is a perfect fit
};

struct SelectionConfig {
    double gamma = 0.5;
    int p_f = 3;          // forward continuation steps past the first non-improving step
    int max_forward = 0;  // cap on |C_t| in stage 2; 0 = min(n/4, 50)
    bool continue_stage1 = true;  // apply the p_f continuation to stage 1 as well
    bool continue_stage2 = true;
    NewtonOptions newton;
    int threads = 1;  // candidate-fit parallelism; 0 = hardware concurrency

    void validate() const {
        if (!(gamma >= 0.0)) throw BadInput("gamma must be >= 0");
        if (p_f < 0) throw BadInput("p_f must be >= 0");
        if (max_forward < 0) throw BadInput("max_forward must be >= 0");
        if (threads < 0) throw BadInput("threads must be >= 0");
    }
    int effective_max_forward(int n) const {
        if (max_forward > 0) return max_forward;
        return std::max(1, std::min(n / 4, 50));
    }
};

// Default column names x1..xp.
std::vector<std::string> default_column_names(int p);

}  // namespace soda
