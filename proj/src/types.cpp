#include "soda/types.hpp"

#include <cmath>
#include <set>

namespace soda {

std::string Term::label(const std::vector<std::string>& names) const {
    auto name = [&](int idx) {
        if (idx >= 1 && idx <= static_cast<int>(names.size())) return names[static_cast<size_t>(idx - 1)];
        return "x" + std::to_string(idx);
    };
    if (is_main()) return name(j_);
    return name(i_) + "*" + name(j_);
}

std::vector<int> predictors_of(const TermSet& s) {
    std::set<int> idx;
    for (const Term& t : s) {
        idx.insert(t.first());
        idx.insert(t.second());
    }
    return std::vector<int>(idx.begin(), idx.end());
}

TermSet induced_term_set(const TermSet& preliminary_mains, const std::vector<int>& c) {
    std::vector<Term> terms;
    terms.reserve(preliminary_mains.size() + c.size() * (c.size() + 3) / 2);
    for (const Term& t : preliminary_mains) {
        if (!t.is_main()) throw BadInput("induced_term_set: preliminary set must contain only main effects");
        terms.push_back(t);
    }
    for (size_t a = 0; a < c.size(); ++a) {
        terms.push_back(Term::main(c[a]));
        for (size_t b = a; b < c.size(); ++b) terms.push_back(Term::interaction(c[a], c[b]));
    }
    return TermSet(std::move(terms));
}

std::vector<std::string> default_column_names(int p) {
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(p));
    for (int j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
    return names;
}

namespace {

void check_matrix_finite(const Matrix& x) {
    if (!x.allFinite()) throw DataError("dataset contains non-finite predictor values");
}

void check_names(std::vector<std::string>& names, int p) {
    if (names.empty()) {
        names = default_column_names(p);
    } else if (static_cast<int>(names.size()) != p) {
        throw DimensionMismatch("column_names size does not match number of predictors");
    }
}

}  // namespace

Dataset Dataset::categorical(Matrix x, std::vector<int> labels, std::vector<std::string> column_names) {
    Dataset d;
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (n < 1 || p < 1) throw DataError("dataset must have n >= 1 and p >= 1");
    if (static_cast<int>(labels.size()) != n) throw DimensionMismatch("labels size does not match n");
    check_matrix_finite(x);
    int k = 0;
    for (int v : labels) {
        if (v < 1) throw DataError("class labels must be coded 1..K");
        k = std::max(k, v);
    }
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (int v : labels) counts[static_cast<size_t>(v - 1)]++;
    for (int c = 0; c < k; ++c)
        if (counts[static_cast<size_t>(c)] == 0)
            throw DataError("class " + std::to_string(c + 1) + " has no observations");
    if (k < 2) throw DataError("categorical response needs at least 2 classes");
    if (n < k + 1) throw DataError("need n >= K + 1 observations");
    check_names(column_names, p);
    d.x_ = std::move(x);
    d.labels_ = std::move(labels);
    d.k_classes_ = k;
    d.column_names_ = std::move(column_names);
    return d;
}

Dataset Dataset::continuous(Matrix x, Vector y, std::vector<std::string> column_names) {
    Dataset d;
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (n < 1 || p < 1) throw DataError("dataset must have n >= 1 and p >= 1");
    if (static_cast<int>(y.size()) != n) throw DimensionMismatch("response size does not match n");
    check_matrix_finite(x);
    if (!y.allFinite()) throw DataError("dataset contains non-finite response values");
    check_names(column_names, p);
    d.x_ = std::move(x);
    d.y_ = std::move(y);
    d.column_names_ = std::move(column_names);
    return d;
}

}  // namespace soda
