#include "soda/rng.hpp"
#include "soda/selector.hpp"
#include "soda/simgen.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace soda;

namespace {

TermSet make_set(std::initializer_list<Term> terms) { return TermSet(std::vector<Term>(terms)); }

// Two Gaussian classes shifted along x1 only.
Dataset shifted_classes(Rng& rng, int n, int p, double shift) {
    Matrix x(n, p);
    std::vector<int> labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int cls = i < n / 2 ? 1 : 2;
        labels[static_cast<size_t>(i)] = cls;
        for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
        x(i, 0) += cls == 1 ? shift : -shift;
    }
    return Dataset::categorical(std::move(x), std::move(labels));
}

// Labels independent of x.
Dataset null_data(Rng& rng, int n, int p) {
    Matrix x(n, p);
    std::vector<int> labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
        labels[static_cast<size_t>(i)] = 1 + static_cast<int>(rng.index(2));
    }
    labels[0] = 1;
    labels[1] = 2;
    return Dataset::categorical(std::move(x), std::move(labels));
}

// Pure interaction signal with a nonzero mean on x1, the stepwise-detectable
// case: log odds = x1 * x2, x1 ~ N(1, 1), all other coordinates standard.
Dataset interaction_only(Rng& rng, int n, int p) {
    Matrix x(n, p);
    std::vector<int> labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
        x(i, 0) += 1.0;
        const double eta = x(i, 0) * x(i, 1);
        const double prob1 = 1.0 / (1.0 + std::exp(-eta));
        labels[static_cast<size_t>(i)] = rng.uniform() < prob1 ? 1 : 2;
    }
    labels[0] = 1;
    labels[1] = 2;
    return Dataset::categorical(std::move(x), std::move(labels));
}

}  // namespace

TEST_SUITE("selector") {

TEST_CASE("stage 1 finds a single strong main effect") {
    Rng rng(31);
    Dataset d = shifted_classes(rng, 500, 10, 0.8);
    SelectionConfig cfg;

    TermSet m = stage1_preliminary(d, cfg);
    CHECK(m == make_set({Term::main(1)}));

    // Exhaustive oracle over all one- and two-term main-effect models: {1}
    // must beat the empty set and every extension of {1}.
    const double e0 = fit_mle(d, TermSet{}, cfg).fit.ebic;
    double best1 = 1e300;
    int best1_j = 0;
    for (int j = 1; j <= 10; ++j) {
        const double e = fit_mle(d, make_set({Term::main(j)}), cfg).fit.ebic;
        if (e < best1) {
            best1 = e;
            best1_j = j;
        }
    }
    CHECK(best1_j == 1);
    CHECK(best1 < e0);
    for (int j = 2; j <= 10; ++j) {
        const double e = fit_mle(d, make_set({Term::main(1), Term::main(j)}), cfg).fit.ebic;
        CHECK(e > best1);  // no two-term model improves on {1}
    }
}

TEST_CASE("stage 1 keeps the only informative predictor when p = 1") {
    Rng rng(32);
    Dataset d = shifted_classes(rng, 300, 1, 0.9);
    SelectionConfig cfg;
    TermSet m = stage1_preliminary(d, cfg);
    CHECK(m == make_set({Term::main(1)}));
    const double e0 = fit_mle(d, TermSet{}, cfg).fit.ebic;
    const double e1 = fit_mle(d, make_set({Term::main(1)}), cfg).fit.ebic;
    CHECK(e1 < e0);
}

TEST_CASE("stage 1 stays empty on null data in at least 95% of replicates") {
    SelectionConfig cfg;
    int empty = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Rng rng(33, static_cast<uint64_t>(rep));
        Dataset d = null_data(rng, 500, 10);
        if (stage1_preliminary(d, cfg).empty()) ++empty;
    }
    CHECK(empty >= 95);
}

TEST_CASE("stage 2 stays empty on null data in at least 95% of replicates") {
    SelectionConfig cfg;
    int empty = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Rng rng(34, static_cast<uint64_t>(rep));
        Dataset d = null_data(rng, 500, 10);
        if (stage2_forward(d, TermSet{}, cfg).empty()) ++empty;
    }
    CHECK(empty >= 95);
}

TEST_CASE("stage 2 detects an interaction-only pair with a shifted mean") {
    Rng rng(35);
    Dataset d = interaction_only(rng, 2000, 5);
    SelectionConfig cfg;
    TermSet m_f = stage1_preliminary(d, cfg);
    std::vector<int> c = stage2_forward(d, m_f, cfg);
    CHECK(std::find(c.begin(), c.end(), 1) != c.end());
    CHECK(std::find(c.begin(), c.end(), 2) != c.end());
}

TEST_CASE("stage 3 removes nothing from an empty or well-supported set") {
    SelectionConfig cfg;
    Rng rng(36);
    Dataset d = shifted_classes(rng, 400, 6, 0.9);
    CHECK(stage3_backward(d, TermSet{}, cfg) == TermSet{});

    TermSet single = make_set({Term::main(1)});
    CHECK(stage3_backward(d, single, cfg) == single);
    // Direct two-model comparison: removal raises EBIC.
    CHECK(fit_mle(d, TermSet{}, cfg).fit.ebic > fit_mle(d, single, cfg).fit.ebic);
}

TEST_CASE("selection is deterministic and thread-count invariant") {
    Rng rng(37);
    Dataset d = shifted_classes(rng, 240, 8, 0.7);
    SelectionConfig cfg;
    cfg.threads = 1;
    SelectionResult a = soda_select(d, cfg);
    SelectionResult b = soda_select(d, cfg);
    cfg.threads = 4;
    SelectionResult c = soda_select(d, cfg);

    CHECK(a.selected == b.selected);
    CHECK(a.selected == c.selected);
    CHECK(a.fits_evaluated == c.fits_evaluated);
    REQUIRE(a.trace.size() == c.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].ebic_after == c.trace[i].ebic_after);
        CHECK(a.trace[i].predictor == c.trace[i].predictor);
    }
    CHECK(a.final_ebic == c.final_ebic);
    CHECK(a.predictors == predictors_of(a.selected));
}

TEST_CASE("stage 2 fit count respects the O(p) per-step bound") {
    Rng rng(38);
    Dataset d = shifted_classes(rng, 240, 8, 0.7);
    SelectionConfig cfg;
    SelectionResult res;
    TermSet m_f = stage1_preliminary(d, cfg, &res);
    std::vector<int> c_f = stage2_forward(d, m_f, cfg, &res);
    const long bound = static_cast<long>(d.p()) *
                           (static_cast<long>(c_f.size()) + cfg.p_f + 1) + 1;  // +1 baseline
    CHECK(res.fits_stage2 <= bound);
}

TEST_CASE("accepted steps in the trace improve monotonically within stages") {
    Rng rng(39);
    Dataset d = shifted_classes(rng, 400, 8, 0.6);
    SelectionConfig cfg;
    SelectionResult res = soda_select(d, cfg);
    for (int stage = 1; stage <= 3; ++stage) {
        double last = 1e300;
        for (const auto& rec : res.trace) {
            if (rec.stage != stage || !rec.improved_best) continue;
            CHECK(rec.ebic_after < last);
            last = rec.ebic_after;
        }
    }
    // Stage-3 accepted removals are non-increasing by construction.
    double prev = 1e300;
    for (const auto& rec : res.trace) {
        if (rec.stage != 3) continue;
        CHECK(rec.ebic_after <= prev);
        prev = rec.ebic_after;
    }
}

TEST_CASE("cv gamma selection: singleton grid and determinism") {
    Rng rng(40);
    Dataset d = shifted_classes(rng, 120, 4, 0.8);
    SelectionConfig cfg;
    CHECK(cv_select_gamma(d, {0.5}, 10, cfg, 7) == 0.5);
    const double g1 = cv_select_gamma(d, {0.0, 0.5}, 5, cfg, 7);
    const double g2 = cv_select_gamma(d, {0.0, 0.5}, 5, cfg, 7);
    CHECK(g1 == g2);
    CHECK_THROWS_AS(cv_select_gamma(d, {}, 10, cfg, 7), BadInput);
    CHECK_THROWS_AS(cv_select_gamma(d, {0.5}, 1, cfg, 7), BadInput);
}

}  // TEST_SUITE

TEST_SUITE("selector_integration") {

TEST_CASE("soda recovers the example 1.1 term set at n = 1000 per class") {
    ClassificationSim sim = gen_classification("1.1", 1000, 50, 424242);
    SelectionConfig cfg;
    cfg.threads = 0;
    SelectionResult res = soda_select(sim.data, cfg);
    CHECK(res.selected == sim.truth);
    CHECK(res.predictors == std::vector<int>{1, 2, 3});

    // Backward elimination separately: truth plus noise terms collapses to truth.
    TermSet padded = sim.truth.with(Term::main(9)).with(Term::interaction(4, 7))
                         .with(Term::interaction(11, 11));
    CHECK(stage3_backward(sim.data, padded, cfg) == sim.truth);
}

TEST_CASE("soda finds the interaction-only predictors of example 1.5") {
    ClassificationSim sim = gen_classification("1.5", 1000, 50, 555);
    SelectionConfig cfg;
    cfg.threads = 0;
    SelectionResult res = soda_select(sim.data, cfg);
    CHECK(res.predictors == std::vector<int>{1, 2, 3});
}

TEST_CASE("stage 2 screens in the true predictors on example 1.1") {
    ClassificationSim sim = gen_classification("1.1", 1000, 50, 777);
    SelectionConfig cfg;
    cfg.threads = 0;
    TermSet m_f = stage1_preliminary(sim.data, cfg);
    std::vector<int> c = stage2_forward(sim.data, m_f, cfg);
    TermSet s1 = induced_term_set(m_f, c);
    for (const Term& t : sim.truth) CHECK(s1.contains(t));
}

TEST_CASE("soda returns the empty set on null data") {
    SelectionConfig cfg;
    int empty = 0;
    const int reps = 40;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(41, static_cast<uint64_t>(rep));
        Dataset d = null_data(rng, 500, 10);
        if (soda_select(d, cfg).selected.empty()) ++empty;
    }
    CHECK(empty >= 38);  // 95%
}

}  // TEST_SUITE
