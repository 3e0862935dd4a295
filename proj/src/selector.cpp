#include "soda/selector.hpp"

#include "soda/parallel.hpp"
#include "soda/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace soda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Dataset subset_rows(const Dataset& data, const std::vector<int>& rows) {
    Matrix x(static_cast<int>(rows.size()), data.p());
    std::vector<int> labels(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        x.row(static_cast<int>(i)) = data.x().row(rows[i]);
        labels[i] = data.labels()[static_cast<size_t>(rows[i])];
    }
    return Dataset::categorical(std::move(x), std::move(labels), data.column_names());
}

// Shared forward loop for stages 1 and 2. Candidates are indexed 0..count-1;
// make_set(i) builds the candidate term set. Returns the index path taken and
// the position (length of the accepted prefix) achieving the best EBIC.
struct ForwardOutcome {
    std::vector<int> path;   // chosen candidate ids, in order taken
    int best_len = 0;        // prefix of `path` with the lowest EBIC seen
    double best_ebic = kInf;
    ModelFit best_fit;
};

template <typename MakeSet, typename Record>
ForwardOutcome forward_pass(const Dataset& data, const SelectionConfig& cfg, int stage,
                            int candidate_count, double baseline_ebic,
                            const ModelFit* baseline_fit, int max_steps, int patience_cap,
                            long* fit_counter, MakeSet&& make_set, Record&& record) {
    ForwardOutcome out;
    out.best_ebic = baseline_ebic;
    if (baseline_fit) out.best_fit = *baseline_fit;

    std::vector<char> taken(static_cast<size_t>(candidate_count), 0);
    std::vector<int> current;  // ids taken so far
    double current_ebic = baseline_ebic;
    ModelFit current_fit;
    if (baseline_fit) current_fit = *baseline_fit;
    int patience = 0;

    while (static_cast<int>(current.size()) < max_steps) {
        std::vector<int> candidates;
        candidates.reserve(static_cast<size_t>(candidate_count));
        for (int id = 0; id < candidate_count; ++id)
            if (!taken[static_cast<size_t>(id)]) candidates.push_back(id);
        if (candidates.empty()) break;

        std::vector<FitResult> fits(candidates.size());
        const ModelFit* warm = current_fit.k_classes > 0 ? &current_fit : nullptr;
        parallel_for(static_cast<int>(candidates.size()), cfg.threads, [&](int i) {
            fits[static_cast<size_t>(i)] =
                fit_mle(data, make_set(current, candidates[static_cast<size_t>(i)]), cfg, warm);
        });
        *fit_counter += static_cast<long>(candidates.size());

        int chosen = -1;
        double chosen_ebic = kInf;
        for (size_t i = 0; i < candidates.size(); ++i) {
            if (!fits[i].ok() || !std::isfinite(fits[i].fit.ebic)) continue;
            if (fits[i].fit.ebic < chosen_ebic) {
                chosen_ebic = fits[i].fit.ebic;
                chosen = static_cast<int>(i);
            }
        }
        if (chosen < 0) break;  // every candidate failed to fit

        const bool improves = chosen_ebic < out.best_ebic;
        if (!improves && patience >= patience_cap) break;  // exploration budget spent

        record(stage, candidates[static_cast<size_t>(chosen)], current_ebic, chosen_ebic, improves);
        current.push_back(candidates[static_cast<size_t>(chosen)]);
        taken[static_cast<size_t>(candidates[static_cast<size_t>(chosen)])] = 1;
        current_ebic = chosen_ebic;
        current_fit = std::move(fits[static_cast<size_t>(chosen)].fit);
        if (improves) {
            out.best_ebic = chosen_ebic;
            out.best_len = static_cast<int>(current.size());
            out.best_fit = current_fit;
            patience = 0;
        } else {
            ++patience;
        }
    }
    out.path = std::move(current);
    return out;
}

FitResult fit_counted(const Dataset& data, const TermSet& s, const SelectionConfig& cfg,
                      const ModelFit* warm, long* counter) {
    ++*counter;
    return fit_mle(data, s, cfg, warm);
}

void add_trace(SelectionResult* accum, TraceRecord rec) {
    if (accum) accum->trace.push_back(std::move(rec));
}

}  // namespace

TermSet stage1_preliminary(const Dataset& data, const SelectionConfig& cfg,
                           SelectionResult* accum) {
    if (!data.is_categorical()) throw DimensionMismatch("stage 1 requires a categorical response");
    cfg.validate();
    long local_count = 0;
    long* counter = accum ? &accum->fits_stage1 : &local_count;

    FitResult baseline = fit_counted(data, TermSet{}, cfg, nullptr, counter);
    if (!baseline.ok()) throw DataError("intercept-only model failed to fit");

    const int p = data.p();
    const int patience_cap = cfg.continue_stage1 ? cfg.p_f : 0;
    auto make_set = [&](const std::vector<int>& current, int candidate) {
        std::vector<Term> terms;
        terms.reserve(current.size() + 1);
        for (int id : current) terms.push_back(Term::main(id + 1));
        terms.push_back(Term::main(candidate + 1));
        return TermSet(std::move(terms));
    };
    auto record = [&](int stage, int candidate, double before, double after, bool improved) {
        TraceRecord rec;
        rec.stage = stage;
        rec.action = TraceRecord::Action::Add;
        rec.term = Term::main(candidate + 1);
        rec.predictor = candidate + 1;
        rec.ebic_before = before;
        rec.ebic_after = after;
        rec.improved_best = improved;
        add_trace(accum, std::move(rec));
    };

    ForwardOutcome out = forward_pass(data, cfg, 1, p, baseline.fit.ebic, &baseline.fit, p,
                                      patience_cap, counter, make_set, record);
    if (accum) accum->fits_evaluated += *counter;

    std::vector<Term> mains;
    for (int i = 0; i < out.best_len; ++i) mains.push_back(Term::main(out.path[static_cast<size_t>(i)] + 1));
    return TermSet(std::move(mains));
}

std::vector<int> stage2_forward(const Dataset& data, const TermSet& m_f,
                                const SelectionConfig& cfg, SelectionResult* accum) {
    if (!data.is_categorical()) throw DimensionMismatch("stage 2 requires a categorical response");
    cfg.validate();
    long local_count = 0;
    long* counter = accum ? &accum->fits_stage2 : &local_count;

    FitResult baseline = fit_counted(data, m_f, cfg, nullptr, counter);
    if (!baseline.ok()) throw DataError("stage 2 baseline model failed to fit");

    const int p = data.p();
    const int patience_cap = cfg.continue_stage2 ? cfg.p_f : 0;
    const int max_steps = cfg.effective_max_forward(data.n());
    auto make_set = [&](const std::vector<int>& current, int candidate) {
        std::vector<int> c;
        c.reserve(current.size() + 1);
        for (int id : current) c.push_back(id + 1);
        c.push_back(candidate + 1);
        return induced_term_set(m_f, c);
    };
    auto record = [&](int stage, int candidate, double before, double after, bool improved) {
        TraceRecord rec;
        rec.stage = stage;
        rec.action = TraceRecord::Action::Add;
        rec.predictor = candidate + 1;
        rec.ebic_before = before;
        rec.ebic_after = after;
        rec.improved_best = improved;
        add_trace(accum, std::move(rec));
    };

    ForwardOutcome out = forward_pass(data, cfg, 2, p, baseline.fit.ebic, &baseline.fit,
                                      max_steps, patience_cap, counter, make_set, record);
    if (accum) accum->fits_evaluated += *counter;

    std::vector<int> chosen;
    for (int i = 0; i < out.best_len; ++i) chosen.push_back(out.path[static_cast<size_t>(i)] + 1);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

TermSet stage3_backward(const Dataset& data, const TermSet& s_start, const SelectionConfig& cfg,
                        SelectionResult* accum) {
    if (!data.is_categorical()) throw DimensionMismatch("stage 3 requires a categorical response");
    cfg.validate();
    long local_count = 0;
    long* counter = accum ? &accum->fits_stage3 : &local_count;

    FitResult current = fit_counted(data, s_start, cfg, nullptr, counter);
    if (!current.ok())
        throw DataError("stage 3 starting set failed to fit (" + to_string(current.status) + ")");

    TermSet s = s_start;
    while (!s.empty()) {
        const int count = s.size();
        std::vector<FitResult> fits(static_cast<size_t>(count));
        parallel_for(count, cfg.threads, [&](int i) {
            fits[static_cast<size_t>(i)] = fit_mle(data, s.without(s[i]), cfg, &current.fit);
        });
        *counter += count;

        int chosen = -1;
        double chosen_ebic = kInf;
        for (int i = 0; i < count; ++i) {
            if (!fits[static_cast<size_t>(i)].ok() ||
                !std::isfinite(fits[static_cast<size_t>(i)].fit.ebic))
                continue;
            if (fits[static_cast<size_t>(i)].fit.ebic < chosen_ebic) {
                chosen_ebic = fits[static_cast<size_t>(i)].fit.ebic;
                chosen = i;
            }
        }
        if (chosen < 0 || chosen_ebic >= current.fit.ebic) break;

        TraceRecord rec;
        rec.stage = 3;
        rec.action = TraceRecord::Action::Remove;
        rec.term = s[chosen];
        rec.ebic_before = current.fit.ebic;
        rec.ebic_after = chosen_ebic;
        rec.improved_best = true;
        add_trace(accum, std::move(rec));

        s = s.without(s[chosen]);
        current = std::move(fits[static_cast<size_t>(chosen)]);
    }

    if (accum) {
        accum->fits_evaluated += *counter;
        accum->final_ebic = current.fit.ebic;
        accum->final_loglik = current.fit.loglik;
    }
    return s;
}

SelectionResult soda_select(const Dataset& data, const SelectionConfig& cfg) {
    SelectionResult res;
    res.gamma_used = cfg.gamma;
    res.stage1_mains = stage1_preliminary(data, cfg, &res);
    res.stage2_predictors = stage2_forward(data, res.stage1_mains, cfg, &res);
    TermSet start = induced_term_set(res.stage1_mains, res.stage2_predictors);
    res.selected = stage3_backward(data, start, cfg, &res);
    res.predictors = predictors_of(res.selected);
    return res;
}

double cv_select_gamma(const Dataset& data, const std::vector<double>& grid, int folds,
                       const SelectionConfig& cfg, uint64_t seed) {
    if (grid.empty()) throw BadInput("gamma grid must be nonempty");
    if (folds < 2) throw BadInput("need at least 2 folds");
    if (!data.is_categorical())
        throw DimensionMismatch("cv_select_gamma requires a categorical response");
    const int n = data.n();
    const int k = data.num_classes();

    // Stratified fold assignment: shuffle within each class, deal round-robin.
    std::vector<int> fold_of(static_cast<size_t>(n), -1);
    for (int cls = 1; cls <= k; ++cls) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (data.labels()[static_cast<size_t>(i)] == cls) idx.push_back(i);
        if (static_cast<int>(idx.size()) < 2)
            throw DataError("class " + std::to_string(cls) + " has too few samples for CV");
        Rng rng(seed, 0xF01D0000ull + static_cast<uint64_t>(cls));
        rng.shuffle(idx);
        for (size_t i = 0; i < idx.size(); ++i)
            fold_of[static_cast<size_t>(idx[i])] = static_cast<int>(i) % folds;
    }

    double best_gamma = grid.front();
    double best_err = kInf;
    for (double gamma : grid) {
        SelectionConfig cfg_g = cfg;
        cfg_g.gamma = gamma;
        long miscount = 0;
        long tested = 0;
        for (int f = 0; f < folds; ++f) {
            std::vector<int> train_rows, test_rows;
            for (int i = 0; i < n; ++i)
                (fold_of[static_cast<size_t>(i)] == f ? test_rows : train_rows).push_back(i);
            if (test_rows.empty()) continue;
            Dataset train = subset_rows(data, train_rows);
            SelectionResult sel = soda_select(train, cfg_g);
            FitResult fit = fit_mle(train, sel.selected, cfg_g);
            if (!fit.ok()) fit = fit_mle(train, TermSet{}, cfg_g);
            Matrix test_x(static_cast<int>(test_rows.size()), data.p());
            for (size_t i = 0; i < test_rows.size(); ++i)
                test_x.row(static_cast<int>(i)) = data.x().row(test_rows[i]);
            std::vector<int> pred = classify(fit.fit, test_x);
            for (size_t i = 0; i < test_rows.size(); ++i) {
                if (pred[i] != data.labels()[static_cast<size_t>(test_rows[i])]) ++miscount;
                ++tested;
            }
        }
        const double err = tested > 0 ? static_cast<double>(miscount) / static_cast<double>(tested)
                                      : kInf;
        // Ties go to the larger (sparser) gamma.
        if (err < best_err || (err == best_err && gamma > best_gamma)) {
            best_err = err;
            best_gamma = gamma;
        }
    }
    return best_gamma;
}

}  // namespace soda
