#include "soda/benchmark.hpp"

#include "soda/ssoda.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <tuple>

namespace soda {

namespace {

constexpr uint64_t kTestStreamOffset = 1ull << 32;

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    double ma = 0, mb = 0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double saa = 0, sbb = 0, sab = 0;
    for (size_t i = 0; i < n; ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

BenchmarkRow run_classification_rep(const BenchmarkConfig& cfg, int n, int rep) {
    BenchmarkRow row;
    row.example = cfg.example;
    row.scenario = cfg.scenario;
    row.n = n;
    row.replicate = rep;
    const auto t0 = std::chrono::steady_clock::now();

    ClassificationSim sim = gen_classification(cfg.example, n, cfg.p, cfg.seed,
                                               static_cast<uint64_t>(rep), cfg.noise);
    SelectionResult sel = soda_select(sim.data, cfg.selection);
    row.metrics = selection_metrics(sel.selected, sim.truth);

    if (cfg.test_size > 0) {
        ClassificationSim test =
            gen_classification(cfg.example, cfg.test_size / 2, cfg.p, cfg.seed,
                               kTestStreamOffset + static_cast<uint64_t>(rep), cfg.noise);
        FitResult fit = fit_mle(sim.data, sel.selected, cfg.selection);
        if (fit.ok()) {
            row.te = test_error(fit.fit, test.data);
            row.metrics.te = row.te;
        }
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

BenchmarkRow run_regression_rep(const BenchmarkConfig& cfg, int n, int rep,
                                std::vector<GridRow>* grid) {
    BenchmarkRow row;
    row.example = cfg.example;
    row.scenario = cfg.scenario;
    row.n = n;
    row.replicate = rep;
    const auto t0 = std::chrono::steady_clock::now();

    RegressionSim sim =
        gen_regression(cfg.example, cfg.scenario, n, cfg.p, cfg.seed, static_cast<uint64_t>(rep));
    SelectionResult sel = s_soda_select(sim.data, cfg.h_select, cfg.selection);
    row.metrics = predictor_metrics(sel.predictors, sim.truth_predictors);

    if (cfg.example[0] == '3') {
        // Surface recovery: compare the sliced-Gaussian prediction with the true
        // link over a grid in (x1, x2); unselected coordinates sit at 0.
        std::vector<int> preds = sel.predictors;
        if (preds.empty()) preds = {1, 2};  // degenerate selection; keeps the rule evaluable
        SlicedModel model = fit_sliced_gaussian(sim.data, preds, cfg.h_predict);
        const int g = cfg.grid_size;
        std::vector<double> truth_vals, pred_vals;
        truth_vals.reserve(static_cast<size_t>(g * g));
        pred_vals.reserve(static_cast<size_t>(g * g));
        Vector full = Vector::Zero(sim.data.p());
        for (int a = 0; a < g; ++a) {
            const double x1 = -2.0 + 4.0 * a / (g - 1);
            for (int b = 0; b < g; ++b) {
                const double x2 = -2.0 + 4.0 * b / (g - 1);
                full(0) = x1;
                full(1) = x2;
                Vector sub(static_cast<int>(preds.size()));
                for (size_t c = 0; c < preds.size(); ++c) sub(static_cast<int>(c)) = full(preds[c] - 1);
                const double y_true = oracle_regression_mean(sim.oracle, full);
                const double y_pred = predict(model, sub);
                truth_vals.push_back(y_true);
                pred_vals.push_back(y_pred);
                if (grid) grid->push_back(GridRow{rep, x1, x2, y_true, y_pred});
            }
        }
        row.corr = pearson(truth_vals, pred_vals);
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

}  // namespace

BenchmarkOutput run_benchmark(const BenchmarkConfig& cfg,
                              const std::function<void(const BenchmarkRow&)>& progress) {
    if (cfg.reps < 1) throw BadInput("reps must be >= 1");
    if (cfg.n_grid.empty()) throw BadInput("benchmark needs at least one n");
    const bool classification = is_classification_example(cfg.example);
    BenchmarkOutput out;
    for (int n : cfg.n_grid) {
        for (int rep = 0; rep < cfg.reps; ++rep) {
            BenchmarkRow row = classification
                                   ? run_classification_rep(cfg, n, rep)
                                   : run_regression_rep(cfg, n, rep, &out.grid);
            if (progress) progress(row);
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

std::vector<BenchmarkSummary> summarize(const std::vector<BenchmarkRow>& rows) {
    struct Acc {
        std::vector<double> vfp, vfn, mfp, mfn, ifp, ifn, te, corr, seconds;
        int order = 0;
    };
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    auto sdev = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double m = mean(v);
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };

    std::map<std::tuple<std::string, char, int>, Acc> groups;
    int order = 0;
    for (const auto& r : rows) {
        Acc& acc = groups[{r.example, r.scenario, r.n}];
        if (acc.vfp.empty()) acc.order = order++;
        acc.vfp.push_back(r.metrics.vfp);
        acc.vfn.push_back(r.metrics.vfn);
        acc.mfp.push_back(r.metrics.mfp);
        acc.mfn.push_back(r.metrics.mfn);
        acc.ifp.push_back(r.metrics.ifp);
        acc.ifn.push_back(r.metrics.ifn);
        if (r.te) acc.te.push_back(*r.te);
        if (r.corr) acc.corr.push_back(*r.corr);
        acc.seconds.push_back(r.seconds);
    }
    std::vector<BenchmarkSummary> out(groups.size());
    for (const auto& [key, acc] : groups) {
        BenchmarkSummary s;
        s.example = std::get<0>(key);
        s.scenario = std::get<1>(key);
        s.n = std::get<2>(key);
        s.reps = static_cast<int>(acc.vfp.size());
        s.vfp = mean(acc.vfp);
        s.vfn = mean(acc.vfn);
        s.mfp = mean(acc.mfp);
        s.mfn = mean(acc.mfn);
        s.ifp = mean(acc.ifp);
        s.ifn = mean(acc.ifn);
        s.vfp_sd = sdev(acc.vfp);
        s.vfn_sd = sdev(acc.vfn);
        s.mfp_sd = sdev(acc.mfp);
        s.mfn_sd = sdev(acc.mfn);
        s.ifp_sd = sdev(acc.ifp);
        s.ifn_sd = sdev(acc.ifn);
        if (!acc.te.empty()) {
            s.te = mean(acc.te);
            s.te_sd = sdev(acc.te);
        }
        if (!acc.corr.empty()) {
            s.corr = mean(acc.corr);
            s.corr_sd = sdev(acc.corr);
        }
        s.seconds = mean(acc.seconds);
        out[static_cast<size_t>(acc.order)] = std::move(s);
    }
    return out;
}

}  // namespace soda
