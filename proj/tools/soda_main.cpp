#include "soda/benchmark.hpp"
#include "soda/csv.hpp"
#include "soda/model_io.hpp"
#include "soda/selector.hpp"
#include "soda/simgen.hpp"
#include "soda/ssoda.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace {

using namespace soda;

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

struct GammaChoice {
    bool cv = false;
    double value = 0.5;
};

GammaChoice parse_gamma(const std::string& s) {
    GammaChoice g;
    if (s == "cv") {
        g.cv = true;
        return g;
    }
    try {
        size_t pos = 0;
        g.value = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        throw BadInput("--gamma must be a number or 'cv', got '" + s + "'");
    }
    if (g.value < 0) throw BadInput("--gamma must be >= 0");
    return g;
}

std::vector<int> parse_n_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw BadInput("--n expects comma-separated integers, got '" + s + "'");
        }
        if (out.back() < 1) throw BadInput("--n entries must be >= 1");
    }
    if (out.empty()) throw BadInput("--n expects at least one value");
    return out;
}

NoiseReading parse_noise(const std::string& s) {
    if (s == "variance") return NoiseReading::Variance;
    if (s == "sd") return NoiseReading::StdDev;
    throw BadInput("--noise-reading must be 'variance' or 'sd'");
}

void emit_report(std::ostream& os, const Dataset& data, const SelectionResult& sel,
                 const ModelFit* fit, const std::string& gamma_note) {
    const auto& names = data.column_names();
    os << "gamma: " << gamma_note << "\n";
    os << "EBIC trace:\n";
    for (const auto& rec : sel.trace) {
        os << "  stage " << rec.stage << " ";
        if (rec.action == TraceRecord::Action::Add)
            os << "+ ";
        else
            os << "- ";
        if (rec.stage == 2)
            os << names[static_cast<size_t>(rec.predictor - 1)];
        else if (rec.term)
            os << rec.term->label(names);
        os << "  EBIC " << fmt(rec.ebic_before, 3) << " -> " << fmt(rec.ebic_after, 3)
           << (rec.improved_best ? "  *" : "") << "\n";
    }
    os << "  (* marks steps that improved the running best)\n";
    os << "selected terms (" << sel.selected.size() << "):\n";
    for (int i = 0; i < sel.selected.size(); ++i) {
        const Term& t = sel.selected[i];
        os << "  " << t.label(names);
        if (fit && fit->theta.size() > 0) {
            os << "  coef";
            for (int k = 0; k < fit->theta.cols(); ++k) os << " " << fmt(fit->theta(i + 1, k), 6);
        }
        os << "\n";
    }
    if (fit && fit->theta.size() > 0) {
        os << "  intercept  coef";
        for (int k = 0; k < fit->theta.cols(); ++k) os << " " << fmt(fit->theta(0, k), 6);
        os << "\n";
    }
    os << "predictors (" << sel.predictors.size() << "):";
    for (int j : sel.predictors) os << " " << names[static_cast<size_t>(j - 1)];
    os << "\n";
    os << "final EBIC: " << fmt(sel.final_ebic, 4) << "  loglik: " << fmt(sel.final_loglik, 4)
       << "  fits evaluated: " << sel.fits_evaluated << "\n";
}

void write_report_file(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw BadInput("cannot write '" + path + "'");
    out << text;
}

int cmd_select(const std::string& input, const std::string& response, const std::string& gamma_s,
               int pf, int max_forward, int folds, uint64_t seed, int threads,
               const std::string& model_path, const std::string& report_path) {
    Dataset data = dataset_from_csv(read_csv(input), response, /*categorical=*/true);
    SelectionConfig cfg;
    cfg.p_f = pf;
    cfg.max_forward = max_forward;
    cfg.threads = threads;
    GammaChoice gamma = parse_gamma(gamma_s);
    std::string gamma_note;
    if (gamma.cv) {
        const std::vector<double> grid = {0.0, 0.5, 1.0};
        cfg.gamma = cv_select_gamma(data, grid, folds, cfg, seed);
        gamma_note = fmt(cfg.gamma, 2) + " (selected by " + std::to_string(folds) +
                     "-fold CV from {0, 0.5, 1})";
    } else {
        cfg.gamma = gamma.value;
        gamma_note = fmt(cfg.gamma, 2);
    }

    SelectionResult sel = soda_select(data, cfg);
    FitResult fit = fit_mle(data, sel.selected, cfg);

    std::ostringstream report;
    report << "SODA selection report\n";
    report << "input: " << input << "  (n=" << data.n() << ", p=" << data.p()
           << ", K=" << data.num_classes() << ")\n";
    emit_report(report, data, sel, fit.ok() ? &fit.fit : nullptr, gamma_note);
    std::cout << report.str();
    write_report_file(report_path, report.str());

    if (!model_path.empty()) {
        if (!fit.ok()) throw DataError("selected model failed to refit; model not written");
        ModelDocument doc;
        doc.model_kind = "logistic";
        doc.column_names = data.column_names();
        doc.gamma = cfg.gamma;
        doc.logistic = fit.fit;
        save_model(model_path, doc);
    }
    return 0;
}

int cmd_ssoda(const std::string& input, const std::string& response, const std::string& gamma_s,
              int pf, int max_forward, int folds, uint64_t seed, int threads, int slices,
              int pred_slices, const std::string& model_path, const std::string& report_path) {
    Dataset data = dataset_from_csv(read_csv(input), response, /*categorical=*/false);
    if (pred_slices == 0) pred_slices = slices;
    SelectionConfig cfg;
    cfg.p_f = pf;
    cfg.max_forward = max_forward;
    cfg.threads = threads;
    GammaChoice gamma = parse_gamma(gamma_s);
    std::string gamma_note;
    if (gamma.cv) {
        SliceAssignment sa = slice(data.y(), slices);
        Dataset sliced_data = Dataset::categorical(data.x(), sa.h, data.column_names());
        const std::vector<double> grid = {0.0, 0.5, 1.0};
        cfg.gamma = cv_select_gamma(sliced_data, grid, folds, cfg, seed);
        gamma_note = fmt(cfg.gamma, 2) + " (selected by " + std::to_string(folds) +
                     "-fold CV on slice labels from {0, 0.5, 1})";
    } else {
        cfg.gamma = gamma.value;
        gamma_note = fmt(cfg.gamma, 2);
    }

    SelectionResult sel = s_soda_select(data, slices, cfg);

    std::ostringstream report;
    report << "S-SODA selection report\n";
    report << "input: " << input << "  (n=" << data.n() << ", p=" << data.p()
           << ", H=" << slices << " slices)\n";
    emit_report(report, data, sel, nullptr, gamma_note);

    if (!model_path.empty()) {
        if (sel.predictors.empty()) {
            report << "no predictors selected; sliced model not written\n";
        } else {
            SlicedModel model = fit_sliced_gaussian(data, sel.predictors, pred_slices);
            for (const auto& w : model.warnings()) report << "warning: " << w << "\n";
            ModelDocument doc;
            doc.model_kind = "sliced_gaussian";
            doc.column_names = data.column_names();
            doc.gamma = cfg.gamma;
            doc.sliced = std::move(model);
            save_model(model_path, doc);
            report << "sliced model (" << pred_slices << " slices) written to " << model_path
                   << "\n";
        }
    }
    std::cout << report.str();
    write_report_file(report_path, report.str());
    return 0;
}

// Columns of `table` rearranged to the training layout; only the columns the
// model reads are required (and filled), the rest stay zero.
Matrix arrange_columns(const CsvTable& table, const std::vector<std::string>& train_names,
                       const std::vector<int>& needed) {
    std::vector<int> missing_names;
    Matrix x = Matrix::Zero(static_cast<int>(table.rows.size()), static_cast<int>(train_names.size()));
    std::string missing;
    for (int j : needed) {
        const std::string& name = train_names[static_cast<size_t>(j - 1)];
        const int col = table.find_column(name);
        if (col < 0) {
            missing += missing.empty() ? name : ", " + name;
            continue;
        }
        for (size_t i = 0; i < table.rows.size(); ++i) {
            double v;
            const std::string& field = table.rows[i][static_cast<size_t>(col)];
            try {
                size_t pos = 0;
                v = std::stod(field, &pos);
                if (pos != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw DataError("row " + std::to_string(i + 2) + ", column '" + name +
                                "': not a number");
            }
            x(static_cast<int>(i), j - 1) = v;
        }
    }
    if (!missing.empty()) throw SchemaMismatch("input is missing model columns: " + missing);
    return x;
}

int cmd_predict(const std::string& model_path, const std::string& input,
                const std::string& output) {
    ModelDocument doc = load_model(model_path);
    CsvTable table = read_csv(input);

    std::vector<std::string> header = table.header;
    std::vector<std::vector<std::string>> rows = table.rows;

    if (doc.model_kind == "sliced_gaussian") {
        const SlicedModel& model = *doc.sliced;
        Matrix x = arrange_columns(table, doc.column_names, model.predictors());
        header.push_back("prediction");
        for (size_t i = 0; i < rows.size(); ++i) {
            Vector sub(model.dimension());
            for (int c = 0; c < model.dimension(); ++c)
                sub(c) = x(static_cast<int>(i), model.predictors()[static_cast<size_t>(c)] - 1);
            rows[i].push_back(format_double(predict(model, sub)));
        }
    } else {
        const ModelFit& fit = *doc.logistic;
        Matrix x = arrange_columns(table, doc.column_names, predictors_of(fit.terms));
        Matrix probs = class_probabilities(fit, x);
        for (int k = 1; k <= fit.k_classes; ++k) header.push_back("prob_" + std::to_string(k));
        header.push_back("class");
        for (size_t i = 0; i < rows.size(); ++i) {
            int best = 0;
            for (int k = 0; k < fit.k_classes; ++k) {
                rows[i].push_back(format_double(probs(static_cast<int>(i), k)));
                if (probs(static_cast<int>(i), k) > probs(static_cast<int>(i), best)) best = k;
            }
            rows[i].push_back(std::to_string(best + 1));
        }
    }
    write_csv(output, header, rows);
    std::cout << "wrote " << rows.size() << " predictions to " << output << "\n";
    return 0;
}

int cmd_simulate(const std::string& example, const std::string& scenario, int n, int p,
                 uint64_t seed, uint64_t replicate, const std::string& noise_s,
                 const std::string& output) {
    const NoiseReading noise = parse_noise(noise_s);
    if (is_classification_example(example)) {
        ClassificationSim sim = gen_classification(example, n, p, seed, replicate, noise);
        write_dataset_csv(output, sim.data);
        std::cout << "example " << example << ": n=" << sim.data.n() << " (" << n
                  << " per class), p=" << sim.data.p() << "\n";
        std::cout << "truth terms:";
        for (const Term& t : sim.truth) std::cout << " " << t.label();
        std::cout << "\n";
    } else {
        const char sc = scenario.empty() ? 'a' : scenario[0];
        RegressionSim sim = gen_regression(example, sc, n, p, seed, replicate);
        write_dataset_csv(output, sim.data);
        std::cout << "example " << example << " scenario (" << sc << "): n=" << sim.data.n()
                  << ", p=" << sim.data.p() << "\n";
        std::cout << "truth predictors:";
        for (int j : sim.truth_predictors) std::cout << " x" << j;
        std::cout << "\n";
    }
    std::cout << "wrote " << output << "\n";
    return 0;
}

int cmd_benchmark(const BenchmarkConfig& cfg, const std::string& results_path,
                  const std::string& grid_path) {
    BenchmarkOutput out = run_benchmark(cfg, [&](const BenchmarkRow& row) {
        std::cout << cfg.example << " n=" << row.n << " rep=" << row.replicate
                  << ": vfp=" << row.metrics.vfp << " vfn=" << row.metrics.vfn;
        if (row.te) std::cout << " te=" << fmt(*row.te, 4);
        if (row.corr) std::cout << " corr=" << fmt(*row.corr, 4);
        std::cout << " (" << fmt(row.seconds, 2) << "s)\n";
        std::cout.flush();
    });

    const std::vector<std::string> header = {"example", "scenario", "n",   "replicate", "vfp",
                                             "vfn",     "mfp",      "mfn", "ifp",       "ifn",
                                             "te",      "corr",     "seconds"};
    const bool classification = is_classification_example(cfg.example);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : out.rows) {
        std::vector<std::string> row;
        row.push_back(r.example);
        row.push_back(classification ? "" : std::string(1, r.scenario));
        row.push_back(std::to_string(r.n));
        row.push_back(std::to_string(r.replicate));
        row.push_back(std::to_string(r.metrics.vfp));
        row.push_back(std::to_string(r.metrics.vfn));
        if (classification) {
            row.push_back(std::to_string(r.metrics.mfp));
            row.push_back(std::to_string(r.metrics.mfn));
            row.push_back(std::to_string(r.metrics.ifp));
            row.push_back(std::to_string(r.metrics.ifn));
        } else {
            row.insert(row.end(), 4, "");
        }
        row.push_back(r.te ? format_double(*r.te) : "");
        row.push_back(r.corr ? format_double(*r.corr) : "");
        row.push_back(fmt(r.seconds, 3));
        rows.push_back(std::move(row));
    }
    write_csv(results_path, header, rows);

    const auto summaries = summarize(out.rows);
    const std::string summary_path = results_path + ".summary.csv";
    std::vector<std::vector<std::string>> srows;
    for (const auto& s : summaries) {
        srows.push_back({s.example, classification ? "" : std::string(1, s.scenario),
                         std::to_string(s.n), std::to_string(s.reps), fmt(s.vfp, 4), fmt(s.vfp_sd, 4),
                         fmt(s.vfn, 4), fmt(s.vfn_sd, 4), fmt(s.mfp, 4), fmt(s.mfp_sd, 4),
                         fmt(s.mfn, 4), fmt(s.mfn_sd, 4), fmt(s.ifp, 4), fmt(s.ifp_sd, 4),
                         fmt(s.ifn, 4), fmt(s.ifn_sd, 4), s.te ? fmt(*s.te, 4) : "",
                         s.te_sd ? fmt(*s.te_sd, 4) : "", s.corr ? fmt(*s.corr, 4) : "",
                         s.corr_sd ? fmt(*s.corr_sd, 4) : "", fmt(s.seconds, 3)});
    }
    write_csv(summary_path,
              {"example", "scenario", "n", "reps", "vfp", "vfp_sd", "vfn", "vfn_sd", "mfp",
               "mfp_sd", "mfn", "mfn_sd", "ifp", "ifp_sd", "ifn", "ifn_sd", "te", "te_sd", "corr",
               "corr_sd", "seconds"},
              srows);

    if (!out.grid.empty()) {
        std::vector<std::vector<std::string>> grows;
        for (const auto& g : out.grid)
            grows.push_back({std::to_string(g.replicate), format_double(g.x1), format_double(g.x2),
                             format_double(g.y_true), format_double(g.y_pred)});
        write_csv(grid_path, {"replicate", "x1", "x2", "y_true", "y_pred"}, grows);
    }

    std::cout << "\nsummary (means over replicates):\n";
    std::cout << "example scenario     n  reps    vfp    vfn    mfp    mfn    ifp    ifn"
                 "      te    corr     sec\n";
    for (const auto& s : summaries) {
        char line[256];
        std::snprintf(line, sizeof(line),
                      "%-7s %-8c %5d %5d %6.2f %6.2f %6.2f %6.2f %6.2f %6.2f %7s %7s %7.1f\n",
                      s.example.c_str(), classification ? '-' : s.scenario, s.n, s.reps, s.vfp,
                      s.vfn, s.mfp, s.mfn, s.ifp, s.ifn, s.te ? fmt(*s.te, 4).c_str() : "-",
                      s.corr ? fmt(*s.corr, 4).c_str() : "-", s.seconds);
        std::cout << line;
    }
    std::cout << "results: " << results_path << "\nsummary: " << summary_path << "\n";
    if (!out.grid.empty()) std::cout << "grid: " << grid_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SODA: stepwise selection of main and interaction effects by EBIC"};
    app.require_subcommand(1);

    // select
    auto* select = app.add_subcommand("select", "select terms for a categorical response");
    std::string sel_input, sel_response = "y", sel_gamma = "0.5", sel_model, sel_report;
    int sel_pf = 3, sel_maxfwd = 0, sel_folds = 10, sel_threads = 0;
    uint64_t sel_seed = 1;
    select->add_option("--input", sel_input, "input CSV")->required();
    select->add_option("--response", sel_response, "response column name");
    select->add_option("--gamma", sel_gamma, "EBIC gamma, or 'cv'");
    select->add_option("--pf", sel_pf, "forward continuation steps")->check(CLI::NonNegativeNumber);
    select->add_option("--max-forward", sel_maxfwd, "stage-2 predictor cap (0=auto)");
    select->add_option("--folds", sel_folds, "CV folds")->check(CLI::Range(2, 1000000));
    select->add_option("--seed", sel_seed, "seed for CV fold assignment");
    select->add_option("--threads", sel_threads, "candidate-fit threads (0=all cores)");
    select->add_option("--model", sel_model, "write the fitted model JSON here");
    select->add_option("--report", sel_report, "also write the text report here");

    // ssoda
    auto* ssoda = app.add_subcommand("ssoda", "slice a continuous response and select");
    std::string ss_input, ss_response = "y", ss_gamma = "0.5", ss_model, ss_report;
    int ss_pf = 3, ss_maxfwd = 0, ss_folds = 10, ss_threads = 0, ss_slices = 5, ss_pred_slices = 0;
    uint64_t ss_seed = 1;
    ssoda->add_option("--input", ss_input, "input CSV")->required();
    ssoda->add_option("--response", ss_response, "response column name");
    ssoda->add_option("--gamma", ss_gamma, "EBIC gamma, or 'cv'");
    ssoda->add_option("--slices", ss_slices, "slice count H for selection")
        ->check(CLI::Range(2, 1000000));
    ssoda->add_option("--pred-slices", ss_pred_slices,
                      "slice count for the fitted sliced model (0 = same as --slices)");
    ssoda->add_option("--pf", ss_pf, "forward continuation steps")->check(CLI::NonNegativeNumber);
    ssoda->add_option("--max-forward", ss_maxfwd, "stage-2 predictor cap (0=auto)");
    ssoda->add_option("--folds", ss_folds, "CV folds")->check(CLI::Range(2, 1000000));
    ssoda->add_option("--seed", ss_seed, "seed for CV fold assignment");
    ssoda->add_option("--threads", ss_threads, "candidate-fit threads (0=all cores)");
    ssoda->add_option("--model", ss_model, "write the sliced model JSON here");
    ssoda->add_option("--report", ss_report, "also write the text report here");

    // predict
    auto* predict = app.add_subcommand("predict", "apply a saved model to new data");
    std::string pr_model, pr_input, pr_output;
    predict->add_option("--model", pr_model, "model JSON")->required();
    predict->add_option("--input", pr_input, "input CSV")->required();
    predict->add_option("--output", pr_output, "output CSV with predictions")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "write one simulated dataset as CSV");
    std::string sim_example, sim_scenario = "a", sim_noise = "variance", sim_output;
    int sim_n = 0, sim_p = 0;
    uint64_t sim_seed = 1, sim_rep = 0;
    simulate->add_option("--example", sim_example, "example id, e.g. 1.1 or 2.3")->required();
    simulate->add_option("--scenario", sim_scenario, "a, b or c (2.x only)");
    simulate->add_option("--n", sim_n, "samples per class (1.x) or total (2.x/3.x)")
        ->required()
        ->check(CLI::PositiveNumber);
    simulate->add_option("--p", sim_p, "predictor count (0 = example default)");
    simulate->add_option("--seed", sim_seed, "RNG seed");
    simulate->add_option("--replicate", sim_rep, "substream index");
    simulate->add_option("--noise-reading", sim_noise, "read N(0,v) as variance|sd");
    simulate->add_option("--output", sim_output, "output CSV")->required();

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "replicate selection/prediction experiments");
    std::string b_example, b_scenario = "a", b_n = "1000", b_gamma = "0.5",
                b_results = "benchmark_results.csv", b_grid_out = "benchmark_grid.csv",
                b_noise = "variance";
    int b_p = 0, b_reps = 10, b_pf = 3, b_maxfwd = 0, b_threads = 0, b_slices = 5,
        b_pred_slices = 25, b_grid = 20, b_test = 10000;
    uint64_t b_seed = 1;
    bench->add_option("--example", b_example, "example id")->required();
    bench->add_option("--scenario", b_scenario, "a, b or c (2.x only)");
    bench->add_option("--n", b_n, "comma-separated n grid");
    bench->add_option("--p", b_p, "predictor count (0 = example default)");
    bench->add_option("--reps", b_reps, "replicates per n")->check(CLI::PositiveNumber);
    bench->add_option("--seed", b_seed, "base seed; replicate r uses substream (seed, r)");
    bench->add_option("--gamma", b_gamma, "EBIC gamma");
    bench->add_option("--pf", b_pf, "forward continuation steps");
    bench->add_option("--max-forward", b_maxfwd, "stage-2 predictor cap (0=auto)");
    bench->add_option("--threads", b_threads, "candidate-fit threads (0=all cores)");
    bench->add_option("--slices", b_slices, "S-SODA selection slices")->check(CLI::Range(2, 1000));
    bench->add_option("--pred-slices", b_pred_slices, "3.x prediction slices")
        ->check(CLI::Range(1, 1000));
    bench->add_option("--grid", b_grid, "3.x grid resolution per axis")->check(CLI::Range(2, 500));
    bench->add_option("--test-size", b_test, "oracle test points per replicate (1.x)");
    bench->add_option("--noise-reading", b_noise, "read N(0,v) as variance|sd");
    bench->add_option("--results", b_results, "results CSV path");
    bench->add_option("--grid-out", b_grid_out, "3.x grid CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (select->parsed())
            return cmd_select(sel_input, sel_response, sel_gamma, sel_pf, sel_maxfwd, sel_folds,
                              sel_seed, sel_threads, sel_model, sel_report);
        if (ssoda->parsed())
            return cmd_ssoda(ss_input, ss_response, ss_gamma, ss_pf, ss_maxfwd, ss_folds, ss_seed,
                             ss_threads, ss_slices, ss_pred_slices, ss_model, ss_report);
        if (predict->parsed()) return cmd_predict(pr_model, pr_input, pr_output);
        if (simulate->parsed())
            return cmd_simulate(sim_example, sim_scenario, sim_n, sim_p, sim_seed, sim_rep,
                                sim_noise, sim_output);
        if (bench->parsed()) {
            BenchmarkConfig cfg;
            cfg.example = b_example;
            cfg.scenario = b_scenario.empty() ? 'a' : b_scenario[0];
            cfg.n_grid = parse_n_list(b_n);
            cfg.p = b_p;
            cfg.reps = b_reps;
            cfg.seed = b_seed;
            cfg.h_select = b_slices;
            cfg.h_predict = b_pred_slices;
            cfg.grid_size = b_grid;
            cfg.test_size = b_test;
            cfg.noise = parse_noise(b_noise);
            cfg.selection.gamma = parse_gamma(b_gamma).value;
            cfg.selection.p_f = b_pf;
            cfg.selection.max_forward = b_maxfwd;
            cfg.selection.threads = b_threads;
            return cmd_benchmark(cfg, b_results, b_grid_out);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
