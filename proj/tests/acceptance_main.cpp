// Acceptance suite: runs the headline selection/prediction experiments through
// the CLI, checks the library-level properties in-process, and prints one
// PASS/FAIL line per criterion.

#include "soda/csv.hpp"
#include "soda/glm.hpp"
#include "soda/rng.hpp"
#include "soda/selector.hpp"
#include "soda/simgen.hpp"
#include "soda/ssoda.hpp"

#include "test_util.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace soda;

namespace {

constexpr uint64_t kSeed = 20260809;

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

struct Column {
    std::vector<double> values;
    double mean() const {
        double s = 0;
        for (double v : values) s += v;
        return values.empty() ? 0.0 : s / static_cast<double>(values.size());
    }
    double max() const {
        double m = -1e300;
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

Column column(const CsvTable& table, const std::string& name) {
    Column out;
    const int c = table.find_column(name);
    if (c < 0) return out;
    for (const auto& row : table.rows) {
        const std::string& field = row[static_cast<size_t>(c)];
        if (field.empty()) continue;
        out.values.push_back(std::stod(field));
    }
    return out;
}

struct TimedRun {
    testutil::RunResult run;
    double seconds = 0.0;
};

TimedRun timed_cli(const std::string& args, const std::string& log) {
    const auto t0 = std::chrono::steady_clock::now();
    TimedRun out;
    out.run = testutil::run_cli(args, log);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

std::string strip_seconds(const std::string& csv) {
    std::stringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

// ---- criteria 1 and 3 share one benchmark run ----
void criteria_1_and_3(const testutil::TempDir& tmp) {
    const std::string results = tmp.file("c1_results.csv");
    TimedRun run = timed_cli(
        "benchmark --example 1.1 --n 1000 --p 50 --reps 20 --seed " + std::to_string(kSeed) +
            " --results " + results,
        tmp.file("c1.log"));
    if (run.run.exit_code != 0) {
        report(1, false, "benchmark exited " + std::to_string(run.run.exit_code));
        report(3, false, "benchmark exited " + std::to_string(run.run.exit_code));
        return;
    }
    const CsvTable table = read_csv(results);
    const double mfn = column(table, "mfn").mean();
    const double mfp = column(table, "mfp").mean();
    const double ifn = column(table, "ifn").mean();
    const double ifp = column(table, "ifp").mean();
    const bool pass1 = mfn <= 0.1 && mfp <= 0.1 && ifn <= 0.1 && ifp <= 0.1;
    report(1, pass1,
           "example 1.1 n=1000 means MFN=" + fmt(mfn) + " MFP=" + fmt(mfp) + " IFN=" + fmt(ifn) +
               " IFP=" + fmt(ifp) + " (each <= 0.1), " + fmt(run.seconds, 1) + "s total");

    const Column te = column(table, "te");
    const bool pass3 = !te.values.empty() && te.mean() <= 0.177;
    report(3, pass3,
           "example 1.1 n=1000 mean TE=" + fmt(te.mean(), 4) + " over " +
               std::to_string(te.values.size()) + " reps (<= 0.177 = oracle + 2pts)");
}

void criterion_2(const testutil::TempDir& tmp) {
    const std::string results = tmp.file("c2_results.csv");
    TimedRun run = timed_cli(
        "benchmark --example 1.1 --n 215 --p 50 --reps 50 --seed " + std::to_string(kSeed) +
            " --test-size 0 --results " + results,
        tmp.file("c2.log"));
    if (run.run.exit_code != 0) {
        report(2, false, "benchmark exited " + std::to_string(run.run.exit_code));
        return;
    }
    const CsvTable table = read_csv(results);
    const double mfn = column(table, "mfn").mean();
    const double mfp = column(table, "mfp").mean();
    const double ifn = column(table, "ifn").mean();
    const double ifp = column(table, "ifp").mean();
    const bool pass = mfn <= 0.1 && mfp <= 0.15 && ifn <= 0.3 && ifp <= 0.2;
    report(2, pass,
           "example 1.1 n=215 means MFN=" + fmt(mfn) + " (<=0.1) MFP=" + fmt(mfp) +
               " (<=0.15) IFN=" + fmt(ifn) + " (<=0.3) IFP=" + fmt(ifp) + " (<=0.2)");
}

void criterion_4() {
    double total = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        ClassificationSim test =
            gen_classification("1.1", 5000, 50, kSeed, 900000 + static_cast<uint64_t>(rep));
        total += test_error(test.oracle, test.data);
    }
    const double mean = total / 10.0;
    const bool pass = std::abs(mean - 0.1565) <= 0.017;
    report(4, pass, "oracle Bayes rule mean TE=" + fmt(mean, 4) + " over 10x10000 points "
                    "(target 0.1565 +- 0.017)");
}

void criterion_5(const testutil::TempDir& tmp) {
    const std::string results = tmp.file("c5_results.csv");
    TimedRun run = timed_cli(
        "benchmark --example 1.4 --n 500 --reps 3 --seed " + std::to_string(kSeed) +
            " --results " + results,
        tmp.file("c5.log"));
    if (run.run.exit_code != 0) {
        report(5, false, "benchmark exited " + std::to_string(run.run.exit_code));
        return;
    }
    const CsvTable table = read_csv(results);
    const double vfn = column(table, "vfn").mean();
    const double vfp = column(table, "vfp").mean();
    const double worst = column(table, "seconds").max();
    const bool pass = (vfn + vfp) <= 1.0 && worst <= 900.0;
    report(5, pass,
           "example 1.4 (p=1000) mean VFN+VFP=" + fmt(vfn + vfp) + " (<=1), slowest replicate " +
               fmt(worst, 1) + "s (<=900)");
}

void criterion_6(const testutil::TempDir& tmp) {
    bool pass = true;
    std::string detail;
    for (char scenario : {'a', 'b', 'c'}) {
        const std::string results = tmp.file(std::string("c6_") + scenario + ".csv");
        TimedRun run = timed_cli(
            std::string("benchmark --example 2.1 --scenario ") + scenario +
                " --n 200 --p 1000 --reps 10 --slices 5 --seed " + std::to_string(kSeed) +
                " --results " + results,
            tmp.file(std::string("c6_") + scenario + ".log"));
        if (run.run.exit_code != 0) {
            pass = false;
            detail += std::string(1, scenario) + ": exit " + std::to_string(run.run.exit_code) + "  ";
            continue;
        }
        const CsvTable table = read_csv(results);
        const double fn = column(table, "vfn").mean();
        const double fp = column(table, "vfp").mean();
        const bool ok = scenario == 'c' ? fn <= 1.0 : (fn <= 0.5 && fp <= 1.5);
        pass = pass && ok;
        detail += std::string("(") + scenario + ") FN=" + fmt(fn, 2) + " FP=" + fmt(fp, 2) + "  ";
    }
    report(6, pass, "example 2.1 S-SODA n=200 p=1000 H=5: " + detail +
                        "(a,b: FN<=0.5, FP<=1.5; c: FN<=1)");
}

void criterion_7(const testutil::TempDir& tmp) {
    bool pass = true;
    std::string detail;
    const double thresholds[3] = {0.97, 0.90, 0.90};
    for (int i = 0; i < 3; ++i) {
        const std::string example = "3." + std::to_string(i + 1);
        const std::string results = tmp.file("c7_" + std::to_string(i + 1) + ".csv");
        TimedRun run = timed_cli(
            "benchmark --example " + example + " --n 500 --reps 3 --slices 5 --pred-slices 25"
                " --grid 20 --seed " + std::to_string(kSeed) + " --results " + results +
                " --grid-out " + tmp.file("c7_grid_" + std::to_string(i + 1) + ".csv"),
            tmp.file("c7_" + std::to_string(i + 1) + ".log"));
        if (run.run.exit_code != 0) {
            pass = false;
            detail += example + ": exit " + std::to_string(run.run.exit_code) + "  ";
            continue;
        }
        const CsvTable table = read_csv(results);
        const double corr = column(table, "corr").mean();
        pass = pass && corr >= thresholds[i];
        detail += example + " corr=" + fmt(corr, 4) + " (>=" + fmt(thresholds[i], 2) + ")  ";
    }
    report(7, pass, "surface recovery n=500 H=25: " + detail);
}

// ---- criterion 8: the always-runnable property bundle ----

bool check8(const char* name, bool ok, std::string* detail) {
    if (!ok) {
        *detail += std::string(" [") + name + ": FAIL]";
        return false;
    }
    return true;
}

bool properties_glm(std::string* detail) {
    bool ok = true;
    Rng rng(808);
    Matrix x(20, 4);
    std::vector<int> labels(20);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 4; ++j) x(i, j) = rng.normal();
        labels[static_cast<size_t>(i)] = 1 + static_cast<int>(rng.index(3));
    }
    labels[0] = 1;
    labels[1] = 2;
    labels[2] = 3;
    Dataset d = Dataset::categorical(x, labels);
    TermSet s(std::vector<Term>{Term::main(1), Term::main(2), Term::interaction(3, 4)});
    AugmentedDesign design = augment(d, s);
    const int m = design.width();
    Matrix theta(m, 2);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < 2; ++k) theta(i, k) = 0.3 * rng.normal();

    Vector grad;
    Matrix hess;
    score_and_hessian(theta, design, d.labels(), &grad, &hess);
    const double h = 1e-5;
    Vector grad_fd(2 * m);
    for (int k = 0; k < 2; ++k)
        for (int c = 0; c < m; ++c) {
            Matrix up = theta, dn = theta;
            up(c, k) += h;
            dn(c, k) -= h;
            grad_fd(k * m + c) = (log_likelihood(up, design, d.labels()) -
                                  log_likelihood(dn, design, d.labels())) / (2 * h);
        }
    const double gerr = (grad - grad_fd).cwiseAbs().maxCoeff() /
                        std::max(1.0, grad.cwiseAbs().maxCoeff());
    ok &= check8("gradient finite differences (<1e-5)", gerr < 1e-5, detail);

    Matrix hess_fd(2 * m, 2 * m);
    for (int k = 0; k < 2; ++k)
        for (int c = 0; c < m; ++c) {
            Matrix up = theta, dn = theta;
            up(c, k) += h;
            dn(c, k) -= h;
            Vector gu, gd;
            score_and_hessian(up, design, d.labels(), &gu, nullptr);
            score_and_hessian(dn, design, d.labels(), &gd, nullptr);
            hess_fd.col(k * m + c) = (gu - gd) / (2 * h);
        }
    const double herr = (hess - hess_fd).cwiseAbs().maxCoeff() /
                        std::max(1.0, hess.cwiseAbs().maxCoeff());
    ok &= check8("hessian finite differences (<1e-4)", herr < 1e-4, detail);

    // Monotone ascent and nesting on a larger random instance.
    Rng rng2(809);
    Matrix x2(120, 5);
    std::vector<int> labels2(120);
    for (int i = 0; i < 120; ++i) {
        for (int j = 0; j < 5; ++j) x2(i, j) = rng2.normal();
        labels2[static_cast<size_t>(i)] = 1 + static_cast<int>(rng2.index(2));
    }
    labels2[0] = 1;
    labels2[1] = 2;
    Dataset d2 = Dataset::categorical(x2, labels2);
    TermSet small(std::vector<Term>{Term::main(1), Term::interaction(2, 2)});
    TermSet large = small.with(Term::main(3)).with(Term::interaction(4, 5));
    FitResult fs = fit_mle(d2, small, SelectionConfig{});
    FitResult fl = fit_mle(d2, large, SelectionConfig{});
    bool monotone = fs.ok() && fl.ok();
    if (monotone)
        for (size_t i = 1; i < fl.fit.loglik_path.size(); ++i)
            monotone &= fl.fit.loglik_path[i] >= fl.fit.loglik_path[i - 1];
    ok &= check8("newton monotone ascent", monotone, detail);
    ok &= check8("nesting loglik(S') >= loglik(S) - 1e-8",
                 fs.ok() && fl.ok() && fl.fit.loglik >= fs.fit.loglik - 1e-8, detail);
    ok &= check8("EBIC at gamma=0 equals BIC",
                 std::abs(ebic(-50.0, 3, 200, 40, 0.0) - (100.0 + 3 * std::log(200.0))) < 1e-12,
                 detail);
    return ok;
}

bool properties_qda(std::string* detail) {
    bool ok = true;
    Rng rng(810);
    QdaParameters qp;
    qp.priors = {0.3, 0.7};
    for (int c = 0; c < 2; ++c) {
        Vector mu(3);
        for (int i = 0; i < 3; ++i) mu(i) = rng.normal();
        qp.means.push_back(mu);
        Matrix a(3, 3);
        for (int r = 0; r < 3; ++r)
            for (int cc = 0; cc < 3; ++cc) a(r, cc) = rng.normal();
        qp.covariances.push_back(a * a.transpose() + 0.4 * Matrix::Identity(3, 3));
    }
    QdaCoefficients qc = qda_to_logistic(qp);
    auto log_gauss = [&](int c, const Vector& x) {
        Eigen::LLT<Matrix> llt(qp.covariances[static_cast<size_t>(c)]);
        Vector v = x - qp.means[static_cast<size_t>(c)];
        Matrix l = llt.matrixL();
        l.triangularView<Eigen::Lower>().solveInPlace(v);
        return -0.5 * (3 * std::log(2 * 3.14159265358979323846) +
                       2.0 * l.diagonal().array().log().sum() + v.squaredNorm());
    };
    bool identity = true;
    for (int trial = 0; trial < 20; ++trial) {
        Vector x(3);
        for (int i = 0; i < 3; ++i) x(i) = 2 * rng.normal();
        const double want =
            std::log(qp.priors[0] / qp.priors[1]) + log_gauss(0, x) - log_gauss(1, x);
        identity &= std::abs(qc.discriminant(0, x) - want) < 1e-10;
    }
    ok &= check8("qda mapping identity (1e-10)", identity, detail);

    // Figure-1 parameters against the published coefficients.
    Matrix w = Matrix::Zero(3, 3);
    w(0, 0) = w(2, 2) = -0.60;
    w(0, 1) = w(1, 0) = -0.35;
    w(1, 2) = w(2, 1) = -0.35;
    QdaParameters fig;
    fig.priors = {0.5, 0.5};
    Vector mu(3);
    mu << 0.5, 0, 0;
    fig.means = {mu, -mu};
    fig.covariances = {(Matrix::Identity(3, 3) - w).inverse(),
                       (Matrix::Identity(3, 3) + w).inverse()};
    QdaCoefficients f = qda_to_logistic(fig);
    const bool fig_ok = std::abs(f.alpha(0) - 1.627) < 1e-3 &&
                        std::abs(f.beta[0](0) - 1.0) < 1e-3 && std::abs(f.beta[0](1)) < 1e-3 &&
                        std::abs(f.beta[0](2)) < 1e-3 && std::abs(f.a[0](0, 0) + 0.6) < 1e-3 &&
                        std::abs(f.a[0](1, 1)) < 1e-3 && std::abs(f.a[0](2, 2) + 0.6) < 1e-3 &&
                        std::abs(2 * f.a[0](0, 1) + 0.7) < 1e-3 &&
                        std::abs(2 * f.a[0](1, 2) + 0.7) < 1e-3;
    ok &= check8("figure-1 mapping reproduces (1.627, 1, -0.6, -0.6, -0.7, -0.7)", fig_ok, detail);
    return ok;
}

bool properties_ssoda(std::string* detail) {
    bool ok = true;
    SlicedModel model({1}, 2);
    Vector mu0(1), mu1(1);
    mu0 << 0.0;
    mu1 << 2.0;
    model.set_slice(0, 10, mu0, Matrix::Identity(1, 1), 0.0);
    model.set_slice(1, 10, mu1, Matrix::Identity(1, 1), 10.0);
    model.finalize();
    Vector probe(1);
    probe << 0.0;
    const double want = 10.0 * std::exp(-2.0) / (1.0 + std::exp(-2.0));
    ok &= check8("hand-computed two-slice prediction 1.19203",
                 std::abs(predict(model, probe) - want) < 1e-12 &&
                     std::abs(predict(model, probe) - 1.19203) < 1e-5,
                 detail);

    Rng rng(811);
    bool bounded = true;
    for (int trial = 0; trial < 50; ++trial) {
        Vector x(1);
        x(0) = rng.normal(0, 25);
        const double p = predict(model, x);
        bounded &= p >= 0.0 - 1e-12 && p <= 10.0 + 1e-12;
    }
    ok &= check8("prediction bounded by response means", bounded, detail);

    bool invariant = true;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 10 + static_cast<int>(rng.index(40));
        Vector y(n);
        for (int i = 0; i < n; ++i) y(i) = rng.normal();
        SliceAssignment base = slice(y, 5);
        Vector mono = (y.array() * 3.0).exp();
        invariant &= slice(mono, 5).h == base.h;
    }
    ok &= check8("slicing invariant under increasing transforms", invariant, detail);
    return ok;
}

bool properties_determinism(const testutil::TempDir& tmp, std::string* detail) {
    TimedRun a = timed_cli(
        "benchmark --example 1.1 --n 100 --p 20 --reps 2 --seed 5 --threads 1 --test-size 2000"
        " --results " + tmp.file("det1.csv"),
        tmp.file("det1.log"));
    TimedRun b = timed_cli(
        "benchmark --example 1.1 --n 100 --p 20 --reps 2 --seed 5 --threads 3 --test-size 2000"
        " --results " + tmp.file("det3.csv"),
        tmp.file("det3.log"));
    const bool ok = a.run.exit_code == 0 && b.run.exit_code == 0 &&
                    strip_seconds(testutil::read_file(tmp.file("det1.csv"))) ==
                        strip_seconds(testutil::read_file(tmp.file("det3.csv")));
    return check8("end-to-end determinism across --threads", ok, detail);
}

void criterion_8(const testutil::TempDir& tmp) {
    std::string detail;
    bool ok = true;
    ok &= properties_glm(&detail);
    ok &= properties_qda(&detail);
    ok &= properties_ssoda(&detail);
    ok &= properties_determinism(tmp, &detail);
    report(8, ok, ok ? "gradient/hessian FD, ascent, nesting, BIC reduction, QDA identity, "
                       "figure-1 mapping, Eq-8 prediction, slicing invariance, thread determinism"
                     : "property failures:" + detail);
}

}  // namespace

int main() {
    if (testutil::cli_path().empty()) {
        std::fprintf(stderr, "SODA_CLI must point at the soda binary\n");
        return 2;
    }
    testutil::TempDir tmp;
    std::printf("acceptance artifacts under %s\n", tmp.path.c_str());

    criteria_1_and_3(tmp);
    criterion_2(tmp);
    criterion_4();
    criterion_5(tmp);
    criterion_6(tmp);
    criterion_7(tmp);
    criterion_8(tmp);

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
