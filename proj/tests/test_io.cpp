#include "soda/csv.hpp"
#include "soda/glm.hpp"
#include "soda/model_io.hpp"
#include "soda/rng.hpp"
#include "soda/ssoda.hpp"

#include <doctest.h>

#include "test_util.hpp"

using namespace soda;

namespace {

Dataset random_continuous(Rng& rng, int n, int p) {
    Matrix x(n, p);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) x(i, j) = rng.normal(0, 3);
        y(i) = rng.normal();
    }
    return Dataset::continuous(std::move(x), std::move(y));
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("csv round-trips datasets at full precision") {
    testutil::TempDir tmp;
    Rng rng(61);
    Dataset d = random_continuous(rng, 25, 4);
    const std::string path = tmp.file("data.csv");
    write_dataset_csv(path, d);
    Dataset back = dataset_from_csv(read_csv(path), "y", false);
    CHECK(back.x() == d.x());  // bit-exact through 17 significant digits
    CHECK(back.y() == d.y());
    CHECK(back.column_names() == d.column_names());
}

TEST_CASE("categorical responses accept integer codes and strings") {
    testutil::TempDir tmp;
    const std::string path = tmp.file("lab.csv");
    {
        std::ofstream out(path);
        out << "x1,y\n1.5,1\n2.5,2\n3.5,1\n4.5,2\n";
    }
    Dataset d = dataset_from_csv(read_csv(path), "y", true);
    CHECK(d.labels() == std::vector<int>{1, 2, 1, 2});
    {
        std::ofstream out(path);
        out << "x1,y\n1.5,b\n2.5,a\n3.5,b\n4.5,a\n";
    }
    Dataset s = dataset_from_csv(read_csv(path), "y", true);
    CHECK(s.labels() == std::vector<int>{1, 2, 1, 2});  // first appearance coded 1
    {
        std::ofstream out(path);
        out << "x1,y\n1.5,0\n2.5,1\n3.5,0\n4.5,1\n";  // 0/1 codes are remapped
    }
    Dataset z = dataset_from_csv(read_csv(path), "y", true);
    CHECK(z.labels() == std::vector<int>{1, 2, 1, 2});
    CHECK_THROWS_AS(dataset_from_csv(read_csv(path), "nope", true), BadInput);
}

TEST_CASE("malformed csv is reported with row and column") {
    testutil::TempDir tmp;
    const std::string path = tmp.file("bad.csv");
    {
        std::ofstream out(path);
        out << "x1,y\n1.5,1\noops,2\n";
    }
    try {
        dataset_from_csv(read_csv(path), "y", true);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("x1") != std::string::npos);
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
}

TEST_CASE("logistic model documents round-trip byte-identically") {
    Rng rng(62);
    Matrix x(40, 3);
    std::vector<int> labels(40);
    for (int i = 0; i < 40; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
        labels[static_cast<size_t>(i)] = 1 + static_cast<int>(rng.index(2));
    }
    labels[0] = 1;
    labels[1] = 2;
    Dataset d = Dataset::categorical(x, labels);
    TermSet s(std::vector<Term>{Term::main(1), Term::interaction(2, 3)});
    FitResult fit = fit_mle(d, s, SelectionConfig{});
    REQUIRE(fit.ok());

    ModelDocument doc;
    doc.model_kind = "logistic";
    doc.column_names = d.column_names();
    doc.gamma = 0.5;
    doc.logistic = fit.fit;

    testutil::TempDir tmp;
    const std::string path = tmp.file("model.json");
    save_model(path, doc);
    ModelDocument loaded = load_model(path);
    CHECK(serialize_model(loaded) == serialize_model(doc));
    CHECK(loaded.logistic->terms == fit.fit.terms);
    CHECK(loaded.logistic->theta == fit.fit.theta);

    // Reloaded models predict identically.
    Matrix p1 = class_probabilities(fit.fit, d.x());
    Matrix p2 = class_probabilities(*loaded.logistic, d.x());
    CHECK(p1 == p2);
}

TEST_CASE("sliced model documents round-trip byte-identically") {
    Rng rng(63);
    Dataset d = random_continuous(rng, 60, 4);
    SlicedModel model = fit_sliced_gaussian(d, {2, 4}, 5);

    ModelDocument doc;
    doc.model_kind = "sliced_gaussian";
    doc.column_names = d.column_names();
    doc.gamma = 0.5;
    doc.sliced = model;

    testutil::TempDir tmp;
    const std::string path = tmp.file("sliced.json");
    save_model(path, doc);
    ModelDocument loaded = load_model(path);
    CHECK(serialize_model(loaded) == serialize_model(doc));

    Vector probe(2);
    probe << 0.3, -1.2;
    CHECK(predict(*loaded.sliced, probe) == predict(model, probe));

    // A truncated document is a schema error.
    {
        std::ofstream out(path);
        out << "{\"format_version\": 1, \"model_kind\": \"sliced_gaussian\"}";
    }
    CHECK_THROWS_AS(load_model(path), SchemaMismatch);
}

}  // TEST_SUITE
