#include "soda/model_io.hpp"

#include <json.hpp>

#include <fstream>

namespace soda {

namespace {

using Json = nlohmann::ordered_json;

Json term_to_json(const Term& t) {
    Json j;
    if (t.is_main()) {
        j["main"] = t.first();
    } else {
        j["interaction"] = Json::array({t.first(), t.second()});
    }
    return j;
}

Term term_from_json(const Json& j) {
    if (j.contains("main")) return Term::main(j.at("main").get<int>());
    if (j.contains("interaction")) {
        const auto& pair = j.at("interaction");
        return Term::interaction(pair.at(0).get<int>(), pair.at(1).get<int>());
    }
    throw SchemaMismatch("term entry must have 'main' or 'interaction'");
}

Json vector_to_json(const Vector& v) {
    Json j = Json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

Vector vector_from_json(const Json& j) {
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j.at(i).get<double>();
    return v;
}

Json matrix_to_json(const Matrix& m) {
    Json j = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(std::move(row));
    }
    return j;
}

Matrix matrix_from_json(const Json& j, int cols_hint = -1) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : std::max(cols_hint, 0);
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = j.at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>();
    return m;
}

}  // namespace

std::string serialize_model(const ModelDocument& doc) {
    Json j;
    j["format_version"] = 1;
    j["model_kind"] = doc.model_kind;
    j["column_names"] = doc.column_names;
    j["gamma"] = doc.gamma;
    if (doc.model_kind == "logistic") {
        if (!doc.logistic) throw SchemaMismatch("logistic document without a fit");
        const ModelFit& fit = *doc.logistic;
        Json terms = Json::array();
        for (const Term& t : fit.terms) terms.push_back(term_to_json(t));
        j["k_classes"] = fit.k_classes;
        j["terms"] = std::move(terms);
        j["coefficients"] = matrix_to_json(fit.theta);
        j["loglik"] = fit.loglik;
        j["ebic"] = fit.ebic;
        j["penalty_df"] = fit.penalty_df;
        j["standardization"] = {{"mean", vector_to_json(fit.column_mean)},
                                {"sd", vector_to_json(fit.column_sd)}};
    } else if (doc.model_kind == "sliced_gaussian") {
        if (!doc.sliced) throw SchemaMismatch("sliced document without a model");
        const SlicedModel& model = *doc.sliced;
        j["predictors"] = model.predictors();
        j["h_slices"] = model.slices();
        Json slices = Json::array();
        for (int h = 0; h < model.slices(); ++h) {
            Json s;
            s["count"] = model.count(h);
            s["response_mean"] = model.response_mean(h);
            s["mean"] = vector_to_json(model.mean(h));
            s["covariance"] = matrix_to_json(model.covariance(h));
            slices.push_back(std::move(s));
        }
        j["slices"] = std::move(slices);
    } else {
        throw SchemaMismatch("unknown model_kind '" + doc.model_kind + "'");
    }
    return j.dump(2) + "\n";
}

void save_model(const std::string& path, const ModelDocument& doc) {
    std::ofstream out(path);
    if (!out) throw BadInput("cannot write '" + path + "'");
    out << serialize_model(doc);
    if (!out) throw BadInput("failed writing '" + path + "'");
}

ModelDocument load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw SchemaMismatch("model file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != 1)
            throw SchemaMismatch("unsupported model format_version");
        ModelDocument doc;
        doc.model_kind = j.at("model_kind").get<std::string>();
        doc.column_names = j.at("column_names").get<std::vector<std::string>>();
        doc.gamma = j.at("gamma").get<double>();
        if (doc.model_kind == "logistic") {
            ModelFit fit;
            fit.k_classes = j.at("k_classes").get<int>();
            std::vector<Term> terms;
            for (const auto& t : j.at("terms")) terms.push_back(term_from_json(t));
            fit.terms = TermSet(std::move(terms));
            fit.theta = matrix_from_json(j.at("coefficients"), fit.k_classes - 1);
            fit.loglik = j.at("loglik").get<double>();
            fit.ebic = j.at("ebic").get<double>();
            fit.penalty_df = j.at("penalty_df").get<int>();
            fit.column_mean = vector_from_json(j.at("standardization").at("mean"));
            fit.column_sd = vector_from_json(j.at("standardization").at("sd"));
            fit.gamma = doc.gamma;
            fit.p = static_cast<int>(doc.column_names.size());
            fit.converged = true;
            doc.logistic = std::move(fit);
        } else if (doc.model_kind == "sliced_gaussian") {
            SlicedModel model(j.at("predictors").get<std::vector<int>>(),
                              j.at("h_slices").get<int>());
            const auto& slices = j.at("slices");
            if (static_cast<int>(slices.size()) != model.slices())
                throw SchemaMismatch("slice count does not match h_slices");
            for (int h = 0; h < model.slices(); ++h) {
                const auto& s = slices.at(static_cast<size_t>(h));
                model.set_slice(h, s.at("count").get<int>(),
                                vector_from_json(s.at("mean")),
                                matrix_from_json(s.at("covariance"), model.dimension()),
                                s.at("response_mean").get<double>());
            }
            model.finalize();
            doc.sliced = std::move(model);
        } else {
            throw SchemaMismatch("unknown model_kind '" + doc.model_kind + "'");
        }
        return doc;
    } catch (const Json::exception& e) {
        throw SchemaMismatch("model file '" + path + "' is missing fields: " + e.what());
    }
}

}  // namespace soda
