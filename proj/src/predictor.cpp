#include "pce/predictor.hpp"

#include <fstream>
#include <sstream>

#include "pce/models.hpp"

namespace pce {

void Predictor::check_input(std::span<const double> x) const {
    if (x.size() != feature_count()) {
        std::ostringstream msg;
        msg << kind() << " predictor expects " << feature_count() << " features, got " << x.size();
        throw InvalidArgument(msg.str());
    }
}

std::vector<double> Predictor::predict_rows(const Dataset& d) const {
    std::vector<double> out(d.n);
    for (std::size_t i = 0; i < d.n; ++i) out[i] = predict(d.row(i));
    return out;
}

double Predictor::mse(const Dataset& d) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) {
        const double e = predict(d.row(i)) - d.target[i];
        acc += e * e;
    }
    return acc / static_cast<double>(d.n);
}

namespace detail {
std::unique_ptr<Predictor> linear_from_json(const Json&);
std::unique_ptr<Predictor> forest_from_json(const Json&);
std::unique_ptr<Predictor> gbt_from_json(const Json&);
std::unique_ptr<Predictor> mlp_from_json(const Json&);
std::unique_ptr<Predictor> stacking_from_json(const Json&);
}  // namespace detail

std::unique_ptr<Predictor> predictor_from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("format") || doc["format"] != "pce-predictor")
        throw ParseError("not a predictor document");
    if (!doc.contains("version") || doc["version"].get<int>() != 1)
        throw ParseError("unsupported predictor document version");
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "linear") return detail::linear_from_json(doc);
    if (kind == "random_forest") return detail::forest_from_json(doc);
    if (kind == "gbt") return detail::gbt_from_json(doc);
    if (kind == "mlp") return detail::mlp_from_json(doc);
    if (kind == "stacking") return detail::stacking_from_json(doc);
    throw ParseError("unknown predictor kind: " + kind);
}

void save_predictor(const Predictor& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << p.to_json().dump(2) << '\n';
}

std::unique_ptr<Predictor> load_predictor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
    return predictor_from_json(doc);
}

}  // namespace pce
