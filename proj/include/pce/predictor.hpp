#ifndef PCE_PREDICTOR_HPP
#define PCE_PREDICTOR_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pce/dataset.hpp"

namespace pce {

using Json = nlohmann::ordered_json;

class Predictor {
public:
    virtual ~Predictor() = default;

    // x must have exactly feature_count() entries; deterministic after fitting.
    virtual double predict(std::span<const double> x) const = 0;
    virtual std::size_t feature_count() const = 0;
    virtual std::string kind() const = 0;

    // Versioned document, loadable with predictor_from_json.
    virtual Json to_json() const = 0;

    std::vector<double> predict_rows(const Dataset& d) const;
    double mse(const Dataset& d) const;

protected:
    void check_input(std::span<const double> x) const;
};

std::unique_ptr<Predictor> predictor_from_json(const Json& doc);
void save_predictor(const Predictor& p, const std::string& path);
std::unique_ptr<Predictor> load_predictor(const std::string& path);

}  // namespace pce

#endif
