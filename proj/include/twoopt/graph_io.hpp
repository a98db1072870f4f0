#pragma once

#include <istream>
#include <string>

#include <json.hpp>

#include "twoopt/graph.hpp"

namespace twoopt {

// {"n": int, "mode": "exact"|"float", "weights": [...lexicographic pairs...], "label": string}
template <WeightType W>
nlohmann::json to_json(const Instance<W>& inst) {
  return {{"n", inst.size()},
          {"mode", Instance<W>::mode == WeightMode::exact ? "exact" : "float"},
          {"weights", std::vector<W>(inst.weights().begin(), inst.weights().end())},
          {"label", inst.label()}};
}

inline nlohmann::json to_json(const AnyInstance& inst) {
  return std::visit([](const auto& i) { return to_json(i); }, inst);
}

inline nlohmann::json to_json(const Tour& t) {
  return std::vector<Vertex>(t.order().begin(), t.order().end());
}

inline AnyInstance instance_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto mode = j.at("mode").get<std::string>();
    const auto& weights = j.at("weights");
    const std::string label = j.value("label", std::string{});
    if (mode == "exact") {
      std::vector<std::int64_t> w;
      w.reserve(weights.size());
      for (const auto& x : weights) {
        if (!x.is_number_integer()) throw ModeError("exact-mode instance has a non-integer weight");
        w.push_back(x.get<std::int64_t>());
      }
      return ExactInstance(n, std::move(w), label);
    }
    if (mode == "float") return FloatInstance(n, weights.get<std::vector<double>>(), label);
    throw ModeError("unknown instance mode '" + mode + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed instance JSON: ") + e.what());
  }
}

inline AnyInstance read_instance(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cannot parse instance JSON: ") + e.what());
  }
  return instance_from_json(j);
}

inline Tour tour_from_json(const nlohmann::json& j) { return Tour(j.get<std::vector<Vertex>>()); }

}  // namespace twoopt
