#include "fracvar/serialize.hpp"

#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

namespace fracvar {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string export_model_json(const EnergyModel& model) {
  using nlohmann::json;
  json out;
  out["schema"] = kModelSchema;
  out["name"] = model.name();
  out["kind"] = std::string(to_string(model.spec().kind));
  out["parameters"] = {{"level", model.spec().level},
                       {"cells", model.spec().cells},
                       {"probability_measure", model.spec().probability_measure}};
  out["total_mass"] = model.total_mass();

  json coordinates = json::array();
  json boundary = json::array();
  json mass = json::array();
  for (Eigen::Index i = 0; i < model.dof_count(); ++i) {
    const auto& x = model.coordinates()[static_cast<std::size_t>(i)];
    coordinates.push_back({x.x(), x.y(), x.z()});
    boundary.push_back(model.is_boundary(static_cast<int>(i)));
    mass.push_back(model.dof_mass()[i]);
  }
  out["dofs"] = {{"count", model.dof_count()}, {"coordinates", coordinates}, {"boundary", boundary}, {"mass", mass}};

  json labels = json::object();
  for (const auto& [name, mask] : model.labels()) {
    json ids = json::array();
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) ids.push_back(i);
    }
    labels[name] = ids;
  }
  out["labels"] = labels;

  json dim = json::array(), weight = json::array(), offset = json::array(), center = json::array(),
       frame = json::array();
  for (const auto& x : model.fibers()) {
    dim.push_back(x.dim);
    weight.push_back(x.weight);
    offset.push_back(x.offset);
    center.push_back({x.center.x(), x.center.y(), x.center.z()});
    json columns = json::array();
    for (int c = 0; c < x.dim; ++c) {
      json col = json::array();
      for (int r = 0; r < x.dim; ++r) col.push_back(x.frame(r, c));
      columns.push_back(col);
    }
    frame.push_back(columns);
  }
  out["fibers"] = {{"count", model.fiber_count()}, {"dim", dim},       {"weight", weight},
                   {"offset", offset},             {"center", center}, {"frame", frame}};

  const auto& G = model.gradient_matrix();
  json triplets = json::array();
  for (Eigen::Index r = 0; r < G.outerSize(); ++r) {
    for (GradientMatrix::InnerIterator it(G, r); it; ++it) triplets.push_back({it.row(), it.col(), it.value()});
  }
  out["gradient"] = {{"rows", G.rows()}, {"cols", G.cols()}, {"triplets", triplets}};
  return out.dump(1) + "\n";
}

}  // namespace fracvar
