#include "fracvar/energy_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "fracvar/errors.hpp"

namespace fracvar {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 6> kModelNames{{
    {ModelKind::sierpinski, "sierpinski"},
    {ModelKind::interval, "interval"},
    {ModelKind::square, "square"},
    {ModelKind::degenerate_square, "degenerate_square"},
    {ModelKind::superposition_square, "superposition_square"},
    {ModelKind::product, "product"},
}};

}  // namespace

std::string_view to_string(ModelKind kind) {
  for (const auto& [k, name] : kModelNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (const auto& [k, n] : kModelNames) {
    if (n == name) return k;
  }
  std::string expected;
  for (const auto& [k, n] : kModelNames) {
    if (!expected.empty()) expected += ", ";
    expected += n;
  }
  throw InputError("unknown model name '" + std::string(name) + "' (expected one of " + expected + ")");
}

Region::Region(std::vector<bool> mask) : mask_(std::move(mask)) {}

std::vector<int> Region::dofs() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::size_t Region::size() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

bool Region::subset_of(const Region& other) const {
  if (mask_.size() != other.mask_.size()) throw InputError("regions belong to different models");
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i] && !other.mask_[i]) return false;
  }
  return true;
}

std::string EnergyModel::name() const {
  std::ostringstream os;
  os << to_string(spec_.kind) << '(';
  switch (spec_.kind) {
    case ModelKind::sierpinski:
      os << "level=" << spec_.level;
      break;
    case ModelKind::product:
      os << "level=" << spec_.level << ", cells=" << spec_.cells;
      break;
    default:
      os << "cells=" << spec_.cells;
      break;
  }
  os << ')';
  return os.str();
}

const Fiber& EnergyModel::fiber(int id) const {
  if (id < 0 || id >= static_cast<int>(fibers_.size())) {
    throw InputError("fiber id " + std::to_string(id) + " outside [0, " + std::to_string(fibers_.size()) + ")");
  }
  return fibers_[static_cast<std::size_t>(id)];
}

const std::vector<int>& EnergyModel::fiber_dofs(int id) const {
  fiber(id);
  return fiber_dofs_[static_cast<std::size_t>(id)];
}

Region EnergyModel::interior() const {
  std::vector<bool> mask(boundary_.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = !boundary_[i];
  return Region(std::move(mask));
}

Region EnergyModel::region(std::string_view label) const {
  if (label == "interior" || label == "all") return interior();
  const auto it = labels_.find(std::string(label));
  if (it == labels_.end()) {
    std::string known = "all";
    for (const auto& [name, mask] : labels_) known += ", " + name;
    throw InputError("unknown region label '" + std::string(label) + "' for " + name() + " (known: " + known + ")");
  }
  std::vector<bool> mask(boundary_.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = it->second[i] && !boundary_[i];
  return Region(std::move(mask));
}

Region EnergyModel::region_where(const std::function<bool(const Eigen::Vector3d&)>& predicate) const {
  std::vector<bool> mask(boundary_.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = !boundary_[i] && predicate(coordinates_[i]);
  return Region(std::move(mask));
}

ModelBuilder::ModelBuilder(ModelSpec spec) { model_.spec_ = spec; }

int ModelBuilder::add_dof(const Eigen::Vector3d& position, bool boundary) {
  if (!position.allFinite()) throw InputError("dof coordinates must be finite");
  model_.coordinates_.push_back(position);
  model_.boundary_.push_back(boundary);
  return static_cast<int>(model_.coordinates_.size()) - 1;
}

int ModelBuilder::add_fiber(int dim, double weight, const Eigen::Vector3d& center,
                            std::span<const Entry> entries, Eigen::MatrixXd frame) {
  const int id = static_cast<int>(model_.fibers_.size());
  const auto where = [&] { return "fiber " + std::to_string(id) + ": "; };
  if (dim < 1) throw InputError(where() + "dimension must be at least 1");
  if (!(weight > 0.0) || !std::isfinite(weight)) throw InputError(where() + "weight must be positive and finite");

  if (frame.size() == 0) frame = Eigen::MatrixXd::Identity(dim, dim);
  if (frame.rows() != dim || frame.cols() != dim) throw InputError(where() + "frame must be dim x dim");
  const double defect = (frame.transpose() * frame - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (defect > 1e-12) throw InputError(where() + "frame is not orthonormal (defect " + std::to_string(defect) + ")");

  const int dofs = static_cast<int>(model_.coordinates_.size());
  std::vector<double> row_sum(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> row_scale(static_cast<std::size_t>(dim), 0.0);
  std::vector<int> touched;
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= dim) throw InputError(where() + "gradient row out of range");
    if (e.dof < 0 || e.dof >= dofs) throw InputError(where() + "gradient references unknown dof");
    if (!std::isfinite(e.value)) throw InputError(where() + "gradient entry not finite");
    row_sum[static_cast<std::size_t>(e.row)] += e.value;
    row_scale[static_cast<std::size_t>(e.row)] += std::abs(e.value);
    triplets_.emplace_back(rows_ + e.row, e.dof, e.value);
    touched.push_back(e.dof);
  }
  for (int r = 0; r < dim; ++r) {
    const auto k = static_cast<std::size_t>(r);
    if (std::abs(row_sum[k]) > 1e-12 * std::max(1.0, row_scale[k])) {
      throw InputError(where() + "gradient row " + std::to_string(r) + " does not annihilate constants");
    }
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

  Fiber f;
  f.id = id;
  f.dim = dim;
  f.weight = weight;
  f.offset = rows_;
  f.center = center;
  f.frame = std::move(frame);
  model_.fibers_.push_back(std::move(f));
  model_.fiber_dofs_.push_back(std::move(touched));
  rows_ += dim;
  return id;
}

void ModelBuilder::add_label(const std::string& name, int dof) {
  auto& mask = model_.labels_[name];
  if (dof < 0 || dof >= static_cast<int>(model_.coordinates_.size())) throw InputError("label references unknown dof");
  if (mask.size() < model_.coordinates_.size()) mask.resize(model_.coordinates_.size(), false);
  mask[static_cast<std::size_t>(dof)] = true;
}

EnergyModel ModelBuilder::finish() && {
  auto& m = model_;
  const auto n = static_cast<Eigen::Index>(m.coordinates_.size());
  if (n == 0) throw InputError("model has no dofs");
  if (m.fibers_.empty()) throw InputError("model has no fibers");

  m.gradient_.resize(rows_, n);
  m.gradient_.setFromTriplets(triplets_.begin(), triplets_.end());
  m.gradient_.makeCompressed();
  triplets_.clear();

  m.component_weights_.resize(rows_);
  m.dof_mass_ = Eigen::VectorXd::Zero(n);
  std::vector<bool> referenced(static_cast<std::size_t>(n), false);
  double total = 0.0;
  for (const auto& f : m.fibers_) {
    m.component_weights_.segment(f.offset, f.dim).setConstant(f.weight);
    total += f.weight;
    const auto& dofs = m.fiber_dofs_[static_cast<std::size_t>(f.id)];
    for (int d : dofs) {
      m.dof_mass_[d] += f.weight / static_cast<double>(dofs.size());
      referenced[static_cast<std::size_t>(d)] = true;
    }
  }
  m.total_mass_ = total;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!referenced[k] && !m.boundary_[k]) {
      throw InputError("dof " + std::to_string(i) + " is neither boundary nor referenced by a fiber");
    }
  }
  for (auto& [name, mask] : m.labels_) mask.resize(static_cast<std::size_t>(n), false);
  return std::move(m);
}

}  // namespace fracvar
