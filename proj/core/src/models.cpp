#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fracvar/energy_model.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/sierpinski.hpp"

namespace fracvar {

namespace {

using Entry = ModelBuilder::Entry;

void check_cells(const ModelSpec& spec, int minimum, bool even) {
  if (spec.cells < minimum || spec.cells > kMaxGridCells) {
    throw InputError("model.cells = " + std::to_string(spec.cells) + " outside [" + std::to_string(minimum) + ", " +
                     std::to_string(kMaxGridCells) + "] for " + std::string(to_string(spec.kind)));
  }
  if (even && spec.cells % 2 != 0) {
    throw InputError("model.cells must be even for " + std::string(to_string(spec.kind)));
  }
}

void check_level(const ModelSpec& spec) {
  if (spec.level < 0 || spec.level > kMaxModelLevel) {
    throw InputError("model.level = " + std::to_string(spec.level) + " outside [0, " + std::to_string(kMaxModelLevel) +
                     "]");
  }
}

// Per-cell gradient data of the gasket: for corner values a of a level-n cell
// the fiber gradient is R * a, with |R a|^2 * weight equal to the renormalized
// E_0 energy of a. Row 0 is the dominant eigendirection of Z_w.
struct GasketCell {
  std::array<int, 3> vertices;
  Eigen::Vector3d center;
  double weight;
  Eigen::Matrix<double, 2, 3> R;
};

std::vector<GasketCell> gasket_cells(const sg::LevelGraph& graph, bool probability) {
  const int n = graph.level;
  const double scale = std::sqrt(std::pow(sg::kRenormalization, n));
  const Eigen::Matrix<double, 2, 3> B = sg::triangle_factor();
  const auto data = sg::level_cell_data(n);
  const double mass_scale = probability ? 0.5 : 1.0;

  std::vector<GasketCell> cells;
  cells.reserve(data.size());
  for (std::size_t c = 0; c < data.size(); ++c) {
    const auto& d = data[c];
    const Eigen::Matrix2d M = scale * (B * d.harmonic_values);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(M * M.transpose());
    Eigen::Matrix2d U;
    U.col(0) = eig.eigenvectors().col(1);
    U.col(1) = eig.eigenvectors().col(0);
    for (int k = 0; k < 2; ++k) {
      Eigen::Index arg = 0;
      U.col(k).cwiseAbs().maxCoeff(&arg);
      if (U(arg, k) < 0) U.col(k) = -U.col(k);
    }
    GasketCell cell;
    cell.vertices = graph.cells[c];
    cell.center.setZero();
    for (int v : cell.vertices) cell.center.head<2>() += graph.vertices[static_cast<std::size_t>(v)] / 3.0;
    cell.weight = mass_scale * d.nu;
    cell.R = (scale / std::sqrt(cell.weight)) * (U.transpose() * B);
    // Rows of B sum to zero; remove the rounding left by the rotation.
    for (int r = 0; r < 2; ++r) cell.R.row(r).array() -= cell.R.row(r).mean();
    cells.push_back(cell);
  }
  return cells;
}

EnergyModel build_sierpinski(const ModelSpec& spec) {
  check_level(spec);
  const auto graph = sg::build_level_graph(spec.level);
  ModelBuilder b(spec);
  for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
    const auto& x = graph.vertices[v];
    b.add_dof(Eigen::Vector3d(x.x(), x.y(), 0.0), graph.is_boundary(static_cast<int>(v)));
  }
  std::vector<Entry> entries;
  for (const auto& cell : gasket_cells(graph, spec.probability_measure)) {
    entries.clear();
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < 3; ++k) entries.push_back({r, cell.vertices[static_cast<std::size_t>(k)], cell.R(r, k)});
    }
    b.add_fiber(2, cell.weight, cell.center, entries);
  }
  return std::move(b).finish();
}

EnergyModel build_interval(const ModelSpec& spec) {
  check_cells(spec, 1, false);
  const int N = spec.cells;
  const double dx = 1.0 / N;
  ModelBuilder b(spec);
  for (int j = 0; j <= N; ++j) b.add_dof(Eigen::Vector3d(j * dx, 0.0, 0.0), j == 0 || j == N);
  for (int j = 0; j < N; ++j) {
    const Entry entries[] = {{0, j, -1.0 / dx}, {0, j + 1, 1.0 / dx}};
    b.add_fiber(1, dx, Eigen::Vector3d((j + 0.5) * dx, 0.0, 0.0), entries);
  }
  return std::move(b).finish();
}

// Node lattice x = -1 + i h, y = -1 + j h on (-1, 1)^2 with the frame as
// boundary. Cell (i, j) has lower-left node (i, j).
EnergyModel build_grid(const ModelSpec& spec) {
  const bool line = spec.kind == ModelKind::superposition_square;
  check_cells(spec, 2, line);
  const int N = spec.cells;
  const double h = 2.0 / N;
  const auto id = [N](int i, int j) { return j * (N + 1) + i; };

  ModelBuilder b(spec);
  for (int j = 0; j <= N; ++j) {
    for (int i = 0; i <= N; ++i) {
      const double y = -1.0 + j * h;
      const int d = b.add_dof(Eigen::Vector3d(-1.0 + i * h, y, 0.0), i == 0 || j == 0 || i == N || j == N);
      if (2 * j > N) b.add_label("upper", d);
      if (2 * j < N) b.add_label("lower", d);
      if (2 * j == N) b.add_label("line", d);
    }
  }

  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      const Eigen::Vector3d center(-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h, 0.0);
      double vertical = 1.0;
      if (spec.kind == ModelKind::degenerate_square) vertical = std::max(center.y(), 0.0);
      std::vector<Entry> entries{{0, id(i, j), -1.0 / h}, {0, id(i + 1, j), 1.0 / h}};
      int dim = 1;
      if (vertical > 0.0) {
        const double s = std::sqrt(vertical) / h;
        entries.push_back({1, id(i, j), -s});
        entries.push_back({1, id(i, j + 1), s});
        dim = 2;
      }
      b.add_fiber(dim, h * h, center, entries);
    }
  }

  if (line) {
    const int j = N / 2;
    for (int i = 0; i < N; ++i) {
      const Entry entries[] = {{0, id(i, j), -1.0 / h}, {0, id(i + 1, j), 1.0 / h}};
      b.add_fiber(1, h, Eigen::Vector3d(-1.0 + (i + 0.5) * h, 0.0, 0.0), entries);
    }
  }
  return std::move(b).finish();
}

// Gasket x [0, 1] with time nodes t_k = k / M; the slices t = 0 and t = 1 are
// the boundary. Fiber (w, corner c, time cell k) carries the gasket gradient
// of the slice t_k on K_w and the time difference at corner c of K_w, with
// weight nu(K_w) dt / 3, so that the three corner fibers of a cell together
// carry its full gasket energy.
EnergyModel build_product(const ModelSpec& spec) {
  check_level(spec);
  check_cells(spec, 1, false);
  const int M = spec.cells;
  const double dt = 1.0 / M;
  const auto graph = sg::build_level_graph(spec.level);
  const int V = static_cast<int>(graph.vertex_count());
  const auto id = [V](int v, int k) { return k * V + v; };

  ModelBuilder b(spec);
  for (int k = 0; k <= M; ++k) {
    for (int v = 0; v < V; ++v) {
      const auto& x = graph.vertices[static_cast<std::size_t>(v)];
      b.add_dof(Eigen::Vector3d(x.x(), x.y(), k * dt), k == 0 || k == M);
    }
  }
  const auto cells = gasket_cells(graph, spec.probability_measure);
  std::vector<Entry> entries;
  for (int k = 0; k < M; ++k) {
    for (const auto& cell : cells) {
      for (int c = 0; c < 3; ++c) {
        entries.clear();
        for (int r = 0; r < 2; ++r) {
          for (int q = 0; q < 3; ++q) {
            entries.push_back({r, id(cell.vertices[static_cast<std::size_t>(q)], k), cell.R(r, q)});
          }
        }
        const int v = cell.vertices[static_cast<std::size_t>(c)];
        entries.push_back({2, id(v, k), -1.0 / dt});
        entries.push_back({2, id(v, k + 1), 1.0 / dt});
        Eigen::Vector3d center = cell.center;
        center.z() = (k + 0.5) * dt;
        b.add_fiber(3, cell.weight * dt / 3.0, center, entries);
      }
    }
  }
  return std::move(b).finish();
}

}  // namespace

EnergyModel build_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::sierpinski:
      return build_sierpinski(spec);
    case ModelKind::interval:
      return build_interval(spec);
    case ModelKind::square:
    case ModelKind::degenerate_square:
    case ModelKind::superposition_square:
      return build_grid(spec);
    case ModelKind::product:
      return build_product(spec);
  }
  throw InputError("unknown model kind");
}

}  // namespace fracvar
