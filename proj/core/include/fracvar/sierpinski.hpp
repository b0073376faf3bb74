#pragma once

// Graph approximations of the Sierpinski gasket K with its standard harmonic
// structure and the Kusuoka energy measure.
//
// K is the attractor of F_i(x) = (x + p_i) / 2 with corners
// p_0 = (0, 0), p_1 = (1, 0), p_2 = (1/2, sqrt(3)/2).

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace fracvar::sg {

inline constexpr int kMaxLevel = 12;

/// Energy renormalization factor r^{-1} of the standard form on the gasket.
inline constexpr double kRenormalization = 5.0 / 3.0;

/// Address w = w_1 ... w_n of the cell K_w = F_{w_1} o ... o F_{w_n}(K).
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<std::uint8_t> symbols);

  /// Parses "0121"; the empty string is the root word.
  static Word parse(std::string_view text);

  /// All 3^level words of the given length in lexicographic order.
  static std::vector<Word> enumerate(int level);

  int level() const { return static_cast<int>(symbols_.size()); }
  std::uint8_t operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<std::uint8_t>& symbols() const { return symbols_; }

  Word child(std::uint8_t symbol) const;
  Word parent() const;
  bool is_prefix_of(const Word& other) const;

  /// Position among the words of the same length (base-3 value).
  std::size_t index() const;

  std::string str() const;

  auto operator<=>(const Word&) const = default;

 private:
  std::vector<std::uint8_t> symbols_;
};

/// Level-n graph approximation V_n of K.
///
/// Vertex ids 0, 1, 2 are the corners p_0, p_1, p_2 at every level. Cells are
/// stored in lexicographic word order; cell c lists the ids of
/// F_w(p_0), F_w(p_1), F_w(p_2).
struct LevelGraph {
  int level = 0;
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> cells;
  std::array<int, 3> boundary{0, 1, 2};

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t edge_count() const { return edges.size(); }
  std::size_t cell_count() const { return cells.size(); }
  bool is_boundary(int vertex) const { return vertex >= 0 && vertex < 3; }
};

/// Throws ResourceError unless 0 <= level <= kMaxLevel.
LevelGraph build_level_graph(int level);

/// Harmonic extension matrices: A[i] maps the values of a harmonic function
/// at (p_0, p_1, p_2) to its values at (F_i p_0, F_i p_1, F_i p_2).
struct HarmonicMatrices {
  std::array<Eigen::Matrix3d, 3> A;
  const Eigen::Matrix3d& operator[](int i) const { return A[static_cast<std::size_t>(i)]; }
};

const HarmonicMatrices& harmonic_matrices();

/// A_{w_n} ... A_{w_1}: boundary values of h o F_w from those of h.
Eigen::Matrix3d cell_matrix(const Word& word);

/// Values on V_n of the harmonic function with the given corner values.
Eigen::VectorXd harmonic_extension(const Eigen::Vector3d& boundary, int level);
Eigen::VectorXd harmonic_extension(const LevelGraph& graph, const Eigen::Vector3d& boundary);

/// 2x3 factor B with B^T B equal to the triangle graph Laplacian, so that
/// |B a|^2 = E_0(a, a). Its rows are orthogonal to constants.
Eigen::Matrix<double, 2, 3> triangle_factor();

/// E_0(a, b) on the base triangle: sum over its three edges of products of differences.
double triangle_energy(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// E_n(f, g) = (5/3)^n sum_{edges xy} (f(x) - f(y)) (g(x) - g(y)).
double graph_energy(const LevelGraph& graph, const Eigen::VectorXd& f, const Eigen::VectorXd& g);

/// Mutual energy measure nu_{f,g}(K_w) of level-n functions f, g, where
/// |w| <= n: the renormalized E_0 energies of all level-n subcells of K_w.
double cell_energy_measure(const LevelGraph& graph, const Eigen::VectorXd& f,
                           const Eigen::VectorXd& g, const Word& word);

/// Corner values of an energy-orthonormal pair of non-constant harmonic functions.
struct HarmonicBasis {
  Eigen::Vector3d h1;
  Eigen::Vector3d h2;
};

/// Gram-Schmidt in E_0 of the seeds (0, 1, 1) and (0, 1, -1).
const HarmonicBasis& default_harmonic_basis();

/// Throws InputError naming the largest Gram defect if E_0 Gram matrix != I.
void validate_basis(const HarmonicBasis& basis, double tolerance = 1e-12);

/// Kusuoka cell data. D depends on the chosen basis; nu and the eigenvalues
/// of Z do not.
struct CellEnergyData {
  Word word;
  Eigen::Matrix2d D;              // D_ij = nu_{h_i, h_j}(K_w)
  double nu = 0.0;                // trace(D), Kusuoka mass of K_w
  Eigen::Matrix2d Z;              // D / nu
  Eigen::Vector2d z_eigenvalues;  // ascending
  Eigen::Matrix<double, 3, 2> harmonic_values;  // h_1, h_2 at the corners of K_w
};

CellEnergyData cell_energy_data(const Word& word,
                                const HarmonicBasis& basis = default_harmonic_basis());

/// Cell data of every level-n cell in lexicographic order.
std::vector<CellEnergyData> level_cell_data(int level,
                                            const HarmonicBasis& basis = default_harmonic_basis());

/// Corner values of h_1 and h_2 on K_w as the columns of a 3x2 matrix.
Eigen::Matrix<double, 3, 2> cell_harmonic_values(const Word& word,
                                                 const HarmonicBasis& basis = default_harmonic_basis());

}  // namespace fracvar::sg
