#include "fracvar/sierpinski.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <unordered_map>

#include <Eigen/SVD>

#include "fracvar/errors.hpp"

namespace fracvar::sg {

namespace {

std::size_t pow3(int n) {
  std::size_t r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

void check_level(int level) {
  if (level < 0 || level > kMaxLevel) {
    throw ResourceError("gasket level " + std::to_string(level) + " outside [0, " +
                        std::to_string(kMaxLevel) + "]");
  }
}

// Walks the word tree depth first in lexicographic order and calls
// visit(cell_index, values) on the level-n cells, where values are the
// corner values of the parent data pushed through A_{w_k}.
template <typename Value, typename Visit>
void descend(int level, const Value& root, Visit&& visit) {
  const auto& A = harmonic_matrices();
  std::size_t next = 0;
  std::function<void(int, const Value&)> rec = [&](int depth, const Value& v) {
    if (depth == level) {
      visit(next++, v);
      return;
    }
    for (int i = 0; i < 3; ++i) {
      const Value child = A[i] * v;
      rec(depth + 1, child);
    }
  };
  rec(0, root);
}

}  // namespace

Word::Word(std::vector<std::uint8_t> symbols) : symbols_(std::move(symbols)) {
  for (auto s : symbols_) {
    if (s > 2) throw InputError("word symbol " + std::to_string(s) + " not in {0,1,2}");
  }
}

Word Word::parse(std::string_view text) {
  std::vector<std::uint8_t> symbols;
  symbols.reserve(text.size());
  for (char c : text) {
    if (c < '0' || c > '2') throw InputError(std::string("invalid word symbol '") + c + "'");
    symbols.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return Word(std::move(symbols));
}

std::vector<Word> Word::enumerate(int level) {
  check_level(level);
  const std::size_t count = pow3(level);
  std::vector<Word> words;
  words.reserve(count);
  std::vector<std::uint8_t> digits(static_cast<std::size_t>(level), 0);
  for (std::size_t c = 0; c < count; ++c) {
    std::size_t v = c;
    for (int k = level - 1; k >= 0; --k) {
      digits[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(v % 3);
      v /= 3;
    }
    words.emplace_back(digits);
  }
  return words;
}

Word Word::child(std::uint8_t symbol) const {
  auto s = symbols_;
  s.push_back(symbol);
  return Word(std::move(s));
}

Word Word::parent() const {
  if (symbols_.empty()) throw InputError("the root word has no parent");
  return Word(std::vector<std::uint8_t>(symbols_.begin(), symbols_.end() - 1));
}

bool Word::is_prefix_of(const Word& other) const {
  if (symbols_.size() > other.symbols_.size()) return false;
  return std::equal(symbols_.begin(), symbols_.end(), other.symbols_.begin());
}

std::size_t Word::index() const {
  std::size_t v = 0;
  for (auto s : symbols_) v = 3 * v + s;
  return v;
}

std::string Word::str() const {
  std::string out;
  out.reserve(symbols_.size());
  for (auto s : symbols_) out.push_back(static_cast<char>('0' + s));
  return out;
}

LevelGraph build_level_graph(int level) {
  check_level(level);
  LevelGraph g;
  g.level = level;

  // Lattice coordinates (a, b) at scale 2^-n: point = (a + b/2, b sqrt(3)/2) / 2^n.
  const std::int64_t side = std::int64_t{1} << level;
  const std::size_t cells = pow3(level);
  const std::size_t vertices = 3 * (cells + 1) / 2;
  g.vertices.reserve(vertices);
  g.cells.reserve(cells);
  g.edges.reserve(3 * cells);

  std::unordered_map<std::int64_t, int> ids;
  ids.reserve(vertices * 2);
  const double scale = std::ldexp(1.0, -level);
  auto vertex_id = [&](std::int64_t a, std::int64_t b) {
    const std::int64_t key = a * (side + 1) + b;
    auto [it, inserted] = ids.try_emplace(key, static_cast<int>(g.vertices.size()));
    if (inserted) {
      g.vertices.emplace_back((static_cast<double>(a) + 0.5 * static_cast<double>(b)) * scale,
                              static_cast<double>(b) * std::sqrt(3.0) / 2.0 * scale);
    }
    return it->second;
  };
  vertex_id(0, 0);
  vertex_id(side, 0);
  vertex_id(0, side);

  static constexpr std::int64_t corner_a[3] = {0, 1, 0};
  static constexpr std::int64_t corner_b[3] = {0, 0, 1};
  for (std::size_t c = 0; c < cells; ++c) {
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::size_t v = c;
    for (int k = level - 1; k >= 0; --k) {
      const auto digit = v % 3;
      v /= 3;
      // Digit at position k (0-based from the left) carries weight 2^{n-1-k}.
      const std::int64_t weight = std::int64_t{1} << (level - 1 - k);
      a += corner_a[digit] * weight;
      b += corner_b[digit] * weight;
    }
    std::array<int, 3> cell{};
    for (int j = 0; j < 3; ++j) cell[static_cast<std::size_t>(j)] = vertex_id(a + corner_a[j], b + corner_b[j]);
    g.cells.push_back(cell);
    g.edges.push_back({cell[0], cell[1]});
    g.edges.push_back({cell[1], cell[2]});
    g.edges.push_back({cell[0], cell[2]});
  }
  return g;
}

const HarmonicMatrices& harmonic_matrices() {
  static const HarmonicMatrices matrices = [] {
    HarmonicMatrices m;
    // The "1/5 - 2/5 rule": a midpoint takes 2/5 of each adjacent corner
    // and 1/5 of the opposite one.
    m.A[0] << 5, 0, 0,
              2, 2, 1,
              2, 1, 2;
    m.A[1] << 2, 2, 1,
              0, 5, 0,
              1, 2, 2;
    m.A[2] << 2, 1, 2,
              1, 2, 2,
              0, 0, 5;
    for (auto& a : m.A) a /= 5.0;
    return m;
  }();
  return matrices;
}

Eigen::Matrix3d cell_matrix(const Word& word) {
  const auto& A = harmonic_matrices();
  Eigen::Matrix3d M = Eigen::Matrix3d::Identity();
  for (auto s : word.symbols()) M = A[s] * M;
  return M;
}

Eigen::VectorXd harmonic_extension(const Eigen::Vector3d& boundary, int level) {
  return harmonic_extension(build_level_graph(level), boundary);
}

Eigen::VectorXd harmonic_extension(const LevelGraph& graph, const Eigen::Vector3d& boundary) {
  Eigen::VectorXd values(static_cast<Eigen::Index>(graph.vertex_count()));
  descend<Eigen::Vector3d>(graph.level, boundary, [&](std::size_t c, const Eigen::Vector3d& v) {
    const auto& cell = graph.cells[c];
    for (int j = 0; j < 3; ++j) values[cell[static_cast<std::size_t>(j)]] = v[j];
  });
  return values;
}

Eigen::Matrix<double, 2, 3> triangle_factor() {
  Eigen::Matrix<double, 2, 3> B;
  const double s1 = std::sqrt(3.0 / 2.0);
  const double s2 = std::sqrt(1.0 / 2.0);
  B << s1, -s1, 0.0, s2, s2, -2.0 * s2;
  return B;
}

double triangle_energy(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return (a[0] - a[1]) * (b[0] - b[1]) + (a[1] - a[2]) * (b[1] - b[2]) +
         (a[0] - a[2]) * (b[0] - b[2]);
}

double graph_energy(const LevelGraph& graph, const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  const auto n = static_cast<Eigen::Index>(graph.vertex_count());
  if (f.size() != n || g.size() != n) {
    throw InputError("graph_energy: expected " + std::to_string(n) + " vertex values, got " +
                     std::to_string(f.size()) + " and " + std::to_string(g.size()));
  }
  double sum = 0.0;
  for (const auto& [x, y] : graph.edges) sum += (f[x] - f[y]) * (g[x] - g[y]);
  return std::pow(kRenormalization, graph.level) * sum;
}

double cell_energy_measure(const LevelGraph& graph, const Eigen::VectorXd& f,
                           const Eigen::VectorXd& g, const Word& word) {
  if (word.level() > graph.level) {
    throw InputError("cell_energy_measure: word level " + std::to_string(word.level()) +
                     " exceeds graph level " + std::to_string(graph.level));
  }
  const auto n = static_cast<Eigen::Index>(graph.vertex_count());
  if (f.size() != n || g.size() != n) throw InputError("cell_energy_measure: size mismatch");
  const std::size_t span = pow3(graph.level - word.level());
  const std::size_t first = word.index() * span;
  double sum = 0.0;
  for (std::size_t c = first; c < first + span; ++c) {
    const auto& cell = graph.cells[c];
    const Eigen::Vector3d a(f[cell[0]], f[cell[1]], f[cell[2]]);
    const Eigen::Vector3d b(g[cell[0]], g[cell[1]], g[cell[2]]);
    sum += triangle_energy(a, b);
  }
  return std::pow(kRenormalization, graph.level) * sum;
}

const HarmonicBasis& default_harmonic_basis() {
  static const HarmonicBasis basis = [] {
    const Eigen::Vector3d s1(0.0, 1.0, 1.0);
    const Eigen::Vector3d s2(0.0, 1.0, -1.0);
    HarmonicBasis b;
    b.h1 = s1 / std::sqrt(triangle_energy(s1, s1));
    Eigen::Vector3d r = s2 - triangle_energy(s2, b.h1) * b.h1;
    b.h2 = r / std::sqrt(triangle_energy(r, r));
    return b;
  }();
  return basis;
}

void validate_basis(const HarmonicBasis& basis, double tolerance) {
  const double g11 = triangle_energy(basis.h1, basis.h1);
  const double g22 = triangle_energy(basis.h2, basis.h2);
  const double g12 = triangle_energy(basis.h1, basis.h2);
  const double defect = std::max({std::abs(g11 - 1.0), std::abs(g22 - 1.0), std::abs(g12)});
  if (!(defect <= tolerance)) {
    std::ostringstream msg;
    msg << "harmonic basis is not energy-orthonormal: Gram matrix [[" << g11 << ", " << g12
        << "], [" << g12 << ", " << g22 << "]], defect " << defect;
    throw InputError(msg.str());
  }
}

Eigen::Matrix<double, 3, 2> cell_harmonic_values(const Word& word, const HarmonicBasis& basis) {
  Eigen::Matrix<double, 3, 2> H;
  H.col(0) = basis.h1;
  H.col(1) = basis.h2;
  return cell_matrix(word) * H;
}

namespace {

CellEnergyData make_cell_data(Word word, const Eigen::Matrix<double, 3, 2>& H) {
  const double scale = std::sqrt(std::pow(kRenormalization, word.level()));
  // M^T M = (5/3)^n H^T L H because B^T B = L.
  const Eigen::Matrix2d M = scale * (triangle_factor() * H);
  CellEnergyData d;
  d.word = std::move(word);
  d.harmonic_values = H;
  d.D = M.transpose() * M;
  d.D(1, 0) = d.D(0, 1);
  d.nu = d.D.trace();
  d.Z = d.D / d.nu;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(M);
  const Eigen::Vector2d s = svd.singularValues();
  d.z_eigenvalues = Eigen::Vector2d(s[1] * s[1], s[0] * s[0]) / d.nu;
  return d;
}

}  // namespace

CellEnergyData cell_energy_data(const Word& word, const HarmonicBasis& basis) {
  validate_basis(basis);
  return make_cell_data(word, cell_harmonic_values(word, basis));
}

std::vector<CellEnergyData> level_cell_data(int level, const HarmonicBasis& basis) {
  check_level(level);
  validate_basis(basis);
  Eigen::Matrix<double, 3, 2> H;
  H.col(0) = basis.h1;
  H.col(1) = basis.h2;
  const auto words = Word::enumerate(level);
  std::vector<CellEnergyData> out;
  out.reserve(words.size());
  descend<Eigen::Matrix<double, 3, 2>>(level, H, [&](std::size_t c, const Eigen::Matrix<double, 3, 2>& Hw) {
    out.push_back(make_cell_data(words[c], Hw));
  });
  return out;
}

}  // namespace fracvar::sg
