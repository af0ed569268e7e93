#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace curvkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntMatrix = Eigen::MatrixXi;

// Relative tolerance for row sums, detailed balance and stationarity.
inline constexpr double kChainTolerance = 1e-10;

struct ChainStats {
  double q_min = 0.0;  // min of Q(x,y) over adjacent pairs
  double pi_min = 0.0;
  double pi_max = 0.0;
  Vector deg_weighted;  // D(x) = sum_{y != x} Q(x,y)
  double deg_weighted_max = 0.0;
  Vector deg_pi;  // D_pi(x) = (1/pi(x)) sum_{y ~ x} pi(y)
  double deg_pi_max = 0.0;
};

class MarkovChain;

// Validates Q (square, nonnegative, row-stochastic, irreducible) and pi
// (stationary, detailed balance). When pi is absent it is solved for.
MarkovChain build_chain(const Matrix& q, const std::optional<Vector>& pi = std::nullopt,
                        std::optional<std::vector<std::string>> states = std::nullopt);

// Finite irreducible reversible Markov chain (X, Q, pi). Immutable once built;
// obtain instances through build_chain() or the generators.
class MarkovChain {
 public:
  int size() const { return static_cast<int>(states_.size()); }
  const std::vector<std::string>& states() const { return states_; }
  const std::string& state(int x) const { return states_[x]; }
  const Matrix& q() const { return q_; }
  double q(int x, int y) const { return q_(x, y); }
  const Vector& pi() const { return pi_; }
  double pi(int x) const { return pi_(x); }

  // Symmetric edge weight w(x,y) = Q(x,y) pi(x), zero on the diagonal.
  double weight(int x, int y) const { return x == y ? 0.0 : q_(x, y) * pi_(x); }

  // Neighbours y != x with Q(x,y) > 0, in increasing index order.
  const std::vector<int>& neighbors(int x) const { return neighbors_[x]; }
  bool adjacent(int x, int y) const { return x != y && q_(x, y) > 0.0; }

  // Throws InvalidParameters for unknown identifiers.
  int index_of(std::string_view id) const;

  const ChainStats& stats() const { return stats_; }

 private:
  friend MarkovChain build_chain(const Matrix&, const std::optional<Vector>&,
                                 std::optional<std::vector<std::string>>);
  MarkovChain(std::vector<std::string> states, Matrix q, Vector pi);

  std::vector<std::string> states_;
  Matrix q_;
  Vector pi_;
  std::vector<std::vector<int>> neighbors_;
  ChainStats stats_;
};

// Random walk driven by symmetric weights: Q(x,y) = w(x,y)/sum_z w(x,z),
// pi(x) proportional to sum_z w(x,z). Diagonal weights become lazy self-loops.
MarkovChain chain_from_weights(const Matrix& w, std::vector<std::string> states = {});

enum class GeneratorKind { hypercube, cycle, complete, path, random_regular };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::cycle;
  int n = 0;  // hypercube dimension, or number of vertices
  int d = 0;  // random_regular degree
  std::uint64_t seed = 0;

  // "hypercube:3", "cycle:5", "complete:4", "path:4", "random-regular:3:10:7"
  static GeneratorSpec parse(std::string_view text);
  std::string to_string() const;
};

MarkovChain generate(const GeneratorSpec& spec);
MarkovChain hypercube(int dimension);
MarkovChain cycle(int n);
MarkovChain complete_graph(int n);
MarkovChain path(int n);
MarkovChain random_regular(int d, int n, std::uint64_t seed);

// Combinatorial graph distance of the relation x ~ y.
IntMatrix distance_matrix(const MarkovChain& chain);

// Sorted indices within combinatorial distance r of any vertex in `centers`.
std::vector<int> ball(const MarkovChain& chain, const std::vector<int>& centers, int r);

// Chain JSON: {"states": [...], "Q": [[...]], "pi": [...]} with pi optional.
MarkovChain chain_from_json_text(const std::string& text);
std::string chain_to_json_text(const MarkovChain& chain);

// Edge-list TSV, one "u<TAB>v<TAB>weight" per line; '#' starts a comment.
MarkovChain chain_from_edge_list(const std::string& text);

// Dispatches on extension: .tsv/.txt/.edges are edge lists, anything else JSON.
MarkovChain load_chain(const std::string& path);

}  // namespace curvkit
