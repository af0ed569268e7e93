#include "curvkit/chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include <json.hpp>

#include "curvkit/errors.hpp"

namespace curvkit {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string> default_states(int n) {
  std::vector<std::string> s(n);
  for (int i = 0; i < n; ++i) s[i] = std::to_string(i);
  return s;
}

bool strongly_connected(const Matrix& q) {
  const int n = static_cast<int>(q.rows());
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int y = 0; y < n; ++y) {
        const double v = transpose ? q(y, x) : q(x, y);
        if (y != x && v > 0.0 && !seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return n == 0 || (reach(false) && reach(true));
}

Vector stationary_vector(const Matrix& q) {
  const int n = static_cast<int>(q.rows());
  Matrix a(n + 1, n);
  a.topRows(n) = q.transpose() - Matrix::Identity(n, n);
  a.row(n).setOnes();
  Vector b = Vector::Zero(n + 1);
  b(n) = 1.0;
  Vector pi = a.colPivHouseholderQr().solve(b);
  return pi / pi.sum();
}

}  // namespace

MarkovChain::MarkovChain(std::vector<std::string> states, Matrix q, Vector pi)
    : states_(std::move(states)), q_(std::move(q)), pi_(std::move(pi)) {
  const int n = size();
  neighbors_.resize(n);
  stats_.deg_weighted = Vector::Zero(n);
  stats_.deg_pi = Vector::Zero(n);
  stats_.q_min = std::numeric_limits<double>::infinity();
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (y == x || q_(x, y) <= 0.0) continue;
      neighbors_[x].push_back(y);
      stats_.deg_weighted(x) += q_(x, y);
      stats_.deg_pi(x) += pi_(y);
      stats_.q_min = std::min(stats_.q_min, q_(x, y));
    }
    stats_.deg_pi(x) /= pi_(x);
  }
  if (n == 1) stats_.q_min = 1.0;
  stats_.pi_min = pi_.minCoeff();
  stats_.pi_max = pi_.maxCoeff();
  stats_.deg_weighted_max = stats_.deg_weighted.maxCoeff();
  stats_.deg_pi_max = stats_.deg_pi.maxCoeff();
}

int MarkovChain::index_of(std::string_view id) const {
  for (int i = 0; i < size(); ++i)
    if (states_[i] == id) return i;
  throw InvalidParameters("unknown state identifier '" + std::string(id) + "'");
}

MarkovChain build_chain(const Matrix& q, const std::optional<Vector>& pi_in,
                        std::optional<std::vector<std::string>> states) {
  const int n = static_cast<int>(q.rows());
  if (n == 0 || q.cols() != n)
    throw NotStochastic("Q must be a nonempty square matrix, got " + std::to_string(q.rows()) +
                        "x" + std::to_string(q.cols()));
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (!std::isfinite(q(x, y)) || q(x, y) < 0.0)
        throw NotStochastic("Q(" + std::to_string(x) + "," + std::to_string(y) +
                            ") = " + fmt_double(q(x, y)) + " is not a probability");
    }
    const double residual = q.row(x).sum() - 1.0;
    if (std::abs(residual) > kChainTolerance)
      throw NotStochastic("row " + std::to_string(x) + " sums to " +
                          fmt_double(q.row(x).sum()) + " (residual " + fmt_double(residual) +
                          ")");
  }
  if (!strongly_connected(q))
    throw NotIrreducible("the transition graph of Q is not strongly connected");

  Vector pi;
  if (pi_in) {
    pi = *pi_in;
    if (pi.size() != n)
      throw ShapeMismatch("pi has length " + std::to_string(pi.size()) + ", expected " +
                          std::to_string(n));
    const double total = pi.sum();
    if (std::abs(total - 1.0) > kChainTolerance)
      throw InvalidParameters("pi sums to " + fmt_double(total) + ", expected 1");
  } else {
    pi = stationary_vector(q);
  }
  for (int x = 0; x < n; ++x)
    if (!(pi(x) > 0.0) || pi(x) > 1.0)
      throw InvalidParameters("pi(" + std::to_string(x) + ") = " + fmt_double(pi(x)) +
                              " is outside (0,1]");

  const Vector moved = q.transpose() * pi;
  const double stat_residual = (moved - pi).cwiseAbs().maxCoeff();
  if (stat_residual > kChainTolerance * pi.maxCoeff())
    throw InvalidParameters("pi is not stationary, max |piQ - pi| = " +
                            fmt_double(stat_residual));

  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      const double a = q(x, y) * pi(x);
      const double b = q(y, x) * pi(y);
      if (std::abs(a - b) > kChainTolerance * std::max(a, b))
        throw NotReversible("detailed balance fails for pair (" + std::to_string(x) + "," +
                            std::to_string(y) + "), residual " + fmt_double(a - b));
    }
  }

  std::vector<std::string> ids = states ? std::move(*states) : default_states(n);
  if (static_cast<int>(ids.size()) != n)
    throw ShapeMismatch("states has " + std::to_string(ids.size()) + " entries, expected " +
                        std::to_string(n));
  {
    std::vector<std::string> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw InvalidParameters("state identifiers must be unique");
  }
  return MarkovChain(std::move(ids), q, std::move(pi));
}

MarkovChain chain_from_weights(const Matrix& w, std::vector<std::string> states) {
  const int n = static_cast<int>(w.rows());
  if (n == 0 || w.cols() != n) throw ShapeMismatch("weight matrix must be square and nonempty");
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 0.0)
    throw InvalidParameters("weight matrix must be symmetric");
  if (w.minCoeff() < 0.0) throw InvalidParameters("weights must be nonnegative");
  const Vector deg = w.rowwise().sum();
  for (int x = 0; x < n; ++x)
    if (!(deg(x) > 0.0))
      throw NotIrreducible("vertex " + std::to_string(x) + " has no incident weight");
  Matrix q = deg.cwiseInverse().asDiagonal() * w;
  // Rows are renormalised so that integer weights give row sums of exactly 1.
  for (int x = 0; x < n; ++x) q.row(x) /= q.row(x).sum();
  const Vector pi = deg / deg.sum();
  if (states.empty()) states = default_states(n);
  return build_chain(q, pi, std::move(states));
}

GeneratorSpec GeneratorSpec::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  auto to_int = [&](const std::string& s) -> long long {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw InvalidParameters("");
      return v;
    } catch (const std::exception&) {
      throw InvalidParameters("bad integer '" + s + "' in generator spec '" +
                              std::string(text) + "'");
    }
  };
  GeneratorSpec spec;
  const std::string& kind = parts[0];
  if (kind == "random-regular" || kind == "random_regular") {
    if (parts.size() != 4)
      throw InvalidParameters("expected random-regular:d:n:seed, got '" + std::string(text) + "'");
    spec.kind = GeneratorKind::random_regular;
    spec.d = static_cast<int>(to_int(parts[1]));
    spec.n = static_cast<int>(to_int(parts[2]));
    spec.seed = static_cast<std::uint64_t>(to_int(parts[3]));
    return spec;
  }
  if (parts.size() != 2)
    throw InvalidParameters("expected <kind>:<size>, got '" + std::string(text) + "'");
  if (kind == "hypercube") {
    spec.kind = GeneratorKind::hypercube;
  } else if (kind == "cycle") {
    spec.kind = GeneratorKind::cycle;
  } else if (kind == "complete") {
    spec.kind = GeneratorKind::complete;
  } else if (kind == "path") {
    spec.kind = GeneratorKind::path;
  } else {
    throw InvalidParameters("unknown generator '" + kind + "'");
  }
  spec.n = static_cast<int>(to_int(parts[1]));
  return spec;
}

std::string GeneratorSpec::to_string() const {
  switch (kind) {
    case GeneratorKind::hypercube: return "hypercube:" + std::to_string(n);
    case GeneratorKind::cycle: return "cycle:" + std::to_string(n);
    case GeneratorKind::complete: return "complete:" + std::to_string(n);
    case GeneratorKind::path: return "path:" + std::to_string(n);
    case GeneratorKind::random_regular:
      return "random-regular:" + std::to_string(d) + ":" + std::to_string(n) + ":" +
             std::to_string(seed);
  }
  return {};
}

MarkovChain generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GeneratorKind::hypercube: return hypercube(spec.n);
    case GeneratorKind::cycle: return cycle(spec.n);
    case GeneratorKind::complete: return complete_graph(spec.n);
    case GeneratorKind::path: return path(spec.n);
    case GeneratorKind::random_regular: return random_regular(spec.d, spec.n, spec.seed);
  }
  throw InvalidParameters("unknown generator kind");
}

MarkovChain hypercube(int dimension) {
  if (dimension < 1 || dimension > 12)
    throw InvalidParameters("hypercube dimension must be in [1, 12], got " +
                            std::to_string(dimension));
  const int n = 1 << dimension;
  Matrix w = Matrix::Zero(n, n);
  std::vector<std::string> ids(n);
  for (int x = 0; x < n; ++x) {
    std::string bits(dimension, '0');
    for (int b = 0; b < dimension; ++b) {
      if (x & (1 << (dimension - 1 - b))) bits[b] = '1';
      w(x, x ^ (1 << b)) = 1.0;
    }
    ids[x] = bits;
  }
  return chain_from_weights(w, std::move(ids));
}

MarkovChain cycle(int n) {
  if (n < 3) throw InvalidParameters("cycle needs at least 3 vertices, got " + std::to_string(n));
  Matrix w = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    w(x, (x + 1) % n) = 1.0;
    w((x + 1) % n, x) = 1.0;
  }
  return chain_from_weights(w);
}

MarkovChain complete_graph(int n) {
  if (n < 2)
    throw InvalidParameters("complete graph needs at least 2 vertices, got " + std::to_string(n));
  Matrix w = Matrix::Ones(n, n) - Matrix::Identity(n, n);
  return chain_from_weights(w);
}

MarkovChain path(int n) {
  if (n < 2) throw InvalidParameters("path needs at least 2 vertices, got " + std::to_string(n));
  Matrix w = Matrix::Zero(n, n);
  for (int x = 0; x + 1 < n; ++x) {
    w(x, x + 1) = 1.0;
    w(x + 1, x) = 1.0;
  }
  return chain_from_weights(w);
}

MarkovChain random_regular(int d, int n, std::uint64_t seed) {
  if (d < 1 || n <= d || (static_cast<long long>(n) * d) % 2 != 0)
    throw InvalidParameters("random_regular requires d >= 1, n > d and n*d even (d=" +
                            std::to_string(d) + ", n=" + std::to_string(n) + ")");
  std::mt19937_64 rng(seed);
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * d);
  for (int x = 0; x < n; ++x)
    for (int k = 0; k < d; ++k) stubs.push_back(x);

  // Configuration model with rejection of loops, multi-edges and disconnected draws.
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::shuffle(stubs.begin(), stubs.end(), rng);
    Matrix w = Matrix::Zero(n, n);
    bool simple = true;
    for (std::size_t i = 0; i < stubs.size() && simple; i += 2) {
      const int a = stubs[i], b = stubs[i + 1];
      if (a == b || w(a, b) != 0.0) {
        simple = false;
      } else {
        w(a, b) = w(b, a) = 1.0;
      }
    }
    if (!simple) continue;
    Matrix q = w / static_cast<double>(d);
    if (!strongly_connected(q)) continue;
    return chain_from_weights(w);
  }
  throw InvalidParameters("could not sample a connected simple " + std::to_string(d) +
                          "-regular graph on " + std::to_string(n) + " vertices");
}

IntMatrix distance_matrix(const MarkovChain& chain) {
  const int n = chain.size();
  IntMatrix dist = IntMatrix::Constant(n, n, -1);
  for (int s = 0; s < n; ++s) {
    std::queue<int> frontier;
    frontier.push(s);
    dist(s, s) = 0;
    while (!frontier.empty()) {
      const int x = frontier.front();
      frontier.pop();
      for (int y : chain.neighbors(x)) {
        if (dist(s, y) < 0) {
          dist(s, y) = dist(s, x) + 1;
          frontier.push(y);
        }
      }
    }
  }
  return dist;
}

std::vector<int> ball(const MarkovChain& chain, const std::vector<int>& centers, int r) {
  std::vector<int> depth(chain.size(), -1);
  std::queue<int> frontier;
  for (int c : centers) {
    if (depth[c] < 0) {
      depth[c] = 0;
      frontier.push(c);
    }
  }
  while (!frontier.empty()) {
    const int x = frontier.front();
    frontier.pop();
    if (depth[x] == r) continue;
    for (int y : chain.neighbors(x)) {
      if (depth[y] < 0) {
        depth[y] = depth[x] + 1;
        frontier.push(y);
      }
    }
  }
  std::vector<int> out;
  for (int x = 0; x < chain.size(); ++x)
    if (depth[x] >= 0) out.push_back(x);
  return out;
}

MarkovChain chain_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameters(std::string("malformed chain JSON: ") + e.what());
  }
  if (!j.contains("Q") || !j["Q"].is_array())
    throw InvalidParameters("chain JSON requires an array field \"Q\"");
  const auto& rows = j["Q"];
  const int n = static_cast<int>(rows.size());
  Matrix q(n, n);
  for (int x = 0; x < n; ++x) {
    if (!rows[x].is_array() || static_cast<int>(rows[x].size()) != n)
      throw ShapeMismatch("row " + std::to_string(x) + " of Q does not have " +
                          std::to_string(n) + " entries");
    for (int y = 0; y < n; ++y) q(x, y) = rows[x][y].get<double>();
  }
  std::optional<Vector> pi;
  if (j.contains("pi") && !j["pi"].is_null()) {
    const auto& p = j["pi"];
    Vector v(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) v(static_cast<Eigen::Index>(i)) = p[i].get<double>();
    pi = v;
  }
  std::optional<std::vector<std::string>> states;
  if (j.contains("states")) {
    std::vector<std::string> ids;
    for (const auto& s : j["states"]) ids.push_back(s.is_string() ? s.get<std::string>() : s.dump());
    states = std::move(ids);
  }
  return build_chain(q, pi, std::move(states));
}

std::string chain_to_json_text(const MarkovChain& chain) {
  nlohmann::json j;
  j["states"] = chain.states();
  nlohmann::json rows = nlohmann::json::array();
  for (int x = 0; x < chain.size(); ++x) {
    std::vector<double> row(chain.size());
    for (int y = 0; y < chain.size(); ++y) row[y] = chain.q(x, y);
    rows.push_back(row);
  }
  j["Q"] = rows;
  j["pi"] = std::vector<double>(chain.pi().data(), chain.pi().data() + chain.size());
  return j.dump(2);
}

MarkovChain chain_from_edge_list(const std::string& text) {
  std::map<std::string, int> index;
  std::vector<std::string> ids;
  std::vector<std::tuple<int, int, double>> edges;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto id_of = [&](const std::string& s) {
    auto [it, inserted] = index.emplace(s, static_cast<int>(ids.size()));
    if (inserted) ids.push_back(s);
    return it->second;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string u, v;
    double w = 0.0;
    if (!(fields >> u >> v >> w))
      throw InvalidParameters("edge list line " + std::to_string(lineno) +
                              " is not 'u<TAB>v<TAB>weight'");
    if (!(w > 0.0) || !std::isfinite(w))
      throw InvalidParameters("edge list line " + std::to_string(lineno) +
                              " has a non-positive weight");
    edges.emplace_back(id_of(u), id_of(v), w);
  }
  const int n = static_cast<int>(ids.size());
  if (n == 0) throw InvalidParameters("edge list is empty");
  Matrix w = Matrix::Zero(n, n);
  for (const auto& [a, b, v] : edges) {
    w(a, b) += v;
    if (a != b) w(b, a) += v;
  }
  return chain_from_weights(w, ids);
}

MarkovChain load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameters("cannot open chain file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".tsv") || ends_with(".txt") || ends_with(".edges"))
    return chain_from_edge_list(buf.str());
  return chain_from_json_text(buf.str());
}

}  // namespace curvkit
