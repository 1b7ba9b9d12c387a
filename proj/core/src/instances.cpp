#include "smoothgreed/instances.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smoothgreed/rng.hpp"

namespace smoothgreed {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

nlohmann::json OnlineInstance::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const Step& s : steps) steps_json.push_back(s.to_json());
  nlohmann::json extras = {{"b", b}, {"l", l}, {"theta", theta}};
  if (A0) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(A0->size()));
    for (Eigen::Index i = 0; i < A0->rows(); ++i) {
      for (Eigen::Index j = 0; j < A0->cols(); ++j) flat.push_back((*A0)(i, j));
    }
    extras["A0"] = flat;
  }
  nlohmann::json j = {{"version", kInstanceVersion}, {"family", family}, {"params", params},
                      {"seed", seed},                {"n", n},           {"steps", steps_json},
                      {"extras", extras}};
  if (offline_optimum) j["offline_optimum"] = *offline_optimum;
  return j;
}

OnlineInstance OnlineInstance::from_json(const nlohmann::json& j) {
  try {
    require(j.is_object(), "instance must be a JSON object");
    require(j.value("version", std::string()) == kInstanceVersion,
            "unsupported instance version (expected v1)");
    OnlineInstance inst;
    inst.family = j.at("family").get<std::string>();
    inst.params = j.value("params", nlohmann::json::object());
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.n = j.at("n").get<std::size_t>();
    for (const auto& s : j.at("steps")) inst.steps.push_back(Step::from_json(s));
    const auto extras = j.value("extras", nlohmann::json::object());
    inst.b = extras.value("b", 1.0);
    inst.l = extras.value("l", 0.0);
    inst.theta = extras.value("theta", 0.0);
    if (extras.contains("A0")) {
      const auto flat = extras.at("A0").get<std::vector<double>>();
      require(flat.size() == inst.n * inst.n, "A0 must hold n*n entries");
      Eigen::MatrixXd A0(static_cast<Eigen::Index>(inst.n), static_cast<Eigen::Index>(inst.n));
      for (std::size_t i = 0; i < inst.n; ++i) {
        for (std::size_t k = 0; k < inst.n; ++k) {
          A0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = flat[i * inst.n + k];
        }
      }
      inst.A0 = std::move(A0);
    }
    if (j.contains("offline_optimum")) inst.offline_optimum = j.at("offline_optimum").get<double>();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad instance: ") + e.what());
  }
}

OnlineInstance gen_adwords_triangular(std::size_t n, std::size_t phase_len) {
  require(n >= 1 && phase_len >= 1, "adwords_triangular needs n, phase_len >= 1");
  OnlineInstance inst;
  inst.family = "adwords_triangular";
  inst.params = {{"n", n}, {"phase_len", phase_len}};
  inst.n = n;
  inst.steps.reserve(n * phase_len);
  const double bid = 1.0 / static_cast<double>(phase_len);
  for (std::size_t phase = 0; phase < n; ++phase) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    c.head(static_cast<Eigen::Index>(n - phase)).setConstant(bid);
    for (std::size_t s = 0; s < phase_len; ++s) {
      inst.steps.push_back(Step{DiagonalMap{c}, FeasibleSet::simplex(n)});
    }
  }
  inst.theta = theta_of_instance(inst.steps);
  inst.l = 1.0;
  inst.offline_optimum = static_cast<double>(n);
  return inst;
}

OnlineInstance gen_lp_random(std::size_t n, std::size_t m, std::size_t k, double density,
                             std::uint64_t seed) {
  require(n >= 1 && m >= 1 && k >= 1, "lp_random needs n, m, k >= 1");
  require(density > 0.0 && density <= 1.0, "lp_random density must lie in (0, 1]");
  OnlineInstance inst;
  inst.family = "lp_random";
  inst.params = {{"n", n}, {"m", m}, {"k", k}, {"density", density}};
  inst.seed = seed;
  inst.n = n;
  // Scale so that the total load is a small multiple of the unit budgets.
  const double scale = 4.0 / static_cast<double>(m);
  for (std::size_t t = 0; t < m; ++t) {
    SplitMix64 rng(seed, t);
    StackedMap map;
    map.c.resize(static_cast<Eigen::Index>(k));
    map.B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::Index jj = static_cast<Eigen::Index>(j);
      map.c[jj] = scale * rng.uniform(0.1, 1.0);
      // regenerate all-zero columns
      for (int attempt = 0; map.B.col(jj).sum() == 0.0; ++attempt) {
        for (std::size_t i = 0; i < n; ++i) {
          if (rng.uniform() < density) map.B(static_cast<Eigen::Index>(i), jj) = scale * rng.uniform(0.1, 1.0);
        }
        if (attempt > 64 && map.B.col(jj).sum() == 0.0) {
          map.B(static_cast<Eigen::Index>(rng.below(n)), jj) = scale * rng.uniform(0.1, 1.0);
        }
      }
    }
    inst.steps.push_back(Step{std::move(map), FeasibleSet::simplex(k)});
  }
  inst.theta = theta_of_instance(inst.steps);
  inst.l = l_bound_lp(inst.steps);
  return inst;
}

Eigen::MatrixXd graph_laplacian(std::size_t n,
                                const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& [a, b] : edges) {
    require(a < n && b < n && a != b, "graph edge out of range or a self-loop");
    const Eigen::Index i = static_cast<Eigen::Index>(a);
    const Eigen::Index j = static_cast<Eigen::Index>(b);
    L(i, i) += 1.0;
    L(j, j) += 1.0;
    L(i, j) -= 1.0;
    L(j, i) -= 1.0;
  }
  return L;
}

bool graph_connected(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (n == 0) return false;
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) return false;
    const std::size_t ra = find(a), rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

double lambda_min(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

OnlineInstance gen_logdet_stream(std::size_t n, std::size_t m, double b, const LogDetSource& source,
                                 std::uint64_t seed) {
  require(n >= 1 && m >= 1, "logdet_stream needs n, m >= 1");
  require(b > 0.0, "logdet_stream budget must be positive");
  OnlineInstance inst;
  inst.family = "logdet_stream";
  inst.seed = seed;
  inst.n = n;
  inst.b = b;
  const Eigen::Index nn = static_cast<Eigen::Index>(n);
  if (source.kind == LogDetSource::Kind::random_vectors) {
    inst.params = {{"n", n}, {"m", m}, {"b", b}, {"source", "random_vectors"}};
    inst.A0 = Eigen::MatrixXd::Identity(nn, nn);
    for (std::size_t t = 0; t < m; ++t) {
      SplitMix64 rng(seed, t);
      Eigen::VectorXd a(nn);
      for (Eigen::Index i = 0; i < nn; ++i) a[i] = rng.normal();
      inst.steps.push_back(Step{RankOneMap{a}, FeasibleSet::unit_interval()});
    }
  } else {
    require(!source.edges.empty(), "graph source needs an edge list");
    require(graph_connected(n, source.edges), "graph must be connected");
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, c] : source.edges) edges.push_back({a, c});
    inst.params = {{"n", n}, {"m", m}, {"b", b}, {"source", "graph_incidence"}, {"edges", edges}};
    inst.A0 = graph_laplacian(n, source.edges) + Eigen::MatrixXd::Ones(nn, nn);
    for (std::size_t t = 0; t < m; ++t) {
      SplitMix64 rng(seed, t);
      const auto& [i, j] = source.edges[rng.below(source.edges.size())];
      Eigen::VectorXd a = Eigen::VectorXd::Zero(nn);
      a[static_cast<Eigen::Index>(i)] = 1.0;
      a[static_cast<Eigen::Index>(j)] = -1.0;
      inst.steps.push_back(Step{RankOneMap{a}, FeasibleSet::unit_interval()});
    }
  }
  inst.l = (1.0 + 1e-6) * 2.0 / lambda_min(*inst.A0);
  inst.theta = std::log1p(1.0 / static_cast<double>(n));
  return inst;
}

}  // namespace smoothgreed
