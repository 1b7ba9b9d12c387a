#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "smoothgreed/cones.hpp"

namespace smoothgreed {

inline constexpr const char* kInstanceVersion = "v1";

/// A finite sequence of online steps plus the data the objective needs.
struct OnlineInstance {
  std::string family;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  /// Orthant dimension (advertisers, constraints) or matrix size for log-det.
  std::size_t n = 0;
  std::vector<Step> steps;
  std::optional<Eigen::MatrixXd> A0;
  double b = 1.0;
  double l = 0.0;
  double theta = 0.0;
  /// Offline optimum when known in closed form.
  std::optional<double> offline_optimum;

  nlohmann::json to_json() const;
  /// Throws std::invalid_argument on schema violations.
  static OnlineInstance from_json(const nlohmann::json& j);
};

/// n unit budgets, n phases of phase_len steps; phase i bids 1/phase_len on
/// advertisers 1..n-i+1, so the lowest-index greedy choice keeps filling
/// budgets the later phases still need. Offline optimum is n.
OnlineInstance gen_adwords_triangular(std::size_t n, std::size_t phase_len);

/// m steps with k options each over n packing constraints; entries of B are
/// nonzero with probability `density`. theta and l are attached.
OnlineInstance gen_lp_random(std::size_t n, std::size_t m, std::size_t k, double density,
                             std::uint64_t seed);

struct LogDetSource {
  enum class Kind { random_vectors, graph_incidence };
  Kind kind = Kind::random_vectors;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // graph only
};

/// m rank-one steps with x in [0, 1] and budget b. random_vectors uses A0 = I
/// and Gaussian directions; graph_incidence streams edges of a connected graph
/// with A0 = L0 + 1 1^T. l is set just above 2 / lambda_min(A0).
OnlineInstance gen_logdet_stream(std::size_t n, std::size_t m, double b, const LogDetSource& source,
                                 std::uint64_t seed);

Eigen::MatrixXd graph_laplacian(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);
bool graph_connected(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);
double lambda_min(const Eigen::MatrixXd& A);

}  // namespace smoothgreed
