#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace smoothgreed::cli {

namespace {

std::string companion_json(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  if (dot == std::string::npos) return csv_path + ".json";
  return csv_path.substr(0, dot) + ".json";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::string default_objective_type(const std::string& family) {
  if (family == "adwords_triangular") return "adwords";
  if (family == "lp_random") return "penalty_lp";
  if (family == "logdet_stream") return "logdet";
  return "adwords";
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    v.push_back(std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo))));
  }
  return v;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    v.push_back(lo + t * (hi - lo));
  }
  return v;
}

}  // namespace

nlohmann::json load_json_arg(const std::string& arg) {
  try {
    if (!arg.empty() && arg.front() == '{') return nlohmann::json::parse(arg);
    std::ifstream in(arg);
    if (!in) throw std::invalid_argument("cannot open " + arg);
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("invalid JSON in " + arg + ": " + e.what());
  }
}

SmoothingChoice load_smoothing(const std::string& arg) {
  SmoothingChoice ch;
  if (arg.empty() || arg == "none") return ch;
  if (arg == "nesterov") {
    ch.kind = SmoothingKind::nesterov;
    return ch;
  }
  const Table t = read_csv(arg);
  const auto col = [&](const std::string& name) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) throw std::invalid_argument("design CSV lacks column " + name);
    return static_cast<std::size_t>(it - t.columns.begin());
  };
  const std::size_t cu = col("u");
  const std::size_t cy = col("y");
  if (t.rows.size() < 2) throw std::invalid_argument("design CSV needs at least two rows");
  std::vector<double> y;
  for (const auto& r : t.rows) y.push_back(r[cy]);
  double h = t.rows[1][cu] - t.rows[0][cu];
  TailMode tail = y.back() == 0.0 ? TailMode::zero : TailMode::hold_last;
  std::optional<double> head;
  std::ifstream js(companion_json(arg));
  if (js) {
    const nlohmann::json summary = nlohmann::json::parse(js);
    ch.beta = summary.at("beta").get<double>();
    tail = summary.value("tail", std::string("zero")) == "zero" ? TailMode::zero : TailMode::hold_last;
    if (summary.contains("horizon") && summary.contains("d")) {
      h = summary.at("horizon").get<double>() / summary.at("d").get<double>();
    }
    if (summary.contains("head_exponent")) head = summary.at("head_exponent").get<double>();
  }
  ch.kind = SmoothingKind::grid;
  ch.grid = SmoothedScalar::from_grid(h, std::move(y), tail, head);
  return ch;
}

std::unique_ptr<Objective> make_objective(const nlohmann::json& spec, const OnlineInstance& inst,
                                          const SmoothingChoice& smoothing) {
  const nlohmann::json s = spec.is_object() ? spec : nlohmann::json::object();
  const std::string type = s.value("type", default_objective_type(inst.family));

  if (type == "adwords" || type == "separable") {
    std::vector<ScalarConcave> base;
    if (type == "adwords") {
      base.assign(inst.n, ScalarConcave::cap());
    } else if (s.contains("coords")) {
      for (const auto& c : s.at("coords")) base.push_back(ScalarConcave::from_json(c));
    } else if (s.contains("coord")) {
      base.assign(inst.n, ScalarConcave::from_json(s.at("coord")));
    } else {
      throw std::invalid_argument("separable objective needs \"coords\" or \"coord\"");
    }
    if (base.size() != inst.n) throw std::invalid_argument("objective has the wrong number of coordinates");
    std::vector<Coordinate> run;
    for (const ScalarConcave& f : base) {
      switch (smoothing.kind) {
        case SmoothingKind::none:
          run.emplace_back(f);
          break;
        case SmoothingKind::nesterov:
          if (f.kind() != ScalarConcave::Kind::cap || f.slopes().front() != 1.0) {
            throw std::invalid_argument("closed-form smoothing needs unit cap coordinates");
          }
          run.emplace_back(adwords_nesterov_smoothing());
          break;
        case SmoothingKind::grid:
          run.emplace_back(*smoothing.grid);
          break;
      }
    }
    return std::make_unique<SeparableObjective>(std::move(base), std::move(run));
  }

  if (type == "penalty_lp") {
    const std::string pen = s.value("penalty", std::string("separable"));
    PenaltyLPObjective::Penalty kind;
    if (pen == "separable") {
      kind = PenaltyLPObjective::Penalty::separable;
    } else if (pen == "lp_ball") {
      kind = PenaltyLPObjective::Penalty::lp_ball;
    } else {
      throw std::invalid_argument("unknown penalty: " + pen);
    }
    auto obj = std::make_unique<PenaltyLPObjective>(inst.n, s.value("l", inst.l),
                                                    s.value("theta", inst.theta), kind,
                                                    s.value("p", 1.0));
    if (smoothing.kind == SmoothingKind::grid) {
      throw std::invalid_argument("grid smoothings apply to separable objectives only");
    }
    if (smoothing.kind == SmoothingKind::nesterov) obj->use_nesterov_smoothing();
    return obj;
  }

  if (type == "logdet") {
    if (!inst.A0) throw std::invalid_argument("log-det objective needs A0 in the instance");
    auto obj = std::make_unique<LogDetObjective>(*inst.A0, s.value("b", inst.b), s.value("l", inst.l));
    if (smoothing.kind == SmoothingKind::grid) {
      throw std::invalid_argument("grid smoothings apply to separable objectives only");
    }
    if (smoothing.kind == SmoothingKind::nesterov) obj->use_nesterov_smoothing();
    return obj;
  }

  throw std::invalid_argument("unknown objective type: " + type);
}

CertifyOptions certify_options(const Objective& obj, const SmoothingChoice& smoothing,
                               const RunTrace& trace) {
  CertifyOptions o;
  o.sequential_correction = trace.algorithm == Algorithm::sequential;
  if (const auto* sep = dynamic_cast<const SeparableObjective*>(&obj)) {
    switch (smoothing.kind) {
      case SmoothingKind::none: {
        double alpha = 0.0;
        for (std::size_t i = 0; i < sep->dim(); ++i) {
          const double reach = std::max(1.0, trace.u_final[static_cast<Eigen::Index>(i)]);
          alpha = std::min(alpha, alpha_bar(sep->base()[i], reach));
        }
        o.beta = 1.0 - alpha;
        break;
      }
      case SmoothingKind::nesterov:
        o.beta = beta_smoothed_adwords();
        break;
      case SmoothingKind::grid: {
        if (smoothing.beta) {
          o.beta = *smoothing.beta;
        } else {
          double beta = 1.0;
          for (const ScalarConcave& f : sep->base()) {
            const SmoothedScalar& g = *smoothing.grid;
            beta = std::max(beta, verify_beta(g, f, 0.0, g.horizon(), 4 * g.d()).sup_beta);
          }
          o.beta = beta;
        }
        break;
      }
    }
    return o;
  }
  if (const auto* ld = dynamic_cast<const LogDetObjective*>(&obj); ld && ld->smoothed()) {
    o.beta = beta_logdet_smoothed(ld->gamma());
    return o;
  }
  // Non-monotone penalties: beta at the realized point.
  o.beta = std::max(1.0, trace.realized_beta());
  if (!std::isfinite(o.beta)) o.beta = 1.0;
  return o;
}

RunOutcome run_and_certify(const OnlineInstance& inst, const nlohmann::json& objective_spec,
                           const SmoothingChoice& smoothing, Algorithm algo) {
  const auto obj = make_objective(objective_spec, inst, smoothing);
  RunOutcome out;
  out.trace = run(algo, *obj, inst.steps);
  out.certificate = certify(out.trace, certify_options(*obj, smoothing, out.trace));
  const double L = out.trace.curvature;
  std::optional<double> mu;
  if (std::isfinite(L) && L > 0.0) mu = 1.0 / L;
  out.gaps = duality_gap_diagnostics(out.trace, mu);
  out.summary = trace_summary(out.trace, out.certificate);
  out.summary["objective"] = obj->describe();
  out.summary["family"] = inst.family;
  out.summary["realized_beta"] = out.trace.realized_beta();
  out.summary["gap_lemma_passed"] = out.gaps.passed;
  out.summary["gap_lemma_slack"] = out.gaps.lemma_slack;
  if (out.gaps.regret_checked) out.summary["regret_slack"] = out.gaps.regret_slack;
  if (!out.gaps.failure.empty()) out.summary["gap_failure"] = out.gaps.failure;
  if (inst.offline_optimum) {
    out.summary["offline_optimum"] = *inst.offline_optimum;
    out.summary["true_ratio"] = out.trace.P / *inst.offline_optimum;
  }
  return out;
}

std::string provenance_line(std::uint64_t seed, const std::string& flags) {
  return "# smoothgreed " + std::string(kVersion) + " seed=" + std::to_string(seed) + " flags=" + flags;
}

void write_csv(std::ostream& os, const Table& table, const std::string& provenance) {
  os << provenance << '\n';
  bool first = true;
  for (const auto& c : table.label_columns) {
    os << (first ? "" : ",") << c;
    first = false;
  }
  for (const auto& c : table.columns) {
    os << (first ? "" : ",") << c;
    first = false;
  }
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    first = true;
    if (r < table.labels.size()) {
      for (const auto& l : table.labels[r]) {
        os << (first ? "" : ",") << l;
        first = false;
      }
    }
    for (double v : table.rows[r]) {
      os << (first ? "" : ",") << v;
      first = false;
    }
    os << '\n';
  }
}

void write_csv_file(const std::string& path, const Table& table, const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, table, provenance);
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  Table t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (!header) {
      t.columns = cells;
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) throw std::invalid_argument("ragged CSV row in " + path);
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw std::invalid_argument("non-numeric CSV cell '" + c + "' in " + path);
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (!header) throw std::invalid_argument("empty CSV " + path);
  return t;
}

Table design_csv_table(const DesignResult& r) {
  Table t;
  t.columns = {"u", "y", "psi", "psiS", "beta"};
  for (const DesignRow& row : design_table(r)) t.rows.push_back({row.u, row.y, row.psi, row.psiS, row.beta_u});
  return t;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("SMOOTHGREED_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(n, 1));
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n || error) return;
        i = next++;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

ScalarConcave three_piece_function() {
  return ScalarConcave::piecewise_linear({0.0, 0.5, 1.0}, {1.0, 0.5, 0.0});
}

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names{"1e", "1f", "2a", "2b"};
  return names;
}

Table figure_table(const std::string& which, const FigureOptions& opts) {
  Table t;
  auto base_spec = [&](ScalarConcave f, double horizon, TailMode tail) {
    DesignSpec s;
    s.base = std::move(f);
    s.horizon = horizon;
    s.d = opts.d;
    s.tail = tail;
    s.beta_tol = opts.beta_tol;
    return s;
  };

  if (which == "1e" || which == "1f") {
    const ScalarConcave f = which == "1e" ? ScalarConcave::log1p() : ScalarConcave::sqrt();
    const auto grid = logspace(0.1, 1000.0, opts.points);
    t.columns = {"u_max", "beta", "ratio"};
    t.rows.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
      DesignSpec s = base_spec(f, grid[i], TailMode::hold_last);
      // keep the step fine near the origin as the horizon grows
      s.d = std::max(opts.d, static_cast<std::size_t>(std::ceil(grid[i] / 0.05)));
      const DesignResult r = design_optimal(s);
      t.rows[i] = {grid[i], r.beta, r.ratio()};
    });
    return t;
  }
  if (which == "2a") {
    const auto grid = linspace(0.0, 1.0, opts.points + 1);
    t.columns = {"c", "ratio_three_piece", "ratio_cap", "ratio_cap_closed_form"};
    t.rows.resize(opts.points);
    parallel_for(opts.points, [&](std::size_t i) {
      const double c = grid[i + 1];
      DesignSpec a = base_spec(three_piece_function(), 1.0, TailMode::zero);
      a.c = c;
      DesignSpec b = base_spec(ScalarConcave::cap(), 1.0, TailMode::zero);
      b.c = c;
      t.rows[i] = {c, design_sequential(a).ratio(), design_sequential(b).ratio(),
                   sequential_adwords_ratio(c)};
    });
    return t;
  }
  if (which == "2b") {
    const auto grid = linspace(0.0, 1.0, opts.points + 1);
    t.columns = {"c", "beta", "ratio"};
    t.rows.resize(opts.points);
    parallel_for(opts.points, [&](std::size_t i) {
      DesignSpec s = base_spec(ScalarConcave::log1p(), 10.0, TailMode::hold_last);
      s.c = grid[i + 1];
      const DesignResult r = design_sequential(s);
      t.rows[i] = {s.c, r.beta, r.ratio()};
    });
    return t;
  }
  throw std::invalid_argument("unknown figure: " + which);
}

Table sweep_table(const SweepOptions& opts) {
  std::optional<SmoothedScalar> designed;
  SmoothingChoice choice = load_smoothing(opts.smoothing == "design" ? "none" : opts.smoothing);
  if (opts.smoothing == "design") {
    const DesignResult r = design_optimal(DesignSpec{});
    choice.kind = SmoothingKind::grid;
    choice.grid = r.smoothed;
    choice.beta = r.beta;
  }
  struct Key {
    std::size_t n, phase;
  };
  std::vector<Key> keys;
  for (std::size_t n : opts.n_list) {
    for (std::size_t p : opts.phase_list) keys.push_back({n, p});
  }
  Table t;
  t.label_columns = {"algo", "smoothing"};
  t.columns = {"n", "phase_len", "P", "ratio", "ratio_lb", "certificate_holds"};
  t.rows.resize(keys.size());
  t.labels.assign(keys.size(), {to_string(opts.algo), opts.smoothing});
  parallel_for(keys.size(), [&](std::size_t i) {
    const OnlineInstance inst = gen_adwords_triangular(keys[i].n, keys[i].phase);
    const RunOutcome out = run_and_certify(inst, nlohmann::json::object(), choice, opts.algo);
    t.rows[i] = {static_cast<double>(keys[i].n), static_cast<double>(keys[i].phase), out.trace.P,
                 out.trace.P / static_cast<double>(keys[i].n), out.trace.ratio_lb(),
                 out.certificate.holds ? 1.0 : 0.0};
  });
  return t;
}

}  // namespace smoothgreed::cli
