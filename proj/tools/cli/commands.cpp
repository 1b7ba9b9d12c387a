#include "commands.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harness.hpp"

namespace smoothgreed::cli {

namespace {

std::string joined_flags(int argc, char** argv) {
  std::string s;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) s += ' ';
    s += argv[i];
  }
  return s;
}

ScalarConcave parse_function(const std::string& arg) {
  if (arg == "three_piece") return three_piece_function();
  if (!arg.empty() && arg.front() != '{' && !std::filesystem::exists(arg)) {
    return ScalarConcave::from_json({{"kind", arg}});
  }
  return ScalarConcave::from_json(load_json_arg(arg));
}

std::vector<std::pair<std::size_t, std::size_t>> parse_edges(const std::string& s) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) throw std::invalid_argument("edge must look like a-b: " + item);
    edges.emplace_back(std::stoul(item.substr(0, dash)), std::stoul(item.substr(dash + 1)));
  }
  return edges;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

struct DesignArgs {
  std::string objective = "cap";
  double horizon = 1.0;
  std::size_t grid = 1000;
  std::string variant = "sim";
  double c = 0.0;
  std::string tail;
  double beta_tol = 1e-4;
  std::string out;
};

struct GenerateArgs {
  std::string family = "adwords_triangular";
  std::size_t n = 10;
  std::size_t phase_len = 10;
  std::size_t m = 50;
  std::size_t k = 3;
  double density = 0.5;
  double b = 1.0;
  std::string source = "random_vectors";
  std::string edges;
  std::uint64_t seed = 0;
  std::string out;
};

struct RunArgs {
  std::string instance;
  std::string objective;
  std::string smoothing = "none";
  std::string algo = "sim";
  std::string out;
  double beta = 0.0;
};

struct FigureArgs {
  std::string which = "all";
  std::string out = ".";
  std::size_t grid = 400;
  std::size_t points = 10;
};

struct SweepArgs {
  std::string family = "adwords_triangular";
  std::vector<std::size_t> n_list{10};
  std::vector<std::size_t> phase_list{1, 2, 5, 10};
  std::string algo = "sim";
  std::string smoothing = "none";
  std::string out;
};

int cmd_design(const DesignArgs& a, const std::string& flags) {
  DesignSpec spec;
  spec.base = parse_function(a.objective);
  spec.horizon = a.horizon;
  spec.d = a.grid;
  spec.c = a.c;
  spec.beta_tol = a.beta_tol;
  spec.variant = a.variant == "seq" ? DesignVariant::sequential : DesignVariant::simultaneous;
  if (a.variant != "seq" && a.variant != "sim") throw std::invalid_argument("variant must be sim or seq");
  if (a.tail.empty()) {
    spec.tail = spec.base.kind() == ScalarConcave::Kind::cap ||
                        spec.base.kind() == ScalarConcave::Kind::piecewise_linear
                    ? TailMode::zero
                    : TailMode::hold_last;
  } else if (a.tail == "zero") {
    spec.tail = TailMode::zero;
  } else if (a.tail == "hold_last") {
    spec.tail = TailMode::hold_last;
  } else {
    throw std::invalid_argument("tail must be zero or hold_last");
  }
  const DesignResult r = spec.variant == DesignVariant::sequential ? design_sequential(spec) : design_optimal(spec);
  const nlohmann::json summary = design_summary(r);
  if (!a.out.empty()) {
    write_csv_file(a.out + ".csv", design_csv_table(r), provenance_line(0, flags));
    write_json_file(a.out + ".json", summary);
  }
  std::cout << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_generate(const GenerateArgs& a) {
  OnlineInstance inst;
  if (a.family == "adwords_triangular") {
    inst = gen_adwords_triangular(a.n, a.phase_len);
  } else if (a.family == "lp_random") {
    inst = gen_lp_random(a.n, a.m, a.k, a.density, a.seed);
  } else if (a.family == "logdet_stream") {
    LogDetSource src;
    if (a.source == "graph_incidence") {
      src.kind = LogDetSource::Kind::graph_incidence;
      src.edges = parse_edges(a.edges);
    } else if (a.source != "random_vectors") {
      throw std::invalid_argument("unknown source: " + a.source);
    }
    inst = gen_logdet_stream(a.n, a.m, a.b, src, a.seed);
  } else {
    throw std::invalid_argument("unknown family: " + a.family);
  }
  if (a.out.empty()) {
    std::cout << inst.to_json().dump() << '\n';
  } else {
    write_json_file(a.out, inst.to_json());
  }
  return kExitOk;
}

int cmd_run(const RunArgs& a, bool certify_only) {
  const OnlineInstance inst = OnlineInstance::from_json(load_json_arg(a.instance));
  const nlohmann::json objective = a.objective.empty() ? nlohmann::json::object() : load_json_arg(a.objective);
  const SmoothingChoice smoothing = load_smoothing(a.smoothing);
  const Algorithm algo = algorithm_from_string(a.algo);
  RunOutcome out = run_and_certify(inst, objective, smoothing, algo);
  if (a.beta > 0.0) {
    CertifyOptions o;
    o.beta = a.beta;
    o.sequential_correction = algo == Algorithm::sequential;
    out.certificate = certify(out.trace, o);
    out.summary.update(trace_summary(out.trace, out.certificate));
  }
  nlohmann::json report = out.summary;
  if (certify_only) {
    report = {{"P", out.certificate.P},           {"D", out.certificate.D},
              {"D_checked", out.certificate.D_checked}, {"ratio_lb", out.certificate.ratio_lb},
              {"beta", out.certificate.beta},     {"bound", out.certificate.bound},
              {"slack", out.certificate.slack},   {"holds", out.certificate.holds},
              {"gap_lemma_passed", out.gaps.passed}};
  }
  if (!a.out.empty()) {
    if (!certify_only) {
      std::ofstream tr(a.out + ".trace.jsonl");
      if (!tr) throw std::runtime_error("cannot write " + a.out + ".trace.jsonl");
      write_trace_jsonl(tr, out.trace);
    }
    write_json_file(a.out + ".json", report);
  }
  std::cout << report.dump(2) << '\n';
  if (!out.certificate.holds || !out.gaps.passed) {
    std::cerr << "certificate breach\n";
    return kExitBreach;
  }
  return kExitOk;
}

int cmd_figures(const FigureArgs& a, const std::string& flags) {
  FigureOptions opts;
  opts.d = a.grid;
  opts.points = a.points;
  std::vector<std::string> which;
  if (a.which == "all") {
    which = figure_names();
  } else {
    which.push_back(a.which);
  }
  std::filesystem::create_directories(a.out);
  for (const std::string& w : which) {
    const Table t = figure_table(w, opts);
    const std::string path = (std::filesystem::path(a.out) / ("fig_" + w + ".csv")).string();
    write_csv_file(path, t, provenance_line(0, flags));
    std::cout << path << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const SweepArgs& a, const std::string& flags) {
  if (a.family != "adwords_triangular") throw std::invalid_argument("sweep supports adwords_triangular only");
  SweepOptions opts;
  opts.n_list = a.n_list;
  opts.phase_list = a.phase_list;
  opts.algo = algorithm_from_string(a.algo);
  opts.smoothing = a.smoothing;
  const Table t = sweep_table(opts);
  if (a.out.empty()) {
    write_csv(std::cout, t, provenance_line(0, flags));
  } else {
    write_csv_file(a.out, t, provenance_line(0, flags));
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Smoothed greedy online allocation: design, run, certify"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML/INI config file; flags override it");
  app.require_subcommand(1);

  DesignArgs da;
  auto* design = app.add_subcommand("design", "Design an optimal smoothing for a concave function");
  design->add_option("--objective", da.objective, "Function name, descriptor JSON, or JSON file");
  design->add_option("--horizon", da.horizon, "Plateau point or finite horizon");
  design->add_option("--grid", da.grid, "Grid count d");
  design->add_option("--variant", da.variant, "sim or seq");
  design->add_option("--c", da.c, "Sequential lag weight");
  design->add_option("--tail", da.tail, "zero or hold_last (default by function)");
  design->add_option("--beta-tol", da.beta_tol, "Bisection tolerance on beta");
  design->add_option("--out", da.out, "Output prefix for .csv and .json");

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "Generate an instance file");
  generate->add_option("--family", ga.family, "adwords_triangular, lp_random, logdet_stream");
  generate->add_option("--n", ga.n, "Dimension");
  generate->add_option("--phase-len", ga.phase_len, "Steps per phase (adwords_triangular)");
  generate->add_option("--m", ga.m, "Number of steps");
  generate->add_option("--k", ga.k, "Options per step (lp_random)");
  generate->add_option("--density", ga.density, "Nonzero density (lp_random)");
  generate->add_option("--b", ga.b, "Budget (logdet_stream)");
  generate->add_option("--source", ga.source, "random_vectors or graph_incidence");
  generate->add_option("--edges", ga.edges, "Edge list like 0-1,1-2 (graph_incidence)");
  generate->add_option("--seed", ga.seed, "Random seed");
  generate->add_option("--out", ga.out, "Output file (stdout if omitted)");

  RunArgs ra;
  auto add_run_options = [&ra](CLI::App* sub) {
    sub->add_option("--instance", ra.instance, "Instance JSON file")->required();
    sub->add_option("--objective", ra.objective, "Objective spec JSON (family default if omitted)");
    sub->add_option("--smoothing", ra.smoothing, "none, nesterov, or a design CSV");
    sub->add_option("--algo", ra.algo, "seq or sim");
    sub->add_option("--out", ra.out, "Output prefix");
  };
  auto* runc = app.add_subcommand("run", "Run an online algorithm and certify it");
  add_run_options(runc);
  auto* certc = app.add_subcommand("certify", "Certify a run against a ratio bound");
  add_run_options(certc);
  certc->add_option("--beta", ra.beta, "Override the certified beta");

  FigureArgs fa;
  auto* figures = app.add_subcommand("figures", "Ratio curves as CSV");
  figures->add_option("--which", fa.which, "1e, 1f, 2a, 2b, or all");
  figures->add_option("--out", fa.out, "Output directory");
  figures->add_option("--grid", fa.grid, "Design grid count");
  figures->add_option("--points", fa.points, "Points per curve");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Ratio of the triangular adversary vs size");
  sweep->add_option("--family", sa.family, "adwords_triangular");
  sweep->add_option("--n-list", sa.n_list, "Sizes n")->delimiter(',');
  sweep->add_option("--phase-list", sa.phase_list, "Phase lengths")->delimiter(',');
  sweep->add_option("--algo", sa.algo, "seq or sim");
  sweep->add_option("--smoothing", sa.smoothing, "none, nesterov, design, or a design CSV");
  sweep->add_option("--out", sa.out, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  const std::string flags = joined_flags(argc, argv);
  try {
    if (*design) return cmd_design(da, flags);
    if (*generate) return cmd_generate(ga);
    if (*runc) return cmd_run(ra, false);
    if (*certc) return cmd_run(ra, true);
    if (*figures) return cmd_figures(fa, flags);
    if (*sweep) return cmd_sweep(sa, flags);
  } catch (const DesignInfeasible& e) {
    std::cerr << "infeasible design: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::domain_error& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitBadInput;
}

}  // namespace smoothgreed::cli
