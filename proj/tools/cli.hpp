#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twoopt/twoopt.hpp"

namespace twoopt::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, verification_failed = 1, usage_error = 2, runtime_error = 3 };

// Flags naming output files; they are left out of the manifest so a replay
// can write elsewhere without changing the recorded run.
inline bool is_output_flag(const std::string& a) { return a == "--out" || a == "--arcs" || a == "--csv"; }

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  nlohmann::json to_json() const {
    return {{"command", command}, {"argv", argv}, {"seed", seed}, {"workers", workers}, {"version", kVersion}};
  }

  static RunManifest from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.workers = j.value("workers", 1u);
    return m;
  }
};

inline std::vector<std::string> strip_outputs(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto eq = args[i].find('=');
    if (is_output_flag(args[i].substr(0, eq))) {
      if (eq == std::string::npos) ++i;
      continue;
    }
    kept.push_back(args[i]);
  }
  return kept;
}

struct Globals {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::optional<std::uint64_t> samples;
  std::string out;
  bool huge = false;

  std::uint64_t samples_or(std::uint64_t fallback) const { return samples.value_or(fallback); }
};

class Context {
 public:
  Context(RunManifest manifest, const Globals& g, std::ostream& out, std::ostream& err)
      : manifest_(std::move(manifest)), globals_(g), out_(out), err_(err) {}

  const Globals& globals() const noexcept { return globals_; }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  nlohmann::json with_manifest(nlohmann::json j) const {
    j["manifest"] = manifest_.to_json();
    return j;
  }

  std::string manifest_line() const { return "# manifest: " + manifest_.to_json().dump() + "\n"; }

  // JSON artifact goes to --out when given, otherwise to stdout.
  void emit_json(const nlohmann::json& j) { emit(with_manifest(j).dump(2) + "\n"); }
  void emit_csv(const std::string& body) { emit(manifest_line() + body); }

  void write_file(const std::string& path, const std::string& content) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open '" + path + "' for writing");
    f << content;
  }

 private:
  void emit(const std::string& content) {
    if (globals_.out.empty())
      out_ << content;
    else
      write_file(globals_.out, content);
  }

  RunManifest manifest_;
  Globals globals_;
  std::ostream& out_;
  std::ostream& err_;
};

inline std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open '" + path + "'");
  return f;
}

struct InstanceSource {
  std::size_t n = 0;
  std::string instance_path;
  bool equal_weights = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--n", n, "number of vertices");
    cmd->add_option("--instance", instance_path, "instance JSON file");
    cmd->add_flag("--equal-weights", equal_weights, "all edge weights equal to 1");
  }

  AnyInstance load(std::uint64_t seed) const {
    if (!instance_path.empty()) {
      auto f = open_input(instance_path);
      return read_instance(f);
    }
    if (n == 0) throw ParameterError("give --n or --instance");
    if (equal_weights) return ExactInstance(n, std::vector<std::int64_t>(pair_count(n), 1), "equal weights");
    return random_instance(n, seed);
  }
};

inline int run_gen(Context& ctx, std::size_t n) {
  if (n == 0) throw ParameterError("gen needs --n");
  ctx.emit_json(to_json(random_instance(n, ctx.globals().seed)));
  return ok;
}

inline int run_census(Context& ctx, const InstanceSource& src) {
  const auto any = src.load(ctx.globals().seed);
  const CensusOptions opts{ctx.globals().workers, ctx.globals().huge};
  return std::visit(
      [&](const auto& inst) {
        const auto count = count_two_optimal_exact(inst, opts);
        ctx.out() << count << "\n";
        if (!ctx.globals().out.empty())
          ctx.write_file(ctx.globals().out,
                         ctx.with_manifest({{"n", inst.size()},
                                            {"label", inst.label()},
                                            {"two_optimal", count},
                                            {"canonical_tours", canonical_tour_count(inst.size())}})
                                 .dump(2) +
                             "\n");
        return int{ok};
      },
      any);
}

inline int run_tgraph(Context& ctx, const InstanceSource& src, std::size_t walks, const std::string& arcs_path) {
  const auto any = src.load(ctx.globals().seed);
  const GraphOptions gopts{ctx.globals().workers, ctx.globals().huge};
  return std::visit(
      [&](const auto& inst) {
        const auto tg = build_transition_graph(inst, gopts);
        const auto st = transition_stats(tg.graph, {walks, ctx.globals().seed, ctx.globals().workers});
        const auto census = count_two_optimal_exact(inst, {ctx.globals().workers, true});
        const auto deg = tg.graph.out_degrees();
        bool sinks_optimal = true;
        for (std::size_t v = 0; v < deg.size(); ++v)
          if (deg[v] == 0 && !is_two_optimal(inst, tg.nodes[v])) sinks_optimal = false;
        const bool verified = sinks_optimal && census == st.sinks;
        auto j = to_json(st);
        j["two_optimal_census"] = census;
        j["verified"] = verified;
        if (!arcs_path.empty()) {
          std::ostringstream csv;
          csv << ctx.manifest_line();
          write_arcs_csv(csv, tg.graph);
          ctx.write_file(arcs_path, csv.str());
        }
        ctx.emit_json(j);
        return verified ? int{ok} : int{verification_failed};
      },
      any);
}

inline int run_reduce(Context& ctx, const std::string& graph_path, std::optional<std::size_t> vertices, bool verify) {
  if (graph_path.empty()) throw ParameterError("reduce needs --graph");
  auto f = open_input(graph_path);
  const BaseGraph g = parse_edge_list(f, vertices);
  const auto rep = run_reduction(g, {ctx.globals().workers, ctx.globals().huge});
  auto j = to_json(rep);
  bool verified = rep.corrected_consistent();
  if (verify) {
    nlohmann::json checks = nlohmann::json::array();
    const ReductionEnumeration opts{ctx.globals().workers, ctx.globals().huge};
    for (const auto m : rep.m_values) {
      const auto c = verify_no_nonedge_characterization(g, ReductionParams::defaults(g.vertex_count(), m), opts);
      checks.push_back({{"m", m}, {"holds", c.holds}, {"tours", c.tours}, {"two_optimal", c.two_optimal},
                        {"mismatches", c.mismatches}});
      verified = verified && c.holds;
    }
    j["characterization"] = checks;
  }
  j["verified"] = verified;
  ctx.emit_json(j);
  return verified ? ok : verification_failed;
}

inline int run_construct(Context& ctx, std::size_t n, const std::string& csv_path) {
  const auto s = construct_S(n);
  const auto sp = participation_spectrum(s);
  const bool disjoint = verify_chord_disjoint(s);
  bool formula = true;
  for (std::size_t p = 1; p <= n; ++p) formula = formula && s.k(p) == participation_formula(n, p);
  const BigInt expected = BigInt((n - 1) / 2 - 1) * factorial(static_cast<unsigned>(n - 3));
  const bool verified = disjoint && formula && sp.zeros() == 2 && sp.max() == n - 3 && sp.positive_product == expected;
  auto j = to_json(s);
  j["size"] = s.moves.size();
  j["chord_disjoint"] = disjoint;
  j["formula_matches"] = formula;
  j["spectrum"] = sp.values;
  j["positive_product"] = sp.positive_product.str();
  j["expected_product"] = expected.str();
  j["log_product_bound"] = log_product_bound(s);
  j["verified"] = verified;
  if (!csv_path.empty()) {
    std::ostringstream csv;
    csv << ctx.manifest_line();
    write_spectrum_csv(csv, s);
    ctx.write_file(csv_path, csv.str());
  }
  ctx.emit_json(j);
  return verified ? ok : verification_failed;
}

inline nlohmann::json estimate_json(const Estimate& e) {
  return {{"estimate", e.value}, {"std_error", e.std_error}, {"samples", e.samples}, {"flagged", e.flagged}};
}

inline int run_estimate_vol(Context& ctx, std::size_t n, std::size_t simplex, const std::string& method) {
  if ((n == 0) == (simplex == 0)) throw ParameterError("estimate-vol needs exactly one of --n or --simplex");
  const Polytope p = n ? build_two_opt_polytope(n) : simplex_polytope(simplex);
  const auto& g = ctx.globals();
  nlohmann::json j{{"dim", p.dim}, {"rows", p.rows.size()}};
  if (n) j["n"] = n;
  const bool rej = method == "rejection" || method == "both";
  const bool tel = method == "telescoping" || method == "both";
  if (!rej && !tel && method != "direct") throw ParameterError("unknown --method '" + method + "'");
  std::optional<Estimate> a, b;
  if (rej) j["rejection"] = estimate_json(*(a = estimate_volume_rejection(p, g.samples_or(10'000'000), {g.seed, g.workers})));
  if (tel) {
    TelescopingOptions t;
    t.seed = g.seed;
    t.workers = g.workers;
    const auto r = estimate_volume_telescoping(p, g.samples_or(20'000), t);
    b = r.volume;
    j["telescoping"] = estimate_json(r.volume);
    j["telescoping"]["log_volume"] = r.log_volume;
    j["telescoping"]["log_std_error"] = r.log_std_error;
    j["telescoping"]["degenerate"] = r.degenerate;
    if (r.degenerate) j["telescoping"]["failed_phase"] = r.failed_phase;
  }
  if (method == "direct") {
    if (!n) throw ParameterError("--method direct needs --n");
    j["direct"] = estimate_json(estimate_prob_two_optimal(n, g.samples_or(1'000'000), {g.seed, g.workers}));
  }
  if (a && b) j["z_distance"] = z_distance(*a, *b);
  ctx.emit_json(j);
  return ok;
}

inline int run_estimate_g(Context& ctx, std::size_t n) {
  const auto s = construct_S(n);
  const auto& g = ctx.globals();
  const auto e = estimate_G(s, g.samples_or(1'000'000), {g.seed, g.workers});
  auto j = estimate_json(e);
  j["n"] = n;
  j["size"] = s.moves.size();
  j["log_estimate"] = std::log(e.value);
  ctx.emit_json(j);
  return ok;
}

inline int run_bounds(Context& ctx, std::vector<std::size_t> ns, std::uint64_t measure_samples) {
  if (ns.empty()) ns = {9, 17, 33, 65};
  const auto& g = ctx.globals();
  std::ostringstream csv;
  csv << "n,log_c,log_bound_a,log_bound_b,log_G,log_G_stderr,log_bound_c,log_bound_c_trivial,log_G_orthant_chain,"
         "log_ref_sqrt_factorial,log_measured,log_measured_stderr\n";
  bool verified = true;
  for (const auto n : ns) {
    BoundOptions opts{g.samples_or(1'000'000), g.seed, g.workers, std::nullopt};
    if (measure_samples > 0)
      opts.measured_probability =
          estimate_volume_rejection(build_two_opt_polytope(n), measure_samples, {g.seed, g.workers});
    const auto r = counting_bounds(n, opts);
    verified = verified && r.c_within_trivial() && r.c_bounds_measured().value_or(true);
    csv << n << ',' << fmt(r.log_c) << ',' << fmt(r.log_bound_a) << ',' << fmt(r.log_bound_b) << ','
        << fmt(r.log_G.value) << ',' << fmt(r.log_G.std_error) << ',' << fmt(r.log_bound_c.value) << ','
        << fmt(r.log_bound_c_trivial) << ',' << (r.log_G_orthant_chain ? fmt(*r.log_G_orthant_chain) : "") << ','
        << fmt(r.log_ref_sqrt_factorial) << ',' << (r.log_measured ? fmt(r.log_measured->value) : "") << ','
        << (r.log_measured ? fmt(r.log_measured->std_error) : "") << '\n';
  }
  ctx.emit_csv(csv.str());
  return verified ? ok : verification_failed;
}

inline int run_orthant(Context& ctx, std::size_t d, const std::string& family, std::uint64_t moment_samples) {
  if (d == 0) throw ParameterError("orthant needs --d");
  const auto& g = ctx.globals();
  std::optional<EquicorrelatedSpec> eq;
  CovarianceSpec spec = CovarianceSpec::identity(d);
  if (family == "equicorrelated") {
    eq = equicorrelated_spec(d);
    spec = eq->spec;
  } else if (family != "identity") {
    throw ParameterError("unknown --family '" + family + "'");
  }
  const auto mc = orthant_prob_mc(spec, g.samples_or(1'000'000), {g.seed, g.workers});
  TruncatedOptions topts;
  topts.seed = g.seed;
  topts.workers = g.workers;
  const auto tm = truncated_moments_mc(spec, moment_samples, topts);
  std::vector<double> moments(d);
  for (std::size_t i = 0; i < d; ++i) moments[i] = tm.second(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  const double log_bound = orthant_moment_bound(spec, moments);
  const bool bound_holds = std::exp(log_bound) >= mc.value - 3 * mc.std_error;
  const Vector am = amemiya_residuals(spec, tm.second);

  nlohmann::json j{{"d", d}, {"family", family}, {"orthant_mc", estimate_json(mc)}};
  const double closed = orthant_prob_closed_form(spec.covariance());
  if (closed >= 0) j["orthant_closed_form"] = closed;
  j["truncated_moments"] = {{"diagonal", moments}, {"sampler", sampler_name(tm.used)}, {"switched", tm.switched},
                            {"samples", tm.samples}, {"amemiya", std::vector<double>(am.data(), am.data() + am.size())}};
  j["moment_bound_log_bound"] = log_bound;
  j["moment_bound_holds"] = bound_holds;
  if (eq) {
    j["det_precision"] = eq->det_precision;
    j["sigma_diag"] = eq->sigma_diag;
    j["sigma_off"] = eq->sigma_off;
    const auto rb = reduced_orthant_bound(d);
    j["reduced_bound"] = {{"log_bound", rb.log_bound}, {"second_moment", rb.second_moment}, {"g_sum", rb.g_sum},
                          {"log_trivial", rb.log_trivial}};
  }
  j["verified"] = bound_holds;
  ctx.emit_json(j);
  return bound_holds ? ok : verification_failed;
}

inline int run_figure(Context& ctx, std::size_t n_min, std::size_t n_max, const std::string& method) {
  if (n_min < 4 || n_max < n_min) throw ParameterError("figure needs 4 <= --n-min <= --n-max");
  const auto& g = ctx.globals();
  std::ostringstream csv;
  csv << "n,estimate,stderr,log_bound_a,log_bound_b,log_ref_sqrt_factorial\n";
  for (std::size_t n = n_min; n <= n_max; ++n) {
    const Polytope p = build_two_opt_polytope(n);
    Estimate e;
    if (method == "rejection") {
      e = estimate_volume_rejection(p, g.samples_or(10'000'000), {g.seed, g.workers});
    } else if (method == "telescoping") {
      TelescopingOptions t;
      t.seed = g.seed;
      t.workers = g.workers;
      e = estimate_volume_telescoping(p, g.samples_or(4'000), t).volume;
    } else {
      throw ParameterError("unknown --method '" + method + "'");
    }
    const double x = static_cast<double>(n);
    const double log_a = x * std::log(bound_constant_c()) - 0.5 * log_factorial(n - 2);
    const double log_b = x * std::log(kBoundConstantRounded) + 0.5 * log_factorial(n);
    csv << n << ',' << fmt(e.value) << ',' << fmt(e.std_error) << ',' << fmt(log_a) << ',' << fmt(log_b) << ','
        << fmt(-0.5 * log_factorial(n)) << '\n';
  }
  ctx.emit_csv(csv.str());
  return ok;
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

inline RunManifest read_manifest(const std::string& path) {
  auto f = open_input(path);
  std::string first;
  std::getline(f, first);
  const std::string prefix = "# manifest: ";
  try {
    if (first.rfind(prefix, 0) == 0) return RunManifest::from_json(nlohmann::json::parse(first.substr(prefix.size())));
    std::stringstream all;
    all << first << '\n' << f.rdbuf();
    return RunManifest::from_json(nlohmann::json::parse(all.str()).at("manifest"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "' has no readable manifest: " + e.what());
  }
}

inline int run_replay(const std::string& path, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto m = read_manifest(path);
  std::vector<std::string> args = m.argv;
  if (!out_path.empty()) {
    args.push_back("--out");
    args.push_back(out_path);
  }
  return dispatch(args, out, err);
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"2-opt local optima: censuses, reduction, construction and probability estimates", "twoopt"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--workers", g.workers, "worker threads (0 = all cores)");
  app.add_option("--samples", g.samples, "Monte Carlo sample budget");
  app.add_option("--out", g.out, "write the artifact to this file");
  app.add_flag("--i-know-this-is-huge", g.huge, "raise enumeration caps");

  std::size_t n = 0, simplex = 0, walks = 1000, d = 0, n_min = 5, n_max = 12;
  std::optional<std::size_t> vertices;
  std::string path, file, method, family = "equicorrelated";
  bool verify = false;
  std::uint64_t measure = 0, moment_samples = 200'000;
  std::vector<std::size_t> ns;
  InstanceSource src;

  auto* gen = app.add_subcommand("gen", "random U[0,1] instance as JSON");
  gen->add_option("--n", n, "number of vertices")->required();
  auto* census = app.add_subcommand("census", "exact number of 2-optimal tours");
  src.add_to(census);
  auto* tgraph = app.add_subcommand("tgraph", "transition-graph statistics");
  src.add_to(tgraph);
  tgraph->add_option("--walks", walks, "random improving walks");
  tgraph->add_option("--arcs", file, "write arcs CSV here");
  auto* reduce = app.add_subcommand("reduce", "path-cover counts through the G_m reduction");
  reduce->add_option("--graph", path, "edge-list file")->required();
  reduce->add_option("--vertices", vertices, "vertex count (default: max label + 1)");
  reduce->add_flag("--verify", verify, "also check the no-non-edge characterization");
  auto* construct = app.add_subcommand("construct-s", "chord-disjoint set, spectrum and verification");
  construct->add_option("--n", n, "n = 2^k + 1")->required();
  construct->add_option("--csv", file, "write the spectrum CSV here");
  auto* vol = app.add_subcommand("estimate-vol", "2-opt polytope or simplex volume");
  vol->add_option("--n", n, "2-opt polytope of K_n");
  vol->add_option("--simplex", simplex, "standard simplex of this dimension");
  method = "rejection";
  vol->add_option("--method", method, "rejection | telescoping | both | direct");
  auto* eg = app.add_subcommand("estimate-g", "Monte Carlo estimate of G(S)");
  eg->add_option("--n", n, "n = 2^k + 1")->required();
  auto* bounds = app.add_subcommand("bounds", "counting-bound table (CSV)");
  bounds->add_option("--n", ns, "values of n = 2^k + 1");
  bounds->add_option("--measure-samples", measure, "rejection samples for the measured probability");
  auto* orthant = app.add_subcommand("orthant", "orthant probability, moments and bounds");
  orthant->add_option("--d", d, "dimension")->required();
  orthant->add_option("--family", family, "identity | equicorrelated");
  orthant->add_option("--moment-samples", moment_samples, "accepted truncated samples");
  auto* figure = app.add_subcommand("figure", "volume-vs-n sweep (CSV)");
  figure->add_option("--n-min", n_min, "first n");
  figure->add_option("--n-max", n_max, "last n");
  std::string figure_method = "telescoping";
  figure->add_option("--method", figure_method, "telescoping | rejection");
  auto* replay = app.add_subcommand("replay", "re-run the manifest embedded in an artifact");
  replay->add_option("--manifest", path, "artifact file")->required();

  std::vector<std::string> argv_store{"twoopt"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return usage_error;
  }

  const auto* sub = app.get_subcommands().front();
  g.workers = resolve_workers(g.workers);
  RunManifest manifest{sub->get_name(), strip_outputs(args), g.seed, g.workers};
  Context ctx(manifest, g, out, err);
  const auto start = std::chrono::steady_clock::now();
  int code = ok;
  try {
    if (sub == gen) code = run_gen(ctx, n);
    else if (sub == census) code = run_census(ctx, src);
    else if (sub == tgraph) code = run_tgraph(ctx, src, walks, file);
    else if (sub == reduce) code = run_reduce(ctx, path, vertices, verify);
    else if (sub == construct) code = run_construct(ctx, n, file);
    else if (sub == vol) code = run_estimate_vol(ctx, n, simplex, method);
    else if (sub == eg) code = run_estimate_g(ctx, n);
    else if (sub == bounds) code = run_bounds(ctx, ns, measure);
    else if (sub == orthant) code = run_orthant(ctx, d, family, moment_samples);
    else if (sub == figure) code = run_figure(ctx, n_min, n_max, figure_method);
    else if (sub == replay) return run_replay(path, g.out, out, err);
  } catch (const CapExceeded& e) {
    err << "refused: " << e.what() << "\n";
    return runtime_error;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return runtime_error;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  err << "wall-time: " << std::fixed << std::setprecision(3) << elapsed.count() << " s\n";
  if (code == verification_failed) err << "verification failed\n";
  return code;
}

}  // namespace twoopt::cli
