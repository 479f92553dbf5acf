#include "postsel/cli.hpp"

#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "postsel/io.hpp"
#include "postsel/random.hpp"

namespace postsel::cli {

namespace {

using io::json;

struct Global {
  std::uint64_t seed = 1;
  double tol = 1e-6;
  std::size_t restarts = 16;
  std::string out;
  bool quiet = false;
};

struct Context {
  Global g;
  std::ostream& out;
  std::ostream& err;

  DiamondOptions diamond() const {
    DiamondOptions o;
    o.tol = g.tol;
    o.restarts = g.restarts;
    return o;
  }

  // JSON goes to --out when given (a short note on stdout), else to stdout.
  void emit(const json& j, const std::string& path, const std::string& note) const {
    const std::string text = io::dump(j);
    const std::string& target = path.empty() ? g.out : path;
    if (target.empty()) {
      out << text;
    } else {
      io::write_file_atomic(target, text);
      if (!g.quiet) out << note << " -> " << target << "\n";
    }
  }

  void note(const std::string& s) const {
    if (!g.quiet) err << s << "\n";
  }
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

HPMap builtin_map(const std::string& name, double p, std::size_t n) {
  if (name == "id-depol") {
    if (n == 1) return subtract(identity_channel(2), depolarizing(2, p));
    const Channel id = identity_channel(1u << n);
    const Channel dep = depolarizing(1u << n, p);
    return subtract(twirl_permutation(id, n, 2), twirl_permutation(dep, n, 2));
  }
  if (name == "reset") return subtract(reset_channel(2, 0), reset_channel(2, 1));
  if (name == "zero") return subtract(identity_channel(2), identity_channel(2));
  throw UsageError("unknown builtin map '" + name + "' (id-depol, reset, zero)");
}

std::size_t size_guard_or_default(std::size_t v) { return v == 0 ? kTauSizeGuard : v; }

int cmd_dnorm(const Context& ctx, const std::string& map_path, const std::string& builtin,
              double p, bool witness) {
  HPMap m;
  if (!map_path.empty() == !builtin.empty()) throw UsageError("give exactly one of --map and --builtin");
  m = map_path.empty() ? builtin_map(builtin, p, 1)
                       : io::map_from_json(io::parse(io::read_file(map_path)));
  Rng rng(ctx.g.seed);
  const DiamondResult r = diamond_norm(m, ctx.diamond(), rng);
  ctx.emit(io::to_json(r, witness), "", "diamond norm " + io::format_double(r.value));
  if (!r.converged) ctx.note("warning: " + r.status + "; gap " + io::format_double(r.gap));
  return kExitOk;
}

int cmd_tau(const Context& ctx, std::size_t n, std::size_t d, bool full, std::size_t guard) {
  const TauFamily tau = tau_family(n, d, size_guard_or_default(guard));
  ctx.emit(io::tau_to_json(tau, full), "", "tau family g=" + std::to_string(tau.g));
  return kExitOk;
}

int cmd_check_single(const Context& ctx, const std::string& map_path, std::size_t n,
                     std::size_t d, const std::string& kind, std::size_t guard) {
  if (map_path.empty()) throw UsageError("--map is required (or use --batch)");
  const CovarianceKind k = covariance_kind_from_string(kind);
  if (k == CovarianceKind::kCustom) throw UsageError("custom K_pi families are library-only");
  const HPMap m = io::map_from_json(io::parse(io::read_file(map_path)));
  const CovariantMap cm = check_covariance(m, n, d, k);
  Rng rng(ctx.g.seed);
  const PostSelectionReport rep = theorem1_check(cm, ctx.diamond(), rng, size_guard_or_default(guard));
  ctx.emit(io::to_json(rep), "",
           std::string(rep.holds ? "holds" : "VIOLATED") + ": lhs " +
               io::format_double(rep.lhs.value) + " rhs " + io::format_double(rep.rhs));
  return rep.holds ? kExitOk : kExitVerificationFailed;
}

int cmd_check_batch(const Context& ctx, std::size_t n, std::size_t d, std::size_t count,
                    const std::string& csv_path) {
  const auto rows = certify_batch(n, d, count, ctx.g.seed, ctx.diamond());
  std::string csv = io::csv_line({"seed", "n", "d", "lhs", "rhs", "slack"});
  bool all = true;
  double min_slack = rows.empty() ? 0.0 : rows.front().slack;
  for (const auto& r : rows) {
    csv += io::csv_line({std::to_string(r.seed), std::to_string(r.n), std::to_string(r.d),
                         io::format_double(r.lhs), io::format_double(r.rhs),
                         io::format_double(r.slack)});
    all = all && r.holds;
    min_slack = std::min(min_slack, r.slack);
  }
  if (!csv_path.empty()) {
    io::write_file_atomic(csv_path, csv);
  } else if (ctx.g.out.empty()) {
    ctx.out << csv;
  }
  json summary;
  summary["seed"] = ctx.g.seed;
  summary["n"] = n;
  summary["d"] = d;
  summary["count"] = count;
  summary["all_hold"] = all;
  summary["min_slack"] = io::number(min_slack);
  if (!ctx.g.out.empty()) ctx.emit(summary, "", "batch summary");
  ctx.note(std::to_string(count) + " instances, min slack " + io::format_double(min_slack) +
           (all ? ", all hold" : ", VIOLATION"));
  return all ? kExitOk : kExitVerificationFailed;
}

int cmd_qkd_sweep(const Context& ctx, double c, double delta, std::uint64_t d, std::uint64_t a,
                  std::uint64_t b, std::uint64_t step, const std::string& csv_path) {
  if (a < 1 || b < a || step < 1) throw UsageError("need 1 <= n-min <= n-max and step >= 1");
  std::string csv = io::csv_line(
      {"n", "exponent", "bound", "penalty_bits_exact", "penalty_bits_bound"});
  for (std::uint64_t n = a; n <= b; n += step) {
    const GeneralBound gb = general_bound(c, delta, n, d);
    const KeyPenalty kp = key_penalty(n, d);
    csv += io::csv_line({std::to_string(n), io::format_double(gb.exponent),
                         io::format_double(gb.bound), io::format_double(kp.exact_bits),
                         io::format_double(kp.bound_bits)});
    if (b - n < step) break;
  }
  const std::string target = csv_path.empty() ? ctx.g.out : csv_path;
  if (target.empty()) {
    ctx.out << csv;
  } else {
    io::write_file_atomic(target, csv);
    if (!ctx.g.quiet) ctx.out << "sweep -> " << target << "\n";
  }
  return kExitOk;
}

int cmd_demo_toy(const Context& ctx, std::size_t n, const std::string& mode,
                 const std::string& json_path) {
  const ToyProtocol tp = build_toy_protocol(n);
  ToyEvalOptions opts;
  opts.diamond = ctx.diamond();
  Rng rng(ctx.g.seed);
  const ToyReport r = toy_security_eval(tp, toy_mode_from_string(mode), opts, rng);
  ctx.emit(io::to_json(r), json_path,
           "toy n=" + std::to_string(n) + " collective " + io::format_double(r.collective));
  if (r.insecure) ctx.note("toy protocol is insecure, as expected (no parameter estimation)");
  return r.mixture_le_max ? kExitOk : kExitVerificationFailed;
}

int cmd_demo_map(const Context& ctx, const std::string& name, double p, std::size_t n) {
  ctx.emit(io::to_json(builtin_map(name, p, n)), "", "map " + name);
  return kExitOk;
}

}  // namespace

std::string version_string() {
  return std::string("postsel ") + kVersion + " (rng " + kRngStreamId + ")";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diamond norms, de Finetti states and post-selection bounds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());
  Global g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--tol", g.tol, "diamond-norm gap tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--restarts", g.restarts, "seesaw restarts")->capture_default_str();
  app.add_option("--out", g.out, "write JSON output to this file");
  app.add_flag("--quiet", g.quiet, "suppress summaries");
  app.fallthrough();

  std::function<int()> action;

  // dnorm
  auto* dnorm = app.add_subcommand("dnorm", "diamond norm of a Hermiticity-preserving map");
  std::string map_path, builtin;
  double p = 1.0;
  bool witness = false;
  dnorm->add_option("--map", map_path, "map JSON file");
  dnorm->add_option("--builtin", builtin, "id-depol, reset or zero");
  dnorm->add_option("--p", p, "depolarizing parameter for id-depol")->capture_default_str();
  dnorm->add_flag("--witness", witness, "include the witness input");
  dnorm->callback([&] { action = [&] { return cmd_dnorm({g, out, err}, map_path, builtin, p, witness); }; });

  // tau
  auto* tau = app.add_subcommand("tau", "de Finetti state tau and its extensions");
  std::size_t n = 1, d = 2, guard = 0;
  bool full = false;
  tau->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  tau->add_option("--d", d)->required()->check(CLI::PositiveNumber);
  tau->add_flag("--full", full, "include tau_full and the purification");
  tau->add_option("--size-guard", guard, "override the size guard");
  tau->callback([&] { action = [&] { return cmd_tau({g, out, err}, n, d, full, guard); }; });

  // check
  auto* check = app.add_subcommand("check", "post-selection bound for a covariant map");
  std::string kind = "strict", csv_path;
  bool batch = false;
  std::size_t count = 100;
  check->add_option("--map", map_path, "map JSON file");
  check->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  check->add_option("--d", d)->required()->check(CLI::PositiveNumber);
  check->add_option("--kind", kind, "strict or transcript")->capture_default_str();
  check->add_option("--size-guard", guard, "override the size guard");
  check->add_flag("--batch", batch, "certify random twirled channel differences");
  check->add_option("--count", count, "batch size")->capture_default_str();
  check->add_option("--csv", csv_path, "batch CSV output");
  check->callback([&] {
    action = [&] {
      const Context ctx{g, out, err};
      return batch ? cmd_check_batch(ctx, n, d, count, csv_path)
                   : cmd_check_single(ctx, map_path, n, d, kind, guard);
    };
  });

  // qkd
  auto* qkd = app.add_subcommand("qkd", "security-parameter arithmetic");
  qkd->require_subcommand(1);
  auto* reduce = qkd->add_subcommand("reduce", "convert between eps and eps_bar");
  std::optional<double> eps, eps_bar;
  std::uint64_t qn = 1, qd = 2;
  auto* eps_opt = reduce->add_option("--eps", eps, "general-attack parameter");
  reduce->add_option("--eps-bar", eps_bar, "collective-attack parameter")->excludes(eps_opt);
  reduce->add_option("--n", qn)->required();
  reduce->add_option("--d", qd)->required();
  reduce->callback([&] {
    action = [&] {
      const SecurityParams sp = eps_reduction(eps, eps_bar, qn, qd);
      Context{g, out, err}.emit(io::to_json(sp), "", "eps " + io::format_double(sp.eps) +
                                                         " eps_bar " + io::format_double(sp.eps_bar));
      return kExitOk;
    };
  });
  auto* penalty = qkd->add_subcommand("penalty", "key-length penalty in bits");
  penalty->add_option("--n", qn)->required();
  penalty->add_option("--d", qd)->required();
  penalty->callback([&] {
    action = [&] {
      const KeyPenalty kp = key_penalty(qn, qd);
      json j;
      j["n"] = qn;
      j["d"] = qd;
      j["exact_bits"] = kp.exact_bits;
      j["bound_bits"] = kp.bound_bits;
      Context{g, out, err}.emit(j, "", "penalty " + io::format_double(kp.exact_bits));
      return kExitOk;
    };
  });
  auto* sweep = qkd->add_subcommand("sweep", "general bound over a range of n");
  double c = 1.0, delta = 0.1;
  std::uint64_t n_min = 1, n_max = 1, step = 1;
  sweep->add_option("--c", c)->required();
  sweep->add_option("--delta", delta)->required();
  sweep->add_option("--d", qd)->required();
  sweep->add_option("--n-min", n_min)->required();
  sweep->add_option("--n-max", n_max)->required();
  sweep->add_option("--step", step)->capture_default_str();
  sweep->add_option("--csv", csv_path, "CSV output file");
  sweep->callback([&] {
    action = [&] { return cmd_qkd_sweep({g, out, err}, c, delta, qd, n_min, n_max, step, csv_path); };
  });
  auto* cross = qkd->add_subcommand("crossover", "smallest n whose general bound meets a target");
  double target = 1e-10;
  cross->add_option("--c", c)->required();
  cross->add_option("--delta", delta)->required();
  cross->add_option("--d", qd)->required();
  cross->add_option("--target", target)->required();
  cross->callback([&] {
    action = [&] {
      const auto nc = crossover_n(c, delta, qd, target);
      json j;
      j["c"] = c;
      j["delta"] = delta;
      j["d"] = qd;
      j["target"] = target;
      j["reachable"] = nc.has_value();
      j["n"] = nc ? json(*nc) : json(nullptr);
      Context{g, out, err}.emit(j, "", nc ? "crossover n " + std::to_string(*nc) : "unreachable");
      return nc ? kExitOk : kExitVerificationFailed;
    };
  });

  // demo
  auto* demo = app.add_subcommand("demo", "worked examples");
  demo->require_subcommand(1);
  auto* toy = demo->add_subcommand("toy", "toy key distribution protocol");
  std::string mode = "collective", json_path;
  toy->add_option("--n", n)->required()->check(CLI::Range(1, 2));
  toy->add_option("--mode", mode, "collective or postselection")->capture_default_str();
  toy->add_option("--json", json_path, "JSON output file");
  toy->callback([&] { action = [&] { return cmd_demo_toy({g, out, err}, n, mode, json_path); }; });
  auto* dmap = demo->add_subcommand("map", "write a builtin map as JSON");
  std::string name = "id-depol";
  dmap->add_option("--name", name, "id-depol, reset or zero")->capture_default_str();
  dmap->add_option("--p", p)->capture_default_str();
  dmap->add_option("--n", n, "copies for id-depol (twirled when n > 1)")->capture_default_str();
  dmap->callback([&] { action = [&] { return cmd_demo_map({g, out, err}, name, p, n); }; });

  std::vector<std::string> storage{"postsel"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const io::SchemaError& e) {
    err << "input error at " << e.what() << "\n";
  } catch (const CovarianceError& e) {
    err << "covariance check failed: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace postsel::cli
