#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hyploop/errors.hpp"
#include "hyploop/euclid.hpp"
#include "hyploop/field.hpp"
#include "hyploop/linearized.hpp"
#include "hyploop/loop_io.hpp"
#include "hyploop/melnikov.hpp"
#include "hyploop/model.hpp"
#include "hyploop/reduction.hpp"
#include "json_out.hpp"

namespace hyploop::cli {
namespace {

constexpr const char* kSchema = "hyploop/1";

// Values as given on the command line or in the config file, before validation.
struct Raw {
  std::optional<double> k, eps;
  std::optional<std::string> eps_list, field, box, z, out, in;
  std::optional<int> grid, threads;
  std::optional<long long> n_samples;
  std::optional<double> newton_tol, center_tol;
};

struct RunConfig {
  double k = 0.0;
  double eps = 0.0;
  std::vector<double> eps_list;
  std::string field;
  RegionBox box{};
  int grid = 32;
  std::size_t n_samples = 256;
  std::string out, in;
  Vec2 z;
  int threads = 1;
  SolveOptions solve;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad number in ") + what + ": '" + item + "'");
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used != item.size() || !std::isfinite(x))
      throw ConfigError(std::string("bad number in ") + what + ": '" + item + "'");
    v.push_back(x);
  }
  return v;
}

std::string join(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (!j.is_array()) throw ConfigError("expected a list");
  std::string s;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (i) s += ',';
    s += fmt(j[i].get<double>());
  }
  return s;
}

Raw load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  Raw r;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const auto& v = it.value();
      if (key == "k") r.k = v.get<double>();
      else if (key == "eps") r.eps = v.get<double>();
      else if (key == "eps_list") r.eps_list = join(v);
      else if (key == "field") r.field = v.get<std::string>();
      else if (key == "box") r.box = join(v);
      else if (key == "z") r.z = join(v);
      else if (key == "grid") r.grid = v.get<int>();
      else if (key == "n_samples") r.n_samples = v.get<long long>();
      else if (key == "out") r.out = v.get<std::string>();
      else if (key == "in") r.in = v.get<std::string>();
      else if (key == "threads") r.threads = v.get<int>();
      else if (key == "tolerances") {
        if (v.contains("newton")) r.newton_tol = v.at("newton").get<double>();
        if (v.contains("center")) r.center_tol = v.at("center").get<double>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return r;
}

template <class T>
void overlay(std::optional<T>& base, const std::optional<T>& top) {
  if (top) base = top;
}

struct Need {
  bool k = false, eps = false, eps_list = false, field = false, box = false, z = false, in = false;
};

RunConfig resolve(const Raw& flags, const std::string& config_path, const Need& need, bool euclid) {
  Raw r = config_path.empty() ? Raw{} : load_config(config_path);
  overlay(r.k, flags.k);
  overlay(r.eps, flags.eps);
  overlay(r.eps_list, flags.eps_list);
  overlay(r.field, flags.field);
  overlay(r.box, flags.box);
  overlay(r.z, flags.z);
  overlay(r.out, flags.out);
  overlay(r.in, flags.in);
  overlay(r.grid, flags.grid);
  overlay(r.threads, flags.threads);
  overlay(r.n_samples, flags.n_samples);
  overlay(r.newton_tol, flags.newton_tol);
  overlay(r.center_tol, flags.center_tol);

  auto missing = [](const char* name) { return ConfigError(std::string("missing required setting --") + name); };
  RunConfig c;
  if (need.k && !r.k) throw missing("k");
  if (r.k) {
    c.k = *r.k;
    if (!std::isfinite(c.k) || (euclid ? !(c.k > 0.0) : !(c.k > 1.0)))
      throw ConfigError(euclid ? "k must be > 0" : "k must be > 1");
  }
  if (need.eps && !r.eps) throw missing("eps");
  if (r.eps) {
    c.eps = *r.eps;
    if (!std::isfinite(c.eps)) throw ConfigError("eps must be finite");
  }
  if (need.eps_list && !r.eps_list) throw missing("eps-list");
  if (r.eps_list) {
    c.eps_list = parse_list(*r.eps_list, "eps list");
    if (c.eps_list.empty()) throw ConfigError("eps list is empty");
  }
  if (need.field && !r.field) throw missing("field");
  if (r.field) c.field = *r.field;
  if (need.box && !r.box) throw missing("box");
  if (r.box) {
    const auto b = parse_list(*r.box, "box");
    if (b.size() != 4) throw ConfigError("box needs four numbers z1min,z1max,z2min,z2max");
    c.box = {b[0], b[1], b[2], b[3]};
    try {
      c.box.validate(!euclid);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (need.z && !r.z) throw missing("z");
  if (r.z) {
    const auto z = parse_list(*r.z, "z");
    if (z.size() != 2) throw ConfigError("z needs two numbers z1,z2");
    c.z = {z[0], z[1]};
    if (!euclid && !(c.z.y > 0.0)) throw ConfigError("z2 must be > 0");
  }
  if (need.in && !r.in) throw missing("in");
  if (r.in) c.in = *r.in;
  if (r.out) c.out = *r.out;
  if (r.grid) {
    if (*r.grid < 2) throw ConfigError("grid must be >= 2");
    c.grid = *r.grid;
  }
  if (r.threads) {
    if (*r.threads < 1) throw ConfigError("threads must be >= 1");
    c.threads = *r.threads;
  }
  if (r.n_samples) {
    const long long n = *r.n_samples;
    if (n < 8 || (n & (n - 1)) != 0) throw ConfigError("n-samples must be a power of two >= 8");
    c.n_samples = static_cast<std::size_t>(n);
  }
  c.solve.n = c.n_samples;
  c.solve.grid = c.grid;
  c.solve.threads = c.threads;
  if (r.newton_tol) c.solve.reduce.tol = *r.newton_tol;
  if (r.center_tol) c.solve.theta_tol = *r.center_tol;
  return c;
}

Json vec(Vec2 v) { return Json::array({v.x, v.y}); }

Json verify_json(const VerifyReport& v) {
  return Json{{"residual_sup", v.residual_sup},
              {"length", v.length},
              {"speed_defect", v.speed_defect},
              {"curvature_defect", v.curvature_defect},
              {"killing", Json::array({v.killing[0], v.killing[1], v.killing[2]})},
              {"winding", v.winding},
              {"embedded", v.embedded},
              {"regular", v.regular}};
}

Json distance_json(const LoopDistance& d) { return Json{{"c0", d.c0}, {"c1", d.c1}, {"c2", d.c2}}; }

Json state_json(const ReductionState& s, bool with_eta) {
  Json j{{"eps", s.eps},
         {"z", vec(s.z)},
         {"t", s.t},
         {"theta", vec(s.theta)},
         {"eta_sup", sup_norm(s.eta)},
         {"residual_sup", s.residual_sup},
         {"constraint_res", Json::array({s.constraint_res[0], s.constraint_res[1], s.constraint_res[2]})},
         {"noise_floor", s.noise_floor},
         {"iterations", s.iterations},
         {"converged", s.converged},
         {"at_floor", s.at_floor}};
  if (with_eta) {
    j["eta_x"] = s.eta.x;
    j["eta_y"] = s.eta.y;
  }
  return j;
}

Json solve_json(const SolveReport& r) {
  return Json{{"eps", r.eps},
              {"seed", vec(r.seed)},
              {"z_critical", vec(r.z_critical)},
              {"center_iterations", r.center_iterations},
              {"mu", r.verify.winding},
              {"embedded", r.verify.embedded},
              {"defects", verify_json(r.verify)},
              {"state", state_json(r.state, false)},
              {"distance_to_seed_circle", distance_json(r.to_seed_circle)},
              {"distance_to_center_circle", distance_json(r.to_center_circle)},
              {"necessary", Json::array({r.necessary[0], r.necessary[1]})}};
}

Json header(const char* command) { return Json{{"schema", kSchema}, {"command", command}}; }

void emit(std::ostream& out, const Json& j) { out << dump(j) << '\n'; }

std::unique_ptr<LoopModel> make_model(const RunConfig& c, bool euclid) {
  FieldExpr f = parse_field(c.field);
  if (euclid) return std::make_unique<EuclideanModel>(c.k, std::move(f));
  return std::make_unique<HyperbolicModel>(c.k, std::move(f));
}

// Box swept by the hyperbolic disks of radius artanh(1/k) centered in `box`.
RegionBox swept_box(const RegionBox& box, double k) {
  const double rho = circle_radius(k);
  const double reach = box.z2max * std::sinh(rho);
  return {box.z1min - reach, box.z1max + reach, box.z2min * std::exp(-rho), box.z2max * std::exp(rho)};
}

int cmd_solve(const RunConfig& c, bool euclid, std::ostream& out, std::ostream& err) {
  const auto model = make_model(c, euclid);
  Json rep = header(euclid ? "euclid solve" : "solve");
  rep["k"] = c.k;
  rep["eps"] = c.eps;
  rep["field"] = c.field;
  rep["N"] = c.n_samples;
  if (!euclid) {
    // Nonexistence evidence for the total prescribed curvature k + eps K.
    const FieldExpr total = parse_field(fmt(c.k) + " + (" + fmt(c.eps) + ") * (" + c.field + ")");
    const RegionBox swept = swept_box(c.box, c.k);
    const NonexistenceReport nr = check_nonexistence(total, swept, std::max(c.grid, 16));
    if (nr.any()) {
      rep["status"] = "nonexistence";
      rep["region"] = Json::array({swept.z1min, swept.z1max, swept.z2min, swept.z2max});
      rep["evidence"] = Json{{"sup_abs", nr.sup_abs},
                             {"sup_at_most_one", nr.sup_at_most_one},
                             {"e1_fixed_sign", nr.e1_fixed_sign},
                             {"z_fixed_sign", nr.z_fixed_sign},
                             {"z2_fixed_sign", nr.z2_fixed_sign},
                             {"sampled", true}};
      emit(out, rep);
      err << "solve: nonexistence condition holds on the sampled region ("
          << (nr.sup_at_most_one ? "sup |k+eps K| <= 1" : "gradient of k+eps K has fixed sign along a Killing field")
          << "); no Newton work done\n";
      return kNoSolution;
    }
  }
  const SolveReport r = solve_full(*model, c.eps, c.box, c.solve);
  rep["status"] = "solved";
  rep["solution"] = solve_json(r);
  if (!c.out.empty()) {
    write_loop(c.out, r.loop, {c.k, c.eps, c.field, c.n_samples});
    rep["out"] = c.out;
  }
  emit(out, rep);
  char line[200];
  std::snprintf(line, sizeof line, "solve: embedded loop at z=(%.6g, %.6g), residual %.2e, curvature defect %.2e\n",
                r.z_critical.x, r.z_critical.y, r.verify.residual_sup, r.verify.curvature_defect);
  err << line;
  return kOk;
}

int cmd_reduce(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto model = make_model(c, false);
  const ReductionState s = reduce_at(*model, c.eps, c.z, c.n_samples, nullptr, c.solve.reduce);
  Json rep = header("reduce");
  rep["k"] = c.k;
  rep["field"] = c.field;
  rep["N"] = c.n_samples;
  rep["state"] = state_json(s, true);
  rep["reduced_grad"] = vec(reduced_grad(*model, s));
  if (c.eps != 0.0) rep["G"] = reduced_energy_G(*model, s);
  emit(out, rep);
  char line[160];
  std::snprintf(line, sizeof line, "reduce: converged in %d iterations, residual %.2e\n", s.iterations, s.residual_sup);
  err << line;
  return kOk;
}

int cmd_continue(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto model = make_model(c, false);
  const ContinuationResult res = continue_eps(*model, c.box, c.eps_list, c.solve);
  Json rep = header("continue");
  rep["k"] = c.k;
  rep["field"] = c.field;
  rep["N"] = c.n_samples;
  Json list = Json::array();
  for (const auto& r : res.reports) list.push_back(solve_json(r));
  rep["reports"] = list;
  rep["eps_bar"] = res.eps_bar;
  rep["truncated"] = res.truncated;
  if (res.truncated) {
    rep["failed_eps"] = res.failed_eps;
    rep["failure"] = res.failure;
  }
  emit(out, rep);
  err << "continue: " << res.reports.size() << " of " << c.eps_list.size() << " targets solved, eps_bar "
      << fmt(res.eps_bar) << '\n';
  return res.reports.empty() ? kNumerical : kOk;
}

int cmd_melnikov(const RunConfig& c, bool euclid, std::ostream& out, std::ostream& err) {
  const auto model = make_model(c, euclid);
  const CriticalSearch cs = find_critical(model->melnikov(), c.box, c.grid, c.threads);
  Json rep = header(euclid ? "euclid melnikov" : "melnikov");
  rep["k"] = c.k;
  rep["field"] = c.field;
  rep["box"] = Json::array({c.box.z1min, c.box.z1max, c.box.z2min, c.box.z2max});
  rep["grid"] = c.grid;
  Json pts = Json::array();
  for (const auto& p : cs.points)
    pts.push_back(Json{{"z", vec(p.z)},
                       {"F", p.value},
                       {"grad", vec(p.grad)},
                       {"hess", Json::array({p.hess(0, 0), p.hess(0, 1), p.hess(1, 1)})},
                       {"kind", std::string(to_string(p.kind))}});
  rep["critical_points"] = pts;
  rep["constant"] = cs.constant;
  rep["interior_min"] = cs.interior_min;
  rep["interior_max"] = cs.interior_max;
  if (cs.constant)
    rep["note"] = "F constant, no critical point";
  else if (cs.points.empty())
    rep["note"] = cs.note.empty() ? "no critical point found" : cs.note;
  else if (!cs.note.empty())
    rep["note"] = cs.note;
  std::string csv = "z1,z2,F,dF1,dF2\n";
  for (const auto& g : cs.grid)
    csv += fmt(g.z.x) + ',' + fmt(g.z.y) + ',' + fmt(g.value) + ',' + fmt(g.grad.x) + ',' + fmt(g.grad.y) + '\n';
  if (!c.out.empty()) {
    std::ofstream f(c.out, std::ios::binary);
    if (!f || !(f << csv)) throw ConfigError("cannot write " + c.out);
    rep["out"] = c.out;
  } else {
    rep["grid_csv"] = csv;
  }
  emit(out, rep);
  if (cs.points.empty()) {
    err << "melnikov: " << (cs.constant ? "F constant, no critical point" : "no critical point in region") << '\n';
    return kNoSolution;
  }
  err << "melnikov: " << cs.points.size() << " critical point(s), first " << to_string(cs.points[0].kind) << " at ("
      << fmt(cs.points[0].z.x) << ", " << fmt(cs.points[0].z.y) << ")\n";
  return kOk;
}

int cmd_kernel(const RunConfig& c, bool euclid, std::ostream& out, std::ostream& err) {
  Json rep = header(euclid ? "euclid kernel" : "kernel");
  rep["k"] = c.k;
  rep["N"] = c.n_samples;
  int dim = 0;
  if (euclid) {
    const EuclidKernelReport r = kernel_euclid(c.k, c.n_samples);
    dim = r.dimension;
    rep["dimension"] = r.dimension;
    rep["sigma_min_nonzero"] = r.sigma_min_nonzero;
    rep["zero_modes"] = r.zero_modes;
    rep["basis_residual"] = Json::array({r.basis_residual[0], r.basis_residual[1], r.basis_residual[2]});
    rep["max_principal_angle"] = r.max_principal_angle;
  } else {
    const KernelReport r = kernel_report(c.k, c.n_samples);
    dim = r.dimension;
    rep["dimension"] = r.dimension;
    rep["sigma_min_nonzero"] = r.sigma_min_nonzero;
    rep["sigma_max"] = r.sigma_max;
    rep["zero_modes"] = r.zero_modes;
    rep["max_principal_angle"] = r.max_principal_angle;
    Json modes = Json::array();
    for (const auto& b : r.blocks) {
      std::vector<double> s(b.singular_values.data(), b.singular_values.data() + b.singular_values.size());
      modes.push_back(Json{{"n", b.mode}, {"sigma", s}, {"zeros", b.zero_count}});
    }
    rep["per_mode"] = modes;
  }
  emit(out, rep);
  err << "kernel: dimension " << dim << '\n';
  return kOk;
}

int cmd_verify(RunConfig c, const Raw& flags, bool euclid, std::ostream& out, std::ostream& err) {
  std::optional<LoopMeta> meta;
  const Loop u = read_loop(c.in, &meta);
  // Sidecar values fill in whatever the command line and config left open.
  if (meta) {
    if (!flags.k && c.k == 0.0) c.k = meta->k;
    if (!flags.eps && c.eps == 0.0) c.eps = meta->eps;
    if (c.field.empty()) c.field = meta->field;
  }
  if (c.k == 0.0) throw ConfigError("missing required setting --k (and no sidecar metadata)");
  if (c.field.empty()) c.field = "0";
  const auto model = make_model(c, euclid);
  const VerifyReport v = model->verify(u, c.eps);
  Json rep = header(euclid ? "euclid verify" : "verify");
  rep["in"] = c.in;
  rep["k"] = c.k;
  rep["eps"] = c.eps;
  rep["field"] = c.field;
  rep["N"] = u.size();
  rep["defects"] = verify_json(v);
  emit(out, rep);
  char line[200];
  std::snprintf(line, sizeof line, "verify: residual %.2e, curvature defect %.2e, winding %d, %s\n", v.residual_sup,
                v.curvature_defect, v.winding, v.embedded ? "embedded" : "not embedded");
  err << line;
  return kOk;
}

struct Flags {
  Raw raw;
  std::string config;
};

void add_flags(CLI::App* app, Flags& f) {
  auto opt_d = [&](const char* name, std::optional<double>& dst, const char* help) {
    app->add_option_function<double>(name, [&dst](const double& v) { dst = v; }, help);
  };
  auto opt_s = [&](const char* name, std::optional<std::string>& dst, const char* help) {
    app->add_option_function<std::string>(name, [&dst](const std::string& v) { dst = v; }, help);
  };
  app->add_option("--config", f.config, "JSON config file; flags override its values");
  opt_d("--k", f.raw.k, "constant curvature part (k > 1; k > 0 for euclid)");
  opt_d("--eps", f.raw.eps, "perturbation size");
  opt_s("--eps-list", f.raw.eps_list, "comma-separated eps targets");
  opt_s("--field", f.raw.field, "curvature field K(z1, z2)");
  opt_s("--box", f.raw.box, "z1min,z1max,z2min,z2max");
  opt_s("--z", f.raw.z, "center z1,z2");
  opt_s("--out", f.raw.out, "output file");
  opt_s("--in", f.raw.in, "input loop CSV");
  app->add_option_function<int>("--grid", [&f](const int& v) { f.raw.grid = v; }, "grid nodes per axis (32)");
  app->add_option_function<long long>("--n-samples", [&f](const long long& v) { f.raw.n_samples = v; },
                                      "samples per loop, power of two (256)");
  app->add_option_function<int>("--threads", [&f](const int& v) { f.raw.threads = v; }, "worker threads (1)");
  opt_d("--newton-tol", f.raw.newton_tol, "override the reduction Newton tolerance");
  opt_d("--center-tol", f.raw.center_tol, "override the multiplier tolerance of the center search");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed loops of prescribed geodesic curvature in the half-plane"};
  app.require_subcommand(1);
  Flags f;
  struct Sub {
    const char* name;
    const char* help;
    CLI::App* app = nullptr;
  };
  Sub subs[] = {{"solve", "find an embedded (k + eps K)-loop"},
                {"reduce", "reduced problem at a fixed center"},
                {"continue", "eps continuation"},
                {"melnikov", "Melnikov function scan and critical points"},
                {"kernel", "kernel of the linearized operator"},
                {"verify", "check a loop file"}};
  for (auto& s : subs) {
    s.app = app.add_subcommand(s.name, s.help);
    add_flags(s.app, f);
  }
  CLI::App* euclid = app.add_subcommand("euclid", "flat-plane counterpart");
  euclid->require_subcommand(1);
  Sub esubs[] = {{"solve", "find an embedded (k + eps K)-loop in the plane"},
                 {"melnikov", "disk-average scan and critical points"},
                 {"kernel", "kernel of the linearized operator"},
                 {"verify", "check a loop file"}};
  for (auto& s : esubs) {
    s.app = euclid->add_subcommand(s.name, s.help);
    add_flags(s.app, f);
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }

  try {
    const bool flat = euclid->parsed();
    const Sub* chosen = nullptr;
    for (const auto& s : flat ? std::span<const Sub>(esubs) : std::span<const Sub>(subs))
      if (s.app->parsed()) chosen = &s;
    const std::string name = chosen->name;
    if (name == "solve") {
      return cmd_solve(resolve(f.raw, f.config, {.k = true, .eps = true, .field = true, .box = true}, flat), flat,
                       out, err);
    }
    if (name == "reduce")
      return cmd_reduce(resolve(f.raw, f.config, {.k = true, .eps = true, .field = true, .z = true}, false), out, err);
    if (name == "continue")
      return cmd_continue(resolve(f.raw, f.config, {.k = true, .eps_list = true, .field = true, .box = true}, false),
                          out, err);
    if (name == "melnikov")
      return cmd_melnikov(resolve(f.raw, f.config, {.k = true, .field = true, .box = true}, flat), flat, out, err);
    if (name == "kernel") return cmd_kernel(resolve(f.raw, f.config, {.k = true}, flat), flat, out, err);
    if (name == "verify") return cmd_verify(resolve(f.raw, f.config, {.in = true}, flat), f.raw, flat, out, err);
    err << "error: unknown command\n";
    return kBadInput;
  } catch (const NoCritical& e) {
    err << "no solution: " << e.what() << '\n';
    return kNoSolution;
  } catch (const SyntaxError& e) {
    err << "error: field " << e.what() << '\n';
    return kBadInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const NonDifferentiable& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace hyploop::cli
