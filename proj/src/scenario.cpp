#include "qlfiber/scenario.hpp"

#include <cstdlib>
#include <iostream>
#include <map>

#include "qlfiber/gates.hpp"
#include "qlfiber/io.hpp"
#include "qlfiber/propagator.hpp"
#include "qlfiber/synth.hpp"

namespace qlfiber::cli {

namespace fs = std::filesystem;
using io::Json;
using io::ObjectReader;

std::string to_string(ScenarioKind kind)
{
  switch (kind) {
    case ScenarioKind::Simulate:
      return "simulate";
    case ScenarioKind::Gate:
      return "gate";
    case ScenarioKind::Synth:
      return "synth";
    case ScenarioKind::Reachability:
      return "reachability";
    case ScenarioKind::Lattice:
      return "lattice";
  }
  return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& name)
{
  for (auto k : {ScenarioKind::Simulate, ScenarioKind::Gate, ScenarioKind::Synth, ScenarioKind::Reachability,
                 ScenarioKind::Lattice})
    if (to_string(k) == name) return k;
  throw ValidationError("unknown scenario kind '" + name + "'");
}

LogLevel log_level_from_env()
{
  const char* v = std::getenv("QLFIBER_LOG");
  if (!v) return LogLevel::Warn;
  const std::string s(v);
  if (s == "quiet") return LogLevel::Quiet;
  if (s == "info") return LogLevel::Info;
  return LogLevel::Warn;
}

namespace {

class Logger {
 public:
  Logger(std::ostream& err, LogLevel level) : err_(err), level_(level) {}
  void warn(const std::string& m) const
  {
    if (level_ != LogLevel::Quiet) err_ << "warning: " << m << '\n';
  }
  void info(const std::string& m) const
  {
    if (level_ == LogLevel::Info) err_ << "info: " << m << '\n';
  }
  void ignored(const char* flag, ScenarioKind kind) const
  {
    warn(std::string(flag) + " has no effect on " + to_string(kind) + " scenarios");
  }

 private:
  std::ostream& err_;
  LogLevel level_;
};

struct Context {
  const Scenario& scenario;
  const Logger& log;
  fs::path base;  // directory of the config file
};

Profile profile_field(ObjectReader& r, const Context& ctx)
{
  const Json& p = r.at("profile");
  if (p.is_string()) {
    fs::path path = p.get<std::string>();
    if (path.is_relative()) path = ctx.base / path;
    return io::load_profile(path);
  }
  try {
    return io::profile_from_json(p);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("profile.") + e.what());
  }
}

void check_kind(ObjectReader& r, ScenarioKind kind)
{
  if (!r.has("kind")) return;
  const std::string k = r.string("kind");
  if (scenario_kind_from_string(k) != kind)
    throw ValidationError("config declares kind '" + k + "' but the subcommand is " + to_string(kind));
}

int run_simulate(const Context& ctx)
{
  const Json cfg = io::read_json(ctx.scenario.config);
  ObjectReader r(cfg, "");
  check_kind(r, ScenarioKind::Simulate);
  const Profile profile = profile_field(r, ctx);

  PropagationParams params;
  params.lambda = r.number("lambda_um", 1.0);
  params.dz = r.number("dz_um", params.dz);
  params.nonlinear_kappa = r.number("nonlinear_kappa", 0.0);
  const std::string planning = r.string("fft_planning", "estimate");
  if (planning == "measure")
    params.planning = FftPlanning::Measure;
  else if (planning == "patient")
    params.planning = FftPlanning::Patient;
  else if (planning != "estimate")
    throw ValidationError("fft_planning: expected estimate, measure or patient");
  if (ctx.scenario.overrides.dz) params.dz = *ctx.scenario.overrides.dz;
  if (!(params.dz > 0.0)) throw ValidationError("dz_um must be positive");

  int dims = 1, points = 512;
  double extent = 16.0;
  if (r.has("grid")) {
    ObjectReader g(r.at("grid"), "grid");
    dims = g.integer("dims", dims);
    points = g.integer("points", points);
    extent = g.number("extent_um", extent);
    g.finish();
  }
  if (ctx.scenario.overrides.grid_points) points = *ctx.scenario.overrides.grid_points;
  const TransverseGrid grid(dims, extent, points);
  const double width = r.number("mode_width_um", 1.0);

  FieldSpec spec = ModeIndex{};
  if (r.has("initial")) {
    ObjectReader in(r.at("initial"), "initial");
    const std::string type = in.string("type");
    if (type == "mode") {
      spec = ModeIndex{in.integer("n1", 0), in.integer("n2", 0)};
    } else if (type == "coherent") {
      CoherentLabel c;
      c.alpha = Complex(in.number("alpha_re", 0.0), in.number("alpha_im", 0.0));
      c.beta = Complex(in.number("beta_re", 0.0), in.number("beta_im", 0.0));
      spec = c;
    } else {
      throw ValidationError(in.where("type") + ": expected mode or coherent");
    }
    in.finish();
  }

  TraceOptions trace;
  trace.mode_width = width;
  if (r.has("trace")) {
    ObjectReader t(r.at("trace"), "trace");
    trace.sample_every = t.integer("sample_every", 0);
    if (t.has("overlaps")) {
      const Json& list = t.at("overlaps");
      if (!list.is_array()) throw ValidationError("trace.overlaps: expected an array of [n1, n2]");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const Json& m = list[i];
        if (!m.is_array() || m.size() != 2 || !m[0].is_number_integer() || !m[1].is_number_integer())
          throw ValidationError("trace.overlaps[" + std::to_string(i) + "]: expected [n1, n2]");
        trace.overlaps.push_back(ModeIndex{m[0].get<int>(), m[1].get<int>()});
      }
    }
    t.finish();
  }
  const double z_end = r.number("z_end_um", profile.z_end());
  const std::string format = r.string("field_format", "both");
  if (format != "csv" && format != "binary" && format != "both")
    throw ValidationError("field_format: expected csv, binary or both");
  r.finish();
  if (ctx.scenario.overrides.seed) ctx.log.ignored("--seed", ScenarioKind::Simulate);
  if (ctx.scenario.overrides.cutoff) ctx.log.ignored("--cutoff", ScenarioKind::Simulate);

  check_realizability(profile, 0.5 * extent, dims);
  const ParaxialReport px = paraxial_check(profile, params);
  if (px.flagged) ctx.log.warn("paraxial validity ratio " + std::to_string(px.ratio) + " near z = " + std::to_string(px.z_at_max));

  const Field field = initialize_field(grid, spec, width);
  ctx.log.info("propagating to z = " + std::to_string(z_end));
  const PropagationResult res = propagate(field, profile, params, z_end, trace);
  for (const auto& w : res.warnings) ctx.log.warn(w);

  const fs::path& out = ctx.scenario.out_dir;
  io::write_csv(out / "trace.csv", io::trace_table(res.trace, dims, trace.overlaps));
  if (format != "binary") io::write_csv(out / "field.csv", io::field_table(res.field));
  if (format != "csv") io::write_field_binary(out / "field.bin", res.field);
  ctx.log.info(std::to_string(res.steps) + " steps");
  return 0;
}

CMatrix named_target(const Json& t, const QulbitCode& code, const std::string& where)
{
  if (!t.is_string()) return io::matrix_from_json(t, where);
  const std::string name = t.get<std::string>();
  const Index d = code.logical_dim;
  if (name == "identity") return CMatrix::Identity(d, d);
  if (name == "cnot") return cnot_matrix(code);
  if (d != 2) throw ValidationError(where + ": '" + name + "' needs a single-qulbit code");
  CMatrix m(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  if (name == "x")
    m << 0, 1, 1, 0;
  else if (name == "y")
    m << 0, Complex(0, -1), Complex(0, 1), 0;
  else if (name == "z")
    m << 1, 0, 0, -1;
  else if (name == "hadamard")
    m << r, r, r, -r;
  else
    throw ValidationError(where + ": unknown target '" + name + "'");
  return m;
}

int run_gate(const Context& ctx)
{
  const Json cfg = io::read_json(ctx.scenario.config);
  ObjectReader r(cfg, "");
  check_kind(r, ScenarioKind::Gate);
  const CodeKind kind = code_kind_from_string(r.string("code"));
  if (kind == CodeKind::Custom) throw ValidationError("code: custom codes are library-only");
  int cutoff = r.integer("cutoff", kDefaultCutoff);
  if (ctx.scenario.overrides.cutoff) cutoff = *ctx.scenario.overrides.cutoff;
  const double lambda = r.number("lambda_um", 1.0);
  const Profile profile = profile_field(r, ctx);
  const FockSpace space(cutoff, 2);
  const QulbitCode code = make_code(kind, space);
  std::optional<CMatrix> target;
  if (r.has("target")) target = named_target(r.at("target"), code, "target");
  r.finish();
  if (ctx.scenario.overrides.seed) ctx.log.ignored("--seed", ScenarioKind::Gate);
  if (ctx.scenario.overrides.grid_points) ctx.log.ignored("--grid-points", ScenarioKind::Gate);
  if (ctx.scenario.overrides.dz) ctx.log.ignored("--dz", ScenarioKind::Gate);
  if (!code.has_headroom) ctx.log.warn("code states come within 4 quanta of the cutoff");

  CMatrix u = CMatrix::Identity(space.dim(), space.dim());
  for (const auto& seg : profile.segments()) {
    const SegmentUnitary su = segment_unitary(seg, space, lambda);
    for (const auto& w : su.warnings) ctx.log.warn(w);
    u = su.unitary * u;
  }
  if (!profile.empty()) compose_profile_unitary(profile, space, lambda);  // mode-width consistency
  const GateReport report = extract_gate(u, code, target);
  io::write_json(ctx.scenario.out_dir / "gate_report.json", io::gate_report_to_json(report, code));
  return 0;
}

int run_synth(const Context& ctx)
{
  Json cfg = io::read_json(ctx.scenario.config);
  if (!cfg.is_object()) throw ValidationError("config: expected a JSON object");
  if (cfg.contains("kind")) {
    if (!cfg["kind"].is_string() || scenario_kind_from_string(cfg["kind"].get<std::string>()) != ScenarioKind::Synth)
      throw ValidationError("config declares a kind other than synth");
    cfg.erase("kind");
  }
  if (ctx.scenario.overrides.seed) cfg["seed"] = *ctx.scenario.overrides.seed;
  if (ctx.scenario.overrides.cutoff) cfg["cutoff"] = *ctx.scenario.overrides.cutoff;
  if (cfg.contains("target") && cfg["target"].is_string()) {
    if (!cfg.contains("code") || !cfg["code"].is_string()) throw ValidationError("code: missing required key");
    const int cutoff = cfg.value("cutoff", kDefaultCutoff);
    const QulbitCode code = make_code(code_kind_from_string(cfg["code"].get<std::string>()), FockSpace(cutoff, 2));
    cfg["target"] = io::matrix_to_json(named_target(cfg["target"], code, "target"));
  }
  const SynthesisProblem problem = io::synthesis_problem_from_json(cfg);
  if (ctx.scenario.overrides.grid_points) ctx.log.ignored("--grid-points", ScenarioKind::Synth);
  if (ctx.scenario.overrides.dz) ctx.log.ignored("--dz", ScenarioKind::Synth);

  const SynthesisResult res = synthesize(problem);
  if (!res.converged) ctx.log.warn("optimizer stopped on the evaluation budget");
  ctx.log.info("fidelity " + std::to_string(res.fidelity) + ", leakage " + std::to_string(res.leakage));
  Json out;
  out["problem"] = io::synthesis_problem_to_json(problem);
  out["result"] = io::synthesis_result_to_json(res);
  io::write_json(ctx.scenario.out_dir / "synthesis_result.json", out);
  io::write_csv(ctx.scenario.out_dir / "convergence.csv", io::convergence_table(res.trace));
  return 0;
}

std::map<std::string, CMatrix> generator_registry(const FockSpace& space)
{
  std::map<std::string, CMatrix> reg;
  const GeneratorSet g = generator_set(space);
  for (std::size_t i = 0; i < g.names.size(); ++i) reg[g.names[i]] = g.matrices[i];
  const JordanSchwinger js = jordan_schwinger(space);
  reg["J3"] = js.j_3;
  reg["Jx"] = js.j_x();
  reg["Jy"] = js.j_y();
  reg["na"] = number_operator(space, 0);
  reg["nb"] = number_operator(space, 1);
  reg["kerr"] = reg["na"] * reg["nb"];
  return reg;
}

struct NamedSet {
  std::string name;
  std::vector<std::string> generators;
};

std::vector<NamedSet> default_sets(CodeKind kind)
{
  const std::vector<std::string> quadratic = {"number", "na", "nb", "J3", "Jx", "Jy", "xa", "xa2", "xb", "xb2", "xaxb"};
  if (kind == CodeKind::N7) return {{"su2", {"J3", "Jx", "Jy"}}, {"quadratic", quadratic}};
  std::vector<std::string> with_kerr = quadratic;
  with_kerr.push_back("kerr");
  return {{"quadratic", quadratic}, {"kerr_augmented", with_kerr}};
}

int run_reachability(const Context& ctx)
{
  const Json cfg = io::read_json(ctx.scenario.config);
  ObjectReader r(cfg, "");
  check_kind(r, ScenarioKind::Reachability);
  const CodeKind kind = code_kind_from_string(r.string("code"));
  if (kind == CodeKind::Custom) throw ValidationError("code: custom codes are library-only");
  int cutoff = r.integer("cutoff", kDefaultCutoff);
  if (ctx.scenario.overrides.cutoff) cutoff = *ctx.scenario.overrides.cutoff;
  std::vector<NamedSet> sets = default_sets(kind);
  if (r.has("sets")) {
    sets.clear();
    const Json& list = r.at("sets");
    if (!list.is_array()) throw ValidationError("sets: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      ObjectReader s(list[i], "sets[" + std::to_string(i) + "]");
      NamedSet ns{s.string("name"), {}};
      const Json& gens = s.at("generators");
      if (!gens.is_array()) throw ValidationError(s.where("generators") + ": expected an array of names");
      for (const auto& g : gens) {
        if (!g.is_string()) throw ValidationError(s.where("generators") + ": expected names");
        ns.generators.push_back(g.get<std::string>());
      }
      s.finish();
      sets.push_back(std::move(ns));
    }
  }
  r.finish();
  if (ctx.scenario.overrides.seed) ctx.log.ignored("--seed", ScenarioKind::Reachability);
  if (ctx.scenario.overrides.grid_points) ctx.log.ignored("--grid-points", ScenarioKind::Reachability);
  if (ctx.scenario.overrides.dz) ctx.log.ignored("--dz", ScenarioKind::Reachability);

  const FockSpace space(cutoff, 2);
  const QulbitCode code = make_code(kind, space);
  const auto registry = generator_registry(space);
  Json report;
  report["code"] = code.name;
  report["cutoff"] = cutoff;
  report["logical_dim"] = code.logical_dim;
  report["full_algebra_dim"] = code.logical_dim * code.logical_dim;
  Json out_sets = Json::array();
  for (const auto& set : sets) {
    std::vector<CMatrix> accepted;
    Json acc = Json::array(), rej = Json::array();
    for (const auto& name : set.generators) {
      const auto it = registry.find(name);
      if (it == registry.end()) throw ValidationError("unknown generator '" + name + "' in set " + set.name);
      const double leak = generator_leakage(it->second, code);
      if (leak < 1e-10) {
        accepted.push_back(it->second);
        acc.push_back(name);
      } else {
        rej.push_back(Json{{"name", name}, {"leakage", leak}});
      }
    }
    const LieClosure lc = lie_closure(accepted, code);
    out_sets.push_back(Json{{"name", set.name},
                            {"generators", set.generators},
                            {"accepted", acc},
                            {"rejected", rej},
                            {"dimension", lc.dimension}});
  }
  report["sets"] = out_sets;
  io::write_json(ctx.scenario.out_dir / "reachability.json", report);
  return 0;
}

int run_lattice(const Context& ctx)
{
  const Json cfg = io::read_json(ctx.scenario.config);
  ObjectReader r(cfg, "");
  check_kind(r, ScenarioKind::Lattice);
  const int m_range = r.integer("m_range", 1);
  const int n_range = r.integer("n_range", 1);
  if (m_range < 0 || n_range < 0) throw ValidationError("m_range and n_range must be non-negative");
  std::vector<LatticeIndex> excluded{LatticeIndex{}};
  if (r.has("excluded")) {
    excluded.clear();
    const Json& list = r.at("excluded");
    if (!list.is_array()) throw ValidationError("excluded: expected an array of [m1, n1, m2, n2]");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Json& e = list[i];
      if (!e.is_array() || e.size() != 4 || !std::all_of(e.begin(), e.end(), [](const Json& v) { return v.is_number_integer(); }))
        throw ValidationError("excluded[" + std::to_string(i) + "]: expected [m1, n1, m2, n2]");
      excluded.push_back(LatticeIndex{e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), e[3].get<int>()});
    }
  }
  r.finish();
  const auto& o = ctx.scenario.overrides;
  if (o.seed || o.grid_points || o.cutoff || o.dz) ctx.log.warn("overrides have no effect on lattice scenarios");
  io::write_csv(ctx.scenario.out_dir / "lattice.csv", io::lattice_table(von_neumann_lattice(m_range, n_range, excluded)));
  return 0;
}

}  // namespace

int run(const Scenario& scenario, std::ostream& err, LogLevel level)
{
  const Logger log(err, level);
  try {
    if (!fs::exists(scenario.config)) throw ValidationError("config file not found: " + scenario.config.string());
    fs::create_directories(scenario.out_dir);
    const Context ctx{scenario, log, fs::absolute(scenario.config).parent_path()};
    switch (scenario.kind) {
      case ScenarioKind::Simulate:
        return run_simulate(ctx);
      case ScenarioKind::Gate:
        return run_gate(ctx);
      case ScenarioKind::Synth:
        return run_synth(ctx);
      case ScenarioKind::Reachability:
        return run_reachability(ctx);
      case ScenarioKind::Lattice:
        return run_lattice(ctx);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace qlfiber::cli
