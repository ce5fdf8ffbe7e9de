#include "qlfiber/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace qlfiber::io {

ObjectReader::ObjectReader(const Json& object, std::string path) : object_(object), path_(std::move(path))
{
  if (!object_.is_object()) throw ValidationError(path_ + ": expected a JSON object");
}

std::string ObjectReader::where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool ObjectReader::has(const std::string& key) const { return object_.contains(key); }

const Json& ObjectReader::at(const std::string& key)
{
  if (!object_.contains(key)) throw ValidationError(where(key) + ": missing required key");
  used_.push_back(key);
  return object_.at(key);
}

double ObjectReader::number(const std::string& key)
{
  const Json& v = at(key);
  if (!v.is_number()) throw ValidationError(where(key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(where(key) + ": must be finite");
  return d;
}

double ObjectReader::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

int ObjectReader::integer(const std::string& key)
{
  const Json& v = at(key);
  if (!v.is_number_integer()) throw ValidationError(where(key) + ": expected an integer");
  return v.get<int>();
}

int ObjectReader::integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

bool ObjectReader::boolean(const std::string& key, bool fallback)
{
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_boolean()) throw ValidationError(where(key) + ": expected true or false");
  return v.get<bool>();
}

std::string ObjectReader::string(const std::string& key)
{
  const Json& v = at(key);
  if (!v.is_string()) throw ValidationError(where(key) + ": expected a string");
  return v.get<std::string>();
}

std::string ObjectReader::string(const std::string& key, const std::string& fallback)
{
  return has(key) ? string(key) : fallback;
}

void ObjectReader::finish() const
{
  for (const auto& item : object_.items())
    if (std::find(used_.begin(), used_.end(), item.key()) == used_.end())
      throw ValidationError(where(item.key()) + ": unknown key");
}

Json read_json(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& json)
{
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << json.dump(2) << '\n';
}

Json matrix_to_json(const CMatrix& m)
{
  Json re = Json::array(), im = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array(), c = Json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return Json{{"re", re}, {"im", im}};
}

CMatrix matrix_from_json(const Json& json, const std::string& path)
{
  ObjectReader r(json, path);
  const Json& re = r.at("re");
  const Json& im = r.at("im");
  r.finish();
  auto rows_of = [&](const Json& part, const std::string& name) {
    if (!part.is_array() || part.empty()) throw ValidationError(r.where(name) + ": expected a non-empty array of rows");
    return part.size();
  };
  const std::size_t rows = rows_of(re, "re");
  if (rows_of(im, "im") != rows) throw ValidationError(path + ": re and im row counts differ");
  const std::size_t cols = re[0].is_array() ? re[0].size() : 0;
  CMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (const auto* part : {&re, &im}) {
      const Json& row = (*part)[i];
      if (!row.is_array() || row.size() != cols)
        throw ValidationError(path + (part == &re ? ".re[" : ".im[") + std::to_string(i) + "]: ragged row");
      for (const auto& v : row)
        if (!v.is_number())
          throw ValidationError(path + (part == &re ? ".re[" : ".im[") + std::to_string(i) + "]: non-numeric entry");
    }
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = Complex(re[i][j].get<double>(), im[i][j].get<double>());
  }
  return m;
}

Json profile_to_json(const Profile& profile)
{
  Json segs = Json::array();
  for (const auto& seg : profile.segments()) {
    if (const auto* q = std::get_if<QuadraticSegment>(&seg)) {
      segs.push_back(Json{{"type", "quadratic"},
                          {"z0_um", q->z0},
                          {"z1_um", q->z1},
                          {"a_per_um2", q->a},
                          {"b_per_um2", q->b},
                          {"d_per_um2", q->d},
                          {"e_per_um", q->e},
                          {"f_per_um", q->f},
                          {"l", q->l},
                          {"n0", q->n0},
                          {"mode_width_um", q->mode_width}});
    } else {
      const auto& k = std::get<KerrSegment>(seg);
      segs.push_back(
          Json{{"type", "kerr"}, {"z0_um", k.z0}, {"z1_um", k.z1}, {"eta_per_um", k.eta}, {"n0", k.n0}});
    }
  }
  return Json{{"transition_length_um", profile.transition_length()}, {"segments", segs}};
}

Profile profile_from_json(const Json& json)
{
  ObjectReader r(json, "");
  const double transition = r.number("transition_length_um", 1.0);
  const Json& list = r.at("segments");
  r.finish();
  if (!list.is_array()) throw ValidationError("segments: expected an array");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < list.size(); ++i) {
    ObjectReader s(list[i], "segments[" + std::to_string(i) + "]");
    const std::string type = s.string("type");
    if (type == "quadratic") {
      QuadraticSegment q;
      q.z0 = s.number("z0_um");
      q.z1 = s.number("z1_um");
      q.a = s.number("a_per_um2", 0.0);
      q.b = s.number("b_per_um2", 0.0);
      q.d = s.number("d_per_um2", 0.0);
      q.e = s.number("e_per_um", 0.0);
      q.f = s.number("f_per_um", 0.0);
      q.l = s.number("l", 0.0);
      q.n0 = s.number("n0", 1.0);
      q.mode_width = s.number("mode_width_um", 1.0);
      if (!(q.n0 > 0.0)) throw ValidationError(s.where("n0") + ": must be positive");
      if (!(q.mode_width > 0.0)) throw ValidationError(s.where("mode_width_um") + ": must be positive");
      segs.emplace_back(q);
    } else if (type == "kerr") {
      KerrSegment k;
      k.z0 = s.number("z0_um");
      k.z1 = s.number("z1_um");
      k.eta = s.number("eta_per_um");
      k.n0 = s.number("n0", 1.0);
      if (!(k.n0 > 0.0)) throw ValidationError(s.where("n0") + ": must be positive");
      segs.emplace_back(k);
    } else {
      throw ValidationError(s.where("type") + ": unknown segment type '" + type + "'");
    }
    s.finish();
  }
  return Profile(std::move(segs), transition);
}

Profile load_profile(const std::filesystem::path& path)
{
  try {
    return profile_from_json(read_json(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Json gate_report_to_json(const GateReport& report, const QulbitCode& code)
{
  Json j;
  j["code"] = code.name;
  j["labels"] = code.labels;
  j["extracted"] = matrix_to_json(report.extracted);
  j["leakage"] = report.leakage;
  j["fidelity"] = report.fidelity ? Json(*report.fidelity) : Json(nullptr);
  j["global_phase_rad"] = report.global_phase;
  j["off_block_norm"] = report.off_block_norm;
  return j;
}

GateReport gate_report_from_json(const Json& json)
{
  ObjectReader r(json, "");
  r.string("code");
  r.at("labels");
  GateReport g;
  g.extracted = matrix_from_json(r.at("extracted"), "extracted");
  g.leakage = r.number("leakage");
  if (!r.at("fidelity").is_null()) g.fidelity = r.number("fidelity");
  g.global_phase = r.number("global_phase_rad");
  g.off_block_norm = r.number("off_block_norm");
  r.finish();
  return g;
}

Json synthesis_problem_to_json(const SynthesisProblem& p)
{
  Json free = Json::object();
  for (const auto& [key, b] : p.free_parameters) free[key] = Json::array({b.lo, b.hi});
  return Json{{"target", matrix_to_json(p.target)},
              {"code", to_string(p.code)},
              {"cutoff", p.cutoff},
              {"backend", to_string(p.backend)},
              {"lambda_um", p.lambda},
              {"max_segments", p.max_segments},
              {"leakage_weight", p.leakage_weight},
              {"seed", p.seed},
              {"restarts", p.restarts},
              {"allow_kerr", p.allow_kerr},
              {"max_evaluations", p.max_evaluations},
              {"n0", p.n0},
              {"mode_width_um", p.mode_width},
              {"free_parameters", free}};
}

SynthesisProblem synthesis_problem_from_json(const Json& json)
{
  ObjectReader r(json, "");
  SynthesisProblem p;
  p.target = matrix_from_json(r.at("target"), "target");
  p.code = code_kind_from_string(r.string("code"));
  p.cutoff = r.integer("cutoff", p.cutoff);
  p.backend = backend_from_string(r.string("backend", to_string(p.backend)));
  p.lambda = r.number("lambda_um", p.lambda);
  p.max_segments = r.integer("max_segments", p.max_segments);
  p.leakage_weight = r.number("leakage_weight", p.leakage_weight);
  if (r.has("seed")) {
    const Json& s = r.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ValidationError(r.where("seed") + ": expected a non-negative integer");
    p.seed = s.get<std::uint64_t>();
  }
  p.restarts = r.integer("restarts", p.restarts);
  p.allow_kerr = r.boolean("allow_kerr", p.allow_kerr);
  p.max_evaluations = r.integer("max_evaluations", p.max_evaluations);
  p.n0 = r.number("n0", p.n0);
  p.mode_width = r.number("mode_width_um", p.mode_width);
  if (r.has("free_parameters")) {
    const Json& free = r.at("free_parameters");
    if (!free.is_object()) throw ValidationError("free_parameters: expected an object");
    for (const auto& item : free.items()) {
      const Json& b = item.value();
      if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
        throw ValidationError("free_parameters." + item.key() + ": expected [lo, hi]");
      p.free_parameters[item.key()] = Bounds{b[0].get<double>(), b[1].get<double>()};
    }
  }
  r.finish();
  for (const auto& [key, b] : p.free_parameters) {
    default_bounds(SynthesisProblem{}, key);  // rejects unknown keys
    if (b.hi < b.lo) throw ValidationError("free_parameters." + key + ": lo > hi");
  }
  return p;
}

Json synthesis_result_to_json(const SynthesisResult& res)
{
  Json j;
  j["backend"] = to_string(res.backend);
  j["profile"] = res.profile ? profile_to_json(*res.profile) : Json(nullptr);
  Json rot = Json::array();
  for (const auto& s : res.rotations)
    rot.push_back(Json{{"theta_3", s.theta_3}, {"theta_x", s.theta_x}, {"theta_y", s.theta_y}, {"theta_kerr", s.theta_kerr}});
  j["rotations"] = rot;
  j["achieved"] = matrix_to_json(res.achieved);
  j["fidelity"] = res.fidelity;
  j["leakage"] = res.leakage;
  j["objective"] = res.objective;
  j["iterations"] = res.iterations;
  j["evaluations"] = res.evaluations;
  j["converged"] = res.converged;
  j["best_restart"] = res.best_restart;
  return j;
}

SynthesisResult synthesis_result_from_json(const Json& json)
{
  ObjectReader r(json, "");
  SynthesisResult res;
  res.backend = backend_from_string(r.string("backend"));
  if (const Json& p = r.at("profile"); !p.is_null()) res.profile = profile_from_json(p);
  const Json& rot = r.at("rotations");
  if (!rot.is_array()) throw ValidationError("rotations: expected an array");
  for (std::size_t i = 0; i < rot.size(); ++i) {
    ObjectReader s(rot[i], "rotations[" + std::to_string(i) + "]");
    res.rotations.push_back(
        RotationStep{s.number("theta_3"), s.number("theta_x"), s.number("theta_y"), s.number("theta_kerr")});
    s.finish();
  }
  res.achieved = matrix_from_json(r.at("achieved"), "achieved");
  res.fidelity = r.number("fidelity");
  res.leakage = r.number("leakage");
  res.objective = r.number("objective");
  res.iterations = r.integer("iterations");
  res.evaluations = r.integer("evaluations");
  res.converged = r.boolean("converged", false);
  res.best_restart = r.integer("best_restart");
  r.finish();
  return res;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table)
{
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n' << std::setprecision(17);
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

CsvTable read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != t.header.size())
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable trace_table(const std::vector<TraceRow>& trace, int dims, const std::vector<ModeIndex>& overlaps)
{
  CsvTable t;
  t.header = {"z", "norm", "mean_x", "mean_px"};
  if (dims == 2) t.header.insert(t.header.end(), {"mean_y", "mean_py"});
  for (const auto& m : overlaps) t.header.push_back("overlap_" + std::to_string(m.n1) + std::to_string(m.n2));
  for (const auto& row : trace) {
    std::vector<double> v{row.z, row.norm, row.mean_x, row.mean_px};
    if (dims == 2) v.insert(v.end(), {row.mean_y, row.mean_py});
    for (const auto& c : row.overlaps) v.push_back(std::norm(c));
    t.rows.push_back(std::move(v));
  }
  return t;
}

CsvTable convergence_table(const std::vector<ConvergencePoint>& trace)
{
  CsvTable t;
  t.header = {"iteration", "objective", "fidelity", "leakage"};
  for (const auto& p : trace) t.rows.push_back({double(p.iteration), p.objective, p.fidelity, p.leakage});
  return t;
}

CsvTable lattice_table(const std::vector<CoherentLabel>& labels)
{
  CsvTable t;
  t.header = {"m1", "n1", "m2", "n2", "alpha_re", "alpha_im", "beta_re", "beta_im"};
  for (const auto& l : labels) {
    const LatticeIndex idx = l.lattice_index.value_or(LatticeIndex{});
    t.rows.push_back({double(idx.m1), double(idx.n1), double(idx.m2), double(idx.n2), l.alpha.real(), l.alpha.imag(),
                      l.beta.real(), l.beta.imag()});
  }
  return t;
}

CsvTable field_table(const Field& field)
{
  CsvTable t;
  const RVector x = field.grid.axis();
  const Index n = field.grid.points();
  if (field.grid.dims() == 1) {
    t.header = {"x", "re", "im"};
    for (Index i = 0; i < n; ++i) t.rows.push_back({x(i), field.psi(i).real(), field.psi(i).imag()});
  } else {
    t.header = {"x", "y", "re", "im"};
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const Complex v = field.psi(i * n + j);
        t.rows.push_back({x(i), x(j), v.real(), v.imag()});
      }
  }
  return t;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value)
{
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
  out.write(bytes, sizeof(U));
}

template <typename T>
T get_le(std::istream& in, const std::string& what)
{
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw ValidationError("truncated field file (" + what + ")");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= U(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

constexpr std::uint32_t kFieldVersion = 1;

}  // namespace

void write_field_binary(const std::filesystem::path& path, const Field& field)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write("QLFD", 4);
  put_le<std::uint32_t>(out, kFieldVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(field.grid.dims()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(field.grid.points()));
  put_le<double>(out, field.grid.extent());
  put_le<double>(out, field.z);
  for (Index i = 0; i < field.psi.size(); ++i) {
    put_le<double>(out, field.psi(i).real());
    put_le<double>(out, field.psi(i).imag());
  }
}

Field read_field_binary(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "QLFD") throw ValidationError(path.string() + ": bad magic");
  if (get_le<std::uint32_t>(in, "version") != kFieldVersion) throw ValidationError(path.string() + ": unsupported version");
  const auto dims = static_cast<int>(get_le<std::uint32_t>(in, "dims"));
  const auto points = static_cast<int>(get_le<std::uint32_t>(in, "points"));
  const double extent = get_le<double>(in, "extent");
  const double z = get_le<double>(in, "z");
  const TransverseGrid grid(dims, extent, points);
  CVector psi(grid.size());
  for (Index i = 0; i < psi.size(); ++i) {
    const double re = get_le<double>(in, "samples");
    const double im = get_le<double>(in, "samples");
    psi(i) = Complex(re, im);
  }
  Field f{psi, z, grid, 1.0};
  f.initial_norm = f.norm();
  return f;
}

}  // namespace qlfiber::io
