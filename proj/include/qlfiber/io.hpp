// Serialization: profiles, gate reports and synthesis records as JSON; traces,
// lattices and field samples as CSV; fields as a little-endian binary snapshot.
//
// Binary field layout (all little-endian):
//   char[4]  "QLFD"
//   uint32   version (1)
//   uint32   dims (1 or 2)
//   uint32   points per axis
//   float64  extent
//   float64  z
//   float64  re, im interleaved, points^dims pairs, x slowest
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlfiber/gates.hpp"
#include "qlfiber/profiles.hpp"
#include "qlfiber/propagator.hpp"
#include "qlfiber/synth.hpp"

namespace qlfiber::io {

using Json = nlohmann::ordered_json;

// Reads keys from a JSON object and rejects unknown or missing ones. Error
// messages carry the position, e.g. "segments[2].a_per_um2".
class ObjectReader {
 public:
  ObjectReader(const Json& object, std::string path);

  bool has(const std::string& key) const;
  const Json& at(const std::string& key);
  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  int integer(const std::string& key);
  int integer(const std::string& key, int fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::string string(const std::string& key, const std::string& fallback);
  std::string where(const std::string& key) const;
  // Throws on any key that was never read.
  void finish() const;

 private:
  const Json& object_;
  std::string path_;
  std::vector<std::string> used_;
};

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& json);

Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& json, const std::string& path = "matrix");

Json profile_to_json(const Profile& profile);
Profile profile_from_json(const Json& json);
Profile load_profile(const std::filesystem::path& path);

Json gate_report_to_json(const GateReport& report, const QulbitCode& code);
GateReport gate_report_from_json(const Json& json);

Json synthesis_problem_to_json(const SynthesisProblem& problem);
SynthesisProblem synthesis_problem_from_json(const Json& json);
Json synthesis_result_to_json(const SynthesisResult& result);
SynthesisResult synthesis_result_from_json(const Json& json);

// Numeric CSV with a single header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// z, norm, mean_x, mean_px[, mean_y, mean_py], then |<n1,n2|psi>|^2 as overlap_<n1><n2>.
CsvTable trace_table(const std::vector<TraceRow>& trace, int dims, const std::vector<ModeIndex>& overlaps);
CsvTable convergence_table(const std::vector<ConvergencePoint>& trace);
// m1, n1, m2, n2, alpha_re, alpha_im, beta_re, beta_im.
CsvTable lattice_table(const std::vector<CoherentLabel>& labels);
// x[, y], re, im.
CsvTable field_table(const Field& field);

void write_field_binary(const std::filesystem::path& path, const Field& field);
Field read_field_binary(const std::filesystem::path& path);

}  // namespace qlfiber::io
