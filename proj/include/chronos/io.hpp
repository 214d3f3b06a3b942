#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chronos/model.hpp"
#include "chronos/sampler.hpp"
#include "chronos/solver.hpp"

namespace chronos {

/// Malformed document. The message carries the JSON path (or parser
/// position) of the offending value.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loaded model that failed validation; `report` lists every violation.
class ValidationFailed : public std::runtime_error {
 public:
  explicit ValidationFailed(ValidationReport r)
      : std::runtime_error("model failed validation: " + r.summary()), report(std::move(r)) {}
  ValidationReport report;
};

inline constexpr int kFormatVersion = 1;

/// Model file (JSON). Loading validates; throws ParseError or ValidationFailed.
PosmdpModel load_model(std::string_view text);
PosmdpModel load_model_file(const std::filesystem::path& path);
/// Structural load only, without the validation pass.
PosmdpModel parse_model(std::string_view text);
std::string dump_model(const PosmdpModel& model);

/// FNV-1a 64 over the canonical serialization, as 16 hex digits.
std::string model_hash(const PosmdpModel& model);

std::string dump_bank(const PosmdpModel& model, const SampleBank& bank);
SampleBank load_bank(const PosmdpModel& model, std::string_view text);

/// Solver output tied to the model it was computed for.
struct Policy {
  std::string model_hash;
  ValueFunction value;
  std::vector<IterationRecord> trace;
  bool converged = false;
  double epsilon = 0.0;
};

/// Wall times are left out so identical runs give identical bytes.
std::string dump_policy(const PosmdpModel& model, const Policy& policy);
Policy load_policy(const PosmdpModel& model, std::string_view text);
/// Throws ParseError if the policy was not computed for `model`.
void check_policy_matches(const PosmdpModel& model, const Policy& policy);

/// Reads a whole file; the error message names the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// printf("%.17g"); round-trips every finite double.
std::string format_double(double x);

}  // namespace chronos
