#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "soficlen/groupring.hpp"
#include "soficlen/meanlength.hpp"
#include "soficlen/oracles.hpp"
#include "soficlen/sofic.hpp"

namespace soficlen {

/// Malformed job file; the message starts with `source:line:`.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct ConfigSection {
  std::string name;  // empty for the top level
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(std::string_view key) const;
  std::vector<const ConfigEntry*> all(std::string_view key) const;
};

/// `key = value` lines grouped under `[section]` headers. `#` and `;` start
/// comments at the beginning of a line. Keys may repeat.
struct Config {
  std::string source;
  std::vector<ConfigSection> sections;

  static Config parse(std::istream& in, std::string source);
  const ConfigSection* section(std::string_view name) const;
  [[noreturn]] void fail(std::size_t line, const std::string& message) const;
};

enum class Quantity {
  MrkRelative,
  MrkFp,
  VrkFp,
  AdditionCheck,
  Folner,
  FiniteOracle,
  LaurentOracle,
  Defect,
  DirectFinite,
  OracleCompare,
};

std::string quantity_name(Quantity q);
Quantity parse_quantity(std::string_view text);

struct JobSpec {
  std::string source;
  Quantity quantity = Quantity::VrkFp;
  GroupPtr group;
  CoefficientRing ring = CoefficientRing::integers();

  // [sofic]
  std::string model;
  SoficSchedule schedule;
  std::vector<std::vector<std::size_t>> torus_dims;

  // [matrix], [inverse]
  std::optional<GroupRingMatrix> matrix;
  std::optional<GroupRingMatrix> inverse;

  // [pair]
  std::size_t ambient = 0;
  std::vector<FreeModuleVector> A;
  std::vector<FreeModuleVector> B;
  int f_radius = 1;

  // [folner]
  std::vector<FolnerBox> boxes;

  // [oracle]
  std::string oracle;
  std::uint64_t oracle_seed = 1;
  double compare_tolerance = 0.02;

  // [tolerance]
  double snap_tolerance = 0.05;
  double stabilization_tolerance = 0.01;
  double addition_tolerance = 0.02;

  // [defect]
  int defect_radius = 1;

  // [output]
  std::string json_name;
  std::string csv_name;

  SoficFactory factory() const;
};

/// Parses and validates a job; relative file references resolve against
/// base_dir. Throws ConfigError.
JobSpec parse_job(std::istream& in, const std::string& source, const std::filesystem::path& base_dir);
JobSpec load_job(const std::filesystem::path& path);

struct RunOptions {
  std::size_t jobs = 1;
  std::ostream* log = nullptr;
};

struct JobOutcome {
  /// 0 success, 2 failed comparison or tolerance.
  int exit_code = 0;
  std::string json;
  std::string csv;
  std::vector<std::string> warnings;
};

JobOutcome run_job(const JobSpec& job, const RunOptions& options = {});

}  // namespace soficlen
