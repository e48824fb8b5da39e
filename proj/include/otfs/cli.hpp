#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "otfs/config.hpp"

namespace otfs::cli {

enum class Subcommand { Sweep, Cdf, Trial, Complexity };

struct Invocation {
  Subcommand subcommand = Subcommand::Sweep;
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<Detector>> detectors;
  LabConfig config;  // overrides applied, validated
};

class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, int exit_code = 2)
      : std::runtime_error(what), exit_code(exit_code) {}
  int exit_code;
};

/// --help / --version; `what()` is the text to print with exit status 0.
class InformationalExit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Invocation parse_and_validate(int argc, const char* const* argv);

/// Runs the invocation; returns the process exit status. Files written by a
/// failed run are removed.
int dispatch(const Invocation& inv, std::ostream& out, std::ostream& err);

/// parse_and_validate + dispatch with diagnostics on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace otfs::cli
