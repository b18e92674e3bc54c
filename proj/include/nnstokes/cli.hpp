#ifndef NNSTOKES_CLI_HPP
#define NNSTOKES_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nnstokes/experiments.hpp"

namespace nnstokes {

/// Exit status for malformed or out-of-range configuration (EX_USAGE).
constexpr int kExitUsage = 64;

struct RunConfig {
  Study study = Study::Mms;
  StudyConfig config;
  std::filesystem::path out;  // default runs/<study>
  std::optional<std::filesystem::path> config_file;
  bool dry_run = false;
  bool force = false;
};

/// Strict reader for the JSON run configuration. Unknown keys and wrong types
/// throw ConfigError with the key path; the result is validated.
StudyConfig study_config_from_json(const nlohmann::json& j, StudyConfig base = {});

/// Parses `nnstokes <study> [flags]` (arguments without the program name).
/// A config file is read first; flags override it.
RunConfig parse_config(const std::vector<std::string>& args);

/// Effective configuration as written to <out>/config.json.
nlohmann::json effective_config(const RunConfig& run);

/// Runs the study and writes its artifacts. Returns 0 when every assertion
/// passed, 1 on assertion failures, 2 on solver failures, kExitUsage when the
/// output directory is taken.
int dispatch(const RunConfig& run, std::ostream& log);

/// Full entry point: parse, dispatch, map errors to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

}  // namespace nnstokes

#endif  // NNSTOKES_CLI_HPP
