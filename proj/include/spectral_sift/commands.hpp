#pragma once

#include "spectral_sift/pipeline.hpp"

#include <iosfwd>
#include <string>

namespace spectral_sift {

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitModelQuality = 2;

// Each command writes its files under config.out, progress to `log`, and
// returns the machine-readable result that the front end prints to stdout.
Json cmd_fit(const RunConfig& config, std::ostream& log);
Json cmd_apply(const RunConfig& config, std::ostream& log);
Json cmd_select_bands(const RunConfig& config, std::ostream& log);
Json cmd_synth(const RunConfig& config, const std::string& name, std::ostream& log);

/// Summary of a model file, as JSON.
Json inspect_model(const std::string& path);
/// The same summary as an aligned text report.
std::string format_inspection(const Json& summary);

/// Full front end: parses argv, runs the command, prints results, returns the
/// process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace spectral_sift
