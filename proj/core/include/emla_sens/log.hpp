#pragma once

#include <string>

namespace emla {

enum class LogLevel { debug = 0, info = 1, warn = 2 };

/// Threshold parsed once from the EMLA_SENS_LOG environment variable
/// ("debug", "info" or "warn"; unset or unrecognized means "info").
LogLevel log_threshold();

/// Write one line to stderr if `level` passes the threshold. Thread safe.
void log_message(LogLevel level, const std::string& text);

void log_debug(const std::string& text);
void log_info(const std::string& text);
void log_warn(const std::string& text);

/// Emit a warning at most once per distinct key for the lifetime of the
/// process. Used for conditions that would otherwise flood stderr when they
/// hold at thousands of consecutive integration steps (e.g. a trajectory that
/// stays near a Jacobian singularity).
void warn_once(const std::string& key, const std::string& text);

}  // namespace emla
