#pragma once

#include "nplap/grid.hpp"
#include "nplap/solver.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace nplap {

inline constexpr int kSchemaVersion = 1;

/// Raised when an artifact cannot be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Writes `<stem>.bin` (little-endian float64, storage order) and `<stem>.json` (layout).
void write_solution(const ScalarField& u, const std::filesystem::path& stem);

/// Reloads a field written by write_solution; values are bitwise equal.
ScalarField read_solution(const std::filesystem::path& stem);

/// Pretty JSON with a trailing newline; keys sorted, shortest round-trip doubles.
std::string dump_json(const nlohmann::json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);

/// Report without wall-clock time so that reruns are byte-identical.
nlohmann::json to_json(const SolveReport& rep);

/// "iter residual dt" lines.
std::string iteration_log(const SolveReport& rep);

}  // namespace nplap
