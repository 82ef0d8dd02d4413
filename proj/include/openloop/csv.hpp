#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace openloop {

struct Anchors;

/// Header of every score file: env,method,variant,seed,generation,return
inline constexpr const char* kScoreHeader = "env,method,variant,seed,generation,return";

struct ScoreRow {
  std::string env;
  std::string method;
  std::string variant;
  std::uint64_t seed = 0;
  std::int64_t generation = 0;
  double episodic_return = 0.0;
};

/// Shortest decimal representation that round-trips.
[[nodiscard]] std::string format_double(double value);

/// Throws std::invalid_argument on a missing/wrong header or a malformed row.
[[nodiscard]] std::vector<ScoreRow> read_score_csv(const std::string& path);
[[nodiscard]] std::string score_csv(const std::vector<ScoreRow>& rows);
void write_text_file(const std::string& path, const std::string& contents);

/// env,r_min,r_max
[[nodiscard]] std::map<std::string, Anchors> read_anchor_csv(const std::string& path);

}  // namespace openloop
