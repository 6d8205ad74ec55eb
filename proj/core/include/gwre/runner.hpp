#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gwre/config.hpp"
#include "gwre/criteria.hpp"

namespace gwre {

inline constexpr const char* kVersion = "0.1.0";

/// Static partition of [0, n) over `threads` workers. `fn(i)` must write its
/// result into a pre-allocated slot i; determinism comes from per-index
/// seeding, not from scheduling.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

struct RunManifest {
  std::string config_hash;  // 16 hex digits
  std::uint64_t seed = 0;
  std::string subcommand;
  std::vector<std::string> files;
  double wall_ms = 0.0;
  std::string version = kVersion;

  std::string to_json() const;
};

/// Dispatches one subcommand (simulate, ray, ldp, classify, phase-diagram),
/// writes CSV outputs plus manifest.json into config.out_dir.
RunManifest run(const std::string& subcommand, const ExperimentConfig& config);

/// Classification entry shared by `classify` and `phase-diagram`: dispatches
/// on reinforcement / kernel variant, with `b` taken from the offspring law.
RegimeReport classify_config(const ExperimentConfig& config);
RegimeReport classify_config(const ExperimentConfig& config, double b);

/// %.17g rendering used for every floating-point CSV field.
std::string fmt_double(double v);

/// Round-trip reader for the CSVs written here: returns (header lines
/// without '#', rows of string fields).
struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvDocument read_csv(const std::string& path);

}  // namespace gwre
