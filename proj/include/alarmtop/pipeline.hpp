#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alarmtop/alarm_log.hpp"
#include "alarmtop/conformance.hpp"
#include "alarmtop/discovery_etm.hpp"
#include "alarmtop/preprocess.hpp"
#include "alarmtop/process_tree.hpp"

namespace alarmtop {

enum class Algorithm { Im, Etm };

struct PreprocessOptions {
  Duration chatter_window = std::chrono::seconds(60);
  std::optional<Duration> cutoff;
  bool first_occurrence = true;
  double min_support = 0.0;
};

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir;
  /// Empty means the input file stem.
  std::string fault_label;
  PreprocessOptions preprocess;
  Algorithm algorithm = Algorithm::Im;
  double noise_threshold = 0.3;
  /// Used when algorithm is Etm; its seed is replaced by `seed`.
  EtmConfig etm;
  double split = 0.667;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// `90s`, `15m`, `21h`; a bare number is seconds. Throws std::invalid_argument.
Duration parse_duration(std::string_view text);
/// `f,p,g,s`, e.g. `10,5,1,1`. Throws std::invalid_argument.
QualityWeights parse_weights(std::string_view text);

/// Reads an alarm CSV and builds its dataset. Throws Error naming the path
/// when the file cannot be opened, plus the parser's errors.
Dataset load_dataset(const std::filesystem::path& path, std::string fault_label = {});
/// Dataset as ALM-only alarm CSV.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it
/// over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Chattering removal, transitional truncation (only with a cutoff),
/// first-occurrence filtering and insignificant-tag removal, in that order.
std::pair<Dataset, std::vector<PreprocessReport>> preprocess_dataset(const Dataset& ds,
                                                                     const PreprocessOptions& options);

ProcessTree discover(const Dataset& ds, const PipelineConfig& cfg);

struct PipelineResult {
  ProcessTree tree;
  QualityReport quality;
  std::vector<PreprocessReport> reports;
};

/// The end-to-end run. Writes dataset.dotted.csv (the raw dataset, for
/// choosing the cutoff), preprocess.report.txt, model.tree.txt, model.pnml,
/// model.dot and quality.json into cfg.output_dir. The model is discovered on
/// the training split and evaluated on both splits.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace alarmtop
