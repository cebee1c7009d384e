#include "alarmtop/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "alarmtop/discovery_im.hpp"
#include "alarmtop/error.hpp"
#include "alarmtop/petri_net.hpp"

namespace alarmtop {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  double v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw std::invalid_argument("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  return v;
}

std::string render_report(const std::vector<PreprocessReport>& reports) {
  std::ostringstream out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i) out << '\n';
    write_report(reports[i], out);
  }
  return out.str();
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("split fraction must lie strictly between 0 and 1");
  if (!(noise_threshold >= 0.0 && noise_threshold <= 1.0))
    throw std::invalid_argument("noise threshold must lie in [0, 1]");
  if (!(preprocess.min_support >= 0.0 && preprocess.min_support <= 1.0))
    throw std::invalid_argument("min support must lie in [0, 1]");
  if (preprocess.cutoff && preprocess.cutoff->count() <= 0) throw std::invalid_argument("cutoff must be positive");
  if (preprocess.chatter_window.count() < 0) throw std::invalid_argument("chatter window must not be negative");
  if (algorithm == Algorithm::Etm) {
    etm.validate();
    if (!(etm.target_overall >= 0.0 && etm.target_overall <= 1.0))
      throw std::invalid_argument("target must lie in [0, 1]");
  }
}

Duration parse_duration(std::string_view text) {
  double scale = 1000;
  if (!text.empty()) {
    switch (text.back()) {
      case 'h': scale = 3'600'000; text.remove_suffix(1); break;
      case 'm': scale = 60'000; text.remove_suffix(1); break;
      case 's': text.remove_suffix(1); break;
      default: break;
    }
  }
  const double v = parse_number(text, "duration");
  if (v < 0) throw std::invalid_argument("duration must not be negative");
  return Duration(static_cast<Duration::rep>(std::llround(v * scale)));
}

QualityWeights parse_weights(std::string_view text) {
  std::vector<double> w;
  while (true) {
    const auto comma = text.find(',');
    w.push_back(parse_number(text.substr(0, comma), "weight"));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (w.size() != 4) throw std::invalid_argument("weights need four values f,p,g,s");
  for (double x : w)
    if (x < 0) throw std::invalid_argument("weights must not be negative");
  if (w[0] + w[1] + w[2] + w[3] <= 0) throw std::invalid_argument("weights must not all be zero");
  return {w[0], w[1], w[2], w[3]};
}

Dataset load_dataset(const std::filesystem::path& path, std::string fault_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file: " + path.string());
  if (fault_label.empty()) fault_label = path.stem().string();
  return build_dataset(parse_alarm_csv(in), std::move(fault_label)).dataset;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ostringstream out;
  write_alarm_csv(dataset_to_log(ds), out);
  write_file_atomic(path, out.str());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw Error("cannot write file: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot write file: " + path.string());
  }
}

std::pair<Dataset, std::vector<PreprocessReport>> preprocess_dataset(const Dataset& ds,
                                                                     const PreprocessOptions& options) {
  std::vector<PreprocessReport> reports;
  auto step = [&](Preprocessed p) {
    reports.push_back(std::move(p.second));
    return std::move(p.first);
  };
  auto cur = step(remove_chattering(ds, options.chatter_window));
  if (options.cutoff) cur = step(truncate_transitional(cur, *options.cutoff));
  if (options.first_occurrence) cur = step(first_occurrence_filter(cur));
  cur = step(remove_insignificant_tags(cur, options.min_support));
  return {std::move(cur), std::move(reports)};
}

ProcessTree discover(const Dataset& ds, const PipelineConfig& cfg) {
  if (cfg.algorithm == Algorithm::Im) return discover_im(ds, cfg.noise_threshold);
  auto etm = cfg.etm;
  etm.seed = cfg.seed;
  return discover_etm(ds, etm).tree;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  if (!std::filesystem::exists(cfg.input)) throw Error("input file not found: " + cfg.input.string());
  const auto raw = load_dataset(cfg.input, cfg.fault_label);

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw Error("cannot create output directory: " + cfg.output_dir.string());
  const auto& dir = cfg.output_dir;

  std::ostringstream chart;
  export_dotted_chart(raw, chart, ChartFormat::Csv);
  write_file_atomic(dir / "dataset.dotted.csv", chart.str());

  auto [ds, reports] = preprocess_dataset(raw, cfg.preprocess);
  write_file_atomic(dir / "preprocess.report.txt", render_report(reports));
  if (ds.empty()) throw EmptyDataset();

  auto [train, test] = train_test_split(ds, cfg.split, cfg.seed);
  auto tree = discover(train, cfg);
  write_file_atomic(dir / "model.tree.txt", format_tree(tree) + "\n");

  const auto net = tree_to_petri_net(tree);
  write_file_atomic(dir / "model.pnml", export_pnml(net));
  write_file_atomic(dir / "model.dot", export_dot(net));

  auto quality = evaluate(tree, train, test);
  write_file_atomic(dir / "quality.json", quality_to_json(quality));
  return {std::move(tree), quality, std::move(reports)};
}

}  // namespace alarmtop
