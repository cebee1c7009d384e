#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "alarmtop/discovery_im.hpp"
#include "alarmtop/error.hpp"
#include "alarmtop/petri_net.hpp"
#include "alarmtop/pipeline.hpp"
#include "alarmtop/random.hpp"
#include "alarmtop/synth_log.hpp"

using namespace alarmtop;

namespace {

// Bad flag values detected after CLI11 has parsed the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string cutoff;
  std::string chatter_window = "60s";
  double min_support = 0.0;
  bool keep_repeats = false;
  std::string algo = "im";
  double noise_threshold = 0.3;
  std::string weights = "10,5,1,1";
  std::size_t pop = 50;
  std::size_t max_gen = 300;
  double target = 1.0;
  std::size_t stagnation = 50;
  std::size_t workers = 0;
  double split = 0.667;
  std::uint64_t seed = 1;
  std::string fault_label;
};

void add_preprocess_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--cutoff", f.cutoff, "Keep events within this span of each case start (e.g. 21h)");
  cmd->add_option("--chatter-window", f.chatter_window, "Debounce window for repeated activations")
      ->capture_default_str();
  cmd->add_option("--min-support", f.min_support, "Drop tags present in fewer than this fraction of cases")
      ->capture_default_str();
  cmd->add_flag("--keep-repeats", f.keep_repeats, "Skip the first-occurrence filter");
}

void add_discovery_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--algo", f.algo, "Discovery algorithm: im or etm")->capture_default_str();
  cmd->add_option("--noise-threshold", f.noise_threshold, "IM infrequent-edge threshold")->capture_default_str();
  cmd->add_option("--weights", f.weights, "ETM weights f,p,g,s")->capture_default_str();
  cmd->add_option("--pop", f.pop, "ETM population size")->capture_default_str();
  cmd->add_option("--max-gen", f.max_gen, "ETM generation limit")->capture_default_str();
  cmd->add_option("--target", f.target, "ETM target overall fitness")->capture_default_str();
  cmd->add_option("--stagnation", f.stagnation, "ETM generations without improvement before stopping")
      ->capture_default_str();
  cmd->add_option("--workers", f.workers, "ETM evaluation threads (0 = all cores)")->capture_default_str();
}

PreprocessOptions preprocess_options(const Flags& f) {
  PreprocessOptions o;
  try {
    o.chatter_window = parse_duration(f.chatter_window);
    if (!f.cutoff.empty()) o.cutoff = parse_duration(f.cutoff);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  o.first_occurrence = !f.keep_repeats;
  o.min_support = f.min_support;
  return o;
}

PipelineConfig pipeline_config(const Flags& f) {
  PipelineConfig c;
  c.fault_label = f.fault_label;
  c.preprocess = preprocess_options(f);
  if (f.algo == "im") c.algorithm = Algorithm::Im;
  else if (f.algo == "etm") c.algorithm = Algorithm::Etm;
  else throw UsageError("--algo must be im or etm, got '" + f.algo + "'");
  c.noise_threshold = f.noise_threshold;
  try {
    c.etm.weights = parse_weights(f.weights);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.etm.population_size = f.pop;
  c.etm.elite_count = std::min<std::size_t>(c.etm.elite_count, f.pop > 1 ? f.pop - 1 : 0);
  c.etm.max_generations = f.max_gen;
  c.etm.target_overall = f.target;
  c.etm.stagnation_limit = f.stagnation;
  c.etm.workers = f.workers;
  c.split = f.split;
  c.seed = f.seed;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file: " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ProcessTree read_tree(const std::string& path) { return parse_tree(read_file(path)); }

std::string extension(const std::string& path) { return std::filesystem::path(path).extension().string(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plant topology extraction from alarm logs"};
  app.require_subcommand(1);
  Flags f;
  std::string in, out;

  auto* ingest = app.add_subcommand("ingest", "Build a dataset from an alarm log");
  std::string dotted;
  ingest->add_option("input", in, "Alarm CSV")->required();
  ingest->add_option("output", out, "Dataset CSV (ALM rows only)")->required();
  ingest->add_option("--fault-label", f.fault_label, "Fault label (default: input file stem)");
  ingest->add_option("--dotted", dotted, "Also write the dotted chart (.csv or .svg)");

  auto* prep = app.add_subcommand("preprocess", "Clean a dataset");
  std::string report_path;
  prep->add_option("input", in, "Dataset CSV")->required();
  prep->add_option("output", out, "Cleaned dataset CSV")->required();
  prep->add_option("--report", report_path, "Write the report here instead of stdout");
  add_preprocess_flags(prep, f);

  auto* disc = app.add_subcommand("discover", "Discover a process tree");
  disc->add_option("input", in, "Dataset CSV")->required();
  disc->add_option("output", out, "Tree file")->required();
  disc->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  add_discovery_flags(disc, f);

  auto* eval = app.add_subcommand("evaluate", "Score a tree on a train/test split");
  std::string tree_path, json_path;
  eval->add_option("tree", tree_path, "Tree file")->required();
  eval->add_option("input", in, "Dataset CSV")->required();
  eval->add_option("--split", f.split, "Training fraction")->capture_default_str();
  eval->add_option("--seed", f.seed, "Split seed")->capture_default_str();
  eval->add_option("--json", json_path, "Write quality.json here");

  auto* exp = app.add_subcommand("export", "Convert a tree to PNML or DOT");
  std::string format;
  exp->add_option("tree", tree_path, "Tree file")->required();
  exp->add_option("output", out, "Output file")->required();
  exp->add_option("--format", format, "pnml or dot (default: from the extension)");

  auto* synth = app.add_subcommand("synth", "Sample a synthetic dataset from a tree");
  std::string tree_text;
  std::size_t traces = 60;
  NoiseSpec noise;
  synth->add_option("tree", tree_text, "Tree file or inline tree notation")->required();
  synth->add_option("output", out, "Dataset CSV")->required();
  synth->add_option("--traces", traces, "Number of traces")->capture_default_str();
  synth->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  synth->add_option("--swap", noise.swap_rate, "Swap rate per adjacent pair")->capture_default_str();
  synth->add_option("--drop", noise.drop_rate, "Drop rate per event")->capture_default_str();
  synth->add_option("--insert", noise.insert_rate, "Insertion rate per trace")->capture_default_str();

  auto* run = app.add_subcommand("run", "Ingest, preprocess, discover, evaluate and export");
  run->add_option("input", in, "Alarm CSV")->required();
  run->add_option("outdir", out, "Output directory")->required();
  run->add_option("--fault-label", f.fault_label, "Fault label (default: input file stem)");
  run->add_option("--split", f.split, "Training fraction")->capture_default_str();
  run->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  add_preprocess_flags(run, f);
  add_discovery_flags(run, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) {
      if (!std::filesystem::exists(in)) throw Error("input file not found: " + in);
      const auto ds = load_dataset(in, f.fault_label);
      save_dataset(ds, out);
      if (!dotted.empty()) {
        std::ostringstream s;
        export_dotted_chart(ds, s, extension(dotted) == ".svg" ? ChartFormat::Svg : ChartFormat::Csv);
        write_file_atomic(dotted, s.str());
      }
      std::cout << ds.traces.size() << " cases, " << ds.event_count() << " alarms\n";
    } else if (*prep) {
      const auto opts = preprocess_options(f);
      if (!std::filesystem::exists(in)) throw Error("input file not found: " + in);
      auto [ds, reports] = preprocess_dataset(load_dataset(in), opts);
      std::ostringstream s;
      for (std::size_t i = 0; i < reports.size(); ++i) {
        if (i) s << '\n';
        write_report(reports[i], s);
      }
      if (report_path.empty()) std::cout << s.str();
      else write_file_atomic(report_path, s.str());
      save_dataset(ds, out);
    } else if (*disc) {
      const auto cfg = pipeline_config(f);
      if (!std::filesystem::exists(in)) throw Error("input file not found: " + in);
      const auto tree = discover(load_dataset(in), cfg);
      write_file_atomic(out, format_tree(tree) + "\n");
      std::cout << format_tree(tree) << '\n';
    } else if (*eval) {
      if (!(f.split > 0.0 && f.split < 1.0)) throw UsageError("--split must lie strictly between 0 and 1");
      const auto tree = read_tree(tree_path);
      if (!std::filesystem::exists(in)) throw Error("input file not found: " + in);
      auto [train, test] = train_test_split(load_dataset(in), f.split, f.seed);
      const auto q = evaluate(tree, train, test);
      std::cout << quality_table(q);
      if (!json_path.empty()) write_file_atomic(json_path, quality_to_json(q));
    } else if (*exp) {
      if (format.empty()) format = extension(out) == ".dot" ? "dot" : "pnml";
      if (format != "pnml" && format != "dot") throw UsageError("--format must be pnml or dot");
      const auto net = tree_to_petri_net(read_tree(tree_path));
      write_file_atomic(out, format == "dot" ? export_dot(net) : export_pnml(net));
    } else if (*synth) {
      if (traces == 0) throw UsageError("--traces must be positive");
      const auto tree = std::filesystem::exists(tree_text) ? read_tree(tree_text) : parse_tree(tree_text);
      const auto clean = sample_log(tree, traces, f.seed);
      noise.alphabet = clean.activity_universe();
      auto noisy = inject_noise(clean, noise, mix_seed(f.seed, 1));
      for (const auto& w : noisy.warnings) std::cerr << "warning: " << w << '\n';
      if (noisy.dataset.empty()) throw EmptyDataset();
      save_dataset(noisy.dataset, out);
    } else if (*run) {
      auto cfg = pipeline_config(f);
      cfg.input = in;
      cfg.output_dir = out;
      const auto result = run_pipeline(cfg);
      std::cout << format_tree(result.tree) << "\n\n" << quality_table(result.quality);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
