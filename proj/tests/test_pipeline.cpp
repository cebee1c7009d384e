#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "alarmtop/discovery_im.hpp"
#include "alarmtop/error.hpp"
#include "alarmtop/petri_net.hpp"
#include "alarmtop/pipeline.hpp"
#include "alarmtop/synth_log.hpp"
#include "support.hpp"

using namespace alarmtop;
using testing_support::kExampleTree;
using testing_support::timed;
namespace fs = std::filesystem;

namespace {

using W = std::vector<std::string>;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("alarmtop_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int cli(const std::string& args) {
  const std::string cmd = std::string(ALARMTOP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Synthetic alarm log from the example tree, 60 s apart inside each case.
fs::path example_log(const TempDir& dir, std::size_t traces = 40) {
  const auto path = dir / "fault.csv";
  save_dataset(sample_log(parse_tree(kExampleTree), traces, 5), path);
  return path;
}

}  // namespace

TEST(ParseDuration, Units) {
  EXPECT_EQ(parse_duration("90s"), std::chrono::seconds(90));
  EXPECT_EQ(parse_duration("15m"), std::chrono::minutes(15));
  EXPECT_EQ(parse_duration("21h"), std::chrono::hours(21));
  EXPECT_EQ(parse_duration("45"), std::chrono::seconds(45));
  EXPECT_EQ(parse_duration("1.5m"), std::chrono::seconds(90));
  for (const char* bad : {"", "h", "3x", "-5s", "1e"}) EXPECT_THROW(parse_duration(bad), std::invalid_argument) << bad;
}

TEST(ParseWeights, Values) {
  const auto w = parse_weights("10,5,1,1");
  EXPECT_EQ(w.fitness, 10);
  EXPECT_EQ(w.precision, 5);
  EXPECT_EQ(w.generalization, 1);
  EXPECT_EQ(w.simplicity, 1);
  for (const char* bad : {"1,2,3", "1,2,3,4,5", "a,b,c,d", "1,-1,1,1", ""})
    EXPECT_THROW(parse_weights(bad), std::invalid_argument) << bad;
}

TEST(PipelineConfig, Validation) {
  PipelineConfig c;
  c.input = "x.csv";
  c.output_dir = "out";
  EXPECT_NO_THROW(c.validate());
  c.split = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.split = 0.5;
  c.noise_threshold = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(DatasetFile, RoundTrip) {
  TempDir dir;
  const auto ds = sample_log(parse_tree(kExampleTree), 25, 3);
  save_dataset(ds, dir / "ds.csv");
  const auto back = load_dataset(dir / "ds.csv");
  EXPECT_EQ(back.fault_label, "ds");
  ASSERT_EQ(back.traces.size(), ds.traces.size());
  for (std::size_t i = 0; i < ds.traces.size(); ++i) EXPECT_EQ(back.traces[i].activities, ds.traces[i].activities);
  EXPECT_EQ(load_dataset(dir / "ds.csv", "pump").fault_label, "pump");
  EXPECT_FALSE(fs::exists(dir / "ds.csv.tmp"));
}

TEST(DatasetFile, MissingFileNamesPath) {
  try {
    load_dataset("/nonexistent/alarms.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/alarms.csv"), std::string::npos);
  }
}

TEST(PreprocessDataset, StepOrder) {
  Dataset ds;
  ds.fault_label = "f";
  // a chatters at 0 s and 30 s and returns at 120 s; b arrives after a day.
  ds.traces.push_back(timed("c1", {{"a", 0}, {"a", 30}, {"c", 60}, {"a", 120}, {"b", 90000}}));
  ds.traces.push_back(timed("c2", {{"a", 0}, {"c", 60}}));

  PreprocessOptions o;
  auto [out, reports] = preprocess_dataset(ds, o);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].step, "remove_chattering");
  EXPECT_EQ(reports[1].step, "first_occurrence_filter");
  EXPECT_EQ(reports[2].step, "remove_insignificant_tags");
  EXPECT_EQ(reports[0].events_after, 6u);
  EXPECT_EQ(reports[1].events_after, 5u);
  EXPECT_EQ(out.traces[0].activities, (W{"a", "c", "b"}));

  o.cutoff = std::chrono::hours(21);
  o.min_support = 0.75;
  auto [cut, cut_reports] = preprocess_dataset(ds, o);
  ASSERT_EQ(cut_reports.size(), 4u);
  EXPECT_EQ(cut_reports[1].step, "truncate_transitional");
  EXPECT_EQ(cut.traces[0].activities, (W{"a", "c"}));

  o = PreprocessOptions{};
  o.first_occurrence = false;
  auto [keep, keep_reports] = preprocess_dataset(ds, o);
  EXPECT_EQ(keep_reports.size(), 2u);
  EXPECT_EQ(keep.traces[0].activities, (W{"a", "c", "a", "b"}));
}

TEST(RunPipeline, WritesArtifacts) {
  TempDir dir;
  PipelineConfig c;
  c.input = example_log(dir);
  c.output_dir = dir / "out";
  const auto result = run_pipeline(c);
  for (const char* f :
       {"dataset.dotted.csv", "preprocess.report.txt", "model.tree.txt", "model.pnml", "model.dot", "quality.json"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  EXPECT_EQ(parse_tree(read(dir / "out" / "model.tree.txt")), result.tree);
  EXPECT_EQ(import_pnml(read(dir / "out" / "model.pnml")), tree_to_petri_net(result.tree));
  EXPECT_EQ(read(dir / "out" / "model.dot"), export_dot(tree_to_petri_net(result.tree)));
  EXPECT_EQ(enumerate_language(result.tree, 6, 2), enumerate_language(parse_tree(kExampleTree), 6, 2));

  const auto j = nlohmann::json::parse(read(dir / "out" / "quality.json"));
  EXPECT_DOUBLE_EQ(j.at("fitness_train").get<double>(), std::round(result.quality.fitness_train * 1e4) / 1e4);
  EXPECT_DOUBLE_EQ(j.at("precision_test").get<double>(), std::round(result.quality.precision_test * 1e4) / 1e4);
  EXPECT_EQ(j.at("fitness_train").get<double>(), 1.0);

  const auto report = read(dir / "out" / "preprocess.report.txt");
  EXPECT_NE(report.find("remove_chattering"), std::string::npos);
}

TEST(RunPipeline, QualityMatchesEvaluate) {
  TempDir dir;
  PipelineConfig c;
  c.input = example_log(dir, 60);
  c.output_dir = dir / "out";
  c.seed = 9;
  const auto result = run_pipeline(c);
  auto [ds, reports] = preprocess_dataset(load_dataset(c.input), c.preprocess);
  auto [train, test] = train_test_split(ds, c.split, c.seed);
  EXPECT_EQ(discover_im(train, c.noise_threshold), result.tree);
  EXPECT_EQ(read(dir / "out" / "quality.json"), quality_to_json(evaluate(result.tree, train, test)));
}

TEST(RunPipeline, EtmIsDeterministic) {
  TempDir dir;
  PipelineConfig c;
  c.input = example_log(dir);
  c.algorithm = Algorithm::Etm;
  c.etm.max_generations = 20;
  c.etm.workers = 2;
  c.output_dir = dir / "a";
  const auto a = run_pipeline(c);
  c.output_dir = dir / "b";
  c.etm.workers = 1;
  const auto b = run_pipeline(c);
  EXPECT_EQ(a.tree, b.tree);
  for (const char* f : {"model.pnml", "model.dot", "quality.json"})
    EXPECT_EQ(read(dir / "a" / f), read(dir / "b" / f)) << f;
}

TEST(RunPipeline, MissingInput) {
  TempDir dir;
  PipelineConfig c;
  c.input = dir / "absent.csv";
  c.output_dir = dir / "out";
  EXPECT_THROW(run_pipeline(c), Error);
  EXPECT_FALSE(fs::exists(dir / "out" / "model.pnml"));
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const auto log = example_log(dir).string();
  const auto out = (dir / "out").string();
  EXPECT_EQ(cli("run " + log + " " + out), 0);
  EXPECT_EQ(cli("run " + (dir / "absent.csv").string() + " " + out), 1);
  EXPECT_EQ(cli("run " + log + " " + out + " --algo foo"), 2);
  EXPECT_EQ(cli("run " + log + " " + out + " --cutoff 3x"), 2);
  EXPECT_EQ(cli("run " + log + " " + out + " --weights 1,2"), 2);
  EXPECT_EQ(cli("run " + log + " " + out + " --bogus"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  write(dir / "broken.csv", "timestamp,tag\nnot a row\n");
  EXPECT_EQ(cli("run " + (dir / "broken.csv").string() + " " + out), 1);
}

TEST(Cli, Subcommands) {
  TempDir dir;
  const auto d = [&](const char* name) { return (dir / name).string(); };
  ASSERT_EQ(cli("synth '" + std::string(kExampleTree) + "' " + d("syn.csv") + " --traces 50 --seed 4"), 0);
  ASSERT_EQ(cli("ingest " + d("syn.csv") + " " + d("ds.csv") + " --dotted " + d("chart.csv")), 0);
  EXPECT_TRUE(fs::exists(d("chart.csv")));
  ASSERT_EQ(cli("preprocess " + d("ds.csv") + " " + d("clean.csv") + " --report " + d("report.txt")), 0);
  EXPECT_NE(read(d("report.txt")).find("first_occurrence_filter"), std::string::npos);
  ASSERT_EQ(cli("discover " + d("clean.csv") + " " + d("tree.txt")), 0);
  const auto tree = parse_tree(read(d("tree.txt")));
  EXPECT_EQ(enumerate_language(tree, 6, 2), enumerate_language(parse_tree(kExampleTree), 6, 2));
  ASSERT_EQ(cli("evaluate " + d("tree.txt") + " " + d("clean.csv") + " --json " + d("q.json")), 0);
  EXPECT_EQ(nlohmann::json::parse(read(d("q.json"))).at("fitness_test").get<double>(), 1.0);
  ASSERT_EQ(cli("export " + d("tree.txt") + " " + d("net.pnml")), 0);
  EXPECT_EQ(import_pnml(read(d("net.pnml"))), tree_to_petri_net(tree));
  ASSERT_EQ(cli("export " + d("tree.txt") + " " + d("net.gv") + " --format dot"), 0);
  EXPECT_EQ(read(d("net.gv")), export_dot(tree_to_petri_net(tree)));
  EXPECT_EQ(cli("export " + d("tree.txt") + " " + d("net.txt") + " --format svg"), 2);
  EXPECT_EQ(cli("synth '" + std::string(kExampleTree) + "' " + d("z.csv") + " --traces 0"), 2);

  ASSERT_EQ(cli("synth '" + std::string(kExampleTree) + "' " + d("n1.csv") + " --traces 30 --drop 0.1 --seed 2"), 0);
  ASSERT_EQ(cli("synth '" + std::string(kExampleTree) + "' " + d("n2.csv") + " --traces 30 --drop 0.1 --seed 2"), 0);
  EXPECT_EQ(read(d("n1.csv")), read(d("n2.csv")));
}
