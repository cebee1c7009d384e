#include "alarmtop/synth_log.hpp"

#include <algorithm>
#include <stdexcept>

#include "alarmtop/random.hpp"

namespace alarmtop {

namespace {

const TimePoint kEpoch = TimePoint{std::chrono::sys_days{std::chrono::year{2020} / 1 / 1}.time_since_epoch()};

void walk(const ProcessTree& t, Rng& rng, std::size_t unroll, double redo_p, std::vector<std::string>& out) {
  switch (t.kind()) {
    case NodeKind::Activity:
      out.push_back(t.label());
      return;
    case NodeKind::Tau:
      return;
    case NodeKind::Xor:
      walk(t.children()[rng.below(t.children().size())], rng, unroll, redo_p, out);
      return;
    case NodeKind::Seq:
      for (const auto& c : t.children()) walk(c, rng, unroll, redo_p, out);
      return;
    case NodeKind::And: {
      std::vector<std::vector<std::string>> parts(t.children().size());
      std::size_t remaining = 0;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        walk(t.children()[i], rng, unroll, redo_p, parts[i]);
        remaining += parts[i].size();
      }
      // Drawing the next branch proportionally to what it has left yields
      // every interleaving with equal probability.
      std::vector<std::size_t> next(parts.size(), 0);
      for (; remaining > 0; --remaining) {
        auto r = rng.below(remaining);
        std::size_t i = 0;
        while (r >= parts[i].size() - next[i]) {
          r -= parts[i].size() - next[i];
          ++i;
        }
        out.push_back(parts[i][next[i]++]);
      }
      return;
    }
    case NodeKind::Loop: {
      const auto& kids = t.children();
      walk(kids.front(), rng, unroll, redo_p, out);
      for (std::size_t k = 0; k < unroll && rng.chance(redo_p); ++k) {
        walk(kids[1 + rng.below(kids.size() - 1)], rng, unroll, redo_p, out);
        walk(kids.front(), rng, unroll, redo_p, out);
      }
      return;
    }
  }
}

std::string case_name(std::size_t i, std::size_t n) {
  std::size_t width = 3;
  for (std::size_t x = n; x >= 1000; x /= 10) ++width;
  auto digits = std::to_string(i + 1);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "case" + digits;
}

std::vector<TimePoint> minute_spacing(std::size_t count) {
  std::vector<TimePoint> ts;
  for (std::size_t k = 0; k < count; ++k) ts.push_back(kEpoch + std::chrono::minutes(k));
  return ts;
}

}  // namespace

Dataset sample_log(const ProcessTree& tree, std::size_t n, std::uint64_t seed, std::size_t max_loop_unroll,
                   double redo_probability) {
  if (n == 0) throw std::invalid_argument("sample_log needs n >= 1");
  Rng rng(seed);
  Dataset ds;
  ds.fault_label = "synthetic";
  for (std::size_t i = 0; i < n; ++i) {
    Trace tr;
    tr.case_id = case_name(i, n);
    walk(tree, rng, max_loop_unroll, redo_probability, tr.activities);
    tr.timestamps = minute_spacing(tr.size());
    ds.traces.push_back(std::move(tr));
  }
  return ds;
}

NoisyDataset inject_noise(const Dataset& ds, const NoiseSpec& spec, std::uint64_t seed) {
  for (double r : {spec.swap_rate, spec.drop_rate, spec.insert_rate})
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("noise rates must lie in [0, 1]");
  const std::vector<std::string> alphabet(spec.alphabet.begin(), spec.alphabet.end());

  Rng rng(seed);
  NoisyDataset out;
  out.dataset.fault_label = ds.fault_label;
  for (const auto& tr : ds.traces) {
    auto acts = tr.activities;
    for (std::size_t i = 0; i + 1 < acts.size(); ++i)
      if (rng.chance(spec.swap_rate)) std::swap(acts[i], acts[i + 1]);

    std::vector<std::string> kept;
    for (auto& a : acts)
      if (!rng.chance(spec.drop_rate)) kept.push_back(std::move(a));

    if (!alphabet.empty() && rng.chance(spec.insert_rate)) {
      const auto at = rng.below(kept.size() + 1);
      kept.insert(kept.begin() + static_cast<std::ptrdiff_t>(at), alphabet[rng.below(alphabet.size())]);
    }

    if (kept.empty()) {
      out.warnings.push_back("case " + tr.case_id + " left empty by noise, dropped");
      continue;
    }
    Trace noisy{tr.case_id, std::move(kept), std::nullopt};
    if (tr.timestamps) {
      const TimePoint start = tr.timestamps->empty() ? kEpoch : tr.timestamps->front();
      noisy.timestamps.emplace();
      for (std::size_t k = 0; k < noisy.size(); ++k) noisy.timestamps->push_back(start + std::chrono::minutes(k));
    }
    out.dataset.traces.push_back(std::move(noisy));
  }
  if (out.dataset.empty()) out.warnings.push_back("noise removed every trace; dataset is empty");
  return out;
}

}  // namespace alarmtop
