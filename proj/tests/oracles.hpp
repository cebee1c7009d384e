#pragma once

// Reference implementations used only by the tests. They follow the operator
// semantics literally and favour clarity over speed.

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "alarmtop/process_tree.hpp"

namespace oracle {

using alarmtop::NodeKind;
using alarmtop::ProcessTree;
using Word = std::vector<std::string>;
using Lang = std::set<Word>;

inline Lang concat(const Lang& x, const Lang& y, std::size_t max_len) {
  Lang out;
  for (const auto& u : x)
    for (const auto& v : y)
      if (u.size() + v.size() <= max_len) {
        Word w = u;
        w.insert(w.end(), v.begin(), v.end());
        out.insert(std::move(w));
      }
  return out;
}

inline void shuffles(const Word& u, std::size_t i, const Word& v, std::size_t j, Word& cur, Lang& out) {
  if (i == u.size() && j == v.size()) {
    out.insert(cur);
    return;
  }
  if (i < u.size()) {
    cur.push_back(u[i]);
    shuffles(u, i + 1, v, j, cur, out);
    cur.pop_back();
  }
  if (j < v.size()) {
    cur.push_back(v[j]);
    shuffles(u, i, v, j + 1, cur, out);
    cur.pop_back();
  }
}

inline Lang shuffle(const Lang& x, const Lang& y, std::size_t max_len) {
  Lang out;
  for (const auto& u : x)
    for (const auto& v : y)
      if (u.size() + v.size() <= max_len) {
        Word cur;
        shuffles(u, 0, v, 0, cur, out);
      }
  return out;
}

/// Words of length <= max_len; each loop goes around at most `unroll` times.
inline Lang language(const ProcessTree& t, std::size_t max_len, std::size_t unroll) {
  switch (t.kind()) {
    case NodeKind::Activity:
      return max_len >= 1 ? Lang{Word{t.label()}} : Lang{};
    case NodeKind::Tau:
      return Lang{Word{}};
    case NodeKind::Xor: {
      Lang out;
      for (const auto& c : t.children()) {
        auto l = language(c, max_len, unroll);
        out.insert(l.begin(), l.end());
      }
      return out;
    }
    case NodeKind::Seq: {
      Lang out{Word{}};
      for (const auto& c : t.children()) out = concat(out, language(c, max_len, unroll), max_len);
      return out;
    }
    case NodeKind::And: {
      Lang out{Word{}};
      for (const auto& c : t.children()) out = shuffle(out, language(c, max_len, unroll), max_len);
      return out;
    }
    case NodeKind::Loop: {
      const auto body = language(t.children()[0], max_len, unroll);
      Lang redo;
      for (std::size_t i = 1; i < t.children().size(); ++i) {
        auto l = language(t.children()[i], max_len, unroll);
        redo.insert(l.begin(), l.end());
      }
      const auto round = concat(redo, body, max_len);
      Lang out = body, layer = body;
      for (std::size_t k = 0; k < unroll; ++k) {
        layer = concat(layer, round, max_len);
        const auto before = out.size();
        out.insert(layer.begin(), layer.end());
        if (out.size() == before) break;
      }
      return out;
    }
  }
  return {};
}

inline std::size_t lcs(const Word& a, const Word& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = a[i - 1] == b[j - 1] ? d[i - 1][j - 1] + 1 : std::max(d[i - 1][j], d[i][j - 1]);
  return d[a.size()][b.size()];
}

inline std::size_t shortest_word(const ProcessTree& t) {
  // Loops may go around zero times, so the shortest word needs no unrolling.
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (const auto& w : language(t, 64, 0)) best = std::min(best, w.size());
  return best;
}

/// Optimal unit-cost alignment cost: with free synchronous moves, aligning a
/// trace with a model word w costs |trace| + |w| - 2 LCS(trace, w). Words
/// longer than 2|trace| + shortest can never win, and every loop round worth
/// taking adds a visible event, so unrolling up to that length is enough.
inline std::size_t alignment_cost(const ProcessTree& t, const Word& trace) {
  const auto shortest = shortest_word(t);
  const auto bound = 2 * trace.size() + shortest;
  std::size_t best = trace.size() + shortest;
  for (const auto& w : language(t, bound, bound)) best = std::min(best, trace.size() + w.size() - 2 * lcs(trace, w));
  return best;
}

inline double trace_fitness(const ProcessTree& t, const Word& trace) {
  const double ref = static_cast<double>(trace.size() + shortest_word(t));
  if (ref == 0) return 1.0;
  return 1.0 - static_cast<double>(alignment_cost(t, trace)) / ref;
}

}  // namespace oracle
