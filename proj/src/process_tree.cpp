#include "alarmtop/process_tree.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>

#include "alarmtop/error.hpp"
#include "alarmtop/random.hpp"

namespace alarmtop {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Activity: return "activity";
    case NodeKind::Tau: return "tau";
    case NodeKind::Xor: return "xor";
    case NodeKind::Seq: return "seq";
    case NodeKind::And: return "and";
    case NodeKind::Loop: return "loop";
  }
  return "?";
}

ProcessTree ProcessTree::activity(std::string label) {
  ProcessTree t;
  t.kind_ = NodeKind::Activity;
  t.label_ = std::move(label);
  return t;
}

ProcessTree ProcessTree::tau() { return ProcessTree(); }

ProcessTree ProcessTree::make(NodeKind op, std::vector<ProcessTree> children) {
  if (op == NodeKind::Activity || op == NodeKind::Tau)
    throw std::invalid_argument("make() expects an operator kind");
  if (children.empty())
    throw ArityError(std::string(to_string(op)) + " needs at least one child");
  if (op == NodeKind::Loop && children.size() < 2)
    throw ArityError("loop needs a body and at least one redo child");
  ProcessTree t;
  t.kind_ = op;
  t.children_ = std::move(children);
  return t;
}

std::size_t ProcessTree::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children_) n += c.node_count();
  return n;
}

std::size_t ProcessTree::depth() const {
  std::size_t d = 0;
  for (const auto& c : children_) d = std::max(d, c.depth());
  return d + 1;
}

ProcessTree canonicalize(const ProcessTree& t) {
  if (t.is_leaf()) return t;
  std::vector<ProcessTree> kids;
  const bool flattens = t.kind() != NodeKind::Loop;
  for (const auto& c : t.children()) {
    auto cc = canonicalize(c);
    if (flattens && cc.kind() == t.kind()) {
      for (const auto& g : cc.children()) kids.push_back(g);
    } else {
      kids.push_back(std::move(cc));
    }
  }
  if (flattens && kids.size() == 1) return kids.front();
  return ProcessTree::make(t.kind(), std::move(kids));
}

// ---------------------------------------------------------------------------
// notation

namespace {

bool is_name_char(char c) {
  return c != '(' && c != ')' && c != ',' && c != '\'' && c != '\\' &&
         c != ' ' && c != '\t' && c != '\n' && c != '\r';
}

bool needs_quotes(const std::string& name) {
  if (name.empty() || name == "tau") return true;
  return !std::all_of(name.begin(), name.end(), is_name_char);
}

void format_into(const ProcessTree& t, std::string& out) {
  switch (t.kind()) {
    case NodeKind::Tau:
      out += "tau";
      return;
    case NodeKind::Activity:
      if (!needs_quotes(t.label())) {
        out += t.label();
      } else {
        out += '\'';
        for (char c : t.label()) {
          if (c == '\'' || c == '\\') out += '\\';
          out += c;
        }
        out += '\'';
      }
      return;
    default:
      out += to_string(t.kind());
      out += '(';
      for (std::size_t i = 0; i < t.children().size(); ++i) {
        if (i) out += ", ";
        format_into(t.children()[i], out);
      }
      out += ')';
  }
}

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : s_(text) {}

  ProcessTree parse() {
    auto t = node();
    skip_ws();
    if (pos_ != s_.size()) throw SyntaxError(pos_, "trailing input");
    return t;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }

  ProcessTree node() {
    skip_ws();
    if (pos_ >= s_.size()) throw SyntaxError(pos_, "unexpected end of input");
    if (s_[pos_] == '\'') return ProcessTree::activity(quoted());

    const std::size_t start = pos_;
    while (pos_ < s_.size() && is_name_char(s_[pos_])) ++pos_;
    if (pos_ == start) throw SyntaxError(pos_, std::string("unexpected '") + s_[pos_] + "'");
    const std::string word(s_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      static const std::map<std::string, NodeKind> ops = {
          {"xor", NodeKind::Xor}, {"seq", NodeKind::Seq}, {"and", NodeKind::And}, {"loop", NodeKind::Loop}};
      const auto it = ops.find(word);
      if (it == ops.end()) throw SyntaxError(start, "unknown operator '" + word + "'");
      ++pos_;
      std::vector<ProcessTree> kids;
      kids.push_back(node());
      skip_ws();
      while (pos_ < s_.size() && s_[pos_] == ',') {
        ++pos_;
        kids.push_back(node());
        skip_ws();
      }
      if (pos_ >= s_.size() || s_[pos_] != ')') throw SyntaxError(pos_, "expected ',' or ')'");
      ++pos_;
      return ProcessTree::make(it->second, std::move(kids));
    }
    if (word == "tau") return ProcessTree::tau();
    return ProcessTree::activity(word);
  }

  std::string quoted() {
    const std::size_t open = pos_++;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '\'') {
      if (s_[pos_] == '\\') {
        ++pos_;
        if (pos_ >= s_.size()) break;
      }
      out += s_[pos_++];
    }
    if (pos_ >= s_.size()) throw SyntaxError(open, "unterminated quoted name");
    ++pos_;
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

ProcessTree parse_tree(std::string_view text) { return canonicalize(TreeParser(text).parse()); }

std::string format_tree(const ProcessTree& t) {
  std::string out;
  format_into(t, out);
  return out;
}

// ---------------------------------------------------------------------------
// language

namespace {

using Word = std::vector<std::string>;

class Enumerator {
 public:
  Enumerator(std::size_t max_len, std::size_t unroll, std::size_t budget)
      : max_len_(max_len), unroll_(unroll), budget_(budget) {}

  Language run(const ProcessTree& t) {
    switch (t.kind()) {
      case NodeKind::Tau:
        charge();
        return {Word{}};
      case NodeKind::Activity:
        if (max_len_ == 0) return {};
        charge();
        return {Word{t.label()}};
      case NodeKind::Xor: {
        Language out;
        for (const auto& c : t.children()) add(out, run(c));
        return out;
      }
      case NodeKind::Seq: {
        Language acc = run(t.children().front());
        for (std::size_t i = 1; i < t.children().size(); ++i) acc = concat(acc, run(t.children()[i]));
        return acc;
      }
      case NodeKind::And: {
        Language acc = run(t.children().front());
        for (std::size_t i = 1; i < t.children().size(); ++i) acc = shuffle(acc, run(t.children()[i]));
        return acc;
      }
      case NodeKind::Loop: {
        const Language body = run(t.children().front());
        Language redo;
        for (std::size_t i = 1; i < t.children().size(); ++i) add(redo, run(t.children()[i]));
        Language result = body;
        Language frontier = body;
        for (std::size_t k = 0; k < unroll_; ++k) {
          frontier = concat(concat(frontier, redo), body);
          const std::size_t before = result.size();
          add(result, frontier);
          // Nothing new: later rounds cannot add anything either.
          if (result.size() == before) break;
        }
        return result;
      }
    }
    return {};
  }

 private:
  Language& add(Language& into, const Language& from) {
    for (const auto& w : from) {
      into.insert(w);
      charge();
    }
    return into;
  }

  void charge() {
    if (++spent_ > budget_) throw BudgetExceeded(budget_);
  }

  Language concat(const Language& a, const Language& b) {
    Language out;
    for (const auto& x : a)
      for (const auto& y : b) {
        if (x.size() + y.size() > max_len_) continue;
        Word w = x;
        w.insert(w.end(), y.begin(), y.end());
        out.insert(std::move(w));
        charge();
      }
    return out;
  }

  Language shuffle(const Language& a, const Language& b) {
    Language out;
    Word buf;
    for (const auto& x : a)
      for (const auto& y : b) {
        if (x.size() + y.size() > max_len_) continue;
        interleave(x, 0, y, 0, buf, out);
      }
    return out;
  }

  void interleave(const Word& x, std::size_t i, const Word& y, std::size_t j, Word& buf, Language& out) {
    if (i == x.size() && j == y.size()) {
      out.insert(buf);
      charge();
      return;
    }
    if (i < x.size()) {
      buf.push_back(x[i]);
      interleave(x, i + 1, y, j, buf, out);
      buf.pop_back();
    }
    if (j < y.size()) {
      buf.push_back(y[j]);
      interleave(x, i, y, j + 1, buf, out);
      buf.pop_back();
    }
  }

  std::size_t max_len_;
  std::size_t unroll_;
  std::size_t budget_;
  std::size_t spent_ = 0;
};

}  // namespace

Language enumerate_language(const ProcessTree& t, std::size_t max_len, std::size_t max_loop_unroll,
                            std::size_t budget) {
  return Enumerator(max_len, max_loop_unroll, budget).run(t);
}

// ---------------------------------------------------------------------------
// generation, metrics, addressing

namespace {

ProcessTree random_leaf(const std::vector<std::string>& acts, Rng& rng, const TreeGenConfig& cfg) {
  const double total = cfg.weight_activity + cfg.weight_tau;
  if (total <= 0 || rng.unit() * total < cfg.weight_activity)
    return ProcessTree::activity(acts[rng.below(acts.size())]);
  return ProcessTree::tau();
}

ProcessTree random_node(const std::vector<std::string>& acts, Rng& rng, const TreeGenConfig& cfg,
                        std::size_t depth) {
  if (depth >= cfg.max_depth) return random_leaf(acts, rng, cfg);
  const std::array<double, 6> w = {cfg.weight_activity, cfg.weight_tau, cfg.weight_xor,
                                   cfg.weight_seq,      cfg.weight_and, cfg.weight_loop};
  double total = 0;
  for (double x : w) total += x;
  double r = rng.unit() * total;
  std::size_t pick = 0;
  while (pick + 1 < w.size() && r >= w[pick]) r -= w[pick++];

  static constexpr std::array<NodeKind, 6> kinds = {NodeKind::Activity, NodeKind::Tau, NodeKind::Xor,
                                                    NodeKind::Seq,      NodeKind::And, NodeKind::Loop};
  const NodeKind kind = kinds[pick];
  if (kind == NodeKind::Activity) return ProcessTree::activity(acts[rng.below(acts.size())]);
  if (kind == NodeKind::Tau) return ProcessTree::tau();

  const std::size_t fan = std::max<std::size_t>(cfg.max_children, 2);
  const std::size_t n = kind == NodeKind::Loop ? 2 : 2 + rng.below(fan - 1);
  std::vector<ProcessTree> kids;
  for (std::size_t i = 0; i < n; ++i) kids.push_back(random_node(acts, rng, cfg, depth + 1));
  return ProcessTree::make(kind, std::move(kids));
}

void collect_leaves(const ProcessTree& t, std::vector<std::string>& out) {
  if (t.is_activity()) out.push_back(t.label());
  for (const auto& c : t.children()) collect_leaves(c, out);
}

const ProcessTree* find_preorder(const ProcessTree& t, std::size_t& remaining) {
  if (remaining == 0) return &t;
  --remaining;
  for (const auto& c : t.children())
    if (const auto* hit = find_preorder(c, remaining)) return hit;
  return nullptr;
}

ProcessTree rebuild(const ProcessTree& t, std::size_t& remaining, ProcessTree& replacement, bool& done) {
  if (remaining == 0 && !done) {
    done = true;
    return std::move(replacement);
  }
  --remaining;
  if (t.is_leaf() || done) return t;
  std::vector<ProcessTree> kids;
  for (const auto& c : t.children()) kids.push_back(done ? c : rebuild(c, remaining, replacement, done));
  return ProcessTree::make(t.kind(), std::move(kids));
}

}  // namespace

ProcessTree random_tree(const std::set<std::string>& activities, std::uint64_t seed,
                        const TreeGenConfig& cfg) {
  if (activities.empty()) throw std::invalid_argument("random_tree needs at least one activity");
  const std::vector<std::string> acts(activities.begin(), activities.end());
  Rng rng(seed);
  return canonicalize(random_node(acts, rng, cfg, 1));
}

double simplicity(const ProcessTree& t, const std::set<std::string>& log_activities) {
  std::map<std::string, std::size_t> uses;
  for (auto& l : leaf_labels(t)) ++uses[l];
  std::size_t duplicates = 0;
  for (const auto& [label, n] : uses) duplicates += n - 1;
  std::size_t missing = 0;
  for (const auto& a : log_activities)
    if (!uses.count(a)) ++missing;
  const double denom = static_cast<double>(t.node_count() + log_activities.size());
  return std::clamp(1.0 - static_cast<double>(duplicates + missing) / denom, 0.0, 1.0);
}

std::vector<std::string> leaf_labels(const ProcessTree& t) {
  std::vector<std::string> out;
  collect_leaves(t, out);
  return out;
}

const ProcessTree& node_at(const ProcessTree& t, std::size_t preorder_index) {
  std::size_t remaining = preorder_index;
  const auto* hit = find_preorder(t, remaining);
  if (!hit) throw std::out_of_range("preorder index past the last node");
  return *hit;
}

ProcessTree replace_at(const ProcessTree& t, std::size_t preorder_index, ProcessTree replacement) {
  if (preorder_index >= t.node_count()) throw std::out_of_range("preorder index past the last node");
  std::size_t remaining = preorder_index;
  bool done = false;
  return rebuild(t, remaining, replacement, done);
}

}  // namespace alarmtop
