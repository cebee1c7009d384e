#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace alarmtop {

enum class NodeKind { Activity, Tau, Xor, Seq, And, Loop };

std::string_view to_string(NodeKind kind);

/// Block-structured process model.
///
/// Operators: Xor (exclusive choice), Seq (sequence), And (parallel) and
/// Loop. A Loop node's first child is the body; every further child is a redo
/// part, so a Loop needs at least two children. Trees are plain values.
class ProcessTree {
 public:
  static ProcessTree activity(std::string label);
  static ProcessTree tau();
  /// Throws ArityError on an operator without children or a Loop with
  /// fewer than two.
  static ProcessTree make(NodeKind op, std::vector<ProcessTree> children);

  NodeKind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  const std::vector<ProcessTree>& children() const noexcept { return children_; }

  bool is_leaf() const noexcept { return kind_ == NodeKind::Activity || kind_ == NodeKind::Tau; }
  bool is_activity() const noexcept { return kind_ == NodeKind::Activity; }

  std::size_t node_count() const;
  /// A lone leaf has depth 1.
  std::size_t depth() const;

  bool operator==(const ProcessTree&) const = default;

 private:
  ProcessTree() = default;

  NodeKind kind_ = NodeKind::Tau;
  std::string label_;
  std::vector<ProcessTree> children_;
};

/// Flattens nested Seq/Xor/And nodes of the same kind and replaces
/// single-child operators by their child.
ProcessTree canonicalize(const ProcessTree& t);

/// Reads `seq(a, xor(and(b, c), d, tau), e)` style notation. Names that
/// collide with `tau` or contain separators are written in single quotes.
/// The result is canonical. Throws SyntaxError or ArityError.
ProcessTree parse_tree(std::string_view text);

/// Canonical lowercase notation; parse_tree(format_tree(t)) == canonicalize(t).
std::string format_tree(const ProcessTree& t);

using Language = std::set<std::vector<std::string>>;

/// Visible traces of length <= max_len, taking each loop at most
/// max_loop_unroll times around. Throws BudgetExceeded once more than
/// `budget` traces have been generated along the way.
Language enumerate_language(const ProcessTree& t, std::size_t max_len,
                            std::size_t max_loop_unroll, std::size_t budget = 1'000'000);

struct TreeGenConfig {
  std::size_t max_depth = 4;
  std::size_t max_children = 3;
  double weight_activity = 4.0;
  double weight_tau = 0.3;
  double weight_xor = 1.0;
  double weight_seq = 2.0;
  double weight_and = 1.0;
  double weight_loop = 0.3;
};

/// Seeded random tree over `activities` (which must be nonempty); the result
/// is canonical and never deeper than cfg.max_depth.
ProcessTree random_tree(const std::set<std::string>& activities, std::uint64_t seed,
                        const TreeGenConfig& cfg = {});

/// 1 - (duplicate activity leaves + log activities missing from the tree)
///     / (tree nodes + |log_activities|).
double simplicity(const ProcessTree& t, const std::set<std::string>& log_activities);

/// Labels of all activity leaves, in preorder (with repetitions).
std::vector<std::string> leaf_labels(const ProcessTree& t);

/// Preorder addressing used by the genetic operators.
const ProcessTree& node_at(const ProcessTree& t, std::size_t preorder_index);
ProcessTree replace_at(const ProcessTree& t, std::size_t preorder_index, ProcessTree replacement);

}  // namespace alarmtop
