#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alarmtop/process_tree.hpp"

namespace alarmtop {

enum class PlaceId : std::uint32_t {};
enum class TransitionId : std::uint32_t {};

constexpr std::size_t index(PlaceId p) noexcept { return static_cast<std::size_t>(p); }
constexpr std::size_t index(TransitionId t) noexcept { return static_cast<std::size_t>(t); }

/// Token multiset over the places of one net.
class Marking {
 public:
  Marking() = default;
  explicit Marking(std::size_t place_count) : tokens_(place_count, 0) {}

  std::uint32_t operator[](PlaceId p) const { return tokens_.at(index(p)); }
  void add(PlaceId p, std::uint32_t n = 1) { tokens_.at(index(p)) += n; }
  /// Throws std::logic_error when the place holds fewer than n tokens.
  void remove(PlaceId p, std::uint32_t n = 1);

  std::size_t place_count() const noexcept { return tokens_.size(); }
  std::uint64_t total() const noexcept;
  const std::vector<std::uint32_t>& counts() const noexcept { return tokens_; }

  auto operator<=>(const Marking&) const = default;

 private:
  std::vector<std::uint32_t> tokens_;
};

struct Place {
  std::string name;
  bool operator==(const Place&) const = default;
};

struct Transition {
  std::string name;
  /// Activity tag; empty for silent transitions.
  std::string label;
  bool silent = false;
  bool operator==(const Transition&) const = default;
};

/// Arcs always join a place and a transition; `into_transition` tells the
/// direction.
struct Arc {
  PlaceId place;
  TransitionId transition;
  bool into_transition = true;
  auto operator<=>(const Arc&) const = default;
};

/// Labeled place/transition net with initial and final markings.
class PetriNet {
 public:
  PlaceId add_place(std::string name);
  TransitionId add_transition(std::string name, std::string label, bool silent);
  void add_arc(PlaceId from, TransitionId to);
  void add_arc(TransitionId from, PlaceId to);

  void set_initial_marking(Marking m);
  void set_final_marking(Marking m);

  const std::vector<Place>& places() const noexcept { return places_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  const std::vector<PlaceId>& preset(TransitionId t) const { return preset_.at(index(t)); }
  const std::vector<PlaceId>& postset(TransitionId t) const { return postset_.at(index(t)); }
  const Transition& transition(TransitionId t) const { return transitions_.at(index(t)); }

  Marking empty_marking() const { return Marking(places_.size()); }
  const Marking& initial_marking() const noexcept { return initial_; }
  const Marking& final_marking() const noexcept { return final_; }

  std::optional<PlaceId> find_place(std::string_view name) const;
  std::optional<TransitionId> find_transition(std::string_view name) const;

  /// Structural equality; arc order does not matter.
  bool operator==(const PetriNet& other) const;

 private:
  std::vector<Place> places_;
  std::vector<Transition> transitions_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<PlaceId>> preset_;
  std::vector<std::vector<PlaceId>> postset_;
  Marking initial_;
  Marking final_;
};

/// Net obtained from a process tree, plus the link back to the tree.
struct TreeNet {
  PetriNet net;
  /// For each tree node in preorder, the transition that fires once per
  /// execution of the node: the leaf's own transition, the split of an And
  /// node, the entry of a Loop node. Seq and Xor nodes have none.
  std::vector<std::optional<TransitionId>> node_transition;
};

/// Block-wise translation into a workflow net with one source and one sink
/// place. Loops are wrapped in silent entry/exit transitions.
TreeNet convert_tree(const ProcessTree& t);
PetriNet tree_to_petri_net(const ProcessTree& t);

/// Transitions with a token on every input place, in id order.
std::vector<TransitionId> enabled_transitions(const PetriNet& net, const Marking& m);
bool is_enabled(const PetriNet& net, const Marking& m, TransitionId t);
/// Throws NotEnabled.
Marking fire(const PetriNet& net, const Marking& m, TransitionId t);

/// Visible firing sequences of length <= max_len that end in the final
/// marking. Throws StateBudgetExceeded past `budget` (prefix, marking) pairs.
Language net_language(const PetriNet& net, std::size_t max_len, std::size_t budget = 1'000'000);
/// Same, but each loop of `tree` may go around at most `max_loop_unroll`
/// times per entry, matching enumerate_language. `tn` must come from
/// convert_tree(tree).
Language net_language(const TreeNet& tn, const ProcessTree& tree, std::size_t max_len, std::size_t max_loop_unroll,
                      std::size_t budget = 1'000'000);

struct SoundnessReport {
  std::size_t reachable_markings = 0;
  bool option_to_complete = false;  // final marking reachable from everywhere
  bool proper_completion = false;   // a marked sink means nothing else is marked
  bool no_dead_transitions = false;
  bool sound() const noexcept { return option_to_complete && proper_completion && no_dead_transitions; }
};

/// Exhaustive reachability analysis. Throws StateBudgetExceeded.
SoundnessReport check_soundness(const PetriNet& net, std::size_t budget = 100'000);

/// Exactly one source place holding the only initial token, exactly one sink
/// place holding the only final token, every node on a source-sink path.
bool is_workflow_net(const PetriNet& net);

/// Graphviz digraph: places as circles, visible transitions as labeled
/// boxes, silent transitions as filled black boxes.
std::string export_dot(const PetriNet& net);

/// PNML core model. Silent transitions carry an empty name plus a
/// toolspecific silent flag; the final marking is stored in a toolspecific
/// block on the net.
std::string export_pnml(const PetriNet& net);
/// Reads what export_pnml writes. Throws Error on malformed input.
PetriNet import_pnml(std::string_view xml);

}  // namespace alarmtop
