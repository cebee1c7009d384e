#include "alarmtop/petri_net.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "alarmtop/error.hpp"

namespace alarmtop {

void Marking::remove(PlaceId p, std::uint32_t n) {
  auto& slot = tokens_.at(index(p));
  if (slot < n) throw std::logic_error("marking would become negative");
  slot -= n;
}

std::uint64_t Marking::total() const noexcept {
  std::uint64_t n = 0;
  for (auto c : tokens_) n += c;
  return n;
}

PlaceId PetriNet::add_place(std::string name) {
  places_.push_back({std::move(name)});
  auto grow = [&](Marking& m) {
    Marking g(places_.size());
    for (std::size_t i = 0; i < m.place_count(); ++i) g.add(PlaceId(i), m.counts()[i]);
    m = std::move(g);
  };
  grow(initial_);
  grow(final_);
  return PlaceId(places_.size() - 1);
}

TransitionId PetriNet::add_transition(std::string name, std::string label, bool silent) {
  if (silent) label.clear();
  transitions_.push_back({std::move(name), std::move(label), silent});
  preset_.emplace_back();
  postset_.emplace_back();
  return TransitionId(transitions_.size() - 1);
}

void PetriNet::add_arc(PlaceId from, TransitionId to) {
  if (index(from) >= places_.size() || index(to) >= transitions_.size())
    throw std::out_of_range("arc endpoint does not exist");
  arcs_.push_back({from, to, true});
  preset_[index(to)].push_back(from);
}

void PetriNet::add_arc(TransitionId from, PlaceId to) {
  if (index(to) >= places_.size() || index(from) >= transitions_.size())
    throw std::out_of_range("arc endpoint does not exist");
  arcs_.push_back({to, from, false});
  postset_[index(from)].push_back(to);
}

void PetriNet::set_initial_marking(Marking m) {
  if (m.place_count() != places_.size()) throw std::invalid_argument("marking size mismatch");
  initial_ = std::move(m);
}

void PetriNet::set_final_marking(Marking m) {
  if (m.place_count() != places_.size()) throw std::invalid_argument("marking size mismatch");
  final_ = std::move(m);
}

std::optional<PlaceId> PetriNet::find_place(std::string_view name) const {
  for (std::size_t i = 0; i < places_.size(); ++i)
    if (places_[i].name == name) return PlaceId(i);
  return std::nullopt;
}

std::optional<TransitionId> PetriNet::find_transition(std::string_view name) const {
  for (std::size_t i = 0; i < transitions_.size(); ++i)
    if (transitions_[i].name == name) return TransitionId(i);
  return std::nullopt;
}

bool PetriNet::operator==(const PetriNet& other) const {
  if (places_ != other.places_ || transitions_ != other.transitions_) return false;
  if (initial_ != other.initial_ || final_ != other.final_) return false;
  std::multiset<Arc> a(arcs_.begin(), arcs_.end()), b(other.arcs_.begin(), other.arcs_.end());
  return a == b;
}

// ---------------------------------------------------------------------------
// tree conversion

namespace {

class NetBuilder {
 public:
  explicit NetBuilder(const ProcessTree& t) { out_.node_transition.resize(t.node_count()); }

  TreeNet build(const ProcessTree& t) {
    const auto source = place();
    const auto sink = place();
    std::size_t preorder = 0;
    block(t, source, sink, preorder);
    auto& net = out_.net;
    auto init = net.empty_marking();
    init.add(source);
    auto fin = net.empty_marking();
    fin.add(sink);
    net.set_initial_marking(std::move(init));
    net.set_final_marking(std::move(fin));
    return std::move(out_);
  }

 private:
  PlaceId place() { return out_.net.add_place("p" + std::to_string(out_.net.places().size())); }

  TransitionId transition(std::string label, bool silent, PlaceId in, PlaceId out) {
    auto& net = out_.net;
    const auto t = net.add_transition("t" + std::to_string(net.transitions().size()), std::move(label), silent);
    net.add_arc(in, t);
    net.add_arc(t, out);
    return t;
  }

  void block(const ProcessTree& t, PlaceId entry, PlaceId exit, std::size_t& preorder) {
    const std::size_t self = preorder++;
    auto& net = out_.net;
    switch (t.kind()) {
      case NodeKind::Activity:
        out_.node_transition[self] = transition(t.label(), false, entry, exit);
        return;
      case NodeKind::Tau:
        out_.node_transition[self] = transition("", true, entry, exit);
        return;
      case NodeKind::Seq: {
        PlaceId from = entry;
        const auto& kids = t.children();
        for (std::size_t i = 0; i < kids.size(); ++i) {
          const PlaceId to = i + 1 == kids.size() ? exit : place();
          block(kids[i], from, to, preorder);
          from = to;
        }
        return;
      }
      case NodeKind::Xor:
        for (const auto& c : t.children()) block(c, entry, exit, preorder);
        return;
      case NodeKind::And: {
        const auto split = net.add_transition("t" + std::to_string(net.transitions().size()), "", true);
        net.add_arc(entry, split);
        std::vector<PlaceId> outs;
        for (const auto& c : t.children()) {
          const auto pin = place();
          const auto pout = place();
          net.add_arc(split, pin);
          block(c, pin, pout, preorder);
          outs.push_back(pout);
        }
        const auto join = net.add_transition("t" + std::to_string(net.transitions().size()), "", true);
        for (auto p : outs) net.add_arc(p, join);
        net.add_arc(join, exit);
        out_.node_transition[self] = split;
        return;
      }
      case NodeKind::Loop: {
        const auto start = place();
        const auto end = place();
        out_.node_transition[self] = transition("", true, entry, start);
        const auto& kids = t.children();
        block(kids.front(), start, end, preorder);
        for (std::size_t i = 1; i < kids.size(); ++i) block(kids[i], end, start, preorder);
        transition("", true, end, exit);
        return;
      }
    }
  }

  TreeNet out_;
};

}  // namespace

TreeNet convert_tree(const ProcessTree& t) { return NetBuilder(t).build(t); }

PetriNet tree_to_petri_net(const ProcessTree& t) { return convert_tree(t).net; }

// ---------------------------------------------------------------------------
// token game

bool is_enabled(const PetriNet& net, const Marking& m, TransitionId t) {
  // Repeated input places need one token per arc.
  const auto& pre = net.preset(t);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    const auto need = static_cast<std::uint32_t>(std::count(pre.begin(), pre.end(), pre[i]));
    if (m[pre[i]] < need) return false;
  }
  return true;
}

std::vector<TransitionId> enabled_transitions(const PetriNet& net, const Marking& m) {
  std::vector<TransitionId> out;
  if (m.place_count() != net.places().size()) return out;
  for (std::size_t i = 0; i < net.transitions().size(); ++i)
    if (is_enabled(net, m, TransitionId(i))) out.push_back(TransitionId(i));
  return out;
}

Marking fire(const PetriNet& net, const Marking& m, TransitionId t) {
  if (index(t) >= net.transitions().size() || m.place_count() != net.places().size() ||
      !is_enabled(net, m, t))
    throw NotEnabled(index(t) < net.transitions().size() ? net.transition(t).name
                                                         : std::to_string(index(t)));
  Marking next = m;
  for (auto p : net.preset(t)) next.remove(p);
  for (auto p : net.postset(t)) next.add(p);
  return next;
}

namespace {

// Marking plus the number of rounds taken so far by each bounded loop.
using State = std::pair<Marking, std::vector<std::size_t>>;

// Per transition, the loops it enters (resetting their count) and the loops
// it sends around again.
struct LoopBounds {
  std::vector<std::vector<std::size_t>> resets, rounds;
  std::size_t max_rounds = 0;

  std::optional<State> fire(const PetriNet& net, const State& s, TransitionId t) const {
    State next{alarmtop::fire(net, s.first, t), s.second};
    if (rounds.empty()) return next;
    for (auto l : resets[index(t)]) next.second[l] = 0;
    for (auto l : rounds[index(t)])
      if (++next.second[l] > max_rounds) return std::nullopt;
    return next;
  }
};

std::set<State> silent_closure(const PetriNet& net, const LoopBounds& bounds, const State& s, std::size_t& spent,
                               std::size_t budget) {
  std::set<State> seen{s};
  std::deque<State> queue{s};
  while (!queue.empty()) {
    const State cur = std::move(queue.front());
    queue.pop_front();
    for (auto t : enabled_transitions(net, cur.first)) {
      if (!net.transition(t).silent) continue;
      auto next = bounds.fire(net, cur, t);
      if (next && seen.insert(*next).second) {
        if (++spent > budget) throw StateBudgetExceeded(budget);
        queue.push_back(std::move(*next));
      }
    }
  }
  return seen;
}

Language bounded_language(const PetriNet& net, const LoopBounds& bounds, std::size_t loops, std::size_t max_len,
                          std::size_t budget) {
  using Word = std::vector<std::string>;
  Language result;
  std::size_t spent = 0;
  std::map<Word, std::set<State>> level;
  level[{}] = silent_closure(net, bounds, State{net.initial_marking(), std::vector<std::size_t>(loops, 0)}, spent,
                             budget);

  for (std::size_t len = 0;; ++len) {
    std::map<Word, std::set<State>> next;
    for (const auto& [word, states] : level) {
      for (const auto& s : states)
        if (s.first == net.final_marking()) {
          result.insert(word);
          break;
        }
      if (len == max_len) continue;
      for (const auto& s : states)
        for (auto t : enabled_transitions(net, s.first)) {
          const auto& tr = net.transition(t);
          if (tr.silent) continue;
          const auto fired = bounds.fire(net, s, t);
          if (!fired) continue;
          Word w = word;
          w.push_back(tr.label);
          auto& bucket = next[std::move(w)];
          for (auto& r : silent_closure(net, bounds, *fired, spent, budget)) bucket.insert(r);
        }
    }
    if (next.empty()) break;
    level = std::move(next);
  }
  return result;
}

}  // namespace

Language net_language(const PetriNet& net, std::size_t max_len, std::size_t budget) {
  return bounded_language(net, LoopBounds{}, 0, max_len, budget);
}

Language net_language(const TreeNet& tn, const ProcessTree& tree, std::size_t max_len, std::size_t max_loop_unroll,
                      std::size_t budget) {
  const auto& net = tn.net;
  if (tn.node_transition.size() != tree.node_count())
    throw std::invalid_argument("tree does not match the converted net");
  LoopBounds bounds;
  bounds.max_rounds = max_loop_unroll;
  bounds.resets.resize(net.transitions().size());
  bounds.rounds.resize(net.transitions().size());
  std::size_t loops = 0;
  for (std::size_t i = 0; i < tree.node_count(); ++i) {
    if (node_at(tree, i).kind() != NodeKind::Loop) continue;
    // The entry marks the loop's start place; every other transition that
    // marks it closes one redo round.
    const auto entry = *tn.node_transition[i];
    const auto start = net.postset(entry).front();
    bounds.resets[index(entry)].push_back(loops);
    for (std::size_t t = 0; t < net.transitions().size(); ++t) {
      const auto id = static_cast<TransitionId>(t);
      const auto& post = net.postset(id);
      if (id != entry && std::find(post.begin(), post.end(), start) != post.end()) bounds.rounds[t].push_back(loops);
    }
    ++loops;
  }
  return bounded_language(net, bounds, loops, max_len, budget);
}

SoundnessReport check_soundness(const PetriNet& net, std::size_t budget) {
  std::map<Marking, std::size_t> ids;
  std::vector<Marking> states;
  std::vector<std::vector<std::size_t>> reverse;
  std::vector<bool> fired(net.transitions().size(), false);

  auto intern = [&](const Marking& m) {
    auto [it, inserted] = ids.emplace(m, states.size());
    if (inserted) {
      if (states.size() >= budget) throw StateBudgetExceeded(budget);
      states.push_back(m);
      reverse.emplace_back();
    }
    return std::pair{it->second, inserted};
  };

  std::deque<std::size_t> queue{intern(net.initial_marking()).first};
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (auto t : enabled_transitions(net, states[cur])) {
      fired[index(t)] = true;
      const auto [nid, fresh] = intern(fire(net, states[cur], t));
      reverse[nid].push_back(cur);
      if (fresh) queue.push_back(nid);
    }
  }

  SoundnessReport rep;
  rep.reachable_markings = states.size();
  std::vector<bool> reaches_final(states.size(), false);
  if (auto it = ids.find(net.final_marking()); it != ids.end()) {
    std::deque<std::size_t> back{it->second};
    reaches_final[it->second] = true;
    while (!back.empty()) {
      const auto s = back.front();
      back.pop_front();
      for (auto p : reverse[s])
        if (!reaches_final[p]) {
          reaches_final[p] = true;
          back.push_back(p);
        }
    }
  }
  rep.option_to_complete = std::all_of(reaches_final.begin(), reaches_final.end(), [](bool b) { return b; });

  rep.proper_completion = true;
  const auto& fin = net.final_marking().counts();
  for (const auto& m : states) {
    const auto& c = m.counts();
    bool covers = true;
    for (std::size_t i = 0; i < c.size(); ++i) covers = covers && c[i] >= fin[i];
    if (covers && m != net.final_marking()) rep.proper_completion = false;
  }
  rep.no_dead_transitions = std::all_of(fired.begin(), fired.end(), [](bool b) { return b; });
  return rep;
}

bool is_workflow_net(const PetriNet& net) {
  const std::size_t np = net.places().size(), nt = net.transitions().size();
  if (np == 0) return false;
  std::vector<int> in_deg(np, 0), out_deg(np, 0);
  for (const auto& a : net.arcs()) (a.into_transition ? out_deg : in_deg)[index(a.place)]++;

  std::optional<std::size_t> source, sink;
  for (std::size_t p = 0; p < np; ++p) {
    if (in_deg[p] == 0) {
      if (source) return false;
      source = p;
    }
    if (out_deg[p] == 0) {
      if (sink) return false;
      sink = p;
    }
  }
  if (!source || !sink) return false;
  for (std::size_t p = 0; p < np; ++p) {
    const auto want_init = p == *source ? 1u : 0u;
    const auto want_final = p == *sink ? 1u : 0u;
    if (net.initial_marking().counts()[p] != want_init || net.final_marking().counts()[p] != want_final)
      return false;
  }

  // Nodes 0..np-1 are places, np.. are transitions.
  std::vector<std::vector<std::size_t>> fwd(np + nt), bwd(np + nt);
  for (const auto& a : net.arcs()) {
    const std::size_t p = index(a.place), t = np + index(a.transition);
    if (a.into_transition) {
      fwd[p].push_back(t);
      bwd[t].push_back(p);
    } else {
      fwd[t].push_back(p);
      bwd[p].push_back(t);
    }
  }
  auto reach = [&](std::size_t from, const std::vector<std::vector<std::size_t>>& g) {
    std::vector<bool> seen(np + nt, false);
    std::deque<std::size_t> q{from};
    seen[from] = true;
    while (!q.empty()) {
      const auto n = q.front();
      q.pop_front();
      for (auto m : g[n])
        if (!seen[m]) {
          seen[m] = true;
          q.push_back(m);
        }
    }
    return seen;
  };
  const auto from_source = reach(*source, fwd);
  const auto to_sink = reach(*sink, bwd);
  for (std::size_t n = 0; n < np + nt; ++n)
    if (!from_source[n] || !to_sink[n]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// export

namespace {

std::string escape(std::string_view s, bool xml) {
  std::string out;
  for (char c : s) {
    if (xml) {
      switch (c) {
        case '&': out += "&amp;"; continue;
        case '<': out += "&lt;"; continue;
        case '>': out += "&gt;"; continue;
        case '"': out += "&quot;"; continue;
        case '\'': out += "&apos;"; continue;
      }
    } else if (c == '"' || c == '\\') {
      out += '\\';
    }
    out += c;
  }
  return out;
}

}  // namespace

std::string export_dot(const PetriNet& net) {
  std::ostringstream out;
  out << "digraph petri_net {\n";
  out << "  rankdir=LR;\n";
  for (std::size_t i = 0; i < net.places().size(); ++i) {
    const auto tokens = net.initial_marking().counts()[i];
    const bool is_final = net.final_marking().counts()[i] > 0;
    out << "  \"" << escape(net.places()[i].name, false) << "\" [shape=circle, label=\""
        << (tokens ? std::string(tokens, '*') : "") << "\"" << (is_final ? ", peripheries=2" : "")
        << "];\n";
  }
  for (const auto& t : net.transitions()) {
    out << "  \"" << escape(t.name, false) << "\" [shape=box, ";
    if (t.silent)
      out << "style=filled, fillcolor=black, label=\"\", width=0.2";
    else
      out << "label=\"" << escape(t.label, false) << "\"";
    out << "];\n";
  }
  for (const auto& a : net.arcs()) {
    const auto& p = escape(net.places()[index(a.place)].name, false);
    const auto& t = escape(net.transition(a.transition).name, false);
    if (a.into_transition)
      out << "  \"" << p << "\" -> \"" << t << "\";\n";
    else
      out << "  \"" << t << "\" -> \"" << p << "\";\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_pnml(const PetriNet& net) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<pnml>\n";
  out << "  <net id=\"net1\" type=\"http://www.pnml.org/version-2009/grammar/pnmlcoremodel\">\n";
  out << "    <page id=\"page1\">\n";
  for (std::size_t i = 0; i < net.places().size(); ++i) {
    const auto name = escape(net.places()[i].name, true);
    out << "      <place id=\"" << name << "\">\n";
    out << "        <name><text>" << name << "</text></name>\n";
    if (const auto n = net.initial_marking().counts()[i])
      out << "        <initialMarking><text>" << n << "</text></initialMarking>\n";
    out << "      </place>\n";
  }
  for (const auto& t : net.transitions()) {
    out << "      <transition id=\"" << escape(t.name, true) << "\">\n";
    out << "        <name><text>" << escape(t.label, true) << "</text></name>\n";
    if (t.silent) out << "        <toolspecific tool=\"alarmtop\" version=\"1.0\" silent=\"true\"/>\n";
    out << "      </transition>\n";
  }
  for (std::size_t i = 0; i < net.arcs().size(); ++i) {
    const auto& a = net.arcs()[i];
    const auto p = escape(net.places()[index(a.place)].name, true);
    const auto t = escape(net.transition(a.transition).name, true);
    out << "      <arc id=\"a" << i << "\" source=\"" << (a.into_transition ? p : t) << "\" target=\""
        << (a.into_transition ? t : p) << "\"/>\n";
  }
  out << "    </page>\n";
  out << "    <toolspecific tool=\"alarmtop\" version=\"1.0\">\n";
  out << "      <finalMarking>\n";
  for (std::size_t i = 0; i < net.places().size(); ++i)
    if (const auto n = net.final_marking().counts()[i])
      out << "        <place idref=\"" << escape(net.places()[i].name, true) << "\"><text>" << n
          << "</text></place>\n";
  out << "      </finalMarking>\n";
  out << "    </toolspecific>\n";
  out << "  </net>\n";
  out << "</pnml>\n";
  return out.str();
}

PetriNet import_pnml(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw Error(std::string("malformed PNML: ") + e.what());
  }

  auto token_count = [](const pt::ptree& node) -> std::uint32_t {
    const auto text = node.get<std::string>("text", "0");
    try {
      return static_cast<std::uint32_t>(std::stoul(text));
    } catch (const std::exception&) {
      throw Error("malformed PNML: bad token count '" + text + "'");
    }
  };

  try {
    const auto& net_node = doc.get_child("pnml.net");
    PetriNet net;
    std::map<std::string, std::uint32_t> initial;
    std::vector<std::pair<std::string, std::string>> arcs;

    for (const auto& [tag, page] : net_node) {
      if (tag != "page") continue;
      for (const auto& [kind, node] : page) {
        if (kind == "place") {
          const auto id = node.get<std::string>("<xmlattr>.id");
          net.add_place(id);
          if (auto im = node.get_child_optional("initialMarking")) initial[id] = token_count(*im);
        } else if (kind == "transition") {
          bool silent = false;
          for (const auto& [k, spec] : node)
            if (k == "toolspecific" && spec.get<std::string>("<xmlattr>.silent", "false") == "true") silent = true;
          net.add_transition(node.get<std::string>("<xmlattr>.id"), node.get<std::string>("name.text", ""),
                             silent);
        } else if (kind == "arc") {
          arcs.emplace_back(node.get<std::string>("<xmlattr>.source"), node.get<std::string>("<xmlattr>.target"));
        }
      }
    }
    for (const auto& [src, dst] : arcs) {
      if (auto p = net.find_place(src)) {
        auto t = net.find_transition(dst);
        if (!t) throw Error("malformed PNML: arc target '" + dst + "' is not a transition");
        net.add_arc(*p, *t);
      } else if (auto t = net.find_transition(src)) {
        auto q = net.find_place(dst);
        if (!q) throw Error("malformed PNML: arc target '" + dst + "' is not a place");
        net.add_arc(*t, *q);
      } else {
        throw Error("malformed PNML: unknown arc source '" + src + "'");
      }
    }

    auto init = net.empty_marking();
    for (const auto& [id, n] : initial) init.add(*net.find_place(id), n);
    auto fin = net.empty_marking();
    for (const auto& [tag, spec] : net_node) {
      if (tag != "toolspecific") continue;
      if (auto fm = spec.get_child_optional("finalMarking"))
        for (const auto& [k, p] : *fm) {
          if (k != "place") continue;
          const auto id = p.get<std::string>("<xmlattr>.idref");
          const auto place = net.find_place(id);
          if (!place) throw Error("malformed PNML: final marking names unknown place '" + id + "'");
          fin.add(*place, token_count(p));
        }
    }
    net.set_initial_marking(std::move(init));
    net.set_final_marking(std::move(fin));
    return net;
  } catch (const pt::ptree_error& e) {
    throw Error(std::string("malformed PNML: ") + e.what());
  }
}

}  // namespace alarmtop
