#include "hfslam/bragraph/graph.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "hfslam/statecore/errors.hpp"
#include "hfslam/statecore/textio.hpp"

namespace hfslam::bragraph {

using statecore::Record;
using statecore::RecordReader;
using statecore::RecordWriter;

std::string to_string(Allocation a) {
  switch (a) {
    case Allocation::generative: return "generative";
    case Allocation::inference: return "inference";
    case Allocation::next_time_generative: return "next_time_generative";
  }
  return "?";
}

std::string to_string(Pathway p) {
  return p == Pathway::feedforward ? "feedforward" : "feedback";
}

namespace {

Allocation parse_allocation(const std::string& s, int line) {
  if (s == "generative") return Allocation::generative;
  if (s == "inference") return Allocation::inference;
  if (s == "next_time_generative") return Allocation::next_time_generative;
  throw ParseError("unknown allocation '" + s + "'", line);
}

}  // namespace

int AllocationGraph::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

AllocationGraph AllocationGraph::load(std::istream& in) {
  RecordReader reader(in, "graph");
  AllocationGraph g;
  Record r;
  std::set<std::string> node_ids;
  std::set<std::string> link_triples;
  while (reader.next(r)) {
    if (r.name == "graph") {
      g.name = r.get("name");
    } else if (r.name == "node") {
      GraphNode n;
      n.id = r.get("id");
      if (!node_ids.insert(n.id).second) {
        throw ParseError("duplicate node id '" + n.id + "'", r.line);
      }
      const std::string role = r.get_or("role", "");
      if (role == "observed") {
        n.role = NodeRole::observed;
      } else if (role == "latent") {
        n.role = NodeRole::latent;
      } else if (!role.empty()) {
        throw ParseError("unknown node role '" + role + "'", r.line);
      }
      n.equivalence_group = r.get_or("equiv", "");
      g.nodes.push_back(std::move(n));
    } else if (r.name == "link") {
      GraphLink l;
      l.line = r.line;
      l.src = r.get("src");
      l.dst = r.get("dst");
      if (!node_ids.count(l.src)) throw ParseError("link names unknown node '" + l.src + "'", r.line);
      if (!node_ids.count(l.dst)) throw ParseError("link names unknown node '" + l.dst + "'", r.line);
      const std::string raw = r.get("allocation");
      std::size_t start = 0;
      while (start <= raw.size()) {
        const std::size_t pos = raw.find(',', start);
        const std::string one =
            pos == std::string::npos ? raw.substr(start) : raw.substr(start, pos - start);
        if (one.empty()) throw ParseError("empty allocation entry", r.line);
        l.allocations.push_back(parse_allocation(one, r.line));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      for (Allocation a : l.allocations) {
        const std::string triple = l.src + ">" + l.dst + ">" + to_string(a);
        if (!link_triples.insert(triple).second) {
          throw ParseError("duplicate link " + l.src + " -> " + l.dst + " [" + to_string(a) + "]",
                           r.line);
        }
      }
      const std::string pathway = r.get_or("pathway", "");
      if (pathway == "feedforward") {
        l.pathway = Pathway::feedforward;
      } else if (pathway == "feedback") {
        l.pathway = Pathway::feedback;
      } else if (!pathway.empty()) {
        throw ParseError("unknown pathway '" + pathway + "'", r.line);
      }
      g.links.push_back(std::move(l));
    } else {
      throw ParseError("unknown graph record '" + r.name + "'", r.line);
    }
  }
  return g;
}

void AllocationGraph::save(std::ostream& out) const {
  RecordWriter w(out, "graph");
  Record r;
  r.name = "graph";
  r.add("name", name);
  w.write(r);
  for (const auto& n : nodes) {
    r = {};
    r.name = "node";
    r.add("id", n.id);
    if (n.role == NodeRole::observed) r.add("role", "observed");
    if (n.role == NodeRole::latent) r.add("role", "latent");
    if (!n.equivalence_group.empty()) r.add("equiv", n.equivalence_group);
    w.write(r);
  }
  for (const auto& l : links) {
    r = {};
    r.name = "link";
    r.add("src", l.src).add("dst", l.dst);
    std::string alloc;
    for (std::size_t i = 0; i < l.allocations.size(); ++i) {
      if (i) alloc += ',';
      alloc += to_string(l.allocations[i]);
    }
    r.add("allocation", alloc);
    if (l.pathway.has_value()) r.add("pathway", to_string(*l.pathway));
    w.write(r);
  }
}

namespace {

struct Edge {
  int src, dst;
  bool next_time;
};

struct CycleEnumerator {
  const std::vector<std::string>& ids;  // sorted node ids
  std::vector<std::vector<std::pair<int, bool>>> adj;  // (dst, next_time)
  std::vector<CycleInfo> cycles;
  std::vector<bool> on_path;
  std::vector<int> path_nodes;
  int path_next_time = 0;
  int start = 0;
  std::size_t cap;

  CycleEnumerator(const std::vector<std::string>& ids_, const std::vector<Edge>& edges,
                  std::size_t cap_)
      : ids(ids_), adj(ids_.size()), on_path(ids_.size(), false), cap(cap_) {
    for (const auto& e : edges) adj[e.src].emplace_back(e.dst, e.next_time);
    for (auto& a : adj) std::sort(a.begin(), a.end());
  }

  void record() {
    if (cycles.size() >= cap) {
      throw CapacityError("cycle enumeration exceeded " + std::to_string(cap) + " simple cycles");
    }
    CycleInfo c;
    for (int v : path_nodes) c.node_path.push_back(ids[v]);
    c.node_path.push_back(ids[start]);
    c.next_time_count = path_next_time;
    cycles.push_back(std::move(c));
  }

  void dfs(int v) {
    for (const auto& [w, nt] : adj[v]) {
      if (w == start) {
        path_next_time += nt ? 1 : 0;
        record();
        path_next_time -= nt ? 1 : 0;
      } else if (w > start && !on_path[w]) {
        on_path[w] = true;
        path_nodes.push_back(w);
        path_next_time += nt ? 1 : 0;
        dfs(w);
        path_next_time -= nt ? 1 : 0;
        path_nodes.pop_back();
        on_path[w] = false;
      }
    }
  }

  std::vector<CycleInfo> run() {
    for (start = 0; start < static_cast<int>(ids.size()); ++start) {
      on_path[start] = true;
      path_nodes = {start};
      dfs(start);
      on_path[start] = false;
    }
    return cycles;
  }
};

constexpr std::size_t kMaxCycles = 10000;

struct SubgraphView {
  std::vector<std::string> ids;  // sorted
  std::vector<Edge> edges;
  std::map<std::string, int> index;
};

// Links violating R1 (multiple allocations) are excluded entirely.
SubgraphView generative_subgraph(const AllocationGraph& g, bool include_next_time) {
  SubgraphView v;
  for (const auto& n : g.nodes) v.ids.push_back(n.id);
  std::sort(v.ids.begin(), v.ids.end());
  for (std::size_t i = 0; i < v.ids.size(); ++i) v.index[v.ids[i]] = static_cast<int>(i);
  for (const auto& l : g.links) {
    if (l.allocations.size() != 1) continue;
    const Allocation a = l.allocations[0];
    if (a == Allocation::generative ||
        (include_next_time && a == Allocation::next_time_generative)) {
      v.edges.push_back(Edge{v.index.at(l.src), v.index.at(l.dst),
                             a == Allocation::next_time_generative});
    }
  }
  return v;
}

std::string cycle_text(const CycleInfo& c) {
  std::string out;
  for (std::size_t i = 0; i < c.node_path.size(); ++i) {
    if (i) out += " -> ";
    out += c.node_path[i];
  }
  return out;
}

}  // namespace

std::vector<CycleInfo> cycle_report(const AllocationGraph& g) {
  SubgraphView v = generative_subgraph(g, true);
  return CycleEnumerator(v.ids, v.edges, kMaxCycles).run();
}

std::vector<Violation> validate(const AllocationGraph& g) {
  std::vector<Violation> out;

  // R1: exactly one allocation per link
  for (const auto& l : g.links) {
    if (l.allocations.size() != 1) {
      out.push_back({"R1", "link " + l.src + " -> " + l.dst + " carries " +
                               std::to_string(l.allocations.size()) +
                               " allocations, expected exactly 1"});
    }
  }

  // R2: the generative subgraph without next-time links must be acyclic
  {
    SubgraphView plain = generative_subgraph(g, false);
    const auto cycles = CycleEnumerator(plain.ids, plain.edges, kMaxCycles).run();
    for (const auto& c : cycles) {
      out.push_back({"R2", "generative cycle with no next-time link: " + cycle_text(c)});
    }
  }

  // R3: bare cycles of the full generative subgraph are the R2 cycles and
  // are reported there; here every next-time link must sit on some cycle
  {
    const auto cycles = cycle_report(g);
    for (const auto& l : g.links) {
      if (l.allocations.size() != 1 || l.allocations[0] != Allocation::next_time_generative) {
        continue;
      }
      bool on_cycle = false;
      for (const auto& c : cycles) {
        for (std::size_t i = 0; i + 1 < c.node_path.size() && !on_cycle; ++i) {
          if (c.node_path[i] == l.src && c.node_path[i + 1] == l.dst) on_cycle = true;
        }
        if (on_cycle) break;
      }
      if (!on_cycle) {
        out.push_back({"R3", "next-time link " + l.src + " -> " + l.dst +
                                 " lies on no generative cycle"});
      }
    }
  }

  // R4: pathway annotations constrain allocations
  for (const auto& l : g.links) {
    if (l.allocations.size() != 1 || !l.pathway.has_value()) continue;
    const Allocation a = l.allocations[0];
    if (*l.pathway == Pathway::feedforward && a != Allocation::inference) {
      out.push_back({"R4", "feedforward link " + l.src + " -> " + l.dst +
                               " must be inference, is " + to_string(a)});
    }
    if (*l.pathway == Pathway::feedback && a == Allocation::inference) {
      out.push_back({"R4", "feedback link " + l.src + " -> " + l.dst +
                               " must be generative, is inference"});
    }
  }

  // R5: observed nodes must touch the generative process
  for (const auto& n : g.nodes) {
    if (n.role != NodeRole::observed) continue;
    bool touched = false;
    for (const auto& l : g.links) {
      if (l.allocations.size() != 1) continue;
      const Allocation a = l.allocations[0];
      if (a == Allocation::inference) continue;
      if (l.src == n.id || l.dst == n.id) {
        touched = true;
        break;
      }
    }
    if (!touched) {
      out.push_back({"R5", "observed node " + n.id + " has no incident generative link"});
    }
  }

  std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return a.rule != b.rule ? a.rule < b.rule : a.message < b.message;
  });
  return out;
}

}  // namespace hfslam::bragraph
