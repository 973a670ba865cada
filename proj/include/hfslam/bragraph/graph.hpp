#pragma once

/**
 * Structural validator for generation-inference allocation graphs: labeled
 * directed graphs whose links each belong to the generative process, the
 * inference process, or the next-time generative process (a generative
 * dependency that crosses one time step and thereby legitimizes loops).
 *
 * Rules checked by validate():
 *   R1  every link carries exactly one allocation
 *   R2  the generative subgraph without next-time links is acyclic
 *   R3  next-time links must do real work: every cycle of the full
 *       generative subgraph carries one (equivalent to R2 and therefore
 *       reported once, under R2, when a bare cycle exists), and every
 *       next-time link lies on at least one generative cycle
 *   R4  pathway annotations match allocations: feedforward => inference,
 *       feedback => generative
 *   R5  every observed node touches at least one generative-process link
 *
 * Links violating R1 are excluded from the structural checks R2-R5.
 */

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hfslam::bragraph {

enum class Allocation { generative, inference, next_time_generative };
enum class Pathway { feedforward, feedback };
enum class NodeRole { unspecified, observed, latent };

struct GraphNode {
  std::string id;
  NodeRole role = NodeRole::unspecified;
  std::string equivalence_group;  // same-variable annotation; ignored by validate
};

struct GraphLink {
  std::string src;
  std::string dst;
  std::vector<Allocation> allocations;  // well-formed links carry exactly one
  std::optional<Pathway> pathway;
  int line = 0;
};

struct AllocationGraph {
  std::string name;
  std::vector<GraphNode> nodes;
  std::vector<GraphLink> links;

  static AllocationGraph load(std::istream& in);
  void save(std::ostream& out) const;

  int node_index(const std::string& id) const;  // -1 when missing
};

struct Violation {
  std::string rule;  // "R1".."R5"
  std::string message;
};

/// All rule violations; empty report means the graph passes. Pure and
/// independent of link listing order.
std::vector<Violation> validate(const AllocationGraph& g);

struct CycleInfo {
  std::vector<std::string> node_path;  // closed walk, first node repeated last
  int next_time_count = 0;
};

/// Every simple cycle of the full generative subgraph (generative plus
/// next-time links), with its next-time link count. Throws CapacityError
/// past 10^4 cycles.
std::vector<CycleInfo> cycle_report(const AllocationGraph& g);

std::string to_string(Allocation a);
std::string to_string(Pathway p);

}  // namespace hfslam::bragraph
