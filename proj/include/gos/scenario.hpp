#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "gos/codec.hpp"
#include "gos/forwarding.hpp"
#include "gos/topology.hpp"

namespace gos {

struct FlowSpec {
  uint32_t fec = 0;
  std::string src;
  std::string dst;
  int64_t rate_bps = 0;
  uint32_t packet_size_bytes = 1500;
  GosLevel level;
  double start_s = 0;
  double stop_s = -1;  // < 0: run until scenario end
  int line = 0;
};

enum class GosMarkMode : uint8_t { None, List, TopDegree, Spacing };

struct ScenarioSpec {
  // Exactly one topology source.
  std::optional<std::string> topo_path;
  std::optional<uint64_t> generate_seed;
  std::optional<std::string> topo_inline_text;

  GosMarkMode mark_mode = GosMarkMode::None;
  std::vector<std::string> gos_list;
  size_t top_degree_k = 0;
  size_t spacing_k = 0;
  uint64_t gos_buffer_bytes = 1 << 20;

  std::vector<FlowSpec> flows;
  DropConfig drop;

  double duration_s = 0;
  double sample_interval_s = 1;
  double d_gos = 1.0;
  int reorder_window = 3;
  bool poisson = false;
  bool gos_enabled = true;
  uint64_t reservation_unit_bytes = 1500;
};

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(std::vector<std::string> problems);
  std::vector<std::string> issues;
};

// Line oriented scenario text; see README for the grammar. Parse errors and
// validation failures are collected and thrown together.
ScenarioSpec parse_scenario(std::istream& in, const std::string& source_name = "scenario");
ScenarioSpec parse_scenario_file(const std::string& path);

// Loads, generates, or parses the inline topology.
Topology realize_topology(const ScenarioSpec& spec);

// Applies the gos_nodes section to the topology. Spacing mode needs the
// routes of the privileged flows (GoS marked every k-th route node).
void apply_gos_marking(Topology& topo, const ScenarioSpec& spec,
                       const std::vector<RoutePath>& flow_routes);

// Cross-reference validation against a realized topology; throws
// ScenarioError listing every problem found.
void validate_scenario(const ScenarioSpec& spec, const Topology& topo);

// Builds a single-flow scenario over the given route with GoS capability at
// every k-th route node, so k acts as the physical-distance diameter knob.
ScenarioSpec diameter_spacing_scenario(const Topology& topo, const RoutePath& route, size_t k);

}  // namespace gos
