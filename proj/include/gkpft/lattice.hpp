#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace gkpft {

// Periodic macronode cluster geometry on a cubic cell complex of linear size
// d, addressed in doubled integer coordinates [0, 2d)^3:
//   - primal vertices sit at all-even triples,
//   - "edge" macronodes sit at edge midpoints (exactly one odd coordinate),
//   - "face" macronodes sit at face centers (exactly two odd coordinates).
// Every macronode hosts four optical modes (slots 1..4); each slot is wired
// to one slot of one of the node's four lattice neighbors.

enum class NodeRole : std::uint8_t { face, edge };

struct LatticeSpec {
  int distance = 3;
};

struct NodeCoord {
  int x = 0;
  int y = 0;
  int z = 0;

  bool operator==(const NodeCoord& o) const {
    return x == o.x && y == o.y && z == o.z;
  }
};

struct MacronodeInfo {
  NodeCoord coord;
  NodeRole role;
  // face: the unique even (normal) axis; edge: the unique odd (direction)
  // axis. Axes are 0=x, 1=y, 2=z.
  int axis = -1;
  // Slot j (0-based) holds the node index of the j-th neighbor. Slot order
  // is fixed by direction: the lower of the two varying axes first, minus
  // sign before plus sign.
  std::array<int, 4> neighbor{};
  // Reciprocal slot: this node occupies slot partner_slot[j] (0-based) in
  // neighbor[j]'s own slot list.
  std::array<int, 4> partner_slot{};
};

// One bulk parity check: the six face macronodes around an all-odd center.
struct StabilizerCube {
  NodeCoord center;
  // Order: x-, x+, y-, y+, z-, z+ relative to the center.
  std::array<int, 6> faces{};
};

// Adjacent cube sharing one face, in the same x-,x+,...,z+ order.
struct CubeLink {
  int cube = -1;
  int face = -1;
};

// All face macronodes with a common normal axis; parity of the error on this
// set is the logical failure indicator for that axis.
struct CorrelationSurface {
  int axis = -1;
  std::vector<int> faces;
};

class RhgLattice {
 public:
  explicit RhgLattice(const LatticeSpec& spec);

  int distance() const { return d_; }
  int period() const { return 2 * d_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_modes() const { return 4 * num_nodes(); }

  const std::vector<MacronodeInfo>& nodes() const { return nodes_; }
  const MacronodeInfo& node(int i) const { return nodes_[i]; }

  // Index of the node at (periodically reduced) coordinates, or -1 if that
  // site holds no macronode.
  int node_at(NodeCoord c) const;

  const std::vector<StabilizerCube>& cubes() const { return cubes_; }
  const std::vector<std::array<CubeLink, 6>>& cube_links() const {
    return cube_links_;
  }
  int cube_at(NodeCoord center) const;

  const std::array<CorrelationSurface, 3>& surfaces() const {
    return surfaces_;
  }

  // 1-based slot (1..4) that `neighbor` occupies in `node`'s slot list.
  // Throws std::invalid_argument if the two nodes are not adjacent.
  int neighbor_slot(int node, int neighbor) const;

 private:
  int d_ = 0;
  std::vector<MacronodeInfo> nodes_;
  std::vector<StabilizerCube> cubes_;
  std::vector<std::array<CubeLink, 6>> cube_links_;
  std::array<CorrelationSurface, 3> surfaces_;
  std::unordered_map<std::uint64_t, int> coord_to_node_;
  std::unordered_map<std::uint64_t, int> coord_to_cube_;

  std::uint64_t coord_key(NodeCoord c) const;
};

// Canonical flat indexing of modes used by file formats and the Gaussian
// layer: mode_index(k, j) for 1-based node k and slot j is 4*(k-1) + j,
// itself 1-based.
int mode_index(int node, int slot);

}  // namespace gkpft
