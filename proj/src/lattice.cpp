#include "gkpft/lattice.hpp"

#include <cassert>
#include <stdexcept>
#include <string>

namespace gkpft {

namespace {

int wrap(int v, int period) {
  int r = v % period;
  return r < 0 ? r + period : r;
}

NodeCoord shifted(NodeCoord c, int axis, int delta, int period) {
  switch (axis) {
    case 0: c.x = wrap(c.x + delta, period); break;
    case 1: c.y = wrap(c.y + delta, period); break;
    default: c.z = wrap(c.z + delta, period); break;
  }
  return c;
}

}  // namespace

std::uint64_t RhgLattice::coord_key(NodeCoord c) const {
  const auto p = static_cast<std::uint64_t>(period());
  return (static_cast<std::uint64_t>(c.x) * p + c.y) * p + c.z;
}

RhgLattice::RhgLattice(const LatticeSpec& spec) : d_(spec.distance) {
  if (d_ < 2) {
    throw std::invalid_argument("lattice distance must be at least 2, got " +
                                std::to_string(d_));
  }
  const int p = period();

  // Enumerate macronodes in lexicographic coordinate order. A site carries a
  // macronode iff it has one or two odd coordinates.
  for (int x = 0; x < p; ++x) {
    for (int y = 0; y < p; ++y) {
      for (int z = 0; z < p; ++z) {
        const int ox = x & 1, oy = y & 1, oz = z & 1;
        const int odd = ox + oy + oz;
        if (odd != 1 && odd != 2) continue;
        MacronodeInfo n;
        n.coord = {x, y, z};
        n.role = (odd == 2) ? NodeRole::face : NodeRole::edge;
        if (odd == 2) {
          n.axis = !ox ? 0 : (!oy ? 1 : 2);  // the even (normal) axis
        } else {
          n.axis = ox ? 0 : (oy ? 1 : 2);  // the odd (direction) axis
        }
        coord_to_node_[coord_key(n.coord)] = static_cast<int>(nodes_.size());
        nodes_.push_back(n);
      }
    }
  }

  // Wire up slots. The varying axes are the two axes other than n.axis; slot
  // order is (lower axis, -1), (lower axis, +1), (higher axis, -1),
  // (higher axis, +1).
  for (auto& n : nodes_) {
    int slot = 0;
    for (int axis = 0; axis < 3; ++axis) {
      if (axis == n.axis) continue;
      for (int delta : {-1, +1}) {
        const int idx = node_at(shifted(n.coord, axis, delta, p));
        assert(idx >= 0);
        n.neighbor[slot++] = idx;
      }
    }
  }
  for (int i = 0; i < num_nodes(); ++i) {
    auto& n = nodes_[i];
    for (int j = 0; j < 4; ++j) {
      const auto& m = nodes_[n.neighbor[j]];
      int back = -1;
      for (int k = 0; k < 4; ++k) {
        if (m.neighbor[k] == i) {
          assert(back == -1);
          back = k;
        }
      }
      assert(back >= 0);
      n.partner_slot[j] = back;
    }
  }

  // Parity checks: six faces around each all-odd center.
  for (int x = 1; x < p; x += 2) {
    for (int y = 1; y < p; y += 2) {
      for (int z = 1; z < p; z += 2) {
        StabilizerCube cube;
        cube.center = {x, y, z};
        int f = 0;
        for (int axis = 0; axis < 3; ++axis) {
          for (int delta : {-1, +1}) {
            const int idx = node_at(shifted(cube.center, axis, delta, p));
            assert(idx >= 0 && nodes_[idx].role == NodeRole::face);
            cube.faces[f++] = idx;
          }
        }
        coord_to_cube_[coord_key(cube.center)] =
            static_cast<int>(cubes_.size());
        cubes_.push_back(cube);
      }
    }
  }
  cube_links_.resize(cubes_.size());
  for (std::size_t c = 0; c < cubes_.size(); ++c) {
    int f = 0;
    for (int axis = 0; axis < 3; ++axis) {
      for (int delta : {-1, +1}) {
        CubeLink link;
        link.cube = cube_at(shifted(cubes_[c].center, axis, 2 * delta, p));
        link.face = cubes_[c].faces[f];
        assert(link.cube >= 0);
        cube_links_[c][f++] = link;
      }
    }
  }

  for (int axis = 0; axis < 3; ++axis) {
    surfaces_[axis].axis = axis;
    for (int i = 0; i < num_nodes(); ++i) {
      if (nodes_[i].role == NodeRole::face && nodes_[i].axis == axis) {
        surfaces_[axis].faces.push_back(i);
      }
    }
  }
}

int RhgLattice::node_at(NodeCoord c) const {
  const int p = period();
  c = {wrap(c.x, p), wrap(c.y, p), wrap(c.z, p)};
  auto it = coord_to_node_.find(coord_key(c));
  return it == coord_to_node_.end() ? -1 : it->second;
}

int RhgLattice::cube_at(NodeCoord center) const {
  const int p = period();
  center = {wrap(center.x, p), wrap(center.y, p), wrap(center.z, p)};
  auto it = coord_to_cube_.find(coord_key(center));
  return it == coord_to_cube_.end() ? -1 : it->second;
}

int RhgLattice::neighbor_slot(int node, int neighbor) const {
  const auto& n = nodes_.at(node);
  for (int j = 0; j < 4; ++j) {
    if (n.neighbor[j] == neighbor) return j + 1;
  }
  throw std::invalid_argument("nodes " + std::to_string(node) + " and " +
                              std::to_string(neighbor) +
                              " are not lattice neighbors");
}

int mode_index(int node, int slot) {
  if (node < 1 || slot < 1 || slot > 4) {
    throw std::invalid_argument("mode_index expects 1-based node and slot");
  }
  return 4 * (node - 1) + slot;
}

}  // namespace gkpft
