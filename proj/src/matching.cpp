#include "gkpft/matching.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

// Primal-dual blossom matcher. The structure follows the classic
// endpoint-based formulation: edge k has endpoints 2k (toward edges[k].u)
// and 2k+1 (toward edges[k].v); p ^ 1 is the opposite endpoint. Vertices are
// 0..n-1, nontrivial blossoms n..2n-1. Per stage, an alternating forest is
// grown from the unmatched vertices (labels: 1 = outer/S, 2 = inner/T) until
// an augmenting path is found or the duals prove there is none.

namespace gkpft {

namespace {

constexpr double kTol = 1e-9;

class Matcher {
 public:
  Matcher(int n, const std::vector<WeightedEdge>& edge_list,
          bool max_cardinality)
      : n_(n), edges_(edge_list), maxcard_(max_cardinality) {
    const int m = static_cast<int>(edges_.size());
    max_weight_ = 0.0;
    for (const auto& e : edges_) {
      if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_ || e.u == e.v) {
        throw std::invalid_argument("bad edge in matching graph");
      }
      max_weight_ = std::max(max_weight_, e.weight);
    }
    endpoint_.resize(2 * m);
    for (int k = 0; k < m; ++k) {
      endpoint_[2 * k] = edges_[k].u;
      endpoint_[2 * k + 1] = edges_[k].v;
    }
    neighbend_.assign(n_, {});
    for (int k = 0; k < m; ++k) {
      neighbend_[edges_[k].u].push_back(2 * k + 1);
      neighbend_[edges_[k].v].push_back(2 * k);
    }
    mate_.assign(n_, -1);
    label_.assign(2 * n_, 0);
    labelend_.assign(2 * n_, -1);
    inblossom_.resize(n_);
    for (int v = 0; v < n_; ++v) inblossom_[v] = v;
    blossomparent_.assign(2 * n_, -1);
    blossomchilds_.assign(2 * n_, {});
    blossombase_.assign(2 * n_, -1);
    for (int v = 0; v < n_; ++v) blossombase_[v] = v;
    blossomendps_.assign(2 * n_, {});
    bestedge_.assign(2 * n_, -1);
    blossombestedges_.assign(2 * n_, {});
    has_best_list_.assign(2 * n_, false);
    for (int b = 2 * n_ - 1; b >= n_; --b) unusedblossoms_.push_back(b);
    dualvar_.assign(2 * n_, 0.0);
    for (int v = 0; v < n_; ++v) dualvar_[v] = max_weight_;
    allowedge_.assign(m, false);
  }

  std::vector<int> solve() {
    for (int stage = 0; stage < n_; ++stage) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (int b = n_; b < 2 * n_; ++b) {
        blossombestedges_[b].clear();
        has_best_list_[b] = false;
      }
      std::fill(allowedge_.begin(), allowedge_.end(), false);
      queue_.clear();
      for (int v = 0; v < n_; ++v) {
        if (mate_[v] == -1 && label_[inblossom_[v]] == 0) {
          assign_label(v, 1, -1);
        }
      }

      bool augmented = false;
      for (;;) {
        while (!queue_.empty() && !augmented) {
          const int v = queue_.back();
          queue_.pop_back();
          assert(label_[inblossom_[v]] == 1);
          for (const int p : neighbend_[v]) {
            const int k = p / 2;
            const int w = endpoint_[p];
            if (inblossom_[v] == inblossom_[w]) continue;
            double kslack = 0.0;
            if (!allowedge_[k]) {
              kslack = slack(k);
              if (kslack <= 0.0) allowedge_[k] = true;
            }
            if (allowedge_[k]) {
              if (label_[inblossom_[w]] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[inblossom_[w]] == 1) {
                const int base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[w] == 0) {
                assert(label_[inblossom_[w]] == 2);
                label_[w] = 2;
                labelend_[w] = p ^ 1;
              }
            } else if (label_[inblossom_[w]] == 1) {
              const int b = inblossom_[v];
              if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) {
                bestedge_[b] = k;
              }
            } else if (label_[w] == 0) {
              if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) {
                bestedge_[w] = k;
              }
            }
          }
        }
        if (augmented) break;

        // Duals limit how far the forest can be pushed; pick the binding
        // constraint.
        int deltatype = -1;
        double delta = 0.0;
        int deltaedge = -1, deltablossom = -1;
        if (!maxcard_) {
          deltatype = 1;
          delta = std::max(
              0.0, *std::min_element(dualvar_.begin(), dualvar_.begin() + n_));
        }
        for (int v = 0; v < n_; ++v) {
          if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
            const double d = slack(bestedge_[v]);
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[v];
            }
          }
        }
        for (int b = 0; b < 2 * n_; ++b) {
          if (blossomparent_[b] == -1 && label_[b] == 1 &&
              bestedge_[b] != -1) {
            const double d = slack(bestedge_[b]) / 2.0;
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[b];
            }
          }
        }
        for (int b = n_; b < 2 * n_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1 &&
              label_[b] == 2 && (deltatype == -1 || dualvar_[b] < delta)) {
            delta = dualvar_[b];
            deltatype = 4;
            deltablossom = b;
          }
        }
        if (deltatype == -1) {
          // No slack anywhere: the matching cannot grow further.
          deltatype = 1;
          delta = std::max(
              0.0, *std::min_element(dualvar_.begin(), dualvar_.begin() + n_));
        }

        for (int v = 0; v < n_; ++v) {
          const int l = label_[inblossom_[v]];
          if (l == 1) {
            dualvar_[v] -= delta;
          } else if (l == 2) {
            dualvar_[v] += delta;
          }
        }
        for (int b = n_; b < 2 * n_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
            if (label_[b] == 1) {
              dualvar_[b] += delta;
            } else if (label_[b] == 2) {
              dualvar_[b] -= delta;
            }
          }
        }

        if (deltatype == 1) {
          break;
        } else if (deltatype == 2) {
          allowedge_[deltaedge] = true;
          int i = edges_[deltaedge].u;
          if (label_[inblossom_[i]] == 0) i = edges_[deltaedge].v;
          assert(label_[inblossom_[i]] == 1);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[deltaedge] = true;
          const int i = edges_[deltaedge].u;
          assert(label_[inblossom_[i]] == 1);
          queue_.push_back(i);
        } else {
          expand_blossom(deltablossom, false);
        }
      }

      if (!augmented) break;

      for (int b = n_; b < 2 * n_; ++b) {
        if (blossomparent_[b] == -1 && blossombase_[b] >= 0 &&
            label_[b] == 1 && dualvar_[b] == 0.0) {
          expand_blossom(b, true);
        }
      }
    }

    std::vector<int> result(n_, -1);
    for (int v = 0; v < n_; ++v) {
      if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
    }
    for (int v = 0; v < n_; ++v) {
      assert(result[v] == -1 || result[result[v]] == v);
    }
    return result;
  }

  // Dual feasibility + complementary slackness + blossom consistency. With
  // the duals left by solve(), these conditions certify that the returned
  // matching has maximum weight (and maximum cardinality in maxcard mode,
  // where vertex duals are allowed to go negative by the same uniform
  // amount).
  void certify_optimum() const {
    double dualmin = 0.0;
    for (int v = 0; v < n_; ++v) dualmin = std::min(dualmin, dualvar_[v]);
    const double vertex_floor = maxcard_ ? dualmin : 0.0;
    const double scale = std::max(1.0, max_weight_);
    for (int v = 0; v < n_; ++v) {
      if (dualvar_[v] < vertex_floor - kTol * scale) {
        throw std::logic_error("negative vertex dual");
      }
      if (mate_[v] == -1 && dualvar_[v] > vertex_floor + kTol * scale) {
        throw std::logic_error("free vertex with positive dual");
      }
    }
    for (int b = n_; b < 2 * n_; ++b) {
      if (blossombase_[b] >= 0 && dualvar_[b] < -kTol * scale) {
        throw std::logic_error("negative blossom dual");
      }
    }
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const auto& e = edges_[k];
      double s = dualvar_[e.u] + dualvar_[e.v] - 2.0 * e.weight;
      // Edges inside a blossom collect twice the dual of every blossom
      // containing both ends.
      std::vector<int> iblossoms, jblossoms;
      for (int b = blossomparent_[e.u]; b != -1; b = blossomparent_[b]) {
        iblossoms.push_back(b);
      }
      for (int b = blossomparent_[e.v]; b != -1; b = blossomparent_[b]) {
        jblossoms.push_back(b);
      }
      std::reverse(iblossoms.begin(), iblossoms.end());
      std::reverse(jblossoms.begin(), jblossoms.end());
      for (std::size_t z = 0; z < std::min(iblossoms.size(), jblossoms.size());
           ++z) {
        if (iblossoms[z] != jblossoms[z]) break;
        s += 2.0 * dualvar_[iblossoms[z]];
      }
      if (s < -kTol * scale) {
        throw std::logic_error("edge with negative slack");
      }
      if (mate_[e.u] >= 0 && endpoint_[mate_[e.u]] == e.v &&
          std::abs(s) > kTol * scale) {
        throw std::logic_error("matched edge is not tight");
      }
    }
  }

 private:
  double slack(int k) const {
    return dualvar_[edges_[k].u] + dualvar_[edges_[k].v] -
           2.0 * edges_[k].weight;
  }

  void blossom_leaves(int b, std::vector<int>& out) const {
    if (b < n_) {
      out.push_back(b);
      return;
    }
    for (const int t : blossomchilds_[b]) blossom_leaves(t, out);
  }

  void assign_label(int w, int t, int p) {
    const int b = inblossom_[w];
    assert(label_[w] == 0 && label_[b] == 0);
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
      std::vector<int> leaves;
      blossom_leaves(b, leaves);
      queue_.insert(queue_.end(), leaves.begin(), leaves.end());
    } else {
      const int base = blossombase_[b];
      assert(mate_[base] >= 0);
      assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
  }

  // Trace both trees upward to find the first common blossom; returns its
  // base vertex, or -1 when the paths end at different roots (augmenting).
  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
      int b = inblossom_[v];
      if (label_[b] & 4) {
        base = blossombase_[b];
        break;
      }
      assert(label_[b] == 1);
      path.push_back(b);
      label_[b] = 5;
      assert(labelend_[b] == mate_[blossombase_[b]]);
      if (labelend_[b] == -1) {
        v = -1;  // reached a root
      } else {
        v = endpoint_[labelend_[b]];
        b = inblossom_[v];
        assert(label_[b] == 2);
        assert(labelend_[b] >= 0);
        v = endpoint_[labelend_[b]];
      }
      if (w != -1) std::swap(v, w);
    }
    for (const int b : path) label_[b] = 1;
    return base;
  }

  // Shrink the cycle through edge k and the common ancestor `base` into a
  // fresh blossom.
  void add_blossom(int base, int k) {
    int v = edges_[k].u;
    int w = edges_[k].v;
    const int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    assert(!unusedblossoms_.empty());
    const int b = unusedblossoms_.back();
    unusedblossoms_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    std::vector<int> path;
    std::vector<int> endps;
    while (bv != bb) {
      blossomparent_[bv] = b;
      path.push_back(bv);
      endps.push_back(labelend_[bv]);
      assert(label_[bv] == 2 ||
             (label_[bv] == 1 && labelend_[bv] == mate_[blossombase_[bv]]));
      assert(labelend_[bv] >= 0);
      v = endpoint_[labelend_[bv]];
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[bw] = b;
      path.push_back(bw);
      endps.push_back(labelend_[bw] ^ 1);
      assert(label_[bw] == 2 ||
             (label_[bw] == 1 && labelend_[bw] == mate_[blossombase_[bw]]));
      assert(labelend_[bw] >= 0);
      w = endpoint_[labelend_[bw]];
      bw = inblossom_[w];
    }
    assert(label_[bb] == 1);
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0.0;
    blossomchilds_[b] = std::move(path);
    blossomendps_[b] = std::move(endps);
    std::vector<int> leaves;
    blossom_leaves(b, leaves);
    for (const int leaf : leaves) {
      if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
      inblossom_[leaf] = b;
    }
    // Merge best-edge lists of the children into the new blossom's list.
    std::vector<int> bestedgeto(2 * n_, -1);
    for (const int child : blossomchilds_[b]) {
      std::vector<int> candidate_edges;
      if (child >= n_ && has_best_list_[child]) {
        candidate_edges = blossombestedges_[child];
      } else {
        std::vector<int> child_leaves;
        blossom_leaves(child, child_leaves);
        for (const int leaf : child_leaves) {
          for (const int p : neighbend_[leaf]) candidate_edges.push_back(p / 2);
        }
      }
      for (const int ek : candidate_edges) {
        int i = edges_[ek].u, j = edges_[ek].v;
        if (inblossom_[j] == b) std::swap(i, j);
        const int bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 &&
            (bestedgeto[bj] == -1 || slack(ek) < slack(bestedgeto[bj]))) {
          bestedgeto[bj] = ek;
        }
      }
      if (child >= n_) {
        blossombestedges_[child].clear();
        has_best_list_[child] = false;
      }
      bestedge_[child] = -1;
    }
    blossombestedges_[b].clear();
    for (const int ek : bestedgeto) {
      if (ek != -1) blossombestedges_[b].push_back(ek);
    }
    has_best_list_[b] = true;
    bestedge_[b] = -1;
    for (const int ek : blossombestedges_[b]) {
      if (bestedge_[b] == -1 || slack(ek) < slack(bestedge_[b])) {
        bestedge_[b] = ek;
      }
    }
  }

  int child_at(int b, long long j) const {
    const long long len = static_cast<long long>(blossomchilds_[b].size());
    return blossomchilds_[b][static_cast<std::size_t>(((j % len) + len) % len)];
  }

  int endp_at(int b, long long j) const {
    const long long len = static_cast<long long>(blossomendps_[b].size());
    return blossomendps_[b][static_cast<std::size_t>(((j % len) + len) % len)];
  }

  // Undo a shrunken blossom. During a stage (endstage = false) this happens
  // when a T-blossom's dual hits zero: the path from the entering edge to
  // the base is relabeled alternately T / allowed, the remainder is freed.
  void expand_blossom(int b, bool endstage) {
    for (const int s : blossomchilds_[b]) {
      blossomparent_[s] = -1;
      if (s < n_) {
        inblossom_[s] = s;
      } else if (endstage && dualvar_[s] == 0.0) {
        expand_blossom(s, endstage);
      } else {
        std::vector<int> leaves;
        blossom_leaves(s, leaves);
        for (const int leaf : leaves) inblossom_[leaf] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      assert(labelend_[b] >= 0);
      const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
      long long j = 0;
      const long long len = static_cast<long long>(blossomchilds_[b].size());
      while (child_at(b, j) != entrychild) ++j;
      long long jstep;
      int endptrick;
      if (j & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      int p = labelend_[b];
      while (j != 0) {
        label_[endpoint_[p ^ 1]] = 0;
        label_[endpoint_[endp_at(b, j - endptrick) ^ endptrick ^ 1]] = 0;
        assign_label(endpoint_[p ^ 1], 2, p);
        allowedge_[endp_at(b, j - endptrick) / 2] = true;
        j += jstep;
        p = endp_at(b, j - endptrick) ^ endptrick;
        allowedge_[p / 2] = true;
        j += jstep;
      }
      const int bv = child_at(b, 0);
      label_[endpoint_[p ^ 1]] = label_[bv] = 2;
      labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
      bestedge_[bv] = -1;
      j += jstep;
      while (child_at(b, j) != entrychild) {
        const int bt = child_at(b, j);
        if (label_[bt] == 1) {
          j += jstep;
          continue;
        }
        std::vector<int> leaves;
        blossom_leaves(bt, leaves);
        int labeled = -1;
        for (const int leaf : leaves) {
          if (label_[leaf] != 0) {
            labeled = leaf;
            break;
          }
        }
        if (labeled != -1) {
          assert(label_[labeled] == 2);
          assert(inblossom_[labeled] == bt);
          label_[labeled] = 0;
          label_[endpoint_[mate_[blossombase_[bt]]]] = 0;
          assign_label(labeled, 2, labelend_[labeled]);
        }
        j += jstep;
      }
    }
    label_[b] = -1;
    labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_best_list_[b] = false;
    bestedge_[b] = -1;
    unusedblossoms_.push_back(b);
  }

  // Swap matched/unmatched edges along the cycle of blossom b so that its
  // base becomes vertex v.
  void augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= n_) augment_blossom(t, v);
    const long long len = static_cast<long long>(blossomchilds_[b].size());
    long long i = 0;
    while (child_at(b, i) != t) ++i;
    long long j = i;
    long long jstep;
    int endptrick;
    if (i & 1) {
      j -= len;
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      int tc = child_at(b, j);
      const int p = endp_at(b, j - endptrick) ^ endptrick;
      if (tc >= n_) augment_blossom(tc, endpoint_[p]);
      j += jstep;
      tc = child_at(b, j);
      if (tc >= n_) augment_blossom(tc, endpoint_[p ^ 1]);
      mate_[endpoint_[p]] = p ^ 1;
      mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(blossomchilds_[b].begin(), blossomchilds_[b].begin() + i,
                blossomchilds_[b].end());
    std::rotate(blossomendps_[b].begin(), blossomendps_[b].begin() + i,
                blossomendps_[b].end());
    blossombase_[b] = blossombase_[blossomchilds_[b][0]];
    assert(blossombase_[b] == v);
  }

  // Flip the matching along the augmenting path through tight edge k.
  void augment_matching(int k) {
    for (const auto& [start, startp] :
         {std::pair<int, int>{edges_[k].u, 2 * k + 1},
          std::pair<int, int>{edges_[k].v, 2 * k}}) {
      int s = start;
      int p = startp;
      for (;;) {
        const int bs = inblossom_[s];
        assert(label_[bs] == 1);
        assert(labelend_[bs] == mate_[blossombase_[bs]]);
        if (bs >= n_) augment_blossom(bs, s);
        mate_[s] = p;
        if (labelend_[bs] == -1) break;  // reached the root
        const int t = endpoint_[labelend_[bs]];
        const int bt = inblossom_[t];
        assert(label_[bt] == 2);
        assert(labelend_[bt] >= 0);
        s = endpoint_[labelend_[bt]];
        const int j = endpoint_[labelend_[bt] ^ 1];
        assert(blossombase_[bt] == t);
        if (bt >= n_) augment_blossom(bt, j);
        mate_[j] = labelend_[bt];
        p = labelend_[bt] ^ 1;
      }
    }
  }

  int n_;
  std::vector<WeightedEdge> edges_;
  bool maxcard_;
  double max_weight_;
  std::vector<int> endpoint_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<int> labelend_;
  std::vector<int> inblossom_;
  std::vector<int> blossomparent_;
  std::vector<std::vector<int>> blossomchilds_;
  std::vector<int> blossombase_;
  std::vector<std::vector<int>> blossomendps_;
  std::vector<int> bestedge_;
  std::vector<std::vector<int>> blossombestedges_;
  std::vector<bool> has_best_list_;
  std::vector<int> unusedblossoms_;
  std::vector<double> dualvar_;
  std::vector<bool> allowedge_;
  std::vector<int> queue_;
};

}  // namespace

std::vector<int> max_weight_matching(int n,
                                     const std::vector<WeightedEdge>& edges,
                                     bool max_cardinality, bool certify) {
  if (n < 0) throw std::invalid_argument("negative vertex count");
  if (n == 0 || edges.empty()) return std::vector<int>(n, -1);
  Matcher m(n, edges, max_cardinality);
  auto mate = m.solve();
  if (certify) m.certify_optimum();
  return mate;
}

std::vector<int> min_weight_perfect_matching(
    int n, const std::vector<WeightedEdge>& edges, bool certify) {
  if (n == 0) return {};
  if (n % 2 != 0) {
    throw std::runtime_error("odd vertex count has no perfect matching");
  }
  double wmax = 0.0;
  for (const auto& e : edges) wmax = std::max(wmax, std::abs(e.weight));
  std::vector<WeightedEdge> flipped = edges;
  for (auto& e : flipped) e.weight = 1.0 + wmax - e.weight;
  auto mate = max_weight_matching(n, flipped, /*max_cardinality=*/true,
                                  certify);
  for (int v = 0; v < n; ++v) {
    if (mate[v] == -1) {
      throw std::runtime_error("graph admits no perfect matching");
    }
  }
  return mate;
}

}  // namespace gkpft
