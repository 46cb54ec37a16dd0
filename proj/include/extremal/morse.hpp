#pragma once

#include <array>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <tuple>

#include "extremal/core.hpp"
#include "extremal/field.hpp"

namespace extremal {

enum class critical_index { minimum = 0, saddle = 1, maximum = 2 };

struct critical_point {
  int id = 0;
  pixel pos{-1, -1};  // (-1,-1) for the virtual boundary minimum
  double value = 0.0;
  critical_index index = critical_index::minimum;
  int replica = 0;  // split multi-saddles share a pixel, replicas 0,1,...
  bool virtual_boundary = false;
};

enum class arc_kind { saddle_max, saddle_min };

struct ms_arc {
  int id = 0;
  int saddle_id = -1;
  int extremum_id = -1;
  arc_kind kind = arc_kind::saddle_max;
  // Starts at the saddle pixel. Ends at the extremum pixel, except for
  // arcs into the virtual boundary minimum, which end at the last grid
  // pixel before the flow leaves the domain.
  std::vector<pixel> polyline;
  double steepness = 0.0;
};

struct ms_region {
  int id = 0;
  std::vector<int> boundary_arc_ids;
  std::vector<pixel> member_pixels;
  int max_id = -1;
  int min_id = -1;
};

struct persistence_pair_rec {
  int birth_id = -1;  // the extremum that dies in this cancellation
  int death_id = -1;  // the saddle it cancels against
  double persistence = 0.0;
};

struct ms_complex {
  int width = 0;
  int height = 0;
  double spacing = 1.0;
  std::vector<critical_point> criticals;
  std::vector<ms_arc> arcs;
  std::vector<ms_region> regions;
  std::vector<persistence_pair_rec> pairs;
  int virtual_min_id = -1;
  // Per-pixel attracting extremum under steepest ascent/descent, as ids
  // into `criticals`. Kept so simplification can relabel 2-cells.
  std::vector<int32_t> basin_up, basin_down;

  const critical_point& critical(int id) const { return criticals[size_t(id)]; }
};

namespace morse_detail {

// Cyclic 8-neighbor ring, counterclockwise from +x.
inline constexpr int ring_dx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr int ring_dy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
inline const double ring_dist[8] = {1.0, std::sqrt(2.0), 1.0, std::sqrt(2.0),
                                    1.0, std::sqrt(2.0), 1.0, std::sqrt(2.0)};

struct ring_entry {
  bool virt = false;  // the virtual boundary vertex (below every pixel)
  pixel p{0, 0};
  double dist = 1.0;
  int sign = 0;  // tie-broken sign of (entry - center)
};

// Augmented neighborhood: grid neighbors in cyclic order, with every
// maximal run of out-of-bounds directions collapsed into one virtual
// entry. Interior pixels get the plain 8-ring.
inline std::vector<ring_entry> build_ring(const scalar_field& f, pixel c) {
  tie_break_order ord{&f};
  std::vector<ring_entry> ring;
  ring.reserve(8);
  for (int k = 0; k < 8; ++k) {
    int nx = c.x + ring_dx[k], ny = c.y + ring_dy[k];
    if (f.in_bounds(nx, ny)) {
      ring_entry e;
      e.p = {nx, ny};
      e.dist = ring_dist[k];
      e.sign = ord.greater(e.p, c) ? 1 : -1;
      ring.push_back(e);
    } else {
      if (!ring.empty() && ring.back().virt) continue;
      ring_entry e;
      e.virt = true;
      e.dist = 1.0;
      e.sign = -1;
      ring.push_back(e);
    }
  }
  if (ring.size() > 1 && ring.front().virt && ring.back().virt) ring.pop_back();
  return ring;
}

inline int count_sign_changes(const std::vector<ring_entry>& ring) {
  int changes = 0;
  for (size_t i = 0; i < ring.size(); ++i)
    if (ring[i].sign != ring[(i + 1) % ring.size()].sign) ++changes;
  return changes;
}

struct sector_launch {
  bool virt = false;
  pixel p{0, 0};
};

// One launch per maximal same-sign run: the steepest entry of the run.
inline std::vector<sector_launch> sector_launches(const scalar_field& f, pixel c,
                                                  const std::vector<ring_entry>& ring,
                                                  int want_sign, double virtual_value) {
  size_t n = ring.size();
  size_t start = 0;  // begin at a sign boundary
  for (size_t i = 0; i < n; ++i) {
    if (ring[(i + n - 1) % n].sign != ring[i].sign) {
      start = i;
      break;
    }
  }
  std::vector<sector_launch> out;
  double fc = f.at(c.x, c.y);
  size_t i = 0;
  while (i < n) {
    size_t idx = (start + i) % n;
    if (ring[idx].sign != want_sign) {
      ++i;
      continue;
    }
    sector_launch best;
    double best_slope = -std::numeric_limits<double>::infinity();
    while (i < n) {
      size_t j = (start + i) % n;
      if (ring[j].sign != want_sign) break;
      double v = ring[j].virt ? virtual_value : f.at(ring[j].p.x, ring[j].p.y);
      double slope = (want_sign > 0 ? v - fc : fc - v) / ring[j].dist;
      if (slope > best_slope) {
        best_slope = slope;
        best.virt = ring[j].virt;
        best.p = ring[j].p;
      }
      ++i;
    }
    out.push_back(best);
  }
  return out;
}

struct classified {
  std::vector<critical_point> criticals;  // virtual minimum appended last
  int virtual_id = -1;
  // launches per saddle critical id: ascending and descending pairs
  std::map<int, std::array<sector_launch, 2>> asc_launch, desc_launch;
};

inline classified classify_internal(const scalar_field& f) {
  f.validate();
  classified out;
  double virtual_value = f.min_value() - 1.0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      pixel c{x, y};
      auto ring = build_ring(f, c);
      bool any_pos = false, any_neg = false;
      for (const auto& e : ring) (e.sign > 0 ? any_pos : any_neg) = true;
      double v = f.at(x, y);
      if (!any_pos) {
        out.criticals.push_back(
            {int(out.criticals.size()), c, v, critical_index::maximum, 0, false});
        continue;
      }
      if (!any_neg) {
        out.criticals.push_back(
            {int(out.criticals.size()), c, v, critical_index::minimum, 0, false});
        continue;
      }
      int changes = count_sign_changes(ring);
      if (changes < 4) continue;  // regular
      auto asc = sector_launches(f, c, ring, +1, virtual_value);
      auto desc = sector_launches(f, c, ring, -1, virtual_value);
      int k = changes / 2;  // number of ascending (= descending) sectors
      // A k-fold saddle unfolds into k-1 simple saddles along the sector chain.
      for (int j = 0; j + 1 < k; ++j) {
        int id = int(out.criticals.size());
        out.criticals.push_back({id, c, v, critical_index::saddle, j, false});
        out.asc_launch[id] = {asc[size_t(j)], asc[size_t(j + 1)]};
        out.desc_launch[id] = {desc[size_t(j)], desc[size_t(j + 1)]};
      }
    }
  int vid = int(out.criticals.size());
  out.criticals.push_back(
      {vid, pixel{-1, -1}, virtual_value, critical_index::minimum, 0, true});
  out.virtual_id = vid;
  return out;
}

// Steepest tie-broken-ascending neighbor; nullopt at a maximum.
inline std::optional<pixel> next_ascending(const scalar_field& f, pixel c) {
  tie_break_order ord{&f};
  double fc = f.at(c.x, c.y);
  std::optional<pixel> best;
  double best_slope = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 8; ++k) {
    int nx = c.x + ring_dx[k], ny = c.y + ring_dy[k];
    if (!f.in_bounds(nx, ny)) continue;
    pixel n{nx, ny};
    if (!ord.greater(n, c)) continue;
    double slope = (f.at(nx, ny) - fc) / ring_dist[k];
    if (slope > best_slope ||
        (slope == best_slope && best && ord.greater(n, *best))) {
      best_slope = slope;
      best = n;
    }
  }
  return best;
}

struct down_step {
  bool virt = false;
  pixel p{0, 0};
};

// Steepest tie-broken-descending step; the virtual vertex is a candidate
// from every boundary pixel. nullopt only at an interior minimum.
inline std::optional<down_step> next_descending(const scalar_field& f, pixel c,
                                                double virtual_value) {
  tie_break_order ord{&f};
  double fc = f.at(c.x, c.y);
  std::optional<down_step> best;
  double best_slope = -std::numeric_limits<double>::infinity();
  bool on_boundary = c.x == 0 || c.y == 0 || c.x == f.width - 1 || c.y == f.height - 1;
  for (int k = 0; k < 8; ++k) {
    int nx = c.x + ring_dx[k], ny = c.y + ring_dy[k];
    if (!f.in_bounds(nx, ny)) continue;
    pixel n{nx, ny};
    if (!ord.less(n, c)) continue;
    double slope = (fc - f.at(nx, ny)) / ring_dist[k];
    if (slope > best_slope ||
        (slope == best_slope && best && !best->virt && ord.less(n, best->p))) {
      best_slope = slope;
      best = down_step{false, n};
    }
  }
  if (on_boundary) {
    double slope = fc - virtual_value;
    if (slope > best_slope) best = down_step{true, {-1, -1}};
  }
  return best;
}

}  // namespace morse_detail

/// Combinatorial critical point classification on the boundary-augmented
/// grid: a pixel is classified from the cyclic tie-broken sign pattern of
/// its neighbor ring, with one virtual vertex below all boundary pixels
/// closing the domain into a sphere. Multi-saddles are split.
inline std::vector<critical_point> classify_critical_points(const scalar_field& f) {
  return morse_detail::classify_internal(f).criticals;
}

enum class trace_direction { ascending, descending };

/// Discrete steepest ascent/descent over the 8-neighborhood with tie-broken
/// values. Terminates at an extremum or where the descending flow leaves the
/// domain toward the virtual boundary minimum.
inline std::vector<pixel> trace_integral_line(const scalar_field& f, pixel start,
                                              trace_direction dir) {
  f.validate();
  if (!f.in_bounds(start.x, start.y))
    throw validation_error("trace start outside the field");
  double virtual_value = f.min_value() - 1.0;
  std::vector<pixel> line{start};
  pixel c = start;
  size_t guard = f.size() + 2;
  while (line.size() <= guard) {
    if (dir == trace_direction::ascending) {
      auto n = morse_detail::next_ascending(f, c);
      if (!n) break;
      c = *n;
    } else {
      auto n = morse_detail::next_descending(f, c, virtual_value);
      if (!n || n->virt) break;
      c = n->p;
    }
    line.push_back(c);
  }
  return line;
}

namespace morse_detail {

// Saddle/extremum cancellation engine shared by persistence_pairs and
// simplify. Operates on a mutable copy of the complex adjacency.
struct cancel_machine {
  struct slot {
    int ext = -1;
    std::vector<pixel> poly;
  };

  const ms_complex* base = nullptr;
  std::vector<char> alive;
  std::vector<char> is_saddle;
  std::vector<std::array<slot, 2>> up, down;           // indexed by saddle id
  std::vector<std::vector<std::pair<int, int>>> inc_up;    // extremum -> (saddle, slot)
  std::vector<std::vector<std::pair<int, int>>> inc_down;
  std::vector<int> parent;  // union-find over extrema
  std::vector<persistence_pair_rec> seq;

  using qitem = std::tuple<double, int, int, int>;  // persistence, saddle, ext, side(0=up)
  std::priority_queue<qitem, std::vector<qitem>, std::greater<qitem>> queue;

  explicit cancel_machine(const ms_complex& c) : base(&c) {
    size_t n = c.criticals.size();
    alive.assign(n, 1);
    is_saddle.assign(n, 0);
    up.assign(n, {});
    down.assign(n, {});
    inc_up.assign(n, {});
    inc_down.assign(n, {});
    parent.resize(n);
    for (size_t i = 0; i < n; ++i) parent[i] = int(i);
    std::vector<int> up_count(n, 0), down_count(n, 0);
    for (const ms_arc& a : c.arcs) {
      if (a.kind == arc_kind::saddle_max) {
        int k = up_count[size_t(a.saddle_id)]++;
        up[size_t(a.saddle_id)][size_t(k)] = {a.extremum_id, a.polyline};
        inc_up[size_t(a.extremum_id)].push_back({a.saddle_id, k});
      } else {
        int k = down_count[size_t(a.saddle_id)]++;
        down[size_t(a.saddle_id)][size_t(k)] = {a.extremum_id, a.polyline};
        inc_down[size_t(a.extremum_id)].push_back({a.saddle_id, k});
      }
      is_saddle[size_t(a.saddle_id)] = 1;
    }
    for (const ms_arc& a : c.arcs) push_pair(a.saddle_id, a.extremum_id,
                                             a.kind == arc_kind::saddle_max ? 0 : 1);
  }

  int find(int x) {
    while (parent[size_t(x)] != x) {
      parent[size_t(x)] = parent[size_t(parent[size_t(x)])];
      x = parent[size_t(x)];
    }
    return x;
  }

  void push_pair(int saddle, int ext, int side) {
    double p = std::abs(base->criticals[size_t(saddle)].value -
                        base->criticals[size_t(ext)].value);
    queue.push({p, saddle, ext, side});
  }

  // Runs cancellations with persistence < eps; records each into seq.
  void run(double eps) {
    while (!queue.empty()) {
      auto [pers, s, m, side] = queue.top();
      if (pers >= eps) return;
      queue.pop();
      if (!alive[size_t(s)] || !alive[size_t(m)]) continue;
      if (m == base->virtual_min_id) continue;
      auto& slots = side == 0 ? up[size_t(s)] : down[size_t(s)];
      int hit = -1, other = -1;
      for (int k = 0; k < 2; ++k) (slots[size_t(k)].ext == m ? hit : other) = k;
      if (hit < 0 || other < 0) continue;               // stale
      if (slots[size_t(other)].ext == m) continue;      // strangulation: skip, re-queued on change
      cancel(s, m, side, hit, other);
    }
  }

  // Saddles strangulated on both sides (both ascending arcs to one maximum
  // and both descending arcs to one minimum) bound degenerate pockets; they
  // arise from sub-pixel saddles split across two pixels and can never
  // cancel. Dropping them needs no extremum merge and records no pair.
  void remove_pockets() {
    for (size_t s = 0; s < alive.size(); ++s) {
      if (!alive[s] || !is_saddle[s]) continue;
      if (up[s][0].ext == up[s][1].ext && down[s][0].ext == down[s][1].ext)
        alive[s] = 0;
    }
  }

  void cancel(int s, int m, int side, int hit, int other) {
    auto& slots = side == 0 ? up[size_t(s)] : down[size_t(s)];
    auto& inc = side == 0 ? inc_up : inc_down;
    int survivor = slots[size_t(other)].ext;
    // Route every other arc that ended at m through the cancelled saddle
    // onto the survivor: t..m + m..s + s..survivor.
    std::vector<pixel> via = slots[size_t(hit)].poly;
    std::reverse(via.begin(), via.end());
    const std::vector<pixel>& onward = slots[size_t(other)].poly;
    for (auto [t, k] : inc[size_t(m)]) {
      if (!alive[size_t(t)] || t == s) continue;
      auto& tslots = side == 0 ? up[size_t(t)] : down[size_t(t)];
      if (tslots[size_t(k)].ext != m) continue;  // stale entry
      std::vector<pixel>& poly = tslots[size_t(k)].poly;
      poly.insert(poly.end(), via.begin() + (via.empty() ? 0 : 1), via.end());
      poly.insert(poly.end(), onward.begin() + (onward.empty() ? 0 : 1), onward.end());
      tslots[size_t(k)].ext = survivor;
      inc[size_t(survivor)].push_back({t, k});
      push_pair(t, survivor, side);
    }
    parent[size_t(m)] = survivor;
    alive[size_t(s)] = 0;
    alive[size_t(m)] = 0;
    seq.push_back({m, s, std::abs(base->criticals[size_t(s)].value -
                                  base->criticals[size_t(m)].value)});
  }
};

}  // namespace morse_detail

/// Full iterative cancellation ordering: repeatedly cancel the adjacent
/// (saddle, extremum) pair with the smallest value difference whose
/// cancellation is legal. The input complex is not modified.
inline std::vector<persistence_pair_rec> persistence_pairs(const ms_complex& c) {
  morse_detail::cancel_machine m(c);
  m.run(std::numeric_limits<double>::infinity());
  return m.seq;
}

namespace morse_detail {

inline void finalize_regions(ms_complex& out) {
  // Pixels not on a surviving arc and not critical are grouped by their
  // (ascending, descending) attracting extremum pair.
  grid_mask occupied(out.width, out.height, false);
  for (const ms_arc& a : out.arcs)
    for (pixel p : a.polyline) occupied.set(p.x, p.y);
  for (const critical_point& c : out.criticals)
    if (!c.virtual_boundary) occupied.set(c.pos.x, c.pos.y);

  std::map<std::pair<int, int>, int> region_of;
  out.regions.clear();
  std::vector<int32_t> region_at(size_t(out.width) * size_t(out.height), -1);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      if (occupied.get(x, y)) continue;
      size_t i = size_t(y) * size_t(out.width) + size_t(x);
      std::pair<int, int> key{out.basin_up[i], out.basin_down[i]};
      auto it = region_of.find(key);
      if (it == region_of.end()) {
        int id = int(out.regions.size());
        ms_region r;
        r.id = id;
        r.max_id = key.first;
        r.min_id = key.second;
        out.regions.push_back(std::move(r));
        it = region_of.emplace(key, id).first;
      }
      out.regions[size_t(it->second)].member_pixels.push_back({x, y});
      region_at[i] = it->second;
    }

  for (const ms_arc& a : out.arcs) {
    std::set<int> touching;
    for (pixel p : a.polyline)
      for (int k = 0; k < 8; ++k) {
        int nx = p.x + ring_dx[k], ny = p.y + ring_dy[k];
        if (nx < 0 || ny < 0 || nx >= out.width || ny >= out.height) continue;
        int r = region_at[size_t(ny) * size_t(out.width) + size_t(nx)];
        if (r >= 0) touching.insert(r);
      }
    for (int r : touching) out.regions[size_t(r)].boundary_arc_ids.push_back(a.id);
  }
}

}  // namespace morse_detail

/// Builds the Morse-Smale complex of a scalar field: classified critical
/// points, two ascending and two descending integral lines per saddle,
/// 2-cells from per-pixel flow destinations, and the full persistence
/// cancellation sequence.
inline ms_complex build_ms_complex(const scalar_field& f) {
  using namespace morse_detail;
  classified cls = classify_internal(f);
  ms_complex out;
  out.width = f.width;
  out.height = f.height;
  out.spacing = f.spacing;
  out.criticals = cls.criticals;
  out.virtual_min_id = cls.virtual_id;

  double virtual_value = out.criticals[size_t(cls.virtual_id)].value;
  size_t npix = f.size();

  // Successor maps, then destinations resolved in value order.
  std::vector<int32_t> next_up_map(npix, -1), next_down_map(npix, -2);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      size_t i = f.idx(x, y);
      auto nu = next_ascending(f, {x, y});
      next_up_map[i] = nu ? int32_t(f.idx(nu->x, nu->y)) : int32_t(i);
      auto nd = next_descending(f, {x, y}, virtual_value);
      if (!nd)
        next_down_map[i] = int32_t(i);
      else if (nd->virt)
        next_down_map[i] = -1;
      else
        next_down_map[i] = int32_t(f.idx(nd->p.x, nd->p.y));
    }

  std::vector<size_t> order(npix);
  for (size_t i = 0; i < npix; ++i) order[i] = i;
  tie_break_order ord{&f};
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return ord.less(f.coords(a), f.coords(b));
  });

  std::vector<int32_t> dest_up(npix), dest_down(npix);
  for (size_t r = npix; r-- > 0;) {  // descending value order
    size_t i = order[r];
    int32_t n = next_up_map[i];
    dest_up[i] = n == int32_t(i) ? int32_t(i) : dest_up[size_t(n)];
  }
  for (size_t r = 0; r < npix; ++r) {  // ascending value order
    size_t i = order[r];
    int32_t n = next_down_map[i];
    dest_down[i] = (n == int32_t(i) || n == -1) ? (n == -1 ? -1 : int32_t(i))
                                                : dest_down[size_t(n)];
  }

  // Extremum pixel -> critical id.
  std::vector<int32_t> crit_at(npix, -1);
  for (const critical_point& c : out.criticals) {
    if (c.virtual_boundary || c.index == critical_index::saddle) continue;
    crit_at[f.idx(c.pos.x, c.pos.y)] = c.id;
  }

  out.basin_up.resize(npix);
  out.basin_down.resize(npix);
  for (size_t i = 0; i < npix; ++i) {
    out.basin_up[i] = crit_at[size_t(dest_up[i])];
    out.basin_down[i] =
        dest_down[i] < 0 ? int32_t(cls.virtual_id) : crit_at[size_t(dest_down[i])];
  }

  // Arcs: walk the successor chains from each saddle's sector launches.
  auto walk_up = [&](pixel from) {
    std::vector<pixel> path{from};
    size_t i = f.idx(from.x, from.y);
    while (next_up_map[i] != int32_t(i)) {
      i = size_t(next_up_map[i]);
      path.push_back(f.coords(i));
    }
    return path;
  };
  auto walk_down = [&](pixel from) {
    std::vector<pixel> path{from};
    size_t i = f.idx(from.x, from.y);
    while (next_down_map[i] != int32_t(i) && next_down_map[i] != -1) {
      i = size_t(next_down_map[i]);
      path.push_back(f.coords(i));
    }
    bool to_virtual = next_down_map[i] == -1;
    return std::pair{path, to_virtual};
  };

  for (const critical_point& c : out.criticals) {
    if (c.index != critical_index::saddle) continue;
    const auto& asc = cls.asc_launch.at(c.id);
    const auto& desc = cls.desc_launch.at(c.id);
    for (int k = 0; k < 2; ++k) {
      ms_arc a;
      a.id = int(out.arcs.size());
      a.saddle_id = c.id;
      a.kind = arc_kind::saddle_max;
      a.polyline.push_back(c.pos);
      auto path = walk_up(asc[size_t(k)].p);
      a.polyline.insert(a.polyline.end(), path.begin(), path.end());
      a.extremum_id = crit_at[f.idx(a.polyline.back().x, a.polyline.back().y)];
      out.arcs.push_back(std::move(a));
    }
    for (int k = 0; k < 2; ++k) {
      ms_arc a;
      a.id = int(out.arcs.size());
      a.saddle_id = c.id;
      a.kind = arc_kind::saddle_min;
      a.polyline.push_back(c.pos);
      if (desc[size_t(k)].virt) {
        a.extremum_id = cls.virtual_id;
      } else {
        auto [path, to_virtual] = walk_down(desc[size_t(k)].p);
        a.polyline.insert(a.polyline.end(), path.begin(), path.end());
        a.extremum_id = to_virtual
                            ? cls.virtual_id
                            : crit_at[f.idx(a.polyline.back().x, a.polyline.back().y)];
      }
      out.arcs.push_back(std::move(a));
    }
  }

  morse_detail::finalize_regions(out);
  out.pairs = persistence_pairs(out);
  return out;
}

/// Cancels every pair with persistence < epsilon in the persistence_pairs
/// order and rebuilds arcs and 2-cells. epsilon = 0 returns an equal complex.
inline ms_complex simplify(const ms_complex& c, double epsilon) {
  if (epsilon < 0.0) throw validation_error("simplify epsilon must be >= 0");
  morse_detail::cancel_machine m(c);
  m.run(epsilon);
  if (epsilon > 0.0) m.remove_pockets();

  ms_complex out;
  out.width = c.width;
  out.height = c.height;
  out.spacing = c.spacing;

  std::vector<int> new_id(c.criticals.size(), -1);
  for (const critical_point& cp : c.criticals) {
    if (!m.alive[size_t(cp.id)]) continue;
    critical_point copy = cp;
    copy.id = int(out.criticals.size());
    new_id[size_t(cp.id)] = copy.id;
    out.criticals.push_back(copy);
  }
  out.virtual_min_id = new_id[size_t(c.virtual_min_id)];

  for (const critical_point& cp : c.criticals) {
    if (!m.alive[size_t(cp.id)] || cp.index != critical_index::saddle) continue;
    for (int side = 0; side < 2; ++side) {
      const auto& slots = side == 0 ? m.up[size_t(cp.id)] : m.down[size_t(cp.id)];
      for (int k = 0; k < 2; ++k) {
        ms_arc a;
        a.id = int(out.arcs.size());
        a.saddle_id = new_id[size_t(cp.id)];
        a.extremum_id = new_id[size_t(slots[size_t(k)].ext)];
        a.kind = side == 0 ? arc_kind::saddle_max : arc_kind::saddle_min;
        a.polyline = slots[size_t(k)].poly;
        out.arcs.push_back(std::move(a));
      }
    }
  }

  size_t npix = size_t(c.width) * size_t(c.height);
  out.basin_up.resize(npix);
  out.basin_down.resize(npix);
  for (size_t i = 0; i < npix; ++i) {
    out.basin_up[i] = new_id[size_t(m.find(c.basin_up[i]))];
    out.basin_down[i] = new_id[size_t(m.find(c.basin_down[i]))];
  }

  morse_detail::finalize_regions(out);

  // Remaining pairs: continue the same cancellation to exhaustion.
  size_t done = m.seq.size();
  m.run(std::numeric_limits<double>::infinity());
  for (size_t i = done; i < m.seq.size(); ++i) {
    persistence_pair_rec rec = m.seq[i];
    rec.birth_id = new_id[size_t(rec.birth_id)];
    rec.death_id = new_id[size_t(rec.death_id)];
    out.pairs.push_back(rec);
  }
  return out;
}

struct critical_counts {
  int minima = 0, saddles = 0, maxima = 0;

  bool operator==(const critical_counts&) const = default;
};

inline critical_counts count_criticals(const ms_complex& c) {
  critical_counts n;
  for (const critical_point& cp : c.criticals) {
    if (cp.index == critical_index::minimum) ++n.minima;
    else if (cp.index == critical_index::saddle) ++n.saddles;
    else ++n.maxima;
  }
  return n;
}

/// Euler relation on the boundary-augmented sphere.
inline bool euler_holds(const ms_complex& c) {
  critical_counts n = count_criticals(c);
  return n.minima - n.saddles + n.maxima == 2;
}

struct morse_check_report {
  bool non_degenerate = true;  // no multi-saddle pixels
  int multi_saddle_pixels = 0;
  bool hessian_agrees = true;  // eigenvalue signs match the combinatorial class
  int disagreements = 0;
  int checked = 0;
};

/// Diagnostic for accepted (smooth) fields: the 8-ring classification and
/// the Hessian eigenvalue classification must agree at interior criticals,
/// and no pixel may be a multi-saddle.
inline morse_check_report morse_check(const scalar_field& f) {
  using namespace morse_detail;
  morse_check_report rep;
  classified cls = classify_internal(f);
  std::set<std::pair<int, int>> seen;
  for (const critical_point& c : cls.criticals) {
    if (c.virtual_boundary) continue;
    if (c.replica > 0 && !seen.insert({c.pos.x, c.pos.y}).second) continue;
    if (c.replica > 0) {
      rep.non_degenerate = false;
      ++rep.multi_saddle_pixels;
    }
  }
  for (const critical_point& c : cls.criticals) {
    if (c.virtual_boundary || c.replica > 0) continue;
    if (c.pos.x < 1 || c.pos.y < 1 || c.pos.x > f.width - 2 || c.pos.y > f.height - 2)
      continue;
    sym2 h = hessian(f, c.pos.x, c.pos.y);
    double tr = h.xx + h.yy;
    double det = h.xx * h.yy - h.xy * h.xy;
    double scale = std::max({std::abs(h.xx), std::abs(h.yy), std::abs(h.xy), 1e-12});
    if (std::abs(det) < 1e-9 * scale * scale) continue;  // numerically degenerate
    critical_index want;
    if (det < 0.0) want = critical_index::saddle;
    else want = tr < 0.0 ? critical_index::maximum : critical_index::minimum;
    ++rep.checked;
    if (want != c.index) {
      rep.hessian_agrees = false;
      ++rep.disagreements;
    }
  }
  return rep;
}

/// Structural invariants: saddle degrees, region disjointness and coverage.
inline void check_complex(const ms_complex& c) {
  std::vector<int> up_deg(c.criticals.size(), 0), down_deg(c.criticals.size(), 0);
  for (const ms_arc& a : c.arcs) {
    if (a.kind == arc_kind::saddle_max) ++up_deg[size_t(a.saddle_id)];
    else ++down_deg[size_t(a.saddle_id)];
  }
  for (const critical_point& cp : c.criticals) {
    if (cp.index != critical_index::saddle) continue;
    if (up_deg[size_t(cp.id)] != 2 || down_deg[size_t(cp.id)] != 2)
      throw validation_error("saddle does not have 2 ascending and 2 descending arcs");
  }
  grid_mask seen(c.width, c.height, false);
  for (const ms_arc& a : c.arcs)
    for (pixel p : a.polyline) seen.set(p.x, p.y);
  for (const critical_point& cp : c.criticals)
    if (!cp.virtual_boundary) seen.set(cp.pos.x, cp.pos.y);
  size_t covered = seen.count();
  for (const ms_region& r : c.regions)
    for (pixel p : r.member_pixels) {
      if (seen.get(p.x, p.y))
        throw validation_error("region pixel overlaps arc/critical/other region");
      seen.set(p.x, p.y);
      ++covered;
    }
  if (covered != size_t(c.width) * size_t(c.height))
    throw validation_error("regions + arcs + criticals do not cover the domain");
}

}  // namespace extremal
