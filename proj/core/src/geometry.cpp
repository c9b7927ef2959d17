#include "riesz/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

namespace riesz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_spec(int d, const GridSpec& spec) {
  if (d < 1 || d > 3) throw std::invalid_argument("grid fields support d in {1,2,3}");
  if (spec.per_axis < 8) throw std::invalid_argument("resolution must be >= 8 per axis");
  if (int(spec.lo.size()) != d || int(spec.hi.size()) != d)
    throw std::invalid_argument("box dimension mismatch");
  for (int i = 0; i < d; ++i)
    if (!(spec.lo[i] < spec.hi[i])) throw std::invalid_argument("empty box");
}

GridField make_empty(int d, const GridSpec& spec) {
  validate_spec(d, spec);
  GridField f;
  f.d = d;
  for (int i = 0; i < 3; ++i) {
    f.lo[i] = i < d ? spec.lo[i] : 0.0;
    f.hi[i] = i < d ? spec.hi[i] : 0.0;
    f.res[i] = i < d ? spec.per_axis : 1;
  }
  const long long nodes = f.node_count();
  f.p_hat.assign(std::size_t(nodes), 0.0);
  f.logp.assign(std::size_t(nodes), std::numeric_limits<double>::quiet_NaN());
  f.inside.assign(std::size_t(nodes), 0);
  f.score.assign(std::size_t(nodes) * d, 0.0);
  return f;
}

void finish_field(GridField& f, double threshold_rel) {
  double max_p = 0.0;
  for (double v : f.p_hat) max_p = std::max(max_p, v);
  if (!(max_p > 0.0))
    throw std::runtime_error("grid field has no positive density values");
  f.threshold = threshold_rel * max_p;
  const long long nodes = f.node_count();
  for (long long t = 0; t < nodes; ++t) {
    if (f.p_hat[std::size_t(t)] > f.threshold) {
      f.inside[std::size_t(t)] = 1;
      f.logp[std::size_t(t)] = std::log(f.p_hat[std::size_t(t)]);
    } else {
      f.inside[std::size_t(t)] = 0;
      f.logp[std::size_t(t)] = std::numeric_limits<double>::quiet_NaN();
    }
  }
}

// Central differences of logp where both neighbors are inside, one-sided at
// the rim, zero when isolated.
void fd_score(GridField& f) {
  const long long nodes = f.node_count();
  for (long long t = 0; t < nodes; ++t) {
    if (!f.inside[std::size_t(t)]) continue;
    const auto idx = f.node_coords_idx(t);
    for (int ax = 0; ax < f.d; ++ax) {
      const double h = f.spacing(ax);
      auto up = idx, dn = idx;
      up[std::size_t(ax)] += 1;
      dn[std::size_t(ax)] -= 1;
      const bool has_up = up[std::size_t(ax)] < f.res[std::size_t(ax)] &&
                          f.inside[std::size_t(f.node_index(up))];
      const bool has_dn = dn[std::size_t(ax)] >= 0 &&
                          f.inside[std::size_t(f.node_index(dn))];
      double s = 0.0;
      if (has_up && has_dn)
        s = (f.logp[std::size_t(f.node_index(up))] - f.logp[std::size_t(f.node_index(dn))]) / (2.0 * h);
      else if (has_up)
        s = (f.logp[std::size_t(f.node_index(up))] - f.logp[std::size_t(t)]) / h;
      else if (has_dn)
        s = (f.logp[std::size_t(t)] - f.logp[std::size_t(f.node_index(dn))]) / h;
      f.score[std::size_t(t) * f.d + ax] = s;
    }
  }
}

}  // namespace

long long GridField::node_count() const {
  return (long long)(res[0]) * res[1] * res[2];
}

long long GridField::node_index(const std::array<int, 3>& idx) const {
  return idx[0] + (long long)(res[0]) * (idx[1] + (long long)(res[1]) * idx[2]);
}

std::array<int, 3> GridField::node_coords_idx(long long node) const {
  std::array<int, 3> idx{};
  idx[0] = int(node % res[0]);
  node /= res[0];
  idx[1] = int(node % res[1]);
  idx[2] = int(node / res[1]);
  return idx;
}

std::vector<double> GridField::node_point(long long node) const {
  const auto idx = node_coords_idx(node);
  std::vector<double> x(std::size_t(d));
  for (int i = 0; i < d; ++i) x[std::size_t(i)] = lo[std::size_t(i)] + spacing(i) * idx[std::size_t(i)];
  return x;
}

double GridField::spacing(int axis) const {
  return res[std::size_t(axis)] > 1
             ? (hi[std::size_t(axis)] - lo[std::size_t(axis)]) / (res[std::size_t(axis)] - 1)
             : 1.0;
}

long long GridField::snap_node(const std::vector<double>& x) const {
  if (int(x.size()) != d) throw std::invalid_argument("point dimension mismatch");
  std::array<int, 3> idx{};
  for (int i = 0; i < d; ++i) {
    const double t = (x[std::size_t(i)] - lo[std::size_t(i)]) / spacing(i);
    const long long j = llround(t);
    if (j < 0 || j >= res[std::size_t(i)])
      throw std::domain_error("point outside the grid box");
    idx[std::size_t(i)] = int(j);
  }
  return node_index(idx);
}

bool GridField::cell_inside(const std::vector<double>& x) const {
  std::array<int, 3> base{};
  for (int i = 0; i < d; ++i) {
    const double t = (x[std::size_t(i)] - lo[std::size_t(i)]) / spacing(i);
    const int i0 = int(std::floor(t));
    if (i0 < -1 || double(i0) > double(res[std::size_t(i)] - 1)) return false;
    base[std::size_t(i)] = std::clamp(i0, 0, res[std::size_t(i)] - 2);
    if (t < -1e-9 || t > double(res[std::size_t(i)] - 1) + 1e-9) return false;
  }
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    auto idx = base;
    for (int i = 0; i < d; ++i)
      if (c & (1 << i)) idx[std::size_t(i)] += 1;
    if (!inside[std::size_t(node_index(idx))]) return false;
  }
  return true;
}

namespace {

template <typename Fn>
double multilinear(const GridField& f, const std::vector<double>& x, Fn value_at) {
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  for (int i = 0; i < f.d; ++i) {
    const double t = (x[std::size_t(i)] - f.lo[std::size_t(i)]) / f.spacing(i);
    int i0 = int(std::floor(t));
    i0 = std::clamp(i0, 0, f.res[std::size_t(i)] - 2);
    base[std::size_t(i)] = i0;
    frac[std::size_t(i)] = std::clamp(t - i0, 0.0, 1.0);
  }
  const int corners = 1 << f.d;
  double acc = 0.0;
  for (int c = 0; c < corners; ++c) {
    auto idx = base;
    double wgt = 1.0;
    for (int i = 0; i < f.d; ++i) {
      if (c & (1 << i)) {
        idx[std::size_t(i)] += 1;
        wgt *= frac[std::size_t(i)];
      } else {
        wgt *= 1.0 - frac[std::size_t(i)];
      }
    }
    acc += wgt * value_at(f.node_index(idx));
  }
  return acc;
}

}  // namespace

double GridField::interp_logp(const std::vector<double>& x) const {
  if (!cell_inside(x))
    throw OutsideSupportError("interpolation cell leaves the positivity set");
  return multilinear(*this, x, [this](long long n) { return logp[std::size_t(n)]; });
}

std::vector<double> GridField::interp_score(const std::vector<double>& x) const {
  if (!cell_inside(x))
    throw OutsideSupportError("interpolation cell leaves the positivity set");
  std::vector<double> s(std::size_t(d));
  for (int i = 0; i < d; ++i)
    s[std::size_t(i)] =
        multilinear(*this, x, [this, i](long long n) { return score[std::size_t(n) * d + i]; });
  return s;
}

void GridField::dump_csv(std::ostream& os) const {
  for (int i = 0; i < d; ++i) os << "x" << (i + 1) << ",";
  os << "p_hat,logp";
  for (int i = 0; i < d; ++i) os << ",score" << (i + 1);
  os << "\n";
  const long long nodes = node_count();
  for (long long t = 0; t < nodes; ++t) {
    const auto pt = node_point(t);
    for (int i = 0; i < d; ++i) os << pt[std::size_t(i)] << ",";
    os << p_hat[std::size_t(t)] << "," << logp[std::size_t(t)];
    for (int i = 0; i < d; ++i) os << "," << score[std::size_t(t) * d + i];
    os << "\n";
  }
}

GridField build_grid_field_analytic(const Scenario& s, const GridSpec& spec) {
  if (!s.has_analytic())
    throw std::invalid_argument("scenario has no closed-form density");
  GridField f = make_empty(s.d, spec);
  const long long nodes = f.node_count();
  for (long long t = 0; t < nodes; ++t)
    f.p_hat[std::size_t(t)] = s.analytic_density(f.node_point(t));
  finish_field(f, spec.threshold_rel);
  if (s.analytic_score) {
    f.analytic_score = true;
    for (long long t = 0; t < nodes; ++t) {
      if (!f.inside[std::size_t(t)]) continue;
      const auto sc = s.analytic_score(f.node_point(t));
      for (int i = 0; i < f.d; ++i) f.score[std::size_t(t) * f.d + i] = sc[std::size_t(i)];
    }
  } else {
    fd_score(f);
  }
  return f;
}

GridField build_grid_field_function(
    int d, const std::function<double(const std::vector<double>&)>& density,
    const GridSpec& spec) {
  GridField f = make_empty(d, spec);
  const long long nodes = f.node_count();
  for (long long t = 0; t < nodes; ++t)
    f.p_hat[std::size_t(t)] = density(f.node_point(t));
  finish_field(f, spec.threshold_rel);
  fd_score(f);
  return f;
}

GridField build_grid_field_estimated(const Functional& fn, const GridSpec& spec,
                                     const EstimatorConfig& cfg) {
  GridField f = make_empty(fn.d, spec);
  const long long nodes = f.node_count();
  std::vector<std::vector<double>> pts;
  pts.reserve(std::size_t(nodes));
  for (long long t = 0; t < nodes; ++t) pts.push_back(f.node_point(t));
  const GridEstimate ge = estimate_density_grid(fn, pts, cfg);
  f.p_hat = ge.values;
  f.std_errors = ge.std_errors;
  finish_field(f, spec.threshold_rel);
  fd_score(f);
  return f;
}

GridField build_grid_field_samples(const std::vector<std::vector<double>>& samples,
                                   const GridSpec& spec, double bandwidth) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  const int d = int(samples[0].size());
  GridField f = make_empty(d, spec);
  const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(samples);
  const long long nodes = f.node_count();
  for (long long t = 0; t < nodes; ++t)
    f.p_hat[std::size_t(t)] = kde_baseline(samples, f.node_point(t), h);
  finish_field(f, spec.threshold_rel);
  fd_score(f);
  return f;
}

// ---------------------------------------------------------------------------
// Semi-distance machinery
// ---------------------------------------------------------------------------

namespace {

// Enumerates the (up to 3^d - 1) node neighbor offsets: 8-neighborhood in
// 2d, 26 in 3d.
std::vector<std::array<int, 3>> node_neighbor_offsets(int d) {
  std::vector<std::array<int, 3>> out;
  const int lo = -1, hi = 1;
  for (int a = lo; a <= hi; ++a)
    for (int b = d >= 2 ? lo : 0; b <= (d >= 2 ? hi : 0); ++b)
      for (int c = d >= 3 ? lo : 0; c <= (d >= 3 ? hi : 0); ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        out.push_back({a, b, c});
      }
  return out;
}

// Node-graph Dijkstra with edge weight |logp(v) - logp(u)|; returns the
// predecessor chain. Used for the reported path and as a connectivity check.
struct DijkstraOut {
  bool reachable = false;
  double cost = 0.0;
  std::vector<long long> path_nodes;
};

DijkstraOut node_dijkstra(const GridField& f, long long src, long long dst) {
  const long long nodes = f.node_count();
  std::vector<double> dist(std::size_t(nodes), kInf);
  std::vector<long long> prev(std::size_t(nodes), -1);
  using Item = std::pair<double, long long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[std::size_t(src)] = 0.0;
  pq.push({0.0, src});
  const auto offsets = node_neighbor_offsets(f.d);
  while (!pq.empty()) {
    const auto [c, u] = pq.top();
    pq.pop();
    if (c > dist[std::size_t(u)]) continue;
    if (u == dst) break;
    const auto idx = f.node_coords_idx(u);
    for (const auto& off : offsets) {
      std::array<int, 3> v_idx = {idx[0] + off[0], idx[1] + off[1], idx[2] + off[2]};
      bool ok = true;
      for (int i = 0; i < 3; ++i)
        if (v_idx[std::size_t(i)] < 0 || v_idx[std::size_t(i)] >= f.res[std::size_t(i)]) ok = false;
      if (!ok) continue;
      const long long v = f.node_index(v_idx);
      if (!f.inside[std::size_t(v)]) continue;
      const double w = std::abs(f.logp[std::size_t(v)] - f.logp[std::size_t(u)]);
      if (dist[std::size_t(u)] + w < dist[std::size_t(v)]) {
        dist[std::size_t(v)] = dist[std::size_t(u)] + w;
        prev[std::size_t(v)] = u;
        pq.push({dist[std::size_t(v)], v});
      }
    }
  }
  DijkstraOut out;
  if (dist[std::size_t(dst)] == kInf) return out;
  out.reachable = true;
  out.cost = dist[std::size_t(dst)];
  for (long long at = dst; at != -1; at = prev[std::size_t(at)])
    out.path_nodes.push_back(at);
  std::reverse(out.path_nodes.begin(), out.path_nodes.end());
  return out;
}

// Level-band component graph. Bands partition the logp range into slabs of
// width delta; cells (all corners inside) belong to every band their corner
// range meets, components within one band are face-connected cell sets, and
// consecutive-band components sharing a cell are linked. Graph hops * delta
// approximates inf over paths of the total variation of logp, which is the
// rank-one semi-distance (dist-1) induced by C^{ij} = score_i score_j.
struct BandGraph {
  double delta = 0.0;
  double g_lo = 0.0;
  int n_bands = 0;
  std::vector<long long> cell_full;        // compact -> full cell index
  std::vector<int> bmin, bmax;             // per compact cell
  std::vector<std::vector<int>> band_cells;  // sorted compact ids per band
  std::vector<std::vector<int>> band_vids;   // vertex id per band cell entry
  int n_vertices = 0;
  std::vector<std::vector<int>> adj;

  int band_of(double g) const {
    int k = int(std::floor((g - g_lo) / delta));
    return std::clamp(k, 0, n_bands - 1);
  }
};

struct CellGrid {
  std::array<int, 3> cres{};
  long long count() const { return (long long)(cres[0]) * cres[1] * cres[2]; }
  long long index(const std::array<int, 3>& c) const {
    return c[0] + (long long)(cres[0]) * (c[1] + (long long)(cres[1]) * c[2]);
  }
  std::array<int, 3> coords(long long t) const {
    std::array<int, 3> c{};
    c[0] = int(t % cres[0]);
    t /= cres[0];
    c[1] = int(t % cres[1]);
    c[2] = int(t / cres[1]);
    return c;
  }
};

CellGrid make_cell_grid(const GridField& f) {
  CellGrid g;
  for (int i = 0; i < 3; ++i) g.cres[std::size_t(i)] = std::max(f.res[std::size_t(i)] - 1, 1);
  return g;
}

struct UnionFind {
  std::vector<int> parent;
  void init(int n) {
    parent.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) parent[std::size_t(i)] = i;
  }
  int find(int a) {
    while (parent[std::size_t(a)] != a) {
      parent[std::size_t(a)] = parent[std::size_t(parent[std::size_t(a)])];
      a = parent[std::size_t(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::size_t(b)] = a;
  }
};

BandGraph build_band_graph(const GridField& f, double delta) {
  BandGraph bg;
  const CellGrid cg = make_cell_grid(f);
  const long long n_cells_full = cg.count();

  double g_min = kInf, g_max = -kInf;
  for (long long t = 0; t < f.node_count(); ++t)
    if (f.inside[std::size_t(t)]) {
      g_min = std::min(g_min, f.logp[std::size_t(t)]);
      g_max = std::max(g_max, f.logp[std::size_t(t)]);
    }
  if (!(g_min < kInf)) throw std::runtime_error("field has no inside nodes");
  if (delta <= 0.0) delta = std::max((g_max - g_min) / 2048.0, 1e-9);
  bg.delta = delta;
  bg.g_lo = g_min;
  bg.n_bands = std::max(1, int(std::floor((g_max - g_min) / delta)) + 1);

  // collect inside cells (all 2^d corners inside) with their corner range
  std::vector<int> full2compact(std::size_t(n_cells_full), -1);
  std::vector<double> cgmin, cgmax;
  const int corners = 1 << f.d;
  for (long long c = 0; c < n_cells_full; ++c) {
    const auto cc = cg.coords(c);
    bool ok = true;
    double mn = kInf, mx = -kInf;
    for (int m = 0; m < corners && ok; ++m) {
      std::array<int, 3> idx = cc;
      for (int i = 0; i < f.d; ++i)
        if (m & (1 << i)) idx[std::size_t(i)] += 1;
      const long long node = f.node_index(idx);
      if (!f.inside[std::size_t(node)]) {
        ok = false;
        break;
      }
      mn = std::min(mn, f.logp[std::size_t(node)]);
      mx = std::max(mx, f.logp[std::size_t(node)]);
    }
    if (!ok) continue;
    full2compact[std::size_t(c)] = int(bg.cell_full.size());
    bg.cell_full.push_back(c);
    cgmin.push_back(mn);
    cgmax.push_back(mx);
  }
  const int n_cells = int(bg.cell_full.size());
  if (n_cells == 0) throw std::runtime_error("field has no interior cells");

  bg.bmin.resize(std::size_t(n_cells));
  bg.bmax.resize(std::size_t(n_cells));
  bg.band_cells.assign(std::size_t(bg.n_bands), {});
  bg.band_vids.assign(std::size_t(bg.n_bands), {});
  for (int c = 0; c < n_cells; ++c) {
    bg.bmin[std::size_t(c)] = bg.band_of(cgmin[std::size_t(c)]);
    bg.bmax[std::size_t(c)] = bg.band_of(cgmax[std::size_t(c)]);
    for (int k = bg.bmin[std::size_t(c)]; k <= bg.bmax[std::size_t(c)]; ++k)
      bg.band_cells[std::size_t(k)].push_back(c);  // ascending in c by construction
  }

  // ascending band sweep: per-band components, vertical edges via shared cells
  std::vector<int> pos(std::size_t(n_cells), -1);
  std::vector<int> prev_vid(std::size_t(n_cells), -1);
  std::vector<std::pair<int, int>> edges;
  UnionFind uf;
  for (int k = 0; k < bg.n_bands; ++k) {
    auto& cells = bg.band_cells[std::size_t(k)];
    const int m = int(cells.size());
    if (m == 0) continue;
    for (int i = 0; i < m; ++i) pos[std::size_t(cells[std::size_t(i)])] = i;
    uf.init(m);
    for (int i = 0; i < m; ++i) {
      const int c = cells[std::size_t(i)];
      const auto cc = cg.coords(bg.cell_full[std::size_t(c)]);
      for (int ax = 0; ax < f.d; ++ax) {
        auto nb = cc;
        nb[std::size_t(ax)] += 1;
        if (nb[std::size_t(ax)] >= cg.cres[std::size_t(ax)]) continue;
        const int c2 = full2compact[std::size_t(cg.index(nb))];
        if (c2 < 0) continue;
        if (bg.bmin[std::size_t(c2)] <= k && k <= bg.bmax[std::size_t(c2)])
          uf.unite(i, pos[std::size_t(c2)]);
      }
    }
    auto& vids = bg.band_vids[std::size_t(k)];
    vids.assign(std::size_t(m), -1);
    std::vector<int> root_vid(std::size_t(m), -1);
    for (int i = 0; i < m; ++i) {
      const int r = uf.find(i);
      if (root_vid[std::size_t(r)] < 0) root_vid[std::size_t(r)] = bg.n_vertices++;
      vids[std::size_t(i)] = root_vid[std::size_t(r)];
    }
    for (int i = 0; i < m; ++i) {
      const int c = cells[std::size_t(i)];
      if (bg.bmin[std::size_t(c)] <= k - 1 && prev_vid[std::size_t(c)] >= 0)
        edges.emplace_back(vids[std::size_t(i)], prev_vid[std::size_t(c)]);
    }
    for (int i = 0; i < m; ++i) prev_vid[std::size_t(cells[std::size_t(i)])] = vids[std::size_t(i)];
    for (int i = 0; i < m; ++i) pos[std::size_t(cells[std::size_t(i)])] = -1;
  }

  bg.adj.assign(std::size_t(bg.n_vertices), {});
  for (const auto& [a, b] : edges) {
    bg.adj[std::size_t(a)].push_back(b);
    bg.adj[std::size_t(b)].push_back(a);
  }
  return bg;
}

std::vector<int> vertex_candidates(const GridField& f, const BandGraph& bg,
                                   long long node) {
  const CellGrid cg = make_cell_grid(f);
  const auto idx = f.node_coords_idx(node);
  const int k = bg.band_of(f.logp[std::size_t(node)]);
  std::vector<int> out;
  const int corners = 1 << f.d;
  for (int m = 0; m < corners; ++m) {
    std::array<int, 3> cc = idx;
    bool ok = true;
    for (int i = 0; i < f.d; ++i) {
      if (m & (1 << i)) cc[std::size_t(i)] -= 1;
      if (cc[std::size_t(i)] < 0 || cc[std::size_t(i)] >= cg.cres[std::size_t(i)]) ok = false;
    }
    if (!ok) continue;
    // recover the compact id by binary search within the band's cell list
    const long long full = cg.index(cc);
    const auto& cells = bg.band_cells[std::size_t(k)];
    int lo = 0, hi = int(cells.size()) - 1, found = -1;
    while (lo <= hi) {
      const int mid = (lo + hi) / 2;
      const long long fc = bg.cell_full[std::size_t(cells[std::size_t(mid)])];
      if (fc == full) {
        found = mid;
        break;
      }
      if (fc < full)
        lo = mid + 1;
      else
        hi = mid - 1;
    }
    if (found >= 0) out.push_back(bg.band_vids[std::size_t(k)][std::size_t(found)]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

long long band_bfs(const BandGraph& bg, const std::vector<int>& src,
                   const std::vector<int>& dst) {
  if (src.empty() || dst.empty()) return -1;
  std::vector<std::uint8_t> is_dst(std::size_t(bg.n_vertices), 0);
  for (int v : dst) is_dst[std::size_t(v)] = 1;
  std::vector<long long> dist(std::size_t(bg.n_vertices), -1);
  std::queue<int> q;
  for (int v : src) {
    if (dist[std::size_t(v)] < 0) {
      dist[std::size_t(v)] = 0;
      q.push(v);
    }
  }
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    if (is_dst[std::size_t(u)]) return dist[std::size_t(u)];
    for (int v : bg.adj[std::size_t(u)]) {
      if (dist[std::size_t(v)] < 0) {
        dist[std::size_t(v)] = dist[std::size_t(u)] + 1;
        q.push(v);
      }
    }
  }
  return -1;
}

long long snap_inside(const GridField& f, const std::vector<double>& x) {
  const long long node = f.snap_node(x);
  if (!f.is_inside_node(node))
    throw std::domain_error("point outside the positivity set U_mu");
  return node;
}

double polyline_length(const std::vector<std::vector<double>>& pts) {
  double len = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts[k].size(); ++i) {
      const double dd = pts[k][i] - pts[k - 1][i];
      s += dd * dd;
    }
    len += std::sqrt(s);
  }
  return len;
}

std::vector<std::vector<double>> resample_polyline(
    const std::vector<std::vector<double>>& pts, int segments) {
  const int d = int(pts[0].size());
  std::vector<std::vector<double>> out;
  out.reserve(std::size_t(segments) + 1);
  const double total = polyline_length(pts);
  if (total == 0.0) {
    out.assign(std::size_t(segments) + 1, pts[0]);
    return out;
  }
  out.push_back(pts.front());
  double walked = 0.0;
  std::size_t seg = 1;
  double seg_start = 0.0;
  for (int k = 1; k < segments; ++k) {
    const double target = total * double(k) / double(segments);
    while (seg < pts.size() - 1) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const double dd = pts[seg][std::size_t(i)] - pts[seg - 1][std::size_t(i)];
        s += dd * dd;
      }
      const double seg_len = std::sqrt(s);
      if (seg_start + seg_len >= target) break;
      seg_start += seg_len;
      ++seg;
    }
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const double dd = pts[seg][std::size_t(i)] - pts[seg - 1][std::size_t(i)];
      s += dd * dd;
    }
    const double seg_len = std::max(std::sqrt(s), 1e-300);
    const double t = std::clamp((target - seg_start) / seg_len, 0.0, 1.0);
    std::vector<double> p(std::size_t(d));
    for (int i = 0; i < d; ++i)
      p[std::size_t(i)] = pts[seg - 1][std::size_t(i)] +
                          t * (pts[seg][std::size_t(i)] - pts[seg - 1][std::size_t(i)]);
    out.push_back(std::move(p));
    walked = target;
  }
  (void)walked;
  out.push_back(pts.back());
  return out;
}

double segment_energy(const GridField& f, const std::vector<double>& a,
                      const std::vector<double>& b, int segments) {
  std::vector<double> mid(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
  if (!f.cell_inside(mid)) return kInf;
  const auto s = f.interp_score(mid);
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += s[i] * (b[i] - a[i]);
  return double(segments) * dot * dot;
}

}  // namespace

DistanceResult riesz_distance(const GridField& field, const std::vector<double>& x,
                              const std::vector<double>& y,
                              const GeometryOptions& opts) {
  const long long sx = snap_inside(field, x);
  const long long sy = snap_inside(field, y);

  DistanceResult out;
  if (sx == sy) {
    out.value = 0.0;
    out.path.points = {field.node_point(sx)};
    return out;
  }

  const DijkstraOut dj = node_dijkstra(field, sx, sy);
  if (!dj.reachable) {
    out.infinite = true;
    out.value = kInf;
    return out;
  }
  for (long long node : dj.path_nodes) out.path.points.push_back(field.node_point(node));

  const BandGraph bg = build_band_graph(field, opts.level_delta);
  const auto src = vertex_candidates(field, bg, sx);
  const auto dst = vertex_candidates(field, bg, sy);
  const long long hops = band_bfs(bg, src, dst);
  if (hops < 0) {
    // node graph connected but the cell graph is not (needle-thin bridge):
    // fall back to the node-graph value, an upper bound of the infimum
    out.value = dj.cost;
    return out;
  }
  out.value = std::min(double(hops) * bg.delta, dj.cost);
  return out;
}

double energy_distance(const GridField& field, const std::vector<double>& x,
                       const std::vector<double>& y, int segments,
                       int iterations, const GeometryOptions& opts) {
  if (segments < 4) throw std::invalid_argument("energy distance needs segments >= 4");
  DistanceResult seed = riesz_distance(field, x, y, opts);
  if (seed.infinite)
    throw std::domain_error("points lie in different components of U_mu");
  if (seed.path.points.size() < 2) return 0.0;

  auto path = resample_polyline(seed.path.points, segments);
  const int d = field.d;

  auto total_energy = [&]() {
    double e = 0.0;
    for (int k = 0; k + 1 <= segments; ++k)
      e += segment_energy(field, path[std::size_t(k)], path[std::size_t(k) + 1], segments);
    return e;
  };

  for (int it = 0; it < iterations; ++it) {
    bool improved = false;
    for (int k = 1; k < segments; ++k) {
      auto& v = path[std::size_t(k)];
      for (int ax = 0; ax < d; ++ax) {
        const double h = field.spacing(ax);
        double best_t = 0.0;
        double best_e = segment_energy(field, path[std::size_t(k) - 1], v, segments) +
                        segment_energy(field, v, path[std::size_t(k) + 1], segments);
        // bracket scan, then one refinement round
        double span = 2.0 * h;
        for (int round = 0; round < 2; ++round) {
          const double center = best_t;
          for (int s = -4; s <= 4; ++s) {
            const double t = center + span * double(s) / 4.0;
            if (t == best_t) continue;
            auto cand = v;
            cand[std::size_t(ax)] = v[std::size_t(ax)] + t;
            const double e =
                segment_energy(field, path[std::size_t(k) - 1], cand, segments) +
                segment_energy(field, cand, path[std::size_t(k) + 1], segments);
            if (e < best_e) {
              best_e = e;
              best_t = t;
            }
          }
          span *= 0.25;
        }
        if (best_t != 0.0) {
          v[std::size_t(ax)] += best_t;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }

  const double e = total_energy();
  return std::isfinite(e) ? std::sqrt(std::max(e, 0.0)) : kInf;
}

double bell_path_integral(const GridField& field, const PathPolyline& path) {
  if (path.points.size() < 2)
    throw std::invalid_argument("path needs at least two points");
  double acc = 0.0;
  for (std::size_t k = 1; k < path.points.size(); ++k) {
    const auto& a = path.points[k - 1];
    const auto& b = path.points[k];
    std::vector<double> mid(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
    const auto s = field.interp_score(mid);  // throws when leaving U_mu
    for (std::size_t i = 0; i < a.size(); ++i) acc += s[i] * (b[i] - a[i]);
  }
  return acc;
}

PositivityReport positivity_report(const GridField& field,
                                   const std::vector<std::vector<double>>& probes,
                                   const GeometryOptions& opts) {
  PositivityReport rep;

  // flood fill over inside nodes (8/26-neighborhood)
  const long long nodes = field.node_count();
  std::vector<int> comp(std::size_t(nodes), -1);
  const auto offsets = node_neighbor_offsets(field.d);
  for (long long start = 0; start < nodes; ++start) {
    if (!field.inside[std::size_t(start)] || comp[std::size_t(start)] >= 0) continue;
    const int id = rep.num_components++;
    long long size = 0;
    std::queue<long long> q;
    comp[std::size_t(start)] = id;
    q.push(start);
    while (!q.empty()) {
      const long long u = q.front();
      q.pop();
      ++size;
      const auto idx = field.node_coords_idx(u);
      for (const auto& off : offsets) {
        std::array<int, 3> v_idx = {idx[0] + off[0], idx[1] + off[1], idx[2] + off[2]};
        bool ok = true;
        for (int i = 0; i < 3; ++i)
          if (v_idx[std::size_t(i)] < 0 || v_idx[std::size_t(i)] >= field.res[std::size_t(i)]) ok = false;
        if (!ok) continue;
        const long long v = field.node_index(v_idx);
        if (field.inside[std::size_t(v)] && comp[std::size_t(v)] < 0) {
          comp[std::size_t(v)] = id;
          q.push(v);
        }
      }
    }
    rep.component_sizes.push_back(size);
  }

  if (!probes.empty()) {
    for (const auto& pt : probes) {
      const long long node = field.snap_node(pt);
      const double p = field.p_hat[std::size_t(node)];
      double dist = 0.0;
      if (&pt != &probes.front()) {
        const DistanceResult dr = riesz_distance(field, pt, probes.front(), opts);
        dist = dr.infinite ? kInf : dr.value;
      }
      rep.probe_findings.emplace_back(p, dist);
    }
  }
  return rep;
}

}  // namespace riesz
