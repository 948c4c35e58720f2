#include "finsler/hull3.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace finsler {

namespace {

using V3 = Eigen::Vector3d;

struct Face {
  std::array<int, 3> v{};
  V3 normal = V3::Zero();
  double offset = 0.0;
  std::vector<int> outside;
  bool alive = true;
};

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

class HullBuilder {
 public:
  HullBuilder(const std::vector<V3>& pts, double eps) : pts_(pts), eps_(eps) {}

  double distance(const Face& f, int p) const { return f.normal.dot(pts_[static_cast<std::size_t>(p)]) - f.offset; }

  int add_face(int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    const V3& pa = pts_[static_cast<std::size_t>(a)];
    const V3 n = (pts_[static_cast<std::size_t>(b)] - pa).cross(pts_[static_cast<std::size_t>(c)] - pa);
    const double len = n.norm();
    f.normal = len > 0.0 ? V3(n / len) : V3::Zero();
    f.offset = f.normal.dot(pa);
    faces_.push_back(std::move(f));
    const int id = static_cast<int>(faces_.size()) - 1;
    edges_[edge_key(a, b)] = id;
    edges_[edge_key(b, c)] = id;
    edges_[edge_key(c, a)] = id;
    return id;
  }

  void kill_face(int id) {
    Face& f = faces_[static_cast<std::size_t>(id)];
    f.alive = false;
    for (int e = 0; e < 3; ++e) {
      const auto key = edge_key(f.v[static_cast<std::size_t>(e)], f.v[static_cast<std::size_t>((e + 1) % 3)]);
      auto it = edges_.find(key);
      if (it != edges_.end() && it->second == id) edges_.erase(it);
    }
  }

  void assign(const std::vector<int>& candidates, const std::vector<int>& targets) {
    for (int p : candidates) {
      for (int id : targets) {
        if (distance(faces_[static_cast<std::size_t>(id)], p) > eps_) {
          faces_[static_cast<std::size_t>(id)].outside.push_back(p);
          break;
        }
      }
    }
  }

  HullMesh run() {
    const int n = static_cast<int>(pts_.size());
    // Initial tetrahedron from extreme points.
    int i0 = 0;
    for (int i = 1; i < n; ++i) {
      if (pts_[static_cast<std::size_t>(i)].x() < pts_[static_cast<std::size_t>(i0)].x()) i0 = i;
    }
    auto farthest = [&](auto&& score) {
      int best = -1;
      double best_score = -1.0;
      for (int i = 0; i < n; ++i) {
        const double s = score(pts_[static_cast<std::size_t>(i)]);
        if (s > best_score) {
          best_score = s;
          best = i;
        }
      }
      return std::make_pair(best, best_score);
    };
    const V3 p0 = pts_[static_cast<std::size_t>(i0)];
    const auto [i1, d1] = farthest([&](const V3& p) { return (p - p0).norm(); });
    if (d1 <= eps_) throw InputError("convex_hull_3d: all points coincide");
    const V3 dir = (pts_[static_cast<std::size_t>(i1)] - p0).normalized();
    const auto [i2, d2] = farthest([&](const V3& p) { return (p - p0).cross(dir).norm(); });
    if (d2 <= eps_) throw InputError("convex_hull_3d: points are collinear");
    const V3 nrm = (pts_[static_cast<std::size_t>(i1)] - p0).cross(pts_[static_cast<std::size_t>(i2)] - p0).normalized();
    const auto [i3, d3] = farthest([&](const V3& p) { return std::abs((p - p0).dot(nrm)); });
    if (d3 <= eps_) throw InputError("convex_hull_3d: points are coplanar");

    std::array<int, 4> tet = {i0, i1, i2, i3};
    if ((pts_[static_cast<std::size_t>(i3)] - p0).dot(nrm) > 0.0) std::swap(tet[1], tet[2]);
    // Now (tet0, tet1, tet2) is oriented with tet3 below, i.e. its normal points outward.
    std::vector<int> initial = {add_face(tet[0], tet[1], tet[2]), add_face(tet[0], tet[3], tet[1]),
                                add_face(tet[1], tet[3], tet[2]), add_face(tet[2], tet[3], tet[0])};
    std::vector<int> rest;
    for (int i = 0; i < n; ++i) {
      if (i != tet[0] && i != tet[1] && i != tet[2] && i != tet[3]) rest.push_back(i);
    }
    assign(rest, initial);

    for (std::size_t cursor = 0; cursor < faces_.size(); ++cursor) {
      if (!faces_[cursor].alive || faces_[cursor].outside.empty()) continue;
      Face& seed = faces_[cursor];
      int apex = seed.outside.front();
      double apex_d = distance(seed, apex);
      for (int p : seed.outside) {
        const double d = distance(seed, p);
        if (d > apex_d) {
          apex_d = d;
          apex = p;
        }
      }
      // Flood the visible region from the seed face.
      std::vector<int> visible = {static_cast<int>(cursor)};
      std::vector<char> mark(faces_.size(), 0);
      mark[cursor] = 1;
      std::vector<std::pair<int, int>> horizon;
      for (std::size_t k = 0; k < visible.size(); ++k) {
        const Face& f = faces_[static_cast<std::size_t>(visible[k])];
        for (int e = 0; e < 3; ++e) {
          const int a = f.v[static_cast<std::size_t>(e)];
          const int b = f.v[static_cast<std::size_t>((e + 1) % 3)];
          const auto it = edges_.find(edge_key(b, a));
          if (it == edges_.end()) throw NumericalError("convex_hull_3d: broken surface");
          const int nb = it->second;
          if (mark[static_cast<std::size_t>(nb)] == 1) continue;
          if (distance(faces_[static_cast<std::size_t>(nb)], apex) > eps_) {
            mark[static_cast<std::size_t>(nb)] = 1;
            visible.push_back(nb);
          }
        }
      }
      for (int id : visible) {
        const Face& f = faces_[static_cast<std::size_t>(id)];
        for (int e = 0; e < 3; ++e) {
          const int a = f.v[static_cast<std::size_t>(e)];
          const int b = f.v[static_cast<std::size_t>((e + 1) % 3)];
          const int nb = edges_.at(edge_key(b, a));
          if (mark[static_cast<std::size_t>(nb)] != 1) horizon.emplace_back(a, b);
        }
      }
      std::vector<int> orphans;
      for (int id : visible) {
        for (int p : faces_[static_cast<std::size_t>(id)].outside) {
          if (p != apex) orphans.push_back(p);
        }
        faces_[static_cast<std::size_t>(id)].outside.clear();
        kill_face(id);
      }
      std::vector<int> created;
      for (const auto& [a, b] : horizon) created.push_back(add_face(a, b, apex));
      assign(orphans, created);
    }

    HullMesh mesh;
    std::vector<int> remap(pts_.size(), -1);
    for (const auto& f : faces_) {
      if (!f.alive) continue;
      std::array<int, 3> tri{};
      for (std::size_t k = 0; k < 3; ++k) {
        const auto src = static_cast<std::size_t>(f.v[k]);
        if (remap[src] < 0) {
          remap[src] = static_cast<int>(mesh.points.size());
          mesh.points.push_back(pts_[src]);
        }
        tri[k] = remap[src];
      }
      mesh.faces.push_back(tri);
    }
    return mesh;
  }

 private:
  const std::vector<V3>& pts_;
  double eps_;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, int> edges_;
};

}  // namespace

HullMesh convex_hull_3d(const std::vector<Eigen::Vector3d>& points) {
  if (points.size() < 4) throw InputError("convex_hull_3d: need at least 4 points");
  double scale = 0.0;
  for (const auto& p : points) {
    if (!p.allFinite()) throw InputError("convex_hull_3d: non-finite point");
    scale = std::max(scale, p.cwiseAbs().maxCoeff());
  }
  HullBuilder builder(points, 1e-12 * std::max(scale, 1e-300));
  return builder.run();
}

PolyhedronMeasures polyhedron_measures(const HullMesh& mesh) {
  PolyhedronMeasures out;
  CompensatedSum volume;
  CompensatedSum area;
  CompensatedSum curvature;
  std::vector<V3> normals;
  std::unordered_map<std::uint64_t, int> edge_owner;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    const V3& a = mesh.points[static_cast<std::size_t>(t[0])];
    const V3& b = mesh.points[static_cast<std::size_t>(t[1])];
    const V3& c = mesh.points[static_cast<std::size_t>(t[2])];
    const V3 cr = (b - a).cross(c - a);
    area.add(0.5 * cr.norm());
    volume.add(a.dot(b.cross(c)) / 6.0);
    normals.push_back(cr.normalized());
    for (int e = 0; e < 3; ++e) {
      edge_owner[edge_key(t[static_cast<std::size_t>(e)], t[static_cast<std::size_t>((e + 1) % 3)])] = static_cast<int>(f);
    }
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    for (int e = 0; e < 3; ++e) {
      const int a = t[static_cast<std::size_t>(e)];
      const int b = t[static_cast<std::size_t>((e + 1) % 3)];
      if (a > b) continue;  // each undirected edge once
      const auto it = edge_owner.find(edge_key(b, a));
      if (it == edge_owner.end()) throw NumericalError("polyhedron_measures: surface is not closed");
      const V3& n1 = normals[f];
      const V3& n2 = normals[static_cast<std::size_t>(it->second)];
      const double angle = std::atan2(n1.cross(n2).norm(), n1.dot(n2));
      curvature.add((mesh.points[static_cast<std::size_t>(b)] - mesh.points[static_cast<std::size_t>(a)]).norm() * angle);
    }
  }
  out.volume = volume.value();
  out.area = area.value();
  out.edge_curvature = curvature.value();
  return out;
}

}  // namespace finsler
